#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "fairswap/types.hpp"

namespace fairswap {

/// Fixed-size bitmap over piece ids.
class PieceSet {
public:
    PieceSet() = default;
    explicit PieceSet(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    static PieceSet full(std::size_t size) {
        PieceSet out(size);
        for (std::size_t i = 0; i < size; ++i) out.set(static_cast<PieceId>(i));
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }

    [[nodiscard]] bool test(PieceId piece) const noexcept { return (words_[piece / 64] >> (piece % 64)) & 1U; }
    void set(PieceId piece) noexcept { words_[piece / 64] |= std::uint64_t{1} << (piece % 64); }
    void reset(PieceId piece) noexcept { words_[piece / 64] &= ~(std::uint64_t{1} << (piece % 64)); }

    [[nodiscard]] std::size_t count() const noexcept {
        std::size_t n = 0;
        for (const auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }
    [[nodiscard]] bool empty() const noexcept { return count() == 0; }
    [[nodiscard]] bool complete() const noexcept { return count() == size_; }

    /// Pieces in this set that are not in `other`.
    [[nodiscard]] PieceSet minus(const PieceSet& other) const {
        PieceSet out = *this;
        for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= ~other.words_[i];
        return out;
    }

    [[nodiscard]] PieceSet intersect(const PieceSet& other) const {
        PieceSet out = *this;
        for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= other.words_[i];
        return out;
    }

    /// True when this set holds at least one piece absent from both `a` and `b`.
    [[nodiscard]] bool any_outside(const PieceSet& a, const PieceSet& b) const noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if ((words_[i] & ~a.words_[i] & ~b.words_[i]) != 0) return true;
        }
        return false;
    }

    [[nodiscard]] std::vector<PieceId> ids() const {
        std::vector<PieceId> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                out.push_back(static_cast<PieceId>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
                bits &= bits - 1;
            }
        }
        return out;
    }

    bool operator==(const PieceSet&) const = default;

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace fairswap
