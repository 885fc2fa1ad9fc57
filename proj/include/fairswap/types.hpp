#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

namespace fairswap {

using Bytes = std::vector<std::uint8_t>;
using PieceId = std::uint32_t;
using SessionId = std::uint64_t;
using KeyId = std::uint64_t;

struct NodeId {
    std::uint32_t value = 0;

    constexpr auto operator<=>(const NodeId&) const = default;
};

}  // namespace fairswap

template <>
struct std::hash<fairswap::NodeId> {
    std::size_t operator()(fairswap::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
