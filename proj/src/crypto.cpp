#include "fairswap/crypto.hpp"

#include <algorithm>
#include <array>
#include <bit>

#include "fairswap/error.hpp"

namespace fairswap::crypto {

namespace {

constexpr std::size_t kDigestBytes = 8;
constexpr std::size_t kSymmetricKeyBytes = 16;
constexpr std::size_t kRsaKeyBytes = 16;  // modulus || exponent, big-endian u64 each

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void put_u64(Bytes& out, std::uint64_t value) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(value >> shift));
    }
}

std::uint64_t get_u64(std::span<const std::uint8_t> in) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        value = (value << 8) | in[i];
    }
    return value;
}

[[noreturn]] void integrity_failure(const CipherEnvelope& envelope, const DecryptionKey& key) {
    if (envelope.key_id != key.material.key_id) {
        throw Error(ErrorCode::KeyMismatch, "envelope was not sealed for this key");
    }
    throw Error(ErrorCode::CorruptEnvelope, "integrity check failed");
}

// ---------------------------------------------------------------------------
// Symmetric: keyed counter-mode stream over [digest || plaintext].

Bytes symmetric_transform(std::span<const std::uint8_t> key, std::span<const std::uint8_t> input) {
    static constexpr std::array<std::uint8_t, 6> kStreamLabel{'s', 't', 'r', 'e', 'a', 'm'};
    const std::uint64_t stream_seed = detail::keyed_digest(key, kStreamLabel);
    Bytes out(input.begin(), input.end());
    std::uint64_t block = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i % 8 == 0) {
            block = splitmix64(stream_seed + (i / 8) * kGolden);
        }
        out[i] ^= static_cast<std::uint8_t>(block >> (8 * (i % 8)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// RSA model over a modulus of at most 64 bits.

struct RsaKey {
    std::uint64_t modulus = 0;
    std::uint64_t exponent = 0;

    [[nodiscard]] std::size_t block_bytes() const {
        return static_cast<std::size_t>((std::bit_width(modulus) - 1) / 8);
    }
    [[nodiscard]] std::size_t cipher_bytes() const {
        return static_cast<std::size_t>((std::bit_width(modulus) + 7) / 8);
    }
    [[nodiscard]] Bytes modulus_bytes() const {
        Bytes out;
        put_u64(out, modulus);
        return out;
    }
};

bool parse_rsa(const KeyMaterial& key, RsaKey& out) {
    if (key.bytes.size() != kRsaKeyBytes) return false;
    out.modulus = get_u64(key.bytes);
    out.exponent = get_u64(std::span(key.bytes).subspan(8));
    return out.modulus >= 256 && out.exponent > 0;
}

Bytes rsa_material(std::uint64_t modulus, std::uint64_t exponent) {
    Bytes out;
    put_u64(out, modulus);
    put_u64(out, exponent);
    return out;
}

std::uint64_t random_prime(unsigned bits, Rng& rng) {
    const std::uint64_t top_two = 3ULL << (bits - 2);
    const std::uint64_t span_mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
    for (;;) {
        std::uint64_t candidate = (rng() & span_mask) | top_two | 1ULL;
        for (int attempt = 0; attempt < 512 && candidate <= span_mask; ++attempt, candidate += 2) {
            if (detail::is_prime(candidate)) return candidate;
        }
    }
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
    while (b != 0) {
        a %= b;
        std::swap(a, b);
    }
    return a;
}

std::uint64_t mod_inverse(std::uint64_t value, std::uint64_t modulus) {
    __int128 t = 0, new_t = 1;
    __int128 r = modulus, new_r = value;
    while (new_r != 0) {
        const __int128 q = r / new_r;
        t = t - q * new_t;
        std::swap(t, new_t);
        r = r - q * new_r;
        std::swap(r, new_r);
    }
    if (t < 0) t += modulus;
    return static_cast<std::uint64_t>(t);
}

KeyPair rsa_keygen(KeyScheme scheme, Rng& rng, unsigned modulus_bits) {
    if (modulus_bits < 16 || modulus_bits > 64 || modulus_bits % 2 != 0) {
        throw Error(ErrorCode::InvalidConfig, "modulus_bits must be even and within [16, 64]");
    }
    static constexpr std::array<std::uint64_t, 5> kExponents{65537, 257, 17, 5, 3};
    const unsigned half = modulus_bits / 2;
    for (;;) {
        const std::uint64_t p = random_prime(half, rng);
        const std::uint64_t q = random_prime(half, rng);
        if (p == q) continue;
        const std::uint64_t phi = (p - 1) * (q - 1);
        for (const std::uint64_t e : kExponents) {
            if (e >= phi || gcd(e, phi) != 1) continue;
            const std::uint64_t d = mod_inverse(e, phi);
            if (d == e) break;
            const std::uint64_t n = p * q;
            const KeyId id = rng();
            return KeyPair{EncryptionKey{KeyMaterial{scheme, id, rsa_material(n, e)}},
                           DecryptionKey{KeyMaterial{scheme, id, rsa_material(n, d)}}, scheme, id};
        }
    }
}

Bytes rsa_encrypt(const RsaKey& key, std::span<const std::uint8_t> input) {
    const std::size_t in_block = key.block_bytes();
    const std::size_t out_block = key.cipher_bytes();
    Bytes out;
    out.reserve((input.size() + in_block - 1) / in_block * out_block);
    for (std::size_t offset = 0; offset < input.size(); offset += in_block) {
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < in_block; ++i) {
            const std::size_t at = offset + i;
            m = (m << 8) | (at < input.size() ? input[at] : 0);
        }
        const std::uint64_t c = detail::powmod(m, key.exponent, key.modulus);
        for (std::size_t i = out_block; i-- > 0;) {
            out.push_back(static_cast<std::uint8_t>(c >> (8 * i)));
        }
    }
    return out;
}

/// Empty result signals a structurally invalid ciphertext.
Bytes rsa_decrypt(const RsaKey& key, std::span<const std::uint8_t> payload, std::size_t expected) {
    const std::size_t in_block = key.block_bytes();
    const std::size_t out_block = key.cipher_bytes();
    if (payload.empty() || payload.size() % out_block != 0) return {};
    Bytes out;
    out.reserve(payload.size() / out_block * in_block);
    for (std::size_t offset = 0; offset < payload.size(); offset += out_block) {
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < out_block; ++i) {
            c = (c << 8) | payload[offset + i];
        }
        if (c >= key.modulus) return {};
        const std::uint64_t m = detail::powmod(c, key.exponent, key.modulus);
        if (in_block < 8 && (m >> (8 * in_block)) != 0) return {};
        for (std::size_t i = in_block; i-- > 0;) {
            out.push_back(static_cast<std::uint8_t>(m >> (8 * i)));
        }
    }
    if (out.size() < expected) return {};
    out.resize(expected);
    return out;
}

Bytes digest_bytes(std::uint64_t digest) {
    Bytes out;
    put_u64(out, digest);
    return out;
}

}  // namespace

namespace detail {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp != 0) {
        if (exp & 1ULL) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    static constexpr std::array<std::uint64_t, 12> kBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (const std::uint64_t p : kBases) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1ULL) == 0) {
        d >>= 1;
        ++s;
    }
    // These bases are a deterministic witness set for all n < 2^64.
    for (const std::uint64_t a : kBases) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t keyed_digest(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data) {
    std::uint64_t h = kFnvOffset ^ key.size();
    auto absorb = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= kFnvPrime;
    };
    for (const auto b : key) absorb(b);
    absorb(0xff);
    for (const auto b : data) absorb(b);
    h = splitmix64(h ^ data.size());
    for (const auto b : key) absorb(b);
    return splitmix64(h);
}

}  // namespace detail

std::string_view to_string(KeyScheme scheme) noexcept {
    switch (scheme) {
        case KeyScheme::TwoKey: return "TWO_KEY";
        case KeyScheme::Symmetric: return "SYMMETRIC";
        case KeyScheme::Asymmetric: return "ASYMMETRIC";
    }
    return "?";
}

KeyPair keygen(KeyScheme scheme, Rng& rng, const KeygenOptions& options) {
    if (scheme == KeyScheme::Symmetric) {
        Bytes key(kSymmetricKeyBytes);
        for (std::size_t i = 0; i < key.size(); i += 8) {
            const std::uint64_t word = rng();
            for (std::size_t j = 0; j < 8; ++j) key[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
        }
        const KeyId id = rng();
        return KeyPair{EncryptionKey{KeyMaterial{scheme, id, key}}, DecryptionKey{KeyMaterial{scheme, id, key}},
                       scheme, id};
    }
    return rsa_keygen(scheme, rng, options.modulus_bits);
}

CipherEnvelope encrypt(std::span<const std::uint8_t> data, const EncryptionKey& key) {
    if (data.empty()) {
        throw Error(ErrorCode::EmptyPayload, "nothing to encrypt");
    }
    const KeyMaterial& material = key.material;
    Bytes framed;
    framed.reserve(kDigestBytes + data.size());

    if (material.scheme == KeyScheme::Symmetric) {
        framed = digest_bytes(detail::keyed_digest(material.bytes, data));
        framed.insert(framed.end(), data.begin(), data.end());
        return CipherEnvelope{symmetric_transform(material.bytes, framed), material.key_id, data.size()};
    }

    RsaKey rsa;
    if (!parse_rsa(material, rsa)) {
        throw Error(ErrorCode::KeyMismatch, "malformed public key");
    }
    framed = digest_bytes(detail::keyed_digest(rsa.modulus_bytes(), data));
    framed.insert(framed.end(), data.begin(), data.end());
    return CipherEnvelope{rsa_encrypt(rsa, framed), material.key_id, data.size()};
}

Bytes decrypt(const CipherEnvelope& envelope, const DecryptionKey& key) {
    const KeyMaterial& material = key.material;
    const std::size_t framed_len = kDigestBytes + envelope.plaintext_len;

    Bytes framed;
    Bytes digest_key;
    if (material.scheme == KeyScheme::Symmetric) {
        if (envelope.payload.size() != framed_len) integrity_failure(envelope, key);
        framed = symmetric_transform(material.bytes, envelope.payload);
        digest_key = material.bytes;
    } else {
        RsaKey rsa;
        if (!parse_rsa(material, rsa)) integrity_failure(envelope, key);
        framed = rsa_decrypt(rsa, envelope.payload, framed_len);
        if (framed.empty()) integrity_failure(envelope, key);
        digest_key = rsa.modulus_bytes();
    }

    const auto body = std::span<const std::uint8_t>(framed).subspan(kDigestBytes);
    if (get_u64(framed) != detail::keyed_digest(digest_key, body)) {
        integrity_failure(envelope, key);
    }
    if (envelope.key_id != material.key_id) {
        throw Error(ErrorCode::KeyMismatch, "envelope was not sealed for this key");
    }
    return Bytes(body.begin(), body.end());
}

Bytes encode_key(const KeyMaterial& key) {
    Bytes out;
    out.reserve(1 + 8 + 2 + key.bytes.size());
    out.push_back(static_cast<std::uint8_t>(key.scheme));
    put_u64(out, key.key_id);
    out.push_back(static_cast<std::uint8_t>(key.bytes.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(key.bytes.size()));
    out.insert(out.end(), key.bytes.begin(), key.bytes.end());
    return out;
}

KeyMaterial decode_key(std::span<const std::uint8_t> wire) {
    if (wire.size() < 11 || wire[0] > static_cast<std::uint8_t>(KeyScheme::Asymmetric)) {
        throw Error(ErrorCode::CorruptEnvelope, "malformed key encoding");
    }
    const std::size_t len = (static_cast<std::size_t>(wire[9]) << 8) | wire[10];
    if (wire.size() != 11 + len) {
        throw Error(ErrorCode::CorruptEnvelope, "key encoding length mismatch");
    }
    return KeyMaterial{static_cast<KeyScheme>(wire[0]), get_u64(wire.subspan(1)),
                       Bytes(wire.begin() + 11, wire.end())};
}

CipherEnvelope wrap_key(const KeyMaterial& key, const EncryptionKey& wrapping_key) {
    return encrypt(encode_key(key), wrapping_key);
}

KeyMaterial unwrap_key(const CipherEnvelope& wrapped, const DecryptionKey& unwrapping_key) {
    return decode_key(decrypt(wrapped, unwrapping_key));
}

}  // namespace fairswap::crypto
