#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "fairswap/random.hpp"
#include "fairswap/types.hpp"

namespace fairswap::crypto {

enum class KeyScheme : std::uint8_t {
    TwoKey = 0,      // separate encryption / decryption keys (realized with the RSA model)
    Symmetric = 1,   // one key for both directions
    Asymmetric = 2,  // public / private pair
};

std::string_view to_string(KeyScheme scheme) noexcept;

struct KeyMaterial {
    KeyScheme scheme = KeyScheme::Symmetric;
    KeyId key_id = 0;
    Bytes bytes;

    bool operator==(const KeyMaterial&) const = default;
};

// Distinct wrapper types: nothing that needs a decryption key accepts an
// encryption key, and vice versa.
struct EncryptionKey {
    KeyMaterial material;
    bool operator==(const EncryptionKey&) const = default;
};

struct DecryptionKey {
    KeyMaterial material;
    bool operator==(const DecryptionKey&) const = default;
};

struct KeyPair {
    EncryptionKey enc_key;
    DecryptionKey dec_key;
    KeyScheme scheme = KeyScheme::Symmetric;
    KeyId key_id = 0;

    bool operator==(const KeyPair&) const = default;
};

struct CipherEnvelope {
    Bytes payload;
    KeyId key_id = 0;
    std::size_t plaintext_len = 0;

    bool operator==(const CipherEnvelope&) const = default;
};

struct KeygenOptions {
    /// Modulus width of the RSA model, in bits. Even, within [16, 64].
    unsigned modulus_bits = 64;
};

/// Fresh key pair drawn from `rng`. Deterministic in the rng state.
KeyPair keygen(KeyScheme scheme, Rng& rng, const KeygenOptions& options = {});

/// Throws Error(EmptyPayload) on empty input.
CipherEnvelope encrypt(std::span<const std::uint8_t> data, const EncryptionKey& key);

/// Throws Error(KeyMismatch) when the key does not belong to the envelope and
/// Error(CorruptEnvelope) when the envelope fails its integrity check under
/// the right key.
Bytes decrypt(const CipherEnvelope& envelope, const DecryptionKey& key);

/// Self-describing wire form of a key: scheme, key id, then the raw bytes.
Bytes encode_key(const KeyMaterial& key);
KeyMaterial decode_key(std::span<const std::uint8_t> wire);

/// Convenience for hybrid use: the symmetric key material carried inside an
/// envelope sealed for a public key.
CipherEnvelope wrap_key(const KeyMaterial& key, const EncryptionKey& wrapping_key);
KeyMaterial unwrap_key(const CipherEnvelope& wrapped, const DecryptionKey& unwrapping_key);

namespace detail {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);
bool is_prime(std::uint64_t n);
std::uint64_t keyed_digest(std::span<const std::uint8_t> key, std::span<const std::uint8_t> data);

}  // namespace detail

}  // namespace fairswap::crypto
