#include <gtest/gtest.h>

#include <set>

#include "fairswap/crypto.hpp"
#include "fairswap/error.hpp"

using namespace fairswap;
using namespace fairswap::crypto;

namespace {

Bytes random_bytes(Rng& rng, std::size_t len) {
    Bytes out(len);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
}

ErrorCode decrypt_error(const CipherEnvelope& env, const DecryptionKey& key) {
    try {
        (void)decrypt(env, key);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decrypt unexpectedly succeeded";
    return ErrorCode::IoError;
}

constexpr KeyScheme kAllSchemes[] = {KeyScheme::TwoKey, KeyScheme::Symmetric, KeyScheme::Asymmetric};

}  // namespace

TEST(Keygen, SymmetricKeysAreIdentical) {
    Rng rng(7);
    const KeyPair pair = keygen(KeyScheme::Symmetric, rng);
    EXPECT_EQ(pair.enc_key.material.bytes, pair.dec_key.material.bytes);
    EXPECT_EQ(pair.scheme, KeyScheme::Symmetric);
}

TEST(Keygen, TwoKeyAndAsymmetricKeysDiffer) {
    Rng rng(7);
    for (const auto scheme : {KeyScheme::TwoKey, KeyScheme::Asymmetric}) {
        const KeyPair pair = keygen(scheme, rng);
        EXPECT_NE(pair.enc_key.material.bytes, pair.dec_key.material.bytes);
        EXPECT_EQ(pair.enc_key.material.key_id, pair.key_id);
        EXPECT_EQ(pair.dec_key.material.key_id, pair.key_id);
    }
}

TEST(Keygen, IdenticalSeedsGiveIdenticalPairs) {
    for (const auto scheme : kAllSchemes) {
        Rng a(99), b(99);
        EXPECT_EQ(keygen(scheme, a), keygen(scheme, b));
    }
}

TEST(Keygen, KeyIdsAreUniqueWithinARun) {
    Rng rng(1);
    std::set<KeyId> seen;
    for (int i = 0; i < 2000; ++i) {
        EXPECT_TRUE(seen.insert(keygen(kAllSchemes[i % 3], rng).key_id).second);
    }
}

TEST(Keygen, RejectsUnsupportedModulusWidth) {
    Rng rng(1);
    EXPECT_THROW(keygen(KeyScheme::Asymmetric, rng, KeygenOptions{70}), Error);
    EXPECT_THROW(keygen(KeyScheme::Asymmetric, rng, KeygenOptions{15}), Error);
}

TEST(Envelope, RoundTripsEverySchemeAndLength) {
    Rng rng(2024);
    for (const auto scheme : kAllSchemes) {
        for (std::size_t len = 1; len < 150; len += 7) {
            const KeyPair pair = keygen(scheme, rng);
            const Bytes data = random_bytes(rng, len);
            const CipherEnvelope env = encrypt(data, pair.enc_key);
            EXPECT_EQ(env.plaintext_len, len);
            EXPECT_EQ(env.key_id, pair.key_id);
            EXPECT_NE(env.payload, data);
            EXPECT_EQ(decrypt(env, pair.dec_key), data) << to_string(scheme) << " len " << len;
        }
    }
}

TEST(Envelope, SmallModuliStillRoundTrip) {
    Rng rng(5);
    for (const unsigned bits : {16u, 24u, 32u, 48u, 64u}) {
        const KeyPair pair = keygen(KeyScheme::Asymmetric, rng, KeygenOptions{bits});
        const Bytes data = random_bytes(rng, 33);
        EXPECT_EQ(decrypt(encrypt(data, pair.enc_key), pair.dec_key), data) << bits;
    }
}

TEST(Envelope, EmptyPayloadIsRejected) {
    Rng rng(3);
    const KeyPair pair = keygen(KeyScheme::Symmetric, rng);
    try {
        (void)encrypt(Bytes{}, pair.enc_key);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyPayload);
    }
}

TEST(Envelope, ForeignKeyIsAKeyMismatch) {
    Rng rng(11);
    for (const auto scheme : kAllSchemes) {
        const KeyPair mine = keygen(scheme, rng);
        const KeyPair other = keygen(scheme, rng);
        const CipherEnvelope env = encrypt(random_bytes(rng, 40), mine.enc_key);
        EXPECT_EQ(decrypt_error(env, other.dec_key), ErrorCode::KeyMismatch) << to_string(scheme);
    }
}

TEST(Envelope, ForgedKeyIdDoesNotBypassIntegrityCheck) {
    Rng rng(12);
    const KeyPair mine = keygen(KeyScheme::TwoKey, rng);
    KeyPair other = keygen(KeyScheme::TwoKey, rng);
    other.dec_key.material.key_id = mine.key_id;
    const CipherEnvelope env = encrypt(random_bytes(rng, 40), mine.enc_key);
    EXPECT_EQ(decrypt_error(env, other.dec_key), ErrorCode::CorruptEnvelope);
}

TEST(Envelope, AnyFlippedByteIsDetected) {
    Rng rng(13);
    for (const auto scheme : kAllSchemes) {
        const KeyPair pair = keygen(scheme, rng);
        const CipherEnvelope env = encrypt(random_bytes(rng, 24), pair.enc_key);
        for (std::size_t at = 0; at < env.payload.size(); ++at) {
            CipherEnvelope bad = env;
            bad.payload[at] ^= 0x01;
            EXPECT_EQ(decrypt_error(bad, pair.dec_key), ErrorCode::CorruptEnvelope) << to_string(scheme) << " @" << at;
        }
    }
}

TEST(Envelope, EncryptionKeyCannotDecrypt) {
    Rng rng(17);
    for (const auto scheme : {KeyScheme::TwoKey, KeyScheme::Asymmetric}) {
        for (int trial = 0; trial < 50; ++trial) {
            const KeyPair pair = keygen(scheme, rng);
            const CipherEnvelope env = encrypt(random_bytes(rng, 16), pair.enc_key);
            EXPECT_THROW((void)decrypt(env, DecryptionKey{pair.enc_key.material}), Error);
        }
    }
}

TEST(Envelope, EncryptionIsDeterministic) {
    Rng a(21), b(21);
    const KeyPair pa = keygen(KeyScheme::TwoKey, a);
    const KeyPair pb = keygen(KeyScheme::TwoKey, b);
    const Bytes data = random_bytes(a, 64);
    EXPECT_EQ(encrypt(data, pa.enc_key), encrypt(data, pb.enc_key));
}

TEST(Hybrid, WrappedSymmetricKeyOpensUnderPrivateKey) {
    Rng rng(31);
    const KeyPair a_sym = keygen(KeyScheme::Symmetric, rng);
    const KeyPair b_rsa = keygen(KeyScheme::Asymmetric, rng);

    const CipherEnvelope sealed_key = encrypt(a_sym.enc_key.material.bytes, b_rsa.enc_key);
    EXPECT_EQ(decrypt(sealed_key, b_rsa.dec_key), a_sym.enc_key.material.bytes);
}

TEST(Hybrid, ComposedRoundTripRecoversData) {
    Rng rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        const KeyPair data_key = keygen(KeyScheme::Symmetric, rng);
        const KeyPair receiver = keygen(KeyScheme::Asymmetric, rng);
        const Bytes data = random_bytes(rng, 1 + rng() % 200);

        const CipherEnvelope data_env = encrypt(data, data_key.enc_key);
        const CipherEnvelope key_env = wrap_key(data_key.dec_key.material, receiver.enc_key);

        const KeyMaterial recovered = unwrap_key(key_env, receiver.dec_key);
        EXPECT_EQ(decrypt(data_env, DecryptionKey{recovered}), data);
        // the wrapped key is useless to anyone holding only the public half
        EXPECT_THROW((void)unwrap_key(key_env, DecryptionKey{receiver.enc_key.material}), Error);
    }
}

TEST(KeyEncoding, RoundTripsAndRejectsTruncation) {
    Rng rng(41);
    for (const auto scheme : kAllSchemes) {
        const KeyMaterial key = keygen(scheme, rng).dec_key.material;
        const Bytes wire = encode_key(key);
        EXPECT_EQ(decode_key(wire), key);
        EXPECT_THROW(decode_key(std::span(wire).first(wire.size() - 1)), Error);
    }
}

TEST(NumberTheory, PrimalityAgreesWithTrialDivision) {
    auto trial = [](std::uint64_t n) {
        if (n < 2) return false;
        for (std::uint64_t d = 2; d * d <= n; ++d) {
            if (n % d == 0) return false;
        }
        return true;
    };
    for (std::uint64_t n = 0; n < 20000; ++n) {
        ASSERT_EQ(detail::is_prime(n), trial(n)) << n;
    }
    // Strong pseudoprimes to several small bases.
    EXPECT_FALSE(detail::is_prime(3215031751ULL));
    EXPECT_FALSE(detail::is_prime(3825123056546413051ULL));
    EXPECT_TRUE(detail::is_prime(18446744073709551557ULL));
}

TEST(NumberTheory, PowmodMatchesRepeatedMultiplication) {
    Rng rng(43);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t m = 2 + rng() % 1000003;
        const std::uint64_t base = rng();
        const std::uint64_t exp = rng() % 300;
        std::uint64_t expected = 1 % m;
        for (std::uint64_t i = 0; i < exp; ++i) expected = (expected * (base % m)) % m;
        EXPECT_EQ(detail::powmod(base, exp, m), expected);
    }
}
