// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#define OPENSSL_SUPPRESS_DEPRECATED
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/obj_mac.h>

#include <set>

using namespace niji;
using namespace niji::test;

namespace {

// Plain OpenSSL ECDSA verification, sharing nothing with the library's
// signing or recovery code.
bool openssl_verify(const PublicKey& pk, const Hash256& digest, const RecoverableSignature& sig)
{
    EC_KEY* key = EC_KEY_new_by_curve_name(NID_secp256k1);
    const auto enc = pk.compressed();
    const unsigned char* p = enc.data();
    EC_KEY* parsed = o2i_ECPublicKey(&key, &p, static_cast<long>(enc.size()));
    ECDSA_SIG* s = ECDSA_SIG_new();
    ECDSA_SIG_set0(s, BN_bin2bn(sig.r.data(), 32, nullptr), BN_bin2bn(sig.s.data(), 32, nullptr));
    const int rc = parsed ? ECDSA_do_verify(digest.data(), 32, s, key) : -1;
    ECDSA_SIG_free(s);
    EC_KEY_free(key);
    return rc == 1;
}

template <std::size_t N>
std::string hex(const ByteArray<N>& a)
{
    return to_hex(a);
}

}  // namespace

TEST_CASE("sha256d and hash160 match the reference vectors", "[crypto]")
{
    CHECK(hex(sha256d(Bytes{})) == "5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456");
    CHECK(hex(sha256d(to_bytes("abc"))) == "4f8b42c22dd3729b519ba6f68d2da7cc5b2d606d05daed5ad5128cc03e6c6358");
    CHECK(hex(hash160(Bytes{})) == "b472a266d0bd89c13706a4132ccfb16f7c3b9fcb");
    CHECK(hex(hash160(from_hex("0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798"))) ==
          "751e76e8199196d454941c45d1b3a323f1433bd6");
    CHECK(hex(hash160(from_hex(kPkUser))) == "c112128204b5759bef3b1e49c644a134895e4ea6");
    CHECK(hex(hash160(from_hex(kPkSp))) == "caf5daf52ac8f0ee7682bb0474ebcdb4bead1c0e");
}

TEST_CASE("sha256d agrees exactly when sha256 agrees", "[crypto]")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Bytes x = random_bytes(rng, i % 70);
        const Bytes y = i % 3 == 0 ? x : random_bytes(rng, i % 70);
        CHECK((sha256d(x) == sha256d(y)) == (sha256(x) == sha256(y)));
    }
}

TEST_CASE("hash160 of distinct random inputs never collides", "[crypto]")
{
    std::mt19937_64 rng(12);
    std::set<Hash160> seen;
    for (int i = 0; i < 1000; ++i)
        seen.insert(hash160(random_bytes(rng, 32)));
    CHECK(seen.size() == 1000);
}

TEST_CASE("keccak256 matches the reference vectors", "[crypto]")
{
    CHECK(hex(keccak256(Bytes{})) == "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
    CHECK(hex(keccak256(to_bytes("abc"))) == "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
    // Lengths around the 136-byte rate boundary absorb and pad consistently.
    for (std::size_t n : {135u, 136u, 137u, 272u})
        CHECK(keccak256(Bytes(n, 0x61)) != keccak256(Bytes(n + 1, 0x61)));
}

TEST_CASE("public keys and addresses of the fixed keys", "[crypto]")
{
    const auto one = SecretKey::from_bytes(from_hex(std::string(63, '0') + "1"));
    REQUIRE(one);
    CHECK(one->public_key().hex() == "0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798");
    CHECK(eth_address(one->public_key()).hex() == "7e5f4552091a69125d5dfcb7b8c2659029395bdf");

    CHECK(user_key().public_key().hex() == kPkUser);
    CHECK(sp_key().public_key().hex() == kPkSp);
    CHECK(eth_address(user_key().public_key()).hex() == kEthUser);
    CHECK(eth_address(sp_key().public_key()).hex() == "0ffdf322890a64e130796a92d8d261120c47779b");
}

TEST_CASE("eth_address normalizes compressed and uncompressed encodings", "[crypto]")
{
    const PublicKey pk = user_key().public_key();
    const auto un = PublicKey::parse(pk.uncompressed());
    REQUIRE(un);
    CHECK(*un == pk);
    CHECK(eth_address(*un) == eth_address(pk));
    CHECK(to_hex(pk.uncompressed()).substr(0, 2) == "04");
}

TEST_CASE("invalid keys and points are rejected", "[crypto]")
{
    CHECK_FALSE(SecretKey::from_bytes(Bytes(32, 0)));
    CHECK_FALSE(SecretKey::from_bytes(from_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141")));
    CHECK_FALSE(SecretKey::from_bytes(Bytes(31, 1)));
    // x = 0x0505..05 has no square root for y; x = 0xffff..ff is above the field prime.
    Bytes off_curve(33, 0x05);
    off_curve[0] = 0x02;
    CHECK_FALSE(PublicKey::parse(off_curve));
    Bytes too_big(33, 0xff);
    too_big[0] = 0x03;
    CHECK_FALSE(PublicKey::parse(too_big));
    Bytes bad_prefix = from_hex(kPkUser);
    bad_prefix[0] = 0x05;
    CHECK_FALSE(PublicKey::parse(bad_prefix));
    CHECK_FALSE(PublicKey::parse(Bytes(20, 0x02)));
    CHECK_THROWS(SecretKey::from_hex("00"));
}

TEST_CASE("RFC6979 signing matches the reference vector", "[crypto]")
{
    const auto sig = ecdsa_sign(user_key(), sha256d(to_bytes("abc")));
    CHECK(hex(sig.r) == "a583e3ee268cd764779bf45bd17f5945ce37c50ecce161f31f287280b3ec0ca6");
    CHECK(hex(sig.s) == "7fb688b5bf1893b645f041da313c6972b5ce43b088246fddd28d1e7df7781a5e");
    CHECK(sig.has_low_s());
    CHECK(ecdsa_sign(user_key(), sha256d(to_bytes("abc"))) == sig);
}

TEST_CASE("sign and recover round-trip over random keys", "[crypto]")
{
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        const SecretKey k = random_key(rng);
        const Hash256 h = random_digest(rng);
        const auto sig = ecdsa_sign(k, h);
        INFO("iteration " << i);
        REQUIRE(sig.has_low_s());
        REQUIRE(sig.v <= 1);
        CHECK(ecdsa_recover(h, sig) == k.public_key());
        CHECK(eth_address(ecdsa_recover(h, sig)) == eth_address(k.public_key()));
        CHECK(openssl_verify(k.public_key(), h, sig));
        CHECK(ecdsa_verify(k.public_key(), h, sig.r, sig.s));

        Hash256 flipped = h;
        flipped[i % 32] ^= static_cast<std::uint8_t>(1u << (i % 8));
        CHECK_FALSE(openssl_verify(k.public_key(), flipped, sig));
        CHECK_FALSE(ecdsa_verify(k.public_key(), flipped, sig.r, sig.s));
    }
}

TEST_CASE("signature over another digest does not verify", "[crypto]")
{
    const auto sig = ecdsa_sign(user_key(), sha256d(to_bytes("modtx")));
    CHECK_FALSE(openssl_verify(user_key().public_key(), sha256d(to_bytes("modtx2")), sig));
    CHECK(openssl_verify(user_key().public_key(), sha256d(to_bytes("modtx")), sig));
}

TEST_CASE("the wrong recovery id yields a different address", "[crypto]")
{
    std::mt19937_64 rng(14);
    for (int i = 0; i < 20; ++i) {
        const SecretKey k = random_key(rng);
        const Bytes modtx = random_bytes(rng, 90);
        const auto sig = ecdsa_sign(k, sha256d(modtx));
        const EthAddress expected = eth_address(k.public_key());
        CHECK(verify(modtx, sig.v, sig.r, sig.s, expected));
        CHECK(verify(modtx, sig.v + 27, sig.r, sig.s, expected));
        // The other id either fails to recover or recovers a different key.
        CHECK_FALSE(verify(modtx, sig.v ^ 1, sig.r, sig.s, expected));
    }
}

TEST_CASE("recovery rejects malformed inputs", "[crypto]")
{
    const Hash256 h = sha256d(to_bytes("x"));
    const auto sig = ecdsa_sign(user_key(), h);
    const auto n = array_from_hex<32>("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141");
    CHECK_THROWS_AS(ecdsa_recover(h, sig.v, sig.r, n), SignatureError);
    CHECK_THROWS_AS(ecdsa_recover(h, sig.v, n, sig.s), SignatureError);
    CHECK_THROWS_AS(ecdsa_recover(h, sig.v, ByteArray<32>{}, sig.s), SignatureError);
    CHECK_THROWS_AS(ecdsa_recover(h, sig.v, sig.r, ByteArray<32>{}), SignatureError);
    CHECK_THROWS_AS(ecdsa_recover(h, 4, sig.r, sig.s), SignatureError);
    CHECK_FALSE(verify(to_bytes("x"), 4, sig.r, sig.s, eth_address(user_key().public_key())));
}

TEST_CASE("DER encoding is strict and round-trips", "[crypto]")
{
    std::mt19937_64 rng(15);
    for (int i = 0; i < 100; ++i) {
        const auto sig = ecdsa_sign(random_key(rng), random_digest(rng));
        const Bytes der = sig.der();
        REQUIRE(is_strict_der(der));
        const auto back = RecoverableSignature::from_der(der, sig.v);
        REQUIRE(back);
        CHECK(*back == sig);
        CHECK(RecoverableSignature::from_compact(sig.compact()) == sig);
    }
    const Bytes der = ecdsa_sign(user_key(), sha256d(Bytes{})).der();
    Bytes padded = der;
    padded[1] += 1;
    padded.push_back(0);
    CHECK_FALSE(is_strict_der(padded));
    Bytes wrong_tag = der;
    wrong_tag[0] = 0x31;
    CHECK_FALSE(is_strict_der(wrong_tag));
    CHECK_FALSE(RecoverableSignature::from_der(wrong_tag));
}
