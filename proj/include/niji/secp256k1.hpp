// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/bytes.hpp"
#include "niji/hash.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace niji {

struct SignatureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A point on secp256k1, stored in its 33-byte compressed encoding.
class PublicKey
{
public:
    /// Accepts 33-byte compressed or 65-byte uncompressed SEC1 encodings.
    /// Returns nullopt if the bytes do not describe a curve point.
    static std::optional<PublicKey> parse(ByteView encoded);

    const ByteArray<33>& compressed() const { return compressed_; }
    const ByteArray<65>& uncompressed() const { return uncompressed_; }
    std::string hex() const { return to_hex(compressed_); }

    auto operator<=>(const PublicKey&) const = default;

private:
    PublicKey(const ByteArray<33>& c, const ByteArray<65>& u) : compressed_(c), uncompressed_(u) {}
    ByteArray<33> compressed_{};
    ByteArray<65> uncompressed_{};
};

class SecretKey
{
public:
    /// nullopt unless 0 < k < n.
    static std::optional<SecretKey> from_bytes(ByteView raw);
    static SecretKey from_hex(std::string_view hex);

    const ByteArray<32>& bytes() const { return bytes_; }
    PublicKey public_key() const;

private:
    explicit SecretKey(const ByteArray<32>& b) : bytes_(b) {}
    ByteArray<32> bytes_{};
};

/// Ethereum-style 160-bit account identifier.
struct EthAddress {
    ByteArray<20> bytes{};

    std::string hex() const { return to_hex(bytes); }
    auto operator<=>(const EthAddress&) const = default;
};

/// ECDSA signature carrying the recovery id needed by ecrecover.
struct RecoverableSignature {
    ByteArray<32> r{};
    ByteArray<32> s{};
    std::uint8_t v = 0;  // 0..3

    /// Strict-DER (BIP66) encoding of (r, s), without a sighash byte.
    Bytes der() const;
    /// Parses strict DER; v is not part of DER and must be supplied.
    static std::optional<RecoverableSignature> from_der(ByteView der, std::uint8_t v = 0);

    /// r || s || v, the 65-byte form passed through contract calls.
    ByteArray<65> compact() const;
    static RecoverableSignature from_compact(ByteView data);

    bool has_low_s() const;

    auto operator<=>(const RecoverableSignature&) const = default;
};

/// Deterministic (RFC 6979, HMAC-SHA256) low-s ECDSA over a 32-byte digest.
RecoverableSignature ecdsa_sign(const SecretKey& key, const Hash256& digest);

/// Recovers the signing key. v may be 0..3 or the Ethereum 27..30 form.
/// Throws SignatureError on a bad recovery id, r or s out of [1, n), an
/// r that is not an x-coordinate, or a point at infinity.
PublicKey ecdsa_recover(const Hash256& digest, std::uint8_t v, const ByteArray<32>& r, const ByteArray<32>& s);

inline PublicKey ecdsa_recover(const Hash256& digest, const RecoverableSignature& sig)
{
    return ecdsa_recover(digest, sig.v, sig.r, sig.s);
}

/// Plain ECDSA verification (u1*G + u2*Q).x == r; accepts either s half.
bool ecdsa_verify(const PublicKey& key, const Hash256& digest, const ByteArray<32>& r, const ByteArray<32>& s);

/// Right-most 20 bytes of Keccak-256 over the 64-byte uncompressed key body.
EthAddress eth_address(const PublicKey& key);

/// Validates the BIP66 strict-DER shape without decoding.
bool is_strict_der(ByteView der);

}  // namespace niji
