// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/secp256k1.hpp"

#include "ecmult.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <memory>

namespace niji {

namespace {

struct BnFree {
    void operator()(BIGNUM* p) const { BN_free(p); }
};
struct CtxFree {
    void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct PointFree {
    void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct GroupFree {
    void operator()(EC_GROUP* p) const { EC_GROUP_free(p); }
};

using Bn = std::unique_ptr<BIGNUM, BnFree>;
using Ctx = std::unique_ptr<BN_CTX, CtxFree>;
using Point = std::unique_ptr<EC_POINT, PointFree>;

Bn bn() { return Bn(BN_new()); }

Bn bn_from(ByteView b) { return Bn(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr)); }

ByteArray<32> bn_to32(const BIGNUM* v)
{
    ByteArray<32> out{};
    if (BN_bn2binpad(v, out.data(), 32) != 32)
        throw std::runtime_error("scalar does not fit 32 bytes");
    return out;
}

/// Process-wide immutable curve parameters.
class Curve
{
public:
    static const Curve& get()
    {
        static const Curve instance;
        return instance;
    }

    const EC_GROUP* group() const { return group_.get(); }
    const BIGNUM* order() const { return order_.get(); }
    const BIGNUM* half_order() const { return half_.get(); }
    const BIGNUM* prime() const { return prime_.get(); }

private:
    Curve() : group_(EC_GROUP_new_by_curve_name(NID_secp256k1)), order_(bn()), half_(bn()), prime_(bn())
    {
        if (!group_)
            throw std::runtime_error("secp256k1 unavailable in libcrypto");
        Ctx ctx(BN_CTX_new());
        EC_GROUP_get_order(group_.get(), order_.get(), ctx.get());
        BN_rshift1(half_.get(), order_.get());
        EC_GROUP_get_curve(group_.get(), prime_.get(), nullptr, nullptr, ctx.get());
    }

    std::unique_ptr<EC_GROUP, GroupFree> group_;
    Bn order_;
    Bn half_;
    Bn prime_;
};

Point point_from_bytes(ByteView encoded, BN_CTX* ctx)
{
    const auto& c = Curve::get();
    Point p(EC_POINT_new(c.group()));
    if (EC_POINT_oct2point(c.group(), p.get(), encoded.data(), encoded.size(), ctx) != 1)
        return nullptr;
    if (EC_POINT_is_at_infinity(c.group(), p.get()) || EC_POINT_is_on_curve(c.group(), p.get(), ctx) != 1)
        return nullptr;
    return p;
}

template <std::size_t N>
ByteArray<N> encode_point(const EC_POINT* p, BN_CTX* ctx)
{
    constexpr auto form = N == 33 ? POINT_CONVERSION_COMPRESSED : POINT_CONVERSION_UNCOMPRESSED;
    ByteArray<N> out{};
    if (EC_POINT_point2oct(Curve::get().group(), p, form, out.data(), out.size(), ctx) != out.size())
        throw std::runtime_error("point encoding failed");
    return out;
}

bool in_scalar_range(const BIGNUM* v)
{
    return !BN_is_zero(v) && !BN_is_negative(v) && BN_cmp(v, Curve::get().order()) < 0;
}

/// bits2int(digest) mod n; the digest is already qlen bits wide.
Bn digest_scalar(const Hash256& digest, BN_CTX* ctx)
{
    Bn z = bn_from(digest);
    BN_nnmod(z.get(), z.get(), Curve::get().order(), ctx);
    return z;
}

}  // namespace

std::optional<PublicKey> PublicKey::parse(ByteView encoded)
{
    if (encoded.size() != 33 && encoded.size() != 65)
        return std::nullopt;
    if (encoded.size() == 33 && encoded[0] != 0x02 && encoded[0] != 0x03)
        return std::nullopt;
    if (encoded.size() == 65 && encoded[0] != 0x04)
        return std::nullopt;
    Ctx ctx(BN_CTX_new());
    Point p = point_from_bytes(encoded, ctx.get());
    if (!p)
        return std::nullopt;
    return PublicKey(encode_point<33>(p.get(), ctx.get()), encode_point<65>(p.get(), ctx.get()));
}

std::optional<SecretKey> SecretKey::from_bytes(ByteView raw)
{
    if (raw.size() != 32)
        return std::nullopt;
    Bn k = bn_from(raw);
    if (!in_scalar_range(k.get()))
        return std::nullopt;
    ByteArray<32> b{};
    std::copy(raw.begin(), raw.end(), b.begin());
    return SecretKey(b);
}

SecretKey SecretKey::from_hex(std::string_view hex)
{
    auto key = from_bytes(niji::from_hex(hex));
    if (!key)
        throw SignatureError("secret key out of range");
    return *key;
}

PublicKey SecretKey::public_key() const
{
    return *PublicKey::parse(ec::uncompressed(ec::mul_gen(bytes_)));
}

bool is_strict_der(ByteView sig)
{
    // Shape rules from BIP66, applied to a signature without its sighash byte.
    if (sig.size() < 8 || sig.size() > 72)
        return false;
    if (sig[0] != 0x30 || sig[1] != sig.size() - 2)
        return false;
    const std::size_t len_r = sig[3];
    if (5 + len_r >= sig.size())
        return false;
    const std::size_t len_s = sig[5 + len_r];
    if (len_r + len_s + 6 != sig.size())
        return false;
    if (sig[2] != 0x02 || len_r == 0 || (sig[4] & 0x80))
        return false;
    if (len_r > 1 && sig[4] == 0x00 && !(sig[5] & 0x80))
        return false;
    if (sig[len_r + 4] != 0x02 || len_s == 0 || (sig[len_r + 6] & 0x80))
        return false;
    if (len_s > 1 && sig[len_r + 6] == 0x00 && !(sig[len_r + 7] & 0x80))
        return false;
    return true;
}

namespace {

Bytes der_integer(const ByteArray<32>& v)
{
    std::size_t i = 0;
    while (i < v.size() - 1 && v[i] == 0)
        ++i;
    Bytes out;
    if (v[i] & 0x80)
        out.push_back(0x00);
    out.insert(out.end(), v.begin() + static_cast<std::ptrdiff_t>(i), v.end());
    return out;
}

std::optional<ByteArray<32>> der_to32(ByteView v)
{
    while (!v.empty() && v[0] == 0)
        v = v.subspan(1);
    if (v.size() > 32)
        return std::nullopt;
    ByteArray<32> out{};
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(32 - v.size()));
    return out;
}

}  // namespace

Bytes RecoverableSignature::der() const
{
    const Bytes ir = der_integer(r);
    const Bytes is = der_integer(s);
    Bytes out;
    out.push_back(0x30);
    out.push_back(static_cast<std::uint8_t>(4 + ir.size() + is.size()));
    out.push_back(0x02);
    out.push_back(static_cast<std::uint8_t>(ir.size()));
    append(out, ir);
    out.push_back(0x02);
    out.push_back(static_cast<std::uint8_t>(is.size()));
    append(out, is);
    return out;
}

std::optional<RecoverableSignature> RecoverableSignature::from_der(ByteView der, std::uint8_t v)
{
    if (!is_strict_der(der))
        return std::nullopt;
    const std::size_t len_r = der[3];
    const std::size_t len_s = der[5 + len_r];
    auto r = der_to32(der.subspan(4, len_r));
    auto s = der_to32(der.subspan(6 + len_r, len_s));
    if (!r || !s)
        return std::nullopt;
    return RecoverableSignature{*r, *s, v};
}

ByteArray<65> RecoverableSignature::compact() const
{
    ByteArray<65> out{};
    std::copy(r.begin(), r.end(), out.begin());
    std::copy(s.begin(), s.end(), out.begin() + 32);
    out[64] = v;
    return out;
}

RecoverableSignature RecoverableSignature::from_compact(ByteView data)
{
    if (data.size() != 65)
        throw SignatureError("compact signature must be 65 bytes");
    RecoverableSignature sig;
    std::copy(data.begin(), data.begin() + 32, sig.r.begin());
    std::copy(data.begin() + 32, data.begin() + 64, sig.s.begin());
    sig.v = data[64];
    return sig;
}

bool RecoverableSignature::has_low_s() const
{
    Bn sv = bn_from(s);
    return !BN_is_zero(sv.get()) && BN_cmp(sv.get(), Curve::get().half_order()) <= 0;
}

RecoverableSignature ecdsa_sign(const SecretKey& key, const Hash256& digest)
{
    const auto& c = Curve::get();
    Ctx ctx(BN_CTX_new());
    Bn d = bn_from(key.bytes());
    Bn z = digest_scalar(digest, ctx.get());
    const ByteArray<32> h1 = bn_to32(z.get());

    // RFC 6979 section 3.2 with HMAC-SHA256.
    Hash256 v;
    Hash256 k;
    v.fill(0x01);
    k.fill(0x00);
    auto mac = [&](std::optional<std::uint8_t> sep, bool with_key) {
        Bytes msg(v.begin(), v.end());
        if (sep) {
            msg.push_back(*sep);
            if (with_key) {
                append(msg, key.bytes());
                append(msg, h1);
            }
        }
        return hmac_sha256(k, msg);
    };
    k = mac(0x00, true);
    v = hmac_sha256(k, v);
    k = mac(0x01, true);
    v = hmac_sha256(k, v);

    Bn rx = bn();
    bool ry_odd = false;
    Bn r = bn();
    Bn s = bn();
    for (;;) {
        v = hmac_sha256(k, v);
        Bn nonce = bn_from(v);
        if (in_scalar_range(nonce.get())) {
            const ec::Affine big_r = ec::mul_gen(v);
            rx = bn_from(ec::fe_bytes(big_r.x));
            ry_odd = ec::fe_bytes(big_r.y)[31] & 1;
            BN_nnmod(r.get(), rx.get(), c.order(), ctx.get());
            if (!BN_is_zero(r.get())) {
                Bn kinv(BN_mod_inverse(nullptr, nonce.get(), c.order(), ctx.get()));
                Bn rd = bn();
                BN_mod_mul(rd.get(), r.get(), d.get(), c.order(), ctx.get());
                BN_mod_add(s.get(), z.get(), rd.get(), c.order(), ctx.get());
                BN_mod_mul(s.get(), s.get(), kinv.get(), c.order(), ctx.get());
                if (!BN_is_zero(s.get()))
                    break;
            }
        }
        k = mac(0x00, false);
        v = hmac_sha256(k, v);
    }

    std::uint8_t recid = ry_odd ? 1 : 0;
    if (BN_cmp(rx.get(), c.order()) >= 0)
        recid |= 2;
    if (BN_cmp(s.get(), c.half_order()) > 0) {
        BN_sub(s.get(), c.order(), s.get());
        recid ^= 1;
    }
    return RecoverableSignature{bn_to32(r.get()), bn_to32(s.get()), recid};
}

PublicKey ecdsa_recover(const Hash256& digest, std::uint8_t v, const ByteArray<32>& r_bytes,
                        const ByteArray<32>& s_bytes)
{
    if (v >= 27 && v <= 30)
        v = static_cast<std::uint8_t>(v - 27);
    if (v > 3)
        throw SignatureError("invalid recovery id");

    const auto& c = Curve::get();
    Ctx ctx(BN_CTX_new());
    Bn r = bn_from(r_bytes);
    Bn s = bn_from(s_bytes);
    if (!in_scalar_range(r.get()))
        throw SignatureError("r out of range");
    if (!in_scalar_range(s.get()))
        throw SignatureError("s out of range");

    Bn x = bn();
    BN_copy(x.get(), r.get());
    if (v & 2)
        BN_add(x.get(), x.get(), c.order());
    if (BN_cmp(x.get(), c.prime()) >= 0)
        throw SignatureError("r is not a valid x-coordinate for this recovery id");

    const auto big_r = ec::lift_x(bn_to32(x.get()), v & 1);
    if (!big_r)
        throw SignatureError("r is not a valid x-coordinate");

    // Q = r^-1 (s*R - z*G)
    Bn rinv(BN_mod_inverse(nullptr, r.get(), c.order(), ctx.get()));
    Bn z = digest_scalar(digest, ctx.get());
    Bn u1 = bn();
    Bn u2 = bn();
    BN_mod_mul(u1.get(), z.get(), rinv.get(), c.order(), ctx.get());
    BN_mod_sub(u1.get(), c.order(), u1.get(), c.order(), ctx.get());
    BN_mod_mul(u2.get(), s.get(), rinv.get(), c.order(), ctx.get());

    const ec::Affine q = ec::mul_add(bn_to32(u1.get()), bn_to32(u2.get()), *big_r);
    if (q.infinity)
        throw SignatureError("recovered point at infinity");
    return *PublicKey::parse(ec::uncompressed(q));
}

bool ecdsa_verify(const PublicKey& key, const Hash256& digest, const ByteArray<32>& r_bytes,
                  const ByteArray<32>& s_bytes)
{
    const auto& c = Curve::get();
    Ctx ctx(BN_CTX_new());
    Bn r = bn_from(r_bytes);
    Bn s = bn_from(s_bytes);
    if (!in_scalar_range(r.get()) || !in_scalar_range(s.get()))
        return false;
    Bn w(BN_mod_inverse(nullptr, s.get(), c.order(), ctx.get()));
    Bn z = digest_scalar(digest, ctx.get());
    Bn u1 = bn();
    Bn u2 = bn();
    BN_mod_mul(u1.get(), z.get(), w.get(), c.order(), ctx.get());
    BN_mod_mul(u2.get(), r.get(), w.get(), c.order(), ctx.get());
    const ec::Affine p =
        ec::mul_add(bn_to32(u1.get()), bn_to32(u2.get()), ec::from_uncompressed(key.uncompressed()));
    if (p.infinity)
        return false;
    Bn x = bn_from(ec::fe_bytes(p.x));
    BN_nnmod(x.get(), x.get(), c.order(), ctx.get());
    return BN_cmp(x.get(), r.get()) == 0;
}

EthAddress eth_address(const PublicKey& key)
{
    const ByteArray<65> full = key.uncompressed();
    const Hash256 h = keccak256(ByteView(full).subspan(1));
    EthAddress out;
    std::copy(h.begin() + 12, h.end(), out.bytes.begin());
    return out;
}

}  // namespace niji
