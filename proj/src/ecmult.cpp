// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "ecmult.hpp"

#include <array>

namespace niji::ec {

namespace {

using u64 = std::uint64_t;
__extension__ using u128 = unsigned __int128;

// p = 2^256 - kC
constexpr u64 kC = 0x1000003D1ULL;
constexpr Fe kP{{0xFFFFFFFEFFFFFC2FULL, ~0ULL, ~0ULL, ~0ULL}};

bool is_zero(const Fe& a)
{
    return (a.v[0] | a.v[1] | a.v[2] | a.v[3]) == 0;
}

bool equal(const Fe& a, const Fe& b)
{
    return a.v[0] == b.v[0] && a.v[1] == b.v[1] && a.v[2] == b.v[2] && a.v[3] == b.v[3];
}

bool geq_p(const u64 r[4])
{
    if (r[3] != kP.v[3] || r[2] != kP.v[2] || r[1] != kP.v[1])
        return r[3] > kP.v[3];  // upper limbs of p are all ones
    return r[0] >= kP.v[0];
}

/// r - p in place; caller guarantees r >= p or a carry bit above r.
void sub_p(u64 r[4])
{
    u128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        const u128 d = static_cast<u128>(r[i]) - kP.v[i] - borrow;
        r[i] = static_cast<u64>(d);
        borrow = (d >> 64) & 1;
    }
}

Fe add(const Fe& a, const Fe& b)
{
    Fe r;
    u128 c = 0;
    for (int i = 0; i < 4; ++i) {
        c += static_cast<u128>(a.v[i]) + b.v[i];
        r.v[i] = static_cast<u64>(c);
        c >>= 64;
    }
    if (c || geq_p(r.v))
        sub_p(r.v);
    return r;
}

Fe sub(const Fe& a, const Fe& b)
{
    Fe r;
    u128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        const u128 d = static_cast<u128>(a.v[i]) - b.v[i] - borrow;
        r.v[i] = static_cast<u64>(d);
        borrow = (d >> 64) & 1;
    }
    if (borrow) {
        u128 c = 0;
        for (int i = 0; i < 4; ++i) {
            c += static_cast<u128>(r.v[i]) + kP.v[i];
            r.v[i] = static_cast<u64>(c);
            c >>= 64;
        }
    }
    return r;
}

Fe mul(const Fe& a, const Fe& b)
{
    u64 t[8] = {};
    for (int i = 0; i < 4; ++i) {
        u128 carry = 0;
        for (int j = 0; j < 4; ++j) {
            carry += static_cast<u128>(a.v[i]) * b.v[j] + t[i + j];
            t[i + j] = static_cast<u64>(carry);
            carry >>= 64;
        }
        t[i + 4] = static_cast<u64>(carry);
    }
    // Fold the high half: 2^256 = kC (mod p).
    u64 r[4];
    u128 c = 0;
    for (int i = 0; i < 4; ++i) {
        c += static_cast<u128>(t[4 + i]) * kC + t[i];
        r[i] = static_cast<u64>(c);
        c >>= 64;
    }
    c = c * kC + r[0];
    r[0] = static_cast<u64>(c);
    c >>= 64;
    for (int i = 1; i < 4; ++i) {
        c += r[i];
        r[i] = static_cast<u64>(c);
        c >>= 64;
    }
    if (c) {
        c = static_cast<u128>(r[0]) + kC;
        r[0] = static_cast<u64>(c);
        c >>= 64;
        for (int i = 1; i < 4 && c; ++i) {
            c += r[i];
            r[i] = static_cast<u64>(c);
            c >>= 64;
        }
    }
    if (geq_p(r))
        sub_p(r);
    return Fe{{r[0], r[1], r[2], r[3]}};
}

Fe sqr(const Fe& a)
{
    return mul(a, a);
}

/// a^e for a 256-bit exponent given as limbs.
Fe pow(const Fe& a, const Fe& e)
{
    Fe r{{1, 0, 0, 0}};
    for (int i = 255; i >= 0; --i) {
        r = sqr(r);
        if ((e.v[i / 64] >> (i % 64)) & 1)
            r = mul(r, a);
    }
    return r;
}

Fe inv(const Fe& a)
{
    constexpr Fe kPMinus2{{0xFFFFFFFEFFFFFC2DULL, ~0ULL, ~0ULL, ~0ULL}};
    return pow(a, kPMinus2);
}

Fe fe_from(const ByteArray<32>& b)
{
    Fe f;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 8; ++j)
            f.v[i] |= static_cast<u64>(b[31 - (8 * i + j)]) << (8 * j);
    return f;
}

Fe small(u64 x)
{
    return Fe{{x, 0, 0, 0}};
}

struct Jacobian {
    Fe x;
    Fe y;
    Fe z;
    bool infinity = true;
};

Jacobian to_jacobian(const Affine& p)
{
    return Jacobian{p.x, p.y, small(1), p.infinity};
}

Jacobian dbl(const Jacobian& p)
{
    if (p.infinity || is_zero(p.y))
        return {};
    const Fe a = sqr(p.x);
    const Fe b = sqr(p.y);
    const Fe c = sqr(b);
    Fe d = sub(sub(sqr(add(p.x, b)), a), c);
    d = add(d, d);
    const Fe e = add(add(a, a), a);
    const Fe f = sqr(e);
    Jacobian r;
    r.infinity = false;
    r.x = sub(f, add(d, d));
    Fe c8 = add(c, c);
    c8 = add(c8, c8);
    c8 = add(c8, c8);
    r.y = sub(mul(e, sub(d, r.x)), c8);
    const Fe yz = mul(p.y, p.z);
    r.z = add(yz, yz);
    return r;
}

Jacobian add(const Jacobian& p, const Jacobian& q)
{
    if (p.infinity)
        return q;
    if (q.infinity)
        return p;
    const Fe z1z1 = sqr(p.z);
    const Fe z2z2 = sqr(q.z);
    const Fe u1 = mul(p.x, z2z2);
    const Fe u2 = mul(q.x, z1z1);
    const Fe s1 = mul(mul(p.y, q.z), z2z2);
    const Fe s2 = mul(mul(q.y, p.z), z1z1);
    const Fe h = sub(u2, u1);
    const Fe sd = sub(s2, s1);
    if (is_zero(h))
        return is_zero(sd) ? dbl(p) : Jacobian{};
    const Fe h2 = add(h, h);
    const Fe i = sqr(h2);
    const Fe j = mul(h, i);
    const Fe rr = add(sd, sd);
    const Fe v = mul(u1, i);
    Jacobian r;
    r.infinity = false;
    r.x = sub(sub(sqr(rr), j), add(v, v));
    const Fe s1j = mul(s1, j);
    r.y = sub(mul(rr, sub(v, r.x)), add(s1j, s1j));
    r.z = mul(sub(sub(sqr(add(p.z, q.z)), z1z1), z2z2), h);
    return r;
}

Jacobian add_affine(const Jacobian& p, const Affine& q)
{
    if (q.infinity)
        return p;
    if (p.infinity)
        return to_jacobian(q);
    const Fe z1z1 = sqr(p.z);
    const Fe u2 = mul(q.x, z1z1);
    const Fe s2 = mul(mul(q.y, p.z), z1z1);
    const Fe h = sub(u2, p.x);
    const Fe sd = sub(s2, p.y);
    if (is_zero(h))
        return is_zero(sd) ? dbl(p) : Jacobian{};
    const Fe hh = sqr(h);
    Fe i = add(hh, hh);
    i = add(i, i);
    const Fe j = mul(h, i);
    const Fe rr = add(sd, sd);
    const Fe v = mul(p.x, i);
    Jacobian r;
    r.infinity = false;
    r.x = sub(sub(sqr(rr), j), add(v, v));
    const Fe yj = mul(p.y, j);
    r.y = sub(mul(rr, sub(v, r.x)), add(yj, yj));
    r.z = sub(sub(sqr(add(p.z, h)), z1z1), hh);
    return r;
}

Affine to_affine(const Jacobian& p)
{
    if (p.infinity)
        return {};
    const Fe zi = inv(p.z);
    const Fe zi2 = sqr(zi);
    return Affine{mul(p.x, zi2), mul(p.y, mul(zi2, zi)), false};
}

int nibble(const Scalar& k, int i)
{
    const std::uint8_t b = k[31 - i / 2];
    return i % 2 ? b >> 4 : b & 0x0f;
}

const Affine& generator()
{
    static const Affine g{
        fe_from(array_from_hex<32>("79be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798")),
        fe_from(array_from_hex<32>("483ada7726a3c4655da4fbfc0e1108a8fd17b448a68554199c47d08ffb10d4b8")), false};
    return g;
}

using GenTable = std::array<std::array<Affine, 16>, 64>;

/// table[i][j] = j * 16^i * G
const GenTable& gen_table()
{
    static const GenTable table = [] {
        GenTable t{};
        Jacobian base = to_jacobian(generator());
        for (int i = 0; i < 64; ++i) {
            Jacobian acc;
            for (int j = 1; j < 16; ++j) {
                acc = add(acc, base);
                t[i][j] = to_affine(acc);
            }
            for (int k = 0; k < 4; ++k)
                base = dbl(base);
        }
        return t;
    }();
    return table;
}

Jacobian mul_gen_jacobian(const Scalar& k)
{
    const GenTable& t = gen_table();
    Jacobian acc;
    for (int i = 0; i < 64; ++i)
        if (const int n = nibble(k, i))
            acc = add_affine(acc, t[i][n]);
    return acc;
}

}  // namespace

std::optional<Affine> lift_x(const ByteArray<32>& xb, bool odd_y)
{
    const Fe x = fe_from(xb);
    if (geq_p(x.v))
        return std::nullopt;
    const Fe rhs = add(mul(sqr(x), x), small(7));
    // p = 3 mod 4, so a square root is rhs^((p+1)/4).
    constexpr Fe kSqrtExp{{0xFFFFFFFFBFFFFF0CULL, ~0ULL, ~0ULL, 0x3FFFFFFFFFFFFFFFULL}};
    Fe y = pow(rhs, kSqrtExp);
    if (!equal(sqr(y), rhs))
        return std::nullopt;
    if (static_cast<bool>(y.v[0] & 1) != odd_y)
        y = sub(Fe{}, y);
    return Affine{x, y, false};
}

Affine from_uncompressed(const ByteArray<65>& enc)
{
    ByteArray<32> x{};
    ByteArray<32> y{};
    std::copy(enc.begin() + 1, enc.begin() + 33, x.begin());
    std::copy(enc.begin() + 33, enc.end(), y.begin());
    return Affine{fe_from(x), fe_from(y), false};
}

Affine mul_gen(const Scalar& k)
{
    return to_affine(mul_gen_jacobian(k));
}

Affine mul_add(const Scalar& a, const Scalar& b, const Affine& p)
{
    std::array<Jacobian, 16> multiples;
    multiples[1] = to_jacobian(p);
    for (int j = 2; j < 16; ++j)
        multiples[j] = add_affine(multiples[j - 1], p);
    Jacobian acc;
    for (int i = 63; i >= 0; --i) {
        for (int k = 0; k < 4; ++k)
            acc = dbl(acc);
        if (const int n = nibble(b, i))
            acc = add(acc, multiples[n]);
    }
    return to_affine(add(acc, mul_gen_jacobian(a)));
}

ByteArray<32> fe_bytes(const Fe& f)
{
    ByteArray<32> out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 8; ++j)
            out[31 - (8 * i + j)] = static_cast<std::uint8_t>(f.v[i] >> (8 * j));
    return out;
}

ByteArray<65> uncompressed(const Affine& p)
{
    ByteArray<65> out{};
    out[0] = 0x04;
    const auto x = fe_bytes(p.x);
    const auto y = fe_bytes(p.y);
    std::copy(x.begin(), x.end(), out.begin() + 1);
    std::copy(y.begin(), y.end(), out.begin() + 33);
    return out;
}

}  // namespace niji::ec
