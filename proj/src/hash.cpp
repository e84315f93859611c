// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

// RIPEMD-160 is only reachable through the deprecated low-level API in
// OpenSSL 3.0 (the EVP digest lives in the legacy provider there).
#define OPENSSL_SUPPRESS_DEPRECATED

#include "niji/hash.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/ripemd.h>

#include <bit>
#include <stdexcept>

namespace niji {

Hash256 sha256(ByteView data)
{
    Hash256 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
        throw std::runtime_error("EVP_Digest(sha256) failed");
    return out;
}

Hash256 sha256d(ByteView data)
{
    const Hash256 once = sha256(data);
    return sha256(once);
}

Hash160 ripemd160(ByteView data)
{
    Hash160 out{};
    RIPEMD160(data.data(), data.size(), out.data());
    return out;
}

Hash160 hash160(ByteView data)
{
    const Hash256 inner = sha256(data);
    return ripemd160(inner);
}

Hash256 hmac_sha256(ByteView key, ByteView data)
{
    Hash256 out{};
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) ==
            nullptr ||
        len != out.size())
        throw std::runtime_error("HMAC(sha256) failed");
    return out;
}

namespace {

constexpr std::uint64_t kRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Rotation offsets and lane permutation for the combined rho/pi step.
constexpr int kRho[24] = {1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14, 27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44};
constexpr int kPi[24] = {10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4, 15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1};

void keccak_f1600(std::uint64_t st[25])
{
    for (std::uint64_t rc : kRoundConstants) {
        std::uint64_t c[5];
        for (int x = 0; x < 5; ++x)
            c[x] = st[x] ^ st[x + 5] ^ st[x + 10] ^ st[x + 15] ^ st[x + 20];
        for (int x = 0; x < 5; ++x) {
            const std::uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5)
                st[y + x] ^= d;
        }
        std::uint64_t carry = st[1];
        for (int i = 0; i < 24; ++i) {
            const int j = kPi[i];
            const std::uint64_t tmp = st[j];
            st[j] = std::rotl(carry, kRho[i]);
            carry = tmp;
        }
        for (int y = 0; y < 25; y += 5) {
            std::uint64_t row[5];
            for (int x = 0; x < 5; ++x)
                row[x] = st[y + x];
            for (int x = 0; x < 5; ++x)
                st[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
        }
        st[0] ^= rc;
    }
}

}  // namespace

Hash256 keccak256(ByteView data)
{
    constexpr std::size_t kRate = 136;
    std::uint64_t st[25] = {};

    auto absorb = [&st](const std::uint8_t* block) {
        for (std::size_t i = 0; i < kRate / 8; ++i) {
            std::uint64_t lane = 0;
            for (int b = 0; b < 8; ++b)
                lane |= static_cast<std::uint64_t>(block[i * 8 + b]) << (8 * b);
            st[i] ^= lane;
        }
        keccak_f1600(st);
    };

    std::size_t off = 0;
    for (; off + kRate <= data.size(); off += kRate)
        absorb(data.data() + off);

    std::uint8_t last[kRate] = {};
    const std::size_t tail = data.size() - off;
    std::copy(data.begin() + static_cast<std::ptrdiff_t>(off), data.end(), last);
    last[tail] ^= 0x01;
    last[kRate - 1] ^= 0x80;
    absorb(last);

    Hash256 out{};
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(st[i / 8] >> (8 * (i % 8)));
    return out;
}

}  // namespace niji
