// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace niji {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;

/// Satoshi amount. 1 BTC = 100,000,000 sat.
using Amount = std::int64_t;
inline constexpr Amount kCoin = 100'000'000;

std::string to_hex(ByteView data);

/// Throws std::invalid_argument on odd length or a non-hex digit.
Bytes from_hex(std::string_view hex);

template <std::size_t N>
ByteArray<N> array_from_hex(std::string_view hex)
{
    const Bytes raw = from_hex(hex);
    if (raw.size() != N)
        throw std::invalid_argument("hex string has wrong length");
    ByteArray<N> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

template <std::size_t N>
Bytes to_bytes(const ByteArray<N>& a)
{
    return Bytes(a.begin(), a.end());
}

inline void append(Bytes& dst, ByteView src) { dst.insert(dst.end(), src.begin(), src.end()); }

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Little-endian Bitcoin-style serializer.
class Writer
{
public:
    Writer& u8(std::uint8_t v);
    Writer& u32(std::uint32_t v);
    Writer& u64(std::uint64_t v);
    Writer& varint(std::uint64_t v);
    Writer& raw(ByteView data);
    Writer& var_bytes(ByteView data);
    Writer& str(std::string_view s) { return var_bytes(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())); }

    const Bytes& bytes() const& { return buf_; }
    Bytes bytes() && { return std::move(buf_); }

private:
    Bytes buf_;
};

class Reader
{
public:
    explicit Reader(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::uint64_t varint();
    Bytes raw(std::size_t n);
    Bytes var_bytes();
    std::string str();

    template <std::size_t N>
    ByteArray<N> array()
    {
        ByteArray<N> out{};
        const Bytes b = raw(N);
        std::copy(b.begin(), b.end(), out.begin());
        return out;
    }

    std::uint8_t peek() const;
    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    void expect_done() const
    {
        if (!done())
            throw DecodeError("trailing bytes after record");
    }

private:
    void need(std::size_t n) const;

    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace niji
