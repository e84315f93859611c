// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/bytes.hpp"

namespace niji {

namespace {

int nibble(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string to_hex(ByteView data)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw std::invalid_argument("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = nibble(hex[i]);
        const int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

Writer& Writer::u8(std::uint8_t v)
{
    buf_.push_back(v);
    return *this;
}

Writer& Writer::u32(std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
}

Writer& Writer::u64(std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
}

Writer& Writer::varint(std::uint64_t v)
{
    if (v < 0xfd) {
        u8(static_cast<std::uint8_t>(v));
    } else if (v <= 0xffff) {
        u8(0xfd);
        buf_.push_back(static_cast<std::uint8_t>(v));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    } else if (v <= 0xffffffff) {
        u8(0xfe);
        u32(static_cast<std::uint32_t>(v));
    } else {
        u8(0xff);
        u64(v);
    }
    return *this;
}

Writer& Writer::raw(ByteView data)
{
    append(buf_, data);
    return *this;
}

Writer& Writer::var_bytes(ByteView data)
{
    varint(data.size());
    return raw(data);
}

void Reader::need(std::size_t n) const
{
    if (remaining() < n)
        throw DecodeError("unexpected end of data");
}

std::uint8_t Reader::u8()
{
    need(1);
    return data_[pos_++];
}

std::uint8_t Reader::peek() const
{
    need(1);
    return data_[pos_];
}

std::uint32_t Reader::u32()
{
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
}

std::uint64_t Reader::u64()
{
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
}

std::uint64_t Reader::varint()
{
    const std::uint8_t tag = u8();
    std::uint64_t v = 0;
    if (tag < 0xfd)
        return tag;
    if (tag == 0xfd) {
        need(2);
        v = data_[pos_] | (static_cast<std::uint64_t>(data_[pos_ + 1]) << 8);
        pos_ += 2;
        if (v < 0xfd)
            throw DecodeError("non-canonical varint");
    } else if (tag == 0xfe) {
        v = u32();
        if (v <= 0xffff)
            throw DecodeError("non-canonical varint");
    } else {
        v = u64();
        if (v <= 0xffffffff)
            throw DecodeError("non-canonical varint");
    }
    return v;
}

Bytes Reader::raw(std::size_t n)
{
    need(n);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
}

Bytes Reader::var_bytes()
{
    const std::uint64_t n = varint();
    if (n > remaining())
        throw DecodeError("length prefix exceeds data");
    return raw(static_cast<std::size_t>(n));
}

std::string Reader::str()
{
    const Bytes b = var_bytes();
    return std::string(b.begin(), b.end());
}

}  // namespace niji
