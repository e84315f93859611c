// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/script.hpp"

namespace niji {

Bytes encode_script_num(std::int64_t n)
{
    Bytes out;
    if (n == 0)
        return out;
    const bool negative = n < 0;
    std::uint64_t abs = negative ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
    while (abs) {
        out.push_back(static_cast<std::uint8_t>(abs & 0xff));
        abs >>= 8;
    }
    if (out.back() & 0x80)
        out.push_back(negative ? 0x80 : 0x00);
    else if (negative)
        out.back() |= 0x80;
    return out;
}

std::int64_t decode_script_num(ByteView data, std::size_t max_size)
{
    if (data.size() > max_size)
        throw ScriptParseError("script number overflow");
    if (data.empty())
        return 0;
    if ((data.back() & 0x7f) == 0 && (data.size() == 1 || !(data[data.size() - 2] & 0x80)))
        throw ScriptParseError("non-minimal script number");
    std::int64_t result = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        result |= static_cast<std::int64_t>(data[i]) << (8 * i);
    if (data.back() & 0x80)
        return -(result & ~(static_cast<std::int64_t>(0x80) << (8 * (data.size() - 1))));
    return result;
}

Script& Script::op(Opcode code)
{
    bytes_.push_back(static_cast<std::uint8_t>(code));
    return *this;
}

Script& Script::push(ByteView data)
{
    const std::size_t n = data.size();
    if (n < static_cast<std::size_t>(Opcode::OP_PUSHDATA1)) {
        bytes_.push_back(static_cast<std::uint8_t>(n));
    } else if (n <= 0xff) {
        bytes_.push_back(static_cast<std::uint8_t>(Opcode::OP_PUSHDATA1));
        bytes_.push_back(static_cast<std::uint8_t>(n));
    } else if (n <= 0xffff) {
        bytes_.push_back(static_cast<std::uint8_t>(Opcode::OP_PUSHDATA2));
        bytes_.push_back(static_cast<std::uint8_t>(n));
        bytes_.push_back(static_cast<std::uint8_t>(n >> 8));
    } else {
        bytes_.push_back(static_cast<std::uint8_t>(Opcode::OP_PUSHDATA4));
        for (int i = 0; i < 4; ++i)
            bytes_.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    }
    append(bytes_, data);
    return *this;
}

Script& Script::push_int(std::int64_t n)
{
    if (n == 0)
        return op(Opcode::OP_0);
    if (n == -1)
        return op(Opcode::OP_1NEGATE);
    if (n >= 1 && n <= 16) {
        bytes_.push_back(static_cast<std::uint8_t>(static_cast<std::uint8_t>(Opcode::OP_1) + n - 1));
        return *this;
    }
    return push(encode_script_num(n));
}

std::vector<ScriptOp> Script::parse() const
{
    std::vector<ScriptOp> ops;
    std::size_t pc = 0;
    const auto need = [&](std::size_t n) {
        if (bytes_.size() - pc < n)
            throw ScriptParseError("truncated push");
    };
    while (pc < bytes_.size()) {
        ScriptOp op;
        op.opcode = bytes_[pc++];
        if (op.is_push()) {
            std::size_t len = op.opcode;
            if (op.opcode == static_cast<std::uint8_t>(Opcode::OP_PUSHDATA1)) {
                need(1);
                len = bytes_[pc];
                pc += 1;
            } else if (op.opcode == static_cast<std::uint8_t>(Opcode::OP_PUSHDATA2)) {
                need(2);
                len = bytes_[pc] | (static_cast<std::size_t>(bytes_[pc + 1]) << 8);
                pc += 2;
            } else if (op.opcode == static_cast<std::uint8_t>(Opcode::OP_PUSHDATA4)) {
                need(4);
                len = 0;
                for (int i = 0; i < 4; ++i)
                    len |= static_cast<std::size_t>(bytes_[pc + i]) << (8 * i);
                pc += 4;
            }
            need(len);
            op.data.assign(bytes_.begin() + static_cast<std::ptrdiff_t>(pc),
                           bytes_.begin() + static_cast<std::ptrdiff_t>(pc + len));
            pc += len;
        }
        ops.push_back(std::move(op));
    }
    return ops;
}

bool Script::is_push_only() const
{
    try {
        for (const auto& op : parse())
            if (op.opcode > static_cast<std::uint8_t>(Opcode::OP_16))
                return false;
    } catch (const ScriptParseError&) {
        return false;
    }
    return true;
}

bool Script::conditionals_balanced() const
{
    std::vector<bool> seen_else;
    try {
        for (const auto& op : parse()) {
            switch (static_cast<Opcode>(op.opcode)) {
            case Opcode::OP_IF:
            case Opcode::OP_NOTIF:
                seen_else.push_back(false);
                break;
            case Opcode::OP_ELSE:
                if (seen_else.empty())
                    return false;
                break;
            case Opcode::OP_ENDIF:
                if (seen_else.empty())
                    return false;
                seen_else.pop_back();
                break;
            default:
                break;
            }
        }
    } catch (const ScriptParseError&) {
        return false;
    }
    return seen_else.empty();
}

std::string_view opcode_name(std::uint8_t opcode)
{
    switch (static_cast<Opcode>(opcode)) {
    case Opcode::OP_0: return "OP_0";
    case Opcode::OP_PUSHDATA1: return "OP_PUSHDATA1";
    case Opcode::OP_PUSHDATA2: return "OP_PUSHDATA2";
    case Opcode::OP_PUSHDATA4: return "OP_PUSHDATA4";
    case Opcode::OP_1NEGATE: return "OP_1NEGATE";
    case Opcode::OP_IF: return "OP_IF";
    case Opcode::OP_NOTIF: return "OP_NOTIF";
    case Opcode::OP_ELSE: return "OP_ELSE";
    case Opcode::OP_ENDIF: return "OP_ENDIF";
    case Opcode::OP_VERIFY: return "OP_VERIFY";
    case Opcode::OP_DROP: return "OP_DROP";
    case Opcode::OP_DUP: return "OP_DUP";
    case Opcode::OP_EQUAL: return "OP_EQUAL";
    case Opcode::OP_EQUALVERIFY: return "OP_EQUALVERIFY";
    case Opcode::OP_HASH160: return "OP_HASH160";
    case Opcode::OP_CHECKSIG: return "OP_CHECKSIG";
    case Opcode::OP_CHECKMULTISIG: return "OP_CHECKMULTISIG";
    case Opcode::OP_CHECKSEQUENCEVERIFY: return "OP_CSV";
    default: break;
    }
    static constexpr std::string_view kSmallInts[] = {"OP_1", "OP_2",  "OP_3",  "OP_4",  "OP_5",  "OP_6",
                                                      "OP_7", "OP_8",  "OP_9",  "OP_10", "OP_11", "OP_12",
                                                      "OP_13", "OP_14", "OP_15", "OP_16"};
    if (opcode >= 0x51 && opcode <= 0x60)
        return kSmallInts[opcode - 0x51];
    return "OP_UNKNOWN";
}

std::string Script::to_asm() const
{
    std::string out;
    for (const auto& op : parse()) {
        if (!out.empty())
            out += ' ';
        if (op.is_push() && op.opcode != 0)
            out += to_hex(op.data);
        else
            out += opcode_name(op.opcode);
    }
    return out;
}

Script p2pkh_script(const Hash160& key_hash)
{
    Script s;
    s.op(Opcode::OP_DUP).op(Opcode::OP_HASH160).push(key_hash).op(Opcode::OP_EQUALVERIFY).op(Opcode::OP_CHECKSIG);
    return s;
}

Script p2sh_script(const Hash160& script_hash)
{
    Script s;
    s.op(Opcode::OP_HASH160).push(script_hash).op(Opcode::OP_EQUAL);
    return s;
}

Script p2wpkh_script(const Hash160& key_hash)
{
    Script s;
    s.op(Opcode::OP_0).push(key_hash);
    return s;
}

Script p2wsh_script(const Hash256& script_hash)
{
    Script s;
    s.op(Opcode::OP_0).push(script_hash);
    return s;
}

namespace {

template <std::size_t N>
ByteArray<N> slice(const Bytes& b, std::size_t off)
{
    ByteArray<N> out{};
    std::copy(b.begin() + static_cast<std::ptrdiff_t>(off), b.begin() + static_cast<std::ptrdiff_t>(off + N),
              out.begin());
    return out;
}

}  // namespace

std::optional<Hash160> match_p2pkh(const Script& s)
{
    const Bytes& b = s.bytes();
    if (b.size() == 25 && b[0] == 0x76 && b[1] == 0xa9 && b[2] == 20 && b[23] == 0x88 && b[24] == 0xac)
        return slice<20>(b, 3);
    return std::nullopt;
}

std::optional<Hash160> match_p2sh(const Script& s)
{
    const Bytes& b = s.bytes();
    if (b.size() == 23 && b[0] == 0xa9 && b[1] == 20 && b[22] == 0x87)
        return slice<20>(b, 2);
    return std::nullopt;
}

std::optional<Hash160> match_p2wpkh(const Script& s)
{
    const Bytes& b = s.bytes();
    if (b.size() == 22 && b[0] == 0x00 && b[1] == 20)
        return slice<20>(b, 2);
    return std::nullopt;
}

std::optional<Hash256> match_p2wsh(const Script& s)
{
    const Bytes& b = s.bytes();
    if (b.size() == 34 && b[0] == 0x00 && b[1] == 32)
        return slice<32>(b, 2);
    return std::nullopt;
}

}  // namespace niji
