// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/bytes.hpp"
#include "niji/hash.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace niji {

enum class Opcode : std::uint8_t {
    OP_0 = 0x00,
    OP_PUSHDATA1 = 0x4c,
    OP_PUSHDATA2 = 0x4d,
    OP_PUSHDATA4 = 0x4e,
    OP_1NEGATE = 0x4f,
    OP_1 = 0x51,
    OP_2 = 0x52,
    OP_16 = 0x60,
    OP_IF = 0x63,
    OP_NOTIF = 0x64,
    OP_ELSE = 0x67,
    OP_ENDIF = 0x68,
    OP_VERIFY = 0x69,
    OP_DROP = 0x75,
    OP_DUP = 0x76,
    OP_EQUAL = 0x87,
    OP_EQUALVERIFY = 0x88,
    OP_HASH160 = 0xa9,
    OP_CHECKSIG = 0xac,
    OP_CHECKMULTISIG = 0xae,
    OP_CHECKSEQUENCEVERIFY = 0xb2,
};

struct ScriptParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One decoded instruction. `data` is set only for push opcodes (0x00-0x4e).
struct ScriptOp {
    std::uint8_t opcode = 0;
    Bytes data;

    bool is_push() const { return opcode <= static_cast<std::uint8_t>(Opcode::OP_PUSHDATA4); }
    bool operator==(const ScriptOp&) const = default;
};

/// Minimal little-endian sign-magnitude encoding used by script numbers.
Bytes encode_script_num(std::int64_t n);
/// Throws ScriptParseError if longer than max_size or not minimally encoded.
std::int64_t decode_script_num(ByteView data, std::size_t max_size = 4);

class Script
{
public:
    Script() = default;
    explicit Script(Bytes raw) : bytes_(std::move(raw)) {}

    Script& op(Opcode code);
    /// Pushes data with the smallest push opcode.
    Script& push(ByteView data);
    /// OP_0, OP_1..OP_16, OP_1NEGATE, or a minimal number push.
    Script& push_int(std::int64_t n);

    const Bytes& bytes() const { return bytes_; }
    bool empty() const { return bytes_.empty(); }
    std::size_t size() const { return bytes_.size(); }

    /// Throws ScriptParseError on a truncated push.
    std::vector<ScriptOp> parse() const;
    bool is_push_only() const;
    /// IF/NOTIF/ELSE/ENDIF nest properly (ELSE only inside an IF).
    bool conditionals_balanced() const;

    std::string to_asm() const;
    std::string hex() const { return to_hex(bytes_); }

    bool operator==(const Script&) const = default;

private:
    Bytes bytes_;
};

std::string_view opcode_name(std::uint8_t opcode);

Script p2pkh_script(const Hash160& key_hash);
Script p2sh_script(const Hash160& script_hash);
Script p2wpkh_script(const Hash160& key_hash);
Script p2wsh_script(const Hash256& script_hash);

std::optional<Hash160> match_p2pkh(const Script& s);
std::optional<Hash160> match_p2sh(const Script& s);
std::optional<Hash160> match_p2wpkh(const Script& s);
std::optional<Hash256> match_p2wsh(const Script& s);

}  // namespace niji
