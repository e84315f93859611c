// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/bytes.hpp"
#include "niji/hash.hpp"
#include "niji/script.hpp"

#include <compare>
#include <string>
#include <vector>

namespace niji {

/// Transaction id in serialization byte order (hex is not reversed).
struct Txid {
    Hash256 bytes{};

    std::string hex() const { return to_hex(bytes); }
    auto operator<=>(const Txid&) const = default;
};

struct OutPoint {
    Txid txid;
    std::uint32_t index = 0;

    std::string to_string() const { return txid.hex() + ":" + std::to_string(index); }
    auto operator<=>(const OutPoint&) const = default;
};

inline constexpr std::uint32_t kSequenceFinal = 0xffffffff;
inline constexpr std::uint32_t kSequenceDisableFlag = 1u << 31;
inline constexpr std::uint32_t kSequenceTypeFlag = 1u << 22;
inline constexpr std::uint32_t kSequenceLockMask = 0x0000ffff;
inline constexpr std::uint32_t kSighashAll = 0x01;

/// Output value of an unfilled template slot: not a representable amount.
inline constexpr Amount kNilValue = -1;

using WitnessStack = std::vector<Bytes>;

struct TxInput {
    OutPoint prevout;
    Script script_sig;
    std::uint32_t sequence = kSequenceFinal;
    WitnessStack witness;

    bool operator==(const TxInput&) const = default;
};

struct TxOutput {
    Amount value = 0;
    Script script_pubkey;

    bool operator==(const TxOutput&) const = default;
};

struct Transaction {
    std::int32_t version = 2;
    std::vector<TxInput> inputs;
    std::vector<TxOutput> outputs;
    std::uint32_t locktime = 0;

    bool has_witness() const;

    /// Segwit layout (marker 00, flag 01) iff has_witness() and with_witness.
    Bytes serialize(bool with_witness = true) const;
    static Transaction deserialize(ByteView data);

    Txid txid() const;
    Hash256 wtxid() const;

    bool operator==(const Transaction&) const = default;
};

/// Legacy signature form: the transaction with every input script cleared,
/// `script_code` placed in input `index`, and the 4-byte hash type appended.
Bytes legacy_sighash_preimage(const Transaction& tx, std::size_t index, const Script& script_code,
                              std::uint32_t hash_type = kSighashAll);

/// SIGHASH_ALL fields of the BIP143 version-0 witness signature form.
struct Bip143Fields {
    std::int32_t version = 2;
    Hash256 hash_prevouts{};
    Hash256 hash_sequence{};
    OutPoint outpoint;
    Script script_code;
    Amount amount = 0;
    std::uint32_t sequence = kSequenceFinal;
    Hash256 hash_outputs{};
    std::uint32_t locktime = 0;
    std::uint32_t hash_type = kSighashAll;

    Bytes serialize() const;
};

Bip143Fields bip143_fields(const Transaction& tx, std::size_t index, const Script& script_code, Amount amount,
                           std::uint32_t hash_type = kSighashAll);
Hash256 bip143_hash_outputs(const std::vector<TxOutput>& outputs);

inline Hash256 legacy_sighash(const Transaction& tx, std::size_t index, const Script& script_code)
{
    return sha256d(legacy_sighash_preimage(tx, index, script_code));
}

inline Hash256 bip143_sighash(const Transaction& tx, std::size_t index, const Script& script_code, Amount amount)
{
    return sha256d(bip143_fields(tx, index, script_code, amount).serialize());
}

}  // namespace niji
