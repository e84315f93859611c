// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/transaction.hpp"

#include <stdexcept>

namespace niji {

namespace {

void write_outpoint(Writer& w, const OutPoint& p)
{
    w.raw(p.txid.bytes).u32(p.index);
}

void write_output(Writer& w, const TxOutput& o)
{
    w.u64(static_cast<std::uint64_t>(o.value)).var_bytes(o.script_pubkey.bytes());
}

}  // namespace

bool Transaction::has_witness() const
{
    for (const auto& in : inputs)
        if (!in.witness.empty())
            return true;
    return false;
}

Bytes Transaction::serialize(bool with_witness) const
{
    const bool segwit = with_witness && has_witness();
    Writer w;
    w.u32(static_cast<std::uint32_t>(version));
    if (segwit)
        w.u8(0x00).u8(0x01);
    w.varint(inputs.size());
    for (const auto& in : inputs) {
        write_outpoint(w, in.prevout);
        w.var_bytes(in.script_sig.bytes());
        w.u32(in.sequence);
    }
    w.varint(outputs.size());
    for (const auto& out : outputs)
        write_output(w, out);
    if (segwit) {
        for (const auto& in : inputs) {
            w.varint(in.witness.size());
            for (const auto& item : in.witness)
                w.var_bytes(item);
        }
    }
    w.u32(locktime);
    return std::move(w).bytes();
}

Transaction Transaction::deserialize(ByteView data)
{
    Reader r(data);
    Transaction tx;
    tx.version = static_cast<std::int32_t>(r.u32());
    bool segwit = false;
    if (r.peek() == 0x00) {
        r.u8();
        if (r.u8() != 0x01)
            throw DecodeError("bad segwit flag");
        segwit = true;
    }
    const std::uint64_t n_in = r.varint();
    if (n_in > r.remaining())
        throw DecodeError("input count exceeds data");
    for (std::uint64_t i = 0; i < n_in; ++i) {
        TxInput in;
        in.prevout.txid.bytes = r.array<32>();
        in.prevout.index = r.u32();
        in.script_sig = Script(r.var_bytes());
        in.sequence = r.u32();
        tx.inputs.push_back(std::move(in));
    }
    const std::uint64_t n_out = r.varint();
    if (n_out > r.remaining())
        throw DecodeError("output count exceeds data");
    for (std::uint64_t i = 0; i < n_out; ++i) {
        TxOutput out;
        out.value = static_cast<Amount>(r.u64());
        out.script_pubkey = Script(r.var_bytes());
        tx.outputs.push_back(std::move(out));
    }
    if (segwit) {
        for (auto& in : tx.inputs) {
            const std::uint64_t items = r.varint();
            if (items > r.remaining())
                throw DecodeError("witness count exceeds data");
            for (std::uint64_t k = 0; k < items; ++k)
                in.witness.push_back(r.var_bytes());
        }
        if (!tx.has_witness())
            throw DecodeError("segwit marker without witness data");
    }
    tx.locktime = r.u32();
    r.expect_done();
    return tx;
}

Txid Transaction::txid() const
{
    return Txid{sha256d(serialize(false))};
}

Hash256 Transaction::wtxid() const
{
    return sha256d(serialize(true));
}

Bytes legacy_sighash_preimage(const Transaction& tx, std::size_t index, const Script& script_code,
                              std::uint32_t hash_type)
{
    if (index >= tx.inputs.size())
        throw std::out_of_range("sighash input index");
    Transaction copy = tx;
    for (std::size_t i = 0; i < copy.inputs.size(); ++i) {
        copy.inputs[i].script_sig = i == index ? script_code : Script{};
        copy.inputs[i].witness.clear();
    }
    Bytes out = copy.serialize(false);
    Writer w;
    w.u32(hash_type);
    append(out, w.bytes());
    return out;
}

Hash256 bip143_hash_outputs(const std::vector<TxOutput>& outputs)
{
    Writer w;
    for (const auto& o : outputs)
        write_output(w, o);
    return sha256d(w.bytes());
}

Bip143Fields bip143_fields(const Transaction& tx, std::size_t index, const Script& script_code, Amount amount,
                           std::uint32_t hash_type)
{
    if (index >= tx.inputs.size())
        throw std::out_of_range("sighash input index");
    if (hash_type != kSighashAll)
        throw std::invalid_argument("only SIGHASH_ALL is supported");
    Writer prevouts;
    Writer sequences;
    for (const auto& in : tx.inputs) {
        write_outpoint(prevouts, in.prevout);
        sequences.u32(in.sequence);
    }
    Bip143Fields f;
    f.version = tx.version;
    f.hash_prevouts = sha256d(prevouts.bytes());
    f.hash_sequence = sha256d(sequences.bytes());
    f.outpoint = tx.inputs[index].prevout;
    f.script_code = script_code;
    f.amount = amount;
    f.sequence = tx.inputs[index].sequence;
    f.hash_outputs = bip143_hash_outputs(tx.outputs);
    f.locktime = tx.locktime;
    f.hash_type = hash_type;
    return f;
}

Bytes Bip143Fields::serialize() const
{
    Writer w;
    w.u32(static_cast<std::uint32_t>(version));
    w.raw(hash_prevouts).raw(hash_sequence);
    write_outpoint(w, outpoint);
    w.var_bytes(script_code.bytes());
    w.u64(static_cast<std::uint64_t>(amount));
    w.u32(sequence);
    w.raw(hash_outputs);
    w.u32(locktime);
    w.u32(hash_type);
    return std::move(w).bytes();
}

}  // namespace niji
