// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/ledger.hpp"

#include <set>

namespace niji {

std::string_view to_string(TxReject r)
{
    switch (r) {
    case TxReject::kNone: return "accepted";
    case TxReject::kMalformed: return "malformed";
    case TxReject::kNegativeValue: return "negative-value";
    case TxReject::kDuplicateInput: return "duplicate-input";
    case TxReject::kMissingInput: return "missing-input";
    case TxReject::kDoubleSpend: return "double-spend";
    case TxReject::kNegativeFee: return "negative-fee";
    case TxReject::kSequenceLock: return "sequence-lock";
    case TxReject::kScriptFailure: return "script-failure";
    }
    return "unknown";
}

OutPoint Ledger::mint(const Script& script_pubkey, Amount value)
{
    if (value <= 0)
        throw std::invalid_argument("mint value must be positive");
    Transaction tx;
    TxInput in;
    in.prevout.index = 0xffffffff;
    Writer tag;
    tag.u64(mint_counter_++);
    in.script_sig.push(tag.bytes());
    tx.inputs.push_back(std::move(in));
    tx.outputs.push_back(TxOutput{value, script_pubkey});
    const Txid id = tx.txid();
    pending_.push_back(std::move(tx));
    pending_is_mint_.push_back(true);
    return OutPoint{id, 0};
}

SubmitResult Ledger::submit_tx(const Transaction& tx)
{
    SubmitResult res;
    res.txid = tx.txid();
    const auto reject = [&res](TxReject why, std::string detail) {
        res.reject = why;
        res.detail = std::move(detail);
        return res;
    };

    if (tx.inputs.empty() || tx.outputs.empty())
        return reject(TxReject::kMalformed, "transaction needs inputs and outputs");
    if (tx_index_.contains(res.txid))
        return reject(TxReject::kDoubleSpend, "transaction already confirmed");

    Amount out_total = 0;
    for (const auto& out : tx.outputs) {
        if (out.value < 0 || out.value > 21'000'000 * kCoin)
            return reject(TxReject::kNegativeValue, "output value out of range");
        out_total += out.value;
    }

    std::set<OutPoint> seen;
    Amount in_total = 0;
    std::vector<Coin> coins;
    for (const auto& in : tx.inputs) {
        if (!seen.insert(in.prevout).second)
            return reject(TxReject::kDuplicateInput, in.prevout.to_string());
        if (pending_spends_.contains(in.prevout) || spent_by_.contains(in.prevout))
            return reject(TxReject::kDoubleSpend, in.prevout.to_string());
        auto it = utxos_.find(in.prevout);
        if (it == utxos_.end())
            return reject(TxReject::kMissingInput, in.prevout.to_string());
        coins.push_back(it->second);
        in_total += it->second.output.value;
    }
    if (in_total < out_total)
        return reject(TxReject::kNegativeFee, "outputs exceed inputs");

    for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
        const std::uint32_t seq = tx.inputs[i].sequence;
        // Relative lock carried by the input sequence (block-based only).
        if (tx.version >= 2 && !(seq & kSequenceDisableFlag)) {
            if (seq & kSequenceTypeFlag)
                return reject(TxReject::kSequenceLock, "time-based sequence lock unsupported");
            if (height_ - coins[i].height < (seq & kSequenceLockMask))
                return reject(TxReject::kSequenceLock, "input " + std::to_string(i) + " not yet mature");
        }
        SpendContext ctx;
        ctx.tx = &tx;
        ctx.input_index = i;
        ctx.input_value = coins[i].output.value;
        ctx.spender_height = height_;
        ctx.utxo_height = coins[i].height;
        if (const ScriptError err = verify_input(coins[i].output.script_pubkey, ctx); err != ScriptError::kOk)
            return reject(TxReject::kScriptFailure, "input " + std::to_string(i) + ": " + std::string(to_string(err)));
    }

    for (const auto& in : tx.inputs)
        pending_spends_.emplace(in.prevout, res.txid);
    pending_.push_back(tx);
    pending_is_mint_.push_back(false);
    return res;
}

std::uint32_t Ledger::mine_block()
{
    ++height_;
    LedgerBlock block;
    block.height = height_;
    for (std::size_t k = 0; k < pending_.size(); ++k) {
        const Transaction& tx = pending_[k];
        const Txid id = tx.txid();
        Amount in_total = 0;
        if (pending_is_mint_[k]) {
            block.minted += tx.outputs[0].value;
        } else {
            for (const auto& in : tx.inputs) {
                auto it = utxos_.find(in.prevout);
                in_total += it->second.output.value;
                utxos_.erase(it);
                spent_by_.emplace(in.prevout, id);
            }
        }
        Amount out_total = 0;
        for (std::uint32_t i = 0; i < tx.outputs.size(); ++i) {
            utxos_.emplace(OutPoint{id, i}, Coin{tx.outputs[i], height_});
            out_total += tx.outputs[i].value;
        }
        if (!pending_is_mint_[k])
            block.fees += in_total - out_total;
        confirmed_at_.emplace(id, height_);
        tx_index_.emplace(id, tx);
        block.txs.push_back(tx);
    }
    pending_.clear();
    pending_is_mint_.clear();
    pending_spends_.clear();
    blocks_.push_back(std::move(block));
    return height_;
}

void Ledger::mine_blocks(std::uint32_t n)
{
    for (std::uint32_t i = 0; i < n; ++i)
        mine_block();
}

std::optional<Coin> Ledger::utxo(const OutPoint& p) const
{
    auto it = utxos_.find(p);
    if (it == utxos_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> Ledger::height_delta(const OutPoint& p) const
{
    auto it = utxos_.find(p);
    if (it == utxos_.end())
        return std::nullopt;
    return height_ - it->second.height;
}

std::optional<std::uint32_t> Ledger::confirmation_height(const Txid& id) const
{
    auto it = confirmed_at_.find(id);
    if (it == confirmed_at_.end())
        return std::nullopt;
    return it->second;
}

std::optional<Transaction> Ledger::find_transaction(const Txid& id) const
{
    auto it = tx_index_.find(id);
    if (it == tx_index_.end())
        return std::nullopt;
    return it->second;
}

std::optional<Txid> Ledger::spender_of(const OutPoint& p) const
{
    auto it = spent_by_.find(p);
    if (it == spent_by_.end())
        return std::nullopt;
    return it->second;
}

Amount Ledger::total_value() const
{
    Amount total = 0;
    for (const auto& [_, coin] : utxos_)
        total += coin.output.value;
    return total;
}

Amount Ledger::balance(const Script& script_pubkey) const
{
    Amount total = 0;
    for (const auto& [_, coin] : utxos_)
        if (coin.output.script_pubkey == script_pubkey)
            total += coin.output.value;
    return total;
}

std::vector<std::pair<OutPoint, Coin>> Ledger::coins_for(const Script& script_pubkey) const
{
    std::vector<std::pair<OutPoint, Coin>> out;
    for (const auto& [p, coin] : utxos_)
        if (coin.output.script_pubkey == script_pubkey)
            out.emplace_back(p, coin);
    return out;
}

}  // namespace niji
