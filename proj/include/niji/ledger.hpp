// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/interpreter.hpp"
#include "niji/transaction.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace niji {

struct Coin {
    TxOutput output;
    std::uint32_t height = 0;
};

struct LedgerBlock {
    std::uint32_t height = 0;
    std::vector<Transaction> txs;
    Amount fees = 0;
    Amount minted = 0;
};

enum class TxReject {
    kNone,
    kMalformed,
    kNegativeValue,
    kDuplicateInput,
    kMissingInput,
    kDoubleSpend,
    kNegativeFee,
    kSequenceLock,
    kScriptFailure,
};

std::string_view to_string(TxReject r);

struct SubmitResult {
    TxReject reject = TxReject::kNone;
    std::string detail;
    Txid txid;

    bool accepted() const { return reject == TxReject::kNone; }
    explicit operator bool() const { return accepted(); }
};

/// Simulated Bitcoin ledger: a confirmed UTXO set plus a queue of accepted
/// transactions waiting for the next block. Copying a Ledger forks it.
class Ledger
{
public:
    /// Credits `value` to `script_pubkey` through a coinbase-style
    /// transaction confirmed in the next block.
    OutPoint mint(const Script& script_pubkey, Amount value);

    /// Validates against the confirmed UTXO set at the current tip and queues
    /// the transaction. Inputs must be confirmed and not spent by a queued tx.
    SubmitResult submit_tx(const Transaction& tx);

    /// Confirms every queued transaction; returns the new height.
    std::uint32_t mine_block();
    void mine_blocks(std::uint32_t n);

    std::uint32_t height() const { return height_; }
    std::optional<Coin> utxo(const OutPoint& p) const;
    /// Blocks mined on top of the block that confirmed `p`: tip - conf height.
    std::optional<std::uint32_t> height_delta(const OutPoint& p) const;
    std::optional<std::uint32_t> confirmation_height(const Txid& id) const;
    std::optional<Transaction> find_transaction(const Txid& id) const;
    /// Which confirmed transaction spent `p`, if any.
    std::optional<Txid> spender_of(const OutPoint& p) const;

    const std::map<OutPoint, Coin>& utxo_set() const { return utxos_; }
    const std::vector<LedgerBlock>& blocks() const { return blocks_; }
    const std::vector<Transaction>& pending() const { return pending_; }

    Amount total_value() const;
    Amount balance(const Script& script_pubkey) const;
    std::vector<std::pair<OutPoint, Coin>> coins_for(const Script& script_pubkey) const;

private:
    std::map<OutPoint, Coin> utxos_;
    std::map<OutPoint, Txid> spent_by_;
    std::map<Txid, std::uint32_t> confirmed_at_;
    std::map<Txid, Transaction> tx_index_;
    std::vector<LedgerBlock> blocks_;
    std::vector<Transaction> pending_;
    std::vector<bool> pending_is_mint_;
    std::map<OutPoint, Txid> pending_spends_;
    std::uint32_t height_ = 0;
    std::uint64_t mint_counter_ = 0;
};

}  // namespace niji
