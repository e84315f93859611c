// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/consortium.hpp"
#include "niji/contract.hpp"
#include "niji/funding.hpp"
#include "niji/ledger.hpp"
#include "niji/templates.hpp"

#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace niji {

struct NodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChannelConfig {
    ScriptMode mode = ScriptMode::kLegacy;
    ChannelKind kind = ChannelKind::kUnidirectional;
    Amount deposit = kCoin;
    Amount fee = 10'000;
    std::uint32_t tl_f = 100;
    std::uint32_t tl = 110;
    /// Confirmations of T^f required before the template is registered.
    std::uint32_t confirmations = 6;
};

enum class Phase { kSetup, kOpen, kCancelPending, kClosed };

std::string_view to_string(Phase p);

struct BusMessage {
    std::string from;
    std::string to;
    std::string topic;
    nlohmann::ordered_json body;
};

/// Direct node-to-node channel. Only the setup handshake uses it; the
/// payment phase must leave it untouched.
class MessageBus
{
public:
    void send(BusMessage m);
    std::optional<BusMessage> receive(const std::string& to, std::string_view topic);

    std::size_t sent() const { return log_.size(); }
    const std::vector<BusMessage>& log() const { return log_; }

private:
    std::vector<BusMessage> log_;
    std::deque<BusMessage> inbox_;
};

/// Ledger access with a read counter.
class BitcoinClient
{
public:
    explicit BitcoinClient(Ledger& ledger) : ledger_(ledger) {}

    SubmitResult submit(const Transaction& tx) { return ledger_.submit_tx(tx); }

    std::uint32_t height() const;
    std::optional<Coin> utxo(const OutPoint& p) const;
    std::optional<std::uint32_t> height_delta(const OutPoint& p) const;
    std::optional<Transaction> find_transaction(const Txid& id) const;
    std::optional<Txid> spender_of(const OutPoint& p) const;
    std::vector<std::pair<OutPoint, Coin>> coins_for(const Script& s) const;

    std::size_t reads() const { return reads_; }

private:
    Ledger& ledger_;
    mutable std::size_t reads_ = 0;
};

struct PendingCall {
    Identity caller;
    std::uint64_t nonce = 0;
    std::string function;
    /// Consortium height when the call was submitted.
    std::uint64_t submitted_at = 0;
};

class ConsortiumClient
{
public:
    ConsortiumClient(Consortium& chain, Identity self) : chain_(chain), self_(std::move(self)) {}

    PendingCall call(const Identity& target, std::string function, std::vector<Bytes> args);
    PendingCall deploy(std::string_view kind, std::vector<Bytes> args);
    /// Receipt and inclusion height once the call is in a block.
    std::optional<std::pair<std::uint64_t, Receipt>> receipt(const PendingCall& p) const;

    const BridgingContract& bridge(const Identity& id) const;
    std::vector<Event> events(const EventFilter& f) const { return chain_.query_events(f); }
    std::uint64_t height() const { return chain_.height(); }
    const Identity& self() const { return self_; }
    std::uint64_t next_nonce() const { return chain_.next_nonce(self_); }

private:
    Consortium& chain_;
    Identity self_;
};

class UserNode
{
public:
    UserNode(SecretKey key, Identity id, Ledger& ledger, Consortium& chain, MessageBus& bus, ChannelConfig cfg);

    const PublicKey& pubkey() const { return pubkey_; }
    const Identity& identity() const { return chain_.self(); }
    Script wallet_script() const { return owner_script(pubkey_, cfg_.mode); }
    Phase phase() const { return phase_; }
    Amount sigma() const { return sigma_; }
    std::size_t payments() const { return payments_; }
    const std::optional<FundingTx>& funding() const { return funding_; }
    const Identity& bridge_id() const { return bridge_; }
    std::size_t ledger_reads() const { return btc_.reads(); }

    // Setup
    void announce();
    void receive_welcome();
    const FundingTx& open_channel();
    bool funding_confirmed() const;
    PendingCall register_deposit();
    /// Fetches the registered template and checks it locally.
    void accept_template();

    // Payment
    PendingCall pay(Amount amount);
    /// Applies the outcome of a pay or cancellation call; true on success.
    bool confirm(const PendingCall& call);

    // Cancellation (STEP1 and STEP3)
    PendingCall request_cancel(Amount amount);
    std::optional<PendingCall> sign_cancellation();

    // Settlement and disputes
    bool settlement_observed() const;
    /// The transaction that spent T^f, if any. Reads the ledger.
    std::optional<Transaction> find_settlement() const;
    SubmitResult refund_after_expiry();
    /// Claims output[0] of a settled retired state with its disclosed
    /// pre-image. nullopt when the settled state was not retired.
    std::optional<SubmitResult> punish_old_state();

private:
    void check_template(const TemplateGeneration& g) const;

    SecretKey key_;
    PublicKey pubkey_;
    BitcoinClient btc_;
    ConsortiumClient chain_;
    MessageBus& bus_;
    ChannelConfig cfg_;

    Phase phase_ = Phase::kSetup;
    std::optional<PublicKey> sp_key_;
    Identity sp_id_;
    Identity bridge_;
    std::optional<FundingTx> funding_;
    Amount sigma_ = 0;
    std::size_t payments_ = 0;
    std::size_t known_generations_ = 0;
    std::vector<Hash160> hash_locks_;
    std::optional<Amount> cancel_amount_;
    std::optional<std::pair<std::uint64_t, Amount>> in_flight_;
};

class ServiceProviderNode
{
public:
    ServiceProviderNode(SecretKey key, Identity id, Ledger& ledger, Consortium& chain, MessageBus& bus,
                        ChannelConfig cfg, std::uint64_t seed);

    const PublicKey& pubkey() const { return pubkey_; }
    const Identity& identity() const { return chain_.self(); }
    Script wallet_script() const { return owner_script(pubkey_, cfg_.mode); }
    const Identity& bridge_id() const { return bridge_; }
    const Identity& service_id() const { return service_; }
    const std::vector<Bytes>& preimages() const { return preimages_; }
    std::size_t ignored_requests() const { return ignored_requests_; }

    // Setup
    bool receive_hello();
    std::vector<PendingCall> deploy_contracts();
    void send_welcome();
    bool receive_funding();
    /// Checks T^f depth and the registered deposit, then submits set_tmpl
    /// with TL = `tl` (defaults to the configured value).
    PendingCall register_template(std::optional<std::uint32_t> tl = std::nullopt);

    // Cancellation (STEP2 and STEP4)
    std::optional<PendingCall> handle_cancel();
    std::optional<PendingCall> finish_cancel();

    // Settlement
    UpdateTransaction latest_update() const;
    SubmitResult settle();
    SubmitResult settle_update(const UpdateTransaction& update);
    PendingCall close();
    const std::optional<Transaction>& settlement() const { return settlement_; }
    /// Spends output[0] of a bi-directional settlement through the time-lock branch.
    SubmitResult claim_timelock(const Transaction& settlement);
    Transaction build_timelock_claim_tx(const Transaction& settlement) const;

private:
    Bytes draw_preimage();

    SecretKey key_;
    PublicKey pubkey_;
    BitcoinClient btc_;
    ConsortiumClient chain_;
    MessageBus& bus_;
    ChannelConfig cfg_;
    std::mt19937_64 rng_;

    std::optional<PublicKey> user_key_;
    Identity user_id_;
    Identity bridge_;
    Identity service_;
    std::optional<OutPoint> funding_outpoint_;
    std::optional<Script> funding_script_;
    std::vector<Bytes> preimages_;
    std::optional<Amount> expected_cancel_sigma_;
    std::size_t ignored_requests_ = 0;
    std::size_t seen_requests_ = 0;
    std::optional<Transaction> settlement_;
};

}  // namespace niji
