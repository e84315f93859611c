// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/nodes.hpp"

#include <algorithm>

namespace niji {

namespace {

constexpr const char* kUserEndpoint = "user";
constexpr const char* kSpEndpoint = "sp";

PublicKey key_from_json(const nlohmann::ordered_json& j)
{
    auto k = PublicKey::parse(from_hex(j.get<std::string>()));
    if (!k)
        throw NodeError("peer sent an invalid public key");
    return *k;
}

}  // namespace

std::string_view to_string(Phase p)
{
    switch (p) {
    case Phase::kSetup:
        return "setup";
    case Phase::kOpen:
        return "open";
    case Phase::kCancelPending:
        return "cancel-pending";
    case Phase::kClosed:
        return "closed";
    }
    return "?";
}

void MessageBus::send(BusMessage m)
{
    log_.push_back(m);
    inbox_.push_back(std::move(m));
}

std::optional<BusMessage> MessageBus::receive(const std::string& to, std::string_view topic)
{
    auto it = std::find_if(inbox_.begin(), inbox_.end(),
                           [&](const BusMessage& m) { return m.to == to && m.topic == topic; });
    if (it == inbox_.end())
        return std::nullopt;
    BusMessage m = std::move(*it);
    inbox_.erase(it);
    return m;
}

std::uint32_t BitcoinClient::height() const
{
    ++reads_;
    return ledger_.height();
}

std::optional<Coin> BitcoinClient::utxo(const OutPoint& p) const
{
    ++reads_;
    return ledger_.utxo(p);
}

std::optional<std::uint32_t> BitcoinClient::height_delta(const OutPoint& p) const
{
    ++reads_;
    return ledger_.height_delta(p);
}

std::optional<Transaction> BitcoinClient::find_transaction(const Txid& id) const
{
    ++reads_;
    return ledger_.find_transaction(id);
}

std::optional<Txid> BitcoinClient::spender_of(const OutPoint& p) const
{
    ++reads_;
    return ledger_.spender_of(p);
}

std::vector<std::pair<OutPoint, Coin>> BitcoinClient::coins_for(const Script& s) const
{
    ++reads_;
    return ledger_.coins_for(s);
}

PendingCall ConsortiumClient::call(const Identity& target, std::string function, std::vector<Bytes> a)
{
    const std::uint64_t nonce = chain_.next_nonce(self_);
    const std::uint64_t at = chain_.height();
    chain_.submit(ConsortiumTx{self_, target, function, std::move(a), nonce});
    return PendingCall{self_, nonce, std::move(function), at};
}

PendingCall ConsortiumClient::deploy(std::string_view kind, std::vector<Bytes> a)
{
    a.insert(a.begin(), Bytes(kind.begin(), kind.end()));
    return call("", std::string(kDeployFunction), std::move(a));
}

std::optional<std::pair<std::uint64_t, Receipt>> ConsortiumClient::receipt(const PendingCall& p) const
{
    auto inc = chain_.find_receipt(p.caller, p.nonce);
    if (!inc)
        return std::nullopt;
    return std::pair{inc->block, *inc->receipt};
}

const BridgingContract& ConsortiumClient::bridge(const Identity& id) const
{
    const auto* c = chain_.contract_as<BridgingContract>(id);
    if (!c)
        throw NodeError("bridging contract " + id + " not deployed");
    return *c;
}

// ---------------------------------------------------------------------------
// UserNode

UserNode::UserNode(SecretKey key, Identity id, Ledger& ledger, Consortium& chain, MessageBus& bus, ChannelConfig cfg)
    : key_(key), pubkey_(key.public_key()), btc_(ledger), chain_(chain, std::move(id)), bus_(bus), cfg_(cfg)
{
}

void UserNode::announce()
{
    bus_.send({kUserEndpoint, kSpEndpoint, "hello", {{"pubkey", pubkey_.hex()}, {"identity", identity()}}});
}

void UserNode::receive_welcome()
{
    auto m = bus_.receive(kUserEndpoint, "welcome");
    if (!m)
        throw NodeError("no welcome from the service provider");
    sp_key_ = key_from_json(m->body.at("pubkey"));
    sp_id_ = m->body.at("identity").get<std::string>();
    bridge_ = m->body.at("bridge").get<std::string>();
}

const FundingTx& UserNode::open_channel()
{
    if (!sp_key_)
        throw NodeError("open_channel before the setup handshake");
    const auto coins = btc_.coins_for(wallet_script());
    try {
        funding_ = build_funding_tx(coins, key_, *sp_key_, cfg_.deposit, cfg_.tl_f, cfg_.fee, cfg_.mode);
    } catch (const FundingError& e) {
        throw NodeError(e.what());
    }
    const auto r = btc_.submit(funding_->tx);
    if (!r)
        throw NodeError("funding transaction rejected: " + std::string(to_string(r.reject)) + " " + r.detail);
    bus_.send({kUserEndpoint,
               kSpEndpoint,
               "funding",
               {{"txid", funding_->outpoint.txid.hex()},
                {"index", funding_->outpoint.index},
                {"deposit", cfg_.deposit},
                {"tl_f", cfg_.tl_f}}});
    return *funding_;
}

bool UserNode::funding_confirmed() const
{
    if (!funding_)
        return false;
    const auto delta = btc_.height_delta(funding_->outpoint);
    return delta && *delta + 1 >= cfg_.confirmations;
}

PendingCall UserNode::register_deposit()
{
    if (!funding_confirmed())
        throw NodeError("funding transaction lacks confirmations");
    const Hash160 am = multisig_address(funding_->redeem_script, cfg_.mode);
    return chain_.call(bridge_, "set_deposit",
                       {args::hash160(am), args::amount(cfg_.deposit), args::eth_address(eth_address(pubkey_))});
}

void UserNode::check_template(const TemplateGeneration& g) const
{
    ChannelParams params;
    params.multisig_address = multisig_address(funding_->redeem_script, cfg_.mode);
    params.deposit = cfg_.deposit;
    params.user_address = eth_address(pubkey_);
    params.funding_outpoint = funding_->outpoint;
    params.tl_f = cfg_.tl_f;
    const auto v = validate_template(g.tmpl, g.redeem, params);
    if (!v.empty())
        throw NodeError("template failed local validation: " + v.front());
    if (g.tmpl.mode != cfg_.mode || g.tmpl.kind != cfg_.kind)
        throw NodeError("template mode or direction differs from the agreed channel");
    if (g.tmpl.funding_script != funding_->redeem_script)
        throw NodeError("template does not spend the agreed funding script");
}

void UserNode::accept_template()
{
    const auto& bridge = chain_.bridge(bridge_);
    const auto& g = bridge.get_template();
    check_template(g);
    known_generations_ = bridge.generations().size();
    if (g.redeem)
        hash_locks_.push_back(parse_redeem_script(*g.redeem)->hash_lock);
    phase_ = Phase::kOpen;
}

PendingCall UserNode::pay(Amount amount)
{
    if (phase_ != Phase::kOpen)
        throw NodeError("channel is not open for payments");
    const auto& bridge = chain_.bridge(bridge_);
    if (bridge.closed()) {
        phase_ = Phase::kClosed;
        throw NodeError("channel closed");
    }
    if (amount <= 0)
        throw NodeError("payment must be positive");
    const Amount next = sigma_ + amount;
    if (next > cfg_.deposit - cfg_.fee)
        throw NodeError("payment exceeds the channel capacity");
    const auto& g = bridge.get_template();
    check_template(g);
    const auto sig = ecdsa_sign(key_, signature_form(g.tmpl, next, bridge.terms()).digest());
    auto call = chain_.call(bridge_, "update", {args::signature(sig), args::amount(next)});
    in_flight_ = {call.nonce, next};
    return call;
}

bool UserNode::confirm(const PendingCall& call)
{
    const auto r = chain_.receipt(call);
    if (!r)
        return false;
    const bool ok = r->second.ok;
    if (ok && in_flight_ && in_flight_->first == call.nonce) {
        sigma_ = in_flight_->second;
        if (call.function == "update")
            ++payments_;
        if (phase_ == Phase::kCancelPending) {
            phase_ = Phase::kOpen;
            cancel_amount_.reset();
        }
    }
    if (in_flight_ && in_flight_->first == call.nonce)
        in_flight_.reset();
    return ok;
}

PendingCall UserNode::request_cancel(Amount amount)
{
    if (phase_ != Phase::kOpen)
        throw NodeError("channel is not open");
    if (cfg_.kind != ChannelKind::kBidirectional)
        throw NodeError("cancellation needs a bi-directional channel");
    cancel_amount_ = amount;
    return chain_.call(bridge_, "request_cancel", {args::amount(amount)});
}

std::optional<PendingCall> UserNode::sign_cancellation()
{
    if (!cancel_amount_)
        return std::nullopt;
    const auto& bridge = chain_.bridge(bridge_);
    if (!bridge.cancel_pending() || bridge.cancel_signed() || bridge.generations().size() <= known_generations_)
        return std::nullopt;
    const auto& g = bridge.get_template();
    check_template(g);
    const Hash160 hl = parse_redeem_script(*g.redeem)->hash_lock;
    if (std::find(hash_locks_.begin(), hash_locks_.end(), hl) != hash_locks_.end())
        throw NodeError("replacement template reuses a hash-lock");
    const Amount lowered = sigma_ - *cancel_amount_;
    if (lowered <= 0)
        throw NodeError("cancellation would leave nothing paid");
    hash_locks_.push_back(hl);
    known_generations_ = bridge.generations().size();
    phase_ = Phase::kCancelPending;
    const auto sig = ecdsa_sign(key_, signature_form(g.tmpl, lowered, bridge.terms()).digest());
    auto call = chain_.call(bridge_, "update", {args::signature(sig), args::amount(lowered)});
    in_flight_ = {call.nonce, lowered};
    return call;
}

bool UserNode::settlement_observed() const
{
    return chain_.bridge(bridge_).closed();
}

std::optional<Transaction> UserNode::find_settlement() const
{
    if (!funding_)
        return std::nullopt;
    const auto spender = btc_.spender_of(funding_->outpoint);
    if (!spender)
        return std::nullopt;
    return btc_.find_transaction(*spender);
}

SubmitResult UserNode::refund_after_expiry()
{
    if (!funding_)
        throw NodeError("no channel to refund");
    const Transaction tx = build_refund_tx(*funding_, key_, wallet_script(), cfg_.fee);
    const auto r = btc_.submit(tx);
    if (r)
        phase_ = Phase::kClosed;
    return r;
}

std::optional<SubmitResult> UserNode::punish_old_state()
{
    const auto settlement = find_settlement();
    if (!settlement || settlement->outputs.empty())
        return std::nullopt;
    const auto& bridge = chain_.bridge(bridge_);
    const auto& gens = bridge.generations();
    for (std::size_t g = 0; g < gens.size() && g < bridge.disclosed().size(); ++g) {
        if (!gens[g].redeem)
            continue;
        if (settlement->outputs[0].script_pubkey != hashlock_output_script(*gens[g].redeem, cfg_.mode))
            continue;
        const Transaction claim =
            build_hashlock_claim(OutPoint{settlement->txid(), 0}, settlement->outputs[0].value, *gens[g].redeem,
                                 cfg_.mode, bridge.disclosed()[g], key_, wallet_script(), cfg_.fee);
        return btc_.submit(claim);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// ServiceProviderNode

ServiceProviderNode::ServiceProviderNode(SecretKey key, Identity id, Ledger& ledger, Consortium& chain,
                                         MessageBus& bus, ChannelConfig cfg, std::uint64_t seed)
    : key_(key), pubkey_(key.public_key()), btc_(ledger), chain_(chain, std::move(id)), bus_(bus), cfg_(cfg),
      rng_(seed)
{
}

bool ServiceProviderNode::receive_hello()
{
    auto m = bus_.receive(kSpEndpoint, "hello");
    if (!m)
        return false;
    user_key_ = key_from_json(m->body.at("pubkey"));
    user_id_ = m->body.at("identity").get<std::string>();
    return true;
}

std::vector<PendingCall> ServiceProviderNode::deploy_contracts()
{
    if (!user_key_)
        throw NodeError("deploy before the user introduced itself");
    const Identity& self = chain_.self();
    // The service is bound to the bridging contract deployed right after it.
    const std::uint64_t n = chain_.next_nonce();
    service_ = Consortium::contract_address(self, n);
    bridge_ = Consortium::contract_address(self, n + 1);
    std::vector<PendingCall> calls;
    calls.push_back(chain_.deploy(kServiceKind, {args::identity(bridge_)}));
    calls.push_back(chain_.deploy(kBridgingKind, {args::identity(user_id_), args::amount(cfg_.fee), args::identity(service_)}));
    return calls;
}

void ServiceProviderNode::send_welcome()
{
    bus_.send({kSpEndpoint,
               kUserEndpoint,
               "welcome",
               {{"pubkey", pubkey_.hex()}, {"identity", identity()}, {"bridge", bridge_}}});
}

bool ServiceProviderNode::receive_funding()
{
    auto m = bus_.receive(kSpEndpoint, "funding");
    if (!m)
        return false;
    Txid id;
    id.bytes = array_from_hex<32>(m->body.at("txid").get<std::string>());
    funding_outpoint_ = OutPoint{id, m->body.at("index").get<std::uint32_t>()};
    if (m->body.at("deposit").get<Amount>() != cfg_.deposit || m->body.at("tl_f").get<std::uint32_t>() != cfg_.tl_f)
        throw NodeError("funding terms differ from the agreed channel");
    funding_script_ = build_funding_script(*user_key_, pubkey_, cfg_.tl_f);
    return true;
}

Bytes ServiceProviderNode::draw_preimage()
{
    Bytes s(32);
    for (std::size_t i = 0; i < s.size(); i += 8) {
        const std::uint64_t x = rng_();
        for (std::size_t k = 0; k < 8; ++k)
            s[i + k] = static_cast<std::uint8_t>(x >> (8 * k));
    }
    return s;
}

PendingCall ServiceProviderNode::register_template(std::optional<std::uint32_t> tl)
{
    if (!funding_outpoint_ || !funding_script_)
        throw NodeError("funding absent");
    const auto coin = btc_.utxo(*funding_outpoint_);
    const auto delta = btc_.height_delta(*funding_outpoint_);
    if (!coin || !delta)
        throw NodeError("funding output not on the ledger");
    if (*delta + 1 < cfg_.confirmations)
        throw NodeError("funding transaction lacks confirmations");
    if (coin->output.value != cfg_.deposit ||
        coin->output.script_pubkey != funding_script_pubkey(*funding_script_, cfg_.mode))
        throw NodeError("funding output does not match the agreed terms");

    const auto& bridge = chain_.bridge(bridge_);
    const auto& dep = bridge.deposit();
    if (!dep)
        throw NodeError("deposit not registered");
    if (dep->deposit != cfg_.deposit || dep->multisig_address != multisig_address(*funding_script_, cfg_.mode) ||
        dep->user_address != eth_address(*user_key_))
        throw NodeError("registered deposit does not match the funding transaction");

    if (cfg_.kind == ChannelKind::kUnidirectional) {
        const auto tmpl = build_template(cfg_.mode, cfg_.kind, *funding_outpoint_, *funding_script_, *user_key_, pubkey_);
        return chain_.call(bridge_, "set_tmpl", {tmpl.encode(), Bytes{}});
    }
    if (preimages_.empty())
        preimages_.push_back(draw_preimage());
    const Hash160 hl = hash160(preimages_.back());
    const std::uint32_t t = tl.value_or(cfg_.tl);
    const auto tmpl = build_template(cfg_.mode, cfg_.kind, *funding_outpoint_, *funding_script_, *user_key_, pubkey_, t, hl);
    const auto redeem = build_redeem_script(t, hl, *user_key_, pubkey_);
    return chain_.call(bridge_, "set_tmpl", {tmpl.encode(), redeem.bytes()});
}

std::optional<PendingCall> ServiceProviderNode::handle_cancel()
{
    EventFilter filter;
    filter.contract = bridge_;
    filter.name = "cancel_requested";
    const auto requests = chain_.events(filter);
    if (requests.size() <= seen_requests_)
        return std::nullopt;
    seen_requests_ = requests.size();
    const auto& bridge = chain_.bridge(bridge_);
    const auto amount = bridge.requested_cancel();
    const Amount sigma = bridge.latest() ? bridge.latest()->sigma : 0;
    if (!amount || bridge.cancel_pending() || bridge.closed() || *amount >= sigma) {
        ++ignored_requests_;
        return std::nullopt;
    }

    preimages_.push_back(draw_preimage());
    const Hash160 hl = hash160(preimages_.back());
    const auto& current = bridge.get_template();
    const std::uint32_t tl = parse_redeem_script(*current.redeem)->tl;
    auto tmpl = build_template(cfg_.mode, cfg_.kind, current.tmpl.funding_outpoint(), current.tmpl.funding_script,
                               *user_key_, pubkey_, tl, hl);
    auto redeem = build_redeem_script(tl, hl, *user_key_, pubkey_);
    expected_cancel_sigma_ = sigma - *amount;
    return chain_.call(bridge_, "replace_tmpl", {tmpl.encode(), args::redeem(redeem)});
}

std::optional<PendingCall> ServiceProviderNode::finish_cancel()
{
    const auto& bridge = chain_.bridge(bridge_);
    if (!expected_cancel_sigma_ || !bridge.cancel_pending() || !bridge.cancel_signed())
        return std::nullopt;
    const auto& latest = *bridge.latest();
    const auto& g = bridge.generations().at(latest.generation);
    if (latest.sigma != *expected_cancel_sigma_ || latest.generation + 1 != bridge.generations().size())
        return std::nullopt;
    const Hash256 digest = signature_form(g.tmpl, latest.sigma, bridge.terms()).digest();
    if (!ecdsa_verify(*user_key_, digest, latest.sig.r, latest.sig.s))
        return std::nullopt;
    expected_cancel_sigma_.reset();
    const Bytes& retired = preimages_.at(bridge.cancellations());
    return chain_.call(bridge_, "canceled", {retired});
}

UpdateTransaction ServiceProviderNode::latest_update() const
{
    return chain_.bridge(bridge_).get_update_tx();
}

SubmitResult ServiceProviderNode::settle()
{
    return settle_update(latest_update());
}

SubmitResult ServiceProviderNode::settle_update(const UpdateTransaction& update)
{
    const ChannelTerms terms{cfg_.deposit, cfg_.fee};
    const auto sig = ecdsa_sign(key_, signature_form(update.tmpl, update.sigma, terms).digest());
    Transaction tx;
    try {
        tx = complete_transaction(update.tmpl, update.user_sig, sig, update.sigma, update.change, terms);
    } catch (const TemplateError& e) {
        throw NodeError(std::string("cannot complete the update transaction: ") + e.what());
    }
    const auto r = btc_.submit(tx);
    if (r)
        settlement_ = tx;
    return r;
}

PendingCall ServiceProviderNode::close()
{
    return chain_.call(bridge_, "closing", {});
}

Transaction ServiceProviderNode::build_timelock_claim_tx(const Transaction& settlement) const
{
    const auto& bridge = chain_.bridge(bridge_);
    for (const auto& g : bridge.generations()) {
        if (!g.redeem || settlement.outputs.at(0).script_pubkey != hashlock_output_script(*g.redeem, cfg_.mode))
            continue;
        return build_timelock_claim(OutPoint{settlement.txid(), 0}, settlement.outputs[0].value, *g.redeem,
                                    cfg_.mode, key_, wallet_script(), cfg_.fee);
    }
    throw NodeError("settlement output[0] is not a known hash-lock output");
}

SubmitResult ServiceProviderNode::claim_timelock(const Transaction& settlement)
{
    return btc_.submit(build_timelock_claim_tx(settlement));
}

}  // namespace niji
