// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/scenario.hpp"

#include <stdexcept>

namespace niji {

namespace {

ScheduleStep pay(Amount a)
{
    return {ScheduleStep::Kind::kPay, a};
}

ScheduleStep cancel(Amount a)
{
    return {ScheduleStep::Kind::kCancel, a};
}

constexpr Amount kTenth = kCoin / 10;

SecretKey derive_key(std::string_view label, std::uint64_t seed)
{
    for (std::uint64_t attempt = 0;; ++attempt) {
        Writer w;
        w.str(label).u64(seed).u64(attempt);
        if (auto k = SecretKey::from_bytes(sha256(w.bytes())))
            return *k;
    }
}

Identity derive_identity(std::string_view label, std::uint64_t seed)
{
    Writer w;
    w.str(label).u64(seed);
    return identity_from(hash160(w.bytes()));
}

nlohmann::ordered_json tx_json(const Transaction& tx)
{
    nlohmann::ordered_json j;
    j["txid"] = tx.txid().hex();
    auto& outs = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : tx.outputs)
        outs.push_back({{"value", o.value}, {"script_pubkey", o.script_pubkey.hex()}});
    j["hex"] = to_hex(tx.serialize());
    return j;
}

nlohmann::ordered_json submit_json(const SubmitResult& r)
{
    nlohmann::ordered_json j;
    j["accepted"] = r.accepted();
    j["txid"] = r.txid.hex();
    if (!r.accepted()) {
        j["reject"] = std::string(to_string(r.reject));
        j["detail"] = r.detail;
    }
    return j;
}

class Runner
{
public:
    explicit Runner(const ScenarioConfig& cfg)
        : cfg_(cfg), chain_(cfg.authorities),
          user_(derive_key("user-btc", cfg.seed), derive_identity("user-consortium", cfg.seed), ledger_, chain_, bus_,
                cfg.channel),
          sp_(derive_key("sp-btc", cfg.seed), derive_identity("sp-consortium", cfg.seed), ledger_, chain_, bus_,
              cfg.channel, cfg.seed ^ 0x5eed5eed5eed5eedULL)
    {
        register_niji_contracts(chain_);
        res_.name = cfg.name;
    }

    ScenarioResult run()
    {
        try {
            setup();
            payments();
            ending();
        } catch (const std::exception& e) {
            fail(std::string("aborted: ") + e.what());
        }
        finish();
        return std::move(res_);
    }

private:
    void record(std::string actor, std::string chain, std::string action, nlohmann::ordered_json payload)
    {
        nlohmann::ordered_json e;
        e["seq"] = res_.trace.size();
        e["actor"] = std::move(actor);
        e["chain"] = std::move(chain);
        e["action"] = std::move(action);
        e["btc_height"] = ledger_.height();
        e["consortium_height"] = chain_.height();
        e["payload"] = std::move(payload);
        res_.trace.push_back(std::move(e));
    }

    void fail(std::string what)
    {
        res_.ok = false;
        res_.failures.push_back(what);
        record("harness", "none", "assertion_failed", {{"what", res_.failures.back()}});
    }

    void check(bool cond, const std::string& what)
    {
        if (!cond)
            fail(what);
    }

    void mine(std::uint32_t n = 1)
    {
        for (std::uint32_t i = 0; i < n; ++i) {
            ledger_.mine_block();
            const auto& b = ledger_.blocks().back();
            if (b.txs.empty())
                continue;
            auto ids = nlohmann::ordered_json::array();
            for (const auto& tx : b.txs)
                ids.push_back(tx.txid().hex());
            record("bitcoin", "bitcoin", "block", {{"height", b.height}, {"txids", ids}, {"fees", b.fees}});
        }
    }

    void produce()
    {
        const auto b = chain_.produce_block();
        record("consortium", "consortium", "block", b.to_json());
    }

    bool included_ok(const PendingCall& p, const std::string& what)
    {
        auto inc = chain_.find_receipt(p.caller, p.nonce);
        const bool ok = inc && inc->receipt->ok;
        check(ok, what + (inc ? ": " + inc->receipt->error : ": not included"));
        return ok;
    }

    void setup()
    {
        const ChannelConfig& ch = cfg_.channel;
        initial_ = cfg_.initial_funds.value_or(ch.deposit + ch.fee);
        ledger_.mint(user_.wallet_script(), initial_);
        mine();
        record("harness", "bitcoin", "mint", {{"script", user_.wallet_script().hex()}, {"value", initial_}});

        user_.announce();
        record("user", "bus", "hello", {{"pubkey", user_.pubkey().hex()}, {"identity", user_.identity()}});
        check(sp_.receive_hello(), "SP received hello");
        const auto deploys = sp_.deploy_contracts();
        record("sp", "consortium", "deploy", {{"service", sp_.service_id()}, {"bridge", sp_.bridge_id()}});
        produce();
        for (const auto& d : deploys)
            included_ok(d, "deploy");
        sp_.send_welcome();
        record("sp", "bus", "welcome", {{"pubkey", sp_.pubkey().hex()}, {"bridge", sp_.bridge_id()}});
        user_.receive_welcome();

        const FundingTx& f = user_.open_channel();
        record("user", "bitcoin", "submit_funding",
               {{"tx", tx_json(f.tx)}, {"redeem_script", f.redeem_script.hex()}, {"mode", std::string(to_string(f.mode))}});
        mine(ch.confirmations);
        check(user_.funding_confirmed(), "funding confirmed");
        check(sp_.receive_funding(), "SP received funding details");

        const auto dep = user_.register_deposit();
        record("user", "consortium", "set_deposit", {{"nonce", dep.nonce}});
        produce();
        included_ok(dep, "set_deposit");

        const auto tmpl = sp_.register_template();
        record("sp", "consortium", "set_tmpl", {{"nonce", tmpl.nonce}});
        produce();
        if (!included_ok(tmpl, "set_tmpl"))
            throw std::runtime_error("template not registered");
        user_.accept_template();
        const auto& g = chain_.contract_as<BridgingContract>(sp_.bridge_id())->get_template();
        nlohmann::ordered_json tj{{"template", g.tmpl.to_json()}};
        if (g.redeem)
            tj["redeem"] = {{"hex", g.redeem->hex()}, {"asm", g.redeem->to_asm()}};
        record("user", "consortium", "accept_template", tj);

        bus_mark_ = bus_.sent();
        reads_mark_ = user_.ledger_reads();
    }

    void step_pay(Amount amount)
    {
        const auto p = user_.pay(amount);
        record("user", "consortium", "pay", {{"amount", amount}, {"nonce", p.nonce}});
        produce();
        const bool ok = user_.confirm(p);
        check(ok, "payment of " + std::to_string(amount) + " accepted");
        if (auto inc = chain_.find_receipt(p.caller, p.nonce)) {
            res_.payment_latency.push_back(inc->block - p.submitted_at);
            record("user", "consortium", "payment_result",
                   {{"ok", ok}, {"sigma", user_.sigma()}, {"result", inc->receipt->result}});
        }
    }

    void step_cancel(Amount amount)
    {
        if (cfg_.ending == Ending::kOldState && !old_update_)
            old_update_ = sp_.latest_update();

        const auto req = user_.request_cancel(amount);
        record("user", "consortium", "request_cancel", {{"amount", amount}});
        produce();
        included_ok(req, "request_cancel");

        const auto replace = sp_.handle_cancel();
        check(replace.has_value(), "SP answered the cancel request");
        if (!replace)
            return;
        record("sp", "consortium", "replace_tmpl",
               {{"hash_lock", to_hex(hash160(sp_.preimages().back()))}, {"generation", sp_.preimages().size() - 1}});
        produce();
        included_ok(*replace, "replace_tmpl");

        const auto signed_call = user_.sign_cancellation();
        check(signed_call.has_value(), "user signed the lowered amount");
        if (!signed_call)
            return;
        record("user", "consortium", "sign_cancellation", {{"nonce", signed_call->nonce}});
        produce();
        check(user_.confirm(*signed_call), "lowered update accepted");

        const auto disclose = sp_.finish_cancel();
        check(disclose.has_value(), "SP disclosed the retired pre-image");
        if (!disclose)
            return;
        produce();
        if (included_ok(*disclose, "canceled")) {
            const auto& bridge = *chain_.contract_as<BridgingContract>(sp_.bridge_id());
            record("sp", "consortium", "canceled",
                   {{"preimage", to_hex(bridge.disclosed().back())}, {"j", bridge.cancellations()}, {"sigma", user_.sigma()}});
        }
    }

    void payments()
    {
        for (const auto& s : cfg_.schedule) {
            if (s.kind == ScheduleStep::Kind::kPay)
                step_pay(s.amount);
            else
                step_cancel(s.amount);
        }
        res_.bus_messages_in_payment = bus_.sent() - bus_mark_;
    }

    void close_channel()
    {
        const auto c = sp_.close();
        record("sp", "consortium", "closing", {});
        produce();
        included_ok(c, "closing");
    }

    const Transaction& settled(const SubmitResult& r)
    {
        check(r.accepted(), "settlement accepted: " + r.detail);
        if (!r.accepted())
            throw std::runtime_error("settlement rejected");
        res_.settlement = r.txid;
        return *sp_.settlement();
    }

    void ending()
    {
        switch (cfg_.ending) {
        case Ending::kSettle:
            settle_honest();
            break;
        case Ending::kAbandon:
            abandon();
            break;
        case Ending::kOldState:
            settle_old_state();
            break;
        }
    }

    void observe_settlement()
    {
        check(user_.settlement_observed(), "user observed closing on the consortium chain");
        res_.user_reads_in_payment = user_.ledger_reads() - reads_mark_;
        const auto s = user_.find_settlement();
        check(s && res_.settlement && s->txid() == *res_.settlement, "user found the settlement on the ledger");
    }

    void settle_honest()
    {
        const auto r = sp_.settle();
        record("sp", "bitcoin", "settle", submit_json(r));
        const Transaction tx = settled(r);
        record("sp", "bitcoin", "settlement", tx_json(tx));
        close_channel();
        mine();
        observe_settlement();
        check(!user_.punish_old_state().has_value(), "no punishment possible against the latest state");

        if (cfg_.channel.kind == ChannelKind::kBidirectional) {
            mine(cfg_.channel.tl);
            const auto claim = sp_.claim_timelock(tx);
            record("sp", "bitcoin", "claim_timelock", submit_json(claim));
            check(claim.accepted(), "SP time-lock claim after TL blocks: " + claim.detail);
            mine();
        }
    }

    void abandon()
    {
        res_.user_reads_in_payment = user_.ledger_reads() - reads_mark_;
        const OutPoint funding = user_.funding()->outpoint;
        const std::uint32_t tl_f = cfg_.channel.tl_f;
        const std::uint32_t delta = *ledger_.height_delta(funding);
        if (delta + 1 < tl_f)
            mine(tl_f - 1 - delta);
        for (int attempt = 0; attempt < 2; ++attempt) {
            const std::uint32_t d = *ledger_.height_delta(funding);
            const auto r = user_.refund_after_expiry();
            nlohmann::ordered_json j = submit_json(r);
            j["height_delta"] = d;
            record("user", "bitcoin", "refund", j);
            if (r.accepted()) {
                res_.refund_delta = d;
                break;
            }
            res_.refund_rejected_deltas.push_back(d);
            mine();
        }
        mine();
        check(res_.refund_delta == tl_f, "refund accepted exactly at TL_f");
    }

    void settle_old_state()
    {
        check(old_update_.has_value(), "SP kept a retired update");
        if (!old_update_)
            return;
        const auto r = sp_.settle_update(*old_update_);
        record("sp", "bitcoin", "settle_retired_state", submit_json(r));
        const Transaction tx = settled(r);
        record("sp", "bitcoin", "settlement", tx_json(tx));
        close_channel();
        mine();

        // The SP's time-lock branch, probed on a copy of the ledger.
        const OutPoint out0{tx.txid(), 0};
        Ledger probe = ledger_;
        const Transaction sp_claim = sp_.build_timelock_claim_tx(tx);
        for (std::uint32_t i = 0; i <= cfg_.channel.tl; ++i) {
            const std::uint32_t d = *probe.height_delta(out0);
            if (probe.submit_tx(sp_claim).accepted()) {
                res_.timelock_accepted_delta = d;
                break;
            }
            res_.timelock_rejected_deltas.push_back(d);
            probe.mine_block();
        }
        record("harness", "bitcoin", "probe_timelock_branch",
               {{"rejected_below", res_.timelock_rejected_deltas.size()},
                {"accepted_at", res_.timelock_accepted_delta ? nlohmann::ordered_json(*res_.timelock_accepted_delta)
                                                            : nlohmann::ordered_json()}});

        observe_settlement();
        const std::uint32_t d = *ledger_.height_delta(out0);
        const auto punish = user_.punish_old_state();
        check(punish.has_value(), "user recognised the retired state");
        if (punish) {
            nlohmann::ordered_json j = submit_json(*punish);
            j["height_delta"] = d;
            record("user", "bitcoin", "punish_old_state", j);
            check(punish->accepted(), "hash-lock claim accepted: " + punish->detail);
            if (punish->accepted())
                res_.punish_delta = d;
        }
        const auto race = sp_.claim_timelock(tx);
        record("sp", "bitcoin", "claim_timelock", submit_json(race));
        res_.sp_race_rejected = !race.accepted();
        check(res_.sp_race_rejected, "SP time-lock claim loses to the user's hash-lock claim");
        mine();
    }

    void finish()
    {
        Balances& b = res_.balances;
        b.initial = initial_;
        b.user = ledger_.balance(user_.wallet_script());
        b.sp = ledger_.balance(sp_.wallet_script());
        for (const auto& blk : ledger_.blocks())
            b.fees += blk.fees;
        if (const auto* bridge = chain_.contract_as<BridgingContract>(sp_.bridge_id()); bridge && bridge->latest())
            b.agreed = bridge->latest()->sigma;

        res_.op_counts = chain_.call_stats();
        const auto roots = chain_.replay_roots();
        res_.replay_matches = roots.size() == chain_.blocks().size();
        for (std::size_t i = 0; res_.replay_matches && i < roots.size(); ++i)
            res_.replay_matches = roots[i] == chain_.blocks()[i].state_root;

        if (res_.failures.empty() || res_.failures.front().rfind("aborted", 0) != 0)
            assert_outcome();

        auto ops = nlohmann::ordered_json::object();
        for (const auto& [fn, st] : res_.op_counts)
            ops[fn] = {{"ok", st.ok}, {"failed", st.failed}};
        record("harness", "consortium", "op_counts", ops);
        record("harness", "none", "balances",
               {{"initial", b.initial}, {"user", b.user}, {"sp", b.sp}, {"fees", b.fees}, {"agreed", b.agreed}});
        record("harness", "none", "result",
               {{"scenario", res_.name}, {"ok", res_.ok}, {"replay_matches", res_.replay_matches},
                {"failures", res_.failures}});
    }

    void assert_outcome()
    {
        const Balances& b = res_.balances;
        const ChannelConfig& ch = cfg_.channel;
        check(b.user + b.sp + b.fees == b.initial, "funds conserved: user + sp + fees = initial");
        check(ledger_.total_value() == b.user + b.sp, "no value left locked in channel scripts");
        check(b.sp <= b.agreed, "SP never receives more than the agreed amount");
        check(res_.replay_matches, "consortium replay reproduces every state root");
        check(res_.bus_messages_in_payment == 0, "no direct messages during the payment phase");
        for (auto l : res_.payment_latency)
            check(l == 1, "payment included in the next consortium block");

        if (cfg_.ending == Ending::kSettle) {
            check(res_.user_reads_in_payment == 0, "user did not read the ledger while the channel was open");
            if (const auto tx = ledger_.find_transaction(*res_.settlement)) {
                check(tx->outputs.at(0).value == b.agreed, "settlement pays the agreed amount");
                check(tx->outputs.at(1).value == ch.deposit - b.agreed - ch.fee, "settlement change = deposit - sigma - fee");
            }
        }
        if (cfg_.ending == Ending::kAbandon)
            check(b.sp == 0, "SP gets nothing after abandoning");
        if (cfg_.ending == Ending::kOldState) {
            check(b.sp == 0, "SP gets nothing after settling a retired state");
            check(res_.timelock_accepted_delta == ch.tl, "time-lock branch opens exactly at TL");
            check(res_.timelock_rejected_deltas.size() == ch.tl, "time-lock branch rejected at every delta below TL");
            check(res_.punish_delta.has_value() && *res_.punish_delta < ch.tl, "user claimed before TL");
        }
    }

    ScenarioConfig cfg_;
    Ledger ledger_;
    Consortium chain_;
    MessageBus bus_;
    UserNode user_;
    ServiceProviderNode sp_;
    ScenarioResult res_;
    Amount initial_ = 0;
    std::size_t bus_mark_ = 0;
    std::size_t reads_mark_ = 0;
    std::optional<UpdateTransaction> old_update_;
};

}  // namespace

const std::vector<std::string>& catalog_names()
{
    static const std::vector<std::string> names{"happy-uni",   "happy-bidir",     "cancel-bidir",
                                                "fraud-abandon", "fraud-old-state", "segwit-happy"};
    return names;
}

ScenarioConfig catalog(std::string_view name)
{
    ScenarioConfig c;
    c.name = std::string(name);
    if (name == "happy-uni" || name == "segwit-happy") {
        c.schedule = {pay(kTenth), pay(4 * kTenth)};
        if (name == "segwit-happy")
            c.channel.mode = ScriptMode::kSegwit;
    } else if (name == "happy-bidir") {
        c.channel.kind = ChannelKind::kBidirectional;
        c.schedule = {pay(3 * kTenth), pay(2 * kTenth)};
    } else if (name == "cancel-bidir" || name == "fraud-old-state") {
        c.channel.kind = ChannelKind::kBidirectional;
        c.schedule = {pay(3 * kTenth), pay(2 * kTenth), cancel(kTenth)};
        if (name == "fraud-old-state")
            c.ending = Ending::kOldState;
    } else if (name == "fraud-abandon") {
        c.schedule = {pay(kTenth), pay(4 * kTenth)};
        c.ending = Ending::kAbandon;
    } else {
        throw std::invalid_argument("unknown scenario " + std::string(name));
    }
    return c;
}

std::string ScenarioResult::ndjson() const
{
    std::string out;
    for (const auto& e : trace) {
        out += e.dump();
        out += '\n';
    }
    return out;
}

ScenarioResult run_scenario(const ScenarioConfig& config)
{
    return Runner(config).run();
}

}  // namespace niji
