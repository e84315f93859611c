// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/consortium.hpp"

namespace niji {

namespace {

constexpr int kMaxCallDepth = 8;

nlohmann::ordered_json hex_list(const std::vector<Bytes>& items)
{
    auto out = nlohmann::ordered_json::array();
    for (const auto& b : items)
        out.push_back(to_hex(b));
    return out;
}

}  // namespace

Identity identity_from(const Hash160& h)
{
    return "0x" + to_hex(h);
}

Bytes ConsortiumTx::encode() const
{
    Writer w;
    w.str(caller).str(target).str(function).u64(nonce).varint(args.size());
    for (const auto& a : args)
        w.var_bytes(a);
    return std::move(w).bytes();
}

nlohmann::ordered_json ConsortiumTx::to_json() const
{
    nlohmann::ordered_json j;
    j["caller"] = caller;
    j["target"] = target;
    j["function"] = function;
    j["args"] = hex_list(args);
    j["nonce"] = nonce;
    return j;
}

nlohmann::ordered_json Event::to_json() const
{
    nlohmann::ordered_json j;
    j["block"] = block;
    j["tx_index"] = tx_index;
    j["contract"] = contract;
    j["caller"] = caller;
    j["function"] = function;
    j["name"] = name;
    j["outcome"] = ok ? "ok" : "fail";
    j["payload"] = payload;
    return j;
}

bool EventFilter::matches(const Event& e) const
{
    if (from_block && e.block < *from_block)
        return false;
    if (to_block && e.block > *to_block)
        return false;
    if (contract && e.contract != *contract)
        return false;
    if (function && e.function != *function)
        return false;
    if (name && e.name != *name)
        return false;
    if (ok && e.ok != *ok)
        return false;
    return true;
}

nlohmann::ordered_json ConsortiumBlock::to_json() const
{
    nlohmann::ordered_json j;
    j["height"] = height;
    j["authority"] = authority;
    auto& txj = j["txs"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < txs.size(); ++i) {
        auto t = txs[i].to_json();
        t["outcome"] = receipts[i].ok ? "ok" : "fail";
        if (!receipts[i].ok)
            t["error"] = receipts[i].error;
        if (!receipts[i].deployed.empty())
            t["deployed"] = receipts[i].deployed;
        txj.push_back(std::move(t));
    }
    j["state_root"] = to_hex(state_root);
    return j;
}

void CallContext::emit(std::string name, nlohmann::ordered_json payload)
{
    events_.push_back(Event{block_, tx_index_, self_, caller_, "", std::move(name), true, std::move(payload)});
}

nlohmann::ordered_json CallContext::call(const Identity& target, std::string_view function,
                                         const std::vector<Bytes>& args)
{
    return chain_.dispatch(self_, target, function, args, block_, tx_index_, events_, depth_ + 1);
}

Consortium::Consortium(std::size_t authorities) : authorities_(authorities)
{
    if (authorities_ == 0)
        throw std::invalid_argument("consortium needs at least one authority");
}

void Consortium::register_kind(std::string kind, ContractFactory factory)
{
    factories_[std::move(kind)] = std::move(factory);
}

Identity Consortium::contract_address(const Identity& deployer, std::uint64_t nonce)
{
    Writer w;
    w.str(deployer).u64(nonce);
    return identity_from(hash160(w.bytes()));
}

std::uint64_t Consortium::next_nonce(const Identity& caller) const
{
    std::lock_guard lock(intake_mutex_);
    auto it = intake_nonces_.find(caller);
    return it == intake_nonces_.end() ? 0 : it->second;
}

std::size_t Consortium::pending_count() const
{
    std::lock_guard lock(intake_mutex_);
    return pending_.size();
}

std::size_t Consortium::submit(ConsortiumTx tx)
{
    std::lock_guard lock(intake_mutex_);
    auto& next = intake_nonces_[tx.caller];
    if (tx.nonce < next)
        throw ConsortiumError("nonce " + std::to_string(tx.nonce) + " already used by " + tx.caller);
    if (tx.is_deploy()) {
        if (tx.function != kDeployFunction || tx.args.empty())
            throw ConsortiumError("deployment must name a contract kind");
        const std::string kind(tx.args[0].begin(), tx.args[0].end());
        if (!factories_.contains(kind))
            throw ConsortiumError("unknown contract kind " + kind);
        pending_deploys_[contract_address(tx.caller, tx.nonce)] = true;
    } else if (!contracts_.contains(tx.target) && !pending_deploys_.contains(tx.target)) {
        throw ConsortiumError("unknown contract " + tx.target);
    }
    next = tx.nonce + 1;
    pending_.push_back(std::move(tx));
    return pending_.size() - 1;
}

nlohmann::ordered_json Consortium::dispatch(const Identity& caller, const Identity& target, std::string_view function,
                                            const std::vector<Bytes>& args, std::uint64_t block, std::size_t index,
                                            std::vector<Event>& events, int depth)
{
    if (depth > kMaxCallDepth)
        throw ContractError("call depth exceeded");
    auto it = contracts_.find(target);
    if (it == contracts_.end())
        throw ContractError("unknown contract " + target);
    CallContext ctx(*this, caller, target, block, index, events, depth);
    return it->second->call(ctx, function, args);
}

Receipt Consortium::apply(const ConsortiumTx& tx, std::uint64_t block, std::size_t index, std::vector<Event>& events)
{
    Receipt receipt;
    std::map<Identity, std::unique_ptr<Contract>> snapshot;
    for (const auto& [id, c] : contracts_)
        snapshot.emplace(id, c->clone());

    std::vector<Event> emitted;
    Identity contract_id = tx.target;
    try {
        if (tx.is_deploy()) {
            const std::string kind(tx.args.at(0).begin(), tx.args.at(0).end());
            auto f = factories_.find(kind);
            if (f == factories_.end())
                throw ContractError("unknown contract kind " + kind);
            contract_id = contract_address(tx.caller, tx.nonce);
            if (contracts_.contains(contract_id))
                throw ContractError("contract already deployed at " + contract_id);
            const std::vector<Bytes> ctor(tx.args.begin() + 1, tx.args.end());
            contracts_[contract_id] = f->second(tx.caller, ctor);
            receipt.deployed = contract_id;
            receipt.result = {{"contract", contract_id}, {"kind", kind}};
        } else {
            receipt.result = dispatch(tx.caller, tx.target, tx.function, tx.args, block, index, emitted, 0);
        }
        receipt.ok = true;
    } catch (const std::exception& e) {
        contracts_ = std::move(snapshot);
        emitted.clear();
        receipt.ok = false;
        receipt.error = e.what();
        receipt.deployed.clear();
    }

    nonces_[tx.caller] = tx.nonce;
    auto& st = stats_[tx.function];
    receipt.ok ? ++st.ok : ++st.failed;

    nlohmann::ordered_json payload = receipt.ok ? receipt.result : nlohmann::ordered_json{{"error", receipt.error}};
    events.push_back(Event{block, index, contract_id, tx.caller, tx.function, "call", receipt.ok, std::move(payload)});
    for (auto& e : emitted) {
        e.function = tx.function;
        events.push_back(std::move(e));
    }
    return receipt;
}

ConsortiumBlock Consortium::produce_block()
{
    std::vector<ConsortiumTx> txs;
    {
        std::lock_guard lock(intake_mutex_);
        txs.swap(pending_);
        pending_deploys_.clear();
    }
    ConsortiumBlock block;
    block.height = blocks_.size() + 1;
    block.authority = (block.height - 1) % authorities_;
    std::vector<Event> events;
    for (std::size_t i = 0; i < txs.size(); ++i)
        block.receipts.push_back(apply(txs[i], block.height, i, events));
    for (std::size_t i = 0; i < txs.size(); ++i)
        included_[{txs[i].caller, txs[i].nonce}] = {block.height, i};
    block.txs = std::move(txs);
    block.state_root = state_root();
    events_.insert(events_.end(), std::make_move_iterator(events.begin()), std::make_move_iterator(events.end()));
    blocks_.push_back(block);
    return block;
}

const Contract* Consortium::contract(const Identity& id) const
{
    auto it = contracts_.find(id);
    return it == contracts_.end() ? nullptr : it->second.get();
}

std::optional<Consortium::Inclusion> Consortium::find_receipt(const Identity& caller, std::uint64_t nonce) const
{
    auto it = included_.find({caller, nonce});
    if (it == included_.end())
        return std::nullopt;
    const auto [height, index] = it->second;
    return Inclusion{height, index, &blocks_.at(height - 1).receipts.at(index)};
}

std::vector<Event> Consortium::query_events(const EventFilter& filter) const
{
    std::vector<Event> out;
    for (const auto& e : events_)
        if (filter.matches(e))
            out.push_back(e);
    return out;
}

Hash256 Consortium::state_root() const
{
    Writer w;
    w.varint(contracts_.size());
    for (const auto& [id, c] : contracts_)
        w.str(id).str(c->kind()).var_bytes(c->state_bytes());
    w.varint(nonces_.size());
    for (const auto& [caller, nonce] : nonces_)
        w.str(caller).u64(nonce);
    return sha256d(w.bytes());
}

std::vector<Hash256> Consortium::replay_roots() const
{
    Consortium fresh(authorities_);
    fresh.factories_ = factories_;
    std::vector<Hash256> roots;
    roots.reserve(blocks_.size());
    for (const auto& b : blocks_) {
        for (const auto& tx : b.txs)
            fresh.submit(tx);
        roots.push_back(fresh.produce_block().state_root);
    }
    return roots;
}

}  // namespace niji
