// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/bytes.hpp"
#include "niji/hash.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace niji {

/// A consortium-chain account or contract id ("0x" + 40 hex digits).
using Identity = std::string;

Identity identity_from(const Hash160& h);

struct ConsortiumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised by contract code; the call fails and its effects are discarded.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kDeployFunction = "deploy";

struct ConsortiumTx {
    Identity caller;
    /// Empty for a deployment; args[0] then names the contract kind.
    Identity target;
    std::string function;
    std::vector<Bytes> args;
    std::uint64_t nonce = 0;

    bool is_deploy() const { return target.empty(); }
    Bytes encode() const;
    nlohmann::ordered_json to_json() const;
};

struct Event {
    std::uint64_t block = 0;
    std::size_t tx_index = 0;
    Identity contract;
    Identity caller;
    std::string function;
    /// "call" for the outcome of a top-level call, otherwise the emitted name.
    std::string name;
    bool ok = true;
    nlohmann::ordered_json payload;

    nlohmann::ordered_json to_json() const;
};

struct EventFilter {
    std::optional<std::uint64_t> from_block;
    std::optional<std::uint64_t> to_block;
    std::optional<Identity> contract;
    std::optional<std::string> function;
    std::optional<std::string> name;
    std::optional<bool> ok;

    bool matches(const Event& e) const;
};

struct Receipt {
    bool ok = false;
    std::string error;
    nlohmann::ordered_json result;
    /// Set for a successful deployment.
    Identity deployed;
};

struct ConsortiumBlock {
    std::uint64_t height = 0;
    std::size_t authority = 0;
    std::vector<ConsortiumTx> txs;
    std::vector<Receipt> receipts;
    Hash256 state_root{};

    nlohmann::ordered_json to_json() const;
};

class Consortium;

class CallContext
{
public:
    const Identity& caller() const { return caller_; }
    const Identity& self() const { return self_; }
    std::uint64_t block() const { return block_; }

    void emit(std::string name, nlohmann::ordered_json payload);

    /// Calls another contract with this contract as the caller.
    nlohmann::ordered_json call(const Identity& target, std::string_view function, const std::vector<Bytes>& args);

private:
    friend class Consortium;
    CallContext(Consortium& chain, Identity caller, Identity self, std::uint64_t block, std::size_t tx_index,
                std::vector<Event>& events, int depth)
        : chain_(chain), caller_(std::move(caller)), self_(std::move(self)), block_(block), tx_index_(tx_index),
          events_(events), depth_(depth)
    {
    }

    Consortium& chain_;
    Identity caller_;
    Identity self_;
    std::uint64_t block_;
    std::size_t tx_index_;
    std::vector<Event>& events_;
    int depth_;
};

class Contract
{
public:
    virtual ~Contract() = default;
    virtual std::string_view kind() const = 0;
    /// Throws ContractError to fail the call.
    virtual nlohmann::ordered_json call(CallContext& ctx, std::string_view function, const std::vector<Bytes>& args) = 0;
    /// Canonical serialization hashed into the state root.
    virtual Bytes state_bytes() const = 0;
    virtual std::unique_ptr<Contract> clone() const = 0;
};

using ContractFactory =
    std::function<std::unique_ptr<Contract>(const Identity& deployer, const std::vector<Bytes>& args)>;

struct CallStats {
    std::size_t ok = 0;
    std::size_t failed = 0;
};

/// Proof-of-authority chain with round-robin block producers. Calls are
/// applied atomically in block order, then intake order.
class Consortium
{
public:
    explicit Consortium(std::size_t authorities = 4);

    Consortium(const Consortium&) = delete;
    Consortium& operator=(const Consortium&) = delete;

    void register_kind(std::string kind, ContractFactory factory);

    static Identity contract_address(const Identity& deployer, std::uint64_t nonce);

    /// Next unused nonce for `caller`, counting queued transactions.
    std::uint64_t next_nonce(const Identity& caller) const;

    /// Thread-safe. Returns the intake position. Throws ConsortiumError on a
    /// stale nonce or an unknown target.
    std::size_t submit(ConsortiumTx tx);

    ConsortiumBlock produce_block();

    std::uint64_t height() const { return blocks_.size(); }
    std::size_t authorities() const { return authorities_; }
    std::size_t pending_count() const;
    const std::vector<ConsortiumBlock>& blocks() const { return blocks_; }

    const Contract* contract(const Identity& id) const;
    template <class T>
    const T* contract_as(const Identity& id) const
    {
        return dynamic_cast<const T*>(contract(id));
    }

    struct Inclusion {
        std::uint64_t block = 0;
        std::size_t index = 0;
        const Receipt* receipt = nullptr;
    };
    /// Where the transaction (caller, nonce) was applied, if it has been.
    std::optional<Inclusion> find_receipt(const Identity& caller, std::uint64_t nonce) const;

    std::vector<Event> query_events(const EventFilter& filter = {}) const;
    const std::vector<Event>& events() const { return events_; }

    /// Top-level calls per function name (deployments count as "deploy").
    const std::map<std::string, CallStats>& call_stats() const { return stats_; }

    Hash256 state_root() const;

    /// Re-applies every block from genesis on a fresh chain and returns the
    /// resulting state roots.
    std::vector<Hash256> replay_roots() const;

private:
    friend class CallContext;

    Receipt apply(const ConsortiumTx& tx, std::uint64_t block, std::size_t index, std::vector<Event>& events);
    nlohmann::ordered_json dispatch(const Identity& caller, const Identity& target, std::string_view function,
                                    const std::vector<Bytes>& args, std::uint64_t block, std::size_t index,
                                    std::vector<Event>& events, int depth);

    std::size_t authorities_;
    std::map<std::string, ContractFactory> factories_;
    std::map<Identity, std::unique_ptr<Contract>> contracts_;
    std::map<Identity, std::uint64_t> nonces_;
    std::vector<ConsortiumBlock> blocks_;
    std::vector<Event> events_;
    std::map<std::string, CallStats> stats_;
    std::map<std::pair<Identity, std::uint64_t>, std::pair<std::uint64_t, std::size_t>> included_;

    mutable std::mutex intake_mutex_;
    std::vector<ConsortiumTx> pending_;
    std::map<Identity, std::uint64_t> intake_nonces_;
    std::map<Identity, bool> pending_deploys_;
};

}  // namespace niji
