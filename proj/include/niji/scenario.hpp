// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/nodes.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace niji {

struct ScheduleStep {
    enum class Kind { kPay, kCancel };
    Kind kind = Kind::kPay;
    Amount amount = 0;
};

enum class Ending {
    kSettle,        // SP settles the latest state
    kAbandon,       // SP never settles; user refunds after TL_f
    kOldState,      // SP settles a retired state; user punishes
};

struct ScenarioConfig {
    std::string name;
    ChannelConfig channel;
    std::vector<ScheduleStep> schedule;
    Ending ending = Ending::kSettle;
    std::uint64_t seed = 1;
    /// Funds minted to the user before setup; defaults to deposit + fee.
    std::optional<Amount> initial_funds;
    std::size_t authorities = 4;
};

const std::vector<std::string>& catalog_names();
/// Throws std::invalid_argument for an unknown name.
ScenarioConfig catalog(std::string_view name);

struct Balances {
    Amount initial = 0;
    Amount user = 0;
    Amount sp = 0;
    Amount fees = 0;
    /// Latest amount the user agreed to pay.
    Amount agreed = 0;
};

struct ScenarioResult {
    std::string name;
    bool ok = true;
    std::vector<std::string> failures;
    std::vector<nlohmann::ordered_json> trace;
    Balances balances;
    std::map<std::string, CallStats> op_counts;

    /// Consortium blocks between submitting each payment and its inclusion.
    std::vector<std::uint64_t> payment_latency;
    std::size_t bus_messages_in_payment = 0;
    std::size_t user_reads_in_payment = 0;
    bool replay_matches = false;

    std::optional<Txid> settlement;
    /// First funding height delta at which the refund was accepted.
    std::optional<std::uint32_t> refund_delta;
    std::vector<std::uint32_t> refund_rejected_deltas;
    /// Height deltas at which the SP's time-lock claim on an old-state
    /// settlement was rejected, and the first delta it was accepted.
    std::vector<std::uint32_t> timelock_rejected_deltas;
    std::optional<std::uint32_t> timelock_accepted_delta;
    std::optional<std::uint32_t> punish_delta;
    bool sp_race_rejected = false;

    std::string ndjson() const;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace niji
