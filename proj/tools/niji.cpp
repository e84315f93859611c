// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/scenario.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

int run(niji::ScenarioConfig cfg, const std::string& out)
{
    const niji::ScenarioResult r = niji::run_scenario(cfg);
    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        if (!f) {
            std::cerr << "cannot write " << out << "\n";
            return 2;
        }
        f << r.ndjson();
    }
    const auto& b = r.balances;
    std::cout << "scenario " << r.name << ": " << (r.ok ? "ok" : "FAILED") << "\n"
              << "  user " << b.user << " sat, sp " << b.sp << " sat, fees " << b.fees << " sat (initial "
              << b.initial << ", agreed " << b.agreed << ")\n"
              << "  replay " << (r.replay_matches ? "matches" : "DIVERGES") << "\n";
    for (const auto& [fn, st] : r.op_counts)
        std::cout << "  op " << fn << ": " << st.ok << " ok, " << st.failed << " failed\n";
    for (const auto& f : r.failures)
        std::cerr << "  assertion failed: " << f << "\n";
    return r.ok ? 0 : 1;
}

int inspect(const std::string& path, const std::string& actor, const std::string& chain, const std::string& action,
            bool pretty)
{
    std::ifstream f(path);
    if (!f) {
        std::cerr << "cannot read " << path << "\n";
        return 2;
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty())
            continue;
        nlohmann::ordered_json e;
        try {
            e = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& err) {
            std::cerr << path << ":" << lineno << ": " << err.what() << "\n";
            return 2;
        }
        if (!actor.empty() && e.value("actor", "") != actor)
            continue;
        if (!chain.empty() && e.value("chain", "") != chain)
            continue;
        if (!action.empty() && e.value("action", "") != action)
            continue;
        std::cout << (pretty ? e.dump(2) : e.dump()) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Payment channel protocol engine: scenario runner and trace inspector"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List the built-in scenarios");

    auto* run_cmd = app.add_subcommand("run", "Run a scenario end to end");
    std::string scenario;
    std::string out;
    std::string mode;
    std::string kind;
    std::uint64_t seed = 1;
    niji::Amount fee = 0;
    niji::Amount deposit = 0;
    std::uint32_t tlf = 0;
    std::uint32_t tl = 0;
    run_cmd->add_option("name", scenario, "Scenario name");
    run_cmd->add_option("--scenario", scenario, "Scenario name");
    run_cmd->add_option("--seed", seed, "RNG seed");
    run_cmd->add_option("--fee", fee, "Bitcoin fee in satoshis");
    run_cmd->add_option("--deposit", deposit, "Deposit in satoshis");
    run_cmd->add_option("--tlf", tlf, "Funding time-lock in blocks");
    run_cmd->add_option("--tl", tl, "Template time-lock in blocks");
    run_cmd->add_option("--mode", mode, "legacy or segwit")->check(CLI::IsMember({"legacy", "segwit"}));
    run_cmd->add_option("--kind", kind, "uni or bidir")->check(CLI::IsMember({"uni", "bidir"}));
    run_cmd->add_option("--out", out, "Write the NDJSON trace here");

    auto* inspect_cmd = app.add_subcommand("inspect", "Filter and print a trace");
    std::string trace;
    std::string actor;
    std::string chain;
    std::string action;
    bool pretty = false;
    inspect_cmd->add_option("trace", trace, "Trace file")->required();
    inspect_cmd->add_option("--actor", actor, "Only events by this actor");
    inspect_cmd->add_option("--chain", chain, "Only events on this chain (bitcoin, consortium, bus, none)");
    inspect_cmd->add_option("--action", action, "Only events with this action");
    inspect_cmd->add_flag("--pretty", pretty, "Indent JSON");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& n : niji::catalog_names())
            std::cout << n << "\n";
        return 0;
    }
    if (inspect_cmd->parsed())
        return inspect(trace, actor, chain, action, pretty);

    if (scenario.empty()) {
        std::cerr << "run: a scenario name is required\n";
        return 2;
    }
    niji::ScenarioConfig cfg;
    try {
        cfg = niji::catalog(scenario);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    cfg.seed = seed;
    if (fee > 0)
        cfg.channel.fee = fee;
    if (deposit > 0)
        cfg.channel.deposit = deposit;
    if (tlf > 0)
        cfg.channel.tl_f = tlf;
    if (tl > 0)
        cfg.channel.tl = tl;
    if (!mode.empty())
        cfg.channel.mode = mode == "segwit" ? niji::ScriptMode::kSegwit : niji::ScriptMode::kLegacy;
    if (!kind.empty())
        cfg.channel.kind = kind == "bidir" ? niji::ChannelKind::kBidirectional : niji::ChannelKind::kUnidirectional;
    return run(cfg, out);
}
