// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/nodes.hpp"
#include "niji/scenario.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace niji;
using namespace niji::test;

namespace {

/// Both nodes wired to one ledger and one consortium chain, driven block by block.
struct Harness {
    Ledger ledger;
    Consortium chain;
    MessageBus bus;
    ChannelConfig cfg;
    UserNode user;
    ServiceProviderNode sp;

    explicit Harness(ChannelConfig c)
        : cfg(c), user(user_key(), "0x00000000000000000000000000000000000000aa", ledger, chain, bus, c),
          sp(sp_key(), "0x00000000000000000000000000000000000000bb", ledger, chain, bus, c, 99)
    {
        register_niji_contracts(chain);
    }

    bool ok(const PendingCall& p) const
    {
        const auto inc = chain.find_receipt(p.caller, p.nonce);
        return inc && inc->receipt->ok;
    }

    void open(std::optional<std::uint32_t> tl = std::nullopt)
    {
        ledger.mint(user.wallet_script(), cfg.deposit + cfg.fee);
        ledger.mine_block();
        user.announce();
        REQUIRE(sp.receive_hello());
        sp.deploy_contracts();
        chain.produce_block();
        sp.send_welcome();
        user.receive_welcome();
        user.open_channel();
        ledger.mine_blocks(cfg.confirmations);
        REQUIRE(user.funding_confirmed());
        REQUIRE(sp.receive_funding());
        const auto dep = user.register_deposit();
        chain.produce_block();
        REQUIRE(ok(dep));
        const auto t = sp.register_template(tl);
        chain.produce_block();
        if (ok(t))
            user.accept_template();
    }

    bool pay(Amount a)
    {
        const auto p = user.pay(a);
        chain.produce_block();
        return user.confirm(p);
    }

    const BridgingContract& bridge() const { return *chain.contract_as<BridgingContract>(sp.bridge_id()); }
};

ChannelConfig bidir()
{
    ChannelConfig c;
    c.kind = ChannelKind::kBidirectional;
    return c;
}

}  // namespace

TEST_CASE("every catalog scenario completes with its expected outcome", "[nodes]")
{
    for (const auto& name : catalog_names()) {
        for (auto mode : {ScriptMode::kLegacy, ScriptMode::kSegwit}) {
            auto cfg = catalog(name);
            cfg.channel.mode = mode;
            const auto r = run_scenario(cfg);
            INFO(name << " " << to_string(mode));
            for (const auto& f : r.failures)
                INFO(f);
            CHECK(r.ok);
            CHECK(r.replay_matches);
            CHECK(r.balances.user + r.balances.sp + r.balances.fees == r.balances.initial);
        }
    }
    CHECK_THROWS_AS(catalog("no-such-scenario"), std::invalid_argument);
}

TEST_CASE("scenario traces are a function of the seed", "[nodes]")
{
    auto cfg = catalog("cancel-bidir");
    cfg.seed = 5;
    const auto a = run_scenario(cfg).ndjson();
    CHECK(a == run_scenario(cfg).ndjson());
    cfg.seed = 6;
    CHECK(a != run_scenario(cfg).ndjson());
}

TEST_CASE("payments leave the bus and the ledger alone", "[nodes]")
{
    Harness h(bidir());
    h.open();
    const std::size_t bus = h.bus.sent();
    const std::size_t reads = h.user.ledger_reads();
    CHECK(h.pay(30'000'000));
    CHECK(h.pay(20'000'000));
    CHECK(h.user.sigma() == 50'000'000);
    CHECK(h.bus.sent() == bus);
    CHECK(h.user.ledger_reads() == reads);
}

TEST_CASE("the SP refuses a template TL not above TL_f, then succeeds", "[nodes]")
{
    Harness h(bidir());
    h.open(100);
    CHECK(h.bridge().generations().empty());
    const auto retry = h.sp.register_template(110);
    h.chain.produce_block();
    REQUIRE(h.ok(retry));
    h.user.accept_template();
    CHECK(h.pay(10'000'000));
}

TEST_CASE("paying beyond the deposit fails before reaching the chain", "[nodes]")
{
    Harness h({});
    h.open();
    const std::uint64_t nonce = h.chain.next_nonce(h.user.identity());
    CHECK_THROWS(h.user.pay(kCoin));
    CHECK(h.chain.next_nonce(h.user.identity()) == nonce);
    CHECK(h.pay(kCoin - kFee));
}

TEST_CASE("payments after closing are refused", "[nodes]")
{
    Harness h({});
    h.open();
    CHECK(h.pay(10'000'000));
    REQUIRE(h.sp.settle().accepted());
    const auto c = h.sp.close();
    h.chain.produce_block();
    REQUIRE(h.ok(c));
    CHECK(h.user.settlement_observed());
    CHECK_THROWS_AS(h.user.pay(10'000'000), NodeError);
    CHECK(h.user.phase() == Phase::kClosed);
    CHECK(h.user.sigma() == 10'000'000);
}

TEST_CASE("an honest settlement gives the user nothing to punish", "[nodes]")
{
    Harness h(bidir());
    h.open();
    CHECK(h.pay(30'000'000));
    REQUIRE(h.sp.settle().accepted());
    h.ledger.mine_block();
    CHECK(h.user.find_settlement());
    CHECK_FALSE(h.user.punish_old_state());
}

TEST_CASE("the SP ignores a cancel request larger than the paid amount", "[nodes]")
{
    Harness h(bidir());
    h.open();
    CHECK(h.pay(10'000'000));
    const auto req = h.user.request_cancel(20'000'000);
    h.chain.produce_block();
    REQUIRE(h.ok(req));
    CHECK_FALSE(h.sp.handle_cancel());
    CHECK(h.sp.ignored_requests() == 1);
    CHECK(h.bridge().generations().size() == 1);
}

TEST_CASE("a cancellation abandoned after the new template keeps the old state settleable", "[nodes]")
{
    Harness h(bidir());
    h.open();
    CHECK(h.pay(30'000'000));
    CHECK(h.pay(20'000'000));
    const auto req = h.user.request_cancel(10'000'000);
    h.chain.produce_block();
    REQUIRE(h.ok(req));
    const auto rep = h.sp.handle_cancel();
    REQUIRE(rep);
    h.chain.produce_block();
    REQUIRE(h.ok(*rep));
    REQUIRE(h.bridge().cancel_pending());

    // The user never signs the lowered amount.
    CHECK_FALSE(h.sp.finish_cancel());
    CHECK(h.bridge().disclosed().empty());
    const UpdateTransaction u = h.sp.latest_update();
    CHECK(u.sigma == 50'000'000);
    CHECK(u.tmpl == h.bridge().generations().front().tmpl);
    const auto r = h.sp.settle();
    INFO(r.detail);
    CHECK(r.accepted());
    h.ledger.mine_block();
    CHECK_FALSE(h.user.punish_old_state());
}

TEST_CASE("the user refunds only after TL_f when the SP disappears", "[nodes]")
{
    Harness h({});
    h.open();
    CHECK(h.pay(10'000'000));
    const OutPoint fp = h.user.funding()->outpoint;
    h.ledger.mine_blocks(99 - *h.ledger.height_delta(fp));
    CHECK_FALSE(h.user.refund_after_expiry().accepted());
    h.ledger.mine_block();
    CHECK(h.user.refund_after_expiry().accepted());
    h.ledger.mine_block();
    CHECK(h.ledger.balance(h.user.wallet_script()) == kCoin - kFee);
}
