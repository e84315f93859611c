// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <set>

using namespace niji;
using namespace niji::test;

TEST_CASE("mining advances the height one block at a time", "[ledger]")
{
    Ledger l;
    CHECK(l.height() == 0);
    const OutPoint p = l.mint(p2pkh_script(Hash160{}), 5000);
    CHECK_FALSE(l.utxo(p));
    CHECK(l.mine_block() == 1);
    CHECK(l.mine_block() == 2);
    l.mine_blocks(3);
    CHECK(l.height() == 5);
    REQUIRE(l.utxo(p));
    CHECK(l.utxo(p)->output.value == 5000);
    CHECK(l.utxo(p)->height == 1);
    CHECK(l.height_delta(p) == 4u);
}

TEST_CASE("funding output is locked to the agreed redeemScript", "[ledger]")
{
    for (auto mode : {ScriptMode::kLegacy, ScriptMode::kSegwit}) {
        ChannelFixture f(mode);
        CHECK(f.funding.redeem_script.hex() == kFundingScript);
        const auto coin = f.ledger.utxo(f.funding.outpoint);
        REQUIRE(coin);
        CHECK(coin->output.value == kCoin);
        CHECK(coin->output.script_pubkey == funding_script_pubkey(f.funding.redeem_script, mode));
        CHECK(f.ledger.balance(owner_script(f.user.public_key(), mode)) == 0);
    }
}

TEST_CASE("funding needs enough coins", "[ledger]")
{
    Ledger l;
    const Script w = owner_script(user_key().public_key(), ScriptMode::kLegacy);
    l.mint(w, kCoin);
    l.mine_block();
    CHECK_THROWS_AS(build_funding_tx(l.coins_for(w), user_key(), sp_key().public_key(), kCoin, 100, kFee,
                                     ScriptMode::kLegacy),
                    FundingError);
}

TEST_CASE("settlement with both signatures is accepted at any height", "[ledger]")
{
    for (auto mode : {ScriptMode::kLegacy, ScriptMode::kSegwit}) {
        ChannelFixture f(mode);
        const Transaction tx = f.settlement(50'000'000);
        const auto r = f.ledger.submit_tx(tx);
        INFO(r.detail);
        REQUIRE(r.accepted());
        f.ledger.mine_block();
        CHECK(f.ledger.balance(owner_script(f.sp.public_key(), mode)) == 50'000'000);
        CHECK(f.ledger.balance(owner_script(f.user.public_key(), mode)) == 49'990'000);
    }
}

TEST_CASE("an update transaction without the SP signature is rejected", "[ledger]")
{
    for (auto mode : {ScriptMode::kLegacy, ScriptMode::kSegwit}) {
        ChannelFixture f(mode);
        const UpdateTransaction u{f.tmpl, f.sign(f.user, 50'000'000), std::nullopt, 50'000'000, 49'990'000};
        const auto r = f.ledger.submit_tx(assemble_transaction(u, f.terms));
        CHECK(r.reject == TxReject::kScriptFailure);
    }
}

TEST_CASE("spent outputs cannot be spent again", "[ledger]")
{
    ChannelFixture f;
    const Transaction tx = f.settlement(50'000'000);
    REQUIRE(f.ledger.submit_tx(tx));
    CHECK(f.ledger.submit_tx(f.settlement(60'000'000)).reject == TxReject::kDoubleSpend);
    f.ledger.mine_block();
    CHECK(f.ledger.submit_tx(tx).reject == TxReject::kDoubleSpend);
    CHECK_FALSE(f.ledger.utxo(f.funding.outpoint));
    CHECK(f.ledger.spender_of(f.funding.outpoint) == tx.txid());
}

TEST_CASE("refund branch opens after TL_f blocks", "[ledger]")
{
    for (auto mode : {ScriptMode::kLegacy, ScriptMode::kSegwit}) {
        ChannelFixture f(mode);
        const Script dest = owner_script(f.user.public_key(), mode);
        const Transaction refund = build_refund_tx(f.funding, f.user, dest, kFee);
        f.ledger.mine_blocks(99 - *f.ledger.height_delta(f.funding.outpoint));
        REQUIRE(f.ledger.height_delta(f.funding.outpoint) == 99u);
        CHECK_FALSE(f.ledger.submit_tx(refund).accepted());
        f.ledger.mine_block();
        const auto r = f.ledger.submit_tx(refund);
        INFO(r.detail);
        CHECK(r.accepted());
        f.ledger.mine_block();
        CHECK(f.ledger.balance(dest) == kCoin - kFee);
    }
}

TEST_CASE("refund signed by the SP is refused", "[ledger]")
{
    ChannelFixture f;
    f.ledger.mine_blocks(200);
    const Transaction refund = build_refund_tx(f.funding, f.sp, p2pkh_script(Hash160{}), kFee);
    CHECK(f.ledger.submit_tx(refund).reject == TxReject::kScriptFailure);
}

TEST_CASE("value balance and input existence are enforced", "[ledger]")
{
    Ledger l;
    const SecretKey k = user_key();
    const Script w = owner_script(k.public_key(), ScriptMode::kLegacy);
    const OutPoint p = l.mint(w, 1000);
    l.mine_block();

    Transaction over = build_owner_sweep({{p, *l.utxo(p)}}, k, w, 0);
    over.outputs[0].value = 1001;
    sign_owner_inputs(over, {*l.utxo(p)}, k);
    CHECK(l.submit_tx(over).reject == TxReject::kNegativeFee);

    Transaction negative = build_owner_sweep({{p, *l.utxo(p)}}, k, w, 0);
    negative.outputs[0].value = -1;
    CHECK(l.submit_tx(negative).reject == TxReject::kNegativeValue);

    Transaction ghost = build_owner_sweep({{p, *l.utxo(p)}}, k, w, 10);
    ghost.inputs[0].prevout.index = 7;
    CHECK(l.submit_tx(ghost).reject == TxReject::kMissingInput);

    Transaction dup = build_owner_sweep({{p, *l.utxo(p)}}, k, w, 10);
    dup.inputs.push_back(dup.inputs[0]);
    CHECK(l.submit_tx(dup).reject == TxReject::kDuplicateInput);

    CHECK(l.submit_tx(build_owner_sweep({{p, *l.utxo(p)}}, k, w, 10)).accepted());
}

TEST_CASE("random spending keeps the ledger conserved and consistent", "[ledger]")
{
    std::mt19937_64 rng(41);
    std::vector<SecretKey> keys;
    for (int i = 0; i < 4; ++i)
        keys.push_back(random_key(rng));
    auto wallet = [&](std::size_t i) {
        return owner_script(keys[i].public_key(), i % 2 ? ScriptMode::kSegwit : ScriptMode::kLegacy);
    };

    Ledger l;
    for (std::size_t i = 0; i < keys.size(); ++i)
        l.mint(wallet(i), 10 * kCoin);
    l.mine_block();

    std::set<OutPoint> ever_created;
    for (const auto& [p, c] : l.utxo_set())
        ever_created.insert(p);

    for (int block = 0; block < 30; ++block) {
        const Amount before = l.total_value();
        for (int t = 0; t < 3; ++t) {
            const std::size_t from = rng() % keys.size();
            auto coins = l.coins_for(wallet(from));
            if (coins.empty())
                continue;
            coins.resize(1 + rng() % coins.size());
            const Amount fee = static_cast<Amount>(rng() % 5000);
            Transaction tx = build_owner_sweep(coins, keys[from], wallet(rng() % keys.size()), fee);
            // Split the sweep so later blocks have several coins to choose from.
            if (tx.outputs[0].value > 2 * fee + 10) {
                const Amount half = tx.outputs[0].value / 2;
                tx.outputs[0].value -= half;
                tx.outputs.push_back(TxOutput{half, wallet(rng() % keys.size())});
                std::vector<Coin> spent;
                for (const auto& [p, c] : coins)
                    spent.push_back(c);
                sign_owner_inputs(tx, spent, keys[from]);
            }
            l.submit_tx(tx);
        }
        l.mine_block();
        const LedgerBlock& b = l.blocks().back();
        CHECK(before - l.total_value() == b.fees - b.minted);
        for (const auto& tx : b.txs) {
            for (const auto& in : tx.inputs)
                CHECK(ever_created.contains(in.prevout));
            for (std::uint32_t i = 0; i < tx.outputs.size(); ++i)
                ever_created.insert(OutPoint{tx.txid(), i});
        }
        for (const auto& [p, c] : l.utxo_set())
            CHECK_FALSE(l.spender_of(p));
    }
}
