// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace niji;
using namespace niji::test;

namespace {

/// Random script plus the data of each push, in order.
std::pair<Script, std::vector<Bytes>> random_script(std::mt19937_64& rng)
{
    static const Opcode ops[] = {Opcode::OP_DUP,         Opcode::OP_HASH160,  Opcode::OP_EQUAL,
                                 Opcode::OP_EQUALVERIFY, Opcode::OP_CHECKSIG, Opcode::OP_CHECKMULTISIG,
                                 Opcode::OP_IF,          Opcode::OP_ELSE,     Opcode::OP_ENDIF,
                                 Opcode::OP_CHECKSEQUENCEVERIFY, Opcode::OP_DROP};
    Script s;
    std::vector<Bytes> pushes;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
        if (rng() % 2) {
            s.op(ops[rng() % std::size(ops)]);
        } else {
            // Lengths past 75 and 255 exercise PUSHDATA1 and PUSHDATA2.
            Bytes data = random_bytes(rng, 2 + rng() % 300);
            s.push(data);
            pushes.push_back(std::move(data));
        }
    }
    return {s, pushes};
}

/// A one-input, one-output spend of `prev` with the given sequence.
Transaction spend_of(const OutPoint& prev, std::uint32_t sequence, Amount value)
{
    Transaction tx;
    tx.version = 2;
    tx.inputs.push_back(TxInput{prev, Script{}, sequence, {}});
    tx.outputs.push_back(TxOutput{value, p2pkh_script(hash160(from_hex(kPkUser)))});
    return tx;
}

struct HashLockOutput {
    SecretKey user = user_key();
    SecretKey sp = sp_key();
    Bytes s0 = Bytes(32, 0x11);
    Script redeem = build_redeem_script(110, hash160(s0), user.public_key(), sp.public_key());
    Script lock = p2sh_script(hash160(redeem.bytes()));
    OutPoint prev{Txid{}, 0};
    Amount value = 50'000'000;

    Bytes sig(const SecretKey& k, const Transaction& tx) const
    {
        return bitcoin_signature(ecdsa_sign(k, legacy_sighash(tx, 0, redeem)).der());
    }

    bool run(const Transaction& tx, const Script& unlock, std::uint32_t delta) const
    {
        SpendContext ctx{&tx, 0, value, 1000 + delta, 1000};
        return eval_script(unlock, lock, ctx);
    }

    bool else_branch(std::uint32_t delta, std::uint32_t sequence = 110) const
    {
        const Transaction tx = spend_of(prev, sequence, value - kFee);
        Script unlock;
        unlock.push(sig(sp, tx)).op(Opcode::OP_0).push(redeem.bytes());
        return run(tx, unlock, delta);
    }
};

}  // namespace

TEST_CASE("script numbers use minimal encoding", "[script]")
{
    CHECK(encode_script_num(0).empty());
    CHECK(to_hex(encode_script_num(100)) == "64");
    CHECK(to_hex(encode_script_num(110)) == "6e");
    CHECK(to_hex(encode_script_num(128)) == "8000");
    CHECK(to_hex(encode_script_num(-1)) == "81");
    CHECK(to_hex(encode_script_num(-128)) == "8080");
    for (std::int64_t n : {0, 1, -1, 16, 127, 128, 255, 256, 65535, -65535, 2147483647})
        CHECK(decode_script_num(encode_script_num(n)) == n);
    CHECK_THROWS_AS(decode_script_num(from_hex("6400")), ScriptParseError);
    CHECK_THROWS_AS(decode_script_num(from_hex("0000000001")), ScriptParseError);
}

TEST_CASE("scripts round-trip through parsing", "[script]")
{
    std::mt19937_64 rng(21);
    for (int i = 0; i < 500; ++i) {
        const auto [s, pushes] = random_script(rng);
        const Script copy(s.bytes());
        CHECK(copy == s);
        std::vector<Bytes> parsed;
        for (const auto& op : copy.parse())
            if (op.is_push())
                parsed.push_back(op.data);
        CHECK(parsed == pushes);
    }
    CHECK_THROWS_AS(Script(from_hex("4c05aa")).parse(), ScriptParseError);
    CHECK_THROWS_AS(Script(from_hex("05aabb")).parse(), ScriptParseError);
}

TEST_CASE("conditional nesting is checked", "[script]")
{
    CHECK(Script(from_hex("6351675168")).conditionals_balanced());
    CHECK(Script(from_hex("63636851675168")).conditionals_balanced());
    CHECK_FALSE(Script(from_hex("63516868")).conditionals_balanced());
    CHECK_FALSE(Script(from_hex("6751")).conditionals_balanced());
    CHECK_FALSE(Script(from_hex("6351")).conditionals_balanced());

    Transaction tx = spend_of(OutPoint{}, kSequenceFinal, 1);
    SpendContext ctx{&tx, 0, 1, 1, 1};
    Stack st;
    CHECK(eval_script(st, Script(from_hex("516351")), SigVersion::kBase, ctx) == ScriptError::kUnbalancedConditional);
    st.clear();
    CHECK(eval_script(st, Script(from_hex("5168")), SigVersion::kBase, ctx) == ScriptError::kUnbalancedConditional);
}

TEST_CASE("opcodes outside the subset are refused", "[script]")
{
    Transaction tx = spend_of(OutPoint{}, kSequenceFinal, 1);
    SpendContext ctx{&tx, 0, 1, 1, 1};
    for (const char* raw : {"5193", "51b1", "516a", "51a9aa"}) {
        Stack st;
        INFO(raw);
        CHECK(eval_script(st, Script(from_hex(raw)), SigVersion::kBase, ctx) == ScriptError::kUnsupportedOpcode);
    }
}

TEST_CASE("the hash-lock redeemScript has the expected layout", "[script]")
{
    HashLockOutput f;
    const auto ops = f.redeem.parse();
    REQUIRE(ops.size() == 12);
    CHECK(f.redeem.to_asm() == "OP_IF OP_HASH160 " + to_hex(hash160(f.s0)) + " OP_EQUALVERIFY " + kPkUser +
                                   " OP_ELSE 6e OP_CSV OP_DROP " + kPkSp + " OP_ENDIF OP_CHECKSIG");
    const auto terms = parse_redeem_script(f.redeem);
    REQUIRE(terms);
    CHECK(terms->tl == 110);
    CHECK(terms->hash_lock == hash160(f.s0));
    CHECK_THROWS_AS(build_redeem_script(0, hash160(f.s0), f.user.public_key(), f.sp.public_key()), TemplateError);
}

TEST_CASE("hash-lock branch accepts the pre-image and the user's signature", "[script]")
{
    HashLockOutput f;
    const Transaction tx = spend_of(f.prev, kSequenceFinal, f.value - kFee);
    Script unlock;
    unlock.push(f.sig(f.user, tx)).push(f.s0).push_int(1).push(f.redeem.bytes());
    CHECK(f.run(tx, unlock, 0));

    Script wrong_preimage;
    wrong_preimage.push(f.sig(f.user, tx)).push(Bytes(32, 0x12)).push_int(1).push(f.redeem.bytes());
    CHECK_FALSE(f.run(tx, wrong_preimage, 0));

    Script sp_signs;
    sp_signs.push(f.sig(f.sp, tx)).push(f.s0).push_int(1).push(f.redeem.bytes());
    CHECK_FALSE(f.run(tx, sp_signs, 500));
}

TEST_CASE("time-lock branch opens after exactly TL blocks", "[script]")
{
    HashLockOutput f;
    CHECK_FALSE(f.else_branch(109));
    CHECK(f.else_branch(110));
    CHECK(f.else_branch(111));
    // The sequence must also encode the lock.
    CHECK_FALSE(f.else_branch(200, 109));
    CHECK_FALSE(f.else_branch(200, kSequenceFinal));
}

TEST_CASE("CSV acceptance is monotone in the height delta", "[script]")
{
    HashLockOutput f;
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 4; ++trial) {
        const std::uint32_t seq = 100 + static_cast<std::uint32_t>(rng() % 30);
        std::optional<std::uint32_t> first;
        for (std::uint32_t d = 95; d < 140; ++d) {
            const bool ok = f.else_branch(d, seq);
            if (ok && !first)
                first = d;
            if (first)
                CHECK(ok);
        }
        // A sequence below the script's 110 fails CSV at any height. The
        // input's own maturity (delta >= sequence) is the ledger's check.
        if (seq < 110)
            CHECK_FALSE(first);
        else
            CHECK(first == 110u);
    }
}

TEST_CASE("CSV needs transaction version 2", "[script]")
{
    HashLockOutput f;
    Transaction tx = spend_of(f.prev, 110, f.value - kFee);
    tx.version = 1;
    Script unlock;
    unlock.push(f.sig(f.sp, tx)).op(Opcode::OP_0).push(f.redeem.bytes());
    CHECK_FALSE(f.run(tx, unlock, 500));
}

TEST_CASE("2-of-2 multisig needs both signatures", "[script]")
{
    const PublicKey a = user_key().public_key();
    const PublicKey b = sp_key().public_key();
    Script ms;
    ms.push_int(2).push(a.compressed()).push(b.compressed()).push_int(2).op(Opcode::OP_CHECKMULTISIG);
    const Script lock = p2sh_script(hash160(ms.bytes()));
    const Transaction tx = spend_of(OutPoint{}, kSequenceFinal, 1000);
    const Hash256 h = legacy_sighash(tx, 0, ms);
    const Bytes sa = bitcoin_signature(ecdsa_sign(user_key(), h).der());
    const Bytes sb = bitcoin_signature(ecdsa_sign(sp_key(), h).der());
    SpendContext ctx{&tx, 0, 2000, 10, 5};

    Script both;
    both.op(Opcode::OP_0).push(sa).push(sb).push(ms.bytes());
    CHECK(eval_script(both, lock, ctx));

    Script one;
    one.op(Opcode::OP_0).push(sa).op(Opcode::OP_0).push(ms.bytes());
    CHECK_FALSE(eval_script(one, lock, ctx));

    Script swapped;
    swapped.op(Opcode::OP_0).push(sb).push(sa).push(ms.bytes());
    CHECK_FALSE(eval_script(swapped, lock, ctx));

    Script no_dummy;
    no_dummy.push_int(1).push(sa).push(sb).push(ms.bytes());
    CHECK_FALSE(eval_script(no_dummy, lock, ctx));
}

TEST_CASE("signatures must be strict DER, low-s and SIGHASH_ALL", "[script]")
{
    const PublicKey pk = user_key().public_key();
    const Script lock = p2pkh_script(hash160(pk.compressed()));
    const Transaction tx = spend_of(OutPoint{}, kSequenceFinal, 1000);
    SpendContext ctx{&tx, 0, 2000, 10, 5};
    const auto sig = ecdsa_sign(user_key(), legacy_sighash(tx, 0, lock));

    Script ok;
    ok.push(bitcoin_signature(sig.der())).push(pk.compressed());
    CHECK(eval_script(ok, lock, ctx));

    Script other_type;
    other_type.push(bitcoin_signature(sig.der(), 0x02)).push(pk.compressed());
    CHECK_FALSE(eval_script(other_type, lock, ctx));

    // (r, n - s) is the same signature in high-s form.
    RecoverableSignature high = sig;
    const auto n = from_hex("fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141");
    int borrow = 0;
    for (int i = 31; i >= 0; --i) {
        int d = n[i] - sig.s[i] - borrow;
        borrow = d < 0;
        high.s[i] = static_cast<std::uint8_t>(d + (borrow ? 256 : 0));
    }
    Script high_s;
    high_s.push(bitcoin_signature(high.der())).push(pk.compressed());
    CHECK_FALSE(eval_script(high_s, lock, ctx));

    Script not_push_only;
    not_push_only.push(bitcoin_signature(sig.der())).push(pk.compressed()).op(Opcode::OP_DUP).op(Opcode::OP_DROP);
    CHECK_FALSE(eval_script(not_push_only, lock, ctx));
}
