// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/funding.hpp"

namespace niji {

std::string_view to_string(ScriptMode m)
{
    return m == ScriptMode::kLegacy ? "legacy" : "segwit";
}

Script build_funding_script(const PublicKey& user, const PublicKey& sp, std::uint32_t tl_f)
{
    const auto& [first, second] = user.compressed() < sp.compressed() ? std::pair(user, sp) : std::pair(sp, user);
    Script s;
    s.op(Opcode::OP_IF)
        .push_int(2)
        .push(first.compressed())
        .push(second.compressed())
        .push_int(2)
        .op(Opcode::OP_CHECKMULTISIG)
        .op(Opcode::OP_ELSE)
        .push_int(tl_f)
        .op(Opcode::OP_CHECKSEQUENCEVERIFY)
        .op(Opcode::OP_DROP)
        .push(user.compressed())
        .op(Opcode::OP_CHECKSIG)
        .op(Opcode::OP_ENDIF);
    return s;
}

std::optional<FundingTerms> parse_funding_script(const Script& s)
{
    try {
        const auto ops = s.parse();
        if (ops.size() != 13)
            return std::nullopt;
        const auto is = [&](std::size_t i, Opcode c) { return ops[i].opcode == static_cast<std::uint8_t>(c); };
        if (!is(0, Opcode::OP_IF) || !is(1, Opcode::OP_2) || !is(4, Opcode::OP_2) ||
            !is(5, Opcode::OP_CHECKMULTISIG) || !is(6, Opcode::OP_ELSE) || !is(8, Opcode::OP_CHECKSEQUENCEVERIFY) ||
            !is(9, Opcode::OP_DROP) || !is(11, Opcode::OP_CHECKSIG) || !is(12, Opcode::OP_ENDIF))
            return std::nullopt;
        auto a = PublicKey::parse(ops[2].data);
        auto b = PublicKey::parse(ops[3].data);
        auto user = PublicKey::parse(ops[10].data);
        if (!a || !b || !user || !ops[2].is_push() || !ops[3].is_push() || !ops[10].is_push())
            return std::nullopt;
        if (!(a->compressed() < b->compressed()))
            return std::nullopt;
        if (*user != *a && *user != *b)
            return std::nullopt;
        std::int64_t tl = 0;
        if (ops[7].opcode >= 0x51 && ops[7].opcode <= 0x60)
            tl = ops[7].opcode - 0x50;
        else if (ops[7].is_push() && !ops[7].data.empty())
            tl = decode_script_num(ops[7].data, 5);
        else
            return std::nullopt;
        if (tl <= 0 || tl > static_cast<std::int64_t>(kSequenceLockMask))
            return std::nullopt;
        const PublicKey& sp = *user == *a ? *b : *a;
        if (build_funding_script(*user, sp, static_cast<std::uint32_t>(tl)) != s)
            return std::nullopt;
        return FundingTerms{*user, sp, static_cast<std::uint32_t>(tl)};
    } catch (const ScriptParseError&) {
        return std::nullopt;
    }
}

Script nested_witness_program(const Script& witness_script)
{
    return p2wsh_script(sha256(witness_script.bytes()));
}

Script funding_script_pubkey(const Script& funding_script, ScriptMode mode)
{
    return p2sh_script(multisig_address(funding_script, mode));
}

Hash160 multisig_address(const Script& funding_script, ScriptMode mode)
{
    if (mode == ScriptMode::kLegacy)
        return hash160(funding_script.bytes());
    return hash160(nested_witness_program(funding_script).bytes());
}

Script owner_script(const PublicKey& key, ScriptMode mode)
{
    const Hash160 h = hash160(key.compressed());
    return mode == ScriptMode::kLegacy ? p2pkh_script(h) : p2wpkh_script(h);
}

void sign_owner_inputs(Transaction& tx, const std::vector<Coin>& spent, const SecretKey& key)
{
    const PublicKey pub = key.public_key();
    const Hash160 h = hash160(pub.compressed());
    for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
        const Script& spk = spent.at(i).output.script_pubkey;
        if (spk == p2pkh_script(h)) {
            const Hash256 digest = legacy_sighash(tx, i, spk);
            Script sig;
            sig.push(bitcoin_signature(ecdsa_sign(key, digest).der())).push(pub.compressed());
            tx.inputs[i].script_sig = std::move(sig);
        } else if (spk == p2wpkh_script(h)) {
            const Hash256 digest = bip143_sighash(tx, i, p2pkh_script(h), spent[i].output.value);
            tx.inputs[i].script_sig = Script{};
            tx.inputs[i].witness = {bitcoin_signature(ecdsa_sign(key, digest).der()), to_bytes(pub.compressed())};
        } else {
            throw FundingError("input " + std::to_string(i) + " is not owned by the signing key");
        }
    }
}

FundingTx build_funding_tx(const std::vector<std::pair<OutPoint, Coin>>& coins, const SecretKey& user_key,
                           const PublicKey& sp_key, Amount deposit, std::uint32_t tl_f, Amount fee, ScriptMode mode)
{
    if (deposit <= 0 || fee < 0)
        throw FundingError("deposit must be positive and fee non-negative");
    const PublicKey user = user_key.public_key();

    FundingTx f;
    f.mode = mode;
    f.deposit = deposit;
    f.tl_f = tl_f;
    f.redeem_script = build_funding_script(user, sp_key, tl_f);

    Amount available = 0;
    std::vector<Coin> spent;
    for (const auto& [point, coin] : coins) {
        if (available >= deposit + fee)
            break;
        f.tx.inputs.push_back(TxInput{point, Script{}, kSequenceFinal, {}});
        spent.push_back(coin);
        available += coin.output.value;
    }
    if (available < deposit + fee)
        throw FundingError("insufficient funds for deposit plus fee");

    f.tx.outputs.push_back(TxOutput{deposit, funding_script_pubkey(f.redeem_script, mode)});
    if (const Amount change = available - deposit - fee; change > 0)
        f.tx.outputs.push_back(TxOutput{change, owner_script(user, mode)});
    sign_owner_inputs(f.tx, spent, user_key);
    f.outpoint = OutPoint{f.tx.txid(), 0};
    return f;
}

Transaction build_owner_sweep(const std::vector<std::pair<OutPoint, Coin>>& coins, const SecretKey& key,
                              const Script& destination, Amount fee)
{
    Transaction tx;
    std::vector<Coin> spent;
    Amount total = 0;
    for (const auto& [point, coin] : coins) {
        tx.inputs.push_back(TxInput{point, Script{}, kSequenceFinal, {}});
        spent.push_back(coin);
        total += coin.output.value;
    }
    if (total <= fee)
        throw FundingError("sweep value does not cover the fee");
    tx.outputs.push_back(TxOutput{total - fee, destination});
    sign_owner_inputs(tx, spent, key);
    return tx;
}

Transaction build_refund_tx(const FundingTx& funding, const SecretKey& user_key, const Script& destination,
                            Amount fee)
{
    if (funding.deposit <= fee)
        throw FundingError("deposit does not cover the refund fee");
    Transaction tx;
    tx.version = 2;
    tx.inputs.push_back(TxInput{funding.outpoint, Script{}, funding.tl_f, {}});
    tx.outputs.push_back(TxOutput{funding.deposit - fee, destination});

    const Bytes empty;
    if (funding.mode == ScriptMode::kLegacy) {
        const Hash256 digest = legacy_sighash(tx, 0, funding.redeem_script);
        Script sig;
        sig.push(bitcoin_signature(ecdsa_sign(user_key, digest).der()))
            .op(Opcode::OP_0)
            .push(funding.redeem_script.bytes());
        tx.inputs[0].script_sig = std::move(sig);
    } else {
        const Hash256 digest = bip143_sighash(tx, 0, funding.redeem_script, funding.deposit);
        tx.inputs[0].script_sig = Script{}.push(nested_witness_program(funding.redeem_script).bytes());
        tx.inputs[0].witness = {bitcoin_signature(ecdsa_sign(user_key, digest).der()), empty,
                                funding.redeem_script.bytes()};
    }
    return tx;
}

}  // namespace niji
