// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/templates.hpp"

#include "niji/interpreter.hpp"

namespace niji {

std::string_view to_string(ChannelKind k)
{
    return k == ChannelKind::kUnidirectional ? "uni" : "bidir";
}

Script build_redeem_script(std::uint32_t tl, const Hash160& hash_lock, const PublicKey& user, const PublicKey& sp)
{
    if (tl == 0)
        throw TemplateError("time-lock must be positive");
    Script s;
    s.op(Opcode::OP_IF)
        .op(Opcode::OP_HASH160)
        .push(hash_lock)
        .op(Opcode::OP_EQUALVERIFY)
        .push(user.compressed())
        .op(Opcode::OP_ELSE)
        .push_int(tl)
        .op(Opcode::OP_CHECKSEQUENCEVERIFY)
        .op(Opcode::OP_DROP)
        .push(sp.compressed())
        .op(Opcode::OP_ENDIF)
        .op(Opcode::OP_CHECKSIG);
    return s;
}

std::optional<RedeemTerms> parse_redeem_script(const Script& s)
{
    try {
        const auto ops = s.parse();
        if (ops.size() != 12)
            return std::nullopt;
        if (ops[2].data.size() != 20 || !ops[2].is_push())
            return std::nullopt;
        auto user = PublicKey::parse(ops[4].data);
        auto sp = PublicKey::parse(ops[9].data);
        if (!user || !sp)
            return std::nullopt;
        std::int64_t tl = 0;
        if (ops[6].opcode >= 0x51 && ops[6].opcode <= 0x60)
            tl = ops[6].opcode - 0x50;
        else if (ops[6].is_push() && !ops[6].data.empty())
            tl = decode_script_num(ops[6].data, 5);
        if (tl <= 0 || tl > static_cast<std::int64_t>(kSequenceLockMask))
            return std::nullopt;
        Hash160 hl{};
        std::copy(ops[2].data.begin(), ops[2].data.end(), hl.begin());
        RedeemTerms terms{hl, *user, static_cast<std::uint32_t>(tl), *sp};
        if (build_redeem_script(terms.tl, hl, *user, *sp) != s)
            return std::nullopt;
        return terms;
    } catch (const ScriptParseError&) {
        return std::nullopt;
    }
}

Script hashlock_output_script(const Script& redeem, ScriptMode mode)
{
    if (mode == ScriptMode::kLegacy)
        return p2sh_script(hash160(redeem.bytes()));
    return p2wsh_script(sha256(redeem.bytes()));
}

TransactionTemplate build_template(ScriptMode mode, ChannelKind kind, const OutPoint& funding_outpoint,
                                   const Script& funding_script, const PublicKey& user, const PublicKey& sp,
                                   std::optional<std::uint32_t> tl, std::optional<Hash160> hash_lock)
{
    TransactionTemplate t{mode, kind, Transaction{}, funding_script, user, sp};
    t.skeleton.version = 2;
    t.skeleton.locktime = 0;

    TxInput in;
    in.prevout = funding_outpoint;
    in.sequence = kSequenceFinal;
    if (mode == ScriptMode::kSegwit) {
        in.script_sig.push(nested_witness_program(funding_script).bytes());
        in.witness = {funding_script.bytes()};
    }
    t.skeleton.inputs.push_back(std::move(in));

    Script out0;
    if (kind == ChannelKind::kBidirectional) {
        if (!tl || !hash_lock)
            throw TemplateError("bi-directional template needs TL and HL");
        out0 = hashlock_output_script(build_redeem_script(*tl, *hash_lock, user, sp), mode);
    } else {
        out0 = owner_script(sp, mode);
    }
    t.skeleton.outputs.push_back(TxOutput{kNilValue, out0});
    t.skeleton.outputs.push_back(TxOutput{kNilValue, owner_script(user, mode)});
    return t;
}

Bytes TransactionTemplate::encode() const
{
    Writer w;
    w.u8(mode == ScriptMode::kLegacy ? 0 : 1);
    w.u8(kind == ChannelKind::kUnidirectional ? 0 : 1);
    w.var_bytes(skeleton.serialize());
    w.var_bytes(funding_script.bytes());
    w.raw(user_key.compressed());
    w.raw(sp_key.compressed());
    return std::move(w).bytes();
}

TransactionTemplate TransactionTemplate::decode(ByteView data)
{
    Reader r(data);
    const std::uint8_t mode = r.u8();
    const std::uint8_t kind = r.u8();
    if (mode > 1 || kind > 1)
        throw DecodeError("bad template mode or kind");
    Transaction skeleton = Transaction::deserialize(r.var_bytes());
    Script funding(r.var_bytes());
    auto user = PublicKey::parse(r.raw(33));
    auto sp = PublicKey::parse(r.raw(33));
    r.expect_done();
    if (!user || !sp)
        throw DecodeError("bad template key");
    return TransactionTemplate{mode == 0 ? ScriptMode::kLegacy : ScriptMode::kSegwit,
                               kind == 0 ? ChannelKind::kUnidirectional : ChannelKind::kBidirectional,
                               std::move(skeleton),
                               std::move(funding),
                               *user,
                               *sp};
}

nlohmann::ordered_json TransactionTemplate::to_json() const
{
    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(mode));
    j["kind"] = std::string(to_string(kind));
    j["version"] = skeleton.version;
    auto& ins = j["inputs"] = nlohmann::ordered_json::array();
    for (const auto& in : skeleton.inputs) {
        nlohmann::ordered_json ji;
        ji["prev_txid"] = in.prevout.txid.hex();
        ji["prev_index"] = in.prevout.index;
        ji["script_sig"] = in.script_sig.hex();
        ji["sequence"] = to_hex(Writer{}.u32(in.sequence).bytes());
        auto& wit = ji["witness"] = nlohmann::ordered_json::array();
        for (const auto& item : in.witness)
            wit.push_back(to_hex(item));
        ins.push_back(std::move(ji));
    }
    auto& outs = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& out : skeleton.outputs) {
        nlohmann::ordered_json jo;
        if (out.value == kNilValue)
            jo["value"] = "nil";
        else
            jo["value"] = out.value;
        jo["script_pubkey"] = out.script_pubkey.hex();
        jo["asm"] = out.script_pubkey.to_asm();
        outs.push_back(std::move(jo));
    }
    j["locktime"] = skeleton.locktime;
    j["funding_script"] = funding_script.hex();
    j["user_key"] = user_key.hex();
    j["sp_key"] = sp_key.hex();
    j["serialized"] = to_hex(serialize());
    return j;
}

Transaction fill_values(const TransactionTemplate& tmpl, Amount sigma, Amount change)
{
    Transaction tx = tmpl.skeleton;
    if (tx.outputs.size() != 2)
        throw TemplateError("template must have exactly two outputs");
    tx.outputs[0].value = sigma;
    tx.outputs[1].value = change;
    return tx;
}

bool SighashForm::complete() const
{
    if (mode == ScriptMode::kSegwit)
        return hash_outputs.has_value();
    for (const auto& out : legacy_tx.outputs)
        if (out.value == kNilValue)
            return false;
    return true;
}

Bytes SighashForm::bytes() const
{
    if (!complete())
        throw TemplateError("signature form still has nil fields");
    if (mode == ScriptMode::kLegacy)
        return legacy_sighash_preimage(legacy_tx, 0, legacy_tx.inputs.at(0).script_sig);
    Bip143Fields f = bip143;
    f.hash_outputs = *hash_outputs;
    return f.serialize();
}

SighashForm signature_form_template(const TransactionTemplate& tmpl, const ChannelTerms& terms)
{
    SighashForm form;
    form.mode = tmpl.mode;
    if (tmpl.mode == ScriptMode::kLegacy) {
        form.legacy_tx = tmpl.skeleton;
        form.legacy_tx.inputs.at(0).script_sig = tmpl.funding_script;
    } else {
        // Outputs are nil, so hashOutputs stays missing until sigma is known.
        form.bip143 = bip143_fields(tmpl.skeleton, 0, tmpl.funding_script, terms.deposit);
        form.bip143.hash_outputs = Hash256{};
    }
    return form;
}

SighashForm signature_form(const TransactionTemplate& tmpl, Amount sigma, const ChannelTerms& terms)
{
    if (sigma <= 0)
        throw TemplateError("remittance must be positive");
    if (terms.fee < 0 || sigma > terms.deposit - terms.fee)
        throw TemplateError("remittance exceeds deposit minus fee");
    const Transaction filled = fill_values(tmpl, sigma, terms.deposit - sigma - terms.fee);
    SighashForm form = signature_form_template(tmpl, terms);
    if (tmpl.mode == ScriptMode::kLegacy) {
        form.legacy_tx.outputs = filled.outputs;
    } else {
        form.hash_outputs = bip143_hash_outputs(filled.outputs);
    }
    return form;
}

Transaction assemble_transaction(const UpdateTransaction& update, const ChannelTerms& terms)
{
    (void)terms;
    const TransactionTemplate& tmpl = update.tmpl;
    Transaction tx = fill_values(tmpl, update.sigma, update.change);

    const Bytes user_sig = bitcoin_signature(update.user_sig.der());
    const Bytes sp_sig = update.sp_sig ? bitcoin_signature(update.sp_sig->der()) : Bytes{};
    const bool user_first = tmpl.user_key.compressed() < tmpl.sp_key.compressed();
    const Bytes& first = user_first ? user_sig : sp_sig;
    const Bytes& second = user_first ? sp_sig : user_sig;

    TxInput& in = tx.inputs.at(0);
    if (tmpl.mode == ScriptMode::kLegacy) {
        Script sig;
        sig.op(Opcode::OP_0);
        first.empty() ? sig.op(Opcode::OP_0) : sig.push(first);
        second.empty() ? sig.op(Opcode::OP_0) : sig.push(second);
        sig.push_int(1).push(tmpl.funding_script.bytes());
        in.script_sig = std::move(sig);
        in.witness.clear();
    } else {
        in.witness = {Bytes{}, first, second, Bytes{1}, tmpl.funding_script.bytes()};
    }
    return tx;
}

Transaction complete_transaction(const TransactionTemplate& tmpl, const RecoverableSignature& user_sig,
                                 const RecoverableSignature& sp_sig, Amount sigma, Amount change,
                                 const ChannelTerms& terms)
{
    if (change != terms.deposit - sigma - terms.fee)
        throw TemplateError("change does not equal deposit - sigma - fee");
    const Hash256 digest = signature_form(tmpl, sigma, terms).digest();
    if (!user_sig.has_low_s() || !ecdsa_verify(tmpl.user_key, digest, user_sig.r, user_sig.s))
        throw TemplateError("user signature does not match the signature form");
    if (!sp_sig.has_low_s() || !ecdsa_verify(tmpl.sp_key, digest, sp_sig.r, sp_sig.s))
        throw TemplateError("service provider signature does not match the signature form");
    return assemble_transaction(UpdateTransaction{tmpl, user_sig, sp_sig, sigma, change}, terms);
}

std::vector<std::string> validate_template(const TransactionTemplate& tmpl, const std::optional<Script>& redeem,
                                           const ChannelParams& params)
{
    std::vector<std::string> v;
    const Transaction& t = tmpl.skeleton;

    if (t.version != 2)
        v.emplace_back("version must be 2");
    if (t.locktime != 0)
        v.emplace_back("locktime must be 0");
    if (t.inputs.size() != 1)
        v.emplace_back("template must have exactly one input");
    if (t.outputs.size() != 2)
        v.emplace_back("template must have exactly two outputs");
    if (!v.empty())
        return v;

    const TxInput& in = t.inputs[0];
    if (in.sequence != kSequenceFinal)
        v.emplace_back("input sequence must be FFFFFFFF");
    for (const auto& out : t.outputs)
        if (out.value != kNilValue)
            v.emplace_back("output values must be nil");

    if (tmpl.mode == ScriptMode::kLegacy) {
        if (!in.script_sig.empty() || !in.witness.empty())
            v.emplace_back("legacy template input must carry no script or witness");
    } else {
        Script expected;
        expected.push(nested_witness_program(tmpl.funding_script).bytes());
        if (in.script_sig != expected)
            v.emplace_back("segwit input script must be OP_0 <hash of witnessScript>");
        if (in.witness != WitnessStack{tmpl.funding_script.bytes()})
            v.emplace_back("segwit witness must hold only the witnessScript");
    }

    if (params.funding_outpoint && in.prevout != *params.funding_outpoint)
        v.emplace_back("input does not reference the registered funding outpoint");
    if (multisig_address(tmpl.funding_script, tmpl.mode) != params.multisig_address)
        v.emplace_back("funding script does not hash to the multisig address");

    const auto funding = parse_funding_script(tmpl.funding_script);
    if (!funding) {
        v.emplace_back("funding script has an unexpected shape");
    } else if (funding->user != tmpl.user_key || funding->sp != tmpl.sp_key) {
        v.emplace_back("funding script keys do not match the template keys");
    }
    std::uint32_t tl_f = 0;
    if (params.tl_f)
        tl_f = *params.tl_f;
    else if (funding)
        tl_f = funding->tl_f;

    if (eth_address(tmpl.user_key) != params.user_address)
        v.emplace_back("user key does not match the registered user address");
    if (t.outputs[1].script_pubkey != owner_script(tmpl.user_key, tmpl.mode))
        v.emplace_back("output[1] must pay the user's pubkey hash");

    if (tmpl.kind == ChannelKind::kUnidirectional) {
        if (redeem)
            v.emplace_back("uni-directional template takes no redeemScript");
        if (t.outputs[0].script_pubkey != owner_script(tmpl.sp_key, tmpl.mode))
            v.emplace_back("output[0] must pay the service provider's pubkey hash");
        return v;
    }

    if (!redeem) {
        v.emplace_back("bi-directional template requires a redeemScript");
        return v;
    }
    if (t.outputs[0].script_pubkey != hashlock_output_script(*redeem, tmpl.mode))
        v.emplace_back("redeemScript hash does not match output[0]");
    const auto terms = parse_redeem_script(*redeem);
    if (!terms) {
        v.emplace_back("redeemScript has an unexpected shape");
        return v;
    }
    if (terms->user != tmpl.user_key || terms->sp != tmpl.sp_key)
        v.emplace_back("redeemScript keys do not match the template keys");
    if (tl_f == 0)
        v.emplace_back("funding time-lock unknown");
    else if (terms->tl <= tl_f)
        v.emplace_back("template TL " + std::to_string(terms->tl) + " must exceed TL_f " + std::to_string(tl_f));
    return v;
}

namespace {

Transaction claim(const OutPoint& output, Amount value, const Script& redeem, ScriptMode mode,
                  const SecretKey& key, const Script& destination, Amount fee, std::uint32_t sequence,
                  const std::vector<Bytes>& branch)
{
    if (value <= fee)
        throw TemplateError("output does not cover the claim fee");
    Transaction tx;
    tx.version = 2;
    tx.inputs.push_back(TxInput{output, Script{}, sequence, {}});
    tx.outputs.push_back(TxOutput{value - fee, destination});

    const Hash256 digest = mode == ScriptMode::kLegacy ? legacy_sighash(tx, 0, redeem)
                                                       : bip143_sighash(tx, 0, redeem, value);
    const Bytes sig = bitcoin_signature(ecdsa_sign(key, digest).der());
    if (mode == ScriptMode::kLegacy) {
        Script s;
        s.push(sig);
        for (const auto& item : branch)
            item.empty() ? s.op(Opcode::OP_0) : s.push(item);
        s.push(redeem.bytes());
        tx.inputs[0].script_sig = std::move(s);
    } else {
        WitnessStack w{sig};
        w.insert(w.end(), branch.begin(), branch.end());
        w.push_back(redeem.bytes());
        tx.inputs[0].witness = std::move(w);
    }
    return tx;
}

}  // namespace

Transaction build_hashlock_claim(const OutPoint& output, Amount value, const Script& redeem, ScriptMode mode,
                                 ByteView preimage, const SecretKey& user_key, const Script& destination, Amount fee)
{
    return claim(output, value, redeem, mode, user_key, destination, fee, kSequenceFinal,
                 {Bytes(preimage.begin(), preimage.end()), Bytes{1}});
}

Transaction build_timelock_claim(const OutPoint& output, Amount value, const Script& redeem, ScriptMode mode,
                                 const SecretKey& sp_key, const Script& destination, Amount fee)
{
    const auto terms = parse_redeem_script(redeem);
    if (!terms)
        throw TemplateError("not a hash-lock/time-lock redeemScript");
    return claim(output, value, redeem, mode, sp_key, destination, fee, terms->tl, {Bytes{}});
}

}  // namespace niji
