// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/interpreter.hpp"

#include "niji/secp256k1.hpp"

namespace niji {

std::string_view to_string(ScriptError err)
{
    switch (err) {
    case ScriptError::kOk: return "ok";
    case ScriptError::kEvalFalse: return "script evaluated to false";
    case ScriptError::kUnsupportedOpcode: return "unsupported opcode";
    case ScriptError::kUnbalancedConditional: return "unbalanced conditional";
    case ScriptError::kBadPush: return "malformed push";
    case ScriptError::kStackUnderflow: return "stack underflow";
    case ScriptError::kVerifyFailed: return "verify failed";
    case ScriptError::kEqualVerifyFailed: return "equalverify failed";
    case ScriptError::kBadNumber: return "bad script number";
    case ScriptError::kSigDerEncoding: return "non-strict DER signature";
    case ScriptError::kSigHighS: return "signature s not in lower half";
    case ScriptError::kSigHashType: return "unsupported sighash type";
    case ScriptError::kBadPubkey: return "invalid public key";
    case ScriptError::kMultisigKeyCount: return "bad multisig key count";
    case ScriptError::kMultisigSigCount: return "bad multisig signature count";
    case ScriptError::kNullDummy: return "multisig dummy not empty";
    case ScriptError::kNegativeLocktime: return "negative relative locktime";
    case ScriptError::kUnsupportedLocktimeType: return "time-based relative locktime unsupported";
    case ScriptError::kTxVersionTooLow: return "transaction version below 2";
    case ScriptError::kSequenceDisabled: return "input sequence disables relative locktime";
    case ScriptError::kRelativeLockUnsatisfied: return "relative locktime not satisfied";
    case ScriptError::kSigPushOnly: return "scriptSig is not push-only";
    case ScriptError::kCleanStack: return "stack not clean after execution";
    case ScriptError::kWitnessProgramMismatch: return "witness program mismatch";
    case ScriptError::kWitnessMalformed: return "malformed witness";
    case ScriptError::kWitnessUnexpected: return "unexpected witness";
    case ScriptError::kWitnessMalleatedP2sh: return "nested witness scriptSig is not a single push";
    }
    return "unknown";
}

Bytes bitcoin_signature(ByteView der, std::uint32_t hash_type)
{
    Bytes out(der.begin(), der.end());
    out.push_back(static_cast<std::uint8_t>(hash_type));
    return out;
}

namespace {

bool truthy(const Bytes& v)
{
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0)
            return !(i == v.size() - 1 && v[i] == 0x80);
    }
    return false;
}

const Bytes kTrue{1};
const Bytes kFalse{};

enum class SigCheck { kValid, kInvalid };

/// Returns an error for encoding violations; otherwise whether the signature
/// verifies. An empty signature is a clean failure.
ScriptError check_signature(const Bytes& sig, const Bytes& pubkey, const Script& script_code, SigVersion version,
                            const SpendContext& ctx, SigCheck& result)
{
    result = SigCheck::kInvalid;
    if (sig.empty())
        return ScriptError::kOk;
    const ByteView der(sig.data(), sig.size() - 1);
    auto parsed = RecoverableSignature::from_der(der);
    if (!parsed)
        return ScriptError::kSigDerEncoding;
    if (!parsed->has_low_s())
        return ScriptError::kSigHighS;
    if (sig.back() != kSighashAll)
        return ScriptError::kSigHashType;
    auto key = PublicKey::parse(pubkey);
    if (!key)
        return ScriptError::kBadPubkey;
    const Hash256 digest = version == SigVersion::kBase
                               ? legacy_sighash(*ctx.tx, ctx.input_index, script_code)
                               : bip143_sighash(*ctx.tx, ctx.input_index, script_code, ctx.input_value);
    if (ecdsa_verify(*key, digest, parsed->r, parsed->s))
        result = SigCheck::kValid;
    return ScriptError::kOk;
}

ScriptError check_sequence(std::int64_t operand, const SpendContext& ctx)
{
    if (operand < 0)
        return ScriptError::kNegativeLocktime;
    const auto n = static_cast<std::uint32_t>(operand);
    if (n & kSequenceDisableFlag)
        return ScriptError::kOk;  // behaves as a NOP
    if (n & kSequenceTypeFlag)
        return ScriptError::kUnsupportedLocktimeType;
    if (ctx.tx->version < 2)
        return ScriptError::kTxVersionTooLow;
    const std::uint32_t seq = ctx.tx->inputs[ctx.input_index].sequence;
    if (seq & kSequenceDisableFlag)
        return ScriptError::kSequenceDisabled;
    if (seq & kSequenceTypeFlag)
        return ScriptError::kUnsupportedLocktimeType;
    const std::uint32_t required = n & kSequenceLockMask;
    if ((seq & kSequenceLockMask) < required)
        return ScriptError::kRelativeLockUnsatisfied;
    if (ctx.spender_height < ctx.utxo_height || ctx.spender_height - ctx.utxo_height < required)
        return ScriptError::kRelativeLockUnsatisfied;
    return ScriptError::kOk;
}

}  // namespace

ScriptError eval_script(Stack& stack, const Script& script, SigVersion version, const SpendContext& ctx)
{
    if (!script.conditionals_balanced())
        return ScriptError::kUnbalancedConditional;
    std::vector<ScriptOp> ops;
    try {
        ops = script.parse();
    } catch (const ScriptParseError&) {
        return ScriptError::kBadPush;
    }

    std::vector<bool> exec_stack;
    const auto executing = [&] {
        for (bool b : exec_stack)
            if (!b)
                return false;
        return true;
    };
    const auto pop = [&stack] {
        Bytes v = std::move(stack.back());
        stack.pop_back();
        return v;
    };

    for (const auto& op : ops) {
        const bool exec = executing();
        const auto code = static_cast<Opcode>(op.opcode);

        if (op.is_push()) {
            if (exec)
                stack.push_back(op.data);
            continue;
        }
        if (code == Opcode::OP_IF || code == Opcode::OP_NOTIF) {
            bool value = false;
            if (exec) {
                if (stack.empty())
                    return ScriptError::kStackUnderflow;
                value = truthy(pop());
                if (code == Opcode::OP_NOTIF)
                    value = !value;
            }
            exec_stack.push_back(value);
            continue;
        }
        if (code == Opcode::OP_ELSE) {
            exec_stack.back() = !exec_stack.back();
            continue;
        }
        if (code == Opcode::OP_ENDIF) {
            exec_stack.pop_back();
            continue;
        }
        if (!exec) {
            const bool known = code == Opcode::OP_1NEGATE || (op.opcode >= 0x51 && op.opcode <= 0x60) ||
                               code == Opcode::OP_VERIFY || code == Opcode::OP_DROP || code == Opcode::OP_DUP ||
                               code == Opcode::OP_EQUAL || code == Opcode::OP_EQUALVERIFY ||
                               code == Opcode::OP_HASH160 || code == Opcode::OP_CHECKSIG ||
                               code == Opcode::OP_CHECKMULTISIG || code == Opcode::OP_CHECKSEQUENCEVERIFY;
            if (!known)
                return ScriptError::kUnsupportedOpcode;
            continue;
        }

        if (code == Opcode::OP_1NEGATE) {
            stack.push_back(encode_script_num(-1));
            continue;
        }
        if (op.opcode >= 0x51 && op.opcode <= 0x60) {
            stack.push_back(encode_script_num(op.opcode - 0x50));
            continue;
        }

        switch (code) {
        case Opcode::OP_VERIFY:
            if (stack.empty())
                return ScriptError::kStackUnderflow;
            if (!truthy(pop()))
                return ScriptError::kVerifyFailed;
            break;
        case Opcode::OP_DROP:
            if (stack.empty())
                return ScriptError::kStackUnderflow;
            stack.pop_back();
            break;
        case Opcode::OP_DUP:
            if (stack.empty())
                return ScriptError::kStackUnderflow;
            stack.push_back(stack.back());
            break;
        case Opcode::OP_EQUAL:
        case Opcode::OP_EQUALVERIFY: {
            if (stack.size() < 2)
                return ScriptError::kStackUnderflow;
            const Bytes a = pop();
            const Bytes b = pop();
            const bool equal = a == b;
            if (code == Opcode::OP_EQUALVERIFY) {
                if (!equal)
                    return ScriptError::kEqualVerifyFailed;
            } else {
                stack.push_back(equal ? kTrue : kFalse);
            }
            break;
        }
        case Opcode::OP_HASH160: {
            if (stack.empty())
                return ScriptError::kStackUnderflow;
            const Hash160 h = hash160(pop());
            stack.push_back(to_bytes(h));
            break;
        }
        case Opcode::OP_CHECKSIG: {
            if (stack.size() < 2)
                return ScriptError::kStackUnderflow;
            const Bytes pubkey = pop();
            const Bytes sig = pop();
            SigCheck result{};
            if (auto err = check_signature(sig, pubkey, script, version, ctx, result); err != ScriptError::kOk)
                return err;
            stack.push_back(result == SigCheck::kValid ? kTrue : kFalse);
            break;
        }
        case Opcode::OP_CHECKMULTISIG: {
            if (stack.empty())
                return ScriptError::kStackUnderflow;
            std::int64_t n_keys = 0;
            try {
                n_keys = decode_script_num(pop());
            } catch (const ScriptParseError&) {
                return ScriptError::kBadNumber;
            }
            if (n_keys < 0 || n_keys > 20)
                return ScriptError::kMultisigKeyCount;
            if (stack.size() < static_cast<std::size_t>(n_keys) + 1)
                return ScriptError::kStackUnderflow;
            std::vector<Bytes> keys;
            for (std::int64_t i = 0; i < n_keys; ++i)
                keys.push_back(pop());
            std::reverse(keys.begin(), keys.end());
            std::int64_t n_sigs = 0;
            try {
                n_sigs = decode_script_num(pop());
            } catch (const ScriptParseError&) {
                return ScriptError::kBadNumber;
            }
            if (n_sigs < 0 || n_sigs > n_keys)
                return ScriptError::kMultisigSigCount;
            if (stack.size() < static_cast<std::size_t>(n_sigs) + 1)
                return ScriptError::kStackUnderflow;
            std::vector<Bytes> sigs;
            for (std::int64_t i = 0; i < n_sigs; ++i)
                sigs.push_back(pop());
            std::reverse(sigs.begin(), sigs.end());
            if (!pop().empty())
                return ScriptError::kNullDummy;

            // Signatures must appear in the same order as their keys.
            bool success = true;
            std::size_t isig = 0;
            std::size_t ikey = 0;
            while (success && isig < sigs.size()) {
                if (sigs.size() - isig > keys.size() - ikey) {
                    success = false;
                    break;
                }
                SigCheck result{};
                if (auto err = check_signature(sigs[isig], keys[ikey], script, version, ctx, result);
                    err != ScriptError::kOk)
                    return err;
                if (result == SigCheck::kValid)
                    ++isig;
                ++ikey;
            }
            stack.push_back(success && isig == sigs.size() ? kTrue : kFalse);
            break;
        }
        case Opcode::OP_CHECKSEQUENCEVERIFY: {
            if (stack.empty())
                return ScriptError::kStackUnderflow;
            std::int64_t operand = 0;
            try {
                operand = decode_script_num(stack.back(), 5);
            } catch (const ScriptParseError&) {
                return ScriptError::kBadNumber;
            }
            if (auto err = check_sequence(operand, ctx); err != ScriptError::kOk)
                return err;
            break;
        }
        default:
            return ScriptError::kUnsupportedOpcode;
        }
    }
    return ScriptError::kOk;
}

namespace {

ScriptError expect_true(const Stack& stack)
{
    if (stack.empty() || !truthy(stack.back()))
        return ScriptError::kEvalFalse;
    return ScriptError::kOk;
}

ScriptError verify_witness_program(const WitnessStack& witness, const Bytes& program, const SpendContext& ctx)
{
    Stack stack;
    Script exec_script;
    if (program.size() == 32) {
        if (witness.empty())
            return ScriptError::kWitnessMalformed;
        exec_script = Script(witness.back());
        const Hash256 h = sha256(exec_script.bytes());
        if (!std::equal(h.begin(), h.end(), program.begin()))
            return ScriptError::kWitnessProgramMismatch;
        stack.assign(witness.begin(), witness.end() - 1);
    } else if (program.size() == 20) {
        if (witness.size() != 2)
            return ScriptError::kWitnessMalformed;
        Hash160 h{};
        std::copy(program.begin(), program.end(), h.begin());
        exec_script = p2pkh_script(h);
        stack = witness;
    } else {
        return ScriptError::kWitnessProgramMismatch;
    }
    if (auto err = eval_script(stack, exec_script, SigVersion::kWitnessV0, ctx); err != ScriptError::kOk)
        return err;
    if (stack.size() != 1)
        return ScriptError::kCleanStack;
    return expect_true(stack);
}

/// Version-0 witness program: OP_0 followed by a single 20- or 32-byte push.
std::optional<Bytes> witness_program(const Script& s)
{
    const Bytes& b = s.bytes();
    if (b.size() < 4 || b.size() > 42 || b[0] != 0x00 || static_cast<std::size_t>(b[1]) + 2 != b.size())
        return std::nullopt;
    return Bytes(b.begin() + 2, b.end());
}

}  // namespace

ScriptError verify_input(const Script& script_pubkey, const SpendContext& ctx)
{
    if (ctx.tx == nullptr || ctx.input_index >= ctx.tx->inputs.size())
        return ScriptError::kStackUnderflow;
    const TxInput& input = ctx.tx->inputs[ctx.input_index];
    if (!input.script_sig.is_push_only())
        return ScriptError::kSigPushOnly;

    Stack stack;
    if (auto err = eval_script(stack, input.script_sig, SigVersion::kBase, ctx); err != ScriptError::kOk)
        return err;
    const Stack after_sig = stack;
    if (auto err = eval_script(stack, script_pubkey, SigVersion::kBase, ctx); err != ScriptError::kOk)
        return err;
    if (auto err = expect_true(stack); err != ScriptError::kOk)
        return err;

    bool used_witness = false;
    if (auto program = witness_program(script_pubkey)) {
        if (!input.script_sig.empty())
            return ScriptError::kWitnessMalleatedP2sh;
        used_witness = true;
        if (auto err = verify_witness_program(input.witness, *program, ctx); err != ScriptError::kOk)
            return err;
        stack.assign(1, kTrue);
    }

    if (match_p2sh(script_pubkey)) {
        if (after_sig.empty())
            return ScriptError::kStackUnderflow;
        stack = after_sig;
        const Script redeem(stack.back());
        stack.pop_back();
        if (auto program = witness_program(redeem)) {
            Script single_push;
            single_push.push(redeem.bytes());
            if (input.script_sig != single_push)
                return ScriptError::kWitnessMalleatedP2sh;
            used_witness = true;
            if (auto err = verify_witness_program(input.witness, *program, ctx); err != ScriptError::kOk)
                return err;
            stack.assign(1, kTrue);
        } else {
            if (auto err = eval_script(stack, redeem, SigVersion::kBase, ctx); err != ScriptError::kOk)
                return err;
            if (auto err = expect_true(stack); err != ScriptError::kOk)
                return err;
        }
    }

    if (stack.size() != 1)
        return ScriptError::kCleanStack;
    if (!used_witness && !input.witness.empty())
        return ScriptError::kWitnessUnexpected;
    return ScriptError::kOk;
}

bool eval_script(const Script& unlock, const Script& lock, const SpendContext& ctx)
{
    if (ctx.tx == nullptr || ctx.input_index >= ctx.tx->inputs.size())
        return false;
    Transaction tx = *ctx.tx;
    tx.inputs[ctx.input_index].script_sig = unlock;
    SpendContext local = ctx;
    local.tx = &tx;
    return verify_input(lock, local) == ScriptError::kOk;
}

}  // namespace niji
