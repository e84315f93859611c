// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/script.hpp"
#include "niji/transaction.hpp"

#include <string_view>
#include <vector>

namespace niji {

enum class ScriptError {
    kOk,
    kEvalFalse,
    kUnsupportedOpcode,
    kUnbalancedConditional,
    kBadPush,
    kStackUnderflow,
    kVerifyFailed,
    kEqualVerifyFailed,
    kBadNumber,
    kSigDerEncoding,
    kSigHighS,
    kSigHashType,
    kBadPubkey,
    kMultisigKeyCount,
    kMultisigSigCount,
    kNullDummy,
    kNegativeLocktime,
    kUnsupportedLocktimeType,
    kTxVersionTooLow,
    kSequenceDisabled,
    kRelativeLockUnsatisfied,
    kSigPushOnly,
    kCleanStack,
    kWitnessProgramMismatch,
    kWitnessMalformed,
    kWitnessUnexpected,
    kWitnessMalleatedP2sh,
};

std::string_view to_string(ScriptError err);

enum class SigVersion { kBase, kWitnessV0 };

/// Everything the interpreter needs to know about the spend being checked.
/// Heights are block counts; spender_height is the ledger tip the spend is
/// validated against and utxo_height the block that confirmed the output.
struct SpendContext {
    const Transaction* tx = nullptr;
    std::size_t input_index = 0;
    Amount input_value = 0;
    std::uint32_t spender_height = 0;
    std::uint32_t utxo_height = 0;
};

using Stack = std::vector<Bytes>;

/// Executes one script over `stack`. Signature checks hash against
/// `script` as the script code.
ScriptError eval_script(Stack& stack, const Script& script, SigVersion version, const SpendContext& ctx);

/// Full input check: scriptSig, scriptPubKey, then P2SH / P2WPKH / P2WSH and
/// nested P2SH-P2WSH evaluation, with the clean-stack rule applied.
ScriptError verify_input(const Script& script_pubkey, const SpendContext& ctx);

/// Convenience form: true iff `unlock` (plus the input's witness) satisfies
/// `lock` for ctx.tx's input ctx.input_index.
bool eval_script(const Script& unlock, const Script& lock, const SpendContext& ctx);

/// DER signature followed by the sighash byte, as pushed by spenders.
Bytes bitcoin_signature(ByteView der, std::uint32_t hash_type = kSighashAll);

}  // namespace niji
