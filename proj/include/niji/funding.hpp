// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/ledger.hpp"
#include "niji/secp256k1.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace niji {

enum class ScriptMode { kLegacy, kSegwit };

std::string_view to_string(ScriptMode m);

struct FundingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// IF 2 <pk_a> <pk_b> 2 CHECKMULTISIG ELSE <tl_f> CSV DROP <pk_user> CHECKSIG ENDIF
/// with the multisig keys ordered by compressed encoding.
Script build_funding_script(const PublicKey& user, const PublicKey& sp, std::uint32_t tl_f);

struct FundingTerms {
    PublicKey user;
    PublicKey sp;
    std::uint32_t tl_f;
};

/// Inverse of build_funding_script; nullopt if the script has another shape.
std::optional<FundingTerms> parse_funding_script(const Script& s);

/// scriptSig push that nests a P2WSH program in P2SH: OP_0 <sha256(ws)>.
Script nested_witness_program(const Script& witness_script);

/// P2SH(script) for legacy, P2SH(P2WSH(script)) for segwit.
Script funding_script_pubkey(const Script& funding_script, ScriptMode mode);

/// The 20-byte script hash of the multisig address.
Hash160 multisig_address(const Script& funding_script, ScriptMode mode);

/// Pay-to-pubkey-hash (legacy) or pay-to-witness-pubkey-hash (segwit).
Script owner_script(const PublicKey& key, ScriptMode mode);

struct FundingTx {
    Transaction tx;
    Script redeem_script;
    OutPoint outpoint;
    ScriptMode mode = ScriptMode::kLegacy;
    Amount deposit = 0;
    std::uint32_t tl_f = 0;
};

/// Spends the user's coins into one `deposit`-sat funding output plus change.
/// Throws FundingError when the coins do not cover deposit + fee.
FundingTx build_funding_tx(const std::vector<std::pair<OutPoint, Coin>>& coins, const SecretKey& user_key,
                           const PublicKey& sp_key, Amount deposit, std::uint32_t tl_f, Amount fee, ScriptMode mode);

/// Signs every input of `tx` for coins that pay owner_script(key) in either mode.
void sign_owner_inputs(Transaction& tx, const std::vector<Coin>& spent, const SecretKey& key);

/// Sweeps owner coins to one destination, paying `fee`.
Transaction build_owner_sweep(const std::vector<std::pair<OutPoint, Coin>>& coins, const SecretKey& key,
                              const Script& destination, Amount fee);

/// Spends the funding output through its CSV refund branch.
Transaction build_refund_tx(const FundingTx& funding, const SecretKey& user_key, const Script& destination,
                            Amount fee);

}  // namespace niji
