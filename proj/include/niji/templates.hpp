// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/funding.hpp"
#include "niji/secp256k1.hpp"
#include "niji/transaction.hpp"

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace niji {

struct TemplateError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class ChannelKind { kUnidirectional, kBidirectional };

std::string_view to_string(ChannelKind k);

/// An update transaction with its output values and signatures missing.
///
/// The skeleton carries nil output values and no signatures. In legacy mode
/// the input script is stored empty; the funding redeemScript is injected
/// only when the signature form is built. In segwit mode the input script is
/// the nested program OP_0 <sha256(witnessScript)> and the witness holds the
/// witnessScript alone. A bi-directional template commits to a hash-locked,
/// time-locked redeemScript in output[0]; that script travels alongside the
/// template rather than inside it.
struct TransactionTemplate {
    ScriptMode mode = ScriptMode::kLegacy;
    ChannelKind kind = ChannelKind::kUnidirectional;
    Transaction skeleton;
    Script funding_script;
    PublicKey user_key;
    PublicKey sp_key;

    const OutPoint& funding_outpoint() const { return skeleton.inputs.at(0).prevout; }

    /// The template in Bitcoin transaction layout (nil values as FF..FF).
    Bytes serialize() const { return skeleton.serialize(); }

    /// Self-describing record used for contract storage and call arguments.
    Bytes encode() const;
    static TransactionTemplate decode(ByteView data);

    nlohmann::ordered_json to_json() const;

    bool operator==(const TransactionTemplate&) const = default;
};

/// IF HASH160 <hl> EQUALVERIFY <pk_user> ELSE <tl> CSV DROP <pk_sp> ENDIF CHECKSIG
Script build_redeem_script(std::uint32_t tl, const Hash160& hash_lock, const PublicKey& user, const PublicKey& sp);

struct RedeemTerms {
    Hash160 hash_lock;
    PublicKey user;
    std::uint32_t tl;
    PublicKey sp;
};

std::optional<RedeemTerms> parse_redeem_script(const Script& s);

/// Output[0] lock for a bi-directional template: P2SH of the redeemScript in
/// legacy mode, P2WSH in segwit mode.
Script hashlock_output_script(const Script& redeem, ScriptMode mode);

/// Throws TemplateError if a bi-directional template lacks tl or hash_lock.
TransactionTemplate build_template(ScriptMode mode, ChannelKind kind, const OutPoint& funding_outpoint,
                                   const Script& funding_script, const PublicKey& user, const PublicKey& sp,
                                   std::optional<std::uint32_t> tl = std::nullopt,
                                   std::optional<Hash160> hash_lock = std::nullopt);

struct ChannelTerms {
    Amount deposit = 0;
    Amount fee = 0;
};

/// The bytes a channel signature commits to (the signed digest is their
/// sha256d). Legacy: the filled transaction with the funding script in the
/// input and hash type appended. Segwit: the BIP143 pre-image.
struct SighashForm {
    ScriptMode mode = ScriptMode::kLegacy;
    Transaction legacy_tx;
    Bip143Fields bip143;
    /// Segwit only; nil while the form is still a template.
    std::optional<Hash256> hash_outputs;

    bool complete() const;
    /// Throws TemplateError while nil fields remain.
    Bytes bytes() const;
    Hash256 digest() const { return sha256d(bytes()); }
};

/// Signature form with nil outputs (hashOutputs missing in segwit mode).
SighashForm signature_form_template(const TransactionTemplate& tmpl, const ChannelTerms& terms);

/// Fills output[0] = sigma and output[1] = deposit - sigma - fee.
/// Throws TemplateError unless 0 < sigma and sigma + fee <= deposit.
SighashForm signature_form(const TransactionTemplate& tmpl, Amount sigma, const ChannelTerms& terms);

/// The template with values filled, without any signature placed.
Transaction fill_values(const TransactionTemplate& tmpl, Amount sigma, Amount change);

/// Partially or fully signed update transaction (template, Sig_u, Sig_s, sigma, change).
struct UpdateTransaction {
    TransactionTemplate tmpl;
    RecoverableSignature user_sig;
    std::optional<RecoverableSignature> sp_sig;
    Amount sigma = 0;
    Amount change = 0;
};

/// Places whatever signatures are present; a missing one becomes an empty
/// push, which the ledger rejects. No checks are performed.
Transaction assemble_transaction(const UpdateTransaction& update, const ChannelTerms& terms);

/// Checks the balance equation and both signatures, then assembles.
Transaction complete_transaction(const TransactionTemplate& tmpl, const RecoverableSignature& user_sig,
                                 const RecoverableSignature& sp_sig, Amount sigma, Amount change,
                                 const ChannelTerms& terms);

/// What the bridging contract (or a node) knows about the channel when
/// checking a template.
struct ChannelParams {
    Hash160 multisig_address{};
    Amount deposit = 0;
    EthAddress user_address;
    std::optional<OutPoint> funding_outpoint;
    /// Taken from the funding script when not given.
    std::optional<std::uint32_t> tl_f;
};

/// Returns the list of violations; empty means valid.
std::vector<std::string> validate_template(const TransactionTemplate& tmpl, const std::optional<Script>& redeem,
                                           const ChannelParams& params);

/// Spends output[0] of a bi-directional update through the IF branch
/// (user reveals the pre-image of HL).
Transaction build_hashlock_claim(const OutPoint& output, Amount value, const Script& redeem, ScriptMode mode,
                                 ByteView preimage, const SecretKey& user_key, const Script& destination, Amount fee);

/// Spends output[0] through the ELSE branch once TL blocks have passed.
Transaction build_timelock_claim(const OutPoint& output, Amount value, const Script& redeem, ScriptMode mode,
                                 const SecretKey& sp_key, const Script& destination, Amount fee);

}  // namespace niji
