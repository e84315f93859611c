// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/consortium.hpp"
#include "niji/templates.hpp"

#include <optional>
#include <vector>

namespace niji {

inline constexpr std::string_view kBridgingKind = "bridging";
inline constexpr std::string_view kServiceKind = "service";

/// Registers the bridging and service contract kinds on `chain`.
void register_niji_contracts(Consortium& chain);

/// ecrecover-style check: the key recovered from sha256d(modtx) hashes to
/// `expected`. Recovery failure yields false.
bool verify(ByteView modtx, std::uint8_t v, const ByteArray<32>& r, const ByteArray<32>& s,
            const EthAddress& expected);

/// Call-argument codecs shared by the contracts and the nodes.
namespace args {
Bytes amount(Amount a);
Amount amount(ByteView b);
Bytes identity(const Identity& id);
Identity identity(ByteView b);
Bytes signature(const RecoverableSignature& sig);
RecoverableSignature signature(ByteView b);
Bytes eth_address(const EthAddress& a);
EthAddress eth_address(ByteView b);
Bytes hash160(const Hash160& h);
Hash160 hash160(ByteView b);
Bytes redeem(const std::optional<Script>& s);
std::optional<Script> redeem(ByteView b);
}  // namespace args

struct ServiceEntry {
    enum class Kind { kInvoke, kRevoke };
    Kind kind = Kind::kInvoke;
    Amount amount = 0;
    std::uint64_t block = 0;
};

/// Stand-in for the service the payments pay for. It only logs invoke and
/// revoke calls made by its bridging contract.
class ServiceContract final : public Contract
{
public:
    explicit ServiceContract(Identity bridge) : bridge_(std::move(bridge)) {}

    std::string invoke(const Identity& caller, Amount amount, std::uint64_t block);
    void revoke(const Identity& caller, Amount amount, std::uint64_t block);

    const std::vector<ServiceEntry>& log() const { return log_; }
    const Identity& bridge() const { return bridge_; }

    std::string_view kind() const override { return kServiceKind; }
    nlohmann::ordered_json call(CallContext& ctx, std::string_view function, const std::vector<Bytes>& a) override;
    Bytes state_bytes() const override;
    std::unique_ptr<Contract> clone() const override { return std::make_unique<ServiceContract>(*this); }

private:
    Identity bridge_;
    std::vector<ServiceEntry> log_;
};

struct DepositInfo {
    Hash160 multisig_address{};
    Amount deposit = 0;
    EthAddress user_address;
};

struct TemplateGeneration {
    TransactionTemplate tmpl;
    std::optional<Script> redeem;
};

struct LatestPayment {
    RecoverableSignature sig;
    Amount sigma = 0;
    /// Index into generations() of the template the signature covers.
    std::size_t generation = 0;
};

/// The bridging contract. set_deposit/update/request_cancel are accepted
/// only from the user's identity; set_tmpl/replace_tmpl/canceled/closing
/// only from the service provider's.
class BridgingContract final : public Contract
{
public:
    BridgingContract(Identity user, Identity sp, Amount fee, Identity service);

    void set_deposit(const Identity& caller, const Hash160& multisig, Amount deposit, const EthAddress& user_address);
    void set_tmpl(const Identity& caller, const TransactionTemplate& tmpl, const std::optional<Script>& redeem);
    const TemplateGeneration& get_template() const;
    /// Returns the change in the paid amount passed on to the service.
    Amount update(const Identity& caller, const RecoverableSignature& sig, Amount sigma);
    UpdateTransaction get_update_tx() const;
    void replace_tmpl(const Identity& caller, const TransactionTemplate& tmpl, const std::optional<Script>& redeem);
    /// Returns the amount handed back to the service's revoke.
    Amount canceled(const Identity& caller, ByteView preimage);
    void closing(const Identity& caller);
    void request_cancel(const Identity& caller, Amount amount);

    const Identity& user() const { return user_; }
    const Identity& sp() const { return sp_; }
    const Identity& service() const { return service_; }
    Amount fee() const { return fee_; }
    const std::optional<DepositInfo>& deposit() const { return deposit_; }
    const std::vector<TemplateGeneration>& generations() const { return generations_; }
    const std::optional<LatestPayment>& latest() const { return latest_; }
    const std::vector<Bytes>& disclosed() const { return disclosed_; }
    std::size_t cancellations() const { return disclosed_.size(); }
    bool cancel_pending() const { return cancel_pending_; }
    bool cancel_signed() const { return cancel_signed_; }
    std::optional<Amount> requested_cancel() const { return requested_cancel_; }
    bool closed() const { return closed_; }
    ChannelTerms terms() const;

    /// The hash-lock of template generation `g` (bi-directional only).
    std::optional<Hash160> hash_lock(std::size_t g) const;

    std::string_view kind() const override { return kBridgingKind; }
    nlohmann::ordered_json call(CallContext& ctx, std::string_view function, const std::vector<Bytes>& a) override;
    Bytes state_bytes() const override;
    std::unique_ptr<Contract> clone() const override { return std::make_unique<BridgingContract>(*this); }

private:
    void require(const Identity& caller, const Identity& expected, std::string_view fn) const;
    void check_template(const TransactionTemplate& tmpl, const std::optional<Script>& redeem) const;

    Identity user_;
    Identity sp_;
    Amount fee_;
    Identity service_;
    std::optional<DepositInfo> deposit_;
    std::vector<TemplateGeneration> generations_;
    std::optional<LatestPayment> latest_;
    std::vector<Bytes> disclosed_;
    bool cancel_pending_ = false;
    bool cancel_signed_ = false;
    Amount sigma_before_cancel_ = 0;
    std::optional<Amount> requested_cancel_;
    bool closed_ = false;
};

}  // namespace niji
