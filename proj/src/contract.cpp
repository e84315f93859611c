// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "niji/contract.hpp"

#include <algorithm>

namespace niji {

namespace args {

Bytes amount(Amount a)
{
    return Writer{}.u64(static_cast<std::uint64_t>(a)).bytes();
}

Amount amount(ByteView b)
{
    Reader r(b);
    const auto v = static_cast<Amount>(r.u64());
    r.expect_done();
    return v;
}

Bytes identity(const Identity& id)
{
    return Bytes(id.begin(), id.end());
}

Identity identity(ByteView b)
{
    return Identity(b.begin(), b.end());
}

Bytes signature(const RecoverableSignature& sig)
{
    return to_bytes(sig.compact());
}

RecoverableSignature signature(ByteView b)
{
    return RecoverableSignature::from_compact(b);
}

Bytes eth_address(const EthAddress& a)
{
    return to_bytes(a.bytes);
}

EthAddress eth_address(ByteView b)
{
    Reader r(b);
    EthAddress a{r.array<20>()};
    r.expect_done();
    return a;
}

Bytes hash160(const Hash160& h)
{
    return to_bytes(h);
}

Hash160 hash160(ByteView b)
{
    Reader r(b);
    const auto h = r.array<20>();
    r.expect_done();
    return h;
}

Bytes redeem(const std::optional<Script>& s)
{
    return s ? s->bytes() : Bytes{};
}

std::optional<Script> redeem(ByteView b)
{
    if (b.empty())
        return std::nullopt;
    return Script(Bytes(b.begin(), b.end()));
}

}  // namespace args

namespace {

void expect_args(const std::vector<Bytes>& a, std::size_t n, std::string_view fn)
{
    if (a.size() != n)
        throw ContractError(std::string(fn) + " takes " + std::to_string(n) + " arguments");
}

std::string amount_str(Amount a)
{
    return std::to_string(a);
}

}  // namespace

bool verify(ByteView modtx, std::uint8_t v, const ByteArray<32>& r, const ByteArray<32>& s, const EthAddress& expected)
{
    try {
        return eth_address(ecdsa_recover(sha256d(modtx), v, r, s)) == expected;
    } catch (const SignatureError&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// ServiceContract

std::string ServiceContract::invoke(const Identity& caller, Amount amount, std::uint64_t block)
{
    if (caller != bridge_)
        throw ContractError("invoke is reserved for the bridging contract");
    log_.push_back(ServiceEntry{ServiceEntry::Kind::kInvoke, amount, block});
    return "invoke-" + std::to_string(log_.size());
}

void ServiceContract::revoke(const Identity& caller, Amount amount, std::uint64_t block)
{
    if (caller != bridge_)
        throw ContractError("revoke is reserved for the bridging contract");
    log_.push_back(ServiceEntry{ServiceEntry::Kind::kRevoke, amount, block});
}

nlohmann::ordered_json ServiceContract::call(CallContext& ctx, std::string_view function, const std::vector<Bytes>& a)
{
    if (function == "invoke") {
        expect_args(a, 1, function);
        const Amount amount = args::amount(a[0]);
        const std::string token = invoke(ctx.caller(), amount, ctx.block());
        ctx.emit("invoked", {{"amount", amount}, {"token", token}});
        return {{"token", token}};
    }
    if (function == "revoke") {
        expect_args(a, 1, function);
        const Amount amount = args::amount(a[0]);
        revoke(ctx.caller(), amount, ctx.block());
        ctx.emit("revoked", {{"amount", amount}});
        return {{"revoked", amount}};
    }
    throw ContractError("service has no function " + std::string(function));
}

Bytes ServiceContract::state_bytes() const
{
    Writer w;
    w.str(bridge_).varint(log_.size());
    for (const auto& e : log_)
        w.u8(e.kind == ServiceEntry::Kind::kInvoke ? 0 : 1).u64(static_cast<std::uint64_t>(e.amount)).u64(e.block);
    return std::move(w).bytes();
}

// ---------------------------------------------------------------------------
// BridgingContract

BridgingContract::BridgingContract(Identity user, Identity sp, Amount fee, Identity service)
    : user_(std::move(user)), sp_(std::move(sp)), fee_(fee), service_(std::move(service))
{
    if (fee_ < 0)
        throw ContractError("fee must not be negative");
}

void BridgingContract::require(const Identity& caller, const Identity& expected, std::string_view fn) const
{
    if (caller != expected)
        throw ContractError(std::string(fn) + " called by unauthorized identity " + caller);
}

ChannelTerms BridgingContract::terms() const
{
    return ChannelTerms{deposit_ ? deposit_->deposit : 0, fee_};
}

std::optional<Hash160> BridgingContract::hash_lock(std::size_t g) const
{
    if (g >= generations_.size() || !generations_[g].redeem)
        return std::nullopt;
    auto terms = parse_redeem_script(*generations_[g].redeem);
    if (!terms)
        return std::nullopt;
    return terms->hash_lock;
}

void BridgingContract::set_deposit(const Identity& caller, const Hash160& multisig, Amount deposit,
                                   const EthAddress& user_address)
{
    require(caller, user_, "set_deposit");
    if (deposit_)
        throw ContractError("deposit already registered");
    if (deposit <= fee_)
        throw ContractError("deposit must exceed the fee");
    deposit_ = DepositInfo{multisig, deposit, user_address};
}

void BridgingContract::check_template(const TransactionTemplate& tmpl, const std::optional<Script>& redeem) const
{
    ChannelParams params;
    params.multisig_address = deposit_->multisig_address;
    params.deposit = deposit_->deposit;
    params.user_address = deposit_->user_address;
    if (!generations_.empty())
        params.funding_outpoint = generations_.front().tmpl.funding_outpoint();
    const auto violations = validate_template(tmpl, redeem, params);
    if (!violations.empty()) {
        std::string msg = "template rejected:";
        for (const auto& v : violations)
            msg += " " + v + ";";
        throw ContractError(msg);
    }
}

void BridgingContract::set_tmpl(const Identity& caller, const TransactionTemplate& tmpl,
                                const std::optional<Script>& redeem)
{
    require(caller, sp_, "set_tmpl");
    if (!deposit_)
        throw ContractError("set_tmpl before set_deposit");
    if (!generations_.empty())
        throw ContractError("template already set");
    if (closed_)
        throw ContractError("channel closed");
    check_template(tmpl, redeem);
    generations_.push_back(TemplateGeneration{tmpl, redeem});
}

const TemplateGeneration& BridgingContract::get_template() const
{
    if (generations_.empty())
        throw ContractError("template not set");
    return generations_.back();
}

Amount BridgingContract::update(const Identity& caller, const RecoverableSignature& sig, Amount sigma)
{
    require(caller, user_, "update");
    if (closed_)
        throw ContractError("channel closed");
    const TemplateGeneration& current = get_template();
    const Amount sigma_l = latest_ ? latest_->sigma : 0;

    if (cancel_pending_) {
        if (cancel_signed_)
            throw ContractError("cancellation update already stored");
        if (!(0 < sigma && sigma < sigma_l))
            throw ContractError("cancellation must lower the amount");
    } else if (!(sigma_l < sigma)) {
        throw ContractError("amount " + amount_str(sigma) + " does not exceed latest " + amount_str(sigma_l));
    }
    if (sigma > deposit_->deposit - fee_)
        throw ContractError("amount exceeds deposit minus fee");

    const Bytes modtx = signature_form(current.tmpl, sigma, terms()).bytes();
    if (!verify(modtx, sig.v, sig.r, sig.s, deposit_->user_address))
        throw ContractError("signature does not recover to the registered user address");

    latest_ = LatestPayment{sig, sigma, generations_.size() - 1};
    if (cancel_pending_)
        cancel_signed_ = true;
    return sigma - sigma_l;
}

UpdateTransaction BridgingContract::get_update_tx() const
{
    if (!latest_)
        throw ContractError("no payment yet");
    const TemplateGeneration& g = generations_.at(latest_->generation);
    const Amount change = deposit_->deposit - latest_->sigma - fee_;
    return UpdateTransaction{g.tmpl, latest_->sig, std::nullopt, latest_->sigma, change};
}

void BridgingContract::replace_tmpl(const Identity& caller, const TransactionTemplate& tmpl,
                                    const std::optional<Script>& redeem)
{
    require(caller, sp_, "replace_tmpl");
    if (closed_)
        throw ContractError("channel closed");
    const TemplateGeneration& current = get_template();
    if (current.tmpl.kind != ChannelKind::kBidirectional || tmpl.kind != ChannelKind::kBidirectional)
        throw ContractError("replace_tmpl requires a bi-directional channel");
    if (cancel_pending_)
        throw ContractError("a cancellation is already pending");
    if (!latest_)
        throw ContractError("nothing to cancel");
    if (tmpl.mode != current.tmpl.mode || tmpl.funding_script != current.tmpl.funding_script)
        throw ContractError("replacement must keep the funding terms");
    check_template(tmpl, redeem);
    const Hash160 hl = parse_redeem_script(*redeem)->hash_lock;
    for (std::size_t g = 0; g < generations_.size(); ++g)
        if (hash_lock(g) == hl)
            throw ContractError("hash-lock reused from generation " + std::to_string(g));
    generations_.push_back(TemplateGeneration{tmpl, redeem});
    cancel_pending_ = true;
    cancel_signed_ = false;
    sigma_before_cancel_ = latest_->sigma;
    requested_cancel_.reset();
}

Amount BridgingContract::canceled(const Identity& caller, ByteView preimage)
{
    require(caller, sp_, "canceled");
    if (!cancel_pending_)
        throw ContractError("no cancellation pending");
    if (!cancel_signed_)
        throw ContractError("user has not signed the lowered amount");
    const std::size_t retired = disclosed_.size();
    if (hash160(preimage) != hash_lock(retired))
        throw ContractError("pre-image does not match the retired hash-lock");
    disclosed_.emplace_back(preimage.begin(), preimage.end());
    cancel_pending_ = false;
    cancel_signed_ = false;
    return sigma_before_cancel_ - latest_->sigma;
}

void BridgingContract::closing(const Identity& caller)
{
    require(caller, sp_, "closing");
    closed_ = true;
}

void BridgingContract::request_cancel(const Identity& caller, Amount amount)
{
    require(caller, user_, "request_cancel");
    if (closed_)
        throw ContractError("channel closed");
    if (generations_.empty() || get_template().tmpl.kind != ChannelKind::kBidirectional)
        throw ContractError("cancellation requires a bi-directional channel");
    if (cancel_pending_)
        throw ContractError("a cancellation is already pending");
    if (amount <= 0)
        throw ContractError("cancel amount must be positive");
    requested_cancel_ = amount;
}

nlohmann::ordered_json BridgingContract::call(CallContext& ctx, std::string_view function, const std::vector<Bytes>& a)
{
    const Identity& caller = ctx.caller();
    if (function == "set_deposit") {
        expect_args(a, 3, function);
        const Hash160 multisig = args::hash160(a[0]);
        const Amount deposit = args::amount(a[1]);
        const EthAddress addr = args::eth_address(a[2]);
        set_deposit(caller, multisig, deposit, addr);
        return {{"multisig_address", to_hex(multisig)}, {"deposit", deposit}, {"user_address", addr.hex()}};
    }
    if (function == "set_tmpl" || function == "replace_tmpl") {
        expect_args(a, 2, function);
        const auto tmpl = TransactionTemplate::decode(a[0]);
        const auto redeem = args::redeem(a[1]);
        if (function == "set_tmpl")
            set_tmpl(caller, tmpl, redeem);
        else
            replace_tmpl(caller, tmpl, redeem);
        nlohmann::ordered_json out{{"generation", generations_.size() - 1}};
        if (auto hl = hash_lock(generations_.size() - 1))
            out["hash_lock"] = to_hex(*hl);
        if (function == "replace_tmpl")
            ctx.emit("template_replaced", out);
        return out;
    }
    if (function == "get_template") {
        expect_args(a, 0, function);
        const auto& g = get_template();
        return {{"template", to_hex(g.tmpl.encode())}, {"redeem", to_hex(args::redeem(g.redeem))}};
    }
    if (function == "update") {
        expect_args(a, 2, function);
        const auto sig = args::signature(a[0]);
        const Amount sigma = args::amount(a[1]);
        const Amount delta = update(caller, sig, sigma);
        const auto ack = ctx.call(service_, "invoke", {args::amount(delta)});
        return {{"sigma", sigma}, {"generation", latest_->generation}, {"result", ack.at("token")}};
    }
    if (function == "get_update_tx") {
        expect_args(a, 0, function);
        const auto u = get_update_tx();
        return {{"template", to_hex(u.tmpl.encode())},
                {"user_sig", to_hex(u.user_sig.compact())},
                {"sigma", u.sigma},
                {"change", u.change}};
    }
    if (function == "canceled") {
        expect_args(a, 1, function);
        const Amount revoked = canceled(caller, a[0]);
        ctx.call(service_, "revoke", {args::amount(revoked)});
        ctx.emit("preimage_disclosed", {{"index", disclosed_.size() - 1}, {"preimage", to_hex(a[0])}});
        return {{"j", disclosed_.size()}, {"revoked", revoked}};
    }
    if (function == "closing") {
        expect_args(a, 0, function);
        closing(caller);
        return {{"closed", true}};
    }
    if (function == "request_cancel") {
        expect_args(a, 1, function);
        const Amount amount = args::amount(a[0]);
        request_cancel(caller, amount);
        ctx.emit("cancel_requested", {{"amount", amount}, {"sigma", latest_ ? latest_->sigma : 0}});
        return {{"amount", amount}};
    }
    throw ContractError("bridging contract has no function " + std::string(function));
}

Bytes BridgingContract::state_bytes() const
{
    Writer w;
    w.str(user_).str(sp_).u64(static_cast<std::uint64_t>(fee_)).str(service_);
    w.u8(deposit_ ? 1 : 0);
    if (deposit_)
        w.raw(deposit_->multisig_address).u64(static_cast<std::uint64_t>(deposit_->deposit)).raw(deposit_->user_address.bytes);
    w.varint(generations_.size());
    for (const auto& g : generations_)
        w.var_bytes(g.tmpl.encode()).var_bytes(args::redeem(g.redeem));
    w.u8(latest_ ? 1 : 0);
    if (latest_)
        w.raw(latest_->sig.compact()).u64(static_cast<std::uint64_t>(latest_->sigma)).u64(latest_->generation);
    w.varint(disclosed_.size());
    for (const auto& s : disclosed_)
        w.var_bytes(s);
    w.u8(cancel_pending_).u8(cancel_signed_).u64(static_cast<std::uint64_t>(sigma_before_cancel_));
    w.u8(requested_cancel_ ? 1 : 0).u64(static_cast<std::uint64_t>(requested_cancel_.value_or(0)));
    w.u8(closed_);
    return std::move(w).bytes();
}

void register_niji_contracts(Consortium& chain)
{
    chain.register_kind(std::string(kServiceKind), [](const Identity&, const std::vector<Bytes>& a) {
        expect_args(a, 1, "service constructor");
        return std::make_unique<ServiceContract>(args::identity(a[0]));
    });
    chain.register_kind(std::string(kBridgingKind), [](const Identity& deployer, const std::vector<Bytes>& a) {
        expect_args(a, 3, "bridging constructor");
        return std::make_unique<BridgingContract>(args::identity(a[0]), deployer, args::amount(a[1]),
                                                  args::identity(a[2]));
    });
}

}  // namespace niji
