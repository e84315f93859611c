// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/contract.hpp"
#include "niji/funding.hpp"
#include "niji/ledger.hpp"
#include "niji/templates.hpp"

#include <random>

namespace niji::test {

// Frozen outputs of tests/oracles/reference_vectors.py.
inline constexpr const char* kSkUser = "c5a2b63a2ad03289372c64983309b44d6fdbe370bee3f8e6887fd75ca3c58c02";
inline constexpr const char* kSkSp = "3573b034efe2f75d7176d40964da0ed335cbf9e42cde7375a8ec386b3b71f91f";
inline constexpr const char* kPkUser = "02eff1a657c50abc8ce4b7afc99c7233c03beab1deb9fcb1015c96cb9e30581b3c";
inline constexpr const char* kPkSp = "02f3e3defdb2b44cd83dae49d80fdb54aabf1739fc99ef9f8edd20b770aaea44be";
inline constexpr const char* kEthUser = "830e9047b70efe0a19402b43342279ca50a06f3a";
inline constexpr const char* kFundingScript =
    "63522102eff1a657c50abc8ce4b7afc99c7233c03beab1deb9fcb1015c96cb9e30581b3c2102f3e3defdb2b44cd83dae49d80fdb54aabf"
    "1739fc99ef9f8edd20b770aaea44be52ae670164b2752102eff1a657c50abc8ce4b7afc99c7233c03beab1deb9fcb1015c96cb9e30581b3"
    "cac68";

inline constexpr Amount kFee = 10'000;

inline SecretKey user_key()
{
    return SecretKey::from_hex(kSkUser);
}

inline SecretKey sp_key()
{
    return SecretKey::from_hex(kSkSp);
}

inline SecretKey random_key(std::mt19937_64& rng)
{
    for (;;) {
        Bytes b(32);
        for (auto& x : b)
            x = static_cast<std::uint8_t>(rng());
        if (auto k = SecretKey::from_bytes(b))
            return *k;
    }
}

inline Hash256 random_digest(std::mt19937_64& rng)
{
    Hash256 h{};
    for (auto& x : h)
        x = static_cast<std::uint8_t>(rng());
    return h;
}

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n)
{
    Bytes b(n);
    for (auto& x : b)
        x = static_cast<std::uint8_t>(rng());
    return b;
}

/// A funded, confirmed channel on a fresh ledger with its first template.
struct ChannelFixture {
    SecretKey user = user_key();
    SecretKey sp = sp_key();
    ScriptMode mode;
    ChannelKind kind;
    std::uint32_t tl_f;
    std::uint32_t tl;
    Ledger ledger;
    FundingTx funding;
    Bytes s0 = Bytes(32, 0x5a);
    std::optional<Script> redeem;
    TransactionTemplate tmpl;
    ChannelTerms terms{kCoin, kFee};

    explicit ChannelFixture(ScriptMode m = ScriptMode::kLegacy, ChannelKind k = ChannelKind::kUnidirectional,
                            std::uint32_t tl_f_ = 100, std::uint32_t tl_ = 110)
        : mode(m), kind(k), tl_f(tl_f_), tl(tl_), funding(make_funding()), tmpl(make_template())
    {
    }

    FundingTx make_funding()
    {
        ledger.mint(owner_script(user.public_key(), mode), kCoin + kFee);
        ledger.mine_block();
        auto f = build_funding_tx(ledger.coins_for(owner_script(user.public_key(), mode)), user, sp.public_key(),
                                  kCoin, tl_f, kFee, mode);
        if (!ledger.submit_tx(f.tx))
            throw std::runtime_error("fixture funding rejected");
        ledger.mine_block();
        return f;
    }

    TransactionTemplate make_template()
    {
        if (kind == ChannelKind::kBidirectional) {
            redeem = build_redeem_script(tl, hash160(s0), user.public_key(), sp.public_key());
            return build_template(mode, kind, funding.outpoint, funding.redeem_script, user.public_key(),
                                  sp.public_key(), tl, hash160(s0));
        }
        return build_template(mode, kind, funding.outpoint, funding.redeem_script, user.public_key(), sp.public_key());
    }

    RecoverableSignature sign(const SecretKey& k, Amount sigma) const
    {
        return ecdsa_sign(k, signature_form(tmpl, sigma, terms).digest());
    }

    Transaction settlement(Amount sigma) const
    {
        return complete_transaction(tmpl, sign(user, sigma), sign(sp, sigma), sigma, kCoin - sigma - kFee, terms);
    }

    ChannelParams params() const
    {
        ChannelParams p;
        p.multisig_address = multisig_address(funding.redeem_script, mode);
        p.deposit = kCoin;
        p.user_address = eth_address(user.public_key());
        p.funding_outpoint = funding.outpoint;
        return p;
    }
};

}  // namespace niji::test
