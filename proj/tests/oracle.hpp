// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "support.hpp"

#include <openssl/evp.h>

namespace niji::test {

// Frozen output of tests/oracles/reference_vectors.py: the BIP143 pre-image of
// the reference template at sigma = 0.5 BTC, deposit 1 BTC, fee 10,000 sat.
inline constexpr const char* kOraclePreimage =
    "02000000d83f4bf867488320c4d4472dd59d06f3fd07e5daa6612ecb1d589a9678ee75bc3bb13029ce7b1f559ef5e747fcac439f1455a2ec"
    "7c5f09b72290795e70665044abababababababababababababababababababababababababababababababab0000000071635221"
    "02eff1a657c50abc8ce4b7afc99c7233c03beab1deb9fcb1015c96cb9e30581b3c2102f3e3defdb2b44cd83dae49d80fdb54aabf1739fc"
    "99ef9f8edd20b770aaea44be52ae670164b2752102eff1a657c50abc8ce4b7afc99c7233c03beab1deb9fcb1015c96cb9e30581b3cac"
    "6800e1f50500000000ffffffff533beb06844488180137e60877529d0150773f2b913d506ede7b3f6a7a75750c0000000001000000";
inline constexpr const char* kOracleDigest = "8284ab613ce84695662d2a13e2d990441bf300483478816cdca677997ad506a1";

// Straight byte concatenation with OpenSSL's SHA-256; no library code.
inline Bytes sha256_raw(const Bytes& b)
{
    Bytes out(32);
    unsigned int len = 0;
    EVP_Digest(b.data(), b.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
}

inline Bytes dsha(const Bytes& b)
{
    return sha256_raw(sha256_raw(b));
}

inline void le(Bytes& out, std::uint64_t v, int width)
{
    for (int i = 0; i < width; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void cat(Bytes& out, const Bytes& b)
{
    out.insert(out.end(), b.begin(), b.end());
}

inline Bytes oracle_bip143_preimage(const Bytes& prevout, std::uint32_t sequence, const Bytes& script_code,
                             std::uint64_t amount, const std::vector<std::pair<std::uint64_t, Bytes>>& outputs)
{
    Bytes seq;
    le(seq, sequence, 4);
    Bytes outs;
    for (const auto& [v, s] : outputs) {
        le(outs, v, 8);
        outs.push_back(static_cast<std::uint8_t>(s.size()));
        cat(outs, s);
    }
    Bytes p;
    le(p, 2, 4);
    cat(p, dsha(prevout));
    cat(p, dsha(seq));
    cat(p, prevout);
    p.push_back(static_cast<std::uint8_t>(script_code.size()));
    cat(p, script_code);
    le(p, amount, 8);
    cat(p, seq);
    cat(p, dsha(outs));
    le(p, 0, 4);
    le(p, 1, 4);
    return p;
}

inline TransactionTemplate oracle_template(ScriptMode mode)
{
    const PublicKey pu = user_key().public_key();
    const PublicKey ps = sp_key().public_key();
    OutPoint prev;
    prev.txid.bytes.fill(0xAB);
    return build_template(mode, ChannelKind::kUnidirectional, prev, build_funding_script(pu, ps, 100), pu, ps);
}

}  // namespace niji::test
