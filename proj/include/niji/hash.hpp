// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "niji/bytes.hpp"

namespace niji {

using Hash256 = ByteArray<32>;
using Hash160 = ByteArray<20>;

Hash256 sha256(ByteView data);

/// SHA-256 applied twice; the digest every Bitcoin signature commits to.
Hash256 sha256d(ByteView data);

Hash160 ripemd160(ByteView data);

/// RIPEMD160(SHA256(x)), as computed by OP_HASH160.
Hash160 hash160(ByteView data);

/// Original Keccak-256 (0x01 padding), not FIPS-202 SHA3-256.
Hash256 keccak256(ByteView data);

Hash256 hmac_sha256(ByteView key, ByteView data);

}  // namespace niji
