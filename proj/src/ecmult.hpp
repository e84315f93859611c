// Copyright 2026 The niji-bridge authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

// secp256k1 group arithmetic over 4x64-bit limbs. Scalars are 32-byte
// big-endian values already reduced mod n. Not constant time.

#pragma once

#include "niji/bytes.hpp"

#include <optional>

namespace niji::ec {

struct Fe {
    std::uint64_t v[4] = {0, 0, 0, 0};  // little-endian limbs, < p
};

struct Affine {
    Fe x;
    Fe y;
    bool infinity = true;
};

using Scalar = ByteArray<32>;

/// Point with the given x and y parity; nullopt if x is not on the curve or x >= p.
std::optional<Affine> lift_x(const ByteArray<32>& x, bool odd_y);

/// Parses a 65-byte uncompressed encoding without validation.
Affine from_uncompressed(const ByteArray<65>& enc);

/// k*G.
Affine mul_gen(const Scalar& k);

/// a*G + b*P.
Affine mul_add(const Scalar& a, const Scalar& b, const Affine& p);

ByteArray<32> fe_bytes(const Fe& f);
ByteArray<65> uncompressed(const Affine& p);

}  // namespace niji::ec
