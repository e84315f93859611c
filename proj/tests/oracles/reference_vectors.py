#!/usr/bin/env python3
"""Independent reference values frozen into the C++ test suite.

Uses hashlib, pycryptodome (RIPEMD-160, Keccak-256) and python-ecdsa
(RFC 6979 signing). Shares no code with the C++ implementation.
    pip install pycryptodome ecdsa
"""
import hashlib

from Crypto.Hash import RIPEMD160, keccak
from ecdsa import SECP256k1, SigningKey

N = SECP256k1.order


def sha256(b):
    return hashlib.sha256(b).digest()


def sha256d(b):
    return sha256(sha256(b))


def hash160(b):
    return RIPEMD160.new(sha256(b)).digest()


def keccak256(b):
    return keccak.new(digest_bits=256, data=b).digest()


def key(label):
    return int.from_bytes(sha256(label), "big") % N


def pubkey(sk):
    vk = SigningKey.from_secret_exponent(sk, curve=SECP256k1).get_verifying_key()
    return vk.to_string("compressed"), vk.to_string("uncompressed")


def eth_address(sk):
    return keccak256(pubkey(sk)[1][1:])[-20:]


def push(data):
    assert len(data) < 76
    return bytes([len(data)]) + data


def scriptnum(n):
    out = bytearray()
    while n:
        out.append(n & 0xFF)
        n >>= 8
    if out and out[-1] & 0x80:
        out.append(0)
    return bytes(out)


def funding_script(pk_u, pk_s, tl_f):
    a, b = sorted([pk_u, pk_s])
    return (b"\x63" + b"\x52" + push(a) + push(b) + b"\x52\xae" + b"\x67" +
            push(scriptnum(tl_f)) + b"\xb2\x75" + push(pk_u) + b"\xac" + b"\x68")


def varint(n):
    assert n < 0xFD
    return bytes([n])


def le(n, width):
    return n.to_bytes(width, "little")


def bip143_digest(version, prevout, sequence, script_code, amount, outputs, locktime):
    hash_prevouts = sha256d(prevout)
    hash_sequence = sha256d(le(sequence, 4))
    ser_outputs = b"".join(le(v, 8) + varint(len(s)) + s for v, s in outputs)
    hash_outputs = sha256d(ser_outputs)
    preimage = (le(version, 4) + hash_prevouts + hash_sequence + prevout +
                varint(len(script_code)) + script_code + le(amount, 8) +
                le(sequence, 4) + hash_outputs + le(locktime, 4) + le(1, 4))
    return preimage, sha256d(preimage)


def main():
    print("sha256d('')           ", sha256d(b"").hex())
    print("keccak256('')         ", keccak256(b"").hex())
    pk1c, _ = pubkey(1)
    print("pubkey(1) compressed  ", pk1c.hex())
    print("hash160(pubkey(1))    ", hash160(pk1c).hex())
    print("eth_address(1)        ", eth_address(1).hex())

    sk_u = key(b"niji-user-key")
    sk_s = key(b"niji-sp-key")
    pk_u, _ = pubkey(sk_u)
    pk_s, _ = pubkey(sk_s)
    print("sk_u                  ", "%064x" % sk_u)
    print("sk_s                  ", "%064x" % sk_s)
    print("pk_u                  ", pk_u.hex())
    print("pk_s                  ", pk_s.hex())
    print("eth_address(sk_u)     ", eth_address(sk_u).hex())
    print("eth_address(sk_s)     ", eth_address(sk_s).hex())
    print("hash160(pk_u)         ", hash160(pk_u).hex())
    print("hash160(pk_s)         ", hash160(pk_s).hex())
    print("hash160('')           ", hash160(b"").hex())
    print("sha256d('abc')        ", sha256d(b"abc").hex())
    print("keccak256('abc')      ", keccak256(b"abc").hex())

    digest = sha256d(b"abc")
    sk = SigningKey.from_secret_exponent(sk_u, curve=SECP256k1)
    sig = sk.sign_digest_deterministic(digest, hashfunc=hashlib.sha256,
                                       sigencode=lambda r, s, order: (r, s))
    r, s = sig
    if s > N // 2:
        s = N - s
    print("rfc6979 sk_u sha256d('abc') r", "%064x" % r)
    print("rfc6979 sk_u sha256d('abc') s", "%064x" % s)

    # Segwit settlement template for sigma = 0.5 BTC, deposit 1 BTC, fee 10,000.
    ws = funding_script(pk_u, pk_s, 100)
    prevout = bytes([0xAB] * 32) + le(0, 4)
    outputs = [(50_000_000, b"\x00\x14" + hash160(pk_s)),
               (49_990_000, b"\x00\x14" + hash160(pk_u))]
    preimage, d = bip143_digest(2, prevout, 0xFFFFFFFF, ws, 100_000_000, outputs, 0)
    print("funding witnessScript ", ws.hex())
    print("bip143 preimage       ", preimage.hex())
    print("bip143 digest         ", d.hex())


if __name__ == "__main__":
    main()
