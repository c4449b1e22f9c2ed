"""Curve25519 scalar multiplication and SHA-256, built from the public definitions.

The scalar multiplication uses the x-coordinate Montgomery ladder with an
arithmetic (branch-free) conditional swap and a fixed iteration count, so the
sequence of field operations does not depend on scalar bits.  Python integers
are not constant-time at the machine level; the structural guarantee is what
the timing probes in the audit harness measure.

SHA-256 follows the standard 64-round compression.  The compression loop is
JIT-compiled (numba) because the test oracles push tens of megabytes through
it; the algorithm itself is written out in full below.
"""

from __future__ import annotations

import struct

import numpy as np
from numba import njit

from .errors import ContributoryBehaviorError, InvalidLengthError

SCALAR_LEN = 32
POINT_LEN = 32
DIGEST_LEN = 32

_P = 2**255 - 19
_A24 = 121665
_BASE_U = 9


def clamp(raw: bytes) -> bytes:
    """Force the Curve25519 private-scalar bit pattern onto 32 raw octets.

    Clears the low 3 bits of byte 0, clears the top bit and sets bit 6 of
    byte 31.  Idempotent.
    """
    if len(raw) != SCALAR_LEN:
        raise InvalidLengthError(f"scalar must be {SCALAR_LEN} octets, got {len(raw)}")
    out = bytearray(raw)
    out[0] &= 248
    out[31] &= 127
    out[31] |= 64
    return bytes(out)


def is_clamped(scalar: bytes) -> bool:
    return (
        len(scalar) == SCALAR_LEN
        and scalar[0] & 7 == 0
        and scalar[31] & 128 == 0
        and scalar[31] & 64 == 64
    )


def _ladder(k: int, u: int) -> int:
    """Montgomery ladder over GF(2^255 - 19); fixed 255 iterations, no branches
    on scalar bits."""
    x1 = u % _P
    x2, z2 = 1, 0
    x3, z3 = x1, 1
    swap = 0
    for t in range(254, -1, -1):
        k_t = (k >> t) & 1
        swap ^= k_t
        mask = -swap
        d = mask & (x2 ^ x3)
        x2 ^= d
        x3 ^= d
        d = mask & (z2 ^ z3)
        z2 ^= d
        z3 ^= d
        swap = k_t
        a = (x2 + z2) % _P
        aa = a * a % _P
        b = (x2 - z2) % _P
        bb = b * b % _P
        e = (aa - bb) % _P
        c = (x3 + z3) % _P
        d = (x3 - z3) % _P
        da = d * a % _P
        cb = c * b % _P
        t1 = (da + cb) % _P
        x3 = t1 * t1 % _P
        t2 = (da - cb) % _P
        z3 = x1 * (t2 * t2 % _P) % _P
        x2 = aa * bb % _P
        z2 = e * (aa + _A24 * e) % _P
    mask = -swap
    d = mask & (x2 ^ x3)
    x2 ^= d
    d = mask & (z2 ^ z3)
    z2 ^= d
    return x2 * pow(z2, _P - 2, _P) % _P


def _check_scalar(scalar: bytes) -> int:
    if len(scalar) != SCALAR_LEN:
        raise InvalidLengthError(f"scalar must be {SCALAR_LEN} octets, got {len(scalar)}")
    if not is_clamped(scalar):
        raise ValueError("scalar is not clamped")
    return int.from_bytes(scalar, "little")


def base_mul(scalar: bytes) -> bytes:
    """Multiply the curve base point (u = 9) by a clamped scalar; returns the
    32-octet little-endian u-coordinate."""
    k = _check_scalar(bytes(scalar))
    return _ladder(k, _BASE_U).to_bytes(POINT_LEN, "little")


def shared(scalar: bytes, peer_public: bytes) -> bytes:
    """Diffie-Hellman: multiply a peer's public u-coordinate by our scalar.

    Raises ContributoryBehaviorError if the result is all zero, which happens
    exactly when the peer point lies in the small subgroup.
    """
    k = _check_scalar(bytes(scalar))
    peer = bytes(peer_public)
    if len(peer) != POINT_LEN:
        raise InvalidLengthError(f"public key must be {POINT_LEN} octets, got {len(peer)}")
    # High bit of the u-coordinate is ignored, per the curve's wire format.
    u = int.from_bytes(peer, "little") & ((1 << 255) - 1)
    out = _ladder(k, u)
    if out == 0:
        raise ContributoryBehaviorError("shared secret is zero: low-order peer point rejected")
    return out.to_bytes(POINT_LEN, "little")


# --- SHA-256 ---

_SHA256_K = np.array([
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1,
    0x923F82A4, 0xAB1C5ED5, 0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3,
    0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174, 0xE49B69C1, 0xEFBE4786,
    0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147,
    0x06CA6351, 0x14292967, 0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13,
    0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85, 0xA2BFE8A1, 0xA81A664B,
    0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A,
    0x5B9CCA4F, 0x682E6FF3, 0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208,
    0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
], dtype=np.int64)

_SHA256_IV = (
    0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
    0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
)


@njit(cache=True, nogil=True)
def _sha256_blocks(state, blocks, k_tab):  # pragma: no cover - compiled
    m = 0xFFFFFFFF
    w = np.empty(64, np.int64)
    for bi in range(blocks.shape[0]):
        for t in range(16):
            base = 4 * t
            w[t] = (
                (blocks[bi, base] << 24)
                | (blocks[bi, base + 1] << 16)
                | (blocks[bi, base + 2] << 8)
                | blocks[bi, base + 3]
            )
        for t in range(16, 64):
            x = w[t - 15]
            s0 = (((x >> 7) | (x << 25)) ^ ((x >> 18) | (x << 14)) ^ (x >> 3)) & m
            x = w[t - 2]
            s1 = (((x >> 17) | (x << 15)) ^ ((x >> 19) | (x << 13)) ^ (x >> 10)) & m
            w[t] = (w[t - 16] + s0 + w[t - 7] + s1) & m
        a, b, c, d = state[0], state[1], state[2], state[3]
        e, f, g, h = state[4], state[5], state[6], state[7]
        for t in range(64):
            big_s1 = (((e >> 6) | (e << 26)) ^ ((e >> 11) | (e << 21)) ^ ((e >> 25) | (e << 7))) & m
            ch = ((e & f) ^ ((~e) & g)) & m
            t1 = (h + big_s1 + ch + k_tab[t] + w[t]) & m
            big_s0 = (((a >> 2) | (a << 30)) ^ ((a >> 13) | (a << 19)) ^ ((a >> 22) | (a << 10))) & m
            maj = ((a & b) ^ (a & c) ^ (b & c)) & m
            t2 = (big_s0 + maj) & m
            h = g
            g = f
            f = e
            e = (d + t1) & m
            d = c
            c = b
            b = a
            a = (t1 + t2) & m
        state[0] = (state[0] + a) & m
        state[1] = (state[1] + b) & m
        state[2] = (state[2] + c) & m
        state[3] = (state[3] + d) & m
        state[4] = (state[4] + e) & m
        state[5] = (state[5] + f) & m
        state[6] = (state[6] + g) & m
        state[7] = (state[7] + h) & m


def sha256(message: bytes) -> bytes:
    """SHA-256 digest of a byte sequence (one-shot)."""
    data = bytes(message)
    n = len(data)
    padded = data + b"\x80" + b"\x00" * ((55 - n) % 64) + struct.pack(">Q", 8 * n)
    blocks = np.frombuffer(padded, dtype=np.uint8).reshape(-1, 64).astype(np.int64)
    state = np.array(_SHA256_IV, dtype=np.int64)
    _sha256_blocks(state, blocks, _SHA256_K)
    return b"".join(int(x).to_bytes(4, "big") for x in state)


def warm_kernels() -> None:
    """Trigger JIT compilation of the hash kernel (idempotent)."""
    sha256(b"")
