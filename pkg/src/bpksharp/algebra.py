"""Bilinear group layer over BLS12-381.

Group arithmetic and the pairing come from RELIC (through ``petrelic``) and
use multiplicative notation: ``P * Q`` is the group operation and ``P ** k``
exponentiation.  Scalars are plain Python ints reduced modulo ``ORDER``.

Everything that crosses a byte boundary goes through the codecs in this
module.  They implement the usual compressed point format for BLS12-381
(48-byte G1, 96-byte G2, three flag bits in the leading byte), so the bytes
interoperate with other curve libraries.  GT elements are written as twelve
48-byte base-field elements.
"""

from __future__ import annotations

import contextlib
import ctypes
import hashlib
import os
import random
import secrets
import struct
import threading
from dataclasses import dataclass, field
from functools import cached_property

from petrelic.multiplicative.pairing import G1, G2, GT
from petrelic.multiplicative.pairing import G1Element as G1Point
from petrelic.multiplicative.pairing import G2Element as G2Point
from petrelic.multiplicative.pairing import GTElement
from py_ecc.bls.hash_to_curve import hash_to_G1 as _py_ecc_hash_to_g1
from py_ecc.optimized_bls12_381 import normalize as _py_ecc_normalize

__all__ = [
    "FIELD_MODULUS",
    "ORDER",
    "G1Point",
    "G2Point",
    "GTElement",
    "GroupParams",
    "SeededRng",
    "SerializationError",
    "decode_g1",
    "decode_g2",
    "decode_gt",
    "decode_scalar",
    "default_rng",
    "derive_group_params",
    "encode_g1",
    "encode_g2",
    "encode_gt",
    "encode_scalar",
    "g1_generator",
    "g1_identity",
    "g2_generator",
    "g2_identity",
    "gt_identity",
    "hash_to_g1",
    "hash_to_scalar",
    "pairing",
    "random_scalar",
]

#: Base field modulus of BLS12-381.
FIELD_MODULUS = int(
    "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f624"
    "1eabfffeb153ffffb9feffffffffaaab",
    16,
)
#: Prime order of G1, G2 and GT.
ORDER = int("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16)

G1_BYTES = 48
G2_BYTES = 96
GT_BYTES = 576
SCALAR_BYTES = 32

HASH_TO_CURVE_DST = b"BPK-SHARP-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_"

_Q = FIELD_MODULUS
_HALF_Q = (_Q - 1) // 2

_FLAG_COMPRESSED = 0x80
_FLAG_INFINITY = 0x40
_FLAG_SIGN = 0x20


class SerializationError(ValueError):
    """Raised when bytes do not encode a valid element."""


# -- randomness ---------------------------------------------------------------


def default_rng() -> random.Random:
    """Operating-system entropy behind the ``random.Random`` interface."""
    return secrets.SystemRandom()


class SeededRng(random.Random):
    """Deterministic generator for reproducible fixtures.

    Output is a SHA-256 counter-mode stream keyed by the seed.  Suitable for
    tests and reproducible command-line runs, not for production keys.
    """

    def __init__(self, seed: bytes | str | int = b"") -> None:
        self._key = b""
        self._counter = 0
        self._buffer = b""
        super().__init__(seed)

    def seed(self, a=b"", version=2) -> None:  # noqa: D102 - random.Random API
        if isinstance(a, int):
            a = a.to_bytes((a.bit_length() + 8) // 8, "big", signed=True)
        elif isinstance(a, str):
            a = a.encode()
        elif a is None:
            a = secrets.token_bytes(32)
        self._key = hashlib.sha256(b"bpk-sharp/v1/rng\x00" + bytes(a)).digest()
        self._counter = 0
        self._buffer = b""

    def _take(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.sha256(self._key + struct.pack(">Q", self._counter)).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def getrandbits(self, k: int) -> int:
        if k < 0:
            raise ValueError("number of bits must be non-negative")
        if k == 0:
            return 0
        value = int.from_bytes(self._take((k + 7) // 8), "big")
        return value >> (-k % 8)

    def random(self) -> float:
        return self.getrandbits(53) * 2.0**-53

    def randbytes(self, n: int) -> bytes:
        return self._take(n)

    def getstate(self):
        return (self._key, self._counter, self._buffer)

    def setstate(self, state) -> None:
        self._key, self._counter, self._buffer = state


def random_scalar(rng: random.Random) -> int:
    """Uniform element of Z_p^* (never zero)."""
    return rng.randrange(1, ORDER)


# -- constants and the pairing ----------------------------------------------------


def g1_generator() -> G1Point:
    return G1.generator()


def g2_generator() -> G2Point:
    return G2.generator()


def g1_identity() -> G1Point:
    return G1.neutral_element()


def g2_identity() -> G2Point:
    return G2.neutral_element()


def gt_identity() -> GTElement:
    return GT.unity()


def pairing(P: G1Point, Q: G2Point) -> GTElement:
    return P.pair(Q)


# -- hashing ----------------------------------------------------------------------


def _length_prefixed(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def hash_to_scalar(domain_tag: bytes, transcript: bytes) -> int:
    """Hash to Z_p via 512 bits of SHA-512 output reduced mod p."""
    if not domain_tag:
        raise ValueError("domain tag must be non-empty")
    digest = hashlib.sha512(_length_prefixed(domain_tag) + transcript).digest()
    return int.from_bytes(digest, "big") % ORDER


def hash_to_g1(message: bytes, dst: bytes = HASH_TO_CURVE_DST) -> G1Point:
    """Hash to G1 with the RFC 9380 suite BLS12381G1_XMD:SHA-256_SSWU_RO_."""
    x, y = _py_ecc_normalize(_py_ecc_hash_to_g1(message, dst, hashlib.sha256))
    return _g1_from_affine(int(x), int(y))


# -- base field helpers -------------------------------------------------------------


def _fp_sqrt(a: int) -> int | None:
    root = pow(a, (_Q + 1) // 4, _Q)
    return root if root * root % _Q == a % _Q else None


def _fp2_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    a0, a1 = a
    b0, b1 = b
    return ((a0 * b0 - a1 * b1) % _Q, (a0 * b1 + a1 * b0) % _Q)


_libc = ctypes.CDLL(None)
_quiet_lock = threading.Lock()


@contextlib.contextmanager
def _relic_quiet():
    # RELIC reports rejected points with printf on fd 1; keep that off stdout.
    with _quiet_lock:
        _libc.fflush(None)
        saved = os.dup(1)
        devnull = os.open(os.devnull, os.O_WRONLY)
        try:
            os.dup2(devnull, 1)
            yield
        finally:
            _libc.fflush(None)
            os.dup2(saved, 1)
            os.close(saved)
            os.close(devnull)


def _g1_from_affine(x: int, y: int) -> G1Point:
    raw = b"\x04" + x.to_bytes(G1_BYTES, "big") + y.to_bytes(G1_BYTES, "big")
    return G1Point.from_binary(raw)


# -- codecs ---------------------------------------------------------------------------


def encode_scalar(k: int) -> bytes:
    if not 0 <= k < ORDER:
        raise SerializationError("scalar out of range")
    return k.to_bytes(SCALAR_BYTES, "little")


def decode_scalar(data: bytes) -> int:
    if len(data) != SCALAR_BYTES:
        raise SerializationError(f"scalar must be {SCALAR_BYTES} bytes, got {len(data)}")
    k = int.from_bytes(data, "little")
    if k >= ORDER:
        raise SerializationError("scalar is not reduced")
    return k


def encode_g1(P: G1Point) -> bytes:
    if P.is_neutral_element():
        return bytes([_FLAG_COMPRESSED | _FLAG_INFINITY]) + bytes(G1_BYTES - 1)
    raw = P.to_binary(compressed=False)
    x = int.from_bytes(raw[1 : 1 + G1_BYTES], "big")
    y = int.from_bytes(raw[1 + G1_BYTES :], "big")
    out = bytearray(x.to_bytes(G1_BYTES, "big"))
    out[0] |= _FLAG_COMPRESSED | (_FLAG_SIGN if y > _HALF_Q else 0)
    return bytes(out)


def _split_flags(data: bytes, size: int) -> tuple[bool, bool, bytes]:
    if len(data) != size:
        raise SerializationError(f"expected {size} bytes, got {len(data)}")
    flags = data[0]
    if not flags & _FLAG_COMPRESSED:
        raise SerializationError("compression flag not set")
    infinity = bool(flags & _FLAG_INFINITY)
    sign = bool(flags & _FLAG_SIGN)
    body = bytes([flags & 0x1F]) + data[1:]
    if infinity and (sign or any(body)):
        raise SerializationError("non-canonical encoding of the identity")
    return infinity, sign, body


def decode_g1(data: bytes) -> G1Point:
    """Decode a compressed G1 point, enforcing curve and subgroup membership."""
    infinity, sign, body = _split_flags(bytes(data), G1_BYTES)
    if infinity:
        return g1_identity()
    x = int.from_bytes(body, "big")
    if x >= _Q:
        raise SerializationError("x coordinate not reduced")
    y = _fp_sqrt((x * x * x + 4) % _Q)
    if y is None:
        raise SerializationError("point is not on the curve")
    if (y > _HALF_Q) != sign:
        y = _Q - y
    with _relic_quiet():
        P = _g1_from_affine(x, y)
        valid = P.is_valid()
    if not valid:
        raise SerializationError("point is not in the prime-order subgroup")
    return P


def encode_g2(P: G2Point) -> bytes:
    if P.is_neutral_element():
        return bytes([_FLAG_COMPRESSED | _FLAG_INFINITY]) + bytes(G2_BYTES - 1)
    raw = P.to_binary(compressed=False)
    n = G1_BYTES
    x0, x1, y0, y1 = (int.from_bytes(raw[1 + i * n : 1 + (i + 1) * n], "big") for i in range(4))
    larger = y1 > _HALF_Q if y1 else y0 > _HALF_Q
    out = bytearray(x1.to_bytes(n, "big") + x0.to_bytes(n, "big"))
    out[0] |= _FLAG_COMPRESSED | (_FLAG_SIGN if larger else 0)
    return bytes(out)


def decode_g2(data: bytes) -> G2Point:
    """Decode a compressed G2 point, enforcing curve and subgroup membership."""
    infinity, sign, body = _split_flags(bytes(data), G2_BYTES)
    if infinity:
        return g2_identity()
    x1 = int.from_bytes(body[:G1_BYTES], "big")
    x0 = int.from_bytes(body[G1_BYTES:], "big")
    if x0 >= _Q or x1 >= _Q:
        raise SerializationError("x coordinate not reduced")
    x = (x0, x1)
    rhs = _fp2_mul(_fp2_mul(x, x), x)
    rhs = ((rhs[0] + 4) % _Q, (rhs[1] + 4) % _Q)
    # rhs is a square in Fp2 iff its norm is a square in Fp.
    if pow((rhs[0] * rhs[0] + rhs[1] * rhs[1]) % _Q, _HALF_Q, _Q) > 1:
        raise SerializationError("point is not on the curve")
    with _relic_quiet():
        P = G2Point.from_binary(b"\x02" + x0.to_bytes(G1_BYTES, "big") + x1.to_bytes(G1_BYTES, "big"))
        raw = P.to_binary(compressed=False)
        n = G1_BYTES
        px0, px1, y0, y1 = (int.from_bytes(raw[1 + i * n : 1 + (i + 1) * n], "big") for i in range(4))
        # RELIC's decompression does not re-check the curve equation.
        if (px0, px1) != x or _fp2_mul((y0, y1), (y0, y1)) != rhs:
            raise SerializationError("point is not on the curve")
        larger = y1 > _HALF_Q if y1 else y0 > _HALF_Q
        if larger != sign:
            P = P.inverse()
        valid = P.is_valid()
    if not valid:
        raise SerializationError("point is not in the prime-order subgroup")
    return P


def encode_gt(x: GTElement) -> bytes:
    return x.to_binary(compressed=False)


def decode_gt(data: bytes) -> GTElement:
    if len(data) != GT_BYTES:
        raise SerializationError(f"GT element must be {GT_BYTES} bytes, got {len(data)}")
    if any(int.from_bytes(data[i : i + G1_BYTES], "big") >= _Q for i in range(0, GT_BYTES, G1_BYTES)):
        raise SerializationError("GT coefficient not reduced")
    try:
        with _relic_quiet():
            x = GTElement.from_binary(bytes(data))
            valid = x.is_valid()
    except Exception as exc:  # RELIC raises bare errors on malformed input
        raise SerializationError("malformed GT element") from exc
    if not valid:
        raise SerializationError("element is not in GT")
    return x


# -- public group parameters ----------------------------------------------------------


@dataclass(frozen=True)
class GroupParams:
    """Generators plus the three independent G1 bases Y (signing), H (NIKE), K (ElGamal)."""

    G: G1Point
    G_hat: G2Point
    Y: G1Point
    H: G1Point
    K: G1Point
    order: int = field(default=ORDER)

    def __post_init__(self) -> None:
        for name in ("Y", "H", "K"):
            if getattr(self, name).is_neutral_element():
                raise ValueError(f"{name} must not be the identity")

    @cached_property
    def digest(self) -> bytes:
        h = hashlib.sha256(b"bpk-sharp/v1/group-params")
        for part in (encode_g1(self.G), encode_g2(self.G_hat), encode_g1(self.Y), encode_g1(self.H), encode_g1(self.K)):
            h.update(part)
        return h.digest()


def derive_group_params(seed: bytes) -> GroupParams:
    """Derive Y, H and K from ``seed`` with hash-to-curve, so anyone can re-check them."""

    def base(label: bytes) -> G1Point:
        return hash_to_g1(b"bpk-sharp/v1/setup/" + label + b"/" + seed)

    return GroupParams(G=g1_generator(), G_hat=g2_generator(), Y=base(b"Y"), H=base(b"H"), K=base(b"K"))
