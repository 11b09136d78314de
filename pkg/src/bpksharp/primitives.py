"""Groth structure-preserving signatures on one G1 element, DH key exchange
in G1 and ElGamal encryption in G1.

All functions are pure; randomness comes from an explicit ``rng`` with the
``random.Random`` interface (see :func:`bpksharp.algebra.default_rng`).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .algebra import (
    ORDER,
    G1Point,
    G2Point,
    GroupParams,
    default_rng,
    pairing,
    random_scalar,
)


class DegenerateInputError(ValueError):
    """A zero scalar or identity element where the scheme forbids one."""


def _require_scalar(k: int, what: str) -> None:
    if not isinstance(k, int) or not 0 < k < ORDER:
        raise DegenerateInputError(f"{what} must be a nonzero scalar")


def _require_point(P, what: str) -> None:
    if P.is_neutral_element():
        raise DegenerateInputError(f"{what} must not be the identity")


# -- Groth signatures ----------------------------------------------------------------


@dataclass(frozen=True)
class GrothKeyPair:
    sk: int
    pk: G2Point


@dataclass(frozen=True)
class GrothSignature:
    R_hat: G2Point
    S: G1Point
    T: G1Point


def groth_keygen(params: GroupParams, rng: random.Random | None = None) -> GrothKeyPair:
    rng = rng or default_rng()
    sk = random_scalar(rng)
    return GrothKeyPair(sk=sk, pk=params.G_hat**sk)


def groth_sign(sk: int, msg: G1Point, params: GroupParams, rng: random.Random | None = None) -> GrothSignature:
    """Sign the G1 element ``msg``: (G_hat^r, (Y G^sk)^(1/r), (Y^sk msg)^(1/r))."""
    _require_scalar(sk, "signing key")
    rng = rng or default_rng()
    r = random_scalar(rng)
    r_inv = pow(r, -1, ORDER)
    return GrothSignature(
        R_hat=params.G_hat**r,
        S=(params.Y * params.G**sk) ** r_inv,
        T=(params.Y**sk * msg) ** r_inv,
    )


def groth_rand(sig: GrothSignature, rng: random.Random | None = None, *, factor: int | None = None) -> GrothSignature:
    """Re-randomize ``sig`` into (R_hat^r', S^(1/r'), T^(1/r')).

    ``factor`` pins r' (used by tests); otherwise r' is drawn from ``rng``.
    """
    if factor is None:
        factor = random_scalar(rng or default_rng())
    _require_scalar(factor, "randomizer")
    inv = pow(factor, -1, ORDER)
    return GrothSignature(R_hat=sig.R_hat**factor, S=sig.S**inv, T=sig.T**inv)


def groth_verify(pk: G2Point, sig: GrothSignature, msg: G1Point, params: GroupParams) -> bool:
    if sig.R_hat.is_neutral_element():
        return False
    if pairing(sig.S, sig.R_hat) != pairing(params.Y, params.G_hat) * pairing(params.G, pk):
        return False
    return pairing(sig.T, sig.R_hat) == pairing(params.Y, pk) * pairing(msg, params.G_hat)


# -- Diffie-Hellman NIKE --------------------------------------------------------------------


@dataclass(frozen=True)
class NikeKeyPair:
    sk: int
    pk: G1Point


def nike_public_key(sk: int, params: GroupParams) -> G1Point:
    """The injective secret-to-public map sk -> H^sk."""
    _require_scalar(sk, "NIKE secret key")
    return params.H**sk


def nike_keygen(params: GroupParams, rng: random.Random | None = None) -> NikeKeyPair:
    sk = random_scalar(rng or default_rng())
    return NikeKeyPair(sk=sk, pk=nike_public_key(sk, params))


def nike_sharekey(pk_other: G1Point, sk: int) -> G1Point:
    _require_point(pk_other, "peer public key")
    _require_scalar(sk, "NIKE secret key")
    return pk_other**sk


# -- ElGamal -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ElGamalKeyPair:
    sk: int
    pk: G1Point


@dataclass(frozen=True)
class ElGamalCiphertext:
    c1: G1Point
    c2: G1Point


def elgamal_keygen(params: GroupParams, rng: random.Random | None = None) -> ElGamalKeyPair:
    sk = random_scalar(rng or default_rng())
    return ElGamalKeyPair(sk=sk, pk=params.K**sk)


def elgamal_enc(pk: G1Point, msg: G1Point, r: int, params: GroupParams) -> ElGamalCiphertext:
    _require_scalar(r, "encryption randomness")
    return ElGamalCiphertext(c1=params.K**r, c2=pk**r * msg)


def elgamal_dec(sk: int, c: ElGamalCiphertext) -> G1Point:
    return c.c2 * c.c1 ** ((-sk) % ORDER)


def elgamal_rerandomize(pk: G1Point, c: ElGamalCiphertext, r: int, params: GroupParams) -> ElGamalCiphertext:
    """Fresh-looking encryption of the same plaintext: (c1 K^r, c2 pk^r)."""
    _require_scalar(r, "encryption randomness")
    return ElGamalCiphertext(c1=c.c1 * params.K**r, c2=c.c2 * pk**r)
