"""Fiat-Shamir Schnorr proof that a pseudonym is well formed.

Statement (public): master keys, the SP key, the pseudonym, an ElGamal
ciphertext ``c`` and the blinded credential ``(R'', S'', T'', upk')``.
Witness: ``r, s, usk, alpha, beta`` such that

    E1  e(S'', R'')^alpha          = e(Y, G_hat) e(G, mpk_sig)
    E2  e(T'', R'')^beta           = e(Y, mpk_sig) e(upk', G_hat)^s
    E3  c1                         = K^r
    E4  c2                         = upk'^s mpk_enc^r
    E5  upk'^s                     = H^usk
    E6  nym                        = sppk^usk

The proof is sent in compressed form: the challenge plus five responses.
Verification recomputes the six commitments and re-derives the challenge
over the length-prefixed statement.
"""

from __future__ import annotations

import logging
import random
import struct
from dataclasses import dataclass
from functools import lru_cache

from .algebra import (
    ORDER,
    G1Point,
    G2Point,
    GroupParams,
    GTElement,
    default_rng,
    encode_g1,
    encode_g2,
    encode_gt,
    hash_to_scalar,
    pairing,
    random_scalar,
)
from .primitives import ElGamalCiphertext

log = logging.getLogger(__name__)

PROOF_TAG = b"bpk-sharp/v1/nym-proof"


class WitnessMismatchError(ValueError):
    """The witness does not satisfy the statement; no proof is produced."""


@dataclass(frozen=True)
class NymStatement:
    params: GroupParams
    mpk_sig: G2Point
    mpk_enc: G1Point
    sppk: G1Point
    nym: G1Point
    c: ElGamalCiphertext
    R_hat: G2Point
    S: G1Point
    T: G1Point
    upk_blinded: G1Point


@dataclass(frozen=True)
class NymWitness:
    r: int
    s: int
    usk: int
    alpha: int
    beta: int


@dataclass(frozen=True)
class NymProofTranscript:
    challenge: int
    z_r: int
    z_s: int
    z_usk: int
    z_alpha: int
    z_beta: int


@lru_cache(maxsize=128)
def _master_pairings(params: GroupParams, mpk_sig: G2Point) -> tuple[GTElement, GTElement]:
    # Right-hand sides of E1 and E2 that depend only on public parameters and mpk.
    return (
        pairing(params.Y, params.G_hat) * pairing(params.G, mpk_sig),
        pairing(params.Y, mpk_sig),
    )


def _statement_pairings(st: NymStatement) -> tuple[GTElement, GTElement, GTElement]:
    return (
        pairing(st.S, st.R_hat),
        pairing(st.T, st.R_hat),
        pairing(st.upk_blinded, st.params.G_hat),
    )


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def statement_bytes(st: NymStatement) -> bytes:
    """Canonical length-prefixed statement encoding hashed into the challenge."""
    parts = [
        st.params.digest,
        encode_g2(st.mpk_sig),
        encode_g1(st.mpk_enc),
        encode_g1(st.sppk),
        encode_g1(st.nym),
        encode_g1(st.c.c1),
        encode_g1(st.c.c2),
        encode_g2(st.R_hat),
        encode_g1(st.S),
        encode_g1(st.T),
        encode_g1(st.upk_blinded),
    ]
    return b"".join(_lp(p) for p in parts)


def _challenge(st: NymStatement, commitments) -> int:
    a1, a2, a3, a4, a5, a6 = commitments
    encoded = [encode_gt(a1), encode_gt(a2)] + [encode_g1(a) for a in (a3, a4, a5, a6)]
    return hash_to_scalar(PROOF_TAG, statement_bytes(st) + b"".join(_lp(a) for a in encoded))


def witness_satisfies(st: NymStatement, w: NymWitness, pairings=None) -> bool:
    """Evaluate E1-E6 directly."""
    if not all(0 < v < ORDER for v in (w.r, w.s, w.usk, w.alpha, w.beta)):
        return False
    params = st.params
    p_s, p_t, p_u = pairings or _statement_pairings(st)
    rhs_sig, rhs_y = _master_pairings(params, st.mpk_sig)
    upk_s = st.upk_blinded**w.s
    return (
        st.c.c1 == params.K**w.r
        and st.c.c2 == upk_s * st.mpk_enc**w.r
        and upk_s == params.H**w.usk
        and st.nym == st.sppk**w.usk
        and p_s**w.alpha == rhs_sig
        and p_t**w.beta == rhs_y * p_u**w.s
    )


def _respond(st: NymStatement, w: NymWitness, rng: random.Random, pairings) -> NymProofTranscript:
    params = st.params
    p_s, p_t, p_u = pairings
    m_r, m_s, m_usk, m_alpha, m_beta = (random_scalar(rng) for _ in range(5))
    commitments = (
        p_s**m_alpha,
        p_t**m_beta * p_u ** (ORDER - m_s),
        params.K**m_r,
        st.upk_blinded**m_s * st.mpk_enc**m_r,
        st.upk_blinded**m_s * params.H ** (ORDER - m_usk),
        st.sppk**m_usk,
    )
    e = _challenge(st, commitments)
    return NymProofTranscript(
        challenge=e,
        z_r=(m_r + e * w.r) % ORDER,
        z_s=(m_s + e * w.s) % ORDER,
        z_usk=(m_usk + e * w.usk) % ORDER,
        z_alpha=(m_alpha + e * w.alpha) % ORDER,
        z_beta=(m_beta + e * w.beta) % ORDER,
    )


def prove(st: NymStatement, w: NymWitness, rng: random.Random | None = None) -> NymProofTranscript:
    """Prove ``st`` with witness ``w``.

    Raises :class:`WitnessMismatchError` if ``w`` does not satisfy E1-E6,
    since the resulting transcript would not verify anyway.
    """
    pairings = _statement_pairings(st)
    if not witness_satisfies(st, w, pairings):
        raise WitnessMismatchError("witness does not satisfy the pseudonym statement")
    return _respond(st, w, rng or default_rng(), pairings)


def prove_unchecked(st: NymStatement, w: NymWitness, rng: random.Random | None = None) -> NymProofTranscript:
    """Run the prover without the witness check (adversary simulations only)."""
    return _respond(st, w, rng or default_rng(), _statement_pairings(st))


def _well_formed(st: NymStatement, proof: NymProofTranscript) -> str | None:
    for name in ("sppk", "nym", "upk_blinded", "R_hat", "S", "T"):
        if getattr(st, name).is_neutral_element():
            return f"{name} is the identity"
    for name in ("challenge", "z_r", "z_s", "z_usk", "z_alpha", "z_beta"):
        v = getattr(proof, name)
        if not isinstance(v, int) or not 0 <= v < ORDER:
            return f"{name} out of range"
    return None


def verify(st: NymStatement, proof: NymProofTranscript) -> bool:
    problem = _well_formed(st, proof)
    if problem:
        log.debug("nym proof malformed: %s", problem)
        return False
    params = st.params
    p_s, p_t, p_u = _statement_pairings(st)
    rhs_sig, rhs_y = _master_pairings(params, st.mpk_sig)
    neg_e = (ORDER - proof.challenge) % ORDER
    commitments = (
        p_s**proof.z_alpha * rhs_sig**neg_e,
        p_t**proof.z_beta * p_u ** (ORDER - proof.z_s) * rhs_y**neg_e,
        params.K**proof.z_r * st.c.c1**neg_e,
        st.upk_blinded**proof.z_s * st.mpk_enc**proof.z_r * st.c.c2**neg_e,
        st.upk_blinded**proof.z_s * params.H ** (ORDER - proof.z_usk),
        st.sppk**proof.z_usk * st.nym**neg_e,
    )
    if _challenge(st, commitments) != proof.challenge:
        log.debug("nym proof rejected: challenge mismatch")
        return False
    return True
