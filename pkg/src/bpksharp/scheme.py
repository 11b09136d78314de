"""The delegatable pseudonym scheme.

Users hold a NIKE secret plus an authority signature on the matching public
key ``upk``.  A pseudonym at a service provider is the NIKE shared key
between the user and the SP, so users (with ``usk``) and trusted SPs (with
``spsk``) both arrive at the same value.  User-made pseudonyms come with a
proof of well-formedness that also escrows ``upk`` under the authority's
ElGamal key, which is what :func:`open_proof` and :func:`link` rely on.
"""

from __future__ import annotations

import hashlib
import logging
import random
import secrets
from collections.abc import Container
from dataclasses import dataclass

from . import nizk
from .algebra import (
    G1_BYTES,
    G2_BYTES,
    ORDER,
    SCALAR_BYTES,
    G1Point,
    G2Point,
    GroupParams,
    SerializationError,
    decode_g1,
    decode_g2,
    decode_scalar,
    default_rng,
    derive_group_params,
    encode_g1,
    encode_g2,
    encode_scalar,
    random_scalar,
)
from .primitives import (
    DegenerateInputError,
    ElGamalCiphertext,
    GrothSignature,
    elgamal_dec,
    elgamal_enc,
    groth_keygen,
    groth_rand,
    groth_sign,
    groth_verify,
    nike_keygen,
    nike_public_key,
    nike_sharekey,
    elgamal_keygen,
)

log = logging.getLogger(__name__)

VERSION = "bpk-sharp/v1"
SUPPORTED_SECURITY_LEVELS = (128,)
PROOF_BYTES = 2 * G1_BYTES + G2_BYTES + 3 * G1_BYTES + 6 * SCALAR_BYTES


class UnsupportedSecurityLevel(ValueError):
    pass


class LinkRefused(Exception):
    """The authority declines to translate a pseudonym.

    ``reason`` is one of ``"unverified"``, ``"unregistered"`` or ``"degenerate"``.
    """

    def __init__(self, message: str, reason: str) -> None:
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class PublicParams:
    group: GroupParams
    seed: bytes
    security_level: int = 128
    version: str = VERSION


@dataclass(frozen=True)
class MasterPublicKey:
    sig: G2Point
    enc: G1Point


@dataclass(frozen=True)
class MasterSecretKey:
    sig: int
    enc: int


@dataclass(frozen=True)
class MasterKeyPair:
    msk: MasterSecretKey
    mpk: MasterPublicKey


@dataclass(frozen=True)
class UserKeyPair:
    """``usk = (secret, signature)`` together with ``upk = H^secret``."""

    secret: int
    signature: GrothSignature
    upk: G1Point


@dataclass(frozen=True)
class SPKeyPair:
    spsk: int
    sppk: G1Point


def sppk_digest(sppk: G1Point) -> bytes:
    return hashlib.sha256(b"bpk-sharp/v1/sppk" + encode_g1(sppk)).digest()


@dataclass(frozen=True)
class Pseudonym:
    nym: G1Point
    sppk_digest: bytes

    def __bytes__(self) -> bytes:
        return encode_g1(self.nym)


@dataclass(frozen=True)
class NymProof:
    c: ElGamalCiphertext
    R_hat: G2Point
    S: G1Point
    T: G1Point
    upk_blinded: G1Point
    transcript: nizk.NymProofTranscript

    def to_bytes(self) -> bytes:
        t = self.transcript
        return b"".join(
            [
                encode_g1(self.c.c1),
                encode_g1(self.c.c2),
                encode_g2(self.R_hat),
                encode_g1(self.S),
                encode_g1(self.T),
                encode_g1(self.upk_blinded),
            ]
            + [encode_scalar(v) for v in (t.challenge, t.z_r, t.z_s, t.z_usk, t.z_alpha, t.z_beta)]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> NymProof:
        """Parse the fixed 528-byte layout; raises :class:`SerializationError`."""
        data = bytes(data)
        if len(data) != PROOF_BYTES:
            raise SerializationError(f"proof must be {PROOF_BYTES} bytes, got {len(data)}")
        off = 0

        def take(n: int) -> bytes:
            nonlocal off
            chunk = data[off : off + n]
            off += n
            return chunk

        c1, c2 = decode_g1(take(G1_BYTES)), decode_g1(take(G1_BYTES))
        R_hat = decode_g2(take(G2_BYTES))
        S, T, upk_blinded = (decode_g1(take(G1_BYTES)) for _ in range(3))
        scalars = [decode_scalar(take(SCALAR_BYTES)) for _ in range(6)]
        return cls(
            c=ElGamalCiphertext(c1, c2),
            R_hat=R_hat,
            S=S,
            T=T,
            upk_blinded=upk_blinded,
            transcript=nizk.NymProofTranscript(*scalars),
        )


# -- algorithms -------------------------------------------------------------------------


def setup(security_level: int = 128, seed: bytes | None = None) -> PublicParams:
    """Public parameters; deterministic given ``seed`` (fresh 32 bytes otherwise)."""
    if security_level not in SUPPORTED_SECURITY_LEVELS:
        raise UnsupportedSecurityLevel(f"security level {security_level} not supported; use 128")
    if seed is None:
        seed = secrets.token_bytes(32)
    return PublicParams(group=derive_group_params(bytes(seed)), seed=bytes(seed), security_level=security_level)


def keygen(pp: PublicParams, rng: random.Random | None = None) -> MasterKeyPair:
    rng = rng or default_rng()
    sig = groth_keygen(pp.group, rng)
    enc = elgamal_keygen(pp.group, rng)
    return MasterKeyPair(MasterSecretKey(sig.sk, enc.sk), MasterPublicKey(sig.pk, enc.pk))


def keygen_user(pp: PublicParams, msk: MasterSecretKey, rng: random.Random | None = None) -> UserKeyPair:
    rng = rng or default_rng()
    nike = nike_keygen(pp.group, rng)
    return UserKeyPair(secret=nike.sk, signature=groth_sign(msk.sig, nike.pk, pp.group, rng), upk=nike.pk)


def keygen_sp(pp: PublicParams, msk: MasterSecretKey, rng: random.Random | None = None) -> SPKeyPair:
    # msk only authorizes the call; the key pair itself is a plain NIKE key.
    if not isinstance(msk, MasterSecretKey):
        raise TypeError("SP keys are issued under the master secret key")
    nike = nike_keygen(pp.group, rng or default_rng())
    return SPKeyPair(spsk=nike.sk, sppk=nike.pk)


def user_key_valid(pp: PublicParams, mpk: MasterPublicKey, user: UserKeyPair) -> bool:
    return nike_public_key(user.secret, pp.group) == user.upk and groth_verify(
        mpk.sig, user.signature, user.upk, pp.group
    )


def build_statement(pp: PublicParams, mpk: MasterPublicKey, sppk: G1Point, nym: G1Point, proof) -> nizk.NymStatement:
    """Statement for ``proof``; anything with the NymProof element fields works."""
    return nizk.NymStatement(
        params=pp.group,
        mpk_sig=mpk.sig,
        mpk_enc=mpk.enc,
        sppk=sppk,
        nym=nym,
        c=proof.c,
        R_hat=proof.R_hat,
        S=proof.S,
        T=proof.T,
        upk_blinded=proof.upk_blinded,
    )


def nymgen_user(
    pp: PublicParams,
    user: UserKeyPair,
    mpk: MasterPublicKey,
    sppk: G1Point,
    rng: random.Random | None = None,
) -> tuple[Pseudonym, NymProof]:
    """User-side pseudonym for ``sppk`` plus its proof of well-formedness."""
    rng = rng or default_rng()
    g = pp.group
    nym = nike_sharekey(sppk, user.secret)
    upk = nike_public_key(user.secret, g)

    r = random_scalar(rng)
    c = elgamal_enc(mpk.enc, upk, r, g)
    sig = groth_rand(user.signature, rng)
    alpha, beta, s = random_scalar(rng), random_scalar(rng), random_scalar(rng)
    R_hat, S, T = sig.R_hat, sig.S ** pow(alpha, -1, ORDER), sig.T ** pow(beta, -1, ORDER)
    upk_blinded = upk ** pow(s, -1, ORDER)

    st = nizk.NymStatement(g, mpk.sig, mpk.enc, sppk, nym, c, R_hat, S, T, upk_blinded)
    transcript = nizk.prove(st, nizk.NymWitness(r=r, s=s, usk=user.secret, alpha=alpha, beta=beta), rng)
    return Pseudonym(nym, sppk_digest(sppk)), NymProof(c, R_hat, S, T, upk_blinded, transcript)


def nymgen_sp(pp: PublicParams, spsk: int, mpk: MasterPublicKey, upk: G1Point) -> Pseudonym:
    nym = nike_sharekey(upk, spsk)
    return Pseudonym(nym, sppk_digest(nike_public_key(spsk, pp.group)))


def _as_proof(proof: NymProof | bytes) -> NymProof:
    return proof if isinstance(proof, NymProof) else NymProof.from_bytes(proof)


def _as_nym(nym: Pseudonym | G1Point) -> G1Point:
    return nym.nym if isinstance(nym, Pseudonym) else nym


def nymvf(pp: PublicParams, mpk: MasterPublicKey, sppk: G1Point, nym: Pseudonym | G1Point, proof: NymProof | bytes) -> bool:
    """Accept iff ``proof`` shows ``nym`` is well formed for ``sppk``.  Never raises on bad input."""
    try:
        proof = _as_proof(proof)
        nym = _as_nym(nym)
        if not (isinstance(sppk, G1Point) and isinstance(nym, G1Point)):
            raise TypeError("sppk and nym must be G1 elements")
        st = build_statement(pp, mpk, sppk, nym, proof)
    except (SerializationError, TypeError, AttributeError) as exc:
        log.debug("nymvf: malformed input: %s", exc)
        return False
    return nizk.verify(st, proof.transcript)


def open_proof(proof: NymProof | bytes, msk: MasterSecretKey) -> G1Point:
    """Recover the escrowed ``upk`` (raises :class:`SerializationError` if unparsable)."""
    return elgamal_dec(msk.enc, _as_proof(proof).c)


def link(
    pp: PublicParams,
    proof: NymProof | bytes,
    msk: MasterSecretKey,
    target_spsk: int,
    *,
    mpk: MasterPublicKey,
    source_sppk: G1Point,
    nym: Pseudonym | G1Point,
    registered: Container[bytes] | None = None,
) -> Pseudonym:
    """Translate a verified pseudonym into the domain of ``target_spsk``.

    ``registered`` holds the encoded public keys of known users; an opened
    key outside it is refused.
    """
    if not nymvf(pp, mpk, source_sppk, nym, proof):
        raise LinkRefused("proof does not verify", "unverified")
    upk = open_proof(proof, msk)
    if registered is not None and encode_g1(upk) not in registered:
        raise LinkRefused("opened key does not belong to a registered user", "unregistered")
    try:
        return nymgen_sp(pp, target_spsk, mpk, upk)
    except DegenerateInputError as exc:
        raise LinkRefused(str(exc), "degenerate") from exc
