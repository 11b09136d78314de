"""Scripted adversaries for the two experiments.

Non-frameability adversaries return ``(sppk, nym, proof)``; anonymity
adversaries return a guess bit.  Every strategy works only through the
oracle handle it is given.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from .. import nizk, scheme
from ..algebra import (
    ORDER,
    encode_g1,
    g1_generator,
    g2_generator,
    pairing,
    random_scalar,
)
from ..primitives import ElGamalCiphertext, GrothSignature, elgamal_enc, groth_sign, nike_keygen
from ..scheme import NymProof
from .games import AnonymityOracles, NonFrameabilityOracles

PROOF_FIELDS = ("c1", "c2", "R_hat", "S", "T", "upk_blinded", "challenge", "z_r", "z_s", "z_usk", "z_alpha", "z_beta")
_TRANSCRIPT_FIELDS = PROOF_FIELDS[6:]


def _swap_field(proof: NymProof, name: str, value) -> NymProof:
    if name in ("c1", "c2"):
        return replace(proof, c=replace(proof.c, **{name: value}))
    if name in _TRANSCRIPT_FIELDS:
        return replace(proof, transcript=replace(proof.transcript, **{name: value}))
    return replace(proof, **{name: value})


def _get_field(proof: NymProof, name: str):
    if name in ("c1", "c2"):
        return getattr(proof.c, name)
    if name in _TRANSCRIPT_FIELDS:
        return getattr(proof.transcript, name)
    return getattr(proof, name)


def tamper(proof: NymProof, name: str, rng) -> NymProof:
    """Replace one field by a different random value of the same kind."""
    old = _get_field(proof, name)
    if name in _TRANSCRIPT_FIELDS:
        new = (old + random_scalar(rng)) % ORDER
    elif name == "R_hat":
        new = old * g2_generator() ** random_scalar(rng)
    else:
        new = old * g1_generator() ** random_scalar(rng)
    return _swap_field(proof, name, new)


def _honest_pair(o: NonFrameabilityOracles):
    upk, sppk = o.gen_u(), o.gen_sp()
    nym, proof = o.nym(sppk, upk)
    return upk, sppk, nym, proof


# -- non-frameability -----------------------------------------------------------------


@dataclass(frozen=True)
class HonestReplay:
    name: str = "honest-replay"

    def run(self, o: NonFrameabilityOracles, rng):
        _, sppk, nym, proof = _honest_pair(o)
        return sppk, nym, proof


@dataclass(frozen=True)
class CorruptAndProve:
    name: str = "corrupt-and-prove"

    def run(self, o: NonFrameabilityOracles, rng):
        upk, sppk = o.gen_u(), o.gen_sp()
        user = o.corrupt_u(upk)
        nym, proof = scheme.nymgen_user(o.pp, user, o.mpk, sppk, rng)
        return sppk, nym, proof


@dataclass(frozen=True)
class RandomForgery:
    name: str = "random-forgery"

    def run(self, o: NonFrameabilityOracles, rng):
        sppk = o.gen_sp()
        G, G_hat = g1_generator(), g2_generator()
        rand1 = lambda: G ** random_scalar(rng)  # noqa: E731
        proof = NymProof(
            c=ElGamalCiphertext(rand1(), rand1()),
            R_hat=G_hat ** random_scalar(rng),
            S=rand1(),
            T=rand1(),
            upk_blinded=rand1(),
            transcript=nizk.NymProofTranscript(*(random_scalar(rng) for _ in range(6))),
        )
        return sppk, rand1(), proof


@dataclass(frozen=True)
class FieldTamperer:
    """Alters one proof field of an honest proof and submits it at a fresh SP.

    With ``field=None`` each run picks the field at random.
    """

    field: str | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "name", self.name or f"tamper-{self.field or 'any-field'}")

    def run(self, o: NonFrameabilityOracles, rng):
        _, _, nym, proof = _honest_pair(o)
        target = o.gen_sp()
        return target, nym, tamper(proof, self.field or rng.choice(PROOF_FIELDS), rng)


@dataclass(frozen=True)
class Mixer:
    """Splices a random subset of fields from one honest proof into another."""

    name: str = "mixer"

    def run(self, o: NonFrameabilityOracles, rng):
        upk_a, upk_b = o.gen_u(), o.gen_u()
        sp1, sp2 = o.gen_sp(), o.gen_sp()
        _, proof_a = o.nym(sp1, upk_a)
        nym_b, proof_b = o.nym(sp2, upk_b)
        k = rng.randrange(1, len(PROOF_FIELDS))
        mixed = proof_b
        for name in rng.sample(PROOF_FIELDS, k):
            mixed = _swap_field(mixed, name, _get_field(proof_a, name))
        # Target an SP where user A holds no pseudonym so an accepted proof would count.
        return o.gen_sp(), nym_b, mixed


@dataclass(frozen=True)
class CrossSppkReplayer:
    name: str = "cross-sppk-replay"

    def run(self, o: NonFrameabilityOracles, rng):
        _, _, nym, proof = _honest_pair(o)
        return o.gen_sp(), nym, proof


@dataclass(frozen=True)
class CrossNymReplayer:
    """Pairs user A's proof with the pseudonym of corrupted user B at a fresh SP."""

    name: str = "cross-nym-replay"

    def run(self, o: NonFrameabilityOracles, rng):
        _, _, _, proof = _honest_pair(o)
        upk_b = o.gen_u()
        user_b = o.corrupt_u(upk_b)
        target = o.gen_sp()
        nym_b, _ = scheme.nymgen_user(o.pp, user_b, o.mpk, target, rng)
        return target, nym_b, proof


@dataclass(frozen=True)
class SelfSigned:
    """Signature stripper: drops the authority credential for a self-made one."""

    name: str = "self-signed-credential"

    def run(self, o: NonFrameabilityOracles, rng):
        g = o.pp.group
        sppk = o.gen_sp()
        fake_sk = random_scalar(rng)
        nike = nike_keygen(g, rng)
        user = scheme.UserKeyPair(nike.sk, groth_sign(fake_sk, nike.pk, g, rng), nike.pk)
        return (sppk, *_forced_proof(o, user, sppk, nike.pk, rng))


@dataclass(frozen=True)
class GarbageSignature:
    """Signature stripper: keeps R_hat of a corrupted credential, randomizes S and T."""

    name: str = "garbage-signature"

    def run(self, o: NonFrameabilityOracles, rng):
        upk = o.gen_u()
        user = o.corrupt_u(upk)
        G = g1_generator()
        sig = GrothSignature(user.signature.R_hat, G ** random_scalar(rng), G ** random_scalar(rng))
        victim = o.gen_u()
        sppk = o.gen_sp()
        return (sppk, *_forced_proof(o, replace(user, signature=sig), sppk, victim, rng))


@dataclass(frozen=True)
class FramingEncryption:
    """Corrupted user C proves its own pseudonym but escrows honest user A's key."""

    name: str = "framing-encryption"

    def run(self, o: NonFrameabilityOracles, rng):
        victim = o.gen_u()
        user = o.corrupt_u(o.gen_u())
        sppk = o.gen_sp()
        return (sppk, *_forced_proof(o, user, sppk, victim, rng))


def _forced_proof(o: NonFrameabilityOracles, user: scheme.UserKeyPair, sppk, escrowed, rng):
    """Run the prover honestly except that ``escrowed`` is encrypted, skipping witness checks."""
    g = o.pp.group
    nym = sppk**user.secret
    r, s, alpha, beta, rho = (random_scalar(rng) for _ in range(5))
    c = elgamal_enc(o.mpk.enc, escrowed, r, g)
    sig = user.signature
    R_hat = sig.R_hat**rho
    S = sig.S ** pow(rho * alpha, -1, ORDER)
    T = sig.T ** pow(rho * beta, -1, ORDER)
    upk_blinded = user.upk ** pow(s, -1, ORDER)
    st = nizk.NymStatement(g, o.mpk.sig, o.mpk.enc, sppk, nym, c, R_hat, S, T, upk_blinded)
    w = nizk.NymWitness(r=r, s=s, usk=user.secret, alpha=alpha, beta=beta)
    transcript = nizk.prove_unchecked(st, w, rng)
    return nym, NymProof(c, R_hat, S, T, upk_blinded, transcript)


def non_frameability_battery() -> list:
    return [
        HonestReplay(),
        CorruptAndProve(),
        RandomForgery(),
        FieldTamperer(),
        Mixer(),
        CrossSppkReplayer(),
        CrossNymReplayer(),
        SelfSigned(),
        GarbageSignature(),
        FramingEncryption(),
    ]


# -- anonymity --------------------------------------------------------------------------


def _parity(*elements) -> int:
    h = hashlib.sha256(b"".join(encode_g1(e) for e in elements))
    return h.digest()[0] & 1


def _lor_setup(o: AnonymityOracles):
    u0, u1 = o.gen_u(), o.gen_u()
    sp = o.gen_sp()
    nym, proof = o.lor(u0, u1, sp)
    return u0, u1, sp, nym, proof


@dataclass(frozen=True)
class CoinFlip:
    name: str = "coin-flip"

    def run(self, o: AnonymityOracles, rng) -> int:
        _lor_setup(o)
        return rng.randrange(2)


@dataclass(frozen=True)
class NymComparer:
    """Compares the challenge pseudonym with both users' pseudonyms at another SP."""

    name: str = "nym-comparer"

    def run(self, o: AnonymityOracles, rng) -> int:
        u0, u1, _, nym, _ = _lor_setup(o)
        other = o.gen_sp()
        n0, _ = o.nym(other, u0)
        n1, _ = o.nym(other, u1)
        if nym.nym in (n0.nym, n1.nym):
            return int(nym.nym == n1.nym)
        return _parity(nym.nym, n0.nym, n1.nym)


@dataclass(frozen=True)
class ProofComponentLinker:
    """Looks for shared proof components or equal credential pairings."""

    name: str = "proof-component-linker"

    def run(self, o: AnonymityOracles, rng) -> int:
        u0, u1, _, _, proof = _lor_setup(o)
        other = o.gen_sp()
        refs = [o.nym(other, u)[1] for u in (u0, u1)]
        target = pairing(proof.T, proof.R_hat)
        scores = []
        for ref in refs:
            shared = sum(_get_field(ref, f) == _get_field(proof, f) for f in PROOF_FIELDS)
            shared += pairing(ref.T, ref.R_hat) == target
            scores.append(shared)
        if scores[0] != scores[1]:
            return int(scores[1] > scores[0])
        return _parity(proof.upk_blinded, proof.c.c2)


@dataclass(frozen=True)
class SmallExponentLinker:
    """Tries to undo the key blinding and the ElGamal mask with small exponents."""

    name: str = "small-exponent-linker"
    bound: int = 16

    def run(self, o: AnonymityOracles, rng) -> int:
        u0, u1, _, _, proof = _lor_setup(o)
        candidates = {encode_g1(u0): 0, encode_g1(u1): 1}
        acc = proof.upk_blinded
        for _ in range(self.bound):
            hit = candidates.get(encode_g1(acc))
            if hit is not None:
                return hit
            acc = acc * proof.upk_blinded
        mask = o.mpk.enc
        for _ in range(self.bound):
            for upk, bit in ((u0, 0), (u1, 1)):
                if proof.c.c2 == mask * upk:
                    return bit
            mask = mask * o.mpk.enc
        return _parity(proof.c.c1, proof.upk_blinded)


def field_tamperers() -> list:
    return [FieldTamperer(f) for f in PROOF_FIELDS]


def anonymity_battery() -> list:
    return [CoinFlip(), NymComparer(), ProofComponentLinker(), SmallExponentLinker()]


# Adversaries below break a constraint of the anonymity experiment.  Each would
# guess b every time; the experiment must still output 0.


@dataclass(frozen=True)
class NymOnChallengeUser:
    name: str = "nym-on-challenge-user"

    def run(self, o: AnonymityOracles, rng) -> int:
        u0, _, sp, nym, _ = _lor_setup(o)
        n0, _ = o.nym(sp, u0)
        return 0 if n0.nym == nym.nym else 1


@dataclass(frozen=True)
class CorruptChallengeUser:
    name: str = "corrupt-challenge-user"

    def run(self, o: AnonymityOracles, rng) -> int:
        u0, _, sp, nym, _ = _lor_setup(o)
        user = o.corrupt_u(u0)
        return 0 if sp**user.secret == nym.nym else 1


@dataclass(frozen=True)
class CorruptChallengeSP:
    name: str = "corrupt-challenge-sp"

    def run(self, o: AnonymityOracles, rng) -> int:
        u0, _, sp, nym, _ = _lor_setup(o)
        spsk = o.corrupt_sp(sp)
        return 0 if u0**spsk == nym.nym else 1


@dataclass(frozen=True)
class InconsistentLoR:
    name: str = "inconsistent-lor"

    def run(self, o: AnonymityOracles, rng) -> int:
        u0, _, sp, nym, _ = _lor_setup(o)
        nym2, _ = o.lor(u0, o.gen_u(), sp)
        return 0 if nym2.nym == nym.nym else 1


@dataclass(frozen=True)
class CorruptUserNymElsewhere:
    """Breaks only the last constraint: an oracle pseudonym for a corrupted user."""

    name: str = "corrupt-user-nym-elsewhere"

    def run(self, o: AnonymityOracles, rng) -> int:
        _lor_setup(o)
        u = o.gen_u()
        o.corrupt_u(u)
        o.nym(o.gen_sp(), u)
        return rng.randrange(2)


def constraint_violators() -> list:
    return [NymOnChallengeUser(), CorruptChallengeUser(), CorruptChallengeSP(), InconsistentLoR()]
