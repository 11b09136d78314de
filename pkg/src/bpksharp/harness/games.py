"""Non-frameability and anonymity experiments with their oracles.

Sets are keyed by canonical element bytes.  Oracles answer ``BOTTOM`` for
unknown keys instead of raising.  Adversaries only ever see a handle
object carrying ``pp``, ``mpk`` and the oracle callables of their
experiment.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

from .. import scheme
from ..algebra import SeededRng, SerializationError, encode_g1
from ..scheme import NymProof, PublicParams


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Bottom, ())


#: The failure symbol returned by oracles.
BOTTOM = _Bottom()


@dataclass(frozen=True)
class OracleCall:
    oracle: str
    args: tuple[bytes, ...]
    result: bytes | None  # None when the oracle returned BOTTOM


@dataclass
class GameState:
    N: set[tuple[bytes, bytes]] = field(default_factory=set)
    KP_u: dict[bytes, scheme.UserKeyPair] = field(default_factory=dict)
    PK_u: set[bytes] = field(default_factory=set)
    SK_u: set[int] = field(default_factory=set)
    PK_sp: set[bytes] = field(default_factory=set)
    SK_sp: set[int] = field(default_factory=set)
    KP_sp: dict[bytes, scheme.SPKeyPair] = field(default_factory=dict)
    C_u: set[bytes] = field(default_factory=set)
    C_sp: set[bytes] = field(default_factory=set)
    LR: set[tuple[frozenset[bytes], bytes]] = field(default_factory=set)
    calls: list[OracleCall] = field(default_factory=list)


@dataclass(frozen=True)
class NonFrameabilityOracles:
    pp: PublicParams
    mpk: scheme.MasterPublicKey
    gen_u: Callable[[], Any]
    gen_sp: Callable[[], Any]
    nym: Callable[[Any, Any], Any]
    corrupt_u: Callable[[Any], Any]


@dataclass(frozen=True)
class AnonymityOracles(NonFrameabilityOracles):
    lor: Callable[[Any, Any, Any], Any]
    corrupt_sp: Callable[[Any], Any]


class NonFrameabilityAdversary(Protocol):
    name: str

    def run(self, oracles: NonFrameabilityOracles, rng: SeededRng) -> tuple[Any, Any, Any]: ...


class AnonymityAdversary(Protocol):
    name: str

    def run(self, oracles: AnonymityOracles, rng: SeededRng) -> int: ...


def _key(P) -> bytes | None:
    try:
        return encode_g1(P)
    except (SerializationError, AttributeError, TypeError):
        return None


class _Experiment:
    def __init__(self, seed: bytes | int | str = b"", pp: PublicParams | None = None) -> None:
        self._rng = SeededRng(seed)
        self._adv_rng = SeededRng(hashlib.sha256(b"adversary" + self._rng.randbytes(32)).digest())
        self.pp = pp if pp is not None else scheme.setup(seed=self._rng.randbytes(32))
        keys = scheme.keygen(self.pp, self._rng)
        self._msk = keys.msk
        self.mpk = keys.mpk
        self.state = GameState()
        self.verdict: str | None = None

    def _log(self, oracle: str, args: tuple[bytes | None, ...], result: bytes | None) -> None:
        self.state.calls.append(OracleCall(oracle, tuple(a or b"" for a in args), result))

    # -- oracles ---------------------------------------------------------------

    def oracle_gen_u(self):
        s = self.state
        user = scheme.keygen_user(self.pp, self._msk, self._rng)
        upk = encode_g1(user.upk)
        s.PK_u.add(upk)
        s.SK_u.add(user.secret)
        s.KP_u[upk] = user
        self._log("gen_u", (), upk)
        return user.upk

    def oracle_gen_sp(self):
        s = self.state
        sp = scheme.keygen_sp(self.pp, self._msk, self._rng)
        sppk = encode_g1(sp.sppk)
        s.PK_sp.add(sppk)
        s.SK_sp.add(sp.spsk)
        s.KP_sp[sppk] = sp
        self._log("gen_sp", (), sppk)
        return sp.sppk

    def oracle_nym(self, sppk, upk):
        s = self.state
        k_sp, k_u = _key(sppk), _key(upk)
        if k_sp not in s.PK_sp or k_u not in s.PK_u:
            self._log("nym", (k_sp, k_u), None)
            return BOTTOM
        nym, proof = scheme.nymgen_user(self.pp, s.KP_u[k_u], self.mpk, sppk, self._rng)
        s.N.add((k_u, k_sp))
        self._log("nym", (k_sp, k_u), encode_g1(nym.nym))
        return nym, proof

    def oracle_corrupt_u(self, upk):
        s = self.state
        k_u = _key(upk)
        if k_u not in s.PK_u:
            self._log("corrupt_u", (k_u,), None)
            return BOTTOM
        s.C_u.add(k_u)
        self._log("corrupt_u", (k_u,), k_u)
        return s.KP_u[k_u]

    def oracle_lor(self, upk0, upk1, sppk):
        s = self.state
        k0, k1, k_sp = _key(upk0), _key(upk1), _key(sppk)
        if k0 not in s.PK_u or k1 not in s.PK_u or k_sp not in s.PK_sp:
            self._log("lor", (k0, k1, k_sp), None)
            return BOTTOM
        outputs = [scheme.nymgen_user(self.pp, s.KP_u[k], self.mpk, sppk, self._rng) for k in (k0, k1)]
        s.LR.add((frozenset((k0, k1)), k_sp))
        nym, proof = outputs[self.b]
        self._log("lor", (k0, k1, k_sp), encode_g1(nym.nym))
        return nym, proof

    def oracle_corrupt_sp(self, sppk):
        s = self.state
        k_sp = _key(sppk)
        if k_sp not in s.PK_sp:
            self._log("corrupt_sp", (k_sp,), None)
            return BOTTOM
        s.C_sp.add(k_sp)
        self._log("corrupt_sp", (k_sp,), k_sp)
        return s.KP_sp[k_sp].spsk


class NonFrameabilityGame(_Experiment):
    """The adversary wins by outputting a valid pseudonym that opens to no
    registered user, or to an honest user who never produced it."""

    def oracles(self) -> NonFrameabilityOracles:
        return NonFrameabilityOracles(
            pp=self.pp,
            mpk=self.mpk,
            gen_u=lambda: self.oracle_gen_u(),
            gen_sp=lambda: self.oracle_gen_sp(),
            nym=lambda sppk, upk: self.oracle_nym(sppk, upk),
            corrupt_u=lambda upk: self.oracle_corrupt_u(upk),
        )

    def run(self, adversary: NonFrameabilityAdversary) -> int:
        sppk, nym, proof = adversary.run(self.oracles(), self._adv_rng)
        self.verdict = self.judge(sppk, nym, proof)
        return int(self.verdict.startswith("win"))

    def judge(self, sppk, nym, proof: NymProof | bytes) -> str:
        if not scheme.nymvf(self.pp, self.mpk, sppk, nym, proof):
            return "rejected"
        upk = encode_g1(scheme.open_proof(proof, self._msk))
        if upk not in self.state.KP_u:
            return "win: opens to a non-existing user"
        if (upk, encode_g1(sppk)) in self.state.N:
            return "lose: pseudonym came from the nym oracle (c)"
        if upk in self.state.C_u:
            return "lose: user was corrupted (d)"
        return "win: framed an honest user"


class AnonymityGame(_Experiment):
    """Left-or-right game: guess which of two users the LoR oracle answered for."""

    def __init__(self, seed: bytes | int | str = b"", pp: PublicParams | None = None, *, b: int | None = None, check_constraints: bool = True) -> None:
        super().__init__(seed, pp)
        self.b = self._rng.randrange(2) if b is None else b
        self.check_constraints = check_constraints

    def oracles(self) -> AnonymityOracles:
        return AnonymityOracles(
            pp=self.pp,
            mpk=self.mpk,
            gen_u=lambda: self.oracle_gen_u(),
            gen_sp=lambda: self.oracle_gen_sp(),
            nym=lambda sppk, upk: self.oracle_nym(sppk, upk),
            corrupt_u=lambda upk: self.oracle_corrupt_u(upk),
            lor=lambda upk0, upk1, sppk: self.oracle_lor(upk0, upk1, sppk),
            corrupt_sp=lambda sppk: self.oracle_corrupt_sp(sppk),
        )

    def run(self, adversary: AnonymityAdversary) -> int:
        guess = adversary.run(self.oracles(), self._adv_rng)
        self.verdict = self.judge(guess)
        return int(self.verdict.startswith("win"))

    def violated_constraint(self) -> str | None:
        s = self.state
        by_sp: dict[bytes, list[frozenset[bytes]]] = {}
        for pair, sp in s.LR:
            by_sp.setdefault(sp, []).append(pair)
        for pairs in by_sp.values():
            for i, a in enumerate(pairs):
                for a2 in pairs[i + 1 :]:
                    if a != a2 and a & a2:
                        return "(b) inconsistent LoR queries for one service provider"
        for upk, sp in s.N:
            if any(upk in pair and sp == lr_sp for pair, lr_sp in s.LR):
                return "(c) nym oracle queried for a user and SP also used in LoR"
        for pair, sp in s.LR:
            if pair & s.C_u or sp in s.C_sp:
                return "(d) LoR query involves a corrupted user or SP"
        for upk, sp in s.N:
            if upk in s.C_u or sp in s.C_sp:
                return "(e) nym oracle query involves a corrupted user or SP"
        return None

    def judge(self, guess: int) -> str:
        if self.check_constraints:
            problem = self.violated_constraint()
            if problem:
                return "lose: constraint " + problem
        return "win: guessed b" if guess == self.b else "lose: wrong guess"


def run_non_frameability(adversary: NonFrameabilityAdversary, seed: bytes | int | str = b"", pp: PublicParams | None = None) -> int:
    return NonFrameabilityGame(seed, pp).run(adversary)


def run_anonymity(adversary: AnonymityAdversary, seed: bytes | int | str = b"", pp: PublicParams | None = None) -> int:
    return AnonymityGame(seed, pp).run(adversary)


@dataclass
class TrialStats:
    adversary: str
    experiment: str
    trials: int = 0
    wins: int = 0
    verdicts: Counter = field(default_factory=Counter)

    @property
    def rate(self) -> float:
        return self.wins / self.trials if self.trials else 0.0


def trial_seed(seed: bytes | str | int, index: int) -> bytes:
    return hashlib.sha256(f"{seed!r}/{index}".encode()).digest()


def run_trials(
    experiment: str,
    adversary,
    trials: int,
    seed: bytes | str | int = b"",
    *,
    share_setup: bool = True,
) -> TrialStats:
    """Run ``trials`` independent experiments.

    With ``share_setup`` one parameter set (derived from ``seed``) serves every
    trial; master keys, users, SPs and the hidden bit stay fresh per trial.
    """
    game_cls = {"non-frameability": NonFrameabilityGame, "anonymity": AnonymityGame}[experiment]
    pp = scheme.setup(seed=trial_seed(seed, -1)) if share_setup else None
    stats = TrialStats(adversary=adversary.name, experiment=experiment)
    for i in range(trials):
        game = game_cls(trial_seed(seed, i), pp)
        stats.wins += game.run(adversary)
        stats.trials += 1
        stats.verdicts[game.verdict] += 1
    return stats
