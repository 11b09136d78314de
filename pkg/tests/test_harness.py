import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from bpksharp import nizk, scheme
from bpksharp.algebra import ORDER, encode_g1, g1_identity, random_scalar
from bpksharp.harness import (
    BOTTOM,
    AnonymityGame,
    NonFrameabilityGame,
    anonymity_battery,
    constraint_violators,
    non_frameability_battery,
    run_anonymity,
    run_non_frameability,
    run_trials,
)
from bpksharp.harness.adversaries import (
    PROOF_FIELDS,
    CoinFlip,
    CorruptUserNymElsewhere,
    field_tamperers,
    tamper,
)
from bpksharp.harness.games import AnonymityOracles, GameState, NonFrameabilityOracles, trial_seed
from bpksharp.primitives import elgamal_enc
from bpksharp.scheme import NymProof

EXPECTED_NF = {
    "honest-replay": "lose: pseudonym came from the nym oracle (c)",
    "corrupt-and-prove": "lose: user was corrupted (d)",
}


@pytest.mark.parametrize("adv", non_frameability_battery(), ids=lambda a: a.name)
def test_non_frameability_adversary_verdicts(adv, pp):
    stats = run_trials("non-frameability", adv, 5, seed=b"nf-" + adv.name.encode())
    assert stats.wins == 0
    assert set(stats.verdicts) == {EXPECTED_NF.get(adv.name, "rejected")}


@pytest.mark.parametrize("adv", field_tamperers(), ids=lambda a: a.name)
def test_each_proof_field_tamperer_rejected(adv):
    stats = run_trials("non-frameability", adv, 3, seed=adv.name)
    assert stats.wins == 0 and stats.verdicts == {"rejected": 3}


def test_tamper_changes_exactly_one_field(honest, rng):
    proof = honest[3]
    raw = proof.to_bytes()
    bounds = [0, 48, 96, 192, 240, 288, 336, 368, 400, 432, 464, 496, 528]
    for i, name in enumerate(PROOF_FIELDS):
        out = tamper(proof, name, rng).to_bytes()
        changed = [j for j, (a, b) in enumerate(zip(bounds, bounds[1:])) if raw[a:b] != out[a:b]]
        assert changed == [i]


def test_unknown_keys_give_bottom(pp):
    game = AnonymityGame(b"bottom", pp)
    stranger = pp.group.H ** 12345
    sp = game.oracle_gen_sp()
    u = game.oracle_gen_u()
    assert game.oracle_corrupt_u(stranger) is BOTTOM
    assert game.oracle_corrupt_sp(stranger) is BOTTOM
    assert game.oracle_nym(sp, stranger) is BOTTOM
    assert game.oracle_nym(stranger, u) is BOTTOM
    assert game.oracle_lor(u, stranger, sp) is BOTTOM
    assert game.oracle_corrupt_u("not a point") is BOTTOM
    s = game.state
    assert not (s.N or s.C_u or s.C_sp or s.LR)
    assert not BOTTOM and repr(BOTTOM) == "BOTTOM"


@pytest.mark.parametrize("b", [0, 1])
def test_lor_answers_for_selected_user(pp, b):
    game = AnonymityGame(b"lor", pp, b=b)
    users = [game.oracle_gen_u(), game.oracle_gen_u()]
    sp = game.oracle_gen_sp()
    nym, proof = game.oracle_lor(users[0], users[1], sp)
    assert scheme.nymvf(pp, game.mpk, sp, nym, proof)
    assert scheme.open_proof(proof, game._msk) == users[b]
    assert nym.nym == scheme.nymgen_sp(pp, game.state.KP_sp[encode_g1(sp)].spsk, game.mpk, users[b]).nym


def test_nym_oracle_records_pair_once(pp):
    game = NonFrameabilityGame(b"nym-once", pp)
    u, sp = game.oracle_gen_u(), game.oracle_gen_sp()
    game.oracle_nym(sp, u)
    game.oracle_nym(sp, u)
    assert game.state.N == {(encode_g1(u), encode_g1(sp))}
    assert [c.oracle for c in game.state.calls].count("nym") == 2


def test_handles_expose_no_master_secret():
    for cls in (NonFrameabilityOracles, AnonymityOracles):
        names = {f.name for f in dataclasses.fields(cls)}
        assert "msk" not in names and not any("open" in n for n in names)
    handle = NonFrameabilityGame(b"h").oracles()
    for f in dataclasses.fields(handle):
        assert not isinstance(getattr(handle, f.name), scheme.MasterSecretKey)
    with pytest.raises(dataclasses.FrozenInstanceError):
        handle.mpk = None


def test_violators_score_zero_with_constraints():
    letters = {
        "nym-on-challenge-user": "(c)",
        "corrupt-challenge-user": "(d)",
        "corrupt-challenge-sp": "(d)",
        "inconsistent-lor": "(b)",
    }
    for adv in constraint_violators():
        stats = run_trials("anonymity", adv, 6, seed=adv.name)
        assert stats.wins == 0
        (verdict,) = stats.verdicts
        assert verdict.startswith("lose: constraint " + letters[adv.name])


def test_violators_would_win_without_constraints(pp):
    for adv in constraint_violators():
        for i in range(4):
            game = AnonymityGame(trial_seed(adv.name, i), pp, check_constraints=False)
            assert game.run(adv) == 1, adv.name


def test_corrupt_user_with_nym_breaks_last_constraint(pp):
    game = AnonymityGame(b"e", pp)
    game.run(CorruptUserNymElsewhere())
    assert game.verdict.startswith("lose: constraint (e)")


def test_honest_anonymity_run_passes_constraints(pp):
    game = AnonymityGame(b"clean", pp)
    game.run(CoinFlip())
    assert game.violated_constraint() is None
    assert game.verdict in ("win: guessed b", "lose: wrong guess")


def test_run_helpers_and_trials_are_deterministic(pp):
    battery = non_frameability_battery()
    assert run_non_frameability(battery[0], b"x", pp) == 0
    assert run_anonymity(CoinFlip(), b"x", pp) in (0, 1)
    a = run_trials("anonymity", anonymity_battery()[1], 8, seed="det")
    b = run_trials("anonymity", anonymity_battery()[1], 8, seed="det")
    assert (a.wins, a.verdicts) == (b.wins, b.verdicts)
    fresh = run_trials("non-frameability", battery[2], 2, seed="fresh", share_setup=False)
    assert fresh.trials == 2 and fresh.wins == 0


def test_hidden_bit_is_balanced(pp):
    bits = [AnonymityGame(trial_seed("bits", i), pp).b for i in range(200)]
    assert 70 < sum(bits) < 130


# -- bookkeeping replay --------------------------------------------------------------


def reference_sets(calls):
    """Rebuild N, LR, C_u and C_sp from the call log alone."""
    ref = GameState()
    for c in calls:
        if c.result is None:
            continue
        if c.oracle == "nym":
            ref.N.add((c.args[1], c.args[0]))
        elif c.oracle == "corrupt_u":
            ref.C_u.add(c.args[0])
        elif c.oracle == "corrupt_sp":
            ref.C_sp.add(c.args[0])
        elif c.oracle == "lor":
            ref.LR.add((frozenset(c.args[:2]), c.args[2]))
    return ref


OPS = st.lists(
    st.tuples(st.sampled_from(["nym", "corrupt_u", "corrupt_sp", "lor", "bogus"]), st.integers(0, 5), st.integers(0, 5), st.integers(0, 2)),
    max_size=8,
)


@settings(max_examples=15, deadline=None)
@given(ops=OPS)
def test_bookkeeping_matches_reference_tracker(pp, ops):
    game = AnonymityGame(b"replay", pp)
    users = [game.oracle_gen_u() for _ in range(3)]
    sps = [game.oracle_gen_sp() for _ in range(2)]
    stranger = pp.group.H ** 7
    pick_u = lambda i: users[i] if i < 3 else stranger  # noqa: E731
    pick_sp = lambda i: sps[i] if i < 2 else stranger  # noqa: E731
    for op, i, j, k in ops:
        if op == "nym":
            game.oracle_nym(pick_sp(k), pick_u(i))
        elif op == "corrupt_u":
            game.oracle_corrupt_u(pick_u(i))
        elif op == "corrupt_sp":
            game.oracle_corrupt_sp(pick_sp(k))
        elif op == "lor":
            game.oracle_lor(pick_u(i), pick_u(j), pick_sp(k))
        else:
            game.oracle_nym(stranger, stranger)
    ref = reference_sets(game.state.calls)
    s = game.state
    assert (s.N, s.LR, s.C_u, s.C_sp) == (ref.N, ref.LR, ref.C_u, ref.C_sp)
    assert s.C_u <= set(s.KP_u) and s.C_sp <= set(s.KP_sp)
    for pair, sp in s.LR:
        assert pair <= s.PK_u and sp in s.PK_sp


# -- white-box game hops ---------------------------------------------------------------


def _proof_escrowing(pp, master, user, sppk, escrowed, rng):
    g = pp.group
    r, s, alpha, beta = (random_scalar(rng) for _ in range(4))
    sig = user.signature
    st_ = nizk.NymStatement(
        g,
        master.mpk.sig,
        master.mpk.enc,
        sppk,
        sppk**user.secret,
        elgamal_enc(master.mpk.enc, escrowed, r, g),
        sig.R_hat,
        sig.S ** pow(alpha, -1, ORDER),
        sig.T ** pow(beta, -1, ORDER),
        user.upk ** pow(s, -1, ORDER),
    )
    w = nizk.NymWitness(r=r, s=s, usk=user.secret, alpha=alpha, beta=beta)
    return st_, w, nizk.prove_unchecked(st_, w, rng)


def _as_proof(st_, transcript):
    return NymProof(st_.c, st_.R_hat, st_.S, st_.T, st_.upk_blinded, transcript)


def test_encrypt_zero_variant_is_detected(pp, master, users, sps, rng):
    user, sppk = users[0], sps[0].sppk
    st_, w, transcript = _proof_escrowing(pp, master, user, sppk, g1_identity(), rng)
    assert not nizk.witness_satisfies(st_, w)
    assert not scheme.nymvf(pp, master.mpk, sppk, st_.nym, _as_proof(st_, transcript))
    with pytest.raises(nizk.WitnessMismatchError):
        nizk.prove(st_, w, rng)


def test_escrow_of_real_key_is_the_only_accepting_choice(pp, master, users, sps, rng):
    user, sppk = users[1], sps[1].sppk
    st_, _, transcript = _proof_escrowing(pp, master, user, sppk, user.upk, rng)
    assert scheme.nymvf(pp, master.mpk, sppk, st_.nym, _as_proof(st_, transcript))
    st_, _, transcript = _proof_escrowing(pp, master, user, sppk, users[2].upk, rng)
    assert not scheme.nymvf(pp, master.mpk, sppk, st_.nym, _as_proof(st_, transcript))
