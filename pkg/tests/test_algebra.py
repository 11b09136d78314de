import hashlib
import struct

import py_arkworks_bls12381 as ark
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from py_ecc.bls.hash_to_curve import hash_to_G1
from py_ecc.bls.point_compression import modular_squareroot_in_FQ2
from py_ecc.fields import optimized_bls12_381_FQ as FQ
from py_ecc.fields import optimized_bls12_381_FQ2 as FQ2
from py_ecc.optimized_bls12_381 import curve_order, is_inf, multiply, normalize

from bpksharp.algebra import (
    FIELD_MODULUS,
    G1_BYTES,
    G2_BYTES,
    GT_BYTES,
    HASH_TO_CURVE_DST,
    ORDER,
    GroupParams,
    SeededRng,
    SerializationError,
    decode_g1,
    decode_g2,
    decode_gt,
    decode_scalar,
    derive_group_params,
    encode_g1,
    encode_g2,
    encode_gt,
    encode_scalar,
    g1_generator,
    g1_identity,
    g2_generator,
    g2_identity,
    gt_identity,
    hash_to_g1,
    hash_to_scalar,
    pairing,
    random_scalar,
)

scalars = st.integers(min_value=1, max_value=ORDER - 1)
G, G_HAT = g1_generator(), g2_generator()


def test_curve_constants_match_reference_library():
    assert ORDER == curve_order
    assert FIELD_MODULUS == FQ.field_modulus


# -- pairing ---------------------------------------------------------------------


def test_pairing_with_identity_is_gt_identity():
    assert pairing(g1_identity(), G_HAT) == gt_identity()
    assert pairing(G, g2_identity()) == gt_identity()


def test_pairing_is_non_degenerate():
    assert pairing(G, G_HAT) != gt_identity()


def test_pairing_doubling():
    assert pairing(G**2, G_HAT) == pairing(G, G_HAT) ** 2


def test_pairing_bilinear_random_exponents(rng):
    base = pairing(G, G_HAT)
    for _ in range(20):
        a, b = random_scalar(rng), random_scalar(rng)
        assert pairing(G**a, G_HAT**b) == base ** (a * b % ORDER)


@settings(max_examples=25, deadline=None)
@given(scalars, scalars, scalars)
def test_pairing_moves_exponent_between_arguments(a, p, q):
    P, Q = G**p, G_HAT**q
    assert pairing(P**a, Q) == pairing(P, Q**a)


# -- hashing ---------------------------------------------------------------------


def _oracle_hash_to_scalar(tag: bytes, transcript: bytes) -> int:
    digest = hashlib.sha512(struct.pack(">I", len(tag)) + tag + transcript).digest()
    return int.from_bytes(digest, "big") % curve_order


def test_hash_to_scalar_matches_independent_computation():
    assert hash_to_scalar(b"tag", b"abc") == _oracle_hash_to_scalar(b"tag", b"abc")
    assert hash_to_scalar(b"tag", b"abc") == 0x190B05B40B2E6B65D93BC5B972220A5B72F25F2BBFAFB559F649CB7FB75A6182


def test_hash_to_scalar_deterministic_and_in_range():
    a = hash_to_scalar(b"t", b"x" * 100)
    assert a == hash_to_scalar(b"t", b"x" * 100)
    assert 0 <= a < ORDER


def test_hash_to_scalar_separates_tags():
    assert hash_to_scalar(b"tag-1", b"m") != hash_to_scalar(b"tag-2", b"m")


def test_hash_to_scalar_tag_boundary_is_unambiguous():
    assert hash_to_scalar(b"ab", b"c") != hash_to_scalar(b"a", b"bc")


def test_hash_to_scalar_requires_tag():
    with pytest.raises(ValueError):
        hash_to_scalar(b"", b"x")


def test_hash_to_g1_matches_reference_hash_to_curve():
    P = hash_to_g1(b"hello")
    ref = normalize(hash_to_G1(b"hello", HASH_TO_CURVE_DST, hashlib.sha256))
    x, y = int(ref[0]), int(ref[1])
    raw = P.to_binary(compressed=False)
    assert int.from_bytes(raw[1 : 1 + G1_BYTES], "big") == x
    assert int.from_bytes(raw[1 + G1_BYTES :], "big") == y


def test_hash_to_g1_dst_separates():
    assert hash_to_g1(b"m") != hash_to_g1(b"m", b"OTHER-DST")


# -- encodings -------------------------------------------------------------------


def test_generator_encodings_are_standard():
    assert encode_g1(G).hex().startswith("97f1d3a73197d794")
    assert encode_g2(G_HAT).hex().startswith("93e02b6052719f60")
    assert encode_g1(g1_identity()) == bytes([0xC0]) + bytes(47)
    assert encode_g2(g2_identity()) == bytes([0xC0]) + bytes(95)


def test_encodings_match_arkworks(rng):
    for _ in range(50):
        k = random_scalar(rng)
        ark_k = ark.Scalar.from_le_bytes(encode_scalar(k))
        assert encode_g1(G**k) == bytes((ark.G1Point() * ark_k).to_compressed_bytes())
        assert encode_g2(G_HAT**k) == bytes((ark.G2Point() * ark_k).to_compressed_bytes())


def test_arkworks_encodings_decode(rng):
    for _ in range(20):
        k = random_scalar(rng)
        ark_k = ark.Scalar.from_le_bytes(encode_scalar(k))
        assert decode_g1(bytes((ark.G1Point() * ark_k).to_compressed_bytes())) == G**k
        assert decode_g2(bytes((ark.G2Point() * ark_k).to_compressed_bytes())) == G_HAT**k


def test_round_trip_1000_samples_each_kind():
    rng = SeededRng("round-trip")
    base = pairing(G, G_HAT)
    for _ in range(1000):
        k = random_scalar(rng)
        assert decode_scalar(encode_scalar(k)) == k
        P, Q, T = G**k, G_HAT**k, base**k
        assert decode_g1(encode_g1(P)) == P
        assert decode_g2(encode_g2(Q)) == Q
        assert decode_gt(encode_gt(T)) == T


def test_identity_round_trips():
    assert decode_g1(encode_g1(g1_identity())) == g1_identity()
    assert decode_g2(encode_g2(g2_identity())) == g2_identity()
    assert decode_gt(encode_gt(gt_identity())) == gt_identity()


def test_encoding_sizes():
    assert len(encode_g1(G)) == G1_BYTES == 48
    assert len(encode_g2(G_HAT)) == G2_BYTES == 96
    assert len(encode_gt(pairing(G, G_HAT))) == GT_BYTES == 576
    assert len(encode_scalar(1)) == 32


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=ORDER - 1))
def test_scalar_round_trip_property(k):
    assert decode_scalar(encode_scalar(k)) == k


def test_scalar_encoding_is_little_endian():
    assert encode_scalar(1) == b"\x01" + bytes(31)


@pytest.mark.parametrize("data", [ORDER.to_bytes(32, "little"), (2**256 - 1).to_bytes(32, "little"), b"\x01" * 31, b""])
def test_scalar_rejects_unreduced_or_wrong_length(data):
    with pytest.raises(SerializationError):
        decode_scalar(data)


def test_scalar_encode_rejects_out_of_range():
    with pytest.raises(SerializationError):
        encode_scalar(ORDER)
    with pytest.raises(SerializationError):
        encode_scalar(-1)


# -- crafted invalid encodings ----------------------------------------------------


def _compressed_g1(x: int, y: int) -> bytes:
    out = bytearray(x.to_bytes(48, "big"))
    out[0] |= 0x80 | (0x20 if y > (FIELD_MODULUS - 1) // 2 else 0)
    return bytes(out)


def _find_g1_x(start: int, on_curve: bool) -> tuple[int, int | None]:
    x = start
    while True:
        rhs = FQ(x) ** 3 + FQ(4)
        y = rhs ** ((FIELD_MODULUS + 1) // 4)
        if (y * y == rhs) == on_curve:
            return x, (int(y) if on_curve else None)
        x += 1


def test_g1_rejects_off_curve_x():
    x, _ = _find_g1_x(5, on_curve=False)
    data = bytearray(x.to_bytes(48, "big"))
    data[0] |= 0x80
    with pytest.raises(SerializationError, match="curve"):
        decode_g1(bytes(data))


def test_g1_rejects_point_outside_subgroup():
    x, y = _find_g1_x(1, on_curve=True)
    point = (FQ(x), FQ(y), FQ(1))
    assert not is_inf(multiply(point, curve_order))  # independent check: not of order r
    with pytest.raises(SerializationError, match="subgroup"):
        decode_g1(_compressed_g1(x, y))


def test_g1_rejects_many_random_on_curve_points():
    rejected = 0
    x = 1000
    for _ in range(10):
        x, y = _find_g1_x(x + 1, on_curve=True)
        with pytest.raises(SerializationError):
            decode_g1(_compressed_g1(x, y))
        rejected += 1
    assert rejected == 10


def test_g1_rejects_flag_and_range_errors():
    good = encode_g1(G**3)
    with pytest.raises(SerializationError, match="compression"):
        decode_g1(bytes([good[0] & 0x7F]) + good[1:])
    with pytest.raises(SerializationError, match="identity"):
        decode_g1(bytes([0xC0]) + bytes(46) + b"\x01")
    with pytest.raises(SerializationError, match="identity"):
        decode_g1(bytes([0xE0]) + bytes(47))
    unreduced = bytearray(FIELD_MODULUS.to_bytes(48, "big"))
    unreduced[0] |= 0x80
    with pytest.raises(SerializationError, match="reduced"):
        decode_g1(bytes(unreduced))
    with pytest.raises(SerializationError):
        decode_g1(good[:-1])


def test_g1_sign_bit_selects_negation():
    P = G**11
    enc = bytearray(encode_g1(P))
    enc[0] ^= 0x20
    assert decode_g1(bytes(enc)) == P.inverse()


def _compressed_g2(x: FQ2, y: FQ2) -> bytes:
    x0, x1 = (int(c) for c in x.coeffs)
    y0, y1 = (int(c) for c in y.coeffs)
    half = (FIELD_MODULUS - 1) // 2
    larger = y1 > half if y1 else y0 > half
    out = bytearray(x1.to_bytes(48, "big") + x0.to_bytes(48, "big"))
    out[0] |= 0x80 | (0x20 if larger else 0)
    return bytes(out)


def _find_g2(start: int, on_curve: bool):
    b2 = FQ2([4, 4])
    i = start
    while True:
        x = FQ2([i, 1])
        y = modular_squareroot_in_FQ2(x**3 + b2)
        if (y is not None) == on_curve:
            return x, y
        i += 1


def test_g2_rejects_off_curve_x():
    x, _ = _find_g2(1, on_curve=False)
    x0, x1 = (int(c) for c in x.coeffs)
    data = bytearray(x1.to_bytes(48, "big") + x0.to_bytes(48, "big"))
    data[0] |= 0x80
    with pytest.raises(SerializationError, match="curve"):
        decode_g2(bytes(data))


def test_g2_rejects_point_outside_subgroup():
    x, y = _find_g2(1, on_curve=True)
    assert not is_inf(multiply((x, y, FQ2.one()), curve_order))
    with pytest.raises(SerializationError, match="subgroup"):
        decode_g2(_compressed_g2(x, y))


def test_g2_rejects_unreduced_and_malformed():
    enc = encode_g2(G_HAT**5)
    bad = bytearray(enc)
    bad[48:] = FIELD_MODULUS.to_bytes(48, "big")
    with pytest.raises(SerializationError, match="reduced"):
        decode_g2(bytes(bad))
    with pytest.raises(SerializationError, match="compression"):
        decode_g2(bytes([enc[0] & 0x7F]) + enc[1:])
    with pytest.raises(SerializationError):
        decode_g2(enc + b"\x00")


def test_g2_sign_bit_selects_negation():
    Q = G_HAT**13
    enc = bytearray(encode_g2(Q))
    enc[0] ^= 0x20
    assert decode_g2(bytes(enc)) == Q.inverse()


def test_gt_rejects_element_outside_subgroup(rng):
    data = b"".join(rng.randrange(FIELD_MODULUS).to_bytes(48, "big") for _ in range(12))
    with pytest.raises(SerializationError):
        decode_gt(data)


def test_gt_rejects_unreduced_coefficient_and_length():
    enc = bytearray(encode_gt(pairing(G, G_HAT)))
    enc[:48] = FIELD_MODULUS.to_bytes(48, "big")
    with pytest.raises(SerializationError, match="reduced"):
        decode_gt(bytes(enc))
    with pytest.raises(SerializationError):
        decode_gt(bytes(575))


def test_invalid_decode_keeps_stdout_clean(capfd):
    x, y = _find_g1_x(1, on_curve=True)
    with pytest.raises(SerializationError):
        decode_g1(_compressed_g1(x, y))
    assert capfd.readouterr().out == ""


# -- parameters and randomness ---------------------------------------------------


def test_group_params_derivation_is_deterministic():
    a, b = derive_group_params(b"seed"), derive_group_params(b"seed")
    assert a == b and a.digest == b.digest


def test_group_params_differ_across_seeds():
    a, b = derive_group_params(b"seed-a"), derive_group_params(b"seed-b")
    assert a.Y != b.Y and a.H != b.H and a.K != b.K


def test_group_params_bases_are_distinct_and_hash_derived():
    g = derive_group_params(b"s")
    assert len({encode_g1(g.Y), encode_g1(g.H), encode_g1(g.K)}) == 3
    assert g.H == hash_to_g1(b"bpk-sharp/v1/setup/H/s")


def test_group_params_reject_identity_bases():
    with pytest.raises(ValueError):
        GroupParams(G=G, G_hat=G_HAT, Y=g1_identity(), H=G, K=G)


def test_seeded_rng_reproducible():
    a, b = SeededRng("x"), SeededRng("x")
    assert [random_scalar(a) for _ in range(5)] == [random_scalar(b) for _ in range(5)]
    assert SeededRng("x").randbytes(16) != SeededRng("y").randbytes(16)


def test_seeded_rng_state_restores():
    r = SeededRng("s")
    r.randbytes(7)
    state = r.getstate()
    first = r.randbytes(40)
    r.setstate(state)
    assert r.randbytes(40) == first


def test_random_scalar_nonzero_and_in_range(rng):
    assert all(0 < random_scalar(rng) < ORDER for _ in range(200))
