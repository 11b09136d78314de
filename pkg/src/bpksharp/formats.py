"""JSON envelopes for parameters, keys, pseudonyms and proofs.

Every file is a JSON object ``{"version", "role", ...}``; group elements and
scalars are base64 of their canonical bytes.  Envelopes holding secret
material carry ``"secret": true`` and should be stored with mode 0600.
"""

from __future__ import annotations

import base64
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .algebra import (
    G1Point,
    GroupParams,
    SerializationError,
    decode_g1,
    decode_g2,
    decode_scalar,
    derive_group_params,
    encode_g1,
    encode_g2,
    encode_scalar,
)
from .primitives import GrothSignature
from .scheme import (
    VERSION,
    MasterKeyPair,
    MasterPublicKey,
    MasterSecretKey,
    NymProof,
    PublicParams,
    Pseudonym,
    SPKeyPair,
    UserKeyPair,
    sppk_digest,
)


class FormatError(ValueError):
    """File content is not a valid envelope of the expected role."""


@dataclass(frozen=True)
class UserPublicKey:
    upk: G1Point


@dataclass(frozen=True)
class SPPublicKey:
    sppk: G1Point


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def unb64(text: str) -> bytes:
    try:
        return base64.b64decode(text.encode("ascii"), validate=True)
    except (ValueError, AttributeError) as exc:
        raise FormatError(f"invalid base64: {exc}") from exc


def _g1(v: G1Point) -> str:
    return b64(encode_g1(v))


def _k(v: int) -> str:
    return b64(encode_scalar(v))


def to_envelope(obj: Any) -> dict:
    """Encode a scheme object as a JSON-ready dict."""
    if isinstance(obj, PublicParams):
        g = obj.group
        body = {
            "role": "public-params",
            "security_level": obj.security_level,
            "seed": b64(obj.seed),
            "G": _g1(g.G),
            "G_hat": b64(encode_g2(g.G_hat)),
            "Y": _g1(g.Y),
            "H": _g1(g.H),
            "K": _g1(g.K),
        }
    elif isinstance(obj, MasterKeyPair):
        body = {
            "role": "master-secret",
            "secret": True,
            "msk_sig": _k(obj.msk.sig),
            "msk_enc": _k(obj.msk.enc),
            "mpk_sig": b64(encode_g2(obj.mpk.sig)),
            "mpk_enc": _g1(obj.mpk.enc),
        }
    elif isinstance(obj, MasterPublicKey):
        body = {"role": "master-public", "mpk_sig": b64(encode_g2(obj.sig)), "mpk_enc": _g1(obj.enc)}
    elif isinstance(obj, UserKeyPair):
        sig = obj.signature
        body = {
            "role": "user-secret",
            "secret": True,
            "usk": _k(obj.secret),
            "sigma": {"R_hat": b64(encode_g2(sig.R_hat)), "S": _g1(sig.S), "T": _g1(sig.T)},
            "upk": _g1(obj.upk),
        }
    elif isinstance(obj, UserPublicKey):
        body = {"role": "user-public", "upk": _g1(obj.upk)}
    elif isinstance(obj, SPKeyPair):
        body = {"role": "sp-secret", "secret": True, "spsk": _k(obj.spsk), "sppk": _g1(obj.sppk)}
    elif isinstance(obj, SPPublicKey):
        body = {"role": "sp-public", "sppk": _g1(obj.sppk)}
    elif isinstance(obj, Pseudonym):
        body = {"role": "pseudonym", "nym": _g1(obj.nym), "sppk_digest": obj.sppk_digest.hex()}
    elif isinstance(obj, NymProof):
        body = {"role": "nym-proof", "proof": b64(obj.to_bytes())}
    else:
        raise TypeError(f"no envelope for {type(obj).__name__}")
    return {"version": VERSION, **body}


def from_envelope(env: dict, role: str | tuple[str, ...] | None = None) -> Any:
    """Decode an envelope; ``role`` restricts the accepted roles."""
    if not isinstance(env, dict):
        raise FormatError("envelope must be a JSON object")
    if env.get("version") != VERSION:
        raise FormatError(f"unsupported envelope version {env.get('version')!r}")
    kind = env.get("role")
    if role is not None and kind not in ((role,) if isinstance(role, str) else role):
        raise FormatError(f"expected role {role!r}, got {kind!r}")
    try:
        return _DECODERS[kind](env)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"unknown role or missing field: {exc}") from exc
    except SerializationError as exc:
        raise FormatError(str(exc)) from exc


def _g1f(env: dict, name: str) -> G1Point:
    return decode_g1(unb64(env[name]))


def _kf(env: dict, name: str) -> int:
    return decode_scalar(unb64(env[name]))


def _params(env: dict) -> PublicParams:
    seed = unb64(env["seed"])
    group = GroupParams(
        G=_g1f(env, "G"),
        G_hat=decode_g2(unb64(env["G_hat"])),
        Y=_g1f(env, "Y"),
        H=_g1f(env, "H"),
        K=_g1f(env, "K"),
    )
    if group != derive_group_params(seed):
        raise FormatError("group elements do not match the recorded seed")
    return PublicParams(group=group, seed=seed, security_level=int(env["security_level"]))


def _master(env: dict) -> MasterKeyPair:
    return MasterKeyPair(
        MasterSecretKey(_kf(env, "msk_sig"), _kf(env, "msk_enc")),
        MasterPublicKey(decode_g2(unb64(env["mpk_sig"])), _g1f(env, "mpk_enc")),
    )


def _user(env: dict) -> UserKeyPair:
    sig = env["sigma"]
    return UserKeyPair(
        secret=_kf(env, "usk"),
        signature=GrothSignature(decode_g2(unb64(sig["R_hat"])), _g1f(sig, "S"), _g1f(sig, "T")),
        upk=_g1f(env, "upk"),
    )


def _pseudonym(env: dict) -> Pseudonym:
    try:
        digest = bytes.fromhex(env["sppk_digest"])
    except ValueError as exc:
        raise FormatError("invalid sppk digest") from exc
    return Pseudonym(_g1f(env, "nym"), digest)


_DECODERS = {
    "public-params": _params,
    "master-secret": _master,
    "master-public": lambda env: MasterPublicKey(decode_g2(unb64(env["mpk_sig"])), _g1f(env, "mpk_enc")),
    "user-secret": _user,
    "user-public": lambda env: UserPublicKey(_g1f(env, "upk")),
    "sp-secret": lambda env: SPKeyPair(_kf(env, "spsk"), _g1f(env, "sppk")),
    "sp-public": lambda env: SPPublicKey(_g1f(env, "sppk")),
    "pseudonym": _pseudonym,
    "nym-proof": lambda env: NymProof.from_bytes(unb64(env["proof"])),
}


def dumps(obj: Any) -> str:
    return json.dumps(to_envelope(obj), indent=2, sort_keys=True) + "\n"


def loads(text: str, role: str | tuple[str, ...] | None = None) -> Any:
    try:
        env = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    return from_envelope(env, role)


def write(path: str | os.PathLike, obj: Any) -> None:
    path = Path(path)
    text = dumps(obj)
    if to_envelope(obj).get("secret"):
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
    else:
        path.write_text(text)


def read(path: str | os.PathLike, role: str | tuple[str, ...] | None = None) -> Any:
    return loads(Path(path).read_text(), role)


def public_part(obj: Any) -> Any:
    """Strip secrets: master/user/SP key pairs become their public counterparts."""
    if isinstance(obj, MasterKeyPair):
        return obj.mpk
    if isinstance(obj, UserKeyPair):
        return UserPublicKey(obj.upk)
    if isinstance(obj, SPKeyPair):
        return SPPublicKey(obj.sppk)
    return obj


def pseudonym_matches(p: Pseudonym, sppk: G1Point) -> bool:
    return p.sppk_digest == sppk_digest(sppk)
