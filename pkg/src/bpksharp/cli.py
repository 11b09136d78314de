"""Command-line front end.

Exit codes: 0 success, 1 verification or service failure, 2 usage error
or unreadable input.  With ``--seed`` every command is deterministic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bench, formats, scheme
from .algebra import G1_BYTES, SeededRng, SerializationError, decode_g1, default_rng, encode_g1
from .formats import FormatError, SPPublicKey, UserPublicKey, b64

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rng(args):
    return SeededRng(args.seed) if args.seed is not None else default_rng()


def _read(path: str | None, role, flag: str):
    if path is None:
        raise UsageError(f"{flag} is required")
    try:
        return formats.read(path, role)
    except FileNotFoundError as exc:
        raise UsageError(f"{flag}: no such file {path}") from exc
    except (OSError, FormatError, UnicodeDecodeError) as exc:
        raise UsageError(f"{flag}: {path}: {exc}") from exc


def _read_master(args) -> scheme.MasterKeyPair:
    return _read(args.msk, "master-secret", "--msk")


def _read_mpk(args) -> scheme.MasterPublicKey:
    obj = _read(args.mpk, ("master-public", "master-secret"), "--mpk")
    return obj.mpk if isinstance(obj, scheme.MasterKeyPair) else obj


def _read_sppk(args, flag: str = "--sppk"):
    obj = _read(getattr(args, flag[2:].replace("-", "_")), ("sp-public", "sp-secret"), flag)
    return obj.sppk


def _read_nym(path: str | None, flag: str = "--nym"):
    if path is None:
        raise UsageError(f"{flag} is required")
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"{flag}: {exc}") from exc
    if len(data) == G1_BYTES:
        return decode_g1(data)
    return formats.loads(data.decode(), "pseudonym").nym


def _read_proof_bytes(path: str | None) -> bytes:
    """Raw proof bytes from a JSON envelope or a raw file; parsing happens later."""
    if path is None:
        raise UsageError("--proof is required")
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"--proof: {exc}") from exc
    try:
        env = json.loads(data)
    except (ValueError, UnicodeDecodeError):
        return data
    if isinstance(env, dict) and env.get("role") == "nym-proof":
        return formats.unb64(env.get("proof", ""))
    return data


def _emit(args, obj, raw: bytes | None = None, path: str | None = None) -> None:
    path = path if path is not None else args.out
    if args.format == "raw" and raw is not None:
        if path:
            Path(path).write_bytes(raw)
        else:
            sys.stdout.buffer.write(raw)
        return
    if path:
        formats.write(path, obj)
    else:
        sys.stdout.write(formats.dumps(obj))


# -- scheme commands ------------------------------------------------------------------------


def cmd_setup(args) -> int:
    seed = _rng(args).randbytes(32) if args.seed is not None else None
    try:
        pp = scheme.setup(args.security_level, seed)
    except scheme.UnsupportedSecurityLevel as exc:
        raise UsageError(str(exc)) from exc
    _emit(args, pp)
    return EXIT_OK


def cmd_keygen(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    keys = scheme.keygen(pp, _rng(args))
    _emit(args, keys)
    if args.mpk:
        formats.write(args.mpk, keys.mpk)
    return EXIT_OK


def cmd_keygen_user(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    user = scheme.keygen_user(pp, _read_master(args).msk, _rng(args))
    _emit(args, user)
    if args.upk:
        formats.write(args.upk, UserPublicKey(user.upk))
    return EXIT_OK


def cmd_keygen_sp(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    sp = scheme.keygen_sp(pp, _read_master(args).msk, _rng(args))
    _emit(args, sp)
    if args.sppk:
        formats.write(args.sppk, SPPublicKey(sp.sppk))
    return EXIT_OK


def cmd_nymgen(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    user = _read(args.usk, "user-secret", "--usk")
    nym, proof = scheme.nymgen_user(pp, user, _read_mpk(args), _read_sppk(args), _rng(args))
    _emit(args, nym, bytes(nym))
    if args.proof:
        _emit(args, proof, proof.to_bytes(), args.proof)
    return EXIT_OK


def cmd_nymgen_sp(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    sp = _read(args.spsk, "sp-secret", "--spsk")
    upk = _read(args.upk, ("user-public", "user-secret"), "--upk").upk
    nym = scheme.nymgen_sp(pp, sp.spsk, _read_mpk(args), upk)
    _emit(args, nym, bytes(nym))
    return EXIT_OK


def cmd_verify(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    mpk, sppk = _read_mpk(args), _read_sppk(args)
    try:
        nym = _read_nym(args.nym)
        proof = _read_proof_bytes(args.proof)
    except (FormatError, SerializationError, UnicodeDecodeError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_FAIL
    ok = scheme.nymvf(pp, mpk, sppk, nym, proof)
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_FAIL


def _verified_proof(args, pp, mpk, sppk):
    try:
        nym = _read_nym(args.nym)
        proof = scheme.NymProof.from_bytes(_read_proof_bytes(args.proof))
    except (FormatError, SerializationError, UnicodeDecodeError) as exc:
        return None, None, f"unparsable input: {exc}"
    if not scheme.nymvf(pp, mpk, sppk, nym, proof):
        return None, None, "proof does not verify"
    return nym, proof, None


def cmd_open(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    master = _read_master(args)
    nym, proof, problem = _verified_proof(args, pp, master.mpk, _read_sppk(args))
    if problem:
        print(f"refused: {problem}", file=sys.stderr)
        return EXIT_FAIL
    upk = scheme.open_proof(proof, master.msk)
    _emit(args, UserPublicKey(upk), encode_g1(upk))
    return EXIT_OK


def cmd_link(args) -> int:
    pp = _read(args.params, "public-params", "--params")
    master = _read_master(args)
    target = _read(args.spsk, "sp-secret", "--spsk")
    try:
        nym = _read_nym(args.nym)
        proof = _read_proof_bytes(args.proof)
    except (FormatError, SerializationError, UnicodeDecodeError) as exc:
        print(f"refused: unparsable input: {exc}", file=sys.stderr)
        return EXIT_FAIL
    registered = None
    if args.registry:
        registered = set()
        for p in args.registry:
            registered.add(encode_g1(_read(p, ("user-public", "user-secret"), "--registry").upk))
    try:
        out = scheme.link(
            pp, proof, master.msk, target.spsk, mpk=master.mpk, source_sppk=_read_sppk(args), nym=nym, registered=registered
        )
    except scheme.LinkRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(args, out, bytes(out))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.iterations < bench.MIN_ITERATIONS:
        raise UsageError(f"--iterations must be at least {bench.MIN_ITERATIONS}")
    report = bench.run_bench(args.iterations, args.seed)
    print(report.table())
    if args.out:
        paths = bench.write_report(report, args.out)
        for kind, path in sorted(paths.items()):
            print(f"wrote {kind}: {path}", file=sys.stderr)
    if args.format == "json":
        print(json.dumps(report.to_json(), sort_keys=True))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .authority.config import ConfigError, load_config
    from .authority.server import serve

    try:
        cfg = load_config(args.config)
        cfg.check()
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    serve(cfg)
    return EXIT_OK


# -- service client ---------------------------------------------------------------------------


def _client(args):
    from .authority.client import AuthorityClient

    if not args.service_url:
        raise UsageError("--service-url is required")
    return AuthorityClient(args.service_url, args.token or os.environ.get("BPK_ADMIN_TOKEN"))


def cmd_remote(args) -> int:
    from .authority.client import ServiceError

    with _client(args) as c:
        try:
            result = _REMOTE[args.action](args, c)
        except ServiceError as exc:
            print(f"service error: {exc}", file=sys.stderr)
            return EXIT_FAIL
    if result is not None:
        print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def _remote_params(args, c):
    pp, mpk = c.params()
    if args.out:
        formats.write(args.out, pp)
    if args.mpk:
        formats.write(args.mpk, mpk)
    return {"params": formats.to_envelope(pp), "mpk": formats.to_envelope(mpk)}


def _remote_register_user(args, c):
    body = c.register_user(args.identity)
    return {"uid": body["uid"], "upk": b64(encode_g1(body["upk"])), "credential": body["credential"]}


def _remote_request_key(args, c):
    if not args.credential:
        raise UsageError("--credential is required")
    user = c.request_user_key(args.uid, args.credential)
    if args.out:
        formats.write(args.out, user)
        return {"uid": args.uid, "upk": b64(encode_g1(user.upk))}
    return formats.to_envelope(user)


def _remote_register_sp(args, c):
    body = c.register_sp(args.sp_id, args.trust_class)
    if args.sppk:
        formats.write(args.sppk, SPPublicKey(body["sppk"]))
    out = {"sp_id": body["sp_id"], "sppk": b64(encode_g1(body["sppk"])), "credential": body["credential"]}
    if "key" in body:
        if args.out:
            formats.write(args.out, body["key"])
        else:
            out["key"] = formats.to_envelope(body["key"])
    return out


def _remote_pseudonym(args, c):
    nym = c.request_pseudonym(args.sp_id, args.credential, args.uid, args.purpose)
    if args.out:
        formats.write(args.out, nym)
    return formats.to_envelope(nym)


def _remote_open(args, c):
    return {"uid": c.open(_read_proof_bytes(args.proof), _read_nym(args.nym), args.sp_id, args.requester, args.justification)}


def _remote_link(args, c):
    nym = c.link(
        _read_proof_bytes(args.proof), _read_nym(args.nym), args.sp_id, args.target_sp, args.requester, args.justification
    )
    if args.out:
        formats.write(args.out, nym)
    return formats.to_envelope(nym)


def _remote_audit(args, c):
    return {"entries": c.audit(args.action_filter)}


_REMOTE = {
    "params": _remote_params,
    "register-user": _remote_register_user,
    "request-key": _remote_request_key,
    "register-sp": _remote_register_sp,
    "pseudonym": _remote_pseudonym,
    "open": _remote_open,
    "link": _remote_link,
    "audit": _remote_audit,
}


# -- parser -------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", help="derive all randomness from this string (reproducible output)")
    common.add_argument("--format", choices=("json", "raw"), default="json", help="output encoding")
    common.add_argument("--out", help="output file (default: stdout)")

    p = argparse.ArgumentParser(prog="bpk-sharp", description="Delegatable pseudonyms with an escrowing authority.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, *flags):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for f in flags:
            sp.add_argument(f"--{f}")
        sp.set_defaults(func=func)
        return sp

    s = add("setup", cmd_setup, "create public parameters")
    s.add_argument("--security-level", type=int, default=128)
    add("keygen", cmd_keygen, "create the master key pair", "params", "mpk")
    add("keygen-user", cmd_keygen_user, "issue a user key pair", "params", "msk", "upk")
    add("keygen-sp", cmd_keygen_sp, "issue a service-provider key pair", "params", "msk", "sppk")
    add("nymgen", cmd_nymgen, "user-side pseudonym and proof", "params", "usk", "mpk", "sppk", "proof")
    add("nymgen-sp", cmd_nymgen_sp, "SP-side pseudonym", "params", "spsk", "mpk", "upk")
    add("verify", cmd_verify, "verify a pseudonym proof", "params", "mpk", "sppk", "nym", "proof")
    add("open", cmd_open, "recover the user key behind a proof", "params", "msk", "sppk", "nym", "proof")
    s = add("link", cmd_link, "translate a pseudonym to another SP", "params", "msk", "sppk", "spsk", "nym", "proof")
    s.add_argument("--registry", action="append", help="user public key file; repeat to build the registry")
    s = add("bench", cmd_bench, "time pseudonym generation and verification")
    s.add_argument("--iterations", type=int, default=100)
    s.set_defaults(format="table")
    s = add("serve", cmd_serve, "run the authority service")
    s.add_argument("--config", help="JSON config file")

    r = add("remote", cmd_remote, "talk to a running authority service")
    r.add_argument("action", choices=sorted(_REMOTE))
    r.add_argument("--service-url", default=os.environ.get("BPK_SERVICE_URL"))
    r.add_argument("--token", help="admin token (default: $BPK_ADMIN_TOKEN)")
    for f in ("identity", "uid", "credential", "sp-id", "target-sp", "purpose", "requester", "justification", "mpk", "sppk", "nym", "proof"):
        r.add_argument(f"--{f}")
    r.add_argument("--trust-class", choices=("plain", "trusted"), default="plain")
    r.add_argument("--action-filter", help="audit: only entries with this action")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        import logging

        logging.basicConfig(level=logging.DEBUG)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bpk-sharp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
