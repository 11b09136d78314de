"""The central authority: registries, key issuance, pseudonym computation,
opening and linking.

Transport-agnostic; :mod:`bpksharp.authority.api` puts HTTP in front of it.
"""

from __future__ import annotations

import hashlib
import hmac
import logging
import os
import re
import secrets
import time
from dataclasses import dataclass
from typing import Protocol

from .. import formats, scheme
from ..algebra import G1Point, SerializationError, decode_g1, decode_scalar, encode_g1, encode_scalar
from ..primitives import nike_sharekey
from ..scheme import MasterKeyPair, Pseudonym, UserKeyPair
from .config import ConfigError, ServiceConfig
from .store import DuplicateError, SecretBox, SPRow, Store, UserRow

log = logging.getLogger(__name__)

_SP_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")
TRUST_CLASSES = ("plain", "trusted")


class AuthorityError(Exception):
    status = 400


class NotFound(AuthorityError):
    status = 404


class Conflict(AuthorityError):
    status = 409


class AuthFailed(AuthorityError):
    status = 401


class PolicyDenied(AuthorityError):
    status = 403


class InvalidProof(AuthorityError):
    status = 422


class UnknownUser(AuthorityError):
    """An accepted proof opened to a key outside the registry (possible forgery)."""

    status = 409


class Authenticator(Protocol):
    def enroll(self, subject: str) -> tuple[str, bytes]:
        """Return (credential handed to the subject, verifier kept by the authority)."""

    def verify(self, subject: str, evidence: str, verifier: bytes) -> bool: ...


class TokenAuthenticator:
    """Shared-secret bearer tokens; only a SHA-256 of each token is stored."""

    def enroll(self, subject: str) -> tuple[str, bytes]:
        token = secrets.token_hex(32)
        return token, hashlib.sha256(token.encode()).digest()

    def verify(self, subject: str, evidence: str, verifier: bytes) -> bool:
        if not isinstance(evidence, str):
            return False
        return hmac.compare_digest(hashlib.sha256(evidence.encode()).digest(), verifier)


@dataclass(frozen=True)
class UserRecord:
    uid: str
    upk: G1Point
    created_at: float


@dataclass(frozen=True)
class SPRecord:
    sp_id: str
    sppk: G1Point
    trust_class: str
    metadata: dict


class _Registry:
    def __init__(self, store: Store) -> None:
        self._store = store

    def __contains__(self, upk: bytes) -> bool:
        return self._store.user_by_upk(upk) is not None


class Authority:
    def __init__(self, config: ServiceConfig, authenticator: Authenticator | None = None, rng=None) -> None:
        config.check()
        self.config = config
        self.auth = authenticator or TokenAuthenticator()
        self._rng = rng
        self.store = Store(config.data_path)
        salt = self.store.put_meta_once("kdf-salt", os.urandom(16))
        self._box = SecretBox(config.passphrase, salt, config.scrypt_n)

        seed = self.store.put_meta_once("params-seed", config.params_seed or os.urandom(32))
        if config.params_seed is not None and seed != config.params_seed:
            raise ConfigError("configured params seed differs from the one in the data file")
        self.pp = scheme.setup(seed=seed)

        blob = self.store.get_meta("master")
        if blob is None:
            fresh = formats.dumps(scheme.keygen(self.pp, rng)).encode()
            blob = self.store.put_meta_once("master", self._box.seal(fresh, b"master"))
        self._master: MasterKeyPair = formats.loads(self._box.unseal(blob, b"master").decode(), "master-secret")
        self._admin_hash = hashlib.sha256(config.admin_token.encode()).digest()

    @property
    def mpk(self) -> scheme.MasterPublicKey:
        return self._master.mpk

    def close(self) -> None:
        self.store.close()

    def check_admin(self, token: str | None) -> None:
        if token is None or not hmac.compare_digest(hashlib.sha256(token.encode()).digest(), self._admin_hash):
            self.store.record_attempt("admin", None, "bad admin token")
            raise AuthFailed("admin token required")

    # -- users -----------------------------------------------------------------------------

    def register_user(self, identity: str) -> tuple[UserRecord, str]:
        """Create and persist a user key pair; returns the record and the user's credential."""
        if not identity or not identity.strip():
            raise AuthorityError("identity must be non-empty")
        uid = "u-" + secrets.token_hex(12)
        user = scheme.keygen_user(self.pp, self._master.msk, self._rng)
        credential, verifier = self.auth.enroll(uid)
        row = UserRow(
            uid=uid,
            identity=identity,
            upk=encode_g1(user.upk),
            usk_blob=self._box.seal(formats.dumps(user).encode(), b"user:" + uid.encode()),
            token_hash=verifier,
            created_at=time.time(),
        )
        try:
            self.store.insert_user(row)
        except DuplicateError as exc:
            raise Conflict("identity already registered") from exc
        return UserRecord(uid, user.upk, row.created_at), credential

    def get_user(self, uid: str) -> UserRecord:
        row = self.store.get_user(uid)
        if row is None:
            raise NotFound(f"unknown user {uid}")
        return UserRecord(row.uid, decode_g1(row.upk), row.created_at)

    def _user_key(self, row: UserRow) -> UserKeyPair:
        return formats.loads(self._box.unseal(row.usk_blob, b"user:" + row.uid.encode()).decode(), "user-secret")

    def request_user_key(self, uid: str, evidence: str) -> UserKeyPair:
        row = self.store.get_user(uid)
        if row is None:
            self.store.record_attempt("issue", uid, "unknown uid")
            raise NotFound(f"unknown user {uid}")
        if not self.auth.verify(uid, evidence, row.token_hash):
            self.store.record_attempt("issue", uid, "authentication failed")
            raise AuthFailed("authentication failed")
        user = self._user_key(row)
        self.store.audit(uid, "issue", uid, None, uid_issued=uid)
        return user

    # -- service providers ------------------------------------------------------------------

    def register_sp(self, sp_id: str, trust_class: str = "plain", metadata: dict | None = None) -> tuple[SPRecord, str, int | None]:
        """Register an SP.  Returns (record, SP credential, spsk if trusted else None)."""
        if not _SP_ID.match(sp_id or ""):
            raise AuthorityError("sp_id must be 1-64 characters of [A-Za-z0-9._-]")
        if trust_class not in TRUST_CLASSES:
            raise AuthorityError(f"trust_class must be one of {TRUST_CLASSES}")
        sp = scheme.keygen_sp(self.pp, self._master.msk, self._rng)
        credential, verifier = self.auth.enroll(sp_id)
        row = SPRow(
            sp_id=sp_id,
            sppk=encode_g1(sp.sppk),
            trust_class=trust_class,
            spsk_blob=self._box.seal(encode_scalar(sp.spsk), b"sp:" + sp_id.encode()),
            token_hash=verifier,
            metadata=dict(metadata or {}),
            created_at=time.time(),
        )
        try:
            self.store.insert_sp(row)
        except DuplicateError as exc:
            raise Conflict(f"sp_id {sp_id!r} already registered") from exc
        record = SPRecord(sp_id, sp.sppk, trust_class, row.metadata)
        return record, credential, sp.spsk if trust_class == "trusted" else None

    def _sp_row(self, sp_id: str) -> SPRow:
        row = self.store.get_sp(sp_id)
        if row is None:
            raise NotFound(f"unknown service provider {sp_id}")
        return row

    def get_sp(self, sp_id: str) -> SPRecord:
        row = self._sp_row(sp_id)
        return SPRecord(row.sp_id, decode_g1(row.sppk), row.trust_class, row.metadata)

    def _spsk(self, row: SPRow) -> int:
        return decode_scalar(self._box.unseal(row.spsk_blob, b"sp:" + row.sp_id.encode()))

    # -- privileged operations -------------------------------------------------------------

    def compute_pseudonym(self, sp_id: str, sp_credential: str, uid: str, purpose: str) -> Pseudonym:
        sp = self._sp_row(sp_id)
        if not self.auth.verify(sp_id, sp_credential, sp.token_hash):
            self.store.record_attempt("compute-nym", sp_id, "authentication failed")
            raise AuthFailed("SP authentication failed")
        if purpose not in self.config.eligibility.get(sp_id, []):
            self.store.record_attempt("compute-nym", sp_id, f"purpose {purpose!r} not allowed")
            raise PolicyDenied(f"{sp_id} is not eligible for purpose {purpose!r}")
        row = self.store.get_user(uid)
        if row is None:
            raise NotFound(f"unknown user {uid}")
        user = self._user_key(row)
        sppk = decode_g1(sp.sppk)
        # Derived from the user's key; equals nymgen_sp with the SP's key.
        nym = Pseudonym(nike_sharekey(sppk, user.secret), scheme.sppk_digest(sppk))
        self.store.audit(sp_id, "compute-nym", uid, sp_id, purpose)
        return nym

    def _check_deanonymizer(self, action: str, requester: str, justification: str) -> None:
        if requester not in self.config.deanonymizers:
            self.store.record_attempt(action, requester, "requester not allowed")
            raise PolicyDenied(f"{requester!r} may not {action} pseudonyms")
        if not justification or not justification.strip():
            self.store.record_attempt(action, requester, "missing justification")
            raise PolicyDenied("a justification is required")

    def _parse(self, proof: bytes, nym: bytes) -> tuple[scheme.NymProof, G1Point]:
        try:
            return scheme.NymProof.from_bytes(proof), decode_g1(nym)
        except SerializationError as exc:
            raise InvalidProof(f"malformed input: {exc}") from exc

    def open_pseudonym(self, proof: bytes, nym: bytes, sp_id: str, requester: str, justification: str) -> str:
        """Return the uid behind a verified pseudonym at ``sp_id``."""
        self._check_deanonymizer("open", requester, justification)
        sp = self._sp_row(sp_id)
        parsed, nym_pt = self._parse(proof, nym)
        if not scheme.nymvf(self.pp, self.mpk, decode_g1(sp.sppk), nym_pt, parsed):
            raise InvalidProof("proof does not verify")
        upk = scheme.open_proof(parsed, self._master.msk)
        row = self.store.user_by_upk(encode_g1(upk))
        if row is None:
            log.warning("verified proof at %s opened to an unregistered key", sp_id)
            raise UnknownUser("proof opens to an unregistered key")
        self.store.audit(requester, "open", row.uid, sp_id, justification)
        return row.uid

    def link_pseudonym(
        self, proof: bytes, nym: bytes, source_sp: str, target_sp: str, requester: str, justification: str
    ) -> Pseudonym:
        """Translate a verified pseudonym at ``source_sp`` into ``target_sp``'s domain."""
        self._check_deanonymizer("link", requester, justification)
        source, target = self._sp_row(source_sp), self._sp_row(target_sp)
        parsed, nym_pt = self._parse(proof, nym)
        try:
            out = scheme.link(
                self.pp,
                parsed,
                self._master.msk,
                self._spsk(target),
                mpk=self.mpk,
                source_sppk=decode_g1(source.sppk),
                nym=nym_pt,
                registered=_Registry(self.store),
            )
        except scheme.LinkRefused as exc:
            if exc.reason == "unregistered":
                raise UnknownUser(str(exc)) from exc
            raise InvalidProof(str(exc)) from exc
        uid = self.store.user_by_upk(encode_g1(scheme.open_proof(parsed, self._master.msk))).uid
        self.store.audit(requester, "link", uid, target_sp, f"from {source_sp}: {justification}")
        return out

