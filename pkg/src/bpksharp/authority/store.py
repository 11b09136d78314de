"""Registry persistence: one SQLite file in WAL mode.

Secrets (master key, user keys, SP keys) are sealed with AES-GCM under a
key derived from the service passphrase with scrypt.  All writes go
through one lock so mutations are serialized.
"""

from __future__ import annotations

import json
import os
import sqlite3
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS users (
    uid TEXT PRIMARY KEY,
    identity TEXT NOT NULL UNIQUE,
    upk BLOB NOT NULL UNIQUE,
    usk_blob BLOB NOT NULL,
    token_hash BLOB NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS issuance (uid TEXT NOT NULL REFERENCES users(uid), at REAL NOT NULL);
CREATE TABLE IF NOT EXISTS sps (
    sp_id TEXT PRIMARY KEY,
    sppk BLOB NOT NULL UNIQUE,
    trust_class TEXT NOT NULL CHECK (trust_class IN ('plain', 'trusted')),
    spsk_blob BLOB NOT NULL,
    token_hash BLOB NOT NULL,
    metadata TEXT NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS audit (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    ts REAL NOT NULL,
    actor TEXT NOT NULL,
    action TEXT NOT NULL CHECK (action IN ('issue', 'compute-nym', 'open', 'link')),
    subject_uid TEXT,
    target_domain TEXT,
    detail TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS attempts (ts REAL NOT NULL, action TEXT NOT NULL, subject TEXT, reason TEXT NOT NULL);
"""


class DuplicateError(Exception):
    pass


class SealError(Exception):
    """A sealed blob failed authentication (wrong passphrase or tampering)."""


class SecretBox:
    NONCE = 12

    def __init__(self, passphrase: str, salt: bytes, n: int = 2**15) -> None:
        key = Scrypt(salt=salt, length=32, n=n, r=8, p=1).derive(passphrase.encode())
        self._aead = AESGCM(key)

    def seal(self, plaintext: bytes, context: bytes) -> bytes:
        nonce = os.urandom(self.NONCE)
        return nonce + self._aead.encrypt(nonce, plaintext, context)

    def unseal(self, blob: bytes, context: bytes) -> bytes:
        try:
            return self._aead.decrypt(blob[: self.NONCE], blob[self.NONCE :], context)
        except InvalidTag as exc:
            raise SealError("sealed secret failed authentication") from exc


@dataclass(frozen=True)
class UserRow:
    uid: str
    identity: str
    upk: bytes
    usk_blob: bytes
    token_hash: bytes
    created_at: float


@dataclass(frozen=True)
class SPRow:
    sp_id: str
    sppk: bytes
    trust_class: str
    spsk_blob: bytes
    token_hash: bytes
    metadata: dict
    created_at: float


@dataclass(frozen=True)
class AuditEntry:
    id: int
    ts: float
    actor: str
    action: str
    subject_uid: str | None
    target_domain: str | None
    detail: str


class Store:
    def __init__(self, path: str | os.PathLike) -> None:
        self.path = Path(path)
        self._lock = threading.RLock()
        self._db = sqlite3.connect(self.path, check_same_thread=False, isolation_level=None)
        self._db.execute("PRAGMA journal_mode=WAL")
        self._db.execute("PRAGMA foreign_keys=ON")
        self._db.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._db.close()

    @contextmanager
    def transaction(self):
        with self._lock:
            self._db.execute("BEGIN IMMEDIATE")
            try:
                yield self._db
            except BaseException:
                self._db.execute("ROLLBACK")
                raise
            self._db.execute("COMMIT")

    def _query(self, sql: str, args=()) -> list[tuple]:
        with self._lock:
            return self._db.execute(sql, args).fetchall()

    # -- meta ----------------------------------------------------------------------------

    def get_meta(self, key: str) -> bytes | None:
        rows = self._query("SELECT value FROM meta WHERE key = ?", (key,))
        return rows[0][0] if rows else None

    def put_meta_once(self, key: str, value: bytes) -> bytes:
        """Store ``value`` unless ``key`` exists; return the stored value."""
        with self.transaction() as db:
            db.execute("INSERT OR IGNORE INTO meta (key, value) VALUES (?, ?)", (key, value))
            return db.execute("SELECT value FROM meta WHERE key = ?", (key,)).fetchone()[0]

    # -- users ---------------------------------------------------------------------------

    def insert_user(self, row: UserRow) -> None:
        try:
            with self.transaction() as db:
                db.execute(
                    "INSERT INTO users VALUES (?, ?, ?, ?, ?, ?)",
                    (row.uid, row.identity, row.upk, row.usk_blob, row.token_hash, row.created_at),
                )
        except sqlite3.IntegrityError as exc:
            raise DuplicateError(str(exc)) from exc

    def get_user(self, uid: str) -> UserRow | None:
        rows = self._query("SELECT * FROM users WHERE uid = ?", (uid,))
        return UserRow(*rows[0]) if rows else None

    def user_by_upk(self, upk: bytes) -> UserRow | None:
        rows = self._query("SELECT * FROM users WHERE upk = ?", (upk,))
        return UserRow(*rows[0]) if rows else None

    def user_count(self) -> int:
        return self._query("SELECT COUNT(*) FROM users")[0][0]

    # -- SPs -----------------------------------------------------------------------------

    def insert_sp(self, row: SPRow) -> None:
        try:
            with self.transaction() as db:
                db.execute(
                    "INSERT INTO sps VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (
                        row.sp_id,
                        row.sppk,
                        row.trust_class,
                        row.spsk_blob,
                        row.token_hash,
                        json.dumps(row.metadata, sort_keys=True),
                        row.created_at,
                    ),
                )
        except sqlite3.IntegrityError as exc:
            raise DuplicateError(str(exc)) from exc

    def get_sp(self, sp_id: str) -> SPRow | None:
        rows = self._query("SELECT * FROM sps WHERE sp_id = ?", (sp_id,))
        if not rows:
            return None
        r = rows[0]
        return SPRow(r[0], r[1], r[2], r[3], r[4], json.loads(r[5]), r[6])

    # -- audit ---------------------------------------------------------------------------

    def audit(self, actor: str, action: str, subject_uid: str | None, target_domain: str | None, detail: str = "", *, uid_issued: str | None = None) -> None:
        with self.transaction() as db:
            now = time.time()
            db.execute(
                "INSERT INTO audit (ts, actor, action, subject_uid, target_domain, detail) VALUES (?, ?, ?, ?, ?, ?)",
                (now, actor, action, subject_uid, target_domain, detail),
            )
            if uid_issued is not None:
                db.execute("INSERT INTO issuance VALUES (?, ?)", (uid_issued, now))

    def record_attempt(self, action: str, subject: str | None, reason: str) -> None:
        with self.transaction() as db:
            db.execute("INSERT INTO attempts VALUES (?, ?, ?, ?)", (time.time(), action, subject, reason))

    def audit_entries(self, action: str | None = None) -> list[AuditEntry]:
        if action is None:
            rows = self._query("SELECT * FROM audit ORDER BY id")
        else:
            rows = self._query("SELECT * FROM audit WHERE action = ? ORDER BY id", (action,))
        return [AuditEntry(*r) for r in rows]

    def attempts(self) -> list[tuple]:
        return self._query("SELECT * FROM attempts ORDER BY rowid")

    def issuance_log(self, uid: str) -> list[float]:
        return [r[0] for r in self._query("SELECT at FROM issuance WHERE uid = ? ORDER BY rowid", (uid,))]

    def export_json(self) -> dict:
        """Public view of the registry for inspection; sealed blobs are omitted."""
        users = self._query("SELECT uid, identity, upk, created_at FROM users ORDER BY created_at")
        sps = self._query("SELECT sp_id, sppk, trust_class, metadata, created_at FROM sps ORDER BY created_at")
        return {
            "users": [{"uid": u, "identity": i, "upk": upk.hex(), "created_at": t} for u, i, upk, t in users],
            "sps": [
                {"sp_id": s, "sppk": pk.hex(), "trust_class": c, "metadata": json.loads(m), "created_at": t}
                for s, pk, c, m, t in sps
            ],
            "audit": [e.__dict__ for e in self.audit_entries()],
        }
