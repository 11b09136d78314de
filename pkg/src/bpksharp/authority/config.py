"""Service configuration: one JSON file, with environment overrides.

Recognised environment variables: ``BPK_LISTEN`` (``host:port``),
``BPK_DATA_PATH``, ``BPK_PASSPHRASE`` and ``BPK_ADMIN_TOKEN``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8433
    data_path: Path = Path("authority.db")
    passphrase: str = ""
    admin_token: str = ""
    params_seed: bytes | None = None
    # sp_id -> purposes that SP may request pseudonyms for.
    eligibility: dict[str, list[str]] = field(default_factory=dict)
    # Requesters allowed to open or link pseudonyms.
    deanonymizers: list[str] = field(default_factory=list)
    scrypt_n: int = 2**15

    def __post_init__(self) -> None:
        self.data_path = Path(self.data_path)

    def check(self) -> None:
        if not self.passphrase:
            raise ConfigError("a passphrase is required to protect secrets at rest")
        if not self.admin_token:
            raise ConfigError("an admin token is required")


def parse_listen(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not port.isdigit():
        raise ConfigError(f"listen address must be host:port, got {value!r}")
    return host or "127.0.0.1", int(port)


def load_config(path: str | os.PathLike | None = None, env: dict[str, str] | None = None) -> ServiceConfig:
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = ServiceConfig()
    if "listen" in raw:
        cfg.host, cfg.port = parse_listen(raw["listen"])
    base = Path(path).parent if path is not None else Path.cwd()
    if "data_path" in raw:
        cfg.data_path = base / raw["data_path"]
    cfg.passphrase = raw.get("passphrase", "")
    cfg.admin_token = raw.get("admin_token", "")
    if raw.get("params_seed"):
        cfg.params_seed = bytes.fromhex(raw["params_seed"])
    cfg.eligibility = {str(k): [str(p) for p in v] for k, v in raw.get("eligibility", {}).items()}
    cfg.deanonymizers = [str(r) for r in raw.get("deanonymizers", [])]
    cfg.scrypt_n = int(raw.get("scrypt_n", cfg.scrypt_n))

    if "BPK_LISTEN" in env:
        cfg.host, cfg.port = parse_listen(env["BPK_LISTEN"])
    if "BPK_DATA_PATH" in env:
        cfg.data_path = Path(env["BPK_DATA_PATH"])
    cfg.passphrase = env.get("BPK_PASSPHRASE", cfg.passphrase)
    cfg.admin_token = env.get("BPK_ADMIN_TOKEN", cfg.admin_token)
    return cfg
