"""The central authority as an HTTP service."""

from .client import AuthorityClient, ServiceError
from .config import ConfigError, ServiceConfig, load_config
from .service import (
    Authority,
    AuthorityError,
    AuthFailed,
    Conflict,
    InvalidProof,
    NotFound,
    PolicyDenied,
    TokenAuthenticator,
    UnknownUser,
)
from .server import BackgroundServer, serve

__all__ = [
    "Authority",
    "AuthorityClient",
    "AuthorityError",
    "AuthFailed",
    "BackgroundServer",
    "ConfigError",
    "Conflict",
    "InvalidProof",
    "NotFound",
    "PolicyDenied",
    "ServiceConfig",
    "ServiceError",
    "TokenAuthenticator",
    "UnknownUser",
    "load_config",
    "serve",
]
