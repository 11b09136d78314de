"""Delegatable pseudonyms over BLS12-381.

The algorithms live in :mod:`bpksharp.scheme`; file formats in
:mod:`bpksharp.formats`; the authority service in :mod:`bpksharp.authority`.
"""

from .scheme import (
    VERSION,
    LinkRefused,
    keygen,
    keygen_sp,
    keygen_user,
    link,
    nymgen_sp,
    nymgen_user,
    nymvf,
    open_proof,
    setup,
)

__version__ = "0.1.0"

__all__ = [
    "VERSION",
    "LinkRefused",
    "keygen",
    "keygen_sp",
    "keygen_user",
    "link",
    "nymgen_sp",
    "nymgen_user",
    "nymvf",
    "open_proof",
    "setup",
]
