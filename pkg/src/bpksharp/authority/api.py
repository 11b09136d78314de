"""HTTP+JSON front end for :class:`~bpksharp.authority.service.Authority`.

Group elements and scalars travel as base64 of their canonical bytes.
Credentials are bearer tokens: the admin token for registration, opening,
linking and the audit log; a user's token for key release; an SP's token
for pseudonym requests.
"""

from __future__ import annotations

from typing import Annotated

from fastapi import Depends, FastAPI, Header, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import formats, scheme
from ..algebra import encode_g1
from ..formats import b64, unb64
from .service import Authority, AuthorityError

_MAX_BYTES = 4096


class RegisterUser(BaseModel):
    identity: str = Field(min_length=1, max_length=256)


class RegisterSP(BaseModel):
    sp_id: str
    trust_class: str = "plain"
    metadata: dict[str, str] = Field(default_factory=dict)


class PseudonymRequest(BaseModel):
    uid: str
    purpose: str


class OpenRequest(BaseModel):
    proof: str = Field(max_length=_MAX_BYTES)
    nym: str = Field(max_length=_MAX_BYTES)
    sp_id: str
    requester: str
    justification: str


class LinkRequest(BaseModel):
    proof: str = Field(max_length=_MAX_BYTES)
    nym: str = Field(max_length=_MAX_BYTES)
    source_sp: str
    target_sp: str
    requester: str
    justification: str


def _bearer(authorization: Annotated[str | None, Header()] = None) -> str | None:
    if authorization and authorization.startswith("Bearer "):
        return authorization[len("Bearer ") :]
    return None


Token = Annotated[str | None, Depends(_bearer)]


def _bytes(text: str) -> bytes:
    try:
        return unb64(text)
    except formats.FormatError as exc:
        raise AuthorityError(str(exc)) from exc


def create_app(authority: Authority) -> FastAPI:
    app = FastAPI(title="bpk-sharp authority", version="1")
    app.state.authority = authority

    @app.exception_handler(AuthorityError)
    async def _authority_error(request: Request, exc: AuthorityError):
        return JSONResponse(status_code=exc.status, content={"error": type(exc).__name__, "detail": str(exc)})

    @app.get("/v1/params")
    def params():
        return {
            "params": formats.to_envelope(authority.pp),
            "mpk": formats.to_envelope(authority.mpk),
        }

    @app.post("/v1/users", status_code=201)
    def register_user(body: RegisterUser, token: Token):
        authority.check_admin(token)
        record, credential = authority.register_user(body.identity)
        return {"uid": record.uid, "upk": b64(encode_g1(record.upk)), "credential": credential}

    @app.get("/v1/users/{uid}")
    def get_user(uid: str, token: Token):
        authority.check_admin(token)
        record = authority.get_user(uid)
        return {"uid": record.uid, "upk": b64(encode_g1(record.upk)), "created_at": record.created_at}

    @app.post("/v1/users/{uid}/key")
    def request_key(uid: str, token: Token):
        user = authority.request_user_key(uid, token or "")
        return {"uid": uid, "key": formats.to_envelope(user)}

    @app.post("/v1/sps", status_code=201)
    def register_sp(body: RegisterSP, token: Token):
        authority.check_admin(token)
        record, credential, spsk = authority.register_sp(body.sp_id, body.trust_class, body.metadata)
        out = {
            "sp_id": record.sp_id,
            "sppk": b64(encode_g1(record.sppk)),
            "trust_class": record.trust_class,
            "credential": credential,
        }
        if spsk is not None:
            out["key"] = formats.to_envelope(scheme.SPKeyPair(spsk, record.sppk))
        return out

    @app.get("/v1/sps/{sp_id}")
    def get_sp(sp_id: str):
        record = authority.get_sp(sp_id)
        return {"sp_id": record.sp_id, "sppk": b64(encode_g1(record.sppk)), "trust_class": record.trust_class}

    @app.post("/v1/sps/{sp_id}/pseudonyms")
    def compute_pseudonym(sp_id: str, body: PseudonymRequest, token: Token):
        nym = authority.compute_pseudonym(sp_id, token or "", body.uid, body.purpose)
        return {"pseudonym": formats.to_envelope(nym)}

    @app.post("/v1/open")
    def open_pseudonym(body: OpenRequest, token: Token):
        authority.check_admin(token)
        uid = authority.open_pseudonym(_bytes(body.proof), _bytes(body.nym), body.sp_id, body.requester, body.justification)
        return {"uid": uid}

    @app.post("/v1/link")
    def link_pseudonym(body: LinkRequest, token: Token):
        authority.check_admin(token)
        nym = authority.link_pseudonym(
            _bytes(body.proof), _bytes(body.nym), body.source_sp, body.target_sp, body.requester, body.justification
        )
        return {"pseudonym": formats.to_envelope(nym)}

    @app.get("/v1/audit")
    def audit(token: Token, action: str | None = None):
        authority.check_admin(token)
        return {"entries": [e.__dict__ for e in authority.store.audit_entries(action)]}

    return app
