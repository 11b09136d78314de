"""Thin httpx client for the authority API."""

from __future__ import annotations

import httpx

from .. import formats
from ..algebra import decode_g1, encode_g1
from ..formats import b64, unb64
from ..scheme import NymProof, Pseudonym


class ServiceError(Exception):
    def __init__(self, status: int, error: str, detail: str) -> None:
        super().__init__(f"{status} {error}: {detail}")
        self.status = status
        self.error = error
        self.detail = detail


class AuthorityClient:
    def __init__(self, base_url: str, token: str | None = None, *, timeout: float = 30.0, transport=None) -> None:
        self._http = httpx.Client(base_url=base_url.rstrip("/"), timeout=timeout, transport=transport)
        self.token = token

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _call(self, method: str, path: str, *, token: str | None = None, **kw) -> dict:
        token = token or self.token
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        resp = self._http.request(method, path, headers=headers, **kw)
        try:
            body = resp.json()
        except ValueError:
            body = {"error": "HTTPError", "detail": resp.text}
        if resp.status_code >= 400:
            if isinstance(body.get("detail"), list):  # request validation errors
                raise ServiceError(resp.status_code, "ValidationError", str(body["detail"]))
            raise ServiceError(resp.status_code, body.get("error", "HTTPError"), str(body.get("detail", "")))
        return body

    def params(self):
        body = self._call("GET", "/v1/params")
        return formats.from_envelope(body["params"], "public-params"), formats.from_envelope(body["mpk"], "master-public")

    def register_user(self, identity: str) -> dict:
        body = self._call("POST", "/v1/users", json={"identity": identity})
        return {**body, "upk": decode_g1(unb64(body["upk"]))}

    def request_user_key(self, uid: str, credential: str):
        body = self._call("POST", f"/v1/users/{uid}/key", token=credential)
        return formats.from_envelope(body["key"], "user-secret")

    def register_sp(self, sp_id: str, trust_class: str = "plain", metadata: dict | None = None) -> dict:
        body = self._call("POST", "/v1/sps", json={"sp_id": sp_id, "trust_class": trust_class, "metadata": metadata or {}})
        out = {**body, "sppk": decode_g1(unb64(body["sppk"]))}
        if "key" in body:
            out["key"] = formats.from_envelope(body["key"], "sp-secret")
        return out

    def get_sp(self, sp_id: str) -> dict:
        body = self._call("GET", f"/v1/sps/{sp_id}")
        return {**body, "sppk": decode_g1(unb64(body["sppk"]))}

    def request_pseudonym(self, sp_id: str, sp_credential: str, uid: str, purpose: str) -> Pseudonym:
        body = self._call("POST", f"/v1/sps/{sp_id}/pseudonyms", token=sp_credential, json={"uid": uid, "purpose": purpose})
        return formats.from_envelope(body["pseudonym"], "pseudonym")

    @staticmethod
    def _wire(proof: NymProof | bytes, nym) -> tuple[str, str]:
        raw = proof.to_bytes() if isinstance(proof, NymProof) else bytes(proof)
        nym_pt = nym.nym if isinstance(nym, Pseudonym) else nym
        return b64(raw), b64(encode_g1(nym_pt))

    def open(self, proof, nym, sp_id: str, requester: str, justification: str) -> str:
        p, n = self._wire(proof, nym)
        body = self._call(
            "POST",
            "/v1/open",
            json={"proof": p, "nym": n, "sp_id": sp_id, "requester": requester, "justification": justification},
        )
        return body["uid"]

    def link(self, proof, nym, source_sp: str, target_sp: str, requester: str, justification: str) -> Pseudonym:
        p, n = self._wire(proof, nym)
        body = self._call(
            "POST",
            "/v1/link",
            json={
                "proof": p,
                "nym": n,
                "source_sp": source_sp,
                "target_sp": target_sp,
                "requester": requester,
                "justification": justification,
            },
        )
        return formats.from_envelope(body["pseudonym"], "pseudonym")

    def audit(self, action: str | None = None) -> list[dict]:
        params = {"action": action} if action else None
        return self._call("GET", "/v1/audit", params=params)["entries"]
