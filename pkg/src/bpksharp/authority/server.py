"""Running the API under uvicorn, in the foreground or on a background thread."""

from __future__ import annotations

import socket
import threading
import time

import uvicorn

from .api import create_app
from .config import ServiceConfig
from .service import Authority


def serve(config: ServiceConfig) -> None:
    authority = Authority(config)
    try:
        uvicorn.run(create_app(authority), host=config.host, port=config.port, log_level="info")
    finally:
        authority.close()


def free_port(host: str = "127.0.0.1") -> int:
    with socket.socket() as s:
        s.bind((host, 0))
        return s.getsockname()[1]


class BackgroundServer:
    """Serve an :class:`Authority` on a daemon thread; use as a context manager."""

    def __init__(self, authority: Authority, host: str = "127.0.0.1", port: int | None = None) -> None:
        self.authority = authority
        self.host = host
        self.port = port or free_port(host)
        config = uvicorn.Config(create_app(authority), host=host, port=self.port, log_level="warning")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self, timeout: float = 10.0) -> BackgroundServer:
        self._thread.start()
        deadline = time.monotonic() + timeout
        while not self._server.started:
            if time.monotonic() > deadline or not self._thread.is_alive():
                raise RuntimeError("authority server did not start")
            time.sleep(0.01)
        return self

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)

    def __enter__(self) -> BackgroundServer:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
