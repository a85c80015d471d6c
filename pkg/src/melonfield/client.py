"""Thin HTTP client for the compute service.

Without a server URL the client mounts the FastAPI app over an in-process
ASGI transport, so batch runs need no running server and stay fully
deterministic; with ``base_url`` it talks to a remote instance over HTTP.
"""

from __future__ import annotations

import asyncio

import httpx


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float = 3600.0):
        self.base_url = base_url
        self.timeout = timeout

    def _transport(self):
        if self.base_url is not None:
            return None
        from .service import app

        return httpx.ASGITransport(app=app)

    async def _post_async(self, path: str, payload: dict):
        transport = self._transport()
        base = self.base_url or "http://melonfield.internal"
        async with httpx.AsyncClient(
            transport=transport, base_url=base, timeout=self.timeout
        ) as client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        """POST a request body; returns (status_code, parsed JSON)."""
        return asyncio.run(self._post_async(path, payload))
