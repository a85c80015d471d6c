"""Service layer: FastAPI app plus the request/response schemas.

Run it with ``uvicorn melonfield.service:app``.
"""

from .app import app, create_app

__all__ = ["app", "create_app"]
