"""HTTP service wrapping the core package. `uvicorn srocmeta.service:app`."""

from .app import app, create_app

__all__ = ["app", "create_app"]
