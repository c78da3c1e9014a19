"""FastAPI service exposing the experiment database."""

from .app import create_app

__all__ = ["create_app"]
