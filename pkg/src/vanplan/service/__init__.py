"""FastAPI service wrapping the planner; run with `vanplan serve` or uvicorn."""

from .app import app

__all__ = ["app"]
