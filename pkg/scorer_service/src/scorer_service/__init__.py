"""Reference HTTP scorer for the chainbeam wire protocol."""

__version__ = "0.1.0"

from .app import app
from .scoring import containment_score, tokenize

__all__ = ["app", "containment_score", "tokenize", "__version__"]
