"""Reference implementation of the fit-predict wire protocol."""

from .app import create_app
from .config import BACKENDS, ServerConfig

__version__ = "0.1.0"

__all__ = ["create_app", "ServerConfig", "BACKENDS", "__version__"]
