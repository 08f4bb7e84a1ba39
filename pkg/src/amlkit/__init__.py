"""Synthetic AML transaction generation, streaming detection, and evaluation."""

__version__ = "0.1.0"

from .config import AppConfig, load_config

__all__ = ["AppConfig", "load_config", "__version__"]
