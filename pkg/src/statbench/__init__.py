"""statbench: a simulation workbench for estimation procedures with
pluggable black-box predictors."""

__version__ = "0.1.0"

from .data import Dataset, SemiSupPair, concat

__all__ = ["Dataset", "SemiSupPair", "concat", "__version__"]
