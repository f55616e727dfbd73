"""Server configuration."""

from __future__ import annotations

from dataclasses import dataclass

BACKENDS = ("gp-fallback", "tabpfn-reg", "tabpfn-cls")

DEFAULT_QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8151
    backend: str = "gp-fallback"
    quantiles: tuple = DEFAULT_QUANTILES
    max_rows: int = 10_000          # combined train + query rows per request
    max_cols: int = 500
    max_concurrent_fits: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.max_rows < 1 or self.max_cols < 1:
            raise ValueError("request caps must be positive")
