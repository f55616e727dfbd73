"""Command line entry: modelserver --port 8151 --backend gp-fallback."""

from __future__ import annotations

import argparse

from .app import create_app
from .config import BACKENDS, ServerConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelserver",
                                     description="fit-predict prediction service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8151)
    parser.add_argument("--backend", default="gp-fallback", choices=BACKENDS)
    parser.add_argument("--max-rows", type=int, default=10_000)
    parser.add_argument("--max-cols", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    import uvicorn

    args = build_parser().parse_args(argv)
    config = ServerConfig(host=args.host, port=args.port, backend=args.backend,
                          max_rows=args.max_rows, max_cols=args.max_cols,
                          seed=args.seed)
    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
