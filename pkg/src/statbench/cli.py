"""Command-line front end: run, list, validate, report.

``run`` executes a replicated experiment from a JSON config (a file path or a
canned config name), writing records.csv, aggregate.csv, and manifest.json to
the output directory.  ``report`` renders summary figures from an existing
records.csv next to a fresh aggregate.csv.  Exit codes: 0 success, 1
validation failure, 2 runtime failure (partial records are still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .evalsuite import (ConfigError, aggregate, read_records_csv,
                        run_replicated, validate_config, write_aggregate_csv,
                        write_records_csv)


def canned_config_names() -> list[str]:
    root = resources.files("statbench") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config_source(ref: str) -> dict:
    """Resolve a path or canned name to a raw config dict."""
    path = Path(ref)
    if path.exists():
        with open(path) as fh:
            return json.load(fh)
    canned = resources.files("statbench") / "configs" / f"{ref}.json"
    if canned.is_file():
        return json.loads(canned.read_text())
    raise ConfigError(f"config {ref!r} is neither a readable file nor a canned config "
                      f"(known: {', '.join(canned_config_names())})")


def apply_overrides(obj: dict, overrides: list[str]) -> dict:
    """Apply dotted-path key=value overrides; values parse as JSON if they can."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = key.split(".")
        cursor = obj
        for part in parts[:-1]:
            if part not in cursor or not isinstance(cursor[part], dict):
                cursor[part] = {}
            cursor = cursor[part]
        cursor[parts[-1]] = value
    return obj


def config_hash(config) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_manifest(out_dir: Path, config, errors, n_records):
    import numpy

    manifest = {
        "name": config.name,
        "config_hash": config_hash(config),
        "seed": config.seed,
        "config": config.to_dict(),
        "versions": {"statbench": __version__, "numpy": numpy.__version__,
                     "python": sys.version.split()[0]},
        "n_records": n_records,
        "errors": errors,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(args) -> int:
    try:
        raw = load_config_source(args.config)
        raw = apply_overrides(raw, args.set or [])
        config = validate_config(raw)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out or Path("runs") / config.name)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        result = run_replicated(config, jobs=args.jobs)
    except Exception as exc:  # noqa: BLE001 - report, preserve partials, exit 2
        print(f"runtime failure: {exc}", file=sys.stderr)
        write_records_csv(out_dir / "records.csv", [])
        write_aggregate_csv(out_dir / "aggregate.csv", [])
        _write_manifest(out_dir, config, [{"replicate": None, "error": str(exc)}], 0)
        return 2
    write_records_csv(out_dir / "records.csv", result.records)
    write_aggregate_csv(out_dir / "aggregate.csv", result.records)
    _write_manifest(out_dir, config, result.errors, len(result.records))
    print(f"{config.name}: {len(result.records)} records -> {out_dir}")
    if result.errors:
        print(f"{len(result.errors)} replicate error(s); see manifest.json",
              file=sys.stderr)
        return 2
    return 0


def cmd_list(args) -> int:
    for name in canned_config_names():
        cfg = load_config_source(name)
        dgp = cfg.get("dgp", {})
        print(f"{name:18s} kind={dgp.get('kind', '?'):10s} "
              f"replicates={cfg.get('replicates', '?')}")
    return 0


def cmd_validate(args) -> int:
    try:
        raw = load_config_source(args.config)
        raw = apply_overrides(raw, args.set or [])
        config = validate_config(raw)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    print(f"ok: {config.name} ({config.dgp['kind']}, "
          f"{len(config.estimators)} estimators, {config.replicates} replicates)")
    return 0


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def cmd_report(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    records_path = Path(args.records)
    if not records_path.exists():
        print(f"error: {records_path} not found", file=sys.stderr)
        return 1
    records = read_records_csv(records_path)
    out_dir = Path(args.out or records_path.parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_aggregate_csv(out_dir / "aggregate.csv", records)
    rows = aggregate(records)
    panels: dict[tuple, list] = {}
    for row in rows:
        panels.setdefault((row["experiment"], row["metric"]), []).append(row)
    figures = []
    for (experiment, metric), group in sorted(panels.items()):
        group = sorted(group, key=lambda r: r["estimator"])
        names = [r["estimator"] for r in group]
        means = [r["mean"] for r in group]
        ses = [r["se"] for r in group]
        fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(names)), 3.2))
        ax.bar(range(len(names)), means, yerr=ses, capsize=3, color="#4878b0")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.set_ylabel(metric)
        ax.set_title(experiment)
        fig.tight_layout()
        path = out_dir / f"{_slug(experiment)}_{_slug(metric)}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        figures.append(path.name)
    print(f"wrote aggregate.csv and {len(figures)} figure(s) -> {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="statbench",
                                     description="replicated estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config and write outputs")
    p_run.add_argument("config", help="config file path or canned config name")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="dotted-path override, e.g. --set dgp.n=500")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="parallel replicate workers (default 1)")
    p_run.add_argument("--out", help="output directory (default runs/<name>)")
    p_run.set_defaults(fn=cmd_run)

    p_list = sub.add_parser("list", help="print the canned config catalog")
    p_list.set_defaults(fn=cmd_list)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_val.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_val.set_defaults(fn=cmd_validate)

    p_rep = sub.add_parser("report", help="render figures + aggregate table from records.csv")
    p_rep.add_argument("records", help="path to a records.csv produced by run")
    p_rep.add_argument("--out", help="output directory (default: next to records.csv)")
    p_rep.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
