"""``gsim`` command line: run one experiment from a JSON config and write CSV plus a manifest."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np
import pydantic

from . import __version__
from .config import EXPERIMENTS, config_hash, parse_config, render_config
from .experiments import DatasetError, run_experiment
from .lie import ResourceLimitError
from .models import GraphError

log = logging.getLogger("gsim")

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_VERIFY = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsim", description="Lie-algebraic circuit simulation experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, type=Path, help="JSON config (schema gsim-experiment/1)")
    p.add_argument("--verify", action="store_true", help="run small-n oracle cross-checks first")
    p.add_argument("--out", type=Path, help="output directory (overrides the config)")
    p.add_argument("--threads", type=int, help="worker processes (overrides the config)")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def load_config(path: Path, experiment: str, overrides: dict):
    data = json.loads(path.read_text())
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(data, experiment)


def write_table(path: Path, rows: list[dict]):
    fields: list[str] = []
    for r in rows:
        fields += [k for k in r if k not in fields]
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _versions() -> dict:
    import numba
    import scipy

    return dict(gsim=__version__, python=platform.python_version(), numpy=np.__version__,
                scipy=scipy.__version__, numba=numba.__version__, pydantic=pydantic.__version__)  # fmt: skip


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args.config, args.experiment, dict(seed=args.seed, threads=args.threads))
    except (OSError, ValueError, pydantic.ValidationError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG

    out = args.out or Path(cfg.out or f"gsim-out/{cfg.experiment}")
    out.mkdir(parents=True, exist_ok=True)
    manifest = dict(experiment=cfg.experiment, config_hash=config_hash(cfg), seed=cfg.seed,
                    config=json.loads(render_config(cfg)), versions=_versions(), wall_seconds={})  # fmt: skip

    if args.verify:
        from .verify import verify_experiment

        t0 = time.perf_counter()
        try:
            checks = verify_experiment(cfg)
        except ResourceLimitError as exc:
            log.error("resource cap: %s", exc)
            return EXIT_RESOURCE
        manifest["wall_seconds"]["verify"] = time.perf_counter() - t0
        write_table(out / "verification.csv", [c.row() for c in checks])
        manifest["verification"] = [c.row() for c in checks]
        for c in checks:
            log.info("verify %-4s %.2e (tol %.0e) %s", "ok" if c.ok else "FAIL", c.error, c.tol, c.name)
        if not all(c.ok for c in checks):
            (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2))
            log.error("verification failed; not running the experiment")
            return EXIT_VERIFY

    t0 = time.perf_counter()
    try:
        result = run_experiment(cfg)
    except (ResourceLimitError, MemoryError) as exc:
        log.error("resource cap: %s", exc)
        return EXIT_RESOURCE
    except (GraphError, DatasetError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    manifest["wall_seconds"]["run"] = time.perf_counter() - t0

    for name, rows in result.tables.items():
        write_table(out / f"{name}.csv", rows)
    manifest["tables"] = sorted(f"{name}.csv" for name in result.tables)
    manifest["summary"] = result.summary
    (out / "summary.json").write_text(json.dumps(_jsonable(result.summary), indent=2, sort_keys=True))
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2))
    log.info("wrote %s", ", ".join(manifest["tables"] + ["summary.json", "manifest.json"]))
    log.info(json.dumps(_jsonable(result.summary), default=str)[:2000])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
