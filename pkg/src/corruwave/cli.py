"""Command-line entry point: ``corruwave <task> --config <file>``."""

import argparse
import csv
import json
import math
import os
import sys

from . import __version__
from .errors import CorruwaveError
from .experiments import TASKS, ConfigError, ExperimentConfig, run_task

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    return v


def columns(rows):
    cols = []
    for row in rows:
        for k in row:
            if k not in cols and k != "status":
                cols.append(k)
    return cols + ["status"]


def render_csv(rows):
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = columns(rows)
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row.get(c, math.nan)) for c in cols])
    return buf.getvalue()


def render_json(rows):
    clean = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()} for r in rows]
    return json.dumps(clean, indent=1, sort_keys=False) + "\n"


def write_outputs(cfg, rows, out, fmt, overwrite=False):
    text = render_csv(rows) if fmt == "csv" else render_json(rows)
    if os.path.exists(out) and not overwrite:
        with open(out) as f:
            if f.read() == text:
                return False
        raise FileExistsError(f"{out} exists with different content; pass --overwrite")
    with open(out, "w", newline="") as f:
        f.write(text)
    n_fail = sum(r.get("status") != "ok" for r in rows)
    meta = {"config": cfg.to_dict(), "version": __version__, "rows": len(rows), "failed": n_fail}
    with open(out + ".meta.json", "w") as f:
        json.dump(meta, f, indent=1, sort_keys=True)
    return True


def build_parser():
    ap = argparse.ArgumentParser(prog="corruwave", description=__doc__)
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--config", help="JSON experiment configuration")
    ap.add_argument("--out", help="output path (default from config or <task>.<format>)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--overwrite", action="store_true", help="replace an existing output file")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        doc = {}
        if args.config:
            with open(args.config) as f:
                doc = json.load(f)
        cfg = ExperimentConfig.from_dict(doc, task=args.task)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = args.format or cfg.output.get("format", "csv")
    out = args.out or cfg.output.get("path") or f"{cfg.task}.{fmt}"
    try:
        rows = run_task(cfg, threads=max(1, args.threads))
    except CorruwaveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if rows and all(r.get("status") != "ok" for r in rows):
        print("solver failure: no scan point succeeded", file=sys.stderr)
        return EXIT_SOLVER
    try:
        write_outputs(cfg, rows, out, fmt, overwrite=args.overwrite)
    except FileExistsError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    n_fail = sum(r.get("status") != "ok" for r in rows)
    print(f"{cfg.task}: {len(rows)} rows ({n_fail} failed) -> {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
