"""Command line front end.

    acepapr run --coding sfbc2 --method selective_ace --iterations 7 \
        --clip-db 4.86 --frames 100000 --seed 1 --out curve.csv

`run` executes one Monte Carlo experiment and writes the CCDF CSV plus a JSON
report next to it.  `compare` reads several report JSONs and tabulates the
PAPR at one probability together with pairwise deltas.  Flags mirror the
experiment configuration one-to-one; a --config file with `key = value` lines
may supply any of them, with explicit flags taking precedence.  Validation
failures print a machine-readable JSON object on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .harness import (
    CODINGS,
    METHODS,
    ConfigError,
    ExperimentConfig,
    compare_runs,
    load_report_json,
    run_experiment,
    write_comparison_csv,
)

_CONFIG_FIELDS = {
    "constellation": str,
    "n_c": int,
    "oversample": int,
    "coding": str,
    "method": str,
    "iterations": int,
    "clip_db": float,
    "frames": int,
    "seed": int,
    "out": str,
}


def _parse_thresholds(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("thresholds must be start:stop:step in dB")
    return tuple(float(p) for p in parts)


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key == "thresholds":
                values[key] = _parse_thresholds(value.strip())
            elif key in _CONFIG_FIELDS:
                values[key] = _CONFIG_FIELDS[key](value.strip())
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acepapr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo CCDF experiment")
    run.add_argument("--config", help="key = value file supplying any of the flags below")
    run.add_argument("--constellation", choices=("qpsk", "qam16"))
    run.add_argument("--n-c", type=int, dest="n_c", help="subcarrier count")
    run.add_argument("--oversample", type=int, help="oversampling ratio N/n_c")
    run.add_argument("--coding", choices=CODINGS)
    run.add_argument("--method", choices=METHODS)
    run.add_argument("--iterations", type=int)
    run.add_argument("--clip-db", type=float, dest="clip_db")
    run.add_argument("--frames", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--thresholds", type=_parse_thresholds, help="grid start:stop:step in dB")
    run.add_argument("--out", help="CCDF CSV path; JSON report lands next to it")
    run.add_argument("--workers", type=int, help="worker processes (default: available cores)")
    run.add_argument("--progress", action="store_true", help="chunk ticker on stderr")

    cmp_ = sub.add_parser("compare", help="tabulate runs at one CCDF probability")
    cmp_.add_argument("reports", nargs="+", help="report JSON files from `run`")
    cmp_.add_argument("--probability", type=float, default=1e-4)
    cmp_.add_argument("--out", required=True, help="comparison CSV path")
    return parser


def _fail(payload: dict) -> int:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return 2


def _cmd_run(args) -> int:
    values = {}
    if args.config:
        try:
            values.update(_read_config_file(args.config))
        except (OSError, ValueError) as exc:
            return _fail({"error": "config-file", "detail": str(exc)})
    for name in (*_CONFIG_FIELDS, "thresholds"):
        flag = getattr(args, name if name != "out" else "out", None)
        if flag is not None:
            values[name] = flag
    out = values.pop("out", None)
    try:
        cfg = ExperimentConfig(**values, output_path=out).validated()
    except ConfigError as exc:
        return _fail({"error": "invalid-config", "violations": exc.violations})
    except TypeError as exc:
        return _fail({"error": "invalid-config", "violations": [str(exc)]})

    report = run_experiment(cfg, workers=args.workers, progress=args.progress)
    readouts = ", ".join(
        f"1e{round(math.log10(p))}: " + (f"{v:.2f} dB" if v is not None else "n/a")
        for p, v in sorted(report.papr_at.items(), reverse=True)
    )
    print(f"{cfg.coding}/{cfg.method} seed={cfg.seed} frames={cfg.frames}  PAPR@ {readouts}")
    if cfg.output_path:
        print(f"wrote {cfg.output_path}")
    return 0


def _cmd_compare(args) -> int:
    if not 0.0 < args.probability <= 1.0:
        return _fail({"error": "invalid-probability", "detail": "must be in (0, 1]"})
    try:
        reports = [load_report_json(path) for path in args.reports]
    except (OSError, ValueError, KeyError) as exc:
        return _fail({"error": "bad-report", "detail": str(exc)})
    rows = compare_runs(reports, args.probability)
    write_comparison_csv(args.out, rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_compare(args)


if __name__ == "__main__":
    sys.exit(main())
