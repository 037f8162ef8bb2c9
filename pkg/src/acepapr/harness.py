"""Seeded Monte Carlo CCDF experiments with deterministic parallel execution.

Every frame's bits come from a counter-based generator keyed by
(seed, frame_index), so frame i's data never depends on processing order.
Work is split into fixed-size chunks of transmissions (the chunk size does
not depend on the worker count) and each chunk reduces to per-threshold
exceedance counts plus a few scalar partials; partials are merged in chunk
order.  The emitted CSV is therefore byte-identical for a given (config,
seed) no matter how many workers ran it.
"""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from . import metrics, sfbc, stbc, transforms
from .ace import AceParams, ace_reduce
from .constellation import get_constellation, map_bits
from .metrics import CcdfCurve, ccdf, papr_db, papr_at_probability
from .transforms import OversamplingConfig

CODINGS = ("none", "stbc2", "stbc4", "sfbc2", "sfbc4")
METHODS = ("none", "ace", "sub_ace", "selective_ace")
REPORT_PROBABILITIES = (1e-1, 1e-2, 1e-3, 1e-4)
WORKERS_ENV = "ACEPAPR_WORKERS"
_CHUNK_TRANSMISSIONS = 2048


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the violated constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ExperimentConfig:
    constellation: str = "qpsk"
    n_c: int = 256
    oversample: int = 4
    coding: str = "none"
    method: str = "none"
    iterations: int = 0
    clip_db: float = 4.86
    frames: int = 100_000
    seed: int = 1
    thresholds: tuple[float, float, float] = (4.0, 13.0, 0.1)
    output_path: str | None = None

    @property
    def frames_per_transmission(self) -> int:
        return {"stbc2": 2, "stbc4": 4}.get(self.coding, 1)

    @property
    def code_gamma(self) -> int:
        return {"sfbc2": 2, "sfbc4": 4, "stbc2": 1, "stbc4": 1, "none": 1}[self.coding]

    def violations(self) -> list[str]:
        problems = []
        if self.constellation not in ("qpsk", "qam16"):
            problems.append(f"unknown constellation {self.constellation!r}")
        if self.coding not in CODINGS:
            problems.append(f"unknown coding {self.coding!r}")
        if self.method not in METHODS:
            problems.append(f"unknown method {self.method!r}")
        if self.method in ("sub_ace", "selective_ace") and not self.coding.startswith("sfbc"):
            problems.append(f"method {self.method} requires sfbc coding, got {self.coding!r}")
        if self.method == "ace" and self.coding.startswith("sfbc"):
            problems.append("method ace requires coding none or stbc2/stbc4")
        if self.n_c < 2:
            problems.append("n_c must be >= 2")
        elif self.coding in CODINGS and self.n_c % self.code_gamma:
            problems.append(f"n_c must be divisible by the code block length {self.code_gamma}")
        if self.oversample < 1:
            problems.append("oversample must be >= 1")
        if self.iterations < 0:
            problems.append("iterations must be >= 0")
        if self.frames < 1:
            problems.append("frames must be >= 1")
        elif self.frames % self.frames_per_transmission:
            problems.append(
                f"frames must be a multiple of {self.frames_per_transmission} for {self.coding}"
            )
        start, stop, step = self.thresholds
        if not (step > 0 and stop > start):
            problems.append("thresholds must be (start, stop, step) with step > 0 and stop > start")
        return problems

    def validated(self) -> "ExperimentConfig":
        problems = self.violations()
        if problems:
            raise ConfigError(problems)
        return self

    def threshold_grid(self) -> np.ndarray:
        return metrics.default_threshold_grid(*self.thresholds)


@dataclass
class RunReport:
    curve: CcdfCurve
    papr_at: dict[float, float | None]
    mean_delta_power: float
    fft_call_count: int
    wall_time: float
    config: ExperimentConfig | None = None


def frame_bits(seed: int, frame_index: int, n_bits: int) -> np.ndarray:
    """Bits of one frame from a counter-based stream keyed by (seed, index)."""
    gen = Generator(Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, frame_index]))
    return gen.integers(0, 2, size=n_bits, dtype=np.uint8)


def _bits_block(seed: int, first_frame: int, count: int, n_bits: int) -> np.ndarray:
    return np.stack([frame_bits(seed, first_frame + i, n_bits) for i in range(count)])


def _chunk_samples(cfg: ExperimentConfig, first_transmission: int, count: int):
    """PAPR samples plus extension-power total for one chunk of transmissions."""
    const = get_constellation(cfg.constellation)
    oversampling = OversamplingConfig(cfg.n_c, cfg.oversample)
    params = AceParams(cfg.clip_db, cfg.iterations, oversampling)
    per_tx = cfg.frames_per_transmission
    n_bits = cfg.n_c * const.bits_per_symbol
    bits = _bits_block(cfg.seed, first_transmission * per_tx, count * per_tx, n_bits)
    frames = map_bits(bits, const)  # (count*per_tx, n_c)
    reference = oversampling.n_c / oversampling.n

    if cfg.coding in ("none", "stbc2", "stbc4"):
        if cfg.method == "ace":
            reduced, diag = ace_reduce(frames, params, const)
            delta_total = float(np.sum(diag.delta_power))
        else:
            reduced, delta_total = frames, 0.0
        if cfg.coding == "none":
            samples = papr_db(transforms.synthesize(reduced, oversampling), reference)
        else:
            blocks = reduced.reshape(count, per_tx, cfg.n_c)
            signals = transforms.synthesize(blocks, oversampling)  # (count, per_tx, n)
            slot_signals = stbc.stbc_time_frames(
                [signals[:, t] for t in range(per_tx)], per_tx
            )  # (n_t, slots, count, n)
            samples = papr_db(slot_signals, reference).max(axis=(0, 1))
    else:
        code = sfbc.get_sfbc_code(2 if cfg.coding == "sfbc2" else 4)
        if cfg.method == "sub_ace":
            antenna_set, diag = sfbc.sub_ace(frames, code, params, const)
            delta_total = float(np.sum(diag.delta_power))
        elif cfg.method == "selective_ace":
            antenna_set, state = sfbc.selective_ace(frames, code, params, const)
            delta_total = float(np.sum(np.abs(state.current - frames) ** 2))
        else:
            signals = transforms.synthesize(sfbc.sfbc_encode(frames, code), oversampling)
            antenna_set = stbc.AntennaTimeSet(signals[:, None], reference)
            delta_total = 0.0
        samples = metrics.overall_papr_db(antenna_set)

    return np.atleast_1d(samples), delta_total


def _run_chunk(args):
    cfg, chunk_index, first_transmission, count = args
    transforms.reset_fft_call_count()
    samples, delta_total = _chunk_samples(cfg, first_transmission, count)
    counts = metrics.exceedance_counts(samples, cfg.threshold_grid())
    return chunk_index, counts, delta_total, samples.size, transforms.fft_call_count()


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def run_experiment(
    cfg: ExperimentConfig,
    *,
    workers: int | None = None,
    progress: bool = False,
) -> RunReport:
    """Run the configured pipeline over cfg.frames seeded random frames.

    Emits the CCDF CSV (and a JSON report next to it) when cfg.output_path is
    set.  Results are bit-identical for identical configs regardless of the
    worker count.
    """
    cfg = cfg.validated()
    workers = resolve_workers(workers)
    started = time.perf_counter()

    transmissions = cfg.frames // cfg.frames_per_transmission
    chunk_bounds = [
        (i, start, min(_CHUNK_TRANSMISSIONS, transmissions - start))
        for i, start in enumerate(range(0, transmissions, _CHUNK_TRANSMISSIONS))
    ]
    tasks = [(cfg, i, start, count) for i, start, count in chunk_bounds]

    results = {}
    if workers == 1 or len(tasks) == 1:
        for task in tasks:
            index, counts, delta, n_samples, ffts = _run_chunk(task)
            results[index] = (counts, delta, n_samples, ffts)
            if progress:
                print(f"chunk {index + 1}/{len(tasks)} done", file=sys.stderr)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, counts, delta, n_samples, ffts in pool.map(_run_chunk, tasks):
                results[index] = (counts, delta, n_samples, ffts)
                if progress:
                    print(f"chunk {index + 1}/{len(tasks)} done", file=sys.stderr)

    grid = cfg.threshold_grid()
    total_counts = np.zeros(grid.size, dtype=np.int64)
    delta_sum = 0.0
    n_samples = 0
    fft_total = 0
    for index in sorted(results):  # fixed merge order, not arrival order
        counts, delta, size, ffts = results[index]
        total_counts += counts
        delta_sum += delta
        n_samples += size
        fft_total += ffts

    curve = CcdfCurve(grid, total_counts / n_samples, cfg.frames, cfg.seed, n_samples=n_samples)
    papr_at = {}
    for p in REPORT_PROBABILITIES:
        try:
            papr_at[p] = papr_at_probability(curve, p)
        except ValueError:
            papr_at[p] = None

    report = RunReport(
        curve=curve,
        papr_at=papr_at,
        mean_delta_power=delta_sum / cfg.frames,
        fft_call_count=fft_total,
        wall_time=time.perf_counter() - started,
        config=cfg,
    )
    if cfg.output_path:
        write_curve_csv(cfg.output_path, curve)
        write_report_json(_report_path(cfg.output_path), report)
    return report


def _report_path(csv_path: str) -> str:
    base, _ = os.path.splitext(csv_path)
    return base + ".json"


def write_curve_csv(path: str, curve: CcdfCurve) -> None:
    lines = ["threshold_db,ccdf"]
    for t, p in zip(curve.thresholds_db, curve.probabilities):
        lines.append(f"{t:.4f},{p:.12g}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report_json(path: str, report: RunReport) -> None:
    payload = {
        "config": vars(report.config) | {"thresholds": list(report.config.thresholds)},
        "curve": {
            "thresholds_db": [float(t) for t in report.curve.thresholds_db],
            "probabilities": [float(p) for p in report.curve.probabilities],
            "n_frames": report.curve.n_frames,
            "n_samples": report.curve.n_samples,
            "seed": report.curve.seed,
        },
        "papr_at": {f"{p:g}": report.papr_at[p] for p in report.papr_at},
        "mean_delta_power": report.mean_delta_power,
        "fft_call_count": report.fft_call_count,
        "wall_time": report.wall_time,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report_json(path: str) -> RunReport:
    with open(path) as fh:
        payload = json.load(fh)
    raw_cfg = payload["config"]
    raw_cfg["thresholds"] = tuple(raw_cfg["thresholds"])
    config = ExperimentConfig(**raw_cfg)
    curve_data = payload["curve"]
    curve = CcdfCurve(
        np.asarray(curve_data["thresholds_db"]),
        np.asarray(curve_data["probabilities"]),
        curve_data["n_frames"],
        curve_data["seed"],
        n_samples=curve_data["n_samples"],
    )
    return RunReport(
        curve=curve,
        papr_at={float(k): v for k, v in payload["papr_at"].items()},
        mean_delta_power=payload["mean_delta_power"],
        fft_call_count=payload["fft_call_count"],
        wall_time=payload["wall_time"],
        config=config,
    )


def report_label(report: RunReport) -> str:
    cfg = report.config
    return f"{cfg.coding}-{cfg.method}-it{cfg.iterations}-seed{cfg.seed}"


def compare_runs(reports, probability: float, labels=None) -> list[dict]:
    """Per-report readouts and pairwise deltas at one probability.

    Returns rows as dicts; a report whose curve does not span the probability
    gets a flag instead of aborting the comparison.  Pairwise delta is
    (second minus first) in dB.
    """
    labels = list(labels) if labels else [report_label(r) for r in reports]
    values = []
    for report in reports:
        try:
            values.append(papr_at_probability(report.curve, probability))
        except ValueError:
            values.append(None)
    rows = []
    for label, value in zip(labels, values):
        rows.append(
            {
                "report_a": label,
                "report_b": "",
                "papr_a_db": value,
                "papr_b_db": None,
                "delta_db": None,
                "note": "" if value is not None else "probability outside curve range",
            }
        )
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            ok = values[i] is not None and values[j] is not None
            rows.append(
                {
                    "report_a": labels[i],
                    "report_b": labels[j],
                    "papr_a_db": values[i],
                    "papr_b_db": values[j],
                    "delta_db": (values[j] - values[i]) if ok else None,
                    "note": "" if ok else "probability outside curve range",
                }
            )
    return rows


def write_comparison_csv(path: str, rows) -> None:
    def fmt(value):
        return "" if value is None else (f"{value:.6f}" if isinstance(value, float) else str(value))

    lines = ["report_a,report_b,papr_a_db,papr_b_db,delta_db,note"]
    for row in rows:
        lines.append(
            ",".join(
                fmt(row[key])
                for key in ("report_a", "report_b", "papr_a_db", "papr_b_db", "delta_db", "note")
            )
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
