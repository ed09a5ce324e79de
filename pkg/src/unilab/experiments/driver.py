"""Seeded, parallel experiment driver.

Work is split into (model, cell) tasks, each running all of that cell's
trials.  Every trial's randomness comes from its own SeedSpec, and rows are
assembled in grid order after all tasks finish, so the output is identical
for any worker count.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from unilab.experiments import kinds
from unilab.experiments.spec import ExperimentSpec
from unilab.experiments.table import REFERENCE, Row, write_csv
from unilab.results import FunctionalEstimate
from unilab.solvers import SolverFailure

log = logging.getLogger("unilab.experiments")


@dataclass(frozen=True)
class TrialRecord:
    cell: tuple
    model: str
    trial_index: int
    value: float | None
    success: bool | None
    failed: bool
    wall_time: float


def run_cell(spec: ExperimentSpec, model_index: int, cell: tuple) -> list:
    model = spec.models[model_index]
    fn = kinds.TRIALS[spec.kind]
    out = []
    for i in range(spec.trials):
        seed = spec.seed_for(model.name, cell, i)
        t0 = time.perf_counter()
        try:
            value, success = fn(spec, model, cell, seed)
            failed = not math.isfinite(value)
        except (SolverFailure, ArithmeticError) as exc:
            log.warning("trial %s/%s/%s/%d failed: %s", spec.kind, model.name, cell, i, exc)
            value, success, failed = None, None, True
        out.append(TrialRecord(cell, model.name, i, value, success, failed, time.perf_counter() - t0))
    return out


def _task(args):
    spec, mi, cell = args
    return run_cell(spec, mi, cell)


def aggregate(spec: ExperimentSpec, records: list) -> Row:
    """Collapse one (cell, model) group of trials into a CSV row."""
    cell = records[0].cell
    done = [r for r in records if not r.failed]
    failed = len(records) - len(done)
    successes = sum(1 for r in done if r.success)
    n = len(done)
    if n == 0:
        mean, se = math.nan, math.nan
    elif spec.kind in kinds.RATE_KINDS:
        mean = successes / n
        se = math.sqrt(mean * (1.0 - mean) / n)
    else:
        est = FunctionalEstimate.from_samples([r.value for r in done])
        mean, se = est.value, est.std_error
    return Row(spec.name, cell[0], cell[1], records[0].model, len(records), failed, successes, mean, se, spec.master_seed)


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> list:
    """Run every trial of an experiment and return the CSV rows (reference rows last)."""
    if spec.kind == "functional_report":
        return _functional_report(spec)
    grid = kinds.cells(spec)
    tasks = [(spec, mi, cell) for mi in range(len(spec.models)) for cell in grid]
    if threads <= 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_task, tasks, chunksize=1))
    rows = [aggregate(spec, recs) for recs in results]
    for x, y, value, se in kinds.reference_rows(spec):
        rows.append(Row(spec.name, x, y, REFERENCE, 0, 0, 0, value, se, spec.master_seed))
    return rows


def _functional_report(spec: ExperimentSpec) -> list:
    rows = []
    for name, x, est in kinds.functional_rows(spec):
        rows.append(Row(spec.name, x, None, name, est.n_samples, 0, 0, est.value, est.std_error, spec.master_seed))
    return rows


def _require(spec, kind):
    if spec.kind != kind:
        raise ValueError(f"spec kind is {spec.kind}, expected {kind}")


def run_embed_sweep(spec, threads=1):
    _require(spec, "embed_sweep")
    return run_experiment(spec, threads)


def run_rsv_curve(spec, threads=1):
    _require(spec, "rsv_curve")
    return run_experiment(spec, threads)


def run_l1_heatmap(spec, threads=1):
    _require(spec, "l1_heatmap")
    return run_experiment(spec, threads)


def run_decode_heatmap(spec, threads=1):
    _require(spec, "decode_heatmap")
    return run_experiment(spec, threads)


def run_lasso_curve(spec, threads=1):
    _require(spec, "lasso_curve")
    return run_experiment(spec, threads)


def run_sketch_ls(spec, threads=1):
    _require(spec, "sketch_ls")
    return run_experiment(spec, threads)


def run_baiyin(spec, threads=1):
    _require(spec, "baiyin")
    return run_experiment(spec, threads)


def run_nonuniversality(spec, threads=1):
    if spec.kind not in ("nonuniversality_l1rsv", "nonuniversality_maxsv"):
        raise ValueError(f"spec kind is {spec.kind}, expected a nonuniversality kind")
    return run_experiment(spec, threads)


def run_functional_report(spec, threads=1):
    _require(spec, "functional_report")
    return run_experiment(spec, threads)


def write_outputs(spec: ExperimentSpec, rows: list, fmt: str = "both") -> list:
    """Write <output_dir>/<name>.csv and/or .svg; returns the written paths."""
    from unilab.experiments.svg import render

    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        p = out / f"{spec.name}.csv"
        write_csv(p, rows)
        written.append(p)
    if fmt in ("svg", "both"):
        p = out / f"{spec.name}.svg"
        p.write_text(render(spec.kind, rows, spec.params), encoding="utf-8")
        written.append(p)
    return written
