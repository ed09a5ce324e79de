"""Experiment spec files (TOML) and their validation.

A spec has four tables::

    [experiment]            kind, name, trials, seed, output_dir + kind parameters
    [set]                   family + family parameters (kinds that use a set)
    [[models]]              one table per random-matrix model
    [grid]                  x, y (range table or list), y_window

Unknown keys anywhere are errors.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from unilab.geometry import Simplex, ShiftedBall, set_from_config
from unilab.models import ModelError, SeedSpec, model_from_config

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

KINDS = (
    "embed_sweep",
    "rsv_curve",
    "l1_heatmap",
    "decode_heatmap",
    "lasso_curve",
    "sketch_ls",
    "nonuniversality_l1rsv",
    "nonuniversality_maxsv",
    "baiyin",
    "functional_report",
)

# kind -> (parameter defaults, needs set, needs models, 2-D grid)
KIND_INFO = {
    "embed_sweep": ({"sdim_samples": 100000}, True, True, False),
    "rsv_curve": ({}, True, True, False),
    "l1_heatmap": ({"n": 64}, False, True, True),
    "decode_heatmap": ({"m": 64}, False, True, True),
    "lasso_curve": ({"p": 64, "s": 16, "sigma": 1.0}, False, True, False),
    "sketch_ls": ({"D": 500, "n": 20, "iota": 0.1}, False, True, False),
    "nonuniversality_l1rsv": ({}, True, True, False),
    "nonuniversality_maxsv": ({}, True, True, False),
    "baiyin": ({"rho": 0.25}, False, True, False),
    "functional_report": ({"samples": 100000}, True, False, False),
}

AXIS_NAMES = {
    "embed_sweep": ("d", None),
    "rsv_curve": ("d", None),
    "l1_heatmap": ("s", "m"),
    "decode_heatmap": ("n", "s"),
    "lasso_curve": ("n", None),
    "sketch_ls": ("d", None),
    "nonuniversality_l1rsv": ("d", None),
    "nonuniversality_maxsv": ("d", None),
    "baiyin": ("d", None),
    "functional_report": ("m", None),
}

_COMMON = {"kind", "name", "trials", "seed", "output_dir"}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    name: str
    set: object | None
    models: tuple
    x: tuple
    y: tuple | None = None
    y_window: int | None = None
    trials: int = 100
    master_seed: int = 0
    output_dir: str = "results"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise SpecError("trials must be at least 1")
        if not self.x:
            raise SpecError("grid x axis is empty")
        _, needs_set, needs_models, two_d = KIND_INFO[self.kind]
        if needs_set and self.set is None:
            raise SpecError(f"kind {self.kind} needs a [set] table")
        if not needs_set and self.set is not None:
            raise SpecError(f"kind {self.kind} does not use a [set] table")
        if needs_models and not self.models:
            raise SpecError(f"kind {self.kind} needs at least one [[models]] table")
        if not needs_models and self.models:
            raise SpecError(f"kind {self.kind} does not use [[models]]")
        if two_d and self.y is None and self.y_window is None:
            raise SpecError(f"kind {self.kind} needs grid y or y_window")
        if not two_d and (self.y is not None or self.y_window is not None):
            raise SpecError(f"kind {self.kind} has a one-dimensional grid")
        if self.kind == "rsv_curve" and not isinstance(self.set, Simplex):
            raise SpecError("rsv_curve runs on the simplex")
        if self.kind == "nonuniversality_maxsv" and not isinstance(self.set, Simplex):
            raise SpecError("nonuniversality_maxsv runs on the simplex")
        if self.kind == "nonuniversality_l1rsv" and not isinstance(self.set, ShiftedBall):
            raise SpecError("nonuniversality_l1rsv runs on the shifted ball")

    def seed_for(self, model_name: str, cell, trial: int) -> SeedSpec:
        x, y = cell
        label = f"{self.kind}/{model_name}/{x}/{'' if y is None else y}"
        return SeedSpec(self.master_seed, trial, label)

    def with_overrides(self, seed: int | None = None, output_dir: str | None = None) -> "ExperimentSpec":
        out = self
        if seed is not None:
            out = replace(out, master_seed=int(seed))
        if output_dir is not None:
            out = replace(out, output_dir=str(output_dir))
        return out


def _axis(value, where: str) -> tuple:
    if isinstance(value, list):
        if not value:
            raise SpecError(f"{where} is an empty list")
        return tuple(value)
    if isinstance(value, dict):
        extra = set(value) - {"from", "to", "step"}
        if extra:
            raise SpecError(f"unknown keys in {where}: {sorted(extra)}")
        try:
            lo, hi = value["from"], value["to"]
        except KeyError as exc:
            raise SpecError(f"{where} needs key {exc}") from None
        step = value.get("step", 1)
        if step <= 0:
            raise SpecError(f"{where}.step must be positive")
        out = []
        v = lo
        while v <= hi + 1e-12:
            out.append(v)
            v = v + step
        if not out:
            raise SpecError(f"{where} is empty")
        return tuple(out)
    raise SpecError(f"{where} must be a list or a from/to/step table")


def spec_from_dict(doc: dict) -> ExperimentSpec:
    doc = dict(doc)
    extra = set(doc) - {"experiment", "set", "models", "grid"}
    if extra:
        raise SpecError(f"unknown top-level tables: {sorted(extra)}")
    exp = dict(doc.get("experiment") or {})
    kind = exp.get("kind")
    if kind not in KINDS:
        raise SpecError(f"[experiment].kind must be one of {', '.join(KINDS)}; got {kind!r}")
    defaults = KIND_INFO[kind][0]
    unknown = set(exp) - _COMMON - set(defaults)
    if unknown:
        raise SpecError(f"unknown keys in [experiment] for kind {kind}: {sorted(unknown)}")
    params = {k: exp.get(k, v) for k, v in defaults.items()}

    seed = int(exp.get("seed", 0))
    set_desc = None
    if "set" in doc:
        try:
            set_desc = set_from_config(doc["set"], SeedSpec(seed, 0, "set"))
        except ValueError as exc:
            raise SpecError(f"[set]: {exc}") from None

    models = []
    for i, m in enumerate(doc.get("models") or []):
        try:
            models.append(model_from_config(m))
        except (ModelError, TypeError) as exc:
            raise SpecError(f"[[models]] #{i + 1}: {exc}") from None
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise SpecError("duplicate models in [[models]]")

    grid = dict(doc.get("grid") or {})
    unknown = set(grid) - {"x", "y", "y_window"}
    if unknown:
        raise SpecError(f"unknown keys in [grid]: {sorted(unknown)}")
    if "x" not in grid:
        raise SpecError("[grid] needs an x axis")
    x = _axis(grid["x"], "grid.x")
    y = _axis(grid["y"], "grid.y") if "y" in grid else None
    y_window = grid.get("y_window")
    if y is not None and y_window is not None:
        raise SpecError("give grid.y or grid.y_window, not both")
    if y_window is not None and (not isinstance(y_window, int) or y_window < 0):
        raise SpecError("grid.y_window must be a nonnegative integer")

    return ExperimentSpec(
        kind=kind,
        name=str(exp.get("name", kind)),
        set=set_desc,
        models=tuple(models),
        x=x,
        y=y,
        y_window=y_window,
        trials=int(exp.get("trials", 100)),
        master_seed=seed,
        output_dir=str(exp.get("output_dir", "results")),
        params=params,
    )


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    with path.open("rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SpecError(f"{path}: {exc}") from None
    return spec_from_dict(doc)


def model_names(spec: ExperimentSpec) -> list:
    return [m.name for m in spec.models]


__all__ = ["ExperimentSpec", "SpecError", "KINDS", "AXIS_NAMES", "load_spec", "spec_from_dict"]
