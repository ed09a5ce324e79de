import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unilab.experiments import (
    HEADER,
    Row,
    SpecError,
    contour,
    run_baiyin,
    run_embed_sweep,
    run_experiment,
    run_functional_report,
    run_l1_heatmap,
    run_nonuniversality,
    run_rsv_curve,
    spec_from_dict,
    write_outputs,
)
from unilab.experiments.table import format_rows, parse_rows
from unilab.oracles import isotonic_fit


def doc(kind="embed_sweep", trials=10, x=(16, 48), models=("gaussian",), set_=None, **extra):
    out = {
        "experiment": {"kind": kind, "name": "t", "trials": trials, "seed": 5, **extra},
        "models": [{"kind": m} for m in models],
        "grid": {"x": list(x)},
    }
    if set_ is not None:
        out["set"] = set_
    return out


ORTHANT = {"family": "orthant", "D": 64}


def test_spec_parsing_and_errors():
    spec = spec_from_dict(doc(set_=ORTHANT))
    assert spec.kind == "embed_sweep" and spec.trials == 10 and spec.x == (16, 48)
    spec = spec_from_dict({**doc(set_=ORTHANT), "grid": {"x": {"from": 16, "to": 28, "step": 4}}})
    assert spec.x == (16, 20, 24, 28)
    bad = [
        {**doc(set_=ORTHANT), "extra": {}},
        doc(set_=ORTHANT, colour="red"),
        doc(set_={**ORTHANT, "k": 3}),
        {**doc(set_=ORTHANT), "grid": {"x": [16], "z": [1]}},
        {**doc(set_=ORTHANT), "models": [{"kind": "gaussian", "dof": 3}]},
        {**doc(set_=ORTHANT), "grid": {"x": {"from": 1, "to": 3, "by": 1}}},
        doc(kind="nope"),
        doc(set_=ORTHANT, trials=0),
        doc(),
        doc(kind="l1_heatmap", set_=ORTHANT),
        doc(kind="l1_heatmap"),
        doc(kind="rsv_curve", set_=ORTHANT),
        {**doc(set_=ORTHANT), "models": [{"kind": "gaussian"}, {"kind": "gaussian"}]},
    ]
    for d in bad:
        with pytest.raises(SpecError):
            spec_from_dict(d)


def test_overrides():
    spec = spec_from_dict(doc(set_=ORTHANT)).with_overrides(seed=9, output_dir="x")
    assert spec.master_seed == 9 and spec.output_dir == "x"


def test_embed_sweep_examples():
    spec = spec_from_dict(doc(set_=ORTHANT, x=(8, 64), trials=100, models=("gaussian", "rademacher"), sdim_samples=1000))
    rows = run_embed_sweep(spec)
    by = {(r.model, r.cell_x): r for r in rows}
    for m in ("gaussian", "rademacher"):
        assert by[(m, 8)].mean <= 0.05
        assert by[(m, 64)].mean == 1.0
    ref = [r for r in rows if r.model == "reference"]
    assert len(ref) == 1 and abs(ref[0].mean - 32) < 2


def test_embed_curve_isotonic_residual():
    spec = spec_from_dict({**doc(set_=ORTHANT, trials=40, sdim_samples=1000), "grid": {"x": {"from": 20, "to": 44, "step": 4}}})
    rows = [r for r in run_experiment(spec) if r.model == "gaussian"]
    y = np.array([r.mean for r in rows])
    assert np.max(np.abs(isotonic_fit(y) - y)) <= 0.15


def test_determinism_across_workers():
    spec = spec_from_dict({**doc(set_=ORTHANT, trials=5, x=(28, 32, 36), sdim_samples=1000),
                           "models": [{"kind": "gaussian"}, {"kind": "student_t", "dof": 5}]})
    a = format_rows(run_experiment(spec, threads=1))
    b = format_rows(run_experiment(spec, threads=2))
    assert a == b
    assert a == format_rows(run_experiment(spec, threads=1))


def test_rsv_curve_examples():
    d = doc(kind="rsv_curve", set_={"family": "simplex", "D": 64}, x=(8, 64), trials=20, models=("gaussian", "rademacher"))
    rows = run_rsv_curve(spec_from_dict(d))
    by = {(r.model, r.cell_x): r.mean for r in rows}
    assert by[("gaussian", 8)] <= 0.1
    assert abs(by[("gaussian", 64)] - by[("reference", 64)]) <= 0.15 * 8
    assert abs(by[("gaussian", 64)] - by[("rademacher", 64)]) <= 0.15 * 8


def test_l1_heatmap_edges():
    d = doc(kind="l1_heatmap", x=(0, 6), trials=10, n=16)
    d["grid"]["y"] = [1, 16]
    rows = run_l1_heatmap(spec_from_dict(d))
    by = {(r.cell_x, r.cell_y): r.mean for r in rows if r.model == "gaussian"}
    assert by[(0, 1)] == 1.0 and by[(0, 16)] == 1.0 and by[(6, 16)] == 1.0


def test_heatmap_window_and_contour():
    d = doc(kind="l1_heatmap", x=(8,), trials=20, n=32)
    d["grid"]["y_window"] = 5
    spec = spec_from_dict(d)
    rows = run_experiment(spec)
    ys = sorted(r.cell_y for r in rows if r.model == "gaussian")
    assert len(ys) == 11 and ys == list(range(ys[0], ys[0] + 11))
    c = contour(rows, "gaussian", smallest=True, bound=1)
    assert c[8] is not None and ys[0] < c[8] <= ys[-1]


def test_contour_censoring():
    rows = [Row("e", 1, y, "m", 10, 0, 0, v, 0.0, 0) for y, v in [(3, 0.9), (4, 1.0)]]
    assert contour(rows, "m") == {1: None}
    assert contour(rows, "m", bound=3) == {1: 3}
    rows.append(Row("e", 1, 2, "m", 10, 0, 0, 0.1, 0.0, 0))
    assert contour(rows, "m") == {1: 3}
    assert contour(rows, "m", smallest=False) == {1: None}


def test_baiyin_and_nonuniversality():
    rows = run_baiyin(spec_from_dict(doc(kind="baiyin", x=(400,), trials=20, rho=0.25)))
    g = next(r for r in rows if r.model == "gaussian")
    assert 0.45 <= g.mean <= 0.55
    d = doc(kind="nonuniversality_maxsv", set_={"family": "simplex", "D": 64}, x=(16,), trials=100)
    d["models"] = [{"kind": "gaussian"}, {"kind": "student_t", "dof": 5}]
    a, b = run_nonuniversality(spec_from_dict(d))
    assert abs(a.mean - b.mean) > 3 * math.hypot(a.std_error, b.std_error)


def test_functional_report_row():
    d = {"experiment": {"kind": "functional_report", "name": "f", "samples": 100000, "seed": 1},
         "set": ORTHANT, "grid": {"x": [32]}}
    rows = run_functional_report(spec_from_dict(d))
    by = {r.model: r.mean for r in rows}
    assert abs(by["sdim"] - 32) < 0.5
    assert by["sdim"] - 1 <= by["width"] ** 2 <= by["sdim"]


def test_csv_header_and_digits():
    text = format_rows([Row("e", 1, None, "m", 3, 1, 2, 1 / 3, 0.1, 7)])
    lines = text.splitlines()
    assert lines[0] == "experiment,cell_x,cell_y,model,trials,failed,successes,mean,std_error,seed"
    assert tuple(lines[0].split(",")) == HEADER
    assert lines[1] == "e,1,,m,3,1,2,0.33333333333333331,0.10000000000000001,7"


cells = st.one_of(st.none(), st.integers(-1000, 1000), st.floats(-1e6, 1e6, allow_nan=False).filter(lambda v: not float(v).is_integer()))
reals = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(cells, cells, st.text("abc_()0.5", min_size=1), st.integers(0, 100), reals, st.floats(0, 10)), max_size=8))
def test_csv_round_trip(items):
    rows = [Row("exp", x, y, m, n, 0, n // 2, mean, se, 3) for x, y, m, n, mean, se in items]
    assert parse_rows(format_rows(rows)) == rows


def test_outputs_written(tmp_path):
    spec = spec_from_dict(doc(set_=ORTHANT, trials=5, x=(28, 36), sdim_samples=1000)).with_overrides(output_dir=str(tmp_path))
    rows = run_experiment(spec)
    paths = write_outputs(spec, rows, "both")
    assert {p.suffix for p in paths} == {".csv", ".svg"}
    root = ET.parse(paths[1]).getroot()
    assert root.tag.endswith("svg")
    assert "href" not in paths[1].read_text()
    assert write_outputs(spec, rows, "csv")[0].suffix == ".csv"


@pytest.mark.parametrize("kind,extra", [
    ("l1_heatmap", {"n": 16}),
    ("decode_heatmap", {"m": 8}),
])
def test_heatmap_svgs_render(tmp_path, kind, extra):
    d = doc(kind=kind, x=(4, 6) if kind == "l1_heatmap" else (16, 24), trials=3, **extra)
    d["grid"]["y_window"] = 2
    spec = spec_from_dict(d).with_overrides(output_dir=str(tmp_path))
    p = write_outputs(spec, run_experiment(spec), "svg")[0]
    assert ET.parse(p).getroot().tag.endswith("svg")
