"""Config-driven experiment driver: TOML specs in, CSV tables and SVG plots out."""
from unilab.experiments.driver import (
    TrialRecord,
    run_baiyin,
    run_decode_heatmap,
    run_embed_sweep,
    run_experiment,
    run_functional_report,
    run_l1_heatmap,
    run_lasso_curve,
    run_nonuniversality,
    run_rsv_curve,
    run_sketch_ls,
    write_outputs,
)
from unilab.experiments.spec import ExperimentSpec, SpecError, load_spec, spec_from_dict
from unilab.experiments.table import HEADER, Row, contour, read_csv, write_csv

__all__ = [
    "ExperimentSpec",
    "SpecError",
    "TrialRecord",
    "Row",
    "HEADER",
    "load_spec",
    "spec_from_dict",
    "run_experiment",
    "run_embed_sweep",
    "run_rsv_curve",
    "run_l1_heatmap",
    "run_decode_heatmap",
    "run_lasso_curve",
    "run_sketch_ls",
    "run_baiyin",
    "run_nonuniversality",
    "run_functional_report",
    "write_outputs",
    "read_csv",
    "write_csv",
    "contour",
]
