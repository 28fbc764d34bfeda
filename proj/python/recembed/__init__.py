"""Python bindings for the recembed library."""

import csv
import json

from ._recembed import (
    DomainError,
    ann_bench,
    estimate_beta,
    exponent_table,
    generate_dataset,
    localized_certificate,
    lp_distance,
    mazur_apply,
    mazur_bounds,
    median_pairwise_distance,
    predict_c,
    predict_fixpoint,
    refined_beta,
    theorem_exponent,
)


def read_result_csv(path):
    """Reads a result CSV written by the CLI.

    Returns (config, rows): the embedded run configuration from the leading
    "# {...}" line (None when absent) and a list of dicts keyed by header.
    """
    config = None
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith("# "):
        config = json.loads(lines[0][2:])
        lines = lines[1:]
    return config, list(csv.DictReader(lines))


__all__ = [
    "DomainError",
    "ann_bench",
    "estimate_beta",
    "exponent_table",
    "generate_dataset",
    "localized_certificate",
    "lp_distance",
    "mazur_apply",
    "mazur_bounds",
    "median_pairwise_distance",
    "predict_c",
    "predict_fixpoint",
    "read_result_csv",
    "refined_beta",
    "theorem_exponent",
]
