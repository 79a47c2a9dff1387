"""Surgical outcome prediction on tabular epilepsy cohorts.

Records are dicts keyed by the cohort CSV column names; categorical values use the
schema's labels ("Yes", "Temporal", ...) and the label column holds 0 or 1.
"""

import sys

from ._outcome_forge import (
    Error,
    InfeasibleError,
    cli,
    columns,
    model_ids,
    oversample,
    read_csv,
    run,
    subset_search,
    synthesize,
    write_csv,
)

__all__ = [
    "Error",
    "InfeasibleError",
    "cli",
    "columns",
    "main",
    "model_ids",
    "oversample",
    "read_csv",
    "run",
    "subset_search",
    "synthesize",
    "write_csv",
]


def main(argv=None):
    """Entry point of the ``outcome-forge`` console script."""
    code, out, err = cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
