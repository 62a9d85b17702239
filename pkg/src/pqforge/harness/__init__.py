"""Experiment orchestration: configs, runs, flat-file records and charts."""

from .commands import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_STUCK,
    EXIT_VERIFY,
    cmd_concentration,
    cmd_lemma_suite,
    cmd_mu_dump,
    cmd_run,
    cmd_trajectory_dump,
    cmd_verify,
)
from .config import RunConfig, load_config
from .records import RunRecord, StoredColoring, read_coloring, read_record
from .svg import line_chart
