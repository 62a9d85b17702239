"""Flat-file formats for colorings, histories, run records and CSV tables.

Every writer has a matching reader and ``read(write(x)) == x``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .. import __version__
from ..errors import ParameterError

VERSION_TAG = f"pqforge {__version__}"
PHASES = ("phase1", "full")


# --- colorings ----------------------------------------------------------------------


@dataclass
class StoredColoring:
    p: int
    q: int
    n: int
    seed: int
    phase: str
    matrix: np.ndarray  # -1 where uncolored
    num_real: int = 0
    num_fresh: int = 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, StoredColoring):
            return NotImplemented
        head = (self.p, self.q, self.n, self.seed, self.phase, self.num_real, self.num_fresh)
        return head == (other.p, other.q, other.n, other.seed, other.phase, other.num_real, other.num_fresh) and bool(
            np.array_equal(self.matrix, other.matrix)
        )


def dumps_coloring(c: StoredColoring) -> str:
    """Header ``pqn p q n seed phase``, a palette line, then ``u v color`` per colored edge."""
    if c.phase not in PHASES:
        raise ParameterError(f"phase must be one of {PHASES}, got {c.phase!r}")
    lines = [f"pqn {c.p} {c.q} {c.n} {c.seed} {c.phase}", f"palette {c.num_real} {c.num_fresh}"]
    iu, iv = np.triu_indices(c.n, k=1)
    vals = c.matrix[iu, iv]
    for u, v, col in zip(iu.tolist(), iv.tolist(), vals.tolist()):
        if col >= 0:
            lines.append(f"{u} {v} {col}")
    return "\n".join(lines) + "\n"


def loads_coloring(text: str) -> StoredColoring:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or rows[0][0] != "pqn" or len(rows[0]) != 6:
        raise ParameterError("coloring file must start with 'pqn p q n seed phase'")
    _, p, q, n, seed, phase = rows[0]
    p, q, n, seed = int(p), int(q), int(n), int(seed)
    if phase not in PHASES:
        raise ParameterError(f"unknown phase {phase!r}")
    body = rows[1:]
    num_real = num_fresh = 0
    if body and body[0][0] == "palette":
        num_real, num_fresh = int(body[0][1]), int(body[0][2])
        body = body[1:]
    mat = np.full((n, n), -1, dtype=np.int64)
    for parts in body:
        if len(parts) != 3:
            raise ParameterError(f"bad coloring line {' '.join(parts)!r}")
        u, v, col = (int(x) for x in parts)
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise ParameterError(f"bad edge ({u}, {v}) for n={n}")
        if col < 0:
            raise ParameterError(f"negative color on ({u}, {v})")
        mat[u, v] = mat[v, u] = col
    return StoredColoring(p, q, n, seed, phase, mat, num_real, num_fresh)


def write_coloring(path, c: StoredColoring) -> None:
    Path(path).write_text(dumps_coloring(c))


def read_coloring(path) -> StoredColoring:
    try:
        return loads_coloring(Path(path).read_text())
    except OSError as exc:
        raise ParameterError(f"cannot read coloring {path}: {exc}") from None


# --- histories ----------------------------------------------------------------------


def dumps_history(history: Sequence[Tuple[int, int, int, int]]) -> str:
    return "".join(f"{i} {u} {v} {c}\n" for i, u, v, c in history)


def loads_history(text: str) -> List[Tuple[int, int, int, int]]:
    out = []
    for ln in text.splitlines():
        if ln.strip():
            i, u, v, c = (int(x) for x in ln.split())
            out.append((i, u, v, c))
    return out


# --- run records --------------------------------------------------------------------


@dataclass
class RunRecord:
    mode: str
    p: int
    q: int
    n: int
    seed: int
    run_seed: int
    attempts: int
    epsilon: str
    kappa: float
    num_colors: int
    i_max: int
    outcome: str
    step_reached: int
    stuck_edge: str = ""
    eager_stuck: bool = True
    colors_used: int = 0
    phase2_rounds: int = 0
    phase2_ok: bool = False
    phase2_reason: str = ""
    verified: str = "skipped"  # pass, fail or skipped
    violations: int = 0
    wall_time: float = 0.0
    version: str = VERSION_TAG
    config: List[str] = field(default_factory=list)

    @property
    def reached(self) -> bool:
        return self.outcome == "reached_imax"


def _scalar(kind: str, raw: str):
    if kind == "bool":
        return raw == "true"
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def dumps_record(r: RunRecord) -> str:
    lines = []
    for f in fields(r):
        v = getattr(r, f.name)
        if f.name == "config":
            lines += [f"config={x}" for x in v]
        elif isinstance(v, bool):
            lines.append(f"{f.name}={'true' if v else 'false'}")
        elif isinstance(v, float):
            lines.append(f"{f.name}={v!r}")
        else:
            lines.append(f"{f.name}={v}")
    return "\n".join(lines) + "\n"


def loads_record(text: str) -> RunRecord:
    kinds = {f.name: f.type for f in fields(RunRecord)}
    vals: Dict[str, object] = {"config": []}
    for ln in text.splitlines():
        if not ln.strip():
            continue
        key, _, raw = ln.partition("=")
        if key not in kinds:
            raise ParameterError(f"unknown record key {key!r}")
        if key == "config":
            vals["config"].append(raw)
        else:
            vals[key] = _scalar(kinds[key], raw)
    return RunRecord(**vals)


def write_record(path, r: RunRecord) -> None:
    Path(path).write_text(dumps_record(r))


def read_record(path) -> RunRecord:
    return loads_record(Path(path).read_text())


# --- CSV tables ---------------------------------------------------------------------


def dumps_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def loads_csv(text: str) -> Tuple[List[str], List[List[float]]]:
    """Header and numeric rows (empty cells become nan)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = [[float(x) if x not in ("", "None") else math.nan for x in row] for row in reader if row]
    return header, rows


# --- index --------------------------------------------------------------------------


INDEX_HEADER = ("seed", "run_seed", "outcome", "step_reached", "colors_used", "verified", "violations", "wall_time")


def dumps_index(records: Sequence[RunRecord]) -> str:
    rows = [[getattr(r, k) for k in INDEX_HEADER] for r in sorted(records, key=lambda r: r.seed)]
    return f"# {VERSION_TAG}\n" + dumps_csv(INDEX_HEADER, rows)


__all__ = [
    "INDEX_HEADER",
    "RunRecord",
    "StoredColoring",
    "VERSION_TAG",
    "dumps_coloring",
    "dumps_csv",
    "dumps_history",
    "dumps_index",
    "dumps_record",
    "loads_coloring",
    "loads_csv",
    "loads_history",
    "loads_record",
    "read_coloring",
    "read_record",
    "write_coloring",
    "write_record",
]
