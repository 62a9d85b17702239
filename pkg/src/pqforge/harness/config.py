"""Run configuration: flat key=value files merged with command-line flags.

File format: one ``key = value`` per line, ``#`` starts a comment, and a
key repeated on several lines builds a list (``seed = 1`` / ``seed = 2``).
List keys also accept comma separated values on one line.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..errors import ParameterError

log = logging.getLogger(__name__)

MODES = ("phase1", "full", "concentration", "lemma-suite", "mu-dump", "trajectory-dump", "verify")
DEFAULT_OUT = "results"
OUT_ENV = "PQFORGE_OUT"

# keys whose values are lists; the file may repeat them
LIST_KEYS = {"seeds", "palette_sizes"}
ALIASES = {"seed": "seeds", "colors": "num_colors", "palette": "palette_sizes", "palette_size": "palette_sizes"}


@dataclass(frozen=True)
class RunConfig:
    mode: str = "full"
    p: Optional[int] = None
    q: Optional[int] = None
    n: Optional[int] = None
    seeds: Tuple[int, ...] = (0,)
    kappa: Optional[float] = None
    epsilon: Optional[str] = None  # kept as text so rationals like 1/10 stay exact
    t_max: Optional[float] = None
    num_colors: Optional[int] = None
    out: Optional[str] = None
    jobs: int = 1
    retries: int = 0
    max_rounds: Optional[int] = None
    probes: bool = True
    eager_stuck: bool = True
    ava_samples: int = 200
    ext_types: Optional[int] = None  # None tracks every type
    ext_max_s: int = 4
    coloring: Optional[str] = None
    palette_sizes: Tuple[int, ...] = (1, 2)
    grid_points: int = 101
    random_types: int = 20
    max_s: int = 6
    preforbidder_budget: int = 2000
    union_trials: int = 2000
    trackable_cap: int = 400

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ParameterError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        needs_pq = self.mode != "verify"
        if needs_pq and (self.p is None or self.q is None):
            raise ParameterError(f"mode {self.mode} needs p and q")
        if self.mode in ("phase1", "full", "concentration", "trajectory-dump") and self.n is None:
            raise ParameterError(f"mode {self.mode} needs n")
        if self.mode == "verify" and not self.coloring:
            raise ParameterError("mode verify needs a coloring file")
        if not self.seeds:
            raise ParameterError("at least one seed is required")
        if any(s < 0 for s in self.seeds):
            raise ParameterError("seeds must be non-negative")
        if self.jobs < 1:
            raise ParameterError(f"jobs must be at least 1, got {self.jobs}")
        if self.retries < 0:
            raise ParameterError(f"retries must be non-negative, got {self.retries}")
        if self.epsilon is not None and self.t_max is not None:
            raise ParameterError("give at most one of epsilon and t_max")
        if self.t_max is not None and not 0 < self.t_max < 1:
            raise ParameterError(f"t_max must lie in (0, 1), got {self.t_max}")
        if self.kappa is not None and self.num_colors is not None:
            raise ParameterError("give at most one of kappa and colors")
        if self.ava_samples < 1:
            raise ParameterError("ava_samples must be positive")
        if self.grid_points < 2:
            raise ParameterError("grid_points must be at least 2")
        return self

    @property
    def out_root(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)

    def instance_dir(self, n: Optional[int] = None) -> Path:
        return self.out_root / f"{self.p}-{self.q}-{self.n if n is None else n}"

    def epsilon_value(self, n: Optional[int] = None):
        """Epsilon override as a Fraction or float, or None for the default."""
        from fractions import Fraction

        if self.t_max is not None:
            return epsilon_for_t_max(self.n if n is None else n, self.t_max)
        if self.epsilon is None:
            return None
        return Fraction(self.epsilon)

    def params(self, n: Optional[int] = None):
        from ..core import derive_params

        n = self.n if n is None else n
        return derive_params(
            self.p, self.q, n, epsilon=self.epsilon_value(n), kappa=self.kappa, num_colors=self.num_colors
        )

    def lines(self) -> List[str]:
        """Echo as key=value lines (lists as repeated keys)."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name in LIST_KEYS:
                out += [f"{f.name}={x}" for x in v]
            else:
                out.append(f"{f.name}={_fmt(v)}")
        return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def epsilon_for_t_max(n: int, t_max: float) -> float:
    """Epsilon with 1 - n^(-epsilon) = t_max."""
    return -math.log1p(-t_max) / math.log(n)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if "bool" in kind:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "str" in kind:
            return raw
        if "float" in kind:
            return float(raw)
        if "int" in kind:
            return int(raw)
    except ValueError:
        raise ParameterError(f"bad value {raw!r} for {key}") from None
    raise ParameterError(f"unsupported key {key}")


def parse_pairs(text: str, source: str = "<config>") -> Dict[str, object]:
    """Parse key=value text into a dict of converted values."""
    values: Dict[str, object] = {}
    lists: Dict[str, List[int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, raw = (x.strip() for x in line.split("=", 1))
        key = ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key not in _TYPES:
            raise ParameterError(f"{source}:{lineno}: unknown key {key!r}")
        if key in LIST_KEYS:
            lists.setdefault(key, []).extend(_int_list(raw, key))
        else:
            values[key] = _convert(key, raw)
    for key, v in lists.items():
        values[key] = tuple(v)
    return values


def _int_list(raw: str, key: str) -> List[int]:
    try:
        return [int(x) for x in raw.replace(",", " ").split()]
    except ValueError:
        raise ParameterError(f"bad integer list {raw!r} for {key}") from None


def dedupe_seeds(seeds) -> Tuple[int, ...]:
    seen: List[int] = []
    for s in seeds:
        if s in seen:
            log.warning("duplicate seed %d ignored", s)
            continue
        seen.append(s)
    return tuple(seen)


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, object]] = None, mode: Optional[str] = None) -> RunConfig:
    """Config file values, then command-line overrides, then validation."""
    values: Dict[str, object] = {}
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ParameterError(f"cannot read config {path}: {exc}") from None
        values.update(parse_pairs(text, path))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[ALIASES.get(k, k)] = v
    if mode is not None:
        values["mode"] = mode
    if "seeds" in values:
        values["seeds"] = dedupe_seeds(values["seeds"])
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ParameterError(str(exc)) from None
    return cfg.validate()


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw).validate()


__all__ = [
    "MODES",
    "OUT_ENV",
    "RunConfig",
    "dedupe_seeds",
    "epsilon_for_t_max",
    "load_config",
    "parse_pairs",
    "with_overrides",
]
