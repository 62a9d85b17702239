"""Deterministic trajectories and error windows.

Polynomials are kept with exact rational coefficients. Antiderivatives are
taken after expanding (1-t)^b binomially into pure powers of t, and the
expanded form is evaluated exactly at a rational t before converting to a
float, which avoids cancellation between the alternating coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from .core import Params, binom2
from .errors import ParameterError

Term = Tuple[Fraction, int, int, Fraction]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class LogPolynomial:
    """Sum of coeff * t^a * (1-t)^b * (ln n)^c over its terms."""

    def __init__(self, terms: Iterable[Term] = ()):
        merged: Dict[Tuple[int, int, Fraction], Fraction] = {}
        for coeff, a, b, c in terms:
            if a < 0 or b < 0:
                raise ParameterError(f"negative power in term t^{a} (1-t)^{b}")
            key = (int(a), int(b), _frac(c))
            merged[key] = merged.get(key, Fraction(0)) + _frac(coeff)
        self.terms: List[Term] = [(v, a, b, c) for (a, b, c), v in sorted(merged.items()) if v != 0]

    def __repr__(self) -> str:
        return f"LogPolynomial({len(self.terms)} terms)"

    def __eq__(self, other) -> bool:
        return isinstance(other, LogPolynomial) and self.terms == other.terms

    def __add__(self, other: "LogPolynomial") -> "LogPolynomial":
        return LogPolynomial(self.terms + other.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def log_powers(self) -> List[Fraction]:
        return sorted({c for _, _, _, c in self.terms})

    def __call__(self, t: float, n: float) -> float:
        ln = math.log(n)
        return sum(float(k) * t**a * (1 - t) ** b * ln ** float(c) for k, a, b, c in self.terms)

    def exact(self, t, n) -> float:
        """Evaluate with exact rational arithmetic in t; only ln n is a float."""
        t = _frac(t)
        ln = math.log(n)
        by_log: Dict[Fraction, Fraction] = {}
        for k, a, b, c in self.terms:
            by_log[c] = by_log.get(c, Fraction(0)) + k * t**a * (1 - t) ** b
        return sum(float(v) * ln ** float(c) for c, v in by_log.items())

    def expand(self) -> "LogPolynomial":
        """Same polynomial written in pure powers of t."""
        out = []
        for k, a, b, c in self.terms:
            for j in range(b + 1):
                out.append((k * math.comb(b, j) * (-1) ** j, a + j, 0, c))
        return LogPolynomial(out)

    def derivative(self) -> "LogPolynomial":
        out = []
        for k, a, b, c in self.terms:
            if a:
                out.append((k * a, a - 1, b, c))
            if b:
                out.append((-k * b, a, b - 1, c))
        return LogPolynomial(out)

    def antiderivative(self) -> "LogPolynomial":
        """Antiderivative vanishing at t = 0."""
        return LogPolynomial((k / (a + 1), a + 1, 0, c) for k, a, _, c in self.expand().terms)

    def max_on_grid(self, n: float, points: int = 1001) -> float:
        return max(self(i / (points - 1), n) for i in range(points))


@dataclass(frozen=True)
class TypeSignature:
    s: int
    ell: int
    r: int
    k: int

    def validate(self, params: Optional[Params] = None) -> None:
        if self.s < 2:
            raise ParameterError(f"s must be at least 2, got {self.s}")
        if not 0 <= self.ell <= binom2(self.s):
            raise ParameterError(f"ell must lie in [0, {binom2(self.s)}], got {self.ell}")
        if self.k not in (0, 1):
            raise ParameterError(f"k must be 0 or 1, got {self.k}")
        if self.r < 0:
            raise ParameterError(f"r must be non-negative, got {self.r}")
        if params is not None and 3 <= self.s <= params.p and self.r + self.k > params.R(self.s) + 1:
            raise ParameterError(f"r + k = {self.r + self.k} exceeds R(s) + 1 = {params.R(self.s) + 1}")


def contributing_sizes(p: int, q: int) -> List[int]:
    """s in [3, p] with (p - 2) dividing (s - 2) * beta."""
    beta = binom2(p) - q + 1
    return [s for s in range(3, p + 1) if ((s - 2) * beta) % (p - 2) == 0]


def build_h(params: Params, mu) -> LogPolynomial:
    """h(t) from the mu table, keeping only the contributing vertex counts."""
    entries = getattr(mu, "entries", mu) or {}
    p, beta = params.p, params.beta
    kappa = Fraction(params.kappa)
    keep = set(contributing_sizes(params.p, params.q))
    terms = []
    for (ell, eta, s), count in entries.items():
        if s not in keep or count == 0:
            continue
        power = (s - 2) * beta // (p - 2)
        coeff = Fraction(count, eta) / kappa**power
        terms.append((coeff, ell, binom2(s) - ell - 2, Fraction(s - 2, p - 2)))
    return LogPolynomial(terms)


def _check_t(t: float) -> None:
    if not 0 <= t <= 1:
        raise ParameterError(f"t must lie in [0, 1], got {t}")


def H_of_t(h: LogPolynomial, t: float, n: float) -> float:
    _check_t(t)
    return h.antiderivative().exact(t, n)


def a_of_t(h: LogPolynomial, t: float, n: float, _H: Optional[LogPolynomial] = None) -> float:
    """a(t) = exp(-H(t))."""
    _check_t(t)
    H = _H if _H is not None else h.antiderivative()
    return math.exp(-H.exact(t, n))


def rk4_a(h: LogPolynomial, n: float, t_end: float, steps: int = 2000) -> float:
    """Integrate a' = -a h from a(0) = 1 with classical Runge-Kutta."""
    _check_t(t_end)
    if t_end == 0:
        return 1.0
    dt = t_end / steps
    a = 1.0
    t = 0.0
    for _ in range(steps):
        k1 = -a * h(t, n)
        k2 = -(a + dt / 2 * k1) * h(t + dt / 2, n)
        k3 = -(a + dt / 2 * k2) * h(t + dt / 2, n)
        k4 = -(a + dt * k3) * h(t + dt, n)
        a += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    return a


def ext_traj(sig: TypeSignature, params: Params, a_fn: Callable[[float], float], t: float) -> float:
    """n^{s-2} |C|^{-r-k} a^{C(s,2)-ell-1} t^ell (1-t)^{C(s,2)-ell-1}."""
    sig.validate(params)
    _check_t(t)
    e = binom2(sig.s) - sig.ell - 1
    if e < 0:
        raise ParameterError("ext_traj needs ell < C(s, 2)")
    return (
        float(params.n) ** (sig.s - 2)
        * float(params.num_colors) ** (-(sig.r + sig.k))
        * a_fn(t) ** e
        * t**sig.ell
        * (1 - t) ** e
    )


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def error_windows(params: Params, a_fn: Callable[[float], float], t: float, sig: Optional[TypeSignature] = None) -> Dict[str, Optional[float]]:
    """f_Ava, f_Ext and (when a signature is given) f_z at time t."""
    if t < 0:
        raise ParameterError(f"t must be non-negative, got {t}")
    if t > params.t_max:
        raise ParameterError(f"t={t} is beyond t_max={params.t_max}")
    p = params.p
    eps = float(params.epsilon)
    ln = math.log(params.n)
    base = (-float(params.hm_exp) + 20 * p * p * eps) * ln + 10 * p**4 * eps * t * ln
    one_minus = math.log1p(-t)
    a = a_fn(t)
    f_ava = _safe_exp(base - 5 * p * p * one_minus)
    f_ext = _safe_exp(base + (-5 * p * p + 1) * one_minus - math.log(a))
    out = {"f_Ava": f_ava, "f_Ext": f_ext, "f_z": None}
    if sig is not None:
        sig.validate(params)
        out["f_z"] = a ** (binom2(sig.s) - 1 - sig.ell) * f_ext
    return out


class Trajectory:
    """h, H and a for one instance, with the error windows attached."""

    def __init__(self, params: Params, mu=None):
        if mu is None:
            from .platonic.enumerate import cached_mu_table

            mu = cached_mu_table(params.p, params.q)
        self.params = params
        self.mu = mu
        self.h = build_h(params, mu)
        self.H = self.h.antiderivative()

    def h_at(self, t: float) -> float:
        _check_t(t)
        return self.h(t, self.params.n)

    def H_at(self, t: float) -> float:
        _check_t(t)
        return self.H.exact(t, self.params.n)

    def a(self, t: float) -> float:
        return math.exp(-self.H_at(t))

    def ava(self, t: float) -> float:
        return self.params.num_colors * self.a(t)

    def windows(self, t: float, sig: Optional[TypeSignature] = None) -> Dict[str, Optional[float]]:
        return error_windows(self.params, self.a, t, sig)

    def ext(self, sig: TypeSignature, t: float) -> float:
        return ext_traj(sig, self.params, self.a, t)

    def rows(self, grid: Iterable[float]) -> List[Tuple[float, float, float, float, float, float]]:
        """(t, a, h, H, f_Ava, f_Ext) rows; windows are nan beyond t_max."""
        out = []
        for t in grid:
            if t <= self.params.t_max:
                w = self.windows(t)
                fa, fe = w["f_Ava"], w["f_Ext"]
            else:
                fa = fe = math.nan
            out.append((t, self.a(t), self.h_at(t), self.H_at(t), fa, fe))
        return out


def default_grid(points: int = 101) -> List[float]:
    return [i / (points - 1) for i in range(points)]


__all__ = [
    "LogPolynomial",
    "Trajectory",
    "TypeSignature",
    "a_of_t",
    "build_h",
    "contributing_sizes",
    "default_grid",
    "error_windows",
    "ext_traj",
    "H_of_t",
    "rk4_a",
]
