"""Instance parameters, colors, edges and repeat budgets.

Everything here is a pure value or a pure function; the rest of the
package builds on these definitions.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from operator import itemgetter
from typing import Iterable, Mapping, NamedTuple, Optional, Tuple

from .errors import EnumerationError, ParameterError

# Largest p for which the default kappa is derived by enumeration.
MAX_ENUMERATION_P = 6


class Color(NamedTuple):
    """A tagged color: ``kind`` is ``"real"``, ``"platonic"`` or ``"fresh"``."""

    kind: str
    index: int

    def __repr__(self) -> str:
        return f"{self.kind[0]}{self.index}"

    @property
    def is_real(self) -> bool:
        return self.kind == REAL

    @property
    def is_platonic(self) -> bool:
        return self.kind == PLATONIC


REAL = "real"
PLATONIC = "platonic"
FRESH = "fresh"
_KINDS = (REAL, PLATONIC, FRESH)


def real(i: int) -> Color:
    return Color(REAL, i)


def platonic(i: int) -> Color:
    return Color(PLATONIC, i)


def fresh(i: int) -> Color:
    return Color(FRESH, i)


class Edge(tuple):
    """An unordered pair of distinct vertices, stored as ``(min, max)``."""

    __slots__ = ()

    def __new__(cls, u: int, v: int) -> "Edge":
        if u == v:
            raise ParameterError(f"edge endpoints must differ, got ({u}, {v})")
        if u > v:
            u, v = v, u
        return tuple.__new__(cls, (u, v))

    u = property(itemgetter(0))
    v = property(itemgetter(1))

    def __repr__(self) -> str:
        return f"Edge({self[0]}, {self[1]})"


def binom2(n: int) -> int:
    return n * (n - 1) // 2


def budget(p: int, q: int, s: int) -> int:
    """R(s) for the pair (p, q), without range checks on s."""
    beta = binom2(p) - q + 1
    # integer ceiling of (s-2)*beta/(p-2)
    return -((-(s - 2) * beta) // (p - 2)) - 1


@lru_cache(maxsize=None)
def budget_table(p: int, q: int) -> Tuple[int, ...]:
    """Tuple indexed by s (0..p) holding R(s); entries below 3 are -1."""
    return tuple(budget(p, q, s) if s >= 3 else -1 for s in range(p + 1))


@dataclass(frozen=True)
class Params:
    """All constants derived for one (p, q, n) instance."""

    p: int
    q: int
    n: int
    beta: int
    f_exp: Fraction
    m_exp: Fraction
    hm_exp: Fraction
    epsilon: Fraction
    kappa: float
    num_colors: int
    i_max: int
    in_theorem_regime: bool
    epsilon_overridden: bool = False
    kappa_overridden: bool = False
    colors_overridden: bool = False
    budgets: Tuple[int, ...] = field(default=(), repr=False, compare=False)

    @property
    def edge_count(self) -> int:
        return binom2(self.n)

    @property
    def t_max(self) -> float:
        return -math.expm1(-float(self.epsilon) * math.log(self.n))

    def R(self, s: int) -> int:
        return repeat_budget(self, s)

    def with_n(self, n: int) -> "Params":
        """Same (p, q) and overrides at a different vertex count."""
        return derive_params(
            self.p,
            self.q,
            n,
            epsilon=self.epsilon if self.epsilon_overridden else None,
            kappa=self.kappa if self.kappa_overridden else None,
        )


def repeat_budget(params: Params, s: int) -> int:
    """Maximum number of repeats allowed on an s-vertex set during Phase 1."""
    if not 3 <= s <= params.p:
        raise ParameterError(f"s must lie in [3, {params.p}], got {s}")
    return budget(params.p, params.q, s)


def repeats(colors: Iterable) -> int:
    """Sum over distinct colors of (multiplicity - 1)."""
    counts = Counter(colors)
    return sum(counts.values()) - len(counts)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def derive_params(
    p: int,
    q: int,
    n: int,
    epsilon=None,
    kappa: Optional[float] = None,
    num_colors: Optional[int] = None,
) -> Params:
    """Assemble a :class:`Params` for (p, q, n).

    ``epsilon``, ``kappa`` and ``num_colors`` override the defaults. When
    ``num_colors`` is given, kappa is set to the value implied by the palette
    size so that the trajectory stays consistent with the palette actually
    used.
    """
    if p < 3:
        raise ParameterError(f"p must be at least 3, got {p}")
    if not 2 <= q <= binom2(p):
        raise ParameterError(f"q must lie in [2, {binom2(p)}], got {q}")
    beta = binom2(p) - q + 1
    if beta < 1:
        raise ParameterError(f"q={q} too large for p={p}: beta={beta}")
    if n < p:
        raise ParameterError(f"n must be at least p={p}, got {n}")
    if kappa is not None and num_colors is not None:
        raise ParameterError("give at most one of kappa and num_colors")

    eps = _as_fraction(epsilon) if epsilon is not None else Fraction(1, 1000 * p**6)
    if eps <= 0:
        raise ParameterError(f"epsilon must be positive, got {eps}")
    f_exp = Fraction(p - 2, beta)
    m_exp = Fraction(1, beta)
    log_n = math.log(n)
    scale = n ** float(f_exp) * log_n ** -float(m_exp)

    if num_colors is not None:
        if num_colors < 1:
            raise ParameterError(f"num_colors must be positive, got {num_colors}")
        kappa_value = num_colors / scale
        colors = int(num_colors)
    else:
        if kappa is None:
            if p > MAX_ENUMERATION_P:
                raise ParameterError(
                    f"default kappa needs the preforbidder enumeration, "
                    f"which is limited to p <= {MAX_ENUMERATION_P}; pass kappa"
                )
            from .platonic.enumerate import cached_mu_table

            kappa_value = kappa_from_mu(p, q, eps, cached_mu_table(p, q))
        else:
            kappa_value = float(kappa)
        if kappa_value <= 0:
            raise ParameterError(f"kappa must be positive, got {kappa_value}")
        colors = max(1, math.ceil(kappa_value * scale))

    i_max = math.floor(-math.expm1(-float(eps) * log_n) * binom2(n))
    i_max = min(max(i_max, 0), binom2(n))

    return Params(
        p=p,
        q=q,
        n=n,
        beta=beta,
        f_exp=f_exp,
        m_exp=m_exp,
        hm_exp=Fraction(1, 2 * beta),
        epsilon=eps,
        kappa=kappa_value,
        num_colors=colors,
        i_max=i_max,
        in_theorem_regime=4 * q <= p * p - 26 * p + 55,
        epsilon_overridden=epsilon is not None,
        kappa_overridden=kappa is not None or num_colors is not None,
        colors_overridden=num_colors is not None,
        budgets=budget_table(p, q),
    )


def mu_weight(mu: Mapping[Tuple[int, int, int], float]) -> float:
    """Sum of mu / eta over a table keyed by (ell, eta, s)."""
    return sum(Fraction(v) / eta for (_, eta, _), v in mu.items())


def kappa_from_mu(p: int, q: int, epsilon, mu) -> float:
    """Smallest palette constant for which h(t) <= epsilon * log n.

    ``mu`` is a :class:`~pqforge.platonic.enumerate.MuTable` or any mapping
    from (ell, eta, s) to a count.
    """
    entries = getattr(mu, "entries", mu)
    if not entries:
        raise EnumerationError("mu table is empty; run the enumeration first")
    weight = float(mu_weight(entries))
    if weight <= 0:
        raise EnumerationError("mu table has no nonzero entries")
    beta = binom2(p) - q + 1
    return (float(epsilon) / weight) ** (-(p - 2) / beta)
