"""
Expanding interval maps with countably many branches.

Four families are built in:

``base_n(N)``
    ``x -> N x mod 1`` with branches ``((i-1)/N, i/N]``.
``gauss()``
    The Gauss map ``x -> 1/x mod 1`` with branches ``(1/(n+1), 1/n]``.
``f_lambda(lam)``
    Piecewise linear map with ``I_1 = (lam, 1]`` of slope ``1/(1-lam)`` and
    ``I_n = (lam^n, lam^(n-1)]`` of slope ``1/(lam(1-lam))`` mapping onto
    ``(0, lam^(n-2)]``.
``piecewise_linear(branches)``
    Finitely many affine branches given by interval, slope and image.

Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .potentials import Potential
from .shift import FiniteSubshift, TransitionRule, truncate

__all__ = [
    "Branch",
    "MapSystem",
    "CylinderGeometry",
    "MarkovError",
    "base_n",
    "gauss",
    "f_lambda",
    "piecewise_linear",
    "derive_transitions",
    "cylinder_geometry",
    "indicator_potential",
    "log_derivative_potential",
]

GOLDEN = (1 + 5 ** 0.5) / 2
_REL = 1e-12


class MarkovError(ValueError):
    """Branch layout does not have the Markov property."""


@dataclass(frozen=True)
class Branch:
    """One branch ``T_i : I_i -> T(I_i)`` of an interval map.

    ``slope`` is ``|T'|`` for affine branches and None for the Gauss map,
    whose derivative is ``1/x^2``.
    """

    index: int
    interval: tuple
    image: tuple
    slope: Optional[float] = None
    increasing: bool = True

    def __post_init__(self):
        a, b = self.interval
        if not b > a:
            raise ValueError(f"branch {self.index}: empty interval {self.interval}")

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def image_diameter(self) -> float:
        return self.image[1] - self.image[0]

    def inverse(self, y: float) -> float:
        """Inverse branch ``T_i^{-1}(y)`` for affine branches."""
        a, b = self.interval
        c, d = self.image
        if self.increasing:
            return a + (y - c) / self.slope
        return b - (y - c) / self.slope


@dataclass(frozen=True)
class CylinderGeometry:
    """Derivative and diameter data of the basic interval of a word.

    ``inf_log_deriv``/``sup_log_deriv`` bound the Birkhoff sum of
    ``log|T'|`` over the word's length on the cylinder.
    """

    word: tuple
    inf_log_deriv: float
    sup_log_deriv: float
    diameter_lower: float
    diameter_upper: float
    interval: tuple = field(default=None)

    @property
    def diameter(self) -> Optional[float]:
        if self.interval is None:
            return None
        return self.interval[1] - self.interval[0]


class MapSystem:
    """An expanding Markov interval map and its symbolic coding.

    Attributes
    ----------
    family : str
        One of ``"base_n"``, ``"gauss"``, ``"f_lambda"``, ``"piecewise_linear"``.
    params : dict
        Family parameters (``n``, ``lam`` or ``branches``).
    rule : TransitionRule
        Transition structure of the coding.
    zeta : float
        Expansion constant: ``|(T^n)'| >= zeta^(n-1)`` on every n-cylinder.
    L : float
        ``sup log|T'|``; ``inf`` for the Gauss map.
    n_branches : int or None
        None for countably many branches.
    """

    def __init__(self, family: str, params: dict, rule: TransitionRule, zeta: float, L: float,
                 n_branches: Optional[int], branches: Optional[Sequence[Branch]] = None):
        self.family = family
        self.params = dict(params)
        self.rule = rule
        self.zeta = float(zeta)
        self.L = float(L)
        self.n_branches = n_branches
        self._branches = None if branches is None else tuple(branches)

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items() if k != "branches")
        return f"MapSystem({self.family}{', ' + args if args else ''})"

    @property
    def is_finite_alphabet(self) -> bool:
        return self.n_branches is not None

    @property
    def has_finite_L(self) -> bool:
        return math.isfinite(self.L)

    @property
    def is_linear(self) -> bool:
        return self.family != "gauss"

    @property
    def derivative_blowup(self) -> bool:
        """True when ``inf |T'|`` on ``I_i`` tends to infinity with ``i``."""
        return self.family == "gauss"

    def branch(self, i: int) -> Branch:
        if i < 1 or (self.n_branches is not None and i > self.n_branches):
            raise IndexError(f"{self!r} has no branch {i}")
        if self._branches is not None:
            return self._branches[i - 1]
        if self.family == "gauss":
            return Branch(i, (1.0 / (i + 1), 1.0 / i), (0.0, 1.0), None, increasing=False)
        lam = self.params["lam"]
        if i == 1:
            return Branch(1, (lam, 1.0), (0.0, 1.0), 1.0 / (1.0 - lam))
        return Branch(i, (lam ** i, lam ** (i - 1)), (0.0, lam ** (i - 2)), 1.0 / (lam * (1.0 - lam)))

    def branch_log_derivative_bounds(self, i: int) -> tuple:
        """``(inf, sup)`` of ``log|T'|`` on the closure of ``I_i``."""
        if self.family == "gauss":
            return 2.0 * math.log(i), 2.0 * math.log(i + 1)
        v = math.log(self.branch(i).slope)
        return v, v

    def first_step_log_derivative_bounds(self, word) -> tuple:
        """``(inf, sup)`` of ``log|T'(x)|`` over ``x`` in the cylinder of ``word``."""
        if self.family == "gauss":
            lo, hi = _gauss_endpoints(word)
            # log|G'(x)| = -2 log x is decreasing in x
            return -2.0 * _log_frac(*hi), -2.0 * _log_frac(*lo)
        v = math.log(self.branch(word[0]).slope)
        return v, v

    def cylinder_interval(self, word) -> tuple:
        """Endpoints of the basic interval coded by ``word``."""
        if self.family == "gauss":
            lo, hi = _gauss_endpoints(word)
            return lo[0] / lo[1], hi[0] / hi[1]
        J = self.branch(word[-1]).interval
        for s in reversed(word[:-1]):
            br = self.branch(s)
            u, v = br.inverse(J[0]), br.inverse(J[1])
            J = (min(u, v), max(u, v))
        return J


def _log_frac(p: int, q: int) -> float:
    return math.log(p) - math.log(q) if p > 0 else -math.inf


def _convergents(word):
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    for a in word:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q, p_prev, q_prev


def _gauss_endpoints(word):
    p, q, p1, q1 = _convergents(word)
    a, b = (p, q), (p + p1, q + q1)
    return (a, b) if a[0] * b[1] < b[0] * a[1] else (b, a)


def base_n(n: int) -> MapSystem:
    if n < 2:
        raise ValueError("base_n needs n >= 2")
    branches = [Branch(i, ((i - 1) / n, i / n), (0.0, 1.0), float(n)) for i in range(1, n + 1)]
    rule = TransitionRule.full_shift(n)
    return MapSystem("base_n", {"n": n}, rule, zeta=n, L=math.log(n), n_branches=n, branches=branches)


def gauss() -> MapSystem:
    # |(G^n)'| >= q_n^2 >= GOLDEN^(2(n-1)) on every n-cylinder
    return MapSystem("gauss", {}, TransitionRule.full_shift(), zeta=GOLDEN ** 2, L=math.inf,
                     n_branches=None)


def f_lambda(lam: float) -> MapSystem:
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    rule = TransitionRule.from_predicate(lambda i, j: i == 1 or j >= i - 1, name="f_lambda")
    return MapSystem("f_lambda", {"lam": float(lam)}, rule, zeta=1.0 / (1.0 - lam),
                     L=-math.log(lam * (1.0 - lam)), n_branches=None)


def _containment(image, interval, i, j) -> int:
    c, d = image
    a, b = interval
    tol = _REL * (b - a)
    if c <= a + tol and b <= d + tol:
        return 1
    if min(b, d) - max(a, c) <= tol:
        return 0
    raise MarkovError(f"image of branch {i} partially covers branch {j}")


def piecewise_linear(branches) -> MapSystem:
    """Finite affine Markov map from ``[{"interval": [a, b], "slope": s, "image": [c, d]}, ...]``.

    A negative slope marks an orientation-reversing branch.
    """
    out = []
    for i, spec in enumerate(branches, start=1):
        a, b = map(float, spec["interval"])
        c, d = map(float, spec["image"])
        s = float(spec["slope"])
        if not (0.0 <= a < b <= 1.0 and 0.0 <= c < d <= 1.0):
            raise ValueError(f"branch {i}: interval and image must lie in [0, 1]")
        if abs(abs(s) * (b - a) - (d - c)) > 1e-9:
            raise ValueError(f"branch {i}: |slope| * width != image length")
        if abs(s) <= 1.0:
            raise ValueError(f"branch {i}: |slope| must exceed 1")
        out.append(Branch(i, (a, b), (c, d), abs(s), increasing=s > 0))
    spans = sorted(br.interval for br in out)
    for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
        if a2 < b1 - 1e-12:
            raise ValueError("branch intervals overlap")
    n = len(out)
    A = np.array([[_containment(out[i].image, out[j].interval, i + 1, j + 1) for j in range(n)]
                  for i in range(n)], dtype=np.int8)
    slopes = [br.slope for br in out]
    return MapSystem("piecewise_linear", {"branches": [dict(s) for s in branches]},
                     TransitionRule.from_matrix(A, name="piecewise_linear"),
                     zeta=min(slopes), L=math.log(max(slopes)), n_branches=n, branches=out)


def derive_transitions(m: MapSystem, k: int) -> FiniteSubshift:
    """The ``k``-truncated coding matrix, from interval containment of images.

    Raises
    ------
    MarkovError
        When some image partially overlaps a branch interval.
    """
    n = k if m.n_branches is None else min(k, m.n_branches)
    if m.family == "gauss":
        A = np.ones((n, n), dtype=np.int8)
    else:
        brs = [m.branch(i) for i in range(1, n + 1)]
        A = np.array([[_containment(brs[i].image, brs[j].interval, i + 1, j + 1) for j in range(n)]
                      for i in range(n)], dtype=np.int8)
    if k > n:
        pad = np.zeros((k, k), dtype=np.int8)
        pad[:n, :n] = A
        A = pad
    return truncate(TransitionRule.from_matrix(A), k)


def cylinder_geometry(m: MapSystem, w) -> CylinderGeometry:
    """Bounds on ``S_n log|T'|`` and on the diameter of the cylinder of ``w``.

    The diameter bracket is ``[exp(-sup), exp(-inf)]`` times the image
    diameter of the last branch. Both are exact for affine families.
    """
    w = tuple(int(s) for s in w)
    if not w or not all(m.rule.allowed(a, b) for a, b in zip(w, w[1:])) or min(w) < 1:
        raise ValueError(f"word {w} is not admissible for {m!r}")
    if m.n_branches is not None and max(w) > m.n_branches:
        raise ValueError(f"word {w} is not admissible for {m!r}")
    if m.family == "gauss":
        _, q, _, q1 = _convergents(w)
        lo, hi = 2.0 * math.log(q), 2.0 * math.log(q + q1)
        image = 1.0
    else:
        lo = hi = math.fsum(math.log(m.branch(s).slope) for s in w)
        image = m.branch(w[-1]).image_diameter
    return CylinderGeometry(w, lo, hi, image * math.exp(-hi), image * math.exp(-lo),
                            interval=m.cylinder_interval(w))


def indicator_potential(m: MapSystem, i: int) -> Potential:
    """Order-1 indicator of the branch ``I_i``."""
    if i < 1:
        raise ValueError("branch index must be >= 1")
    return Potential(1, func=lambda w: 1.0 if w[0] == i else 0.0, name=f"1[I_{i}]")


def log_derivative_potential(m: MapSystem, order: int = 1, bound: str = "inf") -> Potential:
    """Locally constant approximant of ``log|T'|`` from cylinder bounds.

    ``bound`` is ``"inf"``, ``"sup"`` or ``"mid"``; affine families give the
    exact potential at order 1 for all three.
    """
    pick = {"inf": lambda lo, hi: lo, "sup": lambda lo, hi: hi, "mid": lambda lo, hi: 0.5 * (lo + hi)}
    if bound not in pick:
        raise ValueError(f"unknown bound {bound!r}")
    f = pick[bound]
    order = 1 if m.is_linear else order
    return Potential(order, func=lambda w: f(*m.first_step_log_derivative_bounds(w)),
                     name=f"log|T'|[{bound},{order}]")
