"""
Dimension formulas for Birkhoff level sets.

Measures are stationary Markov chains on the edge graph of a block
presentation: an edge ``u -> v`` between ``b``-words spells a ``(b+1)``-word
on which every potential and the log-derivative are evaluated. A measure is
then a stationary edge flow ``x`` with entropy
``-sum_e x_e log(x_e / out(src e))`` and Lyapunov exponent ``sum_e x_e l_e``.

``alpha3`` maximises ``h / lambda`` over probability flows with
``Phi x = gamma``. The outer loop is Dinkelbach's iteration on the ratio.
The inner concave problem ``max h - t lambda`` is solved through its dual
``min_q log rho(W(t, q)) - q . gamma`` with ``W_e = exp(-t l_e + q . Phi_e)``,
whose minimiser is the Gibbs measure built from the Perron vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy import sparse
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .maps import MapSystem, derive_transitions, indicator_potential
from .measures import MarkovMeasure, _polish
from .perron import perron
from .potentials import Potential
from .shift import FiniteSubshift, block_subshift

__all__ = [
    "SpectrumQuery",
    "SpectrumResult",
    "NotInZError",
    "membership",
    "alpha3",
    "alpha4",
    "freq_spectrum",
    "transient_dimension",
    "alpha3_primal",
    "alpha4_primal",
    "edge_model",
    "family_class",
]

_LP_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


class NotInZError(ValueError):
    """The target vector is not a vector of integrals of any invariant measure."""


@dataclass
class SpectrumQuery:
    """Targets ``gamma`` for the integrals of ``potentials`` on a truncation.

    Parameters
    ----------
    map : MapSystem
    potentials : list of Potential
    gamma : array_like
    k : int
        Truncation level.
    geo_order : int, optional
        Word length on which ``log|T'|`` is evaluated. Affine families use 1;
        otherwise the midpoint of the first-step bracket on ``geo_order``-
        cylinders is used and the bracket is reported. Defaults to 2 for
        non-affine maps.
    tol : float
        Dinkelbach tolerance on the ratio.
    """

    map: MapSystem
    potentials: list
    gamma: np.ndarray
    k: int = 10
    geo_order: Optional[int] = None
    tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if len(self.potentials) != len(self.gamma):
            raise ValueError("one target per potential is required")
        if not np.isfinite(self.gamma).all():
            raise ValueError("targets must be finite")
        if self.geo_order is None:
            self.geo_order = 1 if self.map.is_linear else 2


@dataclass
class SpectrumResult:
    """Dimension value with the optimiser and a convergence report.

    ``optimizer`` is a Markov measure on ``state_words`` (the block states of
    the truncation); ``mass`` is the probability part ``c`` of an optimal
    sub-probability measure. ``multipliers`` holds ``t`` and ``q``.
    """

    value: float
    mass: float = 1.0
    optimizer: Optional[MarkovMeasure] = None
    state_words: Optional[list] = None
    multipliers: dict = field(default_factory=dict)
    membership: str = "Z0"
    report: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


@dataclass
class _EdgeModel:
    states: FiniteSubshift
    words: list
    src: np.ndarray
    dst: np.ndarray
    Phi: np.ndarray
    ell: np.ndarray
    ell_lo: np.ndarray
    ell_hi: np.ndarray

    @property
    def n_states(self) -> int:
        return self.states.alphabet_size

    @property
    def n_edges(self) -> int:
        return len(self.src)

    def incidence(self) -> np.ndarray:
        """``out - in`` per state; stationary flows are in its kernel."""
        B = np.zeros((self.n_states, self.n_edges))
        B[self.src, np.arange(self.n_edges)] += 1.0
        B[self.dst, np.arange(self.n_edges)] -= 1.0
        return B

    def entropy(self, x) -> float:
        x = np.asarray(x, dtype=float)
        out = np.bincount(self.src, weights=x, minlength=self.n_states)
        pos = x > 0
        return float(-np.sum(x[pos] * np.log(x[pos] / out[self.src[pos]])))

    def lyapunov(self, x, which="mid") -> float:
        ell = {"mid": self.ell, "lo": self.ell_lo, "hi": self.ell_hi}[which]
        return math.fsum(np.asarray(x) * ell)


def edge_model(map_: MapSystem, potentials: Sequence[Potential], k: int, geo_order: int = 1,
               subshift: Optional[FiniteSubshift] = None) -> _EdgeModel:
    s = derive_transitions(map_, k) if subshift is None else subshift
    order = max([p.order for p in potentials] + [geo_order, 1])
    b = max(order - 1, 1)
    states, words = block_subshift(s, b)
    src, dst = np.nonzero(states.matrix)
    ew = [words[u] + (words[v][-1],) for u, v in zip(src, dst)]
    Phi = np.array([[p(w) for w in ew] for p in potentials], dtype=float).reshape(len(potentials), len(ew))
    if map_.is_linear:
        ell = np.array([math.log(map_.branch(w[0]).slope) for w in ew])
        lo = hi = ell
    else:
        br = np.array([map_.first_step_log_derivative_bounds(w[:geo_order]) for w in ew])
        lo, hi = br[:, 0], br[:, 1]
        ell = 0.5 * (lo + hi)
    return _EdgeModel(states, words, src, dst, Phi, ell, lo, hi)


# ---------------------------------------------------------------------------
# linear feasibility


def _flow_lp(em: _EdgeModel, gamma, c_mode: str, edges=None, objective="none"):
    """LP over stationary flows with ``Phi x = gamma`` and total mass ``c``.

    ``c_mode`` is ``"one"`` (probability), ``"min"``/``"max"`` (optimise the
    mass over ``[0, 1]``). Returns ``(status_ok, x, c)``.
    """
    E = em.n_edges
    idx = np.arange(E) if edges is None else np.asarray(edges)
    B = em.incidence()[:, idx]
    Phi = em.Phi[:, idx]
    n = len(idx)
    # variables: x (n), c (1)
    A_eq = np.vstack([
        np.hstack([B, np.zeros((B.shape[0], 1))]),
        np.hstack([Phi, np.zeros((Phi.shape[0], 1))]),
        np.hstack([np.ones((1, n)), -np.ones((1, 1))]),
    ])
    b_eq = np.concatenate([np.zeros(B.shape[0]), gamma, [0.0]])
    cost = np.zeros(n + 1)
    if c_mode == "one":
        bounds = [(0, None)] * n + [(1.0, 1.0)]
    else:
        bounds = [(0, None)] * n + [(0.0, 1.0)]
        cost[-1] = 1.0 if c_mode == "min" else -1.0
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs", options=_LP_OPTS)
    if res.status != 0:
        return False, None, None
    x = np.zeros(E)
    x[idx] = res.x[:n]
    return True, x, float(res.x[-1])


def _support_edges(em: _EdgeModel, gamma, mass=1.0, eps=1e-3, detect=1e-8):
    """Edges that carry flow in some feasible solution.

    Each round maximises ``sum_e min(x_e, eps)`` over the edges not yet
    found; every edge reaching ``detect`` is supportable, and rounds stop
    when none is added. The union of supports is the support of the
    average of the round solutions, hence itself feasible.
    """
    E = em.n_edges
    B = sparse.csr_matrix(em.incidence())
    base_eq = sparse.vstack([B, sparse.csr_matrix(em.Phi), sparse.csr_matrix(np.ones((1, E)))], format="csr")
    b_eq = np.concatenate([np.zeros(B.shape[0]), gamma, [mass]])
    found = np.zeros(E, dtype=bool)
    while True:
        R = np.flatnonzero(~found)
        if len(R) == 0:
            break
        nR = len(R)
        A_eq = sparse.hstack([base_eq, sparse.csr_matrix((base_eq.shape[0], nR))], format="csr")
        sel = sparse.csr_matrix((-np.ones(nR), (np.arange(nR), R)), shape=(nR, E))
        A_ub = sparse.hstack([sel, sparse.identity(nR, format="csr")], format="csr")
        cost = np.concatenate([np.zeros(E), -np.ones(nR)])
        bounds = [(0, None)] * E + [(0, eps)] * nR
        res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(nR), A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                      method="highs", options=_LP_OPTS)
        if res.status != 0:
            return None if not found.any() else np.flatnonzero(found)
        new = R[res.x[E:] > detect]
        found[res.x[:E] > detect] = True
        if len(new) == 0:
            break
        found[new] = True
    return np.flatnonzero(found)


# ---------------------------------------------------------------------------
# membership


def membership(q: SpectrumQuery, em: Optional[_EdgeModel] = None) -> tuple:
    """``(tag, flags)`` with tag in ``{"Z0", "Z_minus_Z0", "not_in_Z"}``.

    ``Z0``: a probability flow on the truncation meets the targets. For
    infinite alphabets, mass may also escape to infinity where every
    potential vanishes; a flow of total mass ``c`` in ``[0, 1]`` then
    suffices for ``Z``.
    """
    em = edge_model(q.map, q.potentials, q.k, q.geo_order) if em is None else em
    flags = [f"truncated-k={q.k}"]
    ok, _, _ = _flow_lp(em, q.gamma, "one")
    if ok:
        return "Z0", flags
    if not q.map.is_finite_alphabet:
        ok, _, c = _flow_lp(em, q.gamma, "max")
        if ok:
            flags.append("truncation-dependent: probability flow may exist at larger k")
            return "Z_minus_Z0", flags
    flags.append("infeasible at this truncation")
    return "not_in_Z", flags


# ---------------------------------------------------------------------------
# Perron dual of the inner problem


class _Dual:
    """``G(q) = log rho(W(t, q)) - q . d`` on a fixed irreducible edge set."""

    def __init__(self, em: _EdgeModel, edges, C, d):
        self.em = em
        self.edges = np.asarray(edges)
        st = np.unique(np.concatenate([em.src[self.edges], em.dst[self.edges]]))
        self.states = st
        pos = {s: i for i, s in enumerate(st)}
        self.u = np.array([pos[s] for s in em.src[self.edges]])
        self.v = np.array([pos[s] for s in em.dst[self.edges]])
        self.C = C
        self.d = d
        self.n = len(st)

    def gibbs(self, t, qv):
        g = -t * self.em.ell[self.edges] + qv @ self.C
        shift = float(g.max())
        W = np.zeros((self.n, self.n))
        np.add.at(W, (self.u, self.v), np.exp(g - shift))
        pd = perron(W, log_scale=shift)
        r, l = pd.right, pd.left
        x = l[self.u] * np.exp(g - shift) * r[self.v]
        x /= x.sum()
        return pd.log_root, x

    def value_grad(self, t, qv):
        lr, x = self.gibbs(t, qv)
        return lr - qv @ self.d, self.C @ x - self.d, x

    def newton(self, t, q0, tol=1e-12, max_iter=200, max_step=2.0):
        qv = q0.copy()
        f, g, x = self.value_grad(t, qv)
        m = len(qv)
        for it in range(max_iter):
            if m == 0 or np.abs(g).max() <= tol:
                return qv, x, it, True
            H = np.zeros((m, m))
            hstep = 1e-6
            for j in range(m):
                e = np.zeros(m)
                e[j] = hstep
                _, gp, _ = self.value_grad(t, qv + e)
                _, gm, _ = self.value_grad(t, qv - e)
                H[:, j] = (gp - gm) / (2 * hstep)
            H = 0.5 * (H + H.T)
            step = -np.linalg.pinv(H, rcond=1e-12) @ g
            if not np.all(np.isfinite(step)) or step @ g >= 0:
                step = -g
            norm = np.abs(step).max()
            if norm > max_step:
                step *= max_step / norm
            a = 1.0
            while True:
                fn, gn, xn = self.value_grad(t, qv + a * step)
                if fn <= f + 1e-4 * a * (g @ step):
                    break
                # f is flat to rounding here; judge the step by the gradient
                if abs(fn - f) <= 1e-13 * (1.0 + abs(f)) and np.abs(gn).max() < np.abs(g).max():
                    break
                a *= 0.5
                if a < 1e-10:
                    # no decrease left at machine precision
                    return qv, x, it, np.abs(g).max() <= 1e-9
            qv, f, g, x = qv + a * step, fn, gn, xn
        return qv, x, max_iter, np.abs(g).max() <= 1e-9


def _reduce(Phi, gamma, edges):
    """Independent combinations of the centred constraints ``Phi - gamma``.

    On probability flows ``Phi x = gamma`` reads ``(Phi - gamma 1) x = 0``;
    keeping a basis of the row space removes flat directions of the dual.
    """
    Psi = Phi[:, edges] - gamma[:, None]
    if Psi.shape[0] == 0:
        return np.zeros((0, 0)), Psi, np.zeros(0)
    U, S, _ = np.linalg.svd(Psi, full_matrices=False)
    r = int(np.sum(S > 1e-10 * max(S[0], 1e-300))) if S.size else 0
    U = U[:, :r]
    return U, U.T @ Psi, np.zeros(r)


def _irreducible(em, edges) -> bool:
    st = np.unique(np.concatenate([em.src[edges], em.dst[edges]]))
    pos = {s: i for i, s in enumerate(st)}
    u = [pos[s] for s in em.src[edges]]
    v = [pos[s] for s in em.dst[edges]]
    G = csr_matrix((np.ones(len(u)), (u, v)), shape=(len(st), len(st)))
    n, _ = connected_components(G, directed=True, connection="strong")
    return n == 1


def _measure_from_flow(em: _EdgeModel, x) -> tuple:
    """Markov measure (and its state words) carried by an edge flow."""
    X = np.zeros((em.n_states, em.n_states))
    np.add.at(X, (em.src, em.dst), np.where(x > 0, x, 0.0))
    live = np.flatnonzero(X.sum(axis=1) > 1e-15)
    sub = X[np.ix_(live, live)]
    A = (sub > 0).astype(np.int8)
    s = FiniteSubshift(A, tuple(range(1, len(live) + 1)), k=em.states.k)
    P = sub / sub.sum(axis=1, keepdims=True)
    pi = sub.sum(axis=1)
    pi /= pi.sum()
    return MarkovMeasure(s, P, _polish(pi, P)), [em.words[i] for i in live]


class _Inner:
    """Solver for ``max h - t lambda`` subject to ``Phi x = gamma``."""

    def __init__(self, em: _EdgeModel, gamma, allow_fallback=True):
        self.em = em
        self.gamma = np.asarray(gamma, dtype=float)
        self.flags = []
        self.method = "perron-newton"
        edges = _support_edges(em, self.gamma)
        if edges is None or len(edges) == 0:
            raise NotInZError("targets are not met by any probability flow on the truncation")
        self.edges = edges
        self.U, C, d = _reduce(em.Phi, self.gamma, edges)
        if not _irreducible(em, edges):
            self.method = "primal"
            self.flags.append("reducible feasible support: primal fallback")
            self.dual = None
        else:
            self.dual = _Dual(em, edges, C, d)
        self.allow_fallback = allow_fallback
        self.q = np.zeros(C.shape[0])
        self.iterations = 0
        self._primal = None

    def solve(self, t):
        if self.dual is not None:
            qv, xs, it, ok = self.dual.newton(t, self.q)
            self.iterations += it
            if ok:
                self.q = qv
                x = np.zeros(self.em.n_edges)
                x[self.edges] = xs
                return x
            self.flags.append(f"multiplier root-finder stalled at t={t:.6g}: primal fallback")
            self.method = "primal"
            self.dual = None
        if not self.allow_fallback:
            raise RuntimeError("multiplier root-finder did not converge")
        if self._primal is None:
            self._primal = _Primal(self.em, self.gamma)
        return self._primal(t)

    @property
    def accuracy(self) -> float:
        return 0.0 if self.dual is not None else _Primal.accuracy

    def multipliers(self):
        if self.dual is None:
            return None
        full = self.U @ self.q if self.U.size else np.zeros(len(self.gamma))
        return full, float(-full @ self.gamma)


class _Primal:
    """``max sum_e -x_e log(x_e / out_e) - t l . x`` over stationary flows.

    With ``mass=None`` the flow is a probability; with ``mass="free"`` the
    total is a variable ``c <= 1`` and ``(1 - c)(delta - t L)`` is added.
    The program is compiled once with ``t`` as a parameter.
    """

    accuracy = 1e-9

    def __init__(self, em, gamma, mass=None, delta=0.0, L=0.0):
        import cvxpy as cp

        E = em.n_edges
        self.x = x = cp.Variable(E, nonneg=True)
        self.t = cp.Parameter()
        S = np.zeros((em.n_states, E))
        S[em.src, np.arange(E)] = 1.0
        out = S @ x
        obj = cp.sum(-cp.rel_entr(x, out[em.src])) - self.t * (em.ell @ x)
        cons = [em.incidence() @ x == 0, em.Phi @ x == np.asarray(gamma, dtype=float)]
        if mass is None:
            cons.append(cp.sum(x) == 1)
        else:
            cons.append(cp.sum(x) <= 1)
            obj = obj + (1 - cp.sum(x)) * (delta - self.t * L)
        self.prob = cp.Problem(cp.Maximize(obj), cons)

    def __call__(self, t):
        import cvxpy as cp

        self.t.value = float(t)
        for solver in (cp.CLARABEL, cp.SCS):
            try:
                self.prob.solve(solver=solver)
            except cp.error.SolverError:
                continue
            if self.prob.status in ("optimal", "optimal_inaccurate") and self.x.value is not None:
                return np.clip(np.asarray(self.x.value, dtype=float), 0.0, None)
        raise RuntimeError(f"primal solver failed (status {self.prob.status})")


# ---------------------------------------------------------------------------
# alpha3


def _dinkelbach(inner, em, num, den, t0, tol, max_iter):
    """Iterate ``t <- num(x) / den(x)`` with ``x`` the inner maximiser at ``t``.

    ``inner`` is an ``_Inner``; when it runs on the primal fallback the
    stopping tolerance is raised to the interior-point accuracy.
    """
    t = t0
    trace = []
    x = None
    for _ in range(max_iter):
        x = inner.solve(t)
        n, d = num(x), den(x)
        t_new = n / d
        trace.append({"t": t, "F": n - t * d, "ratio": t_new})
        if abs(t_new - t) <= max(tol, inner.accuracy) * max(1.0, abs(t_new)):
            return t_new, x, trace, True
        t = t_new
    return t, x, trace, False


def alpha3(q: SpectrumQuery, t0: float = 0.0, q0=None, allow_fallback: bool = True) -> SpectrumResult:
    """``sup h / lambda`` over probability measures with ``int phi = gamma``.

    Raises
    ------
    NotInZError
        If no probability measure on the truncation meets the targets.
    """
    em = edge_model(q.map, q.potentials, q.k, q.geo_order)
    tag, mflags = membership(q, em)
    if tag != "Z0":
        raise NotInZError(f"targets {q.gamma.tolist()} are {tag} at k={q.k}")
    inner = _Inner(em, q.gamma, allow_fallback)
    if q0 is not None:
        inner.q = np.resize(np.asarray(q0, dtype=float), inner.q.shape)
    t, x, trace, ok = _dinkelbach(inner, em, em.entropy, em.lyapunov, t0, q.tol, q.max_iter)
    return _finish(q, em, inner, t + 0.0, x, trace, ok, 1.0, mflags, tag)


def _finish(q, em, inner, t, x, trace, ok, c, mflags, tag, extra=None):
    h, lam = em.entropy(x), em.lyapunov(x)
    mom = em.Phi @ x
    target = q.gamma / c if c > 0 else q.gamma
    mult = inner.multipliers() if inner is not None else None
    if mult is not None:
        qv, const = mult
        resid = abs(h - t * lam + qv @ (mom - target)) if c == 1.0 else None
    else:
        qv, const, resid = None, None, None
    flags = list(mflags) + (inner.flags if inner is not None else [])
    if not ok:
        flags.append("dinkelbach did not converge")
    if not q.map.is_linear:
        flags.append("lambda from midpoint of first-step bracket")
    optimizer, words = _measure_from_flow(em, x)
    report = {
        "k": q.k,
        "method": inner.method if inner is not None else "closed-form",
        "entropy": h,
        "lyapunov": lam,
        "lyapunov_bracket": [em.lyapunov(x, "lo"), em.lyapunov(x, "hi")],
        "constraint_residual": float(np.abs(mom - target).max()) if len(mom) else 0.0,
        "dinkelbach_residual": resid,
        "newton_iterations": inner.iterations if inner is not None else 0,
        "trace": trace,
    }
    if extra:
        report.update(extra)
    value = t if extra is None else extra.get("value", t)
    return SpectrumResult(float(value), float(c), optimizer, words,
                          {"t": float(t), "q": None if qv is None else qv.tolist(), "q0": const},
                          tag, report, flags)


# ---------------------------------------------------------------------------
# alpha4


def _c_range(em, gamma):
    ok_lo, _, c_lo = _flow_lp(em, gamma, "min")
    ok_hi, _, c_hi = _flow_lp(em, gamma, "max")
    if not (ok_lo and ok_hi):
        return None
    return c_lo, c_hi


def _alpha4_at(q, em, c, delta, L):
    target = q.gamma / c
    inner = _Inner(em, target)
    num = lambda x: c * em.entropy(x) + (1 - c) * delta
    den = lambda x: c * em.lyapunov(x) + (1 - c) * L
    t, x, trace, ok = _dinkelbach(inner, em, num, den, 0.0, q.tol, q.max_iter)
    return t, x, inner, trace, ok


def alpha4(q: SpectrumQuery, delta_inf: float, L: Optional[float] = None,
           c_tol: float = 1e-4) -> SpectrumResult:
    """``sup (c h + (1 - c) delta_inf) / (c lambda + (1 - c) L)``.

    The supremum runs over ``c`` in ``(0, 1]`` and probability measures with
    ``int phi = gamma / c``; ``c = 0`` is allowed only for ``gamma = 0``,
    with value ``delta_inf / L``. The mass is located by golden-section
    search over the feasible range of ``c`` (the objective is
    quasi-concave in the sub-probability flow), both ends included.

    Raises
    ------
    NotInZError
        If no mass ``c`` in ``[0, 1]`` meets the targets.
    ValueError
        If the map has no finite ``L``.
    """
    L = q.map.L if L is None else float(L)
    if L is None or not math.isfinite(L):
        raise ValueError(f"alpha4 needs a finite sup log|T'|; {q.map.family} has none")
    em = edge_model(q.map, q.potentials, q.k, q.geo_order)
    zero = bool(np.all(q.gamma == 0))
    cands = []
    if zero:
        cands.append((delta_inf / L, 0.0, None))
    rng = _c_range(em, q.gamma)
    flags = [f"truncated-k={q.k}", f"delta_inf={delta_inf:.12g}"]
    if rng is not None and rng[1] > c_tol:
        lo, hi = max(rng[0], c_tol), rng[1]
        cache = {}

        def val(c):
            if c not in cache:
                try:
                    cache[c] = _alpha4_at(q, em, c, delta_inf, L)
                except NotInZError:
                    cache[c] = None
            r = cache[c]
            return -math.inf if r is None else r[0]

        g = (math.sqrt(5) - 1) / 2
        a, b = lo, hi
        x1, x2 = b - g * (b - a), a + g * (b - a)
        while b - a > c_tol:
            if val(x1) >= val(x2):
                b, x2 = x2, x1
                x1 = b - g * (b - a)
            else:
                a, x1 = x1, x2
                x2 = a + g * (b - a)
        for c in (lo, hi, 0.5 * (a + b)):
            val(c)
        for c, r in cache.items():
            if r is not None:
                cands.append((r[0], c, r))
    elif not zero:
        raise NotInZError(f"no mass c in [0, 1] meets targets {q.gamma.tolist()}")
    if not cands:
        raise NotInZError(f"no feasible mass for targets {q.gamma.tolist()}")
    best = max(cands, key=lambda z: (z[0], z[1]))
    value, c, r = best
    tag = "Z0" if rng is not None and rng[1] >= 1 - 1e-9 else "Z_minus_Z0"
    if r is None:
        return SpectrumResult(float(value), 0.0, None, None, {"t": float(value)}, tag,
                              {"k": q.k, "method": "zero-mass", "delta_inf": delta_inf, "L": L,
                               "c_range": rng}, flags)
    t, x, inner, trace, ok = r
    res = _finish(q, em, inner, t, x, trace, ok, c, flags, tag,
                  {"value": value, "delta_inf": delta_inf, "L": L, "c_range": rng})
    if c < 1.0:
        h, lam = em.entropy(x), em.lyapunov(x)
        mult = inner.multipliers()
        if mult is not None:
            res.report["dinkelbach_residual"] = abs(
                c * h + (1 - c) * delta_inf - t * (c * lam + (1 - c) * L)
                + c * mult[0] @ (em.Phi @ x - q.gamma / c))
    return res


# ---------------------------------------------------------------------------
# primal oracles


def alpha3_primal(q: SpectrumQuery, tol: float = 1e-9, max_iter: int = 100) -> float:
    """``alpha3`` from the concave primal over edge flows, by an interior-point solver."""
    em = edge_model(q.map, q.potentials, q.k, q.geo_order)
    solve = _Primal(em, q.gamma)
    t = 0.0
    for _ in range(max_iter):
        x = solve(t)
        t_new = em.entropy(x) / em.lyapunov(x)
        if abs(t_new - t) <= tol:
            return t_new
        t = t_new
    return t


def alpha4_primal(q: SpectrumQuery, delta_inf: float, L: Optional[float] = None, tol: float = 1e-9,
                  max_iter: int = 100) -> float:
    """``alpha4`` as one joint concave program over sub-probability flows."""
    L = q.map.L if L is None else L
    em = edge_model(q.map, q.potentials, q.k, q.geo_order)
    solve = _Primal(em, q.gamma, mass="free", delta=delta_inf, L=L)
    t = 0.0
    for _ in range(max_iter):
        x = solve(t)
        c = float(x.sum())
        t_new = (em.entropy(x) + (1 - c) * delta_inf) / (em.lyapunov(x) + (1 - c) * L)
        if abs(t_new - t) <= tol:
            return t_new
        t = t_new
    return t


# ---------------------------------------------------------------------------
# frequency of digits


def transient_dimension(map_: MapSystem) -> float:
    """Closed form ``-log 4 / log(lambda (1 - lambda))`` (``1`` for ``lambda >= 1/2``)."""
    if map_.family != "f_lambda":
        raise ValueError("transient dimension is only available for the f_lambda family")
    lam = map_.params["lam"]
    if lam >= 0.5:
        return 1.0
    return -math.log(4.0) / math.log(lam * (1.0 - lam))


_S_INF = {}


def _cached_s_inf(map_: MapSystem) -> float:
    key = (map_.family, tuple(sorted(map_.params.items())))
    if key not in _S_INF:
        from .thermo import s_infinity

        _S_INF[key] = s_infinity(map_).value
    return _S_INF[key]


def family_class(map_: MapSystem) -> str:
    if map_.is_finite_alphabet:
        return "finite"
    if map_.derivative_blowup:
        return "unbounded"
    if map_.has_finite_L:
        return "bounded_c0"
    return "unknown"


def freq_spectrum(map_: MapSystem, gamma, k: int = 20, s_inf: Optional[float] = None,
                  delta_inf: Optional[float] = None, delta_k: int = 160) -> SpectrumResult:
    """Dimension of the set of points with digit frequencies ``gamma``.

    ``gamma[i]`` is the target frequency of symbol ``i + 1``; symbols of the
    truncation beyond ``len(gamma)`` get target 0.

    * derivative blowing up along the alphabet: ``max(s_inf, alpha3)`` on
      ``Z0`` and ``s_inf`` on ``Z \\ Z0``;
    * finite alphabet: ``alpha3``;
    * bounded derivative with a finite limit ``L``: ``alpha4``, and
      ``max(alpha4(0), dim of the transient set)`` at ``gamma = 0``.
    """
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    if (gamma < 0).any() or gamma.sum() > 1 + 1e-12:
        raise ValueError("frequencies must be nonnegative with sum <= 1")
    s = derive_transitions(map_, k)
    n = max(max(s.labels), len(gamma))
    if map_.is_finite_alphabet and len(gamma) > max(s.labels):
        if (gamma[max(s.labels):] > 0).any():
            raise NotInZError("positive frequency on a symbol outside the alphabet")
    kk = max(s.labels)
    g = np.zeros(kk)
    g[:min(kk, len(gamma))] = gamma[:kk]
    trunc_flags = []
    if len(gamma) > kk and (gamma[kk:] > 0).any():
        raise ValueError(f"targets on symbols beyond the truncation k={k}; increase k")
    pots = [indicator_potential(map_, i) for i in range(1, kk + 1)]
    q = SpectrumQuery(map_, pots, g, k)
    cls = family_class(map_)
    em = edge_model(map_, pots, k, q.geo_order)
    tag, mflags = membership(q, em)
    if cls == "finite":
        res = alpha3(q)
        res.report["family_class"] = cls
        return res
    if cls == "unbounded":
        s_val = _cached_s_inf(map_) if s_inf is None else float(s_inf)
        if tag == "Z_minus_Z0":
            return SpectrumResult(s_val, 0.0, None, None, {}, tag,
                                  {"k": k, "family_class": cls, "s_inf": s_val, "branch": "s_inf"},
                                  mflags + trunc_flags)
        if tag == "not_in_Z":
            raise NotInZError(f"frequencies {gamma.tolist()} are not attained by any invariant measure")
        res = alpha3(q)
        a3 = res.value
        res.report.update({"family_class": cls, "s_inf": s_val, "alpha3": a3})
        if s_val > a3:
            res.value = s_val
            res.report["branch"] = "s_inf"
        else:
            res.report["branch"] = "alpha3"
        return res
    if cls == "bounded_c0":
        if delta_inf is None:
            from .infinity import delta_inf_lower_bound

            delta_inf = delta_inf_lower_bound(map_, K=delta_k, offsets=(0, delta_k)).h
            trunc_flags.append(f"delta_inf from escape certificate at K={delta_k}")
        res = alpha4(q, delta_inf)
        res.flags.extend(trunc_flags)
        res.report["family_class"] = cls
        res.report["alpha4"] = res.value
        if not gamma.any() and map_.family == "f_lambda":
            dT = transient_dimension(map_)
            res.report["transient_dimension"] = dT
            res.report["branch"] = "transient" if dT > res.value else "alpha4"
            res.value = max(res.value, dT)
        return res
    raise ValueError(f"{map_.family}: family fits neither dimension formula")
