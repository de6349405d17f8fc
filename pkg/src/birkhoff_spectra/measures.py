"""
Stationary Markov measures on finite subshifts.

Entropies are in nats, with the convention ``0 log 0 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .maps import MapSystem, cylinder_geometry
from .perron import perron
from .potentials import Potential
from .shift import FiniteSubshift, closed_classes, enumerate_words

__all__ = [
    "MarkovMeasure",
    "ReducibleChainError",
    "stationary_distribution",
    "entropy",
    "lyapunov",
    "integrate",
    "cylinder_mass",
    "bernoulli",
    "parry_measure",
    "equilibrium_measure",
    "from_flows",
    "edge_flows",
    "random_markov",
]


class ReducibleChainError(ValueError):
    """The transition matrix has more than one closed class."""


def stationary_distribution(P, tol: float = 1e-12, max_iter: int = 1_000_000) -> np.ndarray:
    """Stationary row vector of a stochastic matrix with one closed class.

    Power iteration on the lazy chain ``(P + I) / 2`` from the uniform
    vector, until ``||pi P - pi||_1 <= tol``.

    Raises
    ------
    ReducibleChainError
        If ``P`` has several closed classes; the message names one of them.
    """
    P = np.asarray(P, dtype=float)
    classes = closed_classes(P > 0)
    if len(classes) > 1:
        raise ReducibleChainError(
            f"transition matrix is reducible: states {[i + 1 for i in classes[0]]} form a closed proper class")
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = 0.5 * (pi @ P + pi)
        nxt /= nxt.sum()
        pi = nxt
        if np.abs(pi @ P - pi).sum() <= tol:
            return pi
    raise RuntimeError(f"stationary distribution did not converge in {max_iter} steps")


@dataclass
class MarkovMeasure:
    """Order-1 stationary Markov measure on a finite subshift.

    Parameters
    ----------
    subshift : FiniteSubshift
    P : (k, k) ndarray
        Row-stochastic, supported inside the transition matrix.
    pi : (k,) ndarray, optional
        Stationary vector; computed when omitted.
    """

    subshift: FiniteSubshift
    P: np.ndarray
    pi: Optional[np.ndarray] = None

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        A = self.subshift.matrix
        if self.P.shape != A.shape:
            raise ValueError("P does not match the subshift size")
        if (self.P < 0).any() or (self.P[A == 0] != 0).any():
            raise ValueError("P must be nonnegative and supported on allowed transitions")
        if np.abs(self.P.sum(axis=1) - 1.0).max() > 1e-12:
            raise ValueError("rows of P must sum to 1")
        if self.pi is None:
            self.pi = stationary_distribution(self.P)
        else:
            self.pi = np.asarray(self.pi, dtype=float)
            if np.abs(self.pi @ self.P - self.pi).sum() > 1e-10 or abs(self.pi.sum() - 1) > 1e-10:
                raise ValueError("pi is not a stationary probability vector of P")

    @property
    def labels(self):
        return self.subshift.labels

    @property
    def flows(self) -> np.ndarray:
        """Two-cylinder masses ``mu([i, j]) = pi_i P_ij``."""
        return self.pi[:, None] * self.P

    def symbol_masses(self) -> dict:
        return {s: float(p) for s, p in zip(self.labels, self.pi)}


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def entropy(m: MarkovMeasure) -> float:
    """``-sum_i pi_i sum_j P_ij log P_ij``."""
    return float(-np.sum(m.pi * _xlogx(m.P).sum(axis=1)))


def cylinder_mass(m: MarkovMeasure, word) -> float:
    s = m.subshift
    if not s.is_admissible(word):
        return 0.0
    idx = [s.index(x) for x in word]
    mass = m.pi[idx[0]]
    for a, b in zip(idx, idx[1:]):
        mass *= m.P[a, b]
    return float(mass)


def _word_masses(m: MarkovMeasure, n: int) -> tuple:
    s = m.subshift
    words = enumerate_words(s, n)
    idx = np.array([[s.index(x) for x in w] for w in words], dtype=int).reshape(len(words), n)
    mass = m.pi[idx[:, 0]].copy()
    for j in range(1, n):
        mass *= m.P[idx[:, j - 1], idx[:, j]]
    return words, mass


def integrate(m: MarkovMeasure, f: Potential) -> float:
    """``sum_w mu([w]) f(w)`` over admissible words of length ``f.order``."""
    words, mass = _word_masses(m, f.order)
    vals = np.array([f(w) for w in words], dtype=float)
    return math.fsum(mass * vals)


def lyapunov(m: MarkovMeasure, map_: MapSystem, m_geo: int = 1) -> tuple:
    """Bracket ``(lower, upper)`` for ``int log|T'| dmu``.

    Two brackets are intersected: cylinder bounds of the Birkhoff sum over
    ``m_geo``-words divided by ``m_geo``, and bounds on the first-step
    derivative over the same cylinders. Affine families give lower == upper.
    """
    if m_geo < 1:
        raise ValueError("m_geo must be >= 1")
    words, mass = _word_masses(m, m_geo)
    keep = mass > 0
    words = [w for w, k in zip(words, keep) if k]
    mass = mass[keep]
    geo = [cylinder_geometry(map_, w) for w in words]
    lo_b = math.fsum(mass * np.array([g.inf_log_deriv for g in geo])) / m_geo
    hi_b = math.fsum(mass * np.array([g.sup_log_deriv for g in geo])) / m_geo
    first = np.array([map_.first_step_log_derivative_bounds(w) for w in words]).reshape(-1, 2)
    lo_f = math.fsum(mass * first[:, 0])
    hi_f = math.fsum(mass * first[:, 1])
    if map_.is_linear:
        return lo_f, lo_f
    return max(lo_b, lo_f), min(hi_b, hi_f)


def bernoulli(s: FiniteSubshift, p) -> MarkovMeasure:
    """Bernoulli measure with symbol weights ``p`` on a full subshift."""
    p = np.asarray(p, dtype=float)
    if p.shape != (s.alphabet_size,) or abs(p.sum() - 1) > 1e-12 or (p < 0).any():
        raise ValueError("p must be a probability vector over the alphabet")
    if not s.matrix[:, p > 0].all():
        raise ValueError("Bernoulli weights need every symbol in the support to follow every symbol")
    P = np.tile(p, (s.alphabet_size, 1))
    return MarkovMeasure(s, P, p.copy())


def equilibrium_measure(s: FiniteSubshift, edge_potential) -> tuple:
    """Markov measure maximising ``h + int g`` for an edge potential ``g``.

    ``edge_potential[i, j]`` is the value on the 2-cylinder ``[i, j]``.

    Returns
    -------
    measure, pressure
        ``pressure = log rho`` of ``A_ij exp(g_ij)``, which equals
        ``h + int g`` at the returned measure.
    """
    A = s.matrix > 0
    g = np.where(A, np.asarray(edge_potential, dtype=float), -np.inf)
    shift = float(g[A].max())
    W = np.where(A, np.exp(g - shift), 0.0)
    pd = perron(W, log_scale=shift)
    r, l = pd.right, pd.left
    P = W * r[None, :] / (pd.root * r[:, None])
    P /= P.sum(axis=1, keepdims=True)
    pi = l * r
    pi /= pi.sum()
    return MarkovMeasure(s, P, _polish(pi, P)), pd.log_root


def _solve_stationary(P):
    n = P.shape[0]
    M = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi = np.linalg.lstsq(M, rhs, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _polish(pi, P):
    if np.abs(pi @ P - pi).sum() > 1e-12:
        pi = _solve_stationary(P)
    for _ in range(50):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() <= 1e-15:
            return nxt
        pi = nxt
    return pi


def random_markov(s: FiniteSubshift, rng: np.random.Generator, low: float = 0.05) -> MarkovMeasure:
    """Markov measure with i.i.d. uniform ``[low, 1]`` weights on the allowed transitions."""
    A = s.matrix > 0
    W = np.where(A, rng.uniform(low, 1.0, A.shape), 0.0)
    P = W / W.sum(axis=1, keepdims=True)
    pi = _solve_stationary(P)
    return MarkovMeasure(s, P, _polish(pi, P))


def parry_measure(s: FiniteSubshift) -> MarkovMeasure:
    """Measure of maximal entropy on an irreducible subshift."""
    return equilibrium_measure(s, np.zeros(s.matrix.shape))[0]


def from_flows(s: FiniteSubshift, X) -> MarkovMeasure:
    """Markov measure whose 2-cylinder masses are the stationary edge flow ``X``.

    ``X`` must be nonnegative, sum to 1, and balance in- and out-flow at
    every state. States without mass are restricted away.
    """
    X = np.asarray(X, dtype=float)
    X = np.where(X > 0, X, 0.0)
    X /= X.sum()
    out = X.sum(axis=1)
    live = np.flatnonzero(out > 1e-15)
    sub = s.restrict([s.labels[i] for i in live]) if len(live) < s.alphabet_size else s
    idx = [s.index(x) for x in sub.labels]
    Xs = X[np.ix_(idx, idx)] * (sub.matrix > 0)
    P = Xs / Xs.sum(axis=1, keepdims=True)
    pi = Xs.sum(axis=1)
    pi /= pi.sum()
    return MarkovMeasure(sub, P, _polish(pi, P))


def edge_flows(m: MarkovMeasure, s: Optional[FiniteSubshift] = None) -> np.ndarray:
    """Edge flows of ``m`` laid out on the states of ``s`` (default: its own)."""
    if s is None or s.labels == m.subshift.labels:
        return m.flows
    X = np.zeros(s.matrix.shape)
    idx = [s.index(x) for x in m.labels]
    X[np.ix_(idx, idx)] = m.flows
    return X
