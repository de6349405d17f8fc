"""
Entropy at infinity.

Two routes are provided. The counting route evaluates ``z_n(M, q)``, the
number of ``(n + 2)``-cylinders that start and end at symbols ``<= q`` and
spend at most a ``1/M`` fraction of their time there. The certificate route
translates a Markov measure towards infinity and records its entropy,
which bounds ``delta_inf`` from below whenever the translated measures
lose all mass on fixed cylinders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .maps import MapSystem, derive_transitions
from .measures import MarkovMeasure, entropy, parry_measure
from .shift import FiniteSubshift, enumerate_words

__all__ = [
    "EscapeCertificate",
    "DeltaInfTable",
    "z_n_count",
    "z_n_sequence",
    "z_n_bruteforce",
    "delta_inf_counting",
    "delta_inf_lower_bound",
    "translation_admissible",
]


def _low_profile(s: FiniteSubshift, q: int) -> np.ndarray:
    return np.array([1 if x <= q else 0 for x in s.labels], dtype=int)


def z_n_sequence(s: FiniteSubshift, M: float, q: int, n_max: int) -> list:
    """``[z_1, ..., z_{n_max}]`` for ``(M, q)`` on the subshift ``s``, exact.

    Dynamic programming over ``(last symbol, visits to {<= q})``, carried in
    Python integers so that no count is rounded.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    low = _low_profile(s, q)
    k = s.alphabet_size
    A = s.matrix.astype(object)
    cap = n_max + 2
    # counts[i, c]: words ending in state i with c low visits so far
    counts = np.zeros((k, cap + 1), dtype=object)
    for i in range(k):
        if low[i]:
            counts[i, 1] = 1
    out = []
    for length in range(2, cap + 1):
        step = A.T.dot(counts)
        nxt = np.zeros_like(counts)
        for i in range(k):
            if low[i]:
                nxt[i, 1:] = step[i, :-1]
            else:
                nxt[i] = step[i]
        counts = nxt
        if length >= 3:
            bound = math.floor(length / M + 1e-12)
            z = 0
            for i in range(k):
                if low[i]:
                    z += sum(counts[i, : bound + 1])
            out.append(int(z))
    return out


def z_n_count(map_: MapSystem, K: int, M: float, q: int, n: int) -> int:
    """Number of admissible ``[w_1 .. w_{n+2}]`` in the ``K``-truncation with
    ``w_1 <= q``, ``w_{n+2} <= q`` and ``#{i : w_i <= q} <= (n + 2) / M``."""
    if q > K:
        raise ValueError("q must not exceed the truncation K")
    if n < 1:
        raise ValueError("n must be >= 1")
    return z_n_sequence(derive_transitions(map_, K), M, q, n)[n - 1]


def z_n_bruteforce(s: FiniteSubshift, M: float, q: int, n: int) -> int:
    """Depth-first enumeration of the same count; exponential, for testing."""
    limit = (n + 2) / M + 1e-12
    total = 0
    stack = [(a, 1 if a <= q else 0, 1) for a in s.labels if a <= q]
    while stack:
        last, lows, length = stack.pop()
        if lows > limit:
            continue
        if length == n + 2:
            total += last <= q
            continue
        for b in s.successors(last):
            stack.append((b, lows + (b <= q), length + 1))
    return total


@dataclass
class DeltaInfTable:
    """Counting estimates of ``delta_inf(M, q)`` on one truncation.

    ``table[(M, q)]`` is the maximum of ``(1/n) log z_n`` over the tail
    window, or ``-inf`` when every count in the window vanishes.
    """

    K: int
    n_max: int
    window: int
    table: dict
    sequences: dict
    corner: tuple
    flags: list = field(default_factory=list)

    @property
    def headline(self) -> float:
        return self.table[self.corner]


def delta_inf_counting(map_: MapSystem, K: int, M_list: Sequence[float], q_list: Sequence[int],
                       n_max: int = 30, window: Optional[int] = None) -> DeltaInfTable:
    if not M_list or not q_list:
        raise ValueError("M_list and q_list must be nonempty")
    s = derive_transitions(map_, K)
    window = math.ceil(n_max / 2) if window is None else int(window)
    table, seqs, flags = {}, {}, [f"truncated-K={K}"]
    for q in q_list:
        if q > K:
            raise ValueError(f"q={q} exceeds the truncation K={K}")
        for M in M_list:
            z = z_n_sequence(s, M, q, n_max)
            seqs[(M, q)] = z
            tail = [(math.log(v) / n) for n, v in enumerate(z, start=1) if n > n_max - window and v > 0]
            if tail:
                table[(M, q)] = max(tail)
            else:
                table[(M, q)] = -math.inf
                flags.append(f"empty(M={M},q={q})")
    corner = (max(M_list), max(q_list))
    return DeltaInfTable(K, n_max, window, table, seqs, corner, flags)


@dataclass
class EscapeCertificate:
    """Lower bound ``h <= delta_inf`` from translated copies of ``base``.

    ``max_mass[i]`` is the largest mass that the measure translated by
    ``offsets[i]`` gives to a depth-``depth`` cylinder over symbols
    ``<= q_low``.
    """

    base: MarkovMeasure
    offsets: tuple
    h: float
    depth: int
    q_low: int
    max_mass: list
    decay_ok: bool
    flags: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.h


def translation_admissible(map_: MapSystem, s: FiniteSubshift, offset: int) -> bool:
    A = s.matrix
    for i, a in enumerate(s.labels):
        for j in np.flatnonzero(A[i]):
            if not map_.rule.allowed(a + offset, s.labels[j] + offset):
                return False
    return True


def delta_inf_lower_bound(map_: MapSystem, base: Optional[MarkovMeasure] = None,
                          offsets: Sequence[int] = (0, 10, 20, 40, 80), depth: int = 1,
                          q_low: Optional[int] = None, K: int = 160) -> EscapeCertificate:
    """Entropy certificate for ``delta_inf`` by translating ``base``.

    ``nu_n([w]) = base([w - n])``. The entropy is unchanged, and the check
    confirms that the largest low-cylinder mass shrinks along ``offsets``
    and is below ``1e-6`` at the last one. ``base`` defaults to the measure
    of maximal entropy on the ``K``-truncation.

    Raises
    ------
    ValueError
        If some translate of the base support is not admissible.
    """
    if base is None:
        base = parry_measure(derive_transitions(map_, K))
    offsets = tuple(int(o) for o in offsets)
    if any(o < 0 for o in offsets):
        raise ValueError("offsets must be nonnegative")
    s = base.subshift
    for o in offsets:
        if not translation_admissible(map_, s, o):
            raise ValueError(f"translation by {o} leaves the shift for {map_!r}")
    h = entropy(base)
    q_low = max(s.labels) if q_low is None else int(q_low)
    flags = []
    if len(set(offsets)) < 2 or max(offsets) == 0:
        flags.append("degenerate-offsets: decay check skipped")
        return EscapeCertificate(base, offsets, h, depth, q_low, [], False, flags)
    words = enumerate_words(s, depth)
    mass = np.array([_mass(base, w) for w in words])
    top = np.array([max(w) for w in words])
    max_mass = []
    for o in offsets:
        inside = top + o <= q_low
        max_mass.append(float(mass[inside].max()) if inside.any() else 0.0)
    order = np.argsort(offsets, kind="stable")
    seq = [max_mass[i] for i in order]
    decay_ok = all(b <= a + 1e-15 for a, b in zip(seq, seq[1:])) and seq[-1] < 1e-6
    if not decay_ok:
        flags.append("low-cylinder mass does not decay along offsets")
    return EscapeCertificate(base, offsets, h, depth, q_low, max_mass, decay_ok, flags)


def _mass(m: MarkovMeasure, w) -> float:
    s = m.subshift
    idx = [s.index(x) for x in w]
    v = m.pi[idx[0]]
    for a, b in zip(idx, idx[1:]):
        v *= m.P[a, b]
    return float(v)
