"""
Integer-roof suspension shifts.

Each ``m``-word ``w`` of the truncated shift becomes a chain of ``k_w``
vertices, where ``k_w / l^m`` is the largest multiple of ``l^{-m}`` below
``inf log|T'|`` on the cylinder ``[w]``. Markov measures are pushed along
the chains, and the entropy of the pushed measure is ``h / int k_w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .maps import MapSystem, derive_transitions
from .measures import MarkovMeasure, cylinder_mass, entropy
from .perron import power_iteration
from .shift import FiniteSubshift, block_subshift, enumerate_words

__all__ = [
    "RoofError",
    "RoofFunction",
    "SplitShift",
    "build_roof",
    "build_split_shift",
    "lift_to_blocks",
    "push_measure",
    "roof_integral",
    "lift_word",
    "project_word",
    "split_entropy_trend",
]

_DEFAULT_K = {"base_n": None, "gauss": 10, "f_lambda": 10, "piecewise_linear": None}


class RoofError(ValueError):
    """Some roof value vanishes for the requested base."""


@dataclass
class RoofFunction:
    """``k_w = floor(base**m * inf log|T'| on [w])`` for every ``m``-word."""

    m: int
    base: int
    words: list
    values: np.ndarray
    inf_log_deriv: np.ndarray
    flags: list = field(default_factory=list)

    def __getitem__(self, word) -> int:
        return int(self.values[self.words.index(tuple(word))])

    def as_dict(self) -> dict:
        return {w: int(k) for w, k in zip(self.words, self.values)}


def _trunc_level(map_: MapSystem, k_trunc: Optional[int]) -> int:
    if k_trunc is not None:
        return int(k_trunc)
    if map_.n_branches is not None:
        return map_.n_branches
    return _DEFAULT_K[map_.family]


def _roof_values(infs, m, base):
    # guard the floor against rounding just below an integer
    return np.floor(np.asarray(infs) * base ** m + 1e-12).astype(int)


def build_roof(map_: MapSystem, m: int, base: Optional[int] = None,
               k_trunc: Optional[int] = None) -> RoofFunction:
    """Roof function of order ``m`` on the ``k_trunc``-truncation.

    With ``base=None`` base 2 is tried first; if a roof value vanishes the
    base becomes the smallest integer ``l`` with ``1/l < log zeta``, and the
    switch is recorded in ``flags``.

    Raises
    ------
    RoofError
        If some ``k_w`` is zero for the chosen base.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    s = derive_transitions(map_, _trunc_level(map_, k_trunc))
    words = enumerate_words(s, m)
    infs = np.array([map_.first_step_log_derivative_bounds(w)[0] for w in words])
    flags = []
    bases = [int(base)] if base is not None else [2]
    if base is None:
        alt = math.floor(1.0 / math.log(map_.zeta)) + 1
        if alt > 2:
            bases.append(alt)
    for b in bases:
        vals = _roof_values(infs, m, b)
        if (vals >= 1).all():
            if b != bases[0]:
                flags.append(f"base changed from {bases[0]} to {b}")
            return RoofFunction(m, b, words, vals, infs, flags)
    bad = words[int(np.argmin(vals))]
    raise RoofError(f"roof vanishes on {bad} (inf log|T'| = {infs.min() + 0.0:.6g}) for base {bases[-1]}; "
                    f"use a larger base or order")


@dataclass
class SplitShift:
    """Suspension shift with one vertex per ``(word, position)``.

    Vertex labels are ``1..V`` in the order of ``vertices``; the chain of
    block ``w`` starts at ``offsets[q[w]]`` (0-based).
    """

    roof: RoofFunction
    base: FiniteSubshift
    block: FiniteSubshift
    words: list
    vertices: list
    subshift: FiniteSubshift
    offsets: np.ndarray

    @property
    def q(self) -> dict:
        """Lexicographic bijection from ``m``-words to block indices (1-based)."""
        return {w: i + 1 for i, w in enumerate(self.words)}

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def log_perron_root(self) -> float:
        root, _, _, _ = power_iteration(self.subshift.matrix.astype(float))
        return math.log(root)


def build_split_shift(map_: MapSystem, m: int, k_trunc: Optional[int] = None,
                      base: Optional[int] = None, roof: Optional[RoofFunction] = None) -> SplitShift:
    k = _trunc_level(map_, k_trunc)
    roof = build_roof(map_, m, base, k) if roof is None else roof
    s = derive_transitions(map_, k)
    blocks, words = block_subshift(s, m)
    if words != roof.words:
        raise ValueError("roof does not match the truncation")
    lengths = roof.values
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(int)
    V = int(lengths.sum())
    A = np.zeros((V, V), dtype=np.int8)
    vertices = []
    for i, w in enumerate(words):
        for j in range(1, lengths[i] + 1):
            vertices.append((w, j))
        o = offsets[i]
        for j in range(lengths[i] - 1):
            A[o + j, o + j + 1] = 1
        end = o + lengths[i] - 1
        for t in np.flatnonzero(blocks.matrix[i]):
            A[end, offsets[t]] = 1
    split = FiniteSubshift(A, tuple(range(1, V + 1)), k=k)
    return SplitShift(roof, s, blocks, words, vertices, split, offsets)


def lift_to_blocks(mm: MarkovMeasure, m: int) -> MarkovMeasure:
    """The same measure written as an order-1 chain on ``m``-blocks."""
    blocks, words = block_subshift(mm.subshift, m)
    if m == 1:
        return MarkovMeasure(blocks, mm.P.copy(), mm.pi.copy())
    s = mm.subshift
    pi = np.array([cylinder_mass(mm, w) for w in words])
    P = np.zeros(blocks.matrix.shape)
    for i, w in enumerate(words):
        a = s.index(w[-1])
        for t in np.flatnonzero(blocks.matrix[i]):
            P[i, t] = mm.P[a, s.index(words[t][-1])]
    return MarkovMeasure(blocks, P, pi / pi.sum())


def _as_block_measure(mm: MarkovMeasure, split: SplitShift) -> MarkovMeasure:
    if mm.subshift.labels == split.base.labels and np.array_equal(mm.subshift.matrix, split.base.matrix):
        return lift_to_blocks(mm, split.roof.m)
    if np.array_equal(mm.subshift.matrix, split.block.matrix):
        return mm
    raise ValueError("measure lives neither on the truncation nor on its block recoding")


def roof_integral(mm: MarkovMeasure, split: SplitShift) -> float:
    """``int k_w d(mm)`` in integer roof units."""
    bm = _as_block_measure(mm, split)
    return math.fsum(bm.pi * split.roof.values)


def push_measure(mm: MarkovMeasure, split: SplitShift) -> MarkovMeasure:
    """Markov measure on the split shift induced by ``mm``.

    Inside a chain the walk is deterministic; at a chain end it follows the
    block transition probabilities. Stationary weights are ``pi(w)`` on
    every vertex of the chain of ``w``, normalised by ``int k_w``.
    """
    bm = _as_block_measure(mm, split)
    lengths = split.roof.values
    V = split.n_vertices
    P = np.zeros((V, V))
    pi = np.zeros(V)
    norm = math.fsum(bm.pi * lengths)
    for i in range(len(split.words)):
        o, n = split.offsets[i], lengths[i]
        pi[o:o + n] = bm.pi[i] / norm
        for j in range(n - 1):
            P[o + j, o + j + 1] = 1.0
        for t in np.flatnonzero(bm.P[i] > 0):
            P[o + n - 1, split.offsets[t]] = bm.P[i, t]
    return MarkovMeasure(split.subshift, P, pi)


def lift_word(split: SplitShift, word) -> tuple:
    """Vertex word of the split shift covering the cylinder ``[word]``.

    ``word`` needs length ``>= m``; every ``m``-block along it contributes
    its full chain.
    """
    m = split.roof.m
    word = tuple(word)
    if len(word) < m or not split.base.is_admissible(word):
        raise ValueError(f"{word} is not an admissible word of length >= {m}")
    q = split.q
    out = []
    for i in range(len(word) - m + 1):
        b = q[word[i:i + m]] - 1
        o = split.offsets[b]
        out.extend(range(o + 1, o + split.roof.values[b] + 1))
    return tuple(out)


def project_word(split: SplitShift, vertex_word) -> tuple:
    """Shortest word of the base shift whose cylinder contains the image of
    the vertex cylinder ``[vertex_word]``."""
    vw = tuple(int(v) for v in vertex_word)
    if not split.subshift.is_admissible(vw):
        raise ValueError(f"{vw} is not admissible in the split shift")
    blocks = []
    for i, v in enumerate(vw):
        w, j = split.vertices[v - 1]
        if i == 0 or j == 1:
            blocks.append(w)
    out = list(blocks[0])
    for b in blocks[1:]:
        out.append(b[-1])
    return tuple(out)


def split_entropy_trend(map_: MapSystem, ms: Sequence[int] = (1, 2, 3), k_trunc: Optional[int] = None,
                        base: Optional[int] = None) -> list:
    """``base**m * h_top`` of the split shifts, as a trend report.

    For maps whose derivative blows up along the alphabet this tracks the
    critical exponent; for bounded-derivative maps it tracks the best
    entropy-to-expansion ratio instead.
    """
    out = []
    for m in ms:
        split = build_split_shift(map_, m, k_trunc, base)
        h = split.log_perron_root()
        out.append({"m": m, "base": split.roof.base, "vertices": split.n_vertices,
                    "h_top_split": h, "scaled": split.roof.base ** m * h})
    return out
