"""
Countable Markov shifts through their finite truncations.

A shift on the positive integers is described by a :class:`TransitionRule`
(an explicit 0/1 matrix or a predicate on pairs of symbols). Every numerical
routine in the package works on a :class:`FiniteSubshift`, obtained with
:func:`truncate`, which remembers the original symbol labels.

Words are plain tuples of original symbol labels, e.g. ``(1, 3, 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Word = tuple

__all__ = [
    "Word",
    "TransitionRule",
    "FiniteSubshift",
    "TruncationError",
    "truncate",
    "enumerate_words",
    "enumerate_periodic",
    "is_mixing",
    "is_irreducible",
    "closed_classes",
    "block_subshift",
]


class TruncationError(ValueError):
    """Raised when pruning a truncation leaves no symbols."""


@dataclass(frozen=True)
class TransitionRule:
    """Transition structure of a shift on the symbols 1, 2, 3, ...

    Exactly one of ``matrix`` and ``predicate`` is used, according to ``kind``.
    An explicit matrix of size ``n`` forbids every transition touching a
    symbol larger than ``n``.
    """

    kind: str
    matrix: Optional[np.ndarray] = None
    predicate: Optional[Callable[[int, int], bool]] = None
    name: str = ""

    def __post_init__(self):
        if self.kind == "explicit-matrix":
            A = np.asarray(self.matrix)
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise ValueError("transition matrix must be square")
            if not np.isin(A, (0, 1)).all():
                raise ValueError("transition matrix entries must be 0 or 1")
            object.__setattr__(self, "matrix", A.astype(np.int8))
        elif self.kind == "predicate":
            if not callable(self.predicate):
                raise ValueError("predicate rule needs a callable")
        else:
            raise ValueError(f"unknown rule kind {self.kind!r}")

    @classmethod
    def from_matrix(cls, matrix, name="") -> "TransitionRule":
        return cls("explicit-matrix", matrix=np.asarray(matrix), name=name)

    @classmethod
    def from_predicate(cls, predicate, name="") -> "TransitionRule":
        return cls("predicate", predicate=predicate, name=name)

    @classmethod
    def full_shift(cls, n: Optional[int] = None) -> "TransitionRule":
        """Full shift on ``n`` symbols, or on all of N when ``n`` is None."""
        if n is None:
            return cls.from_predicate(lambda i, j: True, name="full")
        return cls.from_matrix(np.ones((n, n), dtype=np.int8), name=f"full-{n}")

    def allowed(self, i: int, j: int) -> bool:
        if i < 1 or j < 1:
            return False
        if self.kind == "predicate":
            return bool(self.predicate(i, j))
        n = self.matrix.shape[0]
        if i > n or j > n:
            return False
        return bool(self.matrix[i - 1, j - 1])

    def block(self, k: int) -> np.ndarray:
        """The unpruned ``k x k`` top-left block of the transition matrix."""
        if self.kind == "explicit-matrix":
            out = np.zeros((k, k), dtype=np.int8)
            n = min(k, self.matrix.shape[0])
            out[:n, :n] = self.matrix[:n, :n]
            return out
        return np.array(
            [[1 if self.predicate(i, j) else 0 for j in range(1, k + 1)] for i in range(1, k + 1)],
            dtype=np.int8,
        )


@dataclass(frozen=True)
class FiniteSubshift:
    """A subshift of finite type on finitely many symbols.

    Attributes
    ----------
    matrix : (k, k) ndarray of int8
        0/1 transition matrix between the retained symbols.
    labels : tuple of int
        Original symbol label of each row, increasing.
    k : int
        Truncation level the subshift was cut from.
    """

    matrix: np.ndarray
    labels: tuple
    k: int = 0
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.int8)
        object.__setattr__(self, "matrix", A)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != len(self.labels):
            raise ValueError("matrix and labels disagree in size")
        object.__setattr__(self, "labels", tuple(int(s) for s in self.labels))
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.labels)})
        if not self.k:
            object.__setattr__(self, "k", max(self.labels) if self.labels else 0)

    @classmethod
    def from_matrix(cls, matrix, labels=None) -> "FiniteSubshift":
        A = np.asarray(matrix, dtype=np.int8)
        if labels is None:
            labels = tuple(range(1, A.shape[0] + 1))
        return cls(A, tuple(labels))

    @property
    def alphabet_size(self) -> int:
        return len(self.labels)

    @property
    def relabel(self) -> dict:
        """Map from row index (1-based) to original symbol label."""
        return {i + 1: s for i, s in enumerate(self.labels)}

    def index(self, symbol: int) -> int:
        """Row index (0-based) of an original symbol label."""
        try:
            return self._index[symbol]
        except KeyError:
            raise KeyError(f"symbol {symbol} is not in this subshift") from None

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def allowed(self, i: int, j: int) -> bool:
        if i not in self._index or j not in self._index:
            return False
        return bool(self.matrix[self._index[i], self._index[j]])

    def is_admissible(self, word: Sequence[int]) -> bool:
        if len(word) == 0 or any(s not in self._index for s in word):
            return False
        return all(self.allowed(a, b) for a, b in zip(word, word[1:]))

    def successors(self, symbol: int) -> list:
        row = self.matrix[self._index[symbol]]
        return [self.labels[j] for j in np.flatnonzero(row)]

    def is_full_shift(self) -> bool:
        return bool(self.matrix.all())

    def restrict(self, symbols) -> "FiniteSubshift":
        """Subshift on the given symbols, pruned; keeps the truncation level."""
        keep = sorted(set(int(x) for x in symbols))
        idx = [self.index(x) for x in keep]
        A, labels = _prune(self.matrix[np.ix_(idx, idx)], keep)
        if not labels:
            raise TruncationError(f"no admissible loop on symbols {keep}")
        return FiniteSubshift(A, tuple(labels), k=self.k)


def _prune(A: np.ndarray, labels: list) -> tuple:
    keep = np.ones(len(labels), dtype=bool)
    while True:
        sub = A[np.ix_(keep, keep)]
        dead = (sub.sum(axis=1) == 0) | (sub.sum(axis=0) == 0)
        if not dead.any():
            break
        idx = np.flatnonzero(keep)
        keep[idx[dead]] = False
    idx = np.flatnonzero(keep)
    return A[np.ix_(idx, idx)], [labels[i] for i in idx]


def truncate(rule: TransitionRule, k: int) -> FiniteSubshift:
    """Restrict a shift to the symbols ``1..k`` and prune stranded symbols.

    A symbol is stranded when its row or its column is empty: it cannot
    occur inside any infinite admissible sequence. Pruning is repeated
    until nothing changes.

    Raises
    ------
    TruncationError
        If every symbol is pruned.
    """
    if k < 1:
        raise ValueError("truncation level must be >= 1")
    A, labels = _prune(rule.block(k), list(range(1, k + 1)))
    if len(labels) == 0:
        raise TruncationError(f"truncation too small: no symbol of 1..{k} survives pruning")
    return FiniteSubshift(A, tuple(labels), k=k)


def enumerate_words(s: FiniteSubshift, n: int) -> list:
    """All admissible words of length ``n``, in lexicographic order."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    succ = [np.flatnonzero(s.matrix[i]) for i in range(s.alphabet_size)]
    words = [(i,) for i in range(s.alphabet_size)]
    for _ in range(n - 1):
        words = [w + (j,) for w in words for j in succ[w[-1]]]
    lab = s.labels
    return [tuple(lab[i] for i in w) for w in words]


def enumerate_periodic(s: FiniteSubshift, n: int, a: int) -> list:
    """Words of length ``n`` that start with ``a`` and close into a loop."""
    if a not in s:
        raise ValueError(f"base symbol {a} not in subshift")
    A = s.matrix
    ia = s.index(a)
    succ = [np.flatnonzero(A[i]) for i in range(s.alphabet_size)]
    words = [(ia,)]
    for _ in range(n - 1):
        words = [w + (j,) for w in words for j in succ[w[-1]]]
    lab = s.labels
    return [tuple(lab[i] for i in w) for w in words if A[w[-1], ia]]


def is_mixing(s: FiniteSubshift) -> bool:
    """Primitivity test: some power ``A^m`` with ``m <= (k-1)^2 + 1`` is positive."""
    A = (s.matrix > 0).astype(np.int64)
    k = A.shape[0]
    bound = (k - 1) ** 2 + 1
    P = A.copy()
    for _ in range(bound):
        if P.all():
            return True
        P = ((P @ A) > 0).astype(np.int64)
    return bool(P.all())


def _components(A: np.ndarray):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    return connected_components(csr_matrix(A > 0), directed=True, connection="strong")


def is_irreducible(s_or_matrix) -> bool:
    A = s_or_matrix.matrix if isinstance(s_or_matrix, FiniteSubshift) else np.asarray(s_or_matrix)
    n, _ = _components(A)
    return n == 1


def closed_classes(A) -> list:
    """Strongly connected classes of ``A > 0`` that no edge leaves."""
    A = np.asarray(A) > 0
    n, lab = _components(A)
    out = []
    for c in range(n):
        members = np.flatnonzero(lab == c)
        outside = np.flatnonzero(lab != c)
        if not A[np.ix_(members, outside)].any():
            out.append(members.tolist())
    return out


def block_subshift(s: FiniteSubshift, n: int) -> tuple:
    """Higher block presentation on ``n``-words.

    Returns ``(blocks, words)``: a subshift on labels ``1..len(words)``
    where ``u -> v`` iff ``u[1:] == v[:-1]``, and the ``n``-words in
    lexicographic order (label ``i`` is ``words[i - 1]``).
    """
    words = enumerate_words(s, n)
    if n == 1:
        return FiniteSubshift(s.matrix.copy(), tuple(range(1, len(words) + 1)), k=s.k), words
    pos = {w: i for i, w in enumerate(words)}
    A = np.zeros((len(words), len(words)), dtype=np.int8)
    for i, w in enumerate(words):
        for x in s.successors(w[-1]):
            A[i, pos[w[1:] + (x,)]] = 1
    return FiniteSubshift(A, tuple(range(1, len(words) + 1)), k=s.k), words
