"""Locally constant potentials of finite order."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .shift import FiniteSubshift, enumerate_words

__all__ = ["Potential", "constant_potential"]


class Potential:
    """A real function on the shift that depends on the first ``order`` symbols.

    Parameters
    ----------
    order : int
        Number of leading symbols the value depends on.
    func : callable, optional
        ``func(word) -> float`` evaluated on words of length ``order``.
    table : dict, optional
        Explicit values keyed by ``order``-words. Used instead of ``func``
        when given; missing words raise ``KeyError`` on evaluation.
    name : str
        Label used in reports.
    """

    def __init__(self, order: int, func: Optional[Callable] = None, table: Optional[dict] = None,
                 name: str = ""):
        if order < 1:
            raise ValueError("potential order must be >= 1")
        if func is None and table is None:
            raise ValueError("need either func or table")
        self.order = int(order)
        self.func = func
        self.table = None if table is None else {tuple(k): float(v) for k, v in table.items()}
        self.name = name

    def __repr__(self):
        return f"Potential(order={self.order}, name={self.name!r})"

    def __call__(self, word) -> float:
        w = tuple(word)
        if len(w) < self.order:
            raise ValueError(f"word {w} shorter than potential order {self.order}")
        w = w[: self.order]
        if self.table is not None:
            return self.table[w]
        return float(self.func(w))

    def tabulate(self, s: FiniteSubshift, order: Optional[int] = None) -> np.ndarray:
        """Values on ``enumerate_words(s, order)``, in that order.

        ``order`` may exceed the potential's own order; longer words are
        evaluated on their prefix.
        """
        n = self.order if order is None else order
        if n < self.order:
            raise ValueError("cannot tabulate below the potential's order")
        return np.array([self(w) for w in enumerate_words(s, n)], dtype=float)

    @classmethod
    def from_table(cls, s: FiniteSubshift, order: int, values, name: str = "") -> "Potential":
        words = enumerate_words(s, order)
        values = list(values)
        if len(values) != len(words):
            raise ValueError(f"expected {len(words)} values, got {len(values)}")
        return cls(order, table=dict(zip(words, values)), name=name)

    def scaled(self, c: float, name: str = "") -> "Potential":
        return Potential(self.order, func=lambda w: c * self(w), name=name or f"{c}*{self.name}")


def constant_potential(c: float, order: int = 1) -> Potential:
    return Potential(order, func=lambda w: c, name=f"const({c})")
