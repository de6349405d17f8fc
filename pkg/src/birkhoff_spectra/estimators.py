"""Scikit-learn style wrapper around the dimension formulas."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .config import build_map, build_potentials
from .spectrum import NotInZError, SpectrumQuery, alpha3, alpha4, family_class, freq_spectrum
from .thermo import s_infinity

__all__ = ["BirkhoffSpectrumEstimator"]


class BirkhoffSpectrumEstimator(BaseEstimator):
    """Hausdorff dimension of Birkhoff level sets for one expanding map.

    ``fit`` fixes the map and precomputes the quantities that do not depend
    on the targets (``s_inf`` or ``delta_inf``). ``predict`` maps each row
    ``gamma`` of ``X`` to the dimension of ``{x : A_n phi(x) -> gamma}``.
    Rows whose targets no invariant measure attains predict ``nan``.

    Parameters
    ----------
    family : {"base_n", "gauss", "f_lambda", "piecewise_linear"}
    n : int
        Number of branches for ``base_n``.
    lam : float
        Parameter of ``f_lambda``.
    branches : list of dict, optional
        Branch specifications for ``piecewise_linear``.
    potentials : list of dict, optional
        Potential specifications as in the JSON config. ``None`` means the
        indicators of symbols ``1..d``, i.e. digit frequencies, and routes
        through the family-specific formula.
    k : int
        Truncation level.
    method : {"auto", "alpha3", "alpha4"}
    delta_inf : float, optional
        Entropy at infinity; estimated in ``fit`` when needed and absent.
    tol : float
        Tolerance of the ratio iteration.

    Attributes
    ----------
    map_ : MapSystem
    family_class_ : str
    s_inf_ : float or None
    delta_inf_ : float or None
    results_ : list of SpectrumResult or None
        Full results of the last ``predict`` call.

    Examples
    --------
    >>> est = BirkhoffSpectrumEstimator(family="base_n", n=2).fit()
    >>> round(float(est.predict([[0.7, 0.3]])[0]), 5)
    0.88129
    """

    def __init__(self, family="base_n", n=2, lam=0.25, branches=None, potentials=None, k=10,
                 method="auto", delta_inf=None, tol=1e-12):
        self.family = family
        self.n = n
        self.lam = lam
        self.branches = branches
        self.potentials = potentials
        self.k = k
        self.method = method
        self.delta_inf = delta_inf
        self.tol = tol

    def _config(self):
        cfg = {"family": self.family, "n": self.n, "lambda": self.lam}
        if self.branches is not None:
            cfg["branches"] = self.branches
        if self.potentials is not None:
            cfg["potentials"] = self.potentials
        return cfg

    def fit(self, X=None, y=None):
        """Build the map and the target-independent constants.

        ``X`` and ``y`` are ignored; they exist for API compatibility.
        """
        if self.method not in ("auto", "alpha3", "alpha4"):
            raise ValueError(f"unknown method {self.method!r}")
        self.map_ = build_map(self._config())
        self.family_class_ = family_class(self.map_)
        self.s_inf_ = None
        self.delta_inf_ = None if self.delta_inf is None else float(self.delta_inf)
        if self.family_class_ == "unbounded":
            self.s_inf_ = s_infinity(self.map_).value
        needs_delta = self.method == "alpha4" or (self.method == "auto" and self.family_class_ == "bounded_c0")
        if needs_delta and self.delta_inf_ is None:
            from .infinity import delta_inf_lower_bound

            self.delta_inf_ = delta_inf_lower_bound(self.map_).h
        self.results_ = None
        return self

    def _one(self, gamma):
        if self.potentials is None and self.method == "auto":
            if (gamma < 0).any() or gamma.sum() > 1 + 1e-12:
                raise NotInZError("frequencies outside the simplex")
            return freq_spectrum(self.map_, gamma, k=self.k, s_inf=self.s_inf_, delta_inf=self.delta_inf_)
        pots = build_potentials(self.map_, self._config(), len(gamma))
        q = SpectrumQuery(self.map_, pots, gamma, self.k, tol=self.tol)
        method = self.method
        if method == "auto":
            method = "alpha4" if self.family_class_ == "bounded_c0" else "alpha3"
        if method == "alpha4":
            return alpha4(q, self.delta_inf_)
        return alpha3(q)

    def predict(self, X):
        """Dimension value for every target row of ``X``.

        Parameters
        ----------
        X : array_like of shape (n_targets, d)

        Returns
        -------
        ndarray of shape (n_targets,)
        """
        check_is_fitted(self, "map_")
        X = check_array(X, dtype=float)
        out = np.empty(len(X))
        self.results_ = []
        for i, row in enumerate(X):
            try:
                r = self._one(row)
            except NotInZError:
                r = None
            self.results_.append(r)
            out[i] = math.nan if r is None else r.value
        return out
