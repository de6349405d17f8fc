import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from birkhoff_spectra.maps import (MarkovError, base_n, cylinder_geometry, derive_transitions, f_lambda, gauss,
                                   indicator_potential, log_derivative_potential, piecewise_linear)
from birkhoff_spectra.measures import bernoulli, integrate
from birkhoff_spectra.shift import enumerate_words


def test_derive_transitions_examples():
    assert derive_transitions(gauss(), 4).matrix.tolist() == [[1] * 4] * 4
    assert derive_transitions(f_lambda(0.25), 3).matrix.tolist() == [[1, 1, 1], [1, 1, 1], [0, 1, 1]]
    s = derive_transitions(base_n(3), 5)
    assert s.labels == (1, 2, 3) and s.matrix.all()


@pytest.mark.parametrize("k", [23, 40, 80])
def test_f_lambda_transitions_deep(k):
    # containment tolerances must scale with the (tiny) deep intervals
    A = derive_transitions(f_lambda(0.25), k).matrix
    i, j = np.indices(A.shape) + 1
    assert np.array_equal(A, ((i == 1) | (j >= i - 1)).astype(A.dtype))


def test_cylinder_geometry_examples():
    g = cylinder_geometry(base_n(2), (1, 2, 1))
    assert g.inf_log_deriv == pytest.approx(3 * math.log(2), abs=1e-12)
    assert g.sup_log_deriv == pytest.approx(3 * math.log(2), abs=1e-12)
    assert g.diameter_upper == pytest.approx(1 / 8, abs=1e-15)
    g = cylinder_geometry(f_lambda(0.25), (2, 2))
    assert g.inf_log_deriv == pytest.approx(2 * math.log(16 / 3), abs=1e-12)
    assert g.inf_log_deriv == pytest.approx(3.3480, abs=1e-4)
    g = cylinder_geometry(gauss(), (1,))
    assert g.inf_log_deriv == 0.0
    assert g.sup_log_deriv == pytest.approx(math.log(4), abs=1e-12)


def test_indicator_examples():
    m = base_n(2)
    assert indicator_potential(m, 1)((1, 2)) == 1
    assert indicator_potential(m, 3)((1, 2)) == 0
    b = bernoulli(derive_transitions(m, 2), [0.5, 0.5])
    assert integrate(b, indicator_potential(m, 2)) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("n", range(1, 30))
def test_gauss_branch_inf_is_two_log_n(n):
    assert cylinder_geometry(gauss(), (n,)).inf_log_deriv == pytest.approx(2 * math.log(n), abs=1e-12)


def _words(m, k, n):
    return enumerate_words(derive_transitions(m, k), n)


@pytest.mark.parametrize("m,k", [(base_n(3), 3), (f_lambda(0.25), 6), (f_lambda(0.4), 5), (gauss(), 6)])
def test_diameter_bound(m, k):
    for n in range(1, 5):
        for w in _words(m, k, n):
            g = cylinder_geometry(m, w)
            assert g.diameter_upper <= m.zeta ** (-(n - 1)) * (1 + 1e-12)
            assert g.diameter_lower <= g.diameter_upper + 1e-15


@pytest.mark.parametrize("m,k", [(base_n(2), 2), (f_lambda(0.25), 6), (f_lambda(0.1), 5)])
def test_slope_products_exact(m, k):
    for n in range(1, 4):
        for w in _words(m, k, n):
            slopes = np.prod([abs(m.branch(i).slope) for i in w])
            g = cylinder_geometry(m, w)
            assert abs(math.log(slopes) - g.sup_log_deriv) <= 1e-12 * max(1.0, g.sup_log_deriv)
            assert g.inf_log_deriv == g.sup_log_deriv


def test_gauss_variation_decays():
    g = gauss()
    prev = math.inf
    for n in range(1, 9):
        k = 4 if n <= 4 else 2
        var = max((cylinder_geometry(g, w).sup_log_deriv - cylinder_geometry(g, w).inf_log_deriv) / n
                  for w in _words(g, k, n))
        assert var <= prev + 1e-12
        prev = var


def _gauss_exact_interval(word):
    ends = []
    for x in (Fraction(0), Fraction(1)):
        for a in reversed(word):
            x = 1 / (a + x)
        ends.append(x)
    return min(ends), max(ends)


@given(st.lists(st.integers(1, 40), min_size=1, max_size=6))
def test_gauss_geometry_matches_exact_rationals(word):
    a, b = _gauss_exact_interval(word)
    geo = cylinder_geometry(gauss(), tuple(word))
    diam = float(b - a)
    assert geo.diameter_lower <= diam * (1 + 1e-12)
    assert diam <= geo.diameter_upper * (1 + 1e-12)
    lo, hi = geo.interval
    assert abs(lo - float(a)) <= 1e-15 and abs(hi - float(b)) <= 1e-15
    # G^n maps the cylinder onto (0, 1], so -log diam is a value of log|(G^n)'|
    assert geo.inf_log_deriv - 1e-9 <= -math.log(diam) <= geo.sup_log_deriv + 1e-9


def test_log_derivative_potential_bounds():
    g = gauss()
    lo, hi, mid = (log_derivative_potential(g, 1, b) for b in ("inf", "sup", "mid"))
    for n in (1, 2, 5):
        assert lo((n,)) <= mid((n,)) <= hi((n,))


def test_piecewise_linear_tent_and_rejects_nonmarkov():
    tent = piecewise_linear([{"interval": [0, 0.5], "slope": 2, "image": [0, 1]},
                             {"interval": [0.5, 1], "slope": -2, "image": [0, 1]}])
    assert derive_transitions(tent, 2).matrix.all()
    with pytest.raises(ValueError):
        piecewise_linear([{"interval": [0, 0.5], "slope": 3, "image": [0, 1]}])
    with pytest.raises((MarkovError, ValueError)):
        bad = piecewise_linear([{"interval": [0, 0.5], "slope": 1.2, "image": [0.2, 0.8]},
                                {"interval": [0.5, 1], "slope": 2, "image": [0, 1]}])
        derive_transitions(bad, 2)


def test_f_lambda_constants():
    m = f_lambda(0.25)
    assert m.L == pytest.approx(math.log(16 / 3), abs=1e-15)
    assert m.zeta == pytest.approx(4 / 3)
    with pytest.raises(ValueError):
        f_lambda(1.0)
    assert not gauss().has_finite_L
