import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from birkhoff_spectra.maps import base_n, f_lambda, gauss, indicator_potential
from birkhoff_spectra.spectrum import (NotInZError, SpectrumQuery, alpha3, alpha3_primal, alpha4, alpha4_primal,
                                       family_class, freq_spectrum, membership, transient_dimension)

LOG4 = math.log(4)
L_F = math.log(16 / 3)
F = f_lambda(0.25)


def _freq(m, n):
    return [indicator_potential(m, i) for i in range(1, n + 1)]


def _be(gamma):
    g = np.asarray(gamma, dtype=float)
    g = g[g > 0]
    return -float(np.sum(g * np.log(g))) / math.log(len(gamma))


def test_membership_examples():
    b2 = base_n(2)
    assert membership(SpectrumQuery(b2, _freq(b2, 2), [0.6, 0.4]))[0] == "Z0"
    assert membership(SpectrumQuery(b2, _freq(b2, 2), [0.7, 0.7]))[0] == "not_in_Z"
    g = gauss()
    assert membership(SpectrumQuery(g, _freq(g, 6), [0.3, 0.2, 0, 0, 0, 0], k=6))[0] == "Z_minus_Z0"


def test_alpha3_examples():
    b2 = base_n(2)
    r = alpha3(SpectrumQuery(b2, _freq(b2, 2), [0.5, 0.5]))
    assert r.value == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(r.optimizer.P, 0.5, atol=1e-9)
    r = alpha3(SpectrumQuery(b2, _freq(b2, 2), [0.7, 0.3]))
    assert r.value == pytest.approx(0.610864 / 0.693147, abs=1e-5)
    assert r.value == pytest.approx(_be([0.7, 0.3]), abs=1e-12)
    r = alpha3(SpectrumQuery(b2, _freq(b2, 2), [1.0, 0.0]))
    assert r.value == pytest.approx(0.0, abs=1e-12)


def test_alpha3_not_in_z():
    b2 = base_n(2)
    with pytest.raises(NotInZError):
        alpha3(SpectrumQuery(b2, _freq(b2, 2), [0.7, 0.7]))


@given(st.sampled_from([2, 3]), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=10)
def test_besicovitch_eggleston(n, seed):
    gamma = np.random.default_rng(seed).dirichlet(np.ones(n))
    m = base_n(n)
    r = alpha3(SpectrumQuery(m, _freq(m, n), gamma))
    assert abs(r.value - _be(gamma)) <= 1e-4
    assert r.report["dinkelbach_residual"] <= 1e-8


@pytest.mark.parametrize("g", [0.2, 0.5, 0.8])
def test_alpha3_invariants_f_lambda(g):
    q = SpectrumQuery(F, [indicator_potential(F, 1)], [g], k=10)
    r = alpha3(q)
    rep = r.report
    assert rep["dinkelbach_residual"] <= 1e-8
    assert rep["constraint_residual"] <= 1e-8
    assert rep["entropy"] <= rep["lyapunov"] + 1e-12
    rng = np.random.default_rng(int(g * 100))
    for _ in range(3):
        r2 = alpha3(q, q0=rng.normal(scale=2.0, size=1))
        assert abs(r2.value - r.value) <= 1e-6


def test_alpha3_monotone_in_k():
    vals = [alpha3(SpectrumQuery(F, [indicator_potential(F, 1)], [0.65], k=k)).value for k in (6, 10, 20)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_alpha3_matches_primal_oracle():
    q = SpectrumQuery(F, [indicator_potential(F, 1)], [0.5], k=10)
    assert alpha3(q).value == pytest.approx(alpha3_primal(q), abs=1e-6)
    b3 = base_n(3)
    q = SpectrumQuery(b3, _freq(b3, 2), [0.2, 0.5])
    assert alpha3(q).value == pytest.approx(alpha3_primal(q), abs=1e-6)


def test_alpha3_nonlinear_bracket():
    g = gauss()
    r = alpha3(SpectrumQuery(g, _freq(g, 2), [0.5, 0.3], k=8))
    lo, hi = r.report["lyapunov_bracket"]
    assert lo <= r.report["lyapunov"] <= hi
    assert r.report["entropy"] <= hi
    assert any("midpoint" in f for f in r.flags)


@pytest.mark.parametrize("g", [0.2, 0.5, 0.8])
def test_alpha4_dominates_alpha3(g):
    q = SpectrumQuery(F, [indicator_potential(F, 1)], [g], k=10)
    a3, a4 = alpha3(q), alpha4(q, LOG4)
    assert a4.value >= a3.value - 1e-9
    assert a4.value - a3.value <= 0.02
    if a4.mass == 1.0:
        assert a4.value == pytest.approx(a3.value, abs=1e-9)


def test_alpha4_zero_mass_candidate():
    q = SpectrumQuery(F, [indicator_potential(F, 2), indicator_potential(F, 3)], [0.0, 0.0], k=10)
    r = alpha4(q, LOG4)
    assert r.value >= LOG4 / L_F - 1e-12
    # the printed 0.82818 is a rounding of 0.828144
    assert LOG4 / L_F == pytest.approx(0.828144, abs=1e-6)
    assert abs(LOG4 / L_F - 0.82818) <= 1e-3


def test_alpha4_primal_oracle():
    q = SpectrumQuery(F, [indicator_potential(F, 1)], [0.2], k=10)
    assert alpha4(q, LOG4).value == pytest.approx(alpha4_primal(q, LOG4), abs=1e-5)


def test_alpha4_rejects_infinite_L():
    g = gauss()
    with pytest.raises(ValueError):
        alpha4(SpectrumQuery(g, _freq(g, 2), [0.5, 0.3], k=6), 1.0)


def test_freq_spectrum_examples():
    r = freq_spectrum(base_n(3), [1 / 3, 1 / 3, 1 / 3])
    assert r.value == pytest.approx(1.0, abs=1e-12)
    r = freq_spectrum(F, [0.0])
    assert r.value == pytest.approx(max(r.report["alpha4"], r.report["transient_dimension"]), abs=0)
    assert r.value == pytest.approx(0.82818, abs=1e-3)
    with pytest.raises(ValueError):
        freq_spectrum(base_n(2), [0.7, 0.7])


def test_freq_spectrum_gauss_deficit_with_given_s_inf():
    r = freq_spectrum(gauss(), [0.3, 0.2], k=20, s_inf=0.5)
    assert r.membership == "Z_minus_Z0"
    assert r.value == 0.5


def test_family_classes():
    assert family_class(base_n(2)) == "finite"
    assert family_class(gauss()) == "unbounded"
    assert family_class(F) == "bounded_c0"


def test_transient_dimension_examples():
    assert transient_dimension(F) == pytest.approx(LOG4 / L_F, abs=1e-15)
    assert transient_dimension(f_lambda(0.6)) == 1.0
    assert transient_dimension(f_lambda(0.5)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        transient_dimension(gauss())


def test_reducible_support_uses_primal_fallback():
    # avoiding I_2 cuts every path from high symbols back to 1
    q = SpectrumQuery(F, [indicator_potential(F, 2)], [0.0], k=8)
    r = alpha3(q)
    assert r.report["method"] == "primal"
    assert any("reducible" in f for f in r.flags)
    assert r.report["entropy"] <= r.report["lyapunov"] + 1e-9
    assert r.value == pytest.approx(alpha3_primal(q), abs=1e-6)
    with pytest.raises(RuntimeError):
        alpha3(q, allow_fallback=False)
