"""Acceptance criteria, each run at its stated tolerance and time budget.

Every test records one ``PASS``/``FAIL`` line; ``conftest.py`` prints the
collected lines in the terminal summary. Run this file directly to see the
lines without pytest.
"""

import math
import time

import numpy as np
import pytest
from scipy.special import zeta

from birkhoff_spectra import cli
from birkhoff_spectra.infinity import delta_inf_lower_bound
from birkhoff_spectra.maps import base_n, derive_transitions, f_lambda, gauss, indicator_potential
from birkhoff_spectra.measures import entropy, random_markov
from birkhoff_spectra.spectrum import SpectrumQuery, alpha3, alpha4, freq_spectrum, transient_dimension
from birkhoff_spectra.suspension import build_split_shift, push_measure, roof_integral
from birkhoff_spectra.thermo import gurevich_pressure, pressure_schedule, s_infinity, topological_entropy

pytestmark = pytest.mark.acceptance

LOG4 = math.log(4)
RESULTS = []


def record(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_1_full_shift_entropy():
    with Timer() as tm:
        errs = {N: abs(topological_entropy(base_n(N)).value - math.log(N)) for N in (2, 3, 5)}
    ok = max(errs.values()) <= 1e-6 and tm.elapsed < 1.0
    record(1, ok, f"max |h - log N| = {max(errs.values()):.2e} (tol 1e-6), {tm.elapsed:.2f}s (< 1s)")


def test_criterion_2_f_lambda_entropy():
    F = f_lambda(0.25)
    with Timer() as tm:
        vals = [topological_entropy(F, k=k).value for k in (10, 20, 40, 80)]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    in_band = LOG4 - 0.05 <= vals[-1] <= LOG4
    ok = increasing and in_band and tm.elapsed < 10.0
    record(2, ok, f"h_k = {[round(v, 6) for v in vals]} increasing={increasing}, "
                  f"k=80 in [log4-0.05, log4]={in_band}, {tm.elapsed:.2f}s (< 10s)")


def test_criterion_3_delta_inf_certificate():
    F = f_lambda(0.25)
    with Timer() as tm:
        cert = delta_inf_lower_bound(F, K=40)
    ok = cert.h >= LOG4 - 0.05 and cert.decay_ok and tm.elapsed < 30.0
    record(3, ok, f"h = {cert.h:.6f} >= {LOG4 - 0.05:.6f}, decay_ok={cert.decay_ok} "
                  f"(masses {cert.max_mass}), {tm.elapsed:.2f}s (< 30s)")


def test_criterion_4_s_infinity():
    with Timer() as tm:
        r = s_infinity(gauss())
    lo, hi = r.bracket
    # series oracle: sum_n n^{-2t} is finite iff 2t > 1
    oracle = np.isfinite(zeta(2 * hi)) and not (2 * lo > 1 and np.isfinite(zeta(2 * lo)))
    series_match = all(
        abs(pressure_schedule(gauss(), t, [2 ** 20])[0] - math.log(math.fsum(np.arange(1, 2 ** 20 + 1.0) ** (-2 * t))))
        <= 1e-10 for t in (lo, hi))
    s_f = s_infinity(f_lambda(0.25)).value
    ok = abs(r.value - 0.5) <= 0.02 and oracle and series_match and s_f == 0.0 and tm.elapsed < 60.0
    record(4, ok, f"s_inf(gauss) = {r.value:.6f} bracket ({lo:.4f}, {hi:.4f}), series oracle agrees={oracle and series_match}, "
                  f"s_inf(f_lambda) = {s_f}, {tm.elapsed:.2f}s (< 60s)")


def test_criterion_5_abramov():
    cases = [("base_n(2)", base_n(2), None), ("base_n(3)", base_n(3), None), ("f_lambda k=10", f_lambda(0.25), 10)]
    worst = 0.0
    with Timer() as tm:
        for ci, (_, m, k) in enumerate(cases):
            for order in (1, 2, 3):
                sp = build_split_shift(m, order, k)
                rng = np.random.default_rng(100 * ci + order)
                for _ in range(20):
                    mm = random_markov(sp.base, rng)
                    err = abs(entropy(push_measure(mm, sp)) - entropy(mm) / roof_integral(mm, sp))
                    worst = max(worst, err)
    ok = worst <= 1e-9 and tm.elapsed < 10.0
    record(5, ok, f"max |h(push) - h/int tau| = {worst:.2e} over 180 measures (tol 1e-9), {tm.elapsed:.2f}s (< 10s)")


def test_criterion_6_besicovitch_eggleston():
    m = base_n(2)
    pots = [indicator_potential(m, 1), indicator_potential(m, 2)]
    worst = 0.0
    with Timer() as tm:
        for g in np.round(np.arange(1, 10) / 10, 10):
            v = alpha3(SpectrumQuery(m, pots, [g, 1 - g])).value
            H = -(g * math.log(g) + (1 - g) * math.log(1 - g)) / math.log(2)
            worst = max(worst, abs(v - H))
    ok = worst <= 1e-4 and tm.elapsed < 20.0
    record(6, ok, f"max |alpha3 - H/log 2| = {worst:.2e} on 9 points (tol 1e-4), {tm.elapsed:.2f}s (< 20s)")


def test_criterion_7_gauss_frequency_deficit():
    with Timer() as tm:
        r = freq_spectrum(gauss(), [0.3, 0.2])
    ok = abs(r.value - 0.5) <= 0.02 and r.membership == "Z_minus_Z0" and tm.elapsed < 60.0
    record(7, ok, f"value = {r.value:.6f} (0.5 +- 0.02), tag = {r.membership}, {tm.elapsed:.2f}s (< 60s)")


def test_criterion_8_f_lambda_zero_frequency():
    F = f_lambda(0.25)
    with Timer() as tm:
        r = freq_spectrum(F, [0.0])
    a4, dT = r.report["alpha4"], r.report["transient_dimension"]
    ok = (r.value == max(a4, dT) and abs(a4 - 0.82818) <= 1e-3 and abs(dT - 0.82818) <= 1e-3
          and dT == transient_dimension(F) and tm.elapsed < 30.0)
    record(8, ok, f"value = {r.value:.6f} = max(alpha4(0) = {a4:.6f}, dim = {dT:.6f}), both within 1e-3 of 0.82818, "
                  f"{tm.elapsed:.2f}s (< 30s)")


def test_criterion_9_property_suite(tmp_path, capsys):
    F = f_lambda(0.25)
    phi = [indicator_potential(F, 1)]
    checks = {}
    # alpha4 >= alpha3 on 10 shared queries; h <= lambda and residuals at every optimiser
    results = []
    gap_ok = True
    for k in (10, 20):
        for g in (0.2, 0.35, 0.5, 0.65, 0.8):
            q = SpectrumQuery(F, phi, [g], k=k)
            a3, a4 = alpha3(q), alpha4(q, LOG4)
            results += [a3, a4]
            gap_ok &= a4.value >= a3.value - 1e-9
    b2 = base_n(2)
    results += [alpha3(SpectrumQuery(b2, [indicator_potential(b2, 1), indicator_potential(b2, 2)], [g, 1 - g]))
                for g in (0.1, 0.5, 0.9)]
    checks["alpha4>=alpha3 (10 queries)"] = gap_ok
    checks["h<=lambda"] = all(r.report["entropy"] <= r.report["lyapunov"] + 1e-12 for r in results)
    resid = max(r.report["dinkelbach_residual"] for r in results if r.report.get("dinkelbach_residual") is not None)
    checks[f"dinkelbach residual {resid:.1e}<=1e-8"] = resid <= 1e-8
    # pressure monotone in k
    P = [gurevich_pressure(F, None, k=k).value for k in (5, 10, 20, 40)]
    Pg = pressure_schedule(gauss(), 0.75, [2 ** j for j in range(1, 16)])
    checks["pressure monotone in k"] = all(b >= a for a, b in zip(P, P[1:])) and \
        all(b >= a for a, b in zip(Pg, Pg[1:]))
    # base-symbol independence
    diffs = []
    for k in (10, 40):
        e1, e2 = topological_entropy(F, k=k, a=1), topological_entropy(F, k=k, a=2)
        diffs += [abs(e1.value - e2.value), abs(e1.slope - e2.slope)]
    checks[f"base-symbol independence {max(diffs):.3f}<=0.02"] = max(diffs) <= 0.02
    # determinism: byte-identical CLI reruns
    cfg = tmp_path / "f.json"
    cfg.write_text('{"schema": "1", "family": "f_lambda", "lambda": 0.25, "k": 10, '
                   '"potentials": [{"indicator": 1}], "grid": [[0.3], [0.6]]}')
    blobs = []
    for i in range(2):
        prefix = str(tmp_path / f"run{i}")
        assert cli.run(["spectrum", "--config", str(cfg), "--out", prefix]) == 0
        blobs.append(open(prefix + ".csv", "rb").read() + open(prefix + ".json", "rb").read())
    capsys.readouterr()
    checks["byte-identical reruns"] = blobs[0] == blobs[1]
    failed = [name for name, v in checks.items() if not v]
    record(9, not failed, "; ".join(f"{name}={'ok' if v else 'FAILED'}" for name, v in checks.items()))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
