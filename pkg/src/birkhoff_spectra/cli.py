"""Command-line front end.

Every subcommand prints a CSV table to stdout. With ``--out PREFIX`` the
same table is written to ``PREFIX.csv`` next to ``PREFIX.json`` (full
report with convergence traces) and ``PREFIX.dat`` (two-column plot data).

Exit status: 0 on success (solver warnings go to the ``flags`` column),
1 when a solver fails, 2 on invalid arguments or config.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import ConfigError, build_map, build_potential, build_potentials, load_config, validate_config
from .infinity import delta_inf_counting, delta_inf_lower_bound
from .maps import f_lambda
from .measures import entropy, random_markov
from .spectrum import (NotInZError, SpectrumQuery, alpha3, alpha4, family_class, freq_spectrum,
                       transient_dimension)
from .suspension import RoofError, build_split_shift, push_measure, roof_integral
from .thermo import ReducibleTruncationError, gurevich_pressure, s_infinity, topological_entropy

__all__ = ["main", "run", "build_parser"]

_HEADER = "# birkhoff-spectra {ver} {cmd}: natural logarithms; entropies and pressures in nats"


class SolverFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# formatting


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return "|".join(_fmt(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {(k if isinstance(k, str) else ",".join(map(str, np.atleast_1d(k)))): _jsonable(x)
                for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if v is None or isinstance(v, str):
        return v
    return str(v)


class Output:
    """Accumulates one table, one JSON report and one plot series."""

    def __init__(self, command: str, columns: list):
        self.command = command
        self.columns = columns
        self.rows = []
        self.report = {"command": command, "version": __version__, "units": "nats", "results": []}
        self.plot = []

    def add(self, row: dict, detail: dict = None):
        self.rows.append(row)
        entry = dict(row)
        if detail:
            entry.update(detail)
        self.report["results"].append(entry)

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(_HEADER.format(ver=__version__, cmd=self.command) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def write(self, prefix):
        text = self.csv_text()
        sys.stdout.write(text)
        if prefix is None:
            return
        d = os.path.dirname(prefix)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(prefix + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(prefix + ".json", "w", encoding="utf-8") as fh:
            json.dump(_jsonable(self.report), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(prefix + ".dat", "w", encoding="utf-8") as fh:
            fh.write(f"# {self.command}: {self.report.get('plot_axes', 'x y')}\n")
            for x, y in self.plot:
                fh.write(f"{_fmt(float(x))} {_fmt(float(y))}\n")


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _threads(n_tasks: int) -> int:
    env = os.environ.get("BIRKHOFF_THREADS")
    cap = min(4, os.cpu_count() or 1)
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ConfigError(f"BIRKHOFF_THREADS must be an integer, got {env!r}", "$env.BIRKHOFF_THREADS")
    return max(1, min(cap, n_tasks))


def _ordered_map(fn, items):
    items = list(items)
    n = _threads(len(items))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# config handling


def _config(args, need=True) -> dict:
    if args.config is None:
        if need:
            raise ConfigError("a --config file is required for this command", "$")
        return None
    cfg = load_config(args.config)
    if getattr(args, "lam", None) is not None:
        if cfg["family"] != "f_lambda":
            raise ConfigError("--lambda only applies to the f_lambda family", "$.family")
        cfg = validate_config(dict(cfg, **{"lambda": args.lam}))
    return cfg


def _pick(args, cfg, name, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default) if cfg else default


def _targets(args, cfg) -> list:
    if args.gamma:
        return [np.asarray(g) for g in args.gamma]
    if "grid" in cfg:
        return [np.asarray(g, dtype=float) for g in cfg["grid"]]
    if "gamma" in cfg:
        return [np.asarray(cfg["gamma"], dtype=float)]
    raise ConfigError("no targets: pass --gamma or set gamma/grid in the config", "$.gamma")


# ---------------------------------------------------------------------------
# subcommands


def _pressure_rows(out, est, extra):
    for n, lz, p in zip(est.n_values, est.log_Z, est.p_n):
        out.add({"n": n, "log_Z": lz, "p_n": p, "value": est.value, "slope": est.slope,
                 "variational": est.variational, "k": est.k, "a": est.a, "flags": est.flags})
        out.plot.append((n, p))
    out.report["headline"] = {"value": est.value, "k": est.k, "slope": est.slope,
                              "variational": est.variational,
                              "variational_gap": abs(est.variational - est.value), **extra}


_PRESSURE_COLS = ["n", "log_Z", "p_n", "value", "slope", "variational", "k", "a", "flags"]


def cmd_pressure(args):
    cfg = _config(args)
    m = build_map(cfg)
    k, n_max, a = _pick(args, cfg, "k", 10), _pick(args, cfg, "n_max", 14), _pick(args, cfg, "a", 1)
    est = gurevich_pressure(m, build_potential(m, cfg), k=k, a=a, n_max=n_max)
    out = Output("pressure", _PRESSURE_COLS)
    out.report["plot_axes"] = "n p_n"
    _pressure_rows(out, est, {"potential": cfg.get("potential")})
    return out


def cmd_entropy(args):
    cfg = _config(args)
    m = build_map(cfg)
    k, n_max, a = _pick(args, cfg, "k", 10), _pick(args, cfg, "n_max", 14), _pick(args, cfg, "a", 1)
    est = topological_entropy(m, k=k, n_max=n_max, a=a)
    out = Output("entropy", _PRESSURE_COLS)
    out.report["plot_axes"] = "n p_n"
    _pressure_rows(out, est, {})
    return out


def cmd_s_inf(args):
    cfg = _config(args)
    m = build_map(cfg)
    tol = args.t_tol if args.t_tol is not None else cfg.get("tolerances", {}).get("t_tol", 0.005)
    r = s_infinity(m, t_tol=tol)
    out = Output("s-inf", ["family", "value", "bracket_lo", "bracket_hi", "t_tol", "method", "flags"])
    out.add({"family": m.family, "value": r.value, "bracket_lo": r.bracket[0], "bracket_hi": r.bracket[1],
             "t_tol": tol, "method": r.method, "flags": r.flags}, {"trace": r.trace})
    out.report["plot_axes"] = "t finite(1)/infinite(0)"
    for rec in sorted(r.trace, key=lambda z: z["t"]):
        out.plot.append((rec["t"], 1.0 if rec["verdict"] == "finite" else 0.0))
    return out


def cmd_delta_inf(args):
    cfg = _config(args)
    m = build_map(cfg)
    K = args.K
    n_max = _pick(args, cfg, "n_max", 30)
    tab = delta_inf_counting(m, K, args.M, args.q, n_max=n_max)
    cols = ["kind", "M", "q", "value", "K", "n_max", "flags"]
    out = Output("delta-inf", cols)
    for (M, q), v in tab.table.items():
        out.add({"kind": "counting", "M": M, "q": q, "value": v, "K": K, "n_max": n_max,
                 "flags": [f for f in tab.flags if f"M={M},q={q})" in f]},
                {"z_n": [str(z) for z in tab.sequences[(M, q)]]})
    cert = delta_inf_lower_bound(m, offsets=args.offsets, K=args.cert_K)
    out.add({"kind": "certificate", "value": cert.h, "K": args.cert_K, "flags": cert.flags},
            {"offsets": cert.offsets, "max_mass": cert.max_mass, "decay_ok": cert.decay_ok})
    out.report["headline"] = {"counting_corner": tab.corner, "counting_value": tab.headline,
                              "certificate": cert.h, "K": K, "certificate_K": args.cert_K}
    out.report["plot_axes"] = "n (1/n)log z_n at the corner (M, q)"
    for n, z in enumerate(tab.sequences[tab.corner], start=1):
        if z > 0:
            out.plot.append((n, math.log(z) / n))
    return out


def cmd_suspension_check(args):
    cfg = _config(args)
    m = build_map(cfg)
    k = _pick(args, cfg, "k", None)
    seed = _pick(args, cfg, "seed", 0)
    rng = np.random.default_rng(seed)
    cols = ["m", "base", "vertices", "log_perron_root", "scaled", "abramov_max_error", "n_measures", "k",
            "flags"]
    out = Output("suspension-check", cols)
    out.report["seed"] = seed
    out.report["plot_axes"] = "m base^m*h_top(split)"
    for order in args.m:
        try:
            split = build_split_shift(m, order, k)
        except RoofError as exc:
            out.add({"m": order, "k": k, "flags": [f"roof-error: {exc}"]})
            continue
        errs = []
        for _ in range(args.n_measures):
            mm = random_markov(split.base, rng)
            errs.append(abs(entropy(push_measure(mm, split)) - entropy(mm) / roof_integral(mm, split)))
        h = split.log_perron_root()
        scaled = split.roof.base ** order * h
        out.add({"m": order, "base": split.roof.base, "vertices": split.n_vertices, "log_perron_root": h,
                 "scaled": scaled, "abramov_max_error": max(errs) if errs else None,
                 "n_measures": args.n_measures, "k": split.subshift.k, "flags": split.roof.flags},
                {"abramov_errors": errs, "roof": {",".join(map(str, w)): int(v)
                                                  for w, v in zip(split.roof.words, split.roof.values)}})
        out.plot.append((order, scaled))
    return out


_SPECTRUM_COLS = ["gamma", "value", "mass", "membership", "constraint_residual", "dinkelbach_residual", "k",
                  "flags"]


def _spectrum_row(g, res, k):
    if res is None:
        return {"gamma": list(g), "value": math.nan, "membership": "not_in_Z", "k": k,
                "flags": ["not_in_Z"]}, {}
    rep = res.report
    row = {"gamma": list(g), "value": res.value, "mass": res.mass, "membership": res.membership,
           "constraint_residual": rep.get("constraint_residual"),
           "dinkelbach_residual": rep.get("dinkelbach_residual"), "k": rep.get("k", k), "flags": res.flags}
    detail = {"report": rep, "multipliers": res.multipliers}
    return row, detail


def _solve_all(fn, targets, k, command):
    def safe(g):
        try:
            return fn(g)
        except NotInZError:
            return None
        except (RuntimeError, np.linalg.LinAlgError, FloatingPointError, ReducibleTruncationError) as exc:
            raise SolverFailure(f"gamma={list(g)}: {exc}") from exc

    results = _ordered_map(safe, targets)
    out = Output(command, _SPECTRUM_COLS)
    out.report["plot_axes"] = "gamma_1 dimension"
    for g, r in zip(targets, results):
        row, detail = _spectrum_row(g, r, k)
        out.add(row, detail)
        out.plot.append((g[0] if len(g) else 0.0, row["value"]))
    return out


def cmd_spectrum(args):
    cfg = _config(args)
    m = build_map(cfg)
    k = _pick(args, cfg, "k", 10)
    targets = _targets(args, cfg)
    tol = cfg.get("tolerances", {}).get("dinkelbach", 1e-12)
    method = args.method or cfg.get("method", "auto")
    cls = family_class(m)
    if method == "auto":
        method = "alpha4" if cls == "bounded_c0" else "alpha3"
    delta = args.delta_inf if args.delta_inf is not None else cfg.get("delta_inf")
    if method == "alpha4" and delta is None:
        delta = delta_inf_lower_bound(m).h
    dims = {len(g) for g in targets}
    if len(dims) != 1:
        raise ConfigError("all targets must have the same length", "$.grid")
    pots = build_potentials(m, cfg, dims.pop())

    def solve(g):
        q = SpectrumQuery(m, pots, g, k, tol=tol)
        return alpha4(q, delta) if method == "alpha4" else alpha3(q)

    out = _solve_all(solve, targets, k, "spectrum")
    out.report.update({"method": method, "family_class": cls, "delta_inf": delta})
    return out


def cmd_freq_spectrum(args):
    cfg = _config(args)
    m = build_map(cfg)
    k = _pick(args, cfg, "k", 20)
    targets = _targets(args, cfg)
    cls = family_class(m)
    s_val = s_infinity(m).value if cls == "unbounded" else None
    delta = args.delta_inf if args.delta_inf is not None else cfg.get("delta_inf")
    if cls == "bounded_c0" and delta is None:
        delta = delta_inf_lower_bound(m).h
    out = _solve_all(lambda g: freq_spectrum(m, g, k=k, s_inf=s_val, delta_inf=delta), targets, k,
                     "freq-spectrum")
    out.report.update({"family_class": cls, "s_inf": s_val, "delta_inf": delta})
    return out


def cmd_transient_dim(args):
    if args.lam is not None and args.config is None:
        m = f_lambda(args.lam)
    else:
        m = build_map(_config(args))
    if m.family != "f_lambda":
        raise ConfigError("transient-dim is defined for the f_lambda family only", "$.family")
    lam = m.params["lam"]
    v = transient_dimension(m)
    out = Output("transient-dim", ["lambda", "value", "flags"])
    out.add({"lambda": lam, "value": v, "flags": ["closed-form"]})
    out.report["plot_axes"] = "lambda dimension"
    out.plot.append((lam, v))
    return out


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="birkhoff-spectra", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(name, fn, help_, truncation=True):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--lambda", dest="lam", type=float, help="override the f_lambda parameter")
        sp.add_argument("--out", help="output prefix for .csv, .json and .dat files")
        if truncation:
            sp.add_argument("--k", type=int, help="truncation level")
        sp.set_defaults(func=fn)
        return sp

    for name, fn, help_ in (("pressure", cmd_pressure, "Gurevich pressure of the config potential"),
                            ("entropy", cmd_entropy, "topological entropy")):
        sp = common(name, fn, help_)
        sp.add_argument("--n-max", dest="n_max", type=int, help="longest loop length")
        sp.add_argument("--a", type=int, help="base symbol of the loops")

    sp = common("s-inf", cmd_s_inf, "critical exponent of -t log|T'|", truncation=False)
    sp.add_argument("--t-tol", dest="t_tol", type=float, help="bisection width")

    sp = common("delta-inf", cmd_delta_inf, "entropy at infinity", truncation=False)
    sp.add_argument("--K", type=int, default=40, help="truncation for the counting table")
    sp.add_argument("--M", type=_floats, default=[1.0, 2.0, 4.0, 8.0], help="time fractions, e.g. 1,2,4")
    sp.add_argument("--q", type=_ints, default=[1, 2, 4, 8], help="low-symbol cutoffs")
    sp.add_argument("--n-max", dest="n_max", type=int, help="longest word length")
    sp.add_argument("--offsets", type=_ints, default=[0, 10, 20, 40, 80], help="translation offsets")
    sp.add_argument("--cert-K", dest="cert_K", type=int, default=40, help="truncation of the base measure")

    sp = common("suspension-check", cmd_suspension_check, "split shifts and the Abramov identity")
    sp.add_argument("--m", type=_ints, default=[1, 2, 3], help="roof orders")
    sp.add_argument("--n-measures", dest="n_measures", type=int, default=20)
    sp.add_argument("--seed", type=int)

    sp = common("spectrum", cmd_spectrum, "dimension of a Birkhoff level set")
    sp.add_argument("--gamma", type=_floats, action="append", help="targets, e.g. 0.7,0.3 (repeatable)")
    sp.add_argument("--method", choices=["auto", "alpha3", "alpha4"])
    sp.add_argument("--delta-inf", dest="delta_inf", type=float)

    sp = common("freq-spectrum", cmd_freq_spectrum, "dimension of a digit-frequency level set")
    sp.add_argument("--gamma", type=_floats, action="append", help="frequencies of symbols 1, 2, ...")
    sp.add_argument("--delta-inf", dest="delta_inf", type=float)

    common("transient-dim", cmd_transient_dim, "dimension of the transient set of f_lambda", truncation=False)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverFailure, RuntimeError, np.linalg.LinAlgError, FloatingPointError,
            ReducibleTruncationError, RoofError, NotInZError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    out.write(args.out)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
