"""Command-line frontend: portraits, adjacency/polynomial point sets,
boundary and level curves, single-point probes, and the cross-validation
suite.

Configuration precedence is CLI flags > config file (flat key=value lines)
> built-in defaults.  Exit codes: 0 success, 2 configuration error,
3 verification failure, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bessel, flow, heun, matprod, spectral
from .errors import (
    HeunlockError,
    NoBracketError,
    NotConvergedError,
    StepUnderflowError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_NUMERIC = 4

_DEFAULTS = {
    "omega": 1.0,
    "b": "-6:6:120",
    "a": "0:10:100",
    "mu": "0.02:2.5:200",
    "r": None,
    "l": "0",
    "eq": "e0",
    "sign": "plus",
    "tol": 1e-8,
    "out": None,
    "format": "csv",
    "threads": None,
    "suite": "fast",
    "lam": None,
    "seed": 2024,
}


class ConfigError(Exception):
    pass


@dataclass
class JobConfig:
    """Resolved options of one CLI invocation."""

    subcommand: str
    omega: float
    b_range: tuple[float, float, int]
    a_range: tuple[float, float, int]
    mu_range: tuple[float, float, int]
    r: Optional[float]
    l_range: tuple[int, int]
    eq: str
    sign: str
    tol: float
    out: Optional[str]
    format: str
    threads: int
    suite: str
    lam: Optional[float]
    seed: int


@dataclass
class RunReport:
    """Per-check results of the verification suite."""

    suite: str
    checks: list = field(default_factory=list)

    def add(self, name: str, passed: bool, residual: float, seconds: float):
        self.checks.append({
            "name": name,
            "passed": bool(passed),
            "residual": float(residual),
            "seconds": round(float(seconds), 3),
        })

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> str:
        return json.dumps(
            {"suite": self.suite, "passed": self.all_passed, "checks": self.checks},
            indent=2,
        ) + "\n"


def _parse_range(text: str, n_default: int = 1) -> tuple[float, float, int]:
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v, v, 1)
        if len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1 or (n > 1 and not hi > lo) or not (
                    math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError
            return (lo, hi, n)
    except ValueError:
        pass
    raise ConfigError("bad range %r (want value or lo:hi:n)" % text)


def _parse_int_range(text: str) -> tuple[int, int]:
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            v = int(parts[0])
            return (v, v)
        lo, hi = int(parts[0]), int(parts[1])
        if hi < lo:
            raise ValueError
        return (lo, hi)
    except ValueError:
        raise ConfigError("bad integer range %r" % text) from None


def _load_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError("%s:%d: expected key=value" % (path, lineno))
                key, _, value = line.partition("=")
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from None
    return out


def _grid_values(rng: tuple[float, float, int]) -> np.ndarray:
    lo, hi, n = rng
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def build_config(args: argparse.Namespace) -> JobConfig:
    file_cfg = _load_config_file(args.config) if args.config else {}
    merged = {}
    for key, default in _DEFAULTS.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
        elif key in file_cfg:
            merged[key] = file_cfg[key]
        else:
            merged[key] = default
    threads = merged["threads"]
    if threads is None:
        threads = os.environ.get("HPLK_THREADS", "1")
    try:
        threads = max(1, int(threads))
    except ValueError:
        raise ConfigError("bad threads value %r" % threads) from None
    omega = float(merged["omega"])
    if not (omega > 0 and math.isfinite(omega)):
        raise ConfigError("omega must be positive and finite")
    tol = float(merged["tol"])
    if not (tol > 0 and math.isfinite(tol)):
        raise ConfigError("tol must be positive")
    fmt = str(merged["format"])
    if fmt not in ("csv", "json", "bin"):
        raise ConfigError("format must be csv, json or bin")
    sign = str(merged["sign"])
    if sign not in ("plus", "minus"):
        raise ConfigError("sign must be plus or minus")
    eq = str(merged["eq"])
    if eq not in ("e0", "e1", "paste", "pasterho"):
        raise ConfigError("eq must be one of e0, e1, paste, pasterho")
    r = merged["r"]
    lam = merged["lam"]
    return JobConfig(
        subcommand=args.subcommand,
        omega=omega,
        b_range=_parse_range(merged["b"]),
        a_range=_parse_range(merged["a"]),
        mu_range=_parse_range(merged["mu"]),
        r=None if r is None else float(r),
        l_range=_parse_int_range(merged["l"]),
        eq=eq,
        sign=sign,
        tol=tol,
        out=merged["out"],
        format=fmt,
        threads=threads,
        suite=str(merged["suite"]),
        lam=None if lam is None else float(lam),
        seed=int(merged["seed"]),
    )


def _emit(cfg: JobConfig, text: Optional[str] = None,
          data: Optional[bytes] = None) -> None:
    if data is not None:
        if cfg.out:
            with open(cfg.out, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
        return
    assert text is not None
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _c2pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _points_csv(rows: list[dict], columns: list[str]) -> str:
    lines = ["# hplk-csv v1", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


# ---------------------------------------------------------------------------
# subcommands


def cmd_portrait(cfg: JobConfig) -> int:
    b_lo, b_hi, nb = cfg.b_range
    a_lo, a_hi, na = cfg.a_range
    if nb < 2 or na < 2:
        raise ConfigError("portrait needs nb, na >= 2")
    portrait = flow.phase_lock_scan(
        cfg.omega, b_lo, b_hi, nb, a_lo, a_hi, na,
        tol=max(cfg.tol, 5e-3), threads=cfg.threads,
    )
    if cfg.format == "bin":
        _emit(cfg, data=portrait.to_binary())
    elif cfg.format == "json":
        payload = {
            "omega": cfg.omega,
            "grid": {"b": list(cfg.b_range), "a": list(cfg.a_range)},
            "rho": portrait.rho.tolist(),
            "uncertainty": portrait.uncertainty.tolist(),
            "locked": portrait.locked.astype(int).tolist(),
        }
        _emit(cfg, json.dumps(payload, indent=2) + "\n")
    else:
        _emit(cfg, portrait.to_csv())
    if portrait.fraction_not_converged > 0.01:
        print("portrait: %.1f%% cells not converged"
              % (100 * portrait.fraction_not_converged), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def adjacency_points(omega: float, l: int, mu_lo: float, mu_hi: float,
                     n_scan: int, tol: float = 1e-12) -> list[dict]:
    """Roots of the adjacency equation on the line B = l omega, each
    cross-checked by the identity test on the period map."""
    mus = np.linspace(mu_lo, mu_hi, n_scan)
    vals = []
    for m in mus:
        vals.append(spectral.zeta(l, omega, m).signed if m != 0 else math.nan)
    points = []
    for i in range(n_scan - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isnan(v0) or math.isnan(v1) or v0 * v1 > 0:
            continue
        root = spectral.find_root_1d(
            lambda m: spectral.zeta(l, omega, m).signed,
            (float(mus[i]), float(mus[i + 1])), 1e-13,
        )
        zres = spectral.zeta(l, omega, root).normalized
        p = flow.PhysParams(omega, l * omega, 2 * omega * root)
        pres = max(abs(pe - p0) for p0, pe in flow.poincare_samples(p, 16, 1e-10))
        points.append({
            "l": l, "mu": float(root),
            "B": l * omega, "A": 2 * omega * root,
            "zeta_residual": float(zres),
            "poincare_residual": float(pres),
        })
    return points


def cmd_adjacencies(cfg: JobConfig) -> int:
    l_lo, l_hi = cfg.l_range
    mu_lo, mu_hi, n_mu = cfg.mu_range
    if n_mu < 2:
        n_mu = 200
    all_points = []
    for l in range(l_lo, l_hi + 1):
        all_points.extend(
            adjacency_points(cfg.omega, l, max(mu_lo, 1e-4), mu_hi, n_mu))
    if cfg.format == "csv":
        _emit(cfg, _points_csv(all_points, [
            "l", "mu", "B", "A", "zeta_residual", "poincare_residual"]))
    else:
        _emit(cfg, json.dumps({"omega": cfg.omega, "points": all_points},
                              indent=2) + "\n")
    bad = [p for p in all_points if p["poincare_residual"] > 1e-3]
    if bad:
        print("adjacencies: %d point(s) failed the identity test" % len(bad),
              file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def polynomial_points(omega: float, l: int, *, mu_cap: Optional[float] = None,
                      n_scan: int = 1200) -> list[dict]:
    """Points on B = l omega whose companion equation has a polynomial
    solution, with the dynamical verification tags."""
    if mu_cap is None:
        mu_cap = 2.0 * (l + 2)
    mus = np.linspace(1e-6, mu_cap, n_scan)
    lam = 1.0 / (4 * omega**2) - mus**2

    def det_at(m: float) -> float:
        return spectral.tridiag_det(l, 1.0 / (4 * omega**2) - m * m, m).real

    vals = [spectral.tridiag_det(l, la, m).real for la, m in zip(lam, mus)]
    points = []
    for i in range(n_scan - 1):
        if vals[i] == 0.0 or vals[i] * vals[i + 1] >= 0:
            continue
        root = spectral.find_root_1d(det_at, (float(mus[i]), float(mus[i + 1])),
                                     1e-13)
        B, A = l * omega, 2 * omega * root
        delta = max(1e-3 * omega, 2e-3)
        rho_pair, unc_pair = flow.rotation_numbers_grid(
            omega, np.array([B - delta, B + delta]), np.array([A, A]),
            n_periods=1024, steps_per_period=256,
        )
        locked_flags = np.abs(rho_pair - np.round(rho_pair)) < np.maximum(
            3 * unc_pair, 1e-5)
        side = int(np.argmax(locked_flags))
        rho_int = int(round(rho_pair[side]))
        mon = flow.monodromy_numeric(flow.PhysParams(omega, B, A), 1e-11)
        trace = mon.m.m11 + mon.m.m22
        points.append({
            "l": l, "mu": float(root), "B": B, "A": A,
            "det_residual": abs(det_at(root)),
            "rho": rho_int,
            "rho_is_integer": bool(locked_flags.any()),
            "parity_ok": (rho_int - l) % 2 == 0,
            "range_ok": 0 <= rho_int <= l,
            "on_boundary": bool(locked_flags[0] != locked_flags[1]),
            "trace_gap": abs(complex(trace) - 2.0),
            "identity_distance": mon.distance_to_identity(),
            "monodromy_nonidentity": mon.distance_to_identity() > 1e-3,
        })
    return points


def cmd_polypoints(cfg: JobConfig) -> int:
    l_lo, l_hi = cfg.l_range
    if l_lo < 1:
        l_lo = 1
    all_points = []
    for l in range(l_lo, l_hi + 1):
        all_points.extend(polynomial_points(cfg.omega, l))
    if cfg.format == "csv":
        _emit(cfg, _points_csv(all_points, [
            "l", "mu", "B", "A", "det_residual", "rho", "rho_is_integer",
            "parity_ok", "range_ok", "on_boundary", "trace_gap",
            "identity_distance", "monodromy_nonidentity"]))
    else:
        _emit(cfg, json.dumps({"omega": cfg.omega, "points": all_points},
                              indent=2) + "\n")
    ok = all(
        p["rho_is_integer"] and p["parity_ok"] and p["range_ok"]
        and p["on_boundary"] and p["monodromy_nonidentity"]
        for p in all_points
    )
    if not ok:
        print("polypoints: verification failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_boundary(cfg: JobConfig) -> int:
    if cfg.eq not in ("e0", "e1"):
        raise ConfigError("boundary tracing supports --eq e0 or e1")
    a_lo, a_hi, na = cfg.a_range
    step = (a_hi - a_lo) / (na - 1) if na > 1 else 1.0
    curve = spectral.trace_curve(
        cfg.eq, cfg.sign, cfg.omega, a_lo, a_hi, step, cfg.tol)
    _emit(cfg, curve.to_csv())
    return EXIT_OK


def cmd_levelcurve(cfg: JobConfig) -> int:
    if cfg.r is None:
        raise ConfigError("levelcurve needs --r")
    a_lo, a_hi, na = cfg.a_range
    step = (a_hi - a_lo) / (na - 1) if na > 1 else 1.0
    curve = spectral.trace_curve(
        "pasterho", cfg.sign, cfg.omega, a_lo, a_hi, step, cfg.tol, r=cfg.r)
    _emit(cfg, curve.to_csv())
    return EXIT_OK


def cmd_rotnum(cfg: JobConfig) -> int:
    b = cfg.b_range[0]
    a = cfg.a_range[0]
    est = flow.rotation_number(flow.PhysParams(cfg.omega, b, a),
                               max(cfg.tol, 1e-8))
    payload = {"omega": cfg.omega, "B": b, "A": a, "rho": est.rho,
               "uncertainty": est.uncertainty, "periods": est.periods_used}
    if cfg.format == "csv":
        _emit(cfg, _points_csv([payload], list(payload)))
    else:
        _emit(cfg, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_monodromy(cfg: JobConfig) -> int:
    b = cfg.b_range[0]
    a = cfg.a_range[0]
    mon = flow.monodromy_numeric(flow.PhysParams(cfg.omega, b, a),
                                 min(cfg.tol, 1e-9))
    ev = mon.eigenvalues()
    payload = {
        "omega": cfg.omega, "B": b, "A": a,
        "matrix": [[_c2pair(mon.m.m11), _c2pair(mon.m.m12)],
                   [_c2pair(mon.m.m21), _c2pair(mon.m.m22)]],
        "det_error": mon.det_error,
        "eigenvalues": [_c2pair(ev[0]), _c2pair(ev[1])],
        "identity_distance": mon.distance_to_identity(),
    }
    _emit(cfg, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_xi(cfg: JobConfig) -> int:
    l = cfg.l_range[0]
    rows = []
    for m in _grid_values(cfg.mu_range):
        if m == 0:
            continue
        if cfg.lam is not None:
            v = spectral.xi(l, cfg.lam, m)
        else:
            v = spectral.zeta(l, cfg.omega, m)
        rows.append({
            "l": l, "mu": float(m), "A": 2 * cfg.omega * float(m),
            "value_re": v.value.real, "value_im": v.value.imag,
            "scale": v.scale, "normalized": v.normalized,
        })
    if cfg.format == "json":
        _emit(cfg, json.dumps({"points": rows}, indent=2) + "\n")
    else:
        _emit(cfg, _points_csv(rows, [
            "l", "mu", "A", "value_re", "value_im", "scale", "normalized"]))
    return EXIT_OK


def cmd_polydet(cfg: JobConfig) -> int:
    l_lo, l_hi = cfg.l_range
    rows = []
    for l in range(max(l_lo, 1), l_hi + 1):
        for m in _grid_values(cfg.mu_range):
            lam = cfg.lam if cfg.lam is not None \
                else 1.0 / (4 * cfg.omega**2) - m * m
            d = spectral.tridiag_det(l, lam, m)
            rows.append({"l": l, "mu": float(m), "lam": float(lam),
                         "det_re": d.real, "det_im": d.imag})
    if cfg.format == "json":
        _emit(cfg, json.dumps({"points": rows}, indent=2) + "\n")
    else:
        _emit(cfg, _points_csv(rows, ["l", "mu", "lam", "det_re", "det_im"]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suite


def _run_check(report: RunReport, name: str, fn) -> None:
    t0 = time.time()
    try:
        passed, residual = fn()
    except HeunlockError as exc:
        print("check %s raised: %s" % (name, exc), file=sys.stderr)
        passed, residual = False, math.inf
    report.add(name, passed, residual, time.time() - t0)


def run_verification(suite: str, threads: int = 1, seed: int = 2024) -> RunReport:
    rng = np.random.default_rng(seed)
    fast = suite != "full"
    report = RunReport(suite)

    def check_det():
        n = 12 if fast else 100
        worst = 0.0
        for _ in range(n):
            w = rng.uniform(0.3, 2.0)
            p = flow.PhysParams(w, rng.uniform(0, 4), rng.uniform(0, 5))
            worst = max(worst, flow.monodromy_numeric(p, 1e-10).det_error)
        return worst < 1e-6, worst

    def check_roteig():
        pts = [(2.0, 1.0, 1.0), (1.0, 0.4, 2.0), (0.7, 1.1, 1.5)]
        if not fast:
            pts = pts * 3
        worst = 0.0
        for w, b, a in pts:
            p = flow.PhysParams(w, b, a)
            est = flow.rotation_number(p, 1e-4)
            if abs(est.rho - round(est.rho)) < 0.05:
                continue
            ev = sorted(flow.monodromy_numeric(p, 1e-10).eigenvalues(),
                        key=lambda z: z.imag)
            pred = sorted(flow.monodromy_eigen_prediction(est.rho, p.l,
                                                          est.uncertainty)[0],
                          key=lambda z: z.imag)
            worst = max(worst, max(abs(ev[0] - pred[0]), abs(ev[1] - pred[1])))
        return worst < 5e-3, worst

    def check_dual_oracle():
        n = 10 if fast else 50
        worst = 0.0
        for _ in range(n):
            p = heun.HeunParams(
                rng.uniform(0.2, 2.5), rng.uniform(-1, 1),
                rng.uniform(0.1, 1.0), rng.uniform(0.05, 0.9))
            if p.is_resonant:
                continue
            fwd = heun.forward_solution(p, length=8)
            ratios = matprod.projective_backward_solve(heun.recurrence(p), 220, 1)
            worst = max(worst, abs(fwd.coeff(2) / fwd.coeff(1) - ratios[0]))
        return worst < 1e-10, worst

    def check_xi_identity():
        v = spectral.xi(0.7, 0.2, 0.3)
        _, xi_ent = heun.entire_solution(1.7, 0.2, 0.3)
        gap = abs(v.value - xi_ent) / v.scale
        return gap < 1e-12, gap

    def check_tridiag():
        worst = 0.0
        for l in range(1, 7):
            for _ in range(4 if fast else 10):
                lam = complex(rng.normal(), rng.normal())
                m = complex(rng.normal(), rng.normal())
                ours = spectral.tridiag_det(l, lam, m)
                dense = _dense_tridiag_det(l, lam, m)
                scale = max(abs(dense), 1.0)
                worst = max(worst, abs(ours - dense) / scale)
        return worst < 1e-11, worst

    def check_bessel_adjacency():
        x11 = bessel.bessel_j_zero(1, 1)
        v = spectral.xi(1.0, 0.0, 0.5j * x11)
        return v.normalized < 1e-8, v.normalized

    def check_portrait_props():
        nb, na = (24, 20) if fast else (120, 100)
        pt = flow.phase_lock_scan(2.0, -6, 6, nb, 0, 10, na, threads=threads)
        mirror = np.abs(pt.rho + pt.rho[::-1, :])
        tol3 = 3 * (pt.uncertainty + pt.uncertainty[::-1, :]) + 1e-8
        sym_ok = bool((mirror <= tol3).mean() > 0.98)
        half = np.abs(pt.rho - np.round(pt.rho * 2) / 2)
        half_locked = (np.abs(pt.rho * 2 - np.round(pt.rho * 2)) < 2e-3) & (
            np.abs(pt.rho - np.round(pt.rho)) > 0.25)
        frac_half = float(half_locked.mean())
        del half
        return sym_ok and frac_half < 0.02, frac_half

    def check_certificates():
        n = 5 if fast else 20
        worst_ratio = 0.0
        for _ in range(n):
            p = heun.HeunParams(
                rng.uniform(0.2, 2.0), rng.uniform(-0.5, 0.5),
                rng.uniform(0.1, 0.8), rng.uniform(0.1, 0.9))
            if p.is_resonant:
                continue
            prod = matprod.converging_product(
                heun.forward_factors(p), 1, 1e-3)
            deeper = matprod.converging_product(
                heun.forward_factors(p), 1, 0.0, stop="projective",
                min_factors=2 * prod.factors)
            gap = prod.value.sub(deeper.value).norm()
            worst_ratio = max(worst_ratio, gap / max(prod.tail_bound, 1e-300))
        return worst_ratio < 1.0, worst_ratio

    _run_check(report, "monodromy-determinant", check_det)
    _run_check(report, "eigenvalue-rotation", check_roteig)
    _run_check(report, "dual-oracle-ratios", check_dual_oracle)
    _run_check(report, "xi-entire-identity", check_xi_identity)
    _run_check(report, "tridiagonal-dense", check_tridiag)
    _run_check(report, "bessel-adjacency", check_bessel_adjacency)
    _run_check(report, "portrait-properties", check_portrait_props)
    _run_check(report, "product-certificates", check_certificates)
    return report


def _dense_tridiag_det(l: int, lam: complex, mu: complex) -> complex:
    h = np.zeros((l, l), dtype=complex)
    for j in range(1, l + 1):
        h[j - 1, j - 1] = (1 - j) * (l - j + 1) + lam
        if j < l:
            h[j - 1, j] = mu * j
            h[j, j - 1] = mu * (l - j)
    # sub-diagonal entry in row j+1 is mu*(l-j): recompute directly
    for j in range(2, l + 1):
        h[j - 1, j - 2] = mu * (l - j + 1)
    return complex(np.linalg.det(h))


def cmd_verify(cfg: JobConfig) -> int:
    report = run_verification(cfg.suite, cfg.threads, cfg.seed)
    _emit(cfg, report.to_json())
    return EXIT_OK if report.all_passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heunlock",
        description="Phase-lock portraits, spectral boundary equations and "
                    "their cross-validation for the forced Josephson model.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)
    names = ["portrait", "adjacencies", "polypoints", "boundary",
             "levelcurve", "rotnum", "monodromy", "xi", "polydet", "verify"]
    for name in names:
        sp = sub.add_parser(name)
        sp.add_argument("--omega", type=float)
        sp.add_argument("--b", help="B value or lo:hi:n")
        sp.add_argument("--a", help="A value or lo:hi:n")
        sp.add_argument("--mu", help="mu value or lo:hi:n")
        sp.add_argument("--r", type=float)
        sp.add_argument("--l", help="integer or lo:hi")
        sp.add_argument("--eq", choices=["e0", "e1", "paste", "pasterho"])
        sp.add_argument("--sign", choices=["plus", "minus"])
        sp.add_argument("--tol", type=float)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["csv", "json", "bin"])
        sp.add_argument("--config")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--suite", choices=["fast", "full"])
        sp.add_argument("--lam", type=float)
        sp.add_argument("--seed", type=int)
    return ap


_DISPATCH = {
    "portrait": cmd_portrait,
    "adjacencies": cmd_adjacencies,
    "polypoints": cmd_polypoints,
    "boundary": cmd_boundary,
    "levelcurve": cmd_levelcurve,
    "rotnum": cmd_rotnum,
    "monodromy": cmd_monodromy,
    "xi": cmd_xi,
    "polydet": cmd_polydet,
    "verify": cmd_verify,
}


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = build_config(args)
        return _DISPATCH[args.subcommand](cfg)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (NotConvergedError, StepUnderflowError) as exc:
        print("numerical non-convergence: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC
    except (NoBracketError, HeunlockError) as exc:
        print("verification failure: %s" % exc, file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
