"""Acceptance suite: ten numbered checks, each returning a CriterionResult.

Used by ``dirlab selftest`` and by the test suite.  ``quick=True`` halves
the angular grids; verdicts must not change.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import carleson, energy, thresholds
from .boundary import BoundaryFunction, make_hbeta, parse_spec
from .outer import TaylorSeries, taylor_coefficients

SMOOTH_SPECS = (
    "poly:1+z/2",
    "expcos",
    "exp-trig:0,0.2",
    "sin-bump:0.3",
    "exp-trig:0,0,0,0,0,0,0.1",
    "exp-trig:0.1,0.5,-0.3,0.2,0.1",
)
BAND_SPECS = (
    "expcos",
    "exp-trig:0,0.2",
    "exp-trig:0,0,0,0,0,0,0.1",
    "exp-trig:0.1,0.5,-0.3,0.2,0.1",
    "step:1,4",
    "sin-bump:0.3",
    "poly:1+z/2",
    "exp-trig:0,0,0.4",
)
BAND_HBETA = (1.2, 1.5)
BAND_ALPHAS = (0.1, 0.25, 0.5)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} "
                f"({self.seconds:.1f}s, budget {self.budget:.0f}s)")


def band_corpus(alpha: float) -> list[BoundaryFunction]:
    """Ten boundary functions: eight fixed plus two h_beta finite at this alpha."""
    out = [parse_spec(s) for s in BAND_SPECS]
    out += [make_hbeta(alpha, b) for b in BAND_HBETA]
    return out


def _grid(quick: bool, n: int = 1024) -> int:
    return n // 2 if quick else n


def exp_series_energy(c: float, terms: int = 40) -> float:
    """D(e^{cz}) = sum n (c^n/n!)^2."""
    return float(sum(k * (c**k / math.factorial(k)) ** 2 for k in range(1, terms)))


# ------------------------------------------------------------- criteria


def criterion_1(quick: bool = False, prefactor: Optional[float] = None) -> tuple[bool, str]:
    n = _grid(quick)
    worst = 0.0
    for k in range(1, 9):
        f = TaylorSeries.polynomial([0.0] * k + [1.0])
        v = energy.energy_douglas(f, 0.0, n, prefactor=prefactor)
        worst = max(worst, abs(v - k) / k)
    return worst <= 5e-3, f"max rel err {worst:.2e} over z^1..z^8 (n={n}, tol 5e-3)"


def criterion_2(quick: bool = False) -> tuple[bool, str]:
    n = _grid(quick)
    cases = [("poly:1+z/2", 0.25), ("exp-trig:0,0.2", exp_series_energy(0.2))]
    worst = 0.0
    for spec, target in cases:
        chk = carleson.carleson_identity_check(parse_spec(spec), n)
        worst = max(worst, abs(chk.lhs - target) / target, abs(chk.rhs - target) / target)
    return worst <= 1e-2, f"max rel err {worst:.2e} against 0.25 and {cases[1][1]:.10f} (tol 1e-2)"


def criterion_3(quick: bool = False, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        deg = int(rng.integers(1, 9))
        c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
        f = TaylorSeries.polynomial(c)
        for a in (0.1, 0.25, 0.5, 0.75, 0.9):
            x, y = energy.energy_area(f, a), energy.energy_parseval_exact(f, a)
            worst = max(worst, abs(x - y) / y)
    z = TaylorSeries.polynomial([0.0, 1.0])
    d = energy.energy_area(z, 0.5)
    err_z = abs(d - 8.0 / 15.0) / (8.0 / 15.0)
    ok = worst <= 1e-6 and err_z <= 1e-6
    return ok, f"area vs parseval max rel {worst:.2e}; D_0.5(z) rel err {err_z:.2e} (tol 1e-6)"


def criterion_4(quick: bool = False) -> tuple[bool, str]:
    n = _grid(quick)
    worst = 0.0
    for spec in SMOOTH_SPECS:
        h = parse_spec(spec)
        series = taylor_coefficients(h, n_max=n // 2 - 1, n=n)
        for r in (0.3, 0.6, 0.9):
            a = energy.slice_energy_cr(h, r, n)
            b = energy.slice_energy_sum(series, r)
            worst = max(worst, abs(a - b) / b)
    return worst <= 1e-6, f"max rel gap {worst:.2e} over {len(SMOOTH_SPECS)} h x 3 radii (tol 1e-6)"


def criterion_5(quick: bool = False) -> tuple[bool, str]:
    n = _grid(quick)
    zeros = True
    all_one = True
    notes = []
    for spec in ("sin-bump:0.3", "exp-trig:0,0,0,0,0,0,0.1"):
        h = parse_spec(spec)
        mu = carleson.mu_profile(h, n)
        all_one &= bool(np.all(mu.mu == 1.0))
        for a in (0.1, 0.5):
            na, nt = carleson.n_alphas(h, mu, a, n)
            zeros &= na == 0.0 and nt == 0.0
            notes.append(f"{na:g}/{nt:g}")
    return zeros and all_one, f"(n_a, n~_a) = {', '.join(notes)}; mu == 1 everywhere: {all_one}"


def criterion_6(quick: bool = False) -> tuple[bool, str]:
    plan = {"N": (0.3, 0.8), "D": (0.6, 0.9), "C": (0.8, 1.3)}
    bad = []
    for q, betas in plan.items():
        for row in thresholds.threshold_table(0.5, betas, quantities=(q,)):
            if not row.agree:
                bad.append(f"{q}@{row.beta}:{row.verdict}")
    triple = [thresholds.classify_convergence(thresholds.reduced_integrand(q, 0.5, 0.9)).verdict
              for q in ("N", "D", "C")]
    sep = triple == [thresholds.CONVERGENT, thresholds.CONVERGENT, thresholds.DIVERGENT]
    ok = not bad and sep
    return ok, f"disagreements: {bad or 'none'}; beta=0.9 triple N/D/C = {'/'.join(triple)}"


def criterion_7(quick: bool = False) -> tuple[bool, str]:
    n = _grid(quick)
    lo, hi = np.inf, 0.0
    scale_err = 0.0
    mismatched = []
    for a in BAND_ALPHAS:
        for h in band_corpus(a):
            d = carleson.theorem_decomposition(h, a, n=n)
            d7 = carleson.theorem_decomposition(h.scaled(7.0), a, n=n)
            if d.lhs_finite != d.rhs_finite:
                mismatched.append(h.name)
            r = d.ratio
            lo, hi = min(lo, r), max(hi, r)
            scale_err = max(scale_err, abs(d7.ratio / r - 1.0))
    for spec in ("hbeta:0.5,0.3", "hbeta:0.5,0.6"):
        d = carleson.theorem_decomposition(parse_spec(spec), 0.5, n=n)
        if d.lhs_finite or d.rhs_finite:
            mismatched.append(spec)
    ok = 1e-3 <= lo and hi <= 1e3 and scale_err <= 1e-8 and not mismatched
    return ok, (f"ratio range [{lo:.3g}, {hi:.3g}], scale err {scale_err:.1e}, "
                f"finiteness mismatches: {mismatched or 'none'}")


def criterion_8(quick: bool = False) -> tuple[bool, str]:
    n = _grid(quick)
    smooth_min = np.inf
    overall = np.inf
    specs = list(SMOOTH_SPECS) + ["step:1,4", "hbeta:0.5,1", "hbeta:0.5,0.9"]
    for spec in specs:
        h = parse_spec(spec)
        lb = carleson.check_lower_bound_outer(h, carleson.mu_profile(h, n))
        overall = min(overall, lb.min_ratio)
        if spec in SMOOTH_SPECS:
            smooth_min = min(smooth_min, lb.min_ratio)
    ok = overall >= carleson.VEB6_BOUND and smooth_min >= 0.1
    return ok, f"min |O_h|/h = {overall:.4g} overall, {smooth_min:.4g} smooth (need >= e^-41, >= 0.1)"


def criterion_9(quick: bool = False) -> tuple[bool, str]:
    n = _grid(quick)
    worst = 0.0
    for spec in SMOOTH_SPECS:
        h = parse_spec(spec)
        mu = carleson.mu_profile(h, n)
        for a in (0.1, 0.5, 0.9):
            worst = max(worst, carleson.check_dauglas_bound(h, a, mu))
    return worst <= 100.0, f"max ratio {worst:.4g} (bound 100)"


def criterion_10(quick: bool = False) -> tuple[bool, str]:
    wrong = []
    worst = 0.0
    for p in (0.5, 0.8, 1.0, 1.3, 2.0, 3.0):
        model = thresholds.pure_model(p)
        v = thresholds.classify_convergence(model)
        want = thresholds.CONVERGENT if p > 1 else thresholds.DIVERGENT
        if v.verdict != want:
            wrong.append(p)
        for eps in (1e-2, 1e-4, 1e-10, 1e-100):
            x = thresholds.truncated_integral(model, eps=eps)
            y = thresholds.pure_model_integral(p, eps)
            worst = max(worst, abs(x - y) / abs(y))
    ok = not wrong and worst <= 1e-8
    return ok, f"wrong verdicts at p={wrong or 'none'}; truncated max rel err {worst:.1e} (tol 1e-8)"


CRITERIA: tuple[tuple[int, str, Callable, float], ...] = (
    (1, "Douglas exactness", criterion_1, 20),
    (2, "Carleson identity", criterion_2, 20),
    (3, "cross-route exactness", criterion_3, 10),
    (4, "slice identity", criterion_4, 10),
    (5, "vanishing oscillation terms", criterion_5, 5),
    (6, "threshold trichotomy", criterion_6, 10),
    (7, "equivalence band", criterion_7, 60),
    (8, "outer lower bound", criterion_8, 20),
    (9, "weighted mu bound", criterion_9, 20),
    (10, "classifier calibration", criterion_10, 5),
)


def run_criterion(number: int, quick: bool = False, douglas_prefactor: Optional[float] = None,
                  seed: int = 0) -> CriterionResult:
    num, name, fn, budget = CRITERIA[number - 1]
    t0 = time.perf_counter()
    if num == 1:
        ok, detail = fn(quick, prefactor=douglas_prefactor)
    elif num == 3:
        ok, detail = fn(quick, seed=seed)
    else:
        ok, detail = fn(quick)
    return CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0, budget)


def run_all(quick: bool = False, douglas_prefactor: Optional[float] = None,
            seed: int = 0) -> list[CriterionResult]:
    return [run_criterion(k, quick, douglas_prefactor, seed) for k in range(1, len(CRITERIA) + 1)]
