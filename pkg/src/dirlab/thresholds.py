"""Finiteness thresholds of N_alpha, D_alpha and C_alpha on the h_beta family.

Each functional reduces to a one-dimensional integral near theta = 0+.
Everything is written in the log variable s = log(gamma/theta), where
theta dtheta-measure becomes ds and the reduced integrands are smooth, and
a dyadic-depth increment test classifies the tail as convergent or
divergent.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .boundary import HBetaParams
from .quadrature import adaptive_1d, ordered_map

CONVERGENT = "Convergent"
DIVERGENT = "Divergent"
INCONCLUSIVE = "Inconclusive"
QUANTITIES = ("N", "D", "C")
RHO_CONVERGENT = 0.9
RHO_DIVERGENT = 0.98
MARGIN = 0.15
MAX_S = 1e7
NOISE_FLOOR = 1e-280


def threshold(quantity: str, alpha: float) -> float:
    """beta must exceed this for the functional to be finite."""
    return {"N": 0.5, "D": 1.0 - 0.5 * alpha, "C": 1.0}[quantity]


@dataclass(frozen=True)
class ReducedIntegrand:
    """theta * F(theta) as a function of s = log(gamma/theta).

    ``integral over [eps, pi/2] of F dtheta`` equals the integral of
    ``g(s)`` over [log(gamma/(pi/2)), log(gamma/eps)].
    """

    quantity: str
    p: float
    log_gamma: float
    g: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    params: Optional[HBetaParams] = None

    @property
    def s_min(self) -> float:
        return self.log_gamma - np.log(np.pi / 2)

    @property
    def depth_base(self) -> float:
        """L0 = log(gamma/(pi/4))."""
        return self.log_gamma - np.log(np.pi / 4)

    def theta_form(self, theta):
        """F(theta) itself, for theta not too small."""
        theta = np.asarray(theta, dtype=float)
        return self.g(self.log_gamma - np.log(theta)) / theta


def reduced_integrand(quantity: str, alpha: float, beta: float,
                      subtract_c0: bool = False) -> ReducedIntegrand:
    """Dominant tail of N (p = 2beta), D via n_alpha (p = 2beta-1+alpha) or C (p = 2beta-1).

    N: h^2 theta^(alpha-1);  D: h^2 (log(h/c0)/theta)^(1-alpha);
    C: h^2 log(h/c0) theta^(alpha-1), all on (0, pi/2].

    For N, (h - c0)^2 is comparable to h^2 on (0, pi/2], so the default
    drops c0.  ``subtract_c0=True`` keeps (h - c0)^2; its factor
    (1 - c0/h)^2 climbs from about 1/4 toward 1 over the first depth
    blocks and can push the earliest increment ratio above 1.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    prm = HBetaParams(alpha, beta)
    lg = prm.log_gamma
    c0 = prm.c0
    a = alpha

    def log_ratio(s):
        # log(h/c0) with log h = -(alpha/2)(log gamma - s) - beta log s
        return -0.5 * a * (lg - s) - beta * np.log(s) - np.log(c0)

    if quantity == "N":
        c = c0 if subtract_c0 else 0.0

        def g(s):
            s = np.asarray(s, dtype=float)
            return (s**-beta - c * np.exp(0.5 * a * (lg - s))) ** 2
        p = 2 * beta
    elif quantity == "D":
        def g(s):
            s = np.asarray(s, dtype=float)
            return s ** (-2 * beta) * log_ratio(s) ** (1 - a)
        p = 2 * beta - 1 + a
    else:
        def g(s):
            s = np.asarray(s, dtype=float)
            return s ** (-2 * beta) * log_ratio(s)
        p = 2 * beta - 1
    return ReducedIntegrand(quantity, p, lg, g, prm)


def pure_model(p: float, log_gamma: float = float(np.log(np.pi) + 4.0)) -> ReducedIntegrand:
    """1/(theta log^p(gamma/theta)), gamma = pi e^4 by default."""

    def g(s):
        return np.asarray(s, dtype=float) ** -p

    return ReducedIntegrand("model", float(p), log_gamma, g)


def pure_model_integral(p: float, eps: float, log_gamma: float = float(np.log(np.pi) + 4.0)) -> float:
    """Closed form of the pure-model truncated integral; p = 1 gives the log."""
    a = log_gamma - np.log(np.pi / 2)
    b = log_gamma - np.log(eps)
    if p == 1:
        return float(np.log(b / a))
    return float((a ** (1 - p) - b ** (1 - p)) / (p - 1))


def _integrate_s(integrand: ReducedIntegrand, s_lo: float, s_hi: float, tol: float) -> float:
    if s_hi <= s_lo:
        return 0.0
    if s_hi > MAX_S:
        raise ValueError(
            f"log-depth {s_hi:.3g} exceeds the quadrature budget (max depth s = {MAX_S:g})"
        )
    res = adaptive_1d(integrand.g, s_lo, s_hi, tol=tol, abs_floor=1e-300)
    if not res.converged:
        warnings.warn(f"truncated integral on [{s_lo}, {s_hi}] did not converge", RuntimeWarning)
    return res.value


def truncated_integral(integrand: ReducedIntegrand, eps: Optional[float] = None,
                       s: Optional[float] = None, tol: float = 1e-12) -> float:
    """int_eps^{pi/2} F(theta) dtheta, via s = log(gamma/theta).

    Give either ``eps`` or the log-depth ``s`` = log(gamma/eps) directly
    (the latter never materializes eps, so it can go far below 1e-308).
    """
    if (eps is None) == (s is None):
        raise ValueError("give exactly one of eps and s")
    if s is None:
        if not 0.0 < eps <= np.pi / 2:
            raise ValueError("need 0 < eps <= pi/2")
        s = integrand.log_gamma - np.log(eps)
    return _integrate_s(integrand, integrand.s_min, float(s), tol)


@dataclass(frozen=True)
class ConvergenceVerdict:
    verdict: str
    ratios: tuple
    depths: tuple
    increments: tuple
    diagnostic: str = ""


def classify_convergence(integrand: ReducedIntegrand, depth: int = 6,
                         tol: float = 1e-12) -> ConvergenceVerdict:
    """Dyadic increment test at log-depths s_k = L0 * 2^k, k = 0..depth."""
    if depth < 4:
        raise ValueError("depth must be at least 4")
    L0 = integrand.depth_base
    s = L0 * 2.0 ** np.arange(depth + 1)
    inc = np.array([_integrate_s(integrand, s[k], s[k + 1], tol) for k in range(depth)])
    depths = tuple(float(x) for x in s)
    if np.any(~np.isfinite(inc)) or np.any(np.abs(inc) < NOISE_FLOOR):
        return ConvergenceVerdict(INCONCLUSIVE, (), depths, tuple(inc.tolist()),
                                  "increments below floating-point noise floor")
    rho = inc[1:] / inc[:-1]
    if np.all(rho <= RHO_CONVERGENT):
        verdict = CONVERGENT
    elif np.all(rho >= RHO_DIVERGENT):
        verdict = DIVERGENT
    else:
        verdict = INCONCLUSIVE
    return ConvergenceVerdict(verdict, tuple(rho.tolist()), depths, tuple(inc.tolist()))


@dataclass(frozen=True)
class ThresholdRow:
    quantity: str
    alpha: float
    beta: float
    verdict: str
    expected: str
    agree: bool
    p: float
    ratios: tuple = ()


def expected_verdict(quantity: str, alpha: float, beta: float) -> str:
    return CONVERGENT if beta > threshold(quantity, alpha) else DIVERGENT


def threshold_table(alpha: float, betas: Sequence[float], depth: int = 6,
                    quantities: Sequence[str] = QUANTITIES, strict: bool = False) -> list:
    """One row per (quantity, beta) comparing the classifier to the closed thresholds."""
    jobs = []
    for q in quantities:
        for b in betas:
            gap = abs(b - threshold(q, alpha))
            if gap < MARGIN:
                msg = f"beta={b} is within {MARGIN} of the {q} threshold {threshold(q, alpha)}"
                if strict:
                    raise ValueError(msg)
                warnings.warn(msg, RuntimeWarning)
            jobs.append((q, float(b)))

    def one(job):
        q, b = job
        ri = reduced_integrand(q, alpha, b)
        v = classify_convergence(ri, depth)
        exp = expected_verdict(q, alpha, b)
        return ThresholdRow(q, float(alpha), b, v.verdict, exp, v.verdict == exp, ri.p, v.ratios)

    return ordered_map(one, jobs)


CSV_FIELDS = ("quantity", "alpha", "beta", "verdict", "expected", "agree")


def table_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([r.quantity, f"{r.alpha:.17g}", f"{r.beta:.17g}", r.verdict, r.expected,
                    str(r.agree).lower()])
    return buf.getvalue()


def table_to_dicts(rows) -> list:
    out = []
    for r in rows:
        d = asdict(r)
        d["ratios"] = list(r.ratios)
        out.append(d)
    return out


def table_to_json(rows) -> str:
    return json.dumps({"rows": table_to_dicts(rows)}, sort_keys=True)
