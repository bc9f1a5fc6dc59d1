"""Weighted Dirichlet energies D_alpha computed along independent routes.

Exact routes (area integral, Beta-weighted Parseval sum, Douglas double
integral at alpha=0, slice sums) are cross-checked for equality; the
comparable routes (Parseval with (1+n)^(1-alpha), weighted Douglas, slice
route, Cauchy-Riemann area) are reported as ratios.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import betaln

from .boundary import BoundaryFunction
from .outer import (
    DEFAULT_N,
    ClearanceError,
    OuterFunction,
    TaylorSeries,
    as_outer,
    min_clearance,
    taylor_coefficients,
)
from .quadrature import (
    TWO_PI,
    UniformAngularGrid,
    chord,
    ordered_map,
    radial_rule,
    radial_weighted,
    staggered_double_sum,
)

TRUNCATION_TOL = 1e-8
ROUTES = ("area", "parseval_exact", "parseval_equiv", "douglas", "slice_route", "cr_area")


def _check_alpha(alpha: float, lo_open: bool = False) -> None:
    ok = (0.0 < alpha < 1.0) if lo_open else (0.0 <= alpha < 1.0)
    if not ok:
        rng = "(0, 1)" if lo_open else "[0, 1)"
        raise ValueError(f"alpha must lie in {rng}, got {alpha}")


def default_n_max(n: int) -> int:
    return min(n // 2 - 1, 256)


def as_series(f, n: int = DEFAULT_N, n_max: Optional[int] = None) -> TaylorSeries:
    """Taylor series of ``f``: passed through, or extracted from O_h."""
    if isinstance(f, TaylorSeries):
        return f
    outer = as_outer(f, n)
    return taylor_coefficients(outer, n_max=default_n_max(outer.n) if n_max is None else n_max)


def _truncation_flag(series: TaylorSeries) -> bool:
    scale = float(np.sqrt(np.sum(np.abs(series.coeffs) ** 2))) or 1.0
    if series.truncation_error > TRUNCATION_TOL * scale:
        warnings.warn(
            f"series truncation error {series.truncation_error:.3g} exceeds tolerance",
            RuntimeWarning,
        )
        return True
    return False


# ----------------------------------------------------------- exact routes


def energy_area(f, alpha: float, n: int = DEFAULT_N) -> float:
    """(1/pi) int_D |f'|^2 (1-|z|)^alpha dA by angular trapezoid x radial rule."""
    _check_alpha(alpha)
    series = as_series(f, n)
    _truncation_flag(series)
    d = series.derivative()
    if d.size == 0 or not np.any(d):
        return 0.0
    m = max(8, 1 << int(np.ceil(np.log2(2 * d.size + 2))))
    rule = radial_rule(alpha)
    r = rule.r
    k = np.arange(d.size)
    # |f'(r e^{i theta})|^2 on an m-point circle for every radial node
    a = np.zeros((r.size, m), dtype=complex)
    a[:, : d.size] = d[None, :] * r[:, None] ** k[None, :]
    vals = np.fft.ifft(a, axis=1) * m
    ring = np.mean(np.abs(vals) ** 2, axis=1) * TWO_PI
    if alpha == 0:
        weight = r
    else:
        # (1-r)^alpha r dr = r (1-r)/alpha * alpha (1-r)^(alpha-1) dr
        weight = r * rule.one_minus_r / alpha
    return float(np.sum(rule.weights * weight * ring) / np.pi)


def _beta_weights(nmax: int, alpha: float) -> np.ndarray:
    k = np.arange(1, nmax + 1, dtype=float)
    return np.exp(np.log(2.0) + 2.0 * np.log(k) + betaln(2.0 * k, alpha + 1.0))


def energy_parseval_exact(series: TaylorSeries, alpha: float) -> float:
    """sum_{n>=1} n^2 |f_n|^2 * 2B(2n, alpha+1); reduces to sum n|f_n|^2 at alpha=0."""
    _check_alpha(alpha)
    c = np.abs(series.coeffs[1:]) ** 2
    if c.size == 0:
        return 0.0
    return float(np.sum(c * _beta_weights(c.size, alpha)))


def energy_parseval_equiv(series: TaylorSeries, alpha: float) -> float:
    """sum_{n>=1} |f_n|^2 (1+n)^(1-alpha).  Comparable to D_alpha, not equal."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    c = np.abs(series.coeffs[1:]) ** 2
    k = np.arange(1, c.size + 1, dtype=float)
    return float(np.sum(c * (1.0 + k) ** (1.0 - alpha)))


def norm_squared(series: TaylorSeries, alpha: float) -> float:
    """|f(0)|^2 + D_alpha(f)."""
    return float(abs(series.coeffs[0]) ** 2) + energy_parseval_exact(series, alpha)


def _trace_function(f, n_outer: int, rho: float) -> Callable[[UniformAngularGrid], np.ndarray]:
    if isinstance(f, TaylorSeries):
        return f.boundary
    if isinstance(f, (OuterFunction, BoundaryFunction)):
        outer = as_outer(f, n_outer)
        return lambda grid: outer.trace(grid, rho)
    if callable(f):
        return lambda grid: np.asarray(f(grid.nodes), dtype=complex)
    raise TypeError(f"cannot take a boundary trace of {type(f).__name__}")


def energy_douglas(f, alpha: float, n: int = DEFAULT_N,
                   prefactor: Optional[float] = None, rho: Optional[float] = 1.0) -> float:
    """Douglas double integral of the boundary trace on a staggered grid.

    alpha=0 carries the prefactor 1/(4 pi^2) and equals D(f); alpha>0 has
    no prefactor and is only comparable to D_alpha.  ``f`` is a
    TaylorSeries (exact boundary values), a callable of theta, or an outer
    or boundary function.  For the latter the trace is the spectral
    extension on |z| = rho; rho=None selects the interior trace radius
    1 - 8/n.
    """
    _check_alpha(alpha)
    trace = _trace_function(f, n, rho)
    tg = UniformAngularGrid(n, 0.25)
    ft = trace(tg)
    fp = trace(tg.staggered())
    if not (np.all(np.isfinite(ft)) and np.all(np.isfinite(fp))):
        raise ValueError("boundary trace has non-finite samples")
    if prefactor is None:
        prefactor = 1.0 / (4.0 * np.pi**2) if alpha == 0 else 1.0
    expo = 2.0 - alpha

    def block(idx, theta, phi):
        diff = np.abs(ft[idx, None] - fp[None, :]) ** 2
        return diff / chord(phi, theta) ** expo

    return prefactor * staggered_double_sum(block, n)


# ------------------------------------------------------------ slice routes


def slice_energy_sum(series: TaylorSeries, r) -> float:
    """D(f_r) = sum_{n>=1} n r^(2n) |f_n|^2."""
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r >= 1)):
        raise ValueError("slice radius must lie in [0, 1)")
    c = np.abs(series.coeffs[1:]) ** 2
    k = np.arange(1, c.size + 1)
    out = np.sum(k * c * r[..., None] ** (2 * k), axis=-1)
    return float(out) if out.ndim == 0 else out


def _cr_ring(outer: OuterFunction, r: float, m: int) -> float:
    _, vals, dv = outer.circle(r, m)
    return float(np.mean(np.abs(vals) ** 2 * dv))


def slice_energy_cr(h, r: float, n: int = DEFAULT_N) -> float:
    """(1/2pi) int |O_h(r e^{it})|^2 dv/dtheta(r e^{it}) dt, which equals D((O_h)_r)."""
    outer = as_outer(h, n)
    if not 0.0 <= r < 1.0:
        raise ValueError("slice radius must lie in [0, 1)")
    if 1.0 - r < min_clearance(outer.n):
        raise ClearanceError(
            f"r={r} leaves clearance {1 - r:.3g} below {min_clearance(outer.n):.3g} for n={outer.n}"
        )
    return _cr_ring(outer, r, 2 * outer.n)


def energy_slice_route(f, alpha: float, n: int = DEFAULT_N) -> float:
    """alpha int_0^1 D(f_r) (1-r)^(alpha-1) / r dr."""
    _check_alpha(alpha, lo_open=True)
    series = as_series(f, n)

    def g(r):
        # D(f_r)/r = sum n r^(2n-1) |f_n|^2, regular at r=0
        c = np.abs(series.coeffs[1:]) ** 2
        k = np.arange(1, c.size + 1)
        return np.sum(k * c * r[:, None] ** (2 * k - 1), axis=1)

    return radial_weighted(g, alpha)


@dataclass(frozen=True)
class CrAreaResult:
    value: float
    dropped_nodes: int
    dropped_mass: float


def energy_cr_area(h, alpha: float, n: int = DEFAULT_N,
                   clearance: Optional[float] = None, detail: bool = False,
                   m: Optional[int] = None):
    """(1/2pi) int_D |O_h|^2 dv/dtheta dA_alpha, dA_alpha = alpha(1-r)^(alpha-1) dr dtheta.

    Circles are evaluated spectrally, so by default every radial node is
    used.  With ``clearance`` set, nodes with 1-r below it are dropped and
    the dropped weight is reported (``detail=True``).  ``m`` is the number
    of nodes per circle (default: the outer grid size).
    """
    _check_alpha(alpha, lo_open=True)
    outer = as_outer(h, n)
    rule = radial_rule(alpha)
    keep = np.ones(rule.r.size, dtype=bool)
    if clearance is not None:
        keep = rule.one_minus_r >= clearance
    radii = rule.r[keep]
    m = outer.n if m is None else m
    rings = np.array(ordered_map(lambda r: _cr_ring(outer, float(r), m), radii))
    value = float(np.sum(rule.weights[keep] * rings))
    if not detail:
        return value
    return CrAreaResult(value, int(np.sum(~keep)), float(np.sum(rule.weights[~keep])))


def outer_energy(h, alpha: float, n: int = DEFAULT_N, oversample: int = 2) -> float:
    """D_alpha(O_h) through the Cauchy-Riemann routes.

    For 0 < alpha < 1 this is ``energy_cr_area``; at alpha = 0 it is the
    slice identity on the unit circle itself.  Both are exact for the
    band-limited outer function built on the grid.
    """
    _check_alpha(alpha)
    outer = as_outer(h, n)
    if alpha == 0:
        return _cr_ring(outer, 1.0, oversample * outer.n)
    return energy_cr_area(outer, alpha, m=oversample * outer.n)


def outer_norm_squared(h, alpha: float, n: int = DEFAULT_N) -> float:
    """|O_h(0)|^2 + D_alpha(O_h)."""
    outer = as_outer(h, n)
    return outer.value_at_zero**2 + outer_energy(outer, alpha)


# ------------------------------------------------------------------ report


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


@dataclass
class EnergyReport:
    alpha: float
    routes: dict
    grid: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def ratios(self) -> dict:
        out = {}
        names = [k for k in ROUTES if k in self.routes]
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                va, vb = self.routes[a], self.routes[b]
                out[f"{a}/{b}"] = va / vb if vb not in (0, 0.0) else float("nan")
        return out

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "routes": {k: _num(v) for k, v in self.routes.items()},
            "ratios": {k: _num(v) for k, v in self.ratios.items()},
            "grid": self.grid,
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def energy_report(h, alpha: float, n: int = DEFAULT_N,
                  n_max: Optional[int] = None) -> EnergyReport:
    """All routes for O_h (or a given TaylorSeries) at one alpha."""
    _check_alpha(alpha)
    series = as_series(h, n, n_max)
    flags = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if _truncation_flag(series):
            flags.append("series_truncation")
    routes = {
        "area": energy_area(series, alpha),
        "parseval_exact": energy_parseval_exact(series, alpha),
        "parseval_equiv": energy_parseval_equiv(series, alpha),
        "douglas": energy_douglas(series if isinstance(h, TaylorSeries) else h, alpha, n),
    }
    if alpha > 0:
        routes["slice_route"] = energy_slice_route(series, alpha)
        if not isinstance(h, TaylorSeries):
            routes["cr_area"] = energy_cr_area(h, alpha, n)
    grid = {
        "angular_n": n,
        "radial_nodes": int(radial_rule(alpha).r.size),
        "rho": series.rho,
        "n_max": series.n_max,
        "trace_radius": None if isinstance(h, TaylorSeries) else 1.0,
    }
    for k, v in routes.items():
        if not np.isfinite(v) or v < -1e-12 * max(1.0, abs(routes["parseval_exact"])):
            flags.append(f"{k}_invalid")
    return EnergyReport(alpha, routes, grid, flags)
