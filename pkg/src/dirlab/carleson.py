"""Boundary-only functionals of h: N_alpha, C_alpha, the oscillation averages
a and a~, the radius scale mu_h, n_alpha, n~_alpha, and the two-sided
comparison with ||O_h||^2 in the weighted Dirichlet space.

All double integrals run on a staggered tensor grid: theta_j on the
offset-1/4 grid and phi_j on the offset-3/4 grid, so chords never vanish.
The sublevel set T^-(theta) = {phi : h(phi) <= h(theta)/2} is non-strict.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from .boundary import BoundaryFunction, HBetaParams
from .energy import outer_energy
from .outer import DEFAULT_N, as_outer, min_clearance
from .quadrature import TWO_PI, UniformAngularGrid, chord, ordered_map, staggered_double_sum
from .thresholds import DIVERGENT, classify_convergence, reduced_integrand

COMPARABLE = "comparable"
A_GE_2B = "a>=2b"
A_LE_HALF_B = "a<=b/2"
DELTA_MIN = 1e-6
PER_DECADE = 64
GROWTH = 1.5
VEB6_BOUND = float(np.exp(-41.0))


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")


# ------------------------------------------------------------------ kernel


def logequiv_kernel(a: float, b: float) -> tuple[float, str]:
    """(a^2 - b^2) log(a/b) and the 2-comparability regime of (a, b)."""
    if not (a > 0 and b > 0):
        raise ValueError(f"logequiv_kernel needs a, b > 0, got {a}, {b}")
    value = (a * a - b * b) * np.log(a / b)
    if a >= 2 * b:
        regime = A_GE_2B
    elif 2 * a <= b:
        regime = A_LE_HALF_B
    else:
        regime = COMPARABLE
    return float(value), regime


# ------------------------------------------------------------------ grids


@dataclass(frozen=True)
class _Samples:
    grid: UniformAngularGrid
    h_theta: np.ndarray
    h_phi: np.ndarray
    log_theta: np.ndarray
    log_phi: np.ndarray


def _samples(h: BoundaryFunction, n: int) -> _Samples:
    tg = UniformAngularGrid(n, 0.25)
    pg = tg.staggered()
    ht, hp = h(tg.nodes), h(pg.nodes)
    for name, v in (("theta", ht), ("phi", hp)):
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError(f"{h.name}: h must be finite and non-negative on the {name} grid")
    return _Samples(tg, ht, hp, h.log(tg.nodes), h.log(pg.nodes))


def chord_levels(n: int) -> np.ndarray:
    """Distinct chords between the two staggered grids, increasing.

    phi_{i+d} - theta_i = 2 pi (d + 1/2)/n, so chord level m collects the
    index offsets d = m and d = n-1-m.
    """
    m = np.arange(n // 2)
    return 2.0 * np.sin(np.pi * (m + 0.5) / n)


def _fold_levels(x: np.ndarray) -> np.ndarray:
    """Sum columns d and n-1-d of a rows x n array (columns indexed by offset d)."""
    half = x.shape[1] // 2
    return x[:, :half] + x[:, ::-1][:, :half]


def _sublevel_blocks(s: _Samples, rows: int = 128):
    """Yield (idx, L, mask) with columns ordered by offset d = (j - i) mod n.

    L = log(h(theta_i)/h(phi_j)), mask marks phi_j in T^-(theta_i).
    """
    n = s.grid.n
    d = np.arange(n)
    for start in range(0, n, rows):
        idx = np.arange(start, min(start + rows, n))
        J = (idx[:, None] + d[None, :]) % n
        mask = s.h_phi[J] <= 0.5 * s.h_theta[idx, None]
        with np.errstate(invalid="ignore"):
            L = np.where(mask, s.log_theta[idx, None] - s.log_phi[J], 0.0)
        yield idx, L, mask


# ------------------------------------------------------------- finiteness


class Functional(NamedTuple):
    """Grid value plus finiteness verdict; ``value`` is inf when flagged."""

    value: float
    grid_value: float
    finite: bool
    source: str


def hbeta_finite(quantity: str, prm: HBetaParams, alpha: float) -> tuple[bool, str]:
    """Finiteness of a functional of h_beta from its reduced 1D tail.

    When alpha equals the family exponent the log-variable classifier
    decides; otherwise the power of theta dominates and alpha > prm.alpha
    is finite.
    """
    if np.isclose(alpha, prm.alpha, rtol=0, atol=1e-12):
        v = classify_convergence(reduced_integrand(quantity, prm.alpha, prm.beta))
        return v.verdict != DIVERGENT, f"classifier:{quantity}:{v.verdict}"
    return alpha > prm.alpha, f"power:{quantity}"


def refinement_diverges(fn, n: int, growth: float = GROWTH) -> bool:
    """True when doubling the grid twice scales the value by >= growth each time."""
    v = [fn(n), fn(2 * n), fn(4 * n)]
    if not v[0] > 0:
        return False
    return v[1] >= growth * v[0] and v[2] >= growth * v[1]


def _finalize(h: BoundaryFunction, quantity: str, alpha: float, fn, n: int,
              refine: bool) -> Functional:
    val = fn(n)
    if not np.isfinite(val):
        return Functional(float("inf"), val, False, "grid")
    prm = h.hbeta
    if prm is not None and quantity is not None:
        finite, src = hbeta_finite(quantity, prm, alpha)
    elif refine:
        finite, src = not refinement_diverges(fn, n), "refinement"
    else:
        finite, src = True, "grid"
    return Functional(val if finite else float("inf"), val, finite, src)


# ------------------------------------------------------- double integrals


def _n_grid(h: BoundaryFunction, alpha: float, n: int) -> float:
    s = _samples(h, n)
    expo = 2.0 - alpha

    def block(idx, theta, phi):
        return (s.h_phi[None, :] - s.h_theta[idx, None]) ** 2 / chord(phi, theta) ** expo

    return staggered_double_sum(block, n)


def _c_grid(h: BoundaryFunction, alpha: float, n: int) -> float:
    s = _samples(h, n)
    expo = 2.0 - alpha

    def block(idx, theta, phi):
        num = (s.h_phi[None, :] ** 2 - s.h_theta[idx, None] ** 2) * (
            s.log_phi[None, :] - s.log_theta[idx, None]
        )
        return num / chord(phi, theta) ** expo

    return staggered_double_sum(block, n)


def big_n_alpha(h: BoundaryFunction, alpha: float, n: int = DEFAULT_N,
                refine: bool = False, detail: bool = False):
    """N_alpha = double integral of |h(phi)-h(theta)|^2 / chord^(2-alpha), no prefactor."""
    _check_alpha(alpha)
    res = _finalize(h, "N", alpha, lambda m: _n_grid(h, alpha, m), n, refine)
    return res if detail else res.value


def c_alpha(h: BoundaryFunction, alpha: float, n: int = DEFAULT_N,
            refine: bool = False, detail: bool = False):
    """C_alpha = double integral of (h^2(phi)-h^2(theta)) log(h(phi)/h(theta)) / chord^(2-alpha)."""
    _check_alpha(alpha)
    res = _finalize(h, "C", alpha, lambda m: _c_grid(h, alpha, m), n, refine)
    return res if detail else res.value


class IdentityCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def carleson_identity_check(h: BoundaryFunction, n: int = DEFAULT_N) -> IdentityCheck:
    """D(O_h) against C_0(h)/(4 pi^2); gap is the relative difference."""
    lhs = outer_energy(h, 0.0, n)
    rhs = c_alpha(h, 0.0, n) / (4.0 * np.pi**2)
    if not (np.isfinite(lhs) and np.isfinite(rhs)):
        raise ValueError("Carleson identity: a side is infinite")
    scale = max(abs(lhs), abs(rhs))
    gap = 0.0 if scale == 0 else abs(lhs - rhs) / scale
    return IdentityCheck(lhs, rhs, gap)


# ------------------------------------------------- oscillation averages


@dataclass(frozen=True)
class LambdaFunction:
    values: np.ndarray = field(repr=False)
    grid: UniformAngularGrid
    provenance: str = "user"

    def __post_init__(self):
        if self.values.shape != (self.grid.n,):
            raise ValueError("lambda values must match the grid")
        if not np.all(self.values > 0):
            raise ValueError("lambda must be strictly positive at every node")


def as_lambda(lam, grid: UniformAngularGrid) -> LambdaFunction:
    if isinstance(lam, LambdaFunction):
        if lam.grid.n != grid.n:
            raise ValueError("lambda grid does not match")
        return lam
    if isinstance(lam, MuProfile):
        return lam.as_lambda()
    arr = np.asarray(lam, dtype=float)
    if arr.ndim == 0:
        return LambdaFunction(np.full(grid.n, float(arr)), grid, "constant")
    return LambdaFunction(arr, grid, "user")


@dataclass(frozen=True)
class OscillationAverages:
    theta: float
    a: float
    a_tilde: float
    lam: float


def oscillation_averages(h: BoundaryFunction, lam: float, theta: float,
                         n: int = 4096) -> OscillationAverages:
    """a = (1/2pi) int_{T^-, chord >= lam} log(h(theta)/h(phi))/chord^2 dphi and
    a~ = (1/2pi) int_{T^-, chord <= lam} log(h(theta)/h(phi)) dphi, by the
    trapezoid rule on an n-node phi grid."""
    ht = float(h(theta))
    if not ht > 0:
        raise ValueError("h(theta) must be positive")
    pg = UniformAngularGrid(n, 0.75)
    phi = pg.nodes
    hp = h(phi)
    mask = hp <= 0.5 * ht
    if not np.any(mask):
        return OscillationAverages(float(theta), 0.0, 0.0, float(lam))
    L = float(h.log(theta)) - h.log(phi[mask])
    c = chord(phi[mask], theta)
    far = c >= lam
    near = c <= lam
    a = float(np.sum(L[far] / c[far] ** 2)) / n
    at = float(np.sum(L[near])) / n
    return OscillationAverages(float(theta), a, at, float(lam))


def delta_grid(delta_min: float = DELTA_MIN, per_decade: int = PER_DECADE) -> np.ndarray:
    decades = -np.log10(delta_min)
    count = int(round(decades * per_decade))
    return np.logspace(np.log10(delta_min), 0.0, count + 1)


@dataclass(frozen=True)
class MuProfile:
    grid: UniformAngularGrid
    mu: np.ndarray = field(repr=False)
    floor: np.ndarray = field(repr=False)
    delta_min: float = DELTA_MIN

    @property
    def theta(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def z_points(self) -> np.ndarray:
        """z_h(theta) = (1 - mu_h(theta)) e^{i theta}."""
        return (1.0 - self.mu) * np.exp(1j * self.theta)

    @property
    def floor_count(self) -> int:
        return int(np.sum(self.floor))

    def as_lambda(self) -> LambdaFunction:
        return LambdaFunction(self.mu, self.grid, "mu_h")

    def permuted(self, shift: int) -> "MuProfile":
        return MuProfile(self.grid, np.roll(self.mu, shift), np.roll(self.floor, shift),
                         self.delta_min)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "mu", "floor_flag"])
        for t, m, f in zip(self.theta, self.mu, self.floor):
            w.writerow([f"{t:.17g}", f"{m:.17g}", int(f)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n": self.grid.n,
            "delta_min": self.delta_min,
            "floor_count": self.floor_count,
            "mu_min": float(np.min(self.mu)),
            "mu_max": float(np.max(self.mu)),
        }


def _cumulative_levels(L, mask, chords_d):
    """Per row: suffix sums of L/chord^2 and prefix sums of L over chord levels."""
    far = _fold_levels(L / chords_d[None, :] ** 2)
    near = _fold_levels(L)
    suffix = np.cumsum(far[:, ::-1], axis=1)[:, ::-1]
    prefix = np.cumsum(near, axis=1)
    return suffix, prefix


def _chords_by_offset(n: int) -> np.ndarray:
    d = np.arange(n)
    return 2.0 * np.sin(np.pi * (d + 0.5) / n)


def mu_profile(h: BoundaryFunction, n: int = DEFAULT_N, delta_min: float = DELTA_MIN,
               per_decade: int = PER_DECADE) -> MuProfile:
    """mu_h(theta_j): largest tested delta with delta*a_delta <= 2 and a~_delta/delta <= 2
    for every tested delta up to it; floored at delta_min with a flag."""
    s = _samples(h, n)
    if np.any(s.h_theta <= 0):
        raise ValueError("mu_h needs h > 0 at every grid node")
    deltas = delta_grid(delta_min, per_decade)
    levels = chord_levels(n)
    chords_d = _chords_by_offset(n)
    lo = np.searchsorted(levels, deltas, side="left")   # first level with chord >= delta
    hi = np.searchsorted(levels, deltas, side="right")  # count of levels with chord <= delta
    blocks = list(_sublevel_blocks(s))

    def one(block):
        idx, L, mask = block
        suffix, prefix = _cumulative_levels(L, mask, chords_d)
        zero = np.zeros((idx.size, 1))
        suffix = np.concatenate([suffix, zero], axis=1)
        prefix = np.concatenate([zero, prefix], axis=1)
        a = suffix[:, lo] / n
        at = prefix[:, hi] / n
        ok = (deltas[None, :] * a <= 2.0) & (at / deltas[None, :] <= 2.0)
        bad = ~ok
        first = np.where(np.any(bad, axis=1), np.argmax(bad, axis=1), deltas.size)
        mu = np.where(first == deltas.size, 1.0, deltas[np.maximum(first - 1, 0)])
        return mu, first == 0

    parts = ordered_map(one, blocks)
    mu = np.concatenate([p[0] for p in parts])
    floor = np.concatenate([p[1] for p in parts])
    mu = np.where(floor, delta_min, mu)
    return MuProfile(s.grid, mu, floor, delta_min)


def averages_on_grid(h: BoundaryFunction, lam, n: int = DEFAULT_N):
    """(a, a~) at every theta node for the per-node lambda."""
    s = _samples(h, n)
    lam = as_lambda(lam, s.grid).values
    levels = chord_levels(n)
    chords_d = _chords_by_offset(n)
    a = np.empty(n)
    at = np.empty(n)
    for idx, L, mask in _sublevel_blocks(s):
        suffix, prefix = _cumulative_levels(L, mask, chords_d)
        zero = np.zeros((idx.size, 1))
        suffix = np.concatenate([suffix, zero], axis=1)
        prefix = np.concatenate([zero, prefix], axis=1)
        rows = np.arange(idx.size)
        lo = np.searchsorted(levels, lam[idx], side="left")
        hi = np.searchsorted(levels, lam[idx], side="right")
        a[idx] = suffix[rows, lo] / n
        at[idx] = prefix[rows, hi] / n
    return a, at


def _n_alphas_grid(h: BoundaryFunction, lam, alpha: float, n: int) -> tuple[float, float]:
    s = _samples(h, n)
    lam = as_lambda(lam, s.grid).values
    chords_d = _chords_by_offset(n)
    sp = s.grid.spacing
    n_sum = 0.0
    nt_sum = 0.0
    parts = []
    for idx, L, mask in _sublevel_blocks(s):
        c = chords_d[None, :]
        far = c >= lam[idx, None]
        near = c <= lam[idx, None]
        inner_far = np.sum(np.where(far, L / c**2, 0.0), axis=1) * sp      # 2 pi a
        inner_near = np.sum(np.where(near, L / c ** (2.0 - alpha), 0.0), axis=1) * sp
        h2 = s.h_theta[idx] ** 2
        parts.append((np.sum(h2 * inner_far ** (1.0 - alpha)), np.sum(h2 * inner_near)))
    for a_part, b_part in parts:
        n_sum += a_part
        nt_sum += b_part
    return float(n_sum * sp), float(nt_sum * sp)


def n_alphas(h: BoundaryFunction, lam, alpha: float, n: int = DEFAULT_N,
             refine: bool = False, detail: bool = False):
    """(n_alpha, n~_alpha) for the per-node lambda.

    n_alpha = int h^2(theta) (int_{T^-, chord >= lam} log(h(theta)/h(phi))/chord^2 dphi)^(1-alpha) dtheta,
    i.e. int h^2 (2 pi a)^(1-alpha): the inner integral carries no 1/(2pi).
    n~_alpha = int h^2(theta) int_{T^-, chord <= lam} log(h(theta)/h(phi))/chord^(2-alpha) dphi dtheta.
    """
    _check_alpha(alpha)
    if isinstance(lam, MuProfile) and lam.grid.n != n:
        n = lam.grid.n
    cache = {}

    def grid_vals(m):
        if m not in cache:
            lm = lam
            if m != n and not np.isscalar(lam):
                # refine against mu recomputed on the finer grid
                lm = mu_profile(h, m) if isinstance(lam, MuProfile) else np.repeat(
                    as_lambda(lam, UniformAngularGrid(n, 0.25)).values, m // n)
            cache[m] = _n_alphas_grid(h, lm, alpha, m)
        return cache[m]

    na = _finalize(h, "D", alpha, lambda m: grid_vals(m)[0], n, refine)
    nt = _finalize(h, None, alpha, lambda m: grid_vals(m)[1], n, refine)
    if detail:
        return na, nt
    return na.value, nt.value


# --------------------------------------------------------- decomposition


def norm_h_squared(h: BoundaryFunction, n: int = DEFAULT_N) -> float:
    """||h||_2^2 = int |h|^2 dtheta by the trapezoid rule on the theta grid."""
    s = _samples(h, n)
    return float(np.sum(s.h_theta**2) * s.grid.spacing)


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


@dataclass
class CarlesonDecomposition:
    alpha: float
    norm_h2: float
    N_alpha: float
    n_alpha: float
    n_tilde_alpha: float
    lhs: float
    lambda_provenance: str
    n: int
    finite: dict = field(default_factory=dict)
    grid_values: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)
    mu_floor_count: int = 0
    flags: list = field(default_factory=list)

    @property
    def rhs(self) -> float:
        return self.norm_h2 + self.N_alpha + self.n_alpha + self.n_tilde_alpha

    @property
    def rhs_finite(self) -> bool:
        return all(self.finite.get(k, True) for k in ("N_alpha", "n_alpha", "n_tilde_alpha"))

    @property
    def lhs_finite(self) -> bool:
        return self.finite.get("lhs", True)

    @property
    def ratio(self) -> float:
        if not (self.rhs_finite and self.lhs_finite):
            return float("nan")
        return self.rhs / self.lhs

    @property
    def ratio_grid(self) -> float:
        """rhs/lhs from the raw grid values, reported even when flagged."""
        g = self.grid_values
        rhs = g["norm_h2"] + g["N_alpha"] + g["n_alpha"] + g["n_tilde_alpha"]
        return rhs / g["lhs"]

    @property
    def ratio_without_norm(self) -> float:
        """(N + n + n~)/D_alpha(O_h) on the grid, an empirical quantity only."""
        g = self.grid_values
        d = g["lhs"] - g["O_h(0)^2"]
        osc = g["N_alpha"] + g["n_alpha"] + g["n_tilde_alpha"]
        return osc / d if d > 0 else float("nan")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n": self.n,
            "lambda": self.lambda_provenance,
            "norm_h2": _num(self.norm_h2),
            "N_alpha": _num(self.N_alpha),
            "n_alpha": _num(self.n_alpha),
            "n_tilde_alpha": _num(self.n_tilde_alpha),
            "rhs": _num(self.rhs),
            "lhs": _num(self.lhs),
            "ratio": _num(self.ratio),
            "ratio_grid": _num(self.ratio_grid),
            "ratio_without_norm": _num(self.ratio_without_norm),
            "finite": {"lhs": self.lhs_finite, "rhs": self.rhs_finite, **self.finite},
            "grid_values": {k: _num(v) for k, v in self.grid_values.items()},
            "sources": dict(self.sources),
            "mu_floor_count": self.mu_floor_count,
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def theorem_decomposition(h: BoundaryFunction, alpha: float, lam=None,
                          n: int = DEFAULT_N, refine: bool = False,
                          mu: Optional[MuProfile] = None) -> CarlesonDecomposition:
    """||h||^2 + N_alpha + n_alpha + n~_alpha against ||O_h||^2 = |O_h(0)|^2 + D_alpha(O_h).

    lambda defaults to mu_h; a user lambda evaluates the same form at it
    (the infimum over all admissible lambda is not computed).
    """
    _check_alpha(alpha)
    floor_count = 0
    if lam is None:
        mu = mu_profile(h, n) if mu is None else mu
        lam = mu
        floor_count = mu.floor_count
        provenance = "mu_h"
    else:
        provenance = as_lambda(lam, UniformAngularGrid(n, 0.25)).provenance
    norm = norm_h_squared(h, n)
    N = big_n_alpha(h, alpha, n, refine=refine, detail=True)
    na, nt = n_alphas(h, lam, alpha, n, refine=refine, detail=True)
    outer = as_outer(h, n)
    o0 = outer.value_at_zero**2
    d_grid = outer_energy(outer, alpha)
    lhs = _finalize(h, "D", alpha, lambda m: d_grid if m == n else outer_energy(h, alpha, m),
                    n, refine)
    flags = []
    if floor_count:
        flags.append("mu_floor")
    for name, f in (("N_alpha", N), ("n_alpha", na), ("n_tilde_alpha", nt), ("lhs", lhs)):
        if not f.finite:
            flags.append(f"{name}_infinite")
    return CarlesonDecomposition(
        alpha=float(alpha),
        norm_h2=norm,
        N_alpha=N.value,
        n_alpha=na.value,
        n_tilde_alpha=nt.value,
        lhs=o0 + lhs.value,
        lambda_provenance=provenance,
        n=n,
        finite={"N_alpha": N.finite, "n_alpha": na.finite, "n_tilde_alpha": nt.finite,
                "lhs": lhs.finite},
        grid_values={"norm_h2": norm, "N_alpha": N.grid_value, "n_alpha": na.grid_value,
                     "n_tilde_alpha": nt.grid_value, "lhs": o0 + lhs.grid_value,
                     "O_h(0)^2": o0},
        sources={"N_alpha": N.source, "n_alpha": na.source, "n_tilde_alpha": nt.source,
                 "lhs": lhs.source},
        mu_floor_count=floor_count,
        flags=flags,
    )


# ---------------------------------------------------------- pointwise bounds


class LowerBound(NamedTuple):
    min_ratio: float
    theta: float
    r: float
    skipped_nodes: int


def check_lower_bound_outer(h: BoundaryFunction, mu: MuProfile,
                            n_radii: int = 48) -> LowerBound:
    """min over nodes and radii 1 - mu(theta) <= r <= 1 - clearance of |O_h(r e^{i theta})|/h(theta).

    Nodes whose mu lies below the clearance have no admissible radius and
    are counted in ``skipped_nodes``.
    """
    n = mu.grid.n
    outer = as_outer(h, n)
    clear = min_clearance(n)
    gaps = np.geomspace(1.0, clear, n_radii)
    gaps = np.unique(np.concatenate([gaps, mu.mu[mu.mu >= clear]]))
    ht = h(mu.theta)
    best = (np.inf, np.nan, np.nan)
    covered = np.zeros(n, dtype=bool)
    for gap in gaps:
        r = 1.0 - gap
        use = mu.mu >= gap - 1e-15
        if not np.any(use):
            continue
        covered |= use
        vals = np.abs(outer.values_on(mu.grid, r))[use] / ht[use]
        j = int(np.argmin(vals))
        if vals[j] < best[0]:
            best = (float(vals[j]), float(mu.theta[use][j]), float(r))
    return LowerBound(best[0], best[1], best[2], int(np.sum(~covered)))


def check_dauglas_bound(h: BoundaryFunction, alpha: float, mu: MuProfile) -> float:
    """int h^2 mu^(alpha-1) dtheta / (D_alpha(O_h) + ||h||^2)."""
    _check_alpha(alpha)
    n = mu.grid.n
    ht = h(mu.theta)
    num = float(np.sum(ht**2 * mu.mu ** (alpha - 1.0)) * mu.grid.spacing)
    den = outer_energy(h, alpha, n) + norm_h_squared(h, n)
    return num / den


def hbeta_theta_a_lower(prm: HBetaParams, theta) -> np.ndarray:
    """Closed-form lower bound of theta * a_{h,theta}(theta) for h_beta, 0 < theta < pi.

    Only the part of (-pi, 0) with chord >= theta is kept; there h = c0 <=
    h(theta)/2.  With u = (theta - phi)/2 the chord is 2 sin u and
    int chord^-2 dphi = (cot u_lo - cot u_hi)/2.
    """
    theta = np.asarray(theta, dtype=float)
    log_ratio = prm.log_h_positive(theta) - np.log(prm.c0)
    u_lo = np.arcsin(0.5 * theta)
    u_hi = np.minimum(0.5 * (theta + np.pi), np.pi - u_lo)
    arc = 0.5 * (1.0 / np.tan(u_lo) - 1.0 / np.tan(u_hi))
    return theta / TWO_PI * log_ratio * arc


def hbeta_mu_scale(prm: HBetaParams) -> float:
    """Largest theta0 below which the lower bound exceeds 2, so mu_h(theta) <= theta there.

    Found by bisection in log(theta); typically far below any grid spacing.
    """
    from scipy.optimize import brentq

    def f(x):
        return float(hbeta_theta_a_lower(prm, np.exp(x))) - 2.0

    hi = np.log(np.pi / 4)
    if f(hi) > 0:
        return float(np.pi / 4)
    lo = hi
    while f(lo) <= 0:
        lo *= 2.0
        if lo < -1e6:
            raise ValueError("lower bound never exceeds 2 in representable range")
    return float(np.exp(brentq(f, lo, hi, xtol=1e-12)))
