"""Shared numerical kernels: circle grids, periodic trapezoid, adaptive
Gauss-Kronrod integration, the radial rule for the weight
alpha*(1-r)**(alpha-1), and discrete Fourier analysis on the circle.
"""
from __future__ import annotations

import heapq
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class UniformAngularGrid:
    """n equispaced nodes theta_j = -pi + 2*pi*(j + offset)/n.

    ``offset`` is a fraction of the spacing in [0, 1); offset=0 gives the
    canonical nodes, offset=0.5 the staggered partner grid.
    """

    n: int
    offset: float = 0.0

    def __post_init__(self):
        if not is_power_of_two(self.n) or self.n < 8:
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not 0.0 <= self.offset < 1.0:
            raise ValueError(f"offset must lie in [0, 1), got {self.offset}")

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @property
    def start(self) -> float:
        return -np.pi + self.offset * self.spacing

    @property
    def nodes(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.n)

    def staggered(self) -> "UniformAngularGrid":
        return UniformAngularGrid(self.n, (self.offset + 0.5) % 1.0)


def _check_finite(values: np.ndarray, nodes: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise ValueError(
            f"non-finite sample {values[j]!r} at node {j} (theta={nodes[j]:.17g})"
        )


def periodic_trapezoid(f, grid: UniformAngularGrid) -> float:
    """(2pi/n) * sum_j f(theta_j).  ``f`` may be a callable or a sample array."""
    nodes = grid.nodes
    values = np.asarray(f(nodes) if callable(f) else f)
    if values.shape[-1] != grid.n:
        raise ValueError("sample count does not match grid")
    _check_finite(values, nodes)
    return float(np.sum(values) * grid.spacing)


# ---------------------------------------------------------------- adaptive 1D

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_X15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_W15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are xgk[1], xgk[3], xgk[5], xgk[7] and their mirrors.
_W7 = np.zeros(15)
_W7[[1, 3, 5]] = _WG[:3]
_W7[[13, 11, 9]] = _WG[:3]
_W7[7] = _WG[3]


class QuadResult(NamedTuple):
    value: float
    error: float
    converged: bool
    panels: int


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    y = np.asarray(f(c + h * _X15), dtype=float)
    k = h * float(np.dot(_W15, y))
    g = h * float(np.dot(_W7, y))
    return k, abs(k - g)


def adaptive_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    abs_floor: float = 1e-14,
    max_panels: int = 2**15,
    breakpoints: Sequence[float] = (),
) -> QuadResult:
    """Globally adaptive Gauss-Kronrod 7/15 with interval bisection.

    ``f`` must accept an array of abscissae.  Endpoints are never
    evaluated, so integrable endpoint singularities are allowed.  When the
    panel cap is hit the result comes back with ``converged=False``.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    cuts = [a] + sorted(x for x in breakpoints if a < x < b) + [b]
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = _gk15(f, lo, hi)
        heapq.heappush(heap, (-e, lo, hi, v))
        total += v
        err += e
    while True:
        if not np.isfinite(total):
            return QuadResult(total, np.inf, False, len(heap))
        if err <= max(tol * abs(total), abs_floor):
            break
        if len(heap) >= max_panels:
            return QuadResult(total, err, False, len(heap))
        neg_e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            heapq.heappush(heap, (neg_e, lo, hi, v))
            return QuadResult(total, err, False, len(heap))
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        total += v1 + v2 - v
        err += e1 + e2 + neg_e
    # Final value re-summed in panel order so it does not carry the
    # rounding history of the incremental updates.
    panels = sorted((p[1], p[3], -p[0]) for p in heap)
    total = float(np.sum(np.array([p[1] for p in panels])))
    err = float(np.sum(np.array([p[2] for p in panels])))
    return QuadResult(total, err, True, len(panels))


# ------------------------------------------------------------- radial rule

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class RadialRule:
    """Nodes r_k and weights w_k with sum_k w_k g(r_k) ~ int_0^1 g(r) alpha(1-r)^(alpha-1) dr.

    The rule lives in t = (1-r)**alpha, where the weight becomes dt.
    Composite Gauss-Legendre panels are graded geometrically toward t=0
    (that is, r=1).  alpha=0 is accepted and means plain dr on [0, 1].
    """

    alpha: float
    t: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def r(self) -> np.ndarray:
        p = 1.0 if self.alpha == 0 else 1.0 / self.alpha
        return 1.0 - self.t**p

    @property
    def one_minus_r(self) -> np.ndarray:
        p = 1.0 if self.alpha == 0 else 1.0 / self.alpha
        return self.t**p


def radial_rule(alpha: float, levels: int = 24, order: int = 20) -> RadialRule:
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if order == 20:
        x, w = _GL_X, _GL_W
    else:
        x, w = np.polynomial.legendre.leggauss(order)
    edges = np.concatenate([[0.0], 4.0 ** -np.arange(levels, -1, -1)])
    ts, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        ts.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
        ws.append(0.5 * (hi - lo) * w)
    t = np.concatenate(ts)
    weights = np.concatenate(ws)
    order_idx = np.argsort(t)
    return RadialRule(alpha, t[order_idx], weights[order_idx])


def radial_weighted(g: Callable[[np.ndarray], np.ndarray], alpha: float) -> float:
    """int_0^1 g(r) * alpha * (1-r)**(alpha-1) dr for 0 < alpha < 1."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(
            f"radial_weighted needs 0 < alpha < 1 (got {alpha}); use adaptive_1d for alpha=0"
        )
    rule = radial_rule(alpha)
    values = np.asarray(g(rule.r), dtype=float)
    return float(np.sum(rule.weights * values))


# ----------------------------------------------------------------- Fourier


@dataclass(frozen=True)
class FourierCoefficients:
    """c_k = (1/n) sum_j s_j exp(-i k theta_j), stored in FFT order."""

    grid: UniformAngularGrid
    values: np.ndarray = field(repr=False)

    def __getitem__(self, k: int) -> complex:
        n = self.grid.n
        if abs(k) > n // 2:
            raise IndexError(f"|k| must be <= {n // 2}")
        return complex(self.values[k % n])

    def frequencies(self) -> np.ndarray:
        return np.fft.fftfreq(self.grid.n, d=1.0 / self.grid.n).astype(int)

    def evaluate(self, theta) -> np.ndarray:
        """Trigonometric interpolant: |k| < n/2 terms plus the Nyquist mode as a cosine."""
        theta = np.asarray(theta, dtype=float)
        n = self.grid.n
        k = self.frequencies()
        low = np.abs(k) < n // 2
        out = np.exp(1j * np.multiply.outer(theta, k[low])) @ self.values[low]
        m = n // 2
        c_nyq = self.values[m]
        out = out + c_nyq * np.exp(1j * m * self.grid.start) * np.cos(m * (theta - self.grid.start))
        return out


def fourier_coefficients(samples, grid: UniformAngularGrid) -> FourierCoefficients:
    samples = np.asarray(samples)
    if samples.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {samples.shape}")
    _check_finite(samples, grid.nodes)
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    c = np.fft.fft(samples) / grid.n * np.exp(-1j * k * grid.start)
    return FourierCoefficients(grid, c)


# ------------------------------------------------------ geometry helpers


def chord(phi, theta):
    """|e^{i phi} - e^{i theta}| computed as 2|sin((phi - theta)/2)|."""
    return 2.0 * np.abs(np.sin(0.5 * (np.asarray(phi) - np.asarray(theta))))


def thread_count() -> int:
    raw = os.environ.get("DIRLAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, min(n, 32))


def ordered_map(fn, items):
    """Map ``fn`` over ``items`` with up to DIRLAB_THREADS workers, results in input order."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def staggered_double_sum(block_fn, n: int, theta_offset: float = 0.25, rows: int = 128) -> float:
    """Tensor trapezoid over (theta, phi) with phi offset by half a spacing.

    ``block_fn(theta_idx, theta, phi)`` returns the integrand on a
    rows x n block; blocks are reduced row-chunk by row-chunk in index order.
    """
    tg = UniformAngularGrid(n, theta_offset)
    pg = tg.staggered()
    theta = tg.nodes
    phi = pg.nodes
    starts = range(0, n, rows)

    def one(s):
        idx = np.arange(s, min(s + rows, n))
        return float(np.sum(block_fn(idx, theta[idx, None], phi[None, :])))

    parts = ordered_map(one, starts)
    return float(np.sum(np.array(parts))) * tg.spacing**2
