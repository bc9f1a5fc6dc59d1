"""Outer function O_h = exp(u_h + i v_h) built from samples of log h.

Two evaluation paths are kept deliberately separate:

* point evaluation (``poisson_log``, ``conjugate_log``, ``dv_dtheta``,
  ``outer_eval``) sums the closed-form Poisson, conjugate-Poisson and Q
  kernels against the node values of log h, subject to a clearance rule;
* circle evaluation (``OuterFunction.circle``) works with the analytic
  polynomial g(z) = c_0 + 2 sum_{0<k<n/2} c_k z^k, the band-limited harmonic
  extension of the trigonometric interpolant of log h.  It is defined on the
  whole closed disk and is what energies and Taylor extraction use.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .boundary import FAIL, BoundaryFunction
from .quadrature import TWO_PI, UniformAngularGrid, fourier_coefficients

DEFAULT_N = 1024


class ClearanceError(ValueError):
    """Interior point too close to the circle for the angular grid."""


def min_clearance(n: int) -> float:
    return 4.0 * TWO_PI / n


def trace_radius(n: int) -> float:
    return 1.0 - 8.0 / n


def _fold(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Fold coefficient k into slot k mod m (evaluation on an m-point circle)."""
    if coeffs.size <= m:
        out = np.zeros(m, dtype=complex)
        out[: coeffs.size] = coeffs
        return out
    pad = (-coeffs.size) % m
    return np.concatenate([coeffs, np.zeros(pad, dtype=complex)]).reshape(-1, m).sum(axis=0)


class OuterFunction:
    """Handle for O_h with normalization v_h(0) = 0."""

    def __init__(self, h: BoundaryFunction, n: int = DEFAULT_N):
        if h.log_integrable == FAIL:
            raise ValueError(f"{h.name}: log h is not integrable, no outer function")
        if h.kind == "sampled" and h.grid is not None and h.grid.n == n:
            grid = h.grid
        else:
            grid = UniformAngularGrid(n, 0.25)
        logs = h.log(grid.nodes)
        if not np.all(np.isfinite(logs)):
            j = int(np.argmax(~np.isfinite(logs)))
            raise ValueError(f"{h.name}: log h not finite at node {j} (theta={grid.nodes[j]!r})")
        self.h = h
        self.grid = grid
        self.n = n
        self.log_samples = logs
        c = fourier_coefficients(logs, grid).values
        b = np.empty(n // 2, dtype=complex)
        b[0] = c[0].real
        b[1:] = 2.0 * c[1 : n // 2]
        self.g_coeffs = b

    # ---------------------------------------------------- point evaluation

    def _check(self, z: np.ndarray) -> None:
        clear = 1.0 - np.abs(z)
        need = min_clearance(self.n)
        # slack so a point placed exactly at the clearance is not lost to rounding
        if np.any(clear < need * (1.0 - 1e-12)):
            worst = float(np.min(clear))
            if worst <= 0:
                raise ClearanceError(f"point outside the open disk (1-|z|={worst:.3g})")
            req = 1 << int(np.ceil(np.log2(4.0 * TWO_PI / worst) - 1e-9))
            raise ClearanceError(
                f"1-|z|={worst:.3g} below clearance {need:.3g} for n={self.n}; "
                f"need a grid of at least {req} nodes"
            )

    def _kernel_sum(self, z, kernel, rows: int = 256) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        self._check(z)
        phi = self.grid.nodes
        e = np.exp(1j * phi)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=float)
        for s in range(0, flat.size, rows):
            zz = flat[s : s + rows, None]
            out[s : s + rows] = np.mean(kernel(zz, e, phi, slice(s, s + rows)), axis=1)
        return out.reshape(z.shape)

    def poisson_log(self, z) -> np.ndarray:
        L = self.log_samples

        def k(zz, e, phi, sl):
            return (1.0 - np.abs(zz) ** 2) / np.abs(e - zz) ** 2 * L

        return self._kernel_sum(z, k)

    def conjugate_log(self, z) -> np.ndarray:
        L = self.log_samples

        def k(zz, e, phi, sl):
            return 2.0 * np.imag(zz * np.conj(e)) / np.abs(e - zz) ** 2 * L

        return self._kernel_sum(z, k)

    def dv_dtheta(self, z) -> np.ndarray:
        """(1/2pi) int Q(e^{i phi}, z) log(h(phi)/h(theta)) dphi, theta = arg z."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        L = self.log_samples
        base = self.h.log(np.angle(z))
        if not np.all(np.isfinite(base)):
            raise ValueError("h must be positive and finite at the base angle of z")
        base_flat = base.ravel()

        def k(zz, e, phi, sl):
            return q_kernel(phi, zz) * (L - base_flat[sl, None])

        return self._kernel_sum(z, k)

    def __call__(self, z) -> np.ndarray:
        return np.exp(self.poisson_log(z) + 1j * self.conjugate_log(z))

    # --------------------------------------------------- circle evaluation

    def g(self, z) -> np.ndarray:
        """Spectral log O_h at arbitrary |z| <= 1."""
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.g_coeffs)

    def circle(self, r: float, m: Optional[int] = None, offset: float = 0.25):
        """Values on the circle of radius r at m equispaced angles.

        Returns (theta, O, dv/dtheta) with dv/dtheta = Re(z g'(z)).
        """
        m = self.n if m is None else m
        grid = UniformAngularGrid(m, offset)
        k = np.arange(self.g_coeffs.size)
        a = self.g_coeffs * r**k * np.exp(1j * k * grid.start)
        gv = np.fft.ifft(_fold(a, m)) * m
        dv = np.real(np.fft.ifft(_fold(k * a, m)) * m)
        return grid.nodes, np.exp(gv), dv

    def values_on(self, grid: UniformAngularGrid, r: float) -> np.ndarray:
        return self.circle(r, grid.n, grid.offset)[1]

    def trace(self, grid: UniformAngularGrid, rho: Optional[float] = None) -> np.ndarray:
        """Boundary trace, taken at rho = 1 - 8/n unless given."""
        return self.values_on(grid, trace_radius(self.n) if rho is None else rho)

    @property
    def value_at_zero(self) -> float:
        return float(np.exp(self.g_coeffs[0].real))


@lru_cache(maxsize=64)
def _cached_outer(h: BoundaryFunction, n: int) -> OuterFunction:
    return OuterFunction(h, n)


def as_outer(h: Union[BoundaryFunction, OuterFunction], n: int = DEFAULT_N) -> OuterFunction:
    if isinstance(h, OuterFunction):
        return h
    return _cached_outer(h, n)


def q_kernel(phi, z):
    """Q(e^{i phi}, z) = d/dtheta Im((e^{i phi}+z)/(e^{i phi}-z)), z = r e^{i theta}."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    theta = np.angle(z)
    ch2 = (2.0 * np.sin(0.5 * (np.asarray(phi) - theta))) ** 2
    d2 = np.abs(np.exp(1j * np.asarray(phi)) - z) ** 2
    return r * (2.0 * (1.0 - r) ** 2 - ch2 * (1.0 + r**2)) / d2**2


def poisson_log(h, z, n: int = DEFAULT_N):
    return as_outer(h, n).poisson_log(z)


def conjugate_log(h, z, n: int = DEFAULT_N):
    return as_outer(h, n).conjugate_log(z)


def outer_eval(h, z, n: int = DEFAULT_N):
    return as_outer(h, n)(z)


def dv_dtheta(h, z, n: int = DEFAULT_N):
    return as_outer(h, n).dv_dtheta(z)


# ------------------------------------------------------------ Taylor series


@dataclass(frozen=True)
class TaylorSeries:
    """Taylor coefficients f^(0..n_max); ``rho`` is None for exact polynomials."""

    coeffs: np.ndarray = field(repr=False)
    rho: Optional[float] = None
    truncation_error: float = 0.0

    @classmethod
    def polynomial(cls, coeffs) -> "TaylorSeries":
        return cls(np.asarray(coeffs, dtype=complex))

    @property
    def n_max(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coeffs)

    def derivative(self) -> np.ndarray:
        return self.coeffs[1:] * np.arange(1, self.coeffs.size)

    def boundary(self, grid: UniformAngularGrid) -> np.ndarray:
        k = np.arange(self.coeffs.size)
        a = self.coeffs * np.exp(1j * k * grid.start)
        return np.fft.ifft(_fold(a, grid.n)) * grid.n

    def to_json(self) -> str:
        return json.dumps({
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "rho": self.rho,
            "truncation_error": self.truncation_error,
        })

    @classmethod
    def from_json(cls, text: str) -> "TaylorSeries":
        d = json.loads(text)
        c = np.array([complex(a, b) for a, b in d["coefficients"]])
        return cls(c, d.get("rho"), float(d.get("truncation_error", 0.0)))


RELIABLE_AMPLIFICATION = 1e8


def default_rho(n_max: int, n: int) -> float:
    """0.5 while 0.5**n_max stays above 1e-8, else the smallest radius that
    keeps rho**n_max >= 1e-8, capped at the trace radius 1 - 8/n."""
    if n_max <= 0 or 0.5**n_max >= 1.0 / RELIABLE_AMPLIFICATION:
        return 0.5
    return float(min(10.0 ** (-np.log10(RELIABLE_AMPLIFICATION) / n_max), trace_radius(n)))


def taylor_coefficients(h, n_max: int = 64, rho: Optional[float] = None,
                        n: int = DEFAULT_N) -> TaylorSeries:
    """f^(k) = c_k(rho)/rho^k from Fourier coefficients of O_h on |z| = rho."""
    outer = as_outer(h, n)
    if n_max >= outer.n // 2:
        raise ValueError(f"n_max={n_max} must be below n/2={outer.n // 2}")
    if rho is None:
        rho = default_rho(n_max, outer.n)
    if not 0.0 < rho < 1.0:
        raise ValueError("extraction radius must lie in (0, 1)")
    cap = int(np.floor(-300.0 / np.log10(rho)))
    if n_max > cap:
        warnings.warn(f"rho**n underflows beyond n={cap}; capping n_max", RuntimeWarning)
        n_max = cap
    m = 1 << int(np.ceil(np.log2(4 * max(n_max + 1, outer.g_coeffs.size))))
    grid = UniformAngularGrid(m, 0.0)
    vals = outer.values_on(grid, rho)
    c = fourier_coefficients(vals, grid).values[: n_max + 1]
    f = c / rho ** np.arange(n_max + 1)
    tail = f[max(1, n_max - 7):]
    trunc = float(np.sqrt(np.sum(np.abs(tail) ** 2))) if n_max > 0 else 0.0
    return TaylorSeries(f, float(rho), trunc)


def taylor_by_recurrence(g_coeffs: np.ndarray, n_max: int) -> np.ndarray:
    """Taylor coefficients of exp(g) from n f_n = sum_k k g_k f_{n-k}."""
    g = np.zeros(n_max + 1, dtype=complex)
    m = min(g_coeffs.size, n_max + 1)
    g[:m] = g_coeffs[:m]
    f = np.zeros(n_max + 1, dtype=complex)
    f[0] = np.exp(g[0])
    kg = np.arange(n_max + 1) * g
    for j in range(1, n_max + 1):
        f[j] = np.dot(kg[1 : j + 1], f[j - 1 :: -1][:j]) / j
    return f
