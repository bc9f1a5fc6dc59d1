"""Boundary modulus functions h on the circle, the h_beta family,
2-comparability level masks and the log-integrability admission test."""
from __future__ import annotations

import ast
import csv
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .quadrature import TWO_PI, UniformAngularGrid, adaptive_1d, is_power_of_two

PROVED = "proved"
NUMERIC_PASS = "numeric-pass"
FAIL = "fail"


def wrap_angle(theta):
    """Map angles into (-pi, pi]; angles already in range pass through bit-exact."""
    theta = np.asarray(theta, dtype=float)
    inside = (theta > -np.pi) & (theta <= np.pi)
    return np.where(inside, theta, np.pi - np.mod(np.pi - theta, TWO_PI))


@dataclass(frozen=True)
class HBetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"h_beta needs 0 < alpha < 1, got {self.alpha}")
        if not self.beta > 0.0:
            raise ValueError(f"h_beta needs beta > 0, got {self.beta}")

    @property
    def log_gamma(self) -> float:
        return float(np.log(np.pi) + 2.0 * self.beta / self.alpha)

    @property
    def gamma(self) -> float:
        return float(np.exp(self.log_gamma))

    @property
    def h_pi(self) -> float:
        return float(np.exp(self.log_h_positive(np.pi)))

    @property
    def c0(self) -> float:
        return 0.5 * self.h_pi

    def log_h_positive(self, theta):
        """log h_beta on (0, pi]; theta may be an array."""
        theta = np.asarray(theta, dtype=float)
        s = self.log_gamma - np.log(theta)
        return -0.5 * self.alpha * np.log(theta) - self.beta * np.log(s)


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Non-negative modulus h(theta) on (-pi, pi].

    ``log_func`` gives log h directly when a closed form exists; otherwise
    log is taken of ``func``.  Sampled functions carry their grid and are
    evaluated by periodic linear interpolation.
    """

    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    name: str = "h"
    kind: str = "closed-form"
    log_integrable: str = NUMERIC_PASS
    log_func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    family: str = "custom"
    params: tuple = ()
    grid: Optional[UniformAngularGrid] = None
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, theta) -> np.ndarray:
        return np.asarray(self.func(wrap_angle(theta)), dtype=float)

    def log(self, theta) -> np.ndarray:
        theta = wrap_angle(theta)
        if self.log_func is not None:
            return np.asarray(self.log_func(theta), dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self.func(theta), dtype=float))

    @property
    def hbeta(self) -> Optional[HBetaParams]:
        if self.family == "hbeta":
            return HBetaParams(*self.params)
        return None

    def scaled(self, c: float) -> "BoundaryFunction":
        if not c > 0:
            raise ValueError("scale factor must be positive")
        f, lf = self.func, self.log_func
        logc = float(np.log(c))
        return replace(
            self,
            func=lambda t: c * f(t),
            log_func=None if lf is None else (lambda t: lf(t) + logc),
            name=f"{c!r}*{self.name}",
            samples=None if self.samples is None else c * self.samples,
        )

    def rotated(self, theta0: float) -> "BoundaryFunction":
        """theta -> h(theta - theta0)."""
        f, lf = self.func, self.log_func
        return replace(
            self,
            func=lambda t: f(wrap_angle(t - theta0)),
            log_func=None if lf is None else (lambda t: lf(wrap_angle(t - theta0))),
            name=f"{self.name}(.-{theta0!r})",
        )


# ------------------------------------------------------------ constructors


def make_constant(c: float) -> BoundaryFunction:
    if not c > 0:
        raise ValueError("constant modulus must be positive")
    logc = float(np.log(c))
    return BoundaryFunction(
        func=lambda t: np.full(np.shape(t), float(c)),
        log_func=lambda t: np.full(np.shape(t), logc),
        name=f"const:{c!r}", log_integrable=PROVED, family="const", params=(float(c),),
    )


def _trig_poly(coeffs):
    coeffs = [float(x) for x in coeffs]
    if not coeffs:
        coeffs = [0.0]
    a0 = coeffs[0]
    rest = coeffs[1:] + ([0.0] if len(coeffs) % 2 == 0 else [])
    pairs = [(rest[2 * i], rest[2 * i + 1]) for i in range(len(rest) // 2)]

    def p(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, a0)
        for k, (a, b) in enumerate(pairs, start=1):
            out = out + a * np.cos(k * t) + b * np.sin(k * t)
        return out

    return p, a0, pairs


def make_exp_trig(coeffs) -> BoundaryFunction:
    """h = exp(p) with p = a0 + sum_k a_k cos(k t) + b_k sin(k t).

    ``coeffs`` is the flat list [a0, a1, b1, a2, b2, ...].
    """
    p, a0, pairs = _trig_poly(coeffs)
    flat = tuple(float(x) for x in coeffs)
    return BoundaryFunction(
        func=lambda t: np.exp(p(t)), log_func=p,
        name="exp-trig:" + ",".join(repr(x) for x in flat),
        log_integrable=PROVED, family="exp-trig", params=flat,
    )


def make_expcos() -> BoundaryFunction:
    return replace(make_exp_trig([0.0, 1.0]), name="expcos")


def make_sin_bump(a: float) -> BoundaryFunction:
    if not abs(a) < 1:
        raise ValueError("sin-bump needs |a| < 1 to stay positive")
    return BoundaryFunction(
        func=lambda t: 1.0 + a * np.sin(t),
        log_func=lambda t: np.log1p(a * np.sin(t)),
        name=f"sin-bump:{a!r}", log_integrable=PROVED, family="sin-bump", params=(float(a),),
    )


def make_step(lo: float, hi: float) -> BoundaryFunction:
    """lo on (-pi, 0), hi on [0, pi]."""
    if not (lo > 0 and hi > 0):
        raise ValueError("step levels must be positive")
    llo, lhi = float(np.log(lo)), float(np.log(hi))
    return BoundaryFunction(
        func=lambda t: np.where(np.asarray(t) < 0, float(lo), float(hi)),
        log_func=lambda t: np.where(np.asarray(t) < 0, llo, lhi),
        name=f"step:{lo!r},{hi!r}", log_integrable=PROVED, family="step",
        params=(float(lo), float(hi)),
    )


def make_poly_modulus(coeffs) -> BoundaryFunction:
    """h = |sum_k c_k e^{ik t}| for a polynomial with coefficients c_0, c_1, ..."""
    c = np.asarray(coeffs, dtype=complex)
    if not np.any(c):
        raise ValueError("zero polynomial has no outer function")

    def f(t):
        z = np.exp(1j * np.asarray(t, dtype=float))
        return np.abs(np.polynomial.polynomial.polyval(z, c))

    label = ",".join(repr(float(x.real)) if x.imag == 0 else repr(complex(x)) for x in c)
    return BoundaryFunction(
        func=f, name=f"poly:{label}", log_integrable=PROVED, family="poly",
        params=tuple(complex(x) for x in c),
    )


def make_hbeta(alpha: float, beta: float) -> BoundaryFunction:
    """theta^(-alpha/2) log^(-beta)(gamma/theta) on (0, pi], h(pi)/2 on (-pi, 0)."""
    prm = HBetaParams(float(alpha), float(beta))
    log_c0 = float(np.log(prm.c0))

    def log_h(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, log_c0)
        pos = t > 0
        out[pos] = prm.log_h_positive(t[pos])
        out[t == 0] = np.inf
        return out

    def h(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, prm.c0)
        pos = t > 0
        with np.errstate(over="ignore"):
            out[pos] = np.exp(prm.log_h_positive(t[pos]))
        out[t == 0] = np.inf
        return out

    return BoundaryFunction(
        func=h, log_func=log_h, name=f"hbeta:{alpha!r},{beta!r}", log_integrable=PROVED,
        family="hbeta", params=(prm.alpha, prm.beta),
    )


def make_sampled(theta, values, name: str = "sampled") -> BoundaryFunction:
    """Sampled modulus on a uniform power-of-two grid, linear periodic interpolation."""
    theta = np.asarray(theta, dtype=float)
    values = np.asarray(values, dtype=float)
    if theta.shape != values.shape or theta.ndim != 1:
        raise ValueError("theta and values must be 1-D arrays of equal length")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("sampled modulus must be finite and non-negative")
    order = np.argsort(theta)
    theta, values = theta[order], values[order]
    n = theta.size
    if not is_power_of_two(n) or n < 8:
        raise ValueError(f"sample count must be a power of two >= 8, got {n}")
    step = TWO_PI / n
    if not np.allclose(np.diff(theta), step, rtol=0, atol=1e-9):
        raise ValueError("sampled modulus must sit on a uniform grid")
    # snap to 12 digits so offsets like 0.25 survive a text round trip exactly
    offset = round(float(((theta[0] + np.pi) / step) % 1.0), 12) % 1.0
    grid = UniformAngularGrid(n, offset)

    def f(t):
        return np.interp(np.asarray(t, dtype=float), theta, values, period=TWO_PI)

    status = FAIL if np.any(values == 0) else NUMERIC_PASS
    return BoundaryFunction(
        func=f, name=name, kind="sampled", log_integrable=status, family="sampled",
        grid=grid, samples=values,
    )


def sample(h: BoundaryFunction, grid: UniformAngularGrid) -> BoundaryFunction:
    return make_sampled(grid.nodes, h(grid.nodes), name=f"sampled({h.name})")


# ----------------------------------------------------------------- CSV


def write_csv(h: BoundaryFunction, path, grid: Optional[UniformAngularGrid] = None) -> None:
    if grid is None:
        grid = h.grid if h.grid is not None else UniformAngularGrid(1024)
    theta = grid.nodes
    values = h.samples if (h.samples is not None and h.grid == grid) else h(theta)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "value"])
        for t, v in zip(theta, values):
            w.writerow([f"{t:.17g}", f"{v:.17g}"])


def read_csv(path) -> BoundaryFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["theta", "value"]:
        raise ValueError(f"{path}: expected header 'theta,value'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    if np.any(data[:, 0] < -np.pi) or np.any(data[:, 0] >= np.pi):
        raise ValueError(f"{path}: theta must lie in [-pi, pi)")
    return make_sampled(data[:, 0], data[:, 1], name=f"csv:{path}")


# --------------------------------------------------------- admission test


@dataclass(frozen=True)
class LogIntegrability:
    status: str
    value: float
    location: Optional[tuple] = None


def _zero_runs(theta, vals):
    zero = vals <= 0
    if not np.any(zero):
        return None
    idx = np.flatnonzero(zero)
    return float(theta[idx[0]]), float(theta[idx[-1]])


def check_log_integrability(h: BoundaryFunction, n_probe: int = 4096) -> LogIntegrability:
    """Estimate int_{-pi}^{pi} log h and decide admissibility.

    A zero of h on a probed sub-interval fails with its location.
    """
    if h.kind == "sampled":
        theta, vals = h.grid.nodes, h.samples
        loc = _zero_runs(theta, vals)
        if loc is not None:
            return LogIntegrability(FAIL, -np.inf, loc)
        return LogIntegrability(NUMERIC_PASS, float(np.sum(np.log(vals)) * h.grid.spacing))

    probe = UniformAngularGrid(n_probe, 0.5).nodes
    vals = h(probe)
    if np.any(vals < 0):
        raise ValueError("boundary modulus must be non-negative")
    loc = _zero_runs(probe, vals)
    if loc is not None:
        return LogIntegrability(FAIL, -np.inf, loc)
    with np.errstate(divide="ignore"):
        res = adaptive_1d(h.log, -np.pi, np.pi, tol=1e-9, abs_floor=1e-12, breakpoints=(0.0,))
    if not np.isfinite(res.value) or res.value == -np.inf:
        return LogIntegrability(FAIL, res.value)
    if h.log_integrable == PROVED:
        return LogIntegrability(PROVED, res.value)
    return LogIntegrability(NUMERIC_PASS if res.converged else FAIL, res.value)


# ------------------------------------------------------------ level masks


@dataclass(frozen=True)
class LevelMasks:
    theta: float
    comparable: np.ndarray
    plus: np.ndarray
    minus: np.ndarray


def level_masks(h: BoundaryFunction, theta: float, grid: UniformAngularGrid,
                c: float = 2.0) -> LevelMasks:
    """Partition grid nodes into h(phi) ~ h(theta) (within factor c),
    h(phi) >= c h(theta) and h(phi) <= h(theta)/c."""
    ref = float(h(np.array([theta]))[0])
    if not ref > 0 or not np.isfinite(ref):
        raise ValueError(f"h(theta) must be positive and finite at theta={theta}")
    vals = h(grid.nodes)
    minus = vals <= ref / c
    plus = vals >= c * ref
    comparable = ~(minus | plus)
    return LevelMasks(float(theta), np.flatnonzero(comparable), np.flatnonzero(plus),
                      np.flatnonzero(minus))


# ----------------------------------------------------------- spec parsing

_ALLOWED = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Add,
            ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load)


def _parse_polynomial(text: str) -> np.ndarray:
    """Coefficients of a polynomial in z written as an arithmetic expression."""
    P = np.polynomial.Polynomial
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ValueError(f"unsupported token in polynomial {text!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float, complex)):
                raise ValueError(f"bad constant in {text!r}")
            return P([node.value])
        if isinstance(node, ast.Name):
            if node.id != "z":
                raise ValueError(f"unknown symbol {node.id!r}; only z is allowed")
            return P([0, 1])
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        a, b = ev(node.left), ev(node.right)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if isinstance(node.op, ast.Div):
            if b.degree() != 0:
                raise ValueError("division only by constants")
            return a / b.coef[0]
        if b.degree() != 0 or float(b.coef[0]) != int(b.coef[0]) or b.coef[0] < 0:
            raise ValueError("powers must be non-negative integers")
        return a ** int(b.coef[0])

    return ev(tree).coef


def _floats(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


def parse_spec(spec: str) -> BoundaryFunction:
    """Builtin boundary specs: const:c, poly:<coeffs or expression in z>, expcos,
    exp-trig:<a0,a1,b1,...>, sin-bump:a, step:lo,hi, hbeta:alpha,beta, csv:<path>."""
    name, _, arg = spec.partition(":")
    name = name.strip()
    if name == "const":
        return make_constant(float(arg))
    if name == "poly":
        try:
            coeffs = _floats(arg)
        except ValueError:
            coeffs = _parse_polynomial(arg)
        return make_poly_modulus(coeffs)
    if name == "expcos":
        return make_expcos()
    if name == "exp-trig":
        return make_exp_trig(_floats(arg))
    if name == "sin-bump":
        return make_sin_bump(float(arg))
    if name == "step":
        lo, hi = _floats(arg)
        return make_step(lo, hi)
    if name == "hbeta":
        a, b = _floats(arg)
        return make_hbeta(a, b)
    if name == "csv":
        return read_csv(arg)
    raise ValueError(f"unknown boundary spec {spec!r}")
