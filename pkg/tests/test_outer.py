import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dirlab.boundary import make_constant, make_sampled, parse_spec
from dirlab.outer import (
    ClearanceError,
    OuterFunction,
    TaylorSeries,
    as_outer,
    conjugate_log,
    dv_dtheta,
    min_clearance,
    outer_eval,
    poisson_log,
    q_kernel,
    taylor_by_recurrence,
    taylor_coefficients,
)
from dirlab.quadrature import UniformAngularGrid

N = 1024
SMOOTH = ["poly:1+z/2", "expcos", "exp-trig:0,0.2", "sin-bump:0.3",
          "exp-trig:0,0,0,0,0,0,0.1", "exp-trig:0.1,0.5,-0.3,0.2,0.1"]


def _points(r, k=9, shift=0.123):
    return r * np.exp(1j * (np.linspace(-3.0, 3.0, k) + shift))


def test_constant_modulus():
    h = make_constant(2.0)
    z = _points(0.7)
    assert np.allclose(poisson_log(h, z), math.log(2.0), atol=1e-14)
    assert np.allclose(conjugate_log(h, z), 0.0, atol=1e-14)
    assert np.allclose(outer_eval(h, z), 2.0, atol=1e-14)
    assert np.allclose(dv_dtheta(h, z), 0.0, atol=1e-14)


@pytest.mark.parametrize("r", [0.0, 0.3, 0.9])
def test_expcos_closed_forms(r):
    h = parse_spec("expcos")
    z = _points(r) if r else np.array([0.0j])
    t = np.angle(z)
    assert np.allclose(poisson_log(h, z), r * np.cos(t), atol=1e-13)
    assert np.allclose(conjugate_log(h, z), r * np.sin(t), atol=1e-13)
    assert np.allclose(dv_dtheta(h, z), r * np.cos(t), atol=1e-12)
    assert np.allclose(outer_eval(h, z), np.exp(z), rtol=1e-13)


def test_poly_modulus_recovers_polynomial():
    h = parse_spec("poly:1+z/2")
    assert poisson_log(h, np.array([0.0j]))[0] == pytest.approx(0.0, abs=1e-15)
    assert outer_eval(h, np.array([0.3 + 0j]))[0] == pytest.approx(1.15, rel=1e-14)
    z = _points(0.85)
    assert np.allclose(outer_eval(h, z), 1 + z / 2, rtol=1e-13)


@pytest.mark.parametrize("spec", SMOOTH + ["step:1,4", "hbeta:0.5,1.2"])
def test_conjugate_vanishes_at_origin(spec):
    assert conjugate_log(parse_spec(spec), np.array([0.0j]))[0] == 0.0


def test_value_at_origin_is_geometric_mean():
    o = as_outer(parse_spec("expcos"), N)
    assert o.value_at_zero == pytest.approx(1.0, rel=1e-15)
    h = parse_spec("exp-trig:0.1,0.5,-0.3,0.2,0.1")
    mean_log, _ = integrate.quad(lambda t: float(h.log(np.array([t]))[0]), -np.pi, np.pi)
    assert as_outer(h, N).value_at_zero == pytest.approx(math.exp(mean_log / (2 * np.pi)),
                                                          rel=1e-13)


def test_poisson_against_scipy_quadrature():
    h = parse_spec("sin-bump:0.3")
    z = 0.6 * np.exp(0.7j)
    f = lambda p: (1 - abs(z) ** 2) / abs(np.exp(1j * p) - z) ** 2 * math.log1p(0.3 * math.sin(p))
    ref, _ = integrate.quad(f, -np.pi, np.pi, epsabs=0, epsrel=1e-13)
    assert poisson_log(h, np.array([z]))[0] == pytest.approx(ref / (2 * np.pi), rel=1e-12)


@pytest.mark.parametrize("spec", SMOOTH)
def test_point_and_spectral_paths_agree_at_clearance(spec):
    o = as_outer(parse_spec(spec), N)
    z = _points(1 - min_clearance(N))
    assert np.allclose(o(z), np.exp(o.g(z)), rtol=1e-9)


@pytest.mark.parametrize("spec", SMOOTH + ["step:1,4"])
def test_kernel_paths_agree_well_inside(spec):
    # the Poisson/Q kernel sums cancel to machine level once 1-|z| >= 48/n
    o = as_outer(parse_spec(spec), N)
    z = _points(1 - 48.0 / N)
    gp = np.polynomial.polynomial.polyval(z, o.g_coeffs[1:] * np.arange(1, o.g_coeffs.size))
    assert np.allclose(o(z), np.exp(o.g(z)), rtol=1e-11)
    assert np.allclose(o.dv_dtheta(z), np.real(z * gp), atol=1e-9)


def test_clearance_error_names_required_grid():
    h = parse_spec("expcos")
    with pytest.raises(ClearanceError, match="at least 2048"):
        poisson_log(h, np.array([1 - 0.5 * min_clearance(N)]), N)
    with pytest.raises(ClearanceError, match="outside"):
        poisson_log(h, np.array([1.0 + 0j]), N)
    poisson_log(h, np.array([1 - min_clearance(N)]), N)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.97), st.floats(-np.pi, np.pi))
def test_q_kernel_bound(r, phi):
    z = r * np.exp(1j * np.linspace(-3, 3, 25))
    q = q_kernel(phi, z)
    assert np.all(np.abs(q) <= 2.0 / np.abs(np.exp(1j * phi) - z) ** 2 + 1e-12)


def test_q_kernel_is_theta_derivative_of_conjugate_kernel():
    r, th, phi, eps = 0.7, 0.4, -1.1, 1e-6
    im = lambda t: np.imag((np.exp(1j * phi) + r * np.exp(1j * t)) / (np.exp(1j * phi) - r * np.exp(1j * t)))
    fd = (im(th + eps) - im(th - eps)) / (2 * eps)
    assert q_kernel(phi, r * np.exp(1j * th)) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("spec", ["expcos", "sin-bump:0.3", "exp-trig:0.1,0.5,-0.3,0.2,0.1"])
def test_modulus_approaches_h_at_the_circle(spec):
    h = parse_spec(spec)
    o = as_outer(h, 4096)
    theta = np.linspace(-3, 3, 13) + 0.05
    errs = [np.max(np.abs(np.abs(np.exp(o.g(rho * np.exp(1j * theta)))) - h(theta)))
            for rho in (0.9, 0.99, 0.999)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 63))
def test_rotation_by_grid_step_rotates_outer(k):
    h = parse_spec("exp-trig:0.1,0.5,-0.3,0.2,0.1")
    n = 256
    t0 = k * 2 * np.pi / n
    a = as_outer(h, n)
    b = OuterFunction(h.rotated(t0), n)
    z = _points(0.5)
    assert np.allclose(np.abs(b(z)), np.abs(a(z * np.exp(-1j * t0))), rtol=1e-12)


def test_scaling_multiplies_outer():
    h = parse_spec("sin-bump:0.3")
    z = _points(0.8)
    assert np.allclose(outer_eval(h.scaled(7.0), z), 7.0 * outer_eval(h, z), rtol=1e-13)


def test_taylor_examples():
    s = taylor_coefficients(parse_spec("poly:1+z/2"), n_max=8)
    assert np.allclose(s.coeffs, [1, 0.5] + [0] * 7, atol=1e-13)
    s = taylor_coefficients(make_constant(3.0), n_max=5)
    assert np.allclose(s.coeffs, [3, 0, 0, 0, 0, 0], atol=1e-14)
    s = taylor_coefficients(parse_spec("expcos"), n_max=20)
    exact = np.array([1 / math.factorial(k) for k in range(21)])
    # extraction on |z| = rho amplifies roundoff by rho^-k
    bound = 1e-14 * s.rho ** -np.arange(21.0)
    assert np.all(np.abs(s.coeffs - exact) <= bound)


def test_taylor_extraction_matches_recurrence():
    o = as_outer(parse_spec("exp-trig:0.1,0.5,-0.3,0.2,0.1"), N)
    s = taylor_coefficients(o, n_max=40)
    rec = taylor_by_recurrence(o.g_coeffs, 40)
    bound = 1e-14 * s.rho ** -np.arange(41.0)
    assert np.all(np.abs(s.coeffs - rec) <= bound)
    assert np.abs(s.coeffs[:10] - rec[:10]).max() < 1e-13


def test_taylor_extraction_rejects_too_many_terms():
    with pytest.raises(ValueError):
        taylor_coefficients(parse_spec("expcos"), n_max=N // 2, n=N)


def test_taylor_json_round_trip():
    s = taylor_coefficients(parse_spec("sin-bump:0.3"), n_max=12)
    back = TaylorSeries.from_json(s.to_json())
    assert np.array_equal(back.coeffs, s.coeffs)
    assert back.rho == s.rho


def test_sampled_input_reuses_its_grid():
    g = UniformAngularGrid(N, 0.25)
    h = parse_spec("expcos")
    hs = make_sampled(g.nodes, h(g.nodes))
    z = _points(0.6)
    assert np.allclose(outer_eval(hs, z), outer_eval(h, z), rtol=1e-14)


def test_non_log_integrable_is_rejected():
    g = UniformAngularGrid(64)
    h = make_sampled(g.nodes, np.where(g.nodes > 0, 0.0, 1.0))
    with pytest.raises(ValueError):
        OuterFunction(h, 64)


def test_circle_matches_point_evaluation():
    o = as_outer(parse_spec("sin-bump:0.3"), N)
    theta, vals, dv = o.circle(0.7, 64)
    z = 0.7 * np.exp(1j * theta)
    assert np.allclose(vals, o(z), rtol=1e-12)
    assert np.allclose(dv, o.dv_dtheta(z), atol=1e-12)
