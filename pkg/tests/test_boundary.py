import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dirlab.boundary import (
    FAIL,
    PROVED,
    HBetaParams,
    check_log_integrability,
    level_masks,
    make_constant,
    make_exp_trig,
    make_hbeta,
    make_sampled,
    make_step,
    parse_spec,
    read_csv,
    sample,
    wrap_angle,
    write_csv,
)
from dirlab.quadrature import UniformAngularGrid


def test_hbeta_parameters():
    prm = HBetaParams(0.5, 1.0)
    assert prm.gamma == pytest.approx(math.pi * math.e**4, rel=1e-15)
    assert prm.h_pi == pytest.approx(1.0 / (math.pi**0.25 * 4.0), rel=1e-14)
    assert prm.c0 == pytest.approx(0.5 / (math.pi**0.25 * 4.0), rel=1e-14)


@pytest.mark.parametrize("alpha,beta", [(0.5, 1.0), (0.1, 0.3), (0.9, 1.5)])
def test_hbeta_jump_and_monotone(alpha, beta):
    h = make_hbeta(alpha, beta)
    prm = h.hbeta
    assert h(np.array([np.pi]))[0] / prm.c0 == 2.0
    assert h(np.array([-1.0]))[0] == prm.c0
    t = np.geomspace(1e-8, np.pi, 200)
    assert np.all(np.diff(h(t)) < 0)


def test_hbeta_blows_up_at_zero():
    h = make_hbeta(0.5, 1.0)
    vals = h(np.array([1e-2, 1e-6, 1e-12, 1e-100]))
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] > 1e20


def test_hbeta_log_matches_value():
    h = make_hbeta(0.5, 0.9)
    t = np.array([-2.0, 1e-5, 0.3, 3.0])
    assert np.allclose(np.exp(h.log(t)), h(t), rtol=1e-14)


def test_hbeta_rejects_bad_parameters():
    with pytest.raises(ValueError):
        make_hbeta(0.0, 1.0)
    with pytest.raises(ValueError):
        make_hbeta(0.5, -1.0)


def test_log_integrability_constant():
    res = check_log_integrability(make_constant(1.0))
    assert res.status == PROVED
    assert res.value == pytest.approx(0.0, abs=1e-12)


def test_log_integrability_fails_on_zero_interval():
    g = UniformAngularGrid(256)
    t = g.nodes
    h = make_sampled(t, np.where((t > 0) & (t < 1), 0.0, 1.0))
    res = check_log_integrability(h)
    assert res.status == FAIL
    assert res.location is not None
    assert 0 < res.location[0] < res.location[1] < 1


def test_log_integrability_hbeta_against_scipy():
    h = make_hbeta(0.5, 1.0)
    res = check_log_integrability(h)
    assert res.status == PROVED
    neg, _ = integrate.quad(lambda t: float(h.log(np.array([t]))[0]), -np.pi, 0)
    pos, _ = integrate.quad(lambda t: float(h.log(np.array([t]))[0]), 0, np.pi, limit=200)
    assert res.value == pytest.approx(neg + pos, rel=1e-8)


def test_exp_trig_examples():
    t = np.linspace(-3, 3, 11)
    assert np.allclose(make_exp_trig([0.0])(t), 1.0)
    assert np.allclose(make_exp_trig([0.0, 1.0])(t), np.exp(np.cos(t)))
    h = make_exp_trig([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1])  # 0.1 sin 3t
    assert np.allclose(h(t), np.exp(0.1 * np.sin(3 * t)))
    v = h(UniformAngularGrid(1024).nodes)
    assert np.all(v > 0) and v.max() / v.min() <= math.exp(0.2) + 1e-12


def test_level_masks_constant():
    g = UniformAngularGrid(64)
    m = level_masks(make_constant(3.0), 0.5, g)
    assert m.plus.size == 0 and m.minus.size == 0 and m.comparable.size == 64


def test_level_masks_step():
    g = UniformAngularGrid(64, 0.25)
    m = level_masks(make_step(1.0, 4.0), np.pi / 2, g)
    assert np.array_equal(m.minus, np.flatnonzero(g.nodes < 0))
    assert m.plus.size == 0


def test_level_masks_sin_bump_empty():
    g = UniformAngularGrid(128)
    h = parse_spec("sin-bump:0.3")
    for theta in np.linspace(-3, 3, 13):
        m = level_masks(h, theta, g)
        assert m.plus.size == 0 and m.minus.size == 0


@settings(max_examples=30, deadline=None)
@given(st.floats(-10, 10), st.integers(-3, 3))
def test_wrap_angle_is_periodic(t, k):
    a, b = wrap_angle(t), wrap_angle(t + 2 * np.pi * k)
    assert -np.pi < a <= np.pi
    assert np.cos(a) == pytest.approx(np.cos(b), abs=1e-9)
    assert np.sin(a) == pytest.approx(np.sin(b), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(-3.0, 3.0))
def test_scaling_and_rotation(c, t0):
    h = parse_spec("exp-trig:0.1,0.5,-0.3,0.2,0.1")
    t = np.linspace(-3, 3, 9)
    assert np.allclose(h.scaled(c)(t), c * h(t))
    assert np.allclose(h.scaled(c).log(t), np.log(c) + h.log(t))
    assert np.allclose(h.rotated(t0)(t), h(t - t0))


def test_csv_round_trip(tmp_path):
    h = parse_spec("expcos")
    g = UniformAngularGrid(64, 0.25)
    path = tmp_path / "h.csv"
    write_csv(h, path, g)
    back = read_csv(path)
    assert back.grid == g
    assert np.array_equal(back.samples, h(g.nodes))
    assert np.allclose(back(g.nodes), h(g.nodes), rtol=1e-14, atol=0)
    assert parse_spec(f"csv:{path}").kind == "sampled"


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n0,1\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_sampled_requires_uniform_power_of_two():
    with pytest.raises(ValueError):
        make_sampled(np.linspace(-3, 3, 10), np.ones(10))
    with pytest.raises(ValueError):
        make_sampled(np.sort(np.random.default_rng(0).uniform(-3, 3, 16)), np.ones(16))


def test_sample_interpolates_linearly():
    g = UniformAngularGrid(16)
    s = sample(parse_spec("sin-bump:0.3"), g)
    mid = g.nodes[:-1] + 0.5 * g.spacing
    vals = parse_spec("sin-bump:0.3")(g.nodes)
    assert np.allclose(s(mid), 0.5 * (vals[:-1] + vals[1:]))


@pytest.mark.parametrize("spec,family", [
    ("const:2", "const"), ("poly:1+z/2", "poly"), ("poly:1,0.5", "poly"), ("expcos", "exp-trig"),
    ("exp-trig:0,0.2", "exp-trig"), ("sin-bump:0.3", "sin-bump"), ("step:1,4", "step"),
    ("hbeta:0.5,0.9", "hbeta"),
])
def test_parse_spec_families(spec, family):
    assert parse_spec(spec).family == family


def test_poly_expression_and_list_agree():
    t = np.linspace(-3, 3, 17)
    a = parse_spec("poly:(1+z/2)^2 - 3*z**3")(t)
    b = parse_spec("poly:1,1,0.25,-3")(t)
    assert np.allclose(a, b, rtol=1e-15)
    z = np.exp(1j * t)
    assert np.allclose(a, np.abs((1 + z / 2) ** 2 - 3 * z**3))


@pytest.mark.parametrize("spec", [
    "nope:1", "const:-1", "step:1", "poly:__import__('os')", "poly:w+1", "poly:z/z",
    "poly:z**0.5", "poly:0", "sin-bump:x", "hbeta:0.5",
])
def test_parse_spec_rejects(spec):
    with pytest.raises((ValueError, SyntaxError)):
        parse_spec(spec)


def test_wrap_angle_keeps_in_range_values_exact():
    t = np.array([1e-12, -1e-9, 0.3, np.pi, -np.pi + 1e-15])
    assert np.array_equal(wrap_angle(t), t)
    assert wrap_angle(-np.pi) == np.pi


def test_hbeta_accurate_near_singularity():
    # h = theta^(-alpha/2) log^(-beta)(gamma/theta) evaluated without angle wrapping loss
    h = make_hbeta(0.5, 0.75)
    lg = h.hbeta.log_gamma
    for t in (1e-6, 1e-12, 1e-30):
        assert h(np.array([t]))[0] == pytest.approx(t**-0.25 * (lg - math.log(t)) ** -0.75, rel=1e-14)
