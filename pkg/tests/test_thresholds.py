import json
import math

import numpy as np
import pytest
from scipy import integrate

from dirlab.boundary import make_hbeta
from dirlab.thresholds import (
    CONVERGENT,
    DIVERGENT,
    INCONCLUSIVE,
    classify_convergence,
    expected_verdict,
    pure_model,
    pure_model_integral,
    reduced_integrand,
    table_to_csv,
    table_to_json,
    threshold,
    threshold_table,
    truncated_integral,
)

LOG_GAMMA = math.log(math.pi) + 4.0


@pytest.mark.parametrize("q,alpha,beta,p", [
    ("N", 0.5, 0.75, 1.5), ("D", 0.5, 0.75, 1.0), ("C", 0.5, 1.5, 2.0),
    ("N", 0.2, 0.4, 0.8), ("D", 0.2, 0.4, 0.0), ("C", 0.9, 0.7, 0.4),
])
def test_effective_exponent(q, alpha, beta, p):
    assert reduced_integrand(q, alpha, beta).p == pytest.approx(p, abs=1e-15)


@pytest.mark.parametrize("alpha,beta", [(0.5, 0.75), (0.25, 1.2), (0.9, 0.6)])
def test_reduced_integrands_match_hbeta(alpha, beta):
    h = make_hbeta(alpha, beta)
    c0 = h.hbeta.c0
    t = np.array([1e-6, 1e-3, 0.1, 0.7, 1.5])
    hv = h(t)
    lr = np.log(hv / c0)
    forms = {
        "N": hv**2 * t ** (alpha - 1),
        "D": hv**2 * (lr / t) ** (1 - alpha),
        "C": hv**2 * lr * t ** (alpha - 1),
    }
    for q, ref in forms.items():
        assert np.allclose(reduced_integrand(q, alpha, beta).theta_form(t), ref, rtol=1e-12)
    with_c0 = reduced_integrand("N", alpha, beta, subtract_c0=True).theta_form(t)
    assert np.allclose(with_c0, (hv - c0) ** 2 * t ** (alpha - 1), rtol=1e-10)


def test_reduced_integrands_positive_and_decreasing():
    for q in ("N", "D", "C"):
        ri = reduced_integrand(q, 0.5, 1.1)
        s = np.geomspace(ri.s_min, 1e6, 400)
        g = ri.g(s)
        assert np.all(g > 0)
        assert np.all(np.diff(g) < 0)


def test_unknown_quantity_rejected():
    with pytest.raises(ValueError):
        reduced_integrand("X", 0.5, 1.0)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("eps", [1e-3, 1e-9, 1e-40])
def test_pure_model_closed_form(p, eps):
    val = truncated_integral(pure_model(p), eps=eps)
    assert val == pytest.approx(pure_model_integral(p, eps), rel=1e-10)


def test_pure_model_p2_example():
    eps = 1e-5
    exact = 1 / (LOG_GAMMA - math.log(math.pi / 2)) - 1 / (LOG_GAMMA - math.log(eps))
    assert pure_model_integral(2.0, eps) == pytest.approx(exact, rel=1e-15)
    assert truncated_integral(pure_model(2.0), eps=eps) == pytest.approx(exact, rel=1e-10)


def test_truncated_integral_in_theta_against_scipy():
    ri = reduced_integrand("D", 0.5, 0.9)
    eps = 1e-4
    # split at decades so quad resolves the 1/theta scale
    edges = np.geomspace(eps, math.pi / 2, 6)
    ref = sum(integrate.quad(lambda t: float(ri.theta_form(t)), a, b, epsrel=1e-12)[0]
              for a, b in zip(edges[:-1], edges[1:]))
    assert truncated_integral(ri, eps=eps) == pytest.approx(ref, rel=1e-9)


def test_truncated_integral_empty_and_monotone():
    ri = reduced_integrand("C", 0.5, 1.3)
    assert truncated_integral(ri, eps=math.pi / 2) == 0.0
    vals = [truncated_integral(ri, eps=e) for e in (1.0, 1e-2, 1e-8, 1e-100)]
    assert np.all(np.diff(vals) > 0)


def test_truncated_integral_depth_form_goes_below_double_range():
    ri = pure_model(2.0)
    s = 1e4  # eps = gamma e^-10000 is not representable
    a = LOG_GAMMA - math.log(math.pi / 2)
    assert truncated_integral(ri, s=s) == pytest.approx(1 / a - 1 / s, rel=1e-10)


def test_truncated_integral_errors():
    ri = pure_model(2.0)
    with pytest.raises(ValueError, match="max depth"):
        truncated_integral(ri, s=1e9)
    with pytest.raises(ValueError):
        truncated_integral(ri, eps=2.0)
    with pytest.raises(ValueError):
        truncated_integral(ri)


@pytest.mark.parametrize("p,verdict", [
    (0.5, DIVERGENT), (0.8, DIVERGENT), (1.0, DIVERGENT),
    (1.3, CONVERGENT), (2.0, CONVERGENT), (3.0, CONVERGENT),
])
def test_classifier_on_pure_models(p, verdict):
    v = classify_convergence(pure_model(p))
    assert v.verdict == verdict
    # dyadic blocks of s^-p have ratio 2^(1-p) exactly
    assert np.allclose(v.ratios, 2.0 ** (1 - p), rtol=1e-9)
    assert len(v.ratios) == 5 and len(v.depths) == 7


def test_classifier_depth_schedule():
    v = classify_convergence(pure_model(2.0), depth=4)
    L0 = LOG_GAMMA - math.log(math.pi / 4)
    assert np.allclose(v.depths, L0 * 2.0 ** np.arange(5), rtol=1e-15)
    with pytest.raises(ValueError):
        classify_convergence(pure_model(2.0), depth=3)


def test_classifier_noise_floor_is_inconclusive():
    v = classify_convergence(pure_model(300.0))
    assert v.verdict == INCONCLUSIVE
    assert "noise floor" in v.diagnostic


def test_classifier_dead_band_is_inconclusive():
    # ratio 2^-0.1 ~ 0.933 sits between the two verdict thresholds
    assert classify_convergence(pure_model(1.1)).verdict == INCONCLUSIVE


def test_thresholds_and_expected():
    assert threshold("N", 0.5) == 0.5
    assert threshold("D", 0.5) == 0.75
    assert threshold("C", 0.5) == 1.0
    assert expected_verdict("D", 0.5, 0.9) == CONVERGENT
    assert expected_verdict("C", 0.5, 0.9) == DIVERGENT


@pytest.mark.parametrize("q,betas,verdicts", [
    ("N", (0.3, 0.8), (DIVERGENT, CONVERGENT)),
    ("D", (0.6, 0.9), (DIVERGENT, CONVERGENT)),
    ("C", (0.8, 1.3), (DIVERGENT, CONVERGENT)),
])
def test_table_trichotomy(q, betas, verdicts):
    rows = threshold_table(0.5, betas, quantities=(q,))
    assert tuple(r.verdict for r in rows) == verdicts
    assert all(r.agree for r in rows)


def test_separation_triple():
    # beta = 0.9 is 0.1 below the C threshold, so the margin warning is expected
    with pytest.warns(RuntimeWarning, match="C threshold"):
        rows = {r.quantity: r.verdict for r in threshold_table(0.5, [0.9])}
    assert rows == {"N": CONVERGENT, "D": CONVERGENT, "C": DIVERGENT}


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_verdict_monotone_in_beta(alpha):
    betas = [b for b in np.round(np.arange(0.2, 1.9, 0.1), 10)
             if all(abs(b - threshold(q, alpha)) >= 0.15 for q in ("N", "D", "C"))]
    rows = threshold_table(alpha, betas)
    for q in ("N", "D", "C"):
        vs = [r.verdict for r in rows if r.quantity == q]
        if CONVERGENT in vs:
            first = vs.index(CONVERGENT)
            assert DIVERGENT not in vs[first:]
    # a decisive verdict is never wrong; an inconclusive one never counts as agreement
    for r in rows:
        assert r.agree == (r.verdict == r.expected)
        assert r.agree or r.verdict == INCONCLUSIVE


def test_slow_log_correction_can_leave_rows_inconclusive():
    # for C the -beta log s term in log(h/c0) lifts the early ratios of p = 1.4 above 0.9
    (row,) = threshold_table(0.5, [1.2], quantities=("C",))
    assert row.verdict == INCONCLUSIVE and not row.agree
    assert max(row.ratios) > 0.9 and row.ratios[-1] < 0.9


def test_margin_warning_and_strict():
    with pytest.warns(RuntimeWarning, match="within"):
        threshold_table(0.5, [0.55], quantities=("N",))
    with pytest.raises(ValueError, match="within"):
        threshold_table(0.5, [0.55], quantities=("N",), strict=True)


def test_table_serialization():
    rows = threshold_table(0.5, [0.3, 1.3], quantities=("N", "C"))
    lines = table_to_csv(rows).splitlines()
    assert lines[0] == "quantity,alpha,beta,verdict,expected,agree"
    assert lines[1] == "N,0.5,0.29999999999999999,Divergent,Divergent,true"
    assert len(lines) == 5
    data = json.loads(table_to_json(rows))
    assert [r["quantity"] for r in data["rows"]] == ["N", "N", "C", "C"]
    assert data["rows"][3]["verdict"] == CONVERGENT
    assert isinstance(data["rows"][0]["ratios"], list)


def test_table_independent_of_thread_count(monkeypatch):
    monkeypatch.setenv("DIRLAB_THREADS", "1")
    a = table_to_json(threshold_table(0.5, [0.3, 1.3]))
    monkeypatch.setenv("DIRLAB_THREADS", "6")
    assert table_to_json(threshold_table(0.5, [0.3, 1.3])) == a
