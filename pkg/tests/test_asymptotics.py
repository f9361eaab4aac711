import math
import warnings

import mpmath
import numpy as np
import pytest

from jostlab.asymptotics import (certify_residual, coefficient_radius, extract_series, poles_from_taylor,
                                 resolvable_length)
from jostlab.core import AsymptoticSeries, ConvergenceError, InputError, PowerSeriesModel
from jostlab.jacobi_gc import b_series
from jostlab.opuc import q_series, s_series

U_PP_2 = -0.72812007400420447  # principal coefficient of u at +-2 (equals -u(1/2))
U_PP_8 = 0.23261379685579642


def _seq(terms, N=200, prec=128):
    with mpmath.workprec(prec):
        return [sum(mpmath.polyval(list(reversed(p)), n) * mpmath.power(mu, -n) for mu, p in terms)
                for n in range(N)]


def _by_mu(series):
    return sorted(series.terms, key=lambda t: (abs(complex(t.mu)), np.angle(complex(t.mu))))


def test_extract_single():
    s = extract_series([mpmath.mpf(2) ** -n for n in range(40)])
    assert len(s.terms) == 1
    assert abs(s.terms[0].mu - 2) < 1e-25 and len(s.terms[0].poly) == 1


def test_extract_two_terms():
    x = _seq([(2, (3,)), (3, (0, 1))], 60)
    s = extract_series(x, R_target=10)
    t = _by_mu(s)
    assert abs(t[0].mu - 2) < 1e-12 and abs(t[1].mu - 3) < 1e-12
    assert len(t[0].poly) == 1 and len(t[1].poly) == 2
    assert abs(t[0].poly[0] - 3) < 1e-10
    assert abs(t[1].poly[1] - 1) < 1e-10 and abs(t[1].poly[0]) < 1e-10


def test_extract_example_b(example_J):
    # interleaved B data: rates +-2 and +-4, order 1 each
    c = b_series(example_J, 80, prec=256).coeffs[1:]
    s = extract_series(list(c), R_target=50, prec=256, start=1)
    mus = sorted(complex(t.mu).real for t in s.terms)
    assert np.allclose(mus, [-4, -2, 2, 4], rtol=1e-10)
    assert all(len(t.poly) == 1 for t in s.terms)


def test_extract_complex_pair():
    mu = 1.5 * np.exp(0.7j)
    x = _seq([(mpmath.mpc(mu), (1,)), (mpmath.mpc(mu.conjugate()), (1,))], 80)
    s = extract_series(x, R_target=20)
    got = sorted((complex(t.mu) for t in s.terms), key=lambda z: z.imag)
    assert abs(got[0] - mu.conjugate()) < 1e-10 * abs(mu) and abs(got[1] - mu) < 1e-10 * abs(mu)


@pytest.mark.parametrize("seed", range(4))
def test_extract_random(seed):
    rng = np.random.default_rng(seed)
    k = rng.integers(1, 5)
    mods = np.sort(rng.uniform(1.2, 5, k))
    while np.min(np.diff(mods), initial=1) < 0.2:
        mods = np.sort(rng.uniform(1.2, 5, k))
    terms = [(mpmath.mpf(float(m * rng.choice([-1, 1]))), tuple(float(c) for c in rng.uniform(0.5, 2, rng.integers(1, 4))))
             for m in mods]
    s = extract_series(_seq(terms), R_target=8)
    got = _by_mu(s)
    want = sorted(terms, key=lambda t: abs(t[0]))
    assert len(got) == len(want)
    for g, (mu, p) in zip(got, want):
        assert abs(g.mu - mu) <= 1e-8 * abs(mu)
        assert len(g.poly) == len(p)


def test_extract_idempotent():
    x = _seq([(2, (3,)), (-2.5, (1, 0.5))], 120)
    s1 = extract_series(x, R_target=10)
    s2 = extract_series(s1.realize(120, prec=128), R_target=10)
    for a, b in zip(_by_mu(s1), _by_mu(s2)):
        assert abs(a.mu - b.mu) < 1e-8 * abs(a.mu) and len(a.poly) == len(b.poly)


def test_extract_merge_warns():
    # a double rate splits into an eigenvalue pair at the sqrt of the floor
    x = _seq([(2, (1, 1))], 80)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        s = extract_series(x)
    assert any("merged" in str(m.message) for m in w)
    assert len(s.terms) == 1 and len(s.terms[0].poly) == 2


def test_extract_rejects():
    with pytest.raises(InputError):
        extract_series([1.0, 0.5, 0.25])
    with pytest.raises(ConvergenceError):
        extract_series([1.0] * 40)
    with pytest.raises(ConvergenceError):
        # the 3**-n term lies beyond R_target=2.5 and is left in the residual
        extract_series(_seq([(2, (1,)), (3, (1,))], 60), R_target=4, rank=1)


def test_certify():
    s = AsymptoticSeries([(2, (1,))])
    assert certify_residual([2.0 ** -n for n in range(30)], s) == 0.0
    x = _seq([(2, (1,)), (3, (1,))], 60)
    rate = certify_residual(x, s)
    assert rate == pytest.approx(1 / 3, rel=0.05)


def test_certify_noise_floor():
    rng = np.random.default_rng(1)
    x = [2.0 ** -n + 1e-12 * rng.standard_normal() for n in range(60)]
    rate = certify_residual(x, AsymptoticSeries([(2, (1,))]))
    # reported, not raised: roughly eps**(1/n) on the window
    assert 0.5 < rate < 1


def test_poles_simple():
    c = [2.0 ** -k for k in range(60)]
    m = poles_from_taylor(PowerSeriesModel(np.array(c), 0.0, 2.0, 53, "f"), 4)
    assert len(m.poles) == 1
    (p, o), = m.poles.points
    assert abs(p - 2) < 1e-10 and o == 1
    assert complex(m.principal[0][0]) == pytest.approx(1.0)


def test_poles_double():
    # 1/(1 - z/3)**2 -> one order-two pole
    c = [(k + 1) * 3.0 ** -k for k in range(80)]
    m = poles_from_taylor(c, 5, prec=128)
    assert [(round(p.real, 8), o) for p, o in m.poles.points] == [(3.0, 2)]


def test_poles_s(example_alpha):
    m = poles_from_taylor(s_series(example_alpha, 100, prec=256), 3)
    assert [(round(p.real, 10), o) for p, o in m.poles.points] == [(2.0, 1), (-2.0, 1)] or \
        sorted(p.real for p in m.poles.locations) == pytest.approx([-2, 2], rel=1e-10)
    assert m.radius >= 3


def test_poles_q(example_alpha):
    m = poles_from_taylor(q_series(example_alpha, 120, prec=300), 6)
    locs = sorted(p.real for p in m.poles.locations)
    assert locs == pytest.approx([-4, 4], rel=1e-6)
    assert all(o == 1 for _, o in m.poles.points)


def test_poles_b(example_J):
    m = poles_from_taylor(b_series(example_J, 120, prec=300), 5)
    assert sorted(p.real for p in m.poles.locations) == pytest.approx([-4, -2, 2, 4], rel=1e-8)
    # subtracting the principal parts leaves a series analytic beyond the cutoff
    assert m.radius >= 5


def test_poles_u_frozen(example_u_model):
    m = example_u_model
    locs = [p.real for p in m.poles.locations]
    assert sorted(locs) == pytest.approx([-8, -2, 2, 8], rel=1e-6)
    for (p, o), pp in zip(m.poles.points, m.principal):
        want = U_PP_2 if abs(abs(p) - 2) < 0.1 else U_PP_8
        assert o == 1 and complex(pp[0]).real == pytest.approx(want, rel=1e-6)


def test_poles_vs_extract(example_J):
    # pole orders equal deg p + 1 of the coefficient asymptotics
    c = b_series(example_J, 100, prec=300)
    m = poles_from_taylor(c, 5)
    s = extract_series(list(c.coeffs[1:]), R_target=5, prec=300, start=1)
    assert sorted(round(p.real, 6) for p in m.poles.locations) == sorted(round(complex(t.mu).real, 6) for t in s.terms)
    assert sorted(o for _, o in m.poles.points) == sorted(len(t.poly) for t in s.terms)


def test_poles_json(example_alpha):
    j = poles_from_taylor(s_series(example_alpha, 100, prec=256), 3).to_json()
    assert set(j) == {"poles", "entire", "radius"}
    assert {"z", "order", "principal"} <= set(j["poles"][0])


def test_resolvability():
    assert resolvable_length(1e-8, 2, 4) == math.ceil(2 * math.log(1e-8) / math.log(0.5)) + 10
    assert resolvable_length(1e-8, 4, 4) == math.inf
    # a pole at 3.9 against one at 4 cannot be resolved from 40 coefficients
    c = [3.9 ** -k + 4.0 ** -k for k in range(40)]
    with pytest.raises(ConvergenceError):
        poles_from_taylor(c, 3.95)


def test_coefficient_radius():
    r, se, n = coefficient_radius([3.0 ** -k for k in range(40)])
    assert r == pytest.approx(3, rel=1e-10) and n >= 8
    assert coefficient_radius([1.0, 0.5] + [0.0] * 10)[0] == math.inf


def test_extract_ignores_global_precision():
    # non-dyadic data: any silent rounding to the global 53 bits shows up
    with mpmath.workprec(128):
        mu = 1 + mpmath.sqrt(3)
        x = [mpmath.sqrt(2) * mu ** -n for n in range(60)]
    s = extract_series(x, R_target=10)
    with mpmath.workprec(128):
        assert abs(s.terms[0].mu - mu) < mpmath.mpf(10) ** -30
        assert abs(s.terms[0].poly[0] - mpmath.sqrt(2)) < mpmath.mpf(10) ** -28
