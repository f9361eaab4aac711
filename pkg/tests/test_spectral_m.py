import math

import numpy as np
import pytest

from conftest import M_HALF_EXAMPLE, disk_grid
from jostlab.core import InputError, JacobiParameters, PoleError, RegionError
from jostlab.jacobi_gc import jost_u
from jostlab.spectral_m import (DerivedModel, PerturbedWeightModel, SpectralModel, classify_zero, eigen_data,
                                m_continue, m_eval, pole_sets, regular_level, strip)

M_ONEHALF_EXAMPLE = -0.4526008857960499  # continuation to z = 1.5


def resolvent_m(params, z, N=120):
    """``<d1, ((z + 1/z) - J_N)**-1 d1>`` on the N x N truncation."""
    r = params.realize(N)
    J = np.diag(np.asarray(r.b, float)) + np.diag(np.asarray(r.a, float)[:-1], 1) + np.diag(np.asarray(r.a, float)[:-1], -1)
    e1 = np.zeros(N)
    e1[0] = 1
    return np.linalg.solve((z + 1 / z) * np.eye(N) - J, e1.astype(complex))[0]


def rank_one(beta):
    return JacobiParameters.from_lists(b=[beta])


def test_m_free():
    z = disk_grid()
    assert np.max(np.abs(m_eval(JacobiParameters.free(), z) - z)) < 1e-14


@pytest.mark.parametrize("beta", [0.3, -0.6, 0.9])
def test_m_rank_one(beta):
    z = disk_grid()
    assert np.max(np.abs(m_eval(rank_one(beta), z) - z / (1 - beta * z))) < 1e-12


def test_m_resolvent(example_J):
    for z in (0.5, 0.3 + 0.6j, -0.85, 0.9j):
        assert abs(m_eval(example_J, z) - resolvent_m(example_J, z)) < 1e-10
    assert m_eval(example_J, 0.5).real == pytest.approx(M_HALF_EXAMPLE, abs=1e-14)


def test_m_resolvent_random():
    rng = np.random.default_rng(7)
    p = JacobiParameters.from_lists(a=list(1 + 0.3 * rng.uniform(-1, 1, 6)), b=list(rng.uniform(-0.5, 0.5, 6)))
    for z in disk_grid(0.9, 12):
        assert abs(m_eval(p, z) - resolvent_m(p, z, 200)) < 1e-10


def test_m_outside(example_J):
    v = m_eval(example_J, 1.5)
    assert v.real == pytest.approx(M_ONEHALF_EXAMPLE, abs=1e-12)
    with pytest.raises(RegionError):
        m_eval(example_J, 2.5)
    with pytest.raises(InputError):
        m_eval(example_J, 0.0)


def test_m_derivative(example_J):
    z0, h = 0.4 + 0.1j, 1e-6
    v, d = m_eval(example_J, z0, derivative=True)
    assert abs(d - (m_eval(example_J, z0 + h) - m_eval(example_J, z0 - h)) / (2 * h)) < 1e-8


def test_m_continue_closed_forms():
    p = rank_one(2.5)
    assert m_continue(p, lambda w: 1 - 2.5 * w, 2.5) == pytest.approx(-10 / 21, abs=1e-13)
    q = rank_one(0.4)
    for z in (1.3, 2 + 1j, -3.0):
        assert m_continue(q, lambda w: 1 - 0.4 * w, z) == pytest.approx(z / (1 - 0.4 * z), abs=1e-12)
    assert m_continue(JacobiParameters.free(), lambda w: 1.0 + 0 * w, 1.7) == pytest.approx(1.7)


def test_m_continue_pole():
    q = rank_one(0.4)
    with pytest.raises(PoleError):
        m_continue(q, lambda w: 1 - 0.4 * w, 2.5)


@pytest.mark.parametrize("fixture", ["free", "rank-one", "example"])
def test_identity_45(fixture, example_J):
    p = {"free": JacobiParameters.free(), "rank-one": rank_one(0.7), "example": example_J}[fixture]
    rng = np.random.default_rng(3)
    z = rng.uniform(1.05, 1.5, 20) * np.exp(2j * np.pi * rng.uniform(size=20))
    u_in = jost_u(p, 1 / z)
    lhs = (m_eval(p, z) - m_eval(p, 1 / z)) * jost_u(p, z) * u_in
    assert np.max(np.abs(lhs - (z - 1 / z))) < 1e-9


def test_strip_rank_one():
    f = strip(rank_one(0.3), 1)
    assert f.params.is_free_tail and f.params.support == 0
    z = disk_grid(0.9, 10)
    assert np.allclose(f.u(z), 1.0) and np.allclose(f.m(z), z)


def test_strip_free():
    assert strip(JacobiParameters.free(), 3).params.support == 0


def test_strip_example(example_J):
    f = strip(example_J, 2)
    assert f.identity_residual < 1e-10
    r0 = example_J.realize(6, 200)
    r2 = f.params.realize(4, 200)
    assert all(abs(x - y) < 1e-60 for x, y in zip(r0.a2m1[2:], r2.a2m1))
    with pytest.raises(InputError):
        strip(example_J, -1)


def test_eigen_oracle():
    d = eigen_data(rank_one(2.5))
    (e,) = d.eigen_pairs
    assert e.z0 == pytest.approx(0.4, abs=1e-10)
    assert e.E0 == pytest.approx(2.9, abs=1e-10)
    assert e.weight == pytest.approx(0.84, abs=1e-10)
    assert e.canonical
    assert e.residue == pytest.approx(-4 / 25, abs=1e-12)
    j = d.to_json()
    assert j["eigen"][0]["expected_opposite_sign"] == pytest.approx(4 / 25)


@pytest.mark.parametrize("beta", [0.0, 0.5, -0.9])
def test_eigen_none(beta):
    d = eigen_data(rank_one(beta))
    assert d.eigen_pairs == () and not d.resonance_at_plus1 and not d.resonance_at_minus1


def test_eigen_negative():
    (e,) = eigen_data(rank_one(-2.5)).eigen_pairs
    assert e.z0 == pytest.approx(-0.4, abs=1e-10) and e.E0 == pytest.approx(-2.9, abs=1e-10)
    assert e.weight == pytest.approx(0.84, abs=1e-10)


def test_resonance():
    d = eigen_data(rank_one(1.0))
    assert d.resonance_at_plus1 and d.eigen_pairs == ()


def test_classify_canonical():
    c = classify_zero(rank_one(2.5), 0.4)
    assert c["canonical"] and c["residue"] == pytest.approx(-0.16) and c["expected"] == pytest.approx(-0.16)
    with pytest.raises(InputError):
        classify_zero(rank_one(2.5), 1.2)


def test_perturbed_weight():
    base = SpectralModel(rank_one(2.5))
    pm = PerturbedWeightModel(base, 0.4, 1.1)
    c = classify_zero(pm, 0.4)
    assert not c["canonical"]
    # the residue moves with the weight while the canonical value only rescales
    assert c["residue"] / c["expected"] == pytest.approx(1.1, rel=1e-9)
    # still a probability measure: M(z) ~ z at the origin
    assert complex(pm.m(np.array([1e-6]))[0]) / 1e-6 == pytest.approx(1, rel=1e-5)


def test_pole_at_reciprocal_is_noncanonical():
    # u with a zero at 0.4 and a pole at 1/0.4
    u = lambda z: (1 - 2.5 * np.asarray(z)) / (1 - np.asarray(z) / 2.5)
    m = lambda z: np.asarray(z) / (1 - 2.5 * np.asarray(z))
    dm = DerivedModel(u, m, None, None, 2.6, 8.0, 1e-12)
    c = classify_zero(dm, 0.4)
    assert not c["canonical"] and c["reason"] == "1/z0 is a pole of u"


def test_pole_sets_empty():
    for p in (JacobiParameters.free(), rank_one(2.5)):
        P1, P2, P = pole_sets(p)
        assert len(P1) == len(P2) == len(P) == 0


@pytest.mark.slow
def test_pole_sets_noncanonical_and_prop44():
    pm = PerturbedWeightModel(SpectralModel(rank_one(2.5)), 0.4, 1.1)
    P1, P2, P = pole_sets(pm)
    assert len(P1) == 0 and [round(p.real, 8) for p in P2.locations] == [2.5]
    # a noncanonical zero reappears as a pole of the stripped Jost function
    Q1, _, _ = pole_sets(pm.stripped())
    assert any(abs(p - 2.5) < 1e-6 * 2.5 for p in Q1.locations)


@pytest.mark.slow
def test_pole_sets_example(example_J):
    P1, P2, P = pole_sets(example_J)
    assert sorted(p.real for p in P.locations) == pytest.approx([-8, -2, 2, 8], rel=1e-6)
    assert len(P2) == 0


def test_regular_level():
    assert regular_level(JacobiParameters.free()) == 0
    assert regular_level(rank_one(2.5)) == 1
    assert regular_level(JacobiParameters.from_lists(b=[0.5, 2.5])) == 2
