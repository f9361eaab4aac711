import math

import numpy as np
import pytest

from jostlab.annulus_check import (laurent_profile, profile_from_coefficients, radius_estimate, theorem13_check,
                                   theorem15_check)
from jostlab.core import InputError, JacobiParameters, VerblunskyCoefficients
from jostlab.jacobi_gc import b_eval


def test_profile_geometric():
    p = laurent_profile(lambda z: 1 / (1 - z / 2), 0.5, 1.5, 4, 256)
    for k in range(20):
        assert np.allclose(p.coeff(k), 2.0 ** -k, atol=1e-13)
    assert p.is_consistent(1e-10)
    assert radius_estimate(p).radius == pytest.approx(2, rel=0.02)


def test_profile_laurent_polynomial():
    p = laurent_profile(lambda z: z + 1 / z, 0.5, 2, 4, 256)
    assert np.allclose(p.coeff(1), 1) and np.allclose(p.coeff(-1), 1)
    # everything else sits at the per-circle roundoff floor eps * max|f| / r**k
    mask = ~np.isin(p.ks, [1, -1])
    for i in range(len(p.radii)):
        assert np.all(np.abs(p.coeffs[i][mask]) <= p.noise(i)[mask])


def test_profile_polynomial_combo():
    beta = 0.4
    F = lambda z: (1 - z * z) * (1 - beta * z) + z * z * (1 - beta / z) * (1 - beta * z)
    p = laurent_profile(F, 1.05, 10, 8, 256)
    assert p.is_consistent(1e-9)
    est = radius_estimate(p)
    assert est.at_bound


def test_pole_on_circle_retried():
    p = laurent_profile(lambda z: 1 / (z - 1), 0.5, 1.0, 3, 256)
    assert p.radii[-1] > 1.0


def test_noise_truncation():
    rng = np.random.default_rng(0)
    c = 4.0 ** -np.arange(60) + 1e-14 * rng.standard_normal(60)
    est = radius_estimate(profile_from_coefficients(c))
    assert est.radius == pytest.approx(4, rel=0.05)
    assert est.usable < 60


def test_radius_rejects_side():
    p = laurent_profile(lambda z: 1 / (1 - z / 2), 0.5, 1.5, 2, 256)
    with pytest.raises(InputError):
        radius_estimate(p, "middle")


def test_inner_radius():
    p = laurent_profile(lambda z: 1 / (1 - 0.5 / z), 0.8, 2, 4, 256)
    assert radius_estimate(p, "inner").radius == pytest.approx(0.5, rel=0.02)


def test_b_example(example_J):
    p = laurent_profile(lambda z: b_eval(example_J, z), 1.0, 1.8, 8, 4096)
    assert radius_estimate(p).radius == pytest.approx(2, rel=0.05)


def test_doubling_points(example_J):
    f = lambda z: b_eval(example_J, z)
    p1 = laurent_profile(f, 1.0, 1.8, 2, 1024)
    p2 = laurent_profile(f, 1.0, 1.8, 2, 2048)
    for k in range(40):
        assert np.max(np.abs(p1.coeff(k) - p2.coeff(k))) < 1e-12


def test_csv_json():
    p = laurent_profile(lambda z: 1 / (1 - z / 2), 0.5, 1.5, 2, 256)
    lines = p.to_csv().splitlines()
    assert lines[0] == "radius,k,log_abs_c" and len(lines) == 1 + 2 * 256
    assert set(p.to_json(4)["coefficients"]) == {str(k) for k in range(-4, 5)}


def test_thm15_free_and_rank_one():
    r = theorem15_check(JacobiParameters.free())
    assert r["pass"] and r["radii"]["combo"]["at_bound"]
    r = theorem15_check(JacobiParameters.from_lists(b=[0.4]))
    assert r["pass"] and r["radii"]["B"]["at_bound"] and r["radii"]["combo"]["at_bound"]


@pytest.mark.slow
def test_thm15_example(example_J):
    r = theorem15_check(example_J, sharp=True)
    assert r["pass"]
    assert r["radii"]["B"]["radius"] == pytest.approx(2, rel=0.05)
    assert r["radii"]["combo"]["radius"] == pytest.approx(4, rel=0.05)


def test_thm13_free_and_alpha0():
    r = theorem13_check(VerblunskyCoefficients(()))
    assert r["pass"]
    r = theorem13_check(VerblunskyCoefficients((0.3,)))
    assert r["pass"] and r["radii"]["S"]["at_bound"] and r["radii"]["r_minus_S"]["at_bound"]


@pytest.mark.slow
def test_thm13_example(example_alpha):
    r = theorem13_check(example_alpha)
    assert r["pass"]
    assert r["radii"]["S"]["radius"] == pytest.approx(2, rel=0.05)
    assert r["radii"]["Q"]["radius"] == pytest.approx(4, rel=0.05)
    assert r["radii"]["r_minus_S"]["radius"] >= 8 * 0.95
