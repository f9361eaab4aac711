"""Laurent coefficients on circles and empirical analyticity radii.

The coefficients of ``f`` on ``|z| = r`` are read off an FFT of equispaced
samples.  On an annulus where ``f`` is analytic they do not depend on ``r``;
the decay of ``|c_k|`` gives the outer (``k -> +inf``) or inner
(``k -> -inf``) radius of the annulus.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from jostlab.asymptotics import coefficient_radius
from jostlab.core import InputError, JacobiParameters, JostlabError, NumericalError, VerblunskyCoefficients

EPS = np.finfo(float).eps
GRID_BOUND = 50.0
BAND = 0.05


@dataclass(frozen=True, eq=False)
class LaurentProfile:
    """Coefficients ``c_k(r)`` of one function on a grid of circles.

    ``coeffs[i]`` holds ``c_k(radii[i])`` in FFT order (``k = 0..n/2-1`` then
    ``-n/2..-1``); ``scale[i]`` is ``max |f|`` on that circle, which sets the
    roundoff floor ``noise(r, k) = 64 eps scale / r**k``.
    """

    radii: np.ndarray
    coeffs: np.ndarray
    scale: np.ndarray
    n_points: int

    @property
    def ks(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.n_points) * self.n_points).astype(int)

    def coeff(self, k: int) -> np.ndarray:
        return self.coeffs[:, k % self.n_points]

    def noise(self, i: int) -> np.ndarray:
        r = self.radii[i]
        with np.errstate(over="ignore", invalid="ignore"):
            out = 64 * EPS * self.scale[i] * np.power(r, -self.ks.astype(float))
        return np.nan_to_num(out, nan=np.inf)

    def side(self, i: int, side: str = "outer"):
        """``(c, noise)`` for ``k = 0..n/2-1`` (outer) or ``k = 1..n/2`` of
        ``c_{-k}`` (inner) on circle ``i``."""
        h = self.n_points // 2
        c, nz = self.coeffs[i], self.noise(i)
        if side == "outer":
            return c[:h], nz[:h]
        idx = (-np.arange(1, h + 1)) % self.n_points
        return np.concatenate([[c[0]], c[idx]]), np.concatenate([[nz[0]], nz[idx]])

    @property
    def aliasing(self) -> np.ndarray:
        """Per-circle aliasing estimate: normalized magnitude near the Nyquist index."""
        h = self.n_points // 2
        with np.errstate(over="ignore", invalid="ignore"):
            raw = np.nan_to_num(self.coeffs * np.power.outer(self.radii, self.ks.astype(float)))
        return np.maximum(np.abs(raw[:, h - 1]), np.abs(raw[:, h]))

    def consistency(self) -> np.ndarray:
        """``max_r |c_k(r) - c_k(r_mid)|`` per ``k``, zeroed where every
        circle is at its noise floor."""
        mid = len(self.radii) // 2
        dev = np.max(np.abs(self.coeffs - self.coeffs[mid]), axis=0)
        floor = np.max(np.stack([self.noise(i) for i in range(len(self.radii))]), axis=0)
        dev[np.all(np.abs(self.coeffs) <= floor, axis=0)] = 0.0
        return dev

    def is_consistent(self, tol: float, k_max: int = 64) -> bool:
        mid = len(self.radii) // 2
        floor = np.max(np.stack([self.noise(i) for i in range(len(self.radii))]), axis=0)
        dev = np.max(np.abs(self.coeffs - self.coeffs[mid]), axis=0)
        sel = np.abs(self.ks) <= k_max
        return bool(np.all(dev[sel] <= tol * np.maximum(1, np.abs(self.coeffs[mid][sel])) + 10 * floor[sel]))

    def to_csv(self) -> str:
        """Plot data: ``radius,k,log_abs_c``."""
        buf = io.StringIO()
        buf.write("radius,k,log_abs_c\n")
        order = np.argsort(self.ks)
        for i, r in enumerate(self.radii):
            for j in order:
                a = abs(self.coeffs[i, j])
                buf.write(f"{r!r},{int(self.ks[j])},{(math.log(a) if a > 0 else -math.inf)!r}\n")
        return buf.getvalue()

    def to_json(self, k_max: int = 32) -> dict:
        out = {"radii": self.radii.tolist(), "n_points": self.n_points, "coefficients": {}}
        for k in range(-k_max, k_max + 1):
            c = self.coeff(k)
            out["coefficients"][str(k)] = [[float(v.real), float(v.imag)] for v in c]
        return out


def _circle(f, r, n):
    theta = 2 * np.pi * np.arange(n) / n
    vals = np.asarray(f(r * np.exp(1j * theta)), dtype=complex)
    if vals.shape != (n,) or not np.all(np.isfinite(vals)):
        raise ZeroDivisionError("non-finite sample")
    return vals


def laurent_profile(f, r_min, r_max, n_radii=8, n_points=4096) -> LaurentProfile:
    """FFT Laurent coefficients of ``f`` on ``n_radii`` geometric circles.

    ``f`` takes an array of points.  A circle whose evaluation fails (a pole
    on it) is perturbed outward by 0.1% and retried once.

    Examples
    --------
    >>> p = laurent_profile(lambda z: 1 / (1 - z / 2), 0.5, 1.5, 4, 256)
    >>> float(abs(p.coeff(3)[0] - 0.125)) < 1e-14
    True
    """
    if n_points < 256 or n_points & (n_points - 1):
        raise InputError("n_points must be a power of two >= 256", field="n_points")
    if not 0 < r_min <= r_max:
        raise InputError("need 0 < r_min <= r_max", field="r_min")
    radii = np.geomspace(r_min, r_max, n_radii) if n_radii > 1 else np.array([float(r_min)])
    rows, scales, used = [], [], []
    ks = np.rint(np.fft.fftfreq(n_points) * n_points)
    for r in radii:
        try:
            vals = _circle(f, r, n_points)
        except (ZeroDivisionError, FloatingPointError, JostlabError):
            r = r * 1.001
            try:
                vals = _circle(f, r, n_points)
            except (ZeroDivisionError, FloatingPointError, JostlabError) as exc:
                raise NumericalError(f"evaluation failed on |z| = {r:.6g}: {exc}") from exc
        c = np.fft.fft(vals) / n_points
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            row = c * np.power(r, -ks)
        # 0 * inf where a coefficient is exactly zero far out in k
        rows.append(np.nan_to_num(row, nan=0.0))
        scales.append(float(np.max(np.abs(vals))))
        used.append(r)
    return LaurentProfile(np.array(used), np.array(rows), np.array(scales), n_points)


@dataclass(frozen=True)
class RadiusEstimate:
    radius: float
    stderr: float
    usable: int
    at_bound: bool
    bound: float

    def to_json(self) -> dict:
        return {"radius": self.radius if math.isfinite(self.radius) else None,
                "stderr": self.stderr if math.isfinite(self.stderr) else None,
                "usable": self.usable, "at_bound": self.at_bound, "bound": self.bound}


def radius_estimate(profile: LaurentProfile, side: str = "outer", circle=None, min_usable=16) -> RadiusEstimate:
    """Radius from the log-slope of ``|c_k|`` on one circle.

    The outer estimate uses the largest circle and the inner one the smallest
    (lowest roundoff floor).  When fewer than ``min_usable`` coefficients stand
    above the floor the function is reported as analytic up to the grid bound.

    Examples
    --------
    >>> p = laurent_profile(lambda z: 1 / (1 - z / 2), 0.5, 1.5, 4, 256)
    >>> round(radius_estimate(p).radius, 3)
    2.0
    """
    if side not in ("outer", "inner"):
        raise InputError("side must be 'outer' or 'inner'", field="side")
    i = (len(profile.radii) - 1 if side == "outer" else 0) if circle is None else circle
    c, noise = profile.side(i, side)
    radius, se, usable = coefficient_radius(c, noise, min_usable=min_usable, contiguous=True)
    r = float(profile.radii[i])
    if side == "inner":
        radius = 1 / radius if math.isfinite(radius) else 0.0
        at_bound = radius == 0.0
        bound = r
    else:
        at_bound = not math.isfinite(radius)
        bound = r
    return RadiusEstimate(float(radius), float(se), int(usable), bool(at_bound), bound)


def profile_from_coefficients(c, radius=1.0) -> LaurentProfile:
    """Wrap given Taylor coefficients as a one-circle profile."""
    c = np.asarray(c, dtype=complex)
    n = 1 << max(8, int(math.ceil(math.log2(max(2 * len(c), 2)))))
    row = np.zeros(n, dtype=complex)
    row[:len(c)] = c
    scale = float(np.max(np.abs(c) * radius ** np.arange(len(c)))) if len(c) else 0.0
    return LaurentProfile(np.array([float(radius)]), row[None, :], np.array([scale]), n)


# ---------------------------------------------------------------------------
# theorem checks


def _close(est: RadiusEstimate, target: float, band: float) -> bool:
    if not math.isfinite(target):
        return est.at_bound or est.radius >= est.bound
    return abs(est.radius - target) <= band * target


def _at_least(est: RadiusEstimate, target: float, band: float) -> bool:
    if est.at_bound:
        return True
    return est.radius >= target * (1 - band)


def _window(R, power, bound):
    top = min(R ** power, bound) if math.isfinite(R) else bound
    return top


def theorem15_check(params: JacobiParameters, tol=BAND, n_points=4096, n_radii=8, bound=GRID_BOUND,
                    model=None, sharp=None, return_profiles=False):
    """Outer radii of ``B`` and of ``(1 - z**2) u(z) + z**2 u(1/z) B(z)``.

    Expected: ``B`` at ``R_eff`` (within ``tol``) and the combination at least
    ``R_eff**2``; with ``sharp=True`` the combination must sit at ``R_eff**2``.
    ``u`` beyond ``R_eff`` comes from its meromorphic model.  With
    ``return_profiles`` the Laurent profiles are returned alongside the report.
    """
    from jostlab.jacobi_gc import b_eval
    from jostlab.spectral_m import SpectralModel

    R = params.decay_radius
    top_b = _window(R, 1, bound)
    top_c = _window(R, 2, bound)
    if model is None:
        model = SpectralModel(params, cutoff=max(8.0, min(top_c, bound)))

    def B(z):
        return np.asarray(b_eval(params, z), dtype=complex)

    def combo(z):
        return (1 - z * z) * model.u(z) + z * z * model.u(1 / z) * B(z)

    pb = laurent_profile(B, 0.5 * top_b, 0.9 * top_b, n_radii, n_points)
    pc = laurent_profile(combo, 1.05, 0.9 * top_c, n_radii, n_points)
    eb, ec = radius_estimate(pb), radius_estimate(pc)
    ok_b = _close(eb, R, tol)
    ok_c = _close(ec, R * R, tol) if sharp else _at_least(ec, R * R if math.isfinite(R) else math.inf, tol)
    rep = {
        "target": "thm15",
        "check": "thm1.5",
        "radii": {"B": eb.to_json(), "combo": ec.to_json()},
        "expected": {"B": R if math.isfinite(R) else None, "combo": R * R if math.isfinite(R) else None,
                     "combo_sharp": bool(sharp)},
        "pass": bool(ok_b and ok_c),
        "margins": {"B": (eb.radius / R - 1) if math.isfinite(R) and math.isfinite(eb.radius) else None,
                    "combo": (ec.radius / (R * R) - 1) if math.isfinite(R) and math.isfinite(ec.radius) else None},
        "tol": tol,
    }
    return (rep, {"B": pb, "combo": pc}) if return_profiles else rep


def theorem13_check(alphas: VerblunskyCoefficients, tol=BAND, n_points=4096, n_radii=8, bound=GRID_BOUND,
                    n_coeffs=200, return_profiles=False):
    """Outer radii of ``S``, ``r - S`` and ``Q``.

    Expected: ``S`` at ``R``, ``r - S`` at least ``min(R**3, bound)``, ``Q`` at
    least ``R**2``.  ``D**-1`` beyond ``R`` comes from a meromorphic model.
    """
    from jostlab.asymptotics import MeromorphicModel, poles_from_taylor
    from jostlab.core import PoleSet
    from jostlab.opuc import d_inverse, q_series, s_eval

    R = alphas.decay_radius
    top_s = _window(R, 1, bound)
    top_r = _window(R, 3, bound)

    if alphas.is_free_tail:
        dser = d_inverse(alphas, N=max(alphas.support, 1) + 1, prec=None)
        dmodel = MeromorphicModel(PoleSet((), math.inf), (), np.array(dser.coeffs, dtype=complex), math.inf, 53, "D^-1")
    else:
        from jostlab.jacobi_gc import series_precision
        N = n_coeffs
        dser = d_inverse(alphas, N=N, prec=series_precision(N, top_r))
        dmodel = poles_from_taylor(dser, top_r, tol=1e-8)

    def S(z):
        return np.asarray(s_eval(alphas, z), dtype=complex)

    def r_minus_s(z):
        return dmodel(z) / dmodel(1 / z) - S(z)

    ps = laurent_profile(S, 0.5 * top_s, 0.9 * top_s, n_radii, n_points)
    pr = laurent_profile(r_minus_s, 1.05, 0.9 * top_r, n_radii, n_points)
    es, er = radius_estimate(ps), radius_estimate(pr)
    q = q_series(alphas, n_coeffs)
    qc = np.asarray(q.coeffs, dtype=float)
    scale = float(np.max(np.abs(qc))) if qc.size else 0.0
    qr, qse, qn = coefficient_radius(qc, 1e-300 + 0 * scale, min_usable=8)
    eq = RadiusEstimate(float(qr), float(qse), int(qn), not math.isfinite(qr), float(n_coeffs))
    expect_r = min(R ** 3, bound) if math.isfinite(R) else math.inf
    ok = _close(es, R, tol) and _at_least(er, expect_r, tol) and _at_least(eq, R * R, tol)
    rep = {
        "target": "thm13",
        "check": "thm1.3",
        "radii": {"S": es.to_json(), "r_minus_S": er.to_json(), "Q": eq.to_json()},
        "expected": {"S": R if math.isfinite(R) else None, "r_minus_S": expect_r if math.isfinite(expect_r) else None,
                     "Q": R * R if math.isfinite(R) else None},
        "pass": bool(ok),
        "margins": {"S": (es.radius / R - 1) if math.isfinite(R) and math.isfinite(es.radius) else None,
                    "Q": (eq.radius / (R * R) - 1) if math.isfinite(R) and math.isfinite(eq.radius) else None},
        "tol": tol,
    }
    return (rep, {"S": ps, "r_minus_S": pr}) if return_profiles else rep
