"""Szegő recursion, ``S``, ``D**-1``, ``r`` and the second Szegő map.

Real Verblunsky coefficients only, so ``Phi_n^*`` is the reversed coefficient
list of ``Phi_n`` and ``r(z) = D**-1(z) / D**-1(1/z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from jostlab import _numeric as nm
from jostlab.core import (AsymptoticSeries, ConvergenceError, InputError, JacobiParameters,
                          NumericalError, PoleError, PowerSeriesModel, RegionError, SeriesTerm,
                          VerblunskyCoefficients)

N_ITER_MAX = 200_000


@dataclass(frozen=True, eq=False)
class SzegoState:
    """``Phi_n``, ``Phi_n^*`` (lowest degree first) and ``kappa_n``."""

    n: int
    Phi: np.ndarray
    PhiStar: np.ndarray
    kappa: object


def szego_iterate(alphas: VerblunskyCoefficients, N: int, prec=None) -> list:
    """States ``0..N`` of ``Phi_{n+1} = z Phi_n - alpha_n Phi_n^*``.

    Examples
    --------
    >>> s = szego_iterate(VerblunskyCoefficients((0.0, 0.5)), 2)
    >>> s[2].Phi.tolist(), s[2].PhiStar.tolist()
    ([-0.5, 0.0, 1.0], [1.0, 0.0, -0.5])
    """
    if N < 0:
        raise InputError("N must be nonnegative", field="N")
    with nm.working(prec):
        Phi = nm.as_array([1], prec)
        Star = nm.as_array([1], prec)
        kappa = nm.one(prec)
        states = [SzegoState(0, Phi, Star, kappa)]
        alpha = alphas.realize(N, prec) if N else []
        sqrt = mpmath.sqrt if nm.is_extended(prec) else math.sqrt
        for n in range(N):
            a = alpha[n]
            zPhi = np.concatenate([nm.zeros(1, prec), Phi])
            Star_ext = np.concatenate([Star, nm.zeros(1, prec)])
            Phi, Star = zPhi - a * Star_ext, Star_ext - a * zPhi
            kappa = kappa / sqrt(1 - a * a)
            bad = not all(mpmath.isfinite(v) for v in Phi) if Phi.dtype == object else not np.all(np.isfinite(Phi))
            if bad:
                raise NumericalError("Szegő recursion overflowed the working precision", index=n + 1)
            states.append(SzegoState(n + 1, Phi, Star, kappa))
    return states


def s_series(alphas: VerblunskyCoefficients, N: int, prec=None) -> PowerSeriesModel:
    """Taylor coefficients of ``S(z) = 1 - sum_{j>=1} alpha_{j-1} z**j``."""
    if N < 1:
        raise InputError("N must be at least 1", field="N")
    with nm.working(prec):
        alpha = alphas.realize(N, prec)
        c = nm.zeros(N + 1, prec)
        c[0] = nm.one(prec)
        c[1:] = 0 - alpha
    return PowerSeriesModel(c, 0.0, alphas.decay_radius, prec if nm.is_extended(prec) else nm.DOUBLE_PREC, "S")


def _head_correction(alphas: VerblunskyCoefficients, z, prec):
    """``sum_{n<h} (alpha_n - model_n) z**n`` and the model's ``n = 0`` term."""
    h = len(alphas.head)
    model = None if alphas.is_free_tail else alphas.tail
    gen = model.realize(max(h, 1), prec=prec) if model is not None else None
    acc = 0 * z
    zn = 1 + 0 * z
    for n in range(h):
        acc = acc + (nm.scalar(alphas.head[n], prec) - (gen[n] if gen is not None else 0)) * zn
        zn = zn * z
    if model is not None:
        acc = acc + gen[0]
    return acc


def s_eval(alphas: VerblunskyCoefficients, z, prec=None):
    """``S(z)`` continued meromorphically through the closed-form tail sum."""
    with nm.working(prec):
        z = mpmath.mpc(z) if nm.is_extended(prec) else np.asarray(z, dtype=complex)
        total = _head_correction(alphas, z, prec)
        if not alphas.is_free_tail:
            total = total + alphas.tail.generating_sum(z, prec)
        return 1 - z * total


def _d_values(alphas, z, tol, prec, n_max=N_ITER_MAX):
    """``lim kappa_n Phi_n^*(z)`` for ``|z| < R``; the limit is a telescoping sum
    with increments ``alpha_n z Phi_n(z) = O((max(1,|z|)/R)**n)``."""
    ext = nm.is_extended(prec)
    R = alphas.decay_radius
    with nm.working(prec):
        if ext:
            z = mpmath.mpc(z)
            zmax = float(abs(z))
            Phi, Star = mpmath.mpc(1), mpmath.mpc(1)

            def size(v):
                return float(abs(v))
        else:
            z = np.asarray(z, dtype=complex)
            zmax = float(np.max(np.abs(z))) if z.size else 0.0
            Phi, Star = np.ones(z.shape, complex), np.ones(z.shape, complex)

            def size(v):
                return float(np.max(np.abs(v))) if np.size(v) else 0.0
        if not zmax < R:
            raise RegionError(f"|z| = {zmax:.6g} is outside the certified radius {R:.6g}")
        log_kappa = mpmath.mpf(0) if ext else 0.0
        if alphas.is_free_tail:
            n_stop = len(alphas.head)
            chunk = max(n_stop, 1)
        else:
            n_stop = None
            chunk = max(64, len(alphas.head) + 16)
        alpha = alphas.realize(chunk, prec)
        q = max(zmax, 1.0) / R
        log_q = math.log(q) if q > 0 else -math.inf
        recent = []
        n = 0
        while n_stop is None or n < n_stop:
            if n >= n_max:
                raise ConvergenceError(f"D^-1 limit did not reach tol={tol:g}", index=n)
            if n >= len(alpha):
                chunk *= 2
                alpha = alphas.realize(chunk, prec)
            a = alpha[n]
            n += 1
            inc = a * z * Phi
            Phi, Star = z * Phi - a * Star, Star - inc
            la = (-mpmath.log1p(-a * a) if ext else -math.log1p(-float(a) ** 2)) / 2
            log_kappa = log_kappa + la
            if n_stop is not None or n <= len(alphas.head):
                continue
            s = max(size(inc), size(Star) * abs(float(la)))
            if not math.isfinite(s):
                raise NumericalError("D^-1 limit overflowed", index=n)
            recent = (recent + [(n, s)])[-3:]
            if len(recent) < 3:
                continue
            log_pref = max((math.log(v) - m * log_q) if v > 0 else -math.inf for m, v in recent)
            if log_pref == -math.inf:
                break
            log_tail = log_pref + (n + 1) * log_q - math.log1p(-q)
            if log_tail < math.log(tol / 10):
                break
        kappa = mpmath.exp(log_kappa) if ext else math.exp(log_kappa)
        return Star * kappa


def d_inverse(alphas: VerblunskyCoefficients, z=None, N=None, tol=1e-13, prec=None, abs_tol=None):
    """``D(z)**-1`` at a point (``z``) or as Taylor coefficients (``N``).

    Pointwise mode accepts ``|z| < R`` (the telescoped limit converges there);
    continuation beyond ``R`` goes through a meromorphic model built from the
    series mode.

    Examples
    --------
    >>> (d_inverse(VerblunskyCoefficients((0.5,)), z=0.0) ** 2).real  # 1 / (1 - c**2)
    1.3333333333333333
    """
    if (z is None) == (N is None):
        raise InputError("give exactly one of z (point) or N (series)")
    if z is not None:
        if nm.is_extended(prec):
            return _d_values(alphas, z, tol, prec)
        scalar_in = np.ndim(z) == 0
        v = _d_values(alphas, np.atleast_1d(np.asarray(z, dtype=complex)), tol, None)
        return complex(v[0]) if scalar_in else v
    return _d_series(alphas, N, prec, abs_tol)


def _d_series(alphas, N, prec, abs_tol):
    if N < 1:
        raise InputError("N must be at least 1", field="N")
    R = alphas.decay_radius
    if prec is None:
        prec = max(128, int(math.ceil(N * math.log2(max(R if math.isfinite(R) else 2.0, 2.0)))) + 80)
    ext = nm.is_extended(prec)
    if abs_tol is None:
        abs_tol = 2.0 ** (8 - (prec if ext else nm.DOUBLE_PREC))
    with nm.working(prec):
        Phi = nm.as_array([1], prec)
        Star = nm.as_array([1], prec)
        log_kappa = mpmath.mpf(0) if ext else 0.0
        if alphas.is_free_tail:
            n_stop, chunk = len(alphas.head), max(len(alphas.head), 1)
        else:
            n_stop, chunk = None, max(64, len(alphas.head) + 16, 2 * N)
        alpha = alphas.realize(chunk, prec)
        log_q = -math.log(R) if math.isfinite(R) else -math.inf
        recent = []
        n = 0
        while n_stop is None or n < n_stop:
            if n >= N_ITER_MAX:
                raise ConvergenceError("D^-1 series did not converge", index=n)
            if n >= len(alpha):
                chunk *= 2
                alpha = alphas.realize(chunk, prec)
            a = alpha[n]
            n += 1
            # keep Phi at full degree (its top coefficient is 1) but Star truncated
            zPhi = np.concatenate([nm.zeros(1, prec), Phi])
            inc = a * zPhi[:N + 1]
            Star_ext = np.concatenate([Star, nm.zeros(1, prec)])[:N + 1]
            Phi = zPhi - a * np.concatenate([Star, nm.zeros(len(zPhi) - len(Star), prec)])
            Star = Star_ext - np.concatenate([inc, nm.zeros(len(Star_ext) - len(inc), prec)])
            log_kappa = log_kappa + (-mpmath.log1p(-a * a) if ext else -math.log1p(-float(a) ** 2)) / 2
            if n_stop is not None or n <= len(alphas.head) or n <= N:
                continue
            s = max(float(max(nm.abs_array(inc))), abs(float(a)))
            recent = (recent + [(n, s)])[-3:]
            if len(recent) == 3:
                log_pref = max((math.log(v) - m * log_q) if v > 0 else -math.inf for m, v in recent)
                if log_pref == -math.inf:
                    break
                if log_pref + (n + 1) * log_q - math.log1p(-math.exp(log_q)) < math.log(abs_tol):
                    break
        kappa = mpmath.exp(log_kappa) if ext else math.exp(log_kappa)
        c = nm.zeros(N + 1, prec)
        c[:len(Star)] = Star[:N + 1]
        c = c * kappa
    return PowerSeriesModel(c, 0.0, R, prec if ext else nm.DOUBLE_PREC, "D^-1")


def r_eval(alphas: VerblunskyCoefficients, z, tol=1e-13, d_model=None):
    """``r(z) = D**-1(z) / D**-1(1/z)`` (real coefficients).

    ``d_model`` is an optional callable continuing ``D**-1`` beyond the decay
    radius; without it both ``|z|`` and ``1/|z|`` must lie below ``R``.
    """
    z = complex(z)
    R = alphas.decay_radius

    def dinv(w):
        if abs(w) < R:
            return d_inverse(alphas, z=w, tol=tol)
        if d_model is None:
            raise RegionError(f"|z| = {abs(w):.6g} needs a meromorphic model of D^-1 (R = {R:.6g})")
        return complex(d_model(w))

    num, den = dinv(z), dinv(1 / z)
    if abs(den) <= tol * max(1.0, abs(num)):
        raise PoleError("D^-1(1/z) vanishes: pole of r", location=z)
    return num / den


# ---------------------------------------------------------------------------
# second Szegő map


def _sz2_entry(alpha, n):
    """``(b_{n+1}, a_{n+1}**2)`` from a realized alpha array."""
    a0, a1, a2, a3 = alpha[2 * n], alpha[2 * n + 1], alpha[2 * n + 2], alpha[2 * n + 3]
    b = a0 * (1 - a1) - a2 * (1 + a1)
    a_sq = (1 - a3) * (1 - a2 * a2) * (1 + a1)
    return b, a_sq


class _ExpSum:
    """Exponential polynomial ``sum_mu p_mu(k) mu**(-k)`` in a variable ``k``
    (rate 1 encodes the polynomial part).  Arithmetic at storage precision."""

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    @classmethod
    def constant(cls, c):
        return cls({mpmath.mpc(1): [mpmath.mpc(c)]})

    @classmethod
    def from_series(cls, series: AsymptoticSeries, shift: int = 0):
        """``k -> x_{k+shift}``."""
        s = series.shifted(shift) if shift else series
        return cls({mpmath.mpc(t.mu): [mpmath.mpc(c) for c in t.poly] for t in s.terms})

    def _add_term(self, out, mu, poly):
        for key in out:
            if abs(key - mu) <= abs(mu) * mpmath.mpf(2) ** -200:
                mu = key
                break
        old = out.get(mu, [])
        n = max(len(old), len(poly))
        out[mu] = [(old[i] if i < len(old) else 0) + (poly[i] if i < len(poly) else 0) for i in range(n)]

    def __add__(self, other):
        if not isinstance(other, _ExpSum):
            other = _ExpSum.constant(other)
        out = {k: list(v) for k, v in self.terms.items()}
        for mu, p in other.terms.items():
            self._add_term(out, mu, p)
        return _ExpSum(out)

    __radd__ = __add__

    def __neg__(self):
        return _ExpSum({k: [-c for c in v] for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, _ExpSum) else -_ExpSum.constant(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, _ExpSum):
            other = _ExpSum.constant(other)
        out = {}
        for m1, p1 in self.terms.items():
            for m2, p2 in other.terms.items():
                self._add_term(out, m1 * m2, nm.poly_mul(p1, p2))
        return _ExpSum(out)

    __rmul__ = __mul__

    def alternate(self):
        """``k -> (-1)**k f(k)``."""
        return _ExpSum({-k: list(v) for k, v in self.terms.items()})


def _sz2_tail_model(alphas: VerblunskyCoefficients, n0: int) -> AsymptoticSeries:
    """Interleaved model ``x_k`` of the Sz2 image, exact for ``k > 2 n0``."""
    tail = alphas.tail
    with mpmath.workprec(nm.STORE_PREC):
        A = {s: _ExpSum.from_series(tail, s) for s in (-1, 0, 1)}
        # odd k = 2n+1: alpha_{k-1}, alpha_k, alpha_{k+1};  x_k = -b_{n+1}
        f_odd = -(A[-1] * (1 - A[0]) - A[1] * (1 + A[0]))
        # even k = 2n+2: alpha_{k-1}, alpha_k, alpha_{k+1};  x_k = 1 - a_{n+1}^2
        f_even = 1 - (1 - A[1]) * (1 - A[0] * A[0]) * (1 + A[-1])
        half = mpmath.mpf(1) / 2
        x = half * (f_even + f_odd) + half * (f_even - f_odd).alternate()
        scale = max((abs(c) for v in x.terms.values() for c in v), default=mpmath.mpf(0))
        R = tail.remainder_radius
        terms = []
        for mu, poly in x.terms.items():
            if scale == 0 or max(abs(c) for c in poly) <= scale * mpmath.mpf(2) ** -200:
                continue
            if abs(mu - 1) < mpmath.mpf(2) ** -200:
                raise NumericalError("Sz2 tail model kept a non-decaying term")
            if abs(mu) >= R:
                continue
            while len(poly) > 1 and abs(poly[-1]) <= scale * mpmath.mpf(2) ** -200:
                poly = poly[:-1]
            mu = mu.real if abs(mu.imag) <= abs(mu) * mpmath.mpf(2) ** -200 else mu
            poly = [c.real if abs(c.imag) <= scale * mpmath.mpf(2) ** -200 else c for c in poly]
            terms.append(SeriesTerm(mu, tuple(poly)))
        terms.sort(key=lambda t: (float(abs(t.mu)), float(mpmath.arg(t.mu))))
    return AsymptoticSeries(tuple(terms), R, "interleaved")


def sz2_forward(alphas: VerblunskyCoefficients) -> JacobiParameters:
    """Jacobi parameters of the second Szegő map image.

    ``b_{n+1} = alpha_{2n}(1 - alpha_{2n+1}) - alpha_{2n+2}(1 + alpha_{2n+1})`` and
    ``a_{n+1}**2 = (1 - alpha_{2n+3})(1 - alpha_{2n+2}**2)(1 + alpha_{2n+1})``.
    A series tail maps to an exact interleaved series tail.

    Examples
    --------
    >>> J = sz2_forward(VerblunskyCoefficients((0.25,)))
    >>> [(float(a), float(b)) for a, b in J.head]
    [(1.0, 0.25)]
    """
    h = len(alphas.head)
    n0 = (h + 1) // 2
    if alphas.is_free_tail:
        n_head = n0 + 1
    else:
        n_head = n0
    alpha = alphas.realize(2 * n_head + 4, nm.STORE_PREC) if n_head else []
    head = []
    with mpmath.workprec(nm.STORE_PREC):
        for n in range(n_head):
            b, a_sq = _sz2_entry(alpha, n)
            if not a_sq > 0:
                raise InputError("Sz2 image has a_n**2 <= 0", index=n + 1)
            head.append((mpmath.sqrt(a_sq), b))
    if alphas.is_free_tail:
        while head and head[-1][0] == 1 and head[-1][1] == 0:
            head.pop()
        return JacobiParameters(tuple(head))
    return JacobiParameters(tuple(head), _sz2_tail_model(alphas, n0))


def sz2_inverse(params: JacobiParameters, tol=1e-12, method="backward", max_iter=200,
                n_trunc=None) -> VerblunskyCoefficients:
    """Verblunsky coefficients whose second Szegő image is ``params``.

    ``method="backward"`` (default) solves the map exactly by backward
    substitution from ``alpha = 0`` beyond the truncation::

        alpha_{2n+1} = a_{n+1}**2 / ((1 - alpha_{2n+3})(1 - alpha_{2n+2}**2)) - 1
        alpha_{2n}   = (b_{n+1} + alpha_{2n+2}(1 + alpha_{2n+1})) / (1 - alpha_{2n+1})

    ``method="fixed_point"`` iterates the telescoped sums
    ``alpha_{2n} = sum_m [b + quadratic terms]_{n+m+1}`` (plain fixed point,
    stop at ``tol/10``, at most ``max_iter`` sweeps).  Series tails are
    truncated where the tail bound falls below ``tol * 1e-3``.
    """
    if params.is_free_tail:
        N = params.support
    elif n_trunc is not None:
        N = n_trunc
    else:
        N = len(params.head) + 1
        while params.tail.bound(2 * N + 1) > tol * 1e-3:
            N += 1
    prec = nm.STORE_PREC
    r = params.realize(max(N, 1), prec)
    L = 2 * N + 4
    with mpmath.workprec(prec):
        if method == "backward":
            alpha = [mpmath.mpf(0)] * L
            for n in range(N - 1, -1, -1):
                a_sq = 1 + r.a2m1[n]
                den = (1 - alpha[2 * n + 3]) * (1 - alpha[2 * n + 2] ** 2)
                if den == 0:
                    raise NumericalError("Sz2 inversion hit a zero denominator", index=n + 1)
                alpha[2 * n + 1] = a_sq / den - 1
                if not abs(alpha[2 * n + 1]) < 1:
                    raise InputError("no Sz2 preimage: |alpha| >= 1 produced (bound states?)", index=2 * n + 1)
                alpha[2 * n] = (r.b[n] + alpha[2 * n + 2] * (1 + alpha[2 * n + 1])) / (1 - alpha[2 * n + 1])
                if not abs(alpha[2 * n]) < 1:
                    raise InputError("no Sz2 preimage: |alpha| >= 1 produced (bound states?)", index=2 * n)
        elif method == "fixed_point":
            alpha = _sz2_fixed_point(r, N, L, tol, max_iter)
        else:
            raise InputError(f"unknown method {method!r}", field="method")
        alpha = alpha[:2 * N]
        while alpha and alpha[-1] == 0:
            alpha.pop()
    return VerblunskyCoefficients(tuple(alpha))


def _sz2_fixed_point(r, N, L, tol, max_iter):
    alpha = [mpmath.mpf(0)] * L
    b = list(r.b[:N]) + [mpmath.mpf(0)] * (L - N)
    a2m1 = list(r.a2m1[:N]) + [mpmath.mpf(0)] * (L - N)
    for it in range(max_iter):
        new = [mpmath.mpf(0)] * L
        acc_e = mpmath.mpf(0)
        acc_o = mpmath.mpf(0)
        for n in range(N + 1, -1, -1):
            if 2 * n + 3 >= L:
                continue
            x0, x1, x2, x3 = alpha[2 * n], alpha[2 * n + 1], alpha[2 * n + 2], alpha[2 * n + 3]
            acc_e += b[n] + x1 * (x0 + x2)
            acc_o += a2m1[n] + x2 * x2 * (1 - x3) * (1 + x1) + x3 * x1
            new[2 * n], new[2 * n + 1] = acc_e, acc_o
        delta = max(abs(u - v) for u, v in zip(new, alpha))
        alpha = new
        if any(not abs(v) < 1 for v in alpha):
            raise InputError("no Sz2 preimage: |alpha| >= 1 produced (bound states?)")
        if delta < tol / 10:
            return alpha
    raise ConvergenceError(f"Sz2 fixed point did not converge in {max_iter} iterations")


def jost_from_d(alphas: VerblunskyCoefficients, z, tol=1e-13, prec=None):
    """``u(z) = [(1 - alpha_0**2)(1 - alpha_1)]**(1/2) D(z)**-1`` for the Sz2 image."""
    a = alphas.realize(2, nm.STORE_PREC)
    with mpmath.workprec(nm.STORE_PREC):
        const = mpmath.sqrt((1 - a[0] ** 2) * (1 - a[1]))
    d = d_inverse(alphas, z=z, tol=tol, prec=prec)
    if nm.is_extended(prec):
        with mpmath.workprec(prec):
            return const * d
    return float(const) * d


def q_series(alphas: VerblunskyCoefficients, N: int, prec=None) -> PowerSeriesModel:
    """Taylor coefficients of the quadratic remainder ``Q``::

        Q(z) = sum_n alpha_{2n+1}(alpha_{2n} + alpha_{2n+2}) z**(2n+1)
             + [alpha_{2n+2}**2 (1 - alpha_{2n+3})(1 + alpha_{2n+1}) + alpha_{2n+3} alpha_{2n+1}] z**(2n+2)
    """
    if N < 1:
        raise InputError("N must be at least 1", field="N")
    with nm.working(prec):
        a = alphas.realize(N + 4, prec)
        c = nm.zeros(N + 1, prec)
        for k in range(1, N + 1):
            if k % 2:
                n = (k - 1) // 2
                c[k] = a[2 * n + 1] * (a[2 * n] + a[2 * n + 2])
            else:
                n = (k - 2) // 2
                x1, x2, x3 = a[2 * n + 1], a[2 * n + 2], a[2 * n + 3]
                c[k] = x2 * x2 * (1 - x3) * (1 + x1) + x3 * x1
    R = alphas.decay_radius
    return PowerSeriesModel(c, 0.0, R * R, prec if nm.is_extended(prec) else nm.DOUBLE_PREC, "Q")


def q_from_b(alphas: VerblunskyCoefficients, N: int, prec=None) -> np.ndarray:
    """``Q = B - 1 + alpha_0/z + alpha_1 - (S - 1)(1 - z**-2)`` coefficientwise
    (``B`` of the Sz2 image); equals :func:`q_series` identically."""
    from jostlab.jacobi_gc import b_series
    J = sz2_forward(alphas)
    with nm.working(prec):
        Bc = b_series(J, N + 2, prec).coeffs
        Sc = s_series(alphas, N + 2, prec).coeffs
        a = alphas.realize(2, prec)
        q = nm.zeros(N + 1, prec)
        for k in range(N + 1):
            val = Bc[k] - (1 if k == 0 else 0)
            if k == 0:
                val = val + a[1]
            s_k = Sc[k] - (1 if k == 0 else 0)
            s_k2 = Sc[k + 2]
            val = val - (s_k - s_k2)
            q[k] = val
    return q
