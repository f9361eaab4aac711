"""Geronimo-Case recursion, the Jost function ``u`` and the generating function ``B``.

The unnormalized recursion is

    C_n = (z**2 - b_n z) C_{n-1} + G_{n-1}
    G_n = G_{n-1} + ((1 - a_n**2) z**2 - b_n z) C_{n-1},     C_0 = G_0 = 1,

and ``u = (prod a_j)**-1 lim G_n``.  Written as a telescoping sum,
``lim G_n = 1 + sum_n ((1 - a_{n+1}**2) z**2 - b_{n+1} z) C_n(z)``, which
converges on ``|z| < R_eff`` because ``C_n(z) = O(max(1, |z|)**(2n))`` while the
parameters decay like ``R_eff**(-2n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from jostlab import _numeric as nm
from jostlab.core import (ConvergenceError, InputError, JacobiParameters, NumericalError,
                          PowerSeriesModel, RegionError)

N_ITER_MAX = 200_000


@dataclass(frozen=True, eq=False)
class GCState:
    """``C_n``, ``G_n`` (coefficients, lowest degree first) and ``prod_{j<=n} a_j``."""

    n: int
    C: np.ndarray
    G: np.ndarray
    prod_a: object


def _check_finite(arr, n):
    if arr.dtype == object:
        ok = all(mpmath.isfinite(v) for v in arr)
    else:
        ok = bool(np.all(np.isfinite(arr)))
    if not ok:
        raise NumericalError("polynomial coefficients overflowed the working precision", index=n)


def _gc_poly_step(C, G, a2m1, b, degree=None):
    """One recursion step on coefficient arrays, optionally truncated at ``degree``."""
    n_old = len(C)
    n_new = n_old + 2 if degree is None else min(n_old + 2, degree + 1)
    zero = C[0] * 0
    Cn = np.empty(n_new, dtype=C.dtype)
    Gn = np.empty(n_new, dtype=C.dtype)
    Cn[:] = [zero] * n_new if C.dtype == object else 0
    Gn[:] = Cn
    Gn[:len(G)] = G[:n_new]
    Cn[:len(G)] = G[:n_new]
    m = min(n_old, n_new - 2)
    if m > 0:
        # z**2 C and z C contributions
        Cn[2:2 + m] = Cn[2:2 + m] + C[:m]
        Gn[2:2 + m] = Gn[2:2 + m] - a2m1 * C[:m]
    m1 = min(n_old, n_new - 1)
    if m1 > 0:
        Cn[1:1 + m1] = Cn[1:1 + m1] - b * C[:m1]
        Gn[1:1 + m1] = Gn[1:1 + m1] - b * C[:m1]
    return Cn, Gn


def gc_iterate(params: JacobiParameters, N: int, prec=None) -> list:
    """States ``0..N`` of the recursion with full (untruncated) polynomials.

    Examples
    --------
    >>> s = gc_iterate(JacobiParameters.free(), 2)
    >>> s[2].C.tolist(), s[2].G.tolist()
    ([1.0, 0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0, 0.0])
    """
    if N < 0:
        raise InputError("N must be nonnegative", field="N")
    ext = nm.is_extended(prec)
    states = []
    with nm.working(prec):
        C = nm.as_array([1], prec)
        G = nm.as_array([1], prec)
        prod = nm.one(prec)
        states.append(GCState(0, C, G, prod))
        if N == 0:
            return states
        r = params.realize(N, prec)
        for n in range(1, N + 1):
            C, G = _gc_poly_step(C, G, r.a2m1[n - 1], r.b[n - 1])
            prod = prod * r.a[n - 1]
            _check_finite(C, n)
            _check_finite(G, n)
            if not ext:
                # keep exact trailing zeros of G (free tail) from drifting
                G = np.asarray(G, dtype=float)
            states.append(GCState(n, C, G, prod))
    return states


# ---------------------------------------------------------------------------
# pointwise evaluation


@dataclass
class _GCValues:
    G: object
    dG: object
    prod_a: object
    n: int


def _tail_ratio(params, zmax):
    R = params.decay_radius
    return (max(zmax, 1.0) / R) ** 2


def _gc_values(params: JacobiParameters, z, tol, prec=None, derivative=False, n_max=N_ITER_MAX):
    """``lim G_n`` (and its derivative) at the points ``z``.

    Float mode evaluates a numpy array of points at once; extended mode takes a
    single point.
    """
    ext = nm.is_extended(prec)
    with nm.working(prec):
        if ext:
            z = mpmath.mpc(z)
            zmax = float(abs(z))
            C, G, dC, dG = mpmath.mpc(1), mpmath.mpc(1), mpmath.mpc(0), mpmath.mpc(0)
            log_prod = mpmath.mpf(0)
            absval = abs
        else:
            z = np.asarray(z, dtype=complex)
            zmax = float(np.max(np.abs(z))) if z.size else 0.0
            C, G = np.ones(z.shape, complex), np.ones(z.shape, complex)
            dC, dG = np.zeros(z.shape, complex), np.zeros(z.shape, complex)
            log_prod = 0.0

            def absval(v):
                return float(np.max(np.abs(v))) if np.size(v) else 0.0

        R = params.decay_radius
        if not zmax < R:
            raise RegionError(f"|z| = {zmax:.6g} is outside the certified radius {R:.6g}")
        z2 = z * z
        if params.is_free_tail:
            n_stop = params.support
            chunk = max(n_stop, 1)
        else:
            n_stop = None
            chunk = max(64, len(params.head) + 16)
        q = _tail_ratio(params, zmax)
        log_q = math.log(q) if q > 0 else -math.inf
        recent = []
        r = params.realize(chunk, prec)
        n = 0
        while True:
            if n_stop is not None and n >= n_stop:
                break
            if n >= n_max:
                raise ConvergenceError(f"Geronimo-Case sum did not reach tol={tol:g} within {n_max} steps",
                                       index=n)
            if n >= len(r.b):
                chunk = min(2 * chunk, n_max + 1)
                r = params.realize(chunk, prec)
            a2m1, b = r.a2m1[n], r.b[n]
            n += 1
            lin = -a2m1 * z2 - b * z
            inc = lin * C
            if derivative:
                dinc = (-2 * a2m1 * z - b) * C + lin * dC
                dC, C = (2 * z - b) * C + (z2 - b * z) * dC + dG, (z2 - b * z) * C + G
                dG = dG + dinc
            else:
                C = (z2 - b * z) * C + G
            G = G + inc
            log_a = (mpmath.log1p(a2m1) if ext else math.log1p(float(a2m1))) / 2
            log_prod = log_prod + log_a
            if n_stop is not None:
                continue
            size = max(absval(inc), absval(G) * abs(float(log_a)))
            if derivative:
                size = max(size, absval(dinc))
            if not math.isfinite(size):
                raise NumericalError("Geronimo-Case sum overflowed", index=n)
            if n <= len(params.head):
                continue
            recent.append((n, size))
            recent = recent[-3:]
            if len(recent) < 3:
                continue
            # geometric tail bound pref * q**m with prefactor from recent increments
            if log_q == -math.inf:
                break
            log_pref = max((math.log(s) - m * log_q) if s > 0 else -math.inf for m, s in recent)
            if log_pref == -math.inf:
                tail = 0.0
            else:
                log_tail = log_pref + (n + 1) * log_q - math.log1p(-q)
                tail = math.exp(log_tail) if log_tail < 700 else math.inf
            # the prefactor is estimated, not bounded: keep a wide margin
            if tail < tol * 1e-3:
                break
        prod = mpmath.exp(log_prod) if ext else math.exp(log_prod)
        if n_stop is not None and n_stop > 0 and not ext:
            prod = float(np.prod(r.a[:n_stop]))
        return _GCValues(G, dG, prod, n)


def jost_u(params: JacobiParameters, z, tol=1e-13, prec=None, derivative=False):
    """Jost function ``u(z) = (prod a_j)**-1 lim G_n(z)`` for ``|z| < R_eff``.

    Parameters
    ----------
    params : JacobiParameters
    z : complex or array_like
        Evaluation point(s).  Arrays are only supported at double precision.
    tol : float
        Absolute tolerance on ``lim G_n``.
    prec : int, optional
        Working precision in bits (``None`` for double).
    derivative : bool
        Also return ``u'(z)``.

    Returns
    -------
    complex or ndarray, or a ``(u, u')`` pair.

    Examples
    --------
    >>> p = JacobiParameters.from_lists(b=[0.3])
    >>> complex(jost_u(p, 0.5))
    (0.85+0j)
    """
    scalar_in = np.ndim(z) == 0
    if nm.is_extended(prec):
        if not scalar_in:
            out = [jost_u(params, w, tol, prec, derivative) for w in np.ravel(z)]
            return out
        v = _gc_values(params, z, tol, prec, derivative)
        with mpmath.workprec(prec):
            u = v.G / v.prod_a
            return (u, v.dG / v.prod_a) if derivative else u
    v = _gc_values(params, np.atleast_1d(np.asarray(z, dtype=complex)), tol, None, derivative)
    u = v.G / v.prod_a
    du = v.dG / v.prod_a
    if scalar_in:
        u, du = complex(u[0]), complex(du[0])
    return (u, du) if derivative else u


def g_limit(params: JacobiParameters, z, tol=1e-13, prec=None):
    """``lim G_n(z) = (prod a_j) u(z)``."""
    if nm.is_extended(prec):
        return _gc_values(params, z, tol, prec).G
    scalar_in = np.ndim(z) == 0
    G = _gc_values(params, np.atleast_1d(np.asarray(z, dtype=complex)), tol).G
    return complex(G[0]) if scalar_in else G


def prod_a(params: JacobiParameters, tol=1e-15, prec=None):
    """``prod_j a_j`` (finite product for free tails)."""
    return _gc_values(params, 0.0 if not nm.is_extended(prec) else 0, tol, prec).prod_a


# ---------------------------------------------------------------------------
# power series


def series_precision(N: int, radius: float, guard: int = 80) -> int:
    """Bits needed to resolve Taylor coefficients ``~radius**-k`` up to ``k = N``."""
    return max(128, int(math.ceil(N * math.log2(max(radius, 2.0)))) + guard)


def u_series(params: JacobiParameters, N: int, prec=None, abs_tol=None) -> PowerSeriesModel:
    """Taylor coefficients ``u_0..u_N`` from the degree-truncated recursion.

    The increment at step ``n`` touches degrees ``1..2n`` with size
    ``O(R_eff**(-2n))``; iteration stops once the geometric tail bound drops
    below ``abs_tol`` (default ``2**(8 - prec)``).
    """
    if N < 1:
        raise InputError("N must be at least 1", field="N")
    if prec is None:
        prec = series_precision(N, params.decay_radius if math.isfinite(params.decay_radius) else 2.0)
    ext = nm.is_extended(prec)
    if abs_tol is None:
        abs_tol = 2.0 ** (8 - (prec if ext else nm.DOUBLE_PREC))
    R = params.decay_radius
    with nm.working(prec):
        C = nm.as_array([1], prec)
        G = nm.as_array([1], prec)
        log_prod = mpmath.mpf(0) if ext else 0.0
        if params.is_free_tail:
            n_stop, chunk = params.support, max(params.support, 1)
        else:
            n_stop, chunk = None, max(64, len(params.head) + 16, N)
        r = params.realize(chunk, prec)
        log_q = -2 * math.log(R) if math.isfinite(R) else -math.inf
        recent = []
        n = 0
        while n_stop is None or n < n_stop:
            if n >= N_ITER_MAX:
                raise ConvergenceError("u series did not converge", index=n)
            if n >= len(r.b):
                chunk *= 2
                r = params.realize(chunk, prec)
            a2m1, b = r.a2m1[n], r.b[n]
            n += 1
            G_old = G
            C, G = _gc_poly_step(C, G, a2m1, b, degree=N)
            log_prod = log_prod + (mpmath.log1p(a2m1) if ext else math.log1p(float(a2m1))) / 2
            if n_stop is not None:
                continue
            m = min(len(G_old), len(G))
            diff = np.concatenate([G[:m] - G_old[:m], G[m:]])
            size = float(max(nm.abs_array(diff))) if len(diff) else 0.0
            size = max(size, abs(float(a2m1)), abs(float(b)))
            if n <= len(params.head) or 2 * n < N:
                continue
            recent = (recent + [(n, size)])[-3:]
            if len(recent) == 3:
                log_pref = max((math.log(s) - k * log_q) if s > 0 else -math.inf for k, s in recent)
                if log_pref == -math.inf:
                    break
                if log_pref + (n + 1) * log_q - math.log1p(-math.exp(log_q)) < math.log(abs_tol):
                    break
        prod = mpmath.exp(log_prod) if ext else math.exp(log_prod)
        coeffs = nm.zeros(N + 1, prec)
        coeffs[:len(G)] = G[:N + 1]
        coeffs = coeffs / prod
    return PowerSeriesModel(coeffs, 0.0, R, prec if ext else nm.DOUBLE_PREC, "u")


def b_series(params: JacobiParameters, N: int, prec=None) -> PowerSeriesModel:
    """Taylor coefficients ``x_0..x_N`` of ``B``: the interleaved sequence.

    Examples
    --------
    >>> b_series(JacobiParameters.from_lists(b=[0.5]), 3).coeffs.tolist()
    [1.0, -0.5, 0.0, 0.0]
    """
    if N < 1:
        raise InputError("N must be at least 1", field="N")
    r = params.realize(N // 2 + 1, prec)
    with nm.working(prec):
        x = nm.zeros(N + 1, prec)
        x[0] = nm.one(prec)
        for k in range(1, N + 1):
            n = (k + 1) // 2
            x[k] = 0 - r.b[n - 1] if k % 2 else 0 - r.a2m1[n - 1]
    return PowerSeriesModel(x, 0.0, params.decay_radius, prec if nm.is_extended(prec) else nm.DOUBLE_PREC, "B")


def b_eval(params: JacobiParameters, z, prec=None):
    """``B(z)`` everywhere off the tail rates, via the closed-form tail sum."""
    h = len(params.head)
    with nm.working(prec):
        if nm.is_extended(prec):
            z = mpmath.mpc(z)
        else:
            z = np.asarray(z, dtype=complex)
        acc = 1 + 0 * z
        model = None if params.is_free_tail else params.tail
        if h:
            head = b_series(JacobiParameters(params.head), 2 * h, prec).coeffs
            gen = model.realize(2 * h, start=1, prec=prec) if model is not None else None
            zk = 1 + 0 * z
            for k in range(1, 2 * h + 1):
                zk = zk * z
                c = head[k] - (gen[k - 1] if gen is not None else 0)
                acc = acc + c * zk
        if model is not None:
            acc = acc + model.generating_sum(z, prec)
    return acc


# ---------------------------------------------------------------------------
# first-order (Born) check


def born_residual(params: JacobiParameters, zgrid, eps, tol=1e-15) -> float:
    """Second-order residual of the Born approximation on ``zgrid``.

    With ``G = (prod a_j) u`` for the ``eps``-scaled parameters, the first-order
    expansion of the perturbation determinant gives

        -(1/z - z) G(z) - z B(z) = -1/z + c_0 + c_1 z + O(eps**2)

    with ``c_0 = sum b_n`` and ``c_1 = sum (a_n**2 - 1)`` to first order.  The
    constants are fitted by least squares and the max deviation returned.
    """
    if not 0 < eps <= 1:
        raise InputError("scale eps must lie in (0, 1]", field="eps")
    z = np.atleast_1d(np.asarray(zgrid, dtype=complex))
    bad = np.nonzero((np.abs(1 - z * z) < 1e-8) | (np.abs(z) < 1e-12))[0]
    if bad.size:
        raise InputError("grid touches z = 0 or z = +-1", index=int(bad[0]), field="zgrid")
    p = params.scaled(eps)
    G = g_limit(p, z, tol)
    B = b_eval(p, z)
    lhs = -(1 / z - z) * G - z * B + 1 / z
    A = np.stack([np.ones_like(z), z], axis=1)
    coef, *_ = np.linalg.lstsq(A, lhs, rcond=None)
    return float(np.max(np.abs(lhs - A @ coef)))
