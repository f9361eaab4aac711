"""m-function, coefficient stripping, bound states and the pole sets P1, P2, P.

``M(z) = int dmu(x) / (z + 1/z - x)`` is evaluated by the downward continued
fraction

    M^(k)(z)**-1 = z + 1/z - b_{k+1} - a_{k+1}**2 M^(k+1)(z)

seeded with the free value ``M^(K)(z) = z``.  Inside the disk the recursion is
stable; outside, the truncated fraction is the exact continuation of the
finite-rank approximant, and the seed error decays like ``(|z|/R)**(2K)``
while roundoff is amplified like ``|z|**(2K)``, so those points are evaluated
in extended precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from jostlab import _numeric as nm
from jostlab.core import (AmbiguityError, ConvergenceError, InputError, JacobiParameters, NumericalError,
                          PoleError, PoleSet, RegionError)
from jostlab.jacobi_gc import jost_u, series_precision, u_series

K_MAX = 20_000


# ---------------------------------------------------------------------------
# continued fraction


def _cf(params: JacobiParameters, z, K, prec=None, derivative=False):
    """``M(z)`` (and ``M'(z)``) from the fraction truncated at depth ``K``."""
    ext = nm.is_extended(prec)
    r = params.realize(max(K, 1), prec)
    with nm.working(prec):
        if ext:
            z = mpmath.mpc(z)
            one = mpmath.mpf(1)
        else:
            z = np.asarray(z, dtype=complex)
            one = 1.0
        M = z
        dM = one + 0 * z
        e = z + one / z
        de = one - one / (z * z)
        for k in range(K - 1, -1, -1):
            a2 = 1 + r.a2m1[k]
            D = e - r.b[k] - a2 * M
            small = abs(D) < 1e-300 if ext else np.any(np.abs(D) < 1e-300)
            if small:
                raise PoleError("continued fraction hit a pole of an intermediate M", location=z, level=k)
            if derivative:
                dM = -(de - a2 * dM) / (D * D)
            M = one / D
    return (M, dM) if derivative else M


def _cf_depth(params: JacobiParameters, zmax, tol):
    if params.is_free_tail:
        return params.support
    R = params.decay_radius
    q = (max(zmax, 1.0) / R) ** 2
    if not q < 1:
        raise RegionError(f"|z| = {zmax:.6g} is outside the certified radius {R:.6g}")
    extra = int(math.ceil(math.log(tol * 1e-2) / math.log(q))) if q > 0 else 1
    return len(params.head) + max(8, extra)


def _cf_prec(zmax, K, prec):
    need = int(2 * K * math.log2(max(zmax, 1.0))) + 64 if zmax > 1 else 0
    if need <= nm.DOUBLE_PREC and not nm.is_extended(prec):
        return None
    return max(prec or 0, need, 128)


def m_eval(params: JacobiParameters, z, tol=1e-13, prec=None, derivative=False):
    """``M(z)`` by the downward continued fraction.

    Free tails are exact at depth equal to the support.  For series tails the
    depth is doubled until two successive values agree to ``tol``.  Points with
    ``|z| > 1`` are run in extended precision (needed for ``|z|**(2K)``
    roundoff growth) and must satisfy ``|z| < R_eff``.

    Examples
    --------
    >>> complex(m_eval(JacobiParameters.from_lists(b=[0.5]), 0.5))  # z / (1 - z/2)
    (0.6666666666666666+0j)
    """
    scalar_in = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(zs == 0):
        raise InputError("M is evaluated away from z = 0", field="z")
    zmax = float(np.max(np.abs(zs)))
    K = _cf_depth(params, zmax, tol)
    out = []
    groups = [zs] if zmax <= 1 else [np.array([w]) for w in zs]
    for g in groups:
        gmax = float(np.max(np.abs(g)))
        Kg = K if gmax == zmax else _cf_depth(params, gmax, tol)
        val = _cf_converged(params, g, Kg, tol, prec, derivative)
        out.append(val)
    if derivative:
        M = np.concatenate([np.atleast_1d(v[0]) for v in out])
        dM = np.concatenate([np.atleast_1d(v[1]) for v in out])
        return (complex(M[0]), complex(dM[0])) if scalar_in else (M, dM)
    M = np.concatenate([np.atleast_1d(v) for v in out])
    return complex(M[0]) if scalar_in else M


def _to_c(v):
    if isinstance(v, np.ndarray):
        return v.astype(complex)
    return np.array([complex(v)])


def _cf_converged(params, g, K, tol, prec, derivative):
    gmax = float(np.max(np.abs(g)))
    p = _cf_prec(gmax, K, prec)
    if params.is_free_tail:
        if p is None:
            return _cf(params, g, K, None, derivative)
        v = _cf(params, g[0], K, p, derivative)
        return (_to_c(v[0]), _to_c(v[1])) if derivative else _to_c(v)

    def run(Kv):
        pv = _cf_prec(gmax, Kv, prec)
        if pv is None:
            return _cf(params, g, Kv, None, derivative)
        v = _cf(params, g[0], Kv, pv, derivative)
        return (_to_c(v[0]), _to_c(v[1])) if derivative else _to_c(v)

    prev = run(K)
    while True:
        K2 = 2 * K
        if K2 > K_MAX:
            raise ConvergenceError(f"continued fraction did not settle to tol={tol:g}", index=K)
        cur = run(K2)
        a = prev[0] if derivative else prev
        b = cur[0] if derivative else cur
        if np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol:
            return cur
        prev, K = cur, K2


def m_continue(params: JacobiParameters, u, z, tol=1e-12, m_inside=None):
    """``M(z) = M(1/z) + (z - 1/z) / (u(z) u(1/z))`` for ``|z| > 1``.

    ``u`` is a callable Jost function valid at ``z`` and ``1/z``.  When the
    denominator (nearly) vanishes the value is taken as the mean over a small
    circle around ``z``; a nonzero residue there raises :class:`PoleError`.

    Examples
    --------
    >>> p = JacobiParameters.from_lists(b=[2.5])
    >>> round(m_continue(p, lambda w: 1 - 2.5 * w, 2.5).real, 12)  # -10/21
    -0.47619047619
    """
    z = complex(z)
    if not abs(z) > 1:
        raise InputError("m_continue needs |z| > 1", field="z")
    m_in = m_inside or (lambda w: m_eval(params, w, tol=tol * 1e-2))

    def formula(w):
        den = complex(u(w)) * complex(u(1 / w))
        return complex(m_in(1 / w)) + (w - 1 / w) / den

    try:
        den = complex(u(z)) * complex(u(1 / z))
        inner = complex(m_in(1 / z))
    except PoleError:
        den, inner = 0.0, math.inf
    scale = abs(z - 1 / z)
    if abs(den) > 1e-8 * scale and math.isfinite(abs(inner)):
        return inner + (z - 1 / z) / den
    # removable or genuine singularity of the two terms: circle mean / residue
    rho = 1e-2 * abs(z)
    theta = 2 * np.pi * np.arange(64) / 64
    pts = z + rho * np.exp(1j * theta)
    vals = np.array([formula(w) for w in pts])
    value = complex(np.mean(vals))
    residue = complex(np.mean(vals * rho * np.exp(1j * theta)))
    if abs(residue) > 1e-6 * rho * max(1.0, abs(value)):
        raise PoleError(f"continued M has a pole at {z} (residue ~ {residue:.3g})", location=z)
    return value


# ---------------------------------------------------------------------------
# spectral models


def circle_taylor(f, radius, n_points=256):
    """Taylor coefficients of ``f`` from FFT samples on ``|z| = radius``."""
    theta = 2 * np.pi * np.arange(n_points) / n_points
    vals = np.asarray(f(radius * np.exp(1j * theta)), dtype=complex)
    c = np.fft.fft(vals) / n_points
    return c / radius ** np.arange(n_points)


def _numeric_residue(f, z0, rho, n=64):
    theta = 2 * np.pi * np.arange(n) / n
    w = rho * np.exp(1j * theta)
    vals = np.array([complex(f(z0 + wi)) for wi in w])
    return complex(np.mean(vals * w))


class SpectralModel:
    """Jost function and m-function of one Jacobi matrix, as callables.

    The base implementation is built from Jacobi parameters: ``u`` through
    the Geronimo-Case sum inside ``|z| < R_eff`` and through a meromorphic
    model (pole extraction on the Taylor series) beyond, ``M`` through the
    continued fraction.
    """

    def __init__(self, params: JacobiParameters, cutoff=8.0, tol=1e-12, n_coeffs=None, u_mero=None):
        self.params = params
        self.cutoff = float(cutoff)
        self.tol = tol
        self._n = n_coeffs
        self._u_mero = u_mero

    # -- parameters ------------------------------------------------------
    @property
    def a1(self):
        return float(self.params.realize(1).a[0])

    @property
    def b1(self):
        return float(self.params.realize(1).b[0])

    @property
    def radius(self):
        return self.params.decay_radius

    # -- u ---------------------------------------------------------------
    def u_meromorphic(self):
        """Meromorphic model of ``u`` (poles up to ``cutoff``)."""
        if self._u_mero is None:
            from jostlab.asymptotics import poles_from_taylor
            if self.params.is_free_tail:
                from jostlab.asymptotics import MeromorphicModel
                us = u_series(self.params, max(2 * self.params.support, 1), prec=None)
                self._u_mero = MeromorphicModel(PoleSet((), self.cutoff), (), np.array(us.coeffs), math.inf,
                                                nm.DOUBLE_PREC, "u")
            else:
                N = self._n or default_series_length(self.radius, self.cutoff)
                us = u_series(self.params, N, prec=series_precision(N, self.cutoff))
                self._u_mero = poles_from_taylor(us, self.cutoff, tol=1e-8)
        return self._u_mero

    def u(self, z):
        z = np.asarray(z, dtype=complex)
        if self.params.is_free_tail or float(np.max(np.abs(z), initial=0)) < 0.95 * self.radius:
            return jost_u(self.params, z, tol=self.tol * 1e-2)
        return self.u_meromorphic()(z)

    def du(self, z):
        return jost_u(self.params, complex(z), tol=self.tol * 1e-2, derivative=True)[1]

    def u_poles(self) -> PoleSet:
        if self.params.is_free_tail:
            return PoleSet((), self.cutoff)
        return self.u_meromorphic().poles.within(self.cutoff)

    # -- M ---------------------------------------------------------------
    def m(self, z):
        return m_eval(self.params, z, tol=self.tol)

    def m_residue(self, z0):
        """``lim (z - z0) M(z)`` at a pole inside the disk: ``1 / D_0'(z0)``."""
        return _cf_residue(self.params, z0, self.tol)

    def stripped(self) -> "SpectralModel":
        return SpectralModel(self.params.shift(1), self.cutoff, self.tol, self._n)


def default_series_length(radius, cutoff, tol=1e-8, margin=24):
    """Coefficients needed to resolve poles up to ``cutoff`` when the next
    singularities may sit at ``cutoff * min(radius, 2)``."""
    ratio = max(min(radius, 2.0), 1.5)
    return max(64, resolvable_needed(tol, ratio) + margin)


def resolvable_needed(tol, ratio):
    return int(math.ceil(2 * math.log(tol) / -math.log(ratio)))


def _cf_residue(params, z0, tol):
    """Residue of ``M`` at ``z0`` from the top-level denominator derivative."""
    z0 = complex(z0)
    sub = params.shift(1)
    r = params.realize(1)
    a2 = 1 + float(r.a2m1[0])
    if sub.is_free_tail and sub.support == 0:
        M1, dM1 = z0, 1.0
    else:
        M1, dM1 = m_eval(sub, z0, tol=tol * 1e-2, derivative=True)
    D = z0 + 1 / z0 - float(r.b[0]) - a2 * M1
    dD = 1 - 1 / z0 ** 2 - a2 * dM1
    if abs(D) > 1e-6 * max(1.0, abs(z0 + 1 / z0)):
        raise AmbiguityError(f"M has no pole at {z0} (denominator {abs(D):.3g})")
    return 1 / dD


class PerturbedWeightModel(SpectralModel):
    """The measure with the weight of the bound state at ``z0`` changed.

    ``mu' = s [mu + dw delta_{E0}]`` with ``dw = w (factor - 1)`` and
    ``s = 1 / (1 + dw)``, so ``M' = s [M + dw / (z + 1/z - E0)]`` and
    ``u' = u / sqrt(s)``.  The zero at ``z0`` becomes noncanonical for any
    ``factor != 1``.
    """

    def __init__(self, base: SpectralModel, z0, factor=1.1):
        self.base = base
        self.z0 = float(z0)
        res = base.m_residue(self.z0).real
        w = res * (self.z0 ** 2 - 1) / self.z0 ** 2
        self.weight = w
        self.dw = w * (factor - 1)
        self.s = 1 / (1 + self.dw)
        self.E0 = self.z0 + 1 / self.z0
        self.cutoff = base.cutoff
        self.tol = base.tol
        self.params = None

    @property
    def radius(self):
        return self.base.radius

    @property
    def b1(self):
        m1 = self.base.b1
        return self.s * (m1 + self.dw * self.E0)

    @property
    def a1(self):
        m1 = self.base.b1
        m2 = self.base.a1 ** 2 + m1 ** 2
        b1 = self.b1
        return math.sqrt(self.s * (m2 + self.dw * self.E0 ** 2) - b1 ** 2)

    def u(self, z):
        return self.base.u(z) / math.sqrt(self.s)

    def du(self, z):
        return self.base.du(z) / math.sqrt(self.s)

    def u_meromorphic(self):
        from jostlab.asymptotics import MeromorphicModel
        b = self.base.u_meromorphic()
        k = 1 / math.sqrt(self.s)
        return MeromorphicModel(b.poles, tuple(tuple(a * k for a in p) for p in b.principal),
                                np.array([c * k for c in b.entire], dtype=object), b.radius, b.prec, "u")

    def u_poles(self):
        return self.base.u_poles()

    def m(self, z):
        z = np.asarray(z, dtype=complex)
        return self.s * (self.base.m(z) + self.dw / (z + 1 / z - self.E0))

    def m_residue(self, z0):
        res = self.s * self.base.m_residue(z0)
        if abs(z0 - self.z0) < 1e-12:
            res += self.s * self.dw * self.z0 ** 2 / (self.z0 ** 2 - 1)
        return res

    def stripped(self):
        return DerivedModel.strip_of(self)


class DerivedModel(SpectralModel):
    """Model of ``J^(1)`` obtained from a parent model through
    ``u^(1) = a_1 z**-1 u M`` and ``M^(1) = (z + 1/z - b_1 - 1/M) / a_1**2``.

    ``u^(1)`` is analytic in the disk; its meromorphic continuation comes from
    FFT Taylor coefficients on ``|z| = sample_radius`` and pole extraction.
    """

    def __init__(self, u_fn, m_fn, a1, b1, radius, cutoff, tol, sample_radius=0.9, n_points=256):
        self._u_fn = u_fn
        self._m_fn = m_fn
        self._a1, self._b1 = a1, b1
        self._radius = radius
        self.cutoff = cutoff
        self.tol = tol
        self.params = None
        self._u_mero = None
        self.sample_radius = sample_radius
        self.n_points = n_points

    @classmethod
    def strip_of(cls, parent: SpectralModel):
        a1, b1 = parent.a1, parent.b1

        def u1(z):
            z = np.asarray(z, dtype=complex)
            return a1 / z * parent.u(z) * parent.m(z)

        def m1(z):
            z = np.asarray(z, dtype=complex)
            return (z + 1 / z - b1 - 1 / parent.m(z)) / a1 ** 2

        return cls(u1, m1, None, None, parent.radius, parent.cutoff, parent.tol)

    @property
    def radius(self):
        return self._radius

    @property
    def a1(self):
        raise NotImplementedError("derived models do not expose further Jacobi parameters")

    b1 = a1

    def u_meromorphic(self):
        if self._u_mero is None:
            from jostlab.asymptotics import poles_from_taylor
            c = circle_taylor(self._u_fn, self.sample_radius, self.n_points)
            # keep coefficients above the double-precision aliasing floor
            mags = np.abs(c) * self.sample_radius ** np.arange(len(c))
            usable = np.nonzero(mags > 1e-14 * np.max(mags))[0]
            last = int(usable[-1]) + 1 if usable.size else 2
            c = c[:max(last, 16)]
            self._u_mero = poles_from_taylor(c.real if np.all(np.abs(c.imag) < 1e-12) else c,
                                            self.cutoff, tol=1e-6, prec=nm.DOUBLE_PREC + 11)
        return self._u_mero

    def u(self, z):
        # the sampled product is 0 * inf at zeros of u; use the fitted model
        return self.u_meromorphic()(np.asarray(z, dtype=complex))

    def du(self, z):
        h = 1e-4
        z = complex(z)
        v = self.u(np.array([z + h, z - h, z + 1j * h, z - 1j * h]))
        return complex((v[0] - v[1]) / (4 * h) + (v[2] - v[3]) / (4j * h))

    def u_poles(self):
        return self.u_meromorphic().poles.within(self.cutoff)

    def m(self, z):
        return self._m_fn(z)

    def m_residue(self, z0):
        return _numeric_residue(lambda w: self._m_fn(np.array([w]))[0], complex(z0), 1e-3 * abs(z0))

    def stripped(self):
        return DerivedModel.strip_of(self)


def as_model(obj, cutoff=8.0, tol=1e-12) -> SpectralModel:
    if isinstance(obj, SpectralModel):
        return obj
    if isinstance(obj, JacobiParameters):
        return SpectralModel(obj, cutoff, tol)
    raise InputError(f"expected JacobiParameters or a spectral model, got {type(obj).__name__}")


# ---------------------------------------------------------------------------
# stripping


@dataclass(frozen=True, eq=False)
class StrippedFamily:
    """Level ``k`` of coefficient stripping with the Eq.-4.3 check residual."""

    level: int
    params: JacobiParameters
    u: object
    m: object
    identity_residual: float

    def to_json(self) -> dict:
        from jostlab.core import serialize
        return {"level": self.level, "params": serialize(self.params),
                "identity_residual": self.identity_residual}


def strip(params: JacobiParameters, k: int, tol=1e-10, grid=None) -> StrippedFamily:
    """Parameters of ``J^(k)`` with ``u^(k)``, ``M^(k)`` callables.

    Each step's ``u^(j+1)(z) = a_{j+1} z**-1 u^(j)(z) M^(j)(z)`` is checked on
    ``grid`` (default 16 points on ``|z| = 1/2``); a residual above ``tol``
    raises :class:`NumericalError`.
    """
    if k < 0:
        raise InputError("stripping level must be nonnegative", field="k")
    if grid is None:
        grid = 0.5 * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
    grid = np.asarray(grid, dtype=complex)
    worst = 0.0
    cur = params
    for j in range(k):
        nxt = cur.shift(1)
        a = float(cur.realize(1).a[0])
        lhs = jost_u(nxt, grid, tol=tol * 1e-3)
        rhs = a / grid * jost_u(cur, grid, tol=tol * 1e-3) * m_eval(cur, grid, tol=tol * 1e-3)
        res = float(np.max(np.abs(lhs - rhs)))
        worst = max(worst, res)
        if res > tol:
            raise NumericalError(f"stripping identity fails at level {j} (residual {res:.3g})", index=j)
        cur = nxt
    final = cur
    return StrippedFamily(k, final, lambda z: jost_u(final, z), lambda z: m_eval(final, z), worst)


# ---------------------------------------------------------------------------
# bound states


@dataclass(frozen=True)
class EigenPair:
    z0: float
    E0: float
    weight: float
    canonical: bool
    residue: float = float("nan")
    expected_residue: float = float("nan")


@dataclass(frozen=True)
class SpectralData:
    """Bound states with weights, plus resonance flags at ``z = +-1``."""

    eigen_pairs: tuple = ()
    resonance_at_plus1: bool = False
    resonance_at_minus1: bool = False
    essential_spectrum: tuple = (-2.0, 2.0)

    def to_json(self) -> dict:
        return {
            "eigen": [{"z0": p.z0, "E0": p.E0, "w0": p.weight, "canonical": p.canonical,
                       "residue": _finite_or_none(p.residue),
                       "expected_residue": _finite_or_none(p.expected_residue),
                       "expected_opposite_sign": _finite_or_none(-p.expected_residue)}
                      for p in self.eigen_pairs],
            "resonance_at_plus1": self.resonance_at_plus1,
            "resonance_at_minus1": self.resonance_at_minus1,
        }


def _finite_or_none(x):
    return float(x) if math.isfinite(x) else None


def _bisect(f, lo, hi, flo, tol):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def find_zeros(model: SpectralModel, tol=1e-14, step=1e-3):
    """Real zeros of ``u`` in ``(-1, 1)`` by sign scan and bisection, and the
    values ``u(+-1)``."""
    grid = np.linspace(-1 + step, 1 - step, int(round(2 / step)) - 1)
    vals = np.asarray(model.u(grid), dtype=complex)
    if np.max(np.abs(vals.imag)) > 1e-8 * max(1.0, np.max(np.abs(vals.real))):
        raise NumericalError("u is not real on the real axis (upstream numerical failure)")
    v = vals.real

    def f(x):
        return complex(np.asarray(model.u(np.array([x])), dtype=complex)[0]).real

    zeros = []
    for i in range(len(grid) - 1):
        if v[i] == 0:
            zeros.append(float(grid[i]))
        elif v[i] * v[i + 1] < 0:
            zeros.append(_bisect(f, float(grid[i]), float(grid[i + 1]), v[i], tol))
    ends = np.asarray(model.u(np.array([1.0, -1.0])), dtype=complex).real
    return zeros, ends


def classify_zero(model, z0, tol=1e-8):
    """Canonical/noncanonical verdict for a zero ``z0`` of ``u`` in the disk.

    Canonical iff ``u`` is regular at ``1/z0`` and
    ``lim (z - z0) M(z) = (z0 - 1/z0) / (u'(z0) u(1/z0))``.

    Returns
    -------
    dict with ``canonical``, ``residue`` (of ``M``), ``expected``, ``reason``
    and ``expected_opposite_sign`` (the same right-hand side with the other
    sign convention, which the rank-one oracle rules out).
    """
    model = as_model(model)
    z0 = float(z0)
    if not 0 < abs(z0) < 1:
        raise InputError("z0 must be a nonzero point of the open unit disk", field="z0")
    inv = 1 / z0
    poles = model.u_poles() if abs(inv) >= 0.95 * model.radius else PoleSet((), model.cutoff)
    for p, _ in poles:
        if abs(p - inv) <= 1e-6 * abs(inv):
            return {"canonical": False, "residue": None, "expected": None,
                    "expected_opposite_sign": None, "reason": "1/z0 is a pole of u"}
    res = complex(model.m_residue(z0))
    expected = (z0 - inv) / (complex(model.du(z0)) * complex(np.asarray(model.u(np.array([inv])))[0]))
    ok = abs(res - expected) <= tol * max(abs(res), abs(expected))
    return {"canonical": bool(ok), "residue": res.real, "expected": expected.real,
            "expected_opposite_sign": -expected.real,
            "reason": "residue matches" if ok else "residue differs"}


def eigen_data(params, tol=1e-12, step=1e-3) -> SpectralData:
    """Bound states ``E0 = z0 + 1/z0`` from the zeros of ``u`` in ``(-1, 1)``.

    Weights come from ``lim (z - z0) M(z) = w0 z0**2 / (z0**2 - 1)``.

    Examples
    --------
    >>> d = eigen_data(JacobiParameters.from_lists(b=[2.5]))
    >>> round(d.eigen_pairs[0].z0, 12), round(d.eigen_pairs[0].weight, 12)
    (0.4, 0.84)
    """
    model = as_model(params)
    zeros, ends = find_zeros(model, tol=min(tol, 1e-14), step=step)
    pairs = []
    for z0 in zeros:
        if abs(z0) < 1e-12:
            raise NumericalError("u vanishes at z = 0")
        cls = classify_zero(model, z0)
        res = complex(model.m_residue(z0)).real
        w = res * (z0 ** 2 - 1) / z0 ** 2
        if not 0 < w < 1 + 1e-9:
            raise NumericalError(f"weight {w:.6g} at z0 = {z0:.6g} is not in (0, 1)")
        pairs.append(EigenPair(z0, z0 + 1 / z0, w, cls["canonical"], res,
                               cls["expected"] if cls["expected"] is not None else float("nan")))
    scale = 1e-9
    return SpectralData(tuple(pairs), bool(abs(ends[0]) < scale), bool(abs(ends[1]) < scale))


def regular_level(params: JacobiParameters, k_max=64, tol=1e-12) -> int:
    """Smallest ``k`` such that ``J^(k)`` has no bound states and ``u^(k)(+-1) != 0``.

    Raises :class:`ConvergenceError` when ``k_max`` strips do not suffice.
    """
    cur = params
    for k in range(k_max + 1):
        d = eigen_data(cur, tol)
        if not d.eigen_pairs and not d.resonance_at_plus1 and not d.resonance_at_minus1:
            return k
        cur = cur.shift(1)
    raise ConvergenceError(f"no regular stripping level within {k_max} steps")


# ---------------------------------------------------------------------------
# pole sets


def pole_sets(model, cutoff=8.0, tol=1e-6, classify_tol=1e-8):
    """``(P1, P2, P)``: poles of ``u`` in ``1 < |z| <= cutoff``, reciprocals
    of noncanonical zeros, and their union (orders from the pole model, order
    one for ``P2`` points)."""
    model = as_model(model, cutoff)
    P1 = model.u_poles().within(cutoff)
    zeros, _ = find_zeros(model)
    p2 = []
    for z0 in zeros:
        inv = 1 / z0
        cls = classify_zero(model, z0, classify_tol)
        if not cls["canonical"] and abs(inv) <= cutoff * (1 + 1e-9):
            # a pole of u colliding with a P2 candidate is reported, not merged silently
            if any(abs(p - inv) <= tol * abs(inv) for p, _ in P1) and cls["reason"] != "1/z0 is a pole of u":
                raise AmbiguityError(f"noncanonical reciprocal {inv:.8g} collides with a pole of u")
            if cls["reason"] == "1/z0 is a pole of u":
                continue
            p2.append((complex(inv), 1))
    P2 = PoleSet(tuple(p2), cutoff)
    return P1, P2, P1.union(P2)
