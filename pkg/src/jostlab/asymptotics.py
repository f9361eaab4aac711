"""Exponential-polynomial (Prony) extraction and meromorphic models.

A sequence ``x_n = sum_j p_j(n) mu_j**(-n)`` makes the Hankel matrix
``H[i, k] = x_{i+k}`` rank ``sum_j (deg p_j + 1)``; its dominant right singular
vectors are shift invariant, and the eigenvalues of the shift are the
``1/mu_j`` (ESPRIT).  Higher-order terms show up as clusters of eigenvalues
which are merged and fitted with a confluent Vandermonde system.  Everything
runs in mpmath at the requested precision since the Hankel conditioning grows
like ``(max|mu| / min|mu|)**L``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np

from jostlab import _numeric as nm
from jostlab.core import (AmbiguityError, AsymptoticSeries, ConvergenceError, InputError, PoleSet,
                          PowerSeriesModel, RegionError, SeriesTerm)

DEFAULT_PREC = 128
RANK_GAP = 1e-10
CLUSTER_REL = 1e-6


@dataclass
class ExtractionInfo:
    """Diagnostics of one extraction."""

    rank: int
    singular_values: list
    pencil_size: int
    residual_rate: float
    condition: float
    merged: list = field(default_factory=list)


def _to_mp(x, prec):
    with mpmath.workprec(prec):
        out = []
        for v in x:
            if isinstance(v, (mpmath.mpf, mpmath.mpc)):
                out.append(+v)
            elif isinstance(v, (complex, np.complexfloating)):
                out.append(mpmath.mpc(complex(v)))
            else:
                out.append(mpmath.mpf(float(v)) if isinstance(v, np.floating) else mpmath.mpmathify(v))
    return out


def _data_prec(x, prec):
    """Precision the thresholds may assume: double inputs carry only ~53 bits,
    so promoting them does not lower their noise floor."""
    if any(isinstance(v, (float, complex, np.floating, np.complexfloating)) for v in x):
        return min(prec, 64)
    return prec


def _is_real_data(x):
    return all(not isinstance(v, mpmath.mpc) or v.imag == 0 for v in x)


def _numerical_rank(sv, gap=RANK_GAP, floor=None):
    """First index where the spectrum hits ``floor`` or drops by ``gap``."""
    s0 = sv[0]
    if s0 == 0:
        return 0
    for i in range(1, len(sv)):
        if floor is not None and sv[i] <= s0 * floor:
            return i
        if sv[i - 1] > 0 and sv[i] / sv[i - 1] < gap:
            return i
    raise AmbiguityError(
        f"Hankel rank ambiguous: no singular-value gap below {gap:g} "
        f"(condition sigma_0/sigma_min = {float(s0 / sv[-1]) if sv[-1] else math.inf:.3g})")


def _esprit(x, L, prec, gap, floor, rank=None, grow=True):
    """Rates ``1/z_j`` of the shift-invariant subspace of the Hankel matrix.

    With ``grow`` the pencil is enlarged (up to ``N // 2``) while the
    detected rank leaves fewer than two spare columns.
    """
    N = len(x)
    while True:
        rates, sv, r = _esprit_once(x, L, prec, gap, floor, rank)
        L_next = min(N // 2, int(L * 1.5) + 1)
        if not grow or rank is not None or r < L - 1 or L_next <= L:
            break
        L = L_next
    if r > L - 1 and rank is None:
        raise AmbiguityError(f"Hankel rank {r} fills the pencil (L = {L}); supply more data")
    return rates, sv, r, L


def _esprit_once(x, L, prec, gap, floor, rank):
    N = len(x)
    rows = N - L
    with mpmath.workprec(prec):
        H = mpmath.matrix(rows, L + 1)
        for i in range(rows):
            for k in range(L + 1):
                H[i, k] = x[i + k]
        try:
            _, S, V = mpmath.svd(H, compute_uv=True)
        except ValueError:
            raise AmbiguityError(
                f"Hankel matrix singular-value iteration failed (pencil {rows}x{L + 1})") from None
        sv = [S[i] for i in range(min(rows, L + 1))]
        try:
            r = rank if rank is not None else _numerical_rank(sv, gap, floor)
        except AmbiguityError:
            r = L + 1
        if r == 0 or r > L:
            return [], sv, r
        # right singular vectors: rows of V (H = U S V)
        W = mpmath.matrix(L + 1, r)
        for i in range(L + 1):
            for j in range(r):
                W[i, j] = mpmath.conj(V[j, i])
        W1 = W[0:L, :]
        W2 = W[1:L + 1, :]
        W1h = W1.H
        Phi = mpmath.inverse(W1h * W1) * (W1h * W2)
        if r == 1:
            ev = [Phi[0, 0]]
        else:
            ev = mpmath.eig(Phi, left=False, right=False)
        rates = [1 / z for z in ev if z != 0]
    return rates, sv, r


def _cluster(rates, rel=CLUSTER_REL):
    """Merge rates within ``rel`` of each other into (mean, multiplicity)."""
    groups = []
    for mu in sorted(rates, key=lambda m: (float(abs(m)), float(mpmath.arg(m)))):
        for g in groups:
            if abs(g[0] - mu) <= rel * abs(mu):
                g.append(mu)
                break
        else:
            groups.append([mu])
    out = []
    for g in groups:
        mean = sum(g) / len(g)
        out.append((mean, len(g)))
    return out


def _symmetrize(clusters, real, rel=CLUSTER_REL, keep_within=None):
    """Pair complex rates with their conjugates (real data).

    Unpaired rates beyond ``keep_within`` are kept as they are (they model the
    finite/entire part of a Taylor sequence); any other unpaired rate is an
    error.
    """
    if not real:
        return clusters
    out = []
    used = [False] * len(clusters)
    for i, (mu, m) in enumerate(clusters):
        if used[i]:
            continue
        used[i] = True
        mu = mpmath.mpc(mu)
        if abs(mu.imag) <= rel * abs(mu):
            out.append((mpmath.mpf(mu.real), m))
            continue
        partner = None
        for j in range(i + 1, len(clusters)):
            if not used[j] and abs(clusters[j][0] - mpmath.conj(mu)) <= 1e3 * rel * abs(mu):
                partner = j
                break
        if partner is None:
            if keep_within is not None and abs(mu) > keep_within:
                out.append((clusters[i][0], m))
                continue
            raise AmbiguityError(f"complex rate {complex(mu):.6g} has no conjugate partner in real data")
        used[partner] = True
        mid = (mu + mpmath.conj(clusters[partner][0])) / 2
        m = max(m, clusters[partner][1])
        out.extend([(mid, m), (mpmath.conj(mid), m)])
    return out


def _basis(n, mu, d, kind):
    if kind == "binomial":
        # coefficient of z**n in (1 - z/mu)**-(d+1)
        return mpmath.binomial(n + d, d) * mu ** (-n)
    return mpmath.mpf(n) ** d * mu ** (-n) if d else mu ** (-n)


def _lstsq(A, b):
    """Householder least squares (keeps the conditioning of ``A``)."""
    sol, _ = mpmath.qr_solve(A, b)
    return sol


def _design(N, n0, clusters, kind, with_rates=None, moving=None):
    """Column-scaled confluent Vandermonde matrix; ``with_rates`` adds the
    rate-derivative columns ``-n p_j(n) mu_j**(-n-1)``."""
    cols = []
    for j, (mu, m) in enumerate(clusters):
        for d in range(m):
            cols.append([_basis(n0 + i, mu, d, kind) for i in range(N)])
    if with_rates is not None:
        for j, ((mu, m), poly) in enumerate(zip(clusters, with_rates)):
            if moving is not None and j not in moving:
                continue
            col = []
            for i in range(N):
                n = n0 + i
                val = sum(a * _basis(n, mu, d, kind) for d, a in enumerate(poly))
                col.append(-n * val / mu)
            cols.append(col)
    A = mpmath.matrix(N, len(cols))
    scale = []
    for c, col in enumerate(cols):
        s = max(abs(v) for v in col) or mpmath.mpf(1)
        scale.append(s)
        for i in range(N):
            A[i, c] = col[i] / s
    return A, scale


def _split(coef, scale, clusters):
    out, c = [], 0
    for _, m in clusters:
        out.append([coef[c + d] / scale[c + d] for d in range(m)])
        c += m
    return out, c


def _fit_amplitudes(x, n0, clusters, prec, kind="power", refine=4, refine_within=None):
    """Least-squares amplitudes for each (mu, multiplicity).

    The rates from the pencil (those below ``refine_within``) are then
    polished by Gauss-Newton steps on the joint (rate, amplitude) problem;
    returns ``(clusters, amplitudes)``.
    """
    N = len(x)
    if not clusters:
        return clusters, []
    with mpmath.workprec(prec + 32):
        b = mpmath.matrix([x[i] for i in range(N)])
        A, scale = _design(N, n0, clusters, kind)
        polys, _ = _split(_lstsq(A, b), scale, clusters)
        moving = [j for j, (mu, _) in enumerate(clusters) if refine_within is None or abs(mu) <= refine_within]
        for _ in range(refine if moving else 0):
            A, scale = _design(N, n0, clusters, kind, with_rates=polys, moving=moving)
            resid = mpmath.matrix([x[i] - sum(sum(a * _basis(n0 + i, mu, d, kind) for d, a in enumerate(p))
                                              for (mu, _), p in zip(clusters, polys)) for i in range(N)])
            step = _lstsq(A, resid)
            dpoly, c = _split(step, scale, clusters)
            dmus = {j: step[c + i] / scale[c + i] for i, j in enumerate(moving)}
            done = all(abs(dmus[j]) <= 2.0 ** (-prec) * abs(clusters[j][0]) for j in moving)
            new_clusters = []
            for j, (mu, m) in enumerate(clusters):
                dmu = dmus.get(j, 0)
                if abs(dmu) > 1e-3 * abs(mu):
                    # far from converged: keep the pencil estimate
                    new_clusters.append((mu, m))
                else:
                    new_clusters.append((mu + dmu, m))
            clusters = new_clusters
            A, scale = _design(N, n0, clusters, kind)
            polys, _ = _split(_lstsq(A, b), scale, clusters)
            if done:
                break
    with mpmath.workprec(prec):
        clusters = [(+mu, m) for mu, m in clusters]
        polys = [[+a for a in p] for p in polys]
    return clusters, polys


def _clean_poly(poly, mu, real, partner_poly=None):
    if real and isinstance(mu, mpmath.mpf):
        poly = [mpmath.mpf(mpmath.re(c)) for c in poly]
    return poly


def _series_from_fit(clusters, polys, real):
    terms = []
    for (mu, _), poly in zip(clusters, polys):
        poly = _clean_poly(poly, mu, real)
        terms.append((mu, poly))
    if real:
        # make conjugate partners exactly conjugate
        fixed = []
        for mu, poly in terms:
            if isinstance(mu, mpmath.mpc) and mu.imag < 0:
                partner = next(p for m, p in terms if isinstance(m, mpmath.mpc) and abs(m - mpmath.conj(mu)) == 0)
                poly = [mpmath.conj(c) for c in partner]
            fixed.append((mu, poly))
        terms = fixed
    return terms


def evaluate_terms(terms, n, prec):
    """``sum_j p_j(n) mu_j**(-n)`` and ``sum_j |p_j(n)| |mu_j|**(-n)``."""
    with mpmath.workprec(prec):
        val = mpmath.mpf(0)
        mag = mpmath.mpf(0)
        for mu, poly in terms:
            pn = nm.polyval(list(poly), mpmath.mpf(n))
            t = pn * mpmath.power(mu, -n)
            val += t
            mag += abs(t)
    return val, mag


def certify_residual(x, series: AsymptoticSeries, R=None, start=0, prec=DEFAULT_PREC, floor_rel=None):
    """Largest ``|x_n - sum_j p_j(n) mu_j**(-n)|**(1/n)`` over the tail third.

    Residuals at the arithmetic noise floor (``2**(20 - prec)`` relative to the
    magnitude of the summed terms) count as rate 0.

    Examples
    --------
    >>> s = AsymptoticSeries([(2, (1,))])
    >>> certify_residual([2.0 ** -n for n in range(30)], s)
    0.0
    """
    if floor_rel is None:
        floor_rel = 2.0 ** (-(prec - 20))
    xs = _to_mp(x, prec)
    terms = [(t.mu, t.poly) for t in series.terms]
    N = len(xs)
    first = max(start + N - max(N // 3, 1), start + 1)
    worst = 0.0
    with mpmath.workprec(prec):
        for n in range(first, start + N):
            xn = xs[n - start]
            val, mag = evaluate_terms(terms, n, prec)
            res = abs(xn - val)
            if res <= floor_rel * (mag + abs(xn)):
                continue
            worst = max(worst, float(mpmath.power(res, mpmath.mpf(1) / n)))
    return worst


def extract_series(x, R_target=None, tol=1e-10, prec=DEFAULT_PREC, start=0, L=None, rank=None,
                   gap=RANK_GAP, return_info=False):
    """Recover ``x_n = sum_j p_j(n) mu_j**(-n)`` from samples ``x_start..``.

    Parameters
    ----------
    x : sequence
        Samples (floats, complex or mpmath numbers), ``x[i]`` being index
        ``start + i``.
    R_target : float, optional
        Remainder radius to certify: the residual rate on the tail third must
        not exceed ``1/R_target + tol``.  Rates with ``|mu| >= R_target``
        belong to the remainder and are dropped.
    tol : float
        Slack on the residual criterion.
    prec : int
        Working precision in bits.
    L : int, optional
        Initial pencil size (default ``min(N // 3, 24)``, enlarged while the
        detected rank fills it).
    rank : int, optional
        Force the model order instead of detecting it.

    Returns
    -------
    AsymptoticSeries, or ``(series, ExtractionInfo)`` with ``return_info``.
    """
    # clustering and cleanup must not fall back to the global mpmath precision
    with mpmath.workprec(prec):
        return _extract_series(x, R_target, tol, prec, start, L, rank, gap, return_info)


def _extract_series(x, R_target, tol, prec, start, L, rank, gap, return_info):
    eff = _data_prec(list(x), prec)
    xs = _to_mp(x, prec)
    N = len(xs)
    if N < 8:
        raise InputError("need at least 8 samples", field="x")
    if L is None:
        L = max(4, min(N // 3, 24))
    if 2 * L > N:
        raise InputError(f"pencil size L={L} too large for {N} samples", field="L")
    real = _is_real_data(xs)
    if all(v == 0 for v in xs):
        series = AsymptoticSeries((), R_target if R_target else math.inf)
        return (series, ExtractionInfo(0, [], L, 0.0, 1.0)) if return_info else series
    floor = 2.0 ** (-(eff - 24))
    rates, sv, r, L = _esprit(xs, L, prec, gap, floor, rank)
    if N < 4 * max(1, len(_cluster(rates))):
        raise InputError(f"{N} samples are too few for {len(rates)} rates (need 4 per term)", field="x")
    clusters = _symmetrize(_cluster(rates), real)
    merged = [(complex(mu), m) for mu, m in clusters if m > 1]
    for mu, m in merged:
        warnings.warn(f"merged {m} rates near {mu:.6g} into one order-{m} term", stacklevel=2)
    bad = [mu for mu, _ in clusters if not abs(mu) > 1]
    if bad:
        raise ConvergenceError(f"recovered non-decaying rate {complex(bad[0]):.6g}; sequence does not decay")
    if R_target is not None:
        clusters = [(mu, m) for mu, m in clusters if abs(mu) < R_target]
    clusters, polys = _fit_amplitudes(xs, start, clusters, prec)
    clusters = _symmetrize(clusters, real)
    polys = _fit_amplitudes(xs, start, clusters, prec, refine=0)[1]
    terms = _series_from_fit(clusters, polys, real)
    with mpmath.workprec(nm.STORE_PREC):
        series = AsymptoticSeries(tuple(SeriesTerm(mu, tuple(p)) for mu, p in terms),
                                  R_target if R_target is not None else math.inf)
    # rounding of the rates at the working precision is amplified by n (and
    # n**deg) over the window; residuals of that size are not missing terms
    rate = certify_residual(xs, series, R_target, start=start, prec=prec,
                            floor_rel=2.0 ** (-(eff - 20)) * N * N)
    if R_target is not None and rate > 1.0 / R_target + tol:
        raise ConvergenceError(
            f"residual rate {rate:.6g} exceeds 1/R_target = {1.0 / R_target:.6g}")
    if return_info:
        cond = float(sv[0] / sv[r - 1]) if r else 1.0
        return series, ExtractionInfo(r, [float(s) for s in sv], L, rate, cond, merged)
    return series


# ---------------------------------------------------------------------------
# meromorphic models


def coefficient_radius(c, noise=None, min_usable=8, contiguous=False):
    """Empirical radius of convergence from ``log|c_k|`` over the usable tail.

    Returns ``(radius, stderr_of_slope, usable)``; ``radius`` is ``inf`` when
    fewer than ``min_usable`` coefficients stand above ``noise``.  With
    ``contiguous`` the usable range ends where the coefficients first stay
    under the noise for three consecutive indices, so scattered noise beyond
    the floor does not enter the fit.
    """
    logs = nm.log_abs(np.asarray(c, dtype=object) if not isinstance(c, np.ndarray) else c)
    ks = np.arange(len(logs))
    ok = np.isfinite(logs)
    if noise is not None:
        ok &= logs > np.log(np.maximum(noise, 1e-300)) if np.ndim(noise) else logs > math.log(max(noise, 1e-300))
    if contiguous:
        # first run of three consecutive coefficients under the floor; single
        # dips (e.g. parity zeros) do not end the range
        below = (~ok) & (ks > 0)
        run = below[:-2] & below[1:-1] & below[2:] if len(below) > 2 else below[:0]
        first = np.nonzero(run)[0]
        if first.size:
            ok &= ks < first[0]
    idx = ks[ok & (ks > 0)]
    if len(idx) < min_usable:
        return math.inf, math.nan, len(idx)
    # tail window: last half of the usable coefficients
    idx = idx[len(idx) // 2:]
    A = np.stack([np.ones(len(idx)), idx.astype(float)], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, logs[idx], rcond=None)
    slope = coef[1]
    dof = max(len(idx) - 2, 1)
    sigma2 = float(res[0]) / dof if len(res) else 0.0
    se = math.sqrt(sigma2 / np.sum((idx - idx.mean()) ** 2)) if len(idx) > 2 else math.nan
    radius = math.exp(-slope) if slope < 0 else math.inf
    return radius, se, len(idx)


@dataclass(frozen=True, eq=False)
class MeromorphicModel:
    """Poles with principal parts plus an analytic remainder.

    ``principal[j]`` holds coefficients ``a_d`` of ``sum_d a_d (1 - z/mu_j)**-(d+1)``
    for the ``j``-th point of ``poles``; ``entire`` holds Taylor coefficients
    of what is left, trusted for ``|z| < radius``.
    """

    poles: PoleSet
    principal: tuple
    entire: np.ndarray
    radius: float
    prec: int = DEFAULT_PREC
    name: str = ""

    def principal_value(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros(z.shape, dtype=complex)
        for (mu, _), coeffs in zip(self.poles.points, self.principal):
            w = 1 - z / mu
            for d, a in enumerate(coeffs):
                acc = acc + complex(a) / w ** (d + 1)
        return acc

    def entire_value(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= self.radius):
            raise RegionError(f"meromorphic model of {self.name or 'series'} trusted only for |z| < {self.radius:.6g}")
        e = nm.to_complex_array(self.entire)
        # drop coefficients whose contribution is below roundoff at this |z|
        zmax = float(np.max(np.abs(z))) if z.size else 0.0
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            k = np.arange(len(e))
            mags = np.abs(e) * np.power(max(zmax, 1e-300), k)
        keep = np.nonzero(mags > 1e-18 * max(np.max(mags), 1e-300))[0]
        last = int(keep[-1]) + 1 if keep.size else 1
        return nm.polyval(e[:last], z)

    def __call__(self, z):
        scalar_in = np.ndim(z) == 0
        v = self.principal_value(z) + self.entire_value(z)
        return complex(v) if scalar_in else v

    def to_json(self) -> dict:
        return {
            "poles": [{"z": [p.real, p.imag], "order": o,
                       "principal": [nm.to_json_number(mpmath.mpc(a)) for a in coeffs]}
                      for (p, o), coeffs in zip(self.poles.points, self.principal)],
            "entire": [nm.to_json_number(mpmath.mpc(c)) for c in self.entire],
            "radius": self.radius if math.isfinite(self.radius) else "inf",
        }


def resolvable_length(tol, rho, r, margin=10):
    """Coefficients needed to separate a pole at ``rho`` from singularities at ``r``."""
    if not r > rho:
        return math.inf
    return int(math.ceil(2 * math.log(tol) / math.log(rho / r))) + margin


def poles_from_taylor(series, cutoff, tol=1e-8, prec=None, L=None, name=None, margin=10):
    """Meromorphic model of a function from its Taylor coefficients.

    Poles up to ``cutoff`` are located by ESPRIT on the coefficient sequence
    (the rank is taken down to the arithmetic floor, so farther poles are
    modelled too and do not bias the near ones) and cross-checked with a
    second pencil size.  Orders come from eigenvalue clusters, principal
    parts from a binomial-basis least-squares fit.

    Parameters
    ----------
    series : PowerSeriesModel or sequence
    cutoff : float
        Largest modulus reported.
    tol : float
        Relative agreement required between the two pencils; also enters the
        resolvability rule ``N >= 2 log(tol) / log(cutoff / r) + margin``.
    """
    if prec is None:
        prec = max(series.precision_bits, DEFAULT_PREC) if isinstance(series, PowerSeriesModel) else DEFAULT_PREC
    with mpmath.workprec(prec):
        return _poles_from_taylor(series, cutoff, tol, prec, L, name, margin)


def _poles_from_taylor(series, cutoff, tol, prec, L, name, margin):
    if isinstance(series, PowerSeriesModel):
        coeffs = list(series.coeffs)
        prec = prec or max(series.precision_bits, DEFAULT_PREC)
        name = name or series.name
    else:
        coeffs = list(series)
        prec = prec or DEFAULT_PREC
    eff = _data_prec(coeffs, prec)
    xs = _to_mp(coeffs, prec)
    N = len(xs)
    real = _is_real_data(xs)
    if L is None:
        L = max(4, min(N // 3, 24))
    floor = 2.0 ** (-(eff - 24))

    def run(Lv, grow=True):
        rates, sv, r, Lv = _esprit(xs, Lv, prec, 0.0, floor, grow=grow)
        return _symmetrize(_cluster(rates), real, keep_within=cutoff * 1.5), sv, r, Lv

    clusters, sv, r, L = run(L)
    clusters2 = run(L + max(2, L // 6), grow=False)[0]
    with mpmath.workprec(prec):
        clusters, polys = _fit_amplitudes(xs, 0, clusters, prec, kind="binomial", refine_within=4 * cutoff)
        clusters = _symmetrize(clusters, real, keep_within=cutoff * 1.5)
        polys = _fit_amplitudes(xs, 0, clusters, prec, kind="binomial", refine=0)[1]
        # significance: a genuine pole carries more than the noise floor somewhere
        contrib = []
        for (mu, m), poly in zip(clusters, polys):
            contrib.append([sum(a * _basis(k, mu, d, "binomial") for d, a in enumerate(poly)) for k in range(N)])
        env = [abs(xs[k]) + sum(abs(c[k]) for c in contrib) for k in range(N)]
        keep = []
        for j, ((mu, m), poly) in enumerate(zip(clusters, polys)):
            sig = max(abs(contrib[j][k]) / env[k] for k in range(N) if env[k] > 0)
            if sig > 2.0 ** (-(eff - 40)):
                keep.append(j)
    inner = [j for j in keep if abs(clusters[j][0]) <= cutoff * (1 + tol)]
    outer = [abs(clusters[j][0]) for j in keep if abs(clusters[j][0]) > cutoff * (1 + tol)]
    # stability of the inner poles across pencil sizes
    for j in inner:
        mu, m = clusters[j]
        if not any(abs(mu - nu) <= tol * abs(mu) and m2 == m for nu, m2 in clusters2):
            raise AmbiguityError(f"pole near {complex(mu):.8g} (order {m}) is not stable across pencil sizes")
    # remainder = data minus inner principal parts
    with mpmath.workprec(prec):
        rem = [xs[k] - sum(contrib[j][k] for j in inner) for k in range(N)]
        # the full-model residual shows how well the fit resolved the data
        full = [abs(xs[k] - sum(c[k] for c in contrib)) for k in range(N)]
        noise = [max(2.0 ** (-(eff - 40)) * float(env[k]), 1e4 * float(max(full[max(k - 2, 0):k + 3])))
                 for k in range(N)]
    radius, _, usable = coefficient_radius(np.array(rem, dtype=object), np.array(noise))
    r_next = min(outer + [radius])
    if inner and math.isfinite(r_next):
        rho = max(abs(clusters[j][0]) for j in inner)
        need = resolvable_length(tol, rho, r_next, margin)
        if N < need:
            raise ConvergenceError(
                f"{N} coefficients cannot resolve a pole at |z| = {float(rho):.6g} against "
                f"singularities at {float(r_next):.6g} (need {need})")
    pts = []
    principal = []
    for j in inner:
        mu, m = clusters[j]
        pts.append((complex(mu), m))
        principal.append(tuple(polys[j]))
    order = sorted(range(len(pts)), key=lambda i: (round(abs(pts[i][0]), 9), round(float(np.angle(pts[i][0])), 9)))
    pts = [pts[i] for i in order]
    principal = [principal[i] for i in order]
    poles = PoleSet(tuple(pts), cutoff)
    # PoleSet sorts with the same key, so principal parts stay aligned
    valid = min(r_next, radius) if math.isfinite(radius) else r_next
    return MeromorphicModel(poles, tuple(principal), np.array(rem, dtype=object), float(valid), prec,
                            name or "")
