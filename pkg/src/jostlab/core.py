"""Domain types, validation and the JSON data model.

Jacobi parameters ``a_n, b_n`` are 1-indexed, Verblunsky coefficients
``alpha_n`` are 0-indexed.  Sequences are given by an explicit head and a tail
that is either free (``a_n = 1, b_n = 0`` resp. ``alpha_n = 0``) or an
:class:`AsymptoticSeries` model.  For Jacobi parameters the tail model
generates the interleaved sequence ``x_k`` with ``x_0 = 1``,
``x_{2n-1} = -b_n`` and ``x_{2n} = 1 - a_n**2``; for Verblunsky coefficients
it generates ``alpha_n`` directly.  Head values override generated values on
overlapping indices.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from jostlab import _numeric as nm

N_MAX = 1_000_000


class JostlabError(Exception):
    """Base class for all package errors."""


class InputError(JostlabError, ValueError):
    """Invalid input document or parameter, with the offending locus."""

    def __init__(self, message, index=None, field=None):
        self.index = index
        self.field = field
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if index is not None:
            where.append(f"index {index}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class NumericalError(JostlabError, ArithmeticError):
    """A computation could not reach its contract."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message if index is None else f"{message} (at index {index})")


class ConvergenceError(NumericalError):
    pass


class RegionError(NumericalError):
    """Evaluation point outside the certified region of a representation."""


class PoleError(NumericalError):
    """Evaluation hit (or came within tolerance of) a pole."""

    def __init__(self, message, location=None, level=None):
        self.location = location
        self.level = level
        super().__init__(message if level is None else f"{message} (level {level})")


class AmbiguityError(NumericalError):
    """Two structurally different outcomes are indistinguishable at tolerance."""


# ---------------------------------------------------------------------------
# asymptotic series


@dataclass(frozen=True)
class SeriesTerm:
    """One term ``poly(n) * mu**(-n)`` of an asymptotic series."""

    mu: object
    poly: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu", nm.stored(self.mu))
        poly = tuple(nm.stored(c) for c in self.poly)
        if not poly:
            raise InputError("series term needs at least one polynomial coefficient", field="poly")
        object.__setattr__(self, "poly", poly)

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    @property
    def order(self) -> int:
        """Pole order of the generating function at ``mu``."""
        return len(self.poly)


def _conj(v):
    return mpmath.conj(v) if isinstance(v, mpmath.mpc) else v


@dataclass(frozen=True)
class AsymptoticSeries:
    """Finite exponential-polynomial model ``x_n = sum_j p_j(n) mu_j**(-n)``.

    ``remainder_radius`` is the radius ``R`` up to which the model is a
    complete description (``inf`` for an exact model).  ``parity`` is
    ``"interleaved"`` when the series models the interleaved Jacobi sequence.
    """

    terms: tuple = ()
    remainder_radius: object = math.inf
    parity: str | None = None

    def __post_init__(self):
        terms = tuple(t if isinstance(t, SeriesTerm) else SeriesTerm(*t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        R = nm.stored(self.remainder_radius)
        object.__setattr__(self, "remainder_radius", R)
        if not R > 1:
            raise InputError("remainder radius must exceed 1", field="R")
        for i, t in enumerate(terms):
            m = abs(t.mu)
            if not m > 1:
                raise InputError(f"|mu| = {float(m):.6g} must exceed 1 (decay hypothesis)", index=i, field="mu")
            if not m < R:
                raise InputError(f"|mu| = {float(m):.6g} must be below the remainder radius", index=i, field="mu")
            for j in range(i):
                if abs(terms[j].mu - t.mu) <= abs(t.mu) * mpmath.mpf(2) ** (-200):
                    raise InputError("rates mu must be pairwise distinct", index=i, field="mu")
        if self.parity not in (None, "interleaved"):
            raise InputError(f"unknown parity marker {self.parity!r}", field="parity")

    @property
    def rates(self) -> list:
        return [t.mu for t in self.terms]

    @property
    def min_modulus(self):
        return min((abs(t.mu) for t in self.terms), default=mpmath.inf)

    def is_real(self, rel=mpmath.mpf(2) ** -180) -> bool:
        """True when the modeled sequence is real (conjugation-closed terms)."""
        for t in self.terms:
            partner = None
            for s in self.terms:
                if abs(s.mu - _conj(t.mu)) <= rel * abs(t.mu):
                    partner = s
                    break
            if partner is None or len(partner.poly) != len(t.poly):
                return False
            scale = max(abs(c) for c in t.poly) or 1
            if any(abs(c - _conj(d)) > rel * scale for c, d in zip(t.poly, partner.poly)):
                return False
        return True

    def bound(self, n: int):
        """Upper bound ``sum_j |p_j(n)| |mu_j|**(-n)`` on ``|x_n|``."""
        with mpmath.workprec(64):
            total = mpmath.mpf(0)
            for t in self.terms:
                pn = sum(abs(c) * mpmath.mpf(n) ** d for d, c in enumerate(t.poly))
                total += pn * abs(t.mu) ** (-n)
            return total

    def evaluate(self, n, prec=None):
        """Values at the integer indices ``n`` (float/complex or mpmath array)."""
        n = np.asarray(n, dtype=np.int64)
        real = self.is_real()
        if nm.is_extended(prec):
            out = np.empty(n.shape, dtype=object)
            with mpmath.workprec(prec):
                terms = [(mpmath.mpc(t.mu), [mpmath.mpc(c) for c in t.poly]) for t in self.terms]
                for idx, k in np.ndenumerate(n):
                    acc = mpmath.mpc(0)
                    kk = mpmath.mpf(int(k))
                    for mu, poly in terms:
                        acc += nm.polyval(poly, kk) * mu ** (-int(k))
                    out[idx] = acc.real if real else acc
            return out
        acc = np.zeros(n.shape, dtype=complex)
        nf = n.astype(float)
        for t in self.terms:
            mu = complex(t.mu)
            poly = [complex(c) for c in t.poly]
            with np.errstate(under="ignore", over="ignore"):
                if mu.imag == 0:
                    # real rate: |mu|**-n is correctly rounded, no complex log
                    sign = np.where(n % 2 == 1, np.sign(mu.real), 1.0)
                    acc += nm.polyval(poly, nf) * sign * np.power(abs(mu.real), -nf)
                else:
                    acc += nm.polyval(poly, nf) * np.exp(-nf * np.log(mu))
        return acc.real if real else acc

    def realize(self, N: int, start: int = 0, prec=None):
        if N > N_MAX:
            raise InputError(f"requested length {N} exceeds the configured maximum {N_MAX}")
        return self.evaluate(np.arange(start, start + N), prec=prec)

    def generating_sum(self, z, prec=None):
        """``sum_{k>=1} x_k z**k`` continued meromorphically (poles at the ``mu_j``)."""
        with nm.working(prec):
            if nm.is_extended(prec):
                z = mpmath.mpc(z)
                terms = [(mpmath.mpc(t.mu), [mpmath.mpc(c) for c in t.poly]) for t in self.terms]
                acc = mpmath.mpc(0)
            else:
                z = np.asarray(z, dtype=complex)
                terms = [(complex(t.mu), [complex(c) for c in t.poly]) for t in self.terms]
                acc = np.zeros(z.shape, dtype=complex)
            for mu, poly in terms:
                w = z / mu
                for d, c in enumerate(poly):
                    if c != 0:
                        acc = acc + c * nm.power_geometric_sum(d, w)
            return acc

    def shifted(self, s: int) -> "AsymptoticSeries":
        """Model of the shifted sequence ``y_n = x_{n+s}``."""
        terms = []
        with mpmath.workprec(nm.STORE_PREC):
            for t in self.terms:
                factor = t.mu ** (-s)
                terms.append(SeriesTerm(t.mu, tuple(c * factor for c in nm.poly_shift(list(t.poly), s))))
        return AsymptoticSeries(tuple(terms), self.remainder_radius, self.parity)

    def scaled(self, eps) -> "AsymptoticSeries":
        with mpmath.workprec(nm.STORE_PREC):
            e = nm.stored(eps)
            terms = tuple(SeriesTerm(t.mu, tuple(c * e for c in t.poly)) for t in self.terms)
        return AsymptoticSeries(terms, self.remainder_radius, self.parity)

    def to_json(self) -> dict:
        return {
            "type": "series",
            "terms": [{"mu": nm.to_json_number(mpmath.mpc(t.mu)),
                       "poly": [nm.to_json_number(c) for c in t.poly]} for t in self.terms],
            "R": nm.to_str(self.remainder_radius),
            **({"parity": self.parity} if self.parity else {}),
        }

    @classmethod
    def from_json(cls, doc: dict, parity=None) -> "AsymptoticSeries":
        try:
            raw_terms = doc["terms"]
        except (KeyError, TypeError):
            raise InputError("series tail needs a 'terms' list", field="terms") from None
        terms = []
        for i, t in enumerate(raw_terms):
            if not isinstance(t, dict) or "mu" not in t or "poly" not in t:
                raise InputError("series term needs 'mu' and 'poly'", index=i, field="terms")
            try:
                terms.append(SeriesTerm(t["mu"], tuple(t["poly"])))
            except (ValueError, TypeError) as exc:
                raise InputError(f"bad series term: {exc}", index=i, field="terms") from None
        R = doc.get("R", math.inf)
        return cls(tuple(terms), R, doc.get("parity", parity))


# ---------------------------------------------------------------------------
# coefficient sequences


class RealizedJacobi(NamedTuple):
    """Realized Jacobi parameters ``n = 1..N`` (``a2m1`` is ``a_n**2 - 1``)."""

    a: np.ndarray
    b: np.ndarray
    a2m1: np.ndarray


def _certify_window(series: AsymptoticSeries, start: int, limit=N_MAX) -> int:
    """First index from which the tail bound stays below 1/2."""
    n = start
    while series.bound(n) >= 0.5 or n < start + 8:
        n += 1
        if n > limit:
            raise InputError("tail model does not decay below 1/2 within the configured maximum")
    return n


@dataclass(frozen=True)
class JacobiParameters:
    """Jacobi parameters ``{a_n, b_n}_{n>=1}`` with head and tail model.

    ``head`` holds ``(a_n, b_n)`` pairs for ``n = 1..len(head)``; ``tail`` is
    ``None`` (free) or an interleaved :class:`AsymptoticSeries`.
    """

    head: tuple = ()
    tail: AsymptoticSeries | None = None

    def __post_init__(self):
        head = []
        for i, pair in enumerate(self.head, start=1):
            try:
                a, b = pair
            except (TypeError, ValueError):
                raise InputError("head entries must be (a, b) pairs", index=i, field="head") from None
            a, b = nm.stored(a), nm.stored(b)
            if isinstance(a, mpmath.mpc) or isinstance(b, mpmath.mpc):
                raise InputError("Jacobi parameters must be real", index=i, field="head")
            if not a > 0:
                raise InputError(f"a_n must be positive, got {float(a)}", index=i, field="a")
            head.append((a, b))
        object.__setattr__(self, "head", tuple(head))
        if self.tail is not None:
            if not isinstance(self.tail, AsymptoticSeries):
                raise InputError("tail must be an AsymptoticSeries or None", field="tail")
            if self.tail.parity != "interleaved":
                object.__setattr__(self, "tail", AsymptoticSeries(self.tail.terms, self.tail.remainder_radius,
                                                                  "interleaved"))
            if not self.tail.is_real():
                raise InputError("tail model must generate a real sequence (conjugate-closed rates)",
                                 field="tail")
            # a_n^2 = 1 - x_{2n} > 0 is guaranteed once |x_k| < 1/2
            k_safe = _certify_window(self.tail, 2 * len(head) + 1)
            n_check = k_safe // 2 + 1
            if n_check > len(head):
                x = self.tail.realize(2 * n_check, start=1, prec=nm.STORE_PREC)
                for n in range(len(head) + 1, n_check + 1):
                    if not 1 - x[2 * n - 1] > 0:
                        raise InputError("tail model generates a_n**2 <= 0", index=n, field="tail")

    # -- constructors ------------------------------------------------------
    @classmethod
    def free(cls) -> "JacobiParameters":
        return cls()

    @classmethod
    def from_lists(cls, a: Sequence = (), b: Sequence = ()) -> "JacobiParameters":
        n = max(len(a), len(b))
        a = list(a) + [1] * (n - len(a))
        b = list(b) + [0] * (n - len(b))
        return cls(tuple(zip(a, b)))

    @classmethod
    def from_a2(cls, a2: Sequence = (), b: Sequence = ()) -> "JacobiParameters":
        """Build from ``a_n**2`` values (square roots taken at storage precision)."""
        with mpmath.workprec(nm.STORE_PREC):
            a = [mpmath.sqrt(nm.stored(v)) if nm.stored(v) > 0 else nm.stored(v) for v in a2]
        return cls.from_lists(a, b)

    # -- properties --------------------------------------------------------
    @property
    def is_free_tail(self) -> bool:
        return self.tail is None or not self.tail.terms

    @property
    def decay_radius(self) -> float:
        """Certified ``R_eff``: ``limsup (|a_n^2-1|+|b_n|)^(1/2n) = 1/R_eff``."""
        if self.is_free_tail:
            return math.inf
        return float(self.tail.min_modulus)

    @property
    def support(self) -> int:
        """For a free tail, the last index with a non-free entry (else ``None``)."""
        if not self.is_free_tail:
            return None
        last = 0
        for n, (a, b) in enumerate(self.head, start=1):
            if a != 1 or b != 0:
                last = n
        return last

    def realize(self, N: int, prec=None) -> RealizedJacobi:
        """Entries ``n = 1..N`` as arrays at working precision ``prec``."""
        if N > N_MAX:
            raise InputError(f"requested length {N} exceeds the configured maximum {N_MAX}")
        return _realize_jacobi(self, N, prec)

    def shift(self, k: int) -> "JacobiParameters":
        """Parameters of the stripped matrix ``J^(k)``: ``{a_{n+k}, b_{n+k}}``."""
        if k < 0:
            raise InputError("stripping level must be nonnegative", field="k")
        tail = None if self.is_free_tail else self.tail.shifted(2 * k)
        return JacobiParameters(self.head[k:], tail)

    def scaled(self, eps) -> "JacobiParameters":
        """Scale the perturbation: ``b_n -> eps b_n``, ``a_n^2-1 -> eps (a_n^2-1)``."""
        with mpmath.workprec(nm.STORE_PREC):
            e = nm.stored(eps)
            head = tuple((mpmath.sqrt(1 + e * (a * a - 1)), e * b) for a, b in self.head)
        tail = None if self.is_free_tail else self.tail.scaled(eps)
        return JacobiParameters(head, tail)


def _realize_jacobi(params: JacobiParameters, N: int, prec) -> RealizedJacobi:
    with nm.working(prec):
        if params.is_free_tail:
            x = nm.zeros(2 * N, prec)
        else:
            x = params.tail.realize(2 * N, start=1, prec=prec)
        b = 0 - x[0::2]
        a2m1 = 0 - x[1::2]
        for n, (a_h, b_h) in enumerate(params.head[:N]):
            with mpmath.workprec(nm.STORE_PREC):
                a2m1_h = a_h * a_h - 1
            b[n] = nm.scalar(b_h, prec)
            a2m1[n] = nm.scalar(a2m1_h, prec)
        if nm.is_extended(prec):
            a = np.empty(N, dtype=object)
            for n in range(N):
                if not 1 + a2m1[n] > 0:
                    raise InputError("generated a_n**2 <= 0", index=n + 1)
                a[n] = mpmath.sqrt(1 + a2m1[n])
        else:
            a2m1 = np.asarray(a2m1, dtype=float)
            b = np.asarray(b, dtype=float)
            bad = np.nonzero(1 + a2m1 <= 0)[0]
            if bad.size:
                raise InputError("generated a_n**2 <= 0", index=int(bad[0]) + 1)
            a = np.sqrt(1 + a2m1)
            for n, (a_h, _) in enumerate(params.head[:N]):
                a[n] = float(a_h)
    return RealizedJacobi(a, b, a2m1)


@dataclass(frozen=True)
class VerblunskyCoefficients:
    """Real Verblunsky coefficients ``{alpha_n}_{n>=0}`` with head and tail."""

    head: tuple = ()
    tail: AsymptoticSeries | None = None

    def __post_init__(self):
        head = []
        for i, v in enumerate(self.head):
            v = nm.stored(v)
            if isinstance(v, mpmath.mpc):
                raise InputError("Verblunsky coefficients must be real", index=i, field="head")
            if not abs(v) < 1:
                raise InputError(f"|alpha| = {float(abs(v))} must be below 1", index=i, field="head")
            head.append(v)
        object.__setattr__(self, "head", tuple(head))
        if self.tail is not None:
            if not isinstance(self.tail, AsymptoticSeries):
                raise InputError("tail must be an AsymptoticSeries or None", field="tail")
            if not self.tail.is_real():
                raise InputError("tail model must generate a real sequence", field="tail")
            n_safe = _certify_window(self.tail, len(head))
            if n_safe > len(head):
                x = self.tail.realize(n_safe - len(head), start=len(head), prec=nm.STORE_PREC)
                for i, v in enumerate(x):
                    if not abs(v) < 1:
                        raise InputError("tail model generates |alpha| >= 1", index=len(head) + i,
                                         field="tail")

    @classmethod
    def free(cls) -> "VerblunskyCoefficients":
        return cls()

    @classmethod
    def example_3_4(cls, R=2) -> "VerblunskyCoefficients":
        """``alpha_{2n} = 0``, ``alpha_{2n+1} = R**-(2n+1)`` as an exact two-term model."""
        with mpmath.workprec(nm.STORE_PREC):
            R = nm.stored(R)
            half = mpmath.mpf(1) / 2
            terms = (SeriesTerm(R, (half,)), SeriesTerm(-R, (-half,)))
        return cls((), AsymptoticSeries(terms))

    @property
    def is_free_tail(self) -> bool:
        return self.tail is None or not self.tail.terms

    @property
    def decay_radius(self) -> float:
        if self.is_free_tail:
            return math.inf
        return float(self.tail.min_modulus)

    @property
    def support(self):
        if not self.is_free_tail:
            return None
        last = 0
        for n, v in enumerate(self.head, start=1):
            if v != 0:
                last = n
        return last

    def realize(self, N: int, prec=None) -> np.ndarray:
        """``alpha_0 .. alpha_{N-1}`` at working precision ``prec``."""
        if N > N_MAX:
            raise InputError(f"requested length {N} exceeds the configured maximum {N_MAX}")
        with nm.working(prec):
            if self.is_free_tail:
                alpha = nm.zeros(N, prec)
            else:
                alpha = self.tail.realize(N, prec=prec)
            for n, v in enumerate(self.head[:N]):
                alpha[n] = nm.scalar(v, prec)
            if not nm.is_extended(prec):
                alpha = np.asarray(alpha, dtype=float)
        return alpha


# ---------------------------------------------------------------------------
# series data and pole sets


@dataclass(frozen=True, eq=False)
class PowerSeriesModel:
    """Taylor coefficients ``c_0..c_N`` of a function about the origin."""

    coeffs: np.ndarray
    inner_radius: float = 0.0
    outer_radius: float = math.inf
    precision_bits: int = nm.DOUBLE_PREC
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 1 or len(c) < 2:
            raise InputError("a power series model needs at least two coefficients (N >= 1)")
        if c.dtype != object and not np.all(np.isfinite(c)):
            raise InputError("power series coefficients must be finite")
        if c.dtype == object and not all(mpmath.isfinite(v) for v in c):
            raise InputError("power series coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return nm.polyval(nm.to_complex_array(self.coeffs), np.asarray(z, dtype=complex))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "coeffs": [nm.to_json_number(v if isinstance(v, (mpmath.mpf, mpmath.mpc)) else
                                         (complex(v) if np.iscomplexobj(self.coeffs) else float(v)))
                       for v in self.coeffs],
            "inner_radius": float(self.inner_radius),
            "outer_radius": float(self.outer_radius),
            "precision_bits": self.precision_bits,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "re", "im"])
        for k, v in enumerate(self.coeffs):
            v = complex(v)
            w.writerow([k, repr(v.real), repr(v.imag)])
        return buf.getvalue()


def _close(u, v, rel):
    return abs(u - v) <= rel * max(abs(u), abs(v), 1.0)


@dataclass(frozen=True)
class PoleSet:
    """Finite multiset of points ``|z| > 1`` with orders, truncated at a cutoff."""

    points: tuple = ()
    cutoff: float = math.inf
    check_tol: float = field(default=1e-8, compare=False, repr=False)

    def __post_init__(self):
        pts = []
        for i, p in enumerate(self.points):
            if isinstance(p, (tuple, list)):
                loc, order = p
            else:
                loc, order = p, 1
            loc = complex(loc)
            order = int(order)
            if order < 1:
                raise InputError("pole order must be positive", index=i, field="order")
            if not abs(loc) > 1:
                raise InputError(f"point {loc} must lie outside the closed unit disk", index=i)
            if abs(loc) > self.cutoff * (1 + self.check_tol):
                raise InputError(f"point {loc} beyond cutoff {self.cutoff}", index=i)
            pts.append((loc, order))
        pts.sort(key=lambda p: (round(abs(p[0]), 9), round(np.angle(p[0]), 9)))
        object.__setattr__(self, "points", tuple(pts))
        for loc, order in pts:
            if abs(loc.imag) > self.check_tol * abs(loc) and not any(
                    _close(loc.conjugate(), other, self.check_tol) and o == order for other, o in pts):
                raise InputError(f"pole set not closed under conjugation at {loc}")

    @property
    def locations(self) -> list:
        return [p for p, _ in self.points]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def within(self, cutoff: float, rel=1e-9) -> "PoleSet":
        return PoleSet(tuple(p for p in self.points if abs(p[0]) <= cutoff * (1 + rel)),
                       min(cutoff, self.cutoff) if self.cutoff != math.inf else cutoff)

    def union(self, other: "PoleSet", rel=1e-9) -> "PoleSet":
        """Multiset union; coincident points keep the larger order."""
        merged = list(self.points)
        for loc, order in other.points:
            for i, (m, o) in enumerate(merged):
                if _close(m, loc, rel):
                    merged[i] = (m, max(o, order))
                    break
            else:
                merged.append((loc, order))
        return PoleSet(tuple(merged), max(self.cutoff, other.cutoff))

    def same_as(self, other: "PoleSet", rel=1e-6, orders=True) -> bool:
        """Multiset equality up to relative tolerance ``rel``."""
        if len(self.points) != len(other.points):
            return False
        unused = list(other.points)
        for loc, order in self.points:
            for i, (m, o) in enumerate(unused):
                if _close(loc, m, rel) and (o == order or not orders):
                    del unused[i]
                    break
            else:
                return False
        return True

    def to_json(self) -> dict:
        return {"points": [{"z": [p.real, p.imag], "order": o} for p, o in self.points],
                "cutoff": self.cutoff if math.isfinite(self.cutoff) else "inf"}


# ---------------------------------------------------------------------------
# documents


def _parse_tail(doc, parity):
    if doc is None or doc == "free":
        return None
    if isinstance(doc, dict):
        kind = doc.get("type")
        if kind == "free":
            return None
        if kind == "series":
            return AsymptoticSeries.from_json(doc, parity=parity)
    raise InputError(f"unrecognized tail {doc!r}", field="tail")


def _parse_example_shorthand(doc):
    if doc.get("alpha_odd") != "R^-(2n+1)":
        raise InputError(f"unsupported shorthand {doc.get('alpha_odd')!r}", field="alpha_odd")
    if "R" not in doc:
        raise InputError("shorthand needs R", field="R")
    R = nm.stored(doc["R"])
    if not R > 1:
        raise InputError("R must exceed 1", field="R")
    return VerblunskyCoefficients.example_3_4(R)


def parse_input(document):
    """Parse a JSON document (text or dict) into typed parameters.

    Examples
    --------
    >>> parse_input({"head": [{"a": 1.0, "b": 2.5}], "tail": "free"}).head[0][1]
    mpf('2.5')
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON: {exc}") from None
    if not isinstance(document, dict):
        raise InputError("top-level document must be a JSON object")
    if "alpha_odd" in document:
        return _parse_example_shorthand(document)
    kind = document.get("kind", "jacobi")
    head_doc = document.get("head", [])
    if not isinstance(head_doc, list):
        raise InputError("'head' must be a list", field="head")
    if kind == "jacobi":
        tail = _parse_tail(document.get("tail", "free"), "interleaved")
        head = []
        for i, item in enumerate(head_doc, start=1):
            if not isinstance(item, dict):
                raise InputError("Jacobi head entries must be objects with 'a' and 'b'", index=i, field="head")
            unknown = set(item) - {"a", "b"}
            if unknown:
                raise InputError(f"unknown keys {sorted(unknown)}", index=i, field="head")
            try:
                head.append((nm.stored(item.get("a", 1)), nm.stored(item.get("b", 0))))
            except (ValueError, TypeError) as exc:
                raise InputError(f"bad number: {exc}", index=i, field="head") from None
        return JacobiParameters(tuple(head), tail)
    if kind == "verblunsky":
        tail = _parse_tail(document.get("tail", "free"), None)
        try:
            head = tuple(nm.stored(v) for v in head_doc)
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad number: {exc}", field="head") from None
        return VerblunskyCoefficients(head, tail)
    raise InputError(f"unknown kind {kind!r}", field="kind")


def serialize(obj) -> dict:
    """Canonical JSON-ready form (numbers as decimal strings)."""
    tail = {"type": "free"} if obj.is_free_tail else obj.tail.to_json()
    if isinstance(obj, JacobiParameters):
        head = [{"a": nm.to_str(a), "b": nm.to_str(b)} for a, b in obj.head]
        return {"kind": "jacobi", "head": head, "tail": tail}
    if isinstance(obj, VerblunskyCoefficients):
        return {"kind": "verblunsky", "head": [nm.to_str(v) for v in obj.head], "tail": tail}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def realize_tail(params, N: int, prec=None):
    """Realize the first ``N`` entries of a sequence model.

    Jacobi parameters give a :class:`RealizedJacobi` (``n = 1..N``),
    Verblunsky coefficients an array ``alpha_0..alpha_{N-1}``, and a bare
    :class:`AsymptoticSeries` its values ``x_0..x_{N-1}``.
    """
    if N < 1:
        raise InputError("N must be at least 1", field="N")
    if N > N_MAX:
        raise InputError(f"requested length {N} exceeds the configured maximum {N_MAX}", field="N")
    if isinstance(params, AsymptoticSeries):
        return params.realize(N, prec=prec)
    return params.realize(N, prec=prec)


def realized_csv(params, N: int) -> str:
    """CSV export of a realized sequence."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(params, JacobiParameters):
        r = params.realize(N)
        w.writerow(["n", "a_n", "b_n"])
        for n in range(N):
            w.writerow([n + 1, repr(float(r.a[n])), repr(float(r.b[n]))])
    else:
        alpha = params.realize(N)
        w.writerow(["n", "alpha_n"])
        for n in range(N):
            w.writerow([n, repr(float(alpha[n]))])
    return buf.getvalue()
