"""Precision plumbing shared by the numerical modules.

Values stored on the domain types are mpmath numbers at ``STORE_PREC`` bits.
Computations run either in plain float64/complex128 numpy arrays (``prec``
``None`` or ``<= 53``) or in numpy object arrays of mpmath numbers evaluated
inside ``mpmath.workprec``.  Polynomials are dense coefficient arrays, lowest
degree first.
"""
from __future__ import annotations

import contextlib
import math

import mpmath
import numpy as np

STORE_PREC = 256
# decimal digits that round-trip a STORE_PREC binary value
STORE_DIGITS = 80
DOUBLE_PREC = 53


def is_extended(prec):
    return prec is not None and prec > DOUBLE_PREC


def working(prec):
    """Context manager activating ``prec`` bits for mpmath arithmetic."""
    if is_extended(prec):
        return mpmath.workprec(prec)
    return contextlib.nullcontext()


def stored(value):
    """Convert ``value`` to an mpmath number at storage precision.

    Accepts python numbers, decimal strings, ``[re, im]`` pairs and mpmath
    numbers.  Real inputs give ``mpf``, anything with an imaginary part gives
    ``mpc``.
    """
    with mpmath.workprec(STORE_PREC):
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError(f"complex pair must have two entries, got {value!r}")
            re, im = (mpmath.mpf(v) for v in value)
            return re if im == 0 else mpmath.mpc(re, im)
        if isinstance(value, (complex, mpmath.mpc)):
            z = mpmath.mpc(value)
            return z.real if z.imag == 0 else z
        if isinstance(value, str):
            value = value.strip()
            if "j" in value or "i" in value.replace("inf", ""):
                z = mpmath.mpc(complex(value.replace("i", "j")))
                return z.real if z.imag == 0 else z
        return mpmath.mpf(value)


def to_str(value) -> str:
    """Decimal string that re-parses to the identical stored value."""
    if not mpmath.isfinite(value):
        return str(float(value))
    with mpmath.workprec(STORE_PREC):
        return mpmath.nstr(mpmath.mpf(value), STORE_DIGITS)


def to_json_number(value):
    """Serialize a real or complex stored number."""
    if isinstance(value, mpmath.mpc) or isinstance(value, complex):
        z = mpmath.mpc(value)
        return [to_str(z.real), to_str(z.imag)]
    return to_str(value)


def as_array(values, prec=None, dtype=float) -> np.ndarray:
    """Return ``values`` as a float/complex array or an mpmath object array."""
    if is_extended(prec):
        out = np.empty(len(values), dtype=object)
        with mpmath.workprec(prec):
            conv = mpmath.mpc if dtype is complex else mpmath.mpf
            for i, v in enumerate(values):
                out[i] = conv(v)
        return out
    if dtype is complex:
        return np.array([complex(v) for v in values], dtype=complex)
    return np.array([float(v) for v in values], dtype=float)


def zeros(n, prec=None, dtype=float) -> np.ndarray:
    if is_extended(prec):
        out = np.empty(n, dtype=object)
        zero = mpmath.mpc(0) if dtype is complex else mpmath.mpf(0)
        out[:] = [zero] * n
        return out
    return np.zeros(n, dtype=dtype)


def one(prec=None):
    return mpmath.mpf(1) if is_extended(prec) else 1.0


def scalar(value, prec=None):
    """Round a stored number to the working representation."""
    if is_extended(prec):
        with mpmath.workprec(prec):
            return mpmath.mpc(value) if isinstance(value, (mpmath.mpc, complex)) else mpmath.mpf(value)
    if isinstance(value, (mpmath.mpc, complex)):
        return complex(value)
    return float(value)


def to_complex_array(values) -> np.ndarray:
    return np.array([complex(v) for v in values], dtype=complex)


def abs_array(values) -> np.ndarray:
    """Moduli as float64, safe for tiny mpmath values (no underflow to 0)."""
    if values.dtype == object:
        return np.array([float(abs(v)) for v in values], dtype=float)
    return np.abs(values)


def log_abs(values) -> np.ndarray:
    """``log|v|`` computed without underflow; ``-inf`` for exact zeros."""
    if values.dtype == object:
        return np.array([float(mpmath.log(abs(v))) if v != 0 else -np.inf for v in values])
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values))


def polyval(coeffs, z):
    """Horner evaluation of ``sum coeffs[k] z**k`` (works for object arrays)."""
    acc = 0 * z
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def poly_shift(coeffs, shift):
    """Coefficients of ``p(n + shift)`` given those of ``p(n)``."""
    deg = len(coeffs)
    out = [0] * deg
    for d, c in enumerate(coeffs):
        # (n + s)^d = sum_j binom(d, j) s^(d-j) n^j
        for j in range(d + 1):
            out[j] = out[j] + c * math.comb(d, j) * shift ** (d - j)
    return out


def poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def eulerian_row(d: int) -> list:
    """Eulerian numbers ``A(d, 0..d-1)``."""
    return [sum((-1) ** i * math.comb(d + 1, i) * (m + 1 - i) ** d for i in range(m + 2))
            for m in range(d)]


def power_geometric_sum(d: int, w):
    """``sum_{k>=1} k**d w**k`` as the rational function it continues to.

    Uses ``w A_d(w) / (1 - w)**(d + 1)`` with the Eulerian polynomial
    ``A_d``; valid for every ``w != 1`` (object or complex arrays).
    """
    if d == 0:
        return w / (1 - w)
    num = polyval(eulerian_row(d), w)
    return w * num / (1 - w) ** (d + 1)
