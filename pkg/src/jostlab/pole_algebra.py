"""Multiplicative sets generated by pole sets, truncated at a modulus cutoff.

``G^(m)(O)`` is the set of m-fold products of points of ``O``; ``G~(O)`` is the
union over ``m`` together with the negatives; ``G(O)`` uses odd products with
the trailing ``j - 1`` factors conjugated.  Since every generator has modulus
above one, the products grow monotonically along a depth-first enumeration and
the search can be pruned as soon as the running product leaves the cutoff.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from jostlab.core import InputError, PoleSet

DEDUP_REL = 1e-9
MATCH_REL = 1e-6
MAX_DEPTH = 4096


@dataclass(frozen=True)
class Element:
    value: complex
    depth: int
    product_of: tuple

    def to_json(self) -> dict:
        return {"value": [self.value.real, self.value.imag], "depth": self.depth,
                "product_of": [[p.real, p.imag] for p in self.product_of], "sign": 1}


@dataclass(frozen=True)
class GeneratedSet:
    """Elements (sorted by modulus, then argument) with a product witness each."""

    generators: PoleSet
    cutoff: float
    elements: tuple = ()

    @property
    def values(self) -> list:
        return [e.value for e in self.elements]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def matches(self, point, rel=MATCH_REL) -> list:
        point = complex(point)
        return [e for e in self.elements if abs(e.value - point) <= rel * abs(point)]

    def __contains__(self, point):
        return bool(self.matches(point))

    def to_json(self) -> dict:
        return {"cutoff": self.cutoff, "generators": self.generators.to_json(),
                "elements": [e.to_json() for e in self.elements]}


def _generators(omega) -> list:
    if isinstance(omega, PoleSet):
        pts = omega.locations
    else:
        pts = [complex(p) for p in omega]
    if not pts:
        raise InputError("generating set is empty", field="omega")
    out = []
    for i, p in enumerate(pts):
        if not abs(p) > 1:
            raise InputError(f"generator {p} must satisfy |mu| > 1", index=i, field="omega")
        if not any(abs(p - q) <= DEDUP_REL * abs(p) for q in out):
            out.append(complex(p))
    return out


def _sort_key(z: complex):
    return (round(abs(z), 9), round(math.atan2(z.imag, z.real), 9))


def _dedup(items, rel=DEDUP_REL):
    """``items`` are ``(value, depth, witness)``; keep the shallowest witness."""
    items = sorted(items, key=lambda t: (abs(t[0]), t[1]))
    kept: list = []
    for v, d, w in items:
        hit = False
        # only nearby moduli can coincide
        for j in range(len(kept) - 1, -1, -1):
            kv = kept[j][0]
            if abs(kv) < abs(v) * (1 - 2 * rel):
                break
            if abs(kv - v) <= rel * max(abs(v), abs(kv)):
                hit = True
                break
        if not hit:
            kept.append((v, d, w))
    return kept


def _clean(z: complex, scale: float) -> complex:
    # flush imaginary roundoff so real generators give real products
    re, im = z.real, z.imag
    if abs(im) <= 1e-14 * scale:
        im = 0.0
    if abs(re) <= 1e-14 * scale:
        re = 0.0
    return complex(re, im)


def _products(gens, m_min, m_max, cutoff, rel=1e-9, conj_from=None):
    """Depth-first enumeration of nondecreasing index tuples.

    With ``conj_from`` (odd products only) the factors after the first
    ``(m + 1) // 2`` are conjugated, which is handled by enumerating the two
    groups separately.
    """
    lim = cutoff * (1 + rel)
    mods = [abs(g) for g in gens]
    order = sorted(range(len(gens)), key=lambda i: mods[i])
    g = [gens[i] for i in order]
    mo = [mods[i] for i in order]
    min_mod = mo[0]
    out = []

    def dfs(start, prod, mod, depth, witness, target, sink):
        if depth == target:
            sink.append((prod, witness))
            return
        for i in range(start, len(g)):
            # remaining factors all have modulus >= mo[i]
            if mod * mo[i] ** (target - depth) > lim:
                break
            dfs(i, prod * g[i], mod * mo[i], depth + 1, witness + (g[i],), target, sink)

    if m_max is None:
        m_max = int(math.floor(math.log(lim) / math.log(min_mod))) if lim > 1 else 0
        m_max = min(m_max, MAX_DEPTH)
    for m in range(m_min, m_max + 1):
        if min_mod ** m > lim:
            break
        if conj_from is None:
            sink = []
            dfs(0, 1 + 0j, 1.0, 0, (), m, sink)
            out.extend((_clean(p, abs(p)), m, w) for p, w in sink)
        else:
            if m % 2 == 0:
                continue
            j = (m + 1) // 2
            first, second = [], []
            dfs(0, 1 + 0j, 1.0, 0, (), j, first)
            dfs(0, 1 + 0j, 1.0, 0, (), j - 1, second)
            for p1, w1 in first:
                for p2, w2 in second:
                    v = p1 * p2.conjugate()
                    if abs(v) <= lim:
                        out.append((_clean(v, abs(v)), m, w1 + tuple(x.conjugate() for x in w2)))
    return out


def _make(omega, gens, cutoff, items, negatives=False):
    if negatives:
        items = items + [(-v, d, w + (-1,)) for v, d, w in items]
    kept = _dedup(items)
    kept.sort(key=lambda t: _sort_key(t[0]))
    ps = omega if isinstance(omega, PoleSet) else PoleSet(tuple((g, 1) for g in gens))
    return GeneratedSet(ps, float(cutoff), tuple(Element(v, d, w) for v, d, w in kept))


def _check_symmetric(gens):
    for g in gens:
        if abs(g.imag) > 0 and not any(abs(h - g.conjugate()) <= 1e-9 * abs(g) for h in gens):
            raise InputError(f"generating set is not closed under conjugation (missing conj of {g})",
                             field="omega")


def g_m(omega, m: int, cutoff: float) -> GeneratedSet:
    """All ``m``-fold products of points of ``omega`` with modulus <= cutoff.

    Examples
    --------
    >>> sorted(e.value.real for e in g_m([2, -2], 2, 8))
    [-4.0, 4.0]
    """
    if m < 1:
        raise InputError("m must be positive", field="m")
    gens = _generators(omega)
    _check_symmetric(gens)
    return _make(omega, gens, cutoff, _products(gens, m, m, cutoff))


def g_tilde(omega, cutoff: float) -> GeneratedSet:
    """``G~(omega)``: all products of any length and their negatives, truncated.

    Examples
    --------
    >>> sorted(e.value.real for e in g_tilde([2, -2], 8))
    [-8.0, -4.0, -2.0, 2.0, 4.0, 8.0]
    """
    gens = _generators(omega)
    _check_symmetric(gens)
    return _make(omega, gens, cutoff, _products(gens, 1, None, cutoff), negatives=True)


def g_odd(omega, cutoff: float) -> GeneratedSet:
    """``G(omega)``: odd products ``mu_1..mu_j conj(mu_{j+1})..conj(mu_{2j-1})``."""
    gens = _generators(omega)
    return _make(omega, gens, cutoff, _products(gens, 1, None, cutoff, conj_from=True))


def check_containment(candidate, generators, cutoff: float, tol: float = MATCH_REL, kind: str = "tilde") -> dict:
    """Check ``candidate ⊂ G~(generators)`` (or ``G`` with ``kind="odd"``).

    Violations are reported in the result, never raised.  A candidate point
    matching several generated elements lists all of them.

    Examples
    --------
    >>> check_containment([4, -4], [2, -2], 8)["contained"]
    True
    >>> check_containment([5], [2, -2], 8)["violations"]
    [[5.0, 0.0]]
    """
    cand = candidate.locations if isinstance(candidate, PoleSet) else [complex(c) for c in candidate]
    try:
        gens = _generators(generators)
    except InputError:
        gens = []
    if gens:
        G = g_odd(generators, cutoff * (1 + tol)) if kind == "odd" else g_tilde(generators, cutoff * (1 + tol))
    else:
        G = None
    matches, violations = [], []
    for p in sorted(cand, key=_sort_key):
        p = complex(p)
        if abs(p) > cutoff * (1 + tol):
            continue
        hits = G.matches(p, tol) if G is not None else []
        if hits:
            matches.append({"point": [p.real, p.imag],
                            "product_of": [[[w.real, w.imag] if not isinstance(w, int) else w for w in e.product_of]
                                           for e in hits]})
        else:
            violations.append([p.real, p.imag])
    return {"contained": not violations, "matches": matches, "violations": violations,
            "cutoff": float(cutoff), "tol": tol, "kind": kind}
