"""Closed subsets of an interval with exact membership and gap enumeration.

Supported kinds: finite point sets, convergent sequences with their limit
points, middle-thirds Cantor sets scaled to an interval, and finite unions.
Endpoints are kept as exact rationals (`fractions.Fraction`); floats are
converted on input (every float is an exact binary rational), so membership
tests carry no tolerance.  Enumeration is truncated at an integer depth; the
contiguous intervals reported at depth D are true maximal components of the
complement, and their total length grows monotonically in D toward
(b - a) - lambda(set).
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .paths import _fmt17


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary expansion
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot represent {x!r} exactly")


class ClosedSet:
    """Base class; subclasses fix the point content."""

    ambient: tuple  # (lo, hi) Fractions, both members of the set

    def contains(self, x) -> bool:
        raise NotImplementedError

    def points_at_depth(self, depth: int) -> list:
        """Sorted representable points enumerated at this depth (Fractions)."""
        raise NotImplementedError

    def uncovered_regions(self, depth: int) -> list:
        """Closed intervals that may still contain non-enumerated points."""
        raise NotImplementedError

    def to_json_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def float_points(self, depth: int) -> np.ndarray:
        return np.array([float(p) for p in self.points_at_depth(depth)], dtype=float)

    def __contains__(self, x):
        return self.contains(x)


def contiguous_intervals(cset: ClosedSet, depth: int = 1) -> list[tuple]:
    """Maximal open components of the complement, enumerated at `depth`.

    Sorted by left endpoint; endpoints belong to the set.  Gaps that intersect
    a region still holding deeper points are withheld until the depth resolves
    them, so no reported interval ever contains a member.
    """
    pts = cset.points_at_depth(depth)
    regions = cset.uncovered_regions(depth)
    out = []
    for u, v in zip(pts[:-1], pts[1:]):
        if u == v:
            continue
        blocked = any(not (hi <= u or lo >= v) for lo, hi in regions)
        if not blocked:
            out.append((u, v))
    return out


class FiniteSet(ClosedSet):
    def __init__(self, points: Iterable, ambient=None):
        pts = sorted({as_fraction(p) for p in points})
        if not pts:
            raise ValueError("finite set needs at least one point")
        self.points = pts
        if ambient is None:
            ambient = (pts[0], pts[-1])
        self.ambient = (as_fraction(ambient[0]), as_fraction(ambient[1]))

    def contains(self, x) -> bool:
        return as_fraction(x) in set(self.points)

    def points_at_depth(self, depth: int = 0) -> list:
        return list(self.points)

    def uncovered_regions(self, depth: int = 0) -> list:
        return []

    def to_json_dict(self) -> dict:
        return {"set": "finite", "points": [_fmt17(p) for p in self.points]}

    def __repr__(self):
        return f"FiniteSet({len(self.points)} points)"


# -- convergent sequences ----------------------------------------------------

# rule name -> (point(params, n), tail_interval(params, depth))
# point(n) is defined for n = 1, 2, ...; tail_interval bounds all points with
# index > depth together with their limit.


def _geometric_point(params: dict, n: int) -> Fraction:
    ratio = as_fraction(params.get("ratio", Fraction(1, 2)))
    coeff = as_fraction(params.get("coeff", 1))
    start = int(params.get("start", 1))
    offset = as_fraction(params.get("offset", 0))
    return offset + coeff * ratio ** (start + n - 1)


def _geometric_tail(params: dict, depth: int) -> tuple:
    offset = as_fraction(params.get("offset", 0))
    last = _geometric_point(params, depth + 1)
    lo, hi = min(offset, last), max(offset, last)
    return (lo, hi)


SEQUENCE_RULES = {
    "geometric": (_geometric_point, _geometric_tail),
}


class SequenceSet(ClosedSet):
    """A convergent sequence plus its limit point(s), inside an ambient interval."""

    def __init__(self, ambient, rule: str, params: dict, limits: Sequence):
        if rule not in SEQUENCE_RULES:
            raise ValueError(f"unknown sequence rule {rule!r}")
        self.rule = rule
        self.params = dict(params)
        self.limits = sorted(as_fraction(x) for x in limits)
        self.ambient = (as_fraction(ambient[0]), as_fraction(ambient[1]))

    def _point(self, n: int) -> Fraction:
        return SEQUENCE_RULES[self.rule][0](self.params, n)

    def contains(self, x) -> bool:
        xf = as_fraction(x)
        if xf in self.limits or xf == self.ambient[0] or xf == self.ambient[1]:
            return True
        # scan the sequence until the remaining tail can no longer reach x
        n = 1
        while n <= 64 * 1024:
            if self._point(n) == xf:
                return True
            tail_lo, tail_hi = SEQUENCE_RULES[self.rule][1](self.params, n)
            if not (tail_lo <= xf <= tail_hi):
                return False
            n += 1
        return False

    def points_at_depth(self, depth: int) -> list:
        pts = {self.ambient[0], self.ambient[1]} | set(self.limits)
        pts |= {self._point(n) for n in range(1, depth + 1)}
        return sorted(pts)

    def uncovered_regions(self, depth: int) -> list:
        return [SEQUENCE_RULES[self.rule][1](self.params, depth)]

    def to_json_dict(self) -> dict:
        params = {k: (_fmt17(v) if isinstance(v, (int, float, Fraction)) else v)
                  for k, v in self.params.items()}
        return {
            "set": "sequence",
            "rule": self.rule,
            "params": params,
            "limits": [_fmt17(x) for x in self.limits],
            "ambient": [_fmt17(self.ambient[0]), _fmt17(self.ambient[1])],
        }


# -- Cantor set ---------------------------------------------------------------


class CantorSet(ClosedSet):
    """Middle-thirds Cantor set scaled to a closed interval."""

    def __init__(self, interval=(0, 1)):
        lo, hi = as_fraction(interval[0]), as_fraction(interval[1])
        if not lo < hi:
            raise ValueError("interval must be nondegenerate")
        self.ambient = (lo, hi)

    def _to_unit(self, x: Fraction) -> Fraction:
        lo, hi = self.ambient
        return (x - lo) / (hi - lo)

    def contains(self, x) -> bool:
        u = self._to_unit(as_fraction(x))
        if u < 0 or u > 1:
            return False
        seen = set()
        while True:
            if u in seen:
                return True  # cycle without falling into a removed gap
            seen.add(u)
            if Fraction(1, 3) < u < Fraction(2, 3):
                return False
            if u <= Fraction(1, 3):
                u = 3 * u
            else:
                u = 3 * u - 2
            if u == 0 or u == 1:
                return True

    def blocks(self, level: int) -> list[tuple]:
        """The 2^level closed intervals remaining after `level` removal steps."""
        lo, hi = self.ambient
        span = hi - lo
        out = [(Fraction(0), Fraction(1))]
        for _ in range(level):
            nxt = []
            for u, v in out:
                third = (v - u) / 3
                nxt.append((u, u + third))
                nxt.append((v - third, v))
            out = nxt
        return [(lo + span * u, lo + span * v) for u, v in out]

    def gaps_up_to(self, depth: int) -> list[tuple]:
        """Removed middle thirds of generation <= depth, sorted by left end."""
        lo, hi = self.ambient
        span = hi - lo
        out = []
        unit_blocks = [(Fraction(0), Fraction(1))]
        for _ in range(depth):
            nxt = []
            for u, v in unit_blocks:
                third = (v - u) / 3
                out.append((u + third, v - third))
                nxt.append((u, u + third))
                nxt.append((v - third, v))
            unit_blocks = nxt
        out.sort()
        return [(lo + span * u, lo + span * v) for u, v in out]

    def points_at_depth(self, depth: int) -> list:
        pts = {self.ambient[0], self.ambient[1]}
        for u, v in self.gaps_up_to(depth):
            pts.add(u)
            pts.add(v)
        return sorted(pts)

    def uncovered_regions(self, depth: int) -> list:
        return self.blocks(depth)

    def to_json_dict(self) -> dict:
        return {"set": "cantor",
                "interval": [_fmt17(self.ambient[0]), _fmt17(self.ambient[1])]}


def cantor_set(interval=(0, 1)) -> CantorSet:
    return CantorSet(interval)


# -- unions -------------------------------------------------------------------


class UnionSet(ClosedSet):
    def __init__(self, parts: Sequence[ClosedSet]):
        if not parts:
            raise ValueError("union of no sets")
        self.parts = list(parts)
        lo = min(p.ambient[0] for p in parts)
        hi = max(p.ambient[1] for p in parts)
        self.ambient = (lo, hi)

    def contains(self, x) -> bool:
        return any(p.contains(x) for p in self.parts)

    def points_at_depth(self, depth: int) -> list:
        pts = set()
        for p in self.parts:
            pts |= set(p.points_at_depth(depth))
        return sorted(pts)

    def uncovered_regions(self, depth: int) -> list:
        regs = []
        for p in self.parts:
            regs.extend(p.uncovered_regions(depth))
        return regs

    def to_json_dict(self) -> dict:
        return {"set": "union", "parts": [p.to_json_dict() for p in self.parts]}


def closed_set_from_json_dict(d: dict) -> ClosedSet:
    kind = d["set"]
    if kind == "finite":
        return FiniteSet(d["points"])
    if kind == "cantor":
        return CantorSet(tuple(d["interval"]))
    if kind == "sequence":
        return SequenceSet(tuple(d.get("ambient", (0, 1))), d["rule"], d["params"],
                           d.get("limits", []))
    if kind == "union":
        return UnionSet([closed_set_from_json_dict(p) for p in d["parts"]])
    raise ValueError(f"unknown set kind {kind!r}")


def closed_set_from_json(s: str) -> ClosedSet:
    return closed_set_from_json_dict(json.loads(s))
