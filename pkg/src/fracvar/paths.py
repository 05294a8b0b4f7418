"""Piecewise-affine paths [a, b] -> R^d and constancy-interval surgery.

A path is stored by its breakpoints and values; evaluation is affine
interpolation.  Breakpoints and values may be `fractions.Fraction` (kept exact
until evaluation) or floats.  Generator-backed paths regenerate themselves at a
larger truncation depth through the registry in `GENERATORS`; refinement may
only insert breakpoints, never move existing ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

# Generator name -> builder(params: dict, depth: int) -> Path.
# Populated by fracvar.examples at import time.
GENERATORS: dict[str, Callable[[dict, int], "Path"]] = {}


def _fmt17(x) -> float:
    # JSON layer: >= 17 significant digits, i.e. full double round-trip.
    return float(format(float(x), ".17g"))


class DomainError(ValueError):
    """Parameter outside the path domain."""


@dataclass(frozen=True)
class GeneratorInfo:
    name: str
    params: dict
    depth: int


@dataclass(frozen=True)
class ConstancyInterval:
    """Maximal open parameter interval on which a path is constant."""

    left: object
    right: object
    maximal: bool = True

    def width(self) -> float:
        return float(self.right) - float(self.left)


@dataclass(frozen=True)
class Path:
    """Continuous piecewise-affine map from [a, b] to R^d."""

    breakpoints: tuple
    values: tuple  # one d-tuple per breakpoint
    dimension: int
    generator: Optional[GeneratorInfo] = None
    _t: np.ndarray = field(init=False, repr=False, compare=False, default=None)
    _p: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if len(self.breakpoints) < 2:
            raise ValueError("a path needs at least two breakpoints")
        if len(self.breakpoints) != len(self.values):
            raise ValueError("breakpoints and values must have equal length")
        for v in self.values:
            if len(v) != self.dimension:
                raise ValueError("value dimension mismatch")
        t = np.array([float(x) for x in self.breakpoints], dtype=float)
        if not np.all(np.diff(t) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        p = np.array([[float(c) for c in v] for v in self.values], dtype=float)
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_p", p)

    # -- basic geometry ----------------------------------------------------

    @property
    def domain(self) -> tuple:
        return (self.breakpoints[0], self.breakpoints[-1])

    @property
    def a(self):
        return self.breakpoints[0]

    @property
    def b(self):
        return self.breakpoints[-1]

    def grid(self) -> np.ndarray:
        return self._t

    def points(self) -> np.ndarray:
        return self._p

    def __call__(self, t):
        return evaluate(self, t)

    def refine(self, depth: int) -> "Path":
        """Rebuild a generator-backed path at a larger truncation depth."""
        if self.generator is None:
            return self
        g = self.generator
        return GENERATORS[g.name](g.params, depth)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.generator is not None:
            return {
                "generator": self.generator.name,
                "params": self.generator.params,
                "depth": self.generator.depth,
            }
        return {
            "domain": [_fmt17(self.a), _fmt17(self.b)],
            "dimension": self.dimension,
            "breakpoints": [_fmt17(t) for t in self.breakpoints],
            "values": [[_fmt17(c) for c in v] for v in self.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def path_from_json_dict(d: dict) -> Path:
    if "generator" in d:
        name = d["generator"]
        if name not in GENERATORS:
            raise ValueError(f"unknown path generator {name!r}")
        return GENERATORS[name](d.get("params", {}), int(d.get("depth", 1)))
    values = tuple(tuple(v) for v in d["values"])
    return Path(
        breakpoints=tuple(d["breakpoints"]),
        values=values,
        dimension=int(d["dimension"]),
    )


def path_from_json(s: str) -> Path:
    return path_from_json_dict(json.loads(s))


def make_scalar_path(breakpoints: Sequence, values: Sequence, generator=None) -> Path:
    return Path(
        breakpoints=tuple(breakpoints),
        values=tuple((v,) for v in values),
        dimension=1,
        generator=generator,
    )


# -- evaluation -------------------------------------------------------------


def evaluate(path: Path, t):
    """Affine interpolation at parameter(s) t; exact at breakpoints.

    Scalar t gives a (d,) array; an array of shape (n,) gives (n, d).
    """
    tt = np.asarray(t, dtype=float)
    lo, hi = float(path.a), float(path.b)
    if np.any(tt < lo) or np.any(tt > hi):
        raise DomainError(f"parameter outside [{lo}, {hi}]")
    cols = [np.interp(tt, path._t, path._p[:, j]) for j in range(path.dimension)]
    out = np.stack(cols, axis=-1)
    return out


# -- constancy intervals -----------------------------------------------------


def constancy_intervals(path: Path) -> list[ConstancyInterval]:
    """Maximal open intervals on which the path value is constant, sorted.

    Equality of consecutive stored values is exact (Fraction or float); an
    empty list means the path is not constant on any interval.
    """
    out = []
    bp, vals = path.breakpoints, path.values
    n = len(bp)
    i = 0
    while i < n - 1:
        if vals[i + 1] == vals[i]:
            j = i + 1
            while j < n - 1 and vals[j + 1] == vals[j]:
                j += 1
            out.append(ConstancyInterval(left=bp[i], right=bp[j]))
            i = j
        else:
            i += 1
    return out


def _entering_direction(path: Path, index_left: int) -> np.ndarray:
    """Unit direction of the last non-constant segment before breakpoint index."""
    p = path._p
    for i in range(index_left, 0, -1):
        d = p[i] - p[i - 1]
        norm = float(np.linalg.norm(d))
        if norm > 0.0:
            return d / norm
    e1 = np.zeros(path.dimension)
    e1[0] = 1.0
    return e1


def remove_constancy(path: Path) -> Path:
    """Replace each constancy interval by a two-leg out-and-back tent.

    On a constancy interval (c, d) the result stays at the original value at c
    and d but visits value + h*u at the midpoint, with height
    h = min(1, d-c) * 2^-i (i the 1-based index of the interval sorted by left
    endpoint) and direction u the unit entering direction (first coordinate
    axis when undefined; +1 for scalar paths entering from a flat start).  Off
    the constancy intervals the path is returned unchanged, so the operation is
    idempotent and adds exactly 2*h_i of variation per interval.
    """
    runs = constancy_intervals(path)
    if not runs:
        return path
    bp = list(path.breakpoints)
    vals = list(path.values)
    exact = all(isinstance(x, (Fraction, int)) for x in bp)
    inserts = []  # (position_index, midpoint, value)
    for i, run in enumerate(runs, start=1):
        li = bp.index(run.left)
        ri = bp.index(run.right)
        width = run.right - run.left
        h = min(1, width) * (Fraction(1, 2 ** i) if exact else 2.0 ** -i)
        if path.dimension == 1:
            u = _entering_direction(path, li)
            sign = 1 if u[0] >= 0 else -1
            base = vals[li][0]
            peak = (base + sign * h,)
        else:
            u = _entering_direction(path, li)
            base = np.array([float(c) for c in vals[li]])
            peak = tuple(base + float(h) * u)
        mid = (run.left + run.right) / (Fraction(2) if exact else 2.0)
        inserts.append((li, ri, mid, peak))
    # splice from the right so indices stay valid
    for li, ri, mid, peak in reversed(inserts):
        # drop interior flat breakpoints, keep endpoints
        del bp[li + 1:ri]
        del vals[li + 1:ri]
        bp.insert(li + 1, mid)
        vals.insert(li + 1, peak)
    return Path(breakpoints=tuple(bp), values=tuple(vals), dimension=path.dimension)
