"""Detection of the kink set of a piecewise-affine path: the closed set of
parameters near which the path is neither constant nor smoothly rectifiable.

For a polyline this is the endpoints, every breakpoint where the incoming and
outgoing unit directions differ (computed skipping adjacent constancy runs),
and, for generator-backed paths, the declared accumulation structure of those
corners.  A constancy boundary whose direction is preserved across the pause
is excluded, as is a boundary where the path is flat all the way to a domain
endpoint (the arc-length reparametrization is affine there).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .closed_sets import ClosedSet, FiniteSet, UnionSet, as_fraction
from .paths import Path

# generator name -> callable(params, depth) -> list[ClosedSet] of accumulation
# structure (limits of corner sequences); filled by fracvar.examples.
KF_ACCUMULATION: dict[str, Callable[[dict, int], list]] = {}

DIRECTION_TOL = 1e-12  # relative, for float inputs; rational inputs compare exactly


@dataclass
class KfSet:
    """Kink set at a truncation depth, with per-point reason tags."""

    finite_points: list  # sorted, exact where inputs were exact
    reasons: dict = field(default_factory=dict)
    accumulation: list = field(default_factory=list)  # ClosedSets

    @property
    def set(self) -> ClosedSet:
        parts = [FiniteSet(self.finite_points)] + list(self.accumulation)
        return parts[0] if len(parts) == 1 else UnionSet(parts)

    def float_points(self) -> np.ndarray:
        return np.array([float(p) for p in self.finite_points], dtype=float)

    def to_json_dict(self) -> dict:
        d = self.set.to_json_dict()
        d["reasons"] = {repr(float(p)): self.reasons.get(p, "corner")
                        for p in self.finite_points}
        return d


def _segment_dirs_exact(values) -> list:
    """Per-segment direction as exact difference tuples; None for zero segments."""
    out = []
    for p, q in zip(values[:-1], values[1:]):
        d = tuple(b - a for a, b in zip(p, q))
        out.append(None if all(c == 0 for c in d) else d)
    return out


def _same_direction_exact(u, v) -> bool:
    # parallel with positive ratio: u_j v_k == u_k v_j for all j,k and u.v > 0
    n = len(u)
    for j in range(n):
        for k in range(j + 1, n):
            if u[j] * v[k] != u[k] * v[j]:
                return False
    return sum(a * b for a, b in zip(u, v)) > 0


def _same_direction_float(u, v, tol: float) -> bool:
    un = np.asarray(u, float)
    vn = np.asarray(v, float)
    un = un / np.linalg.norm(un)
    vn = vn / np.linalg.norm(vn)
    return bool(np.linalg.norm(un - vn) <= tol)


def detect_K_f(path: Path, depth: Optional[int] = None, tol: float = DIRECTION_TOL) -> KfSet:
    """Kink set of a polyline at its truncation depth.

    Endpoints are included by convention.  Direction comparison is exact for
    rational data, else uses `tol` on normalized directions.
    """
    if depth is not None and path.generator is not None:
        path = path.refine(depth)
    values = path.values
    bp = path.breakpoints
    exact = all(isinstance(c, (Fraction, int)) for v in values for c in v)
    dirs = _segment_dirs_exact(values)
    same = (_same_direction_exact if exact
            else lambda u, v: _same_direction_float(u, v, tol))

    points = [bp[0], bp[-1]]
    reasons = {bp[0]: "endpoint", bp[-1]: "endpoint"}
    n_seg = len(dirs)
    for i in range(1, len(bp) - 1):
        # incoming/outgoing directions, skipping constancy runs
        j = i - 1
        while j >= 0 and dirs[j] is None:
            j -= 1
        k = i
        while k < n_seg and dirs[k] is None:
            k += 1
        if j < 0 or k >= n_seg:
            continue  # flat to a domain end: locally monotone, not a kink
        din, dout = dirs[j], dirs[k]
        if same(din, dout):
            continue
        points.append(bp[i])
        paused = (j != i - 1) or (k != i)
        reasons[bp[i]] = "constancy-boundary-with-turn" if paused else "corner"

    accumulation = []
    if path.generator is not None and path.generator.name in KF_ACCUMULATION:
        accumulation = KF_ACCUMULATION[path.generator.name](path.generator.params,
                                                            path.generator.depth)

    pts = sorted(set(points), key=float)
    return KfSet(finite_points=pts, reasons=reasons, accumulation=accumulation)


def scalar_varying_monotonicity(path: Path) -> list:
    """Independent scalar check: breakpoints where the slope sign flips,
    skipping zero-slope runs, plus the endpoints."""
    if path.dimension != 1:
        raise ValueError("scalar paths only")
    vals = [v[0] for v in path.values]
    bp = path.breakpoints
    signs = []
    for a, b in zip(vals[:-1], vals[1:]):
        signs.append(0 if b == a else (1 if b > a else -1))
    points = {bp[0], bp[-1]}
    for i in range(1, len(bp) - 1):
        before = next((s for s in reversed(signs[:i]) if s != 0), None)
        after = next((s for s in signs[i:] if s != 0), None)
        if before is None or after is None:
            continue
        if before != after:
            points.add(bp[i])
    return sorted(points, key=float)
