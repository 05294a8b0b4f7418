"""Finite-difference differentiability checks, chord-bound inequality
checkers, and interval-cover measure estimates.

Every verdict is a pure function of the recorded step ladder, so a report can
be re-audited from its own data.  Default ladder: t = 2^-6 .. 2^-20 (below
~2^-20 the square-root pieces of the pipeline maps hit cancellation).  At
kink preimages the second-derivative question is decided through the chord
bound route (quotient <= C * t), which is far better conditioned there than
raw second differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .closed_sets import ClosedSet, contiguous_intervals
from .paths import _fmt17

CAUCHY_ABS = 1e-5  # gap tolerance: max(CAUCHY_ABS, 10 t)


def default_ladder(order: int = 1) -> np.ndarray:
    """Step ladders: 2^-6..2^-20 for first differences.  Second differences
    lose ~2 t^-2 ulps of the value scale to cancellation, so their ladder
    stops at 2^-13 where that noise is still well under the Cauchy tolerance.
    """
    return 2.0 ** -np.arange(6, 21 if order == 1 else 14)


def _vec_eval(g: Callable, x: np.ndarray) -> np.ndarray:
    out = np.asarray(g(x), dtype=float)
    return out.reshape(len(x), 1) if out.ndim == 1 else out


@dataclass
class DiffReport:
    point: float
    order: int
    steps: np.ndarray
    quotients: np.ndarray          # (n_steps, d) difference quotients
    verdict: str                   # exists | not-differentiable | zero | undetermined
    estimate: np.ndarray           # (d,)
    sided: str = "central"
    details: dict = field(default_factory=dict)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.quotients, axis=1)

    def to_json_dict(self):
        return {"point": _fmt17(self.point), "order": self.order,
                "sided": self.sided,
                "steps": [_fmt17(t) for t in self.steps],
                "quotients": [[_fmt17(c) for c in q] for q in self.quotients],
                "verdict": self.verdict,
                "estimate": [_fmt17(c) for c in self.estimate],
                "details": self.details}


def _cauchy_verdict(steps: np.ndarray, quot: np.ndarray) -> tuple[str, dict]:
    # successive-quotient gaps, judged relative to the quotient magnitude once
    # that exceeds 1 (a sequence Cauchy toward a large limit cannot meet an
    # absolute gap bound at any fixed ladder)
    gaps = np.linalg.norm(np.diff(quot, axis=0), axis=1)
    scale = np.maximum(1.0, np.linalg.norm(quot[1:], axis=1))
    tol = np.maximum(CAUCHY_ABS, 10.0 * steps[1:]) * scale
    ok = gaps <= tol
    details = {"gaps": [_fmt17(v) for v in gaps], "cauchy_tail_ok": bool(ok[-3:].all())}
    return ("exists" if ok[-3:].all() else "not-differentiable"), details


def fd_first_derivative(g: Callable, x: float, ladder: Optional[np.ndarray] = None,
                        domain: Optional[tuple] = None) -> DiffReport:
    """First difference quotients across the step ladder.

    Interior points get both one-sided ladders plus the central one; the
    verdict `exists` needs each side Cauchy within max(1e-5, 10 t) (relative
    beyond unit scale) and the two sides agreeing at the bottom rung (a
    symmetric corner fools the central quotient alone).  The estimate is the
    central bottom quotient; `details["sided_norm"]` holds the worst one-sided
    bottom quotient norm, the conservative value for derivative-is-zero tests.
    """
    return fd_first_batch(g, [x], ladder, domain)[0]


def fd_second_derivative(g: Callable, x: float, ladder: Optional[np.ndarray] = None,
                         kink_constant: Optional[float] = None,
                         domain: Optional[tuple] = None) -> DiffReport:
    """Symmetric second differences (g(x+t) - 2 g(x) + g(x-t)) / t^2.

    With `kink_constant` C set, the report instead takes the chord route for a
    kink preimage: checks ||g(x+-t) - g(x)|| <= C t^2 across the ladder and
    that first quotients vanish, giving verdict `zero` (the second derivative
    exists and is 0 there) or `undetermined`.
    """
    t = default_ladder(order=2) if ladder is None else np.asarray(ladder, float)
    if domain is None:
        domain = getattr(g, "domain", None)
    if domain is not None:
        span = min(x - float(domain[0]), float(domain[1]) - x)
        t = t[t <= span]
        if len(t) < 4:
            raise ValueError("point too close to the boundary for the ladder")
    gx = _vec_eval(g, np.array([x]))
    gp = _vec_eval(g, x + t)
    gm = _vec_eval(g, x - t)
    if kink_constant is not None:
        chord_p = np.linalg.norm(gp - gx, axis=1)
        chord_m = np.linalg.norm(gm - gx, axis=1)
        ratios = np.maximum(chord_p, chord_m) / t ** 2
        first_q = np.maximum(chord_p, chord_m) / t
        bounded = bool(np.all(ratios <= kink_constant))
        flat = bool(first_q[-1] <= max(CAUCHY_ABS, 10.0 * t[-1]))
        verdict = "zero" if (bounded and flat) else "undetermined"
        quot = (gp - 2.0 * gx + gm) / (t ** 2)[:, None]
        return DiffReport(x, 2, t, quot, verdict, np.zeros(gx.shape[1]), "central",
                          {"chord_ratios": [_fmt17(v) for v in ratios],
                           "first_quotients": [_fmt17(v) for v in first_q],
                           "constant": _fmt17(kink_constant)})
    quot = (gp - 2.0 * gx + gm) / (t ** 2)[:, None]
    verdict, details = _cauchy_verdict(t, quot)
    return DiffReport(x, 2, t, quot, verdict, quot[-1], "central", details)


CHORD_NOISE = 1e-13  # chords below this (times the value scale) are float noise


def quadratic_chord_report(g: Callable, x: float, ladder: Optional[np.ndarray] = None,
                           domain: Optional[tuple] = None,
                           noise: float = CHORD_NOISE) -> dict:
    """||g(x+t) - g(x)|| / t^2 across the ladder, with the growth factor
    between successive rungs (a bounded factor certifies the quadratic
    chord bound with the observed constant).

    Rungs whose chord is below the float noise floor count as converged to
    zero and are excluded from growth factors.
    """
    t = default_ladder() if ladder is None else np.asarray(ladder, float)
    if domain is not None:
        span = min(x - float(domain[0]), float(domain[1]) - x)
        t = t[t <= span]
    gx = _vec_eval(g, np.array([x]))
    chord = np.maximum(np.linalg.norm(_vec_eval(g, x + t) - gx, axis=1),
                       np.linalg.norm(_vec_eval(g, x - t) - gx, axis=1))
    return _chord_growth(t, chord, noise)


def _chord_growth(t: np.ndarray, chord: np.ndarray, noise: float) -> dict:
    ratios = chord / t ** 2
    live = chord > noise
    growth = []
    for j in range(len(t) - 1):
        if live[j] and live[j + 1]:
            growth.append(ratios[j + 1] / ratios[j])
    return {"steps": t, "ratios": ratios, "growth_factors": np.array(growth),
            "max_ratio": float(ratios.max(initial=0.0)),
            "max_growth": float(max(growth)) if growth else 0.0,
            "nonzero_rungs": int(live.sum())}


# -- batched variants (one map evaluation for many probe points) -------------------


def _batch_blocks(g: Callable, points: np.ndarray, t: np.ndarray, domain: tuple):
    lo, hi = float(domain[0]), float(domain[1])
    P, L = len(points), len(t)
    xp = np.clip((points[:, None] + t[None, :]).ravel(), lo, hi)
    xm = np.clip((points[:, None] - t[None, :]).ravel(), lo, hi)
    vals = _vec_eval(g, np.concatenate([xp, xm, points]))
    d = vals.shape[1]
    return (vals[:P * L].reshape(P, L, d), vals[P * L:2 * P * L].reshape(P, L, d),
            vals[2 * P * L:].reshape(P, 1, d))


def fd_first_batch(g: Callable, points, ladder: Optional[np.ndarray] = None,
                   domain: Optional[tuple] = None) -> list[DiffReport]:
    """fd_first_derivative for many points with a single batched evaluation."""
    t = default_ladder() if ladder is None else np.asarray(ladder, float)
    pts = np.asarray(points, dtype=float)
    if domain is None:
        domain = getattr(g, "domain")
    lo, hi = float(domain[0]), float(domain[1])
    Gp, Gm, G0 = _batch_blocks(g, pts, t, domain)
    out = []
    for i, x in enumerate(pts):
        right = (Gp[i] - G0[i]) / t[:, None]
        left = (G0[i] - Gm[i]) / t[:, None]
        if x - t.max() < lo:
            quot, sided = right, "right"
            verdict, details = _cauchy_verdict(t, quot)
            details["sided_norm"] = _fmt17(float(np.linalg.norm(right[-1])))
        elif x + t.max() > hi:
            quot, sided = left, "left"
            verdict, details = _cauchy_verdict(t, quot)
            details["sided_norm"] = _fmt17(float(np.linalg.norm(left[-1])))
        else:
            quot, sided = (Gp[i] - Gm[i]) / (2.0 * t[:, None]), "central"
            v_r, d_r = _cauchy_verdict(t, right)
            v_l, d_l = _cauchy_verdict(t, left)
            mismatch = float(np.linalg.norm(right[-1] - left[-1]))
            scale = max(1.0, float(np.linalg.norm(quot[-1])))
            agree = mismatch <= max(CAUCHY_ABS, 10.0 * t[-1]) * scale
            verdict = ("exists" if (v_r == v_l == "exists" and agree)
                       else "not-differentiable")
            details = {"right_gaps": d_r["gaps"], "left_gaps": d_l["gaps"],
                       "side_mismatch": _fmt17(mismatch),
                       "sided_norm": _fmt17(float(max(np.linalg.norm(right[-1]),
                                                      np.linalg.norm(left[-1]))))}
        out.append(DiffReport(float(x), 1, t, quot, verdict, quot[-1], sided, details))
    return out


def fd_second_batch(g: Callable, points, ladder: Optional[np.ndarray] = None,
                    domain: Optional[tuple] = None) -> list[DiffReport]:
    """Symmetric second differences for many interior points, one evaluation."""
    t = default_ladder(order=2) if ladder is None else np.asarray(ladder, float)
    pts = np.asarray(points, dtype=float)
    if domain is None:
        domain = getattr(g, "domain")
    lo, hi = float(domain[0]), float(domain[1])
    if np.any(pts - t.max() < lo) or np.any(pts + t.max() > hi):
        raise ValueError("all points must be interior at the largest step")
    Gp, Gm, G0 = _batch_blocks(g, pts, t, domain)
    out = []
    for i, x in enumerate(pts):
        quot = (Gp[i] - 2.0 * G0[i] + Gm[i]) / (t ** 2)[:, None]
        verdict, details = _cauchy_verdict(t, quot)
        out.append(DiffReport(float(x), 2, t, quot, verdict, quot[-1], "central", details))
    return out


def quadratic_chord_batch(g: Callable, points, ladder: Optional[np.ndarray] = None,
                          domain: Optional[tuple] = None, noise: float = None,
                          max_step=None) -> list[dict]:
    """quadratic_chord_report for many points with one batched evaluation.

    `max_step` (scalar or per point) restricts each ladder to probes staying
    inside the point's own sector (between its neighbouring kink preimages and
    the domain ends); beyond it the chord measures unrelated far-away
    structure, not the local quadratic bound.  Probes toward an out-of-domain
    side are dropped the same way.
    """
    t = default_ladder() if ladder is None else np.asarray(ladder, float)
    pts = np.asarray(points, dtype=float)
    if domain is None:
        domain = getattr(g, "domain")
    lo, hi = float(domain[0]), float(domain[1])
    noise = CHORD_NOISE if noise is None else noise
    if max_step is None:
        ms = np.full(len(pts), np.inf)
    else:
        ms = np.broadcast_to(np.asarray(max_step, dtype=float), (len(pts),))
    Gp, Gm, G0 = _batch_blocks(g, pts, t, domain)
    out = []
    for i, x in enumerate(pts):
        cp = np.linalg.norm(Gp[i] - G0[i], axis=1)
        cm = np.linalg.norm(Gm[i] - G0[i], axis=1)
        chord = np.maximum(np.where(x + t <= hi, cp, 0.0),
                           np.where(x - t >= lo, cm, 0.0))
        keep = t <= ms[i]
        if not keep.any():
            out.append({"steps": t[:0], "ratios": t[:0], "growth_factors": t[:0],
                        "max_ratio": 0.0, "max_growth": 0.0, "nonzero_rungs": 0,
                        "skipped": "sector below the ladder"})
            continue
        out.append(_chord_growth(t[keep], chord[keep], noise))
    return out


# -- chord-bound inequality -------------------------------------------------------


def check_vartimes(f: Callable, v: Callable, x: float, C: float,
                   samples: int = 10000, seed: int = 0,
                   domain: Optional[tuple] = None) -> dict:
    """Sampled check of ||f(y) - f(z)|| <= C |v(z) - v(y)| (|v(z) - v(x)| +
    |v(y) - v(x)|) for y, z on a common side of x.

    Offsets are log-uniform down to 1e-9 of the reach so near-kink tightness
    is exercised; reports the worst LHS/RHS ratio.
    """
    rng = np.random.default_rng(seed)
    if domain is None:
        domain = getattr(f, "domain", None) or getattr(v, "domain")
    a, b = float(domain[0]), float(domain[1])
    n_right = samples // 2 if x > a else samples
    n_right = 0 if x >= b else n_right
    n_left = samples - n_right
    ys, zs = [], []
    for side, n in (("+", n_right), ("-", n_left)):
        if n == 0:
            continue
        reach = (b - x) if side == "+" else (x - a)
        u = reach * 10.0 ** rng.uniform(-9, 0, size=n)
        w = reach * 10.0 ** rng.uniform(-9, 0, size=n)
        sgn = 1.0 if side == "+" else -1.0
        ys.append(x + sgn * u)
        zs.append(x + sgn * w)
    y = np.concatenate(ys)
    z = np.concatenate(zs)
    fy, fz = _vec_eval(f, y), _vec_eval(f, z)
    vy = np.asarray(v(y), float)
    vz = np.asarray(v(z), float)
    vx = float(np.asarray(v(np.array([x])), float).ravel()[0])
    lhs = np.linalg.norm(fy - fz, axis=1)
    rhs = C * np.abs(vz - vy) * (np.abs(vz - vx) + np.abs(vy - vx))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lhs == 0.0, 0.0, lhs / np.where(rhs == 0.0, np.inf, rhs))
    worst = float(np.max(ratio))
    slack = 1.0 + 1e-9
    return {"passed": bool(worst <= slack), "max_ratio": worst,
            "samples": int(len(y)), "constant": C, "point": x}


def check_vartimes_batch(f: Callable, v: Callable, corners: Sequence[tuple],
                         samples: int = 10000, seed: int = 0,
                         domain: Optional[tuple] = None) -> list[dict]:
    """check_vartimes over many (point, constant) pairs with batched map
    evaluations: all samples for all corners go through f and v once."""
    rng = np.random.default_rng(seed)
    if domain is None:
        domain = getattr(f, "domain", None) or getattr(v, "domain")
    a, b = float(domain[0]), float(domain[1])
    ys, zs, owner = [], [], []
    metas = []
    for idx, (x, C) in enumerate(corners):
        n_right = samples // 2 if x > a else samples
        n_right = 0 if x >= b else n_right
        n_left = samples - n_right
        for side, n in (("+", n_right), ("-", n_left)):
            if n == 0:
                continue
            reach = (b - x) if side == "+" else (x - a)
            u = reach * 10.0 ** rng.uniform(-9, 0, size=n)
            w = reach * 10.0 ** rng.uniform(-9, 0, size=n)
            sgn = 1.0 if side == "+" else -1.0
            ys.append(x + sgn * u)
            zs.append(x + sgn * w)
            owner.append(np.full(n, idx))
        metas.append((x, C))
    y = np.concatenate(ys)
    z = np.concatenate(zs)
    own = np.concatenate(owner)
    xs = np.array([m[0] for m in metas])
    fy, fz = _vec_eval(f, y), _vec_eval(f, z)
    vy = np.asarray(v(y), float)
    vz = np.asarray(v(z), float)
    vxs = np.asarray(v(xs), float)
    lhs = np.linalg.norm(fy - fz, axis=1)
    vx = vxs[own]
    Cs = np.array([m[1] for m in metas])[own]
    rhs = Cs * np.abs(vz - vy) * (np.abs(vz - vx) + np.abs(vy - vx))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lhs == 0.0, 0.0, lhs / np.where(rhs == 0.0, np.inf, rhs))
    out = []
    slack = 1.0 + 1e-9
    for idx, (x, C) in enumerate(metas):
        sel = own == idx
        worst = float(np.max(ratio[sel]))
        out.append({"passed": bool(worst <= slack), "max_ratio": worst,
                    "samples": int(np.sum(sel)), "constant": C, "point": x})
    return out


# -- measure estimates ------------------------------------------------------------


def image_measure_estimate(mono, cset: ClosedSet, depth: int):
    """Upper estimate of lambda(map(set)): range length minus the images of
    the contiguous intervals enumerated at `depth`.

    Monotone nonincreasing in depth.  With `mono=None` (identity) and exact
    set endpoints the estimate is an exact rational.
    """
    gaps = contiguous_intervals(cset, depth)
    lo, hi = cset.ambient
    if mono is None:
        total = hi - lo
        covered = sum((r - l for l, r in gaps), Fraction(0))
        return total - covered
    lo_f, hi_f = float(mono(np.array([float(lo)]))[0]), float(mono(np.array([float(hi)]))[0])
    if not gaps:
        return hi_f - lo_f
    ls = np.array([float(l) for l, _ in gaps])
    rs = np.array([float(r) for _, r in gaps])
    covered = float(np.sum(np.asarray(mono(rs), float) - np.asarray(mono(ls), float)))
    return (hi_f - lo_f) - covered


def cover_intervals(cset: ClosedSet, depth: int, delta: float) -> list[tuple]:
    """A cover of the set: its unresolved regions at `depth` plus
    delta-neighborhoods of the enumerated points, merged."""
    lo, hi = float(cset.ambient[0]), float(cset.ambient[1])
    raw = [(float(a), float(b)) for a, b in cset.uncovered_regions(depth)]
    raw += [(max(lo, float(p) - delta), min(hi, float(p) + delta))
            for p in cset.points_at_depth(depth)]
    raw.sort()
    merged = [list(raw[0])]
    for a, b in raw[1:]:
        if a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(iv) for iv in merged]


def cover_image_lengths(mono, cset: ClosedSet, depths: Sequence[int],
                        delta_rule: Optional[Callable[[int], float]] = None) -> list[float]:
    """Total length of map(cover) for shrinking covers of the set (the
    absolute-continuity proxy: the lengths must decrease toward zero)."""
    lo, hi = float(cset.ambient[0]), float(cset.ambient[1])
    if delta_rule is None:
        delta_rule = lambda d: (hi - lo) * 4.0 ** -d
    out = []
    for d in depths:
        ivs = cover_intervals(cset, d, delta_rule(d))
        ls = np.array([a for a, _ in ivs])
        rs = np.array([b for _, b in ivs])
        if mono is None:
            out.append(float(np.sum(rs - ls)))
        else:
            out.append(float(np.sum(np.asarray(mono(rs), float)
                                    - np.asarray(mono(ls), float))))
    return out
