"""Built-in example paths: harmonic tents, the Cantor-hosted tent family, and
seeded random zigzags, each with a canonical decomposition and analytic facts.

The harmonic-tent path has summable tent heights 1/k^2 (finite variation,
pi^2/3 in the limit) but harmonically divergent square-root sums over its
kink set; its singleton decomposition certifies it.  The Cantor-hosted family
places tents of height 4^-(n+i)/k^2 inside distinct gaps of the middle-thirds
set, chosen so that the per-block square-root sums diverge harmonically: the
running-variation half-sums then defeat every closed-set decomposition, which
the certificate reports as a refutation with an explicit block witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .closed_sets import CantorSet, ClosedSet, FiniteSet, SequenceSet
from .kf import KF_ACCUMULATION
from .paths import GENERATORS, GeneratorInfo, Path, make_scalar_path
from .variation import (CANONICAL_DECOMPOSITIONS, REFUTATION_WITNESSES,
                        TAIL_BOUNDS, growth_diagnostic)


@dataclass
class ExampleBundle:
    """A generator path with its canonical decomposition and analytic facts.

    Facts carry a provenance tag: "analytic" (a closed-form statement),
    "construction" (true by how the example is built), or "computed"
    (a truncation value).
    """

    name: str
    path: Path
    decomposition: list
    facts: dict
    expected_verdict: str


# -- harmonic tents -------------------------------------------------------------


def _harmonic_path(params: dict, depth: int) -> Path:
    n_tents = max(1, int(depth))
    bp = [Fraction(0)]
    vals = [Fraction(0)]
    for n in range(2 * n_tents + 2, 1, -1):  # a_n = 2^-n, n = 2N+2 .. 2
        bp.append(Fraction(1, 2 ** n))
        if n % 2 == 1:
            k = (n - 1) // 2
            vals.append(Fraction(1, k * k))
        else:
            vals.append(Fraction(0))
    bp.append(Fraction(1))
    vals.append(Fraction(0))
    return make_scalar_path(bp, vals,
                            generator=GeneratorInfo("harmonic-tents", {}, n_tents))


def harmonic_tent_example(n_tents: int) -> ExampleBundle:
    """Tents at a_n = 2^-n with peaks 1/k^2 at a_(2k+1), zero at a_(2k); flat
    on [1/4, 1].  Certified by the singleton decomposition while the
    half-variation over the whole kink set grows like 2 H_N."""
    path = _harmonic_path({}, n_tents)
    decomposition = _harmonic_decomposition({}, n_tents)
    hn = float(sum(Fraction(1, k) for k in range(1, n_tents + 1)))
    facts = {
        "total_variation_limit": {"value": math.pi ** 2 / 3.0,
                                  "provenance": "analytic",
                                  "note": "2 sum k^-2 over all tents"},
        "total_variation_tail": {"value": 2.0 / n_tents, "provenance": "analytic",
                                 "note": "2 sum_{k>N} k^-2 <= 2/N"},
        "half_variation_over_kinks": {"value": 2.0 * hn, "provenance": "analytic",
                                      "note": "each tent leg contributes "
                                              "sqrt(1/k^2) = 1/k twice"},
        "kink_divergence": {"value": "harmonic", "provenance": "analytic"},
        "kink_set": {"value": "{0, 1} and 2^-n for n >= 3 (the n = 2 point "
                              "adjoins the flat tail and is locally monotone)",
                     "provenance": "construction"},
    }
    return ExampleBundle("harmonic-tents", path, decomposition, facts, "certified")


def _harmonic_decomposition(params: dict, depth: int) -> list:
    n_tents = max(1, int(depth))
    sets = [FiniteSet([Fraction(0)], ambient=(0, 1)),
            FiniteSet([Fraction(1)], ambient=(0, 1))]
    sets += [FiniteSet([Fraction(1, 2 ** n)], ambient=(0, 1))
             for n in range(2, 2 * n_tents + 3)]
    return sets


def harmonic_kink_closure() -> SequenceSet:
    """The idealized kink set {0, 1} plus 2^-n (n >= 3) with its limit."""
    return SequenceSet((0, 1), "geometric",
                       {"coeff": 1, "ratio": Fraction(1, 2), "start": 3}, [0])


# -- Cantor-hosted tents ----------------------------------------------------------


def _middle_third(gap_parent: tuple) -> tuple:
    l, r = gap_parent
    third = (r - l) / 3
    return (l + third, r - third)


def _gap_stream(block: tuple) -> Iterator[tuple]:
    """Gaps of the Cantor construction inside `block`, by generation then
    left-to-right."""
    blocks = [block]
    while True:
        gaps = []
        nxt = []
        for u, v in blocks:
            third = (v - u) / 3
            gaps.append((u + third, v - third))
            nxt.append((u, u + third))
            nxt.append((v - third, v))
        for g in gaps:
            yield g
        blocks = nxt


@dataclass
class CantorClaim:
    n: int
    i: int
    k: int
    host: tuple          # the contiguous interval of C hosting the tent
    tent: tuple          # (l, c, r) of the middle third of the host
    height: Fraction     # a_{nik} = 4^-(n+i) / k^2


def indexed_blocks(n: int, cantor: Optional[CantorSet] = None) -> list[tuple]:
    """The 2^n indexed closed blocks at stage n: left children (one level
    deeper) of the level-n blocks, left to right."""
    cset = cantor or CantorSet((0, 1))
    out = []
    for u, v in cset.blocks(n):
        third = (v - u) / 3
        out.append((u, u + third))
    return out


def cantor_claims(n_max: int, k_max: int) -> list[CantorClaim]:
    """Deterministic host assignment: for k = 1, 2, ... each (n, i) claims its
    next unused gap inside block (n, i) in (generation, position) order.
    Distinct hosts make the tents pairwise disjoint and separated by points
    of the Cantor set."""
    streams = {}
    for n in range(1, n_max + 1):
        for i, blk in enumerate(indexed_blocks(n), start=1):
            streams[(n, i)] = _gap_stream(blk)
    used: set[tuple] = set()
    claims = []
    for k in range(1, k_max + 1):
        for n in range(1, n_max + 1):
            for i in range(1, 2 ** n + 1):
                gap = next(streams[(n, i)])
                while gap in used:
                    gap = next(streams[(n, i)])
                used.add(gap)
                a = Fraction(1, 4 ** (n + i) * k * k)
                claims.append(CantorClaim(n, i, k, gap, _tent_of(gap), a))
    return claims


def _tent_of(host: tuple) -> tuple:
    l, r = _middle_third(host)
    return (l, (l + r) / 2, r)


def _cantor_path(params: dict, depth: int) -> Path:
    n_max = int(params.get("n_max", 4))
    claims = cantor_claims(n_max, max(1, int(depth)))
    pts = {Fraction(0): Fraction(0), Fraction(1): Fraction(0)}
    for cl in claims:
        l, c, r = cl.tent
        pts[l] = Fraction(0)
        pts[c] = cl.height
        pts[r] = Fraction(0)
    bp = sorted(pts)
    return make_scalar_path(bp, [pts[t] for t in bp],
                            generator=GeneratorInfo("cantor-tents",
                                                    {"n_max": n_max}, int(depth)))


def sqrt_height_partial(n: int, i: int, k_max: int) -> float:
    """sum_{k<=K} sqrt(a_{nik}) = 2^-(n+i) H_K."""
    return float(2.0 ** -(n + i) * math.fsum(1.0 / k for k in range(1, k_max + 1)))


def height_sum_bound(n_max: int) -> float:
    """Closed-form bound for sum a_{nik}: (pi^2/6) sum_n 4^-n sum_i 4^-i."""
    inner = sum(4.0 ** -n * (1 - 4.0 ** -(2 ** n)) / 3.0 for n in range(1, n_max + 1))
    return (math.pi ** 2 / 6.0) * inner


@dataclass
class CantorBundle(ExampleBundle):
    claims: list = field(default_factory=list)
    n_max: int = 4
    k_max: int = 1

    def conditions_report(self) -> dict:
        """Checkable form of the six construction conditions."""
        claims = self.claims
        ivs = sorted((cl.tent[0], cl.tent[2]) for cl in claims)
        disjoint = all(a2 >= b1 for (_, b1), (a2, _) in zip(ivs[:-1], ivs[1:]))
        total = float(sum(cl.height for cl in claims))
        bound = height_sum_bound(self.n_max)
        hosts = [cl.host for cl in claims]
        host_card_ok = len(set(hosts)) == len(hosts)  # one tent per gap
        # (v): distinct hosts of one (n, i) are separated by a point of C,
        # e.g. the right endpoint of the leftmost host (a gap endpoint).
        separated = True
        by_ni: dict = {}
        for cl in claims:
            by_ni.setdefault((cl.n, cl.i), []).append(cl)
        cset = CantorSet((0, 1))
        for (n, i), cls in by_ni.items():
            cls_sorted = sorted(cls, key=lambda c: c.host[0])
            for c1, c2 in zip(cls_sorted[:-1], cls_sorted[1:]):
                x = c1.host[1]
                if not (c1.host[1] <= x <= c2.host[0] and cset.contains(x)):
                    separated = False
        blocks = {(n, i): blk for n in range(1, self.n_max + 1)
                  for i, blk in enumerate(indexed_blocks(n), start=1)}
        containment = all(
            blocks[(cl.n, cl.i)][0] <= cl.tent[0] and
            cl.tent[2] <= blocks[(cl.n, cl.i)][1] and
            (cl.host[1] - cl.host[0]) < Fraction(1, 3 ** cl.n)
            for cl in claims)
        per_block_sqrt = {f"{n},{i}": sqrt_height_partial(n, i, self.k_max)
                          for n in range(1, self.n_max + 1)
                          for i in range(1, 2 ** n + 1)}
        return {
            "disjoint": disjoint,
            "height_sum": total,
            "height_sum_bound": bound,
            "height_sum_ok": total <= bound,
            "per_host_tent_count_finite": host_card_ok,
            "separated_by_set_points": separated,
            "containment_ok": containment,
            "per_block_sqrt_partial": per_block_sqrt,
        }


def cantor_nonvbg_example(depth: int, n_max: int = 4) -> CantorBundle:
    """Bounded-variation tents hosted in Cantor gaps whose value half-sums are
    finite per closed piece while the running-variation half-sums diverge in
    every block: the canonical certificate is refuted at depth."""
    claims = cantor_claims(n_max, depth)
    path = _cantor_path({"n_max": n_max}, depth)
    decomposition = _cantor_decomposition({"n_max": n_max}, depth)
    facts = {
        "height_sum_bound": {"value": height_sum_bound(n_max),
                             "provenance": "analytic",
                             "note": "(pi^2/6) sum 4^-(n+i)"},
        "sqrt_sum_rule": {"value": "2^-(n+i) H_K per block", "provenance": "analytic"},
        "value_half_variation_on_cantor": {"value": 0.0, "provenance": "construction",
                                           "note": "the path vanishes on the set"},
        "refutation": {"value": "running-variation half-sums within any block "
                                "grow harmonically; a category argument pins "
                                "some block inside one decomposition piece",
                       "provenance": "analytic"},
    }
    return CantorBundle("cantor-tents", path, decomposition, facts,
                        "refuted-at-depth", claims=claims, n_max=n_max, k_max=depth)


def _cantor_decomposition(params: dict, depth: int) -> list:
    n_max = int(params.get("n_max", 4))
    sets: list[ClosedSet] = [CantorSet((0, 1))]
    for cl in cantor_claims(n_max, max(1, int(depth))):
        sets.append(FiniteSet(list(cl.tent), ambient=(0, 1)))
    return sets


def _cantor_witness(params: dict, depth: int) -> dict:
    n_max = int(params.get("n_max", 4))
    k_ref = max(int(depth), 256)
    ks = [k_ref // 8, k_ref // 4, k_ref // 2, k_ref]
    sums = [sqrt_height_partial(1, 1, k) for k in ks]
    diag = growth_diagnostic(ks, sums)
    return {
        "block": [1, 1],
        "family": "tent-hosting gaps inside the indexed block",
        "k_values": ks,
        "sqrt_partial_sums": [float(s) for s in sums],
        "growth": diag,
        "argument": "any closed cover of the set has one piece containing a "
                    "full block on an open interval; the block's hosted tents "
                    "give running-variation half-sums growing without bound",
    }


# -- random zigzags ----------------------------------------------------------------


def random_zigzag(dimension: int, corners: int, seed: int) -> Path:
    """Deterministic random polyline in the unit box with the requested number
    of interior corners."""
    if corners < 0:
        raise ValueError("corners must be nonnegative")
    rng = np.random.default_rng(seed)
    n = corners + 2
    bp = np.linspace(0.0, 1.0, n)
    vals = rng.uniform(0.0, 1.0, size=(n, dimension))
    # every interior breakpoint must be a genuine turn
    for i in range(1, n - 1):
        while _collinear(vals[i - 1], vals[i], vals[i + 1]):
            vals[i] = rng.uniform(0.0, 1.0, size=dimension)
    return Path(breakpoints=tuple(float(t) for t in bp),
                values=tuple(tuple(float(c) for c in v) for v in vals),
                dimension=dimension)


def _collinear(p, q, r) -> bool:
    u = q - p
    v = r - q
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return True
    return bool(np.linalg.norm(u / nu - v / nv) < 1e-9)


def single_corner_zigzag(height: float = 0.75) -> Path:
    """Two equal-length segments with one corner at the midpoint."""
    return Path(breakpoints=(0.0, 0.5, 1.0),
                values=((0.0, 0.0), (0.5, height / 2.0), (1.0, 0.0)),
                dimension=2)


EXAMPLES = {
    "harmonic-tents": harmonic_tent_example,
    "cantor-tents": cantor_nonvbg_example,
}


def _harmonic_tail(params: dict, depth: int) -> float:
    return 2.0 / max(1, int(depth))


def _cantor_tail(params: dict, depth: int) -> float:
    n_max = int(params.get("n_max", 4))
    factor = sum(4.0 ** -(n + i) for n in range(1, n_max + 1)
                 for i in range(1, 2 ** n + 1))
    return 2.0 * factor / max(1, int(depth))


GENERATORS["harmonic-tents"] = _harmonic_path
GENERATORS["cantor-tents"] = _cantor_path
TAIL_BOUNDS["harmonic-tents"] = _harmonic_tail
TAIL_BOUNDS["cantor-tents"] = _cantor_tail
CANONICAL_DECOMPOSITIONS["harmonic-tents"] = _harmonic_decomposition
CANONICAL_DECOMPOSITIONS["cantor-tents"] = _cantor_decomposition
REFUTATION_WITNESSES["cantor-tents"] = _cantor_witness
KF_ACCUMULATION["harmonic-tents"] = lambda params, depth: []
KF_ACCUMULATION["cantor-tents"] = lambda params, depth: [CantorSet((0, 1))]
