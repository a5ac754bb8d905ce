"""Thresholded distance formulas and the path machinery built on them.

The move distance between augmented markings is coarsely the sum, over
subsurfaces, of the projection distances that exceed a threshold K.  Only
finitely many subsurfaces can carry a term: the slots, the gluing annuli,
the annuli over the slot base slopes, and the annuli over fan-ladder pivots
of the slot Farey geodesics; every other annulus provably stays below a
small constant.

On top of the formulas sit large-link enumeration, the grouping of links
into orbits of the cyclic symmetry (with the symmetry assertions whose
failure certifies that the input was not almost fixed), a canonical
elementary-move path, and active segments of subsurfaces along paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .horoball import HoroPoint, horo_distance, horo_normal_path
from .marking import (
    AugMarking,
    CurveRef,
    Glue,
    GlueBlock,
    InSlot,
    SlotBlock,
    SymmetryGroup,
    check_same_surface,
)
from .projection import Annulus, Slot, SubsurfaceRef, Whole, proj_distance
from .slots import (
    Slope,
    farey_distance,
    farey_geodesic,
    intersection,
    pivot_region,
    transversal_at,
    twist_coordinate,
)

__all__ = [
    "Thresholds",
    "LargeLink",
    "SymmetricFamily",
    "SymmetryViolationError",
    "Snapshot",
    "SlotSnap",
    "GlueSnap",
    "annular_candidates",
    "formula_terms",
    "formula_distance_T",
    "formula_distance_WP",
    "rafi_formula",
    "large_links",
    "group_symmetric_families",
    "canonical_path",
    "active_segment",
]


class SymmetryViolationError(ValueError):
    """A large link's orbit fails the symmetry checks.

    By the contrapositive of the symmetric-link lemma this certifies that
    the marking claimed to be almost fixed was not.
    """


@dataclass(frozen=True)
class Thresholds:
    """Cutoffs: K for formula terms, K_hat for symmetric links, R for orbits."""

    K: int = 3
    K_hat: int = 4
    R: int = 10

    def __post_init__(self) -> None:
        if not 1 <= self.K <= self.K_hat:
            raise ValueError("need K_hat >= K >= 1")
        if self.R < 1:
            raise ValueError("need R >= 1")


@dataclass(frozen=True)
class LargeLink:
    """A subsurface whose projection distance exceeds the production cut."""

    subsurface: SubsurfaceRef
    value: int
    family: Optional[int] = None
    time_index: Optional[int] = None


@dataclass(frozen=True)
class SymmetricFamily:
    """An orbit of annular large links under the cyclic symmetry."""

    index: int
    members: tuple[LargeLink, ...]
    representative: LargeLink
    time_index: int


# ---------------------------------------------------------------------------
# Distance formulas.
# ---------------------------------------------------------------------------


def _cut(value: int | float, threshold: int | float) -> int | float:
    return value if value > threshold else 0


def annular_candidates(m1: AugMarking, m2: AugMarking) -> list[CurveRef]:
    """The finite annulus list able to carry a formula term for this pair."""
    out: list[CurveRef] = [Glue(j) for j in range(m1.k)]
    for i in range(m1.k):
        seen: set[Slope] = set()
        b1, b2 = m1.slots[i].base, m2.slots[i].base
        for s in pivot_region(b1, b2):
            if s not in seen:
                seen.add(s)
                out.append(InSlot(i, s))
    return out


def formula_terms(
    m1: AugMarking, m2: AugMarking, th: Thresholds
) -> list[tuple[SubsurfaceRef, int, int]]:
    """Per-subsurface rows (subsurface, raw value, thresholded contribution)."""
    check_same_surface(m1, m2)
    rows: list[tuple[SubsurfaceRef, int, int]] = []
    w = proj_distance(Whole(), m1, m2)
    rows.append((Whole(), w, _cut(w, th.K)))
    for i in range(m1.k):
        d = proj_distance(Slot(i), m1, m2)
        rows.append((Slot(i), d, _cut(d, th.K)))
    for c in annular_candidates(m1, m2):
        d = proj_distance(Annulus(c), m1, m2)
        rows.append((Annulus(c), d, _cut(d, th.K)))
    return rows


def formula_distance_T(m1: AugMarking, m2: AugMarking, th: Thresholds) -> int:
    """Thresholded sum over every subsurface: the full metric surrogate."""
    return sum(contrib for _, _, contrib in formula_terms(m1, m2, th))


def formula_distance_WP(m1: AugMarking, m2: AugMarking, th: Thresholds) -> int:
    """The non-annular subsum (slots and whole surface only)."""
    return sum(
        contrib
        for y, _, contrib in formula_terms(m1, m2, th)
        if not isinstance(y, Annulus)
    )


# ---------------------------------------------------------------------------
# Numerical snapshots and the four-term formula used by the flat simulation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlotSnap:
    """Shortest slope in a slot with log(1/extremal length) of that slope."""

    slope: Slope
    neg_log_ext: float


@dataclass(frozen=True)
class GlueSnap:
    """Twist coordinate and log(1/extremal length) of a gluing curve."""

    twist: float
    neg_log_ext: float


@dataclass(frozen=True)
class Snapshot:
    """Coarse numerical state of a flowed surface at one time."""

    slots: tuple[SlotSnap, ...]
    glue: tuple[GlueSnap, ...]

    @property
    def k(self) -> int:
        return len(self.slots)


def rafi_formula(
    s1: Snapshot, s2: Snapshot, th: Thresholds, short_cut: float = 1.0
) -> float:
    """Four-term coarse distance between numerical snapshots.

    Terms: thresholded slot curve-graph distances; log of annular twist
    differences for curves short in neither snapshot; horoball distances for
    curves short in both; and max log-reciprocal-length over curves short in
    exactly one.  A curve is short when neg_log_ext > short_cut.
    """
    if s1.k != s2.k or len(s1.glue) != len(s2.glue):
        raise ValueError("snapshot shapes differ")
    total = 0.0
    # slot curve-graph terms
    for a, b in zip(s1.slots, s2.slots):
        total += _cut(farey_distance(a.slope, b.slope), th.K)
    horo_terms: list[float] = []
    one_sided: list[float] = []
    for a, b in zip(s1.glue, s2.glue):
        sa, sb = a.neg_log_ext > short_cut, b.neg_log_ext > short_cut
        if sa and sb:
            pa = HoroPoint(round(a.twist), max(0, math.floor(a.neg_log_ext)))
            pb = HoroPoint(round(b.twist), max(0, math.floor(b.neg_log_ext)))
            horo_terms.append(horo_distance(pa, pb))
        elif sa or sb:
            one_sided.append(a.neg_log_ext if sa else b.neg_log_ext)
        else:
            gap = abs(a.twist - b.twist)
            if gap > th.K:
                total += math.log(gap)
    # slot slopes short in exactly one snapshot contribute their log length
    for a, b in zip(s1.slots, s2.slots):
        sa, sb = a.neg_log_ext > short_cut, b.neg_log_ext > short_cut
        if sa and sb and a.slope == b.slope:
            pa = HoroPoint(0, max(0, math.floor(a.neg_log_ext)))
            pb = HoroPoint(0, max(0, math.floor(b.neg_log_ext)))
            horo_terms.append(horo_distance(pa, pb))
        else:
            if sa:
                one_sided.append(a.neg_log_ext)
            if sb:
                one_sided.append(b.neg_log_ext)
    if horo_terms:
        total += max(horo_terms)
    if one_sided:
        total += max(one_sided)
    return total


# ---------------------------------------------------------------------------
# Large links and symmetric families.
# ---------------------------------------------------------------------------


def large_links(m1: AugMarking, m2: AugMarking, cut: int) -> list[LargeLink]:
    """All candidate subsurfaces whose projection distance exceeds the cut."""
    if cut < 1:
        raise ValueError("cut must be >= 1")
    check_same_surface(m1, m2)
    out = []
    for i in range(m1.k):
        d = proj_distance(Slot(i), m1, m2)
        if d > cut:
            out.append(LargeLink(Slot(i), d))
    for c in annular_candidates(m1, m2):
        d = proj_distance(Annulus(c), m1, m2)
        if d > cut:
            out.append(LargeLink(Annulus(c), d))
    return out


def _orbit_refs(c: CurveRef, k: int) -> list[CurveRef]:
    if isinstance(c, Glue):
        return [Glue(j) for j in range(k)]
    return [InSlot(i, c.slope) for i in range(k)]


def _geodesic_position(geo: Sequence[Slope], s: Slope) -> int:
    """Index of s along a Farey geodesic, or of the fan it pivots."""
    for idx, v in enumerate(geo):
        if v == s:
            return idx
    for idx, v in enumerate(geo):
        if intersection(v, s) == 1:
            return idx
    return len(geo)


def group_symmetric_families(
    links: Sequence[LargeLink],
    group: SymmetryGroup,
    mu: AugMarking,
    target: AugMarking,
    th: Thresholds,
    comparability: int,
) -> list[SymmetricFamily]:
    """Partition annular large links into symmetric families, time-ordered.

    For an input that really is almost fixed against an exactly fixed
    target, every large link's orbit carries comparable values: member
    values pairwise within ``comparability`` and no member collapsing below
    max(1, orbit max - comparability).  Violations raise
    SymmetryViolationError instead of returning a wrong grouping.  Slot
    (non-annular) links are legal only up to the almost-fixed scale and are
    not grouped; a slot value beyond th.R + comparability also violates.

    Families are ordered: the gluing orbit first, then slot-slope orbits by
    position along the slot-0 Farey geodesic from target to mu.
    """
    check_same_surface(mu, target)
    k = group.k
    classes: dict[tuple, list[LargeLink]] = {}
    for link in links:
        y = link.subsurface
        if isinstance(y, Slot):
            if link.value > th.R + comparability:
                raise SymmetryViolationError(
                    f"slot link {y} at value {link.value} exceeds the "
                    f"almost-fixed scale {th.R} + {comparability}"
                )
            continue
        if isinstance(y, Whole):
            continue
        c = y.curve
        key = ("glue",) if isinstance(c, Glue) else ("slot", c.slope.p, c.slope.q)
        classes.setdefault(key, []).append(link)
    geo = farey_geodesic(target.slots[0].base, mu.slots[0].base)
    families = []
    for key, found in sorted(classes.items()):
        rep_ref = found[0].subsurface.curve
        orbit = _orbit_refs(rep_ref, k)
        values = {c: proj_distance(Annulus(c), mu, target) for c in orbit}
        vmax = max(values.values())
        floor_val = max(1, vmax - comparability)
        for c, v in values.items():
            if v < floor_val:
                raise SymmetryViolationError(
                    f"orbit of {rep_ref} has value {v} at {c} against max "
                    f"{vmax}; not a symmetric family"
                )
        members = tuple(
            LargeLink(Annulus(c), values[c]) for c in orbit
        )
        rep = members[0]  # smallest slot index by construction of _orbit_refs
        if key[0] == "glue":
            pos = -1
        else:
            pos = _geodesic_position(geo, rep_ref.slope)
        families.append((pos, key, members, rep))
    families.sort(key=lambda f: (f[0], f[1]))
    out = []
    for n, (pos, _key, members, rep) in enumerate(families):
        fam = SymmetricFamily(
            index=n,
            members=tuple(replace(l, family=n, time_index=n) for l in members),
            representative=replace(rep, family=n, time_index=n),
            time_index=n,
        )
        out.append(fam)
    return out


# ---------------------------------------------------------------------------
# Canonical paths.
# ---------------------------------------------------------------------------


def _set_glue(m: AugMarking, j: int, block: GlueBlock) -> AugMarking:
    return AugMarking(m.glue[:j] + (block,) + m.glue[j + 1:], m.slots)


def _set_slot(m: AugMarking, i: int, block: SlotBlock) -> AugMarking:
    return AugMarking(m.glue, m.slots[:i] + (block,) + m.slots[i + 1:])


def canonical_path(m1: AugMarking, m2: AugMarking) -> list[AugMarking]:
    """A deterministic elementary-move path from m1 to m2.

    Gluing curves are adjusted first, each by a horoball normal path
    (raise the level, sweep the twist, come back down).  Then each slot
    walks its Farey geodesic: per geodesic edge, a horoball excursion in
    the current base's annulus carries the transversal to the next vertex
    and the level to zero, then one flip advances the base.  A final
    excursion matches the target transversal and level.  Every consecutive
    pair differs by one elementary move.
    """
    check_same_surface(m1, m2)
    path = [m1]
    cur = m1
    for j in range(m1.k):
        dst = HoroPoint(m2.glue[j].tau, m2.glue[j].D)
        src = HoroPoint(cur.glue[j].tau, cur.glue[j].D)
        for pt in horo_normal_path(src, dst)[1:]:
            cur = _set_glue(cur, j, GlueBlock(pt.x, pt.level))
            path.append(cur)
    for i in range(m1.k):
        geo = farey_geodesic(cur.slots[i].base, m2.slots[i].base)
        for nxt in geo[1:]:
            blk = cur.slots[i]
            src = HoroPoint(twist_coordinate(blk.base, blk.trans), blk.D)
            dst = HoroPoint(twist_coordinate(blk.base, nxt), 0)
            for pt in horo_normal_path(src, dst)[1:]:
                cur = _set_slot(
                    cur, i, SlotBlock(blk.base, transversal_at(blk.base, pt.x), pt.level)
                )
                path.append(cur)
            # flip: the transversal now equals the next geodesic vertex
            cur = _set_slot(cur, i, SlotBlock(nxt, cur.slots[i].base, 0))
            path.append(cur)
        blk = cur.slots[i]
        src = HoroPoint(twist_coordinate(blk.base, blk.trans), blk.D)
        dst = HoroPoint(twist_coordinate(blk.base, m2.slots[i].trans), m2.slots[i].D)
        for pt in horo_normal_path(src, dst)[1:]:
            cur = _set_slot(
                cur, i, SlotBlock(blk.base, transversal_at(blk.base, pt.x), pt.level)
            )
            path.append(cur)
    return path


def active_segment(
    path: Sequence[AugMarking], y: SubsurfaceRef
) -> Optional[tuple[int, int]]:
    """Longest contiguous index interval with the boundary of y in the base.

    Gluing annuli, slots, and the whole surface have structural boundary
    curves that every marking carries, so their segment is the full path.
    The annulus over a slot slope is active exactly while that slope is the
    slot's base; None when it never is.  Ties go to the earliest interval.
    """
    if not path:
        return None
    if isinstance(y, Annulus) and isinstance(y.curve, InSlot):
        i, s = y.curve.slot, y.curve.slope
        best: Optional[tuple[int, int]] = None
        start = None
        for t, m in enumerate(path):
            if m.slots[i % m.k].base == s:
                if start is None:
                    start = t
            elif start is not None:
                if best is None or (t - 1 - start) > (best[1] - best[0]):
                    best = (start, t - 1)
                start = None
        if start is not None:
            t = len(path)
            if best is None or (t - 1 - start) > (best[1] - best[0]):
                best = (start, t - 1)
        return best
    return (0, len(path) - 1)
