import math
import random

import pytest

from coarse_teich.horoball import HoroPoint, horo_distance
from coarse_teich.marking import (
    AugMarking,
    Glue,
    GlueBlock,
    InSlot,
    SlotBlock,
    SymmetryGroup,
    act,
    bfs_distance,
    elementary_moves,
    is_elementary_move,
)
from coarse_teich.metrics import (
    GlueSnap,
    LargeLink,
    SlotSnap,
    Snapshot,
    SymmetryViolationError,
    Thresholds,
    active_segment,
    annular_candidates,
    canonical_path,
    formula_distance_T,
    formula_distance_WP,
    formula_terms,
    group_symmetric_families,
    large_links,
    rafi_formula,
)
from coarse_teich.projection import Annulus, Slot, Whole
from coarse_teich.slots import Slope, farey_distance, transversal_at
from tests.test_marking import flat_marking, random_marking

TH = Thresholds()


def test_thresholds_validation():
    Thresholds(1, 1, 1)
    with pytest.raises(ValueError):
        Thresholds(K=3, K_hat=2, R=10)
    with pytest.raises(ValueError):
        Thresholds(K=0, K_hat=2, R=10)
    with pytest.raises(ValueError):
        Thresholds(R=0)


def test_formula_identical_zero():
    rng = random.Random(1)
    for _ in range(10):
        m = random_marking(rng, rng.randint(2, 4))
        assert formula_distance_T(m, m, TH) == 0
        assert formula_distance_WP(m, m, TH) == 0


def test_formula_planted_annular_offset():
    m1 = flat_marking(2)
    for n in (50, 1000, 10**6):
        m2 = AugMarking((GlueBlock(n, 0), GlueBlock(0, 0)), m1.slots)
        want = horo_distance(HoroPoint(0, 0), HoroPoint(n, 0))
        assert formula_distance_T(m1, m2, TH) == want
        assert abs(want - 2 * math.log(n)) <= 6
        # annular data is invisible to the non-annular subsum
        assert formula_distance_WP(m1, m2, TH) == 0


def test_formula_symmetric_and_equivariant():
    rng = random.Random(7)
    for _ in range(20):
        k = rng.randint(2, 4)
        m1, m2 = random_marking(rng, k, 2), random_marking(rng, k, 2)
        d = formula_distance_T(m1, m2, TH)
        assert formula_distance_T(m2, m1, TH) == d
        r = rng.randrange(k)
        assert formula_distance_T(act(r, m1), act(r, m2), TH) == d
        assert formula_distance_WP(act(r, m1), act(r, m2), TH) == formula_distance_WP(
            m1, m2, TH
        )


def test_formula_threshold_monotone_and_subsum():
    rng = random.Random(13)
    for _ in range(15):
        m1, m2 = random_marking(rng, 2, 2), random_marking(rng, 2, 2)
        lo = Thresholds(K=1, K_hat=4, R=10)
        hi = Thresholds(K=6, K_hat=6, R=10)
        assert formula_distance_T(m1, m2, hi) <= formula_distance_T(m1, m2, lo)
        assert formula_distance_WP(m1, m2, TH) <= formula_distance_T(m1, m2, TH)


def test_formula_terms_breakdown():
    m1 = flat_marking(2)
    m2 = AugMarking((GlueBlock(9, 0), GlueBlock(0, 0)), m1.slots)
    rows = formula_terms(m1, m2, TH)
    by_y = {y: (raw, cut) for y, raw, cut in rows}
    raw, cut = by_y[Annulus(Glue(0))]
    assert raw == horo_distance(HoroPoint(0, 0), HoroPoint(9, 0)) == 6
    assert cut == 6
    assert by_y[Slot(0)] == (0, 0)
    assert by_y[Whole()] == (0, 0)
    total = sum(c for _, _, c in rows)
    assert total == formula_distance_T(m1, m2, TH)


def test_formula_envelope_against_bfs():
    # smoke version of the quasi-isometry sweep: short random move chains
    rng = random.Random(19)
    for _ in range(12):
        a = random_marking(rng, 2, level_max=1)
        b = a
        for _ in range(rng.randint(1, 4)):
            b = rng.choice(elementary_moves(b))
        d = bfs_distance(a, b, cap=5)
        assert d is not None
        t = formula_distance_T(a, b, TH)
        assert t <= 4 * d + 12
        assert d <= 4 * t + 12


def test_rafi_equal_snapshots():
    s = Snapshot(
        (SlotSnap(Slope(1, 2), 0.3), SlotSnap(Slope(0, 1), 2.5)),
        (GlueSnap(1.0, 0.2), GlueSnap(-3.0, 4.0)),
    )
    assert rafi_formula(s, s, TH) == 0.0


def test_rafi_one_sided_short_curve():
    # a curve of length e^-d short in one snapshot only contributes d
    d = 17.0
    s1 = Snapshot(
        (SlotSnap(Slope(0, 1), 0.0),),
        (GlueSnap(0.0, d),),
    )
    s2 = Snapshot(
        (SlotSnap(Slope(0, 1), 0.0),),
        (GlueSnap(0.0, 0.0),),
    )
    assert rafi_formula(s1, s2, TH) == pytest.approx(d)


def test_rafi_term_shapes():
    # twist gap on a curve short in neither enters logarithmically
    s1 = Snapshot((SlotSnap(Slope(0, 1), 0.0),), (GlueSnap(0.0, 0.0),))
    s2 = Snapshot((SlotSnap(Slope(0, 1), 0.0),), (GlueSnap(100.0, 0.0),))
    assert rafi_formula(s1, s2, TH) == pytest.approx(math.log(100.0))
    # short in both: horoball term
    s3 = Snapshot((SlotSnap(Slope(0, 1), 0.0),), (GlueSnap(0.0, 3.2),))
    s4 = Snapshot((SlotSnap(Slope(0, 1), 0.0),), (GlueSnap(100.0, 3.2),))
    want = horo_distance(HoroPoint(0, 3), HoroPoint(100, 3))
    assert rafi_formula(s3, s4, TH) == pytest.approx(want)
    # slot slope change enters through the Farey term
    s5 = Snapshot((SlotSnap(Slope(5, 2), 0.0),), (GlueSnap(0.0, 0.0),))
    far = farey_distance(Slope(0, 1), Slope(5, 2))
    assert far == 3
    assert rafi_formula(s1, s5, Thresholds(K=1, K_hat=1, R=1)) == pytest.approx(far)


def test_large_links_empty_and_planted():
    m1 = flat_marking(2)
    assert large_links(m1, m1, 4) == []
    # one big twist: exactly that annulus
    m2 = AugMarking(
        m1.glue,
        (SlotBlock(Slope(0, 1), transversal_at(Slope(0, 1), 70), 0), m1.slots[1]),
    )
    links = large_links(m1, m2, 4)
    assert [l.subsurface for l in links] == [Annulus(InSlot(0, Slope(0, 1)))]
    assert links[0].value == horo_distance(HoroPoint(0, 0), HoroPoint(70, 0))


def test_large_links_planted_geodesic_pivots():
    # base walk 0/1 -> 40/1201 twists about 0/1 thirty times and about 1/30
    # forty times; both pivots appear, the slot itself stays small
    m1 = flat_marking(2)
    target = Slope(40, 1201)
    assert farey_distance(Slope(0, 1), target) == 2
    m2 = AugMarking(
        m1.glue,
        (SlotBlock(target, transversal_at(target, 0), 0), m1.slots[1]),
    )
    links = large_links(m1, m2, 4)
    got = {l.subsurface for l in links}
    assert Annulus(InSlot(0, Slope(0, 1))) in got
    assert Annulus(InSlot(0, Slope(1, 30))) in got
    for l in links:
        assert isinstance(l.subsurface, Annulus)


def symmetric_twisted(k: int, psi: int, level: int = 0) -> AugMarking:
    base = Slope(0, 1)
    blk = SlotBlock(base, transversal_at(base, psi), level)
    return AugMarking((GlueBlock(0, 0),) * k, (blk,) * k)


def test_group_symmetric_families_planted_orbit():
    k = 3
    target = symmetric_twisted(k, 0)
    mu = symmetric_twisted(k, 50)
    links = large_links(mu, target, TH.K_hat)
    fams = group_symmetric_families(
        links, SymmetryGroup(k), mu, target, TH, comparability=10
    )
    assert len(fams) == 1
    fam = fams[0]
    assert len(fam.members) == k
    assert fam.representative.subsurface == Annulus(InSlot(0, Slope(0, 1)))
    vals = [m.value for m in fam.members]
    assert max(vals) - min(vals) == 0


def test_group_symmetric_families_tolerates_honest_slack():
    # per-slot twists 50, 52, 49: orbit diameter small, values comparable
    base = Slope(0, 1)
    blocks = tuple(
        SlotBlock(base, transversal_at(base, p), 0) for p in (50, 52, 49)
    )
    mu = AugMarking((GlueBlock(0, 0),) * 3, blocks)
    target = symmetric_twisted(3, 0)
    links = large_links(mu, target, TH.K_hat)
    fams = group_symmetric_families(
        links, SymmetryGroup(3), mu, target, TH, comparability=10
    )
    assert len(fams) == 1 and len(fams[0].members) == 3


def test_group_symmetric_families_rejects_asymmetric_link():
    # twist planted in one slot only: the orbit collapses elsewhere
    base = Slope(0, 1)
    blocks = (
        SlotBlock(base, transversal_at(base, 400), 0),
        SlotBlock(base, transversal_at(base, 0), 0),
        SlotBlock(base, transversal_at(base, 0), 0),
    )
    mu = AugMarking((GlueBlock(0, 0),) * 3, blocks)
    target = symmetric_twisted(3, 0)
    links = large_links(mu, target, TH.K_hat)
    assert links
    with pytest.raises(SymmetryViolationError):
        group_symmetric_families(
            links, SymmetryGroup(3), mu, target, TH, comparability=10
        )


def test_group_symmetric_families_rejects_oversized_slot_link():
    mu = flat_marking(2)
    fake = [LargeLink(Slot(0), value=40)]
    with pytest.raises(SymmetryViolationError):
        group_symmetric_families(
            fake, SymmetryGroup(2), mu, mu, TH, comparability=10
        )


def test_group_symmetric_families_time_order():
    # two pivot families in one slot: order matches the geodesic
    target_slope = Slope(40, 1201)
    blk = SlotBlock(target_slope, transversal_at(target_slope, 0), 0)
    mu = AugMarking((GlueBlock(0, 0),) * 2, (blk,) * 2)
    tgt = flat_marking(2)
    links = large_links(mu, tgt, TH.K_hat)
    fams = group_symmetric_families(
        links, SymmetryGroup(2), mu, tgt, TH, comparability=10
    )
    slopes = [f.representative.subsurface.curve.slope for f in fams]
    assert slopes == [Slope(0, 1), Slope(1, 30)]
    assert [f.time_index for f in fams] == [0, 1]


def test_canonical_path_trivial_cases():
    m = flat_marking(2)
    assert canonical_path(m, m) == [m]
    up = AugMarking((GlueBlock(0, 3), GlueBlock(0, 0)), m.slots)
    path = canonical_path(m, up)
    assert len(path) == 4
    assert all(b.glue[0].tau == 0 for b in path)


def test_canonical_path_is_elementary_and_reaches_target():
    rng = random.Random(23)
    for _ in range(15):
        k = rng.randint(2, 3)
        m1, m2 = random_marking(rng, k, 1), random_marking(rng, k, 1)
        path = canonical_path(m1, m2)
        assert path[0] == m1 and path[-1] == m2
        for a, b in zip(path, path[1:]):
            assert is_elementary_move(a, b), (a, b)


def test_canonical_path_handles_big_twists():
    m1 = flat_marking(2)
    m2 = symmetric_twisted(2, 10**6)
    path = canonical_path(m1, m2)
    assert path[-1] == m2
    # log-scale excursion, not a million unit twists
    assert len(path) < 100
    for a, b in zip(path, path[1:]):
        assert is_elementary_move(a, b)


def test_active_segment_cases():
    m1 = flat_marking(2)
    m2 = AugMarking(
        m1.glue,
        (SlotBlock(Slope(5, 2), transversal_at(Slope(5, 2), 0), 0), m1.slots[1]),
    )
    path = canonical_path(m1, m2)
    # structural subsurfaces are active everywhere
    assert active_segment(path, Annulus(Glue(0))) == (0, len(path) - 1)
    assert active_segment(path, Slot(0)) == (0, len(path) - 1)
    # a slope never used as a base is never active
    assert active_segment(path, Annulus(InSlot(0, Slope(7, 3)))) is None
    # geodesic vertices get one contiguous window each, in order
    segs = []
    for v in (Slope(0, 1), Slope(5, 2)):
        seg = active_segment(path, Annulus(InSlot(0, v)))
        assert seg is not None
        segs.append(seg)
    assert segs[0][1] < segs[1][0]  # disjoint and ordered


def test_active_segment_pre_window_projection_small():
    # before a pivot's window opens, no twisting about it has happened
    m1 = flat_marking(2)
    target_slope = Slope(40, 1201)
    m2 = AugMarking(
        m1.glue,
        (SlotBlock(target_slope, transversal_at(target_slope, 0), 0), m1.slots[1]),
    )
    path = canonical_path(m1, m2)
    from coarse_teich.projection import proj_distance

    for s in (Slope(1, 30), target_slope):
        seg = active_segment(path, Annulus(InSlot(0, s)))
        assert seg is not None
        lo, _hi = seg
        if lo > 0:
            d_pre = proj_distance(Annulus(InSlot(0, s)), path[0], path[lo - 1])
            assert d_pre <= 6
