"""Flat slit-torus simulation behind the non-quasiconvexity experiment.

Two unit tori carry two small phased slit tori glued along parallel slits.
Flowing by diag(e^t, e^{-t}) pinches the first slit pair around t = d/2 and
the second around t = 3d/2, while the small tori's systoles walk along the
Farey graph at rate 2/log lambda.  Snapshots of the flowed family feed the
four-term numerical distance; the orbit-diameter curve of a snapshot against
its slot swap is flat near the endpoints and grows linearly to a peak at the
midpoint, which is the whole point of the construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import linear_regression
from typing import Optional

import numpy as np

from .marking import AugMarking, GlueBlock, SlotBlock
from .metrics import GlueSnap, Snapshot, SlotSnap, Thresholds, rafi_formula
from .slots import Slope, transversal_at

__all__ = [
    "LAMBDA",
    "LOG_LAMBDA",
    "FAREY_RATE",
    "ParameterRegimeError",
    "FlatTorus",
    "Slit",
    "SlitTorus",
    "Gluing",
    "SlitSurface",
    "anosov_torus",
    "flow",
    "slit_length",
    "shortest_slope",
    "flowed_anosov_slope",
    "fibonacci_slope",
    "systole_index",
    "TrajectoryFamily",
    "Construction",
    "build_construction",
    "shadow",
    "rotate_snapshot",
    "snapshot_to_marking",
    "distance_to_fixed",
    "NonqcRow",
    "NonqcResult",
    "nonqc_experiment",
    "nonqc_sweep",
]

LAMBDA = (3 + math.sqrt(5)) / 2
LOG_LAMBDA = math.log(LAMBDA)
FAREY_RATE = 2 / LOG_LAMBDA  # systole pivots per unit flow time

_GAMMA = (1 + math.sqrt(5)) / 2
_QUARTER = 5 ** -0.25


class ParameterRegimeError(ValueError):
    """The construction parameters left their valid regime."""


# ---------------------------------------------------------------------------
# Flat tori and slit surfaces.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatTorus:
    """Marked flat torus; basis = (v1, v2) lattice generator columns."""

    basis: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        d = self.det
        if abs(d) < 1e-12:
            raise ValueError("degenerate lattice basis")
        if d < 0:
            (v1, (x, y)) = self.basis
            object.__setattr__(self, "basis", (v1, (-x, -y)))

    @property
    def det(self) -> float:
        (a, c), (b, d) = self.basis
        return a * d - c * b

    @property
    def area(self) -> float:
        return abs(self.det)

    def matrix(self) -> np.ndarray:
        (a, c), (b, d) = self.basis
        return np.array([[a, b], [c, d]], dtype=np.longdouble)


def anosov_torus() -> FlatTorus:
    """Unit-area torus whose marking diagonalizes [[2,1],[1,1]].

    The expanding eigendirection (eigenvalue (3+sqrt 5)/2) maps to the
    vertical axis, so remarking by the matrix equals flowing by -log lambda.
    """
    v1 = (_QUARTER / _GAMMA, _QUARTER * _GAMMA)
    v2 = (-_QUARTER, _QUARTER)
    return FlatTorus((v1, v2))


@dataclass(frozen=True)
class Slit:
    """Straight slit: midpoint and half-open direction data, plane units."""

    midpoint: tuple[float, float]
    length: float
    angle: float

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("slit length must be positive")

    def vector(self) -> tuple[float, float]:
        return (
            self.length * math.cos(self.angle),
            self.length * math.sin(self.angle),
        )


def _parallel(a: float, b: float, tol: float = 1e-9) -> bool:
    d = (a - b) % math.pi
    return min(d, math.pi - d) < tol


@dataclass(frozen=True)
class SlitTorus:
    """Flat torus with slits; scale multiplies the lattice, not the slits."""

    torus: FlatTorus
    slits: tuple[Slit, ...]
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if len(self.slits) == 2:
            a, b = self.slits
            if a.midpoint == b.midpoint:
                raise ValueError("slit midpoints coincide")
            if _parallel(a.angle, b.angle):
                dx = b.midpoint[0] - a.midpoint[0]
                dy = b.midpoint[1] - a.midpoint[1]
                cross = dx * math.sin(a.angle) - dy * math.cos(a.angle)
                if abs(cross) < 1e-12:
                    raise ValueError("parallel slits must not be colinear")


@dataclass(frozen=True)
class Gluing:
    """Identifies (component, slit) pairs; twist is the regluing offset."""

    left: tuple[int, int]
    right: tuple[int, int]
    twist: float = 0.0


@dataclass(frozen=True)
class SlitSurface:
    components: tuple[SlitTorus, ...]
    gluings: tuple[Gluing, ...]

    def __post_init__(self):
        for g in self.gluings:
            a = self.components[g.left[0]].slits[g.left[1]]
            b = self.components[g.right[0]].slits[g.right[1]]
            if abs(a.length - b.length) > 1e-7 * max(1.0, a.length):
                raise ValueError(f"glued slits differ in length: {g}")
            if not _parallel(a.angle, b.angle, tol=1e-7):
                raise ValueError(f"glued slits differ in angle: {g}")

    def area(self) -> float:
        return sum(c.scale**2 * c.torus.area for c in self.components)


def _flow_vec(v: tuple[float, float], t: float) -> tuple[float, float]:
    return (v[0] * math.exp(t), v[1] * math.exp(-t))


def flow(surface: SlitSurface, t: float) -> SlitSurface:
    """Apply diag(e^t, e^-t) to every basis vector, slit, and midpoint."""
    comps = []
    for c in surface.components:
        v1, v2 = c.torus.basis
        torus = FlatTorus((_flow_vec(v1, t), _flow_vec(v2, t)))
        slits = []
        for s in c.slits:
            vec = _flow_vec(s.vector(), t)
            slits.append(
                Slit(
                    midpoint=_flow_vec(s.midpoint, t),
                    length=math.hypot(*vec),
                    angle=math.atan2(vec[1], vec[0]),
                )
            )
        comps.append(SlitTorus(torus, tuple(slits), c.scale))
    return SlitSurface(tuple(comps), surface.gluings)


def slit_length(rho: float, u: float) -> float:
    """Length at flow time u of a 45-degree slit of minimal length rho."""
    return rho * math.sqrt(math.cosh(2 * u))


# ---------------------------------------------------------------------------
# Lattice systoles.
# ---------------------------------------------------------------------------


def shortest_slope(basis: np.ndarray) -> tuple[Slope, float]:
    """Shortest primitive class of a 2d lattice and its length.

    Lagrange reduction with exact integer bookkeeping; the returned slope is
    the class of the reduced first vector.  Ties (the square torus) resolve
    to the earlier basis vector, so the unit lattice reports 1/0.
    """
    b = np.asarray(basis, dtype=np.longdouble)
    v1, v2 = b[:, 0].copy(), b[:, 1].copy()
    c1, c2 = (1, 0), (0, 1)
    for _ in range(256):
        if v2 @ v2 < v1 @ v1:
            v1, v2 = v2, v1
            c1, c2 = c2, c1
        mu = int(round(float((v1 @ v2) / (v1 @ v1))))
        if mu == 0:
            break
        v2 = v2 - mu * v1
        c2 = (c2[0] - mu * c1[0], c2[1] - mu * c1[1])
    else:
        raise ArithmeticError("lattice reduction did not terminate")
    return Slope.of(*c1), float(math.sqrt(float(v1 @ v1)))


def flowed_anosov_slope(u: float) -> Slope:
    """Systole slope of the Anosov torus flowed by u."""
    g = anosov_torus().matrix()
    d = np.diag([np.exp(np.longdouble(u)), np.exp(np.longdouble(-u))])
    return shortest_slope(d @ g)[0]


def fibonacci_slope(n: int) -> Slope:
    """Closed-form systole family: class (F_{n+1}, F_n), n ranging over Z."""
    a, b = 1, 0  # (F_1, F_0)
    if n >= 0:
        for _ in range(n):
            a, b = a + b, a
    else:
        for _ in range(-n):
            a, b = b, a - b
    return Slope.of(a, b)


def systole_index(u: float) -> int:
    """Index n of the systole class (F_{n+1}, F_n) at flow time u."""
    return round(u / math.log(_GAMMA)) - 1


# ---------------------------------------------------------------------------
# The slit construction.
# ---------------------------------------------------------------------------

_SLOT_COMPONENTS = (1, 3)  # the two phased small tori in the 4-cycle


@dataclass(frozen=True)
class TrajectoryFamily:
    """One-parameter family of slit surfaces on [0, horizon].

    Each small torus and its slit pair carries a phase; in clamped mode the
    piece's time is pinned to its active window, which is the combinatorial
    straightening that makes shadows stable while the piece is inactive.
    """

    d: float
    c: float
    delta: float
    phases: tuple[float, float]
    windows: tuple[tuple[float, float], tuple[float, float]]

    @property
    def rho(self) -> float:
        return self.c * math.exp(-self.d / 2)

    @property
    def horizon(self) -> float:
        return 2 * self.d

    def slot_time(self, i: int, t: float, clamped: bool = True) -> float:
        lo, hi = self.windows[i]
        if clamped:
            t = min(max(t, lo), hi)
        return t + self.phases[i]

    def slit_len(self, i: int, t: float, clamped: bool = True) -> float:
        return slit_length(self.rho, self.slot_time(i, t, clamped))

    def at(self, t: float, clamped: bool = True) -> SlitSurface:
        base = anosov_torus()
        u = [self.slot_time(i, t, clamped) for i in range(2)]
        lens = [slit_length(self.rho, ui) for ui in u]
        angles = [math.atan2(math.exp(-ui), math.exp(ui)) for ui in u]

        def flowed(s: float) -> FlatTorus:
            v1, v2 = base.basis
            return FlatTorus((_flow_vec(v1, s), _flow_vec(v2, s)))

        def mids(s: float) -> list[tuple[float, float]]:
            m = flowed(s).matrix().astype(float)
            return [tuple(m @ (0.25, 0.25)), tuple(m @ (0.75, 0.75))]

        def big() -> SlitTorus:
            ma, mb = mids(t)
            return SlitTorus(
                flowed(t),
                (Slit(ma, lens[0], angles[0]), Slit(mb, lens[1], angles[1])),
            )

        def small(i: int) -> SlitTorus:
            ma, mb = mids(u[i])
            return SlitTorus(
                flowed(u[i]),
                (Slit(ma, lens[i], angles[i]), Slit(mb, lens[i], angles[i])),
                scale=self.delta,
            )

        comps = (big(), small(0), big(), small(1))
        gluings = (
            Gluing((0, 0), (1, 0)),
            Gluing((1, 1), (2, 0)),
            Gluing((2, 1), (3, 0)),
            Gluing((3, 1), (0, 1)),
        )
        return SlitSurface(comps, gluings)


@dataclass(frozen=True)
class Construction:
    d: float
    c: float
    delta: float
    rho: float
    main: TrajectoryFamily
    ref_start: TrajectoryFamily
    ref_end: TrajectoryFamily


def build_construction(
    d: float, c: float, delta: float, k: int = 2
) -> Construction:
    """Main family plus the two reference families, on [0, 2d].

    The main family phases its small tori at -d/2 and -3d/2, so the first
    slit pair is shortest at t = d/2 and active on [0, d], the second at
    t = 3d/2 and active on [d, 2d].  The references phase both pieces alike.
    """
    if k != 2:
        raise ParameterRegimeError("the slit construction needs exactly 2 slots")
    if not 0 < c < 1:
        raise ParameterRegimeError(f"c={c} outside (0, 1)")
    if d <= 0:
        raise ParameterRegimeError(f"d={d} must be positive")
    rho = c * math.exp(-d / 2)
    if delta <= 0 or delta > rho / 10:
        raise ParameterRegimeError(
            f"delta={delta} not far below the slit scale rho={rho}"
        )

    def family(p1: float, p2: float, w1, w2) -> TrajectoryFamily:
        return TrajectoryFamily(d, c, delta, (p1, p2), (w1, w2))

    main = family(-d / 2, -3 * d / 2, (0.0, d), (d, 2 * d))
    ref_start = family(-d / 2, -d / 2, (0.0, d), (0.0, d))
    ref_end = family(-3 * d / 2, -3 * d / 2, (d, 2 * d), (d, 2 * d))
    return Construction(d, c, delta, rho, main, ref_start, ref_end)


# ---------------------------------------------------------------------------
# Shadows.
# ---------------------------------------------------------------------------


def _glue_neg_log_ext(ell: float, area: float) -> float:
    # extremal length of a slit-boundary curve: l^2/Area lower bound against
    # the annulus-modulus upper bound pi/log(1/l); the larger wins
    lower = ell * ell / area
    if ell < 1.0:
        upper = math.pi / math.log(1.0 / ell)
        est = max(lower, upper)
    else:
        est = lower
    return -math.log(est)


def shadow(
    surface: SlitSurface, slot_components: tuple[int, ...] = _SLOT_COMPONENTS
) -> Snapshot:
    """Combinatorial snapshot: systole slope and shortness per slot, slit
    shortness and regluing twist per gluing curve."""
    area = surface.area()
    slots = []
    glue = []
    for idx in slot_components:
        comp = surface.components[idx]
        slope, length = shortest_slope(comp.torus.matrix())
        phys = comp.scale * length
        slots.append(SlotSnap(slope, math.log(area / (phys * phys))))
        twist = 0.0
        for g in surface.gluings:
            if g.left[0] == idx or g.right[0] == idx:
                twist = g.twist
                break
        glue.append(GlueSnap(twist, _glue_neg_log_ext(comp.slits[0].length, area)))
    return Snapshot(tuple(slots), tuple(glue))


def rotate_snapshot(r: int, snap: Snapshot) -> Snapshot:
    k = snap.k
    return Snapshot(
        tuple(snap.slots[(i - r) % k] for i in range(k)),
        tuple(snap.glue[(j - r) % len(snap.glue)] for j in range(len(snap.glue))),
    )


def snapshot_to_marking(snap: Snapshot) -> AugMarking:
    """Round a numerical snapshot down to an augmented marking."""

    def bucket(nle: float) -> int:
        return max(0, math.floor(nle))

    glue = tuple(GlueBlock(round(g.twist), bucket(g.neg_log_ext)) for g in snap.glue)
    slots = tuple(
        SlotBlock(s.slope, transversal_at(s.slope, 0), bucket(s.neg_log_ext))
        for s in snap.slots
    )
    return AugMarking(glue, slots)


def distance_to_fixed(
    snap: Snapshot, th: Thresholds, short_cut: float = 1.0
) -> float:
    """Distance to the swap-fixed locus: best symmetrized snapshot wins."""
    k = snap.k
    best = math.inf
    for i in range(k):
        for j in range(len(snap.glue)):
            cand = Snapshot((snap.slots[i],) * k, (snap.glue[j],) * len(snap.glue))
            best = min(best, rafi_formula(snap, cand, th, short_cut))
    return best


# ---------------------------------------------------------------------------
# The experiment.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonqcRow:
    t: float
    orbit_diam: float
    dist_to_fixed: float
    slot_slopes: tuple[Slope, ...]
    glue_loglen: float


@dataclass(frozen=True)
class NonqcResult:
    d: float
    c: float
    delta: float
    rows: tuple[NonqcRow, ...]
    peak_t: float
    peak_value: float
    midpoint: float
    endpoint_max: float
    ref_start_gap: float
    ref_end_gap: float


def nonqc_experiment(
    d: float,
    c: float = 0.1,
    delta: Optional[float] = None,
    th: Optional[Thresholds] = None,
    n_steps: int = 40,
    e0: Optional[float] = None,
    c1: Optional[float] = None,
    c2: float = 0.0,
) -> NonqcResult:
    """Orbit-diameter curve of the slit construction over [0, 2d].

    Per grid time: snapshot, orbit diameter against the slot swap, distance
    to the fixed locus, and the slit shortness column.  With bounds given,
    asserts the endpoint and midpoint claims.
    """
    th = th or Thresholds()
    delta = delta if delta is not None else c * math.exp(-d / 2) / 100
    cons = build_construction(d, c, delta)
    fam = cons.main
    rows = []
    for i in range(n_steps + 1):
        t = 2 * d * i / n_steps
        snap = shadow(fam.at(t))
        swapped = rotate_snapshot(1, snap)
        rows.append(
            NonqcRow(
                t=t,
                orbit_diam=rafi_formula(snap, swapped, th),
                dist_to_fixed=distance_to_fixed(snap, th),
                slot_slopes=tuple(s.slope for s in snap.slots),
                glue_loglen=max(
                    math.log(1 / fam.slit_len(j, t)) for j in range(2)
                ),
            )
        )
    peak = max(rows, key=lambda r: r.orbit_diam)
    mid = min(rows, key=lambda r: abs(r.t - d))
    endpoint_max = max(rows[0].orbit_diam, rows[-1].orbit_diam)
    ref_start_gap = rafi_formula(
        shadow(fam.at(0.0)), shadow(cons.ref_start.at(0.0)), th
    )
    ref_end_gap = rafi_formula(
        shadow(fam.at(2 * d)), shadow(cons.ref_start.at(2 * d)), th
    )
    if e0 is not None:
        assert endpoint_max <= e0, (
            f"endpoint orbit diameter {endpoint_max} exceeds {e0}"
        )
        assert max(ref_start_gap, ref_end_gap) <= e0, (
            f"reference gaps {(ref_start_gap, ref_end_gap)} exceed {e0}"
        )
    if c1 is not None:
        assert mid.orbit_diam >= c1 * d - c2, (
            f"midpoint {mid.orbit_diam} below {c1} * {d} - {c2}"
        )
    return NonqcResult(
        d=d,
        c=c,
        delta=delta,
        rows=tuple(rows),
        peak_t=peak.t,
        peak_value=peak.orbit_diam,
        midpoint=mid.orbit_diam,
        endpoint_max=endpoint_max,
        ref_start_gap=ref_start_gap,
        ref_end_gap=ref_end_gap,
    )


def nonqc_sweep(
    ds: tuple[float, ...] = (10, 15, 20, 25, 30, 35, 40),
    c: float = 0.1,
    th: Optional[Thresholds] = None,
    n_steps: int = 40,
) -> tuple[list[NonqcResult], float, float]:
    """Experiment per d plus the fitted midpoint growth (slope, intercept)."""
    results = [nonqc_experiment(d, c=c, th=th, n_steps=n_steps) for d in ds]
    slope, intercept = linear_regression(
        [r.d for r in results], [r.midpoint for r in results]
    )
    return results, slope, intercept
