"""Command-line front end.

Subcommands: dist, project, fix-search, barycenter, nonqc, calibrate.
Every command reads an optional JSON config, prints one ExperimentReport
JSON document on stdout, and maps failures to stable exit codes: 2 parse,
3 model mismatch, 4 precondition violation (with certificate), 5 internal
assertion, 6 parameter regime.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from hashlib import sha256
from statistics import linear_regression
from typing import Optional

from . import __version__
from .calibration import (
    CalibrationConstants,
    barycenter_samples,
    calibrate,
    compare_constants,
    load_constants,
    resolve_path,
    save_constants,
)
from .flatsim import (
    FAREY_RATE,
    ParameterRegimeError,
    nonqc_experiment,
    nonqc_sweep,
)
from .marking import (
    AugMarking,
    Glue,
    GlueBlock,
    InSlot,
    SlotBlock,
    SurfaceMismatchError,
    act,
    bfs_distance,
)
from .metrics import (
    SymmetryViolationError,
    Thresholds,
    formula_distance_T,
    formula_distance_WP,
    formula_terms,
)
from .projection import Annulus, Slot, Whole, project
from .search import PreconditionError, coarse_barycenter, fixed_point_search
from .slots import Slope, transversal_at

__all__ = ["Config", "ExperimentReport", "main"]

# Bers decomposition constants for the model family; inert named references,
# never entering formulas (every cutoff in the model is an integer level).
BERS_L = 2.0
BERS_L_PRIME = 4.0

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_MODEL = 3
EXIT_PRECONDITION = 4
EXIT_ASSERTION = 5
EXIT_REGIME = 6


@dataclass(frozen=True)
class Config:
    """Run configuration; JSON file fields override these defaults."""

    K: int = 3
    K_hat: int = 4
    R: int = 10
    k: int = 2
    eps0_level: int = 1  # D-cut: curves at level >= this count as short
    eps_pp_level: int = 3  # finer D-cut for the experiment shadow
    c: float = 0.1
    delta: Optional[float] = None
    d_grid: tuple[float, ...] = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    calibration: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if not (self.K >= 1 and self.K_hat >= self.K and self.R >= 1):
            raise ValueError("thresholds need K_hat >= K >= 1 and R >= 1")
        if self.eps0_level <= 0 or self.eps_pp_level <= 0:
            raise ValueError("shortness cuts must be positive")
        if self.k < 2:
            raise ValueError("the model needs k >= 2")

    def thresholds(self) -> Thresholds:
        return Thresholds(K=self.K, K_hat=self.K_hat, R=self.R)

    @staticmethod
    def from_json(data: dict) -> "Config":
        known = set(Config.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        if "d_grid" in data:
            data = dict(data, d_grid=tuple(float(d) for d in data["d_grid"]))
        return Config(**data)


@dataclass(frozen=True)
class ExperimentReport:
    command: str
    inputs_digest: str
    outputs: dict
    wall_time: float
    calibration: dict
    calibration_digest: str

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "outputs": self.outputs,
            "wall_time": self.wall_time,
            "calibration": self.calibration,
            "calibration_digest": self.calibration_digest,
            "version": __version__,
        }


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return sha256(blob).hexdigest()[:12]


def _read_marking(path: str) -> AugMarking:
    with open(path, encoding="utf-8") as fh:
        return AugMarking.from_json(json.load(fh))


def _ref_label(ref) -> str:
    if isinstance(ref, Whole):
        return "whole"
    if isinstance(ref, Slot):
        return f"slot:{ref.i}"
    c = ref.curve if isinstance(ref, Annulus) else ref
    if isinstance(c, Glue):
        return f"glue:{c.j}"
    return f"slot{c.slot}:{c.slope}"


def _load_calibration(cfg: Config) -> CalibrationConstants:
    return load_constants(cfg.calibration)


def _report(command: str, inputs, outputs: dict, t0: float, consts) -> int:
    rep = ExperimentReport(
        command=command,
        inputs_digest=_digest(inputs),
        outputs=outputs,
        wall_time=round(time.perf_counter() - t0, 4),
        calibration=consts.to_json(),
        calibration_digest=consts.digest(),
    )
    print(json.dumps(rep.to_json(), indent=2, sort_keys=True))
    return EXIT_OK


def _write_csv(path: Optional[str], header: list[str], rows: list[list]) -> None:
    if path is None:
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_dist(args, cfg: Config) -> int:
    t0 = time.perf_counter()
    consts = _load_calibration(cfg)
    th = cfg.thresholds()
    m1, m2 = _read_marking(args.first), _read_marking(args.second)
    terms = [
        {"subsurface": _ref_label(ref), "value": v, "contribution": c}
        for ref, v, c in formula_terms(m1, m2, th)
    ]
    outputs = {
        "formula_distance_T": formula_distance_T(m1, m2, th),
        "formula_distance_WP": formula_distance_WP(m1, m2, th),
        "terms": terms,
    }
    if args.oracle:
        outputs["bfs_distance"] = bfs_distance(m1, m2, cap=10)
    return _report("dist", [m1.to_json(), m2.to_json()], outputs, t0, consts)


def cmd_project(args, cfg: Config) -> int:
    t0 = time.perf_counter()
    consts = _load_calibration(cfg)
    m = _read_marking(args.marking)
    if args.slot is not None:
        ref = Slot(args.slot)
    elif args.glue is not None:
        ref = Annulus(Glue(args.glue))
    elif args.annulus is not None:
        slot_str, slope_str = args.annulus.split(":", 1)
        ref = Annulus(InSlot(int(slot_str), Slope.parse(slope_str)))
    else:
        ref = Whole()
    image = project(ref, m)
    if isinstance(image, SlotBlock):
        out = {"base": str(image.base), "trans": str(image.trans), "D": image.D}
    elif isinstance(image, (list, tuple, set, frozenset)):
        out = {"base_curves": sorted(_ref_label(c) for c in image)}
    else:
        out = {"x": image.x, "level": image.level}
    outputs = {"subsurface": _ref_label(ref), "projection": out}
    return _report("project", [m.to_json(), _ref_label(ref)], outputs, t0, consts)


def _planted_search_instance(k: int, magnitude: int) -> AugMarking:
    base = Slope(1, 2)
    glue = tuple(GlueBlock(magnitude + (j % 2), 0) for j in range(k))
    slots = tuple(
        SlotBlock(base, transversal_at(base, -magnitude + (i % 2)), 0)
        for i in range(k)
    )
    return AugMarking(glue, slots)


def cmd_fix_search(args, cfg: Config) -> int:
    t0 = time.perf_counter()
    consts = _load_calibration(cfg)
    th = cfg.thresholds()
    if args.sweep:
        rows = []
        for exp in range(1, 7):
            mu = _planted_search_instance(cfg.k, 10**exp)
            x, trace = fixed_point_search(mu, th)
            rows.append([10**exp, trace.final_distance])
        _write_csv(args.out, ["magnitude", "final_distance"], rows)
        finals = [max(1, r[1]) for r in rows]
        outputs = {
            "rows": rows,
            "flatness": max(finals) / min(finals),
        }
        return _report("fix-search", {"sweep": cfg.k}, outputs, t0, consts)
    mu = _read_marking(args.marking)
    x, trace = fixed_point_search(mu, th)
    bound = 2 * th.R
    assert trace.final_distance <= bound, (
        f"final distance {trace.final_distance} exceeds {bound}"
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(trace.to_json_str())
    print(
        f"final_distance {trace.final_distance} <= {bound}",
        file=sys.stderr,
    )
    outputs = {
        "fixed_point": x.to_json(),
        "final_distance": trace.final_distance,
        "bound": bound,
        "stages": len(trace.stages),
        "trace": trace.to_json(),
    }
    return _report("fix-search", mu.to_json(), outputs, t0, consts)


def cmd_barycenter(args, cfg: Config) -> int:
    t0 = time.perf_counter()
    consts = _load_calibration(cfg)
    th = cfg.thresholds()
    if args.sweep:
        xs, ys = [], []
        for x, y in barycenter_samples(cfg.k, th, cfg.seed):
            xs.append(x)
            ys.append(y)
        slope, intercept = linear_regression(xs, ys)
        outputs = {
            "instances": len(xs),
            "slope": round(slope, 4),
            "intercept": round(intercept, 4),
            "K_tilde": consts.K_tilde,
            "C_tilde": consts.C_tilde,
            "within_calibration": bool(
                slope <= consts.K_tilde and intercept <= consts.C_tilde
            ),
        }
        return _report("barycenter", {"sweep": cfg.k}, outputs, t0, consts)
    sigma = _read_marking(args.marking)
    try:
        bary = coarse_barycenter(sigma, args.generator, th)
    except ValueError as err:
        # an invalid generator is a model mismatch, not a parse failure
        raise SurfaceMismatchError(str(err)) from err
    displacement = formula_distance_T(sigma, act(args.generator, sigma), th)
    distance = formula_distance_T(sigma, bary, th)
    outputs = {
        "barycenter": bary.to_json(),
        "distance": distance,
        "displacement": displacement,
        "ratio": round(distance / max(1, displacement), 4),
    }
    return _report(
        "barycenter", [sigma.to_json(), args.generator], outputs, t0, consts
    )


_NONQC_HEADER = [
    "t",
    "orbit_diam",
    "dist_to_fixed",
    "slot1_slope",
    "slot2_slope",
    "glue_loglen",
]


def _nonqc_rows(res) -> list[list]:
    return [
        [
            row.t,
            round(row.orbit_diam, 6),
            round(row.dist_to_fixed, 6),
            str(row.slot_slopes[0]),
            str(row.slot_slopes[1]),
            round(row.glue_loglen, 6),
        ]
        for row in res.rows
    ]


def _nonqc_checks(res, consts: CalibrationConstants) -> dict:
    return {
        "endpoints_flat": bool(
            max(res.endpoint_max, res.ref_start_gap, res.ref_end_gap) <= consts.E0
        ),
        "midpoint_large": bool(res.midpoint >= consts.c1 * res.d - consts.c2),
        "peak_near_midpoint": bool(0.8 * res.d <= res.peak_t <= 1.2 * res.d),
    }


def cmd_nonqc(args, cfg: Config) -> int:
    t0 = time.perf_counter()
    consts = _load_calibration(cfg)
    th = cfg.thresholds()
    if args.sweep:
        results, slope, intercept = nonqc_sweep(cfg.d_grid, c=cfg.c, th=th)
        per_d = []
        for res in results:
            checks = _nonqc_checks(res, consts)
            assert all(checks.values()), f"claims failed at d={res.d}: {checks}"
            per_d.append(
                {
                    "d": res.d,
                    "midpoint": round(res.midpoint, 4),
                    "peak_t": res.peak_t,
                    "endpoint_max": round(res.endpoint_max, 4),
                    "checks": checks,
                }
            )
        rate_ok = 0.5 * FAREY_RATE <= slope <= 2.0 * FAREY_RATE
        assert rate_ok, f"midpoint slope {slope} outside the Farey-rate window"
        outputs = {
            "per_d": per_d,
            "slope": round(slope, 4),
            "intercept": round(intercept, 4),
            "farey_rate": round(FAREY_RATE, 4),
            "slope_in_window": bool(rate_ok),
        }
        _write_csv(
            args.out,
            ["d", "midpoint", "peak_t", "endpoint_max"],
            [[p["d"], p["midpoint"], p["peak_t"], p["endpoint_max"]] for p in per_d],
        )
        return _report("nonqc", {"sweep": list(cfg.d_grid)}, outputs, t0, consts)
    d = args.d if args.d is not None else cfg.d_grid[0]
    res = nonqc_experiment(
        d,
        c=cfg.c,
        delta=cfg.delta,
        th=th,
        e0=consts.E0,
        c1=consts.c1,
        c2=consts.c2,
    )
    checks = _nonqc_checks(res, consts)
    assert all(checks.values()), f"claims failed at d={d}: {checks}"
    rows = _nonqc_rows(res)
    _write_csv(args.out, _NONQC_HEADER, rows)
    for name, ok in checks.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}", file=sys.stderr)
    outputs = {
        "d": res.d,
        "c": res.c,
        "delta": res.delta,
        "rows": rows,
        "peak_t": res.peak_t,
        "peak_value": round(res.peak_value, 6),
        "midpoint": round(res.midpoint, 6),
        "endpoint_max": round(res.endpoint_max, 6),
        "checks": checks,
    }
    return _report("nonqc", {"d": d, "c": cfg.c}, outputs, t0, consts)


def cmd_calibrate(args, cfg: Config) -> int:
    t0 = time.perf_counter()
    fresh = calibrate(seed=cfg.seed, th=cfg.thresholds())
    if args.check:
        old = load_constants(cfg.calibration)
        drifted = compare_constants(old, fresh)
        outputs = {
            "recorded_digest": old.digest(),
            "fresh_digest": fresh.digest(),
            "drifted": drifted,
        }
        code = _report("calibrate", {"check": True}, outputs, t0, fresh)
        return code if not drifted else 1
    path = save_constants(fresh, cfg.calibration)
    outputs = {"path": str(path), "constants": fresh.to_json()}
    return _report("calibrate", {"check": False}, outputs, t0, fresh)


# ---------------------------------------------------------------------------
# Parsing and dispatch.
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coarse-teich",
        description="Coarse model of Teichmuller space: distances, "
        "projections, fixed-point search, barycenters, experiments.",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="distance formulas between two markings")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--oracle", action="store_true", help="include BFS distance")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("project", help="subsurface projection of a marking")
    p.add_argument("marking")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--slot", type=int)
    group.add_argument("--glue", type=int)
    group.add_argument("--annulus", metavar="SLOT:P/Q")
    group.add_argument("--whole", action="store_true")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("fix-search", help="staged symmetric multitwist search")
    p.add_argument("marking", nargs="?")
    p.add_argument("--sweep", action="store_true", help="magnitude sweep CSV")
    p.add_argument("--out", metavar="PATH", help="trace or CSV output file")
    p.set_defaults(func=cmd_fix_search)

    p = sub.add_parser("barycenter", help="coarse barycenter of a finite orbit")
    p.add_argument("marking", nargs="?")
    p.add_argument("--generator", type=int, default=1)
    p.add_argument("--sweep", action="store_true", help="linearity regression")
    p.set_defaults(func=cmd_barycenter)

    p = sub.add_parser("nonqc", help="flat slit-torus orbit-diameter experiment")
    p.add_argument("--d", type=float, help="single flow scale (default: grid[0])")
    p.add_argument("--sweep", action="store_true", help="full d grid with fit")
    p.add_argument("--out", metavar="PATH", help="CSV output file")
    p.set_defaults(func=cmd_nonqc)

    p = sub.add_parser("calibrate", help="fit and write pinned constants")
    p.add_argument("--check", action="store_true", help="compare, do not write")
    p.set_defaults(func=cmd_calibrate)
    return parser


def _load_config(args) -> Config:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = Config.from_json(json.load(fh))
    else:
        cfg = Config()
    if args.seed is not None:
        cfg = Config.from_json(dict(cfg.__dict__, seed=args.seed, d_grid=cfg.d_grid))
    return cfg


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command in ("fix-search", "barycenter") and not args.sweep:
            if args.marking is None:
                parser.error(f"{args.command} needs a marking file or --sweep")
        return args.func(args, cfg)
    except PreconditionError as err:
        print(
            json.dumps(
                {"error": "precondition", "message": str(err),
                 "certificate": err.certificate.to_json()},
                indent=2,
                sort_keys=True,
            )
        )
        return EXIT_PRECONDITION
    except SurfaceMismatchError as err:
        print(json.dumps({"error": "model", "message": str(err)}))
        return EXIT_MODEL
    except ParameterRegimeError as err:
        print(json.dumps({"error": "regime", "message": str(err)}))
        return EXIT_REGIME
    except (SymmetryViolationError, AssertionError) as err:
        print(json.dumps({"error": "assertion", "message": str(err)}))
        return EXIT_ASSERTION
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as err:
        print(json.dumps({"error": "parse", "message": str(err)}))
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
