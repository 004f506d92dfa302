"""Command-line entry point: ``inekf-gps {simulate,run,eval,compare}``.

Exit codes: 0 ok, 2 config error, 3 I/O error, 4 input schema error,
5 filter divergence, 6 no time overlap between tracks.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__, io
from .config import FilterConfig, Scenario, load_filter_config, load_scenario, load_yaml
from .errors import (
    ConfigError,
    FilterDivergence,
    GapTooLarge,
    NonMonotonicTime,
    NoOverlap,
    SchemaError,
    SingularInnovation,
)
from .evaluation import align_and_score, compare_runs, inter_track_rmse
from .filter import fixes_to_enu, gps_track, run_filter
from .heading import EnuOrigin
from .sim import simulate

log = logging.getLogger("inekf_gps")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SCHEMA = 4
EXIT_DIVERGED = 5
EXIT_NO_OVERLAP = 6


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- simulate ---------------------------------------------------------------


def _write_simulation(sc, out):
    out.mkdir(parents=True, exist_ok=True)
    tr, imu, gps = simulate(sc)
    io.write_track(out / "truth.csv", tr.t, tr.R, tr.v, tr.p, imu.gyro_bias, imu.accel_bias)
    io.write_imu(out / "imu.csv", imu)
    io.write_gps(out / "gps.csv", gps)
    origin = {"lat": sc.origin.lat, "lon": sc.origin.lon, "alt": sc.origin.alt}
    (out / "origin.yaml").write_text(yaml.safe_dump(origin, sort_keys=True), encoding="utf-8")
    (out / "scenario.yaml").write_text(yaml.safe_dump(sc.to_dict(), sort_keys=True), encoding="utf-8")
    log.info("simulated %s: %d IMU samples, %d fixes -> %s", sc.kind, len(imu), len(gps), out)


def cmd_simulate(args):
    sc = load_scenario(args.config) if args.config else Scenario()
    if args.seed is not None:
        sc = dataclasses.replace(sc, seed=args.seed)
    out = Path(args.out)
    if args.trials is None:
        _write_simulation(sc, out)
        return EXIT_OK
    if args.trials < 1:
        raise ConfigError("trials", "must be at least 1")
    # trials are independent; each gets its own directory and seed + i
    for i in range(args.trials):
        _write_simulation(dataclasses.replace(sc, seed=sc.seed + i), out / f"trial_{i:03d}")
    return EXIT_OK


# -- run --------------------------------------------------------------------


def _load_origin(path):
    data = load_yaml(path)
    try:
        return EnuOrigin(float(data["lat"]), float(data["lon"]), float(data.get("alt", 0.0)))
    except KeyError as exc:
        raise ConfigError(f"origin.{exc.args[0]}", "missing") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError("origin", str(exc)) from None


def _filter_config(args):
    cfg = load_filter_config(args.config) if args.config else FilterConfig()
    if args.gain_mode is not None:
        cfg = dataclasses.replace(cfg, gain_mode=args.gain_mode)
    if args.heading_mode is not None:
        cfg = dataclasses.replace(cfg, heading=dataclasses.replace(cfg.heading, mode=args.heading_mode))
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def cmd_run(args):
    cfg = _filter_config(args)
    origin = _load_origin(args.origin) if args.origin else None
    imu = io.read_imu(args.imu)
    fixes = io.read_gps(args.gps)
    try:
        origin, enu = fixes_to_enu(fixes, origin)
    except ValueError as exc:
        raise SchemaError(args.gps, 0, str(exc)) from None
    result = run_filter(imu, enu, cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    est_path = out / "estimate.csv"
    io.write_track(est_path, result.t, result.R, result.v, result.p, result.bg, result.ba)
    outputs = {"estimate.csv": est_path}
    if enu:
        io.write_position_track(out / "gps_track.csv", gps_track(enu))
        outputs["gps_track.csv"] = out / "gps_track.csv"
    io.write_heading_refs(out / "heading.csv", result.heading_refs)
    outputs["heading.csv"] = out / "heading.csv"

    counters = result.counters.as_dict()
    manifest = {
        "version": __version__,
        "config": cfg.to_dict(),
        "origin": None if origin is None else dataclasses.asdict(origin),
        # hashes only, so manifests do not depend on where the inputs live
        "inputs": {"imu_sha256": _sha256(args.imu), "gps_sha256": _sha256(args.gps)},
        "counters": counters,
        "outputs": {name: _sha256(p) for name, p in outputs.items()},
    }
    # content hash over everything above, so two manifests compare by one field
    manifest["content_hash"] = hashlib.sha256(
        json.dumps(manifest, sort_keys=True).encode("utf-8")
    ).hexdigest()
    _dump_json(out / "manifest.json", manifest)
    for w in counters["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    print(
        f"fixes read {counters['fixes_read']}, used {counters['fixes_used']}, "
        f"dropped {counters['fixes_dropped']}, heading refs {counters['heading_refs_emitted']}"
    )
    return EXIT_OK


# -- eval / compare ---------------------------------------------------------


def _emit(cmp, reports, labels, out):
    print(cmp.to_text())
    if out is None:
        return
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(cmp.to_json() + "\n", encoding="utf-8")
    (out / "report.txt").write_text(cmp.to_text() + "\n", encoding="utf-8")
    for label, rep in zip(labels, reports):
        io.write_errors(out / f"errors_{label}.csv", rep)


def cmd_eval(args):
    truth = io.read_track(args.truth)
    est = io.read_any_track(args.estimate)
    reports = [align_and_score(est, truth, t_min=args.t_min)]
    labels = [args.label]
    extra = {}
    if args.baseline:
        base = io.read_any_track(args.baseline)
        reports.append(align_and_score(base, truth, t_min=args.t_min))
        labels.append(args.baseline_label)
        extra["inter_track_rmse_m"] = inter_track_rmse(est, base)
    _emit(compare_runs(reports, labels, extra), reports, labels, args.out)
    return EXIT_OK


def cmd_compare(args):
    truth = io.read_track(args.truth)
    labels = args.labels.split(",") if args.labels else [Path(p).parent.name or Path(p).stem for p in args.tracks]
    if len(labels) != len(args.tracks):
        raise ConfigError("labels", f"got {len(labels)} labels for {len(args.tracks)} tracks")
    if len(set(labels)) != len(labels):
        raise ConfigError("labels", "labels must be unique")
    tracks = [io.read_any_track(p) for p in args.tracks]
    reports = [align_and_score(tr, truth, t_min=args.t_min) for tr in tracks]
    extra = {}
    pos = np.array([r.pos_rmse for r in reports])
    if len(reports) > 1:
        extra["pos_rmse_mean_m"] = float(pos.mean())
        extra["pos_rmse_std_m"] = float(pos.std(ddof=1))
        head = [r.heading_rmse for r in reports if r.heading_rmse is not None]
        if len(head) > 1:
            extra["heading_rmse_mean_deg"] = float(np.mean(head))
            extra["heading_rmse_std_deg"] = float(np.std(head, ddof=1))
    _emit(compare_runs(reports, labels, extra), reports, labels, args.out)
    return EXIT_OK


# -- entry point ------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="inekf-gps", description="GPS/IMU invariant EKF tools")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate truth, IMU and GPS files for a scenario")
    p.add_argument("--config", help="scenario YAML (defaults if omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--trials", type=int, help="write N trials with seeds seed..seed+N-1")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run the filter on IMU and GPS files")
    p.add_argument("imu", help="IMU CSV")
    p.add_argument("gps", help="GPS CSV")
    p.add_argument("--config", help="filter YAML (defaults if omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--origin", help="YAML with lat/lon/alt of the ENU origin (default: first fix)")
    p.add_argument("--gain-mode", choices=("kalman", "wls"))
    p.add_argument("--heading-mode", choices=("cog_composed", "imu_raw"))
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score an estimate against truth")
    p.add_argument("estimate")
    p.add_argument("truth")
    p.add_argument("--baseline", help="second track to score, e.g. gps_track.csv")
    p.add_argument("--label", default="GPS-DRIFT")
    p.add_argument("--baseline-label", default="GPS-Only")
    p.add_argument("--t-min", type=float, help="score only samples with t >= T")
    p.add_argument("--out", help="directory for report.json, report.txt and error series")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="score several tracks against one truth")
    p.add_argument("truth")
    p.add_argument("tracks", nargs="+")
    p.add_argument("--labels", help="comma-separated labels")
    p.add_argument("--t-min", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (GapTooLarge, NonMonotonicTime) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (FilterDivergence, SingularInnovation) as exc:
        print(f"filter diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except NoOverlap as exc:
        print(f"no overlap: {exc}", file=sys.stderr)
        return EXIT_NO_OVERLAP
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
