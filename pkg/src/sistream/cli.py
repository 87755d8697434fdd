"""Command-line driver.

Verbs: validate, annotate, orchestrate, transmit, report, run, calibrate.
Each stage verb reads and writes only the documented document formats, so
stages can be swapped for external tools. Exit codes: 0 success, 2 parse or
validation failure (also argparse usage), 3 contract violation between
inputs, 4 infeasible calibration or recommendation target.
"""

import argparse
import dataclasses
import logging
import os
import sys

from .channel import ChannelConfig, parse_link_report, transmit, write_link_report
from .detection_log import VehicleDescriptor, parse_detection_log
from .docio import atomic_write
from .errors import CalibrationError, ContractError, ParseError, ValidationError
from .importance import all_important, build_frame_vector, lift_to_gops, parse_frame_vector, \
    write_frame_vector
from .orchestrator import SnrProfile, build_rsv, calibrate_alpha, parse_rsv, power_report, \
    write_power_report, write_rsv
from .pipeline import (ExperimentConfig, GoalReport, ThresholdOutcome, goal_means_builtin,
                       goal_means_from_receiver_log, goal_report_text, load_config,
                       plot_series_text, plot_snr_text, power_summary_text,
                       receiver_log_path_for, recommendation_text, run_experiment,
                       sender_series, threshold_recommendation, threshold_str)
from .video_model import gop_sizes, parse_manifest

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONTRACT = 3
EXIT_INFEASIBLE = 4


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment config document (JSON)")
    p.add_argument("--manifest", help="video manifest document")
    p.add_argument("--detection-log", help="sender-side detection log")
    p.add_argument("--receiver-log",
                   help="receiver-side detection log; may contain a {threshold} placeholder")
    p.add_argument("--vehicle-type", help="descriptor vehicle type ('*' wildcard)")
    p.add_argument("--vehicle-make", help="descriptor vehicle make ('*' wildcard)")
    p.add_argument("--thresholds", help="comma-separated SI thresholds, e.g. 0.4,0.8,0.9")
    p.add_argument("--gap-tolerance", type=int, help="max frame gap within one track")
    p.add_argument("--alpha", type=float, help="linear SNR per byte for important GOPs")
    p.add_argument("--snr-low", type=float, help="linear SNR floor for unimportant GOPs")
    p.add_argument("--snr-cap", type=float, help="optional linear SNR cap")
    p.add_argument("--bandwidth", type=float, help="channel bandwidth in Hz")
    p.add_argument("--bitrate", type=float, help="fixed bitrate override in bit/s")
    p.add_argument("--seed", type=int, help="channel corruption seed")
    p.add_argument("--payload-dir", help="directory of real frame payloads (frame_NNNNNN.bin)")
    p.add_argument("--emit-received-payloads", action="store_true", default=None,
                   help="write corrupted payloads for the receiver-side adapter")
    p.add_argument("--target-detection", type=float,
                   help="target mean detection probability for the recommendation")
    p.add_argument("--target-gops", help="comma-separated GOP ids the target applies to")
    p.add_argument("--out", help="output directory")


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        if not args.manifest or not args.detection_log:
            raise ParseError("either --config or both --manifest and --detection-log are required")
        if not args.vehicle_type and not args.vehicle_make:
            raise ParseError("descriptor required: --vehicle-type and/or --vehicle-make")
        cfg = ExperimentConfig(
            manifest_path=args.manifest,
            detection_log_path=args.detection_log,
            descriptor=VehicleDescriptor(vehicle_type=args.vehicle_type or "*",
                                         vehicle_make=args.vehicle_make or "*"))

    updates = {}
    if args.config:
        if args.manifest:
            updates["manifest_path"] = args.manifest
        if args.detection_log:
            updates["detection_log_path"] = args.detection_log
        if args.vehicle_type or args.vehicle_make:
            updates["descriptor"] = VehicleDescriptor(
                vehicle_type=args.vehicle_type or cfg.descriptor.vehicle_type,
                vehicle_make=args.vehicle_make or cfg.descriptor.vehicle_make)
    if args.receiver_log:
        updates["receiver_log_path"] = args.receiver_log
    if args.thresholds:
        updates["thresholds"] = tuple(float(t) for t in args.thresholds.split(","))
    if args.gap_tolerance is not None:
        updates["gap_tolerance"] = args.gap_tolerance
    if args.payload_dir:
        updates["payload_dir"] = args.payload_dir
    if args.emit_received_payloads is not None:
        updates["emit_received_payloads"] = args.emit_received_payloads
    if args.target_detection is not None:
        updates["target_detection"] = args.target_detection
    if args.target_gops:
        updates["target_gop_ids"] = tuple(int(g) for g in args.target_gops.split(","))
    if args.out:
        updates["output_dir"] = args.out

    if args.alpha is not None or args.snr_low is not None or args.snr_cap is not None:
        base = cfg.snr_profile
        alpha = args.alpha if args.alpha is not None else (base.alpha if base else None)
        if alpha is None:
            raise ParseError("--snr-low/--snr-cap given without an alpha "
                             "(flag or config snr_profile)")
        updates["snr_profile"] = SnrProfile(
            alpha=alpha,
            snr_low_linear=args.snr_low if args.snr_low is not None
            else (base.snr_low_linear if base else 0.3),
            snr_cap_linear=args.snr_cap if args.snr_cap is not None
            else (base.snr_cap_linear if base else None))
    if args.bandwidth is not None or args.bitrate is not None or args.seed is not None:
        ch = cfg.channel
        updates["channel"] = ChannelConfig(
            bandwidth_hz=args.bandwidth if args.bandwidth is not None else ch.bandwidth_hz,
            bitrate_bps=args.bitrate if args.bitrate is not None else ch.bitrate_bps,
            modulation=ch.modulation,
            seed=args.seed if args.seed is not None else ch.seed)
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_manifest(cfg: ExperimentConfig):
    return parse_manifest(_read(cfg.manifest_path))


def _load_series(cfg: ExperimentConfig, manifest):
    records = parse_detection_log(_read(cfg.detection_log_path))
    return sender_series(manifest, records, cfg.descriptor, cfg.gap_tolerance)


def _require_profile(cfg: ExperimentConfig) -> SnrProfile:
    if cfg.snr_profile is None:
        raise ParseError("an SNR profile is required: set config snr_profile or pass --alpha")
    return cfg.snr_profile


def _require_out(cfg: ExperimentConfig) -> str:
    if cfg.output_dir is None:
        raise ParseError("an output directory is required: pass --out or set output_dir")
    return cfg.output_dir


def cmd_validate(args) -> int:
    cfg = _resolve_config(args)
    manifest = _load_manifest(cfg)
    total = sum(f.size_bytes for f in manifest.frames)
    print(f"manifest OK: {manifest.frame_count} frames, {manifest.gop_count} GOPs, "
          f"{total} bytes, {manifest.resolution_label}")
    records = parse_detection_log(_read(cfg.detection_log_path))
    series = sender_series(manifest, records, cfg.descriptor, cfg.gap_tolerance)
    print(f"detection log OK: {len(records)} records, peak target probability "
          f"{max(series, default=0.0):g}")
    if cfg.receiver_log_path is not None:
        for t in cfg.thresholds:
            path = receiver_log_path_for(cfg.receiver_log_path, t)
            recs = parse_detection_log(_read(path))
            for rec in recs:
                if rec.frame_index >= manifest.frame_count:
                    raise ContractError(f"receiver log {path} references frame "
                                        f"{rec.frame_index} beyond manifest")
            print(f"receiver log OK ({threshold_str(t)}): {len(recs)} records")
    return EXIT_OK


def cmd_annotate(args) -> int:
    cfg = _resolve_config(args)
    out = _require_out(cfg)
    manifest = _load_manifest(cfg)
    series = _load_series(cfg, manifest)
    for t in cfg.thresholds:
        fv = build_frame_vector(series, t)
        path = os.path.join(out, f"frame_vector_t{threshold_str(t)}.txt")
        write_frame_vector(fv, path)
        print(f"wrote {path} ({sum(fv.si)} important frames)")
    return EXIT_OK


def cmd_orchestrate(args) -> int:
    cfg = _resolve_config(args)
    out = _require_out(cfg)
    profile = _require_profile(cfg)
    manifest = _load_manifest(cfg)
    gops = gop_sizes(manifest)
    vectors_dir = args.vectors or out
    for t in cfg.thresholds:
        tag = threshold_str(t)
        fv = parse_frame_vector(_read(os.path.join(vectors_dir, f"frame_vector_t{tag}.txt")))
        rsv = build_rsv(gops, lift_to_gops(fv, manifest), profile)
        path = os.path.join(out, f"rsv_t{tag}.txt")
        write_rsv(rsv, path)
        print(f"wrote {path} ({sum(e.important for e in rsv.entries)} important GOPs)")
    return EXIT_OK


def cmd_transmit(args) -> int:
    cfg = _resolve_config(args)
    out = _require_out(cfg)
    manifest = _load_manifest(cfg)
    rsv_dir = args.rsv_dir or out
    for t in cfg.thresholds:
        tag = threshold_str(t)
        rsv = parse_rsv(_read(os.path.join(rsv_dir, f"rsv_t{tag}.txt")))
        received = os.path.join(out, f"received_t{tag}") if cfg.emit_received_payloads else None
        link = transmit(manifest, rsv, cfg.channel,
                        payload_dir=cfg.payload_dir, received_dir=received)
        path = os.path.join(out, f"link_t{tag}.txt")
        write_link_report(link, path)
        flipped = sum(g.bits_flipped for g in link.gops)
        print(f"wrote {path} ({flipped} bits flipped)")
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _resolve_config(args)
    out = _require_out(cfg)
    manifest = _load_manifest(cfg)
    series = _load_series(cfg, manifest)
    gops = gop_sizes(manifest)
    durations = manifest.gop_durations_s()
    stage_dir = args.stage_dir or out

    rows = []
    powers = []
    outcomes = []
    rsvs = []
    source = None
    for t in cfg.thresholds:
        tag = threshold_str(t)
        rsv = parse_rsv(_read(os.path.join(stage_dir, f"rsv_t{tag}.txt")))
        link = parse_link_report(_read(os.path.join(stage_dir, f"link_t{tag}.txt")))
        profile = SnrProfile(alpha=rsv.alpha, snr_low_linear=rsv.snr_low_linear,
                             snr_cap_linear=rsv.snr_cap_linear)
        baseline = build_rsv(gops, all_important(t, manifest.gop_count), profile)
        power = power_report(rsv, baseline, durations)
        write_power_report(power, os.path.join(out, f"power_t{tag}.txt"))
        if cfg.receiver_log_path is not None:
            path = receiver_log_path_for(cfg.receiver_log_path, t)
            means = goal_means_from_receiver_log(_read(path), manifest, cfg.descriptor,
                                                 cfg.gap_tolerance)
            source = "receiver-log"
        else:
            means = goal_means_builtin(series, manifest, link)
            source = "builtin-degradation"
        rows.extend((t, g, m) for g, m in enumerate(means))
        powers.append((t, power))
        rsvs.append(rsv)
        outcomes.append(ThresholdOutcome(
            threshold=t, important=tuple(e.important for e in rsv.entries),
            goal_means=means, total_power_si=power.total_power_si))
        print(f"threshold {tag}: total_power_si {power.total_power_si:.6g}, "
              f"savings {100 * power.savings_fraction:.4g}%")

    goal = GoalReport(source=source, rows=tuple(rows), power=tuple(powers))
    atomic_write(os.path.join(out, "goal_report.csv"), goal_report_text(goal))
    atomic_write(os.path.join(out, "power_summary.csv"), power_summary_text(goal))
    atomic_write(os.path.join(out, "plot_detection_probability.csv"), plot_series_text(series))
    atomic_write(os.path.join(out, "plot_required_snr.csv"), plot_snr_text(rsvs))
    if cfg.target_detection is not None:
        rec = threshold_recommendation(outcomes, cfg.target_detection, cfg.target_gop_ids)
        atomic_write(os.path.join(out, "recommendation.txt"), recommendation_text(rec))
        if not rec.feasible:
            print("recommendation: infeasible (see recommendation.txt)")
            return EXIT_INFEASIBLE
        print(f"recommendation: threshold {threshold_str(rec.threshold)}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _resolve_config(args)
    out = _require_out(cfg)
    cfg = dataclasses.replace(cfg, output_dir=out)
    _require_profile(cfg)
    report = run_experiment(cfg)
    for r in report.results:
        print(f"threshold {threshold_str(r.threshold)}: "
              f"{sum(r.frame_vector.si)} important frames, "
              f"{sum(r.importance.important)} important GOPs, "
              f"total_power_si {r.power.total_power_si:.6g}, "
              f"savings {100 * r.power.savings_fraction:.4g}%")
    print(f"goal source: {report.goal.source}")
    if report.recommendation is not None:
        if not report.recommendation.feasible:
            print("recommendation: infeasible (see recommendation.txt)")
            return EXIT_INFEASIBLE
        print(f"recommendation: threshold {threshold_str(report.recommendation.threshold)}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _resolve_config(args)
    manifest = _load_manifest(cfg)
    series = _load_series(cfg, manifest)
    fv = build_frame_vector(series, args.threshold)
    importance = lift_to_gops(fv, manifest)
    snr_low = args.snr_low if args.snr_low is not None else \
        (cfg.snr_profile.snr_low_linear if cfg.snr_profile else 0.3)
    snr_cap = args.snr_cap if args.snr_cap is not None else \
        (cfg.snr_profile.snr_cap_linear if cfg.snr_profile else None)
    alpha = calibrate_alpha(gop_sizes(manifest), importance, args.target_total,
                            snr_low, manifest.gop_durations_s(), snr_cap)
    print(f"alpha: {alpha!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sistream",
        description="Situation-aware streaming simulator: importance-annotated GOP "
                    "streaming over a QPSK/AWGN uplink with power accounting.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, handler, extra in (
            ("validate", cmd_validate, None),
            ("annotate", cmd_annotate, None),
            ("orchestrate", cmd_orchestrate, "vectors"),
            ("transmit", cmd_transmit, "rsv_dir"),
            ("report", cmd_report, "stage_dir"),
            ("run", cmd_run, None),
            ("calibrate", cmd_calibrate, "calibrate")):
        p = sub.add_parser(name)
        _add_config_flags(p)
        if extra == "vectors":
            p.add_argument("--vectors", help="directory holding frame_vector_t*.txt "
                                             "(defaults to --out)")
        elif extra == "rsv_dir":
            p.add_argument("--rsv-dir", help="directory holding rsv_t*.txt (defaults to --out)")
        elif extra == "stage_dir":
            p.add_argument("--stage-dir", help="directory holding rsv_t*.txt and link_t*.txt "
                                               "(defaults to --out)")
        elif extra == "calibrate":
            p.add_argument("--threshold", type=float, required=True,
                           help="SI threshold whose importance pattern to calibrate against")
            p.add_argument("--target-total", type=float, required=True,
                           help="target total noise-normalized SI power")
        p.set_defaults(func=handler)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: missing input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ContractError as exc:
        print(f"contract error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except CalibrationError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
