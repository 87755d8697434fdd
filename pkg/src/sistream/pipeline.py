"""End-to-end experiment driver.

Wires manifest + detection log + descriptor + thresholds through importance
annotation, SNR orchestration, and the channel, then emits per-threshold
documents, goal-level detection metrics, and plot-ready data. A run is a
pure function of its config (including the channel seed): artifacts carry
no timestamps and are written atomically, so identical configs produce
byte-identical output trees.
"""

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

from .channel import ChannelConfig, LinkReport, transmit, write_link_report
from .detection_log import (DetectionRecord, VehicleDescriptor, parse_detection_log,
                            target_probability_series, track_unique_objects)
from .docio import atomic_write, fmt
from .errors import ContractError, ParseError
from .importance import (FrameVector, GopImportance, all_important, build_frame_vector,
                         lift_to_gops, write_frame_vector)
from .orchestrator import (PowerReport, ResourceSummaryVector, SnrProfile, build_rsv,
                           power_report, write_power_report, write_rsv)
from .video_model import VideoManifest, gop_sizes, parse_manifest

DEFAULT_THRESHOLDS = (0.4, 0.8, 0.9)

GOAL_SOURCE_RECEIVER = "receiver-log"
GOAL_SOURCE_BUILTIN = "builtin-degradation"


def threshold_str(threshold: float) -> str:
    """Canonical threshold token used in filenames and {threshold} placeholders."""
    return format(threshold, "g")


@dataclass(frozen=True)
class ExperimentConfig:
    manifest_path: str
    detection_log_path: str
    descriptor: VehicleDescriptor
    snr_profile: SnrProfile | None = None
    channel: ChannelConfig = ChannelConfig()
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    receiver_log_path: str | None = None
    gap_tolerance: int = 1
    payload_dir: str | None = None
    emit_received_payloads: bool = False
    target_detection: float | None = None
    target_gop_ids: tuple[int, ...] | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if not self.thresholds:
            raise ValueError("thresholds must be non-empty")
        for t in self.thresholds:
            if not 0.0 < t <= 1.0:
                raise ValueError(f"threshold {t} outside (0, 1]")
        if self.gap_tolerance < 0:
            raise ValueError(f"gap_tolerance must be >= 0, got {self.gap_tolerance}")
        if self.emit_received_payloads and self.output_dir is None:
            raise ValueError("emit_received_payloads requires an output_dir")


_CONFIG_KEYS = {"manifest", "detection_log", "receiver_log", "descriptor", "thresholds",
                "gap_tolerance", "snr_profile", "channel", "payload_dir",
                "emit_received_payloads", "target_detection", "target_gop_ids", "output_dir"}
_DESCRIPTOR_KEYS = {"vehicle_type", "vehicle_make"}
_PROFILE_KEYS = {"alpha", "snr_low_linear", "snr_cap_linear"}
_CHANNEL_KEYS = {"bandwidth_hz", "bitrate_bps", "modulation", "seed"}


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ParseError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str) -> ExperimentConfig:
    """Load an experiment config document (strict JSON); paths resolve to its dir."""
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ParseError("config document must be a JSON object")
    _reject_unknown(raw, _CONFIG_KEYS, "config")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return None if p is None else os.path.join(base, p)

    for key in ("manifest", "detection_log", "descriptor"):
        if key not in raw:
            raise ParseError(f"config is missing required key {key!r}")
    descriptor_raw = raw["descriptor"]
    _reject_unknown(descriptor_raw, _DESCRIPTOR_KEYS, "descriptor")
    descriptor = VehicleDescriptor(vehicle_type=descriptor_raw.get("vehicle_type", "*"),
                                   vehicle_make=descriptor_raw.get("vehicle_make", "*"))
    profile = None
    if raw.get("snr_profile") is not None:
        profile_raw = raw["snr_profile"]
        _reject_unknown(profile_raw, _PROFILE_KEYS, "snr_profile")
        profile = SnrProfile(alpha=profile_raw["alpha"],
                             snr_low_linear=profile_raw.get("snr_low_linear", 0.3),
                             snr_cap_linear=profile_raw.get("snr_cap_linear"))
    channel_raw = raw.get("channel", {})
    _reject_unknown(channel_raw, _CHANNEL_KEYS, "channel")
    channel = ChannelConfig(bandwidth_hz=channel_raw.get("bandwidth_hz", 2.0e7),
                            bitrate_bps=channel_raw.get("bitrate_bps"),
                            modulation=channel_raw.get("modulation", "QPSK"),
                            seed=channel_raw.get("seed", 0))
    return ExperimentConfig(
        manifest_path=resolve(raw["manifest"]),
        detection_log_path=resolve(raw["detection_log"]),
        descriptor=descriptor,
        snr_profile=profile,
        channel=channel,
        thresholds=tuple(raw.get("thresholds", DEFAULT_THRESHOLDS)),
        receiver_log_path=resolve(raw.get("receiver_log")),
        gap_tolerance=raw.get("gap_tolerance", 1),
        payload_dir=resolve(raw.get("payload_dir")),
        emit_received_payloads=raw.get("emit_received_payloads", False),
        target_detection=raw.get("target_detection"),
        target_gop_ids=None if raw.get("target_gop_ids") is None
        else tuple(raw["target_gop_ids"]),
        output_dir=resolve(raw.get("output_dir")),
    )


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    frame_vector: FrameVector
    importance: GopImportance
    rsv: ResourceSummaryVector
    power: PowerReport
    link: LinkReport
    goal_means: tuple[float, ...]
    goal_source: str


@dataclass(frozen=True)
class GoalReport:
    source: str
    rows: tuple[tuple[float, int, float], ...]          # (threshold, gop_id, mean)
    power: tuple[tuple[float, PowerReport], ...]


@dataclass(frozen=True)
class ThresholdOutcome:
    """The slice of a per-threshold result that threshold selection needs."""
    threshold: float
    important: tuple[int, ...]
    goal_means: tuple[float, ...]
    total_power_si: float


@dataclass(frozen=True)
class ThresholdRecommendation:
    target_detection: float
    gop_ids: tuple[int, ...]
    feasible: bool
    threshold: float | None
    shortfalls: tuple[tuple[float, tuple[str, ...]], ...]


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    manifest: VideoManifest
    sender_series: tuple[float, ...]
    results: tuple[ThresholdResult, ...]
    goal: GoalReport
    recommendation: ThresholdRecommendation | None


def sender_series(manifest: VideoManifest, records: list[DetectionRecord],
                  descriptor: VehicleDescriptor, gap_tolerance: int) -> list[float]:
    """Cross-validate the log against the manifest and resolve the descriptor."""
    for rec in records:
        if rec.frame_index >= manifest.frame_count:
            raise ContractError(
                f"detection log references frame {rec.frame_index}, "
                f"manifest has {manifest.frame_count} frames")
    tracks = track_unique_objects(records, gap_tolerance)
    return target_probability_series(tracks, descriptor, manifest.frame_count)


def gop_means(series: Sequence[float], manifest: VideoManifest) -> tuple[float, ...]:
    """Mean of a per-frame series over each GOP's member frames."""
    means = []
    for gop_id in range(manifest.gop_count):
        members = manifest.gop_members(gop_id)
        means.append(math.fsum(series[f.index] for f in members) / len(members))
    return tuple(means)


def goal_means_from_receiver_log(text: str, manifest: VideoManifest,
                                 descriptor: VehicleDescriptor,
                                 gap_tolerance: int) -> tuple[float, ...]:
    records = parse_detection_log(text)
    series = sender_series(manifest, records, descriptor, gap_tolerance)
    return gop_means(series, manifest)


def goal_means_builtin(series: Sequence[float], manifest: VideoManifest,
                       link: LinkReport) -> tuple[float, ...]:
    """Monotone proxy: receiver prob = sender prob * (1 - slice error fraction)."""
    by_index = {f.frame_index: f for f in link.frames}
    degraded = []
    for i, p in enumerate(series):
        outcome = by_index.get(i)
        if outcome is None:
            raise ContractError(f"link report has no outcome for frame {i}")
        degraded.append(p * (1.0 - outcome.slice_errors / outcome.slice_count))
    return gop_means(degraded, manifest)


def receiver_log_path_for(template: str, threshold: float) -> str:
    return template.replace("{threshold}", threshold_str(threshold))


def threshold_recommendation(outcomes: Sequence[ThresholdOutcome], target_detection: float,
                             gop_ids: Sequence[int] | None = None) -> ThresholdRecommendation:
    """Cheapest threshold that marks every evaluated GOP important and meets the target.

    A GOP transmitted at the low-SNR floor is not a guarantee the sender can
    make, so a threshold only qualifies on GOPs it marks important. Among
    qualifiers the minimum SI power wins; ties break toward the larger
    threshold. Defaults to the GOPs important at the strictest threshold.
    """
    if not outcomes:
        raise ValueError("no per-threshold outcomes supplied")
    if gop_ids is None:
        strictest = max(outcomes, key=lambda o: o.threshold)
        gop_ids = tuple(g for g, bit in enumerate(strictest.important) if bit)
    else:
        gop_ids = tuple(gop_ids)
        gop_count = len(outcomes[0].important)
        bad = [g for g in gop_ids if not 0 <= g < gop_count]
        if bad:
            raise ContractError(f"evaluation GOPs {bad} outside range 0..{gop_count - 1}")

    shortfalls = []
    qualified = []
    for outcome in outcomes:
        issues = []
        for g in gop_ids:
            if not outcome.important[g]:
                issues.append(f"gop {g} not marked important at threshold "
                              f"{threshold_str(outcome.threshold)}")
            elif outcome.goal_means[g] < target_detection:
                issues.append(f"gop {g} mean {outcome.goal_means[g]:.6g} below target "
                              f"{target_detection:.6g}")
        shortfalls.append((outcome.threshold, tuple(issues)))
        if not issues:
            qualified.append(outcome)

    if not qualified:
        return ThresholdRecommendation(target_detection=target_detection, gop_ids=gop_ids,
                                       feasible=False, threshold=None,
                                       shortfalls=tuple(shortfalls))
    best = min(qualified, key=lambda o: (o.total_power_si, -o.threshold))
    return ThresholdRecommendation(target_detection=target_detection, gop_ids=gop_ids,
                                   feasible=True, threshold=best.threshold,
                                   shortfalls=tuple(shortfalls))


def outcomes_of(results: Sequence[ThresholdResult]) -> list[ThresholdOutcome]:
    return [ThresholdOutcome(threshold=r.threshold, important=r.importance.important,
                             goal_means=r.goal_means, total_power_si=r.power.total_power_si)
            for r in results]


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Full chain for every threshold; writes artifacts when output_dir is set."""
    if config.snr_profile is None:
        raise ValueError("config has no snr_profile (alpha is required to run)")
    with open(config.manifest_path, encoding="utf-8") as fh:
        manifest = parse_manifest(fh.read())
    with open(config.detection_log_path, encoding="utf-8") as fh:
        records = parse_detection_log(fh.read())
    series = sender_series(manifest, records, config.descriptor, config.gap_tolerance)

    gops = gop_sizes(manifest)
    durations = manifest.gop_durations_s()
    results = []
    for t in config.thresholds:
        fv = build_frame_vector(series, t)
        imp = lift_to_gops(fv, manifest)
        rsv = build_rsv(gops, imp, config.snr_profile)
        baseline = build_rsv(gops, all_important(t, manifest.gop_count), config.snr_profile)
        power = power_report(rsv, baseline, durations)
        received_dir = None
        if config.emit_received_payloads:
            received_dir = os.path.join(config.output_dir, f"received_t{threshold_str(t)}")
        link = transmit(manifest, rsv, config.channel,
                        payload_dir=config.payload_dir, received_dir=received_dir)
        if config.receiver_log_path is not None:
            path = receiver_log_path_for(config.receiver_log_path, t)
            with open(path, encoding="utf-8") as fh:
                means = goal_means_from_receiver_log(fh.read(), manifest,
                                                     config.descriptor, config.gap_tolerance)
            source = GOAL_SOURCE_RECEIVER
        else:
            means = goal_means_builtin(series, manifest, link)
            source = GOAL_SOURCE_BUILTIN
        results.append(ThresholdResult(threshold=t, frame_vector=fv, importance=imp,
                                       rsv=rsv, power=power, link=link,
                                       goal_means=means, goal_source=source))

    goal = GoalReport(
        source=results[0].goal_source,
        rows=tuple((r.threshold, g, m) for r in results for g, m in enumerate(r.goal_means)),
        power=tuple((r.threshold, r.power) for r in results))
    recommendation = None
    if config.target_detection is not None:
        recommendation = threshold_recommendation(outcomes_of(results),
                                                  config.target_detection,
                                                  config.target_gop_ids)
    report = ExperimentReport(config=config, manifest=manifest,
                              sender_series=tuple(series), results=tuple(results),
                              goal=goal, recommendation=recommendation)
    if config.output_dir is not None:
        write_report_artifacts(report, config.output_dir)
    return report


def emit_plot_data(report: ExperimentReport) -> dict[str, str]:
    """Plot-ready documents: per-frame probability line, per-GOP SNR bars."""
    return {
        "plot_detection_probability.csv": plot_series_text(report.sender_series),
        "plot_required_snr.csv": plot_snr_text([r.rsv for r in report.results]),
    }


def plot_series_text(series: Sequence[float]) -> str:
    lines = ["frame_index,probability"]
    lines.extend(f"{i},{fmt(p)}" for i, p in enumerate(series))
    return "\n".join(lines) + "\n"


def plot_snr_text(rsvs: Sequence[ResourceSummaryVector]) -> str:
    lines = ["threshold,gop_id,required_snr_linear"]
    for rsv in rsvs:
        for e in rsv.entries:
            lines.append(f"{threshold_str(rsv.threshold)},{e.gop_id},{fmt(e.required_snr_linear)}")
    return "\n".join(lines) + "\n"


def goal_report_text(goal: GoalReport) -> str:
    lines = ["threshold,gop_id,mean_receiver_detection_prob,source"]
    for threshold, gop_id, mean in goal.rows:
        lines.append(f"{threshold_str(threshold)},{gop_id},{fmt(mean)},{goal.source}")
    return "\n".join(lines) + "\n"


def power_summary_text(goal: GoalReport) -> str:
    lines = ["threshold,total_power_si,total_power_baseline,savings_fraction"]
    for threshold, p in goal.power:
        lines.append(f"{threshold_str(threshold)},{fmt(p.total_power_si)},"
                     f"{fmt(p.total_power_baseline)},{fmt(p.savings_fraction)}")
    return "\n".join(lines) + "\n"


def recommendation_text(rec: ThresholdRecommendation) -> str:
    lines = [
        f"target_detection: {fmt(rec.target_detection)}",
        f"gop_ids: {','.join(str(g) for g in rec.gop_ids)}",
        f"feasible: {1 if rec.feasible else 0}",
        f"recommended_threshold: {'none' if rec.threshold is None else threshold_str(rec.threshold)}",
    ]
    for threshold, issues in rec.shortfalls:
        if issues:
            lines.append(f"threshold {threshold_str(threshold)}: " + "; ".join(issues))
        else:
            lines.append(f"threshold {threshold_str(threshold)}: qualified")
    return "\n".join(lines) + "\n"


def write_report_artifacts(report: ExperimentReport, output_dir: str) -> None:
    os.makedirs(output_dir, exist_ok=True)
    for r in report.results:
        tag = threshold_str(r.threshold)
        write_frame_vector(r.frame_vector, os.path.join(output_dir, f"frame_vector_t{tag}.txt"))
        write_rsv(r.rsv, os.path.join(output_dir, f"rsv_t{tag}.txt"))
        write_link_report(r.link, os.path.join(output_dir, f"link_t{tag}.txt"))
        write_power_report(r.power, os.path.join(output_dir, f"power_t{tag}.txt"))
    atomic_write(os.path.join(output_dir, "goal_report.csv"), goal_report_text(report.goal))
    atomic_write(os.path.join(output_dir, "power_summary.csv"), power_summary_text(report.goal))
    for name, text in emit_plot_data(report).items():
        atomic_write(os.path.join(output_dir, name), text)
    if report.recommendation is not None:
        atomic_write(os.path.join(output_dir, "recommendation.txt"),
                     recommendation_text(report.recommendation))
