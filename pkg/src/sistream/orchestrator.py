"""Per-GOP required-SNR orchestration and noise-normalized power accounting.

Important GOPs request a linear SNR proportional to their byte size
(alpha * bytes, optionally capped); unimportant ones are still transmitted,
at a small fixed floor. Power is linear SNR integrated over GOP durations,
a unitless total suitable for comparing allocation policies.
The base-station side grants exactly what is requested (single-device
model; multi-device arbitration is out of scope).
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .docio import atomic_write, content_lines, expect_columns, fmt, parse_bit, \
    parse_float, parse_int, split_header
from .errors import CalibrationError, ContractError, ParseError
from .importance import GopImportance

log = logging.getLogger(__name__)

_RSV_HEADER = ("threshold", "alpha", "snr_low_linear", "snr_cap_linear", "grant_policy")
_RSV_COLUMNS = ("gop_id", "required_snr_linear", "important")


@dataclass(frozen=True)
class SnrProfile:
    alpha: float
    snr_low_linear: float = 0.3
    snr_cap_linear: float | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.snr_low_linear < 0:
            raise ValueError(f"snr_low_linear must be >= 0, got {self.snr_low_linear}")
        if self.snr_cap_linear is not None and not self.snr_cap_linear > 0:
            raise ValueError(f"snr_cap_linear must be > 0, got {self.snr_cap_linear}")


@dataclass(frozen=True)
class RsvEntry:
    gop_id: int
    required_snr_linear: float
    important: int


@dataclass(frozen=True)
class ResourceSummaryVector:
    threshold: float
    alpha: float
    snr_low_linear: float
    snr_cap_linear: float | None
    entries: tuple[RsvEntry, ...]


@dataclass(frozen=True)
class PowerReport:
    total_power_si: float
    total_power_baseline: float
    savings_fraction: float


def build_rsv(gops: list[tuple[int, int]], importance: GopImportance,
              profile: SnrProfile) -> ResourceSummaryVector:
    """One required-SNR entry per GOP, ordered by gop_id."""
    if [g for g, _ in gops] != list(range(len(importance.important))):
        raise ContractError(
            f"GOP sets disagree: sizes cover {[g for g, _ in gops]}, "
            f"importance covers {len(importance.important)} GOPs")
    entries = []
    smallest_important: int | None = None
    for (gop_id, total_bytes), bit in zip(gops, importance.important):
        if bit:
            snr = profile.alpha * total_bytes
            if profile.snr_cap_linear is not None:
                snr = min(snr, profile.snr_cap_linear)
            if smallest_important is None or total_bytes < smallest_important:
                smallest_important = total_bytes
        else:
            snr = profile.snr_low_linear
        entries.append(RsvEntry(gop_id=gop_id, required_snr_linear=snr, important=bit))
    if smallest_important is not None and \
            profile.snr_low_linear >= profile.alpha * smallest_important:
        log.warning("snr_low_linear %g >= alpha * smallest important GOP (%g); "
                    "reported savings may be vacuous",
                    profile.snr_low_linear, profile.alpha * smallest_important)
    return ResourceSummaryVector(threshold=importance.threshold, alpha=profile.alpha,
                                 snr_low_linear=profile.snr_low_linear,
                                 snr_cap_linear=profile.snr_cap_linear,
                                 entries=tuple(entries))


def _durations(rsv: ResourceSummaryVector, gop_duration_s) -> list[float]:
    if isinstance(gop_duration_s, (int, float)):
        return [float(gop_duration_s)] * len(rsv.entries)
    durations = [float(d) for d in gop_duration_s]
    if len(durations) != len(rsv.entries):
        raise ContractError(f"{len(durations)} durations for {len(rsv.entries)} GOPs")
    return durations


def power_report(rsv: ResourceSummaryVector, baseline_rsv: ResourceSummaryVector,
                 gop_duration_s: float | Sequence[float]) -> PowerReport:
    """Total noise-normalized power (linear SNR x seconds) and savings vs baseline."""
    if [e.gop_id for e in rsv.entries] != [e.gop_id for e in baseline_rsv.entries]:
        raise ContractError("RSV and baseline RSV cover different GOP sets")
    durations = _durations(rsv, gop_duration_s)
    total_si = math.fsum(e.required_snr_linear * d for e, d in zip(rsv.entries, durations))
    total_baseline = math.fsum(e.required_snr_linear * d
                               for e, d in zip(baseline_rsv.entries, durations))
    if total_baseline <= 0:
        raise ValueError("baseline power total must be positive")
    savings = (total_baseline - total_si) / total_baseline
    if savings < 0:
        log.warning("negative savings (%g): low-SNR floor exceeds some GOP's proportional SNR",
                    savings)
    return PowerReport(total_power_si=total_si, total_power_baseline=total_baseline,
                       savings_fraction=savings)


def calibrate_alpha(gops: list[tuple[int, int]], importance: GopImportance,
                    target_total_power: float, snr_low_linear: float,
                    gop_duration_s: float | Sequence[float] = 1.0,
                    snr_cap_linear: float | None = None) -> float:
    """Solve for the alpha that makes the SI power total hit a target.

    Linear in alpha, so closed form:
        alpha = (target - snr_low * sum(unimportant durations))
                / sum(important bytes * duration)
    """
    if [g for g, _ in gops] != list(range(len(importance.important))):
        raise ContractError("GOP sets disagree between sizes and importance")
    if isinstance(gop_duration_s, (int, float)):
        durations = [float(gop_duration_s)] * len(gops)
    else:
        durations = [float(d) for d in gop_duration_s]
        if len(durations) != len(gops):
            raise ContractError(f"{len(durations)} durations for {len(gops)} GOPs")

    important_weight = math.fsum(b * d for (_, b), bit, d in
                                 zip(gops, importance.important, durations) if bit)
    unimportant_power = math.fsum(snr_low_linear * d for bit, d in
                                  zip(importance.important, durations) if not bit)
    if important_weight <= 0:
        raise CalibrationError("no important GOP: alpha has no effect on the total")
    if target_total_power <= unimportant_power:
        raise CalibrationError(
            f"target {target_total_power} not above the unimportant-GOP contribution "
            f"{unimportant_power}")
    alpha = (target_total_power - unimportant_power) / important_weight
    if snr_cap_linear is not None:
        largest = max(b for (_, b), bit in zip(gops, importance.important) if bit)
        if alpha * largest > snr_cap_linear:
            raise CalibrationError(
                f"snr_cap_linear {snr_cap_linear} binds at alpha {alpha}; target unreachable")
    return alpha


def serialize_rsv(rsv: ResourceSummaryVector) -> str:
    lines = [
        "# per-GOP SNR values come from calibration against target power totals,",
        "# not from link measurements; the low-SNR floor is a config knob",
        f"threshold: {fmt(rsv.threshold)}",
        f"alpha: {fmt(rsv.alpha)}",
        f"snr_low_linear: {fmt(rsv.snr_low_linear)}",
    ]
    if rsv.snr_cap_linear is not None:
        lines.append(f"snr_cap_linear: {fmt(rsv.snr_cap_linear)}")
    lines.append("grant_policy: granted-equals-requested")
    lines.append("")
    lines.append(",".join(_RSV_COLUMNS))
    for e in rsv.entries:
        lines.append(f"{e.gop_id},{fmt(e.required_snr_linear)},{e.important}")
    return "\n".join(lines) + "\n"


def parse_rsv(text: str) -> ResourceSummaryVector:
    lines = content_lines(text)
    header, body = split_header(lines, _RSV_HEADER,
                                ("threshold", "alpha", "snr_low_linear"))
    threshold = parse_float(header["threshold"], "threshold")
    alpha = parse_float(header["alpha"], "alpha")
    snr_low = parse_float(header["snr_low_linear"], "snr_low_linear")
    cap = parse_float(header["snr_cap_linear"], "snr_cap_linear") \
        if "snr_cap_linear" in header else None
    _, rows = expect_columns(body, _RSV_COLUMNS)
    entries = []
    for lineno, line in rows:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 3:
            raise ParseError(f"expected 3 fields, got {len(cells)}", line=lineno)
        entries.append(RsvEntry(gop_id=parse_int(cells[0], "gop_id", lineno),
                                required_snr_linear=parse_float(cells[1], "required_snr_linear", lineno),
                                important=parse_bit(cells[2], "important", lineno)))
    if [e.gop_id for e in entries] != list(range(len(entries))):
        raise ParseError("gop_id values must be contiguous from 0 and ordered")
    return ResourceSummaryVector(threshold=threshold, alpha=alpha, snr_low_linear=snr_low,
                                 snr_cap_linear=cap, entries=tuple(entries))


def write_rsv(rsv: ResourceSummaryVector, path: str) -> None:
    atomic_write(path, serialize_rsv(rsv))


def serialize_power_report(report: PowerReport) -> str:
    return (
        f"total_power_si: {report.total_power_si:.6g}\n"
        f"total_power_baseline: {report.total_power_baseline:.6g}\n"
        f"savings_fraction: {report.savings_fraction:.6g}\n"
    )


def write_power_report(report: PowerReport, path: str) -> None:
    atomic_write(path, serialize_power_report(report))
