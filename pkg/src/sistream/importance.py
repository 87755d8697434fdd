"""Frame-level importance bits and their lift to GOP granularity.

A frame is important when the target's detection probability reaches the
threshold (>= comparison: probability exactly at the threshold counts). A
GOP is important when any member frame is, because the whole GOP is
transmitted at one SNR and a mixed GOP sent low would corrupt the frames
that matter.
"""

from dataclasses import dataclass

from .docio import atomic_write, content_lines, fmt, parse_bit, parse_float, split_header
from .errors import ContractError, ParseError
from .video_model import VideoManifest


@dataclass(frozen=True)
class FrameVector:
    threshold: float
    si: tuple[int, ...]


@dataclass(frozen=True)
class GopImportance:
    threshold: float
    important: tuple[int, ...]


def _check_threshold(threshold: float) -> None:
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")


def build_frame_vector(series: list[float], threshold: float) -> FrameVector:
    _check_threshold(threshold)
    for i, p in enumerate(series):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"series[{i}] = {p} outside [0, 1]")
    return FrameVector(threshold=threshold,
                       si=tuple(1 if p >= threshold else 0 for p in series))


def frames_selected(fv: FrameVector) -> set[int]:
    return {i for i, bit in enumerate(fv.si) if bit}


def lift_to_gops(fv: FrameVector, manifest: VideoManifest) -> GopImportance:
    """GOP bit = OR over member frame bits."""
    if len(fv.si) != manifest.frame_count:
        raise ContractError(
            f"frame vector length {len(fv.si)} != manifest frame count {manifest.frame_count}")
    bits = []
    for gop_id in range(manifest.gop_count):
        members = manifest.gop_members(gop_id)
        bits.append(1 if any(fv.si[f.index] for f in members) else 0)
    return GopImportance(threshold=fv.threshold, important=tuple(bits))


def all_important(threshold: float, gop_count: int) -> GopImportance:
    """The no-importance-annotation baseline: every GOP transmitted as important."""
    return GopImportance(threshold=threshold, important=(1,) * gop_count)


def serialize_frame_vector(fv: FrameVector) -> str:
    lines = [f"threshold: {fmt(fv.threshold)}", ""]
    lines.extend(str(bit) for bit in fv.si)
    return "\n".join(lines) + "\n"


def parse_frame_vector(text: str) -> FrameVector:
    lines = content_lines(text)
    header, body = split_header(lines, ("threshold",), ("threshold",))
    threshold = parse_float(header["threshold"], "threshold")
    _check_threshold(threshold)
    bits = [parse_bit(line, "si bit", lineno) for lineno, line in body]
    return FrameVector(threshold=threshold, si=tuple(bits))


def write_frame_vector(fv: FrameVector, path: str) -> None:
    atomic_write(path, serialize_frame_vector(fv))
