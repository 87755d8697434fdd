"""Abstract model of an encoded video: frames, GOPs, and MTU slices.

A manifest of per-frame byte sizes (plus a seed for synthesizing a
reproducible pseudo-payload) stands in for the real bitstream. Corruption
and power accounting depend only on sizes and bits, so codec semantics are
out of scope; real payload bytes can be attached at transmit time.
"""

import math
from dataclasses import dataclass

from .docio import atomic_write, content_lines, expect_columns, parse_int, split_header
from .errors import ParseError, ValidationError

RESOLUTION_LABELS = ("144p", "360p", "720p", "1080p", "2160p")
FRAME_TYPES = ("I", "P", "B")

_HEADER_FIELDS = ("resolution_label", "fps", "gop_length_frames", "mtu_bytes")
_FRAME_COLUMNS = ("index", "frame_type", "size_bytes", "payload_seed")


@dataclass(frozen=True)
class FrameRecord:
    index: int
    frame_type: str
    size_bytes: int
    gop_id: int
    payload_seed: int


@dataclass(frozen=True)
class Slice:
    frame_index: int
    slice_index: int
    size_bytes: int


@dataclass(frozen=True)
class VideoManifest:
    resolution_label: str
    fps: int
    gop_length_frames: int
    mtu_bytes: int
    frames: tuple[FrameRecord, ...]

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def gop_count(self) -> int:
        if not self.frames:
            return 0
        return (len(self.frames) + self.gop_length_frames - 1) // self.gop_length_frames

    def gop_members(self, gop_id: int) -> tuple[FrameRecord, ...]:
        lo = gop_id * self.gop_length_frames
        return self.frames[lo:lo + self.gop_length_frames]

    def gop_durations_s(self) -> list[float]:
        """Per-GOP duration in seconds; only the last GOP may be short."""
        return [len(self.gop_members(g)) / self.fps for g in range(self.gop_count)]


def validate_manifest(manifest: VideoManifest) -> VideoManifest:
    """Enforce the structural invariants; returns the manifest on success."""
    if manifest.resolution_label not in RESOLUTION_LABELS:
        raise ValidationError(
            f"resolution_label must be one of {RESOLUTION_LABELS}, got {manifest.resolution_label!r}",
            field="resolution_label")
    if manifest.fps < 1:
        raise ValidationError(f"fps must be >= 1, got {manifest.fps}", field="fps")
    if manifest.gop_length_frames < 1:
        raise ValidationError(f"gop_length_frames must be >= 1, got {manifest.gop_length_frames}",
                              field="gop_length_frames")
    if manifest.mtu_bytes < 1:
        raise ValidationError(f"mtu_bytes must be >= 1, got {manifest.mtu_bytes}", field="mtu_bytes")
    gop_len = manifest.gop_length_frames
    for pos, frame in enumerate(manifest.frames):
        if frame.index != pos:
            raise ValidationError(
                f"frame indices must be contiguous from 0: position {pos} holds index {frame.index}",
                field="index")
        if frame.size_bytes < 1:
            raise ValidationError(f"frame {frame.index} has non-positive size {frame.size_bytes}",
                                  field="size_bytes")
        if frame.frame_type not in FRAME_TYPES:
            raise ValidationError(f"frame {frame.index} has unknown type {frame.frame_type!r}",
                                  field="frame_type")
        if frame.gop_id != frame.index // gop_len:
            raise ValidationError(
                f"frame {frame.index} carries gop_id {frame.gop_id}, expected {frame.index // gop_len}",
                field="gop_id")
        at_gop_start = frame.index % gop_len == 0
        if at_gop_start and frame.frame_type != "I":
            raise ValidationError(f"frame {frame.index} must be I (GOP start)", field="frame_type")
        if not at_gop_start and frame.frame_type == "I":
            raise ValidationError(
                f"frame {frame.index} must not be I (closed GOP allows I only at GOP start)",
                field="frame_type")
    return manifest


def parse_manifest(text: str) -> VideoManifest:
    """Parse and validate a manifest document."""
    lines = content_lines(text)
    header, body = split_header(lines, _HEADER_FIELDS, _HEADER_FIELDS)
    resolution = header["resolution_label"]
    fps = parse_int(header["fps"], "fps")
    gop_len = parse_int(header["gop_length_frames"], "gop_length_frames")
    mtu = parse_int(header["mtu_bytes"], "mtu_bytes")
    if gop_len < 1:
        raise ValidationError(f"gop_length_frames must be >= 1, got {gop_len}",
                              field="gop_length_frames")

    _, rows = expect_columns(body, _FRAME_COLUMNS)
    frames = []
    for lineno, line in rows:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(_FRAME_COLUMNS):
            raise ParseError(f"expected {len(_FRAME_COLUMNS)} fields, got {len(cells)}", line=lineno)
        index = parse_int(cells[0], "index", lineno)
        frame_type = cells[1]
        size_bytes = parse_int(cells[2], "size_bytes", lineno)
        payload_seed = parse_int(cells[3], "payload_seed", lineno)
        frames.append(FrameRecord(index=index, frame_type=frame_type, size_bytes=size_bytes,
                                  gop_id=index // gop_len, payload_seed=payload_seed))

    manifest = VideoManifest(resolution_label=resolution, fps=fps, gop_length_frames=gop_len,
                             mtu_bytes=mtu, frames=tuple(frames))
    return validate_manifest(manifest)


def serialize_manifest(manifest: VideoManifest) -> str:
    out = [
        f"resolution_label: {manifest.resolution_label}",
        f"fps: {manifest.fps}",
        f"gop_length_frames: {manifest.gop_length_frames}",
        f"mtu_bytes: {manifest.mtu_bytes}",
        "",
        ",".join(_FRAME_COLUMNS),
    ]
    for f in manifest.frames:
        out.append(f"{f.index},{f.frame_type},{f.size_bytes},{f.payload_seed}")
    return "\n".join(out) + "\n"


def write_manifest(manifest: VideoManifest, path: str) -> None:
    atomic_write(path, serialize_manifest(manifest))


def gop_sizes(manifest: VideoManifest) -> list[tuple[int, int]]:
    """(gop_id, total bytes over member frames), ordered by gop_id."""
    totals = [0] * manifest.gop_count
    for frame in manifest.frames:
        totals[frame.gop_id] += frame.size_bytes
    return list(enumerate(totals))


def slice_frame(frame: FrameRecord, mtu_bytes: int) -> list[Slice]:
    """Cut a frame into MTU-sized slices; only the last may be short."""
    if mtu_bytes < 1:
        raise ValueError(f"mtu_bytes must be >= 1, got {mtu_bytes}")
    slices = []
    remaining = frame.size_bytes
    for k in range(math.ceil(frame.size_bytes / mtu_bytes)):
        size = min(mtu_bytes, remaining)
        slices.append(Slice(frame_index=frame.index, slice_index=k, size_bytes=size))
        remaining -= size
    return slices


def slice_count(size_bytes: int, mtu_bytes: int) -> int:
    return (size_bytes + mtu_bytes - 1) // mtu_bytes


__all__ = [
    "FRAME_TYPES", "FrameRecord", "RESOLUTION_LABELS", "Slice", "VideoManifest",
    "gop_sizes", "parse_manifest", "serialize_manifest", "slice_count", "slice_frame",
    "validate_manifest", "write_manifest",
]
