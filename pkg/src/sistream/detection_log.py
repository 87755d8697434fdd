"""Detection-log ingest, unique-object tracking, and descriptor resolution.

The log is the output surface of the sender-side detector: one row per
(frame, vehicle type, vehicle make) with a detection probability. Tracking
merges detections of the same identity across nearby frames so one vehicle
seen in consecutive frames counts once, and a descriptor picks out the
per-frame probability series for the vehicle being searched for.
"""

import csv
import io
import logging
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

WILDCARD = "*"

_COLUMNS = ("frame_index", "vehicle_type", "vehicle_make", "probability")
_OPTIONAL = ("bbox_id",)


def normalize_label(label: str) -> str:
    """Case-fold and collapse whitespace so 'Ford  expedition 2017' matches."""
    return " ".join(label.split()).casefold()


@dataclass(frozen=True)
class DetectionRecord:
    frame_index: int
    vehicle_type: str
    vehicle_make: str
    probability: float
    bbox_id: int | None = None


@dataclass(frozen=True)
class VehicleDescriptor:
    """What the operator is looking for; '*' matches any label."""
    vehicle_type: str = WILDCARD
    vehicle_make: str = WILDCARD

    def __post_init__(self):
        if self.vehicle_type == WILDCARD and self.vehicle_make == WILDCARD:
            raise ValueError("descriptor needs at least one non-wildcard field")

    def matches(self, vehicle_type: str, vehicle_make: str) -> bool:
        if self.vehicle_type != WILDCARD and \
                normalize_label(self.vehicle_type) != normalize_label(vehicle_type):
            return False
        if self.vehicle_make != WILDCARD and \
                normalize_label(self.vehicle_make) != normalize_label(vehicle_make):
            return False
        return True


@dataclass
class TrackedObject:
    track_id: int
    vehicle_type: str
    vehicle_make: str
    frame_span: frozenset[int]
    per_frame_prob: dict[int, float] = field(default_factory=dict)


def parse_detection_log(text: str) -> list[DetectionRecord]:
    """Parse a detection-log document. An empty document is an empty log."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append((lineno, raw))
    if not rows:
        return []

    header_lineno, header_raw = rows[0]
    header = tuple(c.strip() for c in next(csv.reader(io.StringIO(header_raw))))
    if header not in (_COLUMNS, _COLUMNS + _OPTIONAL):
        raise ParseError(
            f"unexpected columns {','.join(header)!r}; "
            f"expected {','.join(_COLUMNS)!r} with optional bbox_id",
            line=header_lineno)
    has_bbox = len(header) == 5

    records = []
    seen: set[tuple[int, str, str, int | None]] = set()
    for lineno, raw in rows[1:]:
        cells = next(csv.reader(io.StringIO(raw)))
        cells = [c.strip() for c in cells]
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", line=lineno)
        try:
            frame_index = int(cells[0])
        except ValueError:
            raise ParseError(f"frame_index: not an integer: {cells[0]!r}", line=lineno) from None
        if frame_index < 0:
            raise ValidationError(f"frame_index must be >= 0, got {frame_index}", line=lineno)
        vehicle_type, vehicle_make = cells[1], cells[2]
        if not vehicle_type or not vehicle_make:
            raise ValidationError("vehicle_type and vehicle_make must be non-empty", line=lineno)
        try:
            probability = float(cells[3])
        except ValueError:
            raise ParseError(f"probability: not a number: {cells[3]!r}", line=lineno) from None
        if not 0.0 <= probability <= 1.0:
            raise ValidationError(f"probability must be in [0,1], got {probability}", line=lineno)
        bbox_id: int | None = None
        if has_bbox and cells[4] != "":
            try:
                bbox_id = int(cells[4])
            except ValueError:
                raise ParseError(f"bbox_id: not an integer: {cells[4]!r}", line=lineno) from None
        key = (frame_index, normalize_label(vehicle_type), normalize_label(vehicle_make), bbox_id)
        if key in seen:
            raise ValidationError(
                f"duplicate detection for frame {frame_index}, "
                f"{vehicle_type!r}/{vehicle_make!r}, bbox {bbox_id}", line=lineno)
        seen.add(key)
        records.append(DetectionRecord(frame_index=frame_index, vehicle_type=vehicle_type,
                                       vehicle_make=vehicle_make, probability=probability,
                                       bbox_id=bbox_id))
    return records


def track_unique_objects(records: list[DetectionRecord], gap_tolerance: int = 1) -> list[TrackedObject]:
    """Merge same-identity detections across nearby frames into tracks.

    Identity is the normalized (vehicle_type, vehicle_make) pair; a frame gap
    larger than gap_tolerance starts a new track. Two same-identity detections
    in one frame (distinct bbox_id) collapse to that frame's max probability,
    since the log carries no geometry to keep them apart across frames.
    """
    if gap_tolerance < 0:
        raise ValueError(f"gap_tolerance must be >= 0, got {gap_tolerance}")

    by_identity: dict[tuple[str, str], dict[int, float]] = {}
    labels: dict[tuple[str, str], tuple[str, str]] = {}
    for rec in records:
        identity = (normalize_label(rec.vehicle_type), normalize_label(rec.vehicle_make))
        per_frame = by_identity.setdefault(identity, {})
        prev = per_frame.get(rec.frame_index)
        per_frame[rec.frame_index] = rec.probability if prev is None else max(prev, rec.probability)
        labels.setdefault(identity, (rec.vehicle_type, rec.vehicle_make))

    tracks: list[TrackedObject] = []
    order = sorted(by_identity, key=lambda ident: (min(by_identity[ident]), ident))
    for identity in order:
        per_frame = by_identity[identity]
        vehicle_type, vehicle_make = labels[identity]
        run: list[int] = []
        for frame in sorted(per_frame):
            if run and frame - run[-1] > gap_tolerance:
                tracks.append(_make_track(len(tracks), vehicle_type, vehicle_make, run, per_frame))
                run = []
            run.append(frame)
        if run:
            tracks.append(_make_track(len(tracks), vehicle_type, vehicle_make, run, per_frame))
    return tracks


def _make_track(track_id, vehicle_type, vehicle_make, frames, per_frame):
    return TrackedObject(track_id=track_id, vehicle_type=vehicle_type, vehicle_make=vehicle_make,
                         frame_span=frozenset(frames),
                         per_frame_prob={f: per_frame[f] for f in frames})


def target_probability_series(tracks: list[TrackedObject], descriptor: VehicleDescriptor,
                              frame_count: int) -> list[float]:
    """Per-frame max probability over descriptor-matching tracks; 0.0 elsewhere."""
    highest = max((max(t.frame_span) for t in tracks), default=-1)
    if frame_count < highest + 1:
        raise ValueError(f"frame_count {frame_count} < highest tracked frame {highest} + 1")
    series = [0.0] * frame_count
    matched = False
    for track in tracks:
        if not descriptor.matches(track.vehicle_type, track.vehicle_make):
            continue
        matched = True
        for frame, prob in track.per_frame_prob.items():
            if prob > series[frame]:
                series[frame] = prob
    if tracks and not matched:
        log.warning("descriptor %s/%s matched no track; series is all zeros",
                    descriptor.vehicle_type, descriptor.vehicle_make)
    return series
