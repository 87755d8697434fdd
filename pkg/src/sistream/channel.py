"""Uplink emulation: SNR -> Eb/N0 -> QPSK/AWGN bit-error rate -> seeded bit flips.

The model is memoryless hard-decision QPSK with Gray coding, so the bit
error probability is Q(sqrt(2*Eb/N0)) = 0.5*erfc(sqrt(Eb/N0)). Eb/N0 comes
from the definitional identity SNR * bandwidth / bitrate with the bitrate
taken per GOP (GOP bits over GOP duration). Flips are drawn i.i.d. per bit
from a PCG64 stream seeded per frame by a fixed mix of (run seed, frame
index), so results do not depend on processing order and a frame can be
re-corrupted in isolation with identical output.
"""

import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from .docio import atomic_write, atomic_write_bytes, content_lines, expect_columns, fmt, \
    parse_bit, parse_float, parse_int
from .errors import ContractError, ParseError
from .orchestrator import ResourceSummaryVector
from .video_model import VideoManifest, slice_count

log = logging.getLogger(__name__)

_GOP_COLUMNS = ("gop_id", "snr_linear", "ebn0_linear", "ber", "bits_sent",
                "bits_flipped", "slice_errors")
_FRAME_COLUMNS = ("frame_index", "corrupted", "slice_count", "slice_errors")

_MASK64 = (1 << 64) - 1
_CHUNK_BITS = 1 << 22  # multiple of 8: per-byte packing never straddles chunks

PAYLOAD_FILE_PATTERN = "frame_{index:06d}.bin"


@dataclass(frozen=True)
class ChannelConfig:
    bandwidth_hz: float = 2.0e7
    bitrate_bps: float | None = None  # None: derived per GOP as bytes*8/duration
    modulation: str = "QPSK"
    seed: int = 0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if self.bitrate_bps is not None and not self.bitrate_bps > 0:
            raise ValueError(f"bitrate_bps must be > 0, got {self.bitrate_bps}")
        if self.modulation != "QPSK":
            raise ValueError(f"only QPSK is modeled, got {self.modulation!r}")


@dataclass(frozen=True)
class GopLinkStats:
    gop_id: int
    snr_linear: float
    ebn0_linear: float
    ber: float
    bits_sent: int
    bits_flipped: int
    slice_error_count: int


@dataclass(frozen=True)
class FrameOutcome:
    frame_index: int
    corrupted: int
    slice_count: int
    slice_errors: int


@dataclass(frozen=True)
class LinkReport:
    gops: tuple[GopLinkStats, ...]
    frames: tuple[FrameOutcome, ...]


def snr_to_ebn0(snr_linear: float, bandwidth_hz: float, bitrate_bps: float) -> float:
    """Eb/N0 = SNR * B / Rb (all linear)."""
    if snr_linear < 0:
        raise ValueError(f"snr_linear must be >= 0, got {snr_linear}")
    if not bandwidth_hz > 0:
        raise ValueError(f"bandwidth_hz must be > 0, got {bandwidth_hz}")
    if not bitrate_bps > 0:
        raise ValueError(f"bitrate_bps must be > 0, got {bitrate_bps}")
    return snr_linear * bandwidth_hz / bitrate_bps


def qpsk_ber(ebn0_linear: float) -> float:
    """Gray-coded QPSK over AWGN: BER = Q(sqrt(2*Eb/N0)) = erfc(sqrt(Eb/N0))/2."""
    if ebn0_linear < 0:
        raise ValueError(f"ebn0_linear must be >= 0, got {ebn0_linear}")
    return 0.5 * math.erfc(math.sqrt(ebn0_linear))


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4B7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def frame_stream_seed(seed: int, frame_index: int) -> int:
    """Fixed mixing of (run seed, frame index) into a per-frame stream seed."""
    return _splitmix64((_splitmix64(seed & _MASK64) ^ frame_index) & _MASK64)


def synthesize_payload(payload_seed: int, size_bytes: int) -> bytes:
    """Reproducible pseudo-payload standing in for real frame bytes."""
    rng = np.random.Generator(np.random.PCG64(payload_seed & _MASK64))
    return rng.integers(0, 256, size=size_bytes, dtype=np.uint8).tobytes()


def _draw_flips(n_bytes: int, ber: float, stream_seed: int, want_mask: bool):
    """Per-byte flip flags, total flipped bits, and (optionally) the XOR mask."""
    rng = np.random.Generator(np.random.PCG64(stream_seed))
    flagged = np.zeros(n_bytes, dtype=bool)
    mask = np.zeros(n_bytes, dtype=np.uint8) if want_mask else None
    flips = 0
    n_bits = n_bytes * 8
    pos = 0
    while pos < n_bits:
        n = min(_CHUNK_BITS, n_bits - pos)
        hits = rng.random(n) < ber
        flips += int(hits.sum())
        packed = np.packbits(hits)  # MSB-first within each byte
        lo = pos // 8
        flagged[lo:lo + packed.size] = packed != 0
        if want_mask:
            mask[lo:lo + packed.size] = packed
        pos += n
    return flagged, flips, mask


def corrupt_payload(payload: bytes, ber: float, stream_seed: int) -> tuple[bytes, int]:
    """Flip each bit independently with probability ber; deterministic in the seed."""
    if not 0.0 <= ber <= 0.5:
        raise ValueError(f"ber must be in [0, 0.5], got {ber}")
    data = bytes(payload)
    if ber == 0.0 or not data:
        return data, 0
    arr = np.frombuffer(data, dtype=np.uint8)
    _, flips, mask = _draw_flips(len(data), ber, stream_seed, want_mask=True)
    return (arr ^ mask).tobytes(), flips


def _frame_payload(frame, payload_dir: str | None) -> bytes:
    if payload_dir is not None:
        path = os.path.join(payload_dir, PAYLOAD_FILE_PATTERN.format(index=frame.index))
        if os.path.exists(path):
            with open(path, "rb") as fh:
                data = fh.read()
            if len(data) != frame.size_bytes:
                raise ContractError(
                    f"payload file for frame {frame.index} is {len(data)} bytes, "
                    f"manifest says {frame.size_bytes}")
            return data
        log.debug("no payload file for frame %d; synthesizing from seed", frame.index)
    return synthesize_payload(frame.payload_seed, frame.size_bytes)


def transmit(manifest: VideoManifest, rsv: ResourceSummaryVector, config: ChannelConfig,
             *, payload_dir: str | None = None,
             received_dir: str | None = None) -> LinkReport:
    """Corrupt every frame at its GOP's BER and aggregate link statistics.

    Payload bytes only need to be materialized when received_dir is set (the
    flip statistics depend on sizes, not content). Received payloads are
    written as frame_NNNNNN.bin files for the receiver-side adapter.
    """
    by_gop = {e.gop_id: e for e in rsv.entries}
    gop_stats: list[GopLinkStats] = []
    frame_outcomes: list[FrameOutcome] = []
    mtu = manifest.mtu_bytes

    for gop_id in range(manifest.gop_count):
        entry = by_gop.get(gop_id)
        if entry is None:
            raise ContractError(f"RSV has no entry for GOP {gop_id}")
        members = manifest.gop_members(gop_id)
        gop_bytes = sum(f.size_bytes for f in members)
        duration = len(members) / manifest.fps
        bitrate = config.bitrate_bps if config.bitrate_bps is not None \
            else gop_bytes * 8 / duration
        ebn0 = snr_to_ebn0(entry.required_snr_linear, config.bandwidth_hz, bitrate)
        ber = qpsk_ber(ebn0)

        bits_sent = gop_bytes * 8
        bits_flipped = 0
        gop_slice_errors = 0
        for frame in members:
            n_slices = slice_count(frame.size_bytes, mtu)
            if ber == 0.0:
                flips, frame_slice_errors = 0, 0
                if received_dir is not None:
                    _write_received(received_dir, frame.index,
                                    _frame_payload(frame, payload_dir))
            else:
                stream_seed = frame_stream_seed(config.seed, frame.index)
                want_mask = received_dir is not None
                flagged, flips, mask = _draw_flips(frame.size_bytes, ber, stream_seed, want_mask)
                offsets = np.arange(0, frame.size_bytes, mtu)
                per_slice = np.add.reduceat(flagged.astype(np.int64), offsets)
                frame_slice_errors = int((per_slice > 0).sum())
                if want_mask:
                    payload = np.frombuffer(_frame_payload(frame, payload_dir), dtype=np.uint8)
                    _write_received(received_dir, frame.index, (payload ^ mask).tobytes())
            bits_flipped += flips
            gop_slice_errors += frame_slice_errors
            frame_outcomes.append(FrameOutcome(frame_index=frame.index,
                                               corrupted=1 if flips else 0,
                                               slice_count=n_slices,
                                               slice_errors=frame_slice_errors))
        gop_stats.append(GopLinkStats(gop_id=gop_id, snr_linear=entry.required_snr_linear,
                                      ebn0_linear=ebn0, ber=ber, bits_sent=bits_sent,
                                      bits_flipped=bits_flipped,
                                      slice_error_count=gop_slice_errors))
    return LinkReport(gops=tuple(gop_stats), frames=tuple(frame_outcomes))


def _write_received(received_dir: str, frame_index: int, data: bytes) -> None:
    path = os.path.join(received_dir, PAYLOAD_FILE_PATTERN.format(index=frame_index))
    atomic_write_bytes(path, data)


def serialize_link_report(report: LinkReport) -> str:
    lines = ["# BER is the analytic QPSK/AWGN reconstruction, not an observed rate",
             "[gops]", ",".join(_GOP_COLUMNS)]
    for g in report.gops:
        lines.append(f"{g.gop_id},{fmt(g.snr_linear)},{fmt(g.ebn0_linear)},{fmt(g.ber)},"
                     f"{g.bits_sent},{g.bits_flipped},{g.slice_error_count}")
    lines.append("")
    lines.append("[frames]")
    lines.append(",".join(_FRAME_COLUMNS))
    for f in report.frames:
        lines.append(f"{f.frame_index},{f.corrupted},{f.slice_count},{f.slice_errors}")
    return "\n".join(lines) + "\n"


def parse_link_report(text: str) -> LinkReport:
    lines = content_lines(text)
    try:
        gop_at = next(i for i, (_, line) in enumerate(lines) if line == "[gops]")
        frame_at = next(i for i, (_, line) in enumerate(lines) if line == "[frames]")
    except StopIteration:
        raise ParseError("link report needs [gops] and [frames] sections") from None
    if not gop_at < frame_at:
        raise ParseError("[gops] section must precede [frames]")

    _, gop_rows = expect_columns(lines[gop_at + 1:frame_at], _GOP_COLUMNS)
    gops = []
    for lineno, line in gop_rows:
        c = [x.strip() for x in line.split(",")]
        if len(c) != len(_GOP_COLUMNS):
            raise ParseError(f"expected {len(_GOP_COLUMNS)} fields, got {len(c)}", line=lineno)
        gops.append(GopLinkStats(gop_id=parse_int(c[0], "gop_id", lineno),
                                 snr_linear=parse_float(c[1], "snr_linear", lineno),
                                 ebn0_linear=parse_float(c[2], "ebn0_linear", lineno),
                                 ber=parse_float(c[3], "ber", lineno),
                                 bits_sent=parse_int(c[4], "bits_sent", lineno),
                                 bits_flipped=parse_int(c[5], "bits_flipped", lineno),
                                 slice_error_count=parse_int(c[6], "slice_errors", lineno)))

    _, frame_rows = expect_columns(lines[frame_at + 1:], _FRAME_COLUMNS)
    frames = []
    for lineno, line in frame_rows:
        c = [x.strip() for x in line.split(",")]
        if len(c) != len(_FRAME_COLUMNS):
            raise ParseError(f"expected {len(_FRAME_COLUMNS)} fields, got {len(c)}", line=lineno)
        frames.append(FrameOutcome(frame_index=parse_int(c[0], "frame_index", lineno),
                                   corrupted=parse_bit(c[1], "corrupted", lineno),
                                   slice_count=parse_int(c[2], "slice_count", lineno),
                                   slice_errors=parse_int(c[3], "slice_errors", lineno)))
    return LinkReport(gops=tuple(gops), frames=tuple(frames))


def write_link_report(report: LinkReport, path: str) -> None:
    atomic_write(path, serialize_link_report(report))
