import math

import pytest
from hypothesis import given, strategies as st

from conftest import read_fixture
from sistream.errors import ParseError, ValidationError
from sistream.video_model import (FrameRecord, VideoManifest, gop_sizes, parse_manifest,
                                  serialize_manifest, slice_frame, validate_manifest)


def make_manifest_text(n_frames, fps=30, gop_len=30, size=1000, bad_frame=None, bad_type="P"):
    lines = [
        "resolution_label: 720p",
        f"fps: {fps}",
        f"gop_length_frames: {gop_len}",
        "mtu_bytes: 1500",
        "",
        "index,frame_type,size_bytes,payload_seed",
    ]
    for i in range(n_frames):
        ftype = "I" if i % gop_len == 0 else ("P" if i % 3 == 0 else "B")
        if i == bad_frame:
            ftype = bad_type
        lines.append(f"{i},{ftype},{size},{100 + i}")
    return "\n".join(lines) + "\n"


def test_parse_90_frame_manifest():
    m = parse_manifest(make_manifest_text(90))
    assert m.frame_count == 90
    assert m.gop_count == 3
    assert [f.index for f in m.frames if f.frame_type == "I"] == [0, 30, 60]
    assert m.gop_members(1)[0].index == 30


def test_gop_start_must_be_i():
    with pytest.raises(ValidationError, match="frame 30 must be I"):
        parse_manifest(make_manifest_text(90, bad_frame=30, bad_type="P"))


def test_mid_gop_i_rejected():
    with pytest.raises(ValidationError, match="frame 31 must not be I"):
        parse_manifest(make_manifest_text(90, bad_frame=31, bad_type="I"))


def test_five_resolution_fixtures_parse_and_scale():
    totals = {}
    frame_counts = set()
    for label in ("144p", "360p", "720p", "1080p", "2160p"):
        m = parse_manifest(read_fixture(f"manifest_{label}.txt"))
        assert m.resolution_label == label
        totals[label] = sum(f.size_bytes for f in m.frames)
        frame_counts.add(m.frame_count)
    assert frame_counts == {300}
    assert totals["144p"] < totals["360p"] < totals["720p"] < totals["1080p"] < totals["2160p"]
    assert totals["2160p"] > totals["720p"]


def test_unknown_header_field_rejected():
    text = "codec: h264\n" + make_manifest_text(30)
    with pytest.raises(ParseError, match="unknown header field"):
        parse_manifest(text)


def test_unknown_column_rejected():
    text = make_manifest_text(30).replace("index,frame_type,size_bytes,payload_seed",
                                          "index,frame_type,size_bytes,payload_seed,extra")
    with pytest.raises(ParseError, match="unexpected columns"):
        parse_manifest(text)


def test_missing_header_field_rejected():
    text = "\n".join(line for line in make_manifest_text(30).splitlines()
                     if not line.startswith("mtu_bytes"))
    with pytest.raises(ParseError, match="mtu_bytes"):
        parse_manifest(text)


def test_non_contiguous_indices_rejected():
    text = make_manifest_text(30).replace("\n5,", "\n50,")
    with pytest.raises(ValidationError, match="contiguous"):
        parse_manifest(text)


def test_zero_size_frame_rejected():
    text = make_manifest_text(30, size=0)
    with pytest.raises(ValidationError, match="non-positive size"):
        parse_manifest(text)


def test_round_trip_on_fixture():
    text = read_fixture("manifest_720p.txt")
    m = parse_manifest(text)
    assert parse_manifest(serialize_manifest(m)) == m


@st.composite
def manifests(draw):
    gop_len = draw(st.integers(1, 8))
    n_frames = draw(st.integers(0, 40))
    frames = []
    for i in range(n_frames):
        at_start = i % gop_len == 0
        ftype = "I" if at_start else draw(st.sampled_from(["P", "B"]))
        frames.append(FrameRecord(index=i, frame_type=ftype,
                                  size_bytes=draw(st.integers(1, 5000)),
                                  gop_id=i // gop_len,
                                  payload_seed=draw(st.integers(0, 2**31))))
    return VideoManifest(resolution_label=draw(st.sampled_from(["144p", "720p", "2160p"])),
                         fps=draw(st.integers(1, 60)), gop_length_frames=gop_len,
                         mtu_bytes=draw(st.integers(1, 3000)), frames=tuple(frames))


@given(manifests())
def test_serialize_parse_round_trip(manifest):
    validate_manifest(manifest)
    assert parse_manifest(serialize_manifest(manifest)) == manifest


@given(manifests())
def test_gop_partition(manifest):
    seen = []
    for g in range(manifest.gop_count):
        seen.extend(f.index for f in manifest.gop_members(g))
    assert seen == [f.index for f in manifest.frames]
    sizes = gop_sizes(manifest)
    assert sum(b for _, b in sizes) == sum(f.size_bytes for f in manifest.frames)


def test_gop_sizes_uniform():
    m = parse_manifest(make_manifest_text(90, size=1000))
    assert gop_sizes(m) == [(0, 30000), (1, 30000), (2, 30000)]


def test_gop_sizes_fixture_ordering():
    m = parse_manifest(read_fixture("manifest_720p.txt"))
    sizes = dict(gop_sizes(m))
    assert sizes[2] > sizes[3] > sizes[4]
    m = parse_manifest(read_fixture("manifest_2160p.txt"))
    sizes = dict(gop_sizes(m))
    assert sizes[2] > sizes[3] > sizes[4]


def test_gop_sizes_single_frame():
    m = parse_manifest(make_manifest_text(1, size=777))
    assert gop_sizes(m) == [(0, 777)]


def frame(size):
    return FrameRecord(index=0, frame_type="I", size_bytes=size, gop_id=0, payload_seed=1)


def test_slice_exact_division():
    slices = slice_frame(frame(3000), 1500)
    assert [s.size_bytes for s in slices] == [1500, 1500]


def test_slice_remainder():
    slices = slice_frame(frame(3001), 1500)
    assert [s.size_bytes for s in slices] == [1500, 1500, 1]


def test_slice_sub_mtu():
    slices = slice_frame(frame(100), 1500)
    assert [s.size_bytes for s in slices] == [100]


def test_slice_zero_mtu():
    with pytest.raises(ValueError):
        slice_frame(frame(100), 0)


@given(st.integers(1, 100000), st.integers(1, 4000))
def test_slice_reassembly(size, mtu):
    slices = slice_frame(frame(size), mtu)
    assert sum(s.size_bytes for s in slices) == size
    assert len(slices) == math.ceil(size / mtu)
    assert all(s.size_bytes == mtu for s in slices[:-1])
    assert [s.slice_index for s in slices] == list(range(len(slices)))
