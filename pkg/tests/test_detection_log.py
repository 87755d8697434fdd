import logging

import pytest
from hypothesis import given, strategies as st

from sistream.detection_log import (DetectionRecord, VehicleDescriptor, normalize_label,
                                    parse_detection_log, target_probability_series,
                                    track_unique_objects)
from sistream.errors import ParseError, ValidationError

HEADER = "frame_index,vehicle_type,vehicle_make,probability"


def test_empty_log():
    assert parse_detection_log("") == []
    assert parse_detection_log("# only a comment\n\n") == []
    assert parse_detection_log(HEADER + "\n") == []


def test_single_row():
    records = parse_detection_log(HEADER + "\n50, car, Ford Expedition 2017, 0.8\n")
    assert records == [DetectionRecord(frame_index=50, vehicle_type="car",
                                       vehicle_make="Ford Expedition 2017",
                                       probability=0.8)]


def test_probability_out_of_range():
    with pytest.raises(ValidationError, match="probability"):
        parse_detection_log(HEADER + "\n1,car,Ford Expedition 2017,1.3\n")


def test_duplicate_key_rejected():
    text = HEADER + "\n5,car,Ford Expedition 2017,0.8\n5,CAR,ford  expedition 2017,0.7\n"
    with pytest.raises(ValidationError, match="duplicate"):
        parse_detection_log(text)


def test_bbox_id_distinguishes_same_frame_detections():
    text = (HEADER + ",bbox_id\n"
            "5,car,Ford Expedition 2017,0.8,0\n"
            "5,car,Ford Expedition 2017,0.7,1\n")
    records = parse_detection_log(text)
    assert [r.bbox_id for r in records] == [0, 1]


def test_bad_header_rejected():
    with pytest.raises(ParseError, match="unexpected columns"):
        parse_detection_log("frame,type,make,prob\n1,car,X,0.5\n")


def test_normalize_label():
    assert normalize_label("  Ford   Expedition  2017 ") == "ford expedition 2017"


def rec(frame, prob=0.5, vtype="car", make="Ford Expedition 2017", bbox=None):
    return DetectionRecord(frame_index=frame, vehicle_type=vtype, vehicle_make=make,
                           probability=prob, bbox_id=bbox)


def test_consecutive_frames_merge_into_one_track():
    tracks = track_unique_objects([rec(10), rec(11), rec(12)], gap_tolerance=1)
    assert len(tracks) == 1
    assert tracks[0].frame_span == frozenset({10, 11, 12})


def test_large_gap_starts_new_track():
    tracks = track_unique_objects([rec(10), rec(100)], gap_tolerance=1)
    assert len(tracks) == 2


def test_fixture_has_13_unique_vehicles(detections_720p):
    tracks = track_unique_objects(detections_720p, gap_tolerance=1)
    identities = {(normalize_label(t.vehicle_type), normalize_label(t.vehicle_make))
                  for t in tracks}
    assert len(tracks) == 13
    assert len(identities) == 13


def test_2160p_false_positive_run_is_a_separate_track(detections_2160p):
    tracks = track_unique_objects(detections_2160p, gap_tolerance=1)
    identities = {(normalize_label(t.vehicle_type), normalize_label(t.vehicle_make))
                  for t in tracks}
    assert len(identities) == 13
    assert len(tracks) == 14  # the late low-probability run restarts the target's track


def test_same_frame_same_identity_collapses_to_max():
    tracks = track_unique_objects([rec(5, 0.3, bbox=0), rec(5, 0.9, bbox=1)])
    assert len(tracks) == 1
    assert tracks[0].per_frame_prob == {5: 0.9}


def test_series_single_detection():
    tracks = track_unique_objects([rec(50, 0.8)])
    descriptor = VehicleDescriptor(vehicle_type="car", vehicle_make="Ford Expedition 2017")
    series = target_probability_series(tracks, descriptor, 90)
    assert len(series) == 90
    assert series[50] == 0.8
    assert sum(series) == 0.8


def test_series_wildcard_takes_max():
    tracks = track_unique_objects([rec(7, 0.3, make="A"), rec(7, 0.6, make="B")])
    series = target_probability_series(tracks, VehicleDescriptor(vehicle_type="car"), 10)
    assert series[7] == 0.6


def test_series_no_match_is_zero_with_warning(caplog):
    tracks = track_unique_objects([rec(3, 0.9)])
    descriptor = VehicleDescriptor(vehicle_make="DeLorean DMC-12")
    with caplog.at_level(logging.WARNING):
        series = target_probability_series(tracks, descriptor, 5)
    assert series == [0.0] * 5
    assert any("matched no track" in m for m in caplog.messages)


def test_series_frame_count_too_small():
    tracks = track_unique_objects([rec(50, 0.8)])
    with pytest.raises(ValueError, match="frame_count"):
        target_probability_series(tracks, VehicleDescriptor(vehicle_type="car"), 50)


def test_descriptor_needs_one_concrete_field():
    with pytest.raises(ValueError):
        VehicleDescriptor()


def test_descriptor_matching_is_normalized():
    d = VehicleDescriptor(vehicle_type="Car", vehicle_make="ford  EXPEDITION 2017")
    assert d.matches("car", "Ford Expedition 2017")
    assert not d.matches("truck", "Ford Expedition 2017")


records_strategy = st.lists(
    st.builds(rec,
              frame=st.integers(0, 60),
              prob=st.floats(0, 1, allow_nan=False),
              vtype=st.sampled_from(["car", "truck"]),
              make=st.sampled_from(["A", "B", "C"]),
              bbox=st.one_of(st.none(), st.integers(0, 3))),
    max_size=60, unique_by=lambda r: (r.frame_index, r.vehicle_type, r.vehicle_make, r.bbox_id))


@given(records_strategy, st.integers(0, 5))
def test_track_partition(records, gap_tolerance):
    tracks = track_unique_objects(records, gap_tolerance)
    by_identity = {}
    for r in records:
        ident = (normalize_label(r.vehicle_type), normalize_label(r.vehicle_make))
        frame_map = by_identity.setdefault(ident, {})
        frame_map[r.frame_index] = max(frame_map.get(r.frame_index, 0.0), r.probability)
    rebuilt = {}
    for t in tracks:
        ident = (normalize_label(t.vehicle_type), normalize_label(t.vehicle_make))
        merged = rebuilt.setdefault(ident, {})
        assert not set(merged) & set(t.per_frame_prob)  # spans are disjoint per identity
        merged.update(t.per_frame_prob)
    assert rebuilt == by_identity


@given(records_strategy, st.integers(0, 4))
def test_gap_monotonicity(records, gap_tolerance):
    looser = track_unique_objects(records, gap_tolerance + 1)
    tighter = track_unique_objects(records, gap_tolerance)
    assert len(looser) <= len(tighter)


@given(records_strategy)
def test_series_bounds(records):
    tracks = track_unique_objects(records)
    series = target_probability_series(tracks, VehicleDescriptor(vehicle_type="car"), 61)
    assert all(0.0 <= p <= 1.0 for p in series)
