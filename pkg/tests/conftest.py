import os

import pytest

from sistream.detection_log import VehicleDescriptor, parse_detection_log
from sistream.video_model import parse_manifest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

TARGET = VehicleDescriptor(vehicle_type="car", vehicle_make="Ford Expedition 2017")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def read_fixture(name: str) -> str:
    with open(fixture_path(name), encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def manifest_720p():
    return parse_manifest(read_fixture("manifest_720p.txt"))


@pytest.fixture(scope="session")
def manifest_2160p():
    return parse_manifest(read_fixture("manifest_2160p.txt"))


@pytest.fixture(scope="session")
def detections_720p():
    return parse_detection_log(read_fixture("detections_720p.csv"))


@pytest.fixture(scope="session")
def detections_2160p():
    return parse_detection_log(read_fixture("detections_2160p.csv"))
