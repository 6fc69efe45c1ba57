import hypothesis
import pytest

from martpara import Measure, build_lattice

hypothesis.settings.register_profile(
    "default", max_examples=40, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")


@pytest.fixture
def binary_uniform():
    lat = build_lattice(2, 1)
    return lat, Measure(lat, [0.5, 0.5])
