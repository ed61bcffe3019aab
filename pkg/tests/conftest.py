import numpy as np
import pytest

from hardyrellich.geometry import (
    AffineSubspace,
    Ball,
    Box,
    Halfspace,
    HPolytope,
    SinglePoint,
    VPolytope,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def standard_bodies():
    """One representative of every variant, used by the invariant sweeps."""
    return {
        "point3": SinglePoint([0.0, 0.0, 0.0]),
        "line3": AffineSubspace([0.0, 0.0, 0.0], [[1.0, 0.0, 0.0]]),
        "halfspace2": Halfspace([1.0, 0.0], 0.0),
        "quadrant": HPolytope([[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]),
        "segment3": VPolytope([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        "ball2": Ball([0.0, 0.0], 1.0),
        "box3": Box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
    }


@pytest.fixture(params=sorted(standard_bodies()))
def body(request):
    return standard_bodies()[request.param]
