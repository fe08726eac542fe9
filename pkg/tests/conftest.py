import numpy as np
import pytest

from svprobe import FeatureStack


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_stack(rng, layers=3, frames=16, dim=8, frame_rate=50.0, scale=1.0):
    data = rng.normal(0.0, scale, size=(layers, frames, dim))
    return FeatureStack(data=data, frame_rate=frame_rate)
