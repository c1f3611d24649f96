import numpy as np
import pytest

from src.disc_family.state import Background, IterationConfig
from src.fields.corpus import seeded_corpus
from src.fields.domains import DiscGrid
from src.fields.grids import TorusGrid
from src.strip_geodesic.geometry import build_strip


@pytest.fixture
def torus8():
    return TorusGrid(8)


@pytest.fixture
def torus16():
    return TorusGrid(16)


@pytest.fixture
def disc():
    return DiscGrid(8, 32)


@pytest.fixture
def flat16(torus16):
    return Background.flat(torus16)


@pytest.fixture
def disc_cfg():
    return IterationConfig(tol=1e-10)


@pytest.fixture
def corpus(torus16):
    return seeded_corpus(torus16, size=4, seed=7)


@pytest.fixture(scope="session")
def strip_geometry():
    return build_strip(6.0, t_points=4, boundary_points=256)


@pytest.fixture
def rng():
    return np.random.default_rng(20180312)


@pytest.fixture
def output_dir(tmp_path):
    return str(tmp_path / "run")
