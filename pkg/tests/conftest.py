import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from symphonic import charts, geometry as geo
from symphonic import expr as ex


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def sphere2():
    return charts.sphere_chart(2)


@pytest.fixture
def torus2():
    return charts.torus_chart(2)


@pytest.fixture
def annulus():
    return charts.annulus_chart()


@pytest.fixture
def curved_target():
    """A curved, everywhere-SPD metric on the plane with 2pi-periodic
    coefficients (so period-respecting torus maps stay consistent)."""
    cc = ["y1", "y2"]
    return geo.ManifoldModel(
        "curved-plane", cc,
        [[ex.parse("1 + 0.3*sin(y1)*cos(y2)", cc),
          ex.parse("0.1*sin(y1 + y2)", cc)],
         [ex.parse("0.1*sin(y1 + y2)", cc),
          ex.parse("1 + 0.2*cos(y2)", cc)]],
        [(None, None), (None, None)])
