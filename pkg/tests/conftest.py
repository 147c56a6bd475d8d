import numpy as np
import pytest

from geoconvex import charts
from geoconvex.surfaces import LevelSetHypersurface


@pytest.fixture(scope="session")
def euclid3():
    return charts.euclidean_chart(3)


@pytest.fixture(scope="session")
def euclid2():
    return charts.euclidean_chart(2)


@pytest.fixture(scope="session")
def mink4():
    return charts.minkowski_chart(4)


@pytest.fixture(scope="session")
def mink3():
    return charts.minkowski_chart(3)


@pytest.fixture(scope="session")
def polar():
    return charts.polar_euclidean_chart()


@pytest.fixture(scope="session")
def schwarzschild():
    return charts.schwarzschild_chart(1.0)


@pytest.fixture(scope="session")
def sphere_surface():
    return LevelSetHypersurface(
        phi=lambda p: 1.0 - (p[0] ** 2 + p[1] ** 2 + p[2] ** 2), name="unit-sphere"
    )


@pytest.fixture(scope="session")
def plane_surface():
    return LevelSetHypersurface(phi=lambda p: p[2], name="z-plane")


def cartesian_from_polar(x):
    r, theta = x
    return np.array([r * np.cos(theta), r * np.sin(theta)])


def polar_from_cartesian(x, y):
    return np.array([np.hypot(x, y), np.arctan2(y, x)])
