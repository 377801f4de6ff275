import numpy as np
import pytest

from stickysym.geometry import Cluster


@pytest.fixture
def hexagon():
    # built by hand, independent of the package builders: six unit-diameter
    # spheres on a circle of radius 1 (side length 2 sin(pi/6) = 1)
    ang = np.linspace(0.0, 2.0 * np.pi, 6, endpoint=False)
    pos = np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], axis=1)
    return Cluster(pos, np.full(6, 0.5))


@pytest.fixture
def dimer():
    pos = np.array([[0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]])
    return Cluster(pos, np.full(2, 0.5))


@pytest.fixture
def stressed_pocket():
    """Planar K4: a triangle of three equal spheres with a fourth, smaller
    sphere in the central pocket touching all three.  The six contact
    gradients carry a self-stress (rank 5), a genuine rank-deficient input."""
    circum = 1.0 / np.sqrt(3.0)
    ang = np.array([0.5, 0.5 + 2.0 / 3.0, 0.5 + 4.0 / 3.0]) * np.pi
    pos = np.zeros((4, 3))
    pos[:3, 0] = circum * np.cos(ang)
    pos[:3, 1] = circum * np.sin(ang)
    radii = np.array([0.5, 0.5, 0.5, circum - 0.5])
    return Cluster(pos, radii)
