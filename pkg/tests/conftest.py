import numpy as np
import pytest

from diracshell.geometry import generate_sphere


@pytest.fixture(scope="session")
def sphere1():
    return generate_sphere(1.0, 1)


@pytest.fixture(scope="session")
def sphere2():
    return generate_sphere(1.0, 2)


@pytest.fixture(scope="session")
def sphere3():
    return generate_sphere(1.0, 3)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


def sphere_product_quadrature(n_theta=60, n_phi=120, radius=1.0):
    """Gauss x trapezoid tensor rule on the sphere: (points, weights)."""
    tg, wg = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(tg)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2 * np.pi / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    w = (wg[:, None] * wphi * np.ones(n_phi)[None, :]).ravel() * radius**2
    pts = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)],
                   axis=-1).reshape(-1, 3) * radius
    return pts, w
