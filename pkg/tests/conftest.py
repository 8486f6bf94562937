import numpy as np
import pytest

from polyfw.geometry import Polytope


def random_polytope(rng, d, extra):
    """Random bounded polytope: a box [-1, 1]^d cut by `extra` random
    halfspaces through points near the origin. m = 2d + extra rows."""
    eye = np.eye(d)
    A = np.vstack([eye, -eye])
    b = np.ones(2 * d)  # the box [-1, 1]^d
    for _ in range(extra):
        a = rng.standard_normal(d)
        a /= np.linalg.norm(a)
        A = np.vstack([A, a])
        b = np.append(b, rng.uniform(0.3, 1.2))
    return Polytope(A, b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
