import numpy as np
import pytest

from tracelab import periodic


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture(scope="session")
def period2_s0():
    """The symmetric period-two orbit on the Cayley cubic."""
    p = periodic.period_two_point_at_level(0.0)
    return periodic.find_periodic(0.0, 2, p)


@pytest.fixture(scope="session")
def p1_orbit():
    """The fixed corner (1, 1, 1) as a period-one orbit at V = 0."""
    return periodic.find_periodic(0.0, 1, [0.9, 0.9, 0.9])


def finite_difference_jacobian(f, p, h=1e-6):
    """Central-difference Jacobian oracle."""
    p = np.asarray(p, dtype=float)
    out = np.empty((len(f(p)), len(p)))
    for j in range(len(p)):
        e = np.zeros(len(p))
        e[j] = h
        out[:, j] = (np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2 * h)
    return out
