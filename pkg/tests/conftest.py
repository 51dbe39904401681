"""
Shared fixtures: canonical periodic systems with closed-form oracles.
"""

import math

import numpy as np
import pytest

from circspec.funcspace import TrigPolynomial
from circspec.process import constant_system, general_system, heat_system
from circspec.utils import TWO_PI


@pytest.fixture
def decay():
    """Scalar ``x' = -x``."""
    return constant_system([[-1.0]])


@pytest.fixture
def zero_system():
    """Scalar ``x' = 0``; every multiplier equals 1."""
    return constant_system([[0.0]])


@pytest.fixture
def rotation():
    """Planar rotation with multipliers ``e^{+-i}``."""
    return constant_system([[0.0, -1.0], [1.0, 0.0]])


@pytest.fixture
def drift():
    """``a(t) = 0.5 sin(2πt)``."""
    return TrigPolynomial.from_modes(1, [(TWO_PI, [-0.25j]), (-TWO_PI, [0.25j])])


@pytest.fixture
def heat(drift):
    """Four-mode heat system with drift ``0.5 sin(2πt)`` and ``b = 1``."""
    return heat_system(4, drift, TrigPolynomial.constant(1.0))


@pytest.fixture
def hill():
    """Damped Hill oscillator ``x'' + 0.5 x' + (1 + 0.5 cos 2πt) x = 0`` in first-order form."""
    entries = {
        (0, 1): TrigPolynomial.constant(1.0),
        (1, 0): TrigPolynomial.from_modes(1, [(0.0, [-1.0]), (TWO_PI, [-0.25]), (-TWO_PI, [-0.25])]),
        (1, 1): TrigPolynomial.constant(-0.5),
    }
    return general_system(2, entries)


@pytest.fixture
def hill_forcing():
    return TrigPolynomial.from_modes(
        2,
        [(1.0, [0.0, 1.0]), (3.0, [0.0, 0.5j]), (math.sqrt(2.0), [0.0, 0.25])],
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)
