"""
Built-in test objects.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Tuple, Union

from circspec.errors import InvalidInput, UnknownCorpusName
from circspec.funcspace import GridFunction, TrigPolynomial, make_levitan
from circspec.process import PeriodicSystem, constant_system, general_system, heat_system
from circspec.utils import TWO_PI

CorpusObject = Union[GridFunction, TrigPolynomial, PeriodicSystem]


@dataclass
class CorpusEntry:
    """A generated corpus object together with the parameters it was built from."""

    name: str
    kind: str
    obj: CorpusObject
    params: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        """Document form of trigonometric polynomials and systems."""
        if isinstance(self.obj, GridFunction):
            raise InvalidInput(f"corpus object '{self.name}' is a grid function; write it as a series")
        return self.obj.to_dict()


def _window(params: Dict[str, Any], default: Tuple[float, float]) -> Tuple[float, float]:
    window = params.get("window", default)
    if len(window) != 2:
        raise InvalidInput("window must be [a, b]")
    return float(window[0]), float(window[1])


def levitan(params: Dict[str, Any]) -> CorpusEntry:
    """``sin(1 / (2 + cos t + cos sqrt(2) t))`` sampled on a window."""
    window = _window(params, (0.0, 200.0))
    dt = float(params.get("dt", 0.01))
    return CorpusEntry("levitan", "grid", make_levitan(window, dt), {"window": list(window), "dt": dt})


def ap_demo(params: Dict[str, Any]) -> CorpusEntry:
    """Almost periodic scalar ``e^{it} + 0.5 e^{i sqrt(2) t} + 0.25 e^{2πit}``."""
    poly = TrigPolynomial.from_modes(1, [(1.0, [1.0]), (math.sqrt(2.0), [0.5]), (TWO_PI, [0.25])])
    return CorpusEntry("ap_demo", "trig", poly, {})


def heat_demo(params: Dict[str, Any]) -> CorpusEntry:
    """
    Heat equation on ``(0, π)`` with drift ``amplitude * sin(2πt)`` and ``b = 1``.
    """
    n_modes = int(params.get("modes", params.get("n_modes", 4)))
    if n_modes < 1:
        raise InvalidInput("heat_demo needs at least one mode")
    amplitude = float(params.get("amplitude", 0.5))
    drift = TrigPolynomial.from_modes(1, [(TWO_PI, [-0.5j * amplitude]), (-TWO_PI, [0.5j * amplitude])])
    system = heat_system(n_modes, drift, TrigPolynomial.constant(1.0))
    return CorpusEntry("heat_demo", "system", system, {"modes": n_modes, "amplitude": amplitude})


def hill_demo(params: Dict[str, Any]) -> CorpusEntry:
    """
    ``x'' + gamma x' + (alpha + beta cos 2πt) x = 0`` in first-order form.
    """
    alpha = float(params.get("alpha", 1.0))
    beta = float(params.get("beta", 0.5))
    gamma = float(params.get("gamma", 0.5))
    entries = {
        (0, 1): TrigPolynomial.constant(1.0),
        (1, 0): TrigPolynomial.from_modes(1, [(0.0, [-alpha]), (TWO_PI, [-beta / 2]), (-TWO_PI, [-beta / 2])]),
        (1, 1): TrigPolynomial.constant(-gamma),
    }
    system = general_system(2, entries)
    return CorpusEntry("hill_demo", "system", system, {"alpha": alpha, "beta": beta, "gamma": gamma})


def resonant_demo(params: Dict[str, Any]) -> CorpusEntry:
    """Scalar ``x' = 0``: every forcing with a frequency in 2πZ is resonant."""
    return CorpusEntry("resonant_demo", "system", constant_system([[0.0]]), {})


CORPUS: Dict[str, Callable[[Dict[str, Any]], CorpusEntry]] = {
    "levitan": levitan,
    "ap_demo": ap_demo,
    "heat_demo": heat_demo,
    "hill_demo": hill_demo,
    "resonant_demo": resonant_demo,
}


def build(name: str, params: Dict[str, Any] = None) -> CorpusEntry:
    """
    Build a named corpus object.

    Raises:
        UnknownCorpusName: If ``name`` is not in the corpus
    """
    if name not in CORPUS:
        raise UnknownCorpusName(f"unknown corpus object '{name}' (available: {', '.join(sorted(CORPUS))})")
    return CORPUS[name](dict(params or {}))
