"""
Bounded functions on the real line at desk scale.

Two representations are provided:

- ``TrigPolynomial``: an exact finite sum ``sum_k c_k exp(i w_k t)`` with
  complex coefficient vectors. Its circular spectrum is known exactly.
- ``GridFunction``: uniform samples on a finite window. It never extrapolates;
  every request for values outside the window fails with
  ``WindowOutOfDomain``.

Both are immutable. ``UnitCircleSet`` holds finite sets of angles on the unit
circle with per-angle detection scores.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from circspec.errors import InvalidInput, NonCommensurateShift, WindowOutOfDomain
from circspec.utils import TWO_PI, circular_distance, wrap_angle

FREQ_TOL = 1e-9
GRID_INDEX_TOL = 1e-6
SHIFT_TOL = 1e-12
EVAL_CHUNK = 65536


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """
    Finite trigonometric polynomial with values in C^dim.

    Attributes:
        dim: State-space dimension
        omegas: Frequencies in radians per unit time, shape (m,), sorted
        coeffs: Complex coefficient vectors, shape (m, dim)
    """

    dim: int
    omegas: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        dim = int(self.dim)
        if dim < 1:
            raise InvalidInput(f"dimension must be positive, got {self.dim}")
        omegas = np.asarray(self.omegas, dtype=float).reshape(-1)
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(len(omegas), dim)
        if not np.all(np.isfinite(omegas)) or not np.all(np.isfinite(coeffs)):
            raise InvalidInput("frequencies and coefficients must be finite")

        order = np.argsort(omegas, kind="stable")
        omegas, coeffs = omegas[order], coeffs[order]

        # Merge frequencies closer than FREQ_TOL by summing coefficients
        if len(omegas) > 1:
            starts = np.concatenate([[True], np.diff(omegas) > FREQ_TOL])
            group = np.cumsum(starts) - 1
            merged = np.zeros((group[-1] + 1, dim), dtype=complex)
            np.add.at(merged, group, coeffs)
            omegas, coeffs = omegas[starts], merged

        keep = np.any(coeffs != 0, axis=1)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "omegas", _readonly(omegas[keep].copy()))
        object.__setattr__(self, "coeffs", _readonly(coeffs[keep].copy()))

    # Constructors

    @classmethod
    def zero(cls, dim: int = 1) -> "TrigPolynomial":
        return cls(dim, np.zeros(0), np.zeros((0, dim)))

    @classmethod
    def constant(cls, value: Union[complex, Sequence[complex]]) -> "TrigPolynomial":
        vec = np.atleast_1d(np.asarray(value, dtype=complex))
        return cls(len(vec), [0.0], vec[None, :])

    @classmethod
    def single(cls, omega: float, coeff: Union[complex, Sequence[complex]]) -> "TrigPolynomial":
        vec = np.atleast_1d(np.asarray(coeff, dtype=complex))
        return cls(len(vec), [float(omega)], vec[None, :])

    @classmethod
    def from_modes(cls, dim: int, modes: Sequence[Tuple[float, Sequence[complex]]]) -> "TrigPolynomial":
        """Build from ``(omega, coeff_vector)`` pairs."""
        if not modes:
            return cls.zero(dim)
        omegas = [float(w) for w, _ in modes]
        coeffs = [np.atleast_1d(np.asarray(c, dtype=complex)) for _, c in modes]
        return cls(dim, omegas, np.vstack(coeffs))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrigPolynomial":
        """
        Parse the JSON form ``{"dim", "modes": [{"omega", "re", "im"}]}``.

        Scalar ``re``/``im`` entries are accepted for one-dimensional
        polynomials (system coefficient entries use that form).
        """
        if not isinstance(data, dict) or "modes" not in data:
            raise InvalidInput("trigonometric polynomial needs a 'modes' list")
        modes = data["modes"] or []
        dim = data.get("dim")
        parsed = []
        for i, mode in enumerate(modes):
            try:
                omega = float(mode["omega"])
                re = np.atleast_1d(np.asarray(mode.get("re", 0.0), dtype=float))
                im = np.atleast_1d(np.asarray(mode.get("im", np.zeros_like(re)), dtype=float))
            except (KeyError, TypeError, ValueError) as e:
                raise InvalidInput(f"mode {i} is malformed: {e}")
            if re.shape != im.shape:
                raise InvalidInput(f"mode {i}: 're' and 'im' lengths differ")
            parsed.append((omega, re + 1j * im))
        if dim is None:
            dim = len(parsed[0][1]) if parsed else 1
        for i, (_, vec) in enumerate(parsed):
            if len(vec) != int(dim):
                raise InvalidInput(f"mode {i} has length {len(vec)}, expected dim={dim}")
        return cls.from_modes(int(dim), parsed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "modes": [
                {"omega": float(w), "re": [float(x) for x in c.real], "im": [float(x) for x in c.imag]}
                for w, c in self.modes()
            ],
        }

    # Basic queries

    def modes(self) -> Iterator[Tuple[float, np.ndarray]]:
        for w, c in zip(self.omegas, self.coeffs):
            yield float(w), c

    @property
    def n_modes(self) -> int:
        return len(self.omegas)

    @property
    def is_zero(self) -> bool:
        return self.n_modes == 0

    def norm_bound(self) -> float:
        """Upper bound ``sum_k ||c_k||`` for the sup norm over the real line."""
        if self.is_zero:
            return 0.0
        return float(np.sum(np.linalg.norm(self.coeffs, axis=1)))

    def __call__(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """
        Evaluate at one time or an array of times.

        Returns:
            Vector of shape (dim,) for scalar ``t``, otherwise (len(t), dim)
        """
        scalar = np.ndim(t) == 0
        times = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((len(times), self.dim), dtype=complex)
        if not self.is_zero:
            for start in range(0, len(times), EVAL_CHUNK):
                chunk = times[start:start + EVAL_CHUNK]
                out[start:start + EVAL_CHUNK] = np.exp(1j * np.outer(chunk, self.omegas)) @ self.coeffs
        return out[0] if scalar else out

    # Algebra

    def _check_dim(self, other: "TrigPolynomial") -> None:
        if not isinstance(other, TrigPolynomial):
            raise InvalidInput(f"cannot combine a trigonometric polynomial with {type(other).__name__}")
        if other.dim != self.dim:
            raise InvalidInput(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        self._check_dim(other)
        return TrigPolynomial(
            self.dim,
            np.concatenate([self.omegas, other.omegas]),
            np.vstack([self.coeffs, other.coeffs]),
        )

    def __neg__(self) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, self.omegas, -self.coeffs)

    def __sub__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "TrigPolynomial":
        if isinstance(scalar, TrigPolynomial):
            return self.product(scalar)
        return TrigPolynomial(self.dim, self.omegas, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def translate(self, tau: float) -> "TrigPolynomial":
        """``S(tau)``: coefficients pick up the phase ``exp(i w_k tau)``."""
        phases = np.exp(1j * self.omegas * float(tau))
        return TrigPolynomial(self.dim, self.omegas, self.coeffs * phases[:, None])

    def apply_matrix(self, matrix: np.ndarray) -> "TrigPolynomial":
        """Pointwise action ``t -> A g(t)`` of a constant matrix."""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        if matrix.shape[1] != self.dim:
            raise InvalidInput(f"matrix of shape {matrix.shape} cannot act on dimension {self.dim}")
        return TrigPolynomial(matrix.shape[0], self.omegas, self.coeffs @ matrix.T)

    def product(
        self,
        other: "TrigPolynomial",
        combine: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
    ) -> "TrigPolynomial":
        """
        Pointwise product, expanded over all pairs of modes.

        Args:
            other: Second factor
            combine: Vectorised bilinear map taking aligned coefficient blocks of
                shapes (K, self.dim) and (K, other.dim) to (K, d_out). Defaults
                to the broadcast elementwise product.

        Returns:
            Trigonometric polynomial with frequencies ``w_j + w_k``
        """
        if combine is None:
            combine = np.multiply
        if self.is_zero or other.is_zero:
            probe = combine(np.zeros((1, self.dim), complex), np.zeros((1, other.dim), complex))
            return TrigPolynomial.zero(probe.shape[1])
        j, k = np.meshgrid(np.arange(self.n_modes), np.arange(other.n_modes), indexing="ij")
        j, k = j.ravel(), k.ravel()
        coeffs = np.asarray(combine(self.coeffs[j], other.coeffs[k]), dtype=complex)
        return TrigPolynomial(coeffs.shape[1], self.omegas[j] + other.omegas[k], coeffs)

    def project(self, freqs: Sequence[float]) -> Tuple["TrigPolynomial", float]:
        """
        Keep only modes whose frequency lies in ``freqs``.

        Returns:
            Tuple of (kept polynomial, sum of norms of the dropped coefficients)
        """
        targets = np.sort(np.asarray(list(freqs), dtype=float))
        if self.is_zero:
            return self, 0.0
        if len(targets) == 0:
            return TrigPolynomial.zero(self.dim), self.norm_bound()
        idx = np.clip(np.searchsorted(targets, self.omegas), 1, len(targets)) - 1
        nearest = np.minimum(
            np.abs(self.omegas - targets[idx]),
            np.abs(self.omegas - targets[np.minimum(idx + 1, len(targets) - 1)]),
        )
        keep = nearest <= FREQ_TOL * max(1.0, float(np.max(np.abs(targets))))
        dropped = float(np.sum(np.linalg.norm(self.coeffs[~keep], axis=1)))
        return TrigPolynomial(self.dim, self.omegas[keep], self.coeffs[keep]), dropped

    def rescaled(self, tau: float) -> "TrigPolynomial":
        """Return ``s -> tau * g(tau s)``, the forcing seen on a unit-period clock."""
        return TrigPolynomial(self.dim, self.omegas * float(tau), self.coeffs * float(tau))

    def sample(self, window: Tuple[float, float], dt: float) -> "GridFunction":
        a, b = float(window[0]), float(window[1])
        n = int(round((b - a) / dt)) + 1
        times = a + dt * np.arange(n)
        return GridFunction(a, dt, self(times))

    def __repr__(self) -> str:
        return f"TrigPolynomial(dim={self.dim}, omegas={np.round(self.omegas, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class GridFunction:
    """
    Uniformly sampled bounded function on ``[t0, t0 + (n-1) dt]``.

    Attributes:
        t0: Window start
        dt: Sample step
        samples: Complex samples, shape (n, dim)
    """

    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        dt = float(self.dt)
        if not dt > 0 or not math.isfinite(dt):
            raise InvalidInput(f"grid step must be positive, got {self.dt}")
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.ndim != 2:
            raise InvalidInput("grid samples must be a sequence of vectors of one dimension")
        if samples.shape[0] < 2:
            raise InvalidInput("a grid function needs at least 2 samples")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "samples", _readonly(samples.copy()))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n - 1) * self.dt

    @property
    def window(self) -> Tuple[float, float]:
        return self.t0, self.t_end

    @property
    def length(self) -> float:
        return (self.n - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    @cached_property
    def _splines(self) -> Tuple[CubicSpline, CubicSpline]:
        times = self.times
        return CubicSpline(times, self.samples.real, axis=0), CubicSpline(times, self.samples.imag, axis=0)

    def covers(self, a: float, b: float) -> bool:
        slack = GRID_INDEX_TOL * self.dt
        return a >= self.t0 - slack and b <= self.t_end + slack

    def values_at(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """
        Values at arbitrary times inside the window.

        On-grid times return the stored samples exactly; off-grid times use a
        cubic spline through the samples.

        Raises:
            WindowOutOfDomain: If any time lies outside the window
        """
        scalar = np.ndim(t) == 0
        times = np.atleast_1d(np.asarray(t, dtype=float))
        k = (times - self.t0) / self.dt
        outside = (k < -GRID_INDEX_TOL) | (k > self.n - 1 + GRID_INDEX_TOL)
        if np.any(outside):
            bad = float(times[np.argmax(outside)])
            raise WindowOutOfDomain(f"t={bad:.6g} outside sampled window [{self.t0:.6g}, {self.t_end:.6g}]")
        nearest = np.clip(np.rint(k).astype(int), 0, self.n - 1)
        on_grid = np.abs(k - nearest) <= GRID_INDEX_TOL
        out = np.empty((len(times), self.dim), dtype=complex)
        out[on_grid] = self.samples[nearest[on_grid]]
        if not np.all(on_grid):
            re, im = self._splines
            off = times[~on_grid]
            out[~on_grid] = re(off) + 1j * im(off)
        return out[0] if scalar else out

    __call__ = values_at

    def shift_steps(self, tau: float) -> int:
        """Number of grid steps in ``tau``; raises if ``tau`` is off the grid."""
        k = float(tau) / self.dt
        k_int = int(round(k))
        if abs(k - k_int) > SHIFT_TOL * max(1.0, abs(k)):
            raise NonCommensurateShift(f"shift {tau} is not a multiple of the grid step {self.dt}")
        return k_int

    def translate(self, tau: float) -> "GridFunction":
        """``S(tau)``: same samples, window moved to ``[t0 - tau, t_end - tau]``."""
        steps = self.shift_steps(tau)
        return GridFunction(self.t0 - steps * self.dt, self.dt, self.samples)

    def restrict(self, a: float, b: float) -> "GridFunction":
        """Samples with times in ``[a, b]`` (at least two are required)."""
        times = self.times
        slack = GRID_INDEX_TOL * self.dt
        mask = (times >= a - slack) & (times <= b + slack)
        idx = np.flatnonzero(mask)
        if len(idx) < 2:
            raise WindowOutOfDomain(f"[{a:.6g}, {b:.6g}] holds fewer than 2 samples")
        return GridFunction(float(times[idx[0]]), self.dt, self.samples[idx[0]:idx[-1] + 1])

    def __repr__(self) -> str:
        return f"GridFunction(window=[{self.t0:.6g}, {self.t_end:.6g}], dt={self.dt:.6g}, dim={self.dim})"


BoundedFunction = Union[TrigPolynomial, GridFunction]


@dataclass(frozen=True)
class UnitCircleSet:
    """
    Finite set of angles on the unit circle.

    Attributes:
        angles: Sorted angles in [0, 2π), consecutive ones at least
            ``angular_resolution`` apart
        scores: Per-angle detection score (fitted blow-up exponent)
        angular_resolution: Metric membership radius
    """

    angles: Tuple[float, ...]
    scores: Tuple[float, ...]
    angular_resolution: float

    @classmethod
    def empty(cls, resolution: float) -> "UnitCircleSet":
        return cls((), (), float(resolution))

    @classmethod
    def from_angles(
        cls,
        angles: Sequence[float],
        resolution: float,
        scores: Optional[Sequence[float]] = None,
    ) -> "UnitCircleSet":
        """
        Normalise angles to [0, 2π) and merge any closer than ``resolution``.

        Each merged cluster keeps the member with the highest score.
        """
        if resolution <= 0:
            raise InvalidInput("angular resolution must be positive")
        raw = np.atleast_1d(wrap_angle(np.asarray(list(angles), dtype=float)))
        if scores is None:
            score_arr = np.ones(len(raw))
        else:
            score_arr = np.asarray(list(scores), dtype=float)
        if len(raw) == 0:
            return cls.empty(resolution)

        order = np.argsort(raw, kind="stable")
        raw, score_arr = raw[order], score_arr[order]
        clusters: List[List[int]] = [[0]]
        for i in range(1, len(raw)):
            if raw[i] - raw[clusters[-1][-1]] < resolution:
                clusters[-1].append(i)
            else:
                clusters.append([i])
        if len(clusters) > 1 and TWO_PI - raw[clusters[-1][-1]] + raw[clusters[0][0]] < resolution:
            clusters[0] = clusters.pop() + clusters[0]

        picked = [max(c, key=lambda i: score_arr[i]) for c in clusters]
        picked.sort(key=lambda i: raw[i])
        return cls(
            tuple(float(raw[i]) for i in picked),
            tuple(float(score_arr[i]) for i in picked),
            float(resolution),
        )

    def __len__(self) -> int:
        return len(self.angles)

    def __iter__(self) -> Iterator[float]:
        return iter(self.angles)

    def contains(self, theta: float, tol: Optional[float] = None) -> bool:
        if not self.angles:
            return False
        tol = self.angular_resolution if tol is None else tol
        return bool(np.min(circular_distance(self.angles, theta)) < tol)

    def hausdorff(self, other: "UnitCircleSet") -> float:
        """Hausdorff distance along the circle (0 for two empty sets)."""
        if not self.angles and not other.angles:
            return 0.0
        if not self.angles or not other.angles:
            return math.inf
        d = circular_distance(np.asarray(self.angles)[:, None], np.asarray(other.angles)[None, :])
        return float(max(d.min(axis=1).max(), d.min(axis=0).max()))

    def excess(self, other: "UnitCircleSet", tol: Optional[float] = None) -> List[float]:
        """Angles of this set not contained in ``other``."""
        tol = max(self.angular_resolution, other.angular_resolution) if tol is None else tol
        return [theta for theta in self.angles if not other.contains(theta, tol)]

    def issubset(self, other: "UnitCircleSet", tol: Optional[float] = None) -> bool:
        return not self.excess(other, tol)

    def points(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.angles, dtype=float))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "angles": list(self.angles),
            "scores": list(self.scores),
            "angular_resolution": self.angular_resolution,
        }


def evaluate(f: BoundedFunction, t: Union[float, np.ndarray]) -> np.ndarray:
    """Value of ``f`` at ``t``."""
    return f(t)


def translate(g: BoundedFunction, tau: float) -> BoundedFunction:
    """Translation ``S(tau) g = g(. + tau)``."""
    return g.translate(tau)


def sup_norm(g: BoundedFunction, window: Tuple[float, float], dt_probe: float = 0.01) -> float:
    """
    Finite-window estimate of ``sup_t ||g(t)||``.

    Trigonometric polynomials are probed on the lattice ``k * dt_probe`` that
    falls inside the window, so the estimate grows monotonically with the
    window. Grid functions use their own samples inside the window.

    Args:
        g: Function to measure
        window: ``(a, b)`` with ``a <= b``
        dt_probe: Probe spacing for trigonometric polynomials

    Returns:
        Largest Euclidean norm over the probes

    Raises:
        WindowOutOfDomain: If a grid window does not cover ``[a, b]``
    """
    a, b = float(window[0]), float(window[1])
    if not a <= b:
        raise InvalidInput(f"empty window [{a}, {b}]")
    if dt_probe <= 0:
        raise InvalidInput("probe spacing must be positive")

    if isinstance(g, GridFunction):
        if not g.covers(a, b):
            raise WindowOutOfDomain(f"[{a:.6g}, {b:.6g}] not inside [{g.t0:.6g}, {g.t_end:.6g}]")
        slack = GRID_INDEX_TOL * g.dt
        times = g.times
        mask = (times >= a - slack) & (times <= b + slack)
        values = g.samples[mask] if np.any(mask) else g.values_at(np.array([a, b]))
        return float(np.max(np.linalg.norm(values, axis=1)))

    if g.is_zero:
        return 0.0
    k_lo, k_hi = math.ceil(a / dt_probe - 1e-12), math.floor(b / dt_probe + 1e-12)
    if k_hi < k_lo:
        probes = np.array([a, b])
    else:
        probes = dt_probe * np.arange(k_lo, k_hi + 1)
    best = 0.0
    for start in range(0, len(probes), EVAL_CHUNK):
        best = max(best, float(np.max(np.linalg.norm(g(probes[start:start + EVAL_CHUNK]), axis=1))))
    return best


def make_levitan(window: Tuple[float, float], dt: float) -> GridFunction:
    """
    Sample ``sin(1 / (2 + cos t + cos(sqrt(2) t)))`` on a window.

    The function is almost automorphic but not uniformly continuous.
    """
    a, b = float(window[0]), float(window[1])
    if not dt > 0:
        raise InvalidInput(f"grid step must be positive, got {dt}")
    if not b > a:
        raise InvalidInput(f"empty window [{a}, {b}]")
    n = int(round((b - a) / dt)) + 1
    t = a + dt * np.arange(n)
    values = np.sin(1.0 / (2.0 + np.cos(t) + np.cos(math.sqrt(2.0) * t)))
    return GridFunction(a, dt, values[:, None].astype(complex))
