"""Discrete circle arithmetic and the invariant wrapped Poisson (IWP) distribution.

The discrete circle is the grid D = {2*pi*j/l : j = 0..l-1}.  The IWP is the
law of x = eta * (q * 2*pi/l + xi) mod 2*pi with q Poisson distributed; the
latent winding number k indexes which turn of the line was wrapped onto the
circle, so the joint pmf of (x, k) is a single Poisson term and the marginal
pmf of x is a sum over k that we truncate at a configurable k_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

TWO_PI = 2.0 * math.pi

#: absolute tolerance (radians) for deciding a value sits on the grid
GRID_TOL = 1e-9


class OffGridError(ValueError):
    """An angle does not coincide with any point of the discrete circle."""


class ConfigurationError(ValueError):
    """Parameters violate the configured bounds (e.g. lambda_x > lambda_max)."""


@dataclass(frozen=True)
class DiscreteCircle:
    """Evenly spaced grid of l points on [0, 2*pi)."""

    l: int = 36

    def __post_init__(self):
        if self.l < 2:
            raise ConfigurationError(f"need at least 2 grid points, got l={self.l}")

    @property
    def step(self) -> float:
        return TWO_PI / self.l

    def angles(self) -> np.ndarray:
        """All grid values, index j at 2*pi*j/l."""
        return np.arange(self.l) * self.step


def grid_index(angle: float, circle: DiscreteCircle) -> int:
    """Map an angle (radians) to its grid index, reducing mod 2*pi first.

    Raises OffGridError when the reduced angle is farther than GRID_TOL from
    every grid point.
    """
    reduced = angle % TWO_PI
    j = int(round(reduced / circle.step)) % circle.l
    # compare on the circle: j*step and reduced may sit on opposite sides of 2*pi
    diff = abs(reduced - j * circle.step)
    diff = min(diff, TWO_PI - diff)
    if diff > GRID_TOL:
        raise OffGridError(
            f"angle {angle!r} is not on the {circle.l}-point grid "
            f"(off by {diff:.3e} rad)"
        )
    return j


def compute_k_max(lambda_max: float, circle: DiscreteCircle) -> int:
    """Winding-number truncation bound for rates up to lambda_max.

    ceil(3*sqrt(lambda_max)/l + lambda_max/l - 1/2); the truncated support
    then covers the unwrapped Poisson up to roughly its mean plus five
    standard deviations.
    """
    if lambda_max <= 0:
        raise ConfigurationError(f"lambda_max must be positive, got {lambda_max}")
    l = circle.l
    return max(0, math.ceil(3.0 * math.sqrt(lambda_max) / l + lambda_max / l - 0.5))


@dataclass(frozen=True)
class WindingConfig:
    """Truncation setup: rate bound lambda_max and derived winding bound k_max."""

    lambda_max: float = 500.0
    k_max: int = -1  # derived from lambda_max when left at -1
    circle: DiscreteCircle = field(default_factory=DiscreteCircle)

    def __post_init__(self):
        if self.k_max < 0:
            object.__setattr__(self, "k_max", compute_k_max(self.lambda_max, self.circle))

    @property
    def m_max(self) -> int:
        """Largest unwrapped index covered by the truncation."""
        return (self.k_max + 1) * self.circle.l - 1


@dataclass(frozen=True)
class IwpParams:
    """IWP parameters: Poisson rate lambda_x, orientation eta, offset index xi_index."""

    lambda_x: float
    eta: int = 1
    xi_index: int = 0

    def __post_init__(self):
        if self.lambda_x < 0:
            raise ConfigurationError(f"lambda_x must be nonnegative, got {self.lambda_x}")
        if self.eta not in (-1, 1):
            raise ConfigurationError(f"eta must be -1 or +1, got {self.eta}")

    @classmethod
    def from_angle(cls, lambda_x: float, eta: int, xi: float, circle: DiscreteCircle) -> "IwpParams":
        """Build params with the offset given as an angle on the grid."""
        return cls(lambda_x, eta, grid_index(xi, circle))

    def xi(self, circle: DiscreteCircle) -> float:
        return self.xi_index * circle.step


def poisson_logpmf(m, lam: float):
    """log Poisson(m; lam) for integer m >= 0, with the lam == 0 point mass."""
    m = np.asarray(m)
    if lam == 0.0:
        return np.where(m == 0, 0.0, -np.inf)
    return m * math.log(lam) - lam - gammaln(m + 1.0)


def unwrapped_index(x_index: int, k: int, params: IwpParams, circle: DiscreteCircle) -> int:
    """Unwrapped Poisson index m for grid point x and winding number k.

    m = ((eta*x - xi) mod 2*pi) * l/(2*pi) + k*l, evaluated exactly in
    integer index arithmetic.
    """
    if k < 0:
        raise ValueError(f"winding number must be nonnegative, got {k}")
    base = (params.eta * x_index - params.xi_index) % circle.l
    return base + k * circle.l


def _base_indices(params: IwpParams, circle: DiscreteCircle) -> np.ndarray:
    """base[j] = ((eta*j - xi) mod l) for every grid index j."""
    j = np.arange(circle.l)
    return (params.eta * j - params.xi_index) % circle.l


def _check_rate(params: IwpParams, cfg: WindingConfig):
    if params.lambda_x > cfg.lambda_max:
        raise ConfigurationError(
            f"lambda_x={params.lambda_x} exceeds configured lambda_max={cfg.lambda_max}"
        )


def iwp_logpmf_grid(params: IwpParams, cfg: WindingConfig) -> np.ndarray:
    """log pmf over the whole grid (length l), truncated at cfg.k_max."""
    _check_rate(params, cfg)
    circle = cfg.circle
    base = _base_indices(params, circle)  # (l,)
    ks = np.arange(cfg.k_max + 1)
    m = base[:, None] + ks[None, :] * circle.l  # (l, k_max+1)
    return logsumexp(poisson_logpmf(m, params.lambda_x), axis=1)


def iwp_pmf_grid(params: IwpParams, cfg: WindingConfig) -> np.ndarray:
    """pmf over the whole grid (length l)."""
    return np.exp(iwp_logpmf_grid(params, cfg))


def iwp_pmf(x_index: int, params: IwpParams, cfg: WindingConfig) -> float:
    """Marginal pmf of the IWP at one grid point (sum over k = 0..k_max)."""
    _check_rate(params, cfg)
    circle = cfg.circle
    ks = np.arange(cfg.k_max + 1)
    m = unwrapped_index(x_index, 0, params, circle) + ks * circle.l
    return float(np.exp(logsumexp(poisson_logpmf(m, params.lambda_x))))


def iwp_augmented_logpmf(x_index: int, k: int, params: IwpParams, circle: DiscreteCircle) -> float:
    """Joint log pmf of (x, k): a single Poisson term, no infinite sum."""
    m = unwrapped_index(x_index, k, params, circle)
    return float(poisson_logpmf(m, params.lambda_x))


def iwp_mean(params: IwpParams, circle: DiscreteCircle) -> float:
    """Directional mean: (eta*xi + lambda_x * sin(eta*2*pi/l)) mod 2*pi."""
    xi = params.xi(circle)
    return (params.eta * xi + params.lambda_x * math.sin(params.eta * circle.step)) % TWO_PI


def iwp_concentration(params: IwpParams, circle: DiscreteCircle) -> float:
    """Directional concentration: exp(-lambda_x * (1 - cos(2*pi/l)))."""
    return math.exp(-params.lambda_x * (1.0 - math.cos(circle.step)))


def iwp_sample_indexed(params: IwpParams, circle: DiscreteCircle, rng: np.random.Generator):
    """Draw (grid index, winding number) from the augmented IWP."""
    q = int(rng.poisson(params.lambda_x))
    x_index = (params.eta * (q + params.xi_index)) % circle.l
    return x_index, q // circle.l


def iwp_sample(params: IwpParams, circle: DiscreteCircle, rng: np.random.Generator) -> float:
    """Draw one grid point (radians) from the IWP."""
    x_index, _ = iwp_sample_indexed(params, circle, rng)
    return x_index * circle.step


def iwp_sample_indexed_many(
    params: IwpParams, circle: DiscreteCircle, rng: np.random.Generator, size: int
):
    """Vectorized draw of (grid indices, winding numbers)."""
    q = rng.poisson(params.lambda_x, size=size)
    x_index = (params.eta * (q + params.xi_index)) % circle.l
    return x_index, q // circle.l
