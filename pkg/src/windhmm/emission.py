"""Regime-specific circular-linear emission distribution.

Each regime emits a four-tuple (x, k, y, w): true discrete speed y with a
Poisson marginal, the below-2-knots indicator w, and a direction x that is
either the calm marker (a hurdle atom, only possible when y = 0) or a grid
point drawn from the IWP together with its winding number k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .circular import (
    DiscreteCircle,
    IwpParams,
    iwp_augmented_logpmf,
    iwp_sample_indexed,
    poisson_logpmf,
)

#: x code for the calm marker (direction not recorded because the air is still)
X_CALM = -1
#: x code for a non-informative missing direction (instrument malfunction)
X_MISSING = -2
#: y* code for a non-informative missing speed
Y_MISSING = -1

#: recorded speeds below this value are unreliable; w = 1(y* >= threshold)
SPEED_THRESHOLD = 2


@dataclass(frozen=True)
class RegimeParams:
    """One regime's emission parameters: speed rate, IWP law, hurdle weight."""

    lambda_y: float
    iwp: IwpParams
    nu: float

    def __post_init__(self):
        if self.lambda_y < 0:
            raise ValueError(f"lambda_y must be nonnegative, got {self.lambda_y}")
        if not 0.0 <= self.nu <= 1.0:
            raise ValueError(f"nu must lie in [0, 1], got {self.nu}")


def w_success_prob(lambda_y: float) -> float:
    """P(w = 1) = P(y >= 2) = 1 - exp(-lambda)*(1 + lambda)."""
    if lambda_y < 0:
        raise ValueError(f"lambda_y must be nonnegative, got {lambda_y}")
    p = 1.0 - math.exp(-lambda_y) * (1.0 + lambda_y)
    return min(1.0, max(0.0, p))


def _check_yw(y: int, w: int):
    if y < 0:
        raise ValueError(f"y must be nonnegative, got {y}")
    if w != (1 if y >= SPEED_THRESHOLD else 0):
        raise ValueError(f"inconsistent pair: y={y} requires w={int(y >= SPEED_THRESHOLD)}, got w={w}")


def linear_logpmf(y: int, w: int, lambda_y: float) -> float:
    """log P(y | w): truncated Poisson on {2,3,...} when w=1, Bernoulli on {0,1} when w=0.

    The w=0 success probability lambda*e^-lambda / (e^-lambda*(1+lambda))
    simplifies to lambda/(1+lambda).
    """
    _check_yw(y, w)
    if w == 1:
        norm = w_success_prob(lambda_y)
        if norm == 0.0:
            return -np.inf
        return float(poisson_logpmf(y, lambda_y)) - math.log(norm)
    p1 = lambda_y / (1.0 + lambda_y)
    return math.log(p1) if y == 1 else math.log1p(-p1)


def joint_yw_logpmf(y: int, w: int, lambda_y: float) -> float:
    """log P(y, w) = log P(w) + log P(y | w); collapses to log Poisson(y; lambda)."""
    _check_yw(y, w)
    if w == 1:
        pw = w_success_prob(lambda_y)
        if pw == 0.0:
            return -np.inf
        return math.log(pw) + linear_logpmf(y, 1, lambda_y)
    # P(w=0) = e^-lambda * (1+lambda)
    log_pw0 = -lambda_y + math.log1p(lambda_y)
    return log_pw0 + linear_logpmf(y, 0, lambda_y)


def hurdle_prob(y: int, nu: float) -> float:
    """Hurdle weight nu* = nu * 1(y = 0): the calm atom is only open at zero speed."""
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    return nu if y == 0 else 0.0


def obs_loglik(
    x_index: int,
    k,
    y: int,
    w: int,
    psi: RegimeParams,
    circle: DiscreteCircle,
) -> float:
    """Joint log density of one augmented observation (x, k, y, w) under one regime.

    x_index is a grid index or X_CALM; k must be present exactly when x is on
    the grid.  The calm marker with y > 0 is a probability-zero configuration
    and is rejected.
    """
    base = joint_yw_logpmf(y, w, psi.lambda_y)
    nu_star = hurdle_prob(y, psi.nu)
    if x_index == X_CALM:
        if y != 0:
            raise ValueError(f"calm marker requires y=0, got y={y}")
        if k is not None:
            raise ValueError("winding number must be absent for the calm marker")
        return base + (math.log(nu_star) if nu_star > 0.0 else -np.inf)
    if k is None:
        raise ValueError("winding number required for an on-grid direction")
    if nu_star >= 1.0:
        return -np.inf
    circ = iwp_augmented_logpmf(x_index, int(k), psi.iwp, circle)
    return base + math.log1p(-nu_star) + circ


def sample_observation(psi: RegimeParams, circle: DiscreteCircle, rng: np.random.Generator):
    """Forward draw of (x_index, k, y, w); x_index = X_CALM with k = None on the hurdle."""
    y = int(rng.poisson(psi.lambda_y))
    w = 1 if y >= SPEED_THRESHOLD else 0
    if y == 0 and rng.random() < psi.nu:
        return X_CALM, None, y, w
    x_index, k = iwp_sample_indexed(psi.iwp, circle, rng)
    return x_index, k, y, w


def loglik_matrix(
    y: np.ndarray,
    x_index: np.ndarray,
    k: np.ndarray,
    psi_list,
    circle: DiscreteCircle,
) -> np.ndarray:
    """Per-timestep, per-regime observation log likelihood (T x R).

    Vectorized equivalent of obs_loglik over complete augmented cells; w is
    implied by y, and the (y, w) factor enters in its collapsed Poisson form.
    """
    T = y.shape[0]
    R = len(psi_list)
    out = np.empty((T, R))
    calm = x_index == X_CALM
    grid = ~calm
    y0 = y == 0
    lgy = gammaln(y + 1.0)
    xg = x_index[grid]
    kg = k[grid]
    for r, psi in enumerate(psi_list):
        col = np.empty(T)
        lam = psi.lambda_y
        if lam == 0.0:
            col[:] = np.where(y0, 0.0, -np.inf)
        else:
            col[:] = y * math.log(lam) - lam - lgy
        # hurdle atom on calm cells, log(1 - nu*1(y=0)) on grid cells
        col[calm] += math.log(psi.nu) if psi.nu > 0.0 else -np.inf
        col[calm & ~y0] = -np.inf
        col[grid & y0] += math.log1p(-psi.nu) if psi.nu < 1.0 else -np.inf
        iwp = psi.iwp
        m = (iwp.eta * xg - iwp.xi_index) % circle.l + kg * circle.l
        col[grid] += poisson_logpmf(m, iwp.lambda_x)
        out[:, r] = col
    return out
