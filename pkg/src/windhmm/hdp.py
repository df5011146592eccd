"""Sticky HDP-HMM machinery: stick weights, sticky Dirichlet rows, beam slices,
forward-filter backward-sampling, and the auxiliary-count updates for the
global weights and concentration hyperparameters.

States carry a represented block plus an explicit remainder: ``beta`` has
length R+1 (remainder last) and each transition row has length R+1 (tail
transition mass last).  The initial state z_0 is pinned to the first
represented state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegeneracyError(RuntimeError):
    """The beam extension failed to shrink the tail mass below the slice bound."""


class SliceInconsistencyError(RuntimeError):
    """A forward-filtering step had no admissible state; indicates a bug."""


#: hard cap on stick breaks per extension call
MAX_EXTENSIONS = 10_000


@dataclass
class HdpPriors:
    """Gamma(shape, rate) hyperpriors for the two DP precisions; rho is uniform."""

    a_gamma: float = 1.0
    b_gamma: float = 0.1
    a_tau: float = 1.0
    b_tau: float = 0.1


@dataclass
class HdpState:
    """Represented-block view of the sticky HDP transition structure.

    beta: (R+1,) global weights, remainder mass last.
    pi:   (R, R+1) transition rows, tail mass last.
    """

    beta: np.ndarray
    pi: np.ndarray
    rho: float
    gamma: float
    tau: float

    @property
    def R(self) -> int:
        return self.beta.shape[0] - 1


@dataclass
class TransitionCounts:
    """Transition counts plus the auxiliary table/override counts built from them.

    n: (R, R) transition counts from the label path (z_0 = state 0 included).
    m: (R, R) table counts; w: (R,) sticky override counts; mbar = m - diag(w).
    """

    n: np.ndarray
    m: np.ndarray
    w: np.ndarray
    mbar: np.ndarray


def _dirichlet(alpha: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Dirichlet draw tolerating zero concentrations (exact zeros in the draw).

    When every gamma variate underflows to zero the draw degenerates to a
    point mass on one coordinate chosen proportionally to alpha.
    """
    g = rng.gamma(np.maximum(alpha, 0.0))
    s = g.sum()
    if s > 0.0:
        return g / s
    total = alpha.sum()
    if total <= 0.0:
        raise ValueError("Dirichlet draw with all-zero concentration")
    out = np.zeros_like(alpha)
    out[np.searchsorted(np.cumsum(alpha), rng.random() * total)] = 1.0
    return out


def _beta_frac(a: float, b: float, rng: np.random.Generator) -> float:
    """Beta(a, b) draw robust to tiny shapes (falls back to the point-mass limit)."""
    g1 = rng.gamma(a) if a > 0.0 else 0.0
    g2 = rng.gamma(b) if b > 0.0 else 0.0
    s = g1 + g2
    if s > 0.0:
        return g1 / s
    if a + b <= 0.0:
        raise ValueError("Beta draw with both shapes zero")
    return 1.0 if rng.random() * (a + b) < a else 0.0


def stick_break(beta_star) -> tuple[np.ndarray, float]:
    """Stick-breaking map: beta_r = beta*_r * prod_{j<r}(1 - beta*_j).

    Returns the weights and the explicitly tracked remainder mass.
    """
    beta_star = np.asarray(beta_star, dtype=float)
    if np.any((beta_star <= 0) | (beta_star >= 1)):
        raise ValueError("stick fractions must lie strictly inside (0, 1)")
    stub = np.concatenate(([1.0], np.cumprod(1.0 - beta_star)))
    return beta_star * stub[:-1], float(stub[-1])


def _row_concentration(r: int, beta: np.ndarray, rho: float, gamma: float) -> np.ndarray:
    """Dirichlet concentration of row r: gamma*((1-rho)*beta_j + rho*1(r=j)), tail last."""
    alpha = gamma * (1.0 - rho) * beta
    alpha[r] += gamma * rho
    return alpha


def sample_pi_row(
    r: int,
    beta: np.ndarray,
    rho: float,
    gamma: float,
    rng: np.random.Generator,
    counts: np.ndarray | None = None,
) -> np.ndarray:
    """Draw one transition row (length R+1, tail mass last).

    With counts (length R) the draw is the posterior row given the observed
    transitions out of r; without counts it is the sticky prior row.
    """
    alpha = _row_concentration(r, beta.copy(), rho, gamma)
    if counts is not None:
        alpha[:-1] += counts
    return _dirichlet(alpha, rng)


def beam_slice(z: np.ndarray, pi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Slice thresholds u_t ~ U(0, pi[z_{t-1}, z_t]), with z_0 = state 0."""
    prev = np.concatenate(([0], z[:-1]))
    return pi[prev, z] * rng.random(z.shape[0])


def extend_representation(
    state: HdpState,
    u_min: float,
    rng: np.random.Generator,
    draw_psi=None,
) -> list:
    """Instantiate states from the remainder until every row's tail mass < u_min.

    Breaks the global stick, splits each existing row's tail with the Dirichlet
    decimation property, and draws a fresh full row (and, through draw_psi, a
    fresh emission parameter set) for each new state.  Returns the list of
    draw_psi results, in instantiation order.
    """
    if u_min <= 0.0:
        raise ValueError("slice bound must be positive")
    new_psis = []
    n_ext = 0
    while state.pi.shape[0] == 0 or state.pi[:, -1].max() >= u_min:
        n_ext += 1
        if n_ext > MAX_EXTENSIONS:
            raise DegeneracyError(
                f"tail mass not below {u_min!r} after {MAX_EXTENSIONS} stick breaks"
            )
        beta_rem = state.beta[-1]
        b_star = _beta_frac(1.0, state.tau, rng)
        beta_new = beta_rem * b_star
        beta_rem_new = beta_rem * (1.0 - b_star)
        state.beta = np.concatenate((state.beta[:-1], [beta_new, beta_rem_new]))
        R = state.R
        scale = state.gamma * (1.0 - state.rho)
        # split existing tails between the new state and the new remainder
        grown = np.empty((state.pi.shape[0], R + 1))
        grown[:, : R - 1] = state.pi[:, :-1]
        for r in range(state.pi.shape[0]):
            frac = _beta_frac(scale * beta_new, scale * beta_rem_new, rng)
            tail = state.pi[r, -1]
            grown[r, R - 1] = tail * frac
            grown[r, R] = tail * (1.0 - frac)
        # the new state gets a full row of its own, sticky on itself
        new_row = sample_pi_row(R - 1, state.beta, state.rho, state.gamma, rng)
        state.pi = np.vstack((grown, new_row))
        if draw_psi is not None:
            new_psis.append(draw_psi(rng))
    return new_psis


def _categorical(p: np.ndarray, u: float) -> int:
    c = np.cumsum(p)
    return int(np.searchsorted(c, u * c[-1], side="right"))


def ffbs_states(
    loglik: np.ndarray,
    pi: np.ndarray,
    u: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Exact conditional draw of the label path under the slice restriction.

    A transition r -> j at time t is admissible iff pi[r, j] > u_t; the slice
    makes all admissible transitions equally weighted.  The forward pass is
    normalized per step; backward sampling is categorical.
    """
    T, R = loglik.shape
    pi_block = pi[:, :R]
    adm = pi_block[None, :, :] > u[:, None, None]  # (T, R, R)
    # per-row normalized likelihoods; rows that are all -inf stay all zero
    row_max = loglik.max(axis=1, keepdims=True)
    lik = np.exp(loglik - np.where(np.isfinite(row_max), row_max, 0.0))
    alpha = np.empty((T, R))
    f = adm[0, 0, :] * lik[0]
    s = f.sum()
    if s <= 0.0:
        raise SliceInconsistencyError("no admissible state at t=0")
    alpha[0] = f / s
    for t in range(1, T):
        f = (alpha[t - 1] @ adm[t]) * lik[t]
        s = f.sum()
        if s <= 0.0:
            raise SliceInconsistencyError(f"no admissible state at t={t}")
        alpha[t] = f / s
    z = np.empty(T, dtype=np.int64)
    us = rng.random(T)
    z[T - 1] = _categorical(alpha[T - 1], us[T - 1])
    for t in range(T - 2, -1, -1):
        p = alpha[t] * adm[t + 1, :, z[t + 1]]
        if p.sum() <= 0.0:
            raise SliceInconsistencyError(f"no admissible predecessor at t={t}")
        z[t] = _categorical(p, us[t])
    return z


def count_transitions(z: np.ndarray, R: int) -> np.ndarray:
    """Transition count matrix n_rj from the path, including z_0 = 0 -> z_1."""
    prev = np.concatenate(([0], z[:-1]))
    n = np.zeros((R, R), dtype=np.int64)
    np.add.at(n, (prev, z), 1)
    return n


def _crt_count(n: int, conc: float, rng: np.random.Generator) -> int:
    """Chinese-restaurant table count for n customers at concentration conc."""
    if n == 0 or conc <= 0.0:
        return 0
    i = np.arange(n)
    return int((rng.random(n) * (conc + i) < conc).sum())


def sample_aux_counts(
    n: np.ndarray,
    beta: np.ndarray,
    rho: float,
    gamma: float,
    rng: np.random.Generator,
) -> TransitionCounts:
    """Sample table counts m, sticky override counts w, and corrected counts mbar."""
    R = n.shape[0]
    m = np.zeros((R, R), dtype=np.int64)
    for r in range(R):
        for j in range(R):
            conc = gamma * ((1.0 - rho) * beta[j] + (rho if r == j else 0.0))
            m[r, j] = _crt_count(int(n[r, j]), conc, rng)
    w = np.zeros(R, dtype=np.int64)
    for j in range(R):
        if m[j, j] > 0:
            denom = rho + (1.0 - rho) * beta[j]
            p = rho / denom if denom > 0.0 else 1.0
            w[j] = rng.binomial(m[j, j], p)
    mbar = m.copy()
    np.fill_diagonal(mbar, np.diag(m) - w)
    return TransitionCounts(n=n, m=m, w=w, mbar=mbar)


def resample_beta(counts: TransitionCounts, tau: float, rng: np.random.Generator) -> np.ndarray:
    """beta | mbar, tau ~ Dirichlet(mbar_.1, ..., mbar_.R, tau), remainder last."""
    alpha = np.concatenate((counts.mbar.sum(axis=0).astype(float), [tau]))
    return _dirichlet(alpha, rng)


def _concentration_gibbs(
    current: float,
    a: float,
    b: float,
    customers: np.ndarray,
    total_tables: int,
    rng: np.random.Generator,
) -> float:
    """Escobar-West style update of a DP concentration given per-group customer
    counts and the total table count across groups."""
    customers = customers[customers > 0]
    if customers.size == 0 or total_tables == 0:
        return rng.gamma(a, 1.0 / b)
    omega = rng.beta(current + 1.0, customers)
    s = (rng.random(customers.size) * (customers + current) < customers).sum()
    shape = a + total_tables - float(s)
    rate = b - np.log(omega).sum()
    return rng.gamma(shape, 1.0 / rate)


def resample_hypers(
    counts: TransitionCounts,
    priors: HdpPriors,
    rng: np.random.Generator,
) -> tuple[float, float, float]:
    """Draw (rho, gamma, tau) from their full conditionals given the auxiliary counts.

    gamma sees the row CRPs (customers n_r., tables m); tau sees the top-level
    CRP over override-corrected tables; rho is Beta-conjugate in the override
    coin flips.  With no data all three reduce to their priors.
    """
    # placeholder values only matter through the auxiliary Beta/Bernoulli draws
    gamma_new = _concentration_gibbs(
        counts.n.astype(float).sum() and 1.0, 0.0, 0.0, np.empty(0), 0, rng
    )
    raise NotImplementedError
