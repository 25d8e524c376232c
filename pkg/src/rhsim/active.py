"""Transmit precoder block: auxiliary ratio variables and the closed-form
precoder with a bisected power multiplier.

The precoder update solves a ridge-regularized system per user,
``w_k = c_k (mu I + sum_j |tau_j|^2 b_j b_j^H)^-1 b_k``, and the multiplier
``mu`` is bisected until the transmit power meets the budget. Power is
non-increasing in mu, which makes the bracket valid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .shapes import effective_rows

__all__ = [
    "Precoder",
    "EffectiveChannels",
    "effective_channels",
    "update_tau",
    "p4_objective",
    "p3_objective",
    "update_precoder",
    "transmit_power",
    "bisect_mu",
]

POWER_REL_TOL = 1e-6
MAX_BISECT_ITERS = 200


@dataclass(frozen=True)
class Precoder:
    """Transmit columns (N_tr, K) with their rate weights and power budget."""

    columns: np.ndarray
    weights: np.ndarray
    p_max: float

    def __post_init__(self):
        object.__setattr__(self, "columns", np.asarray(self.columns, dtype=complex))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.columns.ndim != 2:
            raise ValueError("columns must be a (N_tr, K) matrix")
        if self.weights.shape != (self.columns.shape[1],):
            raise ValueError("one weight per user required")
        if (self.weights <= 0).any():
            raise ValueError("weights must be positive")

    @property
    def num_users(self) -> int:
        return self.columns.shape[1]

    def power(self) -> float:
        return transmit_power(self.columns)


@dataclass(frozen=True)
class EffectiveChannels:
    """Combined transmitter-side channels b_k (rows of ``b``, shape (K, N_tr))."""

    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex))
        if self.b.ndim != 2:
            raise ValueError("b must be (K, N_tr)")

    @property
    def num_users(self) -> int:
        return self.b.shape[0]


def effective_channels(channels, mask, theta) -> EffectiveChannels:
    """Collapse all surfaces into one effective vector per user."""
    rows = effective_rows(channels, mask, theta).sum(axis=0)  # (K, N_tr)
    return EffectiveChannels(b=np.conj(rows))


def update_tau(chi: np.ndarray, gammas: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Closed-form ratio auxiliaries: sqrt(w(1+chi)) sqrt(g) / (1+g), as complex."""
    chi = np.asarray(chi, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if (gammas < 0).any() or (chi < 0).any() or (weights <= 0).any():
        raise ValueError("need gammas >= 0, chi >= 0, weights > 0")
    return (np.sqrt(weights * (1.0 + chi)) * np.sqrt(gammas) / (1.0 + gammas)).astype(complex)


def p4_objective(tau: np.ndarray, chi: np.ndarray, gammas: np.ndarray, weights: np.ndarray) -> float:
    """Quadratic-transform surrogate of the weighted ratio sum at fixed tau."""
    tau = np.asarray(tau, dtype=complex)
    root = np.sqrt(np.asarray(weights, dtype=float) * (1.0 + np.asarray(chi, dtype=float)))
    terms = 2.0 * root * np.real(np.conj(tau) * np.sqrt(gammas)) - np.abs(tau) ** 2 * (1.0 + np.asarray(gammas))
    return float(terms.sum())


def p3_objective(chi: np.ndarray, gammas: np.ndarray, weights: np.ndarray) -> float:
    """Weighted ratio sum: sum_k w_k (1+chi_k) g_k / (1+g_k)."""
    chi = np.asarray(chi, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    return float((weights * (1.0 + chi) * gammas / (1.0 + gammas)).sum())


def update_precoder(tau, chi, weights, eff: EffectiveChannels, mu: float) -> np.ndarray:
    """Columns of the closed-form precoder at multiplier mu, shape (N_tr, K).

    Raises numpy.linalg.LinAlgError when mu = 0 leaves the system singular,
    which tells the caller to move to mu > 0.
    """
    if mu < 0:
        raise ValueError("mu must be >= 0")
    tau = np.asarray(tau, dtype=complex)
    b = eff.b  # (K, N_tr)
    n_tr = b.shape[1]
    coef = np.sqrt(np.asarray(weights, dtype=float) * (1.0 + np.asarray(chi, dtype=float))) * tau
    if not np.any(np.abs(tau) > 0):
        return np.zeros((n_tr, b.shape[0]), dtype=complex)

    system = mu * np.eye(n_tr, dtype=complex) + (np.abs(tau)[:, None] ** 2 * b).T @ np.conj(b)
    np.linalg.cholesky(system)  # positive-definiteness gate; raises if singular
    rhs = (coef[:, None] * b).T  # (N_tr, K), column k = coef_k b_k
    return np.linalg.solve(system, rhs)


def transmit_power(w) -> float:
    """Total transmit power, the squared Frobenius norm of the columns."""
    cols = getattr(w, "columns", w)
    return float(np.sum(np.abs(cols) ** 2))


def _limit_precoder(tau, chi, weights, eff: EffectiveChannels) -> np.ndarray:
    """Minimum-norm columns of the ridge system's mu -> 0 limit."""
    tau = np.asarray(tau, dtype=complex)
    b = eff.b
    coef = np.sqrt(np.asarray(weights, dtype=float) * (1.0 + np.asarray(chi, dtype=float))) * tau
    system = (np.abs(tau)[:, None] ** 2 * b).T @ np.conj(b)
    rhs = (coef[:, None] * b).T
    return np.linalg.lstsq(system, rhs, rcond=None)[0]


def bisect_mu(tau, chi, weights, eff: EffectiveChannels, p_max: float) -> tuple[float, Precoder]:
    """Find the smallest multiplier whose precoder meets the power budget.

    Returns mu = 0 when the unconstrained solution already fits; otherwise
    bisects until |power - p_max| / p_max <= 1e-6. All-zero tau short-circuits
    to the zero precoder.
    """
    if p_max <= 0:
        raise ValueError("p_max must be positive")
    weights = np.asarray(weights, dtype=float)
    tau = np.asarray(tau, dtype=complex)

    if not np.any(np.abs(tau) > 0):
        zero = np.zeros((eff.b.shape[1], eff.b.shape[0]), dtype=complex)
        return 0.0, Precoder(columns=zero, weights=weights, p_max=p_max)

    try:
        w0 = update_precoder(tau, chi, weights, eff, 0.0)
    except np.linalg.LinAlgError:
        # Singular at mu = 0 (K < N_tr); the mu -> 0 limit is the minimum-norm
        # solution, which the right-hand side always admits (each b_k lies in
        # the span of the weighted outer products).
        w0 = _limit_precoder(tau, chi, weights, eff)
    if transmit_power(w0) <= p_max:
        return 0.0, Precoder(columns=w0, weights=weights, p_max=p_max)

    lo, hi = 0.0, 1.0
    w_hi = update_precoder(tau, chi, weights, eff, hi)
    doublings = 0
    while transmit_power(w_hi) > p_max:
        lo, hi = hi, 2.0 * hi
        w_hi = update_precoder(tau, chi, weights, eff, hi)
        doublings += 1
        if doublings > 200:
            raise RuntimeError("power bracket did not close")

    mu, w = hi, w_hi
    for _ in range(MAX_BISECT_ITERS):
        power = transmit_power(w)
        if abs(power - p_max) / p_max <= POWER_REL_TOL:
            break
        mid = 0.5 * (lo + hi)
        w_mid = update_precoder(tau, chi, weights, eff, mid)
        if transmit_power(w_mid) > p_max:
            lo = mid
        else:
            hi, mu, w = mid, mid, w_mid
    return mu, Precoder(columns=w, weights=weights, p_max=p_max)
