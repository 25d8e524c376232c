"""Reflection-phase block: quadratic-transform auxiliaries and a projected
gradient ascent solver on the unit-modulus torus.

The phase problem is a concave quadratic ``-t^H U t + 2 Re{t^H z}`` over
vectors whose entries all have modulus one. Instead of lifting to a rank-one
matrix variable, the solver ascends directly in the stacked phase vector and
renormalizes every entry to the unit circle after each step, so the modulus
and rank structure hold by construction. Optional per-link minimum-power
requirements enter through a ramped quadratic hinge penalty.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhaseConfig",
    "QuadraticForm",
    "random_phases",
    "quantize_phases",
    "build_v",
    "build_v_stacks",
    "update_epsilon",
    "p5_objective",
    "p6_objective",
    "assemble_quadratic",
    "p7_objective",
    "p7_gradient",
    "power_iteration",
    "min_power_margins",
    "solve_unit_modulus_qp",
]

logger = logging.getLogger(__name__)

UNIT_MODULUS_TOL = 1e-12
PENALTY_COEFFICIENTS = (0.0, 1.0, 10.0, 100.0, 1000.0)
MAX_BACKTRACKS = 50
_PSD_CHECK_MAX_DIM = 1024


@dataclass(frozen=True)
class PhaseConfig:
    """Per-surface unit-modulus phase vectors, theta shape (S, M)."""

    theta: np.ndarray
    eta: float = 1.0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=complex)
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 2:
            raise ValueError("theta must be (S, M)")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("reflection coefficient must be in (0, 1]")
        if np.abs(np.abs(theta) - 1.0).max() > UNIT_MODULUS_TOL:
            raise ValueError("phase entries must have unit modulus")

    @property
    def num_surfaces(self) -> int:
        return self.theta.shape[0]

    @property
    def elements_per_surface(self) -> int:
        return self.theta.shape[1]

    def stack(self) -> np.ndarray:
        """Surface-major flattening, shape (S*M,)."""
        return self.theta.reshape(-1)

    @classmethod
    def from_stack(cls, stacked: np.ndarray, num_surfaces: int, eta: float = 1.0) -> "PhaseConfig":
        stacked = np.asarray(stacked, dtype=complex)
        return cls(theta=stacked.reshape(num_surfaces, -1), eta=eta)


def random_phases(num_surfaces: int, elements: int, rng: np.random.Generator, eta: float = 1.0) -> PhaseConfig:
    """Independent uniform phases on [0, 2pi)."""
    phi = rng.uniform(0.0, 2.0 * np.pi, size=(num_surfaces, elements))
    return PhaseConfig(theta=np.exp(1j * phi), eta=eta)


def quantize_phases(theta: PhaseConfig, bits: int) -> PhaseConfig:
    """Snap every phase to the nearest point of the 2^bits uniform grid.

    Midpoints between two grid angles resolve to the smaller angle. The
    result lies exactly on the grid (entries are exp(1j * step * t)).
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    levels = 2**bits
    step = 2.0 * np.pi / levels
    phi = np.mod(np.angle(theta.theta), 2.0 * np.pi)
    ratio = phi / step
    lower = np.floor(ratio)
    frac = ratio - lower
    idx = np.where(frac > 0.5, lower + 1.0, lower)  # exact .5 ties keep the lower angle
    idx = np.mod(idx, levels)
    return PhaseConfig(theta=np.exp(1j * step * idx), eta=theta.eta)


def build_v(channels, mask, w, s: int, k: int, eta: float = 1.0) -> np.ndarray:
    """Element-wise cascade vector for link (s, k): sqrt(eta) * mask * conj(g) * (H w_k)."""
    cols = getattr(w, "columns", w)
    w_k = np.asarray(cols)[:, k]
    hw = channels.h_ap_rhs[s] @ w_k  # (M,)
    return np.sqrt(eta) * mask.active * np.conj(channels.g_rhs_ue[s, k]) * hw


def build_v_stacks(channels, mask, w, eta: float = 1.0) -> np.ndarray:
    """Stack the per-surface cascade vectors per user, shape (K, S*M)."""
    s_count, k_count = channels.num_surfaces, channels.num_users
    out = np.empty((k_count, s_count * channels.m_elems), dtype=complex)
    for k in range(k_count):
        for s in range(s_count):
            out[k, s * channels.m_elems : (s + 1) * channels.m_elems] = build_v(channels, mask, w, s, k, eta)
    return out


def _coupling(theta_stack: np.ndarray, v_stacks: np.ndarray) -> np.ndarray:
    """a_k = theta^H v_k for every user, shape (K,)."""
    return v_stacks @ np.conj(theta_stack)


def update_epsilon(theta_stack, v_stacks, d_sums, chi, weights, noise_power) -> np.ndarray:
    """Quadratic-transform auxiliaries for the ratio objective.

    eps_k = sqrt(w_k(1+chi_k)) a_k / (|a_k|^2 + sigma^2 (sum_s d_sk)^2) with
    a_k the phase/cascade coupling; the denominator is strictly positive.
    """
    d_sums = np.asarray(d_sums, dtype=float)
    if (d_sums <= 0).any():
        raise ValueError("distance sums must be positive")
    a = _coupling(np.asarray(theta_stack, dtype=complex), np.asarray(v_stacks, dtype=complex))
    root = np.sqrt(np.asarray(weights, dtype=float) * (1.0 + np.asarray(chi, dtype=float)))
    return root * a / (np.abs(a) ** 2 + noise_power * d_sums**2)


def p5_objective(theta_stack, v_stacks, d_sums, chi, weights, noise_power) -> float:
    """Ratio objective: sum_k w(1+chi) |a_k|^2 / (|a_k|^2 + sigma^2 (sum d)^2)."""
    a = _coupling(np.asarray(theta_stack, dtype=complex), np.asarray(v_stacks, dtype=complex))
    num = np.asarray(weights, dtype=float) * (1.0 + np.asarray(chi, dtype=float)) * np.abs(a) ** 2
    den = np.abs(a) ** 2 + noise_power * np.asarray(d_sums, dtype=float) ** 2
    return float((num / den).sum())


def p6_objective(theta_stack, epsilon, v_stacks, d_sums, chi, weights, noise_power) -> float:
    """Quadratic-transform surrogate of the ratio objective at fixed epsilon."""
    a = _coupling(np.asarray(theta_stack, dtype=complex), np.asarray(v_stacks, dtype=complex))
    epsilon = np.asarray(epsilon, dtype=complex)
    root = np.sqrt(np.asarray(weights, dtype=float) * (1.0 + np.asarray(chi, dtype=float)))
    quad = np.abs(epsilon) ** 2 * (np.abs(a) ** 2 + noise_power * np.asarray(d_sums, dtype=float) ** 2)
    return float((2.0 * root * np.real(np.conj(epsilon) * a) - quad).sum())


@dataclass(frozen=True)
class QuadraticForm:
    """Hermitian PSD quadratic data for the phase problem.

    ``d_factors`` (S, K) is only needed when minimum-power penalties are on.
    """

    upsilon: np.ndarray  # (SM, SM)
    z: np.ndarray  # (SM,)
    v_stacks: np.ndarray  # (K, SM)
    d_sums: np.ndarray  # (K,)
    d_factors: np.ndarray | None = None

    def validate(self):
        scale = max(1.0, float(np.abs(self.upsilon).max(initial=0.0)))
        herm_err = float(np.abs(self.upsilon - self.upsilon.conj().T).max(initial=0.0))
        if herm_err > 1e-10 * scale:
            raise ValueError(f"quadratic matrix not Hermitian (error {herm_err:.3e})")
        n = self.upsilon.shape[0]
        if n <= _PSD_CHECK_MAX_DIM:  # full spectrum check only at small sizes
            eigs = np.linalg.eigvalsh(self.upsilon)
            if eigs[0] < -1e-10 * max(1.0, eigs[-1]):
                raise ValueError(f"quadratic matrix not PSD (min eigenvalue {eigs[0]:.3e})")


def assemble_quadratic(epsilon, chi, weights, v_stacks, d_sums, d_factors=None) -> QuadraticForm:
    """Collect the weighted outer products and linear term of the phase problem."""
    epsilon = np.asarray(epsilon, dtype=complex)
    v_stacks = np.asarray(v_stacks, dtype=complex)
    root = np.sqrt(np.asarray(weights, dtype=float) * (1.0 + np.asarray(chi, dtype=float)))
    upsilon = np.einsum("k,ki,kj->ij", np.abs(epsilon) ** 2, v_stacks, np.conj(v_stacks))
    z = (np.conj(epsilon) * root) @ v_stacks
    return QuadraticForm(
        upsilon=upsilon,
        z=z,
        v_stacks=v_stacks,
        d_sums=np.asarray(d_sums, dtype=float),
        d_factors=None if d_factors is None else np.asarray(d_factors, dtype=float),
    )


def p7_objective(theta_stack: np.ndarray, form: QuadraticForm) -> float:
    """Concave quadratic -t^H U t + 2 Re{t^H z}."""
    t = np.asarray(theta_stack, dtype=complex)
    return float(-np.real(np.vdot(t, form.upsilon @ t)) + 2.0 * np.real(np.vdot(t, form.z)))


def p7_gradient(theta_stack: np.ndarray, form: QuadraticForm) -> np.ndarray:
    """Gradient in real/imag coordinates, packed complex: 2(-U t + z).

    Real part is d/d(Re t), imaginary part d/d(Im t).
    """
    t = np.asarray(theta_stack, dtype=complex)
    return 2.0 * (-(form.upsilon @ t) + form.z)


def min_power_margins(theta: PhaseConfig, form: QuadraticForm, min_power: float) -> np.ndarray:
    """Per-(s, k) margins |theta_s^H v_sk|^2 / d_sk^2 - min_power."""
    if form.d_factors is None:
        raise ValueError("per-link distance factors required for minimum-power margins")
    s_count, k_count = form.d_factors.shape
    m = theta.elements_per_surface
    margins = np.empty((s_count, k_count))
    for s in range(s_count):
        block = slice(s * m, (s + 1) * m)
        for k in range(k_count):
            a_sk = np.vdot(theta.theta[s], form.v_stacks[k, block])
            margins[s, k] = np.abs(a_sk) ** 2 / form.d_factors[s, k] ** 2 - min_power
    return margins


def power_iteration(mat: np.ndarray, iters: int = 40) -> float:
    """Largest-eigenvalue estimate of a Hermitian PSD matrix."""
    n = mat.shape[0]
    vec = np.ones(n, dtype=complex) + 1j * np.linspace(0.0, 1.0, n)
    vec /= np.linalg.norm(vec)
    lam = 0.0
    for _ in range(iters):
        nxt = mat @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return 0.0
        vec = nxt / norm
        lam = float(np.real(np.vdot(vec, mat @ vec)))
    return lam


def _project_unit(candidate: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    """Renormalize each entry to the unit circle, keeping the old entry at zero."""
    mags = np.abs(candidate)
    out = np.where(mags > 0, candidate / np.where(mags > 0, mags, 1.0), fallback)
    return out


def _penalty_value(theta_stack, form: QuadraticForm, rho: float, min_power: float, m: int) -> float:
    if rho == 0.0 or min_power <= 0.0:
        return 0.0
    total = 0.0
    s_count, k_count = form.d_factors.shape
    for s in range(s_count):
        block = slice(s * m, (s + 1) * m)
        t_s = theta_stack[block]
        for k in range(k_count):
            q = np.abs(np.vdot(t_s, form.v_stacks[k, block])) ** 2 / form.d_factors[s, k] ** 2
            gap = min_power - q
            if gap > 0:
                total += gap * gap
    return -rho * total


def _penalty_gradient(theta_stack, form: QuadraticForm, rho: float, min_power: float, m: int) -> np.ndarray:
    grad = np.zeros_like(theta_stack)
    if rho == 0.0 or min_power <= 0.0:
        return grad
    s_count, k_count = form.d_factors.shape
    for s in range(s_count):
        block = slice(s * m, (s + 1) * m)
        t_s = theta_stack[block]
        for k in range(k_count):
            v = form.v_stacks[k, block]
            d2 = form.d_factors[s, k] ** 2
            a_sk = np.vdot(t_s, v)
            gap = min_power - np.abs(a_sk) ** 2 / d2
            if gap > 0:
                grad[block] += 4.0 * rho * gap / d2 * v * np.conj(a_sk)
    return grad


def solve_unit_modulus_qp(
    form: QuadraticForm,
    theta_init: PhaseConfig,
    min_power: float = 0.0,
    max_iters: int = 500,
    tol: float = 1e-6,
) -> PhaseConfig:
    """Maximize the concave quadratic over unit-modulus phases.

    Projected gradient ascent with backtracking: every accepted step does not
    decrease the (penalized) objective, and every iterate is exactly unit
    modulus. With ``min_power`` > 0 the run repeats over a geometrically
    ramped hinge-penalty coefficient; remaining violations are logged, never
    silently dropped. With ``min_power`` = 0 the returned objective is at
    least the starting one.
    """
    form.validate()
    s_count, m = theta_init.theta.shape
    if form.upsilon.shape[0] != s_count * m:
        raise ValueError("quadratic form size does not match the phase layout")
    if min_power > 0 and form.d_factors is None:
        raise ValueError("min_power > 0 needs per-link distance factors in the form")

    lam = power_iteration(form.upsilon)
    base_step = 1.0 / lam if lam > 1e-12 else 1.0
    theta = theta_init.stack().copy()
    coefficients = PENALTY_COEFFICIENTS if min_power > 0 else (0.0,)

    for rho in coefficients:
        value = p7_objective(theta, form) + _penalty_value(theta, form, rho, min_power, m)
        for _ in range(max_iters):
            grad = p7_gradient(theta, form) + _penalty_gradient(theta, form, rho, min_power, m)
            step = base_step
            improved = False
            for _ in range(MAX_BACKTRACKS):
                candidate = _project_unit(theta + step * grad, theta)
                cand_value = p7_objective(candidate, form) + _penalty_value(candidate, form, rho, min_power, m)
                if cand_value > value:
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
            delta = cand_value - value
            theta, value = candidate, cand_value
            if delta <= tol * max(abs(value), 1e-30):
                break

    result = PhaseConfig(theta=theta.reshape(s_count, m), eta=theta_init.eta)
    if min_power > 0:
        margins = min_power_margins(result, form, min_power)
        bad = np.argwhere(margins < 0)
        if bad.size:
            worst = float(margins.min())
            logger.warning(
                "minimum-power constraint violated on %d link(s) after penalty ramp (worst margin %.3e W)",
                len(bad),
                worst,
            )
    return result
