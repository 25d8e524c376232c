"""Outer alternating optimization: rate auxiliaries, shape selection, the
precoder block, and the phase block, with a monotone objective trace.

Each outer iteration refreshes the rate auxiliaries at the current operating
point, re-selects the activation shape, updates the precoder in closed form
under the power budget, and ascends the phases. The paper-style shape rule
and precoder template are not literal ascent steps for the weighted sum rate,
so a safeguard retries a worsening iteration with the incumbent shape and,
failing that, keeps the previous iterate and stops; accepted iterates never
lower the trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .active import EffectiveChannels, Precoder, bisect_mu, effective_channels, update_tau
from .passive import (
    PhaseConfig,
    assemble_quadratic,
    build_v_stacks,
    quantize_phases,
    random_phases,
    solve_unit_modulus_qp,
    update_epsilon,
)
from .shapes import ShapeCatalog, ShapeMask, effective_rows, link_gains, select_shape

__all__ = [
    "AuxState",
    "AOSolution",
    "SolverOptions",
    "snr",
    "all_snr",
    "weighted_sum_rate",
    "update_chi",
    "p2_objective",
    "check_min_power",
    "diagnostic_sinr",
    "solve",
]

_GUARD_SLACK = 1e-12


@dataclass
class AuxState:
    """Fractional-transform auxiliaries carried across outer iterations."""

    chi: np.ndarray
    tau: np.ndarray
    epsilon: np.ndarray
    iteration: int = 0


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of one alternating-optimization run. Powers are linear watts."""

    p_max: float
    weights: np.ndarray | None = None
    p_thr: float = 0.0
    tol_outer: float = 1e-4
    max_outer_iters: int = 100
    passive_tol: float = 1e-6
    passive_max_iters: int = 500
    eta: float = 1.0
    quantize_bits: int = 0  # 0 disables phase quantization
    enforce_min_power: bool = False
    report_sinr: bool = False
    seed: int | None = None


@dataclass
class AOSolution:
    mask_index: int
    precoder: Precoder
    phases: PhaseConfig
    rates: np.ndarray  # per-user bits/s/Hz
    objective_trace: list[float]
    feasibility_report: np.ndarray  # (S, K) received-power margins
    mu: float
    converged: bool
    iterations: int
    diagnostic_sinr: np.ndarray | None = None

    @property
    def throughput(self) -> float:
        """Weighted sum rate in bits/s/Hz."""
        return float(self.precoder.weights @ self.rates)

    @property
    def violations(self) -> int:
        return int((self.feasibility_report < 0).sum())


def _gammas_from(eff: EffectiveChannels, cols: np.ndarray, noise_power: float) -> np.ndarray:
    gains = np.einsum("kn,nk->k", np.conj(eff.b), cols)
    return np.abs(gains) ** 2 / noise_power


def snr(k: int, channels, mask: ShapeMask, theta: PhaseConfig, w) -> float:
    """Received SNR of user k under the combined-noise convention."""
    return float(all_snr(channels, mask, theta, w)[k])


def all_snr(channels, mask: ShapeMask, theta: PhaseConfig, w) -> np.ndarray:
    """SNR of every user: |sum_s per-surface gain|^2 / noise power."""
    cols = getattr(w, "columns", w)
    eff = effective_channels(channels, mask, theta)
    return _gammas_from(eff, cols, channels.noise_power)


def weighted_sum_rate(gammas: np.ndarray, weights: np.ndarray) -> float:
    """sum_k w_k log2(1 + gamma_k)."""
    gammas = np.asarray(gammas, dtype=float)
    if (gammas < 0).any():
        raise ValueError("SNRs must be non-negative")
    return float((np.asarray(weights, dtype=float) * np.log2(1.0 + gammas)).sum())


def update_chi(gammas: np.ndarray) -> np.ndarray:
    """Optimal rate auxiliaries equal the current SNRs."""
    gammas = np.asarray(gammas, dtype=float)
    if (gammas < 0).any():
        raise ValueError("SNRs must be non-negative")
    return gammas.copy()


def p2_objective(chi: np.ndarray, gammas: np.ndarray, weights: np.ndarray) -> float:
    """Fractional-transform objective; equals the weighted sum rate at chi = gamma."""
    chi = np.asarray(chi, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    terms = weights * np.log(1.0 + chi) - weights * chi + weights * (1.0 + chi) * gammas / (1.0 + gammas)
    return float(terms.sum() / np.log(2.0))


def check_min_power(channels, mask: ShapeMask, theta: PhaseConfig, w, p_thr: float) -> np.ndarray:
    """Per-(s, k) margins of received power against the threshold (negative = violated)."""
    gains = link_gains(channels, mask, theta, w)  # (S, K)
    return np.abs(gains) ** 2 - p_thr


def diagnostic_sinr(channels, mask: ShapeMask, theta: PhaseConfig, w) -> np.ndarray:
    """True SINR with the cross-user interference spelled out (diagnostic only;
    the optimization itself always uses the combined-noise SNR)."""
    cols = getattr(w, "columns", w)
    rows = effective_rows(channels, mask, theta).sum(axis=0)  # (K, N_tr)
    cross = rows @ cols  # (K, K): entry [k, j] is user k's gain on stream j
    signal = np.abs(np.diag(cross)) ** 2
    interference = (np.abs(cross) ** 2).sum(axis=1) - signal
    return signal / (interference + channels.noise_power)


def _matched_filter(eff: EffectiveChannels, p_max: float) -> np.ndarray:
    k_count, n_tr = eff.b.shape
    cols = np.zeros((n_tr, k_count), dtype=complex)
    for k in range(k_count):
        norm = np.linalg.norm(eff.b[k])
        if norm > 0:
            cols[:, k] = eff.b[k] / norm
    return cols * np.sqrt(p_max / k_count)


def _iteration(channels, catalog, theta, cols, gammas, opts, weights, mask_index, do_select):
    """One outer pass; returns the candidate state and its objective."""
    noise = channels.noise_power
    chi = update_chi(gammas)

    if do_select:
        mask_index, mask = select_shape(catalog, channels, theta, cols)
    else:
        mask = catalog[mask_index]

    eff = effective_channels(channels, mask, theta)
    tau = update_tau(chi, _gammas_from(eff, cols, noise), weights)
    mu, prec = bisect_mu(tau, chi, weights, eff, opts.p_max)
    cols = prec.columns

    v_stacks = build_v_stacks(channels, mask, cols, theta.eta)
    d_sums = channels.d_factors.sum(axis=0)
    epsilon = update_epsilon(theta.stack(), v_stacks, d_sums, chi, weights, noise)
    form = assemble_quadratic(epsilon, chi, weights, v_stacks, d_sums, d_factors=channels.d_factors)
    min_power = opts.p_thr if opts.enforce_min_power else 0.0
    theta = solve_unit_modulus_qp(form, theta, min_power, opts.passive_max_iters, opts.passive_tol)
    if opts.quantize_bits:
        theta = quantize_phases(theta, opts.quantize_bits)

    gammas = _gammas_from(effective_channels(channels, mask, theta), cols, noise)
    objective = weighted_sum_rate(gammas, weights)
    aux = AuxState(chi=chi, tau=tau, epsilon=epsilon)
    return mask_index, theta, cols, mu, gammas, aux, objective


def solve(channels, catalog: ShapeCatalog, opts: SolverOptions, rng: np.random.Generator | None = None) -> AOSolution:
    """Run the alternating optimization to convergence.

    Starts from uniform random phases and a power-filling matched filter on
    catalog member 0, then iterates auxiliaries -> shape -> precoder -> phases
    until the relative objective change drops below ``tol_outer`` or the
    iteration cap is reached. The returned trace is non-decreasing.
    """
    if rng is None:
        rng = np.random.default_rng(opts.seed)
    k_count = channels.num_users
    weights = np.ones(k_count) if opts.weights is None else np.asarray(opts.weights, dtype=float)
    if weights.shape != (k_count,):
        raise ValueError("one weight per user required")

    theta = random_phases(channels.num_surfaces, channels.m_elems, rng, opts.eta)
    mask_index = 0
    eff = effective_channels(channels, catalog[mask_index], theta)
    cols = _matched_filter(eff, opts.p_max)
    mu = 0.0
    gammas = _gammas_from(eff, cols, channels.noise_power)
    aux = AuxState(chi=update_chi(gammas), tau=np.zeros(k_count, dtype=complex), epsilon=np.zeros(k_count, dtype=complex))

    trace = [weighted_sum_rate(gammas, weights)]
    converged = False
    guard = opts.quantize_bits == 0  # quantized traces are not monotone by construction

    for _ in range(opts.max_outer_iters):
        prev = trace[-1]
        slack = _GUARD_SLACK * max(1.0, abs(prev))
        prev_theta = theta
        candidate = _iteration(channels, catalog, theta, cols, gammas, opts, weights, mask_index, do_select=True)
        if guard and candidate[-1] < prev - slack:
            candidate = _iteration(channels, catalog, theta, cols, gammas, opts, weights, mask_index, do_select=False)
            if candidate[-1] < prev - slack:
                converged = True  # no admissible progress; keep the previous iterate
                break
        mask_index, theta, cols, mu, gammas, aux, objective = candidate
        aux.iteration = len(trace)
        trace.append(objective)
        if opts.quantize_bits and np.array_equal(theta.theta, prev_theta.theta):
            converged = True  # quantized phases reached a fixed point
            break
        if abs(objective - prev) <= opts.tol_outer * max(abs(prev), 1e-30):
            converged = True
            break

    if opts.quantize_bits:
        # one final precoder refresh against the last quantized phases
        chi = update_chi(gammas)
        eff = effective_channels(channels, catalog[mask_index], theta)
        tau = update_tau(chi, _gammas_from(eff, cols, channels.noise_power), weights)
        mu, prec = bisect_mu(tau, chi, weights, eff, opts.p_max)
        cols = prec.columns
        gammas = _gammas_from(eff, cols, channels.noise_power)
        trace.append(weighted_sum_rate(gammas, weights))
        aux = AuxState(chi=chi, tau=tau, epsilon=aux.epsilon, iteration=len(trace) - 1)

    mask = catalog[mask_index]
    precoder = Precoder(columns=cols, weights=weights, p_max=opts.p_max)
    rates = np.log2(1.0 + gammas)
    report = check_min_power(channels, mask, theta, cols, opts.p_thr)
    sinr = diagnostic_sinr(channels, mask, theta, cols) if opts.report_sinr else None
    return AOSolution(
        mask_index=mask_index,
        precoder=precoder,
        phases=theta,
        rates=rates,
        objective_trace=trace,
        feasibility_report=report,
        mu=mu,
        converged=converged,
        iterations=len(trace) - 1,
        diagnostic_sinr=sinr,
    )
