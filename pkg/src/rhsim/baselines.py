"""Comparison schemes: fixed-shape optimization, quantized phases, and
zero-forcing with random phases."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .active import EffectiveChannels, Precoder, effective_channels, transmit_power
from .ao import AOSolution, SolverOptions, _gammas_from, check_min_power, solve, weighted_sum_rate
from .passive import quantize_phases, random_phases
from .shapes import ShapeCatalog

__all__ = ["BaselineKind", "quantize_phases", "zf_precoder", "run_baseline"]

KINDS = ("fixed_shape", "quantized", "zf_random")


@dataclass(frozen=True)
class BaselineKind:
    kind: str
    mask_index: int = 0
    bits: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        if self.kind == "quantized" and self.bits < 1:
            raise ValueError("quantized baseline needs bits >= 1")
        if self.mask_index < 0:
            raise ValueError("mask_index must be >= 0")


def zf_precoder(eff: EffectiveChannels, p_max: float, weights=None) -> Precoder:
    """Zero-forcing columns with equal per-user power after normalization.

    Requires K <= N_tr and a full-row-rank stacked channel matrix; the Gram
    factorization raises on rank deficiency.
    """
    k_count, n_tr = eff.b.shape
    if k_count > n_tr:
        raise ValueError(f"zero-forcing needs K <= N_tr, got K={k_count}, N_tr={n_tr}")
    stacked = np.conj(eff.b)  # rows are b_k^H
    gram = stacked @ stacked.conj().T  # (K, K)
    try:
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as err:
        raise ValueError("stacked effective channels are rank deficient") from err
    raw = np.linalg.solve(gram.T, stacked).T  # B^H (B B^H)^-1, shape (N_tr, K)
    cols = raw / np.linalg.norm(raw, axis=0, keepdims=True) * np.sqrt(p_max / k_count)
    if weights is None:
        weights = np.ones(k_count)
    return Precoder(columns=cols, weights=np.asarray(weights, dtype=float), p_max=p_max)


def _single_mask_catalog(catalog: ShapeCatalog, index: int) -> ShapeCatalog:
    return ShapeCatalog(masks=(catalog[index],))


def run_baseline(
    kind: BaselineKind,
    channels,
    catalog: ShapeCatalog,
    opts: SolverOptions,
    rng: np.random.Generator | None = None,
) -> AOSolution:
    """Run one comparison scheme and report it like a full optimization run."""
    if rng is None:
        rng = np.random.default_rng(opts.seed)

    if kind.kind == "fixed_shape":
        return solve(channels, _single_mask_catalog(catalog, kind.mask_index), opts, rng)

    if kind.kind == "quantized":
        quant_opts = replace(opts, quantize_bits=kind.bits)
        return solve(channels, _single_mask_catalog(catalog, kind.mask_index), quant_opts, rng)

    # zf_random: seeded random phases, fixed mask, one-shot zero-forcing precoder
    weights = np.ones(channels.num_users) if opts.weights is None else np.asarray(opts.weights, dtype=float)
    theta = random_phases(channels.num_surfaces, channels.m_elems, rng, opts.eta)
    mask = catalog[kind.mask_index]
    eff = effective_channels(channels, mask, theta)
    precoder = zf_precoder(eff, opts.p_max, weights)
    gammas = _gammas_from(eff, precoder.columns, channels.noise_power)
    rates = np.log2(1.0 + gammas)
    report = check_min_power(channels, mask, theta, precoder.columns, opts.p_thr)
    assert transmit_power(precoder) <= opts.p_max * (1.0 + 1e-9)
    return AOSolution(
        mask_index=kind.mask_index,
        precoder=precoder,
        phases=theta,
        rates=rates,
        objective_trace=[weighted_sum_rate(gammas, weights)],
        feasibility_report=report,
        mu=0.0,
        converged=True,
        iterations=0,
    )
