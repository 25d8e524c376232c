"""Network geometry, path loss, and random channel realizations.

All powers inside the package are linear watts; dBm shows up only at the
configuration boundary. Channel draws are deterministic for a fixed seeded
generator, so a whole network realization can be reproduced from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NetworkLayout",
    "PathLossModel",
    "ChannelSet",
    "dbm_to_watts",
    "watts_to_dbm",
    "path_loss_db",
    "distance_factor",
    "draw_channel_matrix",
    "build_network",
    "default_layout",
]


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss: PL(r) = rho_a + 10 rho_b log10(r) + shadowing."""

    rho_a: float = 61.4
    rho_b: float = 2.0
    sigma_delta: float = 5.8  # dB std of the lognormal shadowing term

    def __post_init__(self):
        if self.sigma_delta < 0:
            raise ValueError("sigma_delta must be >= 0")


@dataclass(frozen=True)
class NetworkLayout:
    """Positions of the transmitter, the reflecting surfaces, and the users.

    ``ue_positions`` may be None, in which case ``build_network`` scatters the
    users uniformly inside the disk given by ``ue_center``/``ue_radius``.
    """

    ap_position: np.ndarray  # (2,)
    rhs_positions: np.ndarray  # (S, 2)
    ue_center: np.ndarray  # (2,)
    ue_radius: float
    ue_positions: np.ndarray | None = None  # (K, 2) if fixed
    path_loss_exponent: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "ap_position", np.asarray(self.ap_position, dtype=float))
        object.__setattr__(self, "rhs_positions", np.atleast_2d(np.asarray(self.rhs_positions, dtype=float)))
        object.__setattr__(self, "ue_center", np.asarray(self.ue_center, dtype=float))
        if self.ue_positions is not None:
            object.__setattr__(self, "ue_positions", np.atleast_2d(np.asarray(self.ue_positions, dtype=float)))
        if self.rhs_positions.shape[0] < 1:
            raise ValueError("at least one surface position required")
        if not np.isfinite(self.ap_position).all() or not np.isfinite(self.rhs_positions).all():
            raise ValueError("positions must be finite")
        if self.ue_radius <= 0:
            raise ValueError("ue_radius must be > 0")

    @property
    def num_surfaces(self) -> int:
        return self.rhs_positions.shape[0]


@dataclass(frozen=True)
class ChannelSet:
    """One random network realization.

    h_ap_rhs  : (S, M, N_tr) complex, transmitter -> surface matrices
    g_rhs_ue  : (S, K, M) complex, surface -> user vectors
    d_factors : (S, K) float, geometric distance factors sqrt(r_a^k * r_u^k)
    """

    h_ap_rhs: np.ndarray
    g_rhs_ue: np.ndarray
    d_factors: np.ndarray
    noise_power: float
    n_tr: int
    m_elems: int

    def __post_init__(self):
        s, m, n = self.h_ap_rhs.shape
        s2, k, m2 = self.g_rhs_ue.shape
        if (s2, m2) != (s, m) or self.d_factors.shape != (s, k):
            raise ValueError("inconsistent channel array shapes")
        if n != self.n_tr or m != self.m_elems:
            raise ValueError("dimension fields disagree with array shapes")
        if not (self.d_factors > 0).all():
            raise ValueError("distance factors must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")

    @property
    def num_surfaces(self) -> int:
        return self.h_ap_rhs.shape[0]

    @property
    def num_users(self) -> int:
        return self.g_rhs_ue.shape[1]


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a dBm figure to linear watts."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    """Convert linear watts to dBm."""
    if p_watts <= 0:
        raise ValueError("power must be positive")
    return 10.0 * np.log10(p_watts) + 30.0


def path_loss_db(r: float, model: PathLossModel, shadowing_db: float = 0.0) -> float:
    """Log-distance path loss in dB at range ``r`` meters."""
    if r <= 0:
        raise ValueError(f"range must be positive, got {r}")
    return model.rho_a + 10.0 * model.rho_b * np.log10(r) + shadowing_db


def distance_factor(r_ap: float, r_ue: float, kappa: float) -> float:
    """Geometric factor sqrt(r_ap^kappa * r_ue^kappa) of a two-hop link."""
    if r_ap <= 0 or r_ue <= 0:
        raise ValueError("hop distances must be positive")
    return float(np.sqrt(r_ap**kappa * r_ue**kappa))


def draw_channel_matrix(rows: int, cols: int, pl_db: float, rng: np.random.Generator) -> np.ndarray:
    """Draw an i.i.d. complex Gaussian matrix with per-entry variance 10^(-0.1 pl_db)."""
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be >= 1")
    sigma = np.sqrt(10.0 ** (-0.1 * pl_db) / 2.0)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return sigma * (re + 1j * im)


def build_network(
    layout: NetworkLayout,
    model: PathLossModel,
    dims: tuple[int, int, int, int],
    noise_dbm: float,
    rng: np.random.Generator,
) -> ChannelSet:
    """Draw one full network realization for dims = (S, K, M, N_tr).

    Draw order (fixed, so results are reproducible per seed): user positions
    if not given, then per surface the feeder-link shadowing and matrix, then
    per (surface, user) the user-link shadowing and vector. Shadowing is drawn
    once per link at construction.
    """
    s_count, k_count, m_elems, n_tr = dims
    if min(dims) < 1:
        raise ValueError("all dimensions must be >= 1")
    if layout.num_surfaces != s_count:
        raise ValueError(f"layout has {layout.num_surfaces} surfaces, dims ask for {s_count}")

    if layout.ue_positions is not None:
        if layout.ue_positions.shape[0] != k_count:
            raise ValueError("fixed user positions disagree with K")
        ue_pos = layout.ue_positions
    else:
        # uniform over the disk: radius via sqrt so area density is flat
        radii = layout.ue_radius * np.sqrt(rng.uniform(size=k_count))
        angles = rng.uniform(0.0, 2.0 * np.pi, size=k_count)
        ue_pos = layout.ue_center + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])

    kappa = layout.path_loss_exponent
    h_ap_rhs = np.empty((s_count, m_elems, n_tr), dtype=complex)
    g_rhs_ue = np.empty((s_count, k_count, m_elems), dtype=complex)
    d_factors = np.empty((s_count, k_count))

    for s in range(s_count):
        r_feed = float(np.linalg.norm(layout.ap_position - layout.rhs_positions[s]))
        if r_feed == 0.0:
            raise ValueError(f"surface {s} coincides with the transmitter")
        delta = float(rng.normal(0.0, model.sigma_delta)) if model.sigma_delta > 0 else 0.0
        h_ap_rhs[s] = draw_channel_matrix(m_elems, n_tr, path_loss_db(r_feed, model, delta), rng)
        for k in range(k_count):
            r_user = float(np.linalg.norm(layout.rhs_positions[s] - ue_pos[k]))
            if r_user == 0.0:
                raise ValueError(f"surface {s} coincides with user {k}")
            delta = float(rng.normal(0.0, model.sigma_delta)) if model.sigma_delta > 0 else 0.0
            g_rhs_ue[s, k] = draw_channel_matrix(1, m_elems, path_loss_db(r_user, model, delta), rng)[0]
            d_factors[s, k] = distance_factor(r_feed, r_user, kappa)

    return ChannelSet(
        h_ap_rhs=h_ap_rhs,
        g_rhs_ue=g_rhs_ue,
        d_factors=d_factors,
        noise_power=dbm_to_watts(noise_dbm),
        n_tr=n_tr,
        m_elems=m_elems,
    )


def default_layout(
    num_surfaces: int = 4,
    ap_position=(0.0, 0.0),
    rhs_circle_center=(20.0, 0.0),
    rhs_circle_radius: float = 20.0,
    ue_center=(40.0, 0.0),
    ue_radius: float = 10.0,
    path_loss_exponent: float = 2.0,
) -> NetworkLayout:
    """Surfaces evenly spaced on a circle, half-step offset so none sits on the AP."""
    angles = (np.arange(num_surfaces) + 0.5) * 2.0 * np.pi / num_surfaces
    center = np.asarray(rhs_circle_center, dtype=float)
    positions = center + rhs_circle_radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return NetworkLayout(
        ap_position=np.asarray(ap_position, dtype=float),
        rhs_positions=positions,
        ue_center=np.asarray(ue_center, dtype=float),
        ue_radius=ue_radius,
        path_loss_exponent=path_loss_exponent,
    )
