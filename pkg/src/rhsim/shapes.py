"""Binary activation masks over the surface element grid.

A mask selects which elements of an (M_x rows, M_y columns) grid take part in
reflection; the rest contribute nothing. Masks are stored as flat row-major
0/1 vectors so they compose with phase vectors by plain element-wise products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ShapeMask",
    "ShapeCatalog",
    "make_mask",
    "apply_mask",
    "effective_rows",
    "link_gains",
    "select_shape",
]


@dataclass(frozen=True)
class ShapeMask:
    grid: tuple[int, int]  # (rows, cols)
    active: np.ndarray  # (M,) uint8, row-major
    label: str

    def __post_init__(self):
        rows, cols = self.grid
        active = np.asarray(self.active, dtype=np.uint8)
        object.__setattr__(self, "active", active)
        if active.shape != (rows * cols,):
            raise ValueError("mask length must equal rows * cols")
        if not np.isin(active, (0, 1)).all():
            raise ValueError("mask entries must be 0 or 1")

    @property
    def num_elements(self) -> int:
        return self.active.size

    @property
    def num_active(self) -> int:
        return int(self.active.sum())

    def as_grid(self) -> np.ndarray:
        return self.active.reshape(self.grid)


@dataclass(frozen=True)
class ShapeCatalog:
    masks: tuple[ShapeMask, ...]

    def __post_init__(self):
        object.__setattr__(self, "masks", tuple(self.masks))
        if not self.masks:
            raise ValueError("catalog must not be empty")
        grids = {m.grid for m in self.masks}
        if len(grids) != 1:
            raise ValueError("all catalog masks must share one grid")
        labels = [m.label for m in self.masks]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mask labels: {labels}")

    def __len__(self) -> int:
        return len(self.masks)

    def __getitem__(self, index: int) -> ShapeMask:
        return self.masks[index]


def make_mask(
    kind: str,
    grid: tuple[int, int],
    *,
    width: int | None = None,
    height: int | None = None,
    length: int | None = None,
    radius: int | None = None,
    anchor: tuple[int, int] = (0, 0),
    label: str | None = None,
) -> ShapeMask:
    """Build a mask of the given kind anchored at (row, col) on the grid.

    Kinds: ``rectangle`` (width x height), ``strip_row`` (1 x length),
    ``strip_col`` (length x 1), ``circle`` (disk of the given cell radius,
    bounding box anchored at ``anchor``). The shape must fit inside the grid.
    """
    rows, cols = grid
    arow, acol = anchor
    cells = np.zeros((rows, cols), dtype=np.uint8)

    if kind == "rectangle":
        if width is None or height is None:
            raise ValueError("rectangle needs width and height")
        if width < 1 or height < 1:
            raise ValueError("rectangle sides must be >= 1")
        if arow < 0 or acol < 0 or arow + height > rows or acol + width > cols:
            raise ValueError(f"rectangle {width}x{height} at {anchor} exceeds grid {grid}")
        cells[arow : arow + height, acol : acol + width] = 1
        default_label = f"rect:{width}x{height}@{arow},{acol}"
    elif kind == "strip_row":
        if length is None or length < 1:
            raise ValueError("strip_row needs a positive length")
        if arow < 0 or acol < 0 or arow >= rows or acol + length > cols:
            raise ValueError(f"strip_row:{length} at {anchor} exceeds grid {grid}")
        cells[arow, acol : acol + length] = 1
        default_label = f"strip_row:{length}@{arow},{acol}"
    elif kind == "strip_col":
        if length is None or length < 1:
            raise ValueError("strip_col needs a positive length")
        if arow < 0 or acol < 0 or acol >= cols or arow + length > rows:
            raise ValueError(f"strip_col:{length} at {anchor} exceeds grid {grid}")
        cells[arow : arow + length, acol] = 1
        default_label = f"strip_col:{length}@{arow},{acol}"
    elif kind == "circle":
        if radius is None or radius < 0:
            raise ValueError("circle needs a non-negative radius")
        side = 2 * radius + 1
        if arow < 0 or acol < 0 or arow + side > rows or acol + side > cols:
            raise ValueError(f"circle:{radius} at {anchor} exceeds grid {grid}")
        cr, cc = arow + radius, acol + radius
        rr, cc_grid = np.mgrid[0:rows, 0:cols]
        cells[(rr - cr) ** 2 + (cc_grid - cc) ** 2 <= radius**2] = 1
        default_label = f"circle:{radius}@{arow},{acol}"
    else:
        raise ValueError(f"unknown mask kind {kind!r}")

    return ShapeMask(grid=grid, active=cells.reshape(-1), label=label or default_label)


def apply_mask(mask: ShapeMask, theta, s: int = 0) -> np.ndarray:
    """Diagonal of the masked conjugate reflection for surface ``s``.

    Entry m is ``active_m * conj(theta_m) * eta**-0.5``; masked-off elements
    give exactly zero. ``theta`` is a PhaseConfig (or anything with ``.theta``
    shaped (S, M) and ``.eta``).
    """
    theta_s = np.asarray(theta.theta[s])
    if theta_s.shape != (mask.num_elements,):
        raise ValueError("phase vector length does not match mask grid")
    return mask.active * np.conj(theta_s) * theta.eta**-0.5


def effective_rows(channels, mask: ShapeMask, theta) -> np.ndarray:
    """Per-link effective transmit-side rows, shape (S, K, N_tr).

    Row (s, k) is the user-k row through surface s: conj(g) composed with the
    masked reflection, then through the feeder matrix.
    """
    s_count, k_count = channels.num_surfaces, channels.num_users
    rows = np.empty((s_count, k_count, channels.n_tr), dtype=complex)
    for s in range(s_count):
        refl = apply_mask(mask, theta, s)  # (M,)
        rows[s] = (np.conj(channels.g_rhs_ue[s]) * refl) @ channels.h_ap_rhs[s]
    return rows


def link_gains(channels, mask: ShapeMask, theta, w) -> np.ndarray:
    """Per-(s, k) complex gains for precoder columns w, shape (S, K)."""
    cols = getattr(w, "columns", w)
    rows = effective_rows(channels, mask, theta)  # (S, K, N_tr)
    return np.einsum("skn,nk->sk", rows, cols)


def select_shape(catalog: ShapeCatalog, channels, theta, precoder) -> tuple[int, ShapeMask]:
    """Exhaustively pick the catalog mask with the largest summed squared gain.

    Ties break toward the lowest catalog index.
    """
    best_index, best_total = 0, -np.inf
    for index, mask in enumerate(catalog.masks):
        total = float((np.abs(link_gains(channels, mask, theta, precoder)) ** 2).sum())
        if total > best_total:
            best_index, best_total = index, total
    return best_index, catalog.masks[best_index]
