"""Simulation configuration: a flat INI-style document with typed sections.

Unknown keys, duplicate keys, and malformed values are hard errors that name
the offending key and line, so silently misspelled settings cannot skew a
sweep. Every field except the problem dimensions has a default.

Example document::

    [dims]
    s = 2
    k = 3
    m_x = 8
    m_y = 8
    n_tr = 8

    [power]
    p_max_dbm = 20..45 step 5

    [run]
    schemes = adaptive, fixed, quantized-2bit, zf_random
    trials = 50
    seed = 7
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass

import numpy as np

from .ao import SolverOptions
from .baselines import BaselineKind
from .channel import NetworkLayout, PathLossModel, dbm_to_watts, default_layout
from .shapes import ShapeCatalog, make_mask

__all__ = ["ConfigError", "SimConfig", "parse_config", "parse_scheme", "parse_shape_token"]

DEFAULT_SHAPES = ("rect:10x6@0,0", "strip_row:60@0,0")
DEFAULT_SCHEMES = ("adaptive", "fixed", "quantized-2bit", "zf_random")

_SCHEMA = {
    "dims": {"s", "k", "m_x", "m_y", "n_tr"},
    "channel": {"rho_a", "rho_b", "sigma_delta", "noise_dbm", "kappa", "eta"},
    "layout": {"ap", "rhs_positions", "rhs_circle_center", "rhs_circle_radius", "ue_center", "ue_radius"},
    "catalog": {"shapes"},
    "power": {"p_max_dbm", "p_thr_dbm", "weights"},
    "run": {"schemes", "trials", "seed", "timing"},
    "solver": {"tol_outer", "max_outer_iters", "passive_tol", "passive_max_iters", "enforce_min_power"},
}


class ConfigError(ValueError):
    """Raised for any malformed, unknown, duplicate, or missing setting."""


def _line_of(text: str, key: str) -> int:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]", re.IGNORECASE)
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return number
    return 0


def _fail(text: str, key: str, reason: str):
    line = _line_of(text, key)
    where = f" (line {line})" if line else ""
    raise ConfigError(f"config key '{key}'{where}: {reason}")


@dataclass(frozen=True)
class SimConfig:
    # dims
    s: int
    k: int
    m_x: int
    m_y: int
    n_tr: int
    # channel statistics
    rho_a: float = 61.4
    rho_b: float = 2.0
    sigma_delta: float = 5.8
    noise_dbm: float = -85.0
    kappa: float = 2.0
    eta: float = 1.0
    # geometry
    ap: tuple[float, float] = (0.0, 0.0)
    rhs_positions: tuple[tuple[float, float], ...] | None = None
    rhs_circle_center: tuple[float, float] = (20.0, 0.0)
    rhs_circle_radius: float = 20.0
    ue_center: tuple[float, float] = (40.0, 0.0)
    ue_radius: float = 10.0
    # mask catalog and schemes
    shapes: tuple[str, ...] = DEFAULT_SHAPES
    schemes: tuple[str, ...] = DEFAULT_SCHEMES
    # powers
    p_max_dbm: tuple[float, ...] = (30.0,)
    p_thr_dbm: float = 20.0
    weights: tuple[float, ...] | None = None
    # sweep control
    trials: int = 1
    seed: int = 0
    timing: bool = True
    # solver knobs
    tol_outer: float = 1e-4
    max_outer_iters: int = 100
    passive_tol: float = 1e-6
    passive_max_iters: int = 500
    enforce_min_power: bool = False

    def __post_init__(self):
        if min(self.s, self.k, self.m_x, self.m_y, self.n_tr) < 1:
            raise ConfigError("all dims must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.p_max_dbm:
            raise ConfigError("p_max_dbm list must not be empty")
        for name in ("rho_a", "rho_b", "sigma_delta", "noise_dbm", "p_thr_dbm"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not all(np.isfinite(self.p_max_dbm)):
            raise ConfigError("p_max_dbm values must be finite")
        if self.weights is not None and len(self.weights) != self.k:
            raise ConfigError(f"weights must list one value per user (k = {self.k})")
        if not self.schemes:
            raise ConfigError("schemes list must not be empty")
        for token in self.schemes:
            parse_scheme(token)

    @property
    def grid(self) -> tuple[int, int]:
        return (self.m_x, self.m_y)

    @property
    def m_elems(self) -> int:
        return self.m_x * self.m_y

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.s, self.k, self.m_elems, self.n_tr)

    def path_loss_model(self) -> PathLossModel:
        return PathLossModel(rho_a=self.rho_a, rho_b=self.rho_b, sigma_delta=self.sigma_delta)

    def build_layout(self) -> NetworkLayout:
        if self.rhs_positions is not None:
            return NetworkLayout(
                ap_position=np.asarray(self.ap, dtype=float),
                rhs_positions=np.asarray(self.rhs_positions, dtype=float),
                ue_center=np.asarray(self.ue_center, dtype=float),
                ue_radius=self.ue_radius,
                path_loss_exponent=self.kappa,
            )
        return default_layout(
            num_surfaces=self.s,
            ap_position=self.ap,
            rhs_circle_center=self.rhs_circle_center,
            rhs_circle_radius=self.rhs_circle_radius,
            ue_center=self.ue_center,
            ue_radius=self.ue_radius,
            path_loss_exponent=self.kappa,
        )

    def build_catalog(self) -> ShapeCatalog:
        masks = [parse_shape_token(token, self.grid) for token in self.shapes]
        return ShapeCatalog(masks=tuple(masks))

    def solver_options(self, p_max_dbm: float) -> SolverOptions:
        return SolverOptions(
            p_max=dbm_to_watts(p_max_dbm),
            weights=None if self.weights is None else np.asarray(self.weights, dtype=float),
            p_thr=dbm_to_watts(self.p_thr_dbm),
            tol_outer=self.tol_outer,
            max_outer_iters=self.max_outer_iters,
            passive_tol=self.passive_tol,
            passive_max_iters=self.passive_max_iters,
            eta=self.eta,
            enforce_min_power=self.enforce_min_power,
        )


def parse_shape_token(token: str, grid: tuple[int, int]):
    """Build a mask from a compact token like ``rect:4x2@1,3`` or ``strip_row:8``."""
    token = token.strip()
    match = re.fullmatch(r"(\w+):([\dx]+)(?:@(\d+),(\d+))?", token)
    if not match:
        raise ConfigError(f"malformed shape token {token!r}")
    kind, size, arow, acol = match.groups()
    anchor = (int(arow or 0), int(acol or 0))
    try:
        if kind == "rect":
            width, height = (int(part) for part in size.split("x"))
            return make_mask("rectangle", grid, width=width, height=height, anchor=anchor, label=token)
        if kind in ("strip_row", "strip_col"):
            return make_mask(kind, grid, length=int(size), anchor=anchor, label=token)
        if kind == "circle":
            return make_mask(kind, grid, radius=int(size), anchor=anchor, label=token)
    except ValueError as err:
        raise ConfigError(f"shape token {token!r}: {err}") from err
    raise ConfigError(f"unknown shape kind in token {token!r}")


def parse_scheme(token: str) -> BaselineKind | None:
    """Map a scheme token to a baseline kind; None means the adaptive scheme.

    Tokens: ``adaptive``, ``fixed``, ``quantized-<B>bit``, ``zf_random``,
    each optionally suffixed ``:<mask_index>``.
    """
    token = token.strip()
    name, _, index_text = token.partition(":")
    mask_index = int(index_text) if index_text else 0
    if name == "adaptive":
        if index_text:
            raise ConfigError("the adaptive scheme takes no mask index")
        return None
    if name == "fixed":
        return BaselineKind(kind="fixed_shape", mask_index=mask_index)
    if name == "zf_random":
        return BaselineKind(kind="zf_random", mask_index=mask_index)
    match = re.fullmatch(r"quantized-(\d+)bit", name)
    if match:
        return BaselineKind(kind="quantized", mask_index=mask_index, bits=int(match.group(1)))
    raise ConfigError(f"unknown scheme token {token!r}")


def _as_int(text, key, value) -> int:
    try:
        return int(value)
    except ValueError:
        _fail(text, key, f"expected an integer, got {value!r}")


def _as_float(text, key, value) -> float:
    try:
        return float(value)
    except ValueError:
        _fail(text, key, f"expected a number, got {value!r}")


def _as_bool(text, key, value) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    _fail(text, key, f"expected a boolean, got {value!r}")


def _as_pair(text, key, value) -> tuple[float, float]:
    parts = [part.strip() for part in value.split(",")]
    if len(parts) != 2:
        _fail(text, key, f"expected 'x,y', got {value!r}")
    return (_as_float(text, key, parts[0]), _as_float(text, key, parts[1]))


def _as_pairs(text, key, value) -> tuple[tuple[float, float], ...]:
    return tuple(_as_pair(text, key, chunk) for chunk in value.split(";") if chunk.strip())


def _as_str_list(value) -> tuple[str, ...]:
    return tuple(part.strip() for part in value.split(",") if part.strip())


def _as_float_list(text, key, value) -> tuple[float, ...]:
    """Comma list, or an inclusive range written ``start..stop step increment``."""
    range_match = re.fullmatch(r"\s*(-?[\d.]+)\s*\.\.\s*(-?[\d.]+)\s+step\s+(-?[\d.]+)\s*", value)
    if range_match:
        start, stop, step = (float(part) for part in range_match.groups())
        if step <= 0:
            _fail(text, key, "range step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            _fail(text, key, "empty range")
        return tuple(start + i * step for i in range(count))
    return tuple(_as_float(text, key, part) for part in _as_str_list(value))


def parse_config(text: str) -> SimConfig:
    """Parse and validate a configuration document into a SimConfig."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as err:
        raise ConfigError(f"duplicate config key '{err.option}' (line {err.lineno})") from err
    except configparser.DuplicateSectionError as err:
        raise ConfigError(f"duplicate config section '{err.section}' (line {err.lineno})") from err
    except configparser.Error as err:
        raise ConfigError(f"malformed config: {err}") from err

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section '{section}'")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                line = _line_of(text, key)
                where = f" (line {line})" if line else ""
                raise ConfigError(f"unknown config key '{key}' in [{section}]{where}")

    if "dims" not in parser:
        raise ConfigError("missing required section 'dims' (keys s, k, m_x, m_y, n_tr)")
    missing = _SCHEMA["dims"] - set(parser["dims"])
    if missing:
        raise ConfigError(f"section 'dims' is missing required keys: {sorted(missing)}")

    def get(section, key, default=None):
        if section in parser and key in parser[section]:
            return parser[section][key]
        return default

    kwargs: dict = {name: _as_int(text, name, parser["dims"][name]) for name in _SCHEMA["dims"]}

    for key in ("rho_a", "rho_b", "sigma_delta", "noise_dbm", "kappa", "eta"):
        raw = get("channel", key)
        if raw is not None:
            kwargs[key] = _as_float(text, key, raw)

    if (raw := get("layout", "ap")) is not None:
        kwargs["ap"] = _as_pair(text, "ap", raw)
    if (raw := get("layout", "rhs_positions")) is not None:
        kwargs["rhs_positions"] = _as_pairs(text, "rhs_positions", raw)
    if (raw := get("layout", "rhs_circle_center")) is not None:
        kwargs["rhs_circle_center"] = _as_pair(text, "rhs_circle_center", raw)
    if (raw := get("layout", "rhs_circle_radius")) is not None:
        kwargs["rhs_circle_radius"] = _as_float(text, "rhs_circle_radius", raw)
    if (raw := get("layout", "ue_center")) is not None:
        kwargs["ue_center"] = _as_pair(text, "ue_center", raw)
    if (raw := get("layout", "ue_radius")) is not None:
        kwargs["ue_radius"] = _as_float(text, "ue_radius", raw)

    if (raw := get("catalog", "shapes")) is not None:
        kwargs["shapes"] = _as_str_list(raw)

    if (raw := get("power", "p_max_dbm")) is not None:
        kwargs["p_max_dbm"] = _as_float_list(text, "p_max_dbm", raw)
    if (raw := get("power", "p_thr_dbm")) is not None:
        kwargs["p_thr_dbm"] = _as_float(text, "p_thr_dbm", raw)
    if (raw := get("power", "weights")) is not None:
        kwargs["weights"] = _as_float_list(text, "weights", raw)

    if (raw := get("run", "schemes")) is not None:
        kwargs["schemes"] = _as_str_list(raw)
    if (raw := get("run", "trials")) is not None:
        kwargs["trials"] = _as_int(text, "trials", raw)
    if (raw := get("run", "seed")) is not None:
        kwargs["seed"] = _as_int(text, "seed", raw)
    if (raw := get("run", "timing")) is not None:
        kwargs["timing"] = _as_bool(text, "timing", raw)

    if (raw := get("solver", "tol_outer")) is not None:
        kwargs["tol_outer"] = _as_float(text, "tol_outer", raw)
    if (raw := get("solver", "max_outer_iters")) is not None:
        kwargs["max_outer_iters"] = _as_int(text, "max_outer_iters", raw)
    if (raw := get("solver", "passive_tol")) is not None:
        kwargs["passive_tol"] = _as_float(text, "passive_tol", raw)
    if (raw := get("solver", "passive_max_iters")) is not None:
        kwargs["passive_max_iters"] = _as_int(text, "passive_max_iters", raw)
    if (raw := get("solver", "enforce_min_power")) is not None:
        kwargs["enforce_min_power"] = _as_bool(text, "enforce_min_power", raw)

    try:
        config = SimConfig(**kwargs)
        config.build_catalog()  # surface bad shape tokens at parse time
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err)) from err
    return config
