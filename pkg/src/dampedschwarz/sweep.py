"""Parameter sweeps of the convergence factor and the figure presets.

A :class:`SweepConfig` fixes everything but one axis (``r``, ``gamma``,
``omega``, ``N`` or ``L``) and yields one curve ``rho(xi)`` per axis value.
Presets are lists of such panels. Legend values are choices of this package:

    r in {0, 0.1, 1, 10, 100}, gamma in {1e-8, ..., 1e-3},
    omega in {25, 50, 100, 200, 400}, N in {2, 4, 8, 16, 32},
    L in {0, 1/(3 omega), 2/(3 omega)} or L = c/N with c = 0.1.
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .geometry import build_decomposition
from .mode_analysis import boundary_preset, convergence_factor_profile, physical_modes, scan_grid
from .model import PhysicalParams

__all__ = [
    "AXES",
    "L_RULES",
    "ConfigError",
    "SweepConfig",
    "PRESETS",
    "preset_panels",
    "load_config",
    "config_from_dict",
    "curve_rows",
    "run_sweep",
]

AXES = ("r", "gamma", "omega", "N", "L")
L_RULES = ("fixed", "1/(3omega)", "c/N")
R_VALUES = (0.0, 0.1, 1.0, 10.0, 100.0)
GAMMA_VALUES = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3)
OMEGA_VALUES = (25.0, 50.0, 100.0, 200.0, 400.0)
N_VALUES = (2, 4, 8, 16, 32)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    values: tuple
    bc: str = "waveguide"
    omega: float = 100.0
    r: float = 0.0
    gamma: float = 0.0
    N: int = 2
    L: float = 0.0
    L_rule: str = "fixed"
    c: float = 0.1
    modes: str = "scan"
    xi_max_ratio: float = 2.0
    xi_points: int = 400
    seed: int = 0
    preset: str = "custom"
    panel: str = "main"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis: expected one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("values: list must be nonempty")
        if self.L_rule not in L_RULES:
            raise ConfigError(f"L_rule: expected one of {L_RULES}, got {self.L_rule!r}")
        if self.axis == "L" and self.L_rule != "fixed":
            raise ConfigError("L_rule: must be 'fixed' when sweeping L")
        if self.modes not in ("scan", "physical"):
            raise ConfigError(f"modes: expected 'scan' or 'physical', got {self.modes!r}")
        if self.xi_points < 1 or self.xi_max_ratio <= 0:
            raise ConfigError("xi grid: need xi_points >= 1 and xi_max_ratio > 0")
        try:
            boundary_preset(self.bc)
        except ValueError as exc:
            raise ConfigError(f"bc: {exc}") from None
        # reject invalid combinations before any compute
        for v in self.values:
            try:
                p, N, L = self.point(v)
                build_decomposition(N, L)
            except ValueError as exc:
                raise ConfigError(f"values: {self.axis}={v!r}: {exc}") from None

    def point(self, value):
        """``(params, N, L)`` for one value of the swept axis."""
        kw = {"omega": self.omega, "r": self.r, "gamma": self.gamma, "N": self.N, "L": self.L}
        kw[self.axis] = value
        params = PhysicalParams(float(kw["omega"]), float(kw["r"]), float(kw["gamma"]))
        N = int(kw["N"])
        if self.axis == "L" or self.L_rule == "fixed":
            L = float(kw["L"])
        elif self.L_rule == "1/(3omega)":
            L = 1.0 / (3.0 * params.omega)
        else:
            L = self.c / N
        return params, N, L

    def xi_grid(self, omega: float):
        if self.modes == "physical":
            return physical_modes(omega)
        return scan_grid(omega, self.xi_max_ratio, self.xi_points)

    def label(self, value) -> str:
        name = {"gamma": "gamma", "omega": "omega"}.get(self.axis, self.axis)
        return f"{name}={value:g}"

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["values"] = list(self.values)
        return d


def curve_rows(config: SweepConfig, value) -> list[dict]:
    """CSV rows for one curve of a panel."""
    params, N, L = config.point(value)
    decomp = build_decomposition(N, L)
    bc = boundary_preset(config.bc)
    rows = []
    for pt in convergence_factor_profile(params, decomp, bc, config.xi_grid(params.omega)):
        rows.append(
            {
                "preset": config.preset,
                "bc": config.bc,
                "omega": params.omega,
                "r": params.r,
                "gamma": params.gamma,
                "N": N,
                "L_nominal": L,
                "L_effective": L,
                "xi": pt.xi,
                "xi_over_omega": pt.xi / params.omega,
                "rho": pt.rho,
                "diverged": not math.isfinite(pt.rho),
                "note": pt.note,
            }
        )
    return rows


def _curve_task(args):
    config, value = args
    return curve_rows(config, value)


def run_sweep(panels: Sequence[SweepConfig], workers: int = 1) -> list[list[list[dict]]]:
    """Rows for every curve, nested as ``[panel][curve][row]``.

    Results are gathered in input order, so output does not depend on
    ``workers``.
    """
    tasks = [(cfg, v) for cfg in panels for v in cfg.values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_curve_task, tasks))
    else:
        flat = [_curve_task(t) for t in tasks]
    out, pos = [], 0
    for cfg in panels:
        out.append(flat[pos : pos + len(cfg.values)])
        pos += len(cfg.values)
    return out


def _first_order_family(name: str, bc: str) -> list[SweepConfig]:
    base = dict(bc=bc, preset=name)
    return [
        SweepConfig("omega", OMEGA_VALUES, r=0.0, N=2, L_rule="1/(3omega)", panel="omega_r0_N2", **base),
        SweepConfig("omega", OMEGA_VALUES, r=1.0, N=2, L_rule="1/(3omega)", panel="omega_r1_N2", **base),
        SweepConfig("omega", OMEGA_VALUES, r=1.0, N=8, L_rule="1/(3omega)", panel="omega_r1_N8", **base),
        SweepConfig("N", N_VALUES, r=0.0, L_rule="c/N", panel="N_r0", **base),
        SweepConfig("N", N_VALUES, r=1.0, L_rule="c/N", panel="N_r1", **base),
        SweepConfig("N", N_VALUES, r=10.0, L_rule="c/N", panel="N_r10", **base),
        SweepConfig("L", (0.0, 1 / 300, 2 / 300), r=1.0, N=2, panel="L_r1_N2", **base),
        SweepConfig("L", (0.0, 1 / 300, 2 / 300), r=1.0, N=8, panel="L_r1_N8", **base),
        SweepConfig("L", (0.0, 1 / 300, 2 / 300), r=1.0, N=32, panel="L_r1_N32", **base),
    ]


def _viscoelastic_family(name: str, bc: str) -> list[SweepConfig]:
    base = dict(bc=bc, preset=name)
    return [
        SweepConfig("omega", OMEGA_VALUES, gamma=1e-4, N=2, L_rule="1/(3omega)", panel="omega_g1e-4_N2", **base),
        SweepConfig("omega", OMEGA_VALUES, gamma=1e-3, N=2, L_rule="1/(3omega)", panel="omega_g1e-3_N2", **base),
        SweepConfig("omega", OMEGA_VALUES, gamma=1e-3, N=8, L_rule="1/(3omega)", panel="omega_g1e-3_N8", **base),
        SweepConfig("N", N_VALUES, gamma=1e-4, L_rule="c/N", panel="N_g1e-4", **base),
        SweepConfig("N", N_VALUES, gamma=1e-3, L_rule="c/N", panel="N_g1e-3", **base),
        SweepConfig("N", N_VALUES, gamma=1e-3, omega=200.0, L_rule="c/N", panel="N_g1e-3_w200", **base),
        SweepConfig("L", (0.0, 1 / 300, 2 / 300), gamma=1e-3, N=2, panel="L_g1e-3_N2", **base),
        SweepConfig("L", (0.0, 1 / 300, 2 / 300), gamma=1e-3, N=8, panel="L_g1e-3_N8", **base),
        SweepConfig("L", (0.0, 1 / 300, 2 / 300), gamma=1e-3, N=32, panel="L_g1e-3_N32", **base),
    ]


def _r_family(name: str, bc: str) -> list[SweepConfig]:
    base = dict(bc=bc, preset=name, omega=100.0, N=2)
    return [
        SweepConfig("r", R_VALUES, L=0.0, panel="L0", **base),
        SweepConfig("r", R_VALUES, L=1 / 300, panel="L1_300", **base),
        SweepConfig("r", (10.0, 30.0, 100.0, 300.0), L=1 / 300, panel="large_r", **base),
    ]


def _gamma_family(name: str, bc: str) -> list[SweepConfig]:
    base = dict(bc=bc, preset=name, omega=100.0)
    return [
        SweepConfig("gamma", GAMMA_VALUES, N=2, L=0.0, panel="L0", **base),
        SweepConfig("gamma", GAMMA_VALUES, N=2, L=1 / 300, panel="L1_300", **base),
        SweepConfig("gamma", GAMMA_VALUES, N=8, L=1 / 300, panel="N8_L1_300", **base),
    ]


PRESETS = {
    "fig1": lambda: _r_family("fig1", "waveguide"),
    "fig24": lambda: _first_order_family("fig24", "waveguide"),
    "fig5": lambda: _gamma_family("fig5", "waveguide"),
    "fig68": lambda: _viscoelastic_family("fig68", "waveguide"),
    "fig9": lambda: _r_family("fig9", "cavity"),
    "fig1012": lambda: _first_order_family("fig1012", "cavity"),
    "fig13": lambda: _gamma_family("fig13", "cavity"),
    "fig1416": lambda: _viscoelastic_family("fig1416", "cavity"),
}


def preset_panels(name: str, **overrides) -> list[SweepConfig]:
    """Panels of a preset with base-field overrides (never the swept axis)."""
    try:
        panels = PRESETS[name]()
    except KeyError:
        raise ConfigError(f"preset: unknown {name!r}; choose from {sorted(PRESETS)}") from None
    out = []
    for cfg in panels:
        kw = {k: v for k, v in overrides.items() if v is not None and k != cfg.axis}
        if "L" in kw and cfg.L_rule != "fixed":
            kw["L_rule"] = "fixed"
        out.append(replace(cfg, **kw))
    return out


_FIELDS = {f.name: f for f in dataclasses.fields(SweepConfig)}


def config_from_dict(data: dict) -> list[SweepConfig]:
    """Panels from a parsed config: either ``{"preset": ...}`` or one panel's fields,
    or ``{"panels": [...]}``."""
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    if "panels" in data:
        extra = set(data) - {"panels"}
        if extra:
            raise ConfigError(f"config: unexpected fields next to 'panels': {sorted(extra)}")
        panels = []
        for i, item in enumerate(data["panels"]):
            try:
                panels.extend(config_from_dict(item))
            except ConfigError as exc:
                raise ConfigError(f"panels[{i}].{exc}") from None
        return panels
    unknown = set(data) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown field")
    if "axis" not in data and "preset" in data:
        return preset_panels(data["preset"], **{k: v for k, v in data.items() if k != "preset"})
    for name in ("axis", "values"):
        if name not in data:
            raise ConfigError(f"{name}: required field missing")
    kw = dict(data)
    if not isinstance(kw["values"], (list, tuple)):
        raise ConfigError("values: must be a list")
    kw["values"] = tuple(kw["values"])
    for name, value in kw.items():
        if name in ("omega", "r", "gamma", "L", "c", "xi_max_ratio") and not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        if name in ("N", "xi_points", "seed") and not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
    return [SweepConfig(**kw)]


def load_config(path) -> list[SweepConfig]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def iter_rows(nested: Iterable) -> Iterable[dict]:
    for curve in nested:
        yield from curve
