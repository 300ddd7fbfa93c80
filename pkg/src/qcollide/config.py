"""Experiment configuration: TOML schema, validation, and object assembly.

A config file fully specifies a collision experiment: the internal system,
the initial product state, spatial/temporal interaction profiles, the
kinetic state, which models to run, and (optionally) a sweep. Parsing is
strict: unknown models, missing required sections, and physically invalid
values are reported with their config path.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import HBAR, CouplingOperator, DensityMatrix, InternalSystem, tensor_factorize
from .kinetics import KineticState, gaussian_mixed, gaussian_pure
from .maps import QuadratureSpec
from .potentials import SpatialPotential, TemporalPotential
from .spins import TwoSpinParams, build_two_spin

SCHEMA_VERSION = 1
MODELS = ("exact_sm", "random_unitary", "semiclassical", "time_dependent", "magnus1")
SWEEP_VARIABLES = ("lambda", "sigma_x")


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the config path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _get(table: dict, path: str, key: str, kind, required=True, default=None):
    if key not in table:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    value = table[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _matrix(table: dict, path: str, stem: str, required=True) -> np.ndarray | None:
    re_part = table.get(f"{stem}_re")
    if re_part is None:
        if required:
            raise ConfigError(f"{path}.{stem}_re", "missing required matrix")
        return None
    im_part = table.get(f"{stem}_im")
    try:
        m = np.asarray(re_part, dtype=float).astype(complex)
        if im_part is not None:
            m = m + 1j * np.asarray(im_part, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.{stem}", f"not a numeric matrix: {exc}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"{path}.{stem}", f"must be square, got shape {m.shape}")
    return m


@dataclass
class ExperimentConfig:
    """Validated experiment description (see README for the TOML schema)."""

    system: InternalSystem
    nu: CouplingOperator
    rho_a: DensityMatrix
    rho_b: DensityMatrix
    spatial: SpatialPotential | None
    temporal: TemporalPotential | None
    p0: float
    x0: float
    sigma_p: float
    sigma_x: float | None       # None -> pure packet
    mass: float
    models: tuple[str, ...]
    sweep_variable: str | None
    sweep_values: tuple[float, ...]
    quadrature: QuadratureSpec
    ode_tol: float
    output_dir: str
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def rho_joint(self) -> DensityMatrix:
        """Initial product state rotated into the internal eigenbasis."""
        prod = tensor_factorize(self.rho_a, self.rho_b)
        return DensityMatrix(self.system.to_eigenbasis(prod.matrix))

    @property
    def tau_p0(self) -> float:
        if self.spatial is None:
            raise ConfigError("potential.spatial", "needed to define the collision time")
        return self.mass * self.spatial.a / self.p0

    @property
    def lambda_reference_tau(self) -> float:
        """Time converting a coupling lambda into a height V0 = lambda/tau."""
        if self.temporal is not None:
            return self.temporal.tau
        return self.tau_p0

    def kinetic_state(self, sigma_x: float | None = None) -> KineticState:
        sx = self.sigma_x if sigma_x is None else sigma_x
        if sx is None:
            return gaussian_pure(self.p0, self.x0, self.sigma_p, self.mass)
        return gaussian_mixed(self.p0, self.x0, self.sigma_p, sx, self.mass)

    def with_lambda(self, lam: float) -> "ExperimentConfig":
        """Copy with both potential heights set to V0 = lambda*hbar/tau_ref."""
        v0 = lam * HBAR / self.lambda_reference_tau
        cfg = _shallow_copy(self)
        if cfg.spatial is not None:
            if cfg.spatial.kind == "sampled":
                raise ConfigError("sweep", "lambda sweeps need a parametric spatial kind")
            cfg.spatial = SpatialPotential(cfg.spatial.kind, cfg.spatial.a, v0)
        if cfg.temporal is not None:
            if cfg.temporal.kind == "sampled":
                raise ConfigError("sweep", "lambda sweeps need a parametric temporal kind")
            cfg.temporal = TemporalPotential(cfg.temporal.kind, cfg.temporal.tau, v0)
        return cfg

    def with_sigma_x(self, sigma_x: float) -> "ExperimentConfig":
        cfg = _shallow_copy(self)
        cfg.sigma_x = float(sigma_x)
        return cfg


def _shallow_copy(cfg: ExperimentConfig) -> ExperimentConfig:
    return ExperimentConfig(**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__})


def _build_system(table: dict) -> tuple[InternalSystem, CouplingOperator]:
    kind = _get(table, "system", "kind", str)
    if kind == "two_spin":
        params = TwoSpinParams(
            delta_a=_get(table, "system", "delta_a", float, required=False, default=0.75),
            delta_b=_get(table, "system", "delta_b", float, required=False, default=0.5),
            jx=_get(table, "system", "jx", float, required=False, default=0.8),
            jy=_get(table, "system", "jy", float, required=False, default=0.2),
        )
        return build_two_spin(params)
    if kind == "explicit":
        h_a = _matrix(table, "system", "h_a")
        h_b = _matrix(table, "system", "h_b")
        nu_m = _matrix(table, "system", "nu")
        try:
            system = InternalSystem.from_parts(h_a, h_b)
            nu = CouplingOperator(nu_m)
        except ValueError as exc:
            raise ConfigError("system", str(exc)) from None
        if nu.dim != system.dim:
            raise ConfigError("system.nu", "dimension does not match h_a ⊗ h_b")
        return system, nu
    raise ConfigError("system.kind", f"unknown kind {kind!r}")


def _pure_qubit(pop_up: float, phase: float, path: str) -> DensityMatrix:
    if not 0.0 <= pop_up <= 1.0:
        raise ConfigError(path, "population must lie in [0, 1]")
    coh = np.sqrt(pop_up * (1.0 - pop_up)) * np.exp(1j * phase)
    return DensityMatrix(np.array([
        [pop_up, coh],
        [np.conj(coh), 1.0 - pop_up],
    ]))


def _build_initial_state(table: dict, system: InternalSystem):
    kind = _get(table, "initial_state", "kind", str)
    if kind == "pure_product_qubits":
        if system.dim_a != 2 or system.dim_b != 2:
            raise ConfigError("initial_state.kind", "pure_product_qubits needs qubit factors")
        rho_a = _pure_qubit(
            _get(table, "initial_state", "pop_up_a", float),
            _get(table, "initial_state", "phase_a", float, required=False, default=0.0),
            "initial_state.pop_up_a")
        rho_b = _pure_qubit(
            _get(table, "initial_state", "pop_up_b", float),
            _get(table, "initial_state", "phase_b", float, required=False, default=0.0),
            "initial_state.pop_up_b")
        return rho_a, rho_b
    if kind == "explicit":
        try:
            rho_a = DensityMatrix(_matrix(table, "initial_state", "rho_a"))
            rho_b = DensityMatrix(_matrix(table, "initial_state", "rho_b"))
        except ValueError as exc:
            raise ConfigError("initial_state", str(exc)) from None
        if rho_a.dim != system.dim_a or rho_b.dim != system.dim_b:
            raise ConfigError("initial_state", "state dimensions do not match the system")
        return rho_a, rho_b
    raise ConfigError("initial_state.kind", f"unknown kind {kind!r}")


def _build_spatial(table: dict | None) -> SpatialPotential | None:
    if table is None:
        return None
    kind = _get(table, "potential.spatial", "kind", str)
    a = _get(table, "potential.spatial", "a", float)
    try:
        if kind == "sampled":
            return SpatialPotential(
                kind, a,
                xs=_get(table, "potential.spatial", "xs", list),
                vs=_get(table, "potential.spatial", "vs", list))
        return SpatialPotential(kind, a, _get(table, "potential.spatial", "v0", float))
    except ValueError as exc:
        raise ConfigError("potential.spatial", str(exc)) from None


def _build_temporal(table: dict | None) -> TemporalPotential | None:
    if table is None:
        return None
    kind = _get(table, "potential.temporal", "kind", str)
    tau = _get(table, "potential.temporal", "tau", float)
    try:
        if kind == "sampled":
            return TemporalPotential(
                kind, tau,
                ts=_get(table, "potential.temporal", "ts", list),
                vs=_get(table, "potential.temporal", "vs", list))
        return TemporalPotential(kind, tau, _get(table, "potential.temporal", "v0", float))
    except ValueError as exc:
        raise ConfigError("potential.temporal", str(exc)) from None


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment file."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(path, "config file not found") from None
    except tomllib.TOMLDecodeError as exc:
        # decode errors already carry line/column information
        raise ConfigError(path, f"TOML parse error: {exc}") from None
    return parse_config(raw)


def parse_config(raw: dict) -> ExperimentConfig:
    version = _get(raw, "", "schema_version", int)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version}")
    system_table = raw.get("system")
    if not isinstance(system_table, dict):
        raise ConfigError("system", "missing required table")
    system, nu = _build_system(system_table)
    state_table = raw.get("initial_state")
    if not isinstance(state_table, dict):
        raise ConfigError("initial_state", "missing required table")
    rho_a, rho_b = _build_initial_state(state_table, system)

    pot = raw.get("potential", {})
    spatial = _build_spatial(pot.get("spatial"))
    temporal = _build_temporal(pot.get("temporal"))

    kin = raw.get("kinetic", {})
    mass = _get(kin, "kinetic", "mass", float, required=False, default=1.0)
    if mass <= 0:
        raise ConfigError("kinetic.mass", "must be positive")
    p0 = _get(kin, "kinetic", "p0", float, required=False)
    if p0 is None:
        if temporal is not None and spatial is not None:
            p0 = mass * spatial.a / temporal.tau
        else:
            raise ConfigError("kinetic.p0", "required when no temporal drive fixes it")
    if p0 <= 0:
        raise ConfigError("kinetic.p0", "must be positive")
    x0 = _get(kin, "kinetic", "x0", float, required=False, default=0.0)
    sigma_p = _get(kin, "kinetic", "sigma_p", float, required=False)
    if sigma_p is None:
        span = system.span
        sigma_p = 100.0 * mass * span / p0 if span > 0 else 0.01 * p0
    if sigma_p <= 0:
        raise ConfigError("kinetic.sigma_p", "must be positive")
    sigma_x = _get(kin, "kinetic", "sigma_x", float, required=False)
    if sigma_x is not None and sigma_p * sigma_x < HBAR / 2 - 1e-12:
        raise ConfigError("kinetic.sigma_x", "violates the uncertainty bound hbar/2")

    models_table = raw.get("models", {})
    models = tuple(_get(models_table, "models", "run", list, required=False,
                        default=["semiclassical"]))
    for mdl in models:
        if mdl not in MODELS:
            raise ConfigError("models.run", f"unknown model {mdl!r}")
    needs_spatial = {"exact_sm", "random_unitary", "semiclassical"}
    if needs_spatial & set(models) and spatial is None:
        raise ConfigError("potential.spatial", "required by the requested models")
    if {"time_dependent", "magnus1"} & set(models) and temporal is None:
        raise ConfigError("potential.temporal", "required by the requested models")

    sweep_table = raw.get("sweep")
    sweep_variable = None
    sweep_values: tuple[float, ...] = ()
    if sweep_table is not None:
        sweep_variable = _get(sweep_table, "sweep", "variable", str)
        if sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError("sweep.variable", f"must be one of {SWEEP_VARIABLES}")
        values = _get(sweep_table, "sweep", "values", list)
        if not values:
            raise ConfigError("sweep.values", "must be non-empty")
        try:
            sweep_values = tuple(float(v) for v in values)
        except (TypeError, ValueError):
            raise ConfigError("sweep.values", "must be numeric") from None
        if sweep_variable == "sigma_x":
            for v in sweep_values:
                if sigma_p * v < HBAR / 2 - 1e-12:
                    raise ConfigError(
                        "sweep.values", f"sigma_x = {v:g} violates the uncertainty bound")

    quad_table = raw.get("quadrature", {})
    try:
        quadrature = QuadratureSpec(
            nodes=_get(quad_table, "quadrature", "nodes", int, required=False, default=128),
            n_sigma=_get(quad_table, "quadrature", "n_sigma", float, required=False, default=8.0),
            tol=_get(quad_table, "quadrature", "tol", float, required=False, default=1e-8),
            smatrix_mode=_get(quad_table, "quadrature", "smatrix_mode", str,
                              required=False, default="grid"),
            grid_points=_get(quad_table, "quadrature", "grid_points", int,
                             required=False, default=64),
        )
    except ValueError as exc:
        raise ConfigError("quadrature", str(exc)) from None

    tol_table = raw.get("tolerances", {})
    ode_tol = _get(tol_table, "tolerances", "ode_tol", float, required=False, default=1e-10)
    if ode_tol <= 0:
        raise ConfigError("tolerances.ode_tol", "must be positive")

    out_table = raw.get("output", {})
    output_dir = _get(out_table, "output", "dir", str, required=False, default=".")

    return ExperimentConfig(
        system=system, nu=nu, rho_a=rho_a, rho_b=rho_b,
        spatial=spatial, temporal=temporal,
        p0=float(p0), x0=float(x0), sigma_p=float(sigma_p),
        sigma_x=None if sigma_x is None else float(sigma_x),
        mass=float(mass), models=models,
        sweep_variable=sweep_variable, sweep_values=sweep_values,
        quadrature=quadrature, ode_tol=float(ode_tol), output_dir=output_dir,
        raw=raw,
    )
