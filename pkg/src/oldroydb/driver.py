"""Decoupled time loop: Stokes solve, then conformation update, per step."""

import io
import json
import logging
import struct
from dataclasses import dataclass, field, asdict

import numpy as np

from .constitutive import (
    DEFAULT_CHECK_THRESHOLD,
    UpdateParams,
    check_time_step,
    conformation_update,
)
from .errors import CheckpointError, ConfigError, TimeStepError
from .fields import ConfField, ScalarField, VectorField, sym_eigenvalues_components, vertex_averaged_gradient
from .mesh import Mesh, build_quadratic_graded_mesh, build_ratio_graded_mesh
from .postprocess import compute_metrics
from .stokes import LidProfile, assemble_rhs, assemble_stokes_matrix, solve_stokes

log = logging.getLogger("oldroydb")

_CHECKPOINT_MAGIC = b"OLDBCKPT"
_CHECKPOINT_VERSION = 1


@dataclass
class SimConfig:
    """Run parameters for a cavity simulation."""

    wi: float = 0.5
    beta: float = 0.5
    dt: float = 1e-3
    t_end: float = 10.0
    mesh_type: str = "ratio"  # 'ratio' or 'quadratic'
    mesh_n: int = 90
    mesh_gamma: float = 0.96
    lid_variant: str = "standard"
    lid_amplitude: float = 8.0
    steady_tol: float = 1e-6
    stop_when_steady: bool = False
    check_threshold: float = DEFAULT_CHECK_THRESHOLD
    output_dir: str = "out"
    output_every: int = 0  # emit cadence in steps; 0 = final state only
    checkpoint_every: int = 0
    samples: int = 512

    def __post_init__(self):
        if self.wi <= 0:
            raise ConfigError(f"wi must be positive, got {self.wi}")
        if not 0 < self.beta <= 1:
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ConfigError(f"t_end must be at least dt, got {self.t_end}")
        if self.mesh_type not in ("ratio", "quadratic"):
            raise ConfigError(f"mesh type must be 'ratio' or 'quadratic', got {self.mesh_type!r}")
        if self.mesh_n <= 0 or self.mesh_n % 2:
            raise ConfigError(f"mesh n must be even and positive, got {self.mesh_n}")
        if self.mesh_type == "ratio" and not 0 < self.mesh_gamma < 1:
            raise ConfigError(f"mesh gamma must lie in (0, 1), got {self.mesh_gamma}")
        if self.lid_variant not in ("standard", "as-printed"):
            raise ConfigError(f"lid variant must be 'standard' or 'as-printed', got {self.lid_variant!r}")
        if self.steady_tol <= 0:
            raise ConfigError(f"steady_tol must be positive, got {self.steady_tol}")
        if self.check_threshold <= 0:
            raise ConfigError(f"check_threshold must be positive, got {self.check_threshold}")
        if self.samples < 1:
            raise ConfigError(f"samples must be positive, got {self.samples}")

    def build_mesh(self) -> Mesh:
        if self.mesh_type == "ratio":
            return build_ratio_graded_mesh(self.mesh_n, self.mesh_gamma)
        return build_quadratic_graded_mesh(self.mesh_n)

    def lid_profile(self) -> LidProfile:
        return LidProfile(variant=self.lid_variant, amplitude=self.lid_amplitude)

    def as_dict(self):
        return asdict(self)


@dataclass
class SimState:
    """Simulation state after (or during) a run."""

    t: float
    step: int
    u: VectorField
    p: ScalarField
    conf: ConfField
    diagnostics: dict = field(default_factory=dict)


def steady_state_residual(prev: SimState, curr: SimState):
    """Discrete time-derivative norm: max-change of (u, conf) divided by dt."""
    dt = curr.t - prev.t
    if dt <= 0:
        raise ValueError("states must be consecutive in time")
    du = np.abs(curr.u.values - prev.u.values).max()
    ds = np.abs(curr.conf.values - prev.conf.values).max()
    return max(du, ds) / dt


def _state_diff(u_prev, conf_prev, u, conf, dt):
    du = np.abs(u.values - u_prev).max() if u_prev is not None else np.inf
    ds = np.abs(conf.values - conf_prev).max()
    return max(du, ds) / dt


def run_simulation(config: SimConfig, resume_state: SimState = None,
                   checkpoint_path=None, step_callback=None):
    """Run the decoupled scheme from t=0 (or a restored state) to t_end.

    Per step: assemble the lagged-conformation RHS, solve Stokes, verify
    the time-step check, update the conformation field.  Returns
    (SimState, Metrics).  Fatal numerical problems raise TimeStepError,
    ConformationError or SolverError with diagnostics attached.
    """
    mesh = config.build_mesh()
    profile = config.lid_profile()
    system = assemble_stokes_matrix(mesh, config.beta)
    system.factorize()
    params = UpdateParams(wi=config.wi, dt=config.dt)

    if resume_state is not None:
        rm = resume_state.conf.mesh
        if rm.n != mesh.n or not (
            np.array_equal(rm.x_coords, mesh.x_coords)
            and np.array_equal(rm.y_coords, mesh.y_coords)
        ):
            raise ConfigError(
                "checkpoint mesh does not match the configured mesh "
                f"({rm.n}x{rm.n} vs {mesh.n}x{mesh.n} or different grading)"
            )
        conf = resume_state.conf
        start_step = resume_state.step
        diagnostics = dict(resume_state.diagnostics)
    else:
        conf = ConfField.identity(mesh)
        start_step = 0
        diagnostics = {
            "min_lambda_min_over_steps": np.inf,
            "max_clamp_distance_over_steps": 0.0,
            "max_dt_measure": 0.0,
            "steady_step": None,
        }

    n_steps = int(round(config.t_end / config.dt))
    u_prev = None if resume_state is None else resume_state.u.values.copy()
    u = p = None
    t = start_step * config.dt
    for n in range(start_step + 1, n_steps + 1):
        t = n * config.dt
        rhs = assemble_rhs(system, conf, config.wi, t, profile)
        u, p = solve_stokes(system, rhs)
        grad_u = vertex_averaged_gradient(u)
        check = check_time_step(u, config.dt, config.check_threshold, grad_u=grad_u)
        diagnostics["max_dt_measure"] = max(diagnostics["max_dt_measure"], check.measure)
        if not check.passed:
            raise TimeStepError(
                f"time-step check violated at step {n}: dt*M = {check.measure:.3e} "
                f"> {check.threshold}",
                measure=check.measure,
            )
        step_diag = {}
        conf_prev_vals = conf.values
        conf = conformation_update(conf, u, params, grad_u=grad_u, diagnostics=step_diag)
        lo, _ = sym_eigenvalues_components(conf.values[:, 0], conf.values[:, 1], conf.values[:, 2])
        lam_min = float(lo.min())
        diagnostics["min_lambda_min_over_steps"] = min(
            diagnostics["min_lambda_min_over_steps"], lam_min
        )
        diagnostics["max_clamp_distance_over_steps"] = max(
            diagnostics["max_clamp_distance_over_steps"], step_diag["max_clamp_distance"]
        )
        residual = _state_diff(u_prev, conf_prev_vals, u, conf, config.dt)
        u_prev = u.values.copy()
        log.info(
            "step %d t=%.6g residual=%.3e lambda_min=%.3e clamp=%.3e solver_res=%.3e",
            n, t, residual, lam_min, step_diag["max_clamp_distance"],
            system.last_solve_info.get("relative_residual", float("nan")),
        )
        if step_callback is not None:
            step_callback(n, t, residual, lam_min)
        if checkpoint_path and config.checkpoint_every and n % config.checkpoint_every == 0:
            checkpoint(SimState(t, n, u, p, conf, diagnostics), checkpoint_path)
        if residual < config.steady_tol and diagnostics["steady_step"] is None:
            diagnostics["steady_step"] = n
            log.info("steady state detected at step %d (t=%.6g)", n, t)
            if config.stop_when_steady:
                break

    if u is None:
        # resumed at or past t_end; solve once for a consistent velocity snapshot
        rhs = assemble_rhs(system, conf, config.wi, t, profile)
        u, p = solve_stokes(system, rhs)
    state = SimState(t=t, step=int(round(t / config.dt)), u=u, p=p, conf=conf,
                     diagnostics=diagnostics)
    metrics = compute_metrics(u, conf)
    return state, metrics


def checkpoint(state: SimState, path):
    """Write a lossless binary snapshot with a versioned header."""
    buf = io.BytesIO()
    np.savez(
        buf,
        x_coords=state.u.mesh.x_coords,
        y_coords=state.u.mesh.y_coords,
        u=state.u.values,
        p=state.p.values,
        conf=state.conf.values,
    )
    payload = buf.getvalue()
    meta = json.dumps(
        {
            "t": state.t,
            "step": state.step,
            "diagnostics": {
                k: (v if v is None or isinstance(v, int) else float(v))
                for k, v in state.diagnostics.items()
            },
        }
    ).encode()
    with open(path, "wb") as fh:
        fh.write(_CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", _CHECKPOINT_VERSION, len(meta)))
        fh.write(meta)
        fh.write(payload)


def restore(path) -> SimState:
    """Read a checkpoint written by ``checkpoint``; validates the header."""
    try:
        with open(path, "rb") as fh:
            magic = fh.read(len(_CHECKPOINT_MAGIC))
            if magic != _CHECKPOINT_MAGIC:
                raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
            header = fh.read(8)
            if len(header) != 8:
                raise CheckpointError(f"{path}: truncated header")
            version, meta_len = struct.unpack("<II", header)
            if version != _CHECKPOINT_VERSION:
                raise CheckpointError(
                    f"{path}: unsupported checkpoint version {version}"
                )
            meta_raw = fh.read(meta_len)
            if len(meta_raw) != meta_len:
                raise CheckpointError(f"{path}: truncated metadata")
            meta = json.loads(meta_raw)
            payload = fh.read()
        arrays = np.load(io.BytesIO(payload))
        mesh = Mesh(arrays["x_coords"], arrays["y_coords"])
        inf = np.inf
        diag = meta.get("diagnostics", {})
        if "min_lambda_min_over_steps" in diag and diag["min_lambda_min_over_steps"] is None:
            diag["min_lambda_min_over_steps"] = inf
        return SimState(
            t=float(meta["t"]),
            step=int(meta["step"]),
            u=VectorField(mesh, arrays["u"]),
            p=ScalarField(mesh, arrays["p"]),
            conf=ConfField(mesh, arrays["conf"]),
            diagnostics=diag,
        )
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointError(f"{path}: failed to restore checkpoint: {exc}") from exc
