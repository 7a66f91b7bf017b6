"""Planar benchmark systems, trajectory integration, and snapshot datasets.

Four two-state vector fields with fixed literature constants, a classical RK4
integrator with a fixed internal substep (deterministic, no adaptivity), and
helpers that assemble (input, target) snapshot matrices for the solver.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    DivergenceError,
    DomainError,
    ParameterDomainError,
)

DIVERGENCE_LIMIT = 1e9
DEFAULT_SUBSTEP = 1e-3


class SystemId(str, Enum):
    VAN_DER_POL = "vanderpol"
    DUFFING = "duffing"
    PREDATOR_PREY = "predatorprey"
    TOGGLE_SWITCH = "toggleswitch"


# Default constants, in the order each right-hand side consumes them.
DEFAULT_CONSTANTS = {
    SystemId.VAN_DER_POL: (1.0,),
    SystemId.DUFFING: (0.0, -1.0, 1.0),
    SystemId.PREDATOR_PREY: (1.1, 0.5, 0.1, 0.2),
    SystemId.TOGGLE_SWITCH: (2.5, 1.5, 1.4, 1.1, 0.25),
}

# Initial-condition boxes covering the attractors at the default constants.
DEFAULT_IC_BOX = {
    SystemId.VAN_DER_POL: ((-2.0, 2.0), (-2.0, 2.0)),
    SystemId.DUFFING: ((-2.0, 2.0), (-2.0, 2.0)),
    SystemId.PREDATOR_PREY: ((0.5, 3.0), (0.5, 3.0)),
    SystemId.TOGGLE_SWITCH: ((0.0, 4.0), (0.0, 4.0)),
}


@dataclass(frozen=True)
class SystemSpec:
    id: SystemId
    constants: tuple = None
    state_dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "id", SystemId(self.id))
        if self.constants is None:
            object.__setattr__(self, "constants", DEFAULT_CONSTANTS[self.id])
        else:
            object.__setattr__(self, "constants", tuple(self.constants))
        if len(self.constants) != len(DEFAULT_CONSTANTS[self.id]):
            raise ParameterDomainError(
                f"{self.id.value} takes {len(DEFAULT_CONSTANTS[self.id])} constants"
            )

    @staticmethod
    def default(system_id):
        return SystemSpec(SystemId(system_id))


def _rhs_batch(s, X):
    """Vector field on a batch of states, shape (r, 2) -> (r, 2).

    Uses elementwise numpy ops only, so one row's arithmetic is identical
    whether integrated alone or inside any batch (bitwise determinism).
    """
    x1, x2 = X[:, 0], X[:, 1]
    out = np.empty_like(X)
    if s.id == SystemId.VAN_DER_POL:
        (c1,) = s.constants
        out[:, 0] = x2
        out[:, 1] = c1 * (1.0 - x1 * x1) * x2 - x1
    elif s.id == SystemId.DUFFING:
        c2, c3, c4 = s.constants
        out[:, 0] = x2
        out[:, 1] = -c2 * x2 - x1 * (c3 + c4 * x1 * x1)
    elif s.id == SystemId.PREDATOR_PREY:
        c5, c6, c7, c8 = s.constants
        out[:, 0] = c5 * x1 - c6 * x1 * x2
        out[:, 1] = c7 * x1 * x2 - c8 * x2
    else:
        if np.any(X < 0):
            raise DomainError(
                "toggleswitch state must be nonnegative (non-integer Hill powers)"
            )
        c9, c10, c11, c12, c13 = s.constants
        out[:, 0] = c9 / (1.0 + x2**c11) - c13 * x1
        out[:, 1] = c10 / (1.0 + x1**c12) - c13 * x2
    return out


def system_rhs(s, x):
    """Vector field at one state."""
    x = np.asarray(x, dtype=float)
    if x.shape != (s.state_dim,):
        raise DomainError(f"expected state of shape ({s.state_dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError(f"non-finite state {x}")
    return _rhs_batch(s, x[None, :])[0]


@dataclass
class Trajectory:
    dt: float
    states: np.ndarray  # (steps+1, state_dim)
    system: SystemSpec
    seed_provenance: int = -1

    def __len__(self):
        return self.states.shape[0]


def _rk4_batch(s, X0, dt, steps, max_substep):
    """RK4 on a batch of initial states; returns (steps+1, r, 2)."""
    n_sub = max(1, math.ceil(dt / max_substep - 1e-12))
    h = dt / n_sub
    out = np.empty((steps + 1,) + X0.shape)
    out[0] = X0
    x = X0.copy()
    for step in range(steps):
        for _ in range(n_sub):
            k1 = _rhs_batch(s, x)
            k2 = _rhs_batch(s, x + (0.5 * h) * k1)
            k3 = _rhs_batch(s, x + (0.5 * h) * k2)
            k4 = _rhs_batch(s, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(~np.isfinite(x)) or np.any(np.abs(x) > DIVERGENCE_LIMIT):
            raise DivergenceError(
                f"{s.id.value} state exceeded {DIVERGENCE_LIMIT:g} at step {step + 1}",
                step_index=step + 1,
            )
        out[step + 1] = x
    return out


def integrate(s, x0, dt, steps, max_substep=DEFAULT_SUBSTEP):
    """Integrate one trajectory; states recorded every dt."""
    if dt <= 0 or not np.isfinite(dt):
        raise DomainError(f"dt must be finite and > 0, got {dt}")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (s.state_dim,):
        raise DomainError(f"expected x0 of shape ({s.state_dim},), got {x0.shape}")
    if not np.all(np.isfinite(x0)):
        raise DataError(f"non-finite initial state {x0}")
    path = _rk4_batch(s, x0[None, :], dt, steps, max_substep)
    return Trajectory(dt=dt, states=path[:, 0, :], system=s)


def sample_initial_conditions(s, n, seed, box=None):
    """n uniform initial conditions; trajectory i draws from the stream
    seeded by (seed, i), so any subset reproduces identically."""
    box = box if box is not None else DEFAULT_IC_BOX[s.id]
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return np.array(
        [np.random.default_rng((seed, i)).uniform(lo, hi) for i in range(n)]
    )


def simulate_ensemble(s, n_trajectories, dt, steps, seed, box=None,
                      max_substep=DEFAULT_SUBSTEP):
    """Integrate an ensemble from seeded uniform initial conditions."""
    if n_trajectories < 1:
        raise DomainError("need at least one trajectory")
    x0 = sample_initial_conditions(s, n_trajectories, seed, box)
    if dt <= 0 or steps < 1:
        raise DomainError("dt must be > 0 and steps >= 1")
    paths = _rk4_batch(s, x0, dt, steps, max_substep)
    return [
        Trajectory(dt=dt, states=paths[:, i, :], system=s, seed_provenance=seed)
        for i in range(n_trajectories)
    ]


class Mode(str, Enum):
    DISCRETE_PAIRS = "discrete"
    CONTINUOUS_DERIVATIVES = "continuous"


@dataclass
class SnapshotDataset:
    mode: Mode
    inputs: np.ndarray  # (r, m)
    targets: np.ndarray  # (r, m): successor states, or derivative estimates
    dt: float

    def __post_init__(self):
        self.mode = Mode(self.mode)
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.inputs.shape != self.targets.shape:
            raise ConfigError("inputs and targets must have identical shape")
        if self.inputs.ndim != 2 or self.inputs.shape[0] < 1:
            raise ConfigError("need a (r >= 1, m) snapshot matrix")

    @property
    def n_rows(self):
        return self.inputs.shape[0]

    @property
    def m(self):
        return self.inputs.shape[1]


def build_snapshot_dataset(trajectories, mode):
    """Stack snapshot pairs from trajectories sharing dt and system.

    DiscretePairs pairs x_t with x_{t+1}; ContinuousDerivatives pairs interior
    x_t with the central difference (x_{t+1} - x_{t-1}) / (2 dt).
    """
    mode = Mode(mode)
    if not trajectories:
        raise ConfigError("no trajectories given")
    dt = trajectories[0].dt
    sys_id = trajectories[0].system.id
    ins, outs = [], []
    for tr in trajectories:
        if tr.dt != dt or tr.system.id != sys_id:
            raise ConfigError("trajectories must share dt and system")
        x = tr.states
        if mode == Mode.DISCRETE_PAIRS:
            if len(x) < 2:
                raise ConfigError("need >= 2 states per trajectory")
            ins.append(x[:-1])
            outs.append(x[1:])
        else:
            if len(x) < 3:
                raise ConfigError("need >= 3 states for central differences")
            ins.append(x[1:-1])
            outs.append((x[2:] - x[:-2]) / (2.0 * dt))
    return SnapshotDataset(mode, np.vstack(ins), np.vstack(outs), dt)


# -- CSV and metadata ------------------------------------------------------------


def trajectory_to_csv(tr, path, include_derivatives=False):
    """Write one trajectory as t,x1,x2[,dx1,dx2]; derivative columns (central
    differences) are left empty on the first and last rows."""
    x = tr.states
    n = len(x)
    header = ["t", "x1", "x2"]
    if include_derivatives:
        header += ["dx1", "dx2"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t in range(n):
            row = [repr(t * tr.dt), repr(float(x[t, 0])), repr(float(x[t, 1]))]
            if include_derivatives:
                if 0 < t < n - 1:
                    d = (x[t + 1] - x[t - 1]) / (2.0 * tr.dt)
                    row += [repr(float(d[0])), repr(float(d[1]))]
                else:
                    row += ["", ""]
            w.writerow(row)


def trajectory_from_csv(path, system, dt, seed_provenance=-1):
    states = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)  # header
        for row in r:
            states.append([float(row[1]), float(row[2])])
    return Trajectory(dt=dt, states=np.array(states), system=system,
                      seed_provenance=seed_provenance)


def write_ensemble(trajectories, out_dir, seed, include_derivatives=False):
    """Write traj_NNNN.csv files plus a metadata.ini sidecar; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    s = trajectories[0].system
    paths = []
    for i, tr in enumerate(trajectories):
        p = os.path.join(out_dir, f"traj_{i:04d}.csv")
        trajectory_to_csv(tr, p, include_derivatives)
        paths.append(p)
    cp = configparser.ConfigParser()
    cp["simulation"] = {
        "system": s.id.value,
        "constants": " ".join(repr(float(c)) for c in s.constants),
        "dt": repr(float(trajectories[0].dt)),
        "steps": str(len(trajectories[0]) - 1),
        "trajectories": str(len(trajectories)),
        "seed": str(seed),
    }
    with open(os.path.join(out_dir, "metadata.ini"), "w") as fh:
        cp.write(fh)
    return paths


def read_ensemble(data_dir):
    """Load a write_ensemble directory back into trajectories."""
    meta_path = os.path.join(data_dir, "metadata.ini")
    if not os.path.exists(meta_path):
        raise ConfigError(f"no metadata.ini under {data_dir}")
    cp = configparser.ConfigParser()
    cp.read(meta_path)
    sec = cp["simulation"]
    s = SystemSpec(SystemId(sec["system"]),
                   tuple(float(v) for v in sec["constants"].split()))
    dt = float(sec["dt"])
    seed = int(sec["seed"])
    names = sorted(
        f for f in os.listdir(data_dir)
        if f.startswith("traj_") and f.endswith(".csv")
    )
    if not names:
        raise ConfigError(f"no trajectory files under {data_dir}")
    return [
        trajectory_from_csv(os.path.join(data_dir, f), s, dt, seed) for f in names
    ]
