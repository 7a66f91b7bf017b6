"""Closed-form fitting of the lifted transition matrix K, plus evaluation.

Fitting is plain (optionally ridge-regularized) least squares: stack lifted
inputs row-wise and solve for K columnwise via numpy's SVD-backed lstsq, which
is rank-revealing and returns the minimum-norm solution on rank-deficient
data. Continuous-mode targets are lifted-derivative rows obtained by the chain
rule through the dictionary Jacobian.
"""

from __future__ import annotations

import configparser
import csv
import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dictionaries import (
    Dictionary,
    dictionary_from_text,
    dictionary_to_text,
    lift,
    lift_jacobian_many,
    lift_many,
)
from .errors import (
    DataError,
    DomainError,
    EvaluationWindowError,
    IllConditionedWarning,
    NumericalError,
)
from .systems import Mode, SnapshotDataset

DEFAULT_RIDGE_FACTOR = 1e-8  # default ridge = this times sigma_max^2


@dataclass
class KoopmanModel:
    """A fitted lifted-space transition (or generator) matrix over a dictionary."""

    dictionary: Dictionary
    K: np.ndarray
    mode: Mode
    dt: float

    def __post_init__(self):
        self.mode = Mode(self.mode)
        # fixed memory layout so saved and reloaded models roll out bitwise equal
        self.K = np.ascontiguousarray(np.asarray(self.K, dtype=float))
        d = self.dictionary.lifted_dim
        if self.K.shape != (d, d):
            raise DomainError(f"K must be {d}x{d}, got {self.K.shape}")
        if not np.all(np.isfinite(self.K)):
            raise NumericalError("K contains non-finite entries")

    @property
    def projection(self):
        """Index range of the state block inside a lifted vector."""
        return slice(1, 1 + self.dictionary.m)

    def step_matrix(self):
        """Matrix advancing a lifted state by one dt: K itself for discrete
        models, the matrix exponential e^{K dt} for generator (continuous)
        models."""
        if self.mode == Mode.DISCRETE_PAIRS:
            return self.K
        return expm(self.K * self.dt)


def _lifted_pair(dataset, d):
    if not (np.all(np.isfinite(dataset.inputs)) and np.all(np.isfinite(dataset.targets))):
        raise DataError("dataset contains non-finite values")
    psi_in = lift_many(d, dataset.inputs)
    if dataset.mode == Mode.DISCRETE_PAIRS:
        psi_out = lift_many(d, dataset.targets)
    else:
        jac = lift_jacobian_many(d, dataset.inputs)
        psi_out = np.einsum("rdm,rm->rd", jac, dataset.targets)
    return psi_in, psi_out


def fit_k(dataset, d, ridge=None):
    """Least-squares fit of K over a fixed dictionary.

    ridge=None uses the adaptive default 1e-8 * sigma_max(Psi)^2; pass 0.0 for
    an unregularized solve (min-norm on rank-deficient data, with a warning).
    """
    psi_in, psi_out = _lifted_pair(dataset, d)
    r, n = psi_in.shape
    if r < n:
        warnings.warn(
            f"only {r} rows for a {n}-dimensional lift; fit is underdetermined",
            IllConditionedWarning, stacklevel=2,
        )
    sigma_max = np.linalg.norm(psi_in, 2)
    if ridge is None:
        ridge = DEFAULT_RIDGE_FACTOR * sigma_max**2
    if ridge < 0:
        raise DomainError(f"ridge must be >= 0, got {ridge}")
    if ridge > 0:
        a = np.vstack([psi_in, np.sqrt(ridge) * np.eye(n)])
        b = np.vstack([psi_out, np.zeros((n, n))])
    else:
        a, b = psi_in, psi_out
    kt, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if ridge == 0 and rank < n:
        warnings.warn(
            f"lifted data matrix is rank deficient ({rank} < {n}); "
            "returning the minimum-norm solution",
            IllConditionedWarning, stacklevel=2,
        )
    return KoopmanModel(dictionary=d, K=kt.T, mode=dataset.mode, dt=dataset.dt)


def frobenius_residual(model, dataset):
    """Sum of squared lifted residuals over the whole dataset."""
    psi_in, psi_out = _lifted_pair(dataset, model.dictionary)
    res = psi_out - psi_in @ model.K.T
    return float(np.sum(res * res))


def state_residual(model, dataset):
    """Sum of squared residuals over the constant + state rows only (how well
    the lifted model propagates the measurements themselves)."""
    psi_in, psi_out = _lifted_pair(dataset, model.dictionary)
    keep = 1 + model.dictionary.m
    res = psi_out[:, :keep] - psi_in @ model.K[:keep].T
    return float(np.sum(res * res))


def dmd_baseline(dataset):
    """Plain linear least squares x_{t+1} ~ A x_t, packaged over the [1, y]
    dictionary with zero constant coupling."""
    if dataset.mode != Mode.DISCRETE_PAIRS:
        raise DomainError("dmd baseline needs a discrete-pairs dataset")
    if not (np.all(np.isfinite(dataset.inputs)) and np.all(np.isfinite(dataset.targets))):
        raise DataError("dataset contains non-finite values")
    at, _, _, _ = np.linalg.lstsq(dataset.inputs, dataset.targets, rcond=None)
    m = dataset.m
    k = np.zeros((1 + m, 1 + m))
    k[0, 0] = 1.0
    k[1:, 1:] = at.T
    return KoopmanModel(dictionary=Dictionary.linear(m), K=k,
                        mode=Mode.DISCRETE_PAIRS, dt=dataset.dt)


def predict_n_steps(model, y0, n):
    """Roll the lifted state forward n steps and project each to measurements.

    Pure linear rollout: z_{k+1} = K_step z_k from z_0 = psi(y0); the lift is
    never re-applied between steps. Returns an (n+1, m) array whose row 0 is y0.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    z = lift(model.dictionary, np.asarray(y0, dtype=float))
    k_step = model.step_matrix()
    out = np.empty((n + 1, model.dictionary.m))
    out[0] = z[model.projection]
    for i in range(n):
        z = k_step @ z
        out[i + 1] = z[model.projection]
    return out


def n_step_error(model, eval_trajectories, n):
    """Mean relative n-step prediction error over all admissible windows.

    For every trajectory and every start index t with t+n in range, predicts
    x_{t+n} from x_t by pure lifted rollout and scores
    ||x_hat - x||_2 / (||x||_2 + 1e-8); returns the mean in fixed
    (trajectory, start-index) order.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    starts, targets = [], []
    for tr in eval_trajectories:
        if len(tr) <= n:
            continue
        starts.append(tr.states[:-n])
        targets.append(tr.states[n:])
    if not starts:
        raise EvaluationWindowError(f"no trajectory offers an {n}-step window")
    x0 = np.vstack(starts)
    xt = np.vstack(targets)
    z = lift_many(model.dictionary, x0)
    k_step = model.step_matrix()
    for _ in range(n):
        z = z @ k_step.T
    xh = z[:, model.projection]
    num = np.linalg.norm(xh - xt, axis=1)
    den = np.linalg.norm(xt, axis=1) + 1e-8
    return float(np.mean(num / den))


# -- model files -------------------------------------------------------------------


def _k_csv_path(model_path):
    root, _ = os.path.splitext(model_path)
    return root + ".k.csv"


def save_model(model, path):
    """Write the model as INI text beside a row-major CSV of K."""
    k_path = _k_csv_path(path)
    cp = configparser.ConfigParser()
    cp.read_string(dictionary_to_text(model.dictionary))
    cp["model"] = {
        "mode": model.mode.value,
        "dt": repr(float(model.dt)),
        "k_file": os.path.basename(k_path),
    }
    with open(path, "w") as fh:
        cp.write(fh)
    with open(k_path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in model.K:
            w.writerow([repr(float(v)) for v in row])


def load_model(path):
    cp = configparser.ConfigParser()
    cp.read(path)
    with open(path) as fh:
        d = dictionary_from_text(fh.read())
    sec = cp["model"]
    k_path = os.path.join(os.path.dirname(os.path.abspath(path)), sec["k_file"])
    with open(k_path, newline="") as fh:
        k = np.array([[float(v) for v in row] for row in csv.reader(fh)])
    return KoopmanModel(dictionary=d, K=k, mode=Mode(sec["mode"]),
                        dt=float(sec["dt"]))
