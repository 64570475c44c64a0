"""Controllability, observability, Gramians, and control-energy metrics.

Controllability verdicts come from the eigenvalue (PBH) test, with the
rank of the controllability matrix as an independent cross-check; the two
must agree.  Observability is computed through duality.  Open-loop chains
carry a zero eigenvalue, so Gramians are only meaningful on a finite
horizon; they are integrated as the matrix ODE

    dW/dt = A W + W A' + B B',   W(0) = 0,

with a classic fixed-step fourth-order Runge-Kutta scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .errors import NumericalError, SingularGramianError, TopologyError
from .systems import StateSpaceModel, SystemVariant, build_system
from .vehicles import LinearCoeffs

__all__ = [
    "ControllabilityReport",
    "ObservabilityReport",
    "GramianResult",
    "condition_check",
    "controllability_matrix",
    "pbh_controllability",
    "pbh_observability",
    "build_output_matrix",
    "gramian",
    "min_energy",
    "energy_scaling_study",
]

# Relative cutoff under which a Gramian eigenvalue counts as zero.
GRAMIAN_SINGULAR_RTOL = 1e-12


@dataclass
class ControllabilityReport:
    controllable: bool
    controllable_dim: int
    uncontrollable_mode_eigenvalues: List[complex]
    condition_value: Optional[float] = None


@dataclass
class ObservabilityReport:
    observable: bool
    observable_dim: int
    unobservable_vehicle_ids: List[int]


@dataclass
class GramianResult:
    W: np.ndarray
    t_horizon: float
    lambda_min: float
    trace_inv: Optional[float]  # None marks a numerically singular Gramian

    @property
    def singular(self) -> bool:
        return self.trace_inv is None


def condition_check(c: LinearCoeffs) -> float:
    """Controllability condition value alpha1 - alpha2*alpha3 + alpha3^2.

    The chain is fully controllable from the CAV whenever this is nonzero.
    """
    return c.alpha1 - c.alpha2 * c.alpha3 + c.alpha3**2


def _rank(M: np.ndarray, rtol: float) -> int:
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    cutoff = sv[0] * max(rtol, max(M.shape) * np.finfo(float).eps)
    return int(np.sum(sv > cutoff))


def controllability_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kalman controllability matrix [B, AB, ..., A^(d-1)B]."""
    d = A.shape[0]
    cols = [B.reshape(d, -1)]
    for _ in range(d - 1):
        cols.append(A @ cols[-1])
    return np.hstack(cols)


def _cluster_eigenvalues(eigs: np.ndarray, tol: float) -> List[complex]:
    """Group nearly-equal eigenvalues and return one centroid per group.

    Repeated eigenvalues of chained blocks are defective, so individually
    computed copies scatter around the true value; their centroid is far
    more accurate and is the right place to run the PBH rank test.
    """
    order = np.lexsort((eigs.imag, eigs.real))
    groups: List[List[complex]] = []
    for lam in eigs[order]:
        if groups and abs(lam - np.mean(groups[-1])) <= tol:
            groups[-1].append(lam)
        else:
            groups.append([lam])
    return [complex(np.mean(g)) for g in groups]


def pbh_controllability(
    A: np.ndarray,
    B: np.ndarray,
    rtol: float = 1e-8,
    coeffs: Optional[LinearCoeffs] = None,
) -> ControllabilityReport:
    """Eigenvalue test of controllability with a rank cross-check.

    For every (clustered) eigenvalue of A the pencil [lambda*I - A, B]
    must have full row rank; eigenvalues failing the test are reported as
    uncontrollable modes.  The dimension of the controllable subspace is
    the rank of the controllability matrix, and the two methods must
    agree on the overall verdict.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    d = A.shape[0]
    eigs = np.linalg.eigvals(A)
    if not np.all(np.isfinite(eigs)):
        raise NumericalError("eigenvalue computation returned non-finite values")
    scale = max(1.0, float(np.max(np.abs(eigs))))
    bad_modes = []
    for lam in _cluster_eigenvalues(eigs, tol=1e-6 * scale):
        pencil = np.hstack([lam * np.eye(d) - A, B])
        if _rank(pencil, rtol) < d:
            bad_modes.append(lam)
    ctrb_dim = _rank(controllability_matrix(A, B), rtol)
    pbh_ok = not bad_modes
    rank_ok = ctrb_dim == d
    if pbh_ok != rank_ok:
        raise NumericalError(
            f"PBH and rank tests disagree (pbh={pbh_ok}, rank dim={ctrb_dim}/{d}); "
            "adjust rtol"
        )
    return ControllabilityReport(
        controllable=pbh_ok,
        controllable_dim=ctrb_dim,
        uncontrollable_mode_eigenvalues=bad_modes,
        condition_value=condition_check(coeffs) if coeffs is not None else None,
    )


def pbh_observability(
    A: np.ndarray,
    C: np.ndarray,
    rtol: float = 1e-8,
    model: Optional[StateSpaceModel] = None,
) -> ObservabilityReport:
    """Observability of (A, C), computed as controllability of (A', C').

    When the originating model is supplied, the unobservable subspace
    (kernel of the observability matrix) is intersected with each
    vehicle's state pair: a vehicle is listed as unobservable when at
    least one of its states lies in that kernel.
    """
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float).reshape(-1, A.shape[0])
    dual = pbh_controllability(A.T, C.T, rtol=rtol)
    unobservable_ids: List[int] = []
    if model is not None and dual.controllable_dim < A.shape[0]:
        obs_mat = controllability_matrix(A.T, C.T).T  # rows C, CA, CA^2, ...
        _, sv, vt = np.linalg.svd(obs_mat)
        cutoff = sv[0] * max(rtol, max(obs_mat.shape) * np.finfo(float).eps)
        kernel = vt[int(np.sum(sv > cutoff)) :].T  # orthonormal basis, d x q
        for vid, rows in sorted(model.index_map.items()):
            for r in rows:
                if np.linalg.norm(kernel[r, :]) > 1.0 - 1e-6:
                    unobservable_ids.append(vid)
                    break
    return ObservabilityReport(
        observable=dual.controllable,
        observable_dim=dual.controllable_dim,
        unobservable_vehicle_ids=unobservable_ids,
    )


def build_output_matrix(model: StateSpaceModel, k: int) -> np.ndarray:
    """Measurement matrix for a CAV that hears vehicle k's velocity error.

    CF/FD chains measure the single signal v~_k.  General chains add the
    CAV's own spacing and velocity errors as rows (it always knows its own
    state).  For CCC chains pass k = 0: the CAV measures only itself.
    """
    d = model.dim
    if model.variant is SystemVariant.CCC:
        if k != 0:
            raise TopologyError("ccc chains have no followers; only k=0 is measurable")
        rows = [model.index_map[0][0], model.index_map[0][1]]
    elif model.variant is SystemVariant.GENERAL_LCC:
        if not 1 <= k <= model.n:
            raise TopologyError(f"k must lie in 1..{model.n}, got {k}")
        rows = [model.index_map[0][0], model.index_map[0][1], model.index_map[k][1]]
    else:
        if not 1 <= k <= model.n:
            raise TopologyError(f"k must lie in 1..{model.n}, got {k}")
        rows = [model.index_map[k][1]]
    C = np.zeros((len(rows), d))
    for i, r in enumerate(rows):
        C[i, r] = 1.0
    return C


def gramian(A: np.ndarray, B: np.ndarray, t: float, dt: float = 0.01) -> GramianResult:
    """Finite-horizon controllability Gramian of (A, B).

    Integrates dW/dt = A W + W A' + B B' from zero with fixed-step RK4,
    symmetrizes the result, and summarizes it by its smallest eigenvalue
    and the trace of its inverse.  The trace is reported as None once the
    smallest eigenvalue falls below 1e-12 of the largest, which is the
    regime where the inverse stops being numerically meaningful.
    """
    if t <= 0 or dt <= 0:
        raise ValueError(f"need t > 0 and dt > 0, got t={t}, dt={dt}")
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    BBt = B @ B.T
    n_steps = max(1, round(t / dt))
    h = t / n_steps

    def f(W):
        return A @ W + W @ A.T + BBt

    W = np.zeros_like(A)
    for _ in range(n_steps):
        k1 = f(W)
        k2 = f(W + 0.5 * h * k1)
        k3 = f(W + 0.5 * h * k2)
        k4 = f(W + h * k3)
        W = W + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(W)):
        raise NumericalError("Gramian integration produced non-finite entries")
    W = 0.5 * (W + W.T)
    lam = np.linalg.eigvalsh(W)
    lam_min, lam_max = float(lam[0]), float(lam[-1])
    if lam_max <= 0 or lam_min < GRAMIAN_SINGULAR_RTOL * lam_max:
        trace_inv = None
    else:
        trace_inv = float(np.sum(1.0 / lam))
    return GramianResult(W=W, t_horizon=t, lambda_min=lam_min, trace_inv=trace_inv)


def min_energy(
    A: np.ndarray,
    B: np.ndarray,
    t: float,
    x0: np.ndarray,
    x_tar: np.ndarray,
    dt: float = 0.01,
) -> float:
    """Minimum input energy to steer from x0 to x_tar in time t.

    Evaluates d' W(t)^{-1} d with d = x_tar - e^{At} x0 through a linear
    solve (never an explicit inverse).  Raises SingularGramianError when
    the Gramian is too close to singular for the solve to mean anything.
    """
    A = np.asarray(A, dtype=float)
    g = gramian(A, B, t, dt=dt)
    if g.singular:
        raise SingularGramianError(g.lambda_min)
    d = np.asarray(x_tar, dtype=float) - expm(A * t) @ np.asarray(x0, dtype=float)
    energy = float(d @ np.linalg.solve(g.W, d))
    return max(energy, 0.0)


def energy_scaling_study(
    coeffs: LinearCoeffs,
    n_range: Iterable[int],
    t_list: Sequence[float],
    dt: float = 0.01,
    variant: SystemVariant = SystemVariant.FD_LCC,
) -> List[Tuple[int, float, float, Optional[float]]]:
    """Gramian energy metrics across chain sizes and horizons.

    Builds the free-driving (or car-following) chain for each n, computes
    the horizon-t Gramian, and emits (n, t, lambda_min, trace_inv) rows
    ordered by (n, t).  trace_inv is None where the Gramian is singular.
    """
    ns = sorted(set(int(n) for n in n_range))
    if not ns:
        raise ValueError("n_range must be nonempty")
    if variant not in (SystemVariant.FD_LCC, SystemVariant.CF_LCC):
        raise TopologyError("energy scaling is defined for fd/cf chains")
    rows = []
    for n in ns:
        model = build_system(variant, 0, n, coeffs)
        for t in t_list:
            g = gramian(model.A, model.B, float(t), dt=dt)
            rows.append((n, float(t), g.lambda_min, g.trace_inv))
    return rows
