"""Group basis pursuit on the compact real embedding.

Solves  minimize ||z||_1  over z in H^n  subject to  Phi z = y  (eta = 0)
or ||Phi z - y||_2 <= eta (eta > 0), by ADMM on the equivalent real
problem

    minimize  sum_k ||v_{4k:4k+4}||_2 + I_C(u)   subject to  A v = u,

where A is the 4m x 4n compact embedding, groups of four real slots are
quaternion coordinates, and C is {b} or the ball of radius eta around b.

The splitting is consensus form between the separable term F(v, u) and
the indicator of the graph {(v, u): A v = u}. The graph projection costs
one Cholesky factorization of I + A A^T up front and a pair of
triangular solves per iteration, and is independent of the penalty rho,
so residual-balancing rho updates are free. Dual variables are stored
unscaled; proximal arguments divide by rho where needed.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .embedding import build_embedding, unvec4
from .errors import FactorizationFailure
from .qlinalg import QMatrix, QVector, lp_norm

RHO_MIN = 1e-10
RHO_MAX = 1e10
POLISH_FEAS_SLACK = 1e-12
POLISH_OBJ_SLACK = 1e-9


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class RecoveryProblem:
    """(Phi, y, eta) instance of the l1 minimization."""

    Phi: QMatrix
    y: QVector
    eta: float = 0.0

    def __post_init__(self):
        m, n = self.Phi.shape
        if len(self.y) != m:
            raise ValueError(f"y has length {len(self.y)}, Phi has {m} rows")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise ValueError(f"eta must be finite and >= 0, got {self.eta}")


@dataclass
class SolverParams:
    rho: float = 1.0
    max_iters: int = 50000
    tol_primal: float = 1e-10
    tol_dual: float = 1e-10
    adaptive_rho: bool = True
    rho_factor: float = 2.0
    rho_trigger: float = 10.0
    polish: bool = True
    polish_threshold: float = 1e-5
    trace_path: str | None = None

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ValueError("tolerances must be positive")
        if self.rho_factor <= 1 or self.rho_trigger <= 1:
            raise ValueError("rho_factor and rho_trigger must exceed 1")


@dataclass
class SolveResult:
    x_hat: QVector
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float
    polished: bool
    status: SolveStatus


def block_soft_threshold(v: np.ndarray, kappa: float) -> np.ndarray:
    """prox of kappa * ||.||_2 on the trailing axis: max(0, 1 - kappa/||v||) v."""
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    v = np.asarray(v, dtype=np.float64)
    norms = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
    denom = np.where(norms > 0, norms, 1.0)
    return np.maximum(0.0, 1.0 - kappa / denom) * v


class GraphProjector:
    """Euclidean projection onto {(v, u): A v = u}.

    Uses (I + A^T A)^{-1} = I - A^T (I + A A^T)^{-1} A, factoring the
    small 4m x 4m matrix once. I + A A^T is positive definite by
    construction, so a Cholesky failure means the inputs are broken
    (NaN/Inf); one ridge retry is attempted before giving up.
    """

    def __init__(self, A: np.ndarray):
        self.A = np.ascontiguousarray(A)
        self.At = np.ascontiguousarray(A.T)
        m4 = A.shape[0]
        K = np.eye(m4) + self.A @ self.At
        try:
            self.chol = cho_factor(K, lower=True)
        except np.linalg.LinAlgError:
            warnings.warn("I + AA^T factorization failed; retrying with 1e-12 ridge")
            try:
                self.chol = cho_factor(K + 1e-12 * np.eye(m4), lower=True)
            except np.linalg.LinAlgError as exc:
                raise FactorizationFailure(f"Cholesky of I + AA^T failed: {exc}") from exc

    def project(self, cv: np.ndarray, cu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = cv + self.At @ cu
        w = cho_solve(self.chol, self.A @ p)
        v = p - self.At @ w
        return v, self.A @ v


@dataclass
class AdmmState:
    projector: GraphProjector
    b: np.ndarray
    eta: float
    rho: float
    n: int
    v_half: np.ndarray
    u_half: np.ndarray
    v_proj: np.ndarray
    u_proj: np.ndarray
    v_prev: np.ndarray
    u_prev: np.ndarray
    lam_v: np.ndarray
    lam_u: np.ndarray
    iteration: int = 0


def init_admm_state(projector: GraphProjector, b: np.ndarray, eta: float,
                    rho: float) -> AdmmState:
    """Cold start at zero (no warm starts across trials)."""
    dim_v = projector.A.shape[1]
    dim_u = projector.A.shape[0]
    z_v = np.zeros(dim_v)
    z_u = np.zeros(dim_u)
    return AdmmState(projector=projector, b=np.asarray(b, dtype=np.float64),
                     eta=float(eta), rho=float(rho), n=dim_v // 4,
                     v_half=z_v.copy(), u_half=z_u.copy(),
                     v_proj=z_v.copy(), u_proj=z_u.copy(),
                     v_prev=z_v.copy(), u_prev=z_u.copy(),
                     lam_v=z_v.copy(), lam_u=z_u.copy())


def _project_data_set(r: np.ndarray, b: np.ndarray, eta: float) -> np.ndarray:
    """Projection onto C: the point {b} when eta = 0, else the ball B(b, eta)."""
    if eta == 0:
        return b.copy()
    d = r - b
    nd = float(np.linalg.norm(d))
    if nd <= eta:
        return r.copy()
    return b + d * (eta / nd)


def admm_step(state: AdmmState) -> AdmmState:
    rho = state.rho
    v_arg = (state.v_proj - state.lam_v / rho).reshape(state.n, 4)
    v_half = block_soft_threshold(v_arg, 1.0 / rho).reshape(-1)
    u_half = _project_data_set(state.u_proj - state.lam_u / rho, state.b, state.eta)

    v_proj, u_proj = state.projector.project(v_half + state.lam_v / rho,
                                             u_half + state.lam_u / rho)

    state.v_prev, state.u_prev = state.v_proj, state.u_proj
    state.v_half, state.u_half = v_half, u_half
    state.v_proj, state.u_proj = v_proj, u_proj
    state.lam_v = state.lam_v + rho * (v_half - v_proj)
    state.lam_u = state.lam_u + rho * (u_half - u_proj)
    state.iteration += 1
    return state


def residuals(state: AdmmState) -> tuple[float, float]:
    """(primal, dual) residual norms of the current state.

    Primal: violation of A v_half = u_half (u_half lies in C exactly).
    Dual: rho times the step of the projected iterate.
    """
    A = state.projector.A
    primal = float(np.linalg.norm(A @ state.v_half - state.u_half))
    dual = state.rho * math.sqrt(
        float(np.sum((state.v_proj - state.v_prev) ** 2))
        + float(np.sum((state.u_proj - state.u_prev) ** 2)))
    return primal, dual


def residual_scales(state: AdmmState) -> tuple[float, float]:
    """Relative-tolerance scales: max(||A v_half||, ||u_half||) on the primal
    side, the scaled-dual norm ||lambda|| / rho on the dual side."""
    A = state.projector.A
    pri = max(float(np.linalg.norm(A @ state.v_half)),
              float(np.linalg.norm(state.u_half)))
    dual = math.sqrt(float(np.sum(state.lam_v ** 2)) + float(np.sum(state.lam_u ** 2)))
    return pri, dual / state.rho


def _group_l1(v_flat: np.ndarray) -> float:
    groups = v_flat.reshape(-1, 4)
    return float(np.sqrt(np.sum(groups * groups, axis=1)).sum())


def _polish_candidate(A: np.ndarray, b: np.ndarray, eta: float, v_half: np.ndarray,
                      threshold: float) -> np.ndarray | None:
    """Least squares restricted to the active support; None when the
    restricted system is rank-deficient or the candidate fails the
    feasibility / objective acceptance rules."""
    groups = v_half.reshape(-1, 4)
    gnorm = np.sqrt(np.sum(groups * groups, axis=1))
    gmax = float(gnorm.max()) if gnorm.size else 0.0
    if gmax == 0.0:
        return None
    keep = np.nonzero(gnorm > threshold * gmax)[0]
    slots = (4 * keep[:, None] + np.arange(4)[None, :]).reshape(-1)
    A_S = A[:, slots]
    w, _, rank, _ = np.linalg.lstsq(A_S, b, rcond=None)
    if rank < A_S.shape[1]:
        return None
    z = np.zeros_like(v_half)
    z[slots] = w
    if float(np.linalg.norm(A @ z - b)) > eta + POLISH_FEAS_SLACK:
        return None
    if _group_l1(z) > _group_l1(v_half) + POLISH_OBJ_SLACK:
        return None
    return z


def solve(problem: RecoveryProblem, params: SolverParams | None = None) -> SolveResult:
    if params is None:
        params = SolverParams()
    emb = build_embedding(problem.Phi, problem.y)
    A = emb.A_compact
    b = emb.y_compact
    m4, n4 = A.shape

    projector = GraphProjector(A)
    state = init_admm_state(projector, b, problem.eta, params.rho)

    trace_fh = None
    trace = None
    if params.trace_path is not None:
        trace_fh = open(params.trace_path, "w", newline="")
        trace = csv.writer(trace_fh)
        trace.writerow(["iteration", "primal_residual", "dual_residual",
                        "objective", "rho"])

    converged = False
    r_pri = r_dual = math.inf
    try:
        for _ in range(params.max_iters):
            admm_step(state)
            r_pri, r_dual = residuals(state)
            s_pri, s_dual = residual_scales(state)
            if trace is not None:
                trace.writerow([state.iteration, repr(r_pri), repr(r_dual),
                                repr(_group_l1(state.v_half)), repr(state.rho)])
            eps_pri = params.tol_primal * (math.sqrt(m4) + max(s_pri, float(np.linalg.norm(b))))
            eps_dual = params.tol_dual * (math.sqrt(n4 + m4) + s_dual)
            if r_pri <= eps_pri and r_dual <= eps_dual:
                converged = True
                break
            if params.adaptive_rho:
                if r_pri > params.rho_trigger * r_dual:
                    state.rho = min(state.rho * params.rho_factor, RHO_MAX)
                elif r_dual > params.rho_trigger * r_pri:
                    state.rho = max(state.rho / params.rho_factor, RHO_MIN)
    finally:
        if trace_fh is not None:
            trace_fh.close()

    if converged:
        status = SolveStatus.CONVERGED
    else:
        gap = _least_squares_gap(A, b)
        if gap > problem.eta + 1e-9 * (1.0 + float(np.linalg.norm(b))):
            status = SolveStatus.INFEASIBLE
        else:
            status = SolveStatus.MAX_ITERS

    x_flat = state.v_half
    polished = False
    if params.polish and status is not SolveStatus.INFEASIBLE:
        cand = _polish_candidate(A, b, problem.eta, state.v_half,
                                 params.polish_threshold)
        if cand is not None:
            x_flat = cand
            polished = True

    x_hat = unvec4(x_flat)
    return SolveResult(x_hat=x_hat, iterations=state.iteration,
                       primal_residual=r_pri, dual_residual=r_dual,
                       objective=lp_norm(x_hat, 1), polished=polished,
                       status=status)


def _least_squares_gap(A: np.ndarray, b: np.ndarray) -> float:
    """Smallest achievable ||A z - b||; certifies infeasibility when it
    exceeds eta."""
    z, _, _, _ = np.linalg.lstsq(A, b, rcond=None)
    return float(np.linalg.norm(A @ z - b))
