"""Restricted isometry constants and the recovery-guarantee constants.

delta_s is computed two ways: exact enumeration of all size-s supports
(the Gram characterization delta_s = max_S ||Phi_S* Phi_S - Id||) and a
sampled lower bound straight from the defining inequality on random
s-sparse unit vectors. Supports smaller than s never attain the max:
Phi_S* Phi_S - Id is a principal submatrix of the size-s version, and
Hermitian principal submatrices never increase the operator norm.

All spectral work happens on the 2n x 2n complex adjoint of the Gram
residual, computed once and sliced per support.
"""

from __future__ import annotations

import enum
import math
import time
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, ConditionViolated, DegenerateDelta
from .qlinalg import QMatrix, SupportSet, adjoint, complex_adjoint, matmul
from .random import PURPOSE_RIP, RngStream, derive_stream_id

DELTA_FLOOR = 1e-14
DEFAULT_BUDGET = 2_000_000
SQRT2 = math.sqrt(2.0)


class RipMethod(enum.Enum):
    EXACT_ENUMERATION = "exact_enumeration"
    SAMPLED_LOWER_BOUND = "sampled_lower_bound"


@dataclass(frozen=True)
class RipReport:
    s: int
    delta: float
    method: RipMethod
    supports_examined: int
    argmax_support: SupportSet
    elapsed: float


@dataclass(frozen=True)
class ErrorBoundConstants:
    delta2s: float
    C0: float
    C1: float


def _gram_residual_adjoint(Phi: QMatrix) -> np.ndarray:
    """Complex adjoint of Phi*Phi - Id (2n x 2n)."""
    n = Phi.shape[1]
    gram = matmul(adjoint(Phi), Phi)
    chi = complex_adjoint(gram)
    chi[np.diag_indices(2 * n)] -= 1.0
    return chi


def _support_opnorm(chi: np.ndarray, S: tuple[int, ...]) -> float:
    rows = np.array([(2 * i, 2 * i + 1) for i in S]).reshape(-1)
    w = np.linalg.eigvalsh(chi[np.ix_(rows, rows)])
    return float(max(-w[0], w[-1]) + 0.0)


def _enumerate_delta(chi: np.ndarray, n: int, s: int) -> tuple[float, tuple[int, ...], int]:
    best = -1.0
    best_S: tuple[int, ...] = tuple(range(s))
    count = 0
    for S in combinations(range(n), s):
        val = _support_opnorm(chi, S)
        count += 1
        if val > best:
            best, best_S = val, S
    return best, best_S, count


def exact_delta(Phi: QMatrix, s: int, budget: int = DEFAULT_BUDGET) -> RipReport:
    """delta_s by brute force over all C(n, s) supports of size exactly s."""
    n = Phi.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"s={s} outside [1, {n}]")
    required = math.comb(n, s)
    if required > budget:
        raise BudgetExceeded(required, budget)
    t0 = time.perf_counter()
    chi = _gram_residual_adjoint(Phi)
    delta, best_S, count = _enumerate_delta(chi, n, s)
    if __debug__ and n <= 8 and s >= 2:
        smaller, _, _ = _enumerate_delta(chi, n, s - 1)
        assert smaller <= delta + 1e-12, "size-(s-1) supports must be dominated"
    return RipReport(s=s, delta=delta, method=RipMethod.EXACT_ENUMERATION,
                     supports_examined=count, argmax_support=SupportSet(best_S),
                     elapsed=time.perf_counter() - t0)


def _complex_pair(Phi: QMatrix) -> tuple[np.ndarray, np.ndarray]:
    return (Phi.data[..., 0] + 1j * Phi.data[..., 1],
            Phi.data[..., 2] + 1j * Phi.data[..., 3])


def _batched_sparse_image(P1, P2, idx, z1, z2):
    """(Phi x)_batch for batched sparse x given its complex-pair entries.

    idx: (T, s) column indices; z1, z2: (T, s) complex entries of x.
    Returns (Y1, Y2) of shape (m, T).
    """
    m = P1.shape[0]
    T, s = idx.shape
    Y1 = np.zeros((m, T), dtype=np.complex128)
    Y2 = np.zeros((m, T), dtype=np.complex128)
    for j in range(s):
        cols = idx[:, j]
        Y1 += P1[:, cols] * z1[:, j] - P2[:, cols] * np.conj(z2[:, j])
        Y2 += P1[:, cols] * z2[:, j] + P2[:, cols] * np.conj(z1[:, j])
    return Y1, Y2


def sampled_delta_lower_bound(Phi: QMatrix, s: int, trials: int,
                              rng: RngStream | None = None) -> RipReport:
    """max over sampled s-sparse unit x of |  ||Phi x||_2^2 - 1 |.

    A lower bound on delta_s by definition, approaching it from below as
    trials grow.
    """
    n = Phi.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"s={s} outside [1, {n}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if rng is None:
        rng = RngStream(0, derive_stream_id(PURPOSE_RIP, Phi.shape[0], s, 0))
    t0 = time.perf_counter()
    P1, P2 = _complex_pair(Phi)
    best = -1.0
    best_S: tuple[int, ...] = tuple(range(s))
    done = 0
    while done < trials:
        T = min(trials - done, 1 << 15)
        # uniform s-subsets: first s slots of a random permutation per row
        perm = np.argsort(rng.normals((T, n)), axis=1)
        idx = perm[:, :s]
        comp = rng.normals((T, s, 4), 0.5)
        nrm = np.sqrt(np.sum(comp * comp, axis=(1, 2), keepdims=True))
        nrm[nrm == 0] = 1.0
        comp = comp / nrm
        z1 = comp[..., 0] + 1j * comp[..., 1]
        z2 = comp[..., 2] + 1j * comp[..., 3]
        Y1, Y2 = _batched_sparse_image(P1, P2, idx, z1, z2)
        vals = np.abs(np.sum(np.abs(Y1) ** 2 + np.abs(Y2) ** 2, axis=0) - 1.0)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            best_S = tuple(sorted(int(i) for i in idx[k]))
        done += T
    return RipReport(s=s, delta=best, method=RipMethod.SAMPLED_LOWER_BOUND,
                     supports_examined=trials, argmax_support=SupportSet(best_S),
                     elapsed=time.perf_counter() - t0)


def check_rip_ip(Phi: QMatrix, s1: int, s2: int, trials: int,
                 rng: RngStream | None = None, budget: int = DEFAULT_BUDGET) -> float:
    """max over sampled disjoint-support pairs of
    |<Phi x, Phi y>| / (delta_{s1+s2} ||x||_2 ||y||_2), which the
    disjoint-support bound keeps at or below 1."""
    n = Phi.shape[1]
    if s1 < 1 or s2 < 1 or s1 + s2 > n:
        raise ValueError(f"need s1, s2 >= 1 and s1+s2 <= {n}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if rng is None:
        rng = RngStream(0, derive_stream_id(PURPOSE_RIP, Phi.shape[0], s1 + s2, 1))
    delta = exact_delta(Phi, s1 + s2, budget=budget).delta
    if delta < DELTA_FLOOR:
        warnings.warn(f"delta_{s1 + s2} = {delta:.3e} is numerically zero; "
                      "ratios are reported as 0", DegenerateDelta)
        return 0.0
    P1, P2 = _complex_pair(Phi)
    best = 0.0
    done = 0
    while done < trials:
        T = min(trials - done, 1 << 15)
        perm = np.argsort(rng.normals((T, n)), axis=1)
        idx_x = perm[:, :s1]
        idx_y = perm[:, s1:s1 + s2]
        cx = rng.normals((T, s1, 4), 0.5)
        cy = rng.normals((T, s2, 4), 0.5)
        nx = np.sqrt(np.sum(cx * cx, axis=(1, 2)))
        ny = np.sqrt(np.sum(cy * cy, axis=(1, 2)))
        keep = (nx > 0) & (ny > 0)
        X1, X2 = _batched_sparse_image(P1, P2, idx_x,
                                       cx[..., 0] + 1j * cx[..., 1],
                                       cx[..., 2] + 1j * cx[..., 3])
        Y1, Y2 = _batched_sparse_image(P1, P2, idx_y,
                                       cy[..., 0] + 1j * cy[..., 1],
                                       cy[..., 2] + 1j * cy[..., 3])
        # <Phi x, Phi y> = sum_i conj(q_i) p_i over complex pairs
        part_a = np.sum(np.conj(Y1) * X1 + Y2 * np.conj(X2), axis=0)
        part_b = np.sum(np.conj(Y1) * X2 - Y2 * np.conj(X1), axis=0)
        ip = np.sqrt(np.abs(part_a) ** 2 + np.abs(part_b) ** 2)
        denom = delta * nx * ny
        ratios = np.where(keep, ip / np.where(keep, denom, 1.0), 0.0)
        best = max(best, float(ratios.max()))
        done += T
    return best


def error_constants(delta2s: float) -> ErrorBoundConstants:
    """C0 = 2(1 + (sqrt2 - 1) d) / (1 - (sqrt2 + 1) d),
    C1 = 4 sqrt(1 + d) / (1 - (sqrt2 + 1) d); requires d < sqrt2 - 1."""
    if not (math.isfinite(delta2s) and delta2s >= 0):
        raise ValueError(f"delta2s must be finite and >= 0, got {delta2s}")
    if delta2s >= SQRT2 - 1:
        raise ConditionViolated(
            f"delta2s = {delta2s} >= sqrt(2) - 1 = {SQRT2 - 1}; "
            "the recovery guarantee does not apply")
    denom = 1.0 - (SQRT2 + 1.0) * delta2s
    C0 = 2.0 * (1.0 + (SQRT2 - 1.0) * delta2s) / denom
    C1 = 4.0 * math.sqrt(1.0 + delta2s) / denom
    return ErrorBoundConstants(delta2s=delta2s, C0=C0, C1=C1)
