import csv
import math

import numpy as np
import pytest

import oracles
from qcs.embedding import build_embedding, vec4
from qcs.qlinalg import QMatrix, QVector, lp_norm, matvec, support
from qcs.random import (
    PURPOSE_MATRIX,
    PURPOSE_SIGNAL,
    RngStream,
    sample_gaussian_matrix,
    sample_sparse_signal,
    sample_sphere_noise,
    trial_stream,
)
from qcs.solver import (
    GraphProjector,
    RecoveryProblem,
    SolveStatus,
    SolverParams,
    admm_step,
    block_soft_threshold,
    init_admm_state,
    residual_scales,
    residuals,
    solve,
)


def sparse_instance(seed, m, n, s, eta=0.0):
    Phi = sample_gaussian_matrix(trial_stream(seed, PURPOSE_MATRIX, m, s, 0),
                                 m, n, 1.0 / m)
    x, S = sample_sparse_signal(trial_stream(seed, PURPOSE_SIGNAL, m, s, 0), n, s)
    y = matvec(Phi, x)
    if eta > 0:
        y = y + sample_sphere_noise(trial_stream(seed, 3, m, s, 0), m, eta)
    return Phi, x, y


# ---------------------------------------------------------------------------
# block soft threshold


def test_block_soft_threshold_closed_forms():
    v = np.array([3.0, 4.0, 0.0, 0.0])
    # norm 5, shrink by 1: scale by 4/5
    assert np.allclose(block_soft_threshold(v, 1.0), [2.4, 3.2, 0.0, 0.0])
    # kills blocks at or below the threshold
    assert np.array_equal(block_soft_threshold(v, 5.0), np.zeros(4))
    assert np.array_equal(block_soft_threshold(v, 7.5), np.zeros(4))
    # zero block stays zero, no division blowup
    assert np.array_equal(block_soft_threshold(np.zeros(4), 2.0), np.zeros(4))
    # kappa = 0 is the identity
    assert np.array_equal(block_soft_threshold(v, 0.0), v)


def test_block_soft_threshold_batched(np_rng):
    V = np_rng.standard_normal((50, 4))
    out = block_soft_threshold(V, 0.3)
    assert out.shape == V.shape
    for i in range(50):
        assert np.allclose(out[i], block_soft_threshold(V[i], 0.3))
    norms_in = np.linalg.norm(V, axis=1)
    norms_out = np.linalg.norm(out, axis=1)
    dead = norms_in <= 0.3
    assert np.all(norms_out[dead] == 0.0)
    assert np.allclose(norms_out[~dead], norms_in[~dead] - 0.3)


def test_block_soft_threshold_positive_scaling(np_rng):
    # T(alpha v, alpha kappa) = alpha T(v, kappa) for alpha > 0
    v = np_rng.standard_normal(4)
    for alpha in (0.5, 2.0, 10.0):
        assert np.allclose(block_soft_threshold(alpha * v, alpha * 0.7),
                           alpha * block_soft_threshold(v, 0.7), atol=1e-12)


# ---------------------------------------------------------------------------
# parameter and problem validation


def test_solver_params_validation():
    SolverParams()
    for kwargs in (dict(rho=0.0), dict(rho=-1.0), dict(max_iters=0),
                   dict(tol_primal=0.0), dict(tol_dual=-1e-9),
                   dict(rho_factor=1.0), dict(rho_trigger=0.5)):
        with pytest.raises(ValueError):
            SolverParams(**kwargs)


def test_problem_validation():
    Phi, x, y = sparse_instance(0, 4, 6, 1)
    RecoveryProblem(Phi=Phi, y=y, eta=0.0)
    with pytest.raises(ValueError):
        RecoveryProblem(Phi=Phi, y=QVector.zeros(5), eta=0.0)
    with pytest.raises(ValueError):
        RecoveryProblem(Phi=Phi, y=y, eta=-0.1)
    with pytest.raises(ValueError):
        RecoveryProblem(Phi=Phi, y=y, eta=math.nan)


# ---------------------------------------------------------------------------
# pinned iteration-level behavior


def test_first_iteration_primal_residual_is_data_norm():
    # from a cold start the first primal residual equals ||y_tilde||_2 exactly
    Phi, x, y = sparse_instance(1, 3, 5, 2)
    emb = build_embedding(Phi, y)
    state = init_admm_state(GraphProjector(emb.A_compact), emb.y_compact, 0.0, 1.0)
    admm_step(state)
    r_pri, _ = residuals(state)
    assert r_pri == float(np.linalg.norm(emb.y_compact))


def test_dual_scale_halves_when_rho_doubles():
    Phi, x, y = sparse_instance(2, 3, 5, 2)
    emb = build_embedding(Phi, y)
    state = init_admm_state(GraphProjector(emb.A_compact), emb.y_compact, 0.0, 1.0)
    for _ in range(5):
        admm_step(state)
    _, scale_before = residual_scales(state)
    assert scale_before > 0.0
    state.rho *= 2.0
    _, scale_after = residual_scales(state)
    assert scale_after == scale_before / 2.0


def test_zero_data_returns_zero():
    Phi, _, _ = sparse_instance(3, 4, 7, 2)
    res = solve(RecoveryProblem(Phi=Phi, y=QVector.zeros(4), eta=0.0))
    assert lp_norm(res.x_hat, 2) == 0.0
    assert res.objective == 0.0
    assert res.status is SolveStatus.CONVERGED


def test_identity_matrix_recovers_input():
    x = QVector(np.array([[1.0, -2.0, 0.5, 0.0],
                          [0.0, 0.0, 0.0, 0.0],
                          [3.0, 0.0, 0.0, 1.0]]))
    Phi = QMatrix.identity(3)
    res = solve(RecoveryProblem(Phi=Phi, y=x, eta=0.0))
    assert lp_norm(res.x_hat - x, 2) < 1e-8


# ---------------------------------------------------------------------------
# solve contract


def test_one_sparse_exact_recovery_block():
    perfect = 0
    for trial in range(20):
        Phi, x, y = sparse_instance(100 + trial, 6, 8, 1)
        res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0))
        if lp_norm(res.x_hat - x, 2) <= 1e-7:
            perfect += 1
    assert perfect == 20


def test_solution_is_feasible_noiseless():
    Phi, x, y = sparse_instance(4, 5, 10, 2)
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0))
    assert lp_norm(matvec(Phi, res.x_hat) - y, 2) <= 1e-8


def test_solution_is_feasible_noisy():
    eta = 0.1
    Phi, x, y = sparse_instance(5, 5, 10, 2, eta=eta)
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=eta))
    assert lp_norm(matvec(Phi, res.x_hat) - y, 2) <= eta + 1e-8
    # noise gives the solver room to shrink the objective below the truth
    assert res.objective <= lp_norm(x, 1) + 1e-8


def test_objective_never_exceeds_truth():
    # x_true is feasible for its own data, so the minimum is at most ||x||_1
    for seed in range(6):
        Phi, x, y = sparse_instance(200 + seed, 5, 9, 3)
        res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0))
        assert res.objective <= lp_norm(x, 1) + 1e-8


def test_minimality_against_brute_force():
    for seed in range(6):
        Phi, x, y = sparse_instance(300 + seed, 4, 5, 2)
        res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0))
        oracle = oracles.brute_force_min_l1(Phi, y, 3)
        assert abs(res.objective - oracle) < 1e-6


def test_max_iters_status():
    Phi, x, y = sparse_instance(6, 5, 10, 2)
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0),
                SolverParams(max_iters=3, polish=False))
    assert res.status is SolveStatus.MAX_ITERS
    assert res.iterations == 3


def test_infeasible_detection():
    Phi = QMatrix.zeros(3, 5)
    y = QVector.from_real([1.0, 0.0, 0.0])
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0),
                SolverParams(max_iters=50))
    assert res.status is SolveStatus.INFEASIBLE


def test_polish_reports_and_cleans_support():
    Phi, x, y = sparse_instance(7, 6, 12, 2)
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0))
    assert res.polished
    assert support(res.x_hat).indices == support(x).indices
    assert lp_norm(res.x_hat - x, 2) < 1e-9


def test_duplicate_column_instance_stays_feasible():
    # two identical columns make the restricted system rank-deficient, so
    # polish must fall back to the raw iterate without breaking feasibility
    rng = RngStream(8, 0)
    base = sample_gaussian_matrix(rng, 4, 5, 0.25)
    data = base.data.copy()
    data[:, 4] = data[:, 3]
    Phi = QMatrix(data)
    x = QVector.zeros(5)
    x.data[3, 0] = 1.0
    y = matvec(Phi, x)
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0))
    assert lp_norm(matvec(Phi, res.x_hat) - y, 2) <= 1e-7
    # the split mass across the twin columns still beats nothing: objective
    # cannot exceed placing everything on one copy
    assert res.objective <= 1.0 + 1e-7


def test_trace_file(tmp_path):
    Phi, x, y = sparse_instance(9, 4, 6, 1)
    path = tmp_path / "trace.csv"
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0),
                SolverParams(trace_path=str(path)))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iteration", "primal_residual", "dual_residual",
                       "objective", "rho"]
    assert len(rows) - 1 == res.iterations
    assert int(rows[1][0]) == 1
    # residual columns parse back to finite floats
    assert all(math.isfinite(float(r[1])) and math.isfinite(float(r[2]))
               for r in rows[1:])


def test_converged_residuals_below_tolerances():
    Phi, x, y = sparse_instance(10, 5, 8, 2)
    params = SolverParams(tol_primal=1e-10, tol_dual=1e-10)
    res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0), params)
    assert res.status is SolveStatus.CONVERGED
    m4 = 4 * Phi.shape[0]
    norm_b = lp_norm(y, 2)
    assert res.primal_residual <= 1e-10 * (math.sqrt(m4) + norm_b)
    assert res.dual_residual < 1e-6


def test_rho_equivalence_of_solutions():
    # different starting rho must land on the same minimizer
    Phi, x, y = sparse_instance(11, 5, 9, 2)
    sols = []
    for rho in (0.1, 1.0, 10.0):
        res = solve(RecoveryProblem(Phi=Phi, y=y, eta=0.0), SolverParams(rho=rho))
        sols.append(res.x_hat)
    for other in sols[1:]:
        assert lp_norm(other - sols[0], 2) < 1e-7
