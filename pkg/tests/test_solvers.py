import numpy as np
import pytest

from sympint import (ConfigError, SolverFailure, SolverMethod, SolverPolicy,
                     contraction_bound, get_system, make_state, solve_aitken,
                     solve_fixed_point, solve_newton, solve_stage)


def affine(slope, offset):
    return lambda x: slope * x + offset


def fixed_policy(tol=1e-13, max_iter=100):
    return SolverPolicy(method=SolverMethod.FIXED_POINT, tol=tol,
                        max_iter=max_iter)


def test_fixed_point_affine_contraction():
    # x -> 0.5 x + 1 has fixed point 2
    out = solve_fixed_point(affine(0.5, 1.0), np.array([0.0]),
                            fixed_policy())
    np.testing.assert_allclose(out.solution, [2.0], atol=1e-12)
    assert out.final_residual <= 1e-13
    assert out.contraction_estimate == pytest.approx(0.5, abs=1e-6)


def test_fixed_point_flags_divergence():
    with pytest.raises(SolverFailure) as exc:
        solve_fixed_point(affine(2.0, 1.0), np.array([0.0]), fixed_policy())
    assert exc.value.reason == "DIVERGENCE"
    assert exc.value.iterations < 100


def test_fixed_point_max_iter_history_length():
    # contraction 0.999 cannot reach 1e-13 in 10 iterations
    with pytest.raises(SolverFailure) as exc:
        solve_fixed_point(affine(0.999, 1.0), np.array([0.0]),
                          fixed_policy(max_iter=10))
    assert exc.value.reason == "MAX_ITER_EXCEEDED"
    assert len(exc.value.residual_history) == 10


def test_aitken_beats_plain_iteration():
    target = lambda x: np.cos(x)
    pol = SolverPolicy(method=SolverMethod.AITKEN, tol=1e-12, max_iter=200)
    plain = solve_fixed_point(target, np.array([1.0]),
                              fixed_policy(tol=1e-12, max_iter=200))
    fast = solve_aitken(target, np.array([1.0]), pol)
    np.testing.assert_allclose(fast.solution, plain.solution, atol=1e-10)
    assert fast.iterations < plain.iterations


def test_aitken_exact_on_affine_sequences():
    # slope 0.95: plain iteration would need hundreds of sweeps
    pol = SolverPolicy(method=SolverMethod.AITKEN, tol=1e-12, max_iter=50)
    out = solve_aitken(affine(0.95, 1.0), np.array([0.0]), pol)
    np.testing.assert_allclose(out.solution, [20.0], atol=1e-9)
    assert out.iterations < 50


def test_newton_vector_residual():
    def m(z):  # fixed point of (cos p, 0.5 sin q)
        return np.array([np.cos(z[1]), 0.5 * np.sin(z[0])])

    pol = SolverPolicy(tol=1e-14, max_iter=25)
    out = solve_newton(lambda z: z - m(z), np.array([1.0, 0.0]), pol)
    np.testing.assert_allclose(out.solution, m(out.solution), atol=1e-13)
    assert out.iterations <= 10


def test_newton_flags_singular_jacobian():
    # constant residual: the Newton matrix is identically zero
    pol = SolverPolicy(tol=1e-12, max_iter=10)
    with pytest.raises(SolverFailure) as exc:
        solve_newton(lambda x: -np.ones_like(x), np.array([0.0]), pol)
    assert exc.value.reason == "SINGULAR_JACOBIAN"


def test_policy_validation():
    with pytest.raises(ConfigError):
        SolverPolicy(tol=0.0)
    with pytest.raises(ConfigError):
        SolverPolicy(max_iter=0)
    with pytest.raises(ConfigError):
        SolverPolicy(jacobian_step=-1e-6)


def test_solve_stage_dispatch_and_labels():
    m = affine(0.5, 1.0)
    for pol in (fixed_policy(tol=1e-12),
                SolverPolicy(method=SolverMethod.AITKEN, tol=1e-12),
                SolverPolicy(method=SolverMethod.NEWTON, tol=1e-13)):
        out = solve_stage(m, np.array([0.0]), pol, stage="position stage")
        np.testing.assert_allclose(out.solution, [2.0], atol=1e-11)
    with pytest.raises(SolverFailure) as exc:
        solve_stage(affine(2.0, 1.0), np.array([0.0]),
                    fixed_policy(tol=1e-12), stage="position stage")
    assert exc.value.stage == "position stage"
    assert "position stage" in str(exc.value)


def test_contraction_bound_ramp_kinetic():
    # H = q p^2 / 2 gives f = q p, so |h df/dq| = |h p|
    sysd = get_system("ramp-kinetic")
    assert contraction_bound(sysd, make_state(0.3, 0.5), 0.2) == \
        pytest.approx(0.1, abs=1e-12)
    assert contraction_bound(sysd, make_state(0.3, 3.0), 0.5) == \
        pytest.approx(1.5, abs=1e-12)
    assert contraction_bound(sysd, make_state(0.3, 3.0), 0.0) == 0.0


def test_contraction_bound_separable_is_zero():
    # f = p does not depend on q: the implicit stage is a direct assignment
    sysd = get_system("pendulum")
    assert contraction_bound(sysd, make_state(1.0, 2.0), 0.5) == \
        pytest.approx(0.0, abs=1e-9)


def test_contraction_bound_sine_kinetic():
    # f = p sin q, df/dq = p cos q
    sysd = get_system("sine-kinetic")
    got = contraction_bound(sysd, make_state(0.0, 1.0), 0.1)
    assert got == pytest.approx(0.1, abs=1e-9)


def test_contraction_bound_multidim_fd():
    # 2-DOF separable system exercises the FD branch; f = p is q-independent
    sysd = get_system("henon-heiles")
    s = make_state([0.3, -0.2], [0.1, 0.4])
    assert contraction_bound(sysd, s, 0.5) == pytest.approx(0.0, abs=1e-9)
