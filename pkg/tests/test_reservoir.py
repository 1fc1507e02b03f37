import numpy as np
import pytest

from rcbounds.processes import Moment
from rcbounds.reservoir import (
    Activation,
    EchoStateClass,
    EchoStateReservoir,
    LinearClass,
    LinearReservoir,
    MatrixPolynomial,
    RandomEchoStateClass,
    Readout,
    StateAffineClass,
    StateAffineReservoir,
    bound_M_F,
    esp_convergence_check,
    functional,
    random_esn,
    run_filter,
    sample_from_class,
    sas_eval_poly,
    zero_input_fixed_point,
)

M2 = Moment(1.0 / 3.0, 0.0, "analytic")


def small_linear_class():
    return LinearClass(n_state=3, n_input=2, n_out=1, lam_a=0.6, lam_c=0.8,
                       lam_zeta=0.4, l_h=1.0, l_h0=0.5, input_bound=1.0,
                       input_second_moment=M2)


def small_esn_class():
    return EchoStateClass(n_state=3, n_input=2, n_out=1,
                          row_a=(0.2, 0.2, 0.2), row_c=(0.5, 0.5, 0.5),
                          row_zeta=(0.1, 0.1, 0.1), l_h=1.0, l_h0=0.5,
                          spec_a=0.6, spec_c=0.9, input_bound=1.0,
                          input_second_moment=M2)


def small_sas_class():
    return StateAffineClass(n_state=2, n_input=1, n_out=1,
                            alphas_p=((0,), (1,)), alphas_q=((0,), (2,)),
                            lam_sas=0.45, c_sas=0.8, input_bound=1.0,
                            l_h=1.0, l_h0=0.5)


def test_run_filter_linear_memoryless():
    c = np.array([[1.0, 0.5], [0.0, -1.0]])
    zeta = np.array([0.2, -0.1])
    sys = LinearReservoir(np.zeros((2, 2)), c, zeta)
    z = np.random.default_rng(0).uniform(-1, 1, (7, 2))
    states = run_filter(sys, z, washout=0)
    assert np.allclose(states, z @ c.T + zeta, atol=1e-14)


def test_run_filter_esn_all_zero():
    sys = EchoStateReservoir(np.zeros((3, 3)), np.zeros((3, 1)),
                             np.zeros(3), Activation("tanh"))
    states = run_filter(sys, np.ones((10, 1)) * 0.0, washout=2)
    assert np.all(states == 0.0)


def test_run_filter_scalar_geometric_series():
    sys = LinearReservoir(np.array([[0.5]]), np.array([[1.0]]),
                          np.zeros(1))
    states = run_filter(sys, np.ones((40, 1)), washout=50)
    # washout inputs are zero, so x_t = sum_{j<=t} 0.5^j -> 2
    assert states[0, 0] == 1.0
    partial = sum(0.5 ** j for j in range(40))
    assert abs(states[-1, 0] - partial) < 1e-15
    assert abs(states[-1, 0] - 2.0) < 0.5 ** 38


def test_functional_constant_readout():
    sys = LinearReservoir(np.array([[0.3]]), np.array([[1.0]]), np.zeros(1))
    ro = Readout(np.zeros((2, 1)), np.array([0.7, -0.2]))
    hist = np.random.default_rng(1).uniform(-1, 1, (9, 1))
    out = functional(sys, hist, readout=ro)
    assert np.allclose(out, [0.7, -0.2])


def test_functional_linear_identity_readout():
    c = np.array([[0.4], [0.6]])
    zeta = np.array([0.1, 0.0])
    sys = LinearReservoir(np.zeros((2, 2)), c, zeta)
    ro = Readout(np.eye(2), np.zeros(2))
    hist = np.array([[0.9], [-0.3], [0.25]])
    out = functional(sys, hist, readout=ro)
    # newest input is the last history row
    assert np.allclose(out, c[:, 0] * 0.25 + zeta, atol=1e-14)


def test_functional_sas_constant_polynomials():
    p0 = np.array([[0.3, 0.1], [0.0, 0.2]])
    q0 = np.array([[0.5], [1.0]])
    p = MatrixPolynomial(np.zeros((1, 1)), p0[None])
    q = MatrixPolynomial(np.zeros((1, 1)), q0[None])
    sys = StateAffineReservoir(p, q)
    hist = np.random.default_rng(2).uniform(-1, 1, (5, 1))
    out = functional(sys, hist, input_bound=1.0)
    want = np.linalg.solve(np.eye(2) - p0, q0[:, 0])
    assert np.allclose(out, want, atol=1e-10)
    fp = zero_input_fixed_point(sys)
    assert np.allclose(fp, want, atol=1e-12)


def test_esp_gaps_zero_for_equal_starts():
    sys = LinearReservoir(np.array([[0.5]]), np.array([[1.0]]), np.zeros(1))
    z = np.ones((12, 1))
    res = esp_convergence_check(sys, z, x0_a=[1.5], x0_b=[1.5])
    assert res["gap0"] == 0.0
    assert np.all(res["gaps"] == 0.0)


def test_esp_gaps_scalar_exact_halving():
    sys = LinearReservoir(np.array([[0.5]]), np.array([[1.0]]), np.zeros(1))
    z = np.random.default_rng(3).uniform(-1, 1, (16, 1))
    res = esp_convergence_check(sys, z, x0_a=[2.0], x0_b=[-1.0])
    assert res["gap0"] == 3.0
    want = 3.0 * 0.5 ** np.arange(1, 17)
    assert np.allclose(res["gaps"], want, rtol=1e-13)


def test_esp_gaps_esn_bounded_by_rate():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((6, 6))
    a *= 0.9 / np.linalg.norm(a, 2)
    sys = EchoStateReservoir(a, rng.standard_normal((6, 2)),
                             rng.standard_normal(6), Activation("tanh"))
    z = rng.uniform(-1, 1, (60, 2))
    res = esp_convergence_check(sys, z, seed=11)
    assert abs(res["r"] - 0.9) < 1e-12
    env = res["gap0"] * 0.9 ** np.arange(1, 61)
    assert np.all(res["gaps"] <= env * (1 + 1e-9))


def test_bound_m_f_linear():
    sys = LinearReservoir(np.array([[0.5]]), np.array([[1.0]]), np.zeros(1))
    assert abs(bound_M_F(sys, input_bound=1.0) - 2.0) < 1e-14


def test_bound_m_f_esn_bounded_activation():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 4))
    a *= 0.5 / np.linalg.norm(a, 2)
    sys = EchoStateReservoir(a, rng.standard_normal((4, 1)) * 10,
                             rng.standard_normal(4) * 10, Activation("tanh"))
    # range bound sqrt(4) * 1 beats the linear-style bound here
    assert abs(bound_M_F(sys, input_bound=1.0) - 2.0) < 1e-14


def test_bound_m_f_sas_ratio():
    p = MatrixPolynomial(np.zeros((1, 1)), np.array([[[0.4]]]))
    q = MatrixPolynomial(np.zeros((1, 1)), np.array([[[1.2]]]))
    sys = StateAffineReservoir(p, q)
    assert abs(bound_M_F(sys, input_bound=1.0) - 2.0) < 1e-14


def test_state_stays_in_m_f_ball():
    rng = np.random.default_rng(6)
    for klass in (small_linear_class(), small_esn_class(), small_sas_class()):
        m_f = klass.m_f
        for hyp in sample_from_class(klass, n=10, seed=8):
            z = rng.uniform(-1, 1, (40, klass.n_input))
            states = run_filter(hyp.reservoir, z, washout=5)
            norms = np.linalg.norm(states, axis=1)
            assert norms.max() <= m_f + 1e-9


def test_sas_eval_poly_cases():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    const = MatrixPolynomial(np.zeros((1, 1)), a[None])
    assert np.array_equal(sas_eval_poly(const, [0.3]), a)
    lin = MatrixPolynomial(np.array([[1]]), a[None])
    assert np.allclose(sas_eval_poly(lin, [0.5]), 0.5 * a)
    b = np.array([[2.0, 0.0], [0.0, 2.0]])
    mixed = MatrixPolynomial(np.array([[1, 2]]), b[None])
    # z1 * z2^2 at (0.5, -0.5) is 0.125
    assert np.allclose(sas_eval_poly(mixed, [0.5, -0.5]), 0.125 * b)


def test_sas_filter_matches_truncated_series():
    klass = small_sas_class()
    hyp = sample_from_class(klass, n=1, seed=12)[0]
    res = hyp.reservoir
    rng = np.random.default_rng(13)
    z = rng.uniform(-1, 1, (30, 1))
    states = run_filter(res, z, washout=0)
    r = klass.r
    m_f = klass.m_f
    for t in (5, 12, 29):
        total = np.zeros(klass.n_state)
        j_max = t
        for j in range(j_max + 1):
            term = sas_eval_poly(res.q, z[t - j])[:, 0]
            for k in reversed(range(j)):
                term = sas_eval_poly(res.p, z[t - k]) @ term
            total += term
        tol = m_f * r ** (j_max + 1) / (1 - r)
        assert np.linalg.norm(states[t] - total) <= tol + 1e-12


def test_sample_constant_class_members():
    klass = LinearClass(n_state=2, n_input=1, n_out=2, lam_a=0.0, lam_c=0.0,
                        lam_zeta=0.0, l_h=0.0, l_h0=0.8, input_bound=1.0,
                        input_second_moment=M2)
    for hyp in sample_from_class(klass, n=5, seed=3):
        assert np.all(hyp.readout.w == 0.0)
        assert np.linalg.norm(hyp.readout.a) <= 0.8 + 1e-12
        z = np.random.default_rng(0).uniform(-1, 1, (6, 1))
        out = run_filter(hyp.reservoir, z, washout=0,
                         readout=hyp.readout)
        assert np.allclose(out, out[0])


def test_sampled_linear_norms_sweep_the_cap():
    klass = small_linear_class()
    norms = [np.linalg.norm(h.reservoir.a, 2)
             for h in sample_from_class(klass, n=1000, seed=4)]
    norms = np.array(norms)
    assert norms.max() <= klass.lam_a * (1 + 1e-12)
    assert norms.max() >= 0.9 * klass.lam_a
    assert norms.min() < 0.1 * klass.lam_a


def test_sampled_members_pass_contains():
    for klass in (small_linear_class(), small_esn_class(), small_sas_class()):
        for hyp in sample_from_class(klass, n=25, seed=9):
            assert klass.contains(hyp)


def test_random_esn_rejects_zero_base():
    with pytest.raises(ValueError):
        RandomEchoStateClass(base_a=np.zeros((3, 3)),
                             base_c=np.ones((3, 1)), base_zeta=np.zeros(3),
                             a=0.5, c_scale=1.0, zeta_scale=1.0,
                             l_h=1.0, l_h0=0.5, n_out=1)


def test_random_esn_row_sum_cap_is_a():
    klass = random_esn(5, 2, 1, a=0.5, c_scale=1.0, zeta_scale=0.5,
                       l_h=1.0, l_h0=0.5, seed=7,
                       input_second_moment=M2)
    assert klass.lam_a == 0.5
    member = klass.member(klass.rho_a_max, 0.3, 0.1)
    ls = klass.activation.lipschitz
    row_sum = ls * np.sum(np.abs(member.a).max(axis=1))
    assert abs(row_sum - 0.5) < 1e-12


def test_random_esn_lam_c_matches_mc_mean():
    # uniform entries, n_input=1: E||C_row|| = E|u| = 1/2, so the class
    # constant averages to c_scale * N / 2 over template draws
    n, c_scale, draws = 10, 0.7, 400
    vals = np.array([
        random_esn(n, 1, 1, a=0.5, c_scale=c_scale, zeta_scale=0.1,
                   l_h=1.0, l_h0=0.5, entry_law="uniform", seed=1000 + i,
                   input_second_moment=M2).lam_c
        for i in range(draws)])
    want = c_scale * n * 0.5
    se = vals.std(ddof=1) / np.sqrt(draws)
    assert abs(vals.mean() - want) <= 3 * se


def test_random_esn_member_rejects_cap_violation():
    klass = random_esn(4, 1, 1, a=0.5, c_scale=1.0, zeta_scale=0.5,
                       l_h=1.0, l_h0=0.5, seed=2, input_second_moment=M2)
    with pytest.raises(ValueError):
        klass.member(klass.rho_a_max * 1.01, 0.0, 0.0)


def test_class_invariant_validation():
    with pytest.raises(ValueError):
        LinearClass(n_state=2, n_input=1, n_out=1, lam_a=1.0, lam_c=1.0,
                    lam_zeta=0.0, l_h=1.0, l_h0=0.0, input_bound=1.0,
                    input_second_moment=M2)
    with pytest.raises(ValueError):
        StateAffineClass(n_state=2, n_input=1, n_out=1, alphas_p=((0,),),
                         alphas_q=((0,),), lam_sas=1.1, c_sas=1.0,
                         input_bound=1.0, l_h=1.0, l_h0=0.0)


def test_esn_class_rate_uses_spectral_cap():
    klass = small_esn_class()
    assert abs(klass.r - 0.6) < 1e-14
    # row-sum constant for the Rademacher route is the summed row caps
    assert abs(klass.lam_a - 0.6) < 1e-14
