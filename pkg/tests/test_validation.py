import math

import numpy as np
import pytest

from rcbounds.bounds import rademacher_constant
from rcbounds.learning import IndependentJoint, LossFunction, TeacherJoint
from rcbounds.processes import (
    ARFIMAProcess,
    IIDProcess,
    InnovationLaw,
    Moment,
    dependence_params,
)
from rcbounds.reservoir import (
    Hypothesis,
    LinearClass,
    LinearReservoir,
    Readout,
    sample_from_class,
)
from rcbounds.validation import (
    candidate_set,
    consistency_curve,
    expected_loss_at_zero,
    history_lipschitz_check,
    mc_rademacher,
    risk_gap_experiment,
    target_l2_moment,
    teacher_target_profile,
    truncation_gap_experiment,
)

UNIF = InnovationLaw("uniform", 1, 1.0)
ABS = LossFunction("absolute")
M2_UNIF = Moment(1.0 / 3.0, 0.0, "analytic")


def uniform_linear_class():
    return LinearClass(n_state=4, n_input=1, n_out=1, lam_a=0.6, lam_c=0.6,
                       lam_zeta=0.3, l_h=1.0, l_h0=0.2, input_bound=1.0,
                       input_second_moment=M2_UNIF)


def teacher_setup(seed=7):
    klass = uniform_linear_class()
    teacher = sample_from_class(klass, n=1, seed=seed)[0]
    joint = TeacherJoint(IIDProcess(UNIF), teacher,
                         noise_law=InnovationLaw("gaussian", 1, 0.05))
    prof = teacher_target_profile(dependence_params(IIDProcess(UNIF)), klass)
    return klass, joint, prof


def test_candidate_set_contains_boundary_and_zero():
    klass = uniform_linear_class()
    cands = candidate_set(klass, n_random=6, seed=0)
    assert len(cands) >= 8
    norms_a = [np.linalg.norm(h.reservoir.a, 2) for h in cands]
    assert any(abs(v - klass.lam_a) < 1e-9 for v in norms_a)
    assert any(np.all(h.readout.w == 0.0) and np.all(h.readout.a == 0.0)
               for h in cands)
    for h in cands:
        assert klass.contains(h)


def test_mc_rademacher_constant_candidate():
    zero_res = LinearReservoir(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros(1))
    const = Hypothesis(zero_res, Readout(np.zeros((1, 1)), np.array([0.5])))
    est = mc_rademacher([const], IIDProcess(UNIF), k=1, n_rep=4000, seed=1)
    # sup over {H == 0.5} of |(1/k) sum eps_i 0.5| has mean exactly 0.5 at k=1
    assert abs(est.value - 0.5) <= 4 * est.std_error + 1e-12


def test_mc_rademacher_zero_candidate_exact():
    zero_res = LinearReservoir(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros(1))
    zero = Hypothesis(zero_res, Readout(np.zeros((1, 1)), np.zeros(1)))
    est = mc_rademacher([zero], IIDProcess(UNIF), k=8, n_rep=50, seed=2)
    assert est.value == 0.0


def test_mc_rademacher_below_class_cap():
    klass = uniform_linear_class()
    c_rc = rademacher_constant(klass)
    for k in (16, 64):
        est = mc_rademacher(klass, IIDProcess(UNIF), k=k, n_rep=48, seed=3,
                            n_random=10)
        assert est.value <= c_rc / math.sqrt(k) + 3 * est.std_error


def test_truncation_gaps_within_envelope():
    klass = uniform_linear_class()
    res = truncation_gap_experiment(klass, IIDProcess(UNIF),
                                    InnovationLaw("gaussian", 1, 1.0),
                                    ns=(10, 100), n_trials=40, n_random=20,
                                    seed=4)
    assert res["violations"] == 0
    assert set(res["bounds"]) == {10, 100}
    # envelope C0 (1 - r^n) / n shrinks with n
    assert res["bounds"][100] < res["bounds"][10]


def test_history_lipschitz_holds_across_seeds():
    klass = uniform_linear_class()
    for sd in (5, 17):
        res = history_lipschitz_check(klass, input_bound=math.sqrt(3.0),
                                      n_pairs=150, seed=sd)
        assert res["worst_ratio"] <= 1.0 + 1e-9
        assert res["n_systems"] > 0


def test_risk_gap_certificate_covers():
    klass, joint, prof = teacher_setup()
    cov = risk_gap_experiment(klass, joint, ABS, prof, "geometric", n=256,
                              n_trials=50, delta=0.1, n_random=6, seed=8,
                              history=120, n_pool=8000, erm_iters=60)
    assert cov.coverage == 1.0
    assert cov.slack > 1.0
    assert cov.max_gap <= cov.bound


def test_consistency_curve_decreases():
    klass, joint, prof = teacher_setup()
    rows = consistency_curve(klass, joint, ABS, prof, "geometric",
                             ns=(200, 2000, 20000), n_trials=12, n_random=5,
                             seed=9, history=120, n_pool=6000)
    bounds_seq = [row["bound"] for row in rows]
    med_seq = [row["median_gap"] for row in rows]
    assert all(b2 < b1 for b1, b2 in zip(bounds_seq, bounds_seq[1:]))
    assert all(m2 < m1 for m1, m2 in zip(med_seq, med_seq[1:]))
    assert all(row["coverage"] == 1.0 for row in rows)


def test_consistency_rows_keyed_by_n_value():
    # a single-n call reproduces the grid row for that n
    klass, joint, prof = teacher_setup()
    grid = consistency_curve(klass, joint, ABS, prof, "geometric",
                             ns=(200, 2000), n_trials=6, n_random=4,
                             seed=10, history=100, n_pool=4000)
    solo = consistency_curve(klass, joint, ABS, prof, "geometric",
                             ns=(2000,), n_trials=6, n_random=4,
                             seed=10, history=100, n_pool=4000)
    a, b = grid[1], solo[0]
    assert a["n"] == b["n"] == 2000
    assert a["median_gap"] == b["median_gap"]
    assert a["bound"] == b["bound"]


def test_teacher_target_profile_iid_inputs():
    z_prof = dependence_params(IIDProcess(UNIF))
    klass = uniform_linear_class()
    prof = teacher_target_profile(z_prof, klass)
    # the teacher output still carries its own state memory at rate r
    assert prof.regime == "geometric"
    assert prof.exact_zero_z and not prof.exact_zero_y
    assert abs(prof.rate_y - klass.r) < 1e-12
    assert abs(prof.c_y.value - 2.0 * klass.l_h * klass.m_f) < 1e-12


def test_teacher_target_profile_geometric_inputs():
    from rcbounds.processes import GARCHProcess
    z_prof = dependence_params(GARCHProcess(omega=0.05, alpha=0.10,
                                            beta=0.85))
    klass = uniform_linear_class()
    prof = teacher_target_profile(z_prof, klass)
    assert prof.regime == "geometric"
    assert not prof.exact_zero_z
    # the target decay rate cannot be faster than the input decay
    assert prof.rate_y >= z_prof.rate_z - 1e-12
    assert prof.c_y.value > 0
    slow = dict(r=0.99, m_f=1.0, l_r=1.0, l_h=1.0)
    with pytest.raises(ValueError):
        teacher_target_profile(z_prof, slow)


def test_teacher_target_profile_rejects_algebraic():
    z_prof = dependence_params(ARFIMAProcess(d_frac=0.3, trunc=2000))
    with pytest.raises(ValueError):
        teacher_target_profile(z_prof, uniform_linear_class())


def test_expected_loss_and_target_moment_helpers():
    _, joint, _ = teacher_setup()
    e0 = expected_loss_at_zero(joint, ABS, n_mc=4000, history=80, seed=1)
    assert e0.value > 0 and e0.std_error > 0
    m2 = target_l2_moment(joint, n_mc=4000, history=80, seed=2)
    assert m2.value > 0
    # teacher outputs live inside the readout caps plus noise
    klass = uniform_linear_class()
    cap = klass.l_h * klass.m_f + klass.l_h0
    assert math.sqrt(m2.value) <= cap + 3 * 0.05
