"""Losses, empirical and statistical risks, and constrained readout fitting.

The certified losses have the separable form L(x, y) = sum_i f_i(x_i - y_i)
with f_i = (l_l / sqrt(m)) g and g a 1-Lipschitz scalar function vanishing
at 0; then |L(x, y) - L(x', y')| <= l_l (||x - x'||_2 + ||y - y'||_2).
The squared loss is provided for convenience but flagged uncertified (its
g is not Lipschitz), and the certificate routines reject it.

Empirical risks follow the truncated-sample convention: the input window
(z_1, ..., z_n) is preceded by an all-zero past, so the recursion opens at
the zero-input fixed point of the state map and the whole risk costs one
forward pass.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.linalg import solve_discrete_lyapunov
from scipy.special import erf

from .processes import Moment, batch_paths, dim as process_dim, generate_path
from .reservoir import (
    Hypothesis,
    LinearReservoir,
    Readout,
    iterate_states,
    iterate_states_batch,
    zero_input_fixed_point,
)

__all__ = [
    "LossFunction",
    "loss_value",
    "empirical_risk",
    "idealized_empirical_risk",
    "IndependentJoint",
    "TeacherJoint",
    "sample_joint",
    "sample_joint_paths",
    "statistical_risk_mc",
    "exact_risk",
    "fit_readout_erm",
]


@dataclass(frozen=True)
class LossFunction:
    """Separable loss L(x, y) = (l_l / sqrt(m)) sum_i g(x_i - y_i).

    kind "absolute": g(u) = |u|
    kind "huber":    g(u) = u^2/2 below delta, delta (|u| - delta/2) above;
                     1-Lipschitz iff delta <= 1
    kind "pinball":  g(u) = max(quantile * u, (quantile - 1) * u)
    kind "squared":  g(u) = u^2, NOT Lipschitz; certified is False and the
                     certificate chain refuses it
    """

    kind: str = "absolute"
    l_l: float = 1.0
    delta: float = 1.0
    quantile: float = 0.5

    def __post_init__(self):
        if self.kind not in ("absolute", "huber", "pinball", "squared"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.l_l <= 0:
            raise ValueError("l_l must be > 0")
        if self.kind == "huber" and not 0.0 < self.delta <= 1.0:
            raise ValueError("huber delta must lie in (0, 1] to keep g 1-Lipschitz")
        if self.kind == "pinball" and not 0.0 < self.quantile < 1.0:
            raise ValueError("quantile must lie in (0, 1)")

    @property
    def certified(self):
        return self.kind != "squared"

    def g(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "absolute":
            return np.abs(u)
        if self.kind == "huber":
            a = np.abs(u)
            return np.where(a <= self.delta, 0.5 * u ** 2,
                            self.delta * (a - 0.5 * self.delta))
        if self.kind == "pinball":
            return np.maximum(self.quantile * u, (self.quantile - 1.0) * u)
        return u ** 2

    def g_prime(self, u):
        """A subgradient of g (used by the ERM solver)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "absolute":
            return np.sign(u)
        if self.kind == "huber":
            return np.clip(u, -self.delta, self.delta)
        if self.kind == "pinball":
            return np.where(u >= 0, self.quantile, self.quantile - 1.0)
        return 2.0 * u

    def per_sample(self, pred, target):
        """Loss of each row of pred against target, shape (n,)."""
        pred = _as_columns(pred)
        target = _as_columns(target)
        if pred.shape != target.shape:
            raise ValueError("pred and target must have matching shapes")
        m = pred.shape[1]
        return self.l_l / np.sqrt(m) * self.g(pred - target).sum(axis=1)


def loss_value(loss, x, y):
    """L(x, y) for single vectors x, y."""
    return float(loss.per_sample(np.atleast_1d(x)[None, :],
                                 np.atleast_1d(y)[None, :])[0])


def _as_columns(y):
    """Coerce targets to shape (n, m); a flat vector becomes (n, 1)."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        return y[:, None]
    if y.ndim != 2:
        raise ValueError("targets must be (n,) or (n, m)")
    return y


def _window(hyp, inputs):
    """Readout outputs along the window, recursion opened at the
    zero-input fixed point (all-zero past)."""
    x0 = zero_input_fixed_point(hyp.reservoir)
    states = iterate_states(hyp.reservoir, inputs, x0=x0)
    return hyp.readout(states)


def empirical_risk(hyp, inputs, targets, loss):
    """Average loss over the window under the zero-padded past convention.

    inputs: (n, d) window (oldest first); targets: (n, m).  The prediction
    at step t uses inputs[0..t] only, so the whole risk is one O(n) pass.
    """
    targets = _as_columns(targets)
    preds = _window(hyp, inputs)
    if preds.shape[0] != targets.shape[0]:
        raise ValueError("inputs and targets must have the same length")
    return float(loss.per_sample(preds, targets).mean())


def idealized_empirical_risk(hyp, inputs, targets, pre_inputs, loss):
    """Average loss with the window preceded by an explicit pre-history.

    pre_inputs (p, d) approximates the unobserved infinite past; with p = 0
    this reduces exactly to empirical_risk.  The neglected tail beyond the
    pre-history is zero padded (contributing at most r^p M_F in state).
    """
    targets = _as_columns(targets)
    pre_inputs = np.asarray(pre_inputs, dtype=float)
    if pre_inputs.size == 0:
        return empirical_risk(hyp, inputs, targets, loss)
    pre_inputs = np.atleast_2d(pre_inputs)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    full = np.vstack([pre_inputs, inputs])
    preds = _window(hyp, full)[pre_inputs.shape[0]:]
    return float(loss.per_sample(preds, targets).mean())


# ---------------------------------------------------------------------------
# joint input/target models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndependentJoint:
    """Inputs from z_model; targets i.i.d. from y_law, independent of z."""

    z_model: object
    y_law: object

    @property
    def n_out(self):
        return self.y_law.dim


@dataclass(frozen=True)
class TeacherJoint:
    """Targets produced by a fixed teacher hypothesis driven by the inputs.

    Y_t = teacher(Z up to t) + noise_t (noise optional, i.i.d.).  The
    teacher recursion opens at its zero-input fixed point after `history`
    steps, so Y_0 approximates a stationary functional of the input past.
    """

    z_model: object
    teacher: Hypothesis
    noise_law: object = None

    @property
    def n_out(self):
        return self.teacher.readout.w.shape[0]


def sample_joint(joint, n_mc, history, seed=0):
    """n_mc independent (input history, target) pairs.

    Returns (Z, Y) with Z of shape (n_mc, history, d) (oldest first) and Y
    of shape (n_mc, m): the target paired with the window's final time.
    """
    if history < 1:
        raise ValueError("history must be >= 1")
    z = batch_paths(joint.z_model, n_mc, history, seed=seed)
    rng = np.random.default_rng(seed + n_mc + 1)  # target noise stream
    if isinstance(joint, IndependentJoint):
        y = joint.y_law.sample(rng, n_mc)
        return z, y
    if isinstance(joint, TeacherJoint):
        x0 = zero_input_fixed_point(joint.teacher.reservoir)
        x0b = np.broadcast_to(x0, (n_mc, x0.shape[0]))
        finals = iterate_states_batch(joint.teacher.reservoir, z, x0=x0b.copy())
        y = joint.teacher.readout(finals)
        if joint.noise_law is not None:
            y = y + joint.noise_law.sample(rng, n_mc)
        return z, y
    raise ValueError(f"unsupported joint model {type(joint).__name__}")


def sample_joint_paths(joint, n_trials, n, history=200, seed=0):
    """Paired training series: n_trials runs of (z_t, y_t) for t = 1..n.

    Returns (Z, Y) with shapes (n_trials, n, d) and (n_trials, n, m).  For
    a teacher joint the target at each time reads out the teacher state
    driven by the extra `history` prefix steps (discarded afterwards), so
    the pairs sit close to the stationary joint law.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = history + n
    z = batch_paths(joint.z_model, n_trials, total, seed=seed)
    rng = np.random.default_rng(seed + n_trials + 1)
    if isinstance(joint, IndependentJoint):
        y = joint.y_law.sample(rng, n_trials, total)
    elif isinstance(joint, TeacherJoint):
        x0 = zero_input_fixed_point(joint.teacher.reservoir)
        x0b = np.broadcast_to(x0, (n_trials, x0.shape[0])).copy()
        states = iterate_states_batch(joint.teacher.reservoir, z, x0=x0b,
                                      return_all=True)
        y = joint.teacher.readout(states.reshape(n_trials * total, -1))
        y = y.reshape(n_trials, total, -1)
        if joint.noise_law is not None:
            y = y + joint.noise_law.sample(rng, n_trials, total)
    else:
        raise ValueError(f"unsupported joint model {type(joint).__name__}")
    return z[:, history:], y[:, history:]


def statistical_risk_mc(hyp, joint, loss, n_mc=2000, history=200, seed=0):
    """Monte Carlo estimate of the statistical risk E[L(H(Z), Y_0)].

    Histories of the given length open at the hypothesis' zero-input fixed
    point; the truncation error in each prediction is at most
    l_h * r^history * (M_F + ||x*||).  Returns a Moment with provenance
    "mc".
    """
    z, y = sample_joint(joint, n_mc, history, seed)
    x0 = zero_input_fixed_point(hyp.reservoir)
    x0b = np.broadcast_to(x0, (n_mc, x0.shape[0])).copy()
    finals = iterate_states_batch(hyp.reservoir, z, x0=x0b)
    preds = hyp.readout(finals)
    vals = loss.per_sample(preds, _as_columns(y))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    return Moment(mean, se, "mc")


def _folded_normal_mean(mu, var):
    # E|X| for X ~ N(mu, var)
    if var <= 0:
        return abs(mu)
    s = np.sqrt(var)
    return (np.sqrt(2.0 * var / np.pi) * np.exp(-mu ** 2 / (2.0 * var))
            + mu * erf(mu / np.sqrt(2.0 * var)))


def _mean_abs_cf(deltas, gauss_var, mu):
    """E|X| for X = mu + sum_i U(-deltas_i, deltas_i) + N(0, gauss_var).

    Uses E|X| = (2/pi) int_0^inf (1 - Re phi_X(t)) / t^2 dt; the tail
    beyond T contributes 1/T plus a remainder below 1e-13 once the
    envelope prod min(1, 1/(d_i t)) exp(-gauss_var t^2 / 2) is small
    enough.  Degenerate sums (no terms, or one uniform and no gaussian)
    take their closed forms instead.
    """
    d = np.abs(np.asarray(deltas, dtype=float).ravel())
    d = d[d > 0]
    var = float(np.sum(d ** 2) / 3.0 + gauss_var)
    if var <= 0:
        return abs(mu)
    if d.size == 0:
        return _folded_normal_mean(mu, gauss_var)
    if d.size == 1 and gauss_var == 0.0:
        a = d[0]
        if abs(mu) >= a:
            return abs(mu)
        return (a * a + mu * mu) / (2.0 * a)

    t0 = 1e-4 / math.sqrt(var)
    second = 0.5 * (var + mu * mu)

    def integrand(t):
        if t < t0:
            return second
        x = d * t
        phi = (float(np.prod(np.sinc(x / np.pi)))
               * math.exp(-0.5 * gauss_var * t * t) * math.cos(mu * t))
        return (1.0 - phi) / (t * t)

    def envelope(t):
        dt = d * t
        val = float(np.prod(np.minimum(1.0, 1.0 / np.maximum(dt, 1e-300))))
        return val * math.exp(-0.5 * gauss_var * t * t)

    t_hi = 10.0 / math.sqrt(var)
    while envelope(t_hi) / t_hi > 1e-13 and t_hi < 1e12:
        t_hi *= 2.0
    with warnings.catch_warnings():
        # long oscillatory ranges trip quadpack's roundoff heuristic while
        # the achieved accuracy (checked against closed forms) is ~1e-10
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(integrand, 0.0, t_hi, limit=500, epsabs=1e-11,
                      epsrel=1e-10)
    return 2.0 / math.pi * (val + 1.0 / t_hi)


def _lrc_kappa_chain(res, readout, tol=1e-16):
    """Rows kappa_j = w A^j C of the linear prediction as a (J, d) array,
    truncated once the spectral tail falls below tol, plus the constant
    part w (I - A)^(-1) zeta + a."""
    rho = float(np.linalg.norm(res.a, 2))
    if rho >= 1.0:
        raise ValueError("need |||A|||_2 < 1")
    wn = float(np.linalg.norm(readout.w)) * float(np.linalg.norm(res.c, 2))
    j_max = 1
    if wn > 0 and rho > 0:
        j_max = max(1, int(math.ceil(math.log(tol / (wn / (1 - rho)))
                                     / math.log(rho))))
    rows = []
    v = readout.w.copy()  # (1, N)
    for _ in range(min(j_max, 100_000)):
        rows.append((v @ res.c)[0])
        v = v @ res.a
    const = float((readout.w @ np.linalg.solve(np.eye(res.n_state) - res.a,
                                               res.zeta) + readout.a)[0])
    return np.array(rows), const


def exact_risk(hyp, joint, loss):
    """Closed-form statistical risk for linear scalar-output hypotheses.

    Requires the absolute loss, a linear reservoir with scalar output and
    i.i.d. inputs.  Gaussian inputs with gaussian targets (independent or
    linear teacher plus gaussian noise) reduce to a folded-normal mean via
    the stationary state covariance.  Uniform inputs reduce to a
    characteristic-function quadrature over the prediction-error law.
    Raises ValueError outside this scope.
    """
    from .processes import IIDProcess

    if loss.kind != "absolute":
        raise ValueError("exact_risk needs the absolute loss")
    res, ro = hyp.reservoir, hyp.readout
    if not isinstance(res, LinearReservoir) or ro.w.shape[0] != 1:
        raise ValueError("exact_risk needs a linear reservoir with scalar output")
    zm = joint.z_model
    if not isinstance(zm, IIDProcess):
        raise ValueError("exact_risk needs i.i.d. inputs")
    if zm.law.kind == "uniform":
        return _exact_risk_uniform(hyp, joint, loss)
    if zm.law.kind != "gaussian":
        raise ValueError("exact_risk needs gaussian or uniform inputs")
    s2 = zm.law.scale ** 2

    # stationary mean and covariance of the hypothesis state
    mu_h = np.linalg.solve(np.eye(res.n_state) - res.a, res.zeta)

    if isinstance(joint, IndependentJoint):
        if joint.y_law.kind != "gaussian" or joint.y_law.dim != 1:
            raise ValueError("independent targets must be scalar gaussian")
        cov = solve_discrete_lyapunov(res.a, s2 * (res.c @ res.c.T))
        mu = float((ro.w @ mu_h + ro.a)[0])
        var = float(ro.w[0] @ cov @ ro.w[0]) + joint.y_law.scale ** 2
        return Moment(loss.l_l * _folded_normal_mean(mu, var), 0.0, "analytic")

    if isinstance(joint, TeacherJoint):
        tres, tro = joint.teacher.reservoir, joint.teacher.readout
        if not isinstance(tres, LinearReservoir) or tro.w.shape[0] != 1:
            raise ValueError("exact_risk needs a linear teacher with scalar output")
        if joint.noise_law is not None and joint.noise_law.kind != "gaussian":
            raise ValueError("teacher noise must be gaussian")
        n1, n2 = res.n_state, tres.n_state
        a_big = np.zeros((n1 + n2, n1 + n2))
        a_big[:n1, :n1] = res.a
        a_big[n1:, n1:] = tres.a
        c_big = np.vstack([res.c, tres.c])
        cov = solve_discrete_lyapunov(a_big, s2 * (c_big @ c_big.T))
        mu_t = np.linalg.solve(np.eye(n2) - tres.a, tres.zeta)
        w_big = np.concatenate([ro.w[0], -tro.w[0]])
        mu = float((ro.w @ mu_h + ro.a - tro.w @ mu_t - tro.a)[0])
        var = float(w_big @ cov @ w_big)
        if joint.noise_law is not None:
            var += joint.noise_law.scale ** 2
        return Moment(loss.l_l * _folded_normal_mean(mu, var), 0.0, "analytic")

    raise ValueError(f"unsupported joint model {type(joint).__name__}")


def _exact_risk_uniform(hyp, joint, loss):
    # prediction error = sum of independent scaled uniforms (one per input
    # coordinate per lag) plus optional gaussian noise plus a constant
    scale = joint.z_model.law.scale
    kap, mu_h = _lrc_kappa_chain(hyp.reservoir, hyp.readout)

    if isinstance(joint, IndependentJoint):
        if joint.y_law.dim != 1:
            raise ValueError("independent targets must be scalar")
        deltas = list(np.abs(kap.ravel()) * scale)
        gv = 0.0
        if joint.y_law.kind == "gaussian":
            gv = joint.y_law.scale ** 2
        elif joint.y_law.kind == "uniform":
            deltas.append(joint.y_law.scale)
        else:
            raise ValueError("targets must be gaussian or uniform")
        return Moment(loss.l_l * _mean_abs_cf(deltas, gv, mu_h), 0.0,
                      "analytic")

    if isinstance(joint, TeacherJoint):
        tres, tro = joint.teacher.reservoir, joint.teacher.readout
        if not isinstance(tres, LinearReservoir) or tro.w.shape[0] != 1:
            raise ValueError("exact_risk needs a linear teacher with scalar output")
        if joint.noise_law is not None and joint.noise_law.kind != "gaussian":
            raise ValueError("teacher noise must be gaussian")
        kap_t, mu_t = _lrc_kappa_chain(tres, tro)
        j = max(kap.shape[0], kap_t.shape[0])
        diff = np.zeros((j, kap.shape[1]))
        diff[: kap.shape[0]] = kap
        diff[: kap_t.shape[0]] -= kap_t
        gv = joint.noise_law.scale ** 2 if joint.noise_law is not None else 0.0
        return Moment(loss.l_l * _mean_abs_cf(np.abs(diff.ravel()) * scale,
                                              gv, mu_h - mu_t), 0.0, "analytic")

    raise ValueError(f"unsupported joint model {type(joint).__name__}")


# ---------------------------------------------------------------------------
# constrained empirical risk minimization over readouts
# ---------------------------------------------------------------------------


def _project_spectral(w, cap):
    if cap == 0.0:
        return np.zeros_like(w)
    try:
        u, s, vt = np.linalg.svd(w, full_matrices=False)
    except np.linalg.LinAlgError:
        return w * (cap / max(np.linalg.norm(w), 1e-300))
    if s.size == 0 or s[0] <= cap:
        return w
    return (u * np.minimum(s, cap)) @ vt

def _project_ball(a, cap):
    n = np.linalg.norm(a)
    if n <= cap or n == 0.0:
        return a if n <= cap else np.zeros_like(a)
    return a * (cap / n)


def _objective(loss, x, y, w, a):
    return float(loss.per_sample(x @ w.T + a, y).mean())


def fit_readout_erm(states, targets, caps, loss, n_iter=300, n_restarts=5,
                    seed=0, tol=1e-6):
    """Empirical risk minimizer over affine readouts h(x) = W x + a with
    |||W|||_2 <= caps[0] and ||a||_2 <= caps[1].

    Projected subgradient descent from several starts (a clipped
    least-squares solution, zero, and random draws), keeping the best
    projected iterate; for the scalar absolute loss the offset is polished
    to the clamped median of the residuals, which is exactly optimal at
    fixed W.  The objective is convex, so the best iterate is within the
    step-size resolution of the optimum.
    """
    x = np.atleast_2d(np.asarray(states, dtype=float))
    y = _as_columns(targets)
    if x.shape[0] != y.shape[0]:
        raise ValueError("states and targets must have the same length")
    l_h, l_h0 = float(caps[0]), float(caps[1])
    if l_h < 0 or l_h0 < 0:
        raise ValueError("caps must be >= 0")
    n, n_state = x.shape
    m = y.shape[1]
    rng = np.random.default_rng(seed)

    def polish_offset(w, a):
        if l_h0 == 0.0:
            return np.zeros(m)
        if loss.kind == "absolute":
            med = np.median(y - x @ w.T, axis=0)
            return _project_ball(med, l_h0)
        if loss.kind in ("squared", "huber"):
            return _project_ball((y - x @ w.T).mean(axis=0), l_h0)
        resid = y - x @ w.T
        return _project_ball(np.quantile(resid, loss.quantile, axis=0), l_h0)

    starts = []
    wls, *_ = np.linalg.lstsq(np.hstack([x, np.ones((n, 1))]), y, rcond=None)
    w0 = _project_spectral(wls[:n_state].T, l_h)
    starts.append((w0, _project_ball(wls[n_state], l_h0)))
    starts.append((np.zeros((m, n_state)), np.zeros(m)))
    while len(starts) < n_restarts:
        w = _project_spectral(rng.standard_normal((m, n_state)) * l_h, l_h)
        a = _project_ball(rng.standard_normal(m) * l_h0, l_h0)
        starts.append((w, a))

    best = None
    scale = max(l_h, l_h0, 1.0)
    for w, a in starts:
        a = polish_offset(w, a)
        cur = _objective(loss, x, y, w, a)
        if best is None or cur < best[0]:
            best = (cur, w.copy(), a.copy())
        for k in range(n_iter):
            pred = x @ w.T + a
            gmat = loss.g_prime(pred - y) * (loss.l_l / np.sqrt(m))
            grad_w = gmat.T @ x / n
            grad_a = gmat.mean(axis=0)
            gn = np.sqrt(np.sum(grad_w ** 2) + np.sum(grad_a ** 2))
            if gn <= tol:
                break
            step = scale / (np.sqrt(k + 1.0) * gn)
            w = _project_spectral(w - step * grad_w, l_h)
            a = _project_ball(a - step * grad_a, l_h0)
            cur = _objective(loss, x, y, w, a)
            if cur < best[0]:
                best = (cur, w.copy(), a.copy())
        a2 = polish_offset(w, a)
        cur = _objective(loss, x, y, w, a2)
        if cur < best[0]:
            best = (cur, w.copy(), a2.copy())

    return Readout(best[1], best[2])
