"""Contracting reservoir filters: systems, hypothesis classes, and filters.

A reservoir system is a state map F together with a linear readout
h(x) = W x + a.  Driving F with an input sequence from the zero state (the
semi-infinite past padded with zeros) yields the truncated filter output;
when F is an r-contraction in the state, trajectories from different
initial conditions collapse at rate r^t, so the truncation is benign.

Three families are implemented:

  linear       x_t = A x_{t-1} + C z_t + zeta
  echo state   x_t = sigma(A x_{t-1} + C z_t + zeta), sigma odd, 1-Lipschitz
  state affine x_t = p(z_t) x_{t-1} + q(z_t), p and q polynomials in z with
               matrix (resp. vector) coefficients, inputs in a sup-norm box

Hypothesis classes are norm-capped boxes around each family; they carry the
derived constants (contraction modulus, state-ball radius, input-Lipschitz
modulus) used by the risk certificates.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .processes import Moment

__all__ = [
    "Activation",
    "MatrixPolynomial",
    "LinearReservoir",
    "EchoStateReservoir",
    "StateAffineReservoir",
    "Readout",
    "Hypothesis",
    "LinearClass",
    "EchoStateClass",
    "StateAffineClass",
    "RandomEchoStateClass",
    "sas_eval_poly",
    "state_update",
    "zero_input_fixed_point",
    "contraction_modulus",
    "input_lipschitz",
    "bound_M_F",
    "default_washout",
    "run_filter",
    "functional",
    "esp_convergence_check",
    "sample_from_class",
    "random_esn",
]

_WASHOUT_TOL = 1e-10


@dataclass(frozen=True)
class Activation:
    """Odd 1-Lipschitz scalar nonlinearity applied entrywise.

    kind "tanh" and "clipped_linear" are bounded into [-1, 1]; "identity"
    is unbounded.  All satisfy sigma(0) = 0.
    """

    kind: str = "tanh"

    def __post_init__(self):
        if self.kind not in ("tanh", "clipped_linear", "identity"):
            raise ValueError(f"unknown activation {self.kind!r}")

    def __call__(self, x):
        if self.kind == "tanh":
            return np.tanh(x)
        if self.kind == "clipped_linear":
            return np.clip(x, -1.0, 1.0)
        return x

    @property
    def lipschitz(self):
        return 1.0

    @property
    def output_bound(self):
        # sup |sigma|, None when unbounded
        return None if self.kind == "identity" else 1.0


@dataclass(frozen=True)
class MatrixPolynomial:
    """sum_t z^alpha_t coeffs[t] with multi-indices alpha_t over R^d inputs.

    alphas: (n_terms, d) nonnegative integers; coeffs: (n_terms, rows, cols).
    """

    alphas: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=int)
        c = np.asarray(self.coeffs, dtype=float)
        if a.ndim != 2:
            raise ValueError("alphas must be (n_terms, n_input)")
        if c.ndim != 3 or c.shape[0] != a.shape[0]:
            raise ValueError("coeffs must be (n_terms, rows, cols)")
        if (a < 0).any():
            raise ValueError("exponents must be nonnegative")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_input(self):
        return self.alphas.shape[1]

    def eval(self, z):
        """Value at a single input z, shape (rows, cols)."""
        z = np.asarray(z, dtype=float)
        mono = np.prod(z[None, :] ** self.alphas, axis=1)
        return np.tensordot(mono, self.coeffs, axes=1)

    def eval_batch(self, z):
        """Values at a batch of inputs, shape (batch, rows, cols)."""
        z = np.asarray(z, dtype=float)
        mono = np.prod(z[:, None, :] ** self.alphas[None, :, :], axis=2)
        t, r, c = self.coeffs.shape
        return (mono @ self.coeffs.reshape(t, r * c)).reshape(-1, r, c)

    def coeff_norms(self):
        return np.array([np.linalg.norm(m, 2) for m in self.coeffs])

    def degrees(self):
        return self.alphas.sum(axis=1)

    def sup_norm_on_box(self, box):
        """Upper bound for sup of the spectral norm over ||z||_inf <= box."""
        return float(np.sum(self.coeff_norms() * box ** self.degrees()))

    def lipschitz_on_box(self, box):
        """Lipschitz modulus in z (euclidean norm) over the box.

        |z^a - z'^a| <= |a|_1 box^(|a|_1 - 1) ||z - z'||_inf termwise.
        """
        deg = self.degrees()
        powers = np.where(deg > 0, box ** np.maximum(deg - 1, 0), 0.0)
        return float(np.sum(self.coeff_norms() * deg * powers))


def sas_eval_poly(poly, z):
    """Evaluate a matrix polynomial at the input point z."""
    return poly.eval(z)


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearReservoir:
    a: np.ndarray
    c: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        c = np.atleast_2d(np.asarray(self.c, dtype=float))
        zeta = np.asarray(self.zeta, dtype=float).reshape(-1)
        if a.shape[0] != a.shape[1]:
            raise ValueError("a must be square")
        if c.shape[0] != a.shape[0] or zeta.shape[0] != a.shape[0]:
            raise ValueError("c and zeta must match the state dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "zeta", zeta)

    @property
    def n_state(self):
        return self.a.shape[0]

    @property
    def n_input(self):
        return self.c.shape[1]


@dataclass(frozen=True)
class EchoStateReservoir:
    a: np.ndarray
    c: np.ndarray
    zeta: np.ndarray
    activation: Activation = Activation("tanh")

    def __post_init__(self):
        lin = LinearReservoir(self.a, self.c, self.zeta)
        object.__setattr__(self, "a", lin.a)
        object.__setattr__(self, "c", lin.c)
        object.__setattr__(self, "zeta", lin.zeta)

    @property
    def n_state(self):
        return self.a.shape[0]

    @property
    def n_input(self):
        return self.c.shape[1]


@dataclass(frozen=True)
class StateAffineReservoir:
    p: MatrixPolynomial
    q: MatrixPolynomial

    def __post_init__(self):
        n = self.p.coeffs.shape[1]
        if self.p.coeffs.shape[2] != n:
            raise ValueError("p must have square coefficients")
        if self.q.coeffs.shape[1] != n or self.q.coeffs.shape[2] != 1:
            raise ValueError("q must have (n_state, 1) coefficients")
        if self.p.n_input != self.q.n_input:
            raise ValueError("p and q must share the input dimension")

    @property
    def n_state(self):
        return self.p.coeffs.shape[1]

    @property
    def n_input(self):
        return self.p.n_input


@dataclass(frozen=True)
class Readout:
    """Affine readout h(x) = w x + a."""

    w: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if a.shape[0] != w.shape[0]:
            raise ValueError("a must match the output dimension of w")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "a", a)

    def __call__(self, x):
        return np.asarray(x) @ self.w.T + self.a

    @property
    def lipschitz(self):
        return float(np.linalg.norm(self.w, 2))

    @property
    def offset_norm(self):
        return float(np.linalg.norm(self.a))


@dataclass(frozen=True)
class Hypothesis:
    reservoir: object
    readout: Readout


def state_update(system, x, z):
    """One step x -> F(x, z); x may be (N,) or a batch (B, N)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if isinstance(system, LinearReservoir):
        return x @ system.a.T + z @ system.c.T + system.zeta
    if isinstance(system, EchoStateReservoir):
        return system.activation(x @ system.a.T + z @ system.c.T + system.zeta)
    if isinstance(system, StateAffineReservoir):
        if x.ndim == 1:
            return system.p.eval(z) @ x + system.q.eval(z)[:, 0]
        pz = system.p.eval_batch(z)
        qz = system.q.eval_batch(z)[:, :, 0]
        return np.einsum("bij,bj->bi", pz, x) + qz
    raise ValueError(f"unsupported system {type(system).__name__}")


def contraction_modulus(system, input_bound=None):
    """State-contraction coefficient r = sup_z Lip_x F(., z).

    For the state affine family the sup runs over the input box
    ||z||_inf <= input_bound, which is therefore required.
    """
    if isinstance(system, LinearReservoir):
        return float(np.linalg.norm(system.a, 2))
    if isinstance(system, EchoStateReservoir):
        return system.activation.lipschitz * float(np.linalg.norm(system.a, 2))
    if isinstance(system, StateAffineReservoir):
        if input_bound is None:
            raise ValueError("state affine systems need input_bound")
        return system.p.sup_norm_on_box(float(input_bound))
    raise ValueError(f"unsupported system {type(system).__name__}")


def bound_M_F(system, input_bound=None):
    """Radius of a ball around 0 that the state dynamics cannot leave.

    Linear family: (|||C||| M + ||zeta||) / (1 - |||A|||), needs bounded
    inputs.  Echo state: sqrt(N) for bounded activations, the linear-style
    bound otherwise, the minimum when both apply.  State affine:
    M_q / (1 - M_p) over the input box.
    """
    if isinstance(system, LinearReservoir):
        r = contraction_modulus(system)
        if r >= 1.0:
            raise ValueError("state map is not a contraction")
        if input_bound is None:
            raise ValueError("linear reservoirs need input_bound")
        cn = float(np.linalg.norm(system.c, 2))
        zn = float(np.linalg.norm(system.zeta))
        return (cn * float(input_bound) + zn) / (1.0 - r)

    if isinstance(system, EchoStateReservoir):
        cands = []
        ob = system.activation.output_bound
        if ob is not None:
            cands.append(np.sqrt(system.n_state) * ob)
        if input_bound is not None:
            r = contraction_modulus(system)
            if r < 1.0:
                ls = system.activation.lipschitz
                cn = float(np.linalg.norm(system.c, 2))
                zn = float(np.linalg.norm(system.zeta))
                # sigma(0) = 0 for the whole catalog, so no additive term
                cands.append(ls * (cn * float(input_bound) + zn) / (1.0 - r))
        if not cands:
            raise ValueError("unbounded activation needs input_bound and r < 1")
        return float(min(cands))

    if isinstance(system, StateAffineReservoir):
        if input_bound is None:
            raise ValueError("state affine systems need input_bound")
        mp = system.p.sup_norm_on_box(float(input_bound))
        if mp >= 1.0:
            raise ValueError("state map is not a contraction on the box")
        mq = system.q.sup_norm_on_box(float(input_bound))
        return mq / (1.0 - mp)

    raise ValueError(f"unsupported system {type(system).__name__}")


def input_lipschitz(system, input_bound=None, m_f=None):
    """Modulus L_R with ||F(x, z) - F(x, z')|| <= L_R ||z - z'||_2.

    For the state affine family the modulus holds on the input box and for
    states inside the invariant ball of radius m_f (computed when omitted).
    """
    if isinstance(system, LinearReservoir):
        return float(np.linalg.norm(system.c, 2))
    if isinstance(system, EchoStateReservoir):
        return system.activation.lipschitz * float(np.linalg.norm(system.c, 2))
    if isinstance(system, StateAffineReservoir):
        if input_bound is None:
            raise ValueError("state affine systems need input_bound")
        if m_f is None:
            m_f = bound_M_F(system, input_bound)
        return (system.p.lipschitz_on_box(float(input_bound)) * float(m_f)
                + system.q.lipschitz_on_box(float(input_bound)))
    raise ValueError(f"unsupported system {type(system).__name__}")


def default_washout(system, input_bound=None):
    """Smallest T with r^T M_F <= 1e-10 (zero-input padding length)."""
    r = contraction_modulus(system, input_bound)
    if r >= 1.0:
        raise ValueError("washout undefined for non-contracting systems")
    m_f = bound_M_F(system, input_bound)
    if m_f <= _WASHOUT_TOL or r == 0.0:
        return 1
    return int(np.ceil(np.log(_WASHOUT_TOL / m_f) / np.log(r)))


def zero_input_fixed_point(system, tol=1e-14, max_iter=10_000):
    """The unique fixed point of x -> F(x, 0) for a contracting system.

    This is where a filter driven by a zero-padded past sits when the
    window opens.  Linear and state affine families solve the linear
    system directly; echo state iterates to tolerance.
    """
    if isinstance(system, LinearReservoir):
        return np.linalg.solve(np.eye(system.n_state) - system.a, system.zeta)
    if isinstance(system, StateAffineReservoir):
        z0 = np.zeros(system.n_input)
        p0 = system.p.eval(z0)
        q0 = system.q.eval(z0)[:, 0]
        return np.linalg.solve(np.eye(system.n_state) - p0, q0)
    if isinstance(system, EchoStateReservoir):
        z0 = np.zeros(system.n_input)
        x = np.zeros(system.n_state)
        for _ in range(max_iter):
            nxt = state_update(system, x, z0)
            if np.linalg.norm(nxt - x) <= tol:
                return nxt
            x = nxt
        return x
    raise ValueError(f"unsupported system {type(system).__name__}")


def _as_inputs(system, inputs):
    z = np.asarray(inputs, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.ndim != 2 or z.shape[1] != system.n_input:
        raise ValueError("inputs must be (n, n_input)")
    return z


def _lrc_states(system, z, x0):
    """Linear recursion via per-mode scalar filters; loop fallback."""
    n, _ = z.shape
    drive = z @ system.c.T + system.zeta  # (n, N)
    a = system.a
    try:
        lam, v = np.linalg.eig(a)
        cond = np.linalg.cond(v)
    except np.linalg.LinAlgError:
        cond = np.inf
    if np.isfinite(cond) and cond < 1e8:
        u = np.linalg.solve(v, drive.T)  # (N, n) modal drive
        y0 = np.linalg.solve(v, x0.astype(complex))
        out = np.empty((system.n_state, n), dtype=complex)
        for i in range(system.n_state):
            # mode i: y_t = lam_i y_{t-1} + u_{i,t}, y_0 given
            zi = lfilter([1.0], [1.0, -lam[i]], u[i])
            if y0[i] != 0.0:
                zi = zi + lam[i] ** np.arange(1, n + 1) * y0[i]
            out[i] = zi
        return np.real(v @ out).T
    x = np.asarray(x0, dtype=float)
    states = np.empty((n, system.n_state))
    at, ct = a.T, system.c.T
    for t in range(n):
        x = x @ at + z[t] @ ct + system.zeta
        states[t] = x
    return states


def iterate_states(system, inputs, x0=None):
    """States x_1..x_n from x0 (default 0) driven by the given inputs."""
    z = _as_inputs(system, inputs)
    n = z.shape[0]
    x = np.zeros(system.n_state) if x0 is None else np.asarray(x0, dtype=float)
    if isinstance(system, LinearReservoir):
        return _lrc_states(system, z, x)
    states = np.empty((n, system.n_state))
    for t in range(n):
        x = state_update(system, x, z[t])
        states[t] = x
    return states


def iterate_states_batch(system, inputs, x0=None, return_all=False):
    """Batched recursion over inputs of shape (batch, n, n_input).

    Returns the final states (batch, N), or all states (batch, n, N).
    """
    z = np.asarray(inputs, dtype=float)
    if z.ndim != 3:
        raise ValueError("batched inputs must be (batch, n, n_input)")
    b, n, _ = z.shape
    x = np.zeros((b, system.n_state)) if x0 is None else np.array(x0, dtype=float)
    if return_all:
        out = np.empty((b, n, system.n_state))
    for t in range(n):
        x = state_update(system, x, z[:, t, :])
        if return_all:
            out[:, t, :] = x
    return out if return_all else x


def run_filter(system, inputs, washout=None, readout=None, input_bound=None):
    """Filter outputs over a finite input window with zero-padded past.

    The state starts at zero and `washout` zero inputs are consumed before
    the window, matching a truncated sample whose pre-window inputs are all
    zero.  washout=None picks the smallest T with r^T M_F <= 1e-10 (the
    padding then provably does not matter at that tolerance).  Returns the
    states (n, N), or readout outputs (n, m) when a readout is given.
    """
    z = _as_inputs(system, inputs)
    if washout is None:
        if input_bound is None:
            norms = np.abs(z).max() if z.size else 0.0
            input_bound = float(norms)
        washout = default_washout(system, input_bound)
    if washout < 0:
        raise ValueError("washout must be >= 0")
    if washout:
        pad = np.zeros((washout, system.n_input))
        states = iterate_states(system, np.vstack([pad, z]))[washout:]
    else:
        states = iterate_states(system, z)
    if readout is None:
        return states
    return readout(states)


def functional(system, history, readout=None, washout=None, input_bound=None):
    """Filter value at time 0 given the finite input history (.., z_-1, z_0).

    Equals the last row of run_filter: the semi-infinite past beyond the
    supplied history is zero padded.
    """
    out = run_filter(system, history, washout=washout, readout=readout,
                     input_bound=input_bound)
    return out[-1]


def esp_convergence_check(system, inputs, x0_a=None, x0_b=None, seed=0,
                          input_bound=None):
    """Track the gap between two trajectories driven by the same inputs.

    Initial states default to independent uniform draws from the invariant
    ball.  Returns a dict with the initial gap, the per-step gaps (t >= 1)
    and the contraction modulus r; contraction means
    gaps[t-1] <= r^t * gap0 up to roundoff.
    """
    z = _as_inputs(system, inputs)
    if input_bound is None:
        input_bound = float(np.abs(z).max()) if z.size else 0.0
    r = contraction_modulus(system, input_bound)
    m_f = bound_M_F(system, input_bound)
    rng = np.random.default_rng(seed)
    if x0_a is None:
        x0_a = _ball_point(rng, system.n_state, m_f)
    if x0_b is None:
        x0_b = _ball_point(rng, system.n_state, m_f)
    sa = iterate_states(system, z, x0=np.asarray(x0_a, dtype=float))
    sb = iterate_states(system, z, x0=np.asarray(x0_b, dtype=float))
    gap0 = float(np.linalg.norm(np.asarray(x0_a) - np.asarray(x0_b)))
    gaps = np.linalg.norm(sa - sb, axis=1)
    return {"gap0": gap0, "gaps": gaps, "r": r}


def _ball_point(rng, n, radius):
    v = rng.standard_normal(n)
    u = rng.uniform() ** (1.0 / n)
    return radius * u * v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# hypothesis classes
# ---------------------------------------------------------------------------


def _check_common(l_h, l_h0, n_out):
    if l_h < 0 or l_h0 < 0:
        raise ValueError("readout caps must be >= 0")
    if n_out < 1:
        raise ValueError("n_out must be >= 1")


@dataclass(frozen=True)
class LinearClass:
    """Linear reservoirs with |||A||| <= lam_a < 1, |||C||| <= lam_c,
    ||zeta|| <= lam_zeta, and affine readouts with |||W||| <= l_h,
    ||a|| <= l_h0.  The coefficient boxes are sign symmetric.
    """

    n_state: int
    n_input: int
    n_out: int
    lam_a: float
    lam_c: float
    lam_zeta: float
    l_h: float
    l_h0: float
    input_bound: float = None
    input_second_moment: Moment = None

    def __post_init__(self):
        _check_common(self.l_h, self.l_h0, self.n_out)
        if not 0.0 <= self.lam_a < 1.0:
            raise ValueError("lam_a must lie in [0, 1)")
        if self.lam_c < 0 or self.lam_zeta < 0:
            raise ValueError("lam_c and lam_zeta must be >= 0")

    @property
    def family(self):
        return "linear"

    @property
    def r(self):
        return self.lam_a

    @property
    def l_r(self):
        return self.lam_c

    @property
    def m_f(self):
        if self.input_bound is None:
            raise ValueError("m_f needs input_bound")
        return (self.lam_c * self.input_bound + self.lam_zeta) / (1.0 - self.lam_a)

    def contains(self, hyp, tol=1e-9):
        res, ro = hyp.reservoir, hyp.readout
        if not isinstance(res, LinearReservoir):
            return False
        return (np.linalg.norm(res.a, 2) <= self.lam_a + tol
                and np.linalg.norm(res.c, 2) <= self.lam_c + tol
                and np.linalg.norm(res.zeta) <= self.lam_zeta + tol
                and ro.lipschitz <= self.l_h + tol
                and ro.offset_norm <= self.l_h0 + tol)


@dataclass(frozen=True)
class EchoStateClass:
    """Echo state systems under per-row caps and a spectral contraction cap.

    Row caps: ||A_l||_inf <= row_a[l], ||C_l||_2 <= row_c[l],
    |zeta_l| <= row_zeta[l] for each state coordinate l; additionally
    |||A|||_2 <= spec_a (default: the Frobenius-style bound
    sqrt(N) ||row_a||_2, which the row caps already imply) and
    |||C|||_2 <= spec_c (default ||row_c||_2).  The activation is odd and
    the boxes are sign symmetric, so the class is closed under sign flips.
    """

    n_state: int
    n_input: int
    n_out: int
    row_a: tuple
    row_c: tuple
    row_zeta: tuple
    l_h: float
    l_h0: float
    activation: Activation = Activation("tanh")
    spec_a: float = None
    spec_c: float = None
    input_bound: float = None
    input_second_moment: Moment = None

    def __post_init__(self):
        _check_common(self.l_h, self.l_h0, self.n_out)
        for name in ("row_a", "row_c", "row_zeta"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (self.n_state,):
                raise ValueError(f"{name} must have length n_state")
            if (v < 0).any():
                raise ValueError(f"{name} entries must be >= 0")
            object.__setattr__(self, name, tuple(v))
        if self.spec_a is None:
            object.__setattr__(
                self, "spec_a",
                float(np.sqrt(self.n_state) * np.linalg.norm(self.row_a)))
        if self.spec_c is None:
            object.__setattr__(self, "spec_c", float(np.linalg.norm(self.row_c)))

    @property
    def family(self):
        return "echo_state"

    @property
    def lam_a(self):
        # ell-1 state chain constant; must be < 1 for the class constant
        return self.activation.lipschitz * float(np.sum(self.row_a))

    @property
    def lam_c(self):
        return self.activation.lipschitz * float(np.sum(self.row_c))

    @property
    def lam_zeta(self):
        return self.activation.lipschitz * float(np.sum(self.row_zeta))

    @property
    def r(self):
        return self.activation.lipschitz * self.spec_a

    @property
    def l_r(self):
        return self.activation.lipschitz * self.spec_c

    @property
    def m_f(self):
        cands = []
        ob = self.activation.output_bound
        if ob is not None:
            cands.append(np.sqrt(self.n_state) * ob)
        if self.input_bound is not None and self.r < 1.0:
            ls = self.activation.lipschitz
            zeta_cap = float(np.linalg.norm(self.row_zeta))
            cands.append(ls * (self.spec_c * self.input_bound + zeta_cap)
                         / (1.0 - self.r))
        if not cands:
            raise ValueError("m_f needs a bounded activation or input_bound")
        return float(min(cands))

    def contains(self, hyp, tol=1e-9):
        res, ro = hyp.reservoir, hyp.readout
        if not isinstance(res, EchoStateReservoir):
            return False
        if res.activation != self.activation:
            return False
        row_a = np.abs(res.a).max(axis=1)
        row_c = np.linalg.norm(res.c, axis=1)
        return (np.all(row_a <= np.asarray(self.row_a) + tol)
                and np.all(row_c <= np.asarray(self.row_c) + tol)
                and np.all(np.abs(res.zeta) <= np.asarray(self.row_zeta) + tol)
                and np.linalg.norm(res.a, 2) <= self.spec_a + tol
                and np.linalg.norm(res.c, 2) <= self.spec_c + tol
                and ro.lipschitz <= self.l_h + tol
                and ro.offset_norm <= self.l_h0 + tol)


@dataclass(frozen=True)
class StateAffineClass:
    """State affine systems on a fixed monomial support with summed caps.

    Over the input box ||z||_inf <= input_bound =: K the coefficient caps
    read sum_t |||P_t||| K^deg(t) <= K lam_sas and
    sum_t ||Q_t|| K^deg(t) <= K c_sas, with K lam_sas < 1; coefficient
    signs are unrestricted (sign-symmetric class).  alphas_p / alphas_q fix
    the monomial supports as tuples of exponent tuples.
    """

    n_state: int
    n_input: int
    n_out: int
    alphas_p: tuple
    alphas_q: tuple
    lam_sas: float
    c_sas: float
    input_bound: float
    l_h: float
    l_h0: float

    def __post_init__(self):
        _check_common(self.l_h, self.l_h0, self.n_out)
        if self.input_bound <= 0:
            raise ValueError("input_bound must be > 0")
        if self.lam_sas < 0 or self.c_sas < 0:
            raise ValueError("caps must be >= 0")
        if self.lam_sas * self.input_bound >= 1.0:
            raise ValueError("need lam_sas * input_bound < 1")
        for name in ("alphas_p", "alphas_q"):
            a = tuple(tuple(int(e) for e in row) for row in getattr(self, name))
            if any(len(row) != self.n_input for row in a) or not a:
                raise ValueError(f"{name} must be nonempty rows of length n_input")
            object.__setattr__(self, name, a)

    @property
    def family(self):
        return "state_affine"

    @property
    def r(self):
        return self.lam_sas * self.input_bound

    @property
    def m_f(self):
        return self.c_sas * self.input_bound / (1.0 - self.r)

    @property
    def l_r(self):
        # termwise: sum |||P_t||| deg K^(deg-1) <= max_deg * lam_sas, and the
        # same for q; states stay in the m_f ball.
        dp = max(sum(row) for row in self.alphas_p)
        dq = max(sum(row) for row in self.alphas_q)
        return dp * self.lam_sas * self.m_f + dq * self.c_sas

    def contains(self, hyp, tol=1e-9):
        res, ro = hyp.reservoir, hyp.readout
        if not isinstance(res, StateAffineReservoir):
            return False
        k = self.input_bound
        ok_p = res.p.sup_norm_on_box(k) <= k * self.lam_sas + tol
        ok_q = res.q.sup_norm_on_box(k) <= k * self.c_sas + tol
        return (ok_p and ok_q and ro.lipschitz <= self.l_h + tol
                and ro.offset_norm <= self.l_h0 + tol)


@dataclass(frozen=True)
class RandomEchoStateClass:
    """Scaled copies of one fixed random echo state template.

    With base matrices (A, C, zeta) the class consists of the systems
    (rho_a A, rho_c C, rho_z zeta) with |rho_a| lam_base_a < a < 1,
    |rho_c| <= c_scale, |rho_z| <= zeta_scale, where lam_base_a is the
    ell-1 row-sum constant of the base A.  Scale intervals are sign
    symmetric and the activation odd.
    """

    base_a: np.ndarray
    base_c: np.ndarray
    base_zeta: np.ndarray
    a: float
    c_scale: float
    zeta_scale: float
    l_h: float
    l_h0: float
    n_out: int
    activation: Activation = Activation("tanh")
    input_second_moment: Moment = None
    input_bound: float = None

    def __post_init__(self):
        lin = LinearReservoir(self.base_a, self.base_c, self.base_zeta)
        object.__setattr__(self, "base_a", lin.a)
        object.__setattr__(self, "base_c", lin.c)
        object.__setattr__(self, "base_zeta", lin.zeta)
        _check_common(self.l_h, self.l_h0, self.n_out)
        if not 0.0 < self.a < 1.0:
            raise ValueError("a must lie in (0, 1)")
        if self.c_scale < 0 or self.zeta_scale < 0:
            raise ValueError("scales must be >= 0")
        if self.lam_base_a <= 0.0:
            raise ValueError("base A must be nonzero")

    @property
    def family(self):
        return "echo_state_random"

    @property
    def n_state(self):
        return self.base_a.shape[0]

    @property
    def n_input(self):
        return self.base_c.shape[1]

    @property
    def lam_base_a(self):
        return self.activation.lipschitz * float(
            np.sum(np.abs(self.base_a).max(axis=1)))

    @property
    def lam_a(self):
        # every member satisfies the row-sum cap with value exactly a
        return self.a

    @property
    def lam_c(self):
        return self.c_scale * self.activation.lipschitz * float(
            np.sum(np.linalg.norm(self.base_c, axis=1)))

    @property
    def lam_zeta(self):
        return self.zeta_scale * self.activation.lipschitz * float(
            np.sum(np.abs(self.base_zeta)))

    @property
    def rho_a_max(self):
        return self.a / self.lam_base_a

    @property
    def r(self):
        # |||rho A|||_2 <= rho_max |||A|||_2, intersected with 1 (ESP needs
        # the realized spectral radius checked by the caller when >= 1)
        return self.rho_a_max * self.activation.lipschitz * float(
            np.linalg.norm(self.base_a, 2))

    @property
    def l_r(self):
        return self.c_scale * self.activation.lipschitz * float(
            np.linalg.norm(self.base_c, 2))

    @property
    def m_f(self):
        ob = self.activation.output_bound
        if ob is None:
            raise ValueError("random template needs a bounded activation")
        return float(np.sqrt(self.n_state) * ob)

    def member(self, rho_a, rho_c, rho_z):
        if abs(rho_a) * self.lam_base_a >= self.a:
            raise ValueError("|rho_a| too large for the contraction cap")
        if abs(rho_c) > self.c_scale or abs(rho_z) > self.zeta_scale:
            raise ValueError("scale outside the class box")
        return EchoStateReservoir(rho_a * self.base_a, rho_c * self.base_c,
                                  rho_z * self.base_zeta, self.activation)

    def contains(self, hyp, tol=1e-9):
        res, ro = hyp.reservoir, hyp.readout
        if not isinstance(res, EchoStateReservoir):
            return False
        if res.activation != self.activation:
            return False
        row_a = self.activation.lipschitz * float(np.sum(np.abs(res.a).max(axis=1)))
        return (row_a <= self.a + tol
                and ro.lipschitz <= self.l_h + tol
                and ro.offset_norm <= self.l_h0 + tol)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _rescaled(rng, shape, target, norm):
    """Matrix with the given norm equal to u * target, u ~ U(0, 1)."""
    m = rng.uniform(-1.0, 1.0, shape)
    cur = norm(m)
    if cur == 0.0 or target == 0.0:
        return np.zeros(shape)
    return m * (rng.uniform() * target / cur)


def _sample_readout(rng, klass):
    w = _rescaled(rng, (klass.n_out, klass.n_state), klass.l_h,
                  lambda m: np.linalg.norm(m, 2))
    a = _rescaled(rng, (klass.n_out,), klass.l_h0, np.linalg.norm)
    return Readout(w, a)


def sample_from_class(klass, n=1, seed=0):
    """Draw n hypotheses uniformly-then-rescaled inside the class caps.

    Matrices are drawn with uniform(-1, 1) entries and rescaled so that each
    capped norm equals u * cap with an independent u ~ U(0, 1); over many
    draws the realized norms sweep out the cap interval without exceeding
    it.  Returns a list of Hypothesis (trial i uses rng seed + i).
    """
    out = []
    for i in range(n):
        rng = np.random.default_rng(seed + i)
        if isinstance(klass, LinearClass):
            res = LinearReservoir(
                _rescaled(rng, (klass.n_state, klass.n_state), klass.lam_a,
                          lambda m: np.linalg.norm(m, 2)),
                _rescaled(rng, (klass.n_state, klass.n_input), klass.lam_c,
                          lambda m: np.linalg.norm(m, 2)),
                _rescaled(rng, (klass.n_state,), klass.lam_zeta, np.linalg.norm))
        elif isinstance(klass, EchoStateClass):
            a = np.stack([_rescaled(rng, (klass.n_state,), klass.row_a[l],
                                    lambda v: np.abs(v).max())
                          for l in range(klass.n_state)])
            spec = np.linalg.norm(a, 2)
            if spec > klass.spec_a:
                a *= klass.spec_a / spec
            c = np.stack([_rescaled(rng, (klass.n_input,), klass.row_c[l],
                                    np.linalg.norm)
                          for l in range(klass.n_state)])
            spec = np.linalg.norm(c, 2)
            if spec > klass.spec_c:
                c *= klass.spec_c / spec
            zeta = np.array([_rescaled(rng, (1,), klass.row_zeta[l], np.linalg.norm)[0]
                             for l in range(klass.n_state)])
            res = EchoStateReservoir(a, c, zeta, klass.activation)
        elif isinstance(klass, StateAffineClass):
            res = _sample_sas(rng, klass)
        elif isinstance(klass, RandomEchoStateClass):
            rho_a = rng.uniform(-1.0, 1.0) * klass.rho_a_max
            rho_c = rng.uniform(-1.0, 1.0) * klass.c_scale
            rho_z = rng.uniform(-1.0, 1.0) * klass.zeta_scale
            res = klass.member(rho_a, rho_c, rho_z)
        else:
            raise ValueError(f"unsupported class {type(klass).__name__}")
        out.append(Hypothesis(res, _sample_readout(rng, klass)))
    return out


def _sample_sas(rng, klass):
    k = klass.input_bound

    def draw(alphas, rows, cols, total_cap):
        terms = len(alphas)
        # split the summed cap across terms by uniform proportions
        weights = rng.uniform(0.0, 1.0, terms)
        weights *= rng.uniform() / max(weights.sum(), 1e-300)
        coeffs = np.empty((terms, rows, cols))
        for t, row in enumerate(alphas):
            deg = sum(row)
            cap_t = weights[t] * total_cap / k ** deg
            coeffs[t] = _rescaled(rng, (rows, cols), cap_t,
                                  lambda m: np.linalg.norm(m, 2))
            # _rescaled multiplies by another U(0,1); undo to keep the split
            nrm = np.linalg.norm(coeffs[t], 2)
            if nrm > 0:
                coeffs[t] *= cap_t / nrm
        return MatrixPolynomial(np.asarray(alphas, dtype=int), coeffs)

    n = klass.n_state
    p = draw(klass.alphas_p, n, n, k * klass.lam_sas)
    q = draw(klass.alphas_q, n, 1, k * klass.c_sas)
    return StateAffineReservoir(p, q)


def random_esn(n_state, n_input, n_out, a, c_scale, zeta_scale, l_h, l_h0,
               entry_law="gaussian", activation=None, seed=0,
               input_second_moment=None, input_bound=None):
    """Draw one random echo state template and wrap it as a scaled class.

    Base entries of A, C, zeta are i.i.d. from entry_law ("gaussian",
    "uniform" or "laplace", unit scale).  An all-zero base A is rejected.
    a in (0, 1) caps the row-sum constant of every scaled member.
    """
    if activation is None:
        activation = Activation("tanh")
    rng = np.random.default_rng(seed)
    if entry_law == "gaussian":
        draw = rng.standard_normal
    elif entry_law == "uniform":
        draw = lambda size: rng.uniform(-1.0, 1.0, size)
    elif entry_law == "laplace":
        draw = lambda size: rng.laplace(0.0, 1.0, size)
    else:
        raise ValueError(f"unknown entry law {entry_law!r}")
    base_a = draw((n_state, n_state))
    if not np.abs(base_a).max() > 0:
        raise ValueError("base A must be nonzero")
    base_c = draw((n_state, n_input))
    base_zeta = draw((n_state,))
    return RandomEchoStateClass(
        base_a=base_a, base_c=base_c, base_zeta=base_zeta, a=a,
        c_scale=c_scale, zeta_scale=zeta_scale, l_h=l_h, l_h0=l_h0,
        n_out=n_out, activation=activation,
        input_second_moment=input_second_moment, input_bound=input_bound)
