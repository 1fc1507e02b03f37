"""Weakly dependent stochastic process generators and dependence coefficients.

Every process here is a causal Bernoulli shift Z_t = G(..., xi_{t-1}, xi_t)
driven by i.i.d. innovations.  The module provides path simulation, Monte
Carlo estimation of the coupling coefficient

    theta(tau) = E|| G(..., xi_{-1}, xi_0)
                    - G(..., xi~_{-tau-1}, xi~_{-tau}, xi_{-tau+1}, ..., xi_0) ||_2

(innovations at times <= -tau replaced by an independent copy), analytic
decay envelopes theta(tau) <= C * lambda^tau or C * tau^(-alpha), and moment
estimation with explicit provenance.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gammaln, zeta

__all__ = [
    "Moment",
    "WeightingSequence",
    "InnovationLaw",
    "IIDProcess",
    "MAProcess",
    "VAR1Process",
    "GARCHProcess",
    "ARFIMAProcess",
    "DependenceProfile",
    "ThetaFit",
    "dim",
    "generate_path",
    "batch_paths",
    "estimate_theta",
    "dependence_params",
    "combine_profiles",
    "moment",
    "analytic_moment",
    "fit_theta_decay",
    "arfima_coefficients",
    "model_from_spec",
    "model_to_spec",
]

# Monte Carlo chunking keeps per-block innovation storage near this many floats.
_CHUNK_FLOATS = 4_000_000


@dataclass(frozen=True)
class Moment:
    """A scalar moment together with how it was obtained.

    provenance is one of "analytic", "quadrature", "mc", "exact-zero";
    std_error is nonzero only for "mc".
    """

    value: float
    std_error: float = 0.0
    provenance: str = "analytic"

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("moment value must be finite")
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.provenance not in ("analytic", "quadrature", "mc", "exact-zero"):
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True)
class WeightingSequence:
    """Strictly decreasing weights w_0 = 1 > w_1 > ... > 0 in closed form.

    kind "geometric": w_j = param**j with param in (0, 1).
    kind "polynomial": w_j = (1 + j)**(-param) with param > 1.

    Exposes the inverse decay ratio l_w = sup w_j / w_{j+1}, the decay ratio
    d_w = sup w_{j+1} / w_j and the l1 norm sum_j w_j.  Only geometric
    sequences have d_w < 1; the polynomial family has d_w = 1 (its ratio
    (1+j)/(2+j) -> 1), which disqualifies it from the bound chains that
    divide by 1 - d_w.
    """

    kind: str
    param: float

    def __post_init__(self):
        if self.kind == "geometric":
            if not 0.0 < self.param < 1.0:
                raise ValueError("geometric weighting needs param in (0, 1)")
        elif self.kind == "polynomial":
            if self.param <= 1.0:
                raise ValueError("polynomial weighting needs param > 1")
        else:
            raise ValueError(f"unknown weighting kind {self.kind!r}")

    def value(self, j):
        j = np.asarray(j, dtype=float)
        if self.kind == "geometric":
            return self.param ** j
        return (1.0 + j) ** (-self.param)

    @property
    def l_w(self):
        # sup_j w_j / w_{j+1}; attained at j -> inf (geometric) resp. j = 0.
        if self.kind == "geometric":
            return 1.0 / self.param
        return 2.0 ** self.param

    @property
    def d_w(self):
        if self.kind == "geometric":
            return self.param
        return 1.0

    @property
    def l1_norm(self):
        if self.kind == "geometric":
            return 1.0 / (1.0 - self.param)
        return float(zeta(self.param, 1))


@dataclass(frozen=True)
class InnovationLaw:
    """Named innovation distribution on R^dim with moment descriptors.

    kind "gaussian": i.i.d. N(0, scale^2) coordinates.
    kind "uniform":  i.i.d. uniform on [-scale, scale]  (bounded support).
    kind "laplace":  i.i.d. Laplace with scale parameter `scale`.
    """

    kind: str
    dim: int = 1
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "laplace"):
            raise ValueError(f"unknown innovation kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.scale <= 0:
            raise ValueError("scale must be > 0")

    def sample(self, rng, *shape):
        full = tuple(shape) + (self.dim,)
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(full)
        if self.kind == "uniform":
            return rng.uniform(-self.scale, self.scale, full)
        return rng.laplace(0.0, self.scale, full)

    def norm_power_moment(self, power):
        """E[||xi||_2^power] in closed form, or None when not available."""
        if power < 0:
            raise ValueError("power must be >= 0")
        if power == 0:
            return 1.0
        d, s, q = self.dim, self.scale, float(power)
        if self.kind == "gaussian":
            # ||xi||/s is chi_d distributed.
            return s ** q * 2.0 ** (q / 2) * np.exp(gammaln((d + q) / 2) - gammaln(d / 2))
        if d == 1:
            if self.kind == "uniform":
                return s ** q / (q + 1.0)
            return s ** q * np.exp(gammaln(q + 1.0))  # |Laplace| is exponential
        if self.kind == "uniform" and q == 2.0:
            return d * s ** 2 / 3.0
        if self.kind == "laplace" and q == 2.0:
            return d * 2.0 * s ** 2
        return None

    def mean_abs_norm(self):
        """E[||xi||_2] as a Moment (analytic when closed-form exists)."""
        v = self.norm_power_moment(1)
        if v is None:
            return None
        return Moment(float(v), 0.0, "analytic")

    def second_moment(self):
        """E[||xi||_2^2]; closed form for the whole catalog."""
        return Moment(float(self.norm_power_moment(2)), 0.0, "analytic")

    def bound(self):
        """sup ||xi||_2, or None for unbounded support."""
        if self.kind == "uniform":
            return self.scale * np.sqrt(self.dim)
        return None


# ---------------------------------------------------------------------------
# process models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IIDProcess:
    """Z_t = xi_t with i.i.d. innovations."""

    law: InnovationLaw


@dataclass(frozen=True)
class MAProcess:
    """Finite moving average Z_t = xi_t + sum_j coeffs[j] xi_{t-1-j}, scalar."""

    coeffs: tuple
    law: InnovationLaw

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) == 0:
            raise ValueError("MAProcess needs at least one lag coefficient")
        if self.law.dim != 1:
            raise ValueError("MAProcess is scalar; law.dim must be 1")


@dataclass(frozen=True)
class VAR1Process:
    """First order autoregression Z_t = s_t A Z_{t-1} + eta_t.

    The i.i.d. scalar multipliers s_t (scale_law, or identically 1 when None)
    make the coefficient matrix time varying; stationarity requires
    E|s_0| * |||A|||_2 < 1.
    """

    a_base: np.ndarray
    noise: InnovationLaw
    scale_law: InnovationLaw = None

    def __post_init__(self):
        a = np.asarray(self.a_base, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("a_base must be a square matrix")
        object.__setattr__(self, "a_base", a)
        if self.noise.dim != a.shape[0]:
            raise ValueError("noise dimension must match a_base")
        if self.scale_law is not None and self.scale_law.dim != 1:
            raise ValueError("scale_law must be scalar")
        if self.mean_coeff_norm() >= 1.0:
            raise ValueError("expected coefficient norm E|s| * |||A|||_2 must be < 1")

    def mean_coeff_norm(self):
        spec = float(np.linalg.norm(self.a_base, 2))
        if self.scale_law is None:
            return spec
        m1 = self.scale_law.norm_power_moment(1)
        if m1 is None:
            raise ValueError("scale_law must have a closed-form mean absolute value")
        return float(m1) * spec


@dataclass(frozen=True)
class GARCHProcess:
    """GARCH(1,1): r_t = sigma_t eps_t, sigma_t^2 = omega + alpha r_{t-1}^2 + beta sigma_{t-1}^2.

    eps_t are standard normal.  representation "returns" exposes the scalar
    path r_t; "squared" exposes the two dimensional state (r_t^2, sigma_t^2)
    whose companion-matrix form makes the geometric dependence rate
    alpha + beta explicit.
    """

    omega: float
    alpha: float
    beta: float
    representation: str = "returns"

    def __post_init__(self):
        if self.omega < 0 or self.alpha < 0 or self.beta < 0:
            raise ValueError("omega, alpha, beta must be >= 0")
        if self.alpha + self.beta >= 1.0:
            raise ValueError("alpha + beta must be < 1 for second order stationarity")
        if self.representation not in ("returns", "squared"):
            raise ValueError("representation must be 'returns' or 'squared'")

    @property
    def stationary_variance(self):
        return self.omega / (1.0 - self.alpha - self.beta)


@dataclass(frozen=True)
class ARFIMAProcess:
    """Fractionally integrated noise via its truncated MA(inf) representation.

    Z_t = sum_{k=0}^{trunc} phi_k eps_{t-k} with phi_k = Gamma(k+d) /
    (Gamma(k+1) Gamma(d)) and standard normal innovations.  The neglected
    tail carries an O(trunc^(d - 1/2)) error.
    """

    d_frac: float
    trunc: int = 10_000

    def __post_init__(self):
        if not -0.5 < self.d_frac < 0.5:
            raise ValueError("d_frac must lie in (-1/2, 1/2)")
        if self.trunc < 1:
            raise ValueError("trunc must be >= 1")


def arfima_coefficients(d_frac, count):
    """First `count`+1 moving average coefficients phi_0..phi_count.

    Computed by the ratio recursion phi_k = phi_{k-1} (k - 1 + d) / k, which
    is exact and avoids gamma overflow.
    """
    phi = np.empty(count + 1)
    phi[0] = 1.0
    for k in range(1, count + 1):
        phi[k] = phi[k - 1] * (k - 1 + d_frac) / k
    return phi


def dim(model):
    """Output dimension of the process."""
    if isinstance(model, IIDProcess):
        return model.law.dim
    if isinstance(model, MAProcess):
        return 1
    if isinstance(model, VAR1Process):
        return model.noise.dim
    if isinstance(model, GARCHProcess):
        return 2 if model.representation == "squared" else 1
    if isinstance(model, ARFIMAProcess):
        return 1
    raise ValueError(f"unsupported model {type(model).__name__}")


def _default_burn_in(model):
    if isinstance(model, (GARCHProcess, VAR1Process)):
        return 500
    if isinstance(model, ARFIMAProcess):
        return model.trunc
    return 0


def generate_path(model, n, burn_in=None, seed=0):
    """Simulate a length-n path, shape (n, d), deterministic per seed.

    burn_in: transient steps discarded for the recursive models (VAR1,
    GARCH); for ARFIMA it is the moving-average truncation order (number of
    phi coefficients beyond phi_0).  None selects the model default
    (500 for the recursions, model.trunc for ARFIMA).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in is None:
        burn_in = _default_burn_in(model)
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    rng = np.random.default_rng(seed)

    if isinstance(model, IIDProcess):
        return model.law.sample(rng, n)

    if isinstance(model, MAProcess):
        q = len(model.coeffs)
        xi = model.law.sample(rng, n + q)[:, 0]
        kernel = np.concatenate(([1.0], model.coeffs))
        return fftconvolve(xi, kernel, mode="full")[q : q + n, None]

    if isinstance(model, VAR1Process):
        d = model.noise.dim
        total = burn_in + n
        eta = model.noise.sample(rng, total)
        if model.scale_law is None:
            s = np.ones(total)
        else:
            s = model.scale_law.sample(rng, total)[:, 0]
        out = np.empty((total, d))
        z = np.zeros(d)
        at = model.a_base.T
        for t in range(total):
            z = s[t] * (z @ at) + eta[t]
            out[t] = z
        return out[burn_in:]

    if isinstance(model, GARCHProcess):
        total = burn_in + n
        eps = rng.standard_normal(total)
        s2 = np.empty(total)
        prev = model.stationary_variance  # start at the stationary variance
        prev_r2 = prev
        for t in range(total):
            s2[t] = model.omega + model.alpha * prev_r2 + model.beta * prev
            prev = s2[t]
            prev_r2 = s2[t] * eps[t] ** 2
        r = np.sqrt(s2) * eps
        if model.representation == "squared":
            return np.column_stack([r ** 2, s2])[burn_in:]
        return r[burn_in:, None]

    if isinstance(model, ARFIMAProcess):
        k = burn_in if burn_in > 0 else model.trunc
        phi = arfima_coefficients(model.d_frac, k)
        eps = rng.standard_normal(n + k)
        return fftconvolve(eps, phi, mode="full")[k : k + n, None]

    raise ValueError(f"unsupported process model {type(model).__name__}")


def batch_paths(model, n_paths, n, burn_in=None, seed=0):
    """n_paths independent length-n paths at once, shape (n_paths, n, d).

    Same laws as generate_path but vectorized across paths (the recursions
    loop over time only), so Monte Carlo experiments stay cheap.  One rng
    stream per call; paths are independent but not per-path seed-aligned
    with generate_path.
    """
    if n_paths < 1 or n < 1:
        raise ValueError("n_paths and n must be >= 1")
    if burn_in is None:
        burn_in = _default_burn_in(model)
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    rng = np.random.default_rng(seed)
    b = n_paths

    if isinstance(model, IIDProcess):
        return model.law.sample(rng, b, n)

    if isinstance(model, MAProcess):
        q = len(model.coeffs)
        xi = model.law.sample(rng, b, n + q)[:, :, 0]
        kernel = np.concatenate(([1.0], model.coeffs))
        out = fftconvolve(xi, kernel[None, :], mode="full", axes=1)
        return out[:, q : q + n, None]

    if isinstance(model, VAR1Process):
        d = model.noise.dim
        total = burn_in + n
        eta = model.noise.sample(rng, b, total)
        if model.scale_law is None:
            s = np.ones((b, total))
        else:
            s = model.scale_law.sample(rng, b, total)[:, :, 0]
        out = np.empty((b, total, d))
        z = np.zeros((b, d))
        at = model.a_base.T
        for t in range(total):
            z = s[:, t, None] * (z @ at) + eta[:, t]
            out[:, t] = z
        return out[:, burn_in:]

    if isinstance(model, GARCHProcess):
        total = burn_in + n
        eps = rng.standard_normal((b, total))
        s2 = np.empty((b, total))
        prev = np.full(b, model.stationary_variance)
        prev_r2 = prev.copy()
        for t in range(total):
            s2[:, t] = model.omega + model.alpha * prev_r2 + model.beta * prev
            prev = s2[:, t]
            prev_r2 = s2[:, t] * eps[:, t] ** 2
        r = np.sqrt(s2) * eps
        if model.representation == "squared":
            return np.stack([r ** 2, s2], axis=2)[:, burn_in:]
        return r[:, burn_in:, None]

    if isinstance(model, ARFIMAProcess):
        k = burn_in if burn_in > 0 else model.trunc
        phi = arfima_coefficients(model.d_frac, k)
        eps = rng.standard_normal((b, n + k))
        out = fftconvolve(eps, phi[None, :], mode="full", axes=1)
        return out[:, k : k + n, None]

    raise ValueError(f"unsupported process model {type(model).__name__}")

    raise ValueError(f"unsupported model {type(model).__name__}")


# ---------------------------------------------------------------------------
# theta estimation
# ---------------------------------------------------------------------------


def _chunks(n_total, per_trial_floats):
    size = max(1, int(_CHUNK_FLOATS / max(1, per_trial_floats)))
    start = 0
    while start < n_total:
        stop = min(n_total, start + size)
        yield start, stop
        start = stop


def _stack_draws(seed, lo, hi, draw):
    """Stack per-trial rng draws; trial i uses default_rng(seed + i)."""
    return np.stack([draw(np.random.default_rng(seed + i)) for i in range(lo, hi)])


def _theta_samples_ma(model, tau, lo, hi, seed):
    q = len(model.coeffs)
    kernel = np.concatenate(([1.0], model.coeffs))  # weight on xi_0, xi_-1, ...
    L = q + 1

    def draw(rng):
        return model.law.sample(rng, 2 * L)[:, 0]

    block = _stack_draws(seed, lo, hi, draw)
    orig = block[:, :L]  # xi_0 .. xi_{-q} (most recent first)
    ghost = block[:, L:]
    coupled = orig.copy()
    coupled[:, tau:] = ghost[:, tau:]  # lags >= tau are times <= -tau
    return np.abs((orig - coupled) @ kernel)


def _theta_samples_arfima(model, tau, history, lo, hi, seed):
    k = min(history, model.trunc)
    phi = arfima_coefficients(model.d_frac, k)
    L = k + 1

    def draw(rng):
        return rng.standard_normal(2 * L)

    block = _stack_draws(seed, lo, hi, draw)
    orig = block[:, :L]
    ghost = block[:, L:]
    coupled = orig.copy()
    coupled[:, tau:] = ghost[:, tau:]
    return np.abs((orig - coupled) @ phi)


def _theta_samples_var1(model, tau, history, lo, hi, seed):
    d = model.noise.dim
    L = history + 1

    def draw(rng):
        eta = model.noise.sample(rng, 2 * L)
        if model.scale_law is None:
            s = np.ones((2 * L, 1))
        else:
            s = model.scale_law.sample(rng, 2 * L)
        return np.concatenate([eta, s], axis=1).reshape(-1)

    block = _stack_draws(seed, lo, hi, draw).reshape(hi - lo, 2 * L, d + 1)
    eta = block[:, :L, :d]  # times -history .. 0, oldest first
    s = block[:, :L, d]
    eta_g = block[:, L:, :d]
    s_g = block[:, L:, d]
    # replace innovations at times <= -tau (the first L - tau slots)
    cut = L - tau
    eta2 = eta.copy()
    s2 = s.copy()
    eta2[:, :cut] = eta_g[:, :cut]
    s2[:, :cut] = s_g[:, :cut]
    at = model.a_base.T
    z1 = np.zeros((hi - lo, d))
    z2 = np.zeros((hi - lo, d))
    for t in range(L):
        z1 = s[:, t, None] * (z1 @ at) + eta[:, t]
        z2 = s2[:, t, None] * (z2 @ at) + eta2[:, t]
    return np.linalg.norm(z1 - z2, axis=1)


def _theta_samples_garch(model, tau, history, lo, hi, seed):
    L = history + 1

    def draw(rng):
        return rng.standard_normal(2 * L)

    block = _stack_draws(seed, lo, hi, draw)
    eps = block[:, :L]  # times -history .. 0, oldest first
    eps_g = block[:, L:]
    cut = L - tau
    eps2 = eps.copy()
    eps2[:, :cut] = eps_g[:, :cut]
    v0 = model.stationary_variance  # shared truncation: both start stationary
    s2a = np.full(hi - lo, v0)
    s2b = np.full(hi - lo, v0)
    r2a = np.full(hi - lo, v0)
    r2b = np.full(hi - lo, v0)
    for t in range(L):
        s2a = model.omega + model.alpha * r2a + model.beta * s2a
        s2b = model.omega + model.alpha * r2b + model.beta * s2b
        r2a = s2a * eps[:, t] ** 2
        r2b = s2b * eps2[:, t] ** 2
    if model.representation == "squared":
        return np.sqrt((r2a - r2b) ** 2 + (s2a - s2b) ** 2)
    ra = np.sqrt(s2a) * eps[:, -1]
    rb = np.sqrt(s2b) * eps2[:, -1]
    return np.abs(ra - rb)


def estimate_theta(model, tau, n_mc=10_000, history=None, seed=0):
    """Monte Carlo estimate of the coupling coefficient theta(tau).

    Both trajectories are truncated at the same finite history
    (default max(200, 10 tau)), so the truncation bias is shared.  Trial i
    draws from default_rng(seed + i); results do not depend on chunking.

    Returns a Moment with provenance "mc", or "exact-zero" when the coupling
    provably has no effect (IID always; finite MA once tau exceeds its
    order).
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if n_mc < 2:
        raise ValueError("n_mc must be >= 2")
    if history is None:
        history = max(200, 10 * tau)
    if history < tau:
        raise ValueError("history must be >= tau")

    if isinstance(model, IIDProcess):
        return Moment(0.0, 0.0, "exact-zero")
    if isinstance(model, MAProcess) and tau > len(model.coeffs):
        return Moment(0.0, 0.0, "exact-zero")

    if isinstance(model, MAProcess):
        per = 2 * (len(model.coeffs) + 1)
        sampler = lambda lo, hi: _theta_samples_ma(model, tau, lo, hi, seed)
    elif isinstance(model, ARFIMAProcess):
        per = 2 * (min(history, model.trunc) + 1)
        sampler = lambda lo, hi: _theta_samples_arfima(model, tau, history, lo, hi, seed)
    elif isinstance(model, VAR1Process):
        per = 2 * (history + 1) * (model.noise.dim + 1)
        sampler = lambda lo, hi: _theta_samples_var1(model, tau, history, lo, hi, seed)
    elif isinstance(model, GARCHProcess):
        per = 2 * (history + 1)
        sampler = lambda lo, hi: _theta_samples_garch(model, tau, history, lo, hi, seed)
    else:
        raise ValueError(f"unsupported model {type(model).__name__}")

    total = 0.0
    total_sq = 0.0
    for lo, hi in _chunks(n_mc, per):
        vals = sampler(lo, hi)
        total += vals.sum()
        total_sq += (vals ** 2).sum()
    mean = total / n_mc
    var = max(0.0, total_sq / n_mc - mean ** 2)
    return Moment(float(mean), float(np.sqrt(var / n_mc)), "mc")


# ---------------------------------------------------------------------------
# dependence profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DependenceProfile:
    """Decay envelopes theta^I(tau) for the input (z) and target (y) roles.

    regime "geometric": theta^I(tau) <= c_I * rate_I^tau, rate in (0, 1).
    regime "algebraic": theta^I(tau) <= c_I * tau^(-rate_I), rate > 0.
    regime "lipschitz": additionally carries the functional-Lipschitz data
    (l_I, w_I, innovation moments) from which a geometric envelope with
    c_I = 2 l_I E||xi^I|| / (1 - d_w) and rate d_w is derived.

    A profile built from a single process fills both roles identically; use
    combine_profiles to pair an input process with a target process.
    """

    regime: str
    c_z: Moment
    rate_z: float
    c_y: Moment
    rate_y: float
    exact_zero_z: bool = False
    exact_zero_y: bool = False
    l_z: float = None
    l_y: float = None
    w_z: WeightingSequence = None
    w_y: WeightingSequence = None
    xi_mean_abs_z: Moment = None
    xi_mean_abs_y: Moment = None
    xi_second_z: Moment = None
    xi_second_y: Moment = None
    xi_bound_z: float = None
    xi_bound_y: float = None
    xi_law_z: InnovationLaw = None
    xi_law_y: InnovationLaw = None

    def __post_init__(self):
        if self.regime not in ("lipschitz", "geometric", "algebraic"):
            raise ValueError(f"unknown regime {self.regime!r}")
        for c, rate in ((self.c_z, self.rate_z), (self.c_y, self.rate_y)):
            if c.value < 0:
                raise ValueError("envelope constants must be >= 0")
            if self.regime == "algebraic":
                if rate <= 0:
                    raise ValueError("algebraic regime needs rate > 0")
            elif not 0.0 < rate < 1.0:
                raise ValueError("geometric-type regime needs rate in (0, 1)")
        if self.regime == "lipschitz":
            for name, v in (("l_z", self.l_z), ("l_y", self.l_y),
                            ("w_z", self.w_z), ("w_y", self.w_y),
                            ("xi_mean_abs_z", self.xi_mean_abs_z),
                            ("xi_mean_abs_y", self.xi_mean_abs_y)):
                if v is None:
                    raise ValueError(f"lipschitz regime requires {name}")

    def theta_envelope(self, which, tau):
        """Envelope value for theta^which(tau), which in {'z', 'y'}."""
        tau = np.asarray(tau, dtype=float)
        if which == "z":
            c, rate, zero = self.c_z.value, self.rate_z, self.exact_zero_z
        elif which == "y":
            c, rate, zero = self.c_y.value, self.rate_y, self.exact_zero_y
        else:
            raise ValueError("which must be 'z' or 'y'")
        if zero:
            return np.zeros_like(tau)
        if self.regime == "algebraic":
            return c * tau ** (-rate)
        return c * rate ** tau


def _ma_theta_exact(model, tau):
    # gaussian innovations: the coupled difference is N(0, 2 s^2 sum tail^2)
    kernel = np.concatenate(([1.0], model.coeffs))
    tail = kernel[tau:]
    if tail.size == 0:
        return 0.0
    s = model.law.scale
    return float(np.sqrt(2.0 / np.pi) * np.sqrt(2.0 * (s ** 2) * np.sum(tail ** 2)))


def _mean_abs_z0(model, n_mc, seed):
    analytic = analytic_moment(model, 1)
    if analytic is not None:
        return analytic
    return moment(model, 1, n_mc=n_mc, seed=seed)


def dependence_params(model, n_mc=20_000, seed=0, nominal_rate=0.5):
    """Analytic dependence profile of a built-in model.

    GARCH and VAR1 are geometric with rate E|s| |||A|||_2 (alpha + beta for
    GARCH's companion form); ARFIMA is algebraic with exponent 1/2 - d_frac;
    IID is exactly independent and reported as geometric with a nominal rate
    and the exact-zero flag set.  Envelope constants requiring E||Z_0||_2 are
    Monte Carlo estimated (provenance "mc") when no closed form exists.
    """
    if isinstance(model, IIDProcess):
        c = _mean_abs_z0(model, n_mc, seed)
        c2 = Moment(2 * c.value, 2 * c.std_error, c.provenance)
        law = model.law
        return DependenceProfile(
            regime="lipschitz", c_z=c2, rate_z=nominal_rate, c_y=c2,
            rate_y=nominal_rate, exact_zero_z=True, exact_zero_y=True,
            l_z=1.0, l_y=1.0,
            w_z=WeightingSequence("geometric", nominal_rate),
            w_y=WeightingSequence("geometric", nominal_rate),
            xi_mean_abs_z=law.mean_abs_norm(), xi_mean_abs_y=law.mean_abs_norm(),
            xi_second_z=law.second_moment(), xi_second_y=law.second_moment(),
            xi_bound_z=law.bound(), xi_bound_y=law.bound(),
            xi_law_z=law, xi_law_y=law)

    if isinstance(model, MAProcess):
        if model.law.kind == "gaussian":
            thetas = np.array([_ma_theta_exact(model, t)
                               for t in range(1, len(model.coeffs) + 1)])
            c = Moment(float(np.max(thetas / nominal_rate ** np.arange(1, len(thetas) + 1))),
                       0.0, "analytic")
        else:
            # crude but valid: theta(tau) <= 2 E||Z_0|| for every tau
            m = _mean_abs_z0(model, n_mc, seed)
            c = Moment(2 * m.value / nominal_rate ** len(model.coeffs),
                       2 * m.std_error, m.provenance)
        return DependenceProfile(regime="geometric", c_z=c, rate_z=nominal_rate,
                                 c_y=c, rate_y=nominal_rate)

    if isinstance(model, VAR1Process):
        lam = model.mean_coeff_norm()
        if lam <= 0.0:
            # degenerate A = 0: the process is IID noise
            m = _mean_abs_z0(model, n_mc, seed)
            c = Moment(2 * m.value, 2 * m.std_error, m.provenance)
            return DependenceProfile(regime="geometric", c_z=c, rate_z=nominal_rate,
                                     c_y=c, rate_y=nominal_rate,
                                     exact_zero_z=True, exact_zero_y=True)
        m = _mean_abs_z0(model, n_mc, seed)
        c = Moment(2 * m.value, 2 * m.std_error, m.provenance)
        return DependenceProfile(regime="geometric", c_z=c, rate_z=lam, c_y=c, rate_y=lam)

    if isinstance(model, GARCHProcess):
        lam = model.alpha + model.beta
        m = _mean_abs_z0(model, n_mc, seed)
        c = Moment(2 * m.value, 2 * m.std_error, m.provenance)
        if lam <= 0.0:
            return DependenceProfile(regime="geometric", c_z=c, rate_z=nominal_rate,
                                     c_y=c, rate_y=nominal_rate,
                                     exact_zero_z=True, exact_zero_y=True)
        return DependenceProfile(regime="geometric", c_z=c, rate_z=lam, c_y=c, rate_y=lam)

    if isinstance(model, ARFIMAProcess):
        alpha = 0.5 - model.d_frac
        if alpha <= 0:
            raise ValueError("algebraic envelope needs d_frac < 1/2")
        phi = arfima_coefficients(model.d_frac, model.trunc)
        tail_sq = np.cumsum(phi[::-1] ** 2)[::-1]  # tail_sq[t] = sum_{k>=t} phi_k^2
        taus = np.arange(1, model.trunc + 1, dtype=float)
        theta = 2.0 / np.sqrt(np.pi) * np.sqrt(tail_sq[1:])
        c = Moment(float(np.max(theta * taus ** alpha)), 0.0, "analytic")
        return DependenceProfile(regime="algebraic", c_z=c, rate_z=alpha,
                                 c_y=c, rate_y=alpha)

    raise ValueError(f"unsupported model {type(model).__name__}")


def combine_profiles(z_profile, y_profile):
    """Joint profile: z-role from z_profile, y-role from y_profile.

    The two profiles must share a regime (the bound chains require both
    processes under the same assumption).
    """
    if z_profile.regime != y_profile.regime:
        raise ValueError("profiles must share a regime to be combined")
    p, q = z_profile, y_profile
    return DependenceProfile(
        regime=p.regime, c_z=p.c_z, rate_z=p.rate_z, c_y=q.c_y, rate_y=q.rate_y,
        exact_zero_z=p.exact_zero_z, exact_zero_y=q.exact_zero_y,
        l_z=p.l_z, l_y=q.l_y, w_z=p.w_z, w_y=q.w_y,
        xi_mean_abs_z=p.xi_mean_abs_z, xi_mean_abs_y=q.xi_mean_abs_y,
        xi_second_z=p.xi_second_z, xi_second_y=q.xi_second_y,
        xi_bound_z=p.xi_bound_z, xi_bound_y=q.xi_bound_y,
        xi_law_z=p.xi_law_z, xi_law_y=q.xi_law_y)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def analytic_moment(model, order):
    """Closed-form E||Z_0||_2^order when available, else None."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if isinstance(model, IIDProcess):
        v = model.law.norm_power_moment(order)
        return None if v is None else Moment(float(v), 0.0, "analytic")
    if isinstance(model, (MAProcess, ARFIMAProcess)):
        if isinstance(model, MAProcess):
            if model.law.kind != "gaussian":
                return None
            kernel = np.concatenate(([1.0], model.coeffs))
            var = float(model.law.scale ** 2 * np.sum(kernel ** 2))
        else:
            phi = arfima_coefficients(model.d_frac, model.trunc)
            var = float(np.sum(phi ** 2))
        if order == 2:
            return Moment(var, 0.0, "analytic")
        return Moment(float(np.sqrt(2 * var / np.pi)), 0.0, "analytic")
    if isinstance(model, GARCHProcess):
        if order == 2 and model.representation == "returns":
            # E[r^2] = E[sigma^2] = stationary variance
            return Moment(model.stationary_variance, 0.0, "analytic")
        return None
    if isinstance(model, VAR1Process):
        if model.scale_law is None and order == 2:
            # vec stationary covariance: S = A S A^T + Cov(eta)
            d = model.noise.dim
            sm = model.noise.norm_power_moment(2)
            if sm is None:
                return None
            cov_eta = np.eye(d) * (sm / d)
            a = model.a_base
            m = np.eye(d * d) - np.kron(a, a)
            s = np.linalg.solve(m, cov_eta.reshape(-1)).reshape(d, d)
            return Moment(float(np.trace(s)), 0.0, "analytic")
        return None
    raise ValueError(f"unsupported model {type(model).__name__}")


def _sample_z0(model, lo, hi, seed, burn_in):
    """Independent stationary draws of Z_0, one per trial rng."""
    d = dim(model)

    if isinstance(model, IIDProcess):
        return _stack_draws(seed, lo, hi, lambda rng: model.law.sample(rng, 1)[0])

    if isinstance(model, MAProcess):
        q = len(model.coeffs)
        kernel = np.concatenate(([1.0], model.coeffs))
        block = _stack_draws(seed, lo, hi, lambda rng: model.law.sample(rng, q + 1)[:, 0])
        return (block @ kernel[::-1])[:, None]

    if isinstance(model, ARFIMAProcess):
        phi = arfima_coefficients(model.d_frac, model.trunc)
        block = _stack_draws(seed, lo, hi,
                             lambda rng: rng.standard_normal(model.trunc + 1))
        return (block @ phi[::-1])[:, None]

    if isinstance(model, GARCHProcess):
        block = _stack_draws(seed, lo, hi,
                             lambda rng: rng.standard_normal(burn_in + 1))
        s2 = np.full(hi - lo, model.stationary_variance)
        r2 = np.full(hi - lo, model.stationary_variance)
        for t in range(burn_in + 1):
            s2 = model.omega + model.alpha * r2 + model.beta * s2
            r2 = s2 * block[:, t] ** 2
        if model.representation == "squared":
            return np.column_stack([r2, s2])
        return (np.sqrt(s2) * block[:, -1])[:, None]

    if isinstance(model, VAR1Process):
        L = burn_in + 1

        def draw(rng):
            eta = model.noise.sample(rng, L)
            if model.scale_law is None:
                s = np.ones((L, 1))
            else:
                s = model.scale_law.sample(rng, L)
            return np.concatenate([eta, s], axis=1).reshape(-1)

        block = _stack_draws(seed, lo, hi, draw).reshape(hi - lo, L, d + 1)
        z = np.zeros((hi - lo, d))
        at = model.a_base.T
        for t in range(L):
            z = block[:, t, d, None] * (z @ at) + block[:, t, :d]
        return z

    raise ValueError(f"unsupported model {type(model).__name__}")


def moment(model, order, n_mc=10_000, seed=0, burn_in=500):
    """Monte Carlo E||Z_0||_2^order over independent stationary draws.

    Each trial uses its own rng (seed + trial index).  Returns a Moment with
    provenance "mc" and the standard error of the mean.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if n_mc < 2:
        raise ValueError("n_mc must be >= 2")
    if isinstance(model, ARFIMAProcess):
        per = 2 * (model.trunc + 1)
    else:
        per = 2 * (burn_in + 1) * max(1, dim(model))
    total = 0.0
    total_sq = 0.0
    for lo, hi in _chunks(n_mc, per):
        z = _sample_z0(model, lo, hi, seed, burn_in)
        vals = np.linalg.norm(z, axis=1) ** order
        total += vals.sum()
        total_sq += (vals ** 2).sum()
    mean = total / n_mc
    var = max(0.0, total_sq / n_mc - mean ** 2)
    return Moment(float(mean), float(np.sqrt(var / n_mc)), "mc")


# ---------------------------------------------------------------------------
# decay fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaFit:
    """Least-squares fit of a decay envelope to estimated theta values."""

    c: float
    rate: float
    exact_zero: bool
    n_used: int


def fit_theta_decay(theta_values, regime):
    """Fit log theta against tau (geometric) or log tau (algebraic).

    theta_values: iterable of (tau, theta) with theta a float or a Moment.
    Exact zeros are excluded from the fit; if every value is zero the result
    is flagged exact_zero (the process is exactly independent at the probed
    lags).
    """
    if regime not in ("geometric", "algebraic"):
        raise ValueError("regime must be 'geometric' or 'algebraic'")
    taus = []
    vals = []
    for tau, th in theta_values:
        v = th.value if isinstance(th, Moment) else float(th)
        if v < 0:
            raise ValueError("theta values must be >= 0")
        if v > 0:
            taus.append(float(tau))
            vals.append(v)
    if not vals:
        return ThetaFit(c=0.0, rate=0.0, exact_zero=True, n_used=0)
    if len(vals) < 3:
        raise ValueError("need at least 3 positive theta values to fit")
    taus = np.asarray(taus)
    logv = np.log(vals)
    x = taus if regime == "geometric" else np.log(taus)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, logv, rcond=None)
    if regime == "geometric":
        return ThetaFit(c=float(np.exp(coef[0])), rate=float(np.exp(coef[1])),
                        exact_zero=False, n_used=len(vals))
    return ThetaFit(c=float(np.exp(coef[0])), rate=float(-coef[1]),
                    exact_zero=False, n_used=len(vals))


# ---------------------------------------------------------------------------
# JSON specs (CLI plumbing)
# ---------------------------------------------------------------------------

_LAW_KEYS = {"kind", "dim", "scale"}


def _law_from_spec(spec):
    if not isinstance(spec, dict):
        raise ValueError("innovation spec must be an object")
    unknown = set(spec) - _LAW_KEYS
    if unknown:
        raise ValueError(f"unknown innovation keys: {sorted(unknown)}")
    return InnovationLaw(kind=spec.get("kind", "gaussian"),
                         dim=int(spec.get("dim", 1)),
                         scale=float(spec.get("scale", 1.0)))


def model_from_spec(spec):
    """Build a process model from a JSON-style dict; unknown keys rejected."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("process spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "iid":
        allowed = {"kind", "innovation"}
        _check_keys(spec, allowed)
        return IIDProcess(law=_law_from_spec(spec.get("innovation", {})))
    if kind == "ma":
        _check_keys(spec, {"kind", "coeffs", "innovation"})
        return MAProcess(coeffs=tuple(spec["coeffs"]),
                         law=_law_from_spec(spec.get("innovation", {})))
    if kind == "var1":
        _check_keys(spec, {"kind", "a", "innovation", "scale_innovation"})
        scale_law = (_law_from_spec(spec["scale_innovation"])
                     if "scale_innovation" in spec else None)
        return VAR1Process(a_base=np.asarray(spec["a"], dtype=float),
                           noise=_law_from_spec(spec.get("innovation", {"dim": len(spec["a"])})),
                           scale_law=scale_law)
    if kind == "garch11":
        _check_keys(spec, {"kind", "omega", "alpha", "beta", "representation"})
        return GARCHProcess(omega=float(spec["omega"]), alpha=float(spec["alpha"]),
                            beta=float(spec["beta"]),
                            representation=spec.get("representation", "returns"))
    if kind == "arfima":
        _check_keys(spec, {"kind", "d", "trunc"})
        return ARFIMAProcess(d_frac=float(spec["d"]),
                             trunc=int(spec.get("trunc", 10_000)))
    raise ValueError(f"unknown process kind {kind!r}")


def model_to_spec(model):
    """Inverse of model_from_spec (matrices as nested lists)."""
    if isinstance(model, IIDProcess):
        return {"kind": "iid", "innovation": _law_to_spec(model.law)}
    if isinstance(model, MAProcess):
        return {"kind": "ma", "coeffs": list(model.coeffs),
                "innovation": _law_to_spec(model.law)}
    if isinstance(model, VAR1Process):
        out = {"kind": "var1", "a": model.a_base.tolist(),
               "innovation": _law_to_spec(model.noise)}
        if model.scale_law is not None:
            out["scale_innovation"] = _law_to_spec(model.scale_law)
        return out
    if isinstance(model, GARCHProcess):
        return {"kind": "garch11", "omega": model.omega, "alpha": model.alpha,
                "beta": model.beta, "representation": model.representation}
    if isinstance(model, ARFIMAProcess):
        return {"kind": "arfima", "d": model.d_frac, "trunc": model.trunc}
    raise ValueError(f"unsupported model {type(model).__name__}")


def _law_to_spec(law):
    return {"kind": law.kind, "dim": law.dim, "scale": law.scale}


def _check_keys(spec, allowed):
    unknown = set(spec) - allowed
    if unknown:
        raise ValueError(f"unknown keys in process spec: {sorted(unknown)}")
