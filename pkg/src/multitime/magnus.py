"""
Magnus expansion of the parametric-amplifier evolution matrix.

The field operators obey d/dt (a, a^dag) = M(t) (a, a^dag) with

    M(t) = [[0, -2i kappa e^{-i delta t}], [2i kappa e^{i delta t}, 0]].

Time is handled in the scaled variable tau = 2 kappa t / pi, in which the
generator per unit tau reads

    G(tau) = pi [[0, -i e^{-i theta}], [i e^{i theta}, 0]],   theta = (delta/kappa) pi tau / 2,

so every Magnus term depends only on (tau, delta/kappa).  Terms are tabulated
cumulatively on a uniform tau grid because higher orders consume the lower
ones as functions of time.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from multitime import linalg2
from multitime.errors import ConvergenceGateViolation, GridRangeError, StructureViolation
from multitime.quadrature import cumulative_simpson, hermite, uniform_grid

MAX_ORDER = 15
DEFAULT_N_MAX = 11
NODES_PER_UNIT_TAU = 2048
MIN_GRID_POINTS = 64
STRUCT_RTOL = 1e-9

_SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class ModelParams:
    """Coupling ``kappa`` > 0 and frequency mismatch ``delta`` (both in inverse time units)."""

    kappa: float
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa!r}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta!r}")

    @property
    def ratio(self):
        return self.delta / self.kappa

    def time(self, tau):
        """Physical time for scaled time ``tau``."""
        return math.pi * tau / (2.0 * self.kappa)

    def tau(self, t):
        return 2.0 * self.kappa * t / math.pi


def generator_at(params, t):
    """The 2x2 generator M(t) in physical units."""
    k, d = params.kappa, params.delta
    return np.array(
        [[0.0, -2j * k * np.exp(-1j * d * t)], [2j * k * np.exp(1j * d * t), 0.0]]
    )


def scaled_generator(ratio, tau):
    """Generator per unit scaled time, vectorised over ``tau``."""
    tau = np.asarray(tau, dtype=float)
    phase = np.exp(1j * ratio * math.pi * tau / 2.0)
    g = np.zeros(tau.shape + (2, 2), dtype=complex)
    g[..., 0, 1] = -1j * math.pi * np.conj(phase)
    g[..., 1, 0] = 1j * math.pi * phase
    return g


@dataclass(frozen=True)
class GateReport:
    converges: bool
    radius: float
    margin: float


def convergence_gate(params, tau_end):
    """Check the Magnus convergence bound  int_0^t ||M|| ds = pi tau < pi."""
    if tau_end < 0:
        raise ValueError("tau_end must be non-negative")
    # int_0^t ||M(s)||_2 ds = 2 kappa t = pi tau
    margin = math.pi - 2.0 * params.kappa * params.time(tau_end)
    return GateReport(converges=tau_end < 1.0, radius=1.0, margin=margin)


@lru_cache(maxsize=None)
def bernoulli(n):
    """Bernoulli number B_n with the B_1 = -1/2 convention, as a Fraction."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    return b[n]


@dataclass(frozen=True)
class MagnusTerm:
    """Order-``n`` Magnus term tabulated on the series grid.

    ``samples[i]`` is Omega_n at grid node i and ``rates[i]`` its tau
    derivative.  Even orders are diag(-iC, iC); odd orders are
    [[0, S], [S*, 0]].
    """

    n: int
    samples: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)

    @property
    def even(self):
        return self.n % 2 == 0

    @property
    def c(self):
        """Signed diagonal coefficient C_n (even orders; zero for odd)."""
        if not self.even:
            return np.zeros(self.samples.shape[0])
        return self.samples[:, 1, 1].imag

    @property
    def s(self):
        """Complex off-diagonal coefficient S_n = |S_n| e^{i phi_n} (odd orders)."""
        if self.even:
            return np.zeros(self.samples.shape[0], dtype=complex)
        return self.samples[:, 0, 1]

    @property
    def abs_c(self):
        return np.abs(self.c)

    @property
    def abs_s(self):
        return np.abs(self.s)

    @property
    def phi(self):
        return np.angle(self.s)

    def norms(self):
        return linalg2.spectral_norm(self.samples)


def structure_residual(omega, n):
    """Size of the part of ``omega`` that violates the order-``n`` form."""
    a, b = omega[..., 0, 0], omega[..., 0, 1]
    c, d = omega[..., 1, 0], omega[..., 1, 1]
    if n % 2 == 0:
        return np.abs(b) + np.abs(c) + np.abs(a + d) + np.abs(a.real) + np.abs(d.real)
    return np.abs(a) + np.abs(d) + np.abs(c - np.conj(b))


@dataclass(frozen=True)
class MagnusSeries:
    """Magnus terms Omega_1..Omega_{n_max} on the local grid [0, tau_len].

    The generator is evaluated at absolute scaled time ``tau_start + grid``.
    """

    params: ModelParams
    n_max: int
    grid: np.ndarray = field(repr=False)
    terms: tuple = field(repr=False)
    tau_start: float = 0.0

    @property
    def tau_end(self):
        return self.tau_start + float(self.grid[-1])

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    def _local(self, tau):
        x = tau - self.tau_start
        span = float(self.grid[-1])
        slack = 1e-12 * max(1.0, span)
        if x < -slack or x > span + slack:
            raise GridRangeError(
                f"tau={tau} outside series range [{self.tau_start}, {self.tau_end}]"
            )
        return min(max(x, 0.0), span)

    def omega(self, n, tau):
        """Omega_n at ``tau`` (cubic Hermite between nodes)."""
        term = self.terms[n - 1]
        return hermite(self.grid, term.samples, term.rates, self._local(tau))

    def total(self, tau, n_max=None):
        """Sum of Omega_1..Omega_{n_max} at ``tau``."""
        n_max = self.n_max if n_max is None else n_max
        if not 1 <= n_max <= self.n_max:
            raise ValueError(f"n_max={n_max} outside 1..{self.n_max}")
        x = self._local(tau)
        out = np.zeros((2, 2), dtype=complex)
        for term in self.terms[:n_max]:
            out = out + hermite(self.grid, term.samples, term.rates, x)
        return out


def default_grid_points(tau_len):
    return max(MIN_GRID_POINTS + 1, int(math.ceil(NODES_PER_UNIT_TAU * tau_len)) + 1)


def magnus_terms(params, tau_end, n_max=DEFAULT_N_MAX, grid_points=None, tau_start=0.0):
    """Tabulate Omega_1..Omega_{n_max} for the evolution from ``tau_start`` to ``tau_end``.

    Orders n >= 2 come from the generator recursion

        S_n^(1) = [Omega_{n-1}, G],
        S_n^(j) = sum_{m=1}^{n-j} [Omega_m, S_{n-m}^(j-1)],
        Omega_n = sum_{j=1}^{n-1} B_j / j!  int S_n^(j),

    which keeps every integral one-dimensional over tabulated functions.

    Parameters
    ----------
    params : ModelParams
    tau_end : float
        End of the interval in scaled time.
    n_max : int
        Highest Magnus order, 1..15.
    grid_points : int, optional
        Number of grid nodes (>= 64, bumped to odd).  Defaults to 2048 per
        unit tau.
    tau_start : float
        Start of the interval; the generator phase is taken at absolute time.

    Raises
    ------
    ConvergenceGateViolation
        If the interval length is >= 1 in scaled time.
    StructureViolation
        If a term leaves its even/odd form (indicates a bug).
    """
    if not 1 <= n_max <= MAX_ORDER:
        raise ValueError(f"n_max must be in 1..{MAX_ORDER}, got {n_max}")
    tau_len = tau_end - tau_start
    if tau_len < 0:
        raise ValueError("tau_end must not precede tau_start")
    if not convergence_gate(params, tau_len).converges:
        raise ConvergenceGateViolation(
            f"interval length {tau_len} in scaled time is outside the convergence radius 1"
        )
    if grid_points is None:
        grid_points = default_grid_points(tau_len)
    elif grid_points < MIN_GRID_POINTS:
        raise ValueError(f"grid_points must be >= {MIN_GRID_POINTS}")
    grid = uniform_grid(tau_len, grid_points)
    h = grid[1] - grid[0]

    ratio = params.ratio
    flip = ratio < 0
    gen = scaled_generator(abs(ratio), tau_start + grid)

    omegas = []
    rates = []
    nested = {}  # (n, j) -> S_n^(j)
    for n in range(1, n_max + 1):
        if n == 1:
            rate = gen
        else:
            nested[n, 1] = linalg2.commutator(omegas[n - 2], gen)
            for j in range(2, n):
                acc = np.zeros_like(gen)
                for m in range(1, n - j + 1):
                    acc = acc + linalg2.commutator(omegas[m - 1], nested[n - m, j - 1])
                nested[n, j] = acc
            rate = np.zeros_like(gen)
            for j in range(1, n):
                b = bernoulli(j)
                if b:
                    rate = rate + (float(b) / math.factorial(j)) * nested[n, j]
        omegas.append(cumulative_simpson(rate, h))
        rates.append(rate)

    terms = []
    for n, (om, rt) in enumerate(zip(omegas, rates), start=1):
        if flip:
            # G(-r) = sz conj(G(r)) sz and the map is a Lie-algebra automorphism
            om = _SIGMA_Z @ np.conj(om) @ _SIGMA_Z
            rt = _SIGMA_Z @ np.conj(rt) @ _SIGMA_Z
        _check_term(om, n)
        terms.append(MagnusTerm(n=n, samples=om, rates=rt))
    return MagnusSeries(params=params, n_max=n_max, grid=grid, terms=tuple(terms), tau_start=tau_start)


def _check_term(omega, n):
    norms = linalg2.spectral_norm(omega)
    scale = np.maximum(1.0, norms)
    resid = structure_residual(omega, n) / scale
    worst = float(np.max(resid))
    if worst > STRUCT_RTOL:
        raise StructureViolation(f"Omega_{n} off-structure residual {worst:.3e}")
    tr = float(np.max(np.abs(linalg2.trace(omega)) / scale))
    if tr > 1e-10:
        raise StructureViolation(f"Omega_{n} trace {tr:.3e}")


def term_norm_map(taus, ratios, n_list=(1, 2, 10, 11), grid_points=None, workers=1):
    """Spectral norms ||Omega_n(tau)||_2 over a (tau, delta/kappa) grid.

    Returns rows ``(tau, ratio, n, norm)`` in tau-major order, then ratio,
    then n.  Each ratio column is computed independently, so ``workers > 1``
    evaluates columns concurrently without changing the result.
    """
    taus = [float(t) for t in taus]
    ratios = [float(r) for r in ratios]
    n_list = [int(n) for n in n_list]
    if not taus or not ratios or not n_list:
        return []
    n_top = max(n_list)
    tau_top = max(taus)

    def column(ratio):
        series = magnus_terms(ModelParams(1.0, ratio), tau_top, n_top, grid_points)
        return {
            (t, n): float(linalg2.spectral_norm(series.omega(n, t))) for t in taus for n in n_list
        }

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(column, ratios))
    else:
        cols = [column(r) for r in ratios]

    rows = []
    for t in taus:
        for r, col in zip(ratios, cols):
            for n in n_list:
                rows.append((t, r, n, col[t, n]))
    return rows
