"""
Normally and time-ordered characteristic functions of the amplified vacuum.

For the Heisenberg fields a(t_i) = U11(t_i) a + U12(t_i) a^dag acting on the
vacuum, the ordered second moments are

    n[i][j] = <a^dag(t_i) a(t_j)>        = conj(U12(t_i)) U12(t_j)
    s[i][j] = <a(t_late) a(t_early)>     = U11(t_late) U12(t_early)

(annihilators sorted with decreasing time from left to right).  The state
is Gaussian with zero mean and all operators commute under the ordering
symbol, so

    ln Phi = 1/2 sum_ij [b_i b_j conj(s_ij) + conj(b_i b_j) s_ij] - sum_ij b_i conj(b_j) n_ij.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from multitime.errors import ArityMismatch, ParamMismatch
from multitime.magnus import DEFAULT_N_MAX
from multitime.propagator import propagators


@dataclass(frozen=True)
class OrderedMoments:
    """Ordered second moments over k time points.

    ``n`` is Hermitian, ``s`` symmetric; the <a^dag a^dag> moments are the
    conjugate of ``s`` and are not stored.
    """

    taus: tuple
    n: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)

    @property
    def k(self):
        return self.n.shape[0]

    @classmethod
    def zeros(cls, k):
        z = np.zeros((k, k), dtype=complex)
        return cls(taus=(0.0,) * k, n=z, s=z.copy())

    @classmethod
    def thermal(cls, k, nbar):
        """Synthetic classical reference: s = 0, n = nbar * identity."""
        return cls(taus=(0.0,) * k, n=nbar * np.eye(k, dtype=complex), s=np.zeros((k, k), dtype=complex))


def ordered_moments(props):
    """Ordered moments for vacuum input from a list of propagators (one per time point)."""
    props = list(props)
    if not props:
        raise ValueError("need at least one time point")
    for p in props[1:]:
        if p.params != props[0].params:
            raise ParamMismatch("propagators come from different model parameters")
    k = len(props)
    u11 = np.array([p.u11 for p in props])
    u12 = np.array([p.u12 for p in props])
    taus = np.array([p.tau for p in props])
    n = np.conj(u12)[:, None] * u12[None, :]
    late_is_i = taus[:, None] >= taus[None, :]
    s = np.where(late_is_i, u11[:, None] * u12[None, :], u11[None, :] * u12[:, None])
    # equal times: both orders describe the same product, symmetrise the rounding
    s = 0.5 * (s + s.T)
    return OrderedMoments(taus=tuple(float(t) for t in taus), n=n, s=s)


def log_char_fn(m, betas):
    betas = np.asarray(betas, dtype=complex).reshape(-1)
    if betas.shape[0] != m.k:
        raise ArityMismatch(f"expected {m.k} displacement arguments, got {betas.shape[0]}")
    bb = np.outer(betas, betas)
    quad = 0.5 * np.sum(bb * np.conj(m.s) + np.conj(bb) * m.s)
    mixed = np.sum(np.outer(betas, np.conj(betas)) * m.n)
    return quad - mixed


def char_fn(m, betas):
    """Ordered multitime characteristic function Phi({beta_i; t_i})."""
    return complex(np.exp(log_char_fn(m, betas)))


def quadratic_form(m):
    """Real symmetric Q with x^T Q x = ln|Phi|^2.

    Coordinates are interleaved as (Re b_1, Im b_1, ..., Re b_k, Im b_k).
    """
    a = np.conj(m.s)
    ar, ai = a.real, a.imag
    nr, ni = m.n.real, m.n.imag
    k = m.k
    q_rr = 2.0 * ar - 2.0 * nr
    q_ii = -2.0 * ar - 2.0 * nr
    q_ri = -2.0 * (ai + ni)
    q = np.empty((2 * k, 2 * k))
    q[0::2, 0::2] = q_rr
    q[1::2, 1::2] = q_ii
    q[0::2, 1::2] = q_ri
    q[1::2, 0::2] = q_ri.T
    return 0.5 * (q + q.T)


@dataclass(frozen=True)
class PrincipalAxes:
    """Eigenvalues of Q in descending order; ``rotation`` holds the axes as columns."""

    eigenvalues: np.ndarray
    rotation: np.ndarray = field(repr=False)

    @property
    def lambda_max(self):
        return float(self.eigenvalues[0])

    def top_axis(self):
        return self.rotation[:, 0]

    def labels(self):
        """Split the axes into per-time pairs (lambda_i, mu_i) with mu_i >= lambda_i.

        Time i receives the two unassigned axes with the largest weight on its
        (Re b_i, Im b_i) coordinates; within a pair the larger exponent is
        attached to the imaginary direction of the rotated amplitude.
        """
        dim = self.rotation.shape[0]
        k = dim // 2
        weights = self.rotation[0::2, :] ** 2 + self.rotation[1::2, :] ** 2
        free = list(range(dim))
        lam, mu = [], []
        for i in range(k):
            pick = sorted(free, key=lambda c: (-weights[i, c], c))[:2]
            for c in pick:
                free.remove(c)
            pair = sorted(float(self.eigenvalues[c]) for c in pick)
            lam.append(pair[0])
            mu.append(pair[1])
        return lam, mu


def principal_axes(q):
    vals, vecs = np.linalg.eigh(np.asarray(q, dtype=float))
    idx = np.argsort(-vals, kind="stable")
    return PrincipalAxes(eigenvalues=vals[idx], rotation=vecs[:, idx])


def beta_from_coords(x):
    x = np.asarray(x, dtype=float)
    return x[0::2] + 1j * x[1::2]


def lambda_max_curve(params, taus, n_max=DEFAULT_N_MAX, method="magnus", grid_points=None):
    """Single-time lambda_max(tau) for the given Magnus truncation.

    Returns a list of ``(tau, lambda_max)``.  ``method`` selects the
    propagator route (``magnus``, ``stepped`` or ``oracle``).
    """
    props = propagators(params, taus, n_max, method, grid_points)
    return [(p.tau, principal_axes(quadratic_form(ordered_moments([p]))).lambda_max) for p in props]


def surface_value(axes, mode):
    """|Phi|^2 of the two-time function on the unit sphere in rotated coordinates."""
    if mode == "paper":
        # |g1|^2 + |g2|^2 = 1 with arg g1 = arg g2 = pi/2: only the mu axes are
        # probed and the best weight split puts everything on the larger one
        _, mu = axes.labels()
        return float(np.exp(max(mu)))
    if mode == "sup":
        return float(np.exp(max(axes.lambda_max, 0.0)))
    raise ValueError(f"unknown mode {mode!r}")


def two_time_surface(
    params, tau_grid, n_max=DEFAULT_N_MAX, mode="paper", method="magnus", grid_points=None, workers=1
):
    """|Phi|^2 over all pairs (tau1, tau2) of ``tau_grid``.

    ``result[i, j]`` belongs to (tau1, tau2) = (tau_grid[i], tau_grid[j]).
    Each cell uses its own ordering (tau1 >= tau2 or tau2 >= tau1); the two
    quadrants are evaluated independently, not mirrored.
    """
    tau_grid = [float(t) for t in tau_grid]
    props = propagators(params, tau_grid, n_max, method, grid_points)

    def row(i):
        out = np.empty(len(tau_grid))
        for j in range(len(tau_grid)):
            m = ordered_moments([props[i], props[j]])
            out[j] = surface_value(principal_axes(quadratic_form(m)), mode)
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(len(tau_grid))))
    else:
        rows = [row(i) for i in range(len(tau_grid))]
    return np.array(rows).reshape(len(tau_grid), len(tau_grid))
