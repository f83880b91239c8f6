"""
Brute-force evaluation of the ordered characteristic function in a truncated
Fock space.

The interaction Hamiltonian H(t) = kappa (e^{-i delta t} a^dag^2 + e^{i delta t} a^2)
(hbar = 1) is stepped with the exponential midpoint rule.  Since
H(t) = V(t) H(0) V(t)^dag with the diagonal V(t) = exp(-i delta t n / 2),
one step costs two diagonal phases and one dense mat-vec.
"""

import math

import numpy as np
from scipy.linalg import expm

from multitime.charfunc import OrderedMoments, char_fn
from multitime.errors import ArityMismatch, TruncationError

DEFAULT_DIM = 60
DEFAULT_SUBSTEPS = 20000
LEAKAGE_LEVELS = 5
LEAKAGE_LIMIT = 1e-8


class FockModel:
    """Truncated single-mode model with cached step exponentials."""

    def __init__(self, params, dim=DEFAULT_DIM, n_substeps=DEFAULT_SUBSTEPS):
        if dim < 30:
            raise ValueError("dim must be >= 30")
        self.params = params
        self.dim = dim
        self.n_substeps = int(n_substeps)
        self.a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
        ad = self.a.conj().T
        self.h0 = params.kappa * (ad @ ad + self.a @ self.a)
        self.number = np.arange(dim, dtype=float)
        self._steps = {}

    def _step_matrix(self, h):
        key = round(h, 15)
        if key not in self._steps:
            self._steps[key] = expm(-1j * h * self.h0)
        return self._steps[key]

    def _phases(self, t):
        return np.exp(-0.5j * self.params.delta * t * self.number)

    def evolve(self, v, tau0, tau1):
        """Apply U(t1) U(t0)^dag to ``v`` (forward when tau1 > tau0, else backward)."""
        if tau1 == tau0:
            return v
        n = max(1, math.ceil(abs(tau1 - tau0) * self.n_substeps - 1e-9))
        t0, t1 = self.params.time(tau0), self.params.time(tau1)
        h = (t1 - t0) / n
        step = self._step_matrix(abs(h))
        if h < 0:
            step = step.conj().T
        for i in range(n):
            ph = self._phases(t0 + (i + 0.5) * h)
            v = ph * (step @ (np.conj(ph) * v))
        return v

    def vacuum(self):
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def leakage(self, v):
        return float(np.sum(np.abs(v[-LEAKAGE_LEVELS:]) ** 2) / np.sum(np.abs(v) ** 2))

    def check(self, v, what):
        leak = self.leakage(v)
        if leak >= LEAKAGE_LIMIT:
            raise TruncationError(
                f"{what}: population {leak:.2e} in the top {LEAKAGE_LEVELS} of {self.dim} levels"
            )


def _forward_states(model, taus):
    order = sorted(range(len(taus)), key=taus.__getitem__)
    states = [None] * len(taus)
    v, prev = model.vacuum(), 0.0
    for i in order:
        v = model.evolve(v, prev, taus[i])
        model.check(v, f"state at tau={taus[i]}")
        states[i] = v
        prev = taus[i]
    return states


def fock_moments(params, taus, dim=DEFAULT_DIM, n_substeps=DEFAULT_SUBSTEPS):
    """Ordered second moments computed as explicit operator products.

    n[i][j] = <0| a^dag(t_i) a(t_j) |0> and s[i][j] = <0| a(t_late) a(t_early) |0>
    with a(t) = U(t)^dag a U(t).
    """
    taus = [float(t) for t in taus]
    model = FockModel(params, dim, n_substeps)
    psi = _forward_states(model, taus)
    # phi_j = a(t_j)|0> expressed at t = 0
    phi = [model.evolve(model.a @ p, t, 0.0) for p, t in zip(psi, taus)]
    k = len(taus)
    n = np.empty((k, k), dtype=complex)
    s = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            n[i, j] = np.vdot(phi[i], phi[j])
    for i in range(k):
        for j in range(i, k):
            late, early = (i, j) if taus[i] >= taus[j] else (j, i)
            moved = model.evolve(phi[early], 0.0, taus[late])
            s[i, j] = s[j, i] = np.vdot(psi[late], model.a @ moved)
    return OrderedMoments(taus=tuple(taus), n=n, s=s)


def _exp_lowering(model, x, v):
    """exp(x a) v; exact in the truncated space because a only lowers."""
    out = v.copy()
    term = v.copy()
    for m in range(1, model.dim):
        term = (x / m) * (model.a @ term)
        out = out + term
        if not np.any(term):
            break
    return out


def fock_direct(params, taus, betas, dim=DEFAULT_DIM, n_substeps=DEFAULT_SUBSTEPS):
    """Ordered characteristic function without assuming Gaussian statistics.

    The ordered product is  prod_{t ascending} e^{b_i a^dag(t_i)}  times
    prod_{t descending} e^{-conj(b_i) a(t_i)}; both vacuum-side factors are
    built by applying the earliest exponential first and the overlap is
    taken in the frame of the latest time.
    """
    taus = [float(t) for t in taus]
    betas = np.asarray(betas, dtype=complex).reshape(-1)
    if betas.shape[0] != len(taus):
        raise ArityMismatch(f"expected {len(taus)} displacement arguments, got {betas.shape[0]}")
    model = FockModel(params, dim, n_substeps)
    order = sorted(range(len(taus)), key=taus.__getitem__)
    bra, ket, prev = model.vacuum(), model.vacuum(), 0.0
    for i in order:
        bra = model.evolve(bra, prev, taus[i])
        ket = model.evolve(ket, prev, taus[i])
        model.check(bra, f"state at tau={taus[i]}")
        bra = _exp_lowering(model, np.conj(betas[i]), bra)
        ket = _exp_lowering(model, -np.conj(betas[i]), ket)
        model.check(bra, f"displaced bra at tau={taus[i]}")
        model.check(ket, f"displaced ket at tau={taus[i]}")
        prev = taus[i]
    return complex(np.vdot(bra, ket))


def fock_oracle(params, time_points, betas, dim=DEFAULT_DIM, n_substeps=DEFAULT_SUBSTEPS, method="moments"):
    """Characteristic function from the truncated Fock-space model.

    ``method="moments"`` evaluates the ordered second moments as operator
    products and exponentiates them; ``method="direct"`` expands the ordered
    exponentials without the Gaussian shortcut.

    Raises
    ------
    TruncationError
        If any propagated state puts >= 1e-8 of its population in the top
        five levels.
    """
    betas = np.asarray(betas, dtype=complex).reshape(-1)
    if betas.shape[0] != len(time_points):
        raise ArityMismatch(f"expected {len(time_points)} displacement arguments, got {betas.shape[0]}")
    if method == "moments":
        return char_fn(fock_moments(params, time_points, dim, n_substeps), betas)
    if method == "direct":
        return fock_direct(params, time_points, betas, dim, n_substeps)
    raise ValueError(f"unknown method {method!r}")


def fock_commutator(params, tau1, tau2, dim=DEFAULT_DIM, n_substeps=DEFAULT_SUBSTEPS):
    """Vacuum expectation of [a(tau1), a(tau2)] from raw operator products."""
    model = FockModel(params, dim, n_substeps)
    psi1, psi2 = _forward_states(model, [tau1, tau2])

    def product(first, second, psi_first, psi_second):
        # <0| a(t_first) a(t_second) |0>
        phi = model.evolve(model.a @ psi_second, second, 0.0)
        moved = model.evolve(phi, 0.0, first)
        return np.vdot(psi_first, model.a @ moved)

    return complex(product(tau1, tau2, psi1, psi2) - product(tau2, tau1, psi2, psi1))
