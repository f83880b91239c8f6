"""
Determinant hierarchy for the characteristic-function matrix.

For displacement columns beta_{.,1} .. beta_{.,O} the matrix

    Phi[l, j] = Phi({beta_{i,j} - beta_{i,l}; t_i})

is positive semidefinite for every classical stochastic process.  A negative
leading principal minor therefore certifies nonclassical multitime
correlations.  A failed search is not a proof of classicality.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from multitime.charfunc import char_fn
from multitime.errors import ArityMismatch, NonHermitianInput

NEGATIVE_TOL = 1e-9
HERMITIAN_TOL = 1e-10
DIAGONAL_TOL = 1e-12
MAX_SEARCH_ORDER = 6
DEFAULT_BOX = 3.0


@dataclass(frozen=True)
class BetaConfig:
    """Displacements ``entries[i, j]`` for time index i and column j."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2:
            raise ValueError("entries must be a (k, O) array")
        if not np.all(np.isfinite(e)):
            raise ValueError("entries must be finite")
        object.__setattr__(self, "entries", e)

    @property
    def k(self):
        return self.entries.shape[0]

    @property
    def order(self):
        return self.entries.shape[1]

    def shifted(self, offset):
        """Add the same per-time offset to every column."""
        offset = np.asarray(offset, dtype=complex).reshape(-1, 1)
        return BetaConfig(self.entries + offset)


@dataclass(frozen=True)
class MinorReport:
    minors: list
    nonclassical: bool
    witness: int = None


def charfn_matrix(m, cfg):
    """The O x O matrix of characteristic-function values for ``cfg``."""
    if cfg.k != m.k:
        raise ArityMismatch(f"config has {cfg.k} time points, moments have {m.k}")
    O = cfg.order
    out = np.empty((O, O), dtype=complex)
    for l in range(O):
        for j in range(O):
            out[l, j] = char_fn(m, cfg.entries[:, j] - cfg.entries[:, l])
    return out


def minor_hierarchy(matrix, tol=NEGATIVE_TOL):
    """Leading principal minors det_1..det_O and the resulting verdict.

    Raises
    ------
    NonHermitianInput
        If the matrix is not Hermitian or lacks a unit diagonal.
    """
    matrix = np.asarray(matrix, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise NonHermitianInput("characteristic-function matrix is not Hermitian")
    if np.max(np.abs(np.diag(matrix) - 1.0), initial=0.0) > DIAGONAL_TOL:
        raise NonHermitianInput("characteristic-function matrix lacks a unit diagonal")
    minors = [float(np.linalg.det(matrix[:o, :o]).real) for o in range(1, matrix.shape[0] + 1)]
    witness = next((o for o, d in enumerate(minors, start=1) if d < -tol), None)
    return MinorReport(minors=minors, nonclassical=witness is not None, witness=witness)


def det2(m, beta):
    """Lowest-order test 1 - |Phi(beta)|^2; negative values certify nonclassicality."""
    return 1.0 - abs(char_fn(m, beta)) ** 2


@dataclass(frozen=True)
class SearchResult:
    config: BetaConfig
    report: MinorReport
    best: float
    evaluations: int
    budget_exhausted: bool
    seed: int
    starts: list = field(default_factory=list, repr=False)


def _objective(m, cols, k, O):
    cfg = np.zeros((k, O), dtype=complex)
    cfg[:, 1:] = cols
    try:
        mat = charfn_matrix(m, BetaConfig(cfg))
    except ValueError:
        return np.inf
    if not np.all(np.isfinite(mat)):
        return np.inf
    with np.errstate(all="ignore"):
        vals = [np.linalg.det(mat[:o, :o]).real for o in range(2, O + 1)]
    best = min(vals)
    return best if np.isfinite(best) else np.inf


def _project(x, box):
    z = x[0::2] + 1j * x[1::2]
    mod = np.abs(z)
    z = np.where(mod > box, z * (box / np.where(mod > 0, mod, 1.0)), z)
    out = np.empty_like(x)
    out[0::2], out[1::2] = z.real, z.imag
    return out


def _descend(m, k, O, x, box, budget):
    """Coordinate descent from ``x``; returns (value, x, evaluations, converged)."""

    def f(v):
        return _objective(m, (v[0::2] + 1j * v[1::2]).reshape(k, O - 1), k, O)

    best = f(x)
    used = 1
    step = box / 2.0
    while step > 1e-6:
        improved = False
        for c in range(x.size):
            for sign in (1.0, -1.0):
                if used >= budget:
                    return best, x, used, False
                trial = x.copy()
                trial[c] += sign * step
                trial = _project(trial, box)
                val = f(trial)
                used += 1
                if val < best:
                    best, x, improved = val, trial, True
                    break
        if not improved:
            step *= 0.5
    return best, x, used, True


def search_violation(m, order=2, budget=10_000, seed=0, starts=8, box=DEFAULT_BOX, workers=1):
    """Seeded multi-start search for the most negative leading minor.

    Column 1 is pinned at zero (the matrix depends on differences only);
    the remaining Re/Im coordinates are confined to |beta| <= ``box``.  The
    budget counts objective evaluations and is split evenly over the
    starts.  Running out of budget is reported via ``budget_exhausted``.
    """
    if not 2 <= order <= MAX_SEARCH_ORDER:
        raise ValueError(f"order must be in 2..{MAX_SEARCH_ORDER}")
    if budget < starts:
        raise ValueError("budget must cover at least one evaluation per start")
    k, O = m.k, order
    per_start = budget // starts
    ndim = 2 * k * (O - 1)

    def run(idx):
        rng = np.random.default_rng([seed, idx])
        x0 = _project(rng.uniform(-box, box, ndim), box)
        return _descend(m, k, O, x0, box, per_start)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(starts)))
    else:
        results = [run(i) for i in range(starts)]

    # deterministic reduction: lowest value, then lowest start index
    idx = min(range(starts), key=lambda i: (results[i][0], i))
    value, x, _, _ = results[idx]
    cfg = np.zeros((k, O), dtype=complex)
    cfg[:, 1:] = (x[0::2] + 1j * x[1::2]).reshape(k, O - 1)
    config = BetaConfig(cfg)
    report = minor_hierarchy(charfn_matrix(m, config))
    return SearchResult(
        config=config,
        report=report,
        best=float(value),
        evaluations=sum(r[2] for r in results),
        budget_exhausted=not all(r[3] for r in results),
        seed=seed,
        starts=[float(r[0]) for r in results],
    )
