"""Median-of-Means PCA.

The data are split once into ``L`` equal random blocks.  For a basis ``V``
each block is scored by its mean squared residual
``g_V(x) = ||x||^2 - ||V^T x||^2``; the MoM objective is the (lower) median
of these block scores.  Each iteration takes a step using only the scatter
of the median block and retracts back to orthonormal columns with
Gram-Schmidt:

    V <- orth(V + eta * S_med V),    S_med = (1/B) sum_{i in median block} x_i x_i^T

The ``+`` sign is deliberate.  ``g_V`` decreases as ``V`` captures more of
the block's energy, so the objective-decreasing move on ``V`` is along
``+S_med V`` (the factor 2 of the gradient is folded into ``eta``).
Stepping along ``-S_med V`` and re-orthonormalizing converges to the
*minor* eigenvectors instead.

The starting basis is chosen by MoM objective among the top-``d``
eigenvectors of the full scatter and those of individual block scatters.
The full-scatter start alone is pulled toward gross outliers, and the
outlier direction is a local minimum the iteration cannot leave: blocks
holding an outlier fit it well there, become the median and snap the
basis back.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import _rng
from .errors import DimensionMismatch, InvalidBlockCount, InvalidConfig
from .linalg import (
    ORTHO_TOL,
    RANK_RTOL,
    _mgs,
    _orthonormalize_fill,
    as_data_matrix,
    gram_schmidt_orthonormalize,
    orthonormality_error,
    residual_value,
    scatter_matrix,
    top_eigenvectors,
)
from .preprocess import featurewise_median

MODEL_FORMAT = "mompca-model"
MAX_STARTS = 64
INIT_MODES = ("multistart", "scatter")
MODEL_VERSION = 1


@dataclass(frozen=True)
class PartitionPlan:
    """Equal-size random blocks over ``range(N)`` (0-based indices).

    ``blocks`` has shape ``(L, B)``; ``dropped`` holds the ``N mod L``
    indices left over at the tail of the seeded permutation.
    """

    n: int
    blocks: np.ndarray
    dropped: np.ndarray
    seed: int

    @property
    def n_blocks(self):
        return self.blocks.shape[0]

    @property
    def block_size(self):
        return self.blocks.shape[1]


def partition(n, n_blocks, seed=0, *, draw=0):
    n, n_blocks = int(n), int(n_blocks)
    if n_blocks < 1 or n_blocks > n:
        raise InvalidBlockCount(f"block count L={n_blocks} must satisfy 1 <= L <= N={n}")
    perm = _rng.make_rng(seed, _rng.PARTITION, draw).permutation(n)
    B = n // n_blocks
    blocks = perm[: n_blocks * B].reshape(n_blocks, B)
    blocks.flags.writeable = False
    dropped = perm[n_blocks * B:]
    dropped.flags.writeable = False
    return PartitionPlan(n=n, blocks=blocks, dropped=dropped, seed=int(seed))


def median_block(values):
    """Index and value of the lower-median block score.

    Scores are stably sorted ascending and rank ``(L - 1) // 2`` is taken,
    so ties resolve to the lowest block index and the result is always an
    actual block.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size < 1:
        raise InvalidConfig("need at least one block value")
    order = np.argsort(values, kind="stable")
    idx = int(order[(values.size - 1) // 2])
    return idx, float(values[idx])


def block_objectives(X, plan, V):
    """Mean residual of every block, shape ``(L,)``."""
    X = np.asarray(X, dtype=np.float64)
    r = residual_value(V, X[plan.blocks.ravel()])
    return r.reshape(plan.blocks.shape).mean(axis=1)


def block_objective(X, plan, block, V):
    X = np.asarray(X, dtype=np.float64)
    return float(np.mean(residual_value(V, X[plan.blocks[block]])))


def mom_objective(X, plan, V):
    return median_block(block_objectives(X, plan, V))[1]


def _retract(M, rng):
    # Gram-Schmidt with a single seeded retry for dependent columns.
    Q, bad = _mgs(M)
    if not bad:
        return Q
    M = Q.copy()
    M[:, bad] = rng.standard_normal((M.shape[0], len(bad)))
    return gram_schmidt_orthonormalize(M)


def _step(Xblock, V, eta, rng):
    # S_med V accumulated as X^T (X V) / B; the p x p scatter is never formed.
    G = Xblock.T @ (Xblock @ V) / Xblock.shape[0]
    return _retract(V + eta * G, rng)


def gradient_step(X, plan, V, eta, seed=0):
    """One MoM step from ``V`` on (already centered) data ``X``.

    The median block is chosen from the current ``V``.  Raises
    ``RankDeficient`` if the retraction fails even after dependent columns
    are replaced by seeded random ones.
    """
    X = np.asarray(X, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"basis shape {V.shape} does not match {X.shape[1]} features")
    med, _ = median_block(block_objectives(X, plan, V))
    return _step(X[plan.blocks[med]], V, eta, _rng.make_rng(seed, _rng.RECOVERY))


@dataclass(frozen=True)
class FitConfig:
    """Tunables of the MoM fit.

    ``eta=None`` selects ``step_scale / lambda_1`` where ``lambda_1`` is the
    largest eigenvalue of the median block's scatter ``S_med`` at the
    initial basis.  Using the median block rather than the full sample keeps
    gross outliers from shrinking the step.  ``tol`` is a relative test on
    successive objective values: ``|f_t - f_{t-1}| <= tol * max(1, |f_{t-1}|)``.

    ``init="multistart"`` starts from the lowest-objective basis among the
    full-scatter eigenvectors and the eigenvectors of up to ``MAX_STARTS``
    block scatters; ``init="scatter"`` uses the full scatter only.
    """

    d: int
    n_blocks: int = 1
    eta: float | None = None
    step_scale: float = 1.0
    tol: float = 1e-7
    max_iter: int = 500
    seed: int = 0
    center: bool = True
    repartition: bool = False
    init: str = "multistart"

    def validate(self, n, p):
        if self.init not in INIT_MODES:
            raise InvalidConfig(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if not 1 <= self.d <= p:
            raise InvalidConfig(f"d={self.d} must satisfy 1 <= d <= p={p}")
        if self.n_blocks < 1 or self.n_blocks > n:
            raise InvalidBlockCount(
                f"block count L={self.n_blocks} must satisfy 1 <= L <= N={n}; "
                "each block needs at least one observation"
            )
        if self.eta is not None and not (np.isfinite(self.eta) and self.eta > 0):
            raise InvalidConfig(f"eta must be a positive finite number, got {self.eta}")
        if not (np.isfinite(self.step_scale) and self.step_scale > 0):
            raise InvalidConfig(f"step_scale must be a positive finite number, got {self.step_scale}")
        if not self.tol > 0:
            raise InvalidConfig(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidConfig(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class FitReport:
    iterations_run: int
    objective_trace: tuple
    median_block_trace: tuple
    converged: bool
    best_iteration: int
    eta: float
    max_orthonormality_error: float
    start_block: int = -1

    @property
    def best_objective(self):
        return self.objective_trace[self.best_iteration]

    def summary(self):
        return {
            "iterations_run": self.iterations_run,
            "converged": self.converged,
            "best_iteration": self.best_iteration,
            "best_objective": self.best_objective,
            "initial_objective": self.objective_trace[0],
            "final_objective": self.objective_trace[-1],
            "eta": self.eta,
            "max_orthonormality_error": self.max_orthonormality_error,
            "start_block": self.start_block,
        }


@dataclass(frozen=True, eq=False)
class MompcaModel:
    basis: np.ndarray
    center: np.ndarray
    config: FitConfig
    report: FitReport | None = field(default=None, compare=False)

    @property
    def n_features(self):
        return self.basis.shape[0]

    def transform(self, X):
        return transform(self, X)

    def reconstruct(self, X):
        return reconstruct(self, X)

    def to_dict(self):
        p, d = self.basis.shape
        out = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "p": p,
            "d": d,
            "L": self.config.n_blocks,
            "seed": self.config.seed,
            "eta": self.report.eta if self.report is not None else self.config.eta,
            "config": asdict(self.config),
            "center": [float(v) for v in self.center],
            "basis": [float(v) for v in self.basis.ravel(order="F")],
        }
        if self.report is not None:
            out["report"] = self.report.summary()
        return out

    @classmethod
    def from_dict(cls, doc):
        if doc.get("format") != MODEL_FORMAT:
            raise InvalidConfig(f"not a model document (format={doc.get('format')!r})")
        p, d = int(doc["p"]), int(doc["d"])
        basis = np.asarray(doc["basis"], dtype=np.float64)
        center = np.asarray(doc["center"], dtype=np.float64)
        if basis.size != p * d or center.size != p:
            raise DimensionMismatch("model arrays do not match the declared p and d")
        config = FitConfig(**doc["config"])
        return cls(basis=basis.reshape((p, d), order="F"), center=center, config=config)


def _check_features(model, X):
    X = as_data_matrix(X)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got {X.shape[1]}")
    return X


def transform(model, X):
    """Scores ``(X - center) V``, shape ``(N, d)``."""
    X = _check_features(model, X)
    return (X - model.center) @ model.basis


def reconstruct(model, X):
    """Projection onto the fitted affine subspace, ``center + V V^T (x - center)``."""
    X = _check_features(model, X)
    return transform(model, X) @ model.basis.T + model.center


def _block_top_eigenvalue(Xblock):
    # Largest eigenvalue of X^T X / B via whichever Gram matrix is smaller.
    B, p = Xblock.shape
    G = Xblock @ Xblock.T if B < p else scatter_matrix(Xblock)
    return float(top_eigenvectors(G / B, 1, assume_psd=True)[1][0])


def _block_basis(Xblock, d, rng):
    # Top-d eigenvectors of one block's scatter, through the B x B Gram
    # matrix when the block is short.  Directions the block cannot span are
    # completed with seeded random columns.
    B, p = Xblock.shape
    if B >= p:
        return top_eigenvectors(scatter_matrix(Xblock), d, assume_psd=True)[0]
    G = Xblock @ Xblock.T
    U, lam = top_eigenvectors(G, min(d, B), assume_psd=True)
    keep = lam > RANK_RTOL * max(lam[0], 0.0)
    W = np.zeros((p, d))
    W[:, : keep.sum()] = Xblock.T @ U[:, keep] / np.sqrt(lam[keep])
    W[:, keep.sum():] = rng.standard_normal((p, d - keep.sum()))
    return _orthonormalize_fill(W, rng)


def default_block_count(n):
    """``max(3, 3 * ceil(sqrt(N)))`` capped at ``N / 10`` (and at least 1)."""
    L = max(3, 3 * int(np.ceil(np.sqrt(n))))
    return max(1, min(L, n // 10))


def fit(X, config):
    """Fit a MoM principal subspace to the rows of ``X``.

    Returns the iterate with the lowest MoM objective seen; the objective
    is not monotone because the median block can change between steps.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    config.validate(n, p)
    d = config.d

    mu = featurewise_median(X) if config.center else np.zeros(p)
    Xc = X - mu
    plan = partition(n, config.n_blocks, config.seed)

    V, evals = top_eigenvectors(scatter_matrix(Xc), d, assume_psd=True)

    def evaluate(V, plan):
        vals = block_objectives(Xc, plan, V)
        return median_block(vals)

    ortho = orthonormality_error(V)
    assert ortho <= ORTHO_TOL, f"initial basis lost orthonormality ({ortho:.2e})"
    med, obj = evaluate(V, plan)
    start = -1
    if config.init == "multistart" and config.n_blocks > 1:
        rng = _rng.make_rng(config.seed, _rng.INIT)
        for ell in range(min(config.n_blocks, MAX_STARTS)):
            W = _block_basis(Xc[plan.blocks[ell]], d, rng)
            err = orthonormality_error(W)
            assert err <= ORTHO_TOL, f"start {ell} lost orthonormality ({err:.2e})"
            ortho = max(ortho, err)
            m, o = evaluate(W, plan)
            if o < obj:
                V, med, obj, start = W, m, o, ell
    if config.eta is not None:
        eta = float(config.eta)
    else:
        lam = _block_top_eigenvalue(Xc[plan.blocks[med]])
        if lam <= 0:
            lam = evals[0] / n
        eta = config.step_scale / lam if lam > 0 else config.step_scale

    recovery = _rng.make_rng(config.seed, _rng.RECOVERY)
    objs, meds = [obj], [med]
    best_obj, best_V, best_t = obj, V, 0
    converged = False
    t = 0
    for t in range(1, config.max_iter + 1):
        V = _step(Xc[plan.blocks[med]], V, eta, recovery)
        err = orthonormality_error(V)
        assert err <= ORTHO_TOL, f"iterate {t} lost orthonormality ({err:.2e})"
        ortho = max(ortho, err)
        if config.repartition:
            plan = partition(n, config.n_blocks, config.seed, draw=t)
        med, obj = evaluate(V, plan)
        objs.append(obj)
        meds.append(med)
        if obj < best_obj:
            best_obj, best_V, best_t = obj, V, t
        if abs(obj - objs[-2]) <= config.tol * max(1.0, abs(objs[-2])):
            converged = True
            break

    report = FitReport(
        iterations_run=t,
        objective_trace=tuple(objs),
        median_block_trace=tuple(meds),
        converged=converged,
        best_iteration=best_t,
        eta=eta,
        max_orthonormality_error=ortho,
        start_block=start,
    )
    return MompcaModel(basis=best_V, center=mu, config=config, report=report)
