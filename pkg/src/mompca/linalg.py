"""Dense linear-algebra kernels used by the fitter.

Bases are plain ``(p, d)`` float arrays with orthonormal columns; the
projector ``V V^T`` is never formed.  Data matrices are ``(N, p)`` arrays,
one observation per row.
"""

import numpy as np

from . import _rng
from .errors import ConvergenceFailure, DimensionMismatch, InvalidData, InvalidInputs, RankDeficient

ORTHO_TOL = 1e-10
RANK_RTOL = 1e-12


def as_data_matrix(X, name="X"):
    """Validate and return ``X`` as a 2-D finite float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InvalidData(f"{name} must be 2-D, got ndim={X.ndim}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidData(f"{name} must have at least one row and one column, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise InvalidData(f"{name} has a non-finite entry at row {bad[0]}, column {bad[1]}")
    return X


def orthonormality_error(V):
    """``||V^T V - I||_F``."""
    V = np.asarray(V, dtype=np.float64)
    return float(np.linalg.norm(V.T @ V - np.eye(V.shape[1])))


def _mgs(M, rtol=RANK_RTOL):
    # Modified Gram-Schmidt, two sweeps per column.  Dependent columns are
    # left as zeros and reported instead of raising.
    Q = np.array(M, dtype=np.float64, copy=True)
    d = Q.shape[1]
    bad = []
    for j in range(d):
        v = Q[:, j].copy()
        orig = np.linalg.norm(v)
        for _ in range(2):
            for i in range(j):
                if i in bad:
                    continue
                v -= (Q[:, i] @ v) * Q[:, i]
        nrm = np.linalg.norm(v)
        if not np.isfinite(nrm) or nrm <= rtol * orig or nrm == 0.0:
            bad.append(j)
            Q[:, j] = 0.0
        else:
            Q[:, j] = v / nrm
    return Q, bad


def gram_schmidt_orthonormalize(M):
    """Orthonormalize the columns of ``M`` in order.

    Modified Gram-Schmidt with one re-orthogonalization sweep.  The result
    spans the same subspace as ``M`` and column ``j`` of the result lies in
    the span of the first ``j + 1`` columns of ``M``.

    Raises
    ------
    RankDeficient
        If some column's residual after projecting out its predecessors
        drops below ``1e-12`` times its original norm.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got ndim={M.ndim}")
    p, d = M.shape
    if not p >= d >= 1:
        raise DimensionMismatch(f"need p >= d >= 1, got p={p}, d={d}")
    Q, bad = _mgs(M)
    if bad:
        raise RankDeficient(bad[0])
    return Q


def _orthonormalize_fill(M, rng):
    # Orthonormalize, replacing dependent columns by random directions.
    Q, bad = _mgs(M)
    tries = 0
    while bad:
        if tries > 10:
            raise RankDeficient(bad[0], "could not complete a basis with random columns")
        M = Q.copy()
        M[:, bad] = rng.standard_normal((M.shape[0], len(bad)))
        Q, bad = _mgs(M)
        tries += 1
    return Q


def scatter_matrix(X):
    """Uncentered second-moment sum ``sum_i x_i x_i^T`` over the rows of ``X``.

    The upper triangle is computed and mirrored, so the result is exactly
    symmetric.
    """
    X = as_data_matrix(X)
    S = X.T @ X
    upper = np.triu(S)
    return upper + np.triu(S, 1).T


def _fix_signs(U):
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def top_eigenvectors(S, d, *, assume_psd=False, tol=1e-10, max_iter=None):
    """Leading ``d`` eigenpairs of a symmetric matrix by subspace iteration.

    A block of ``min(p, max(2d, d + 8))`` vectors is iterated with ``S``,
    re-orthonormalized by Gram-Schmidt and rotated by a Rayleigh-Ritz step
    each sweep.  Iteration stops once every wanted pair has residual
    ``||S v - lam v|| <= tol * ||S||_F``.

    Parameters
    ----------
    S : (p, p) array_like
        Symmetric matrix.
    d : int
        Number of eigenpairs, ``1 <= d <= p``.
    assume_psd : bool
        Skip the Gershgorin shift used to make an indefinite ``S`` positive
        semi-definite.  Set it for scatter matrices; the shift slows
        convergence.
    tol : float
        Relative residual tolerance.
    max_iter : int, optional
        Sweep cap, default ``10 * p``.

    Returns
    -------
    V : (p, d) ndarray
        Orthonormal eigenvectors; each column's largest-magnitude entry is
        positive.
    eigenvalues : (d,) ndarray
        In descending order.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {S.shape}")
    p = S.shape[0]
    d = int(d)
    if not 1 <= d <= p:
        raise InvalidInputs(f"need 1 <= d <= p, got d={d}, p={p}")
    if not np.all(np.isfinite(S)):
        raise InvalidInputs("matrix has non-finite entries")
    fro = float(np.linalg.norm(S))
    if np.linalg.norm(S - S.T) > 1e-12 * max(fro, 1.0):
        raise InvalidInputs("matrix is not symmetric")
    S = np.triu(S) + np.triu(S, 1).T
    if fro == 0.0:
        return np.eye(p, d), np.zeros(d)
    if max_iter is None:
        max_iter = 10 * p

    shift = 0.0
    if not assume_psd:
        off = np.abs(S).sum(axis=1) - np.abs(np.diag(S))
        shift = max(0.0, -float(np.min(np.diag(S) - off)))
    A = S + shift * np.eye(p) if shift else S

    k = min(p, max(2 * d, d + 8))
    rng = _rng.make_rng(0, _rng.INIT)
    Q = _orthonormalize_fill(rng.standard_normal((p, k)), rng)
    for _ in range(max_iter + 1):
        AQ = A @ Q
        H = Q.T @ AQ
        theta, W = np.linalg.eigh((H + H.T) / 2)
        order = np.argsort(-theta, kind="stable")
        theta, W = theta[order], W[:, order]
        U = Q @ W
        AU = AQ @ W
        res = np.linalg.norm(AU[:, :d] - U[:, :d] * theta[:d], axis=0)
        if np.max(res) <= tol * fro:
            V = gram_schmidt_orthonormalize(U[:, :d])
            return _fix_signs(V), theta[:d] - shift
        Q = _orthonormalize_fill(AU, rng)
    raise ConvergenceFailure(
        f"subspace iteration did not reach residual {tol:g}*||S||_F in {max_iter} sweeps "
        f"(worst residual {np.max(res) / fro:.3e}*||S||_F)"
    )


def _check_dims(V, x):
    V = np.asarray(V, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if V.ndim != 2 or x.shape[-1] != V.shape[0]:
        raise DimensionMismatch(f"basis has ambient dimension {V.shape[0] if V.ndim == 2 else '?'}, "
                                f"vector has {x.shape[-1] if x.ndim else '?'}")
    return V, x


def apply_projector(V, x):
    """``V (V^T x)`` for a vector, or row-wise for an ``(N, p)`` array."""
    V, x = _check_dims(V, x)
    return (x @ V) @ V.T


def residual_value(V, x):
    """Squared distance ``||x||^2 - ||V^T x||^2`` from ``x`` to ``span(V)``.

    Works on a single vector or row-wise on an ``(N, p)`` array.  Roundoff
    negatives are clamped to zero.
    """
    V, x = _check_dims(V, x)
    r = np.einsum("...i,...i->...", x, x) - np.einsum("...i,...i->...", x @ V, x @ V)
    r = np.maximum(r, 0.0)
    return float(r) if np.ndim(r) == 0 else r
