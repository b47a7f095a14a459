"""Numerical evaluation of the Rademacher and uniform-deviation bounds.

Notation: ``mu2 = E||x||^2`` and ``mu4 = E||x||^4`` are the second and
fourth moments of the inlier law, ``eta_slack`` the margin in the block
count condition ``L > (2 + eta_slack) * |outliers|``.

Exact empirical Rademacher supremum
-----------------------------------
For rank-``d`` projectors ``Q`` and signs ``s_i``::

    sup_Q sum_i s_i y_i^T (I - Q) y_i = sup_Q <M, I - Q>,   M = sum_i s_i y_i y_i^T.

``I - Q`` ranges over rank-``(p - d)`` orthogonal projectors, and
``<M, P>`` over those is maximized by the span of the top ``p - d``
eigenvectors of ``M`` (Ky Fan), so the supremum is the sum of the
``p - d`` largest eigenvalues of ``M``, equivalently
``sum_i s_i ||y_i||^2`` minus the ``d`` smallest eigenvalues.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _rng
from .errors import AssumptionViolated, ConvergenceFailure, InvalidInputs
from .linalg import as_data_matrix


def _check_dims(p, d):
    if not (isinstance(p, (int, np.integer)) and isinstance(d, (int, np.integer))):
        raise InvalidInputs("p and d must be integers")
    if not 0 <= d <= p or p < 1:
        raise InvalidInputs(f"need 0 <= d <= p and p >= 1, got p={p}, d={d}")


def rademacher_bound(p, d, mu4, m):
    """``sqrt((p - d) * mu4 / m)``."""
    _check_dims(p, d)
    if not mu4 >= 0 or not math.isfinite(mu4):
        raise InvalidInputs(f"mu4 must be finite and >= 0, got {mu4}")
    if m < 1:
        raise InvalidInputs(f"m must be >= 1, got {m}")
    return math.sqrt((p - d) * mu4 / m)


def sample_moments(X, inliers=None):
    """Sample ``(mu2, mu4)`` of the rows of ``X``, optionally restricted to
    the rows flagged by the boolean mask (or index array) ``inliers``."""
    X = as_data_matrix(X)
    if inliers is not None:
        X = X[np.asarray(inliers)]
        if X.shape[0] == 0:
            raise InvalidInputs("no inlier rows to estimate moments from")
    sq = np.einsum("ij,ij->i", X, X)
    return float(sq.mean()), float((sq * sq).mean())


def _draw_supremum(Y, signs, d):
    M = (Y * signs[:, None]).T @ Y
    try:
        lam = np.linalg.eigvalsh((M + M.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolve failed: {exc}") from exc
    k = Y.shape[1] - d
    return float(lam[::-1][:k].sum()) if k > 0 else 0.0


def empirical_rademacher_complexity(Y, d, n_draws=1000, seed=0):
    """Monte-Carlo estimate of ``(1/m) E_sigma sup_Q sum_i sigma_i f_Q(y_i)``.

    Each draw's supremum is evaluated exactly by the eigenvalue identity in
    the module docstring.  Draw ``k`` uses its own generator keyed by
    ``(seed, k)``, so the result does not depend on evaluation order.

    Returns
    -------
    estimate, std_error : float
    """
    Y = as_data_matrix(Y, "Y")
    m, p = Y.shape
    _check_dims(p, d)
    if n_draws < 1:
        raise InvalidInputs(f"n_draws must be >= 1, got {n_draws}")
    if d < 1:
        raise InvalidInputs("d must be >= 1")
    vals = np.empty(n_draws)
    for k in range(n_draws):
        signs = _rng.make_rng(seed, _rng.RADEMACHER, k).choice(np.array([-1.0, 1.0]), size=m)
        vals[k] = _draw_supremum(Y, signs, d) / m
    se = float(vals.std(ddof=1) / math.sqrt(n_draws)) if n_draws > 1 else 0.0
    return float(vals.mean()), se


@dataclass(frozen=True)
class BoundReport:
    rademacher_bound: float
    c_of_p: float
    c_const: float
    rate: float
    deviation_bound: float
    success_probability: float
    p: int
    d: int
    mu2: float
    mu4: float
    n: int
    n_blocks: int
    n_outliers: int
    n_inliers: int
    eta_slack: float
    assumptions_ok: bool = True
    notes: tuple = ()

    def to_dict(self):
        out = asdict(self)
        out["notes"] = list(self.notes)
        return out


def deviation_bound(p, d, mu2, mu4, n, n_blocks, n_outliers, n_inliers, eta_slack, *, check=True):
    """Evaluate the uniform MoM deviation bound and its success probability.

    ``C(P) = (mu4 + 2 mu2^2)(p - d) + (mu2^2 - 1)(p - d)^2``,
    ``C = 2 max(sqrt(8 (4 + eta) C(P) / eta), 16 sqrt((p - d) mu4) (4 + eta) / eta)``,
    deviation ``C * max(sqrt(L / N), sqrt(|I|) / N)``, holding with
    probability at least ``1 - 2 exp(-2 L (2 / (4 + eta) - |O| / L)^2)``.

    With ``check=True`` a violated precondition raises
    ``AssumptionViolated``; otherwise it is recorded in ``notes``.
    ``rademacher_bound`` is evaluated at ``m = |I|`` inlier samples.
    """
    _check_dims(p, d)
    for name, v in (("mu2", mu2), ("mu4", mu4)):
        if not (math.isfinite(v) and v >= 0):
            raise InvalidInputs(f"{name} must be finite and >= 0, got {v}")
    if not (math.isfinite(eta_slack) and eta_slack > 0):
        raise InvalidInputs(f"eta_slack must be positive, got {eta_slack}")
    if n_blocks < 1 or n < 1 or n_outliers < 0 or n_inliers < 0:
        raise InvalidInputs("counts must be non-negative and N, L >= 1")

    notes = []
    if not n_blocks > (2 + eta_slack) * n_outliers:
        notes.append(
            f"block-count condition: need L > (2 + eta) * |O|, got L={n_blocks}, "
            f"(2 + {eta_slack}) * {n_outliers} = {(2 + eta_slack) * n_outliers:g}"
        )
    if not n > n_blocks:
        notes.append(f"sample-size condition: need N > L, got N={n}, L={n_blocks}")
    if notes and check:
        first = notes[0].split(":", 1)
        raise AssumptionViolated(first[0], first[1].strip())

    k = p - d
    eta = float(eta_slack)
    c_of_p = (mu4 + 2 * mu2**2) * k + (mu2**2 - 1) * k**2
    if c_of_p < 0:
        notes.append("C(P) evaluated negative; its square root is taken at 0")
    c_const = 2 * max(math.sqrt(8 * (4 + eta) * max(c_of_p, 0.0) / eta),
                      16 * math.sqrt(k * mu4) * (4 + eta) / eta)
    rate = max(math.sqrt(n_blocks / n), math.sqrt(n_inliers) / n)
    delta = 2 / (4 + eta) - n_outliers / n_blocks
    prob = 1 - 2 * math.exp(-2 * n_blocks * delta**2)
    return BoundReport(
        rademacher_bound=rademacher_bound(p, d, mu4, max(n_inliers, 1)),
        c_of_p=c_of_p,
        c_const=c_const,
        rate=rate,
        deviation_bound=c_const * rate,
        success_probability=min(1.0, max(0.0, prob)),
        p=int(p), d=int(d), mu2=float(mu2), mu4=float(mu4), n=int(n), n_blocks=int(n_blocks),
        n_outliers=int(n_outliers), n_inliers=int(n_inliers), eta_slack=eta,
        assumptions_ok=not any(note.startswith(("block-count", "sample-size")) for note in notes),
        notes=tuple(notes),
    )
