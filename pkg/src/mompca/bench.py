"""Low-rank recovery benchmark: MoM fit vs. the single-block baseline.

Each repeat draws a rank-``r`` matrix with ``floor(sqrt(n))`` corrupted
rows, fits with ``L`` blocks and with ``L = 1`` (classical PCA on the
contaminated data), and scores both by relative reconstruction error over
the uncorrupted rows.

The generated matrix is zero-mean and exactly low-rank, so fits here run
uncentered by default: a median center estimated from ``n`` rows is off
the row space by ``O(1/sqrt(n))``, which would cap the attainable error
far above the recovery accuracy this protocol is meant to show.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _rng
from .core import FitConfig, fit, reconstruct
from .datagen import lowrank_with_outliers
from .errors import AssumptionViolated
from .metrics import relative_reconstruction_error

BENCH_STEP_SCALE = 10.0


def bench_block_count(n):
    return 3 * int(np.floor(np.sqrt(n)))


@dataclass(frozen=True)
class BenchRow:
    n: int
    p: int
    r: int
    d: int
    n_blocks: int
    repeats: int
    mompca_errors: tuple
    baseline_errors: tuple

    @property
    def mompca_mean(self):
        return float(np.mean(self.mompca_errors))

    @property
    def baseline_mean(self):
        return float(np.mean(self.baseline_errors))

    def as_record(self):
        return {
            "n": self.n, "p": self.p, "r": self.r, "d": self.d, "L": self.n_blocks,
            "repeats": self.repeats,
            "mompca_mean_error": self.mompca_mean,
            "mompca_max_error": float(np.max(self.mompca_errors)),
            "baseline_mean_error": self.baseline_mean,
        }


def run_bench(ns, p, r, d=None, n_blocks=None, seed=0, repeats=5, *, corrupt=True,
              center=False, step_scale=BENCH_STEP_SCALE, eta=None, tol=1e-7, max_iter=500,
              force=False):
    d = r if d is None else d
    rows = []
    for n in ns:
        L = bench_block_count(n) if n_blocks is None else n_blocks
        n_out = int(np.floor(np.sqrt(n))) if corrupt else 0
        if not L > 2 * n_out and not force:
            raise AssumptionViolated(
                "block-count condition", f"L={L} must exceed 2 * floor(sqrt(n)) = {2 * n_out}")
        mom, base = [], []
        for rep in range(repeats):
            s = _rng.derive_seed(seed, _rng.BENCH, n, rep)
            ds = lowrank_with_outliers(n, p, r, s, corrupt=corrupt)
            cfg = FitConfig(d=d, n_blocks=L, eta=eta, step_scale=step_scale, tol=tol,
                            max_iter=max_iter, seed=s, center=center)
            for c, sink in ((cfg, mom), (replace(cfg, n_blocks=1), base)):
                model = fit(ds.X, c)
                err = relative_reconstruction_error(reconstruct(model, ds.X), ds.X0, ds.inlier_rows)
                sink.append(err)
        rows.append(BenchRow(n=n, p=p, r=r, d=d, n_blocks=L, repeats=repeats,
                             mompca_errors=tuple(mom), baseline_errors=tuple(base)))
    return rows


def format_table(rows):
    head = f"{'n':>7} {'p':>5} {'r':>4} {'d':>4} {'L':>5}  {'MoMPCA':>10}  {'PCA (L=1)':>10}"
    lines = [head, "-" * len(head)]
    for row in rows:
        lines.append(f"{row.n:>7} {row.p:>5} {row.r:>4} {row.d:>4} {row.n_blocks:>5}  "
                     f"{row.mompca_mean:>10.2e}  {row.baseline_mean:>10.2e}")
    return "\n".join(lines)
