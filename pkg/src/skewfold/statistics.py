"""Monte Carlo summaries, residual norms and the parallel batch driver."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .paths import RngStream, SamplePath, _check_same_grid, as_path

__all__ = ["McSummary", "mc_estimate", "identity_residual", "sign_occupation", "run_batches"]


@dataclass(frozen=True)
class McSummary:
    """Sample mean with a normal-approximation confidence interval.

    ``std_error`` is the sample standard deviation (``ddof=1``) over
    ``sqrt(n_samples)``; ``ci_halfwidth`` is ``z * std_error`` for the
    two-sided ``confidence`` level.
    """

    n_samples: int
    mean: float
    std_error: float
    ci_halfwidth: float
    confidence: float
    extremes: tuple

    def as_dict(self) -> dict:
        d = asdict(self)
        d["extremes"] = list(self.extremes)
        return d

    def contains(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_se * self.std_error


def mc_estimate(samples, confidence: float = 0.95) -> McSummary:
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 2:
        raise ConfigurationError("need at least 2 samples")
    if not 0 < confidence < 1:
        raise ConfigurationError(f"confidence must lie in (0, 1), got {confidence!r}")
    se = float(np.std(x, ddof=1) / np.sqrt(x.size))
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    return McSummary(int(x.size), float(np.mean(x)), se, z * se, float(confidence), (float(x.min()), float(x.max())))


def identity_residual(lhs, rhs):
    """Sup-norm of ``lhs - rhs`` over the grid (one value per path in a batch)."""
    lhs, rhs = as_path(lhs), as_path(rhs)
    _check_same_grid(lhs, rhs)
    r = np.max(np.abs(lhs.values - rhs.values), axis=-1)
    return float(r) if np.ndim(r) == 0 else r


def sign_occupation(paths: SamplePath, t: float, confidence: float = 0.95) -> McSummary:
    """Fraction of paths that are strictly positive at time ``t`` (a grid point)."""
    paths = as_path(paths)
    k = paths.grid.index_of(t)
    return mc_estimate((paths.values[..., k] > 0).astype(float), confidence)


def run_batches(
    task: Callable[[RngStream, int], dict],
    n_paths: int,
    block_size: int,
    master_seed: int,
    workers: int = 1,
    substream: int = 0,
) -> dict:
    """Run ``task`` over fixed-size blocks of paths and concatenate the results.

    Block ``b`` simulates ``min(block_size, remaining)`` paths with the stream
    ``RngStream(master_seed, stream_id=b, substream)``; ``task(stream, n)`` returns a
    dict of per-path arrays. Results are gathered in block order, so the
    output depends on ``(master_seed, n_paths, block_size)`` but never on
    ``workers`` or on scheduling.
    """
    if n_paths < 1 or block_size < 1:
        raise ConfigurationError("n_paths and block_size must be >= 1")
    if workers < 1:
        raise ConfigurationError("workers must be >= 1")
    sizes = [min(block_size, n_paths - s) for s in range(0, n_paths, block_size)]
    jobs = [(RngStream(master_seed, b, substream), n) for b, n in enumerate(sizes)]
    if workers == 1:
        parts = [task(s, n) for s, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda j: task(*j), jobs))
    keys = parts[0].keys()
    return {k: np.concatenate([np.atleast_1d(p[k]) for p in parts]) for k in keys}
