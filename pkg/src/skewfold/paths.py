"""Time grids, sample paths, random streams and the basic path operations.

Every path lives on a uniform grid ``t_i = i * dt``, ``i = 0..n_steps``. Path
values are stored with time along the last axis, so a single path has shape
``(n_steps + 1,)`` and a batch of ``m`` paths has shape ``(m, n_steps + 1)``.
All operations below broadcast over leading (batch) axes.

Stochastic integrals are left-point (Ito) sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, GridMismatchError

__all__ = [
    "TimeGrid",
    "SamplePath",
    "SemimartingalePath",
    "RngStream",
    "make_grid",
    "sample_brownian",
    "brownian_with_clock",
    "ito_integral",
    "quadratic_variation",
    "euler_path",
]

_U64 = 1 << 64


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[0, horizon]`` with ``n_steps`` steps."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigurationError(f"horizon must be > 0, got {self.horizon!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ConfigurationError(f"n_steps must be an integer >= 1, got {self.n_steps!r}")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; raises if ``t`` is not a grid point."""
        k = int(round(t / self.dt))
        if k < 0 or k > self.n_steps or not np.isclose(k * self.dt, t, rtol=0, atol=1e-9 * self.horizon):
            raise ConfigurationError(f"t={t} is not a point of the grid (dt={self.dt})")
        return k


def make_grid(T: float, n: int) -> TimeGrid:
    return TimeGrid(T, n)


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Values of a process (or a batch of processes) on a time grid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.grid.n_steps + 1:
            raise GridMismatchError(
                f"values have shape {arr.shape}, expected trailing axis {self.grid.n_steps + 1}"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("path values must be finite")
        arr = arr.view()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def batch_shape(self) -> tuple:
        return self.values.shape[:-1]

    @property
    def final(self):
        return self.values[..., -1]

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=-1)

    def path(self, i) -> "SamplePath":
        """Select path ``i`` (or a slice of paths) from a batch."""
        return SamplePath(self.grid, self.values[i])

    def like(self, values) -> "SamplePath":
        return SamplePath(self.grid, values)

    def __len__(self):
        return self.values.shape[-1]

    def __neg__(self):
        return SamplePath(self.grid, -self.values)


def _values(p) -> np.ndarray:
    return p.values if isinstance(p, SamplePath) else np.asarray(p, dtype=float)


def _check_same_grid(*paths: SamplePath) -> TimeGrid:
    grid = paths[0].grid
    for p in paths[1:]:
        if p.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {p.grid}")
    return grid


def as_path(p) -> SamplePath:
    """Accept a SamplePath or a SemimartingalePath (its total)."""
    if isinstance(p, SemimartingalePath):
        return p.total
    if isinstance(p, SamplePath):
        return p
    raise TypeError(f"expected a SamplePath, got {type(p).__name__}")


@dataclass(frozen=True, eq=False)
class SemimartingalePath:
    """``U = M + A`` with martingale part ``M``, finite-variation part ``A`` and ``<U>``."""

    total: SamplePath
    martingale: SamplePath
    fv: SamplePath
    qv: SamplePath

    def __post_init__(self):
        _check_same_grid(self.total, self.martingale, self.fv, self.qv)
        m, a = self.martingale.values, self.fv.values
        if np.any(m[..., 0] != 0) or np.any(a[..., 0] != 0):
            raise DomainError("martingale and finite-variation parts must start at 0")
        scale = 1.0 + np.max(np.abs(self.total.values))
        if not np.allclose(self.total.values, m + a, rtol=0, atol=1e-12 * scale):
            raise DomainError("total must equal martingale + finite-variation part")
        q = self.qv.values
        if np.any(q[..., 0] != 0) or np.any(np.diff(q, axis=-1) < 0):
            raise DomainError("quadratic variation must start at 0 and be nondecreasing")

    @classmethod
    def from_martingale(cls, martingale: SamplePath, qv: SamplePath) -> "SemimartingalePath":
        zero = np.zeros_like(martingale.values)
        return cls(martingale, martingale, martingale.like(zero), qv)

    @classmethod
    def from_parts(cls, martingale: SamplePath, fv: SamplePath, qv: SamplePath) -> "SemimartingalePath":
        return cls(martingale.like(martingale.values + fv.values), martingale, fv, qv)

    @property
    def grid(self) -> TimeGrid:
        return self.total.grid


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream addressed by ``(master_seed, stream_id)``.

    Draws come from a Philox-4x64 generator keyed by the 128-bit pair
    ``(master_seed, stream_id)``. ``substream`` offsets the top word of the
    256-bit counter, which splits one stream into non-overlapping child
    streams without touching the key. The same triple always reproduces the
    same draws, independently of which thread or process asks for them.
    """

    master_seed: int
    stream_id: int = 0
    substream: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "substream"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < _U64:
                raise ConfigurationError(f"{name} must be an integer in [0, 2**64), got {v!r}")
            object.__setattr__(self, name, int(v))

    def generator(self) -> np.random.Generator:
        key = self.master_seed | (self.stream_id << 64)
        counter = self.substream << 192
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def child(self, k: int) -> "RngStream":
        """Independent child stream number ``k`` (substream split)."""
        return RngStream(self.master_seed, self.stream_id, (self.substream + 1 + int(k)) % _U64)

    def with_stream_id(self, stream_id: int) -> "RngStream":
        return RngStream(self.master_seed, int(stream_id), self.substream)


def _cumsum0(increments: np.ndarray) -> np.ndarray:
    shape = increments.shape[:-1] + (increments.shape[-1] + 1,)
    out = np.zeros(shape)
    np.cumsum(increments, axis=-1, out=out[..., 1:])
    return out


def _ito_array(h: np.ndarray, u: np.ndarray) -> np.ndarray:
    return _cumsum0(h[..., :-1] * np.diff(u, axis=-1))


def _qv_array(u: np.ndarray) -> np.ndarray:
    return _cumsum0(np.diff(u, axis=-1) ** 2)


def _batch_shape(n_paths) -> tuple:
    if n_paths is None:
        return ()
    if np.ndim(n_paths) == 0:
        if int(n_paths) < 1:
            raise ConfigurationError(f"n_paths must be >= 1, got {n_paths!r}")
        return (int(n_paths),)
    return tuple(int(k) for k in n_paths)


def brownian_with_clock(clock: SamplePath, stream: RngStream, n_paths=None) -> SamplePath:
    """Brownian motion read at a nondecreasing clock: ``B(clock(t_i))``.

    Increment ``i`` is drawn exactly as a centred Gaussian with variance
    ``clock[i+1] - clock[i]``, so the result has the law of a Brownian motion
    time-changed by ``clock`` with no interpolation error.
    """
    c = clock.values
    if np.any(c[..., 0] != 0):
        raise DomainError("clock must start at 0")
    dc = np.diff(c, axis=-1)
    if np.any(dc < 0):
        raise DomainError("clock must be nondecreasing")
    shape = _batch_shape(n_paths) if c.ndim == 1 else c.shape[:-1]
    z = stream.generator().standard_normal(shape + (clock.grid.n_steps,))
    return SamplePath(clock.grid, _cumsum0(np.sqrt(dc) * z))


def sample_brownian(grid: TimeGrid, stream: RngStream, scale: float = 1.0, n_paths=None) -> SemimartingalePath:
    """Brownian motion with variance ``scale**2`` per unit time.

    The quadratic variation is the deterministic ``scale**2 * t``; the path is
    built as :func:`brownian_with_clock` on that clock, so both functions give
    the same draws for the same stream.
    """
    if not (np.isfinite(scale) and scale > 0):
        raise ConfigurationError(f"scale must be > 0, got {scale!r}")
    qv = SamplePath(grid, scale**2 * grid.times)
    m = brownian_with_clock(qv, stream, n_paths=n_paths)
    qv = SamplePath(grid, np.broadcast_to(qv.values, m.values.shape))
    return SemimartingalePath.from_martingale(m, qv)


def ito_integral(H: SamplePath, U: SamplePath) -> SamplePath:
    """Left-point sum ``I[k] = sum_{i<k} H[i] * (U[i+1] - U[i])``."""
    H, U = as_path(H), as_path(U)
    grid = _check_same_grid(H, U)
    return SamplePath(grid, _ito_array(H.values, U.values))


def quadratic_variation(U: SamplePath) -> SamplePath:
    """Realized quadratic variation ``Q[k] = sum_{i<k} (U[i+1] - U[i])**2``."""
    U = as_path(U)
    return SamplePath(U.grid, _qv_array(U.values))


def euler_path(
    drift: Callable,
    dispersion: Callable,
    x0,
    grid: TimeGrid,
    driver: SamplePath,
    lower: Optional[float] = None,
) -> SamplePath:
    """Euler-Maruyama stepping ``X[i+1] = X[i] + drift*dt + dispersion*dW[i]``.

    ``drift`` and ``dispersion`` are called as ``f(state, t)`` with ``state``
    an array over the batch. If ``lower`` is given the state is clamped from
    below after every step.
    """
    driver = as_path(driver)
    if driver.grid != grid:
        raise GridMismatchError(f"driver grid {driver.grid} does not match {grid}")
    dw = np.diff(driver.values, axis=-1)
    dt = grid.dt
    times = grid.times
    out = np.empty(np.broadcast_shapes(np.shape(x0), dw.shape[:-1]) + (grid.n_steps + 1,))
    x = np.broadcast_to(np.asarray(x0, dtype=float), out.shape[:-1]).copy()
    out[..., 0] = x
    for i in range(grid.n_steps):
        t = times[i]
        x = x + np.asarray(drift(x, t)) * dt + np.asarray(dispersion(x, t)) * dw[..., i]
        if lower is not None:
            x = np.maximum(x, lower)
        if not np.all(np.isfinite(x)):
            raise DomainError(f"non-finite coefficient evaluation at step {i} (t={t})")
        out[..., i + 1] = x
    return SamplePath(grid, out)
