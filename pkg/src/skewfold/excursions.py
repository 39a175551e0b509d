"""Excursion decomposition of nonnegative paths and skew unfolding.

A nonnegative path ``S`` splits into its zero set (indices with ``S <= tol``)
and maximal runs ``C_1, C_2, ...`` where ``S > tol``. Unfolding attaches an
independent sign ``xi_k`` to each run, ``+1`` with probability ``alpha``, and
returns ``X = Z * S`` where ``Z = xi_k`` on ``C_k`` and ``Z = 0`` on the zero
set.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .local_time import estimate_local_time
from .paths import RngStream, SamplePath, SemimartingalePath, _ito_array, as_path
from .reflection import conventional_reflect, levy_transform, sign, skorokhod_reflect

__all__ = [
    "ExcursionDecomposition",
    "UnfoldResult",
    "decompose_excursions",
    "draw_signs",
    "unfold_with_signs",
    "unfold_skorokhod",
    "unfold_conventional",
    "default_tolerance",
]


def _check_alpha(alpha):
    if not (np.isfinite(alpha) and 0 < alpha < 1):
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def default_tolerance(grid, folding: str) -> float:
    """Zero-detection tolerance: 0 for Skorokhod input, ``sqrt(dt)/4`` otherwise.

    The discrete Skorokhod map produces exact zeros; ``|U|`` and Bessel paths
    almost never hit zero on a grid point, so a small band is needed.
    """
    if folding == "skorokhod":
        return 0.0
    return 0.25 * float(np.sqrt(grid.dt))


@dataclass(frozen=True, eq=False)
class ExcursionDecomposition:
    """Zero set and excursion runs of a nonnegative path (or batch).

    Attributes
    ----------
    grid : TimeGrid
    zero_mask : ndarray of bool
        ``True`` on the zero set.
    excursion_id : ndarray of int
        Global run number at each index, ``-1`` on the zero set. Runs are
        numbered in (path, time) order across a batch.
    counts : ndarray of int
        Number of runs per path (a 0-d array for a single path).
    tol : float
    signs : ndarray of float, optional
        One entry in ``{-1, +1}`` per run, aligned with ``excursion_id``.
    """

    grid: object
    zero_mask: np.ndarray
    excursion_id: np.ndarray
    counts: np.ndarray
    tol: float
    signs: Optional[np.ndarray] = None

    @property
    def n_excursions(self) -> int:
        """Total number of runs over the whole batch."""
        return int(np.sum(self.counts))

    @cached_property
    def starts(self) -> np.ndarray:
        """Boolean mask of the first index of each run."""
        m = ~self.zero_mask
        prev = np.concatenate([np.zeros(m.shape[:-1] + (1,), bool), m[..., :-1]], axis=-1)
        return m & ~prev

    @cached_property
    def intervals(self):
        """Index ranges of the runs, in time order.

        A list of ``range`` objects for a single path; a list of such lists
        for a batch.
        """

        def one(mask):
            m = np.concatenate([[False], ~mask, [False]])
            d = np.diff(m.astype(np.int8))
            lo = np.flatnonzero(d == 1)
            hi = np.flatnonzero(d == -1)
            return [range(a, b) for a, b in zip(lo, hi)]

        if self.zero_mask.ndim == 1:
            return one(self.zero_mask)
        flat = self.zero_mask.reshape(-1, self.zero_mask.shape[-1])
        return [one(row) for row in flat]

    def lengths(self) -> np.ndarray:
        """Length (in grid points) of every run, in run-number order."""
        ids = self.excursion_id[self.excursion_id >= 0]
        return np.bincount(ids, minlength=self.n_excursions)

    def with_signs(self, signs) -> "ExcursionDecomposition":
        s = np.asarray(signs, dtype=float).reshape(-1)
        if s.size != self.n_excursions:
            raise ConfigurationError(f"expected {self.n_excursions} signs, got {s.size}")
        if np.any(np.abs(s) != 1):
            raise ConfigurationError("signs must be +1 or -1")
        s = s.copy()
        s.flags.writeable = False
        return replace(self, signs=s)

    @property
    def sign_path(self) -> SamplePath:
        """``Z``: the run's sign on each run, 0 on the zero set."""
        if self.signs is None:
            raise DomainError("signs have not been drawn for this decomposition")
        ids = self.excursion_id
        if self.signs.size == 0:
            return SamplePath(self.grid, np.zeros(ids.shape))
        z = np.where(ids >= 0, self.signs[np.maximum(ids, 0)], 0.0)
        return SamplePath(self.grid, z)


def decompose_excursions(S, tol: float = 0.0) -> ExcursionDecomposition:
    """Split a nonnegative path into its zero set and excursion runs.

    Parameters
    ----------
    S : SamplePath
        Nonnegative path, or batch of paths.
    tol : float
        Indices with ``S <= tol`` form the zero set.

    Raises
    ------
    DomainError
        If some value is below ``-tol``.
    """
    S = as_path(S)
    if not (np.isfinite(tol) and tol >= 0):
        raise ConfigurationError(f"tol must be >= 0, got {tol!r}")
    s = S.values
    if np.any(s < -tol):
        raise DomainError(f"path dips below -tol (min {s.min():.3g}); expected a nonnegative path")
    mask = s > tol
    prev = np.concatenate([np.zeros(s.shape[:-1] + (1,), bool), mask[..., :-1]], axis=-1)
    starts = mask & ~prev
    ids = np.cumsum(starts.reshape(-1)).reshape(s.shape) - 1
    ids = np.where(mask, ids, -1)
    counts = np.asarray(starts.sum(axis=-1))
    for a in (mask, ids, counts):
        a.flags.writeable = False
    return ExcursionDecomposition(S.grid, ~mask, ids, counts, float(tol))


def draw_signs(n: int, alpha: float, stream: RngStream) -> np.ndarray:
    """``n`` independent signs, ``+1`` with probability ``alpha``.

    One uniform draw per sign, consumed in order from ``stream``.
    """
    u = stream.generator().random(int(n))
    return np.where(u < alpha, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class UnfoldResult:
    """Outcome of a skew unfolding.

    Attributes
    ----------
    input : SemimartingalePath or SamplePath or None
        The driving path ``U`` (``None`` when unfolding a bare folded path).
    folded : SamplePath
        The nonnegative path that was unfolded (``S``, ``R``, ...).
    decomposition : ExcursionDecomposition
        With signs attached.
    X : SamplePath
        Unfolded path ``Z * folded``.
    alpha : float
    diagnostics : dict
        Sup-norm residuals of the defining identities, keyed by name.
    pushing : SamplePath or None
        Pushing term ``C`` of a Skorokhod reflection.
    levy : SamplePath or None
        Levy transform of ``U`` (conventional unfolding only).
    """

    input: object
    folded: SamplePath
    decomposition: ExcursionDecomposition
    X: SamplePath
    alpha: float
    diagnostics: dict = field(default_factory=dict)
    pushing: Optional[SamplePath] = None
    levy: Optional[SamplePath] = None

    @property
    def Z(self) -> SamplePath:
        return self.decomposition.sign_path

    @property
    def grid(self):
        return self.X.grid


def _sup(a) -> np.ndarray:
    return np.max(np.abs(a), axis=-1)


def unfold_with_signs(
    S,
    decomp: ExcursionDecomposition,
    alpha: float,
    stream: Optional[RngStream] = None,
    signs=None,
) -> UnfoldResult:
    """Attach Bernoulli(``alpha``) signs to the runs of ``decomp`` and unfold ``S``.

    Parameters
    ----------
    S : SamplePath
        The path ``decomp`` was computed from.
    decomp : ExcursionDecomposition
    alpha : float
        Probability of a ``+1`` sign, in ``(0, 1)``.
    stream : RngStream
        Source of the sign draws; not needed when ``signs`` is given.
    signs : array_like, optional
        Explicit signs, one per run, overriding the random draw.
    """
    S = as_path(S)
    alpha = _check_alpha(alpha)
    if decomp.zero_mask.shape != S.values.shape:
        raise DomainError("decomposition does not belong to this path")
    if signs is None:
        if stream is None:
            raise ConfigurationError("either a stream or explicit signs is required")
        signs = draw_signs(decomp.n_excursions, alpha, stream)
    decomp = decomp.with_signs(signs)
    z = decomp.sign_path.values
    x = z * S.values
    diag = {"abs_identity": _sup(np.abs(x) - S.values)}
    return UnfoldResult(None, S, decomp, S.like(x), alpha, diag)


def unfold_skorokhod(
    U,
    alpha: float,
    stream: RngStream,
    tol: Optional[float] = None,
    signs=None,
    lt_method: str = "tanaka",
    diagnostics: bool = True,
) -> UnfoldResult:
    """Skew-unfold the Skorokhod reflection of ``U``.

    ``S = U + C`` is decomposed into excursions, each gets a Bernoulli(alpha)
    sign and ``X = Z * S``. ``X`` then solves the skew Tanaka equation
    ``X = int sgn(X) dU + ((2 alpha - 1) / alpha) L^X`` with the symmetric
    sign, and ``L^X = alpha L^S``.

    Diagnostics (sup-norms over the grid, one value per path)

    ``abs_identity``
        ``| |X| - S |``, exactly 0.
    ``pushing_flat``
        Total increase of ``C`` at indices where ``S > tol``, exactly 0.
    ``product``
        ``Z S - int Z dS - (2 alpha - 1) L^S``; vanishes under refinement.
    ``skew_tanaka``
        ``X - int sgn(X) dU - ((2 alpha - 1)/alpha) L^X``. Only for
        ``alpha = 1/2`` does this vanish under refinement: the push ``dC``
        landing on the last step of an excursion is seen by ``int sgn(X) dU``
        on a grid, which leaves an O(1) term proportional to ``2 alpha - 1``.

    Local times in the diagnostics use ``lt_method`` (Tanaka by default).
    With ``diagnostics=False`` only the exact identities are recorded.
    """
    alpha = _check_alpha(alpha)
    refl = skorokhod_reflect(U)
    S = refl.S
    tol = default_tolerance(S.grid, "skorokhod") if tol is None else tol
    decomp = decompose_excursions(S, tol)
    res = unfold_with_signs(S, decomp, alpha, stream, signs=signs)
    decomp, X = res.decomposition, res.X
    src = U if isinstance(U, SemimartingalePath) else as_path(U)
    dC = np.diff(refl.C.values, axis=-1)
    diag = dict(res.diagnostics)
    diag["pushing_flat"] = np.sum(np.where(decomp.zero_mask[..., 1:], 0.0, dC), axis=-1)
    if not diagnostics:
        return UnfoldResult(src, S, decomp, X, alpha, diag, pushing=refl.C)
    x, s, u, z = X.values, S.values, refl.U.values, decomp.sign_path.values
    lt_s = estimate_local_time(S, lt_method, "right").values.values
    lt_x = estimate_local_time(X, lt_method, "right").values.values
    diag["product"] = _sup(z * s - _ito_array(z, s) - (2 * alpha - 1) * lt_s)
    diag["skew_tanaka"] = _sup(x - _ito_array(sign(x), u) - (2 * alpha - 1) / alpha * lt_x)
    return UnfoldResult(src, S, decomp, X, alpha, diag, pushing=refl.C)


def unfold_conventional(
    U,
    alpha: float,
    stream: RngStream,
    tol: Optional[float] = None,
    signs=None,
) -> UnfoldResult:
    """Skew-unfold the conventional reflection ``R = |U|``.

    Also returns the Levy transform ``U_hat = int sgn(U) dU`` (symmetric sign)
    in ``levy``, with diagnostic ``levy_skorokhod`` =
    ``sup |R - (U_hat + max(-U_hat))|``, which vanishes under refinement.
    """
    alpha = _check_alpha(alpha)
    src = U if isinstance(U, SemimartingalePath) else as_path(U)
    U = as_path(U)
    R = conventional_reflect(U)
    tol = default_tolerance(R.grid, "conventional") if tol is None else tol
    decomp = decompose_excursions(R, tol)
    res = unfold_with_signs(R, decomp, alpha, stream, signs=signs)
    uhat = levy_transform(U, "symmetric")
    c = np.maximum(np.maximum.accumulate(-uhat.values, axis=-1), 0.0)
    diag = dict(res.diagnostics)
    diag["levy_skorokhod"] = _sup(R.values - (uhat.values + c))
    return UnfoldResult(src, R, res.decomposition, res.X, alpha, diag, levy=uhat)
