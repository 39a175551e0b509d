"""Named processes built on the unfolding machinery.

* skew Brownian motion (unfolded Skorokhod reflection of a Brownian path)
* squared Bessel and skew Bessel processes of dimension ``delta`` in (1, 2)
* a time-changed Brownian motion whose mirror image has a different law
  (non-uniqueness witness for the Tanaka equation driven by an Ocone martingale)
* the strong solution of the perturbed skew Tanaka equation obtained from an
  oscillating Brownian motion
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .excursions import (
    UnfoldResult,
    _check_alpha,
    decompose_excursions,
    default_tolerance,
    unfold_skorokhod,
    unfold_with_signs,
)
from .local_time import occupation_local_time, tanaka_local_time
from .paths import (
    RngStream,
    SamplePath,
    TimeGrid,
    _cumsum0,
    _ito_array,
    as_path,
    euler_path,
    sample_brownian,
)
from .reflection import levy_transform, sign

__all__ = [
    "skew_brownian",
    "squared_bessel",
    "SkewBesselParams",
    "skew_bessel",
    "bessel_scale_maps",
    "OconeResult",
    "ocone_counterexample",
    "NakaoResult",
    "nakao_solution",
    "nakao_maps",
]

# substreams: noise of the driving path(s) vs excursion signs
_NOISE, _SIGNS, _NOISE2 = 0, 1, 2


def skew_brownian(
    alpha: float,
    x0: float,
    grid: TimeGrid,
    stream: RngStream,
    n_paths=None,
    signs=None,
    driver: Optional[SamplePath] = None,
) -> SamplePath:
    """Skew Brownian motion with parameter ``alpha`` started at ``x0``.

    For ``x0 = 0`` this is the unfolded Skorokhod reflection of a Brownian
    path. For ``x0 != 0`` the path follows ``x0 + W`` until the first grid
    index where it reaches or crosses zero, and from there on is the unfolding
    of the Brownian increments after that index. The first-passage time is
    only resolved to the grid.

    Parameters
    ----------
    alpha : float
        Probability that an excursion is positive.
    x0 : float
    grid : TimeGrid
    stream : RngStream
        Brownian noise uses child stream 0 and signs use child stream 1.
    n_paths : int, optional
        Batch size; a single path when omitted.
    signs : array_like, optional
        Explicit excursion signs (overrides the random draw).
    driver : SamplePath, optional
        Use this Brownian path instead of drawing one.
    """
    alpha = _check_alpha(alpha)
    if driver is None:
        W = sample_brownian(grid, stream.child(_NOISE), n_paths=n_paths).total
    else:
        W = as_path(driver)
    w = W.values
    if x0 == 0:
        return unfold_skorokhod(W, alpha, stream.child(_SIGNS), signs=signs, diagnostics=False).X
    free = x0 + w
    hit = (np.sign(free) != np.sign(x0))
    n1 = w.shape[-1]
    tau = np.where(hit.any(axis=-1), np.argmax(hit, axis=-1), n1)
    idx = np.arange(n1)
    after = idx >= np.asarray(tau)[..., None]
    w_tau = np.take_along_axis(w, np.minimum(tau, n1 - 1)[..., None], axis=-1)
    shifted = np.where(after, w - w_tau, 0.0)
    res = unfold_skorokhod(W.like(shifted), alpha, stream.child(_SIGNS), signs=signs, diagnostics=False)
    return W.like(np.where(after, res.X.values, free))


def squared_bessel(
    delta: float,
    x0: float,
    grid: TimeGrid,
    stream: RngStream,
    n_paths=None,
    driver: Optional[SamplePath] = None,
) -> SamplePath:
    """Clamped Euler scheme for ``dU = delta dt + 2 sqrt(U) dB``, ``U(0) = x0``.

    The value under the root is clamped at 0 and the state is clamped at 0
    after each step, so the output is nonnegative.
    """
    if not (1 < delta < 2):
        raise ConfigurationError(f"delta must lie in (1, 2), got {delta!r}")
    if not (np.isfinite(x0) and x0 >= 0):
        raise ConfigurationError(f"x0 must be >= 0, got {x0!r}")
    if driver is None:
        driver = sample_brownian(grid, stream.child(_NOISE), n_paths=n_paths).total
    return euler_path(
        lambda x, t: delta,
        lambda x, t: 2.0 * np.sqrt(np.maximum(x, 0.0)),
        x0,
        grid,
        driver,
        lower=0.0,
    )


@dataclass(frozen=True)
class SkewBesselParams:
    """Dimension ``delta`` in (1, 2), skewness ``alpha`` in (0, 1), start ``x0 >= 0``."""

    delta: float
    alpha: float
    x0: float = 0.0

    def __post_init__(self):
        if not (1 < self.delta < 2):
            raise ConfigurationError(f"delta must lie in (1, 2), got {self.delta!r}")
        _check_alpha(self.alpha)
        if not (np.isfinite(self.x0) and self.x0 >= 0):
            raise ConfigurationError(f"x0 must be >= 0, got {self.x0!r}")


def bessel_scale_maps(x, delta: float):
    """Scale maps ``g(x) = |x|**(2 - delta) / (2 - delta)`` and ``G(x) = sgn(x) g(x)``.

    Returns
    -------
    (g, G) : tuple of float or ndarray
    """
    if not (1 < delta < 2):
        raise ConfigurationError(f"delta must lie in (1, 2), got {delta!r}")
    x = np.asarray(x, dtype=float)
    g = np.abs(x) ** (2.0 - delta) / (2.0 - delta)
    G = np.sign(x) * g
    if g.ndim == 0:
        return float(g), float(G)
    return g, G


def skew_bessel(
    params: SkewBesselParams,
    grid: TimeGrid,
    stream: RngStream,
    n_paths=None,
    tol: Optional[float] = None,
    signs=None,
    epsilon: Optional[float] = None,
) -> UnfoldResult:
    """Unfold the Bessel process ``R = sqrt(squared Bessel)`` into a skew Bessel path.

    Zeros of ``R`` are detected with tolerance ``tol`` (default ``sqrt(dt)/4``).

    Diagnostics, one value per path:

    ``lt_R``
        Occupation local time of ``R`` at 0 up to the horizon (bandwidth
        ``epsilon``, clock ``t``); small, since ``R`` spends no local time at 0.
    ``zero_time``
        Time spent in the zero band ``{R <= tol}``.
    ``lt_G_pos``, ``lt_G_neg``
        Tanaka estimates of the right local times at 0 of ``G(X)`` and
        ``-G(X)``; their ratio estimates ``alpha / (1 - alpha)``.
    ``n_excursions``
        Number of excursions per path.
    """
    U2 = squared_bessel(params.delta, params.x0, grid, stream.child(_NOISE), n_paths=n_paths)
    R = U2.like(np.sqrt(U2.values))
    tol = default_tolerance(grid, "bessel") if tol is None else tol
    decomp = decompose_excursions(R, tol)
    res = unfold_with_signs(R, decomp, params.alpha, stream.child(_SIGNS), signs=signs)
    clock = SamplePath(grid, np.broadcast_to(grid.times, R.values.shape))
    lt_r = occupation_local_time(R, qv=clock, epsilon=epsilon, side="right").final
    _, G = bessel_scale_maps(res.X.values, params.delta)
    Gp = res.X.like(G)
    diag = dict(res.diagnostics)
    diag.update(
        lt_R=lt_r,
        zero_time=np.sum(decomp.zero_mask[..., :-1], axis=-1) * grid.dt,
        lt_G_pos=tanaka_local_time(Gp, "right").final,
        lt_G_neg=tanaka_local_time(-Gp, "right").final,
        n_excursions=np.asarray(decomp.counts),
    )
    return UnfoldResult(U2, R, res.decomposition, res.X, params.alpha, diag)


@dataclass(frozen=True, eq=False)
class OconeResult:
    """Paths of the time-changed Brownian motion and its mirror image.

    Attributes
    ----------
    X : SamplePath
        ``B(A(t))``.
    Xi : SamplePath
        ``-X``.
    U_ocone : SamplePath
        Levy transform ``int sgn(X) dX`` (left-continuous sign).
    clock : SamplePath
        ``A(t) = t`` up to 1, then slope ``u`` if ``B(1) > 0`` and ``v`` otherwise.
    u, v : float
    diagnostics : dict
        ``tanaka_X`` and ``tanaka_Xi``: sup-norm residuals of
        ``P - int sgn(P) dU_ocone`` for ``P = X`` and ``P = Xi``.
    """

    X: SamplePath
    Xi: SamplePath
    U_ocone: SamplePath
    clock: SamplePath
    u: float
    v: float
    diagnostics: dict = field(default_factory=dict)


def ocone_counterexample(u: float, v: float, grid: TimeGrid, stream: RngStream, n_paths=None) -> OconeResult:
    """Brownian motion run at a clock whose slope after ``t = 1`` depends on ``sgn B(1)``.

    Each increment ``i`` is a Gaussian with variance ``A[i+1] - A[i]``; the
    clock is fixed by the path up to ``t = 1``, so ``X = B(A(.))`` is exact in
    law with no interpolation. The grid must contain ``t = 1`` and reach
    ``t = 2``.
    """
    for name, val in (("u", u), ("v", v)):
        if not (np.isfinite(val) and val > 0):
            raise ConfigurationError(f"{name} must be > 0, got {val!r}")
    if grid.horizon < 2 - 1e-12:
        raise ConfigurationError(f"horizon must be >= 2, got {grid.horizon}")
    k1 = grid.index_of(1.0)
    shape = () if n_paths is None else (int(n_paths),)
    z = stream.child(_NOISE).generator().standard_normal(shape + (grid.n_steps,))
    sd = np.sqrt(grid.dt)
    b1 = sd * np.sum(z[..., :k1], axis=-1)
    rate = np.where(b1 > 0, float(u), float(v))
    t = grid.times
    clock = np.where(t <= 1.0, t, 1.0 + rate[..., None] * (t - 1.0))
    clock[..., : k1 + 1] = t[: k1 + 1]
    x = _cumsum0(np.sqrt(np.diff(clock, axis=-1)) * z)
    X = SamplePath(grid, x)
    U = levy_transform(X, "left_continuous")
    sgX = sign(x, "left_continuous")
    diag = {
        "tanaka_X": np.max(np.abs(x - _ito_array(sgX, U.values)), axis=-1),
        "tanaka_Xi": np.max(np.abs(-x - _ito_array(sign(-x, "left_continuous"), U.values)), axis=-1),
    }
    return OconeResult(X, -X, U, SamplePath(grid, clock), float(u), float(v), diag)


def nakao_maps(alpha: float):
    """The maps ``p``, ``q`` and ``s`` used by the oscillating-Brownian construction.

    ``p(x) = (1 - alpha) x`` for ``x > 0`` and ``alpha x`` otherwise;
    ``q`` is its inverse, ``q(y) = y / (1 - alpha)`` for ``y > 0`` and
    ``y / alpha`` otherwise; ``s(y) = 1 - alpha`` for ``y > 0`` and ``alpha``
    otherwise.
    """
    alpha = _check_alpha(alpha)

    def p(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, (1 - alpha) * x, alpha * x)

    def q(y):
        y = np.asarray(y, dtype=float)
        return np.where(y > 0, y / (1 - alpha), y / alpha)

    def s(y):
        y = np.asarray(y, dtype=float)
        return np.where(y > 0, 1 - alpha, alpha)

    return p, q, s


@dataclass(frozen=True, eq=False)
class NakaoResult:
    """Strong solution of the perturbed skew Tanaka equation.

    Attributes
    ----------
    Y : SamplePath
        Oscillating Brownian motion ``dY = s(Y) d(B1 + B2)``.
    X : SamplePath
        ``q(Y)``, a skew Brownian motion run by ``B1 + B2``.
    U, V : SamplePath
        Disentangled drivers, an independent Brownian pair.
    B1, B2 : SamplePath
    residual : ndarray
        Sup-norm of ``X - x0 - int sgn(X) dU - V - 2(2 alpha - 1) Lhat^X``.
    diagnostics : dict
        Realized ``<U>``, ``<V>`` and ``<U, V>`` at the horizon.
    """

    Y: SamplePath
    X: SamplePath
    U: SamplePath
    V: SamplePath
    B1: SamplePath
    B2: SamplePath
    residual: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def nakao_solution(
    alpha: float,
    x0: float,
    grid: TimeGrid,
    stream: RngStream,
    n_paths=None,
    lt_method: str = "occupation",
) -> NakaoResult:
    """Solve the perturbed skew Tanaka equation through an oscillating Brownian motion.

    ``Y`` is Euler-stepped from ``p(x0)`` with dispersion ``s(Y)`` against
    ``B1 + B2``; ``X = q(Y)``. The drivers are
    ``U = int 1{X>0} dB1 - int 1{X<=0} dB2`` and
    ``V = int 1{X<=0} dB1 + int 1{X>0} dB2``.

    The residual uses the symmetric local time of ``X`` from ``lt_method``
    (``occupation`` against the realized clock of ``X``, or ``tanaka``).
    """
    alpha = _check_alpha(alpha)
    p, q, s = nakao_maps(alpha)
    B1 = sample_brownian(grid, stream.child(_NOISE), n_paths=n_paths).total
    B2 = sample_brownian(grid, stream.child(_NOISE2), n_paths=n_paths).total
    B = B1.like(B1.values + B2.values)
    Y = euler_path(lambda y, t: 0.0, lambda y, t: s(y), float(p(x0)), grid, B)
    x = q(Y.values)
    X = Y.like(x)
    pos = (x > 0).astype(float)
    neg = 1.0 - pos
    b1, b2 = B1.values, B2.values
    u = _ito_array(pos, b1) - _ito_array(neg, b2)
    v = _ito_array(neg, b1) + _ito_array(pos, b2)
    if lt_method == "tanaka":
        lhat = tanaka_local_time(X, "symmetric").values.values
    elif lt_method == "occupation":
        lhat = occupation_local_time(X, side="symmetric").values.values
    else:
        raise ConfigurationError(f"unsupported local-time method {lt_method!r}")
    resid = x - x0 - _ito_array(sign(x, "left_continuous"), u) - v - 2 * (2 * alpha - 1) * lhat
    du, dv = np.diff(u, axis=-1), np.diff(v, axis=-1)
    diag = {
        "qv_U": np.sum(du * du, axis=-1),
        "qv_V": np.sum(dv * dv, axis=-1),
        "cross_UV": np.sum(du * dv, axis=-1),
        "driver_identity": np.max(np.abs(_ito_array(sign(x, "left_continuous"), u) + v - B.values), axis=-1),
    }
    return NakaoResult(Y, X, Y.like(u), Y.like(v), B1, B2, np.max(np.abs(resid), axis=-1), diag)
