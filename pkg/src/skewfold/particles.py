"""Two Brownian particles with rank-based characteristics and skew-elastic collisions.

The pipeline is

1. simulate the rank-based pair ``(X1, X2)`` driven by ``(B1, B2)``;
2. form the auxiliary Brownian motions ``W1, W2, V1, V2`` and
   ``W = rho W1 + sigma W2``, ``V = rho V1 + sigma V2``; in the driftless case
   ``W`` reproduces the gap ``Y = X1 - X2``;
3. unfold the Skorokhod reflection of ``Y`` into a skew Brownian motion
   ``Yt`` with ``alpha = eta / (zeta + eta)``;
4. rewire ``(B1, B2)`` into ``(Bt1, Bt2)`` according to the signs of
   ``(Y, Yt)``, build ``Vt``, ``Wt`` and assemble
   ``Xit = Vt + 2 (1 - beta) Lhat``, ``Xt1 = (Xit + Yt)/2``, ``Xt2 = (Xit - Yt)/2``.

Signs are read at the left endpoint of every step; a zero counts as ``<= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .excursions import UnfoldResult, unfold_skorokhod
from .local_time import LocalTimeCurve, estimate_local_time, tanaka_local_time
from .paths import RngStream, SamplePath, TimeGrid, _check_same_grid, _cumsum0, _ito_array, sample_brownian
from .reflection import sign, skorokhod_reflect

__all__ = [
    "ParticleParams",
    "derive_skew_params",
    "BaseSystem",
    "AuxiliaryBrownians",
    "SkewSystemResult",
    "simulate_base",
    "auxiliary_brownians",
    "build_skew_system",
]


def derive_skew_params(zeta1: float, zeta2: float, eta1: float, eta2: float):
    """Skewness and collision parameters from the four collision coefficients.

    ``zeta = 1 + (zeta1 - zeta2)/2``, ``eta = 1 - (eta1 - eta2)/2``,
    ``alpha = eta / (zeta + eta)`` and
    ``beta = alpha (zeta1 + zeta2)/2 + (1 - alpha)(eta1 + eta2)/2``.

    Returns
    -------
    (alpha, beta, zeta, eta)
    """
    zeta = 1.0 + (zeta1 - zeta2) / 2.0
    eta = 1.0 - (eta1 - eta2) / 2.0
    if zeta + eta == 0:
        raise ConfigurationError("zeta + eta must be nonzero")
    alpha = eta / (zeta + eta)
    if not 0 <= alpha <= 1:
        raise ConfigurationError(f"alpha = eta/(zeta+eta) = {alpha} is outside [0, 1]")
    beta = alpha * (zeta1 + zeta2) / 2.0 + (1 - alpha) * (eta1 + eta2) / 2.0
    return alpha, beta, zeta, eta


@dataclass(frozen=True)
class ParticleParams:
    """Dispersions ``rho, sigma`` (``rho**2 + sigma**2 = 1``), drifts ``g, h`` and collision coefficients."""

    rho: float
    sigma: float
    g: float = 0.0
    h: float = 0.0
    zeta1: float = 1.0
    zeta2: float = 1.0
    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0 and self.sigma > 0):
            raise ConfigurationError("rho and sigma must be > 0")
        if abs(self.rho**2 + self.sigma**2 - 1) > 1e-12:
            raise ConfigurationError(f"rho**2 + sigma**2 must equal 1, got {self.rho**2 + self.sigma**2!r}")
        derive_skew_params(self.zeta1, self.zeta2, self.eta1, self.eta2)

    @classmethod
    def symmetric(cls, **kw) -> "ParticleParams":
        """``rho = sigma = 1/sqrt(2)``."""
        r = float(np.sqrt(0.5))
        return cls(rho=r, sigma=r, **kw)

    @property
    def skew(self):
        """``(alpha, beta, zeta, eta)``."""
        return derive_skew_params(self.zeta1, self.zeta2, self.eta1, self.eta2)

    @property
    def alpha(self) -> float:
        return self.skew[0]

    @property
    def beta(self) -> float:
        return self.skew[1]

    @property
    def driftless(self) -> bool:
        return self.g == 0 and self.h == 0


@dataclass(frozen=True, eq=False)
class BaseSystem:
    """Rank-based pair and its drivers; ``Y = X1 - X2``."""

    X1: SamplePath
    X2: SamplePath
    B1: SamplePath
    B2: SamplePath
    Y: SamplePath
    params: ParticleParams

    @property
    def grid(self) -> TimeGrid:
        return self.Y.grid


def simulate_base(
    params: ParticleParams,
    grid: TimeGrid,
    stream: RngStream,
    n_paths=None,
    drivers=None,
) -> BaseSystem:
    """Euler scheme for the rank-based pair started at ``(0, 0)``.

    The leader (``X1 > X2``) gets drift ``-h`` and dispersion ``rho``; the
    laggard gets drift ``g`` and dispersion ``sigma``. Ties go to the
    ``X1 <= X2`` branch.

    Parameters
    ----------
    drivers : (SamplePath, SamplePath), optional
        Use these ``(B1, B2)`` instead of drawing them from ``stream``
        (children 0 and 1).
    """
    if drivers is None:
        B1 = sample_brownian(grid, stream.child(0), n_paths=n_paths).total
        B2 = sample_brownian(grid, stream.child(1), n_paths=n_paths).total
    else:
        B1, B2 = drivers
        _check_same_grid(B1, B2)
        if B1.grid != grid:
            raise ConfigurationError("drivers are on a different grid")
    rho, sig, g, h = params.rho, params.sigma, params.g, params.h
    dt = grid.dt
    db1, db2 = np.diff(B1.values, axis=-1), np.diff(B2.values, axis=-1)
    shape = db1.shape[:-1]
    x1 = np.zeros(shape + (grid.n_steps + 1,))
    x2 = np.zeros_like(x1)
    a, b = np.zeros(shape), np.zeros(shape)
    for i in range(grid.n_steps):
        lead = a > b
        na = a + np.where(lead, -h, g) * dt + np.where(lead, rho, sig) * db1[..., i]
        nb = b + np.where(lead, g, -h) * dt + np.where(lead, sig, rho) * db2[..., i]
        a, b = na, nb
        x1[..., i + 1] = a
        x2[..., i + 1] = b
    X1, X2 = SamplePath(grid, x1), SamplePath(grid, x2)
    return BaseSystem(X1, X2, B1, B2, SamplePath(grid, x1 - x2), params)


@dataclass(frozen=True, eq=False)
class AuxiliaryBrownians:
    W: SamplePath
    V: SamplePath
    W1: SamplePath
    W2: SamplePath
    V1: SamplePath
    V2: SamplePath

    def __iter__(self):
        return iter((self.W, self.V, self.W1, self.W2, self.V1, self.V2))


def auxiliary_brownians(base: BaseSystem, params: Optional[ParticleParams] = None) -> AuxiliaryBrownians:
    """Indicator-spliced integrals of the drivers.

    With ``lead = 1{X1 > X2}``::

        W1 = int lead dB1 - int (1 - lead) dB2
        W2 = int (1 - lead) dB1 - int lead dB2
        V1 = int lead dB1 + int (1 - lead) dB2
        V2 = int (1 - lead) dB1 + int lead dB2

    and ``W = rho W1 + sigma W2``, ``V = rho V1 + sigma V2``.
    """
    params = base.params if params is None else params
    grid = _check_same_grid(base.X1, base.X2, base.B1, base.B2)
    lead = (base.X1.values > base.X2.values).astype(float)
    lag = 1.0 - lead
    b1, b2 = base.B1.values, base.B2.values
    i_l1, i_g1 = _ito_array(lead, b1), _ito_array(lag, b1)
    i_l2, i_g2 = _ito_array(lead, b2), _ito_array(lag, b2)
    w1, w2 = i_l1 - i_g2, i_g1 - i_l2
    v1, v2 = i_l1 + i_g2, i_g1 + i_l2
    rho, sig = params.rho, params.sigma
    P = lambda a: SamplePath(grid, a)  # noqa: E731
    return AuxiliaryBrownians(P(rho * w1 + sig * w2), P(rho * v1 + sig * v2), P(w1), P(w2), P(v1), P(v2))


@dataclass(frozen=True, eq=False)
class SkewSystemResult:
    """The skew-elastic collision system and everything it was built from.

    Attributes
    ----------
    base : BaseSystem
    aux : AuxiliaryBrownians
    unfold : UnfoldResult
        Unfolding of the Skorokhod reflection of ``Y``.
    Y_t, B1_t, B2_t, V_t, W_t, Xi_t, X1_t, X2_t : SamplePath
        The tilde processes.
    L_hat : LocalTimeCurve
        Estimated symmetric local time of ``Y_t`` that enters ``Xi_t``.
    alpha, beta, zeta, eta : float
    diagnostics : dict
        Residuals, one value per path:

        ``gap_identity``  sup of ``|X1_t - X2_t| - (Y + max(-Y)^+)``
        ``difference``    sup of ``X1_t - X2_t - Y_t``
        ``sum``           sup of ``X1_t + X2_t - Xi_t``
        ``splice``        sup of ``{|dB1_t|, |dB2_t|}`` vs ``{|dB1|, |dB2|}`` mismatch
        ``intertwine``    sup of ``W_t - int sgn(Y_t) dW``
        ``component1``/``component2``
            sup-norm residuals of the two particle equations with the
            symmetric local-time drag terms
        ``lt_pos``/``lt_neg``  Tanaka right local times of ``Y_t`` and ``-Y_t`` at the horizon
        ``qv_B1``/``qv_B2``/``cross_B12``  realized (co)variations of the rewired pair
    """

    base: BaseSystem
    aux: AuxiliaryBrownians
    unfold: UnfoldResult
    Y_t: SamplePath
    B1_t: SamplePath
    B2_t: SamplePath
    V_t: SamplePath
    W_t: SamplePath
    Xi_t: SamplePath
    X1_t: SamplePath
    X2_t: SamplePath
    L_hat: LocalTimeCurve
    alpha: float
    beta: float
    zeta: float
    eta: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def params(self) -> ParticleParams:
        return self.base.params


def _sup(a):
    return np.max(np.abs(a), axis=-1)


def build_skew_system(
    base: BaseSystem,
    params: Optional[ParticleParams] = None,
    stream: Optional[RngStream] = None,
    lt_method: str = "upcrossing",
    epsilon: Optional[float] = None,
    signs=None,
) -> SkewSystemResult:
    """Assemble the skew-elastic collision system from a driftless base system.

    Parameters
    ----------
    base : BaseSystem
    params : ParticleParams, optional
        Defaults to ``base.params``.
    stream : RngStream
        Source of the excursion signs of the gap.
    lt_method : {'tanaka', 'occupation', 'upcrossing'}
        Estimator of the symmetric local time of ``Y_t`` used to build
        ``Xi_t``. It enters the constructed paths, not just diagnostics.
    epsilon : float, optional
        Bandwidth for the bandwidth-based estimators.
    signs : array_like, optional
        Explicit excursion signs for the gap.
    """
    params = base.params if params is None else params
    if not params.driftless:
        raise ConfigurationError("the skew system is only assembled from a driftless base system (g = h = 0)")
    alpha, beta, zeta, eta = params.skew
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha = {alpha} must lie strictly inside (0, 1) to unfold the gap")
    aux = auxiliary_brownians(base, params)
    grid = base.grid
    unf = unfold_skorokhod(base.Y, alpha, stream, signs=signs, diagnostics=False)
    y, yt = base.Y.values, unf.X.values
    db1, db2 = np.diff(base.B1.values, axis=-1), np.diff(base.B2.values, axis=-1)
    yp, tp = (y > 0)[..., :-1], (yt > 0)[..., :-1]
    same = np.where(yp & tp, 1.0, 0.0) - np.where(~yp & ~tp, 1.0, 0.0)
    cross = np.where(yp & ~tp, 1.0, 0.0) - np.where(~yp & tp, 1.0, 0.0)
    dbt1 = same * db1 + cross * db2
    dbt2 = cross * db1 + same * db2
    rho, sig = params.rho, params.sigma
    a = np.where(tp, rho, sig)
    b = np.where(tp, sig, rho)
    vt = _cumsum0(a * dbt1 + b * dbt2)
    wt = _cumsum0(a * dbt1 - b * dbt2)
    lhat = estimate_local_time(unf.X, lt_method, "symmetric", epsilon=epsilon)
    lh = lhat.values.values
    xit = vt + 2.0 * (1.0 - beta) * lh
    x1t = 0.5 * (xit + yt)
    x2t = 0.5 * (xit - yt)

    refl = skorokhod_reflect(base.Y).S.values
    ab = np.sort(np.abs(np.stack([db1, db2])), axis=0)
    abt = np.sort(np.abs(np.stack([dbt1, dbt2])), axis=0)
    diag = {
        "gap_identity": _sup(np.abs(x1t - x2t) - refl),
        "difference": _sup(x1t - x2t - yt),
        "sum": _sup(x1t + x2t - xit),
        "splice": np.max(np.abs(ab - abt), axis=(0, -1)),
        "intertwine": _sup(wt - _ito_array(sign(yt, "left_continuous"), aux.W.values)),
        "component1": _sup(x1t - _cumsum0(a * dbt1) - (2 * alpha - beta) * lh),
        "component2": _sup(x2t - _cumsum0(b * dbt2) - (2 - 2 * alpha - beta) * lh),
        "lt_pos": tanaka_local_time(unf.X, "right").final,
        "lt_neg": tanaka_local_time(-unf.X, "right").final,
        "qv_B1": np.sum(dbt1 * dbt1, axis=-1),
        "qv_B2": np.sum(dbt2 * dbt2, axis=-1),
        "cross_B12": np.sum(dbt1 * dbt2, axis=-1),
    }
    P = lambda v: SamplePath(grid, v)  # noqa: E731
    return SkewSystemResult(
        base, aux, unf, unf.X, P(_cumsum0(dbt1)), P(_cumsum0(dbt2)), P(vt), P(wt),
        P(xit), P(x1t), P(x2t), lhat, alpha, beta, zeta, eta, diag,
    )
