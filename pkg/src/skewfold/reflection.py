"""Folding maps (Skorokhod and conventional reflection) and the Levy transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .paths import SamplePath, _ito_array, as_path

__all__ = [
    "ReflectionResult",
    "sign",
    "skorokhod_reflect",
    "conventional_reflect",
    "levy_transform",
    "CONVENTIONS",
]

#: ``symmetric`` maps 0 to 0; ``left_continuous`` maps 0 to -1.
CONVENTIONS = ("symmetric", "left_continuous")


def sign(x, convention: str = "symmetric") -> np.ndarray:
    """Sign function with an explicit value at the origin.

    Parameters
    ----------
    x : array_like
    convention : {'symmetric', 'left_continuous'}
        ``symmetric`` gives ``sign(0) = 0``; ``left_continuous`` gives
        ``sign(0) = -1``, i.e. ``1{x > 0} - 1{x <= 0}``.
    """
    x = np.asarray(x, dtype=float)
    if convention == "symmetric":
        return np.sign(x)
    if convention == "left_continuous":
        return np.where(x > 0, 1.0, -1.0)
    raise ConfigurationError(f"unknown sign convention {convention!r}; expected one of {CONVENTIONS}")


@dataclass(frozen=True, eq=False)
class ReflectionResult:
    """Skorokhod reflection ``S = U + C`` of a path ``U``.

    Attributes
    ----------
    S : SamplePath
        Reflected path, ``S >= 0``.
    C : SamplePath
        Pushing term ``C[k] = max(0, max_{j<=k} -U[j])``; nondecreasing, ``C[0] = 0``.
    U : SamplePath
        The input path.
    """

    S: SamplePath
    C: SamplePath
    U: SamplePath


def _skorokhod_arrays(u: np.ndarray):
    c = np.maximum.accumulate(-u, axis=-1)
    np.maximum(c, 0.0, out=c)
    return u + c, c


def skorokhod_reflect(U) -> ReflectionResult:
    """Reflect ``U`` at the origin by the minimal nondecreasing push.

    ``S`` is exactly zero at every index where the running maximum of ``-U``
    is attained (increases or ties), since there ``S = U[j] - U[j]``.
    """
    U = as_path(U)
    u = U.values
    if np.any(u[..., 0] != 0):
        raise DomainError("Skorokhod reflection needs U[0] = 0")
    s, c = _skorokhod_arrays(u)
    return ReflectionResult(U.like(s), U.like(c), U)


def conventional_reflect(U) -> SamplePath:
    """Pointwise absolute value ``R = |U|``."""
    U = as_path(U)
    return U.like(np.abs(U.values))


def levy_transform(U, convention: str = "symmetric") -> SamplePath:
    """Levy transform ``int sgn(U) dU`` as a left-point sum.

    With the symmetric convention the discrete transform drops every
    increment that starts at an exact zero, so its Skorokhod reflection
    matches ``|U|`` only in the grid-refinement limit.
    """
    U = as_path(U)
    return U.like(_ito_array(sign(U.values, convention), U.values))
