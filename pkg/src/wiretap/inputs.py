"""Transmit strategies evaluated by the metrics.

Only three families are representable: a non-precoded Gaussian input, scalar
BPSK, and a Gaussian information signal plus an independent Gaussian mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, DimensionError, NotPSDError, PowerBudgetError
from .numkernel import as_complex_matrix, is_hermitian

PSD_ATOL = 1e-10
POWER_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class GaussianNonPrecoded:
    """``u = x``, ``x ~ CN(0, covariance)``."""

    covariance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "covariance", as_complex_matrix(self.covariance, readonly=True))

    @property
    def in_dim(self) -> int:
        return self.covariance.shape[0]

    @property
    def power(self) -> float:
        return float(np.trace(self.covariance).real)


@dataclass(frozen=True)
class BpskScalar:
    """``u = x``, ``x = +-sqrt(power)`` equiprobable, single transmit antenna."""

    power: float = 1.0

    @property
    def in_dim(self) -> int:
        return 1


@dataclass(frozen=True, eq=False)
class GaussianWithMask:
    """``x = x_info + x_mask`` with independent Gaussian parts and ``u = x_info``."""

    info: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "info", as_complex_matrix(self.info, readonly=True))
        object.__setattr__(self, "mask", as_complex_matrix(self.mask, readonly=True))

    @property
    def in_dim(self) -> int:
        return self.info.shape[0]

    @property
    def total_covariance(self) -> np.ndarray:
        return self.info + self.mask

    @property
    def power(self) -> float:
        return float(np.trace(self.info).real + np.trace(self.mask).real)


InputDistribution = Union[GaussianNonPrecoded, BpskScalar, GaussianWithMask]


@dataclass(frozen=True)
class PowerBudget:
    total: float

    def __post_init__(self):
        if not self.total >= 0:
            raise ConfigError(f"power budget must be nonnegative, got {self.total}")


def isotropic(power: float, in_dim: int) -> GaussianNonPrecoded:
    """Gaussian input with covariance ``(power / in_dim) I``."""
    return GaussianNonPrecoded(np.eye(in_dim) * (power / in_dim))


def check_psd(k: np.ndarray, name: str = "covariance", atol: float = PSD_ATOL) -> None:
    """Raise :class:`NotPSDError` unless ``k`` is Hermitian PSD.

    Positive semidefiniteness is tested with the principal-minor form of
    Sylvester's criterion for 1x1 and 2x2 matrices and with eigenvalues above.
    """
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {k.shape}")
    if not is_hermitian(k, atol):
        raise NotPSDError(f"{name} is not Hermitian")
    n = k.shape[0]
    if n <= 2:
        diag = k.diagonal().real
        ok = bool(np.all(diag >= -atol))
        if n == 2:
            det = diag[0] * diag[1] - abs(k[0, 1]) ** 2
            ok = ok and det >= -atol * max(1.0, diag[0] * diag[1])
    else:
        ok = bool(np.linalg.eigvalsh(k).min() >= -atol)
    if not ok:
        raise NotPSDError(f"{name} is not positive semidefinite")


def validate_input(d: InputDistribution, budget: PowerBudget, in_dim: int) -> InputDistribution:
    """Check dimensions, positive semidefiniteness and the power budget.

    Returns the input unchanged; the call is idempotent.
    """
    if d.in_dim != in_dim:
        raise DimensionError(f"input has {d.in_dim} antennas, channel expects {in_dim}")
    if isinstance(d, GaussianNonPrecoded):
        check_psd(d.covariance)
    elif isinstance(d, GaussianWithMask):
        if d.info.shape != d.mask.shape:
            raise DimensionError("information and mask covariances differ in shape")
        check_psd(d.info, "information covariance")
        check_psd(d.mask, "mask covariance")
    elif isinstance(d, BpskScalar):
        if d.power < 0:
            raise NotPSDError("BPSK power must be nonnegative")
    else:
        raise ConfigError(f"unknown input type {type(d).__name__}")
    if d.power > budget.total + POWER_ATOL:
        raise PowerBudgetError(f"input power {d.power:.6g} exceeds budget {budget.total:.6g}")
    return d


def counterexample_gaussian_input(a: float, beta: float, total_power: float) -> GaussianNonPrecoded:
    """Two-antenna covariance ``[[a, beta], [beta, total_power - a]]``."""
    c = total_power - a
    if a < 0 or c < 0:
        raise NotPSDError(f"need 0 <= a <= {total_power}, got a={a}")
    if beta * beta > a * c + PSD_ATOL * max(1.0, a * c):
        raise NotPSDError(f"Sylvester's criterion fails: a*c={a * c:.6g} < beta^2={beta * beta:.6g}")
    return GaussianNonPrecoded(np.array([[a, beta], [beta, c]], dtype=complex))


def counterexample_an_input(total_power: float) -> GaussianWithMask:
    """Half the power on antenna 1 carrying information, half on antenna 2 as a mask."""
    if total_power < 0:
        raise ConfigError("power must be nonnegative")
    half = total_power / 2.0
    return GaussianWithMask(np.diag([half, 0.0]), np.diag([0.0, total_power - half]))


def sample_input(d: InputDistribution, rng, size: int) -> np.ndarray:
    """Draw ``size`` transmit vectors ``x`` (shape ``(size, in_dim)``)."""
    gen = rng.generator
    if isinstance(d, BpskScalar):
        return (math.sqrt(d.power) * gen.choice([-1.0, 1.0], size=(size, 1))).astype(complex)
    if isinstance(d, GaussianNonPrecoded):
        return _gaussian_vectors(d.covariance, gen, size)
    return _gaussian_vectors(d.info, gen, size) + _gaussian_vectors(d.mask, gen, size)


def _gaussian_vectors(k, gen, size):
    w, v = np.linalg.eigh(k)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    z = (gen.standard_normal((size, k.shape[0])) + 1j * gen.standard_normal((size, k.shape[0])))
    return (z / math.sqrt(2.0)) @ root.T
