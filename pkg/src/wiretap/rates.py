"""Per-realisation secrecy rates and scalar mutual-information curves.

Rates are in bits. Matrix arguments may be single matrices or stacks
``(n, rows, cols)``; the result then has shape ``(n,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .errors import DimensionError, DomainError
from .inputs import BpskScalar, GaussianNonPrecoded, GaussianWithMask, InputDistribution
from .numkernel import LN2, logdet_i_plus_akah, normal_nodes

# 64 nodes leave ~1e-6 error near gamma = 3; 200 nodes bring it to ~2e-9.
BPSK_NODES = 200


def _check_dims(h, g, k):
    h, g = np.asarray(h), np.asarray(g)
    if h.shape[-1] != k.shape[0] or g.shape[-1] != k.shape[0]:
        raise DimensionError(
            f"channel input dimensions {h.shape[-1]}, {g.shape[-1]} do not match "
            f"covariance of size {k.shape[0]}")
    return h, g


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def gaussian_secrecy_rate(h, g, k):
    """``log2 det(I + H K H^H) - log2 det(I + G K G^H)``; may be negative."""
    k = np.asarray(k, dtype=np.complex128)
    h, g = _check_dims(h, g, k)
    return _out((logdet_i_plus_akah(h, k) - logdet_i_plus_akah(g, k)) / LN2)


def masked_gaussian_secrecy_rate(h, g, k_info, k_mask):
    """Secrecy rate of ``u = x_info`` when an independent Gaussian mask is added.

    Each receiver gets ``log2 det(I + A(K_info + K_mask)A^H) - log2 det(I + A K_mask A^H)``.
    """
    k_info = np.asarray(k_info, dtype=np.complex128)
    k_mask = np.asarray(k_mask, dtype=np.complex128)
    k_tot = k_info + k_mask
    h, g = _check_dims(h, g, k_tot)
    bob = logdet_i_plus_akah(h, k_tot) - logdet_i_plus_akah(h, k_mask)
    eve = logdet_i_plus_akah(g, k_tot) - logdet_i_plus_akah(g, k_mask)
    return _out((bob - eve) / LN2)


def _logcosh(z):
    a = np.abs(z)
    return a + np.log1p(np.exp(-2.0 * a)) - LN2


def i_bpsk(gamma, nodes: int = BPSK_NODES):
    """Mutual information (bits) of equiprobable ``x = +-1`` over ``sqrt(gamma) x + w``.

    ``w`` is unit-variance circularly symmetric complex noise. Only the real
    noise component (variance 1/2) is informative, so with ``s = 2 gamma``
    ``I = s - E[log cosh(s - sqrt(s) T)]`` nats, ``T ~ N(0, 1)``.
    """
    gam = np.asarray(gamma, dtype=float)
    if np.any(gam < 0) or np.any(np.isnan(gam)):
        raise DomainError("SNR must be nonnegative")
    x, w = normal_nodes(nodes)
    s = 2.0 * gam[..., None]
    ent = _logcosh(s - np.sqrt(s) * x) @ w
    val = (2.0 * gam - ent) / LN2
    return _out(np.clip(val, 0.0, 1.0))


def bpsk_mmse(gamma, nodes: int = BPSK_NODES):
    """MMSE of equiprobable ``x = +-1`` from ``sqrt(gamma) x + w`` (complex noise).

    Equals ``1 - E[tanh(s - sqrt(s) T)]`` with ``s = 2 gamma``; in nats
    ``dI/dgamma = mmse``.
    """
    gam = np.asarray(gamma, dtype=float)
    if np.any(gam < 0):
        raise DomainError("SNR must be nonnegative")
    x, w = normal_nodes(nodes)
    s = 2.0 * gam[..., None]
    val = 1.0 - np.tanh(s - np.sqrt(s) * x) @ w
    return _out(np.clip(val, 0.0, 1.0))


def i_gaussian(gamma):
    """``log2(1 + gamma)``: Gaussian-input mutual information in bits."""
    return _out(np.log1p(np.asarray(gamma, dtype=float)) / LN2)


def secrecy_rate(h, g, d: InputDistribution):
    """Instantaneous secrecy rate of input ``d`` over the realisation(s) ``(H, G)``."""
    if isinstance(d, GaussianNonPrecoded):
        return gaussian_secrecy_rate(h, g, d.covariance)
    if isinstance(d, GaussianWithMask):
        return masked_gaussian_secrecy_rate(h, g, d.info, d.mask)
    if isinstance(d, BpskScalar):
        h, g = np.asarray(h), np.asarray(g)
        if h.shape[-1] != 1 or g.shape[-1] != 1:
            raise NotImplementedError("BPSK rates are only available for single-input channels")
        # A SIMO channel h reduces to the scalar ||h|| x + w.
        gh = d.power * np.sum(np.abs(h) ** 2, axis=(-2, -1))
        gg = d.power * np.sum(np.abs(g) ** 2, axis=(-2, -1))
        return _out(np.asarray(i_bpsk(gh)) - np.asarray(i_bpsk(gg)))
    raise TypeError(f"unsupported input {type(d).__name__}")


@dataclass(frozen=True, eq=False)
class DeltaCurve:
    """``delta(gamma) = I_p(gamma) - I_q(gamma)`` tabulated on a grid."""

    gamma: np.ndarray
    delta: np.ndarray
    derivative: Optional[np.ndarray] = None
    fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        d = np.asarray(self.delta, dtype=float)
        if g.ndim != 1 or g.shape != d.shape or g.size == 0:
            raise DomainError("grid and values must be nonempty 1-D arrays of equal length")
        if np.any(np.diff(g) <= 0):
            raise DomainError("grid must be strictly increasing")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "delta", d)
        if self.derivative is not None:
            object.__setattr__(self, "derivative", np.asarray(self.derivative, dtype=float))


def scalar_mi(kind: Literal["gaussian", "bpsk"], power: float = 1.0) -> Callable:
    if kind == "gaussian":
        return lambda gam: i_gaussian(power * np.asarray(gam, dtype=float))
    if kind == "bpsk":
        return lambda gam: i_bpsk(power * np.asarray(gam, dtype=float))
    raise DomainError(f"unknown scalar input kind {kind!r}")


def derivative(f: Callable, gamma):
    """Central difference with step ``1e-4 * max(gamma, 1)``.

    Points closer to 0 than one step use the one-sided second-order stencil
    ``(-3 f(x) + 4 f(x+h) - f(x+2h)) / 2h`` since ``f`` is only defined on
    ``gamma >= 0``.
    """
    gam = np.asarray(gamma, dtype=float)
    h = 1e-4 * np.maximum(gam, 1.0)
    near_zero = gam < h
    lo = np.where(near_zero, gam, gam - h)
    central = (np.asarray(f(gam + h)) - np.asarray(f(lo))) / (2.0 * h)
    onesided = (-3.0 * np.asarray(f(gam)) + 4.0 * np.asarray(f(gam + h))
                - np.asarray(f(gam + 2.0 * h))) / (2.0 * h)
    return _out(np.where(near_zero, onesided, central))


def delta_curve(p_power: float, q_kind: Literal["gaussian", "bpsk"], grid) -> DeltaCurve:
    """Gaussian input ``p`` against input ``q`` (same power), both with ``u = x``."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid < 0):
        raise DomainError("grid must be nonempty and nonnegative")
    ip = scalar_mi("gaussian", p_power)
    iq = scalar_mi(q_kind, p_power)

    def fn(gam):
        return np.asarray(ip(gam)) - np.asarray(iq(gam))

    return DeltaCurve(grid, fn(grid), derivative(fn, grid), fn)


def find_convexity_interval(curve: DeltaCurve, threshold: float = 1e-9):
    """Longest grid interval on which ``curve`` is strictly convex and strictly monotone.

    Convexity is judged from second differences (scaled to the local spacing)
    exceeding ``threshold``. Returns ``(gamma_lo, gamma_hi, "increasing" |
    "decreasing")`` or ``None``.
    """
    g, d = curve.gamma, curve.delta
    if g.size < 3:
        return None
    hl = np.diff(g)[:-1]
    hr = np.diff(g)[1:]
    slope_l = (d[1:-1] - d[:-2]) / hl
    slope_r = (d[2:] - d[1:-1]) / hr
    second = 2.0 * (slope_r - slope_l) / (hl + hr) * hl * hr
    first = np.sign(np.diff(d))

    best = None
    i = 0
    n_int = second.size
    while i < n_int:
        if second[i] <= threshold:
            i += 1
            continue
        j = i
        while j + 1 < n_int and second[j + 1] > threshold:
            j += 1
        # interior indices i..j are convex -> grid points i..j+2 in curve indexing
        lo, hi = i, j + 2
        k = lo
        while k < hi:
            s = first[k]
            if s == 0:
                k += 1
                continue
            m = k
            while m + 1 < hi and first[m + 1] == s:
                m += 1
            if m + 1 - k >= 2:
                span = (k, m + 1, "increasing" if s > 0 else "decreasing")
                if best is None or g[span[1]] - g[span[0]] > g[best[1]] - g[best[0]]:
                    best = span
            k = m + 1
        i = j + 1
    if best is None:
        return None
    return float(g[best[0]]), float(g[best[1]]), best[2]
