"""Numerical substrate: log-determinants, special functions, quadrature and
reproducible random streams.

Matrices are plain 2-D complex numpy arrays; there is no wrapper class.
All logarithms here are natural; conversion to bits happens in callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal

import numpy as np

from .errors import DomainError, InvariantError

HERMITIAN_ATOL = 1e-12
LN2 = math.log(2.0)


def as_complex_matrix(a, *, readonly: bool = False) -> np.ndarray:
    """Coerce ``a`` to a 2-D complex128 array (copying)."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim != 2:
        raise InvariantError(f"expected a matrix, got array of shape {m.shape}")
    if readonly:
        m.flags.writeable = False
    return m


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return m.shape[0] == m.shape[1] and bool(np.allclose(m, m.conj().T, rtol=0.0, atol=atol))


def logdet_hermitian_psd(m) -> float:
    """Natural log-determinant of a Hermitian positive definite matrix.

    Uses a Cholesky factorisation, so ``log det M = 2 sum log diag(L)``.

    Raises
    ------
    InvariantError
        If ``m`` is not Hermitian to within 1e-12.
    DomainError
        If ``m`` is not positive definite.
    """
    m = as_complex_matrix(m)
    if not is_hermitian(m):
        raise InvariantError("matrix is not Hermitian")
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise DomainError("matrix is not positive definite") from exc
    return float(2.0 * np.sum(np.log(np.diag(chol).real)))


def logdet_batch(m: np.ndarray) -> np.ndarray:
    # Unchecked batched variant for (..., n, n) stacks that are PD by construction.
    n = m.shape[-1]
    if n == 1:
        return np.log(m[..., 0, 0].real)
    chol = np.linalg.cholesky(m)
    return 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1).real), axis=-1)


def logdet_i_plus_akah(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    """``log det(I + A K A^H)`` for a single matrix or a stack ``(..., r, c)``."""
    a = np.asarray(a, dtype=np.complex128)
    m = a @ k @ np.conj(np.swapaxes(a, -1, -2))
    m = m + np.eye(a.shape[-2])
    # Symmetrise to kill rounding asymmetry before the factorisation.
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    return logdet_batch(m)


def incomplete_gamma_lower(s: int, x: float) -> float:
    """Lower incomplete gamma ``int_0^x t^(s-1) e^(-t) dt`` for integer ``s >= 1``.

    Evaluated through the finite-sum identity
    ``(s-1)! * (1 - e^-x * sum_{k<s} x^k / k!)`` for ``x >= s``; below that
    the difference cancels badly, so the tail series
    ``(s-1)! e^-x sum_{k>=s} x^k / k!`` is summed instead.
    """
    if int(s) != s or s < 1:
        raise DomainError(f"s must be a positive integer, got {s!r}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"x must be nonnegative, got {x!r}")
    s = int(s)
    if x >= s:
        return math.factorial(s - 1) * (1.0 - erlang_ccdf(s, x))
    term = x ** s / math.factorial(s)
    acc = [term]
    k = s
    while term > 1e-17 * acc[0]:
        k += 1
        term *= x / k
        acc.append(term)
    return math.factorial(s - 1) * math.exp(-x) * math.fsum(acc)


def erlang_ccdf(s: int, x):
    """Regularised upper incomplete gamma ``e^-x sum_{k<s} x^k/k!``.

    This is ``P[X >= x]`` for ``X ~ Gamma(s, 1)``; it is ``1`` for ``x <= 0``.
    Accepts scalars or arrays in ``x``.
    """
    x_arr = np.asarray(x, dtype=float)
    xc = np.maximum(x_arr, 0.0)
    term = np.ones_like(xc)
    total = np.ones_like(xc)
    for k in range(1, int(s)):
        term = term * xc / k
        total = total + term
    out = np.exp(-xc) * total
    out = np.where(x_arr <= 0.0, 1.0, np.minimum(out, 1.0))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class QuadratureSpec:
    """How to evaluate an expectation against the standard normal law."""

    scheme: Literal["gauss-hermite", "adaptive-simpson"] = "gauss-hermite"
    nodes: int = 64
    tol: float = 1e-9

    def __post_init__(self):
        if self.scheme == "gauss-hermite":
            if self.nodes < 16:
                raise DomainError("gauss-hermite needs at least 16 nodes")
        elif self.scheme == "adaptive-simpson":
            if not 0.0 < self.tol <= 1e-3:
                raise DomainError("adaptive-simpson tolerance must lie in (0, 1e-3]")
        else:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")


@lru_cache(maxsize=16)
def normal_nodes(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Probabilists' Gauss-Hermite nodes with weights normalised to sum to one."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2.0 * math.pi)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9,
                     max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature of a scalar function over ``[a, b]``."""

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(lo, hi, fa, fm, fb, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (recurse(lo, mid, fa, flm, fm, left, eps / 2.0, depth - 1)
                + recurse(mid, hi, fm, frm, fb, right, eps / 2.0, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def gauss_hermite_expect(f: Callable, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """``E[f(T)]`` for ``T ~ N(0, 1)``.

    With ``scheme="gauss-hermite"`` ``f`` is called once on the node array and
    must be vectorised; polynomials of degree below ``2 * nodes`` are
    integrated exactly. With ``scheme="adaptive-simpson"`` the density-weighted
    integrand is integrated over ``[-12, 12]`` (tail mass below 1e-32).
    """
    if spec.scheme == "gauss-hermite":
        x, w = normal_nodes(spec.nodes)
        vals = np.asarray(f(x), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("non-finite integrand value")
        return float(np.dot(w, vals))
    c = 1.0 / math.sqrt(2.0 * math.pi)
    return adaptive_simpson(lambda t: c * math.exp(-0.5 * t * t) * float(f(t)), -12.0, 12.0, spec.tol)


class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Streams with the same key produce identical sequences; different stream ids
    are statistically independent (``SeedSequence`` spawn keys), so parallel
    workers partition work by stream id rather than sharing one generator.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise DomainError("seed and stream id must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def sample_complex_gaussian(rng: RngStream, variance: float, size=None):
    """Circularly symmetric complex Gaussian draws with ``E|z|^2 = variance``."""
    if variance < 0:
        raise DomainError(f"variance must be nonnegative, got {variance}")
    g = rng.generator
    scale = math.sqrt(variance / 2.0)
    if size is None:
        return complex(scale * g.standard_normal(), scale * g.standard_normal())
    re = g.standard_normal(size)
    im = g.standard_normal(size)
    return scale * (re + 1j * im)
