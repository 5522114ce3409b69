"""Channel ensembles: the laws of the main channel ``H`` and the eavesdropper
channel ``G``.

Every ensemble draws ``(out_dim, in_dim)`` complex matrices. Draws are
vectorised: ``sample_channel(e, rng, size=n)`` returns an ``(n, out, in)``
stack, ``size=None`` a single matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigError, DimensionError
from .numkernel import RngStream, as_complex_matrix, erlang_ccdf, sample_complex_gaussian

WEIGHT_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Deterministic:
    """A channel that never changes."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_complex_matrix(self.matrix, readonly=True))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass(frozen=True, eq=False)
class FiniteSupport:
    """A channel taking finitely many values with given probabilities."""

    points: tuple
    weights: np.ndarray

    def __post_init__(self):
        pts = tuple(as_complex_matrix(p, readonly=True) for p in self.points)
        w = np.array(self.weights, dtype=float)
        if len(pts) == 0 or len(pts) != w.size:
            raise ConfigError("finite support needs one weight per point and at least one point")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_ATOL:
            raise ConfigError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
        if len({p.shape for p in pts}) != 1:
            raise DimensionError("all support points must share one shape")
        w.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def shape(self) -> tuple[int, int]:
        return self.points[0].shape


@dataclass(frozen=True, eq=False)
class RayleighIID:
    """I.i.d. circularly symmetric complex Gaussian entries, ``E|h_ij|^2 = variance``."""

    out_dim: int
    in_dim: int
    variance: float = 1.0

    def __post_init__(self):
        if self.out_dim < 1 or self.in_dim < 1:
            raise DimensionError("Rayleigh dimensions must be positive")
        if self.variance < 0:
            raise ConfigError("Rayleigh variance must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.out_dim, self.in_dim)


@dataclass(frozen=True, eq=False)
class DegradedCascade:
    """``G = tail @ H`` with ``H`` drawn from ``base`` and ``tail`` independent.

    When this ensemble is paired with its own ``base`` in :func:`joint_sample`
    the two draws share the same ``H`` realisation.
    """

    base: "ChannelEnsemble"
    tail: "ChannelEnsemble"

    def __post_init__(self):
        if isinstance(self.tail, DegradedCascade):
            raise ConfigError("cascade tail must be a plain ensemble")
        if self.tail.shape[1] != self.base.shape[0]:
            raise DimensionError(
                f"tail input dimension {self.tail.shape[1]} does not match "
                f"base output dimension {self.base.shape[0]}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.tail.shape[0], self.base.shape[1])


ChannelEnsemble = Union[Deterministic, FiniteSupport, RayleighIID, DegradedCascade]


def is_finite(e: ChannelEnsemble) -> bool:
    if isinstance(e, DegradedCascade):
        return is_finite(e.base) and is_finite(e.tail)
    return isinstance(e, (Deterministic, FiniteSupport))


def support(e: ChannelEnsemble) -> list[tuple[np.ndarray, float]]:
    """Atoms ``(matrix, probability)`` of a finite ensemble."""
    if isinstance(e, Deterministic):
        return [(e.matrix, 1.0)]
    if isinstance(e, FiniteSupport):
        return [(p, float(w)) for p, w in zip(e.points, e.weights)]
    if isinstance(e, DegradedCascade) and is_finite(e):
        return [(t @ h, wt * wh) for h, wh in support(e.base) for t, wt in support(e.tail)]
    raise ConfigError(f"{type(e).__name__} does not have finite support")


def _draw(e: ChannelEnsemble, gen: RngStream, n: int) -> np.ndarray:
    if isinstance(e, Deterministic):
        return np.broadcast_to(e.matrix, (n,) + e.shape)
    if isinstance(e, FiniteSupport):
        idx = gen.generator.choice(len(e.points), size=n, p=e.weights)
        return np.stack(e.points)[idx]
    if isinstance(e, RayleighIID):
        return sample_complex_gaussian(gen, e.variance, size=(n,) + e.shape)
    if isinstance(e, DegradedCascade):
        h = _draw(e.base, gen, n)
        return _draw(e.tail, gen, n) @ h
    raise ConfigError(f"unknown ensemble type {type(e).__name__}")


def sample_channel(e: ChannelEnsemble, rng: RngStream, size: Optional[int] = None) -> np.ndarray:
    """One draw (``size=None``) or a stack of ``size`` draws from ``e``."""
    out = _draw(e, rng, 1 if size is None else int(size))
    return np.array(out[0]) if size is None else out


def joint_sample(e_main: ChannelEnsemble, e_eve: ChannelEnsemble, rng: RngStream,
                 size: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Draw the pair ``(H, G)``.

    If ``e_eve`` is a :class:`DegradedCascade` whose ``base`` is ``e_main``
    (same object), ``G`` is ``tail @ H`` for the returned ``H``. Otherwise the
    two draws are independent.
    """
    if e_main.shape[1] != e_eve.shape[1]:
        raise DimensionError(
            f"main and eavesdropper channels must share the input dimension, "
            f"got {e_main.shape} and {e_eve.shape}")
    n = 1 if size is None else int(size)
    h = _draw(e_main, rng, n)
    if isinstance(e_eve, DegradedCascade) and e_eve.base is e_main:
        g = _draw(e_eve.tail, rng, n) @ h
    else:
        g = _draw(e_eve, rng, n)
    if size is None:
        return np.array(h[0]), np.array(g[0])
    return h, g


@dataclass(frozen=True)
class ScalarNormLaw:
    """Law of the Frobenius norm ``||h||`` of a single-input channel.

    ``ccdf(a) = P[||h|| >= a]``. Discrete laws list their ``atoms`` as
    ``(norm, probability)`` pairs and carry no density.
    """

    ccdf: Callable
    density: Optional[Callable] = None
    support_bound: float = math.inf
    atoms: tuple = ()

    def truncation_point(self, eps: float = 1e-12) -> float:
        """Smallest convenient ``a`` with ``ccdf(a) < eps``."""
        if math.isfinite(self.support_bound):
            return float(self.support_bound)
        a = 1.0
        while self.ccdf(a) >= eps:
            a *= 2.0
        return a


def _step_ccdf(atoms):
    norms = np.array([a for a, _ in atoms])
    probs = np.array([w for _, w in atoms])

    def ccdf(a):
        a_arr = np.asarray(a, dtype=float)
        out = np.sum(probs * (norms >= a_arr[..., None]), axis=-1)
        return float(out) if out.ndim == 0 else out

    return ccdf


def _merge_atoms(pairs, tol=1e-12):
    merged: list[list[float]] = []
    for a, w in sorted(pairs):
        if merged and abs(merged[-1][0] - a) <= tol:
            merged[-1][1] += w
        else:
            merged.append([a, w])
    return tuple((a, w) for a, w in merged if w > 0)


def norm_law(e: ChannelEnsemble) -> ScalarNormLaw:
    """Exact law of ``||h||`` for single-input deterministic, finite or Rayleigh ensembles.

    For ``RayleighIID(N, 1, s2)``, ``||h||^2 ~ Gamma(N, s2)`` so
    ``P[||h|| >= a] = e^{-a^2/s2} sum_{k<N} (a^2/s2)^k / k!``.
    """
    if e.shape[1] != 1:
        raise DimensionError("norm laws are defined for single-input (SIMO) channels")
    if isinstance(e, (Deterministic, FiniteSupport)):
        atoms = _merge_atoms([(float(np.linalg.norm(m)), w) for m, w in support(e)])
        return ScalarNormLaw(ccdf=_step_ccdf(atoms), support_bound=max(a for a, _ in atoms),
                             atoms=atoms)
    if isinstance(e, RayleighIID):
        n, s2 = e.out_dim, e.variance
        if s2 == 0:
            return norm_law(Deterministic(np.zeros(e.shape)))
        norm_const = s2 ** n * math.factorial(n - 1)

        def ccdf(a):
            a = np.asarray(a, dtype=float)
            return erlang_ccdf(n, a * a / s2)

        def density(a):
            a = np.asarray(a, dtype=float)
            t = a * a
            out = np.where(a >= 0, 2.0 * a * t ** (n - 1) * np.exp(-t / s2) / norm_const, 0.0)
            return float(out) if out.ndim == 0 else out

        return ScalarNormLaw(ccdf=ccdf, density=density)
    raise NotImplementedError(f"norm law not available for {type(e).__name__}")
