"""Secrecy outage probability (SOP), ergodic secrecy rate (ESR) and ergodic
positive secrecy rate (EPSR).

Monte Carlo estimators work for any ensemble pair; exact evaluators cover
finite supports and the single-input Rayleigh eavesdropper scenario.

Monte Carlo draws are split into fixed-size batches, batch ``b`` using
``RngStream(seed, b)``. Results therefore depend only on ``(seed, n,
batch_size)``, never on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import integrate, stats

from .channels import (ChannelEnsemble, DegradedCascade, Deterministic, RayleighIID,
                       is_finite, joint_sample, support)
from .errors import ConfigError, DomainError
from .inputs import BpskScalar, GaussianNonPrecoded, GaussianWithMask, InputDistribution
from .numkernel import LN2, RngStream, erlang_ccdf
from .rates import i_bpsk, secrecy_rate

MetricKind = Literal["sop", "esr", "epsr"]
DEFAULT_BATCH = 8192


@dataclass(frozen=True)
class MetricEstimate:
    kind: MetricKind
    value: float
    stderr: float
    n_samples: int
    seed: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if self.kind == "sop" and not 0.0 <= self.value <= 1.0:
            raise ValueError("SOP must lie in [0, 1]")


def map_joint_batches(e_main: ChannelEnsemble, e_eve: ChannelEnsemble,
                      fn: Callable[[np.ndarray, np.ndarray], np.ndarray], n: int, seed: int,
                      *, workers: int = 1, batch_size: int = DEFAULT_BATCH) -> np.ndarray:
    """Apply ``fn(H, G)`` to ``n`` joint draws and concatenate the results in batch order."""
    if n < 1:
        raise ConfigError("sample count must be positive")
    n_batches = -(-n // batch_size)

    def run(b):
        size = min(batch_size, n - b * batch_size)
        h, g = joint_sample(e_main, e_eve, RngStream(seed, b), size)
        return np.asarray(fn(h, g))

    if workers > 1 and n_batches > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_batches)))
    else:
        parts = [run(b) for b in range(n_batches)]
    return np.concatenate(parts, axis=0)


def secrecy_rate_samples(e_main, e_eve, d: InputDistribution, n: int, seed: int, *,
                         workers: int = 1, batch_size: int = DEFAULT_BATCH) -> np.ndarray:
    """``n`` i.i.d. instantaneous secrecy rates (bits) of input ``d``."""
    _check_input(e_main, d)
    return map_joint_batches(e_main, e_eve, lambda h, g: secrecy_rate(h, g, d), n, seed,
                             workers=workers, batch_size=batch_size)


def _check_input(e_main, d):
    if isinstance(d, BpskScalar) and e_main.shape[1] != 1:
        raise NotImplementedError("BPSK input is only supported on single-input channels")
    if d.in_dim != e_main.shape[1]:
        raise ConfigError(f"input has {d.in_dim} antennas, channel expects {e_main.shape[1]}")


def _mean_and_stderr(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    mean = math.fsum(x) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def sop_from_samples(rates: np.ndarray, r: float, seed: int = 0) -> MetricEstimate:
    if r < 0:
        raise DomainError("target rate must be nonnegative")
    n = rates.size
    p = int(np.count_nonzero(rates < r)) / n
    return MetricEstimate("sop", p, math.sqrt(p * (1.0 - p) / n), n, seed)


def esr_from_samples(rates: np.ndarray, seed: int = 0) -> MetricEstimate:
    v, se = _mean_and_stderr(rates)
    return MetricEstimate("esr", v, se, rates.size, seed)


def epsr_from_samples(rates: np.ndarray, seed: int = 0) -> MetricEstimate:
    v, se = _mean_and_stderr(np.maximum(rates, 0.0))
    return MetricEstimate("epsr", v, se, rates.size, seed)


def sop_mc(e_main, e_eve, d, r: float, n: int, seed: int, **kw) -> MetricEstimate:
    """Fraction of joint draws whose secrecy rate falls below ``r``."""
    return sop_from_samples(secrecy_rate_samples(e_main, e_eve, d, n, seed, **kw), r, seed)


def esr_mc(e_main, e_eve, d, n: int, seed: int, **kw) -> MetricEstimate:
    return esr_from_samples(secrecy_rate_samples(e_main, e_eve, d, n, seed, **kw), seed)


def epsr_mc(e_main, e_eve, d, n: int, seed: int, **kw) -> MetricEstimate:
    return epsr_from_samples(secrecy_rate_samples(e_main, e_eve, d, n, seed, **kw), seed)


def joint_support(e_main: ChannelEnsemble, e_eve: ChannelEnsemble):
    """Atoms ``(H, G, probability)`` of the joint law of two finite ensembles."""
    if not (is_finite(e_main) and is_finite(e_eve)):
        raise ConfigError("exact evaluation needs finite-support ensembles")
    if e_main.shape[1] != e_eve.shape[1]:
        raise ConfigError("main and eavesdropper channels must share the input dimension")
    if isinstance(e_eve, DegradedCascade) and e_eve.base is e_main:
        return [(h, t @ h, wh * wt) for h, wh in support(e_main) for t, wt in support(e_eve.tail)]
    return [(h, g, wh * wg) for h, wh in support(e_main) for g, wg in support(e_eve)]


def exact_rate_distribution(e_main, e_eve, d) -> tuple[np.ndarray, np.ndarray]:
    """Secrecy-rate atoms and their probabilities for finite ensembles."""
    _check_input(e_main, d)
    atoms = joint_support(e_main, e_eve)
    hs = np.stack([a[0] for a in atoms])
    gs = np.stack([a[1] for a in atoms])
    rates = np.atleast_1d(secrecy_rate(hs, gs, d))
    return rates, np.array([a[2] for a in atoms])


def finite_support_metric_exact(e_main, e_eve, d, kind: MetricKind, r: float = 0.0) -> float:
    """Exact SOP / ESR / EPSR over a finite joint support."""
    rates, w = exact_rate_distribution(e_main, e_eve, d)
    if kind == "esr":
        return math.fsum(w * rates)
    if kind == "epsr":
        return math.fsum(w * np.maximum(rates, 0.0))
    if kind == "sop":
        if r < 0:
            raise DomainError("target rate must be nonnegative")
        return min(1.0, math.fsum(w[rates < r]))
    raise ConfigError(f"unknown metric {kind!r}")


@dataclass(frozen=True)
class SimomeRayleighScenario:
    """Constant main channel of norm ``h_norm``; ``n_eve`` i.i.d. Rayleigh
    eavesdropper coefficients of variance ``sigma2``; transmit power ``power``."""

    h_norm: float
    n_eve: int
    sigma2: float
    power: float

    def __post_init__(self):
        if self.h_norm < 0 or self.sigma2 < 0 or self.power < 0 or self.n_eve < 1:
            raise ConfigError(f"invalid scenario {self}")

    @property
    def main_capacity(self) -> float:
        return math.log2(1.0 + self.power * self.h_norm ** 2)

    def main_ensemble(self) -> Deterministic:
        return Deterministic([[self.h_norm]])

    def eve_ensemble(self) -> RayleighIID:
        return RayleighIID(self.n_eve, 1, self.sigma2)

    def gaussian_input(self) -> GaussianNonPrecoded:
        return GaussianNonPrecoded([[self.power]])


def sop_closed_form(s: SimomeRayleighScenario, r):
    """Minimal SOP of the scenario (Gaussian input at full power).

    Outage happens iff ``||g||^2 >= x_r = (1/P + ||h||^2) / 2^r - 1/P``, and
    ``||g||^2 / sigma2 ~ Gamma(n_eve, 1)``. Vectorised over ``r``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("target rate must be nonnegative")
    cap = s.main_capacity
    if s.power == 0 or s.sigma2 == 0:
        # Rate is the constant cap (no eavesdropper) or 0 (no power).
        rate = 0.0 if s.power == 0 else cap
        out = (rate < r_arr).astype(float)
    else:
        x_r = (1.0 / s.power + s.h_norm ** 2) / np.exp2(r_arr) - 1.0 / s.power
        out = np.where(r_arr > cap, 1.0, erlang_ccdf(s.n_eve, x_r / s.sigma2))
    return float(out) if out.ndim == 0 else out


def epsr_closed_form(s: SimomeRayleighScenario, tol: float = 1e-10) -> float:
    """Maximal EPSR: ``int_0^{log2(1 + P ||h||^2)} (1 - SOP(r)) dr``."""
    cap = s.main_capacity
    if cap == 0.0:
        return 0.0
    val, _ = integrate.quad(lambda r: 1.0 - sop_closed_form(s, r), 0.0, cap,
                            epsabs=tol, epsrel=tol, limit=200)
    return val


def _simome_rate_fn(s: SimomeRayleighScenario, d: InputDistribution) -> Callable:
    """Secrecy rate as a function of ``t = ||g||^2`` for a single-input input ``d``."""
    h2 = s.h_norm ** 2
    if isinstance(d, BpskScalar):
        bob = i_bpsk(d.power * h2)
        return lambda t: bob - i_bpsk(d.power * t)
    if isinstance(d, GaussianNonPrecoded):
        p, m = float(d.covariance[0, 0].real), 0.0
    elif isinstance(d, GaussianWithMask):
        m = float(d.mask[0, 0].real)
        p = float(d.info[0, 0].real) + m
    else:
        raise TypeError(type(d).__name__)
    if d.in_dim != 1:
        raise ConfigError("scenario inputs must be single-antenna")
    bob = math.log1p(p * h2) - math.log1p(m * h2)
    return lambda t: (bob - math.log1p(p * t) + math.log1p(m * t)) / LN2


def simome_metric_exact(s: SimomeRayleighScenario, d: InputDistribution,
                        kind: MetricKind = "esr", tol: float = 1e-11) -> float:
    """ESR or EPSR of any single-antenna input, integrated against the Gamma law of ``||g||^2``."""
    rate = _simome_rate_fn(s, d)
    if s.sigma2 == 0:
        v = rate(0.0)
        return max(v, 0.0) if kind == "epsr" else v
    law = stats.gamma(a=s.n_eve, scale=s.sigma2)
    if kind == "esr":
        f = rate
    elif kind == "epsr":
        def f(t):
            return max(rate(t), 0.0)
    else:
        raise ConfigError(f"unsupported metric {kind!r}")
    hi = law.isf(1e-16)
    pts = [s.h_norm ** 2] if s.h_norm ** 2 < hi else None
    val, _ = integrate.quad(lambda t: f(t) * law.pdf(t), 0.0, hi, points=pts,
                            epsabs=tol, epsrel=tol, limit=400)
    return val
