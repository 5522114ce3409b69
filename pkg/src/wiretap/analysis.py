"""ESR bounds, channel-ordering checks, covariance optimality checks and the
two-antenna artificial-noise counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy import integrate, optimize

from .channels import (ChannelEnsemble, DegradedCascade, Deterministic, FiniteSupport,
                       RayleighIID, ScalarNormLaw, is_finite, norm_law, support)
from .errors import ConfigError, NotPSDError
from .inputs import (BpskScalar, GaussianNonPrecoded, GaussianWithMask, check_psd,
                     counterexample_an_input, isotropic)
from .metrics import (DEFAULT_BATCH, esr_from_samples, finite_support_metric_exact,
                      joint_support, map_joint_batches, secrecy_rate_samples, sop_from_samples)
from .numkernel import LN2, RngStream, as_complex_matrix, logdet_i_plus_akah
from .rates import delta_curve, find_convexity_interval, masked_gaussian_secrecy_rate

MATCH_ATOL = 1e-12


@dataclass(frozen=True)
class BoundEstimate:
    """A bound value with its Monte Carlo standard error (0 when exact) and argmax."""

    value: float
    stderr: float
    argmax: object = None
    n_samples: int = 0


@dataclass(frozen=True)
class EsrBounds:
    lower: Optional[float]
    upper: float
    upper_plain: Optional[float] = None
    upper_ccdf: Optional[float] = None
    lower_stderr: float = 0.0
    search: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower is not None and self.lower > self.upper + 1e-9:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


@dataclass(frozen=True)
class OrderingVerdict:
    kind: str
    holds: Literal["yes", "no", "undecided"]
    witness: object = None

    def __post_init__(self):
        if self.holds == "no" and self.witness is None:
            raise ValueError("a negative verdict needs a witness")


# -- lower bound: information signal plus Gaussian mask ------------------------

def default_masks(k_x: np.ndarray) -> list[np.ndarray]:
    """``0``, ``K_x / 2``, ``K_x`` and each eigen-direction ``lambda_i v_i v_i^H`` of ``K_x``."""
    lam, vec = np.linalg.eigh(k_x)
    masks = [np.zeros_like(k_x), k_x / 2.0, k_x.copy()]
    for i, l in enumerate(lam):
        if l > 0:
            v = vec[:, i:i + 1]
            masks.append(l * (v @ v.conj().T))
    return masks


def _check_mask(k_m, k_x):
    try:
        check_psd(k_m, "mask")
        check_psd(k_x - k_m, "K_x - mask")
    except NotPSDError as exc:
        raise ConfigError(f"infeasible mask, need 0 <= K_M <= K_x: {exc}") from exc


def cs_minus_mimome(e_main: ChannelEnsemble, e_eve: ChannelEnsemble, k_x, mask_grid=None, *,
                    n: int = 100_000, seed: int = 0, include_defaults: bool = False,
                    workers: int = 1, batch_size: int = DEFAULT_BATCH) -> BoundEstimate:
    """Lower bound on the maximal ESR at covariance ``K_x``.

    Maximises, over the mask grid, the ESR of the input whose information part
    has covariance ``K_x - K_M`` and whose Gaussian mask has covariance
    ``K_M``. That ESR equals the plain Gaussian ESR at ``K_x`` plus
    ``E[log2 det(I + G K_M G^H) - log2 det(I + H K_M H^H)]``. ``K_M = 0`` is
    always part of the grid. Finite ensembles are evaluated exactly.
    """
    k_x = as_complex_matrix(k_x)
    check_psd(k_x, "K_x")
    masks = [] if mask_grid is not None else default_masks(k_x)
    if mask_grid is not None:
        masks = [as_complex_matrix(m) for m in mask_grid]
        if include_defaults:
            masks += default_masks(k_x)
    if not any(np.allclose(m, 0.0) for m in masks):
        masks.insert(0, np.zeros_like(k_x))
    for m in masks:
        _check_mask(m, k_x)

    if is_finite(e_main) and is_finite(e_eve):
        vals = [finite_support_metric_exact(e_main, e_eve, GaussianWithMask(k_x - m, m), "esr")
                for m in masks]
        best = int(np.argmax(vals))
        return BoundEstimate(vals[best], 0.0, masks[best], 0)

    def fn(h, g):
        return np.stack([masked_gaussian_secrecy_rate(h, g, k_x - m, m) for m in masks], axis=-1)

    samples = map_joint_batches(e_main, e_eve, fn, n, seed, workers=workers, batch_size=batch_size)
    means = [esr_from_samples(samples[:, j], seed) for j in range(len(masks))]
    best = int(np.argmax([m.value for m in means]))
    return BoundEstimate(means[best].value, means[best].stderr, masks[best], n)


# -- upper bounds ---------------------------------------------------------------

def _merge_matrix_atoms(e_main, e_eve):
    atoms: list[list] = []  # [matrix, p_main, p_eve]
    for col, e in ((1, e_main), (2, e_eve)):
        for m, w in support(e):
            for a in atoms:
                if a[0].shape == m.shape and np.allclose(a[0], m, rtol=0.0, atol=MATCH_ATOL):
                    a[col] += w
                    break
            else:
                row = [m, 0.0, 0.0]
                row[col] = w
                atoms.append(row)
    return atoms


def cs_plus_finite(e_main: ChannelEnsemble, e_eve: ChannelEnsemble, k_x) -> float:
    """Upper bound ``sum_A log2 det(I + A K_x A^H) (p_H(A) - p_G(A))^+`` over the union of supports."""
    k_x = as_complex_matrix(k_x)
    total = []
    for a, p_h, p_g in _merge_matrix_atoms(e_main, e_eve):
        excess = p_h - p_g
        if excess > 0:
            total.append(excess * float(logdet_i_plus_akah(a, k_x)) / LN2)
    return math.fsum(total)


def _breakpoints(laws, hi):
    pts = sorted({a for law in laws for a, _ in law.atoms if 0.0 < a < hi})
    return [0.0] + pts + [hi]


def cs_plus_simome(law_main: ScalarNormLaw, law_eve: ScalarNormLaw, power: float,
                   tol: float = 1e-8) -> EsrBounds:
    """Single-input upper bounds on the maximal ESR under power ``power``.

    ``upper_plain`` is ``int log2(1 + P a^2) (p_h(a) - p_g(a))^+ da``, available
    when both norm laws have densities, or both are discrete (atoms compared
    against atoms). ``upper_ccdf`` integrates the largest possible
    mutual-information slope against the CCDF excess:
    ``int 2 P a / ((1 + P a^2) ln 2) (P[||h|| >= a] - P[||g|| >= a])^+ da``.
    """
    hi = max(law_main.truncation_point(), law_eve.truncation_point())
    cuts = _breakpoints((law_main, law_eve), hi)

    def ccdf_integrand(a):
        gap = float(law_main.ccdf(a)) - float(law_eve.ccdf(a))
        return 2.0 * power * a / (1.0 + power * a * a) / LN2 * max(gap, 0.0)

    upper_ccdf = math.fsum(
        integrate.quad(ccdf_integrand, lo, up, epsabs=tol / len(cuts), epsrel=tol, limit=400)[0]
        for lo, up in zip(cuts[:-1], cuts[1:]) if up > lo)

    upper_plain = None
    if law_main.atoms and law_eve.atoms:
        merged: dict[float, list[float]] = {}
        for col, law in ((0, law_main), (1, law_eve)):
            for a, w in law.atoms:
                key = next((k for k in merged if abs(k - a) <= MATCH_ATOL), a)
                merged.setdefault(key, [0.0, 0.0])[col] += w
        upper_plain = math.fsum(math.log2(1.0 + power * a * a) * max(wh - wg, 0.0)
                                for a, (wh, wg) in merged.items())
    elif law_main.density is not None and law_eve.density is not None:
        def plain_integrand(a):
            gap = float(law_main.density(a)) - float(law_eve.density(a))
            return math.log2(1.0 + power * a * a) * max(gap, 0.0)
        upper_plain = integrate.quad(plain_integrand, 0.0, hi, epsabs=tol, epsrel=tol, limit=400)[0]

    variants = [v for v in (upper_plain, upper_ccdf) if v is not None]
    return EsrBounds(lower=None, upper=min(variants), upper_plain=upper_plain,
                     upper_ccdf=upper_ccdf)


def _golden_max(f, lo, hi, xtol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def cs_minus_simome(e_main: ChannelEnsemble, e_eve: ChannelEnsemble, power: float, *,
                    n: int = 100_000, seed: int = 0, workers: int = 1) -> BoundEstimate:
    """Lower bound ``max_{0 <= P <= P_T} E[log2((1 + P_T - P + P||h||^2) / (1 + P_T - P + P||g||^2))]``.

    ``P`` is the power of the information signal; the rest is a Gaussian mask.
    A 32-point scan over ``[0, P_T]`` seeds a golden-section refinement to
    ``1e-4 P_T``. Finite ensembles are exact, others use ``n`` joint draws.
    """
    if e_main.shape[1] != 1 or e_eve.shape[1] != 1:
        raise ConfigError("single-input channels required")

    def norms2(h, g):
        return np.stack([np.sum(np.abs(h) ** 2, axis=(-2, -1)),
                         np.sum(np.abs(g) ** 2, axis=(-2, -1))], axis=-1)

    if is_finite(e_main) and is_finite(e_eve):
        atoms = joint_support(e_main, e_eve)
        pairs = np.array([[np.sum(np.abs(h) ** 2), np.sum(np.abs(g) ** 2)] for h, g, _ in atoms])
        weights = np.array([w for _, _, w in atoms])
        n_used = 0
    else:
        pairs = map_joint_batches(e_main, e_eve, norms2, n, seed, workers=workers)
        weights = None
        n_used = n

    def per_sample(p):
        base = 1.0 + power - p
        return np.log2((base + p * pairs[:, 0]) / (base + p * pairs[:, 1]))

    def objective(p):
        v = per_sample(p)
        return math.fsum(v * weights) if weights is not None else math.fsum(v) / v.size

    scan = np.linspace(0.0, power, 32)
    vals = [objective(p) for p in scan]
    k = int(np.argmax(vals))
    best_p, best_v = float(scan[k]), vals[k]
    if power > 0:
        lo, hi = scan[max(k - 1, 0)], scan[min(k + 1, scan.size - 1)]
        p_ref, v_ref = _golden_max(objective, lo, hi, 1e-4 * power)
        if v_ref > best_v:
            best_p, best_v = p_ref, v_ref
    if weights is None:
        stderr = esr_from_samples(per_sample(best_p)).stderr
    else:
        stderr = 0.0
    return BoundEstimate(best_v, stderr, best_p, n_used)


# -- orderings --------------------------------------------------------------------

def _norm_support(e: ChannelEnsemble) -> tuple[float, float]:
    """(min, max) of ``||h||`` over the support."""
    if isinstance(e, RayleighIID):
        return (0.0, math.inf) if e.variance > 0 else (0.0, 0.0)
    norms = [float(np.linalg.norm(m)) for m, w in support(e) if w > 0]
    return min(norms), max(norms)


def _simo_supported(e):
    return e.shape[1] == 1 and isinstance(e, (Deterministic, FiniteSupport, RayleighIID))


def check_ordering(e_main: ChannelEnsemble, e_eve: ChannelEnsemble, kind: str,
                   grid_points: int = 200) -> OrderingVerdict:
    """Decide ``kind`` in {"degraded", "uniformly-less-noisy", "ccdf-dominance"} where a
    sufficient condition is implemented, else return "undecided".

    * degraded: holds when ``e_eve`` is a cascade built on ``e_main``.
    * uniformly-less-noisy: single-input channels reduce to scalar gains, so it
      holds iff ``min ||h|| >= max ||g||`` over the supports. Cascades over the
      main channel hold structurally.
    * ccdf-dominance: ``P[||h|| >= a] >= P[||g|| >= a]`` on a grid plus all atoms.
    """
    cascade = isinstance(e_eve, DegradedCascade) and e_eve.base is e_main
    if kind == "degraded":
        if cascade:
            return OrderingVerdict(kind, "yes", "eavesdropper is a cascade over the main channel")
        return OrderingVerdict(kind, "undecided")
    if kind == "uniformly-less-noisy":
        if cascade:
            return OrderingVerdict(kind, "yes", "degraded construction")
        if not (_simo_supported(e_main) and _simo_supported(e_eve)):
            return OrderingVerdict(kind, "undecided")
        h_min, _ = _norm_support(e_main)
        _, g_max = _norm_support(e_eve)
        if h_min >= g_max:
            return OrderingVerdict(kind, "yes", (h_min, g_max))
        # Any eavesdropper norm above h_min refutes; report a concrete pair.
        g_w = g_max if math.isfinite(g_max) else 2.0 * h_min + 1.0
        return OrderingVerdict(kind, "no", (h_min, g_w))
    if kind == "ccdf-dominance":
        if not (_simo_supported(e_main) and _simo_supported(e_eve)):
            return OrderingVerdict(kind, "undecided")
        law_h, law_g = norm_law(e_main), norm_law(e_eve)
        hi = max(law_h.truncation_point(), law_g.truncation_point())
        grid = np.linspace(0.0, hi * 1.05 if hi > 0 else 1.0, grid_points)
        atoms = np.array(sorted({a for a, _ in law_h.atoms + law_g.atoms}))
        gap = np.asarray(law_h.ccdf(grid)) - np.asarray(law_g.ccdf(grid))
        atom_gap = (np.asarray(law_h.ccdf(atoms)) - np.asarray(law_g.ccdf(atoms))
                    if atoms.size else np.array([]))
        bad_atoms = atoms[atom_gap < -1e-12] if atoms.size else atoms
        if bad_atoms.size:
            return OrderingVerdict(kind, "no", float(bad_atoms[0]))
        if np.any(gap < -1e-12):
            return OrderingVerdict(kind, "no", float(grid[int(np.argmin(gap))]))
        return OrderingVerdict(kind, "yes")
    raise ConfigError(f"unknown ordering {kind!r}")


# -- isotropic covariance check -------------------------------------------------------

@dataclass(frozen=True)
class IsotropicReport:
    rows: list
    esr_optimal: bool
    sop_optimal: Optional[bool]
    r: Optional[float]


def _is_rayleigh(e):
    if isinstance(e, RayleighIID):
        return True
    return isinstance(e, DegradedCascade) and _is_rayleigh(e.base) and _is_rayleigh(e.tail)


def verify_isotropic_optimality(e_main: ChannelEnsemble, e_eve: ChannelEnsemble, power: float,
                                perturbations: int = 8, *, n: int = 100_000, seed: int = 0,
                                r: Optional[float] = None, workers: int = 1) -> IsotropicReport:
    """Compare ``(P/N_A) I`` against random diagonal covariances of the same trace.

    All covariances are evaluated on the same channel draws. The isotropic
    input counts as optimal when no competitor beats it by more than three
    combined standard errors, in ESR and (when ``r`` is given) in SOP.
    """
    if not (_is_rayleigh(e_main) and _is_rayleigh(e_eve)):
        raise ConfigError("isotropic check is defined for Rayleigh ensembles only")
    n_a = e_main.shape[1]
    covs = [isotropic(power, n_a).covariance]
    if n_a > 1:
        gen = RngStream(seed, 2 ** 32).generator
        for _ in range(perturbations):
            covs.append(np.diag(power * gen.dirichlet(np.ones(n_a))).astype(complex))

    rows = []
    for k in covs:
        rates = secrecy_rate_samples(e_main, e_eve, GaussianNonPrecoded(k), n, seed, workers=workers)
        esr = esr_from_samples(rates, seed)
        sop = sop_from_samples(rates, r, seed) if r is not None else None
        rows.append({"diag": np.real(np.diag(k)).tolist(), "esr": esr.value, "esr_stderr": esr.stderr,
                     "sop": sop.value if sop else None, "sop_stderr": sop.stderr if sop else None})
    iso = rows[0]
    esr_ok, sop_ok = True, (True if r is not None else None)
    for row in rows[1:]:
        se = math.hypot(iso["esr_stderr"], row["esr_stderr"])
        row["beats_esr"] = row["esr"] > iso["esr"] + 3.0 * se
        esr_ok &= not row["beats_esr"]
        if r is not None:
            se = math.hypot(iso["sop_stderr"], row["sop_stderr"])
            row["beats_sop"] = row["sop"] < iso["sop"] - 3.0 * se
            sop_ok &= not row["beats_sop"]
    return IsotropicReport(rows, esr_ok, sop_ok, r)


# -- counterexample -----------------------------------------------------------------

def counterexample_channels() -> tuple[Deterministic, FiniteSupport]:
    """``h = (1, 0)``; ``g`` is ``(+1, 1)`` or ``(-1, 1)`` with probability 1/2 each."""
    return (Deterministic([[1.0, 0.0]]),
            FiniteSupport([[[1.0, 1.0]], [[-1.0, 1.0]]], [0.5, 0.5]))


@dataclass
class CounterexampleReport:
    power: float
    r: float
    a: np.ndarray
    beta: np.ndarray
    rate1: np.ndarray
    rate2: np.ndarray
    esr: np.ndarray
    sop: np.ndarray
    an_rate: float
    an_sop: float
    violations: list = field(default_factory=list)

    @property
    def max_esr(self) -> float:
        return float(self.esr.max())

    @property
    def argmax_esr(self) -> tuple[float, float]:
        i = np.unravel_index(int(np.argmax(self.esr)), self.esr.shape)
        return float(self.a[i]), float(self.beta[i])

    @property
    def max_min_rate(self) -> float:
        return float(np.minimum(self.rate1, self.rate2).max())

    @property
    def passed(self) -> bool:
        return not self.violations


def counterexample_report(power: float = 3.0, resolution: int = 101, r: float = 0.5) -> CounterexampleReport:
    """Sweep every feasible two-antenna Gaussian covariance ``[[a, b], [b*, P - a]]``.

    Only ``beta = Re(b)`` enters the rates, so ``b`` is real on a grid of
    ``resolution`` values in ``[-sqrt(a(P-a)), sqrt(a(P-a))]`` for each of
    ``resolution`` values of ``a``. Checks that the ESR and ``min(R1, R2)`` are
    never positive, so the SOP is at least 1/2 for ``r > 0``, and evaluates the
    artificial-noise input whose rate is ``log2(1 + P^2 / (4 + 4P))``.
    """
    if power <= 0:
        raise ConfigError("power must be positive")
    h, g_ens = counterexample_channels()
    g1, g2 = g_ens.points
    a = np.repeat(np.linspace(0.0, power, resolution)[:, None], resolution, axis=1)
    frac = np.linspace(-1.0, 1.0, resolution)[None, :]
    beta = frac * np.sqrt(np.clip(a * (power - a), 0.0, None))
    k = np.zeros(a.shape + (2, 2), dtype=complex)
    k[..., 0, 0] = a
    k[..., 1, 1] = power - a
    k[..., 0, 1] = beta
    k[..., 1, 0] = beta

    def quad(v):
        return np.einsum("i,...ij,j->...", v.ravel().conj(), k, v.ravel()).real

    bob = np.log2(1.0 + quad(h.matrix))
    rate1 = bob - np.log2(1.0 + quad(g1))
    rate2 = bob - np.log2(1.0 + quad(g2))
    esr = 0.5 * (rate1 + rate2)
    sop = 0.5 * (rate1 < r) + 0.5 * (rate2 < r)

    an = counterexample_an_input(power)
    an_rate = finite_support_metric_exact(h, g_ens, an, "esr")
    an_sop = finite_support_metric_exact(h, g_ens, an, "sop", r)

    rep = CounterexampleReport(power, r, a, beta, rate1, rate2, esr, sop, an_rate, an_sop)
    display = np.log2(1.0 + a) - 0.5 * np.log2((1.0 + power) ** 2 - 4.0 * beta ** 2)
    for name, bad in (("esr > 0", esr > 0.0),
                      ("min(R1, R2) > 0", np.minimum(rate1, rate2) > 0.0),
                      ("esr differs from closed form", np.abs(esr - display) > 1e-9),
                      ("sop < 1/2", (sop < 0.5) if r > 0 else np.zeros_like(esr, dtype=bool))):
        for i in zip(*np.nonzero(bad)):
            rep.violations.append((name, float(a[i]), float(beta[i])))
    expected_an = math.log2(1.0 + power ** 2 / (4.0 + 4.0 * power))
    if abs(an_rate - expected_an) > 1e-9:
        rep.violations.append(("artificial-noise rate", an_rate, expected_an))
    if r < an_rate and an_sop != 0.0:
        rep.violations.append(("artificial-noise sop", an_sop, 0.0))
    return rep


# -- two-mass construction showing no input is universally ESR-optimal ----------------

@dataclass(frozen=True)
class DichotomyReplay:
    interval: tuple
    gamma1: float
    gamma2: float
    gamma_bar: float
    gamma_star: float
    h0_sq: float
    esr_p: float
    esr_q: float
    main: Deterministic
    eve: FiniteSupport


def esr_dichotomy_replay(power: float = 1.0, q_kind: str = "bpsk",
                         grid=None) -> Optional[DichotomyReplay]:
    """Build channels on which the Gaussian input ``p`` has a lower ESR than ``q``.

    Finds an interval where ``delta = I_p - I_q`` is strictly convex and
    monotone, takes its endpoints as the two eavesdropper SNRs (equal
    probability) and places the constant main SNR ``h0^2`` so that
    ``delta(h0^2) < (delta(g1) + delta(g2)) / 2``. Returns ``None`` when no
    such interval exists on the grid.
    """
    grid = np.linspace(0.0, 10.0, 201) if grid is None else np.asarray(grid, dtype=float)
    curve = delta_curve(power, q_kind, grid)
    found = find_convexity_interval(curve)
    if found is None:
        return None
    g1, g2, mono = found
    fn = curve.fn
    avg = 0.5 * (float(fn(g1)) + float(fn(g2)))
    g_bar = 0.5 * (g1 + g2)
    g_star = optimize.brentq(lambda t: float(fn(t)) - avg, g1, g2, xtol=1e-14)
    h0_sq = 0.5 * (g_bar + g_star) if mono == "increasing" else 0.5 * (g_bar + g2)

    main = Deterministic([[math.sqrt(h0_sq)]])
    eve = FiniteSupport([[[math.sqrt(g1)]], [[math.sqrt(g2)]]], [0.5, 0.5])
    q_input = BpskScalar(power) if q_kind == "bpsk" else GaussianNonPrecoded([[power]])
    esr_p = finite_support_metric_exact(main, eve, GaussianNonPrecoded([[power]]), "esr")
    esr_q = finite_support_metric_exact(main, eve, q_input, "esr")
    return DichotomyReplay(found, g1, g2, g_bar, g_star, h0_sq, esr_p, esr_q, main, eve)


def two_mass_esr(h0: float, g0: float, power: float = 1.0) -> tuple[float, float]:
    """Exact (Gaussian, BPSK) ESRs for main SNR ``h0`` and eavesdropper SNR 0 or ``g0`` w.p. 1/2."""
    main = Deterministic([[math.sqrt(h0)]])
    eve = FiniteSupport([[[0.0]], [[math.sqrt(g0)]]], [0.5, 0.5])
    return (finite_support_metric_exact(main, eve, GaussianNonPrecoded([[power]]), "esr"),
            finite_support_metric_exact(main, eve, BpskScalar(power), "esr"))
