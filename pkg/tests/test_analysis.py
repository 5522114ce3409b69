import math

import numpy as np
import pytest
from scipy import integrate

from wiretap.analysis import (EsrBounds, OrderingVerdict, check_ordering, counterexample_channels,
                              counterexample_report, cs_minus_mimome, cs_minus_simome,
                              cs_plus_finite, cs_plus_simome, default_masks,
                              esr_dichotomy_replay, two_mass_esr, verify_isotropic_optimality)
from wiretap.channels import DegradedCascade, Deterministic, FiniteSupport, RayleighIID, norm_law
from wiretap.errors import ConfigError
from wiretap.inputs import BpskScalar, GaussianNonPrecoded, GaussianWithMask
from wiretap.metrics import (SimomeRayleighScenario, epsr_closed_form, esr_mc,
                             finite_support_metric_exact, simome_metric_exact)
from wiretap.numkernel import LN2

AN_RATE = math.log2(25 / 16)
# Bounded scalar maximisation of log2(1+a) - 0.5 log2((1+P)^2 - 4a(P-a)) at P = 3.
COUNTEREXAMPLE_SUP_P3 = 0.0963225389707203


def finite_pairs():
    rng = np.random.default_rng(2024)
    pairs = []
    for n_a, n_b, n_e in [(1, 1, 1), (1, 2, 2), (2, 1, 1), (2, 2, 1), (2, 2, 3), (3, 2, 2)]:
        def ens(rows, k):
            pts = [rng.standard_normal((rows, n_a)) + 1j * rng.standard_normal((rows, n_a))
                   for _ in range(k)]
            return FiniteSupport(pts, rng.dirichlet(np.ones(k)))
        main = ens(n_b, 3)
        eve = ens(n_e, 2)
        if n_b == n_e:  # share one atom so the matched-atom path is exercised
            pts = list(eve.points)
            pts[0] = main.points[0]
            eve = FiniteSupport(pts, eve.weights)
        pairs.append((main, eve, np.eye(n_a) * (2.0 / n_a)))
    return pairs


@pytest.mark.parametrize("idx", range(6))
def test_finite_sandwich(idx):
    main, eve, k_x = finite_pairs()[idx]
    lo = cs_minus_mimome(main, eve, k_x)
    up = cs_plus_finite(main, eve, k_x)
    evaluated = [finite_support_metric_exact(main, eve, GaussianWithMask(k_x - m, m), "esr")
                 for m in default_masks(k_x)]
    best = max(evaluated)
    assert lo.stderr == 0.0
    assert lo.value <= best + 1e-12
    assert best <= up + 1e-6


def test_cs_plus_finite_by_hand():
    main = FiniteSupport([[[1.0]], [[2.0]]], [0.5, 0.5])
    eve = FiniteSupport([[[1.0]], [[0.5]]], [0.75, 0.25])
    # only the atom 2 has excess mass 0.5; atom 1 has 0.5 - 0.75 < 0
    assert cs_plus_finite(main, eve, [[1.0]]) == pytest.approx(0.5 * math.log2(5.0))


def test_counterexample_lower_bound_reaches_artificial_noise():
    main, eve = counterexample_channels()
    k_x = np.eye(2) * 1.5
    lo = cs_minus_mimome(main, eve, k_x, [np.diag([0.0, 1.5])])
    assert lo.value == pytest.approx(AN_RATE, abs=1e-12)
    np.testing.assert_allclose(lo.argmax, np.diag([0.0, 1.5]))


def test_mask_feasibility():
    main, eve = counterexample_channels()
    with pytest.raises(ConfigError):
        cs_minus_mimome(main, eve, np.eye(2), [np.eye(2) * 2.0])
    with pytest.raises(ConfigError):
        cs_minus_mimome(main, eve, np.eye(2), [-np.eye(2)])


def test_mask_search_monte_carlo_not_below_plain_gaussian():
    main = RayleighIID(2, 2)
    eve = DegradedCascade(main, RayleighIID(2, 2, 0.5))
    k_x = np.eye(2)
    lo = cs_minus_mimome(main, eve, k_x, n=40_000, seed=3)
    assert lo.stderr > 0 and lo.n_samples == 40_000
    # K_M = 0 is always in the grid, so the bound is at least the plain Gaussian ESR estimate
    g = esr_mc(main, eve, GaussianNonPrecoded(k_x), 40_000, 3)
    assert lo.value >= g.value - 1e-12


def test_simome_upper_bound_equals_epsr_for_constant_main():
    for s2 in (0.25, 1.0, 4.0):
        s = SimomeRayleighScenario(5.0, 2, s2, 3.0)
        b = cs_plus_simome(norm_law(s.main_ensemble()), norm_law(s.eve_ensemble()), 3.0)
        assert b.upper_plain is None  # point mass against a density
        assert b.upper_ccdf == pytest.approx(epsr_closed_form(s), abs=1e-7)


def test_literal_slope_form_is_not_an_upper_bound():
    """Without the 2a Jacobian the single-input bound drops below an achievable ESR."""
    s = SimomeRayleighScenario(5.0, 2, 1.0, 3.0)
    law = norm_law(s.eve_ensemble())
    p = s.power
    literal = integrate.quad(lambda a: p * max(1.0 - law.ccdf(a), 0.0) / (1 + p * a * a) / LN2,
                             0.0, 5.0)[0]
    achievable = simome_metric_exact(s, s.gaussian_input(), "esr")
    assert literal < achievable
    corrected = cs_plus_simome(norm_law(s.main_ensemble()), law, p).upper
    assert corrected >= achievable - 1e-9


def test_simome_sandwich_rayleigh():
    s = SimomeRayleighScenario(1.0, 2, 1.0, 3.0)
    main, eve = s.main_ensemble(), s.eve_ensemble()
    lo = cs_minus_simome(main, eve, s.power, n=100_000, seed=1)
    up = cs_plus_simome(norm_law(main), norm_law(eve), s.power)
    inputs = [BpskScalar(s.power)] + [GaussianWithMask([[p]], [[s.power - p]])
                                      for p in np.linspace(0.0, s.power, 31)] + \
             [GaussianWithMask([[lo.argmax]], [[s.power - lo.argmax]])]
    best = max(simome_metric_exact(s, d, "esr") for d in inputs)
    assert lo.value - 3 * lo.stderr <= best <= up.upper + 1e-6


def test_simome_bounds_finite_laws():
    main = FiniteSupport([[[1.0]], [[3.0]]], [0.5, 0.5])
    eve = FiniteSupport([[[0.5]], [[2.0]]], [0.6, 0.4])
    b = cs_plus_simome(norm_law(main), norm_law(eve), 2.0)
    # all mass of h sits where g has none, so the discrete bound is E log2(1 + P ||h||^2)
    assert b.upper_plain == pytest.approx(0.5 * math.log2(3.0) + 0.5 * math.log2(19.0))
    lo = cs_minus_simome(main, eve, 2.0)
    assert lo.stderr == 0.0
    best = max(finite_support_metric_exact(main, eve, GaussianWithMask([[p]], [[2.0 - p]]), "esr")
               for p in np.linspace(0, 2, 201))
    assert lo.value >= best - 1e-6
    assert lo.value <= b.upper + 1e-9


def test_power_split_with_dominant_eavesdropper_is_zero_at_no_information():
    lo = cs_minus_simome(Deterministic([[1.0]]), Deterministic([[3.0]]), 2.0)
    assert lo.value == pytest.approx(0.0, abs=1e-12)
    assert lo.argmax == pytest.approx(0.0, abs=1e-3)


def test_esr_bounds_invariant():
    with pytest.raises(ValueError):
        EsrBounds(lower=1.0, upper=0.5)
    with pytest.raises(ValueError):
        OrderingVerdict("ccdf-dominance", "no")


def test_ordering_verdicts_on_worked_examples():
    main = FiniteSupport([[[1.0]], [[3.0]]], [0.5, 0.5])
    eve = Deterministic([[2.0]])
    v = check_ordering(main, eve, "uniformly-less-noisy")
    assert v.holds == "no" and v.witness == (1.0, 2.0)
    v = check_ordering(main, eve, "ccdf-dominance")
    assert v.holds == "no" and v.witness == 2.0
    assert check_ordering(main, eve, "degraded").holds == "undecided"


def test_ordering_positive_cases():
    main = RayleighIID(2, 2)
    assert check_ordering(main, DegradedCascade(main, RayleighIID(1, 2)), "degraded").holds == "yes"
    strong = FiniteSupport([[[3.0]], [[4.0]]], [0.5, 0.5])
    weak = FiniteSupport([[[1.0]], [[2.5]]], [0.5, 0.5])
    assert check_ordering(strong, weak, "uniformly-less-noisy").holds == "yes"
    assert check_ordering(strong, weak, "ccdf-dominance").holds == "yes"
    assert check_ordering(RayleighIID(4, 1), RayleighIID(1, 1), "ccdf-dominance").holds == "yes"
    assert check_ordering(RayleighIID(1, 1), RayleighIID(4, 1), "ccdf-dominance").holds == "no"
    assert check_ordering(RayleighIID(2, 2), RayleighIID(2, 2), "ccdf-dominance").holds == "undecided"
    with pytest.raises(ConfigError):
        check_ordering(strong, weak, "stochastic")


def test_isotropic_single_antenna_trivial():
    rep = verify_isotropic_optimality(RayleighIID(2, 1), RayleighIID(1, 1), 1.0, n=2000, r=0.5)
    assert len(rep.rows) == 1 and rep.esr_optimal and rep.sop_optimal
    with pytest.raises(ConfigError):
        verify_isotropic_optimality(Deterministic([[1.0]]), RayleighIID(1, 1), 1.0, n=10)


def test_counterexample_report_holds_for_small_power():
    rep = counterexample_report(0.5, 41)
    assert rep.passed, rep.violations[:3]
    assert rep.max_esr <= 0.0


def test_counterexample_report_p3():
    rep = counterexample_report(3.0, 101, r=0.5)
    assert rep.an_rate == pytest.approx(AN_RATE, abs=1e-9)
    assert rep.an_sop == 0.0
    assert rep.max_min_rate <= 0.0
    assert rep.sop.min() >= 0.5
    a, beta = 1.5, 0.0
    i = np.argmin(np.abs(rep.a[:, 0] - a))
    j = np.argmin(np.abs(rep.beta[i]))
    assert rep.esr[i, j] == pytest.approx(math.log2(2.5) - 2.0, abs=1e-12)
    # The positive-ESR region near a = P_T: the sweep reports it rather than hiding it.
    assert rep.max_esr == pytest.approx(COUNTEREXAMPLE_SUP_P3, abs=1e-4)
    assert rep.max_esr <= COUNTEREXAMPLE_SUP_P3 + 1e-12
    assert {v[0] for v in rep.violations} == {"esr > 0"}


def test_dichotomy_replay():
    rep = esr_dichotomy_replay(1.0, "bpsk", np.linspace(0, 10, 101))
    assert rep.interval[2] == "increasing"
    assert rep.gamma1 < rep.gamma_bar < rep.h0_sq < rep.gamma_star < rep.gamma2
    assert rep.esr_p < rep.esr_q
    assert esr_dichotomy_replay(1.0, "gaussian") is None


def test_two_mass_examples():
    g, b = two_mass_esr(3.0, 12.0)
    assert g == pytest.approx(2.0 - 0.5 * math.log2(13.0), abs=1e-12)
    assert b > 0.25 > g > 0
    g, b = two_mass_esr(3.0, 1.0)
    assert g >= b
