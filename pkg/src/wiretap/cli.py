"""Command-line front end.

``wiretap <command> [--config FILE] [--seed N] [--samples N] [--out FILE] [--r BITS]``

Every command writes one CSV (to ``--out`` or stdout). The CSV starts with
``#`` comment lines recording the tool version, the config hash and the
seed, so the same config and seed reproduce the file byte for byte.
Exit codes: 0 success, 2 config error, 3 failed check, 4 numeric-domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analysis import (check_ordering, counterexample_report, cs_minus_mimome, cs_minus_simome,
                       cs_plus_finite, cs_plus_simome, two_mass_esr,
                       verify_isotropic_optimality)
from .channels import DegradedCascade, Deterministic, FiniteSupport, RayleighIID, is_finite, norm_law
from .config import COMMANDS, ExperimentConfig, load_config, parse_matrix
from .errors import ConfigError, DomainError, InvariantError
from .inputs import GaussianNonPrecoded, isotropic
from .metrics import (SimomeRayleighScenario, finite_support_metric_exact, secrecy_rate_samples,
                      sop_closed_form, sop_from_samples, esr_from_samples, epsr_from_samples)
from .rates import bpsk_mmse, delta_curve, find_convexity_interval, i_bpsk, i_gaussian

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_DOMAIN = 0, 2, 3, 4


class Report:
    """Rows plus header notes and failed checks of one command run."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.rows: list[list] = []
        self.notes: list[tuple[str, object]] = []
        self.failures: list[str] = []

    def note(self, key, value):
        self.notes.append((key, value))

    def check(self, ok: bool, message: str):
        if not ok:
            self.failures.append(message)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v) + 0.0:.12g}"
    if isinstance(v, (tuple, list)):
        return " ".join(fmt(x) for x in v)
    return str(v)


def render_csv(cfg: ExperimentConfig, rep: Report) -> str:
    buf = io.StringIO()
    buf.write(f"# wiretap {__version__}\n")
    buf.write(f"# command {cfg.command}\n")
    buf.write(f"# config_hash {cfg.config_hash}\n")
    buf.write(f"# seed {cfg.seed}\n")
    for k, v in rep.notes:
        buf.write(f"# {k} {fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rep.columns)
    for row in rep.rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


# -- generic metric commands ------------------------------------------------------

def _pair(cfg):
    return cfg.ensemble("main"), cfg.ensemble("eve")


def run_metric(cfg: ExperimentConfig) -> Report:
    main, eve = _pair(cfg)
    d = cfg.require_input()
    rep = Report(["quantity", "parameter", "value", "stderr", "params_hash"])
    kind = cfg.command
    r_grid = None
    if kind == "sop":
        r_grid = cfg.grid("r_grid") if "r_grid" in cfg.raw else (
            np.array([cfg.r]) if cfg.r is not None else None)
        if r_grid is None:
            raise ConfigError("r: the sop command needs --r or r_grid")
        if np.any(r_grid < 0):
            raise DomainError("r: target rates must be nonnegative")
    if is_finite(main) and is_finite(eve):
        rep.note("method", "exact")
        if kind == "sop":
            for r in r_grid:
                rep.rows.append([kind, r, finite_support_metric_exact(main, eve, d, kind, r), 0.0,
                                 cfg.config_hash])
        else:
            rep.rows.append([kind, None, finite_support_metric_exact(main, eve, d, kind), 0.0,
                             cfg.config_hash])
        return rep
    rep.note("method", "monte-carlo")
    rep.note("samples", cfg.samples)
    rates = secrecy_rate_samples(main, eve, d, cfg.samples, cfg.seed, workers=cfg.workers)
    if kind == "sop":
        for r in r_grid:
            est = sop_from_samples(rates, r, cfg.seed)
            rep.rows.append([kind, r, est.value, est.stderr, cfg.config_hash])
    else:
        est = (esr_from_samples if kind == "esr" else epsr_from_samples)(rates, cfg.seed)
        rep.rows.append([kind, None, est.value, est.stderr, cfg.config_hash])
    return rep


def _scalar_law_ok(e):
    return e.shape[1] == 1 and isinstance(e, (Deterministic, FiniteSupport, RayleighIID))


def run_bounds(cfg: ExperimentConfig) -> Report:
    main, eve = _pair(cfg)
    if cfg.input is not None:
        if not isinstance(cfg.input, GaussianNonPrecoded):
            raise ConfigError("input: bounds need a Gaussian covariance K_x")
        k_x = cfg.input.covariance
    else:
        k_x = isotropic(cfg.number("power"), main.shape[1]).covariance
    power = float(np.trace(k_x).real)
    masks = None
    if "masks" in cfg.raw:
        if not isinstance(cfg.raw["masks"], list):
            raise ConfigError("masks: expected a list of matrices")
        masks = [parse_matrix(m, f"masks[{i}]") for i, m in enumerate(cfg.raw["masks"])]
    rep = Report(["quantity", "parameter", "value", "stderr", "params_hash"])
    h = cfg.config_hash
    finite = is_finite(main) and is_finite(eve)
    rep.note("method", "exact" if finite else "monte-carlo")

    d = GaussianNonPrecoded(k_x)
    if finite:
        rep.rows.append(["esr_gaussian", power, finite_support_metric_exact(main, eve, d, "esr"), 0.0, h])
    else:
        est = esr_from_samples(secrecy_rate_samples(main, eve, d, cfg.samples, cfg.seed,
                                                    workers=cfg.workers))
        rep.rows.append(["esr_gaussian", power, est.value, est.stderr, h])
    lo = cs_minus_mimome(main, eve, k_x, masks, n=cfg.samples, seed=cfg.seed, workers=cfg.workers,
                         include_defaults=True)
    rep.rows.append(["lower_mask_search", power, lo.value, lo.stderr, h])
    if finite:
        rep.rows.append(["upper_finite", power, cs_plus_finite(main, eve, k_x), 0.0, h])
    if _scalar_law_ok(main) and _scalar_law_ok(eve):
        split = cs_minus_simome(main, eve, power, n=cfg.samples, seed=cfg.seed, workers=cfg.workers)
        rep.rows.append(["lower_power_split", split.argmax, split.value, split.stderr, h])
        up = cs_plus_simome(norm_law(main), norm_law(eve), power)
        if up.upper_plain is not None:
            rep.rows.append(["upper_density", power, up.upper_plain, 0.0, h])
        rep.rows.append(["upper_ccdf", power, up.upper_ccdf, 0.0, h])
    return rep


def run_ordering(cfg: ExperimentConfig) -> Report:
    main, eve = _pair(cfg)
    kinds = cfg.raw.get("kinds", cfg.raw.get("kind", ["degraded", "uniformly-less-noisy",
                                                       "ccdf-dominance"]))
    if isinstance(kinds, str):
        kinds = [kinds]
    rep = Report(["ordering", "verdict", "witness"])
    for k in kinds:
        v = check_ordering(main, eve, k)
        rep.rows.append([k, v.holds, v.witness])
    return rep


def run_bpsk_curve(cfg: ExperimentConfig) -> Report:
    power = cfg.number("power", 1.0)
    grid = cfg.grid("gamma_grid", np.round(np.arange(0, 201) * 0.05, 12))
    if np.any(grid < 0):
        raise DomainError("gamma_grid: SNRs must be nonnegative")
    curve = delta_curve(power, "bpsk", grid)
    found = find_convexity_interval(curve)
    rep = Report(["gamma", "i_bpsk", "i_gaussian", "delta", "delta_derivative", "mmse"])
    rep.note("power", power)
    rep.note("convex_monotone_interval", found if found else "none")
    rep.rows = [list(r) for r in zip(grid, np.atleast_1d(i_bpsk(power * grid)),
                                      np.atleast_1d(i_gaussian(power * grid)), curve.delta,
                                      curve.derivative, np.atleast_1d(bpsk_mmse(power * grid)))]
    return rep


# -- figure experiments and worked examples ---------------------------------------------------

def run_fig_sop(cfg: ExperimentConfig) -> Report:
    h_norm = cfg.number("h_norm", 5.0)
    n_eve = cfg.number("n_eve", 2, int)
    power = cfg.number("power", 3.0)
    sig = cfg.raw.get("sigma2", [0.25, 1.0, 4.0])
    sigmas = cfg.grid("sigma2", sig) if "sigma2" in cfg.raw else np.asarray(sig)
    r_grid = cfg.grid("r_grid", np.round(np.arange(0, 161) * 0.05, 12))
    if np.any(r_grid < 0):
        raise DomainError("r_grid: target rates must be nonnegative")
    rep = Report(["sigma2", "r", "sop_closed", "sop_mc", "mc_stderr"])
    rep.note("h_norm", h_norm)
    rep.note("n_eve", n_eve)
    rep.note("power", power)
    rep.note("samples", cfg.samples)
    worst = 0.0
    for s2 in sigmas:
        s = SimomeRayleighScenario(h_norm, n_eve, float(s2), power)
        closed = np.atleast_1d(sop_closed_form(s, r_grid))
        rates = secrecy_rate_samples(s.main_ensemble(), s.eve_ensemble(), s.gaussian_input(),
                                     cfg.samples, cfg.seed, workers=cfg.workers)
        for r, c in zip(r_grid, closed):
            est = sop_from_samples(rates, r, cfg.seed)
            # Binomial spread under the closed-form value; stays positive where p-hat is 0 or 1.
            se0 = math.sqrt(c * (1.0 - c) / cfg.samples)
            if se0 > 0:
                worst = max(worst, abs(est.value - c) / se0)
            elif est.value != c:
                worst = math.inf
            rep.rows.append([s2, r, c, est.value, est.stderr])
    rep.note("max_abs_z", worst)
    return rep


def run_fig_esr(cfg: ExperimentConfig) -> Report:
    h0 = cfg.number("h0", 3.0)
    power = cfg.number("power", 1.0)
    grid = cfg.grid("g0_grid", np.round(np.arange(0, 81) * 0.25, 12))
    if np.any(grid < 0):
        raise DomainError("g0_grid: SNRs must be nonnegative")
    snr = power * h0
    lower = ((1.0 + snr) / 2.0 ** 0.25) ** 2 - 1.0
    upper = (1.0 + snr) ** 2 - 1.0
    rep = Report(["g0", "esr_gaussian", "esr_bpsk"])
    rep.note("h0", h0)
    rep.note("power", power)
    rep.note("bpsk_window_lower", lower)
    rep.note("bpsk_window_upper", upper)
    for g0 in grid:
        eg, eb = two_mass_esr(h0, float(g0), power)
        rep.rows.append([g0, eg, eb])
    arr = np.array(rep.rows, dtype=float)
    below = arr[arr[:, 0] < h0]
    rep.check(bool(np.all(below[:, 1] >= below[:, 2] - 1e-12)),
              "gaussian ESR below BPSK ESR for some g0 < h0")
    if float(i_bpsk(snr)) > 0.75:
        window = arr[(arr[:, 0] > lower) & (arr[:, 0] < upper)]
        rep.check(window.size > 0 and bool(np.any(window[:, 2] > window[:, 1])),
                  f"BPSK never beats Gaussian inside ({lower:.4g}, {upper:.4g})")
    return rep


def run_counterexample(cfg: ExperimentConfig) -> Report:
    power = cfg.number("power", 3.0)
    resolution = cfg.number("resolution", 101, int)
    r = cfg.r if cfg.r is not None else 0.5
    if resolution < 2:
        raise ConfigError("resolution: need at least 2 points per axis")
    rep_ = counterexample_report(power, resolution, r)
    rep = Report(["a", "beta", "rate1", "rate2", "esr", "sop"])
    rep.note("power", power)
    rep.note("r", r)
    rep.note("max_gaussian_esr", rep_.max_esr)
    rep.note("argmax_a_beta", rep_.argmax_esr)
    rep.note("max_min_rate", rep_.max_min_rate)
    rep.note("min_gaussian_sop", float(rep_.sop.min()))
    rep.note("an_rate", rep_.an_rate)
    rep.note("an_sop", rep_.an_sop)
    for idx in np.ndindex(rep_.a.shape):
        rep.rows.append([rep_.a[idx], rep_.beta[idx], rep_.rate1[idx], rep_.rate2[idx],
                         rep_.esr[idx], rep_.sop[idx]])
    by_name: dict[str, list] = {}
    for v in rep_.violations:
        by_name.setdefault(v[0], []).append(v[1:])
    for name, cases in by_name.items():
        rep.failures.append(f"{name}: {len(cases)} case(s), first {fmt(cases[0])}")
    return rep


def run_isotropic(cfg: ExperimentConfig) -> Report:
    if cfg.ensembles:
        main, eve = _pair(cfg)
        power = cfg.number("power")
    else:
        main = RayleighIID(2, 2, 1.0)
        eve = DegradedCascade(main, RayleighIID(2, 2, 0.5))
        power = cfg.number("power", 2.0)
    r = cfg.r if cfg.r is not None else 0.5
    perturbations = cfg.number("perturbations", 8, int)
    res = verify_isotropic_optimality(main, eve, power, perturbations, n=cfg.samples, seed=cfg.seed,
                                      r=r, workers=cfg.workers)
    rep = Report(["covariance_diag", "esr", "esr_stderr", "sop", "sop_stderr"])
    rep.note("power", power)
    rep.note("r", r)
    rep.note("samples", cfg.samples)
    for row in res.rows:
        rep.rows.append([row["diag"], row["esr"], row["esr_stderr"], row["sop"], row["sop_stderr"]])
    rep.check(res.esr_optimal, "a perturbed covariance beats the isotropic ESR")
    rep.check(res.sop_optimal is not False, "a perturbed covariance beats the isotropic SOP")
    return rep


RUNNERS = {
    "sop": run_metric, "esr": run_metric, "epsr": run_metric,
    "bounds": run_bounds, "ordering": run_ordering, "bpsk-curve": run_bpsk_curve,
    "fig-sop": run_fig_sop, "fig-esr": run_fig_esr, "counterexample": run_counterexample,
    "isotropic-check": run_isotropic,
}


def run(cfg: ExperimentConfig) -> tuple[str, list[str]]:
    """Execute ``cfg`` and return the CSV text and the list of failed checks."""
    rep = RUNNERS[cfg.command](cfg)
    return render_csv(cfg, rep), rep.failures


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wiretap", description="Wiretap secrecy-metric experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="YAML or JSON experiment file")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--r", type=float, help="target secrecy rate in bits")
    p.add_argument("--workers", type=int, help="threads for Monte Carlo batches")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, seed=args.seed, samples=args.samples,
                          out=args.out, r=args.r, workers=args.workers)
        text, failures = run(cfg)
        if cfg.out:
            out = Path(cfg.out)
            try:
                out.write_text(text)
            except OSError as exc:
                raise ConfigError(f"{out}: cannot write output ({exc.strerror or exc})") from exc
        else:
            sys.stdout.write(text)
    except (ConfigError, InvariantError, NotImplementedError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    for f in failures:
        print(f"FAIL {f}", file=sys.stderr)
    return EXIT_CHECK if failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
