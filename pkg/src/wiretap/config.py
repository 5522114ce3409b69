"""Experiment configuration files (YAML or JSON) for the command-line tool.

Matrices are lists of rows; an entry is a real number, a ``[re, im]`` pair
or a string such as ``"1+2j"``. Ensembles are declared under ``ensembles``
by name; a cascade refers to its base by name, so ``base: main`` shares the
main channel realisation. Every error names the offending field path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .channels import ChannelEnsemble, DegradedCascade, Deterministic, FiniteSupport, RayleighIID
from .errors import ConfigError, WiretapError
from .inputs import (BpskScalar, GaussianNonPrecoded, GaussianWithMask, InputDistribution,
                     PowerBudget, isotropic, validate_input)

COMMANDS = ("sop", "esr", "epsr", "bounds", "ordering", "bpsk-curve", "fig-sop", "fig-esr",
            "counterexample", "isotropic-check")


def load_document(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror or exc})") from exc
    try:
        doc = yaml.safe_load(text)  # YAML is a superset of JSON
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: malformed config: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{p}: top level must be a mapping")
    return doc


def _complex_entry(v, where):
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"{where}: cannot parse {v!r} as a complex number") from None
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number, [re, im] or a string")


def parse_matrix(v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) and r for r in v):
        raise ConfigError(f"{where}: expected a nonempty list of rows")
    width = len(v[0])
    if any(len(r) != width for r in v):
        raise ConfigError(f"{where}: rows have different lengths")
    return np.array([[_complex_entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(v)])


def _get(block: dict, key: str, where: str, kind=float, default=...):
    if key not in block:
        if default is ...:
            raise ConfigError(f"{where}.{key}: required field missing")
        return default
    val = block[key]
    try:
        if kind is int:
            if isinstance(val, bool) or int(val) != val:
                raise ValueError
            return int(val)
        if kind is float:
            if isinstance(val, bool):
                raise ValueError
            out = float(val)
            if not math.isfinite(out):
                raise ValueError
            return out
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}: invalid value {val!r}") from None


def _mapping(v, where):
    if not isinstance(v, dict):
        raise ConfigError(f"{where}: expected a mapping")
    return v


def parse_ensemble(spec, where: str, named: dict) -> ChannelEnsemble:
    spec = _mapping(spec, where)
    kind = spec.get("type")
    try:
        if kind == "deterministic":
            return Deterministic(parse_matrix(spec.get("matrix"), f"{where}.matrix"))
        if kind == "finite":
            pts = spec.get("points")
            if not isinstance(pts, list):
                raise ConfigError(f"{where}.points: expected a list of matrices")
            mats = [parse_matrix(p, f"{where}.points[{i}]") for i, p in enumerate(pts)]
            w = spec.get("weights")
            if w is None:
                w = [1.0 / len(mats)] * len(mats)
            return FiniteSupport(mats, w)
        if kind == "rayleigh":
            return RayleighIID(_get(spec, "out_dim", where, int), _get(spec, "in_dim", where, int),
                               _get(spec, "variance", where, float, 1.0))
        if kind == "degraded":
            base = spec.get("base")
            if isinstance(base, str):
                if base not in named:
                    raise ConfigError(f"{where}.base: unknown ensemble {base!r}")
                base_e = named[base]
            else:
                base_e = parse_ensemble(base, f"{where}.base", named)
            tail = parse_ensemble(spec.get("tail"), f"{where}.tail", named)
            return DegradedCascade(base_e, tail)
    except ConfigError as exc:
        if str(exc).startswith(where):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.type: expected deterministic, finite, rayleigh or degraded, got {kind!r}")


def parse_input(spec, where: str) -> InputDistribution:
    spec = _mapping(spec, where)
    kind = spec.get("type")
    if kind == "gaussian":
        return GaussianNonPrecoded(parse_matrix(spec.get("covariance"), f"{where}.covariance"))
    if kind == "isotropic":
        return isotropic(_get(spec, "power", where), _get(spec, "in_dim", where, int))
    if kind == "bpsk":
        return BpskScalar(_get(spec, "power", where, float, 1.0))
    if kind == "masked":
        return GaussianWithMask(parse_matrix(spec.get("info"), f"{where}.info"),
                                parse_matrix(spec.get("mask"), f"{where}.mask"))
    raise ConfigError(f"{where}.type: expected gaussian, isotropic, bpsk or masked, got {kind!r}")


def parse_grid(v, where: str) -> np.ndarray:
    """A sorted nonempty list, a scalar, or ``{start, stop, step}`` (``stop`` included)."""
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return np.array([float(v)])
    if isinstance(v, dict):
        start, stop, step = (_get(v, k, where) for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise ConfigError(f"{where}: need step > 0 and stop >= start")
        count = int(round((stop - start) / step)) + 1
        return start + step * np.arange(count)
    if isinstance(v, list) and v:
        try:
            arr = np.array([float(x) for x in v])
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: grid entries must be numbers") from None
        if np.any(np.diff(arr) <= 0):
            raise ConfigError(f"{where}: grid must be strictly increasing")
        return arr
    raise ConfigError(f"{where}: expected a number, a nonempty list or {{start, stop, step}}")


@dataclass
class ExperimentConfig:
    command: str
    raw: dict
    seed: int = 0
    samples: int = 100_000
    out: Optional[str] = None
    r: Optional[float] = None
    workers: int = 1
    ensembles: dict = field(default_factory=dict)
    input: Optional[InputDistribution] = None

    def ensemble(self, name: str) -> ChannelEnsemble:
        if name not in self.ensembles:
            raise ConfigError(f"ensembles.{name}: required ensemble missing")
        return self.ensembles[name]

    def require_input(self) -> InputDistribution:
        if self.input is None:
            raise ConfigError("input: required block missing")
        return self.input

    def grid(self, key: str, default=None) -> np.ndarray:
        if key not in self.raw:
            if default is None:
                raise ConfigError(f"{key}: required grid missing")
            return np.asarray(default, dtype=float)
        return parse_grid(self.raw[key], key)

    def number(self, key: str, default=..., kind=float):
        return _get(self.raw, key, "config", kind, default)

    @property
    def config_hash(self) -> str:
        """First 16 hex digits of the SHA-256 of the canonical (sorted-key) JSON of the config.

        The output path and worker count are left out: neither changes the results.
        """
        canon = {k: v for k, v in self.raw.items() if k not in ("out", "workers")}
        blob = json.dumps(canon, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def build_config(command: str, doc: Optional[dict] = None, **overrides: Any) -> ExperimentConfig:
    """Resolve a parsed document plus command-line overrides into a config."""
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown command {command!r}")
    raw = dict(doc or {})
    if "command" in raw and raw["command"] != command:
        raise ConfigError(f"command: config is for {raw['command']!r}, invoked as {command!r}")
    raw["command"] = command
    for k, v in overrides.items():
        if v is not None:
            raw[k] = v
    cfg = ExperimentConfig(command=command, raw=raw)
    cfg.seed = _get(raw, "seed", "config", int, 0)
    if not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError("seed: must fit in an unsigned 64-bit integer")
    cfg.samples = _get(raw, "samples", "config", int, 100_000)
    if cfg.samples < 1:
        raise ConfigError("samples: must be positive")
    cfg.workers = _get(raw, "workers", "config", int, 1)
    cfg.out = raw.get("out")
    if "r" in raw:
        cfg.r = _get(raw, "r", "config")
        if cfg.r < 0:
            raise ConfigError("r: target rate must be nonnegative")

    blocks = raw.get("ensembles", {})
    blocks = _mapping(blocks, "ensembles")
    # Plain ensembles first so cascades can refer to them by name.
    order = sorted(blocks, key=lambda k: isinstance(blocks[k], dict) and blocks[k].get("type") == "degraded")
    for name in order:
        cfg.ensembles[name] = parse_ensemble(blocks[name], f"ensembles.{name}", cfg.ensembles)
    if "input" in raw:
        try:
            cfg.input = parse_input(raw["input"], "input")
            if "power" in raw:
                main = cfg.ensembles.get("main")
                in_dim = main.shape[1] if main is not None else cfg.input.in_dim
                validate_input(cfg.input, PowerBudget(_get(raw, "power", "config")), in_dim)
        except ConfigError as exc:
            if str(exc).startswith("input"):
                raise
            raise ConfigError(f"input: {exc}") from exc
    return cfg


def load_config(command: str, path=None, **overrides) -> ExperimentConfig:
    doc = load_document(path) if path is not None else None
    try:
        return build_config(command, doc, **overrides)
    except ConfigError:
        raise
    except WiretapError as exc:
        raise ConfigError(str(exc)) from exc
