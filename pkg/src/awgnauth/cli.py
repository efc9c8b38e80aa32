"""Batch experiment runner.

Subcommands: ``construct``, ``verify``, ``bounds``, ``simulate``,
``sweep``.  Every run is configured by dotted ``key = value`` settings,
taken from (in increasing precedence) a config file, positional
``key=value`` overrides, and ``--key value`` flags.

Config grammar (line oriented; ``#`` starts a comment)::

    # full dotted keys anywhere
    base.kind = antipodal
    overlay.gamma = 0.75

    [channel]          # a section header prefixes the keys below
    rho_dec = 0.1
    rho_adv = 1.0

    run.metrics = ["epsilon", "alpha_star"]   # values parse as JSON
    run.trials = 100000                       # bare words stay strings

A file whose first non-blank character is ``{`` is parsed as a JSON
object of (possibly nested) sections instead.

Reports are JSON with sorted keys and no timestamps, so the same config
and master seed reproduce byte-identical output.  ``simulate`` exits 0
iff every estimate with a paired bound is dominated by it (bound plus
three standard errors); usage and validation problems exit 2.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import subprocess
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import basecode as basecode_mod
from . import bounds as bounds_mod
from .adversary import AttackError, AttackSpec
from .authcode import AuthCode, decimate, inject_noise
from .basecode import BaseCode, antipodal_error_probability, make_antipodal_code
from .overlay import (LevelSet, OverlayCode, construct_overlay, verify_overlay)
from .overlay import to_json_dict as overlay_to_json
from .overlay import from_json_dict as overlay_from_json
from .simulate import METRICS, ChannelParams, estimate

OUTPUT_DIR_ENV = "AWGNAUTH_OUTPUT_DIR"
SCHEMA_VERSION = 1
SWEEP_HEADER = ["axis", "metric", "estimate", "ci_lo", "ci_hi", "bound",
                "dominated"]
SWEEPABLE = {
    "channel.rho_adv": "rho_adv", "rho_adv": "rho_adv",
    "auth.rho_delta": "rho_delta", "rho_delta": "rho_delta",
    "auth.delta": "delta", "delta": "delta",
    "base.n": "n", "n": "n",
}


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    """A module error annotated with the pipeline stage that raised it."""


@dataclass(frozen=True)
class ExperimentConfig:
    base_kind: str = "antipodal"
    n: int = 64
    base_messages: int = 8
    base_omega: float = 1.0
    base_null: bool = False
    base_seed: int = 0

    overlay_levels: Any = (0.0, 0.5)     # tuple of floats, or "auto"
    overlay_auto_count: int = 2
    gamma: Any = 0.75                    # float, or "p/q" string
    overlay_counts: tuple[int, ...] | None = None
    overlay_rates: tuple[float, ...] | None = None
    overlay_max_per_level: int | None = None
    overlay_seed: int = 0

    rho_delta: float = 1.0
    delta: float = 0.2
    t_zero: bool = False
    auth_enforce: bool = True
    auth_seed: int = 0

    mod2_enabled: bool = False
    mod2_agnostic: bool = False
    mod2_target: int | None = None
    mod2_seed: int = 0

    rho_dec: float = 0.1
    rho_adv: float = 0.0
    power_budget: float | None = None

    attack: str = "none"
    weight_scale: float | None = None

    metrics: tuple[str, ...] = ("epsilon",)
    trials: int = 100_000
    seed: int = 0
    threads: int = 1
    max_pairs: int = 20
    message: int | None = None
    detector: bool = True
    out: str | None = None
    trial_log: str | None = None

    def gamma_value(self) -> float | Fraction:
        if isinstance(self.gamma, str):
            try:
                return Fraction(self.gamma)
            except (ValueError, ZeroDivisionError) as e:
                raise ConfigError(f"overlay.gamma: cannot parse {self.gamma!r}") from e
        return float(self.gamma)

    def canonical(self) -> dict[str, Any]:
        """Nested plain-data view of the fully resolved config."""
        return {
            "base": {"kind": self.base_kind, "n": self.n,
                     "messages": self.base_messages, "omega": self.base_omega,
                     "null": self.base_null, "seed": self.base_seed},
            "overlay": {"levels": (self.overlay_levels
                                   if isinstance(self.overlay_levels, str)
                                   else list(self.overlay_levels)),
                        "auto_count": self.overlay_auto_count,
                        "gamma": self.gamma,
                        "counts": (None if self.overlay_counts is None
                                   else list(self.overlay_counts)),
                        "rates": (None if self.overlay_rates is None
                                  else list(self.overlay_rates)),
                        "max_per_level": self.overlay_max_per_level,
                        "seed": self.overlay_seed},
            "auth": {"rho_delta": self.rho_delta, "delta": self.delta,
                     "t_zero": self.t_zero, "enforce_bounds": self.auth_enforce,
                     "seed": self.auth_seed},
            "mod2": {"enabled": self.mod2_enabled,
                     "agnostic": self.mod2_agnostic,
                     "target_override": self.mod2_target,
                     "seed": self.mod2_seed},
            "channel": {"rho_dec": self.rho_dec, "rho_adv": self.rho_adv,
                        "power_budget": self.power_budget},
            "attack": {"spec": self.attack, "weight_scale": self.weight_scale},
            "run": {"metrics": list(self.metrics), "trials": self.trials,
                    "seed": self.seed, "threads": self.threads,
                    "max_pairs": self.max_pairs, "message": self.message,
                    "detector": self.detector},
        }


def _as_bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "false", "1", "0",
                                                    "yes", "no"):
        return value.lower() in ("true", "1", "yes")
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _as_int(key: str, value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
    raise ConfigError(f"{key}: expected an integer, got {value!r}")


def _as_float(key: str, value: Any) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{key}: expected a number, got {value!r}")


def _as_opt(cast):
    def parse(key: str, value: Any):
        if value is None or (isinstance(value, str)
                             and value.lower() in ("none", "null", "")):
            return None
        return cast(key, value)
    return parse


def _as_str(key: str, value: Any) -> str:
    return str(value)


def _as_list(cast):
    def parse(key: str, value: Any):
        if isinstance(value, str):
            parts = [p for p in value.replace(",", " ").split() if p]
            return tuple(cast(key, p) for p in parts)
        if isinstance(value, (list, tuple)):
            return tuple(cast(key, v) for v in value)
        return (cast(key, value),)
    return parse


def _as_levels(key: str, value: Any):
    if isinstance(value, str) and value.strip().lower() == "auto":
        return "auto"
    return _as_list(_as_float)(key, value)


def _as_gamma(key: str, value: Any):
    if isinstance(value, str) and "/" in value:
        return value.strip()
    return _as_float(key, value)


_KEYS: dict[str, tuple[str, Any]] = {
    "base.kind": ("base_kind", _as_str),
    "base.n": ("n", _as_int),
    "n": ("n", _as_int),
    "base.messages": ("base_messages", _as_int),
    "base.omega": ("base_omega", _as_float),
    "base.null": ("base_null", _as_bool),
    "base.seed": ("base_seed", _as_int),
    "overlay.levels": ("overlay_levels", _as_levels),
    "overlay.auto_count": ("overlay_auto_count", _as_int),
    "overlay.gamma": ("gamma", _as_gamma),
    "gamma": ("gamma", _as_gamma),
    "overlay.counts": ("overlay_counts", _as_opt(_as_list(_as_int))),
    "overlay.rates": ("overlay_rates", _as_opt(_as_list(_as_float))),
    "overlay.max_per_level": ("overlay_max_per_level", _as_opt(_as_int)),
    "overlay.seed": ("overlay_seed", _as_int),
    "auth.rho_delta": ("rho_delta", _as_float),
    "rho_delta": ("rho_delta", _as_float),
    "auth.delta": ("delta", _as_float),
    "delta": ("delta", _as_float),
    "auth.t_zero": ("t_zero", _as_bool),
    "auth.enforce_bounds": ("auth_enforce", _as_bool),
    "auth.seed": ("auth_seed", _as_int),
    "mod2.enabled": ("mod2_enabled", _as_bool),
    "mod2.agnostic": ("mod2_agnostic", _as_bool),
    "mod2.target_override": ("mod2_target", _as_opt(_as_int)),
    "mod2.seed": ("mod2_seed", _as_int),
    "channel.rho_dec": ("rho_dec", _as_float),
    "rho_dec": ("rho_dec", _as_float),
    "channel.rho_adv": ("rho_adv", _as_float),
    "rho_adv": ("rho_adv", _as_float),
    "channel.power_budget": ("power_budget", _as_opt(_as_float)),
    "attack.spec": ("attack", _as_str),
    "attack": ("attack", _as_str),
    "attack.weight_scale": ("weight_scale", _as_opt(_as_float)),
    "run.metrics": ("metrics", _as_list(_as_str)),
    "metrics": ("metrics", _as_list(_as_str)),
    "run.trials": ("trials", _as_int),
    "trials": ("trials", _as_int),
    "run.seed": ("seed", _as_int),
    "seed": ("seed", _as_int),
    "run.threads": ("threads", _as_int),
    "run.max_pairs": ("max_pairs", _as_int),
    "run.message": ("message", _as_opt(_as_int)),
    "run.detector": ("detector", _as_bool),
    "run.out": ("out", _as_opt(_as_str)),
    "run.trial_log": ("trial_log", _as_opt(_as_str)),
}


def _flatten(prefix: str, obj: Any, into: dict[str, Any]) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, into)
    else:
        into[prefix] = obj


def _parse_value(text: str) -> Any:
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse the line-oriented config grammar into a flat dotted-key map,
    reporting errors with line numbers."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{source}: invalid JSON config: {e}") from e
        flat: dict[str, Any] = {}
        _flatten("", data, flat)
        return flat
    flat = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(
                f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        full = f"{section}.{key}" if section and "." not in key else key
        flat[full] = _parse_value(value)
    return flat


def apply_settings(cfg: ExperimentConfig,
                   settings: dict[str, Any]) -> ExperimentConfig:
    updates: dict[str, Any] = {}
    for key, raw in settings.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        fieldname, cast = _KEYS[key]
        updates[fieldname] = cast(key, raw)
    return replace(cfg, **updates)


def parse_config(path: str | None = None,
                 overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Build a validated config from an optional file plus ``key=value``
    override strings."""
    cfg = ExperimentConfig()
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path!r}: {e}") from e
        cfg = apply_settings(cfg, parse_config_text(text, source=path))
    flat: dict[str, Any] = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        flat[key.strip()] = _parse_value(value)
    cfg = apply_settings(cfg, flat)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.base_kind not in ("antipodal", "gaussian"):
        raise ConfigError(f"base.kind must be antipodal or gaussian, "
                          f"got {cfg.base_kind!r}")
    if cfg.n < 2:
        raise ConfigError("base.n must be at least 2")
    if isinstance(cfg.overlay_levels, str):
        if cfg.overlay_levels != "auto":
            raise ConfigError("overlay.levels must be a list or 'auto'")
        if cfg.overlay_auto_count < 1:
            raise ConfigError("overlay.auto_count must be positive")
    else:
        for k in cfg.overlay_levels:
            if not 0.0 <= k < 1.0:
                raise ConfigError(f"levels must lie in [0,1), got {k}")
        if list(cfg.overlay_levels) != sorted(set(cfg.overlay_levels)):
            raise ConfigError("levels must be strictly increasing")
    g = cfg.gamma_value()
    if not Fraction(1, 2) < Fraction(g) < 1:
        raise ConfigError(
            f"overlay.gamma must lie strictly between 1/2 and 1, got {g}")
    if not 0.0 < cfg.delta < 1.0:
        raise ConfigError("auth.delta must lie in (0,1)")
    if cfg.rho_delta <= 0.0:
        raise ConfigError("auth.rho_delta must be positive")
    if cfg.rho_dec <= 0.0:
        raise ConfigError("channel.rho_dec must be positive")
    if cfg.rho_adv < 0.0:
        raise ConfigError("channel.rho_adv must be nonnegative")
    if cfg.trials < 0:
        raise ConfigError("run.trials must be nonnegative")
    if cfg.threads < 1:
        raise ConfigError("run.threads must be positive")
    for metric in cfg.metrics:
        if metric not in METRICS:
            raise ConfigError(f"run.metrics: unknown metric {metric!r}; "
                              f"choose from {METRICS}")
    try:
        AttackSpec.parse(cfg.attack)
    except AttackError as e:
        raise ConfigError(f"attack.spec: {e}") from e


def _stage(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, RuntimeError) as e:
        raise StageError(f"{stage}: {e}") from e


def build_base(cfg: ExperimentConfig) -> BaseCode:
    if cfg.base_kind == "antipodal":
        code = _stage("base", make_antipodal_code, cfg.n, cfg.base_omega)
        if cfg.base_null:
            rows = np.vstack([code.codewords, np.zeros((1, cfg.n))])
            code = _stage("base", BaseCode, rows, null_id=2)
        return code
    return _stage("base", basecode_mod.make_random_gaussian_code,
                  cfg.n, cfg.base_messages, cfg.base_omega, cfg.base_seed,
                  null_message=cfg.base_null)


def resolve_levels(cfg: ExperimentConfig) -> LevelSet:
    if not isinstance(cfg.overlay_levels, str):
        return _stage("overlay", LevelSet, tuple(cfg.overlay_levels))
    opt = _stage("bounds", bounds_mod.optimal_levels, cfg.overlay_auto_count,
                 float(cfg.gamma_value()), cfg.rho_delta, cfg.rho_dec,
                 cfg.delta)
    if not opt.valid:
        raise StageError("overlay: optimal levels fall outside [0,1) for "
                         f"these powers: {opt.levels}")
    return _stage("overlay", LevelSet, tuple(sorted(opt.levels)))


def build_overlay(cfg: ExperimentConfig, base: BaseCode) -> OverlayCode:
    levels = resolve_levels(cfg)
    counts = cfg.overlay_counts
    if counts is None and cfg.overlay_rates is None:
        counts = (base.message_count,) + (1,) * (len(levels) - 1)
    code = _stage("overlay", construct_overlay, cfg.n, levels,
                  cfg.gamma_value(),
                  rates_per_level=(list(cfg.overlay_rates)
                                   if cfg.overlay_rates else None),
                  counts_per_level=list(counts) if counts else None,
                  max_messages_per_level=cfg.overlay_max_per_level,
                  seed=cfg.overlay_seed)
    if code.message_count != base.message_count:
        raise StageError(
            f"overlay: message count {code.message_count} does not match the "
            f"base code's {base.message_count}; set overlay.counts so their "
            f"product equals the base message count")
    return code


def build_auth(cfg: ExperimentConfig, base: BaseCode,
               overlay: OverlayCode) -> AuthCode:
    code = _stage("inject", inject_noise, base, overlay, cfg.rho_delta,
                  cfg.delta, cfg.auth_seed, t_zero=cfg.t_zero,
                  enforce_bounds=cfg.auth_enforce)
    if cfg.mod2_enabled:
        code = _stage("decimate", decimate, code, cfg.rho_dec, cfg.mod2_seed,
                      rho_adv=(None if cfg.mod2_agnostic else cfg.rho_adv),
                      adversary_agnostic=cfg.mod2_agnostic,
                      target_size_override=cfg.mod2_target)
    return code


def build_pipeline(cfg: ExperimentConfig) -> AuthCode:
    base = build_base(cfg)
    overlay = build_overlay(cfg, base)
    return build_auth(cfg, base, overlay)


def _base_epsilon_closed_form(cfg: ExperimentConfig, noise: float) -> float:
    if cfg.base_kind == "antipodal" and not cfg.base_null:
        return antipodal_error_probability(cfg.n, cfg.base_omega, noise)
    return math.nan


def bounds_payload(cfg: ExperimentConfig, code: AuthCode) -> dict[str, Any]:
    eps_h = _base_epsilon_closed_form(cfg, cfg.rho_dec + cfg.rho_delta)
    return _stage("bounds", bounds_mod.bounds_report, cfg.n,
                  code.overlay.level_set, float(cfg.gamma_value()), cfg.delta,
                  cfg.rho_delta, cfg.rho_dec, code.base.power,
                  code.base.rate, eps_h,
                  rho_adv=cfg.rho_adv,
                  omega_wrapped=code.power, t_zero=cfg.t_zero,
                  adversary_agnostic=cfg.mod2_agnostic)


def _metric_bound(cfg: ExperimentConfig, code: AuthCode,
                  bounds: dict[str, Any], metric: str
                  ) -> tuple[float | None, str | None]:
    def pick(key: str, label: str) -> tuple[float | None, str | None]:
        value = bounds.get(key)
        if isinstance(value, float) and math.isfinite(value):
            return value, label
        return None, None

    if metric == "epsilon":
        return pick("injected_error_bound",
                    "decode error after noise injection")
    if metric == "false_alarm":
        terms = bounds.get("injected_error_terms", {})
        value = terms.get("detector")
        if isinstance(value, float) and math.isfinite(value):
            return value, "detector false-alarm concentration"
        return None, None
    if metric == "alpha_star":
        return pick("targeted_false_auth_bound",
                    "targeted false authentication after noise injection")
    if metric == "alpha" and code.decimated is not None:
        return pick("decimated_false_auth_bound",
                    "false authentication after decimation")
    return None, None


def run_estimates(cfg: ExperimentConfig, code: AuthCode,
                  bounds: dict[str, Any]) -> list[dict[str, Any]]:
    channel = ChannelParams(rho_dec=cfg.rho_dec, rho_adv=cfg.rho_adv,
                            power_budget=cfg.power_budget)
    attack = AttackSpec.parse(cfg.attack)
    rows = []
    for metric in cfg.metrics:
        kwargs: dict[str, Any] = dict(
            trials=cfg.trials, seed=cfg.seed, threads=cfg.threads,
            detector=cfg.detector, max_pairs=cfg.max_pairs,
            trial_log=cfg.trial_log)
        if metric in ("epsilon", "false_alarm"):
            kwargs["message"] = cfg.message
        elif metric == "genuine_acceptance":
            if cfg.message is None:
                raise ConfigError("run.message is required for the "
                                  "genuine_acceptance metric")
            kwargs["message"] = cfg.message
        else:
            if attack.kind == "targeted" and cfg.message is not None:
                kwargs["pairs"] = [(cfg.message, attack.target)]
            elif attack.kind == "impersonation":
                null = code.base.null_id
                if null is None:
                    raise ConfigError("impersonation needs base.null = true")
                kwargs["pairs"] = ([(null, attack.target)]
                                   if attack.target is not None else None)
            if attack.kind != "none":
                kwargs["attack"] = replace(attack,
                                           weight_scale=cfg.weight_scale)
        report = _stage("simulate", estimate, code, channel, metric, **kwargs)
        bound, label = _metric_bound(cfg, code, bounds, metric)
        if bound is not None:
            report = report.with_bound(bound, label)
        rows.append(report.to_json_dict())
    return rows


def _version_string() -> str:
    try:
        from importlib.metadata import version
        base = version("awgnauth")
    except Exception:
        base = "0.0.0"
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--tags", "--dirty"],
            capture_output=True, text=True, timeout=10,
            cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0 and out.stdout.strip():
            return f"{base}+g{out.stdout.strip()}"
    except OSError:
        pass
    return base


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(cfg.canonical(), sort_keys=True,
                       separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _sanitize(obj: Any) -> Any:
    """Make a payload strictly JSON serialisable and deterministic."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def summarize_code(code: AuthCode) -> dict[str, Any]:
    overlay = code.overlay
    return {
        "base": {"n": code.base.n, "messages": code.base.message_count,
                 "power": code.base.power, "rate": code.base.rate,
                 "null_id": code.base.null_id},
        "overlay": {"n": overlay.n, "ell": overlay.ell,
                    "gamma": overlay.gamma,
                    "levels": list(overlay.level_set.levels),
                    "messages": overlay.message_count,
                    "radices": list(overlay.radices or ()),
                    "max_overlap": overlay.max_overlap,
                    "attempts": overlay.attempts},
        "auth": {"power": code.power, "rate": code.rate,
                 "threshold": code.threshold, "delta": code.delta,
                 "rho_delta": code.rho_delta, "t_zero": code.t_zero,
                 "attempts": code.attempts,
                 "decimated": (None if code.decimated is None
                               else len(code.decimated)),
                 "decimation_feasible": (None if code.decimation_info is None
                                         else code.decimation_info.feasible)},
    }


def make_report(cfg: ExperimentConfig, *, estimates: bool = True
                ) -> dict[str, Any]:
    code = build_pipeline(cfg)
    bounds = bounds_payload(cfg, code)
    rows = (run_estimates(cfg, code, bounds)
            if estimates and cfg.trials > 0 else [])
    checks = [r["dominated"] for r in rows if "dominated" in r]
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": _version_string(),
        "config_hash": config_hash(cfg),
        "config": cfg.canonical(),
        "code": summarize_code(code),
        "bounds": bounds,
        "estimates": rows,
        "pass": all(checks) if checks else True,
    }
    return _sanitize(report)


def resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def emit_json(payload: dict[str, Any], out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True,
                      allow_nan=False) + "\n"
    path = resolve_out(out)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_construct(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    code = build_pipeline(cfg)
    from .authcode import to_json_dict as auth_to_json
    payload = _sanitize({
        "schema_version": SCHEMA_VERSION,
        "version": _version_string(),
        "config_hash": config_hash(cfg),
        "config": cfg.canonical(),
        "summary": summarize_code(code),
        "base": basecode_mod.to_json_dict(code.base),
        "overlay": overlay_to_json(code.overlay),
        "auth": auth_to_json(code, "inline", "inline"),
    })
    emit_json(payload, cfg.out or args.out)
    return 0


def cmd_verify(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    if args.code:
        with open(args.code) as fh:
            data = json.load(fh)
        overlay = _stage("overlay", overlay_from_json,
                         data.get("overlay", data))
    else:
        overlay = build_overlay(cfg, build_base(cfg))
    report = verify_overlay(overlay)
    payload = _sanitize({
        "schema_version": SCHEMA_VERSION,
        "version": _version_string(),
        "passed": report.passed,
        "ell": report.ell,
        "max_overlap_allowed": report.max_overlap_allowed,
        "violations": report.violations,
        "messages": overlay.message_count,
    })
    emit_json(payload, cfg.out or args.out)
    return 0 if report.passed else 1


def cmd_bounds(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    report = make_report(cfg, estimates=False)
    emit_json(report, cfg.out or args.out)
    return 0


def cmd_simulate(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    report = make_report(cfg)
    emit_json(report, cfg.out or args.out)
    return 0 if report["pass"] else 1


def cmd_sweep(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    if args.axis not in SWEEPABLE:
        raise ConfigError(
            f"axis {args.axis!r} is not sweepable; choose from "
            f"{sorted(k for k in SWEEPABLE if '.' in k)}")
    fieldname = SWEEPABLE[args.axis]
    values = []
    if args.values.strip():
        values = [_parse_value(v) for v in args.values.split(",") if v.strip()]
    lines = [",".join(SWEEP_HEADER)]
    worst = True
    for value in values:
        cast = _as_int if fieldname == "n" else _as_float
        sub = replace(cfg, **{fieldname: cast(args.axis, value)})
        validate_config(sub)
        report = make_report(sub)
        for row in report["estimates"]:
            bound = row.get("bound")
            dominated = row.get("dominated")
            if dominated is False:
                worst = False
            lines.append(",".join([
                repr(value), row["metric"],
                f"{row['estimate']:.10g}",
                f"{row['ci_lo']:.10g}", f"{row['ci_hi']:.10g}",
                "" if bound is None else f"{bound:.10g}",
                "" if dominated is None else str(dominated).lower(),
            ]))
    text = "\n".join(lines) + "\n"
    path = resolve_out(cfg.out or args.out)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
    return 0 if worst else 1


def _split_overrides(extras: list[str]) -> list[str]:
    """Turn ['--channel.rho_adv', '1', 'run.trials=500'] into key=value
    strings; reject malformed flags."""
    out: list[str] = []
    i = 0
    while i < len(extras):
        item = extras[i]
        if item.startswith("--"):
            key = item[2:]
            if "=" in key:
                out.append(key)
                i += 1
                continue
            if i + 1 >= len(extras):
                raise ConfigError(f"flag --{key} is missing a value")
            out.append(f"{key}={extras[i + 1]}")
            i += 2
        elif "=" in item:
            out.append(item)
            i += 1
        else:
            raise ConfigError(f"cannot parse argument {item!r}; expected "
                              "key=value or --key value")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="awgnauth",
        description="Keyless authentication over AWGN channels: construct "
                    "codes, evaluate bounds, and run Monte Carlo experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("construct", "build the code pipeline and emit its tables"),
        ("verify", "check the pairwise overlay property by exact counting"),
        ("bounds", "evaluate every closed-form guarantee"),
        ("simulate", "estimate operational measures and pair with bounds"),
        ("sweep", "repeat an experiment along one parameter axis"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="config file "
                       "(key = value lines or JSON)")
        p.add_argument("--out", default=None,
                       help=f"output path (relative paths land in "
                            f"${OUTPUT_DIR_ENV} when set)")
        if name == "verify":
            p.add_argument("--code", default=None,
                           help="code JSON emitted by construct")
        if name == "sweep":
            p.add_argument("--axis", required=True,
                           help="swept key: channel.rho_adv, auth.rho_delta, "
                                "auth.delta, or base.n")
            p.add_argument("--values", required=True,
                           help="comma-separated values (empty for a "
                                "header-only table)")
        # key=value / --key value overrides are collected from the
        # unparsed remainder so that flag/value adjacency survives; a
        # declared positional would swallow the values out of order
        p.epilog = ("remaining arguments are config overrides: key=value "
                    "or --key value")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        overrides = _split_overrides(extras)
        cfg = parse_config(args.config, overrides)
        handler = {
            "construct": cmd_construct,
            "verify": cmd_verify,
            "bounds": cmd_bounds,
            "simulate": cmd_simulate,
            "sweep": cmd_sweep,
        }[args.command]
        return handler(cfg, args)
    except (ConfigError, StageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
