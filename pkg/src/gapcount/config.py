"""Experiment configuration: TOML schema, validation, builders.

A config file has a [background] section (period, a, b), an optional
[perturbation] section (kind plus family parameters), and one section per
subcommand carrying its parameters.  Validation errors name the offending
section and key.
"""

from __future__ import annotations

import sys

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .errors import ConfigError, GapcountError
from .operators import PeriodicBackground, make_perturbation, zero_perturbation

__all__ = [
    "load_config",
    "build_background",
    "build_perturbation",
    "section",
    "get",
    "flatten",
]

_PERT_KEYS = {
    "finite": {"sites"},
    "power": {"b_amp", "b_exp", "b_alternating", "a_amp", "a_exp",
              "a_alternating", "allow_non_summable"},
    "logweight": {"b_amp", "b_logexp", "a_amp", "a_logexp",
                  "allow_non_summable"},
    "none": set(),
}


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return _toml.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid TOML: {exc}") from exc


def section(cfg, name, required=True):
    sec = cfg.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"config is missing the [{name}] section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


_MISSING = object()


def get(sec, secname, key, types, default=_MISSING):
    """Fetch and type-check one key; names the key in every error."""
    if key not in sec:
        if default is _MISSING:
            raise ConfigError(f"[{secname}] is missing required key '{key}'")
        return default
    val = sec[key]
    if types is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, types if isinstance(types, tuple) else (types,)):
        raise ConfigError(
            f"[{secname}] key '{key}' has wrong type {type(val).__name__}"
        )
    return val


def _float_list(sec, secname, key, default=_MISSING, length=None):
    val = get(sec, secname, key, list, default)
    if val is default and default is not _MISSING:
        return val
    try:
        out = [float(v) for v in val]
    except (TypeError, ValueError):
        raise ConfigError(f"[{secname}] key '{key}' must be a list of numbers")
    if length is not None and len(out) != length:
        raise ConfigError(
            f"[{secname}] key '{key}' must have exactly {length} entries"
        )
    return out


def build_background(cfg) -> PeriodicBackground:
    sec = section(cfg, "background")
    period = get(sec, "background", "period", int)
    a = _float_list(sec, "background", "a")
    b = _float_list(sec, "background", "b")
    try:
        return PeriodicBackground(period, tuple(a), tuple(b))
    except GapcountError as exc:
        raise ConfigError(f"[background] is invalid: {exc}") from exc


def build_perturbation(cfg):
    sec = section(cfg, "perturbation", required=False)
    if not sec:
        return zero_perturbation()
    kind = get(sec, "perturbation", "kind", str)
    if kind not in _PERT_KEYS:
        raise ConfigError(
            f"[perturbation] key 'kind' must be one of "
            f"{sorted(_PERT_KEYS)}, got {kind!r}"
        )
    extra = set(sec) - _PERT_KEYS[kind] - {"kind"}
    if extra:
        raise ConfigError(
            f"[perturbation] has keys {sorted(extra)} not valid for kind "
            f"{kind!r}"
        )
    params = {}
    if kind == "finite":
        rows = get(sec, "perturbation", "sites", list, default=[])
        sites = []
        for row in rows:
            if not isinstance(row, list) or len(row) != 3:
                raise ConfigError(
                    "[perturbation] key 'sites' must be a list of "
                    "[n, delta_a, delta_b] triples"
                )
            sites.append((int(row[0]), float(row[1]), float(row[2])))
        params["sites"] = tuple(sites)
    else:
        for key in _PERT_KEYS[kind]:
            if key in sec:
                want = bool if ("alternating" in key or key == "allow_non_summable") else float
                params[key] = get(sec, "perturbation", key, want)
    try:
        return make_perturbation(kind, **params)
    except GapcountError as exc:
        raise ConfigError(f"[perturbation] is invalid: {exc}") from exc


def flatten(cfg, prefix=""):
    """Flatten nested tables to dotted key/value pairs for output headers."""
    out = {}
    for key, val in cfg.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(flatten(val, name + "."))
        else:
            out[name] = val
    return out
