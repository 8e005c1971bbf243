"""Flat scenario configuration: parsing and schema validation.

The format is deliberately primitive so scenario files stay diffable and
need no third-party parser: one `key = value` pair per line, `#` comments,
values being numbers, bare or quoted strings, booleans, or bracketed
lists of numbers. Unknown keys are rejected.
"""

from __future__ import annotations

import math
from typing import Any

from .errors import ConfigError

_TRUE = {"true", "yes", "on"}
_FALSE = {"false", "no", "off"}


def _parse_scalar(tok: str):
    tok = tok.strip()
    if not tok:
        raise ConfigError("empty value")
    if tok[0] in "\"'" and tok[-1] == tok[0] and len(tok) >= 2:
        return tok[1:-1]
    low = tok.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    try:
        if any(ch in tok for ch in ".eE") and not tok.lstrip("+-").isdigit():
            return float(tok)
        return int(tok)
    except ValueError:
        return tok  # bare string


def parse_flat_config(text: str) -> dict:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key.replace("_", "").isalnum():
            raise ConfigError(f"line {lineno}: bad key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if value.startswith("["):
            if not value.endswith("]"):
                raise ConfigError(f"line {lineno}: unterminated list")
            inner = value[1:-1].strip()
            out[key] = [_parse_scalar(t) for t in inner.split(",")] if inner else []
        else:
            out[key] = _parse_scalar(value)
    return out


# key -> (kind, default); kind in {"num", "int", "str", "bool", "numlist"}
# None default means "absent unless given"
SCHEMA = {
    # geometry / operator
    "geometry": ("str", "interval"),
    "dimension": ("int", 1),
    "radius": ("num", 1.0),
    "p": ("numlist", [2.0]),
    "alpha": ("numlist", [0.0]),
    "weight": ("str", "distance"),  # distance | center | const
    # coefficient b(r) = b_scale * d^b_gamma * (1 + b_B0 d^b_theta)
    "b_scale": ("num", 1.0),
    "b_gamma": ("num", 0.0),
    "b_B0": ("num", 0.0),
    "b_theta": ("num", 1.0),
    # absorption
    "q": ("numlist", None),        # pure power(s); q = p + q_offset when absent
    "q_offset": ("num", 1.0),
    "sigma": ("num", None),
    "slow_factor": ("str", "one"),
    # closed-form prediction inputs
    "gamma": ("num", None),
    "B_at_R": ("num", 1.0),
    "l1": ("num", None),
    "c": ("num", None),
    "b1": ("num", None),
    "b2": ("num", None),
    "e_k": ("num", None),
    "Lstar": ("num", None),
    "B0": ("num", None),
    "theta": ("num", None),
    # weight generator for ratio fits / probes
    "k_kind": ("str", "auto"),     # auto | power | log1p_power | expm1_power | logscale | table
    "k_q": ("num", None),
    "k_lstar": ("num", None),
    "k_tau": ("num", None),
    "k_csv": ("str", None),
    # second-order probing scale
    "y_kind": ("str", None),       # power | log
    "y_zeta": ("num", 1.0),
    "y_tau": ("num", 1.0),
    # fitting
    "window_min": ("num", 1e-5),
    "window_max": ("num", 1e-2),
    "so_window_min": ("num", 3e-6),
    "so_window_max": ("num", 1e-3),
    "check_xi": ("str", "auto"),   # auto | always | never
    # tolerances
    "tol_beta": ("num", 0.02),
    "tol_C": ("num", 0.05),
    "tol_xi": ("num", 0.05),
    "tol_chi": ("num", 0.15),
    # schedules / probes
    "k_schedule_base": ("num", 2.0),
    "k_schedule_max_exp": ("int", 16),
    "psi0_values": ("numlist", [0.5, 1.0, 2.0, 4.0, 8.0]),
    "method": ("str", "sharp"),    # sharp | schedule
    "variant": ("str", "theorem"),
    "solver_rtol": ("num", None),
    "label": ("str", None),
}


def _coerce(key, kind, value):
    if kind == "num":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        v = float(value)
        if not math.isfinite(v):
            raise ConfigError(f"{key}: must be finite")
        return v
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        return value
    if kind == "numlist":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return [float(value)]
        if isinstance(value, list) and all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return [float(v) for v in value]
        raise ConfigError(f"{key}: expected a number or list of numbers, got {value!r}")
    raise ConfigError(f"internal: unknown kind {kind}")


def validate_config(raw: dict) -> dict:
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = {}
    for key, (kind, default) in SCHEMA.items():
        if key in raw:
            cfg[key] = _coerce(key, kind, raw[key])
        else:
            cfg[key] = default
    if cfg["geometry"] not in ("interval", "ball"):
        raise ConfigError(f"geometry must be interval or ball, got {cfg['geometry']!r}")
    if cfg["weight"] not in ("distance", "center", "const"):
        raise ConfigError(f"weight must be distance, center or const")
    if cfg["variant"] not in ("theorem", "proof"):
        raise ConfigError("variant must be theorem or proof")
    if cfg["check_xi"] not in ("auto", "always", "never"):
        raise ConfigError("check_xi must be auto, always or never")
    if not (0 < cfg["window_min"] < cfg["window_max"]):
        raise ConfigError("need 0 < window_min < window_max")
    return cfg


def load_config(path: str) -> tuple[dict, bytes]:
    with open(path, "rb") as fh:
        data = fh.read()
    cfg = validate_config(parse_flat_config(data.decode("utf-8")))
    return cfg, data
