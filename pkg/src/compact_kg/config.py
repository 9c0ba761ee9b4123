"""``key = value`` configuration files for studies, single runs and profiles.

Lines are UTF-8, ``#`` starts a comment, unknown keys are rejected. Numeric
values accept arithmetic such as ``pi/8``, ``2e-5``, ``1/4`` or ``2^(-2/3)``.
"""

from __future__ import annotations

import ast
import math
import operator
import re

from .errors import ConfigError
from .study import PRESETS, StudyPlan, preset

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_CONSTANTS = {"pi": math.pi, "e": math.e}


def parse_number(text: str) -> float:
    """Evaluate a small arithmetic expression (numbers, pi, + - * / ^)."""
    try:
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
        value = _eval(tree.body)
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return float(value)


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _CONSTANTS:
        return _CONSTANTS[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    raise ValueError("unsupported expression")


def parse_lines(text: str) -> list:
    """[(line_number, key, value)] with comments and blank lines dropped."""
    entries = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", line=lineno)
        seen[key] = lineno
        entries.append((lineno, key, value))
    return entries


def _number(v):
    return parse_number(v)


def _positive_int(v):
    x = parse_number(v)
    if x != int(x):
        raise ValueError(f"expected an integer, got {v!r}")
    return int(x)


def _bool(v):
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _word(v):
    return v.strip().lower()


def _t_final(v):
    if v.replace(" ", "").lower() in ("1/eps^p", "eps^-p", "eps^(-p)", "long"):
        return None
    return parse_number(v)


def _auto_number(v):
    return None if v.strip().lower() == "auto" else parse_number(v)


def _auto_int(v):
    return None if v.strip().lower() == "auto" else _positive_int(v)


def _epsilons(v):
    labels = [s.strip() for s in v.split(",") if s.strip()]
    if not labels:
        raise ValueError("empty epsilon list")
    return tuple(labels), tuple(parse_number(s) for s in labels)


STUDY_KEYS = {
    "axis": _word,
    "scheme": _word,
    "name": str.strip,
    "equation": _word,
    "domain": _word,
    "data": _word,
    "p": _positive_int,
    "a": _number,
    "b": _number,
    "h0": _number,
    "h": _number,
    "dt0": _number,
    "dt": _number,
    "dt_eps_exponent": _number,
    "halvings": _positive_int,
    "t_final": _t_final,
    "ref_h": _auto_number,
    "ref_dt": _auto_number,
    "diagonal_offset": _auto_int,
    "diagonal_exponent": _auto_number,
    "first_step": _word,
}
ALIASES = {"tau": "dt", "tau0": "dt0", "k": "dt", "k0": "dt0", "h_e": "ref_h", "tau_e": "ref_dt",
           "k_e": "ref_dt", "epsilon": "epsilons"}


def parse_config(text: str, full: bool = False) -> StudyPlan:
    """Parse a study configuration into a validated :class:`StudyPlan`.

    ``preset = table1`` (..``table4``) loads the published parameters; any
    other key then overrides the preset value. Without a preset, ``axis``,
    ``scheme``, ``p`` and ``epsilons`` are required.
    """
    entries = parse_lines(text)
    kwargs = {}
    first_line = {}
    preset_name = None
    for lineno, key, value in entries:
        key = ALIASES.get(key, key)
        first_line[key] = lineno
        try:
            if key == "preset":
                preset_name = _word(value)
                if preset_name not in PRESETS:
                    raise ValueError(f"unknown preset {value!r}; expected one of {PRESETS}")
            elif key == "full":
                full = full or _bool(value)
            elif key == "epsilons":
                kwargs["epsilon_labels"], kwargs["epsilons"] = _epsilons(value)
            elif key in STUDY_KEYS:
                kwargs[key] = STUDY_KEYS[key](value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno) from None

    if preset_name is not None:
        base = preset(preset_name, full)
        base.update(kwargs)
        kwargs = base
    else:
        missing = [k for k in ("axis", "scheme", "p", "epsilons") if k not in kwargs]
        if missing:
            raise ConfigError(f"missing required keys: {', '.join(missing)}")
        if kwargs.get("domain") == "whole-space" and "data" not in kwargs:
            kwargs["data"] = "gaussian"
    try:
        return StudyPlan(**kwargs)
    except ConfigError as exc:
        # attach the line of the offending key when it can be identified
        hits = [k for k in first_line if re.search(rf"\b{re.escape(k)}\b", str(exc))]
        if hits:
            raise ConfigError(str(exc), line=first_line[max(hits, key=len)]) from None
        raise


RUN_KEYS = {
    "scheme": _word,
    "equation": _word,
    "domain": _word,
    "data": _word,
    "p": _positive_int,
    "epsilon": _number,
    "a": _number,
    "b": _number,
    "h": _number,
    "dt": _number,
    "t_final": _t_final,
    "first_step": _word,
    "regularized": _word,
    "energy_every": _auto_int,
    "snapshots": str.strip,
}
RUN_DEFAULTS = {
    "scheme": "semi-implicit",
    "equation": "standard",
    "domain": "torus",
    "data": None,
    "p": 2,
    "epsilon": 1.0,
    "a": 0.0,
    "b": 2.0 * math.pi,
    "h": math.pi / 32,
    "dt": 1e-3,
    "t_final": 1.0,
    "first_step": "auto",
    "regularized": "no",
    "energy_every": None,
    "snapshots": "",
}


def parse_keyvalues(text: str, schema: dict, defaults: dict, aliases=None) -> dict:
    """Generic typed key=value parser returning ``defaults`` updated by the file."""
    aliases = aliases or {}
    out = dict(defaults)
    for lineno, key, value in parse_lines(text):
        key = aliases.get(key, key)
        if key not in schema:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        try:
            out[key] = schema[key](value)
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno) from None
    return out


def parse_run_config(text: str) -> dict:
    return parse_keyvalues(text, RUN_KEYS, RUN_DEFAULTS, {"tau": "dt", "k": "dt", "eps": "epsilon"})


PROFILE_KEYS = {
    "preset": _word,
    "mode": _word,
    "scheme": _word,
    "domain": _word,
    "data": _word,
    "p": _positive_int,
    "epsilons": str.strip,
    "h": _number,
    "k0": _number,
    "k_eps_exponent": _number,
    "s_final": _number,
    "x0": _number,
}


def format_metadata(meta: dict) -> str:
    """``key=value`` lines in insertion order."""
    return "".join(f"{k}={v}\n" for k, v in meta.items())
