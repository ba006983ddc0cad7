"""Flat key=value scenario configs, with figure presets.

The format is deliberately primitive: one ``key = value`` per line,
``#`` starts a comment, values may carry a trailing ``pi`` token
(``g_cav = 30pi``) so caption-exact constants survive transcription.
``parse_config`` reports *every* violation it can find, not just the
first, and attaches 1-based line numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigError, Violation

MODES = ("design", "simulate", "markovian", "oracle", "dark", "sweep")

# keys accepting a single float value (pi token allowed)
_FLOAT_KEYS = (
    "g_cav",
    "gamma_L",
    "delta1",
    "delta2",
    "big_gamma",
    "bandwidth_w",
    "rho_offset",
    "pulse_duration",
    "grid.dt",
    "grid.span",
    "band_halfwidth",
)
_INT_KEYS = ("n_modes", "workers")
_STR_KEYS = ("mode", "preset", "pulse", "output")
KNOWN_KEYS = _FLOAT_KEYS + _INT_KEYS + _STR_KEYS

# only these may carry a comma-separated range (sweep mode)
_RANGED_KEYS = ("bandwidth_w", "delta2")

# a magnitude above this in any frequency field smells like Hz, not MHz
_UNIT_CEILING = 1e6
_FREQ_KEYS = ("g_cav", "gamma_L", "delta1", "delta2", "big_gamma", "bandwidth_w")

_COMMON = {
    "gamma_L": 6.0 * math.pi,
    "g_cav": 30.0 * math.pi,
    "delta1": 0.0,
    "delta2": 0.0,
    "pulse": "builtin",
    "pulse_duration": math.pi,
}

PRESETS: dict[str, dict] = {
    "fig2a": {**_COMMON, "mode": "design", "bandwidth_w": 1.6716, "rho_offset": 0.002},
    "fig2c": {**_COMMON, "mode": "simulate", "bandwidth_w": 1.6716, "rho_offset": 0.002},
    "fig3a": {**_COMMON, "mode": "markovian", "bandwidth_w": 0.5, "rho_offset": 0.0075},
    "fig3b": {**_COMMON, "mode": "markovian", "bandwidth_w": 25.0, "rho_offset": 0.0075},
    "fig4": {
        **_COMMON,
        "mode": "sweep",
        "bandwidth_w": (0.5, 1.0, 2.0, 5.0, 25.0),
        "rho_offset": 0.0075,
    },
    "fig5": {**_COMMON, "mode": "design", "bandwidth_w": 1.0, "rho_offset": 0.004},
    "fig6": {
        **_COMMON,
        "mode": "sweep",
        "bandwidth_w": 0.5,
        "delta2": (-10.0, -5.0, 0.0, 5.0, 10.0),
        "rho_offset": 0.003,
    },
    "fig7a": {**_COMMON, "mode": "dark", "bandwidth_w": 0.5, "rho_offset": 0.00075},
    "fig7c": {**_COMMON, "mode": "dark", "bandwidth_w": 25.0, "rho_offset": 0.00075},
    "fig7e": {
        **_COMMON,
        "mode": "dark",
        "g_cav": 14.0 * math.pi,
        "bandwidth_w": 25.0,
        "rho_offset": 0.00075,
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario description (still symbolic, not materialized).

    ``big_gamma`` may be None, meaning "derive it from the bandwidth
    and the pulse via the equilibrium condition" at run time.  In
    sweep mode exactly one of ``bandwidth_w`` / ``delta2`` is replaced
    by ``sweep_values``.
    """

    mode: Optional[str] = None
    preset: Optional[str] = None
    pulse: str = "builtin"
    g_cav: Optional[float] = None
    gamma_L: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    big_gamma: Optional[float] = None
    bandwidth_w: Optional[float] = None
    rho_offset: Optional[float] = None
    pulse_duration: float = math.pi
    grid_dt: float = 1e-4
    grid_span: Optional[float] = None
    output: Optional[str] = None
    n_modes: int = 2000
    band_halfwidth: float = 80.0
    workers: int = 1
    sweep_param: Optional[str] = None
    sweep_values: tuple[float, ...] = ()
    overrides: tuple[str, ...] = ()

    def effective_span(self) -> float:
        return self.grid_span if self.grid_span is not None else self.pulse_duration


def parse_number(token: str) -> float:
    """Float literal with an optional trailing ``pi`` factor."""
    token = token.strip()
    if token.lower().endswith("pi"):
        head = token[:-2].strip()
        if head in ("", "+"):
            return math.pi
        if head == "-":
            return -math.pi
        return float(head) * math.pi
    return float(token)


def _edit_distance_one(a: str, b: str) -> bool:
    """True when one substitution, insertion or deletion maps a to b."""
    if a == b:
        return False
    la, lb = len(a), len(b)
    if abs(la - lb) > 1:
        return False
    if la == lb:
        return sum(x != y for x, y in zip(a, b)) == 1
    short, long = (a, b) if la < lb else (b, a)
    i = 0
    while i < len(short) and short[i] == long[i]:
        i += 1
    return short[i:] == long[i + 1 :]


def _suggest(key: str) -> Optional[str]:
    for known in KNOWN_KEYS:
        if _edit_distance_one(key.lower(), known.lower()):
            return known
    return None


def parse_config(text: str, cli_mode: Optional[str] = None) -> ScenarioConfig:
    """Parse and validate a scenario document.

    ``cli_mode`` (the positional command-line mode) takes precedence
    over a ``mode`` key in the file.  Raises :class:`ConfigError`
    listing every violation found.
    """
    violations: list[Violation] = []
    raw: dict[str, tuple[int, str]] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            violations.append(
                Violation("syntax", lineno, f"expected key = value, got {body!r}")
            )
            continue
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in KNOWN_KEYS:
            hint = _suggest(key)
            msg = f"unknown key {key!r}"
            if hint:
                msg += f"; did you mean {hint!r}?"
            violations.append(Violation("unknown-key", lineno, msg))
            continue
        raw[key] = (lineno, value)  # last assignment wins

    values: dict[str, object] = {}
    ranged: dict[str, tuple[float, ...]] = {}

    for key, (lineno, token) in raw.items():
        if key in _STR_KEYS:
            values[key] = token
            continue
        if key in _INT_KEYS:
            try:
                values[key] = int(token)
            except ValueError:
                violations.append(
                    Violation("value", lineno, f"{key} expects an integer, got {token!r}")
                )
            continue
        parts = [p.strip() for p in token.split(",")]
        if len(parts) > 1 or token.strip().endswith(","):
            if key not in _RANGED_KEYS:
                violations.append(
                    Violation("value", lineno, f"{key} does not accept a range")
                )
                continue
            try:
                ranged[key] = tuple(parse_number(p) for p in parts if p)
            except ValueError:
                violations.append(
                    Violation("value", lineno, f"could not parse range for {key}")
                )
            continue
        try:
            values[key] = parse_number(token)
        except ValueError:
            violations.append(
                Violation("value", lineno, f"{key} expects a number, got {token!r}")
            )

    # unit sanity before presets: suspects refer to what the user typed
    for key in _FREQ_KEYS:
        if key in values and abs(values[key]) > _UNIT_CEILING:
            lineno = raw[key][0]
            violations.append(
                Violation(
                    "unit-suspect",
                    lineno,
                    f"{key} = {values[key]:g} is suspiciously large; "
                    "frequencies are MHz (rad/us), not Hz",
                )
            )

    overrides: list[str] = []
    preset = values.get("preset")
    if preset is not None:
        table = PRESETS.get(str(preset))
        if table is None:
            lineno = raw["preset"][0]
            known = ", ".join(sorted(PRESETS))
            violations.append(
                Violation("value", lineno, f"unknown preset {preset!r}; known: {known}")
            )
        else:
            for key, preset_value in table.items():
                if isinstance(preset_value, tuple):
                    if key in values or key in ranged:
                        overrides.append(key)
                    ranged[key] = preset_value
                    values.pop(key, None)
                else:
                    if key in values and values[key] != preset_value:
                        overrides.append(key)
                    if key in ranged:
                        overrides.append(key)
                        ranged.pop(key)
                    values[key] = preset_value

    mode = cli_mode or values.get("mode")
    if mode is not None and mode not in MODES:
        lineno = raw.get("mode", (0, ""))[0]
        violations.append(
            Violation("value", lineno, f"mode must be one of {', '.join(MODES)}")
        )

    def line_of(key: str) -> int:
        return raw.get(key, (0, ""))[0]

    if mode == "sweep":
        if len(ranged) == 0:
            violations.append(
                Violation("value", 0, "sweep needs a comma range on bandwidth_w or delta2")
            )
        elif len(ranged) > 1:
            violations.append(
                Violation("value", 0, "sweep accepts exactly one ranged parameter")
            )
        for key, vals in ranged.items():
            if len(vals) == 0:
                violations.append(Violation("value", line_of(key), f"{key} range is empty"))
    elif ranged:
        for key in ranged:
            violations.append(
                Violation(
                    "value", line_of(key), f"{key} range is only meaningful in sweep mode"
                )
            )

    def positive(key: str, value) -> None:
        if value is not None and not value > 0.0:
            violations.append(
                Violation("value", line_of(key), f"{key} must be positive, got {value:g}")
            )

    positive("g_cav", values.get("g_cav"))
    positive("big_gamma", values.get("big_gamma"))
    positive("pulse_duration", values.get("pulse_duration"))
    positive("grid.dt", values.get("grid.dt"))
    positive("grid.span", values.get("grid.span"))
    positive("band_halfwidth", values.get("band_halfwidth"))
    if "bandwidth_w" in ranged:
        for v in ranged["bandwidth_w"]:
            positive("bandwidth_w", v)
    else:
        positive("bandwidth_w", values.get("bandwidth_w"))
    gamma_l = values.get("gamma_L")
    if gamma_l is not None and gamma_l < 0.0:
        violations.append(
            Violation("value", line_of("gamma_L"), "gamma_L must be non-negative")
        )
    rho = values.get("rho_offset")
    if rho is not None and not 0.0 <= rho < 1.0:
        violations.append(
            Violation("value", line_of("rho_offset"), "rho_offset must lie in [0, 1)")
        )
    for key, minimum in (("n_modes", 2), ("workers", 1)):
        v = values.get(key)
        if v is not None and v < minimum:
            violations.append(
                Violation("value", line_of(key), f"{key} must be at least {minimum}")
            )

    if mode is not None and not violations:
        for key in ("g_cav", "rho_offset"):
            if key not in values:
                violations.append(Violation("missing", 0, f"{key} is required"))
        if "bandwidth_w" not in values and "bandwidth_w" not in ranged:
            violations.append(Violation("missing", 0, "bandwidth_w is required"))

    if violations:
        raise ConfigError(violations)

    sweep_param = next(iter(ranged), None)
    cfg = ScenarioConfig(
        mode=mode,
        preset=str(preset) if preset is not None else None,
        pulse=str(values.get("pulse", "builtin")),
        g_cav=values.get("g_cav"),
        gamma_L=float(values.get("gamma_L", 0.0)),
        delta1=float(values.get("delta1", 0.0)),
        delta2=float(values.get("delta2", 0.0)) if "delta2" not in ranged else 0.0,
        big_gamma=values.get("big_gamma"),
        bandwidth_w=values.get("bandwidth_w"),
        rho_offset=values.get("rho_offset"),
        pulse_duration=float(values.get("pulse_duration", math.pi)),
        grid_dt=float(values.get("grid.dt", 1e-4)),
        grid_span=values.get("grid.span"),
        output=values.get("output"),
        n_modes=int(values.get("n_modes", 2000)),
        band_halfwidth=float(values.get("band_halfwidth", 80.0)),
        workers=int(values.get("workers", 1)),
        sweep_param=sweep_param,
        sweep_values=ranged.get(sweep_param, ()),
        overrides=tuple(sorted(set(overrides))),
    )
    return cfg


def with_point(cfg: ScenarioConfig, value: float) -> ScenarioConfig:
    """Materialize one sweep point as a plain single-valued config."""
    if cfg.sweep_param == "bandwidth_w":
        return replace(cfg, bandwidth_w=value, sweep_param=None, sweep_values=())
    if cfg.sweep_param == "delta2":
        return replace(cfg, delta2=value, sweep_param=None, sweep_values=())
    raise ValueError("config has no ranged parameter")
