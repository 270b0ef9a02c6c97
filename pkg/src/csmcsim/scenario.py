"""Scenario files.

Two encodings of one schema. INI-style text::

    [scenario]
    method = ZCSA
    d0 = 0.25
    fs = 50000          ; or Ts = 2e-5
    duration = 0.075
    delay_periods = 1
    L = 2e-3
    C = 20e-6
    r = 2e-3
    R_L = 5
    V_dc = 300
    I_ref = 25
    f_ref = 50          ; or omega = 314.159...
    kpi_window = 0.030, 0.050

    [event load-step]
    time = 0.025
    R_L = 10

    [event reference-step]
    time = 0.050
    I_ref = 15

or JSON with the same keys at top level and ``"events": [{"time": ..., "R_L": ...}]``.
All values are SI; angles in degrees are not accepted anywhere.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .engine import METHODS, Event, Scenario
from .errors import ConfigError
from .smc import ReferenceSpec, VsiParams
from .transform import DEFAULT_SCALE

REQUIRED = ("duration", "L", "C", "r", "R_L", "V_dc", "I_ref")
OPTIONAL = ("method", "d0", "fs", "Ts", "f_ref", "omega", "scale", "delay_periods",
            "centered", "ticks_per_period", "kpi_window")


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    kpi_window: tuple[float, float] | None
    digest: str


def _number(raw, key: str) -> float:
    try:
        val = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {raw!r}", key) from None
    if not math.isfinite(val):
        raise ConfigError(f"{key}: must be finite", key)
    return val


def _integer(raw, key: str) -> int:
    val = _number(raw, key)
    if val != int(val):
        raise ConfigError(f"{key}: expected an integer, got {raw!r}", key)
    return int(val)


def _flag(raw, key: str) -> bool:
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}", key)


def _reject_degrees(key: str) -> None:
    if "deg" in key.lower():
        raise ConfigError(f"{key}: degree-valued inputs are not accepted, use SI units", key)


def from_mapping(data: dict, events: list[dict]) -> ScenarioFile:
    """Validate a decoded scenario (keys as in the module docstring)."""
    for key in data:
        _reject_degrees(key)
        if key not in REQUIRED and key not in OPTIONAL:
            raise ConfigError(f"unknown scenario key {key!r}", key)
    if "Ts" in data and "fs" in data:
        raise ConfigError("give either Ts or fs, not both", "Ts")
    if "Ts" in data:
        Ts = _number(data["Ts"], "Ts")
    elif "fs" in data:
        fs = _number(data["fs"], "fs")
        if fs <= 0:
            raise ConfigError("fs must be positive", "fs")
        Ts = 1.0 / fs
    else:
        raise ConfigError("missing sampling period: set Ts (or fs)", "Ts")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(f"missing required key {key!r}", key)
    if "omega" in data and "f_ref" in data:
        raise ConfigError("give either omega or f_ref, not both", "omega")
    if "omega" in data:
        omega = _number(data["omega"], "omega")
    elif "f_ref" in data:
        omega = 2 * math.pi * _number(data["f_ref"], "f_ref")
    else:
        raise ConfigError("missing reference frequency: set f_ref (or omega)", "f_ref")

    method = str(data.get("method", "SBI")).strip().upper()
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}", "method")
    try:
        params = VsiParams(**{k: _number(data[k], k) for k in ("L", "C", "r", "R_L", "V_dc")})
        reference = ReferenceSpec(_number(data["I_ref"], "I_ref"), omega)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        field = str(exc).split(" ")[0].split(".")[-1]
        raise ConfigError(str(exc), field) from None

    evs = []
    for n, ev in enumerate(events):
        for key in ev:
            _reject_degrees(key)
        if "time" not in ev:
            raise ConfigError(f"event {n + 1}: missing 'time'", "events")
        kinds = [k for k in ("R_L", "I_ref") if k in ev]
        extra = set(ev) - {"time", "R_L", "I_ref", "name"}
        if len(kinds) != 1 or extra:
            raise ConfigError(f"event {n + 1}: needs exactly one of R_L or I_ref", "events")
        kind = "load" if kinds[0] == "R_L" else "reference"
        evs.append(Event(_number(ev["time"], "events"), kind, _number(ev[kinds[0]], "events")))

    window = None
    if "kpi_window" in data:
        raw = data["kpi_window"]
        parts = raw.split(",") if isinstance(raw, str) else list(raw)
        if len(parts) != 2:
            raise ConfigError("kpi_window needs two times", "kpi_window")
        window = (_number(parts[0], "kpi_window"), _number(parts[1], "kpi_window"))

    sc = Scenario(
        params=params,
        reference=reference,
        method=method,
        d0=_number(data.get("d0", 0.0), "d0"),
        Ts=Ts,
        duration=_number(data["duration"], "duration"),
        events=tuple(evs),
        scale=_number(data.get("scale", DEFAULT_SCALE), "scale"),
        delay_periods=_integer(data.get("delay_periods", 1), "delay_periods"),
        centered=_flag(data.get("centered", False), "centered"),
        ticks_per_period=_integer(data.get("ticks_per_period", 2000), "ticks_per_period"),
    ).validate()
    if window is not None and not (0 <= window[0] <= window[1] <= sc.duration):
        raise ConfigError("kpi_window must lie inside [0, duration]", "kpi_window")
    return ScenarioFile(sc, window, scenario_digest(sc, window))


def parse_text(text: str) -> ScenarioFile:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (R_L, Ts, ...)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from None
    if not cp.has_section("scenario"):
        raise ConfigError("missing [scenario] section", "scenario")
    events = []
    for name in cp.sections():
        if name == "scenario":
            continue
        if not name.split()[0] == "event":
            raise ConfigError(f"unknown section [{name}]", name)
        events.append(dict(cp[name]))
    return from_mapping(dict(cp["scenario"]), events)


def parse_json(text: str) -> ScenarioFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON scenario: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("JSON scenario must be an object")
    events = data.pop("events", [])
    if not isinstance(events, list) or not all(isinstance(e, dict) for e in events):
        raise ConfigError("events must be a list of objects", "events")
    return from_mapping(data, events)


def load(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_text(text)


def scenario_to_dict(sc: Scenario, kpi_window=None) -> dict:
    p, ref = sc.params, sc.reference
    out = {
        "method": sc.method, "d0": sc.d0, "Ts": sc.Ts, "duration": sc.duration,
        "L": p.L, "C": p.C, "r": p.r, "R_L": p.R_L, "V_dc": p.V_dc,
        "I_ref": ref.I_ref, "omega": ref.omega, "scale": sc.scale,
        "delay_periods": sc.delay_periods, "centered": sc.centered,
        "ticks_per_period": sc.ticks_per_period,
        "events": [{"time": e.time, ("R_L" if e.kind == "load" else "I_ref"): e.value}
                   for e in sc.events],
    }
    if kpi_window is not None:
        out["kpi_window"] = list(kpi_window)
    return out


def scenario_digest(sc: Scenario, kpi_window=None) -> str:
    blob = json.dumps(scenario_to_dict(sc, kpi_window), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
