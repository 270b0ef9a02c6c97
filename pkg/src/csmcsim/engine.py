"""Sampled closed loop: measure, compute the switching action, schedule, propagate.

Each sampling period ``k`` (start time ``k*Ts``):

1. apply scenario events falling in ``[k*Ts, (k+1)*Ts)``;
2. measure ``i, v`` and form ``sigma = i - i_ref``, ``u = -2c sigma/|sigma|``;
3. build the method's gate schedule and quantise it to integer ticks;
4. push it into a ``delay_periods``-deep pipeline and pop the schedule to apply
   (``V0-`` for the whole period while the pipeline fills);
5. propagate the plant exactly across the applied segments;
6. record the sample.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateSigmaError
from .modulation import (V0_NEG, GateSchedule, SwitchVector, method_schedule, quantize,
                         vector_to_complex)
from .plant import PlantState, transition
from .smc import ReferenceSpec, VsiParams, existence_margin, sliding_variable, switching_law
from .transform import DEFAULT_SCALE, check_scale

METHODS = ("SBI", "CSA", "ZCSA")
EVENT_KINDS = ("load", "reference")


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ConfigError(f"event kind must be one of {EVENT_KINDS}, got {self.kind!r}", "events")


@dataclass(frozen=True)
class Scenario:
    params: VsiParams = field(default_factory=VsiParams)
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    method: str = "SBI"
    d0: float = 0.0
    Ts: float = 20e-6
    duration: float = 75e-3
    events: tuple[Event, ...] = ()
    scale: float = DEFAULT_SCALE
    delay_periods: int = 1
    centered: bool = False
    ticks_per_period: int = 2000

    @property
    def n_periods(self) -> int:
        return int(round(self.duration / self.Ts))

    def validate(self) -> "Scenario":
        if not (self.Ts > 0 and math.isfinite(self.Ts)):
            raise ConfigError(f"Ts must be positive, got {self.Ts!r}", "Ts")
        if not (self.duration >= 0 and math.isfinite(self.duration)):
            raise ConfigError(f"duration must be >= 0, got {self.duration!r}", "duration")
        if abs(self.n_periods * self.Ts - self.duration) > 1e-9 * self.Ts + 1e-15:
            raise ConfigError("duration must be a whole number of sampling periods", "duration")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}", "method")
        if self.method == "ZCSA" and not 0.0 <= self.d0 < 1.0:
            raise ConfigError(f"d0 must be in [0, 1), got {self.d0!r}", "d0")
        if not (isinstance(self.delay_periods, int) and self.delay_periods >= 0):
            raise ConfigError("delay_periods must be a non-negative integer", "delay_periods")
        if not (isinstance(self.ticks_per_period, int) and self.ticks_per_period >= 1):
            raise ConfigError("ticks_per_period must be a positive integer", "ticks_per_period")
        try:
            check_scale(self.scale)
        except ValueError as exc:
            raise ConfigError(str(exc), "scale") from None
        for ev in self.events:
            if not 0.0 <= ev.time <= self.duration:
                raise ConfigError(f"event time {ev.time!r} outside [0, duration]", "events")
            if ev.kind == "load" and not ev.value > 0:
                raise ConfigError("load event needs R_L > 0", "events")
            if ev.kind == "reference" and not ev.value >= 0:
                raise ConfigError("reference event needs I_ref >= 0", "events")
        return self


@dataclass(frozen=True, eq=False)
class Trace:
    """Immutable record of one run.

    Per-sample arrays have one entry per sampling period (time ``t[k] = k*Ts``,
    state measured at that instant). The waveform arrays describe the applied
    bridge state as integer-tick segments that tile ``[0, duration)``.
    """

    scenario: Scenario
    t: np.ndarray
    i: np.ndarray
    v: np.ndarray
    i_ref: np.ndarray
    sigma: np.ndarray
    u: np.ndarray
    sector: np.ndarray
    duty: np.ndarray
    margin: np.ndarray
    R_L: np.ndarray
    I_ref: np.ndarray
    seg_start: np.ndarray
    seg_ticks: np.ndarray
    seg_vec: np.ndarray
    seg_period: np.ndarray
    final_state: PlantState

    @property
    def tick(self) -> float:
        return self.scenario.Ts / self.scenario.ticks_per_period

    @property
    def duration(self) -> float:
        return self.scenario.duration

    def __len__(self) -> int:
        return len(self.t)

    def segments(self):
        """``(t_start, dur, ua, ub, uc)`` rows of the applied waveform."""
        tick = self.tick
        for n0, n, vec in zip(self.seg_start, self.seg_ticks, self.seg_vec):
            yield n0 * tick, n * tick, int(vec[0]), int(vec[1]), int(vec[2])

    def waveform_average(self, k: int, scale: float | None = None) -> complex:
        """Mean complex control applied during period ``k``."""
        scale = self.scenario.scale if scale is None else scale
        sel = self.seg_period == k
        acc = 0j
        for n, vec in zip(self.seg_ticks[sel], self.seg_vec[sel]):
            acc += int(n) * vector_to_complex(SwitchVector(*map(int, vec)), scale)
        return acc / self.scenario.ticks_per_period


def reference_at(t: float, ref: ReferenceSpec, scale: float = DEFAULT_SCALE) -> complex:
    """Space vector of the balanced reference ``I_ref cos(wt - 2*pi*k/3)``.

    Equals ``I_ref * exp(j*omega*t)`` for the amplitude-invariant scale.
    """
    return 1.5 * scale * ref.I_ref * cmath.exp(1j * ref.omega * t)


def _freeze(a):
    a = np.asarray(a)
    a.flags.writeable = False
    return a


def run(sc: Scenario) -> Trace:
    sc.validate()
    params, ref = sc.params, sc.reference
    c = sc.scale
    Ts, N, K = sc.Ts, sc.ticks_per_period, sc.n_periods
    gain = 2.0 * c
    images = {}

    def image(vec):
        z = images.get(vec)
        if z is None:
            z = images[vec] = vector_to_complex(vec, c)
        return z

    events = sorted(sc.events, key=lambda e: e.time)  # stable: file order for ties
    ev_pos = 0
    fill = ((V0_NEG, N),)
    pipeline = deque([fill] * sc.delay_periods)

    state = PlantState()
    u_prev = None
    rec = {name: [] for name in ("t", "i", "v", "i_ref", "sigma", "u", "sector", "duty",
                                 "margin", "R_L", "I_ref")}
    seg_start, seg_ticks, seg_vec, seg_period = [], [], [], []

    for k in range(K):
        t = k * Ts
        while ev_pos < len(events) and events[ev_pos].time < (k + 1) * Ts * (1 - 1e-12):
            ev = events[ev_pos]
            if ev.kind == "load":
                params = replace(params, R_L=ev.value)
            else:
                ref = replace(ref, I_ref=ev.value)
            ev_pos += 1

        i_ref = reference_at(t, ref, c)
        sigma = sliding_variable(state.i, i_ref)
        try:
            u = switching_law(sigma, gain)
        except DegenerateSigmaError:
            u = u_prev
        if u is None:
            quantized, sector, duty = fill, 0, math.nan
        else:
            sched, sec, duty = method_schedule(sc.method, u, Ts, sc.d0, sc.centered)
            quantized, sector = quantize(sched, N), sec.index
        u_prev = u

        pipeline.append(quantized)
        applied = pipeline.popleft()

        rec["t"].append(t)
        rec["i"].append(state.i)
        rec["v"].append(state.v)
        rec["i_ref"].append(i_ref)
        rec["sigma"].append(sigma)
        rec["u"].append(complex("nan") if u is None else u)
        rec["sector"].append(sector)
        rec["duty"].append(duty)
        rec["margin"].append(existence_margin(state.i, state.v, i_ref, params, ref.omega, c))
        rec["R_L"].append(params.R_L)
        rec["I_ref"].append(ref.I_ref)

        n0 = k * N
        for vec, n in applied:
            state = transition(params, Ts * n / N).apply(state, image(vec))
            seg_start.append(n0)
            seg_ticks.append(n)
            seg_vec.append(tuple(vec))
            seg_period.append(k)
            n0 += n

    arrays = {name: _freeze(np.array(vals, dtype=complex if name in ("i", "v", "i_ref", "sigma", "u")
                                     else (int if name == "sector" else float)))
              for name, vals in rec.items()}
    return Trace(
        scenario=sc,
        seg_start=_freeze(np.array(seg_start, dtype=np.int64)),
        seg_ticks=_freeze(np.array(seg_ticks, dtype=np.int64)),
        seg_vec=_freeze(np.array(seg_vec, dtype=np.int8).reshape(-1, 3)),
        seg_period=_freeze(np.array(seg_period, dtype=np.int64)),
        final_state=state,
        **arrays,
    )


def run_sweep(base: Scenario, d0_values: Sequence[float]) -> list[tuple[float, Trace]]:
    """Independent zCSA runs, one per zero duty cycle, from the same initial state."""
    if base.method != "ZCSA":
        raise ConfigError("run_sweep needs method ZCSA", "method")
    return [(float(d0), run(replace(base, d0=float(d0)))) for d0 in d0_values]


def benchmark_scenario(method: str = "SBI", d0: float = 0.0, **overrides) -> Scenario:
    """The load-step / reference-step test: 25 A, 5 -> 10 ohm at 25 ms, 15 A at 50 ms."""
    sc = Scenario(
        params=VsiParams(L=2e-3, C=20e-6, r=2e-3, R_L=5.0, V_dc=300.0),
        reference=ReferenceSpec(I_ref=25.0, omega=2 * math.pi * 50.0),
        method=method,
        d0=d0,
        Ts=1 / 50e3,
        duration=75e-3,
        events=(Event(25e-3, "load", 10.0), Event(50e-3, "reference", 15.0)),
        delay_periods=1,
    )
    return replace(sc, **overrides)
