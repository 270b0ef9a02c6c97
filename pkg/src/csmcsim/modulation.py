"""Mapping of a desired complex control action to bridge gate schedules.

Three methods are provided, all operating on one sampling period:

* SBI  - sector-based: the single active vector nearest to ``u``.
* CSA  - complex sliding averaging: the two active vectors bounding ``u``,
  time-weighted by the angular duty ``d``, in a symmetric [u+, u-, u+] pattern.
* ZCSA - CSA with a zero vector of duty ``d0`` inserted in the centre, which
  scales the averaged control by ``1 - d0``.

Sector conventions (angles in degrees, half-open at the upper edge)::

    SBI:  S_k = [-30 + 60(k-1), 30 + 60(k-1))     nearest vector V_k
    CSA:  S_k = [60(k-1), 60k)                   u- = V_k, u+ = V_{k+1}
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import DegenerateSigmaError, InvalidDutyError
from .transform import DEFAULT_SCALE, check_scale

_SIXTY = math.pi / 3.0
_HALF_SQRT3 = math.sqrt(3.0) / 2.0
U_EPS = 1e-12


class SwitchVector(NamedTuple):
    """Per-leg state: +1 connects the leg to +V_dc, -1 to -V_dc."""

    ua: int
    ub: int
    uc: int

    def validate(self) -> "SwitchVector":
        if any(k not in (-1, 1) for k in self):
            raise ValueError(f"switch vector entries must be +/-1, got {tuple(self)}")
        return self

    def legs_changed(self, other: "SwitchVector") -> int:
        return sum(a != b for a, b in zip(self, other))

    @property
    def is_zero(self) -> bool:
        return self.ua == self.ub == self.uc


V1 = SwitchVector(1, -1, -1)
V2 = SwitchVector(1, 1, -1)
V3 = SwitchVector(-1, 1, -1)
V4 = SwitchVector(-1, 1, 1)
V5 = SwitchVector(-1, -1, 1)
V6 = SwitchVector(1, -1, 1)
V0_POS = SwitchVector(1, 1, 1)
V0_NEG = SwitchVector(-1, -1, -1)

ACTIVE_VECTORS = (V1, V2, V3, V4, V5, V6)
VECTOR_NAMES = {V1: "V1", V2: "V2", V3: "V3", V4: "V4", V5: "V5", V6: "V6",
                V0_POS: "V0+", V0_NEG: "V0-"}


class Convention(str, Enum):
    SBI = "SBI"
    CSA = "CSA"


@dataclass(frozen=True)
class Sector:
    index: int
    convention: Convention

    def __post_init__(self):
        if not 1 <= self.index <= 6:
            raise ValueError(f"sector index must be in 1..6, got {self.index}")

    @property
    def lower_vector(self) -> SwitchVector:
        """``u-`` for CSA sectors, the selected vector for SBI sectors."""
        return ACTIVE_VECTORS[self.index - 1]

    @property
    def upper_vector(self) -> SwitchVector:
        return ACTIVE_VECTORS[self.index % 6]


@dataclass(frozen=True)
class GateSchedule:
    """Ordered ``(vector, duration)`` segments covering one period.

    Zero-length segments are dropped and equal neighbours merged on construction.
    """

    segments: tuple[tuple[SwitchVector, float], ...]
    period: float

    def __post_init__(self):
        segs = tuple((SwitchVector(*v).validate(), float(dt)) for v, dt in self.segments)
        if any(dt < 0 for _, dt in segs):
            raise ValueError("segment durations must be non-negative")
        merged: list[tuple[SwitchVector, float]] = []
        for v, dt in segs:
            if dt == 0:
                continue
            if merged and merged[-1][0] == v:
                merged[-1] = (v, merged[-1][1] + dt)
            else:
                merged.append((v, dt))
        segs = tuple(merged)
        if len(segs) > 5:
            raise ValueError(f"at most 5 segments per period, got {len(segs)}")
        total = math.fsum(dt for _, dt in segs)
        if not math.isclose(total, self.period, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(f"segments sum to {total!r}, period is {self.period!r}")
        object.__setattr__(self, "segments", segs)

    @property
    def vectors(self) -> tuple[SwitchVector, ...]:
        return tuple(v for v, _ in self.segments)

    @property
    def durations(self) -> tuple[float, ...]:
        return tuple(dt for _, dt in self.segments)

    @classmethod
    def single(cls, vector: SwitchVector, period: float) -> "GateSchedule":
        return cls(((vector, period),), period)


class DutyPair(NamedTuple):
    d: float
    d0: float
    d_a: float


def _angle(u: complex) -> float:
    """Argument of ``u`` in radians, normalised to [0, 2*pi)."""
    if abs(u) < U_EPS:
        raise DegenerateSigmaError("control action has no direction (|u| = 0)")
    a = cmath.phase(u) % (2 * math.pi)
    return 0.0 if a >= 2 * math.pi else a


def vector_to_complex(v: SwitchVector, scale: float = DEFAULT_SCALE) -> complex:
    """Image of a switch vector; exactly ``0j`` for the two zero vectors."""
    a, b, c = v
    scale = check_scale(scale)
    return complex(scale * (a - 0.5 * (b + c)), scale * _HALF_SQRT3 * (b - c))


def sbi_sector(u: complex) -> Sector:
    idx = math.floor((_angle(u) + _SIXTY / 2) / _SIXTY) % 6
    return Sector(idx + 1, Convention.SBI)


def sbi_select(u: complex) -> SwitchVector:
    """Active vector of the SBI sector containing ``angle(u)``."""
    return sbi_sector(u).lower_vector


def _csa_position(u: complex) -> tuple[int, float]:
    x = _angle(u) / _SIXTY
    idx = min(math.floor(x), 5)
    d = x - idx
    if d >= 1.0:  # rounding at the upper edge belongs to the next sector
        idx, d = (idx + 1) % 6, 0.0
    return idx, d


def csa_sector(u: complex) -> Sector:
    return Sector(_csa_position(u)[0] + 1, Convention.CSA)


def csa_duty(u: complex) -> float:
    """Angular position of ``u`` inside its CSA sector, in [0, 1)."""
    return _csa_position(u)[1]


def zero_vector_for(neighbour: SwitchVector) -> SwitchVector:
    """The zero vector one leg commutation away from ``neighbour``."""
    return V0_POS if sum(neighbour) > 0 else V0_NEG


def duty_pair(u: complex, d0: float = 0.0) -> DutyPair:
    _check_d0(d0)
    d = csa_duty(u)
    return DutyPair(d, d0, (1.0 - d0) * d)


def _check_d0(d0: float) -> None:
    if not (0.0 <= d0 < 1.0):
        raise InvalidDutyError(f"zero duty cycle must be in [0, 1), got {d0!r}")


def csa_schedule(u: complex, Ts: float) -> GateSchedule:
    """``[u+ (d/2)Ts, u- (1-d)Ts, u+ (d/2)Ts]``."""
    return zcsa_schedule(u, 0.0, Ts)


def zcsa_schedule(u: complex, d0: float, Ts: float) -> GateSchedule:
    """Five-segment zero-vector schedule; collapses to :func:`csa_schedule` at ``d0 = 0``."""
    _check_d0(d0)
    if not Ts > 0:
        raise ValueError("Ts must be positive")
    sector = csa_sector(u)
    d = csa_duty(u)
    d_a = (1.0 - d0) * d
    u_plus, u_minus = sector.upper_vector, sector.lower_vector
    edge = 0.5 * d_a * Ts
    zero = d0 * Ts
    minus = 0.5 * (Ts - zero - 2 * edge)
    segs = [(u_plus, edge), (u_minus, minus)]
    if zero > 0:
        segs.append((zero_vector_for(u_minus), zero))
        segs.append((u_minus, minus))
    else:
        segs[1] = (u_minus, Ts - 2 * edge)
    segs.append((u_plus, edge))
    return GateSchedule(tuple(segs), Ts)


def sbi_schedule(u: complex, Ts: float) -> GateSchedule:
    return GateSchedule.single(sbi_select(u), Ts)


def schedule_average(s: GateSchedule, scale: float = DEFAULT_SCALE) -> complex:
    """Duration-weighted mean of the complex images of the segments."""
    acc = 0j
    for v, dt in s.segments:
        acc += dt * vector_to_complex(v, scale)
    return acc / s.period


def centered_reorder(s: GateSchedule, sector: Sector) -> GateSchedule:
    """Re-order an odd-sector CSA/zCSA schedule so every rising edge is centred.

    Odd sectors become ``[u-, u+, (u0,) u+, u-]``; the zero vector is then the one
    adjacent to ``u+`` so that consecutive segments still differ in one leg.
    Even sectors are returned unchanged. The period average is not affected.
    """
    if sector.index % 2 == 0:
        return s
    u_plus, u_minus = sector.upper_vector, sector.lower_vector
    t_plus = math.fsum(dt for v, dt in s.segments if v == u_plus)
    t_minus = math.fsum(dt for v, dt in s.segments if v == u_minus)
    t_zero = math.fsum(dt for v, dt in s.segments if v.is_zero)
    if any(v not in (u_plus, u_minus) and not v.is_zero for v in s.vectors):
        raise ValueError("schedule does not belong to the given CSA sector")
    if t_zero > 0:
        # with no u+ dwell the zero vector sits next to u-
        u0 = zero_vector_for(u_plus if t_plus > 0 else u_minus)
        segs = [(u_minus, t_minus / 2), (u_plus, t_plus / 2), (u0, t_zero),
                (u_plus, t_plus / 2), (u_minus, t_minus / 2)]
    else:
        segs = [(u_minus, t_minus / 2), (u_plus, t_plus), (u_minus, t_minus / 2)]
    return GateSchedule(tuple(segs), s.period)


def deviation_modulus(d: float) -> float:
    """Relative magnitude loss of the CSA average at duty ``d``: ``1 - sqrt(d^2 - d + 1)``."""
    return 1.0 - math.sqrt(d * d - d + 1.0)


def deviation_phase(d: float) -> float:
    """Angle of the desired control minus angle of the CSA average, in degrees."""
    return 60.0 * d + math.degrees(math.atan(math.sqrt(3.0) * d / (d - 2.0)))


def quantize(s: GateSchedule, ticks: int) -> tuple[tuple[SwitchVector, int], ...]:
    """Integer tick counts per segment summing exactly to ``ticks``.

    Largest-remainder apportionment of the exact durations; ties go to the
    earlier segment. Zero-tick segments are dropped and equal neighbours merged.
    """
    if ticks <= 0:
        raise ValueError("ticks must be positive")
    quotas = [Fraction(dt) / Fraction(s.period) * ticks for dt in s.durations]
    base = [int(q) for q in quotas]
    short = ticks - sum(base)
    order = sorted(range(len(quotas)), key=lambda k: (-(quotas[k] - base[k]), k))
    for k in order[:short]:
        base[k] += 1
    out: list[list] = []
    for v, n in zip(s.vectors, base):
        if n == 0:
            continue
        if out and out[-1][0] == v:
            out[-1][1] += n
        else:
            out.append([v, n])
    return tuple((v, n) for v, n in out)


def method_schedule(method: str, u: complex, Ts: float, d0: float = 0.0,
                    centered: bool = False) -> tuple[GateSchedule, Sector, float]:
    """Dispatch to the method's scheduler; returns ``(schedule, sector, duty)``.

    ``duty`` is NaN for SBI.
    """
    if method == "SBI":
        return sbi_schedule(u, Ts), sbi_sector(u), math.nan
    if method == "CSA":
        d0 = 0.0
    elif method != "ZCSA":
        raise ValueError(f"unknown method {method!r}")
    sched = zcsa_schedule(u, d0, Ts)
    sector = csa_sector(u)
    if centered:
        sched = centered_reorder(sched, sector)
    return sched, sector, csa_duty(u)


def single_leg_commutation(vectors: Sequence[SwitchVector]) -> bool:
    return all(a.legs_changed(b) == 1 for a, b in zip(vectors, vectors[1:]))
