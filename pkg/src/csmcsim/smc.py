"""Complex-valued sliding mode law for the three-phase VSI."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateSigmaError
from .transform import DEFAULT_SCALE, check_scale

SIGMA_EPS = 1e-9  # amperes


@dataclass(frozen=True)
class VsiParams:
    """Inverter with LC output filter and star-connected resistive load.

    ``V_dc`` is the half-bus voltage: each leg switches between +V_dc and -V_dc.
    """

    L: float = 2e-3
    C: float = 20e-6
    r: float = 2e-3
    R_L: float = 5.0
    V_dc: float = 300.0

    def __post_init__(self):
        for name, lo, strict in (("L", 0, True), ("C", 0, True), ("r", 0, False),
                                 ("R_L", 0, True), ("V_dc", 0, True)):
            val = getattr(self, name)
            if not math.isfinite(val) or (val <= lo if strict else val < lo):
                op = ">" if strict else ">="
                raise ValueError(f"VsiParams.{name} must be {op} {lo}, got {val!r}")


@dataclass(frozen=True)
class ReferenceSpec:
    I_ref: float = 25.0
    omega: float = 100 * math.pi

    def __post_init__(self):
        if not (self.I_ref >= 0 and math.isfinite(self.I_ref)):
            raise ValueError(f"ReferenceSpec.I_ref must be >= 0, got {self.I_ref!r}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"ReferenceSpec.omega must be > 0, got {self.omega!r}")


def sliding_variable(i: complex, i_ref: complex) -> complex:
    return complex(i) - complex(i_ref)


def switching_law(sigma: complex, gain_magnitude: float, eps: float = SIGMA_EPS) -> complex:
    """Return ``-gain * sigma/|sigma|``.

    Raises DegenerateSigmaError when ``|sigma| < eps``; the caller owns the tie-break.
    """
    if not gain_magnitude > 0:
        raise ValueError(f"gain_magnitude must be positive, got {gain_magnitude!r}")
    mag = abs(sigma)
    if mag < eps:
        raise DegenerateSigmaError(f"|sigma| = {mag:g} below {eps:g}")
    return -gain_magnitude * (complex(sigma) / mag)


def complex_switching_law(sigma: complex, kappa: complex, eps: float = SIGMA_EPS) -> complex:
    """General form ``-kappa * sigma/|sigma|`` with a complex gain."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    mag = abs(sigma)
    if mag < eps:
        raise DegenerateSigmaError(f"|sigma| = {mag:g} below {eps:g}")
    return -complex(kappa) * (complex(sigma) / mag)


def _required_voltage(i: complex, v: complex, i_ref: complex, p: VsiParams, omega: float) -> complex:
    return p.r * complex(i) + complex(v) + 1j * omega * p.L * complex(i_ref)


def equivalent_control(i: complex, v: complex, i_ref: complex, p: VsiParams, omega: float) -> complex:
    """Continuous control holding ``sigma' = 0``: ``(r*i + v + j*omega*L*i_ref) / V_dc``."""
    return _required_voltage(i, v, i_ref, p, omega) / p.V_dc


def existence_margin(i: complex, v: complex, i_ref: complex, p: VsiParams, omega: float,
                     scale: float = DEFAULT_SCALE) -> float:
    """Signed distance (volts) to the sliding existence boundary.

    Positive when ``V_dc > |r*i + v + j*omega*L*i_ref| / (2c)``; with ``c = 2/3``
    the factor is 3/4.
    """
    scale = check_scale(scale)
    return p.V_dc - abs(_required_voltage(i, v, i_ref, p, omega)) / (2.0 * scale)


def existence_condition(kappa_magnitude: float, u_eq_magnitude: float,
                        delta_sigma_g: float = 0.0, delta_kappa: float = 0.0) -> float:
    """Margin of ``|kappa| cos(delta_sigma_g + delta_kappa) > |u_eq|`` (angles in radians).

    Returns the left side minus the right side; the sliding motion exists when positive.
    """
    return kappa_magnitude * math.cos(delta_sigma_g + delta_kappa) - u_eq_magnitude


def lyapunov_rate(sigma: complex, sigma_dot: complex) -> float:
    """``d/dt (|sigma|^2 / 2) = Re(conj(sigma) * sigma')``."""
    return (complex(sigma).conjugate() * complex(sigma_dot)).real


def d0_max(u_eq_magnitude: float, scale: float = DEFAULT_SCALE) -> float:
    """Largest zero-vector duty that keeps the sliding motion: ``1 - |u_eq|/(2c)``.

    May be negative, meaning even the full gain is insufficient.
    """
    if u_eq_magnitude < 0:
        raise ValueError("u_eq_magnitude must be non-negative")
    return 1.0 - u_eq_magnitude / (2.0 * check_scale(scale))


def steady_state_d0_max(p: VsiParams, ref: ReferenceSpec, scale: float = DEFAULT_SCALE) -> float:
    """``d0_max`` at the ideal sliding operating point ``i = i_ref``, ``v = R_L*i_ref``."""
    i_ref = complex(ref.I_ref)
    u_eq = equivalent_control(i_ref, ideal_sliding_voltage(i_ref, p.R_L), i_ref, p, ref.omega)
    return d0_max(abs(u_eq), scale)


def ideal_sliding_voltage(i_ref: complex, R_L: float) -> complex:
    """Capacitor voltage reached on the sliding manifold."""
    if not R_L > 0:
        raise ValueError("R_L must be positive")
    return R_L * complex(i_ref)

