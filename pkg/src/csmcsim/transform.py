"""Three-phase <-> complex space-vector conversions.

A three-phase quantity ``(a, b, c)`` maps to the pair ``(z, x0)``::

    z  = c * (a + alpha*b + conj(alpha)*c)      alpha = exp(j*2*pi/3)
    x0 = c * (a + b + c)

The conjugate row of the full transform is redundant and never stored.
``c = 2/3`` preserves amplitudes, ``c = 1/sqrt(3)`` preserves power.
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np

AMPLITUDE_INVARIANT = 2.0 / 3.0
POWER_INVARIANT = 1.0 / math.sqrt(3.0)
DEFAULT_SCALE = AMPLITUDE_INVARIANT

ALPHA = cmath.exp(2j * math.pi / 3)


class ThreePhaseSample(NamedTuple):
    a: float
    b: float
    c: float


def check_scale(scale: float) -> float:
    scale = float(scale)
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError(f"transform scale must be positive and finite, got {scale!r}")
    return scale


def abc_to_complex(x, scale: float = DEFAULT_SCALE) -> tuple[complex, float]:
    """Return ``(z, x0)`` for a three-phase sample ``x``."""
    scale = check_scale(scale)
    a, b, c = (float(k) for k in x)
    z = scale * (a + ALPHA * b + ALPHA.conjugate() * c)
    x0 = scale * (a + b + c)
    return complex(z), x0


def complex_to_abc(z: complex, x0: float = 0.0, scale: float = DEFAULT_SCALE) -> ThreePhaseSample:
    """Exact inverse of :func:`abc_to_complex`."""
    scale = check_scale(scale)
    z = complex(z)
    # T^-1 = (1/(3c)) * [[1, 1, 1], [conj(alpha), alpha, 1], [alpha, conj(alpha), 1]]
    # applied to (z, conj(z), x0); the first two columns combine into 2*Re(.)
    k = 1.0 / (3.0 * scale)
    a = k * (2.0 * z.real + x0)
    b = k * (2.0 * (ALPHA.conjugate() * z).real + x0)
    c = k * (2.0 * (ALPHA * z).real + x0)
    return ThreePhaseSample(a, b, c)


def abc_to_complex_array(abc, scale: float = DEFAULT_SCALE) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`abc_to_complex` over an ``(..., 3)`` array."""
    scale = check_scale(scale)
    abc = np.asarray(abc, dtype=float)
    z = scale * (abc[..., 0] + ALPHA * abc[..., 1] + ALPHA.conjugate() * abc[..., 2])
    x0 = scale * abc.sum(axis=-1)
    return z, x0


def complex_to_abc_array(z, x0=0.0, scale: float = DEFAULT_SCALE) -> np.ndarray:
    """Vectorised :func:`complex_to_abc`; returns an ``(..., 3)`` array."""
    scale = check_scale(scale)
    z = np.asarray(z, dtype=complex)
    x0 = np.asarray(x0, dtype=float)
    k = 1.0 / (3.0 * scale)
    a = k * (2.0 * z.real + x0)
    b = k * (2.0 * (ALPHA.conjugate() * z).real + x0)
    c = k * (2.0 * (ALPHA * z).real + x0)
    return np.stack(np.broadcast_arrays(a, b, c), axis=-1)


def to_dq(z: complex, theta: float) -> complex:
    """Rotate ``z`` into the frame at angle ``theta`` (radians)."""
    return complex(z) * cmath.exp(-1j * theta)


def instantaneous_power(v: complex, i: complex) -> float:
    """``Re(v * conj(i))`` in space-vector units (see :func:`abc_power` for watts)."""
    return (complex(v) * complex(i).conjugate()).real


def abc_power(v: complex, i: complex, scale: float = DEFAULT_SCALE) -> float:
    """Phase-sum power ``v_a i_a + v_b i_b + v_c i_c`` of balanced signals.

    The conjugate row contributes as much as ``z``, hence
    ``sum_k v_k i_k = 2 Re(v conj(i)) / (3 c^2)``: 3/2 for ``c = 2/3``, 2 for ``c = 1/sqrt(3)``.
    """
    scale = check_scale(scale)
    return 2.0 * instantaneous_power(v, i) / (3.0 * scale * scale)
