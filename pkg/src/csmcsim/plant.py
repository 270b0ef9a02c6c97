"""Complex-domain LC-filtered VSI with resistive load.

State ``x = (i, v)``::

    L di/dt = -r i - v + V_dc u
    C dv/dt = i - v / R_L

The state matrix is real, so a complex state propagates with the same real
2x2 transition matrix. Over a segment with constant ``u``::

    x(t) = Phi(t) x(0) + Gamma(t) u,    Phi = exp(A t),  Gamma = int_0^t exp(A s) ds b
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .modulation import vector_to_complex
from .smc import VsiParams
from .transform import DEFAULT_SCALE

# relative eigenvalue gap below which the closed form loses accuracy
EIG_GAP_TOL = 1e-6


class PlantState(NamedTuple):
    i: complex = 0j
    v: complex = 0j


class Transition(NamedTuple):
    """Real 2x2 ``Phi`` (row-major) and real input column ``Gamma``."""

    p11: float
    p12: float
    p21: float
    p22: float
    g1: float
    g2: float

    def apply(self, s: PlantState, u: complex) -> PlantState:
        return PlantState(self.p11 * s.i + self.p12 * s.v + self.g1 * u,
                          self.p21 * s.i + self.p22 * s.v + self.g2 * u)


def state_matrix(p: VsiParams) -> tuple[np.ndarray, np.ndarray]:
    A = np.array([[-p.r / p.L, -1.0 / p.L],
                  [1.0 / p.C, -1.0 / (p.R_L * p.C)]])
    b = np.array([p.V_dc / p.L, 0.0])
    return A, b


def derivative(s: PlantState, u: complex, p: VsiParams) -> PlantState:
    """Time derivative ``(di/dt, dv/dt)``."""
    di = (-p.r * s.i - s.v + p.V_dc * u) / p.L
    dv = (s.i - s.v / p.R_L) / p.C
    return PlantState(di, dv)


def _phi1(z: complex) -> complex:
    """``(exp(z) - 1) / z``, accurate near 0."""
    if abs(z) < 1e-2:
        term, acc = 1.0 + 0j, 0j
        for k in range(1, 12):
            acc += term
            term *= z / (k + 1)
        return acc
    return (cmath.exp(z) - 1.0) / z


def _closed_form(A: np.ndarray, b: np.ndarray, dt: float) -> Transition | None:
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    mu = tr / 2
    delta = cmath.sqrt(mu * mu - det)
    lam1, lam2 = mu + delta, mu - delta
    scale = max(abs(lam1), abs(lam2))
    if scale == 0 or abs(lam1 - lam2) < EIG_GAP_TOL * scale:
        return None
    # Sylvester: f(A) = (f(l1)(A - l2 I) - f(l2)(A - l1 I)) / (l1 - l2)
    I = np.eye(2)
    M1, M2 = A - lam2 * I, A - lam1 * I
    gap = lam1 - lam2
    e1, e2 = cmath.exp(lam1 * dt), cmath.exp(lam2 * dt)
    f1, f2 = dt * _phi1(lam1 * dt), dt * _phi1(lam2 * dt)
    Phi = ((e1 * M1 - e2 * M2) / gap).real
    Gam = (((f1 * M1 - f2 * M2) / gap) @ b).real
    return Transition(Phi[0, 0], Phi[0, 1], Phi[1, 0], Phi[1, 1], Gam[0], Gam[1])


def _augmented(A: np.ndarray, b: np.ndarray, dt: float) -> Transition:
    M = np.zeros((3, 3))
    M[:2, :2] = A
    M[:2, 2] = b
    E = expm(M * dt)
    return Transition(E[0, 0], E[0, 1], E[1, 0], E[1, 1], E[0, 2], E[1, 2])


def transition(p: VsiParams, dt: float) -> Transition:
    """Exact discretisation of the plant over ``dt`` seconds of constant input."""
    return _transition(p, float(dt))


@lru_cache(maxsize=65536)
def _transition(p: VsiParams, dt: float) -> Transition:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return Transition(1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    A, b = state_matrix(p)
    return _closed_form(A, b, dt) or _augmented(A, b, dt)


def propagate_segment(s: PlantState, u: complex, dt: float, p: VsiParams) -> PlantState:
    if dt == 0:
        return PlantState(complex(s.i), complex(s.v))
    return transition(p, dt).apply(PlantState(complex(s.i), complex(s.v)), complex(u))


def propagate_schedule(s: PlantState, sched, p: VsiParams, scale: float = DEFAULT_SCALE):
    """Fold :func:`propagate_segment` over a gate schedule.

    Returns the end state and the piecewise-constant control waveform as a
    list of ``(t_offset, duration, vector)`` tuples.
    """
    t = 0.0
    wave = []
    for vec, dt in sched.segments:
        if dt == 0:
            continue
        s = propagate_segment(s, vector_to_complex(vec, scale), dt, p)
        wave.append((t, dt, vec))
        t += dt
    return s, wave


def rk4_propagate(s: PlantState, u, dt, p: VsiParams, steps: int = 1000) -> PlantState:
    """Fixed-step classical Runge-Kutta; used only as an independent check.

    ``s``, ``u`` and ``dt`` may be numpy arrays to integrate a batch at once.
    """
    i = np.asarray(s.i, dtype=complex)
    v = np.asarray(s.v, dtype=complex)
    u = np.asarray(u, dtype=complex)
    h = np.asarray(dt, dtype=float) / steps
    L, C, r, R, V = p.L, p.C, p.r, p.R_L, p.V_dc

    def f(i, v):
        return (-r * i - v + V * u) / L, (i - v / R) / C

    for _ in range(steps):
        k1i, k1v = f(i, v)
        k2i, k2v = f(i + 0.5 * h * k1i, v + 0.5 * h * k1v)
        k3i, k3v = f(i + 0.5 * h * k2i, v + 0.5 * h * k2v)
        k4i, k4v = f(i + h * k3i, v + h * k3v)
        i = i + h / 6 * (k1i + 2 * k2i + 2 * k3i + k4i)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    if i.ndim == 0:
        return PlantState(complex(i), complex(v))
    return PlantState(i, v)


def stored_energy(s: PlantState, p: VsiParams, scale: float = DEFAULT_SCALE) -> float:
    """Energy in the three inductors and capacitors, in joules.

    For a balanced set with space vector ``z``, ``sum_k x_k^2 = 2 |z|^2 / (3 c^2)``.
    """
    k = 1.0 / (1.5 * scale * scale)
    return 0.5 * k * (p.L * abs(s.i) ** 2 + p.C * abs(s.v) ** 2)
