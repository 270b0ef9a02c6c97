"""Post-run metrics over a time window of a :class:`~csmcsim.engine.Trace`."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .engine import Trace
from .errors import RangeError
from .transform import complex_to_abc_array

PHASES = ("a", "b", "c")


@dataclass(frozen=True)
class KpiReport:
    rmse: float
    mae: float
    window: tuple[float, float]
    method: str
    d0: float | None
    per_phase_rmse: tuple[float, float, float] = (0.0, 0.0, 0.0)
    per_phase_mae: tuple[float, float, float] = (0.0, 0.0, 0.0)
    samples: int = 0


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Single-sided peak amplitudes.

    A sinusoid ``A cos(2 pi f t)`` shows up as ``A`` at ``f``; a unit (+/-1)
    square wave therefore has ``4/pi`` at its fundamental. DC is the mean.
    """

    frequencies: np.ndarray
    magnitudes: np.ndarray
    window: tuple[float, float]
    phase: str
    rate: float
    n_samples: int

    @property
    def resolution(self) -> float:
        return 1.0 / (self.window[1] - self.window[0])

    def mean_square(self) -> float:
        """Mean square of the resampled signal rebuilt from the amplitudes (Parseval)."""
        m = self.magnitudes
        if len(m) == 0:
            return 0.0
        if len(m) == 1:
            return float(m[0] ** 2)
        power = m[0] ** 2
        if self.n_samples % 2 == 0:
            power += 0.5 * np.sum(m[1:-1] ** 2) + m[-1] ** 2
        else:
            power += 0.5 * np.sum(m[1:] ** 2)
        return float(power)


@dataclass(frozen=True, eq=False)
class SlidingPlane:
    points: np.ndarray  # (n, 2): Re sigma, Im sigma
    max_abs: float


@dataclass(frozen=True)
class HexagonFit:
    """Six support lines at normals ``orientation + k*60 deg`` enclosing the cloud."""

    orientation_deg: float
    supports: tuple[float, ...]
    area: float
    hull_area: float

    @property
    def fill_ratio(self) -> float:
        """Hexagon area over convex-hull area; 1 for a hexagonal cloud, ~1.10 for a disc."""
        return self.area / self.hull_area if self.hull_area > 0 else math.inf


def default_window(trace: Trace) -> tuple[float, float]:
    """The last full reference period of the run."""
    period = 2 * math.pi / trace.scenario.reference.omega
    end = trace.duration
    return (max(0.0, end - period), end)


def window_mask(trace: Trace, window=None) -> np.ndarray:
    t0, t1 = default_window(trace) if window is None else window
    tol = 1e-9 * trace.scenario.Ts
    if t0 < -tol or t1 > trace.duration + tol or t1 < t0:
        raise RangeError(f"window ({t0}, {t1}) outside trace [0, {trace.duration}]")
    return (trace.t >= t0 - tol) & (trace.t < t1 - tol)


def _window(trace, window):
    return default_window(trace) if window is None else (float(window[0]), float(window[1]))


def pooled_errors(err: np.ndarray) -> tuple[float, float]:
    """``(rmse, mae)`` pooled over every entry of an ``(n, 3)`` phase-error array."""
    err = np.asarray(err, dtype=float)
    if err.size == 0:
        return math.nan, math.nan
    return float(np.sqrt(np.mean(err ** 2))), float(np.max(np.abs(err)))


def kpi(trace: Trace, window=None) -> KpiReport:
    """Pooled current RMSE and maximum absolute error over ``window``.

    Errors are taken per phase at each sampling instant; the pool is all three
    phases times all samples in the window.
    """
    window = _window(trace, window)
    mask = window_mask(trace, window)
    sc = trace.scenario
    d0 = sc.d0 if sc.method == "ZCSA" else None
    if not mask.any():
        return KpiReport(math.nan, math.nan, window, sc.method, d0)
    err = complex_to_abc_array(trace.i[mask] - trace.i_ref[mask], 0.0, sc.scale)
    per_rmse = np.sqrt(np.mean(err ** 2, axis=0))
    per_mae = np.max(np.abs(err), axis=0)
    rmse, mae = pooled_errors(err)
    return KpiReport(
        rmse=rmse,
        mae=mae,
        window=window,
        method=sc.method,
        d0=d0,
        per_phase_rmse=tuple(float(x) for x in per_rmse),
        per_phase_mae=tuple(float(x) for x in per_mae),
        samples=int(mask.sum()),
    )


def resample_phase(trace: Trace, phase: str, window, rate: float) -> np.ndarray:
    """Cell averages of the piecewise-constant leg signal on a uniform grid.

    Exact: the running integral of a piecewise-constant signal is piecewise
    linear, so interpolating it at the cell edges loses nothing.
    """
    col = PHASES.index(phase)
    t0, t1 = window
    n = int(round((t1 - t0) * rate))
    if n <= 0:
        return np.zeros(0)
    tick = trace.tick
    # integral in units of (leg value * ticks) at each segment boundary
    bounds = np.concatenate([trace.seg_start, [trace.seg_start[-1] + trace.seg_ticks[-1]]]) \
        if len(trace.seg_start) else np.zeros(1)
    cum = np.concatenate([[0.0], np.cumsum(trace.seg_ticks * trace.seg_vec[:, col].astype(float))])
    edges = t0 / tick + np.arange(n + 1) * ((t1 - t0) / n / tick)
    F = np.interp(edges, bounds.astype(float), cum)
    return np.diff(F) / np.diff(edges)


def switching_spectrum(trace: Trace, phase: str = "a", window=None,
                       rate_multiple: int = 16) -> Spectrum:
    """Amplitude spectrum of one leg's switching signal (rectangular window)."""
    if phase not in PHASES:
        raise ValueError(f"phase must be one of {PHASES}")
    window = _window(trace, window)
    window_mask(trace, window)
    rate = rate_multiple / trace.scenario.Ts
    x = resample_phase(trace, phase, window, rate)
    n = len(x)
    if n == 0:
        return Spectrum(np.zeros(0), np.zeros(0), window, phase, rate, 0)
    X = np.abs(np.fft.rfft(x)) / n
    X[1:] *= 2.0
    if n % 2 == 0:
        X[-1] /= 2.0
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    return Spectrum(freqs, X, window, phase, rate, n)


def dominant_peaks(s: Spectrum, count: int = 5, exclude_below: float = 1e3) -> list[tuple[float, float]]:
    """The ``count`` largest local maxima at or above ``exclude_below`` Hz, largest first."""
    if count < 1:
        raise ValueError("count must be >= 1")
    m, f = s.magnitudes, s.frequencies
    if len(m) < 2:
        return []
    left = np.concatenate([[-np.inf], m[:-1]])
    right = np.concatenate([m[1:], [-np.inf]])
    idx = np.nonzero((m > left) & (m >= right) & (f >= exclude_below))[0]
    order = sorted(idx, key=lambda k: (-m[k], f[k]))[:count]
    return [(float(f[k]), float(m[k])) for k in order]


def sliding_plane(trace: Trace, window=None) -> SlidingPlane:
    mask = window_mask(trace, _window(trace, window))
    sig = trace.sigma[mask]
    pts = np.column_stack([sig.real, sig.imag])
    return SlidingPlane(pts, float(np.max(np.abs(sig))) if len(sig) else 0.0)


def _hexagon_area(supports, normals) -> float:
    verts = []
    for k in range(6):
        n1, n2 = normals[k], normals[(k + 1) % 6]
        M = np.array([n1, n2])
        verts.append(np.linalg.solve(M, [supports[k], supports[(k + 1) % 6]]))
    verts = np.array(verts)
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def fit_hexagon(points: np.ndarray, step_deg: float = 0.25) -> HexagonFit:
    """Smallest-area enclosing hexagon with 60-degree symmetric edge normals."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise ValueError("need at least three points")
    best = None
    for phi in np.arange(0.0, 60.0, step_deg):
        ang = np.radians(phi + 60.0 * np.arange(6))
        normals = np.column_stack([np.cos(ang), np.sin(ang)])
        supports = (pts @ normals.T).max(axis=0)
        area = _hexagon_area(supports, normals)
        if best is None or area < best[0]:
            best = (area, phi, supports)
    area, phi, supports = best
    try:
        hull = ConvexHull(pts).volume
    except Exception:  # degenerate (collinear) cloud
        hull = 0.0
    return HexagonFit(float(phi), tuple(float(x) for x in supports), float(area), float(hull))


def sector_trace(trace: Trace, window=None) -> list[tuple[float, int]]:
    """Per-sample sector of the desired control, in the method's own convention."""
    mask = window_mask(trace, _window(trace, window))
    return [(float(t), int(s)) for t, s in zip(trace.t[mask], trace.sector[mask])]


def adjacent_transition_fraction(sectors) -> float:
    """Share of sector changes that step to a neighbouring sector (mod 6)."""
    seq = [s for _, s in sectors] if sectors and isinstance(sectors[0], tuple) else list(sectors)
    changes = [(a, b) for a, b in zip(seq, seq[1:]) if a != b]
    if not changes:
        return 1.0
    adjacent = sum((b - a) % 6 in (1, 5) for a, b in changes)
    return adjacent / len(changes)


def sliding_band(trace: Trace, window=None) -> float:
    """Largest ``|sigma|`` over the window."""
    return sliding_plane(trace, window).max_abs


def sliding_lost(trace: Trace, window, reference_band: float, factor: float = 3.0) -> bool:
    """True when ``|sigma|`` leaves ``factor`` times a known-good sliding band."""
    return sliding_band(trace, window) > factor * reference_band


def recovery_time(trace: Trace, t_event: float, band: float, t_end: float | None = None) -> float:
    """Time after ``t_event`` from which ``|sigma| <= band`` holds up to ``t_end``.

    Returns ``inf`` if the band is never re-entered for good.
    """
    t_end = trace.duration if t_end is None else t_end
    mask = window_mask(trace, (t_event, t_end))
    t = trace.t[mask]
    outside = np.nonzero(np.abs(trace.sigma[mask]) > band)[0]
    if len(outside) == 0:
        return 0.0
    last = outside[-1]
    if last + 1 >= len(t):
        return math.inf
    return float(t[last + 1] - t_event)


def tracking_bias(trace: Trace, window=None) -> complex:
    """Mean ``sigma`` seen from the reference frame (``sigma * exp(-j omega t)``)."""
    mask = window_mask(trace, _window(trace, window))
    omega = trace.scenario.reference.omega
    return complex(np.mean(trace.sigma[mask] * np.exp(-1j * omega * trace.t[mask])))
