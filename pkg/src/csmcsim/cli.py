"""Command-line front end.

    csmcsim run SCENARIO -o DIR [--analyses kpi,fft,plane,sectors]
    csmcsim compare SCENARIO [--methods sbi,csa] [--d0 0.05,0.10] -o DIR
    csmcsim deviation -o DIR

Exit status: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from . import analysis, scenario as scenario_io
from .engine import Scenario, Trace, run
from .errors import ConfigError
from .modulation import deviation_modulus, deviation_phase

SCHEMA = "csmcsim/1"
ANALYSES = ("kpi", "fft", "plane", "sectors")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def _write_csv(path: Path, kind: str, header, rows, note: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {SCHEMA} {kind}" + (f"; {note}" if note else "") + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([r if isinstance(r, str) else _fmt(r) for r in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def write_trace(path: Path, tr: Trace) -> None:
    rows = zip(tr.t, tr.i.real, tr.i.imag, tr.v.real, tr.v.imag, tr.sigma.real, tr.sigma.imag,
               tr.sector, tr.duty, tr.margin)
    _write_csv(path, "trace", ["t", "i_re", "i_im", "v_re", "v_im", "sigma_re", "sigma_im",
                               "sector", "duty", "existence_margin"], rows)


def write_waveform(path: Path, tr: Trace) -> None:
    _write_csv(path, "waveform", ["t_start", "dur", "ua", "ub", "uc"], tr.segments())


def _window(tr: Trace, window):
    return window if window is not None else analysis.default_window(tr)


def _num(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x


def kpi_record(tr: Trace, window, digest: str) -> dict:
    rep = analysis.kpi(tr, window)
    return {
        "schema": SCHEMA,
        "scenario_hash": digest,
        "method": rep.method,
        "d0": rep.d0,
        "window": list(rep.window),
        "samples": rep.samples,
        "rmse": _num(rep.rmse),
        "mae": _num(rep.mae),
        "per_phase_rmse": dict(zip(analysis.PHASES, rep.per_phase_rmse)),
        "per_phase_mae": dict(zip(analysis.PHASES, rep.per_phase_mae)),
        "max_abs_sigma": analysis.sliding_band(tr, rep.window) if rep.samples else None,
        "min_existence_margin": float(np.min(tr.margin)) if len(tr) else None,
    }


def cmd_run(args) -> int:
    sf = scenario_io.load(args.scenario)
    analyses = [a.strip() for a in args.analyses.split(",") if a.strip()]
    for a in analyses:
        if a not in ANALYSES:
            raise ConfigError(f"unknown analysis {a!r}; choose from {ANALYSES}", "analyses")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    tr = run(sf.scenario)
    window = _window(tr, sf.kpi_window)
    write_trace(out / "trace.csv", tr)
    write_waveform(out / "waveform.csv", tr)
    rec = kpi_record(tr, window, sf.digest)
    _write_json(out / "kpi.json", rec)
    spectrum = analysis.switching_spectrum(tr, "a", window)
    _write_csv(out / "spectrum.csv", "spectrum", ["frequency_hz", "amplitude"],
               zip(spectrum.frequencies, spectrum.magnitudes),
               note="phase a, single-sided peak amplitude (unit square wave -> 4/pi)")
    if "plane" in analyses:
        pl = analysis.sliding_plane(tr, window)
        _write_csv(out / "plane.csv", "plane", ["sigma_re", "sigma_im"], pl.points)
    if "sectors" in analyses:
        _write_csv(out / "sectors.csv", "sectors", ["t", "sector"], analysis.sector_trace(tr, window))
    if "fft" in analyses and len(tr):
        peaks = analysis.dominant_peaks(spectrum, 5)
        _write_csv(out / "peaks.csv", "peaks", ["frequency_hz", "amplitude"], peaks)
    print(_summary_line(rec))
    return 0


def _summary_line(rec) -> str:
    tag = rec["method"] + (f"(d0={rec['d0']:g})" if rec["d0"] is not None else "")
    if rec["samples"] == 0:
        return f"{tag}: empty window"
    w0, w1 = rec["window"]
    return (f"{tag}: RMSE={rec['rmse']:.4f} A  MAE={rec['mae']:.4f} A  "
            f"window=[{w0 * 1e3:.3f}, {w1 * 1e3:.3f}] ms")


def _csv_floats(text: str, key: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--{key}: expected comma-separated numbers", key) from None


def compare_variants(sc: Scenario, methods, d0_values) -> list[Scenario]:
    variants = []
    for m in methods:
        if m in ("SBI", "CSA"):
            variants.append(replace(sc, method=m, d0=0.0))
        elif m == "ZCSA" and not d0_values:
            variants.append(replace(sc, method="ZCSA"))
    for d0 in d0_values:
        variants.append(replace(sc, method="ZCSA", d0=d0))
    return variants


def cmd_compare(args) -> int:
    sf = scenario_io.load(args.scenario)
    methods = [m.strip().upper() for m in args.methods.split(",") if m.strip()] if args.methods else []
    for m in methods:
        if m not in ("SBI", "CSA", "ZCSA"):
            raise ConfigError(f"unknown method {m!r}", "methods")
    d0_values = _csv_floats(args.d0, "d0") if args.d0 else []
    variants = compare_variants(sf.scenario, methods, d0_values)
    if not variants:
        raise ConfigError("nothing to compare: give --methods and/or --d0", "methods")
    for v in variants:
        v.validate()
    band_sc = replace(sf.scenario, method="ZCSA", d0=args.band_d0).validate()
    todo = variants + [band_sc]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            traces = list(pool.map(run, todo))
    else:
        traces = [run(v) for v in todo]
    band_tr = traces.pop()
    window = _window(band_tr, sf.kpi_window)
    band = analysis.sliding_band(band_tr, window)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for v, tr in zip(variants, traces):
        rep = analysis.kpi(tr, window)
        lost = analysis.sliding_lost(tr, window, band, args.band_factor)
        rows.append((v.method, "" if v.method != "ZCSA" else _fmt(v.d0), rep.rmse, rep.mae,
                     analysis.sliding_band(tr, window), "true" if lost else "false"))
    _write_csv(out / "kpi_table.csv", "kpi_table",
               ["method", "d0", "rmse", "mae", "max_abs_sigma", "sliding_lost"], rows,
               note=f"scenario {sf.digest}; band {band!r} from ZCSA d0={args.band_d0:g} x{args.band_factor:g}")
    for r in rows:
        tag = r[0] + (f"(d0={r[1]})" if r[1] else "")
        print(f"{tag:>14}  RMSE={r[2]:.4f}  MAE={r[3]:.4f}  sliding_lost={r[5]}")
    return 0


def deviation_table(step: float = 0.001):
    n = int(round(1.0 / step))
    d = np.arange(n + 1) / n
    return d, np.array([deviation_modulus(x) for x in d]), np.array([deviation_phase(x) for x in d])


def deviation_extrema() -> dict:
    """Locate the deviation maxima by bounded scalar optimisation."""
    opts = {"xatol": 1e-10}
    mod = minimize_scalar(lambda x: -deviation_modulus(x), bounds=(0, 1), method="bounded", options=opts)
    hi = minimize_scalar(lambda x: -deviation_phase(x), bounds=(0, 0.5), method="bounded", options=opts)
    lo = minimize_scalar(deviation_phase, bounds=(0.5, 1), method="bounded", options=opts)
    return {
        "e_mod_max": (float(mod.x), deviation_modulus(mod.x)),
        "e_ph_max": (float(hi.x), deviation_phase(hi.x)),
        "e_ph_min": (float(lo.x), deviation_phase(lo.x)),
    }


def cmd_deviation(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    d, em, ep = deviation_table()
    _write_csv(out / "deviation.csv", "deviation", ["d", "e_mod", "e_ph_deg"], zip(d, em, ep))
    ex = deviation_extrema()
    (dm, vm), (d1, v1), (d2, v2) = ex["e_mod_max"], ex["e_ph_max"], ex["e_ph_min"]
    print(f"e_mod max {vm:.4f} at d={dm:.3f}")
    print(f"e_ph  max {v1:+.3f} deg at d={d1:.3f}; min {v2:+.3f} deg at d={d2:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csmcsim", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario")
    r.add_argument("scenario")
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--analyses", default="kpi,fft")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="KPI table over methods and zero duty cycles")
    c.add_argument("scenario")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--methods", default="")
    c.add_argument("--d0", default="")
    c.add_argument("--band-d0", type=float, default=0.25,
                   help="zero duty cycle of the run that defines the sliding band")
    c.add_argument("--band-factor", type=float, default=3.0)
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_compare)

    d = sub.add_parser("deviation", help="tabulate the CSA deviation functions")
    d.add_argument("-o", "--output", required=True)
    d.set_defaults(func=cmd_deviation)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        field = f" [{exc.field}]" if exc.field else ""
        print(f"config error{field}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
