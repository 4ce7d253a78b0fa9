"""Command-line front end.

Subcommands cover the full workflow: ``cavity`` evaluates a geometry
(with optional one-parameter design scans), ``spectrum`` synthesizes a
transmission map to CSV + PGM, ``fit`` extracts a ridge from a map file
and runs the requested crossing model, ``report`` turns measured line
parameters into figures of merit, and ``predict`` scales a measured
system to an optimized filling factor.

Exit codes are a stable contract: 0 success, 2 configuration error,
3 fit-identifiability error, 4 I/O error.  A fit that completes but
fails to converge exits 1.  All file outputs are deterministic
functions of the configuration, including the noise seed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .cavity import (
    field_map,
    filling_factor,
    geometric_factor,
    geometry_scan,
    mode_frequencies,
    surface_resistance,
)
from .config import ConfigError, load_config
from .core import DomainError
from .estimators import (
    UnidentifiableModelError,
    cooperativity,
    coupling_per_spin,
    coupling_ratio,
    extract_ridge,
    fit_three_mode,
    fit_two_mode,
    photon_number,
    predict_optimized,
    spin_count,
)
from .modes import bogoliubov_two_mode
from .spectra import DensityMap, add_noise, density_map, lorentzian

EXIT_OK = 0
EXIT_FIT_DID_NOT_CONVERGE = 1
EXIT_CONFIG = 2
EXIT_UNIDENTIFIABLE = 3
EXIT_IO = 4

# scan --start/--stop are given in the unit the config key uses
_SCAN_UNIT = {"gap": ("um", 1e-6), "spacing": ("mm", 1e-3), "height": ("mm", 1e-3)}


def _emit(name: str, value) -> None:
    if isinstance(value, (float, np.floating)):
        value = float(value)
    print(f"{name} = {value!r}")


def _scan_csv_lines(rows):
    yield "value_m,f_dark_Hz,f_bright_Hz,xi_dark,xi_bright,error"
    for r in rows:
        err = (r.error or "").replace(",", ";")
        yield (
            f"{r.value:.9e},{r.f_dark:.9e},{r.f_bright:.9e},"
            f"{r.xi_dark:.9e},{r.xi_bright:.9e},{err}"
        )


def cmd_cavity(args) -> int:
    cfg = load_config(args.config)
    geom = cfg.require("geometry")
    sphere = cfg.require("sphere")

    if args.scan is None:
        f_dark, f_bright = mode_frequencies(geom)
        _emit("f_dark_Hz", f_dark)
        _emit("f_bright_Hz", f_bright)
        results = {}
        for mode in ("dark", "bright"):
            fmap = field_map(geom, mode, resolution=cfg.resolution)
            results[f"xi_{mode}"] = filling_factor(fmap, sphere)
            results[f"G_{mode}_ohm"] = geometric_factor(fmap, geom)
        for name in ("xi_dark", "xi_bright", "G_dark_ohm", "G_bright_ohm"):
            _emit(name, results[name])
        return EXIT_OK

    unit, scale = _SCAN_UNIT[args.scan]
    if args.start is None or args.stop is None:
        raise ConfigError("--scan needs --start and --stop")
    values = np.linspace(args.start * scale, args.stop * scale, args.steps)
    rows = geometry_scan(geom, args.scan, values, sphere, resolution=cfg.resolution)
    lines = list(_scan_csv_lines(rows))
    print("\n".join(lines))
    if args.csv is not None:
        with open(args.csv, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {args.csv}", file=sys.stderr)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    model = cfg.require("model")
    b_axis = cfg.require("b_axis")
    f_axis = cfg.require("f_axis")
    dmap = density_map(model, b_axis, f_axis, cfg.ports)
    if cfg.noise_sigma > 0.0:
        dmap = add_noise(dmap, cfg.noise_seed, cfg.noise_sigma)
    csv_path = args.output + ".csv"
    pgm_path = args.output + ".pgm"
    dmap.write_csv(csv_path)
    dmap.write_pgm(pgm_path)
    print(f"wrote {csv_path}")
    print(f"wrote {pgm_path}")
    return EXIT_OK


def cmd_fit(args) -> int:
    dmap = DensityMap.read_csv(args.map)
    B, f_peak = extract_ridge(dmap, args.prominence)
    if B.size < 10:
        raise UnidentifiableModelError(
            f"ridge extraction found {B.size} points; need at least 10"
        )
    fit = fit_two_mode(B, f_peak) if args.kind == "two-mode" else fit_three_mode(B, f_peak)
    sys.stdout.write(fit.serialize())
    return EXIT_OK if fit.converged else EXIT_FIT_DID_NOT_CONVERGE


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    rep = cfg.require("report")
    sphere = cfg.require("sphere")

    _emit("C_bright", cooperativity(rep["bright_g_over_pi"],
                                    rep["bright_kappa"], rep["bright_gamma"]))
    _emit("C_dark", cooperativity(rep["dark_g_over_pi"],
                                  rep["dark_kappa"], rep["dark_gamma"]))
    n_spins = spin_count(sphere.spin_density, sphere.diameter)
    _emit("N_spins", n_spins)
    _emit("g_per_spin_Hz", coupling_per_spin(rep["bright_g_over_pi"], n_spins))
    power_w = 1e-3 * 10.0 ** (rep["power_dbm"] / 10.0)
    _emit("photons", photon_number(power_w, rep["photon_f0"], rep["photon_q"],
                                   rep["photon_beta"], rep["photon_beta"]))
    rs = surface_resistance(rep["geometric_factor"], rep["q_measured"])
    _emit("Rs_ohm", rs)
    _emit("Rs_reference_ohm", rep["rs_reference"])
    _emit("Rs_over_reference", rs / rep["rs_reference"])
    _emit("ratio_modeled", coupling_ratio(rep["f_bright"], rep["f_dark"],
                                          rep["xi_bright"], rep["xi_dark"]))
    measured = (
        rep["bright_g_over_pi"] / rep["dark_g_over_pi"]
        if rep["dark_g_over_pi"] > 0.0 else 0.0
    )
    _emit("ratio_measured", measured)
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = load_config(args.config)
    current = dict(cfg.require("current"))
    optimized = cfg.require("optimized")
    slope = current.pop("magnon_slope")
    offset = current.pop("magnon_offset")
    out = predict_optimized(current, optimized)
    for name in ("chi", "g_opt_over_pi", "kappa_opt",
                 "cooperativity_current", "cooperativity_opt", "per_spin_scale"):
        _emit(name, out[name])

    f_b = current["f_b"]
    g_opt = out["g_opt_over_pi"]
    eig = bogoliubov_two_mode(f_b, f_b, g_opt)
    up = eig.frequencies[1] - f_b
    down = f_b - eig.frequencies[0]
    _emit("branch_offset_upper_Hz", up)
    _emit("branch_offset_lower_Hz", down)
    _emit("branch_asymmetry", abs(up - down) / (eig.frequencies[1] - eig.frequencies[0]))

    if args.map is not None:
        b_axis = cfg.require("b_axis")
        f_axis = cfg.require("f_axis")
        values = np.zeros((b_axis.size, f_axis.size))
        for i, b in enumerate(b_axis):
            branches = bogoliubov_two_mode(f_b, slope * b + offset, g_opt)
            for fk in branches.frequencies:
                values[i] += lorentzian(f_axis, 1.0, fk, out["kappa_opt"])
        dmap = DensityMap(b_axis, f_axis, values, {"kind": "bogoliubov-prediction"})
        csv_path = args.map + ".csv"
        pgm_path = args.map + ".pgm"
        dmap.write_csv(csv_path)
        dmap.write_pgm(pgm_path)
        print(f"wrote {csv_path}")
        print(f"wrote {pgm_path}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magcav",
        description="Hybrid cavity-magnon modeling: geometry, spectra, fits, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cavity", help="evaluate a cavity geometry, optionally scanning one parameter")
    p.add_argument("config")
    p.add_argument("--scan", choices=sorted(_SCAN_UNIT), help="parameter to sweep")
    p.add_argument("--start", type=float, help="sweep start (um for gap, mm otherwise)")
    p.add_argument("--stop", type=float, help="sweep stop (um for gap, mm otherwise)")
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--csv", help="also write the scan table to this file")
    p.set_defaults(func=cmd_cavity)

    p = sub.add_parser("spectrum", help="synthesize a transmission map to CSV and PGM")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True, help="output path prefix")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fit", help="fit a crossing model to a map file")
    p.add_argument("map", help="long-form CSV map (B_T, f_Hz, s21_dB)")
    p.add_argument("--kind", choices=("two-mode", "three-mode"), default="two-mode")
    p.add_argument("--prominence", type=float, default=0.25,
                   help="ridge peak prominence relative to the column maximum")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="figures of merit from measured line parameters")
    p.add_argument("config")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("predict", help="scale a measured system to an optimized filling factor")
    p.add_argument("config")
    p.add_argument("--map", help="write the predicted map to this path prefix")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnidentifiableModelError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_UNIDENTIFIABLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
