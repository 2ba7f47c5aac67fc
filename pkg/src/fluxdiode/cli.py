"""Command-line surface: parameter reports, spectra, maps, calibration, fits.

Everything is emitted as CSV or key=value text for offline plotting; no
interactive mode.  Frequencies cross the CLI boundary in GHz, rates in
MHz, powers in dBm, flux in units of the flux quantum.  Grids use
START:STOP:COUNT syntax; write grids that begin with a negative number
in the `--flag=value` form (`--power-dbm=-120:-100:21`) so the shell
parser does not mistake them for options.  Exit codes: 0 success, 2
usage error, 3 data error, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from fluxdiode import calibration as cal
from fluxdiode import fitting, hybrid, qubit, transmission
from fluxdiode.errors import ConvergenceError, DataError, ParameterError
from fluxdiode.params import PowerLevel, load_params, load_qubit_params


def _parse_grid(spec: str, scale: float = 1.0) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise ParameterError(
            f"bad grid {spec!r}, expected START:STOP:COUNT") from None
    if count < 2:
        raise ParameterError(f"grid count must be >= 2, got {count}")
    if not start < stop:
        raise ParameterError(f"grid start must be below stop, got {spec!r}")
    return np.linspace(start * scale, stop * scale, count)


def _parse_power(spec: str) -> np.ndarray:
    """A power flag is either one dBm value or a START:STOP:COUNT grid."""
    if ":" in spec:
        return _parse_grid(spec)
    try:
        return np.array([float(spec)])
    except ValueError:
        raise ParameterError(f"bad power {spec!r}") from None


def _write_atomic(path, write_fn):
    """Write through a temp file so failures leave no partial output."""
    tmp = f"{path}.tmp"
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _build_model(args) -> transmission.KerrModel:
    model = transmission.from_circuit(load_params(args.params))
    updates = {}
    if args.fr_ghz is not None:
        updates["f_res"] = args.fr_ghz * 1e9
    if args.kappa_h_mhz is not None:
        updates["kappa_h"] = args.kappa_h_mhz * 1e6
    if args.kappa_h1_mhz is not None:
        updates["kappa_h1"] = args.kappa_h1_mhz * 1e6
    if args.kappa_h2_mhz is not None:
        updates["kappa_h2"] = args.kappa_h2_mhz * 1e6
    if args.kerr_mhz is not None:
        updates["kerr"] = args.kerr_mhz * 1e6
    if args.pstar1_dbm is not None:
        updates["pstar1"] = PowerLevel.from_dbm(args.pstar1_dbm)
    if args.pstar2_dbm is not None:
        updates["pstar2"] = PowerLevel.from_dbm(args.pstar2_dbm)
    return model.replace(**updates) if updates else model


def _add_model_flags(p: argparse.ArgumentParser, params_required: bool = True):
    p.add_argument("--params", required=params_required, help="parameter file")
    p.add_argument("--fr-ghz", type=float, help="override dressed resonance")
    p.add_argument("--kappa-h-mhz", type=float, help="override total linewidth")
    p.add_argument("--kappa-h1-mhz", type=float, help="override port-1 damping")
    p.add_argument("--kappa-h2-mhz", type=float, help="override port-2 damping")
    p.add_argument("--kerr-mhz", type=float, help="override Kerr coefficient")
    p.add_argument("--pstar1-dbm", type=float, help="override direction-31 threshold")
    p.add_argument("--pstar2-dbm", type=float, help="override direction-42 threshold")


def _print_kv(pairs):
    for key, value in pairs:
        print(f"{key} = {value!r}" if isinstance(value, str) else f"{key} = {value}")


def _cmd_modes(args) -> int:
    params = load_params(args.params)
    mode = hybrid.derive_mode(params)
    theta = mode.mixing_angle
    pairs = [
        ("f_high_hz", mode.f_high),
        ("f_low_hz", mode.f_low),
        ("mixing_angle_rad", theta),
        ("cot2_mixing_angle", (np.cos(theta) / np.sin(theta)) ** 2
         if theta > 0 else float("inf")),
        ("kappa_c1_hz", mode.kappa_c1),
        ("kappa_c2_hz", mode.kappa_c2),
        ("kappa_h1_hz", mode.kappa_h1),
        ("kappa_h2_hz", mode.kappa_h2),
        ("kappa_hi_hz", mode.kappa_hi),
        ("kappa_h_hz", mode.kappa_h),
        ("pstar1_w", mode.pstar1.watts),
        ("pstar2_w", mode.pstar2.watts),
        ("pstar1_dbm", mode.pstar1.dbm),
        ("pstar2_dbm", mode.pstar2.dbm),
        ("pstar_ratio", mode.pstar1.watts / mode.pstar2.watts),
    ]
    _print_kv(pairs)
    if args.csv:
        def write(path):
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["key", "value"])
                for key, value in pairs:
                    writer.writerow([key, repr(float(value))])
        _write_atomic(args.csv, write)
    return 0


def _cmd_spectrum(args) -> int:
    model = _build_model(args)
    freq = _parse_grid(args.freq, scale=1e9)
    power = PowerLevel.from_dbm(args.power_dbm)
    s31 = transmission.duffing_transmission(model, freq, power, "31")
    s42 = transmission.duffing_transmission(model, freq, power, "42")

    def write(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frequency_hz", "s31", "s42"])
            for f, a, b in zip(freq, s31, s42):
                writer.writerow([repr(float(f)), repr(float(a)), repr(float(b))])
    _write_atomic(args.output, write)
    return 0


def _cmd_map(args) -> int:
    model = _build_model(args)
    freq = _parse_grid(args.freq, scale=1e9)
    power = _parse_power(args.power_dbm)
    smap = transmission.transmission_map(model, freq, power, args.direction)
    quantity = "s31" if args.direction == "31" else "s42"
    _write_atomic(args.output,
                  lambda p: transmission.write_map_csv(p, smap, quantity))
    return 0


def _cmd_rmap(args) -> int:
    model = _build_model(args)
    freq = _parse_grid(args.freq, scale=1e9)
    power = _parse_power(args.power_dbm)
    smap = transmission.rectification_map(model, freq, power,
                                          threshold=args.threshold)
    _write_atomic(args.output,
                  lambda p: transmission.write_map_csv(p, smap, "r"))
    return 0


def _cmd_qubit(args) -> int:
    base = load_qubit_params(args.params, flux=0.5)
    flux = _parse_grid(args.flux)
    spectrum = qubit.spectrum_curve(base, flux, n=args.basis,
                                    check_convergence=not args.no_convergence_check)

    def write(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["flux", "f01_hz", "f12_hz", "converged"])
            for phi, a, b in zip(spectrum.flux, spectrum.f01, spectrum.f12):
                writer.writerow([repr(float(phi)), repr(float(a)),
                                 repr(float(b)), int(spectrum.converged)])
    _write_atomic(args.output, write)
    return 0


def _cmd_calibrate(args) -> int:
    if args.extract:
        sweeps = []
        for path in args.extract:
            sweeps.extend(cal.read_sweep_csv(path))
        bg = cal.extract_background(sweeps, method=args.method)
        _write_atomic(args.out_bg, lambda p: cal.write_background_csv(p, bg))
        return 0
    raw_sweeps = cal.read_sweep_csv(args.raw)
    if len(raw_sweeps) != 1:
        raise DataError("calibration input must hold a single sweep (no flux column)")
    bg = cal.read_background_csv(args.bg)
    result = cal.calibrate(raw_sweeps[0], bg)
    _write_atomic(args.output, lambda p: cal.write_calibrated_csv(p, result))
    return 0


def _read_columns_csv(path, required):
    """Plain CSV with a header row; returns dict of named float columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh)
                if r and not r[0].lstrip().startswith("#")]
    header = [c.strip().lower() for c in rows[0]]
    missing = [c for c in required if c not in header]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    data = np.asarray([[float(c) for c in r] for r in rows[1:]], dtype=float)
    if data.size == 0:
        raise DataError(f"{path}: no data rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def _print_fit(result: fitting.FitResult) -> int:
    for key in sorted(result.params):
        print(f"{key} = {result.params[key]}")
    for key in sorted(result.stderr):
        print(f"stderr_{key} = {result.stderr[key]}")
    print(f"rss = {result.rss}")
    print(f"n_iter = {result.n_iter}")
    print(f"converged = {result.converged}")
    if result.message:
        print(f"message = {result.message!r}")
    return 0 if result.converged else 4


def _cmd_fit(args) -> int:
    if args.kind in ("linear", "qubit-band") and not args.params:
        raise ParameterError(f"fit --kind {args.kind} needs --params")
    if args.kind == "linear":
        cols = _read_columns_csv(args.data, ["frequency_hz", "s41_linear", "s32_linear"])
        params = load_params(args.params)
        result = fitting.fit_linear_lineshape(
            cols["frequency_hz"], cols["s41_linear"], cols["s32_linear"],
            f1=params.f1, f2=params.f2)
    elif args.kind == "crossing":
        cols = _read_columns_csv(args.data, ["f01_hz", "f_obs_hz", "branch"])
        result = fitting.fit_avoided_crossing(
            cols["f01_hz"], cols["f_obs_hz"], cols["branch"].astype(int))
    elif args.kind == "qubit-band":
        cols = _read_columns_csv(args.data, ["flux", "f01_hz"])
        qparams = load_qubit_params(args.params, flux=0.5)
        result = fitting.fit_qubit_band(cols["flux"], cols["f01_hz"],
                                        ec1=qparams.ec1, ec2=qparams.ec2,
                                        basis=args.basis)
    else:  # duffing
        smap, _ = transmission.read_map_csv(args.data)
        result = fitting.fit_duffing_map(smap, args.direction)
    return _print_fit(result)


def _cmd_synth(args) -> int:
    if args.kind != "crossing" and not args.params:
        raise ParameterError(f"synth --kind {args.kind} needs --params")
    if args.kind == "linear":
        model = _build_model(args)
        freq = _parse_grid(args.freq, scale=1e9)
        s41, s32 = fitting.synth_linear_sweeps(model, freq, args.sigma, args.seed)

        def write(path):
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["frequency_hz", "s41_linear", "s32_linear"])
                for f, a, b in zip(freq, s41, s32):
                    writer.writerow([repr(float(f)), repr(float(a)), repr(float(b))])
        _write_atomic(args.output, write)
    elif args.kind == "duffing-map":
        model = _build_model(args)
        freq = _parse_grid(args.freq, scale=1e9)
        power = _parse_power(args.power_dbm)
        smap = fitting.synth_duffing_map(model, freq, power, args.direction,
                                         args.sigma, args.seed)
        quantity = "s31" if args.direction == "31" else "s42"
        _write_atomic(args.output,
                      lambda p: transmission.write_map_csv(p, smap, quantity))
    elif args.kind == "qubit-band":
        qparams = load_qubit_params(args.params, flux=0.5)
        flux = _parse_grid(args.flux)
        band = fitting.synth_qubit_band(qparams, flux, args.sigma, args.seed,
                                        basis=args.basis)

        def write(path):
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["flux", "f01_hz"])
                for phi, f in zip(flux, band):
                    writer.writerow([repr(float(phi)), repr(float(f))])
        _write_atomic(args.output, write)
    else:  # crossing
        f01_grid = _parse_grid(args.f01_ghz, scale=1e9)
        f01v, fobs, branch = fitting.synth_crossing(
            args.f_mode_ghz * 1e9, args.g_mhz * 1e6, f01_grid,
            args.jitter_mhz * 1e6, args.seed)

        def write(path):
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["f01_hz", "f_obs_hz", "branch"])
                for a, b, c in zip(f01v, fobs, branch):
                    writer.writerow([repr(float(a)), repr(float(b)), int(c)])
        _write_atomic(args.output, write)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxdiode",
        description="Flux-qubit microwave diode: modes, spectra, maps, "
                    "calibration and fits")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="hybrid-mode report from a parameter file")
    p.add_argument("--params", required=True)
    p.add_argument("--csv", help="also write the report as CSV")
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("spectrum", help="|S31|^2 and |S42|^2 vs frequency at one power")
    _add_model_flags(p)
    p.add_argument("--freq", required=True, help="GHz grid START:STOP:COUNT")
    p.add_argument("--power-dbm", type=float, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("map", help="power-frequency transmission map, one direction")
    _add_model_flags(p)
    p.add_argument("--freq", required=True, help="GHz grid START:STOP:COUNT")
    p.add_argument("--power-dbm", required=True, help="dBm value or grid")
    p.add_argument("--direction", choices=transmission.DIRECTIONS, default="31")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("rmap", help="rectification-ratio map with noise masking")
    _add_model_flags(p)
    p.add_argument("--freq", required=True, help="GHz grid START:STOP:COUNT")
    p.add_argument("--power-dbm", required=True, help="dBm value or grid")
    p.add_argument("--threshold", type=float,
                   default=transmission.DEFAULT_MASK_THRESHOLD,
                   help="mask points with s31+s42 below this (0 disables)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_rmap)

    p = sub.add_parser("qubit", help="flux-qubit f01/f12 vs flux")
    p.add_argument("--params", required=True)
    p.add_argument("--flux", required=True, help="flux grid START:STOP:COUNT")
    p.add_argument("--basis", type=int, default=qubit.DEFAULT_BASIS)
    p.add_argument("--no-convergence-check", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_qubit)

    p = sub.add_parser("calibrate", help="background extraction / sweep calibration")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--extract", nargs="+", metavar="STACK_CSV",
                       help="flux-stacked through-route sweeps")
    group.add_argument("--raw", help="raw sweep CSV to calibrate")
    p.add_argument("--method", choices=("median", "max"), default="median")
    p.add_argument("--out-bg", help="output background CSV (with --extract)")
    p.add_argument("--bg", help="background CSV (with --raw)")
    p.add_argument("-o", "--output", help="calibrated output CSV (with --raw)")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("fit", help="least-squares parameter estimation")
    p.add_argument("--kind", required=True,
                   choices=("linear", "crossing", "qubit-band", "duffing"))
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--params", help="parameter file (linear, qubit-band)")
    p.add_argument("--direction", choices=transmission.DIRECTIONS, default="31")
    p.add_argument("--basis", type=int, default=8)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("synth", help="synthetic data with reproducible noise")
    p.add_argument("--kind", required=True,
                   choices=("linear", "duffing-map", "qubit-band", "crossing"))
    _add_model_flags(p, params_required=False)
    p.add_argument("--freq", help="GHz grid START:STOP:COUNT")
    p.add_argument("--power-dbm", help="dBm value or grid")
    p.add_argument("--direction", choices=transmission.DIRECTIONS, default="31")
    p.add_argument("--flux", help="flux grid START:STOP:COUNT")
    p.add_argument("--f01-ghz", help="qubit frequency grid, GHz")
    p.add_argument("--f-mode-ghz", type=float, help="bare mode frequency, GHz")
    p.add_argument("--g-mhz", type=float, help="crossing coupling, MHz")
    p.add_argument("--jitter-mhz", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.0, help="noise (linear or Hz)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--basis", type=int, default=8)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_synth)

    return parser


def run(argv) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "calibrate":
            if args.extract and not args.out_bg:
                parser.error("--extract requires --out-bg")
            if args.raw and not (args.bg and args.output):
                parser.error("--raw requires --bg and -o")
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParameterError, DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
