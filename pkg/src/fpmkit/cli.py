"""Command-line pipeline: simulate, reconstruct, decompose, evaluate.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.  Every command is deterministic for a given --seed.
The FPM_THREADS environment variable caps internal worker threads.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import ExitStack
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DataError, NumericalError
from .geometry import (
    ErrorModelSpec,
    GaussianNoise,
    PoissonNoise,
    PupilSpec,
    SystemGeometry,
    center_window,
    upsampling_factor,
)
from .io import MANIFEST_NAME, load_stack, read_image, save_stack, write_pfm
from .metrics import (
    MetricReport,
    axis_artifact_energy,
    background_phase_std,
    phase_align,
    rmse,
)
from .reconstruct import FpmReconstructor
from .simulate import make_ground_truth, quantize_stack, simulate_stack
from .transforms import dft2, periodic_smooth_decompose

_GEOMETRY_KEYS = {
    "led_rows",
    "led_cols",
    "led_pitch",
    "led_to_sample",
    "wavelength",
    "objective_na",
    "camera_pixel",
    "magnification",
    "lr_size",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the pipeline reserves
    2 for data problems, so remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="fpmkit",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"fpmkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser(
        "simulate", help="render a low-resolution stack from a config file"
    )
    p_sim.add_argument(
        "config",
        help="JSON config path, or the name of a bundled config "
        "(sim_paper_s2, exp_paper_s3)",
    )
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")

    p_rec = sub.add_parser("reconstruct", help="reconstruct a stack directory")
    p_rec.add_argument("stack", help=f"directory containing {MANIFEST_NAME}")
    p_rec.add_argument("--out", required=True, help="output directory")
    p_rec.add_argument(
        "--backend", choices=["fft", "dct", "pft"], default="fft",
        help="forward-transform backend (default fft)",
    )
    p_rec.add_argument(
        "--guess", choices=["ones", "bilinear", "bicubic", "random"],
        default="ones", help="initial-guess strategy (default ones)",
    )
    p_rec.add_argument("--iters", type=int, default=30, help="sweeps (default 30)")
    p_rec.add_argument(
        "--upsampling", type=int, default=None,
        help="HR upsampling factor (default: automatic)",
    )
    p_rec.add_argument(
        "--bandpass", action="store_true",
        help="zero the final spectrum outside the synthetic aperture",
    )
    p_rec.add_argument(
        "--updater", choices=["gauss_newton", "pie"], default="gauss_newton",
        help="spectrum update rule (default gauss_newton)",
    )
    p_rec.add_argument(
        "--recover-pupil", action="store_true", help="jointly refine the pupil"
    )
    p_rec.add_argument(
        "--decompose-measurements", action="store_true",
        help="periodize the measured amplitudes before iterating",
    )
    p_rec.add_argument("--seed", type=int, default=0, help="random-guess seed")

    p_dec = sub.add_parser(
        "decompose", help="periodic-plus-smooth split of a single image"
    )
    p_dec.add_argument("image", help="PFM or 8-bit PGM input image")
    p_dec.add_argument("--out", required=True, help="output directory")

    p_eval = sub.add_parser("evaluate", help="score a reconstruction directory")
    p_eval.add_argument("recon", help="directory written by 'reconstruct'")
    p_eval.add_argument(
        "--truth", default=None,
        help="directory containing truth_amplitude.pfm and truth_phase.pfm",
    )
    p_eval.add_argument(
        "--background-region", default=None, metavar="R0,C0,H,W",
        help="sample-free rectangle for the background phase statistic",
    )
    p_eval.add_argument(
        "--out", default=None,
        help="directory for report.json (default: the recon directory)",
    )
    return parser


def _resolve_config_path(arg: str, stack: ExitStack) -> Path:
    """A real file wins; otherwise fall back to a bundled config name."""
    candidate = Path(arg)
    if candidate.is_file():
        return candidate
    if "/" not in arg and "\\" not in arg:
        name = arg if arg.endswith(".json") else f"{arg}.json"
        bundled = resources.files("fpmkit") / "configs" / name
        if bundled.is_file():
            return stack.enter_context(resources.as_file(bundled))
    raise ConfigError(f"config not found: {arg}")


def _require(config: dict, key: str, context: str):
    if key not in config:
        raise ConfigError(f"{context}: missing key {key!r}")
    return config[key]


def _parse_geometry(raw) -> SystemGeometry:
    if not isinstance(raw, dict):
        raise ConfigError("geometry must be an object")
    unknown = set(raw) - _GEOMETRY_KEYS
    if unknown:
        raise ConfigError(f"geometry: unknown keys {sorted(unknown)}")
    missing = _GEOMETRY_KEYS - set(raw)
    if missing:
        raise ConfigError(f"geometry: missing keys {sorted(missing)}")
    try:
        return SystemGeometry(**raw)
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc


def _parse_error_model(raw, base: Path) -> ErrorModelSpec | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError("error_model must be an object")
    weights = raw.get("weights")
    offsets = raw.get("wavevector_offsets")
    if offsets is not None:
        offsets = np.asarray(offsets, dtype=float)
    noise = None
    noise_raw = raw.get("noise")
    if noise_raw is not None:
        kind = _require(noise_raw, "kind", "error_model.noise")
        if kind == "none":
            noise = None
        elif kind == "gaussian":
            noise = GaussianNoise(sigma=float(_require(noise_raw, "sigma", "noise")))
        elif kind == "poisson":
            noise = PoissonNoise(
                photon_scale=float(_require(noise_raw, "photon_scale", "noise"))
            )
        else:
            raise ConfigError(f"error_model.noise: unknown kind {kind!r}")
    pupil = None
    pupil_raw = raw.get("pupil")
    if pupil_raw is not None:
        aberration = pupil_raw.get("aberration_phase")
        if aberration is not None:
            aberration = read_image(base / aberration)
        pupil = PupilSpec(
            defocus=float(pupil_raw.get("defocus", 0.0)),
            aberration_phase=aberration,
        )
    return ErrorModelSpec(
        weights=weights, wavevector_offsets=offsets, noise=noise, pupil=pupil
    )


def _cmd_simulate(args) -> int:
    with ExitStack() as stack_ctx:
        config_path = _resolve_config_path(args.config, stack_ctx)
        try:
            config = json.loads(config_path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{config_path}: invalid JSON: {exc}") from exc
        base = config_path.parent

        geom = _parse_geometry(_require(config, "geometry", str(config_path)))
        lit_raw = config.get("lit", "all")
        if lit_raw == "all":
            leds = center_window(geom, geom.led_rows, geom.led_cols)
        elif isinstance(lit_raw, dict):
            try:
                leds = center_window(geom, int(lit_raw["rows"]), int(lit_raw["cols"]))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"lit: {exc}") from exc
        else:
            raise ConfigError('lit must be "all" or {"rows": R, "cols": C}')

        upsampling = config.get("upsampling")
        if upsampling is not None:
            upsampling = int(upsampling)
        s = upsampling or upsampling_factor(geom, leds)

        truth_raw = _require(config, "truth", str(config_path))
        kind = _require(truth_raw, "kind", "truth")
        sources = {}
        for field in ("amplitude", "phase"):
            if truth_raw.get(field) is not None:
                sources[field] = base / truth_raw[field]
        ranges = {}
        if truth_raw.get("amplitude_range") is not None:
            ranges["amplitude_range"] = tuple(truth_raw["amplitude_range"])
        if truth_raw.get("phase_range") is not None:
            ranges["phase_range"] = tuple(truth_raw["phase_range"])
        try:
            truth = make_ground_truth(
                kind,
                s * geom.lr_size,
                amplitude_source=sources.get("amplitude"),
                phase_source=sources.get("phase"),
                **ranges,
            )
        except ValueError as exc:
            raise ConfigError(f"truth: {exc}") from exc

        error_model = _parse_error_model(config.get("error_model"), base)
        stack = simulate_stack(
            truth,
            geom,
            leds,
            error_model,
            upsampling=s,
            seed=args.seed,
        )
        quantize_bits = config.get("quantize_bits")
        if quantize_bits is not None:
            stack = quantize_stack(stack, int(quantize_bits))

    out = Path(args.out)
    manifest_extra = {
        "truth_files": {
            "amplitude": "truth_amplitude.pfm",
            "phase": "truth_phase.pfm",
        }
    }
    if error_model is not None:
        summary = {}
        if error_model.noise is not None:
            summary["noise"] = type(error_model.noise).__name__
        if error_model.weights is not None:
            summary["weights"] = "custom"
        if error_model.wavevector_offsets is not None:
            summary["wavevector_offsets"] = "custom"
        if error_model.pupil is not None:
            summary["pupil"] = "custom"
        if summary:
            manifest_extra["error_model"] = summary
    save_stack(stack, out, seed=args.seed, upsampling=s, extra=manifest_extra)
    write_pfm(out / "truth_amplitude.pfm", truth.amplitude)
    write_pfm(out / "truth_phase.pfm", truth.phase)
    print(f"wrote {len(stack)} images to {out}")
    return 0


def _display_spectrum(spectrum: np.ndarray) -> np.ndarray:
    """Log-magnitude, DC centered, for writing as a viewable PFM."""
    return np.log1p(np.abs(np.fft.fftshift(spectrum)))


def _cmd_reconstruct(args) -> int:
    stack = load_stack(args.stack)
    recon = FpmReconstructor(
        backend=args.backend,
        initial_guess=args.guess,
        iterations=args.iters,
        upsampling=args.upsampling,
        bandpass=args.bandpass,
        updater=args.updater,
        recover_pupil=args.recover_pupil,
        decompose_measurements=args.decompose_measurements,
        seed=args.seed,
    )
    recon.fit(stack)
    amplitude, phase = recon.render()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pfm(out / "amplitude.pfm", amplitude)
    write_pfm(out / "phase.pfm", phase)
    write_pfm(out / "spectrum_mag.pfm", _display_spectrum(recon.hr_spectrum_))
    report = {
        "backend": args.backend,
        "initial_guess": args.guess,
        "iterations": recon.n_iter_,
        "upsampling": recon.upsampling_,
        "bandpass": bool(args.bandpass),
        "wall_time_seconds": recon.wall_time_,
        "residuals": [float(r) for r in recon.residuals_],
        "axis_artifact_energy": axis_artifact_energy(recon.hr_spectrum_),
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(
        f"reconstructed {args.backend} in {recon.wall_time_:.2f} s "
        f"({recon.n_iter_} iterations), outputs in {out}"
    )
    return 0


def _cmd_decompose(args) -> int:
    image = read_image(args.image)
    if image.shape[0] < 2 or image.shape[1] < 2:
        raise DataError(f"{args.image}: image must be at least 2x2")
    parts = periodic_smooth_decompose(image)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pfm(out / "periodic.pfm", parts.periodic)
    write_pfm(out / "smooth.pfm", parts.smooth)
    write_pfm(out / "input_spectrum.pfm", _display_spectrum(dft2(image)))
    write_pfm(out / "periodic_spectrum.pfm", _display_spectrum(dft2(parts.periodic)))
    write_pfm(out / "smooth_spectrum.pfm", _display_spectrum(dft2(parts.smooth)))
    print(f"wrote decomposition of {args.image} to {out}")
    return 0


def _parse_region(raw: str):
    parts = raw.split(",")
    if len(parts) != 4:
        raise ConfigError(
            f"--background-region expects R0,C0,H,W, got {raw!r}"
        )
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--background-region: {exc}") from exc


def _cmd_evaluate(args) -> int:
    recon_dir = Path(args.recon)
    amp_path = recon_dir / "amplitude.pfm"
    phase_path = recon_dir / "phase.pfm"
    if not amp_path.is_file() or not phase_path.is_file():
        raise DataError(f"{recon_dir}: amplitude.pfm and phase.pfm are required")
    amplitude = read_image(amp_path)
    phase = read_image(phase_path)
    if args.truth is None and args.background_region is None:
        raise ConfigError("nothing to evaluate: give --truth and/or --background-region")

    report = MetricReport()
    run_report = recon_dir / "report.json"
    if run_report.is_file():
        try:
            report.wall_time_seconds = json.loads(run_report.read_text()).get(
                "wall_time_seconds"
            )
        except json.JSONDecodeError as exc:
            raise DataError(f"{run_report}: invalid JSON: {exc}") from exc

    if args.truth is not None:
        truth_dir = Path(args.truth)
        truth_amp_path = truth_dir / "truth_amplitude.pfm"
        truth_phase_path = truth_dir / "truth_phase.pfm"
        if not truth_amp_path.is_file() or not truth_phase_path.is_file():
            raise DataError(
                f"{truth_dir}: truth_amplitude.pfm and truth_phase.pfm are required"
            )
        truth_amp = read_image(truth_amp_path)
        truth_phase = read_image(truth_phase_path)
        if truth_amp.shape != amplitude.shape:
            raise DataError(
                f"truth grid {truth_amp.shape} does not match reconstruction "
                f"{amplitude.shape}"
            )
        report.rmse_intensity = rmse(truth_amp**2, amplitude**2)
        aligned = phase_align(phase, truth_phase)
        report.rmse_phase = rmse(truth_phase, aligned)
        spectrum = dft2(amplitude * np.exp(1j * phase))
        report.axis_artifact_energy = axis_artifact_energy(spectrum)

    if args.background_region is not None:
        region = _parse_region(args.background_region)
        try:
            report.background_phase_std = background_phase_std(phase, region)
        except ValueError as exc:
            raise ConfigError(f"--background-region: {exc}") from exc

    out = Path(args.out) if args.out else recon_dir
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    # merge with an existing run report instead of clobbering it
    merged = {}
    if report_path.is_file():
        try:
            merged = json.loads(report_path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{report_path}: invalid JSON: {exc}") from exc
    merged.update(report.as_dict())
    report_path.write_text(json.dumps(merged, indent=2, sort_keys=True) + "\n")
    for key, value in sorted(report.as_dict().items()):
        print(f"{key}: {value:.6g}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "reconstruct": _cmd_reconstruct,
    "decompose": _cmd_decompose,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"fpmkit: config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"fpmkit: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"fpmkit: numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
