"""Command-line interface.

Subcommands: simulate, beamform, beamsum, contour, dv, pipeline. Exit
codes: 0 success, 1 configuration/validation failure, 2 IO or file-format
failure. Angles are degrees and positions millimeters on this boundary.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .acquisition import (
    AcquisitionSpec,
    PwScheme,
    StaScheme,
    default_pw_angles,
)
from .analysis import DvConfig, dv_overlay, extract_contours, pixel_channel_tx_map
from .compounding import BeamformedImage
from .config import ConfigError, RunConfig, load_run_config
from .fileio import (
    FormatError,
    read_rf,
    write_beamsum_csv,
    write_contour_csv,
    write_dv_csv,
    write_pgm,
    write_rf,
)
from .imaging import beamform_image, pixel_beamsum
from .scene import FovError, synth_rf


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="echoform",
        description="High frame-rate ultrasound pipeline: simulation, "
                    "beamforming and reflection characterization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_input=False):
        p.add_argument("--config", help="YAML run configuration")
        if needs_input:
            p.add_argument("--in", dest="input", required=True, help="input URFD file")

    p = sub.add_parser("simulate", help="synthesize an RF dataset from a scene")
    add_common(p)
    p.add_argument("--scene", help="preset name (wip|bop|bap) or scene YAML file")
    p.add_argument("--scheme", choices=["pw", "sta"], help="transmit scheme")
    p.add_argument("--out", required=True, help="output URFD path")

    p = sub.add_parser("beamform", help="beamform a dataset into a PGM image")
    add_common(p, needs_input=True)
    p.add_argument("--bf", choices=["das", "fdmas", "fdmas-a", "mvdr", "sb"],
                   help="receive beamformer")
    p.add_argument("--dynamic-range", type=float, help="display range in dB")
    p.add_argument("--out", help="output PGM path (default <input>.pgm)")
    p.add_argument("--raw", help="also dump the raw compounded grid (.npy)")

    p = sub.add_parser("beamsum", help="per-transmission beamsum profiles to CSV")
    add_common(p, needs_input=True)
    p.add_argument("--bf", choices=["das", "fdmas", "fdmas-a", "mvdr", "sb"])
    p.add_argument("--pixel", action="append", nargs=2, type=float,
                   metavar=("X_MM", "Z_MM"),
                   help="pixel position, repeatable; defaults to config list")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("contour", help="channel-transmission contour isolines to CSV")
    add_common(p, needs_input=True)
    p.add_argument("--pixel", nargs=2, type=float, metavar=("X_MM", "Z_MM"),
                   help="pixel position")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("dv", help="directivity-variance analysis over an ROI to CSV")
    add_common(p, needs_input=True)
    p.add_argument("--roi", nargs=4, type=float,
                   metavar=("X0_MM", "X1_MM", "Z0_MM", "Z1_MM"), help="ROI in mm")
    p.add_argument("--percentile", type=float, help="phi_v emission threshold")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("pipeline", help="run everything a config requests")
    p.add_argument("--config", required=True)
    return parser


def _load_config(args):
    overrides = {}
    for name in ("scheme", "bf", "dynamic_range", "scene"):
        value = getattr(args, name if name != "bf" else "bf", None)
        if value is not None:
            overrides["beamformer" if name == "bf" else name] = value
    return load_run_config(path=getattr(args, "config", None), overrides=overrides)


def _attach_scheme(rf, cfg: RunConfig, config_given):
    """Marry a scheme to a URFD skeleton, inferring it when defaults apply."""
    header_acq = rf.acquisition
    n_tx = rf.num_transmissions
    if config_given or cfg.acquisition.num_transmissions() == n_tx:
        scheme = cfg.acquisition.scheme
    elif n_tx == header_acq.geometry.num_elements:
        scheme = StaScheme()
    elif n_tx == default_pw_angles().size:
        scheme = PwScheme(angles=tuple(default_pw_angles()))
    else:
        raise ConfigError(
            f"cannot infer the transmit scheme of a {n_tx}-transmission dataset; "
            "pass --config with the matching acquisition block"
        )
    acq = AcquisitionSpec(geometry=header_acq.geometry, pulse=header_acq.pulse,
                          medium=header_acq.medium, scheme=scheme)
    if acq.num_transmissions() != n_tx:
        raise ConfigError(
            f"configured scheme expects {acq.num_transmissions()} transmissions, "
            f"dataset holds {n_tx}"
        )
    rf.acquisition = acq
    return rf.validate()


def _parse_pixel(pair):
    x_mm, z_mm = pair
    return x_mm * 1e-3, z_mm * 1e-3


def _tx_labels(acq):
    """Per-transmission CSV labels: steering angle in degrees, or element index."""
    if isinstance(acq.scheme, PwScheme):
        return [math.degrees(a) for a in acq.scheme.angles]
    return [float(i) for i in acq.scheme.resolve_indices(acq.geometry)]


def _bf_kwargs(cfg: RunConfig):
    return dict(
        f_number=cfg.f_number, window=cfg.window, tukey_taper=cfg.tukey_taper,
        fdmas_config=cfg.fdmas, mvdr_config=cfg.mvdr, sb_config=cfg.sb,
    )


def _cmd_simulate(args):
    cfg = _load_config(args)
    if cfg.scene is None:
        raise ConfigError("simulate needs a scene (--scene or config scene block)")
    rf = synth_rf(cfg.scene, cfg.acquisition, noise_rms=cfg.noise_rms,
                  seed=cfg.seed, spreading=cfg.spreading)
    write_rf(args.out, rf)
    return 0


def _cmd_beamform(args):
    cfg = _load_config(args)
    rf = _attach_scheme(read_rf(args.input), cfg, args.config is not None)
    image = beamform_image(rf, cfg.grid, cfg.beamformer,
                           dynamic_range=cfg.dynamic_range, **_bf_kwargs(cfg))
    out = args.out or (args.input + ".pgm")
    write_pgm(out, image.db, cfg.dynamic_range)
    if args.raw:
        np.save(args.raw, image.raw)
    return 0


def _cmd_beamsum(args):
    cfg = _load_config(args)
    rf = _attach_scheme(read_rf(args.input), cfg, args.config is not None)
    pixels = [_parse_pixel(p) for p in args.pixel] if args.pixel else cfg.outputs.beamsum_pixels
    if not pixels:
        raise ConfigError("beamsum needs --pixel or outputs.beamsum_pixels_mm")
    labels = _tx_labels(rf.acquisition)
    profiles = [
        dict(pixel=(x, z), beamformer=cfg.beamformer, labels=labels,
             values=pixel_beamsum(rf, x, z, cfg.beamformer, **_bf_kwargs(cfg)))
        for x, z in pixels
    ]
    write_beamsum_csv(args.out, profiles)
    return 0


def _cmd_contour(args):
    cfg = _load_config(args)
    rf = _attach_scheme(read_rf(args.input), cfg, args.config is not None)
    pixel = _parse_pixel(args.pixel) if args.pixel else cfg.outputs.contour_pixel
    if pixel is None:
        raise ConfigError("contour needs --pixel or outputs.contour_pixel_mm")
    level_map = pixel_channel_tx_map(rf, pixel[0], pixel[1])
    write_contour_csv(args.out, extract_contours(level_map))
    return 0


def _cmd_dv(args):
    cfg = _load_config(args)
    rf = _attach_scheme(read_rf(args.input), cfg, args.config is not None)
    if args.roi:
        roi = tuple(v * 1e-3 for v in args.roi)
    else:
        roi = cfg.outputs.dv_roi
    if roi is None:
        raise ConfigError("dv needs --roi or outputs.dv_roi_mm")
    percentile = args.percentile if args.percentile is not None else cfg.outputs.dv_percentile
    image = beamform_image(rf, cfg.grid, "das", dynamic_range=cfg.dynamic_range,
                           **_bf_kwargs(cfg))
    field = dv_overlay(rf, image, roi, DvConfig(), percentile=percentile)
    write_dv_csv(args.out, field.kept)
    return 0


def _cmd_pipeline(args):
    cfg = _load_config(args)
    out = cfg.outputs
    if cfg.scene is None:
        raise ConfigError("pipeline needs a scene block")
    rf = synth_rf(cfg.scene, cfg.acquisition, noise_rms=cfg.noise_rms,
                  seed=cfg.seed, spreading=cfg.spreading)
    if out.rf:
        write_rf(out.rf, rf)
    image = None
    if out.image or out.raw or out.dv:
        image = beamform_image(rf, cfg.grid, cfg.beamformer,
                               dynamic_range=cfg.dynamic_range, **_bf_kwargs(cfg))
    if out.image:
        write_pgm(out.image, image.db, cfg.dynamic_range)
    if out.raw:
        np.save(out.raw, image.raw)
    if out.beamsum and out.beamsum_pixels:
        labels = _tx_labels(rf.acquisition)
        profiles = [
            dict(pixel=(x, z), beamformer=cfg.beamformer, labels=labels,
                 values=pixel_beamsum(rf, x, z, cfg.beamformer, **_bf_kwargs(cfg)))
            for x, z in out.beamsum_pixels
        ]
        write_beamsum_csv(out.beamsum, profiles)
    if out.contour and out.contour_pixel:
        level_map = pixel_channel_tx_map(rf, *out.contour_pixel)
        write_contour_csv(out.contour, extract_contours(level_map))
    if out.dv and out.dv_roi:
        dv_image = image if cfg.beamformer == "das" else beamform_image(
            rf, cfg.grid, "das", dynamic_range=cfg.dynamic_range, **_bf_kwargs(cfg))
        field = dv_overlay(rf, dv_image, out.dv_roi, DvConfig(),
                           percentile=out.dv_percentile)
        write_dv_csv(out.dv, field.kept)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "beamform": _cmd_beamform,
    "beamsum": _cmd_beamsum,
    "contour": _cmd_contour,
    "dv": _cmd_dv,
    "pipeline": _cmd_pipeline,
}


def cli_main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FormatError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ConfigError, FovError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def console_main():
    sys.exit(cli_main())


if __name__ == "__main__":
    console_main()
