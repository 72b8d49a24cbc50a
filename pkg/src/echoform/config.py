"""Run and scene configuration files.

Configs are YAML (nested key/value text). Angles are written in degrees
and lengths in millimeters at this boundary only; everything becomes
radians/meters when resolved. Unknown keys are rejected everywhere, and a
config resolves to a fully validated pipeline description before any
computation starts.

Top-level run-config sections (all optional, defaults in parentheses):

    acquisition:
      num_elements (128), pitch_mm (0.3), center_frequency_mhz (7.6),
      sampling_frequency_mhz (31.25), num_cycles (2.5), sound_speed (1540),
      scheme ("pw" | "sta"), pw_angles_deg ({start,stop,step} | [list] | "eq2"),
      sta_elements ([indices] | null for all)
    grid:
      x_mm ([-12, 12]), z_mm ([5, 30]), nx (128), nz (128)
    scene: "wip" | "bop" | "bap" | {inline scene} | {file: path}
    beamformer:
      kind ("das"), f_number (1.5), window ("tukey"), tukey_taper (0.5),
      dynamic_range (70; 40 when kind is "sb"),
      fdmas: {upsample (2), taps (101), passband_mhz ([1.5 f0, 2.5 f0])},
      mvdr: {subarray (num_elements/4), loading (1/(100 subarray))},
      sb: {tilt_deg ([-30, 30, 0.5]), sigma_r_deg (2.0)}
    simulate:
      noise_rms (0.0), seed (0), spreading (true)
    outputs:
      image, raw, rf, beamsum, contour, dv (paths),
      beamsum_pixels_mm ([[x, z], ...]), contour_pixel_mm ([x, z]),
      dv_roi_mm ([x_min, x_max, z_min, z_max]), dv_percentile (90)

Inline scene / scene file keys:

    fov_mm ([x_min, x_max, z_min, z_max]), attenuation_db_cm_mhz (0),
    diffuse ([{x_mm, z_mm, amplitude}]),
    plates ([{x_mm, z_mm, half_length_mm, tilt_deg, amplitude, sigma_deg}]),
    arcs ([{x_mm, z_mm, radius_mm, extent_deg, amplitude, sigma_deg}]),
    speckle ({region_mm, density_per_cm2, amplitude, seed}),
    reverberant_reflector (index | null)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .acquisition import (
    AcquisitionSpec,
    ArrayGeometry,
    MediumSpec,
    PixelGrid,
    PulseSpec,
    PwScheme,
    StaScheme,
    default_pw_angles,
    pw_angle_set,
)
from .adaptive import FdmasConfig, MvdrConfig, SbConfig
from .scene import Arc, DiffusePoint, Plate, Scene, _speckle_points, preset_scenes


class ConfigError(ValueError):
    """A configuration file failed validation; message names the field."""


def _require_mapping(obj, where):
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(obj).__name__}")
    return obj


def _take(mapping, where, **known):
    """Pop known keys with defaults; reject anything left over."""
    out = {}
    mapping = dict(mapping)
    for key, default in known.items():
        out[key] = mapping.pop(key, default)
    if mapping:
        bad = ", ".join(sorted(map(str, mapping)))
        raise ConfigError(f"{where}: unknown key(s): {bad}")
    return out


def _mm(v):
    return float(v) * 1e-3


@dataclass
class OutputSpec:
    image: str | None = None
    raw: str | None = None
    rf: str | None = None
    beamsum: str | None = None
    contour: str | None = None
    dv: str | None = None
    beamsum_pixels: list = field(default_factory=list)
    contour_pixel: tuple | None = None
    dv_roi: tuple | None = None
    dv_percentile: float = 90.0


@dataclass
class RunConfig:
    """Fully resolved pipeline description."""

    acquisition: AcquisitionSpec
    grid: PixelGrid
    scene: Scene | None
    beamformer: str
    f_number: float
    window: str
    tukey_taper: float
    dynamic_range: float
    fdmas: FdmasConfig
    mvdr: MvdrConfig
    sb: SbConfig
    noise_rms: float
    seed: int
    spreading: bool
    outputs: OutputSpec


def load_run_config(path=None, text=None, overrides=None) -> RunConfig:
    """Load, validate and resolve a run configuration.

    ``overrides`` is a flat dict applied on top of the parsed document for
    the CLI flags (keys: scheme, beamformer, dynamic_range, scene).
    """
    if text is None and path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = yaml.safe_load(text) if text is not None else {}
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML: {err}") from None
    doc = _require_mapping(doc, "config")
    doc = _take(doc, "config", acquisition=None, grid=None, scene=None,
                beamformer=None, simulate=None, outputs=None)
    overrides = overrides or {}

    acq_doc = _take(_require_mapping(doc["acquisition"], "acquisition"), "acquisition",
                    num_elements=128, pitch_mm=0.3, center_frequency_mhz=7.6,
                    sampling_frequency_mhz=31.25, num_cycles=2.5,
                    sound_speed=1540.0, scheme="pw", pw_angles_deg=None,
                    sta_elements=None)
    geometry = ArrayGeometry(num_elements=int(acq_doc["num_elements"]),
                             pitch=_mm(acq_doc["pitch_mm"]))
    pulse = PulseSpec(center_frequency=float(acq_doc["center_frequency_mhz"]) * 1e6,
                      sampling_frequency=float(acq_doc["sampling_frequency_mhz"]) * 1e6,
                      num_cycles=float(acq_doc["num_cycles"]))
    medium = MediumSpec(speed_of_sound=float(acq_doc["sound_speed"]))

    scheme_kind = str(overrides.get("scheme") or acq_doc["scheme"]).lower()
    if scheme_kind == "pw":
        scheme = PwScheme(angles=tuple(_resolve_pw_angles(
            acq_doc["pw_angles_deg"], geometry, pulse, medium)))
    elif scheme_kind == "sta":
        elements = acq_doc["sta_elements"]
        scheme = StaScheme(tx_elements=None if elements is None else tuple(int(e) for e in elements))
    else:
        raise ConfigError(f"acquisition.scheme: unknown scheme {scheme_kind!r}")
    acquisition = AcquisitionSpec(geometry=geometry, pulse=pulse, medium=medium,
                                  scheme=scheme)

    grid_doc = _take(_require_mapping(doc["grid"], "grid"), "grid",
                     x_mm=(-12.0, 12.0), z_mm=(5.0, 30.0), nx=128, nz=128)
    x_lo, x_hi = (float(v) for v in grid_doc["x_mm"])
    z_lo, z_hi = (float(v) for v in grid_doc["z_mm"])

    bf_doc = _take(_require_mapping(doc["beamformer"], "beamformer"), "beamformer",
                   kind="das", f_number=1.5, window="tukey", tukey_taper=0.5,
                   dynamic_range=None, fdmas=None, mvdr=None, sb=None)
    beamformer = str(overrides.get("beamformer") or bf_doc["kind"]).lower()
    if beamformer not in ("das", "fdmas", "fdmas-a", "mvdr", "sb"):
        raise ConfigError(f"beamformer.kind: unknown beamformer {beamformer!r}")
    dynamic_range = overrides.get("dynamic_range") or bf_doc["dynamic_range"]
    if dynamic_range is None:
        dynamic_range = 40.0 if beamformer == "sb" else 70.0
    dynamic_range = float(dynamic_range)

    fdmas_doc = _take(_require_mapping(bf_doc["fdmas"], "beamformer.fdmas"),
                      "beamformer.fdmas", upsample=2, taps=101, passband_mhz=None)
    passband = None
    if fdmas_doc["passband_mhz"] is not None:
        lo, hi = fdmas_doc["passband_mhz"]
        passband = (float(lo) * 1e6, float(hi) * 1e6)
    fdmas_cfg = FdmasConfig(upsample_factor=int(fdmas_doc["upsample"]),
                            passband=passband, num_taps=int(fdmas_doc["taps"]),
                            apodized=(beamformer == "fdmas-a"))

    mvdr_doc = _take(_require_mapping(bf_doc["mvdr"], "beamformer.mvdr"),
                     "beamformer.mvdr", subarray=None, loading=None)
    mvdr_cfg = MvdrConfig(
        subarray_length=None if mvdr_doc["subarray"] is None else int(mvdr_doc["subarray"]),
        diagonal_loading=None if mvdr_doc["loading"] is None else float(mvdr_doc["loading"]),
    )

    sb_doc = _take(_require_mapping(bf_doc["sb"], "beamformer.sb"), "beamformer.sb",
                   tilt_deg=(-30.0, 30.0, 0.5), sigma_r_deg=2.0)
    t_lo, t_hi, t_step = (float(v) for v in sb_doc["tilt_deg"])
    sb_cfg = SbConfig(tilt_min=math.radians(t_lo), tilt_max=math.radians(t_hi),
                      tilt_step=math.radians(t_step),
                      sigma_r=math.radians(float(sb_doc["sigma_r_deg"])))

    # F-DMAS beamlines are filtered around 2 f0 along depth; refine the
    # axial sampling if the requested grid cannot carry that band
    nz = int(grid_doc["nz"])
    if beamformer in ("fdmas", "fdmas-a"):
        f_hi = fdmas_cfg.band_for(pulse.center_frequency)[1]
        dz_max = medium.speed_of_sound / (4.0 * f_hi) * 0.98
        need = int(math.ceil(_mm(z_hi - z_lo) / dz_max)) + 1
        nz = max(nz, need)
    grid = PixelGrid(x_min=_mm(x_lo), x_max=_mm(x_hi), z_min=_mm(z_lo),
                     z_max=_mm(z_hi), n_x=int(grid_doc["nx"]), n_z=nz)

    scene_doc = overrides.get("scene", doc["scene"])
    scene = _resolve_scene(scene_doc)

    sim_doc = _take(_require_mapping(doc["simulate"], "simulate"), "simulate",
                    noise_rms=0.0, seed=0, spreading=True)

    out_doc = _take(_require_mapping(doc["outputs"], "outputs"), "outputs",
                    image=None, raw=None, rf=None, beamsum=None, contour=None,
                    dv=None, beamsum_pixels_mm=None, contour_pixel_mm=None,
                    dv_roi_mm=None, dv_percentile=90.0)
    outputs = OutputSpec(
        image=out_doc["image"], raw=out_doc["raw"], rf=out_doc["rf"],
        beamsum=out_doc["beamsum"], contour=out_doc["contour"], dv=out_doc["dv"],
        beamsum_pixels=[(_mm(p[0]), _mm(p[1])) for p in (out_doc["beamsum_pixels_mm"] or [])],
        contour_pixel=(None if out_doc["contour_pixel_mm"] is None
                       else (_mm(out_doc["contour_pixel_mm"][0]),
                             _mm(out_doc["contour_pixel_mm"][1]))),
        dv_roi=(None if out_doc["dv_roi_mm"] is None
                else tuple(_mm(v) for v in out_doc["dv_roi_mm"])),
        dv_percentile=float(out_doc["dv_percentile"]),
    )

    return RunConfig(
        acquisition=acquisition, grid=grid, scene=scene, beamformer=beamformer,
        f_number=float(bf_doc["f_number"]), window=str(bf_doc["window"]),
        tukey_taper=float(bf_doc["tukey_taper"]), dynamic_range=dynamic_range,
        fdmas=fdmas_cfg, mvdr=mvdr_cfg, sb=sb_cfg,
        noise_rms=float(sim_doc["noise_rms"]), seed=int(sim_doc["seed"]),
        spreading=bool(sim_doc["spreading"]), outputs=outputs,
    )


def _resolve_pw_angles(spec, geometry, pulse, medium):
    if spec is None:
        return default_pw_angles()
    if isinstance(spec, str):
        if spec != "eq2":
            raise ConfigError(f"acquisition.pw_angles_deg: unknown preset {spec!r}")
        return pw_angle_set(geometry, pulse.wavelength(medium.speed_of_sound))
    if isinstance(spec, dict):
        spec = _take(spec, "acquisition.pw_angles_deg", start=-18.0, stop=18.0, step=0.5)
        return default_pw_angles(float(spec["start"]), float(spec["stop"]), float(spec["step"]))
    if isinstance(spec, (list, tuple)):
        return np.deg2rad(np.asarray([float(v) for v in spec]))
    raise ConfigError("acquisition.pw_angles_deg: expected preset name, mapping or list")


def _resolve_scene(spec):
    """Named preset, inline mapping, {file: path} reference, or None."""
    if spec is None:
        return None
    if isinstance(spec, str):
        presets = preset_scenes()
        if spec not in presets:
            raise ConfigError(
                f"scene: unknown preset {spec!r}; choose" f" from {sorted(presets)}")
        return presets[spec]
    spec = _require_mapping(spec, "scene")
    if set(spec) == {"file"}:
        return load_scene(spec["file"])
    return _scene_from_mapping(spec, "scene")


def load_scene(path) -> Scene:
    """Load a scene file (YAML, same schema as an inline scene)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as err:
            raise ConfigError(f"scene file is not valid YAML: {err}") from None
    return _scene_from_mapping(_require_mapping(doc, "scene file"), "scene file")


def _scene_from_mapping(doc, where) -> Scene:
    doc = _take(doc, where, fov_mm=None, attenuation_db_cm_mhz=0.0, diffuse=None,
                plates=None, arcs=None, speckle=None, reverberant_reflector=None)
    if doc["fov_mm"] is None:
        raise ConfigError(f"{where}: fov_mm is required")
    fov = tuple(_mm(v) for v in doc["fov_mm"])
    if len(fov) != 4:
        raise ConfigError(f"{where}: fov_mm must be [x_min, x_max, z_min, z_max]")

    points = []
    for k, p in enumerate(doc["diffuse"] or []):
        p = _take(_require_mapping(p, f"{where}.diffuse[{k}]"), f"{where}.diffuse[{k}]",
                  x_mm=None, z_mm=None, amplitude=1.0)
        points.append(DiffusePoint(x=_mm(p["x_mm"]), z=_mm(p["z_mm"]),
                                   amplitude=float(p["amplitude"])))
    if doc["speckle"] is not None:
        s = _take(_require_mapping(doc["speckle"], f"{where}.speckle"), f"{where}.speckle",
                  region_mm=None, density_per_cm2=200.0, amplitude=0.05, seed=0)
        region = tuple(_mm(v) for v in (s["region_mm"] or np.asarray(fov) * 1e3))
        points.extend(_speckle_points(region, float(s["density_per_cm2"]),
                                      float(s["amplitude"]), int(s["seed"])))

    reflectors = []
    for k, p in enumerate(doc["plates"] or []):
        p = _take(_require_mapping(p, f"{where}.plates[{k}]"), f"{where}.plates[{k}]",
                  x_mm=None, z_mm=None, half_length_mm=None, tilt_deg=0.0,
                  amplitude=1.0, sigma_deg=2.0)
        reflectors.append(Plate(
            x=_mm(p["x_mm"]), z=_mm(p["z_mm"]), half_length=_mm(p["half_length_mm"]),
            tilt=math.radians(float(p["tilt_deg"])), amplitude=float(p["amplitude"]),
            directivity_sigma=math.radians(float(p["sigma_deg"]))))
    for k, p in enumerate(doc["arcs"] or []):
        p = _take(_require_mapping(p, f"{where}.arcs[{k}]"), f"{where}.arcs[{k}]",
                  x_mm=None, z_mm=None, radius_mm=None, extent_deg=90.0,
                  amplitude=1.0, sigma_deg=2.0)
        reflectors.append(Arc(
            x=_mm(p["x_mm"]), z=_mm(p["z_mm"]), radius=_mm(p["radius_mm"]),
            angular_extent=math.radians(float(p["extent_deg"])),
            amplitude=float(p["amplitude"]),
            directivity_sigma=math.radians(float(p["sigma_deg"]))))

    try:
        return Scene(fov=fov, diffuse_points=tuple(points), reflectors=tuple(reflectors),
                     attenuation=float(doc["attenuation_db_cm_mhz"]),
                     reverberant_reflector=doc["reverberant_reflector"])
    except ValueError as err:
        raise ConfigError(f"{where}: {err}") from None
