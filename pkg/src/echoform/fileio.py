"""Binary RF tensor format (URFD), PGM images and CSV emitters.

URFD layout, all little-endian:

    offset  size  field
    0       4     magic "URFD"
    4       4     version (u32, currently 1)
    8       4     n_tx (u32)
    12      4     n_ch (u32)
    16      4     n_samples (u32)
    20      8     fs (f64, Hz)
    28      8     f0 (f64, Hz)
    36      8     c (f64, m/s)
    44      8     pitch (f64, m)
    52      8     t0 (f64, s)
    60      -     n_tx * n_ch * n_samples float32 samples,
                  transmission-major, then channel, then time

The header is scheme-agnostic; plane-wave angle lists travel in the run
configuration instead.
"""

from __future__ import annotations

import struct

import numpy as np

from .acquisition import AcquisitionSpec, ArrayGeometry, MediumSpec, PulseSpec
from .scene import RfDataset

MAGIC = b"URFD"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIddddd")


class FormatError(ValueError):
    """A file violates its declared binary or text layout."""


def write_rf(path, rf: RfDataset):
    """Serialize a dataset to URFD. Samples are stored as float32."""
    acq = rf.acquisition
    n_tx, n_ch, n_t = rf.samples.shape
    header = _HEADER.pack(
        MAGIC, VERSION, n_tx, n_ch, n_t,
        acq.pulse.sampling_frequency, acq.pulse.center_frequency,
        acq.medium.speed_of_sound, acq.geometry.pitch, rf.t0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(rf.samples, dtype="<f4").tobytes())


def read_rf(path) -> RfDataset:
    """Read a URFD file back into a dataset.

    The acquisition is reconstructed as a skeleton (geometry, pulse and
    medium from the header; no transmit scheme). Raises FormatError with
    the offending byte offset on any layout violation.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(
            f"file truncated inside the header: {len(raw)} bytes, need {_HEADER.size}"
        )
    magic, version, n_tx, n_ch, n_t, fs, f0, c, pitch, t0 = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte 0, expected {MAGIC!r}")
    if version > VERSION:
        raise FormatError(f"unsupported version {version} at byte 4 (supports <= {VERSION})")
    expected = _HEADER.size + n_tx * n_ch * n_t * 4
    if len(raw) != expected:
        raise FormatError(
            f"payload length mismatch at byte {_HEADER.size}: expected "
            f"{expected} total bytes, found {len(raw)}"
        )
    samples = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).astype(np.float64)
    samples = samples.reshape(n_tx, n_ch, n_t)
    acq = AcquisitionSpec(
        geometry=ArrayGeometry(num_elements=n_ch, pitch=pitch),
        pulse=PulseSpec(center_frequency=f0, sampling_frequency=fs),
        medium=MediumSpec(speed_of_sound=c),
        scheme=None,
    )
    return RfDataset(samples=samples, acquisition=acq, t0=t0)


def write_pgm(path, db_grid, dynamic_range):
    """8-bit binary PGM of a log-compressed grid.

    Gray 0 maps to -dynamic_range dB and 255 to 0 dB. ``db_grid`` is
    (n_x, n_z); rows of the written image run along depth.
    """
    db = np.asarray(db_grid, dtype=float)
    scaled = np.rint((db + dynamic_range) / dynamic_range * 255.0)
    img = np.clip(scaled, 0, 255).astype(np.uint8).T  # rows = depth
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def _fmt(v):
    return format(float(v), ".12g")


def write_beamsum_csv(path, profiles):
    """CSV of beamsum profiles.

    ``profiles`` is a list of dicts with keys pixel (x, z meters),
    beamformer, labels (per-transmission angle in degrees or element
    index), values.
    """
    lines = ["pixel_x_m,pixel_z_m,beamformer,transmission_index,angle_deg_or_element,value"]
    for prof in profiles:
        x, z = prof["pixel"]
        for j, (label, value) in enumerate(zip(prof["labels"], prof["values"])):
            lines.append(
                f"{_fmt(x)},{_fmt(z)},{prof['beamformer']},{j},{_fmt(label)},{_fmt(value)}"
            )
    _write_text(path, lines)


def write_contour_csv(path, contour_set):
    """CSV of contour polylines: level, polyline id and vertex coordinates."""
    lines = ["level,polyline,vertex_channel,vertex_tx"]
    for contour in contour_set:
        for p_idx, poly in enumerate(contour.polylines):
            for ch, tx in poly:
                lines.append(f"{_fmt(contour.level)},{p_idx},{_fmt(ch)},{_fmt(tx)}")
    _write_text(path, lines)


def write_dv_csv(path, reports):
    """CSV of per-pixel directivity-variance results."""
    lines = ["x_m,z_m,phi_v,phi_m,eta_rad,vx,vz"]
    for r in reports:
        lines.append(
            f"{_fmt(r.x)},{_fmt(r.z)},{_fmt(r.phi_v)},{_fmt(r.phi_m)},"
            f"{_fmt(r.eta)},{_fmt(r.vector[0])},{_fmt(r.vector[1])}"
        )
    _write_text(path, lines)


def _write_text(path, lines):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
