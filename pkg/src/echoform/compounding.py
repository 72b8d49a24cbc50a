"""Coherent compounding, envelope detection, log compression and beamsum profiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from .acquisition import PixelGrid


class LengthMismatchError(ValueError):
    """Per-transmission series length disagrees with the scheme."""


class AllZeroImageError(ValueError):
    """Log compression of an identically zero image is undefined."""


def compound(per_tx_values, expected_length=None):
    """Coherent compounding: sum per-transmission values in ascending order.

    ``per_tx_values`` is indexed (transmission, ...); pass
    ``expected_length`` (N_c for STA, M for PW) to enforce the scheme's
    transmission count.
    """
    values = np.asarray(per_tx_values, dtype=float)
    if expected_length is not None and values.shape[0] != expected_length:
        raise LengthMismatchError(
            f"got {values.shape[0]} per-transmission values, scheme has {expected_length}"
        )
    return values.sum(axis=0)


def envelope(beamline, axis=-1):
    """Envelope along depth: magnitude of the analytic signal."""
    beamline = np.asarray(beamline, dtype=float)
    if beamline.shape[axis] < 8:
        raise ValueError("depth series too short for envelope detection (need >= 8 samples)")
    return np.abs(hilbert(beamline, axis=axis))


def log_compress(env, dynamic_range=70.0, reference=None):
    """Normalize and map to decibels, clipped below.

    With the default per-image normalization the output peaks at exactly
    0 dB and is clipped to [-dynamic_range, 0]. Pass ``reference`` to
    normalize against a fixed value instead, for cross-image comparison
    (values above the reference then exceed 0 dB).
    """
    env = np.asarray(env, dtype=float)
    peak = env.max() if reference is None else float(reference)
    if peak <= 0.0:
        raise AllZeroImageError("cannot log-compress an all-zero image")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(env / peak)
    return np.maximum(db, -float(dynamic_range))


@dataclass
class BeamformedImage:
    """Compounded image with envelope and display views.

    ``raw`` is (n_x, n_z) with depth along axis 1, so raw[ix] is a depth
    beamline. ``envelope`` and ``db`` share the shape; db peaks at 0 and is
    clipped at -dynamic_range.
    """

    raw: np.ndarray
    grid: PixelGrid
    beamformer: str
    scheme: str
    dynamic_range: float
    envelope: np.ndarray = None
    db: np.ndarray = None

    def __post_init__(self):
        if self.envelope is None:
            self.envelope = envelope(self.raw, axis=1)
        if self.db is None:
            self.db = log_compress(self.envelope, self.dynamic_range)


def beamsum_profile(rf, x_p, z_p, beamformer="das", **kwargs):
    """Per-transmission beamformed values of one pixel, before compounding.

    A thin wrapper over :func:`echoform.imaging.pixel_beamsum`; see there
    for beamformer names and options.
    """
    from .imaging import pixel_beamsum

    return pixel_beamsum(rf, x_p, z_p, beamformer=beamformer, **kwargs)
