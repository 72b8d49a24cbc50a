"""Delay compensation, receive apodization and delay-and-sum beamforming."""

from __future__ import annotations

import numpy as np

from .acquisition import (
    DelayTable,
    PwScheme,
    pw_tx_delay,
    rx_delay,
    sta_tx_delay,
)


class DegenerateApertureError(ValueError):
    """No element falls inside the F-number-limited receive aperture."""


def interp_channels(traces, frac_index):
    """Linearly interpolate each channel trace at a fractional sample index.

    Parameters
    ----------
    traces : ndarray, shape (num_elements, n_t)
        One transmission's channel data.
    frac_index : ndarray
        Fractional indices, shape (..., num_elements). Indices outside
        [0, n_t - 1] yield exact zeros; indices landing on a sample instant
        return that stored sample bit-exactly.

    Returns
    -------
    ndarray with frac_index's shape.
    """
    n_el, n_t = traces.shape
    idx = np.asarray(frac_index, dtype=float)
    valid = (idx >= 0.0) & (idx <= n_t - 1)
    i0 = np.floor(idx).astype(np.int64)
    np.clip(i0, 0, n_t - 2, out=i0)
    frac = np.where(valid, idx - i0, 0.0)
    elem = np.arange(n_el).reshape((1,) * (idx.ndim - 1) + (n_el,))
    v0 = traces[elem, np.where(valid, i0, 0)]
    v1 = traces[elem, np.where(valid, i0 + 1, 0)]
    out = v0 * (1.0 - frac) + v1 * frac
    return np.where(valid, out, 0.0)


def delay_compensate(rf, x_p, z_p, transmission, delays: DelayTable | None = None,
                     pixel_index: int | None = None):
    """Delay-compensated channel snapshot for one pixel and transmission.

    Evaluates every channel trace at (tau_tx(j) + tau_rx(i) - t0) * fs by
    linear interpolation. Out-of-window samples are exact zeros. Delays are
    taken from ``delays`` when a ``pixel_index`` into its grid is given,
    otherwise computed on the fly for (x_p, z_p).

    Returns
    -------
    ndarray, shape (num_elements,)
    """
    acq = rf.acquisition
    if delays is not None and pixel_index is not None:
        tau = delays.tx[pixel_index, transmission] + delays.rx[pixel_index]
    else:
        c = acq.medium.speed_of_sound
        tau_rx = rx_delay(x_p, z_p, acq.geometry.element_x, c)
        if isinstance(acq.scheme, PwScheme):
            tau_tx = pw_tx_delay(x_p, z_p, acq.scheme.angles[transmission], c)
        else:
            x_j = acq.scheme.tx_positions(acq.geometry)[transmission]
            tau_tx = sta_tx_delay(x_p, z_p, x_j, c)
        tau = tau_tx + tau_rx
    frac = (tau - rf.t0) * rf.fs
    return interp_channels(rf.samples[transmission], frac)


def tukey_weight(u, taper=0.5):
    """Tukey window evaluated on normalized aperture positions u in [-1, 1]."""
    u = np.abs(np.asarray(u, dtype=float))
    if taper <= 0:
        return np.where(u <= 1.0, 1.0, 0.0)
    flat = 1.0 - taper
    w = np.where(
        u <= flat,
        1.0,
        0.5 * (1.0 + np.cos(np.pi * (u - flat) / taper)),
    )
    return np.where(u <= 1.0, w, 0.0)


def apodization_weights(x_p, z_p, geometry, f_number=1.5, window="tukey",
                        tukey_taper=0.5):
    """Receive apodization for one pixel under an F-number aperture rule.

    The active aperture half-width is z_p / (2 * f_number); elements
    outside it get weight 0, elements inside get the window evaluated on
    their normalized offset from x_p, rescaled so the largest active
    weight is 1.

    Raises
    ------
    DegenerateApertureError
        If no element is active (callers typically fall back to the
        nearest element with weight 1).
    """
    if not f_number > 0:
        raise ValueError("f_number must be > 0")
    half = z_p / (2.0 * f_number)
    offset = geometry.element_x - x_p
    active = np.abs(offset) <= half
    if not active.any():
        raise DegenerateApertureError(
            f"no element within +-{half:.4g} m of x={x_p:.4g} at depth {z_p:.4g}"
        )
    if window == "rect":
        return active.astype(float)
    if window != "tukey":
        raise ValueError(f"unknown window {window!r}")
    w = np.where(active, tukey_weight(offset / half, tukey_taper), 0.0)
    peak = w.max()
    if peak == 0.0:
        # active elements sit exactly on the window's zero edge
        w[np.argmin(np.abs(offset))] = 1.0
        return w
    return w / peak


def nearest_element_weights(x_p, geometry):
    """Fallback profile: unit weight on the element closest to the pixel."""
    w = np.zeros(geometry.num_elements)
    w[np.argmin(np.abs(geometry.element_x - x_p))] = 1.0
    return w


def das(snapshot, weights):
    """Delay-and-sum value: sum of apodized snapshot entries.

    Element order is fixed (ascending index) so the floating-point result
    is reproducible.
    """
    snapshot = np.asarray(snapshot, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if snapshot.shape[-1] != weights.shape[-1]:
        raise ValueError("snapshot and weights lengths differ")
    return np.sum(snapshot * weights, axis=-1)
