"""Adaptive and specular receive beamformers: F-DMAS, MVDR and SB."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import fftconvolve, filtfilt, firwin, resample

from .acquisition import AcquisitionSpec, PwScheme
from .beamform import delay_compensate
from .scene import RfDataset, pulse_half_duration, pulse_waveform


class SingularCovarianceError(np.linalg.LinAlgError):
    """The loaded spatial covariance could not be solved (degenerate snapshot)."""


# ---------------------------------------------------------------------------
# F-DMAS
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FdmasConfig:
    """Filtered delay-multiply-and-sum parameters.

    ``passband`` defaults to [1.5 f0, 2.5 f0] around the product second
    harmonic. ``apodized`` selects the receive-apodized variant (the plain
    one relies on the pair products' inherent apodization).
    """

    upsample_factor: int = 2
    passband: tuple[float, float] | None = None
    num_taps: int = 101
    apodized: bool = False

    def band_for(self, center_frequency: float) -> tuple[float, float]:
        if self.passband is not None:
            return self.passband
        return (1.5 * center_frequency, 2.5 * center_frequency)

    def validate_rate(self, sampling_frequency: float, center_frequency: float):
        """The upsampled rate must carry the product second harmonic."""
        f_hi = self.band_for(center_frequency)[1]
        if self.upsample_factor * sampling_frequency <= 2.0 * f_hi:
            raise ValueError(
                f"upsampled rate {self.upsample_factor * sampling_frequency:.4g} Hz "
                f"cannot represent the {f_hi:.4g} Hz band top; raise upsample_factor"
            )


def upsample_rf(rf: RfDataset, factor: int = 2) -> RfDataset:
    """Band-limited (FFT zero-padding) time upsampling of a dataset."""
    if factor == 1:
        return rf
    n_t = rf.num_samples
    up = resample(rf.samples, n_t * factor, axis=2)
    acq = rf.acquisition
    pulse = acq.pulse
    new_pulse = type(pulse)(
        center_frequency=pulse.center_frequency,
        sampling_frequency=pulse.sampling_frequency * factor,
        num_cycles=pulse.num_cycles,
    )
    new_acq = AcquisitionSpec(geometry=acq.geometry, pulse=new_pulse,
                              medium=acq.medium, scheme=acq.scheme)
    return RfDataset(samples=up, acquisition=new_acq, t0=rf.t0)


def signed_sqrt(x):
    """sign(x) * sqrt(|x|), the F-DMAS dimensional rescaling."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.sqrt(np.abs(x))


def fdmas(snapshot, weights=None):
    """Delay-multiply-and-sum of one snapshot (pre-filter value).

    Sums sign-preserving square-rooted samples over all unordered channel
    pairs, excluding self-products:

        sum_{i<l} s'_i s'_l = ((sum_i s'_i)^2 - sum_i s'_i^2) / 2

    With ``weights`` given, samples are apodized before the signed square
    root (the receive-apodized variant). Accepts stacked snapshots
    (..., num_elements) and reduces the last axis.
    """
    snapshot = np.asarray(snapshot, dtype=float)
    if weights is not None:
        snapshot = snapshot * weights
    s = signed_sqrt(snapshot)
    total = s.sum(axis=-1)
    return (total**2 - (s**2).sum(axis=-1)) / 2.0


def fdmas_filter(beamline, fs, center_frequency, passband=None, num_taps=101):
    """Zero-phase band-pass around the DMAS second harmonic.

    ``beamline`` is a depth series of DMAS values sampled at rate ``fs``
    (for image columns that is c / (2 * dz)). Output length equals input
    length.
    """
    beamline = np.asarray(beamline, dtype=float)
    f_lo, f_hi = passband if passband is not None else (
        1.5 * center_frequency, 2.5 * center_frequency)
    nyq = fs / 2.0
    if f_hi >= nyq:
        raise ValueError(
            f"passband top {f_hi:.4g} Hz reaches the Nyquist rate {nyq:.4g} Hz; "
            "sample the beamline finer"
        )
    taps = firwin(num_taps, [f_lo / nyq, f_hi / nyq], pass_zero=False)
    padlen = min(3 * num_taps, beamline.shape[-1] - 1)
    return filtfilt(taps, [1.0], beamline, axis=-1, padlen=padlen)


# ---------------------------------------------------------------------------
# MVDR
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MvdrConfig:
    """Minimum-variance beamformer parameters.

    ``subarray_length`` defaults to a quarter of the aperture;
    ``diagonal_loading`` is the trace fraction added to the smoothed
    covariance diagonal, defaulting to 1 / (100 * subarray_length). The
    steering vector is all-ones (data are already delay compensated).
    """

    subarray_length: int | None = None
    diagonal_loading: float | None = None

    def resolve(self, num_elements: int) -> tuple[int, float]:
        length = self.subarray_length if self.subarray_length is not None else num_elements // 4
        if not 1 <= length <= num_elements:
            raise ValueError(f"subarray_length {length} outside [1, {num_elements}]")
        loading = self.diagonal_loading if self.diagonal_loading is not None else 1.0 / (100.0 * length)
        if loading < 0:
            raise ValueError("diagonal_loading must be >= 0")
        return length, loading


def mvdr_weights(cov):
    """Distortionless weights R^-1 a / (a^T R^-1 a) for a ones steering vector.

    Raises SingularCovarianceError when the solve fails or degenerates.
    """
    cov = np.asarray(cov, dtype=float)
    a = np.ones(cov.shape[-1])
    try:
        w = np.linalg.solve(cov, a)
    except np.linalg.LinAlgError as err:
        raise SingularCovarianceError(str(err)) from None
    denom = w.sum()
    if not np.isfinite(denom) or denom == 0.0 or not np.all(np.isfinite(w)):
        raise SingularCovarianceError("covariance solve produced a degenerate weight vector")
    return w / denom


def smoothed_covariance(snapshot, subarray_length):
    """Forward spatial smoothing: mean outer product over sliding subarrays."""
    windows = sliding_window_view(np.asarray(snapshot, dtype=float), subarray_length, axis=-1)
    n_sub = windows.shape[-2]
    return np.einsum("...si,...sj->...ij", windows, windows) / n_sub


def mvdr(snapshot, config: MvdrConfig = MvdrConfig()):
    """Minimum-variance beamformed value of one snapshot.

    Forward spatial smoothing over length-L subarrays, trace-scaled
    diagonal loading, the distortionless solve, and the subarray-averaged
    output. Operates on real RF snapshots, so the conjugate transpose in
    the weight formula degenerates to a plain transpose; an analytic-signal
    variant would swap the covariance for a complex one. Raises
    SingularCovarianceError for degenerate (all-zero) snapshots; callers
    conventionally substitute 0.
    """
    snapshot = np.asarray(snapshot, dtype=float)
    length, loading = config.resolve(snapshot.shape[-1])
    windows = sliding_window_view(snapshot, length, axis=-1)
    cov = smoothed_covariance(snapshot, length)
    cov = cov + loading * np.trace(cov) * np.eye(length)
    w = mvdr_weights(cov)
    return float(np.mean(windows @ w))


def mvdr_values(snapshots, config: MvdrConfig = MvdrConfig()):
    """Batched MVDR over stacked snapshots, shape (n, num_elements).

    Degenerate rows (zero covariance trace) produce 0. Returns
    (values, max_constraint_error) where the latter is the worst
    |w^T a - 1| across solved rows, for contract monitoring.
    """
    snapshots = np.asarray(snapshots, dtype=float)
    n, n_el = snapshots.shape
    length, loading = config.resolve(n_el)
    windows = sliding_window_view(snapshots, length, axis=-1)  # (n, n_sub, L)
    n_sub = windows.shape[1]
    cov = np.einsum("psi,psj->pij", windows, windows) / n_sub
    tr = np.trace(cov, axis1=1, axis2=2)
    ok = tr > 0.0
    values = np.zeros(n)
    if not ok.any():
        return values, 0.0
    cov_ok = cov[ok] + (loading * tr[ok])[:, None, None] * np.eye(length)
    try:
        w = np.linalg.solve(cov_ok, np.ones((cov_ok.shape[0], length, 1)))[..., 0]
    except np.linalg.LinAlgError as err:
        raise SingularCovarianceError(str(err)) from None
    w = w / w.sum(axis=1, keepdims=True)
    err = float(np.max(np.abs(w.sum(axis=1) - 1.0))) if w.size else 0.0
    values[ok] = np.mean(np.einsum("psl,pl->ps", windows[ok], w), axis=1)
    return values, err


# ---------------------------------------------------------------------------
# Specular beamforming
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SbConfig:
    """Specular beamformer parameters.

    The tilt grid spans the candidate reflector orientations searched per
    pixel; ``sigma_r`` is the receive-angle tolerance of the Gaussian
    weighting around the mirror direction.
    """

    tilt_min: float = math.radians(-30.0)
    tilt_max: float = math.radians(30.0)
    tilt_step: float = math.radians(0.5)
    sigma_r: float = math.radians(2.0)

    def __post_init__(self):
        if not self.sigma_r > 0:
            raise ValueError("sigma_r must be > 0")
        if self.tilt_max < self.tilt_min or not self.tilt_step > 0:
            raise ValueError("tilt grid is empty")

    def tilt_grid(self) -> np.ndarray:
        n = int(round((self.tilt_max - self.tilt_min) / self.tilt_step)) + 1
        return self.tilt_min + self.tilt_step * np.arange(n)


def matched_filter(rf: RfDataset) -> RfDataset:
    """Correlate every channel trace with the transmit pulse.

    Returns a dataset of matched-filter outputs aligned so an echo arriving
    at time tau peaks at tau (odd-length, centered template).
    """
    pulse = rf.acquisition.pulse
    half = pulse_half_duration(pulse.center_frequency, pulse.num_cycles)
    n_half = int(math.ceil(half * pulse.sampling_frequency))
    t = np.arange(-n_half, n_half + 1) / pulse.sampling_frequency
    template = pulse_waveform(t, pulse.center_frequency, pulse.num_cycles)
    # correlation = convolution with the time-reversed template
    out = fftconvolve(rf.samples, template[::-1][None, None, :], mode="same", axes=2)
    return RfDataset(samples=out, acquisition=rf.acquisition, t0=rf.t0)


def sb(rf: RfDataset, x_p, z_p, config: SbConfig = SbConfig(), *,
       prefiltered: RfDataset | None = None):
    """Specular beamforming of one pixel: Snell-matched weighted compounding.

    Channel data are matched-filtered with the transmit pulse; for each
    candidate tilt g and transmission j the mirror receive direction
    alpha_r = alpha_j - 2 g selects a Gaussian receive weighting over the
    element angles (measured like the transmit angle, from the pixel), and
    the weighted delay-compensated sums are compounded over transmissions.

    Returns
    -------
    (value, tilt) : the compounded value with the largest magnitude over
    the tilt grid, and that tilt.
    """
    mf = prefiltered if prefiltered is not None else matched_filter(rf)
    acq = mf.acquisition
    tilts = config.tilt_grid()
    theta = np.arctan2(acq.geometry.element_x - x_p, z_p)
    totals = np.zeros(tilts.size)
    for j in range(mf.num_transmissions):
        snap = delay_compensate(mf, x_p, z_p, j)
        alpha_j = float(acq.transmit_angle(j, x_p, z_p))
        alpha_r = alpha_j - 2.0 * tilts
        w = np.exp(-((theta[None, :] - alpha_r[:, None]) ** 2) / (2.0 * config.sigma_r**2))
        totals += w @ snap
    best = int(np.argmax(np.abs(totals)))
    return float(totals[best]), float(tilts[best])
