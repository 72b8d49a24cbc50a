"""Synthetic RF channel-data simulation for diffuse and specular scenes.

The simulator realizes the two reflection regimes directly: diffuse point
scatterers re-radiate omnidirectionally, while specular reflectors (tilted
plates and circular arcs) are densely sampled along their surface and each
surface sample re-radiates into a narrow Gaussian lobe around the mirror
direction (receive angle = incidence angle - 2 * local tilt).

Tilt sign convention: a positive tilt rotates the +x end of a reflector
toward the array (shallower). With the steering convention of
:mod:`echoform.acquisition` this makes the mirror law hold with receive
angles measured exactly like transmit angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .acquisition import AcquisitionSpec, PwScheme, StaScheme, default_acquisition

# Neper per dB, for attenuation given in dB/cm/MHz
_NEPER_PER_DB = np.log(10.0) / 20.0
# Reference range for normalizing the 1/r spreading legs
_SPREADING_REF = 10e-3


class FovError(ValueError):
    """A scatterer's echo would fall outside the sampled time window."""


@dataclass(frozen=True)
class DiffusePoint:
    """Sub-wavelength scatterer with isotropic backscatter."""

    x: float
    z: float
    amplitude: float = 1.0


@dataclass(frozen=True)
class Plate:
    """Flat specular reflector segment.

    Centered at (x, z) with the given half-length along its surface and a
    tilt in radians (positive tilt lifts the +x end toward the array).
    """

    x: float
    z: float
    half_length: float
    tilt: float = 0.0
    amplitude: float = 1.0
    directivity_sigma: float = math.radians(2.0)


@dataclass(frozen=True)
class Arc:
    """Convex circular-arc reflector bulging toward the array.

    (x, z) is the circle center; the arc spans ``angular_extent`` radians
    symmetrically about the apex point (x, z - radius).
    """

    x: float
    z: float
    radius: float
    angular_extent: float
    amplitude: float = 1.0
    directivity_sigma: float = math.radians(2.0)


@dataclass(frozen=True)
class Scene:
    """Collection of scatterers inside a declared field of view.

    ``fov`` is (x_min, x_max, z_min, z_max) in meters and determines the
    sampled time window of any dataset synthesized from the scene.
    ``attenuation`` is in dB/cm/MHz, applied as a frequency-independent
    amplitude decay along the round-trip path. ``reverberant_reflector``
    optionally names a specular reflector (index) whose echoes repeat once
    at doubled delay, scaled by 0.3, emulating interface reverberation.
    """

    fov: tuple[float, float, float, float]
    diffuse_points: tuple[DiffusePoint, ...] = ()
    reflectors: tuple = ()
    attenuation: float = 0.0
    reverberant_reflector: int | None = None

    def __post_init__(self):
        x_min, x_max, z_min, z_max = self.fov
        if not (x_max > x_min and z_max > z_min and z_min > 0):
            raise ValueError("fov must satisfy x_max > x_min, z_max > z_min > 0")
        for p in self.diffuse_points:
            self._check_inside(p.x, p.z)
            if p.amplitude < 0:
                raise ValueError("amplitudes must be >= 0")
        for r in self.reflectors:
            for x, z in _reflector_extremes(r):
                self._check_inside(x, z)
            if r.amplitude < 0:
                raise ValueError("amplitudes must be >= 0")
            if not r.directivity_sigma > 0:
                raise ValueError("directivity_sigma must be > 0")
        if self.reverberant_reflector is not None and not (
            0 <= self.reverberant_reflector < len(self.reflectors)
        ):
            raise ValueError("reverberant_reflector index out of range")

    def _check_inside(self, x, z):
        x_min, x_max, z_min, z_max = self.fov
        if not (x_min <= x <= x_max and z_min <= z <= z_max):
            raise ValueError(f"scatterer at ({x}, {z}) outside declared fov {self.fov}")


def _reflector_extremes(r):
    """Representative boundary points of a reflector, for fov validation."""
    if isinstance(r, Plate):
        dx = r.half_length * math.cos(r.tilt)
        dz = r.half_length * math.sin(r.tilt)
        return [(r.x - dx, r.z + dz), (r.x + dx, r.z - dz)]
    if isinstance(r, Arc):
        h = r.angular_extent / 2
        return [
            (r.x, r.z - r.radius),
            (r.x - r.radius * math.sin(h), r.z - r.radius * math.cos(h)),
            (r.x + r.radius * math.sin(h), r.z - r.radius * math.cos(h)),
        ]
    raise TypeError(f"unknown reflector type {type(r).__name__}")


@dataclass
class RfDataset:
    """Real-valued RF channel data plus its acquisition context.

    ``samples`` has shape (T, num_elements, n_t); sample k of any trace was
    taken at time t0 + k / fs.
    """

    samples: np.ndarray
    acquisition: AcquisitionSpec | None
    t0: float

    @property
    def num_transmissions(self) -> int:
        return self.samples.shape[0]

    @property
    def num_elements(self) -> int:
        return self.samples.shape[1]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[2]

    @property
    def fs(self) -> float:
        return self.acquisition.pulse.sampling_frequency

    def validate(self):
        if self.samples.ndim != 3:
            raise ValueError("samples must be (T, num_elements, n_samples)")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")
        if self.acquisition is not None:
            if self.samples.shape[1] != self.acquisition.geometry.num_elements:
                raise ValueError("channel count disagrees with geometry")
            if self.acquisition.scheme is not None:
                expect = self.acquisition.num_transmissions()
                if self.samples.shape[0] != expect:
                    raise ValueError(
                        f"dataset has {self.samples.shape[0]} transmissions, "
                        f"scheme expects {expect}"
                    )
        return self


def pulse_waveform(t, center_frequency, num_cycles=2.5):
    """Gaussian-windowed cosine burst, peak 1 at t = 0.

    The window sigma is chosen so +-3 sigma spans ``num_cycles`` carrier
    periods, giving an even pulse whose envelope maximum coincides with the
    arrival time.
    """
    t = np.asarray(t, dtype=float)
    sigma = num_cycles / center_frequency / 6.0
    return np.cos(2 * np.pi * center_frequency * t) * np.exp(-(t**2) / (2 * sigma**2))


def pulse_half_duration(center_frequency, num_cycles=2.5) -> float:
    """Half-width of the pulse support (the +-3 sigma point), seconds."""
    return num_cycles / center_frequency / 2.0


def surface_samples(reflector, wavelength):
    """Discretize a specular reflector at quarter-wavelength spacing.

    Returns (x, z, tilt) arrays: sample positions and the local surface
    tilt at each sample (constant for plates, varying along arcs).
    """
    step = wavelength / 4.0
    if isinstance(reflector, Plate):
        n = max(2, int(math.ceil(2 * reflector.half_length / step)) + 1)
        s = np.linspace(-reflector.half_length, reflector.half_length, n)
        x = reflector.x + s * math.cos(reflector.tilt)
        z = reflector.z - s * math.sin(reflector.tilt)
        return x, z, np.full(n, float(reflector.tilt))
    if isinstance(reflector, Arc):
        arc_len = reflector.radius * reflector.angular_extent
        n = max(2, int(math.ceil(arc_len / step)) + 1)
        phi = np.linspace(-reflector.angular_extent / 2, reflector.angular_extent / 2, n)
        x = reflector.x + reflector.radius * np.sin(phi)
        z = reflector.z - reflector.radius * np.cos(phi)
        # local tangent slope dz/dx = tan(phi): +x end deeper for phi > 0,
        # which is a tilt of -phi in the plate convention
        return x, z, -phi
    raise TypeError(f"unknown reflector type {type(reflector).__name__}")


def _time_window(fov, acq):
    """Sampled window [t0, t_end] covering every echo from inside the fov."""
    x_min, x_max, z_min, z_max = fov
    c = acq.medium.speed_of_sound
    # delay extrema over a rectangle lie on its boundary for both the
    # Euclidean and the plane-wave delay laws (z > 0, elements at z = 0)
    m = 129
    bx = np.concatenate([
        np.linspace(x_min, x_max, m), np.linspace(x_min, x_max, m),
        np.full(m, x_min), np.full(m, x_max),
    ])
    bz = np.concatenate([
        np.full(m, z_min), np.full(m, z_max),
        np.linspace(z_min, z_max, m), np.linspace(z_min, z_max, m),
    ])
    rx_all = np.sqrt((bx[:, None] - acq.geometry.element_x[None, :]) ** 2 + bz[:, None] ** 2) / c
    rx_lo, rx_hi = rx_all.min(), rx_all.max()
    if isinstance(acq.scheme, PwScheme):
        ang = acq.scheme.angle_array()
        tx_all = (bz[:, None] * np.cos(ang)[None, :] + bx[:, None] * np.sin(ang)[None, :]) / c
        tx_lo, tx_hi = tx_all.min(), tx_all.max()
    else:
        tx_pos = acq.scheme.tx_positions(acq.geometry)
        tx_all = np.sqrt((bx[:, None] - tx_pos[None, :]) ** 2 + bz[:, None] ** 2) / c
        tx_lo, tx_hi = tx_all.min(), tx_all.max()
    half = pulse_half_duration(acq.pulse.center_frequency, acq.pulse.num_cycles)
    pad = 2.0 / acq.pulse.sampling_frequency
    t0 = tx_lo + rx_lo - half - pad
    t_end = tx_hi + rx_hi + half + pad
    return t0, t_end


def _gather_scatterers(scene, wavelength):
    """Flatten the scene into per-sample arrays (x, z, amplitude, tilt, sigma, specular, reverb)."""
    xs, zs, amps, tilts, sigmas, spec, reverb = [], [], [], [], [], [], []
    for p in scene.diffuse_points:
        xs.append(p.x)
        zs.append(p.z)
        amps.append(p.amplitude)
        tilts.append(0.0)
        sigmas.append(1.0)
        spec.append(False)
        reverb.append(False)
    for k, r in enumerate(scene.reflectors):
        sx, sz, st = surface_samples(r, wavelength)
        xs.extend(sx)
        zs.extend(sz)
        amps.extend(np.full(sx.size, r.amplitude))
        tilts.extend(st)
        sigmas.extend(np.full(sx.size, r.directivity_sigma))
        spec.extend([True] * sx.size)
        reverb.extend([k == scene.reverberant_reflector] * sx.size)
    return (np.asarray(xs, dtype=float), np.asarray(zs, dtype=float),
            np.asarray(amps, dtype=float), np.asarray(tilts, dtype=float),
            np.asarray(sigmas, dtype=float), np.asarray(spec, dtype=bool),
            np.asarray(reverb, dtype=bool))


def _deposit(out, tau, amp, t0, fs, f0, num_cycles):
    """Accumulate amp * pulse(t - tau) into traces, evaluated analytically.

    out is (num_elements, n_t); tau and amp are (n_scat, num_elements).
    """
    n_el, n_t = out.shape
    half = pulse_half_duration(f0, num_cycles)
    k_lo = np.ceil((tau - half - t0) * fs).astype(np.int64)
    width = int(math.ceil(2 * half * fs)) + 2
    elem_idx = np.broadcast_to(np.arange(n_el)[None, :], tau.shape)
    acc = np.zeros(n_el * n_t)
    for w in range(width):
        k = k_lo + w
        inside = (k >= 0) & (k < n_t)
        if not inside.any():
            continue
        t_k = t0 + k[inside] / fs
        vals = amp[inside] * pulse_waveform(t_k - tau[inside], f0, num_cycles)
        acc += np.bincount(elem_idx[inside] * n_t + k[inside], weights=vals,
                           minlength=n_el * n_t)
    out += acc.reshape(n_el, n_t)


def synth_rf(scene: Scene, acq: AcquisitionSpec | None = None,
             fov: tuple[float, float, float, float] | None = None, *,
             noise_rms: float = 0.0, seed: int = 0,
             spreading: bool = True) -> RfDataset:
    """Simulate an RF dataset for the scene under the given acquisition.

    Every scatterer (or specular surface sample) k contributes, for each
    transmission j and element i,

        amplitude_k * D_k(i, j) * pulse(t - tau_tx(j, k) - tau_rx(i, k))

    where D_k = 1 for diffuse points and a Gaussian lobe around the mirror
    direction (receive angle = incidence angle - 2 * tilt) for specular
    samples. With ``spreading`` on, spherical 1/r decay (normalized to
    10 mm) is applied to the receive leg and, for STA, the transmit leg.

    The sampled time window covers all echoes from inside ``fov``
    (defaults to the scene's own field of view); a scatterer whose echo
    falls outside that window raises FovError.
    """
    if acq is None:
        acq = default_acquisition()
    f0 = acq.pulse.center_frequency
    fs = acq.pulse.sampling_frequency
    cyc = acq.pulse.num_cycles
    c = acq.medium.speed_of_sound
    el_x = acq.geometry.element_x
    n_el = acq.geometry.num_elements
    n_tx = acq.num_transmissions()

    t0, t_end = _time_window(fov if fov is not None else scene.fov, acq)
    n_t = int(math.ceil((t_end - t0) * fs)) + 1
    samples = np.zeros((n_tx, n_el, n_t))

    sx, sz, amp0, tilt, sigma, is_spec, is_rev = _gather_scatterers(scene, acq.wavelength)
    if sx.size == 0:
        if noise_rms > 0.0:
            rng = np.random.default_rng(seed)
            samples += rng.normal(scale=noise_rms, size=samples.shape)
        return RfDataset(samples=samples, acquisition=acq, t0=t0).validate()

    rx_tau = np.sqrt((sx[:, None] - el_x[None, :]) ** 2 + sz[:, None] ** 2) / c
    # element angle seen from the scatterer, measured like the transmit angle
    theta = np.arctan2(el_x[None, :] - sx[:, None], sz[:, None])

    amp = np.repeat(amp0[:, None], n_el, axis=1)
    if spreading:
        amp = amp * (_SPREADING_REF / (c * rx_tau))
    if scene.attenuation != 0.0:
        beta = scene.attenuation * (f0 / 1e6) * 100.0 * _NEPER_PER_DB

    half = pulse_half_duration(f0, cyc)
    is_pw = isinstance(acq.scheme, PwScheme)
    tx_angles = acq.scheme.angle_array() if is_pw else None
    tx_pos = None if is_pw else acq.scheme.tx_positions(acq.geometry)

    for j in range(n_tx):
        if is_pw:
            a_j = tx_angles[j]
            tx_tau = (sz * math.cos(a_j) + sx * math.sin(a_j)) / c
            inc = np.full(sx.shape, a_j)
            tx_gain = 1.0
        else:
            x_j = tx_pos[j]
            tx_tau = np.sqrt((sx - x_j) ** 2 + sz**2) / c
            inc = np.arctan2(sx - x_j, sz)
            tx_gain = (_SPREADING_REF / (c * tx_tau)) if spreading else 1.0

        tau = tx_tau[:, None] + rx_tau
        lo = tau.min(axis=1) - half
        hi = tau.max(axis=1) + half
        if np.any(lo < t0) or np.any(hi > t_end):
            k = int(np.argmax(np.maximum(t0 - lo, hi - t_end)))
            raise FovError(
                f"echo of scatterer at ({sx[k]:.4g}, {sz[k]:.4g}) m falls outside "
                f"the sampled window for transmission {j}"
            )

        if np.ndim(tx_gain):
            a = amp * tx_gain[:, None]
        else:
            a = amp * tx_gain
        mirror = inc - 2.0 * tilt
        direct = np.where(
            is_spec[:, None],
            np.exp(-((theta - mirror[:, None]) ** 2) / (2.0 * sigma[:, None] ** 2)),
            1.0,
        )
        a = a * direct
        if scene.attenuation != 0.0:
            a = a * np.exp(-beta * c * tau)
        _deposit(samples[j], tau, a, t0, fs, f0, cyc)

        if np.any(is_rev):
            # single extra bounce off the designated interface: same lobe,
            # doubled delay, 0.3 amplitude; clipped at the window edge
            tau2 = 2.0 * tau[is_rev]
            _deposit(samples[j], tau2, 0.3 * a[is_rev], t0, fs, f0, cyc)

    if noise_rms > 0.0:
        rng = np.random.default_rng(seed)
        samples += rng.normal(scale=noise_rms, size=samples.shape)

    return RfDataset(samples=samples, acquisition=acq, t0=t0).validate()


def _speckle_points(fov, density_per_cm2, amplitude, seed, margin=0.0):
    x_min, x_max, z_min, z_max = fov
    area_cm2 = ((x_max - x_min - 2 * margin) * 100.0) * ((z_max - z_min - 2 * margin) * 100.0)
    n = max(1, int(round(density_per_cm2 * area_cm2)))
    rng = np.random.default_rng(seed)
    xs = rng.uniform(x_min + margin, x_max - margin, n)
    zs = rng.uniform(z_min + margin, z_max - margin, n)
    amps = amplitude * rng.uniform(0.5, 1.5, n)
    return tuple(DiffusePoint(x=float(x), z=float(z), amplitude=float(a))
                 for x, z, a in zip(xs, zs, amps))


def preset_scenes() -> dict[str, Scene]:
    """Three deterministic scenes mirroring the structure of the study's
    wire-in-gelatin, bone-in-water and back-palm acquisitions.

    ``wip``: a segmented plate tilted 10-15 deg (a bent wire analogue)
    embedded in uniform speckle. ``bop``: two convex arcs, shallow
    small-radius and deeper large-radius, in a clear zero-attenuation
    medium. ``bap``: two shallow arcs over speckle with a deep horizontal
    interface flagged reverberant.
    """
    wip_fov = (-12e-3, 12e-3, 4e-3, 28e-3)
    wip = Scene(
        fov=wip_fov,
        diffuse_points=_speckle_points(wip_fov, density_per_cm2=260.0,
                                       amplitude=0.03, seed=11, margin=0.5e-3),
        reflectors=(
            Plate(x=-2.4e-3, z=15.6e-3, half_length=1.2e-3, tilt=math.radians(10.0)),
            Plate(x=0.0, z=15.0e-3, half_length=1.2e-3, tilt=math.radians(12.5)),
            Plate(x=2.3e-3, z=14.3e-3, half_length=1.2e-3, tilt=math.radians(15.0)),
        ),
    )
    bop_fov = (-14e-3, 14e-3, 2e-3, 26e-3)
    bop = Scene(
        fov=bop_fov,
        reflectors=(
            Arc(x=-4e-3, z=9e-3, radius=3.5e-3, angular_extent=math.radians(120.0)),
            Arc(x=4e-3, z=22e-3, radius=7e-3, angular_extent=math.radians(100.0)),
        ),
    )
    bap_fov = (-12e-3, 12e-3, 2e-3, 58e-3)
    bap = Scene(
        fov=bap_fov,
        diffuse_points=_speckle_points((-12e-3, 12e-3, 2e-3, 26e-3),
                                       density_per_cm2=220.0, amplitude=0.02,
                                       seed=23, margin=0.5e-3),
        reflectors=(
            Arc(x=-5e-3, z=7e-3, radius=3e-3, angular_extent=math.radians(110.0)),
            Arc(x=5e-3, z=7.5e-3, radius=3e-3, angular_extent=math.radians(110.0)),
            Plate(x=0.0, z=25e-3, half_length=8e-3, tilt=0.0, amplitude=1.5),
        ),
        attenuation=0.3,
        reverberant_reflector=2,
    )
    return {"wip": wip, "bop": bop, "bap": bap}
