"""Array geometry, pulse/medium parameters, transmit schemes and delay laws.

All quantities are SI internally: positions in meters, times in seconds,
angles in radians. Degrees and millimeters exist only at the CLI/config
boundary.

The coordinate frame is the usual linear-array one: x lateral (positive to
the right), z axial depth (positive into the medium), elements on the z = 0
line. A plane wave steered by a positive angle propagates toward +x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class DomainError(ValueError):
    """A requested quantity falls outside its mathematical domain."""


class MemoryBudgetError(MemoryError):
    """A precomputed table would exceed the configured memory cap."""


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array on the z = 0 line, centered at x = 0.

    Parameters
    ----------
    num_elements : int
        Number of transducer elements.
    pitch : float
        Center-to-center element spacing in meters.
    """

    num_elements: int
    pitch: float

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError(f"num_elements must be >= 1, got {self.num_elements}")
        if not self.pitch > 0:
            raise ValueError(f"pitch must be > 0, got {self.pitch}")

    @cached_property
    def element_x(self) -> np.ndarray:
        """Element x-positions in meters, strictly increasing, shape (num_elements,)."""
        n = self.num_elements
        x = (np.arange(n) - (n - 1) / 2.0) * self.pitch
        x.flags.writeable = False
        return x

    @property
    def aperture_width(self) -> float:
        """Total array width L = num_elements * pitch in meters."""
        return self.num_elements * self.pitch


@dataclass(frozen=True)
class PulseSpec:
    """Transmit pulse description.

    Parameters
    ----------
    center_frequency : float
        Pulse center frequency in Hz.
    sampling_frequency : float
        Channel-data sampling rate in Hz. Must exceed twice the center
        frequency.
    num_cycles : float
        Nominal number of carrier cycles inside the Gaussian window.
    """

    center_frequency: float
    sampling_frequency: float
    num_cycles: float = 2.5

    def __post_init__(self):
        if not self.center_frequency > 0:
            raise ValueError("center_frequency must be > 0")
        if not self.sampling_frequency > 2 * self.center_frequency:
            raise ValueError(
                "sampling_frequency must exceed 2 x center_frequency "
                f"(got fs={self.sampling_frequency}, f0={self.center_frequency})"
            )
        if not self.num_cycles > 0:
            raise ValueError("num_cycles must be > 0")

    def wavelength(self, speed_of_sound: float) -> float:
        """Carrier wavelength c / f0 in meters."""
        return speed_of_sound / self.center_frequency


@dataclass(frozen=True)
class MediumSpec:
    """Homogeneous propagation medium."""

    speed_of_sound: float = 1540.0

    def __post_init__(self):
        if not self.speed_of_sound > 0:
            raise ValueError("speed_of_sound must be > 0")


@dataclass(frozen=True)
class StaScheme:
    """Synthetic transmit aperture: one single-element transmission per index.

    ``tx_elements`` holds zero-based element indices, one transmission each.
    ``None`` means every element fires in order (the conventional full STA).
    """

    tx_elements: tuple[int, ...] | None = None

    kind = "sta"

    def resolve_indices(self, geometry: ArrayGeometry) -> np.ndarray:
        if self.tx_elements is None:
            return np.arange(geometry.num_elements)
        idx = np.asarray(self.tx_elements, dtype=int)
        if idx.size == 0:
            raise ValueError("STA scheme needs at least one transmit element")
        if len(set(idx.tolist())) != idx.size:
            raise ValueError("STA transmit element indices must be unique")
        if idx.min() < 0 or idx.max() >= geometry.num_elements:
            raise ValueError("STA transmit element index out of range")
        return idx

    def num_transmissions(self, geometry: ArrayGeometry) -> int:
        return len(self.resolve_indices(geometry))

    def tx_positions(self, geometry: ArrayGeometry) -> np.ndarray:
        """Transmit-center x-positions, shape (T,)."""
        return geometry.element_x[self.resolve_indices(geometry)]


@dataclass(frozen=True)
class PwScheme:
    """Steered plane-wave transmissions with the full aperture."""

    angles: tuple[float, ...]

    kind = "pw"

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        if a.size == 0:
            raise ValueError("PW scheme needs at least one angle")
        if np.any(np.diff(a) <= 0):
            raise ValueError("PW angles must be strictly increasing")
        if np.any(np.abs(a) >= np.pi / 2):
            raise ValueError("PW angles must satisfy |angle| < pi/2")
        object.__setattr__(self, "angles", tuple(float(v) for v in a))

    def num_transmissions(self, geometry: ArrayGeometry | None = None) -> int:
        return len(self.angles)

    def angle_array(self) -> np.ndarray:
        return np.asarray(self.angles, dtype=float)


TransmitScheme = StaScheme | PwScheme


@dataclass(frozen=True)
class PixelGrid:
    """Rectangular, uniformly spaced image grid.

    Pixels are ordered lateral-major: flat index p = ix * n_z + iz.
    """

    x_min: float
    x_max: float
    z_min: float
    z_max: float
    n_x: int
    n_z: int

    def __post_init__(self):
        if not self.z_min > 0:
            raise ValueError("z_min must be > 0 (grid starts below the array)")
        if self.x_max < self.x_min or self.z_max < self.z_min:
            raise ValueError("grid extents must be non-degenerate")
        if self.n_x < 1 or self.n_z < 1:
            raise ValueError("pixel counts must be >= 1")

    @cached_property
    def xs(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n_x)
        x.flags.writeable = False
        return x

    @cached_property
    def zs(self) -> np.ndarray:
        z = np.linspace(self.z_min, self.z_max, self.n_z)
        z.flags.writeable = False
        return z

    @property
    def n_pixels(self) -> int:
        return self.n_x * self.n_z

    def pixel_positions(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened pixel coordinates (xs, zs), each shape (n_pixels,)."""
        return (np.repeat(self.xs, self.n_z), np.tile(self.zs, self.n_x))


@dataclass(frozen=True)
class AcquisitionSpec:
    """Complete acquisition description: array, pulse, medium and scheme."""

    geometry: ArrayGeometry
    pulse: PulseSpec
    medium: MediumSpec
    scheme: TransmitScheme

    @property
    def wavelength(self) -> float:
        return self.pulse.wavelength(self.medium.speed_of_sound)

    def num_transmissions(self) -> int:
        return self.scheme.num_transmissions(self.geometry)

    def transmit_angle(self, j, x_p, z_p):
        """Transmit angle of transmission ``j`` toward pixel (x_p, z_p).

        For plane waves this is the steering angle; for STA it is the
        transmit-element-to-pixel angle, measured like the steering angle
        (from the z axis, positive toward +x).
        """
        if isinstance(self.scheme, PwScheme):
            return self.scheme.angles[j]
        x_j = self.scheme.tx_positions(self.geometry)[j]
        return np.arctan2(np.asarray(x_p) - x_j, z_p)


def pw_angle_set(geometry: ArrayGeometry, wavelength: float) -> np.ndarray:
    """Plane-wave steering angles giving focused-equivalent image quality.

    The lateral spatial-frequency grid m * wavelength / L for
    m = -N_c/2 ... N_c/2 - 1 is mapped through arcsin to true steering
    angles, returned sorted ascending.

    Raises
    ------
    DomainError
        If any |m * wavelength / L| exceeds 1.
    """
    if not wavelength > 0:
        raise ValueError("wavelength must be > 0")
    n = geometry.num_elements
    m = np.arange(-(n // 2), n - (n // 2))
    ratios = m * (wavelength / geometry.aperture_width)
    bad = np.abs(ratios) > 1.0
    if np.any(bad):
        worst = ratios[np.argmax(np.abs(ratios))]
        raise DomainError(
            f"|m * wavelength / aperture| = {abs(worst):.6g} exceeds 1; "
            "the angle set is undefined for this array/wavelength"
        )
    return np.arcsin(ratios)


def default_pw_angles(start_deg: float = -18.0, stop_deg: float = 18.0,
                      step_deg: float = 0.5) -> np.ndarray:
    """Practical plane-wave preset: -18 deg to +18 deg in 0.5 deg steps (73 angles)."""
    n = int(round((stop_deg - start_deg) / step_deg)) + 1
    return np.deg2rad(np.linspace(start_deg, stop_deg, n))


def sta_tx_delay(x_p, z_p, tx_center_x, speed_of_sound):
    """One-way transmit delay of a single-element spherical wave, seconds.

    sqrt(z_p^2 + (x_p - x_j)^2) / c for transmit center x_j. Broadcasts over
    array inputs.
    """
    dx = np.asarray(x_p, dtype=float) - tx_center_x
    return np.sqrt(np.asarray(z_p, dtype=float) ** 2 + dx**2) / speed_of_sound


def pw_tx_delay(x_p, z_p, angle, speed_of_sound):
    """One-way transmit delay of a steered plane wave, seconds.

    (z_p cos(angle) + x_p sin(angle)) / c. May be negative for x_p and
    angle of opposite sign; the dataset time origin absorbs this.
    """
    c_a = float(np.cos(angle))
    s_a = float(np.sin(angle))
    return (np.asarray(z_p, dtype=float) * c_a + np.asarray(x_p, dtype=float) * s_a) / speed_of_sound


def rx_delay(x_p, z_p, element_x, speed_of_sound):
    """One-way receive delay: Euclidean distance to the element over c, seconds."""
    return sta_tx_delay(x_p, z_p, element_x, speed_of_sound)


def total_delay(tx_delay, rx_delay_):
    """Round-trip delay: transmit plus receive leg."""
    return tx_delay + rx_delay_


@dataclass(frozen=True)
class DelayTable:
    """Precomputed per-pixel delays for one grid/scheme/geometry triple.

    tx has shape (n_pixels, T), rx shape (n_pixels, num_elements); both in
    seconds, pixel-ordered like ``PixelGrid.pixel_positions``. The receive
    table depends only on grid and geometry, so it can be shared across
    schemes.
    """

    tx: np.ndarray
    rx: np.ndarray
    grid: PixelGrid


def build_delay_table(grid: PixelGrid, scheme: TransmitScheme,
                      geometry: ArrayGeometry, medium: MediumSpec,
                      max_bytes: int = 2 << 30) -> DelayTable:
    """Precompute transmit and receive delay tables for every grid pixel.

    Entries equal the per-point delay functions bit-exactly. Raises
    MemoryBudgetError before allocating if the tables would exceed
    ``max_bytes``.
    """
    c = medium.speed_of_sound
    n_tx = scheme.num_transmissions(geometry)
    n_el = geometry.num_elements
    need = grid.n_pixels * (n_tx + n_el) * 8
    if need > max_bytes:
        raise MemoryBudgetError(
            f"delay table needs {need} bytes, exceeding the {max_bytes} byte cap"
        )
    xs, zs = grid.pixel_positions()
    rx = np.empty((grid.n_pixels, n_el))
    for i, x_i in enumerate(geometry.element_x):
        rx[:, i] = rx_delay(xs, zs, x_i, c)
    tx = np.empty((grid.n_pixels, n_tx))
    if isinstance(scheme, PwScheme):
        for j, angle in enumerate(scheme.angles):
            tx[:, j] = pw_tx_delay(xs, zs, angle, c)
    else:
        for j, x_j in enumerate(scheme.tx_positions(geometry)):
            tx[:, j] = sta_tx_delay(xs, zs, x_j, c)
    return DelayTable(tx=tx, rx=rx, grid=grid)


def default_acquisition(scheme: TransmitScheme | None = None) -> AcquisitionSpec:
    """The stock acquisition: 128 elements at 0.3 mm pitch, 7.6 MHz pulse
    sampled at 31.25 MHz, c = 1540 m/s, plane waves -18..18 deg unless a
    scheme is given."""
    if scheme is None:
        scheme = PwScheme(angles=tuple(default_pw_angles()))
    return AcquisitionSpec(
        geometry=ArrayGeometry(num_elements=128, pitch=0.3e-3),
        pulse=PulseSpec(center_frequency=7.6e6, sampling_frequency=31.25e6),
        medium=MediumSpec(speed_of_sound=1540.0),
        scheme=scheme,
    )
