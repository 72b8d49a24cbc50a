"""Per-pixel reflection characterization: contour isolines and directivity variance.

Both analyses look at one pixel's delay-compensated amplitudes over the
whole (channel x transmission) plane instead of collapsing them into a
single beamformed value. Contour isolines trace the magnitude topology of
that plane; directivity variance (DV) splits the aperture into
sub-apertures, measures how unevenly the reflected energy lands across
them per transmission, and turns the dominant (sub-aperture, transmission)
pair into a reflection direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .acquisition import PwScheme
from .beamform import delay_compensate


# ---------------------------------------------------------------------------
# Channel-transmission maps and contour isolines
# ---------------------------------------------------------------------------

def pixel_channel_tx_map(rf, x_p, z_p):
    """Delay-compensated amplitude of one pixel for every (channel, transmission).

    Returns an (num_elements, T) matrix; entry (i, j) is channel i's trace
    evaluated at the round-trip delay of transmission j. No apodization is
    applied.
    """
    cols = [delay_compensate(rf, x_p, z_p, j) for j in range(rf.num_transmissions)]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class Contour:
    """One level's isolines: polylines in continuous (channel, tx) coordinates."""

    level: float
    polylines: tuple


@dataclass(frozen=True)
class ContourSet:
    contours: tuple[Contour, ...]

    def __iter__(self):
        return iter(self.contours)

    def __len__(self):
        return len(self.contours)


def _edge_crossing(p_lo, p_hi, f_lo, f_hi, level):
    """Interpolated crossing point between two grid nodes, canonical order."""
    t = (level - f_lo) / (f_hi - f_lo)
    return (p_lo[0] + t * (p_hi[0] - p_lo[0]), p_lo[1] + t * (p_hi[1] - p_lo[1]))


def _cell_segments(field_, r, c, level):
    """Marching-squares segments of one cell, as ((edge pt), (edge pt)) pairs.

    Corners: a=(r,c), b=(r,c+1), cc=(r+1,c+1), d=(r+1,c). The code packs
    which corners exceed the level; saddle cases (5, 10) are disambiguated
    with the cell-center mean.
    """
    fa = field_[r, c]
    fb = field_[r, c + 1]
    fcc = field_[r + 1, c + 1]
    fd = field_[r + 1, c]
    code = ((fa > level) << 3) | ((fb > level) << 2) | ((fcc > level) << 1) | int(fd > level)
    if code in (0, 15):
        return []

    def top():
        return _edge_crossing((r, c), (r, c + 1), fa, fb, level)

    def right():
        return _edge_crossing((r, c + 1), (r + 1, c + 1), fb, fcc, level)

    def bottom():
        return _edge_crossing((r + 1, c), (r + 1, c + 1), fd, fcc, level)

    def left():
        return _edge_crossing((r, c), (r + 1, c), fa, fd, level)

    if code in (1, 14):
        return [(left(), bottom())]
    if code in (2, 13):
        return [(bottom(), right())]
    if code in (4, 11):
        return [(top(), right())]
    if code in (8, 7):
        return [(left(), top())]
    if code in (3, 12):
        return [(left(), right())]
    if code in (6, 9):
        return [(top(), bottom())]
    center_above = (fa + fb + fcc + fd) / 4.0 > level
    if code == 5:  # b and d above
        if center_above:
            return [(left(), top()), (bottom(), right())]
        return [(top(), right()), (left(), bottom())]
    # code == 10: a and cc above
    if center_above:
        return [(top(), right()), (left(), bottom())]
    return [(left(), top()), (bottom(), right())]


def _marching_squares(field_, level):
    """All isoline segments of ``field_`` at ``level``."""
    n_r, n_c = field_.shape
    segments = []
    for r in range(n_r - 1):
        for c in range(n_c - 1):
            segments.extend(_cell_segments(field_, r, c, level))
    return segments


def _chain_segments(segments):
    """Join segments sharing endpoints into polylines (closed or boundary-ended)."""
    def key(p):
        return (round(p[0], 9), round(p[1], 9))

    adjacency = {}
    for s_idx, (p, q) in enumerate(segments):
        adjacency.setdefault(key(p), []).append((s_idx, q))
        adjacency.setdefault(key(q), []).append((s_idx, p))

    used = [False] * len(segments)
    polylines = []

    def walk(start_pt):
        pts = [start_pt]
        while True:
            options = [(i, nxt) for i, nxt in adjacency.get(key(pts[-1]), []) if not used[i]]
            if not options:
                return pts
            i, nxt = options[0]
            used[i] = True
            pts.append(nxt)
            if key(nxt) == key(pts[0]):
                return pts

    # open chains first: start from endpoints of odd degree
    endpoints = [p for p, lst in adjacency.items() if len(lst) == 1]
    for ep in endpoints:
        live = [i for i, nxt in adjacency[ep] if not used[i]]
        if not live:
            continue
        i = live[0]
        used[i] = True
        p, q = segments[i]
        first, second = (p, q) if key(p) == ep else (q, p)
        pts = [first] + walk(second)[0:]
        polylines.append(np.asarray(pts))
    # remaining are closed loops
    for i, (p, q) in enumerate(segments):
        if used[i]:
            continue
        used[i] = True
        pts = [p] + walk(q)
        polylines.append(np.asarray(pts))
    return polylines


def extract_contours(matrix, levels=None) -> ContourSet:
    """Marching-squares isolines of a channel-transmission map's magnitude.

    Operates on |matrix|. ``levels`` defaults to 8 values evenly spaced
    between 10% and 90% of the magnitude maximum. A constant field has no
    crossings and yields an empty set. Polyline vertices are continuous
    (channel, transmission) coordinates; every polyline either closes on
    itself or terminates on the matrix boundary.
    """
    mag = np.abs(np.asarray(matrix, dtype=float))
    if mag.ndim != 2 or mag.shape[0] < 2 or mag.shape[1] < 2:
        raise ValueError("map must be at least 2x2")
    if levels is None:
        peak = mag.max()
        if peak == mag.min():
            return ContourSet(contours=())
        levels = np.linspace(0.1 * peak, 0.9 * peak, 8)
    contours = []
    span = mag.max() - mag.min()
    for level in np.atleast_1d(np.asarray(levels, dtype=float)):
        # nudge levels hitting samples exactly, so crossings stay on open edges
        while np.any(mag == level):
            level = level + max(span, 1.0) * 1e-12
        segs = _marching_squares(mag, level)
        if not segs:
            continue
        polys = tuple(_chain_segments(segs))
        contours.append(Contour(level=float(level), polylines=polys))
    return ContourSet(contours=tuple(contours))


# ---------------------------------------------------------------------------
# Directivity variance
# ---------------------------------------------------------------------------

def sa_receive_angle(x_p, z_p, sa_center_x):
    """Receive angle of a sub-aperture with the pixel: arctan((x_p - x_n) / z_p).

    Sign note: this is positive when the pixel lies on the +x side of the
    sub-aperture, i.e. opposite to the transmit-steering sign convention;
    directional quantities derived from DV measure the argmax sub-aperture
    in the transmit convention instead (see :func:`dv_analyze`).
    """
    return np.arctan2(np.asarray(x_p, dtype=float) - sa_center_x, z_p)


@dataclass(frozen=True)
class DvConfig:
    """Directivity-variance parameters: number of contiguous sub-apertures."""

    num_subapertures: int = 4

    def centers(self, geometry) -> np.ndarray:
        """Sub-aperture center x-positions, contiguous equal element blocks."""
        n_s = self.num_subapertures
        n_c = geometry.num_elements
        if n_s < 1 or n_c % n_s != 0:
            raise ValueError(
                f"num_subapertures {n_s} must divide the element count {n_c}")
        blocks = geometry.element_x.reshape(n_s, n_c // n_s)
        return blocks.mean(axis=1)


@dataclass
class DvReport:
    """Directivity-variance summary of one pixel.

    ``sa_beams`` and ``phi`` are (N_s, T); ``phi`` holds squared deviations
    of each sub-aperture beam from the cross-sub-aperture mean of its
    transmission. ``best_pair`` is phi's argmax (sub-aperture, transmission);
    ``eta`` the reflection angle in radians (nan, with ``eta_defined``
    False, when undefinable); ``vector`` the (axial, lateral) reflection
    intensity components with norm ``intensity``.
    """

    x: float
    z: float
    sa_beams: np.ndarray
    phi: np.ndarray
    phi_v: float
    phi_m: float
    best_pair: tuple[int, int]
    eta: float
    eta_defined: bool
    intensity: float
    vector: tuple[float, float]


def subaperture_beams(rf, x_p, z_p, config: DvConfig = DvConfig()):
    """Unapodized sub-aperture sums for every transmission, shape (N_s, T)."""
    geometry = rf.acquisition.geometry
    n_s = config.num_subapertures
    config.centers(geometry)  # validates divisibility
    block = geometry.num_elements // n_s
    beams = np.empty((n_s, rf.num_transmissions))
    for j in range(rf.num_transmissions):
        snap = delay_compensate(rf, x_p, z_p, j)
        beams[:, j] = snap.reshape(n_s, block).sum(axis=1)
    return beams


def dv_statistics(sa_beams):
    """Deviation matrix and summary statistics of a sub-aperture beam set.

    phi(n, j) is the squared deviation of beam (n, j) from the
    cross-sub-aperture mean of transmission j; phi_m its overall mean,
    phi_v its overall variance, and best the argmax (n, j) pair.
    """
    beams = np.asarray(sa_beams, dtype=float)
    mean_j = beams.mean(axis=0, keepdims=True)
    phi = (beams - mean_j) ** 2
    flat = int(np.argmax(phi))
    best = (flat // phi.shape[1], flat % phi.shape[1])
    return phi, float(phi.var()), float(phi.mean()), best


def dv_analyze(rf, x_p, z_p, config: DvConfig = DvConfig(),
               intensity: float | None = None) -> DvReport:
    """Directivity-variance analysis of one pixel.

    Forms N_s sub-aperture beams per transmission, their squared deviations
    phi from the per-transmission cross-sub-aperture mean, the summary
    statistics phi_m (mean of phi) and phi_v (variance of phi), and the
    argmax (sub-aperture, transmission) pair. The reflection angle is

        eta = alpha_T(j*) - alpha_R(n*)

    with both angles in the transmit-steering sign convention (the receive
    angle of the argmax sub-aperture center as seen from the pixel); for a
    specular reflector this makes eta twice the surface tilt. For STA,
    alpha_T is the transmit-element-to-pixel angle.

    ``intensity`` (defaults to |compounded full-aperture sum|) scales the
    report's reflection vector (axial, lateral) = (I cos eta, I sin eta).
    """
    geometry = rf.acquisition.geometry
    centers = config.centers(geometry)
    beams = subaperture_beams(rf, x_p, z_p, config)
    n_s = beams.shape[0]

    phi, phi_v, phi_m, best = dv_statistics(beams)

    if intensity is None:
        intensity = float(abs(beams.sum()))

    defined = n_s > 1 and phi[best] > 0.0
    if defined:
        n_star, j_star = best
        alpha_t = float(rf.acquisition.transmit_angle(j_star, x_p, z_p))
        alpha_r = float(np.arctan2(centers[n_star] - x_p, z_p))
        eta = alpha_t - alpha_r
        vector = (intensity * math.cos(eta), intensity * math.sin(eta))
    else:
        eta = float("nan")
        vector = (float("nan"), float("nan"))

    return DvReport(x=float(x_p), z=float(z_p), sa_beams=beams, phi=phi,
                    phi_v=phi_v, phi_m=phi_m, best_pair=best, eta=eta,
                    eta_defined=defined, intensity=float(intensity),
                    vector=vector)


def vectorize_intensity(intensity, eta):
    """Reflection intensity as (axial, lateral) components of magnitude I."""
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    return (intensity * math.cos(eta), intensity * math.sin(eta))


@dataclass
class DvField:
    """Sparse reflection-vector overlay for a region of interest.

    Arrays describe only the emitted (above-threshold) pixels; ``kept``
    holds their full reports and ``reports`` every ROI pixel's report.
    """

    xs: np.ndarray
    zs: np.ndarray
    vectors: np.ndarray  # (n, 2) (axial, lateral)
    phi_v: np.ndarray
    phi_m: np.ndarray
    etas: np.ndarray
    kept: list = field(default_factory=list)
    reports: list = field(default_factory=list)


def dv_overlay(rf, image, roi, config: DvConfig = DvConfig(),
               percentile: float = 90.0) -> DvField:
    """Reflection vectors for image pixels inside a region of interest.

    Runs :func:`dv_analyze` on every grid pixel inside
    roi = (x_min, x_max, z_min, z_max), using the image envelope as the
    vectorized intensity, and emits vectors only for pixels whose phi_v
    exceeds the given percentile within the ROI.
    """
    grid = image.grid
    ix = np.flatnonzero((grid.xs >= roi[0]) & (grid.xs <= roi[1]))
    iz = np.flatnonzero((grid.zs >= roi[2]) & (grid.zs <= roi[3]))
    reports = []
    for i in ix:
        for k in iz:
            rep = dv_analyze(rf, grid.xs[i], grid.zs[k], config,
                             intensity=float(image.envelope[i, k]))
            reports.append(rep)
    if not reports:
        return DvField(xs=np.empty(0), zs=np.empty(0),
                       vectors=np.empty((0, 2)), phi_v=np.empty(0),
                       phi_m=np.empty(0), etas=np.empty(0), kept=[], reports=[])
    phi_vs = np.asarray([r.phi_v for r in reports])
    cut = np.percentile(phi_vs, percentile)
    keep = [r for r in reports if r.phi_v > cut and r.eta_defined]
    return DvField(
        xs=np.asarray([r.x for r in keep]),
        zs=np.asarray([r.z for r in keep]),
        vectors=np.asarray([r.vector for r in keep]).reshape(-1, 2),
        phi_v=np.asarray([r.phi_v for r in keep]),
        phi_m=np.asarray([r.phi_m for r in keep]),
        etas=np.asarray([r.eta for r in keep]),
        kept=keep,
        reports=reports,
    )
