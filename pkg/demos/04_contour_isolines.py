# %%
# Contour isolines over the channel-transmission plane
# ----------------------------------------------------
# Instead of collapsing a pixel's delay-compensated samples into one
# beamformed number, lay them out as an (element x transmission) matrix
# and trace its magnitude isolines. Specular pixels confine their energy
# to a band whose position encodes the reflection direction; diffuse
# pixels spread energy across the whole plane.

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from echoform import (
    ArrayGeometry,
    AcquisitionSpec,
    DiffusePoint,
    MediumSpec,
    Plate,
    PulseSpec,
    PwScheme,
    Scene,
    StaScheme,
    default_pw_angles,
    extract_contours,
    pixel_channel_tx_map,
    synth_rf,
)

OUT = "demos/output"
FOV = (-8e-3, 8e-3, 15e-3, 25e-3)

geometry = ArrayGeometry(num_elements=64, pitch=0.3e-3)
pulse = PulseSpec(center_frequency=7.6e6, sampling_frequency=31.25e6)
medium = MediumSpec()

plate_scene = Scene(fov=FOV, reflectors=(
    Plate(x=0.0, z=20e-3, half_length=3e-3, tilt=math.radians(10.0)),))
point_scene = Scene(fov=FOV, diffuse_points=(DiffusePoint(0.0, 20e-3),))

cases = [
    ("specular plate, PW", plate_scene,
     PwScheme(angles=tuple(default_pw_angles()))),
    ("specular plate, STA", plate_scene, StaScheme()),
    ("diffuse point, STA", point_scene, StaScheme()),
]

# %%
# Maps and isolines for each case.

fig, axes = plt.subplots(1, 3, figsize=(16, 5))
for ax, (title, scene, scheme) in zip(axes, cases):
    acq = AcquisitionSpec(geometry=geometry, pulse=pulse, medium=medium,
                          scheme=scheme)
    rf = synth_rf(scene, acq)
    level_map = pixel_channel_tx_map(rf, 0.0, 20e-3)
    mag = np.abs(level_map)
    contours = extract_contours(level_map)
    ax.imshow(mag, cmap="viridis", aspect="auto", origin="lower")
    for contour in contours:
        for poly in contour.polylines:
            ax.plot(poly[:, 1], poly[:, 0], color="w", linewidth=0.6)
    ax.set_title(title)
    ax.set_xlabel("transmission")
    n_polys = sum(len(c.polylines) for c in contours)
    print(f"{title}: {len(contours)} levels, {n_polys} isolines, "
          f"map peak {mag.max():.3g}")
axes[0].set_ylabel("element")
fig.tight_layout()
fig.savefig(f"{OUT}/contour_isolines.png", dpi=110)
print(f"wrote {OUT}/contour_isolines.png")
