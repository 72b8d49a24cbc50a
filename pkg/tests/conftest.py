"""Shared fixtures: small acquisitions and cached simulated datasets."""

import math

import numpy as np
import pytest

from echoform import (
    AcquisitionSpec,
    ArrayGeometry,
    DiffusePoint,
    MediumSpec,
    Plate,
    PulseSpec,
    PwScheme,
    Scene,
    StaScheme,
    default_pw_angles,
    synth_rf,
)

FOV = (-8e-3, 8e-3, 15e-3, 25e-3)


def make_acq(num_elements=64, scheme="pw", angles=None, fs=31.25e6, num_cycles=2.5):
    geometry = ArrayGeometry(num_elements=num_elements, pitch=0.3e-3)
    pulse = PulseSpec(center_frequency=7.6e6, sampling_frequency=fs,
                      num_cycles=num_cycles)
    if scheme == "pw":
        sch = PwScheme(angles=tuple(default_pw_angles() if angles is None else angles))
    else:
        sch = StaScheme()
    return AcquisitionSpec(geometry=geometry, pulse=pulse, medium=MediumSpec(),
                           scheme=sch)


@pytest.fixture(scope="session")
def point_scene():
    return Scene(fov=FOV, diffuse_points=(DiffusePoint(x=0.0, z=20e-3),))


@pytest.fixture(scope="session")
def plate10_scene():
    return Scene(fov=FOV, reflectors=(
        Plate(x=0.0, z=20e-3, half_length=3e-3, tilt=math.radians(10.0)),))


@pytest.fixture(scope="session")
def speckle_scene():
    rng = np.random.default_rng(5)
    n = 350
    pts = tuple(
        DiffusePoint(float(x), float(z), float(a))
        for x, z, a in zip(
            rng.uniform(-7.5e-3, 7.5e-3, n),
            rng.uniform(15.5e-3, 24.5e-3, n),
            0.05 * rng.uniform(0.5, 1.5, n),
        )
    )
    # a known scatterer at the probe pixel so the pixel is "on" the speckle
    return Scene(fov=FOV, diffuse_points=pts + (DiffusePoint(1.0e-3, 20e-3, 0.08),))


@pytest.fixture(scope="session")
def point_sta_rf(point_scene):
    return synth_rf(point_scene, make_acq(scheme="sta"))


@pytest.fixture(scope="session")
def point_pw_rf(point_scene):
    return synth_rf(point_scene, make_acq(scheme="pw"))


@pytest.fixture(scope="session")
def plate10_pw_rf(plate10_scene):
    return synth_rf(plate10_scene, make_acq(scheme="pw"))


@pytest.fixture(scope="session")
def plate10_sta_rf(plate10_scene):
    return synth_rf(plate10_scene, make_acq(scheme="sta"))
