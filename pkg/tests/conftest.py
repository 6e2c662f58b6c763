"""Shared fixtures: reference geometries, bundled textures, small scenes.

The acceptance module registers one summary line per criterion here; the
terminal-summary hook prints them all at the end of the run so the
pass/fail record is visible regardless of output capturing.
"""

import numpy as np
import pytest
from importlib import resources

import fpmkit as fk
from fpmkit.io import read_image

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    """The shared list behind the end-of-run acceptance summary."""
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def reference_geometry():
    """The bundled simulation geometry: 11x11 LEDs, 128 px tile."""
    return fk.SystemGeometry(
        led_rows=11,
        led_cols=11,
        led_pitch=0.004,
        led_to_sample=0.076,
        wavelength=6.3e-7,
        objective_na=0.1,
        camera_pixel=6.3e-6,
        magnification=4.0,
        lr_size=128,
    )


@pytest.fixture(scope="session")
def small_geometry():
    """Fast variant for loop-level tests: 5x5 LEDs, 32 px tile."""
    return fk.SystemGeometry(
        led_rows=5,
        led_cols=5,
        led_pitch=0.004,
        led_to_sample=0.076,
        wavelength=6.3e-7,
        objective_na=0.1,
        camera_pixel=6.3e-6,
        magnification=4.0,
        lr_size=32,
    )


@pytest.fixture(scope="session")
def bundled_textures():
    data = resources.files("fpmkit") / "data"
    with resources.as_file(data / "texture_amplitude.pfm") as path:
        amplitude = read_image(path)
    with resources.as_file(data / "texture_phase.pfm") as path:
        phase = read_image(path)
    return amplitude, phase


@pytest.fixture(scope="session")
def small_scene(small_geometry, bundled_textures):
    """Textured truth and noise-free stack on the small geometry."""
    leds = fk.center_window(small_geometry, 5, 5)
    s = fk.upsampling_factor(small_geometry, leds)
    truth = fk.make_ground_truth(
        "two_image",
        s * small_geometry.lr_size,
        bundled_textures[0],
        bundled_textures[1],
        amplitude_range=(0.2, 1.0),
        phase_range=(0.0, np.pi / 2),
    )
    stack = fk.simulate_stack(truth, small_geometry, leds)
    return truth, stack, s
