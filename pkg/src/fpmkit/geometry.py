"""System geometry, illumination wavevectors, and pupil construction.

Conventions used throughout the package:

* lengths in meters, wavevectors in rad/m;
* image axes are (row, col) and wavevector 2-vectors are ordered the same
  way, ``(k_row, k_col)``;
* the LED array is centered on the optical axis, so even-sized arrays are
  offset by half a pitch;
* spectral grids are unshifted (DC at index ``(0, 0)``) with step
  ``2*pi / (lr_size * object_pixel)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .validation import (
    check_positive_int,
    check_positive_scalar,
    check_real_image,
)

__all__ = [
    "SystemGeometry",
    "PupilSpec",
    "GaussianNoise",
    "PoissonNoise",
    "ErrorModelSpec",
    "check_sampling",
    "led_position",
    "wavevector_for_led",
    "wavevectors",
    "center_window",
    "pupil_mask",
    "upsampling_factor",
]

# Relative slack so a configuration sitting exactly on the Nyquist boundary
# is accepted despite decimal-to-binary rounding of the inputs.
_SAMPLING_RTOL = 1e-9


@dataclass(frozen=True)
class SystemGeometry:
    """Static description of the acquisition setup.

    Attributes
    ----------
    led_rows, led_cols : int
        LED array dimensions.
    led_pitch : float
        Spacing between neighbouring LEDs, meters.
    led_to_sample : float
        Axial distance from the LED plane to the sample, meters.
    wavelength : float
        Illumination wavelength, meters.
    objective_na : float
        Numerical aperture of the objective, in (0, 1).
    camera_pixel : float
        Physical sensor pixel size, meters.
    magnification : float
        Optical magnification between sample and sensor.
    lr_size : int
        Side of the square low-resolution tile, pixels.
    """

    led_rows: int
    led_cols: int
    led_pitch: float
    led_to_sample: float
    wavelength: float
    objective_na: float
    camera_pixel: float
    magnification: float
    lr_size: int

    def __post_init__(self):
        check_positive_int(self.led_rows, "led_rows")
        check_positive_int(self.led_cols, "led_cols")
        check_positive_scalar(self.led_pitch, "led_pitch")
        check_positive_scalar(self.led_to_sample, "led_to_sample")
        check_positive_scalar(self.wavelength, "wavelength")
        check_positive_scalar(self.objective_na, "objective_na")
        if not 0.0 < self.objective_na < 1.0:
            raise ValueError(f"objective_na must lie in (0, 1), got {self.objective_na}")
        check_positive_scalar(self.camera_pixel, "camera_pixel")
        check_positive_scalar(self.magnification, "magnification")
        check_positive_int(self.lr_size, "lr_size", minimum=2)

    @property
    def object_pixel(self) -> float:
        """Effective object-plane sampling step, meters."""
        return self.camera_pixel / self.magnification

    @property
    def spectral_step(self) -> float:
        """Frequency-grid step of the LR tile, rad/m."""
        return 2.0 * np.pi / (self.lr_size * self.object_pixel)

    @property
    def cutoff_wavevector(self) -> float:
        """Pupil (coherent) cutoff radius, rad/m."""
        return 2.0 * np.pi * self.objective_na / self.wavelength


@dataclass(frozen=True, eq=False)
class PupilSpec:
    """Pupil deviations from the ideal binary disk.

    Attributes
    ----------
    defocus : float
        Defocus distance in meters; adds the propagation phase
        ``z * sqrt((2*pi/wavelength)**2 - |k|**2)`` inside the support.
    aberration_phase : ndarray, optional
        Extra phase map in radians on the LR spectral grid (unshifted).
    """

    defocus: float = 0.0
    aberration_phase: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class GaussianNoise:
    """Additive Gaussian intensity noise with standard deviation ``sigma``."""

    sigma: float


@dataclass(frozen=True, eq=False)
class PoissonNoise:
    """Shot noise: intensities are scaled by ``photon_scale``, Poisson
    sampled, and scaled back."""

    photon_scale: float


@dataclass(frozen=True, eq=False)
class ErrorModelSpec:
    """Deviations from the ideal forward model.

    All fields default to the ideal setting; a default-constructed spec
    reproduces the ideal stack bit for bit.

    Attributes
    ----------
    weights : sequence of float, optional
        Per-LED positive intensity factors (brightness miscalibration).
    wavevector_offsets : array_like, optional
        Per-LED ``(d_k_row, d_k_col)`` offsets in rad/m (LED misplacement),
        added to the nominal wavevector before grid rounding.
    noise : GaussianNoise or PoissonNoise, optional
        Intensity noise model.
    pupil : PupilSpec, optional
        Pupil aberrations shared by all LEDs.
    """

    weights: Optional[Sequence[float]] = None
    wavevector_offsets: Optional[np.ndarray] = None
    noise: object = None
    pupil: Optional[PupilSpec] = None


def check_sampling(geom: SystemGeometry) -> None:
    """Reject geometries whose camera sampling aliases the raw images.

    The raw intensity pass-band extends to twice the coherent cutoff, so
    the object-plane pixel must satisfy
    ``camera_pixel / magnification <= wavelength / (4 * objective_na)``.
    A configuration exactly on the boundary is accepted.
    """
    limit = geom.wavelength / (4.0 * geom.objective_na)
    if geom.object_pixel > limit * (1.0 + _SAMPLING_RTOL):
        raise ValueError(
            "camera sampling violates the Nyquist precondition: object-plane "
            f"pixel {geom.object_pixel:.4e} m exceeds wavelength/(4*NA) = "
            f"{limit:.4e} m; reduce camera_pixel or increase magnification"
        )


def led_position(geom: SystemGeometry, row: int, col: int) -> Tuple[float, float]:
    """Lateral LED position ``(x, y)`` in meters, array centered on axis."""
    if not (0 <= row < geom.led_rows and 0 <= col < geom.led_cols):
        raise ValueError(
            f"LED index {(row, col)} outside array "
            f"{geom.led_rows}x{geom.led_cols}"
        )
    x = (col - (geom.led_cols - 1) / 2.0) * geom.led_pitch
    y = (row - (geom.led_rows - 1) / 2.0) * geom.led_pitch
    return x, y


def wavevector_for_led(geom: SystemGeometry, row: int, col: int) -> np.ndarray:
    """Transverse illumination wavevector of one LED.

    Returns
    -------
    ndarray
        ``(k_row, k_col)`` in rad/m:
        ``-(2*pi/wavelength) * (y, x) / sqrt(x**2 + y**2 + h**2)``.
    """
    x, y = led_position(geom, row, col)
    h = geom.led_to_sample
    r = math.sqrt(x * x + y * y + h * h)
    scale = -2.0 * np.pi / (geom.wavelength * r)
    return np.array([scale * y, scale * x])


def wavevectors(geom: SystemGeometry, leds: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Stack of per-LED wavevectors, shape ``(len(leds), 2)``."""
    return np.array([wavevector_for_led(geom, r, c) for r, c in leds])


def center_window(geom: SystemGeometry, rows: int, cols: int) -> list:
    """Row-major list of the ``rows x cols`` center window of the array."""
    rows = check_positive_int(rows, "rows")
    cols = check_positive_int(cols, "cols")
    if rows > geom.led_rows or cols > geom.led_cols:
        raise ValueError(
            f"lit window {rows}x{cols} exceeds LED array "
            f"{geom.led_rows}x{geom.led_cols}"
        )
    r0 = (geom.led_rows - rows) // 2
    c0 = (geom.led_cols - cols) // 2
    return [(r, c) for r in range(r0, r0 + rows) for c in range(c0, c0 + cols)]


def _wrapped_wavevector_grid(grid_size: int, spectral_step: float):
    """Signed frequency coordinates of an unshifted square grid, rad/m."""
    idx = np.fft.fftfreq(grid_size, d=1.0) * grid_size
    return idx * spectral_step


def pupil_mask(
    geom: SystemGeometry,
    grid_size: int,
    spectral_step: float,
    pupil: Optional[PupilSpec] = None,
) -> np.ndarray:
    """Complex pupil on an unshifted square spectral grid.

    Unit modulus where ``|k| <= cutoff_wavevector`` (boundary included),
    zero outside.  Defocus and aberration phases from ``pupil`` are applied
    inside the support only.

    Parameters
    ----------
    geom : SystemGeometry
        Provides wavelength and numerical aperture.
    grid_size : int
        Side of the square grid in pixels.
    spectral_step : float
        Frequency step of the grid, rad/m.
    pupil : PupilSpec, optional
        Aberrations; ``None`` means the ideal binary disk.

    Returns
    -------
    ndarray
        ``complex128`` array of shape ``(grid_size, grid_size)``.
    """
    grid_size = check_positive_int(grid_size, "grid_size", minimum=2)
    check_positive_scalar(spectral_step, "spectral_step")
    k_axis = _wrapped_wavevector_grid(grid_size, spectral_step)
    k_sq = k_axis[:, None] ** 2 + k_axis[None, :] ** 2
    support = k_sq <= geom.cutoff_wavevector**2
    if pupil is None or (pupil.defocus == 0.0 and pupil.aberration_phase is None):
        return support.astype(np.complex128)
    phase = np.zeros((grid_size, grid_size))
    if pupil.defocus != 0.0:
        k_total = 2.0 * np.pi / geom.wavelength
        # NA < 1 keeps k_sq < k_total**2 inside the support
        phase += pupil.defocus * np.sqrt(np.maximum(k_total**2 - k_sq, 0.0))
    if pupil.aberration_phase is not None:
        ab = check_real_image(pupil.aberration_phase, "aberration_phase")
        if ab.shape != (grid_size, grid_size):
            raise ValueError(
                f"aberration_phase shape {ab.shape} does not match spectral "
                f"grid {(grid_size, grid_size)}"
            )
        phase += ab
    return np.where(support, np.exp(1j * phase), 0.0 + 0.0j)


def upsampling_factor(
    geom: SystemGeometry, leds: Optional[Sequence[Tuple[int, int]]] = None
) -> int:
    """Smallest integer upsampling that holds the full synthetic aperture.

    The high-resolution grid keeps the LR spectral step with
    ``s * lr_size`` samples per axis; ``s`` is the smallest integer >= 2
    such that the grid's maximum representable frequency reaches the
    synthetic-aperture radius
    ``(2*pi/wavelength) * (objective_na + sin(theta_max))`` of the lit
    LEDs.

    Parameters
    ----------
    geom : SystemGeometry
        Acquisition geometry.
    leds : sequence of (row, col), optional
        Lit LEDs; defaults to the full array.

    Returns
    -------
    int
        Upsampling factor ``s >= 2``.
    """
    if leds is None:
        leds = center_window(geom, geom.led_rows, geom.led_cols)
    if len(leds) == 0:
        raise ValueError("at least one lit LED is required")
    k_illum = np.linalg.norm(wavevectors(geom, leds), axis=1).max()
    k_syn = k_illum + geom.cutoff_wavevector
    minimum = 2.0 * k_syn / (geom.spectral_step * geom.lr_size)
    return max(2, math.ceil(minimum))
