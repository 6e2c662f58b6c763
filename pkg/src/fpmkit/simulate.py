"""Forward simulation: ground-truth scenes and low-resolution stacks.

The forward model low-passes a shifted copy of the object spectrum through
the pupil and records the intensity of the resulting field:

    I_i = w_i * |IDFT[ O_hat(k - k_i - dk_i) * P(k) * e^(j*phi) ]|^2 + noise

Intensities are normalized so the on-axis image of a flat unit object has
mean 1.  With all error-model fields at their defaults the stack is the
ideal one bit for bit.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from .errors import NumericalError
from .geometry import (
    ErrorModelSpec,
    GaussianNoise,
    PoissonNoise,
    SystemGeometry,
    center_window,
    check_sampling,
    pupil_mask,
    upsampling_factor,
    wavevectors,
)
from .transforms import _fft2u, _ifft2u
from .validation import check_choice, check_positive_int, check_real_image

__all__ = [
    "GroundTruth",
    "LrStack",
    "make_ground_truth",
    "simulate_stack",
    "quantize_stack",
    "thread_count",
]

_INTERP_ORDER = 3  # cubic resampling for truth sources


def thread_count() -> int:
    """Worker cap from the FPM_THREADS environment variable (default 1)."""
    raw = os.environ.get("FPM_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"FPM_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """High-resolution complex object, stored as amplitude and phase."""

    amplitude: np.ndarray
    phase: np.ndarray

    @property
    def field(self) -> np.ndarray:
        """Complex object ``amplitude * exp(j * phase)``."""
        return self.amplitude * np.exp(1j * self.phase)


@dataclass(frozen=True, eq=False)
class LrStack:
    """Ordered low-resolution intensity stack with its acquisition context.

    Attributes
    ----------
    images : ndarray
        ``(n_leds, lr_size, lr_size)`` nonnegative intensities.
    leds : tuple of (row, col)
        LED indices, aligned with the first axis of ``images``.
    geometry : SystemGeometry
        Snapshot of the acquisition geometry.
    """

    images: np.ndarray
    leds: Tuple[Tuple[int, int], ...]
    geometry: SystemGeometry

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        if images.ndim != 3:
            raise ValueError(f"images must be a 3-D stack, got shape {images.shape}")
        n = self.geometry.lr_size
        if images.shape[1:] != (n, n):
            raise ValueError(
                f"stack images have shape {images.shape[1:]}, geometry "
                f"expects {(n, n)}"
            )
        if images.shape[0] != len(self.leds):
            raise ValueError(
                f"{images.shape[0]} images for {len(self.leds)} LED indices"
            )
        if images.shape[0] == 0:
            raise ValueError("stack must contain at least one image")
        if not np.all(np.isfinite(images)) or images.min() < 0.0:
            raise ValueError("stack intensities must be finite and nonnegative")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "leds", tuple((int(r), int(c)) for r, c in self.leds))

    def __len__(self) -> int:
        return self.images.shape[0]


def _load_source(source, hr_size: int) -> np.ndarray:
    """Load an ndarray or image file and resample it to the HR grid."""
    if isinstance(source, (str, Path)):
        from .io import read_image

        a = read_image(source)
    else:
        a = check_real_image(source, "truth source")
    a = check_real_image(a, "truth source")
    if a.shape != (hr_size, hr_size):
        a = ndimage.zoom(
            a,
            (hr_size / a.shape[0], hr_size / a.shape[1]),
            order=_INTERP_ORDER,
            mode="reflect",
            grid_mode=True,
        )
    return a


def _rescale(a: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Affinely map an array onto [lo, hi]; constant input maps to hi."""
    span = a.max() - a.min()
    if span == 0.0:
        return np.full_like(a, hi)
    return lo + (a - a.min()) * ((hi - lo) / span)


def make_ground_truth(
    kind: str,
    hr_size: int,
    amplitude_source=None,
    phase_source=None,
    *,
    amplitude_range: Tuple[float, float] = (0.1, 1.0),
    phase_range: Tuple[float, float] = (0.0, np.pi / 2),
) -> GroundTruth:
    """Build a high-resolution ground-truth object.

    Parameters
    ----------
    kind : {"two_image", "flat", "phase_only"}
        ``two_image`` maps one source to amplitude and another to phase,
        ``flat`` is the unit object, ``phase_only`` keeps amplitude 1 and
        takes phase from a source.
    hr_size : int
        Side of the square HR grid, pixels.
    amplitude_source, phase_source : ndarray or path, optional
        Real images (any size; resampled cubically to the HR grid).
    amplitude_range : (float, float)
        Target amplitude range, ``0 < lo <= hi``.
    phase_range : (float, float)
        Target phase range in radians.

    Returns
    -------
    GroundTruth
    """
    check_choice(kind, {"two_image", "flat", "phase_only"}, "kind")
    hr_size = check_positive_int(hr_size, "hr_size", minimum=2)
    amp_lo, amp_hi = float(amplitude_range[0]), float(amplitude_range[1])
    if not 0.0 < amp_lo <= amp_hi:
        raise ValueError(f"amplitude_range must satisfy 0 < lo <= hi, got {amplitude_range}")
    ph_lo, ph_hi = float(phase_range[0]), float(phase_range[1])
    if ph_hi < ph_lo:
        raise ValueError(f"phase_range must satisfy lo <= hi, got {phase_range}")

    if kind == "flat":
        return GroundTruth(
            amplitude=np.ones((hr_size, hr_size)),
            phase=np.zeros((hr_size, hr_size)),
        )
    if kind == "phase_only":
        if phase_source is None:
            raise ValueError("phase_only truth requires a phase source")
        phase = _rescale(_load_source(phase_source, hr_size), ph_lo, ph_hi)
        return GroundTruth(amplitude=np.ones((hr_size, hr_size)), phase=phase)
    if amplitude_source is None or phase_source is None:
        raise ValueError("two_image truth requires amplitude and phase sources")
    amplitude = _rescale(_load_source(amplitude_source, hr_size), amp_lo, amp_hi)
    phase = _rescale(_load_source(phase_source, hr_size), ph_lo, ph_hi)
    return GroundTruth(amplitude=amplitude, phase=phase)


def grid_shifts(
    geom: SystemGeometry,
    leds: Sequence[Tuple[int, int]],
    wavevector_offsets: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Integer spectral-grid shifts of each LED, rounded to nearest bin."""
    k = wavevectors(geom, leds)
    if wavevector_offsets is not None:
        offsets = np.asarray(wavevector_offsets, dtype=np.float64)
        if offsets.shape != k.shape:
            raise ValueError(
                f"wavevector_offsets shape {offsets.shape} does not match "
                f"{k.shape} for {len(leds)} LEDs"
            )
        k = k + offsets
    return np.rint(k / geom.spectral_step).astype(int)


def _check_shift_fits(shifts: np.ndarray, hr_size: int, lr_size: int) -> None:
    """Every LR sub-spectrum must sit fully inside the HR grid."""
    margin = (hr_size - lr_size) // 2
    worst = int(np.abs(shifts).max()) if shifts.size else 0
    if worst > margin:
        raise ValueError(
            f"sub-spectrum shift {worst} bins exceeds the HR grid margin "
            f"{margin} (hr {hr_size}, lr {lr_size}); increase upsampling or "
            "reduce illumination angles"
        )


def _wrapped_window(lr_size: int, hr_size: int, shift: np.ndarray):
    """Index arrays selecting one LR sub-spectrum from the unshifted HR grid."""
    base = (np.fft.fftfreq(lr_size, d=1.0) * lr_size).astype(int)
    rows = (base + int(shift[0])) % hr_size
    cols = (base + int(shift[1])) % hr_size
    return np.ix_(rows, cols)


def _resolve_weights(error_model, n_leds: int) -> Optional[np.ndarray]:
    if error_model is None or error_model.weights is None:
        return None
    w = np.asarray(error_model.weights, dtype=np.float64)
    if w.ndim == 0:
        w = np.full(n_leds, float(w))
    if w.shape != (n_leds,):
        raise ValueError(f"weights shape {w.shape} does not match {n_leds} LEDs")
    if not np.all(np.isfinite(w)) or w.min() <= 0.0:
        raise ValueError("weights must be finite and positive")
    return w


def simulate_stack(
    truth: GroundTruth,
    geom: SystemGeometry,
    leds: Optional[Sequence[Tuple[int, int]]] = None,
    error_model: Optional[ErrorModelSpec] = None,
    *,
    upsampling: Optional[int] = None,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> LrStack:
    """Simulate the low-resolution intensity stack of a ground-truth object.

    Parameters
    ----------
    truth : GroundTruth
        Object on the HR grid implied by the geometry and upsampling
        factor (``upsampling * lr_size`` per side).
    geom : SystemGeometry
        Acquisition geometry; must satisfy the sampling precondition.
    leds : sequence of (row, col), optional
        Lit LEDs in acquisition order; defaults to the full array.
    error_model : ErrorModelSpec, optional
        Deviations from the ideal model; defaults reproduce the ideal
        stack exactly.
    upsampling : int, optional
        Override of the automatic upsampling factor (>= 2).
    seed : int
        Seed for the noise generator when ``rng`` is not given.
    rng : numpy.random.Generator, optional
        Noise generator; per-LED child streams are spawned from it so
        results do not depend on the worker count.

    Returns
    -------
    LrStack
    """
    check_sampling(geom)
    if leds is None:
        leds = center_window(geom, geom.led_rows, geom.led_cols)
    leds = [(int(r), int(c)) for r, c in leds]
    if len(leds) == 0:
        raise ValueError("at least one lit LED is required")
    if upsampling is None:
        s = upsampling_factor(geom, leds)
    else:
        s = check_positive_int(upsampling, "upsampling", minimum=2)
    n = geom.lr_size
    hr = s * n
    amplitude = check_real_image(truth.amplitude, "truth amplitude")
    phase = check_real_image(truth.phase, "truth phase")
    if amplitude.shape != (hr, hr) or phase.shape != (hr, hr):
        raise ValueError(
            f"truth grid {amplitude.shape} does not match the HR grid "
            f"{(hr, hr)} implied by lr_size {n} and upsampling {s}"
        )

    offsets = error_model.wavevector_offsets if error_model else None
    shifts = grid_shifts(geom, leds, offsets)
    _check_shift_fits(shifts, hr, n)
    weights = _resolve_weights(error_model, len(leds))
    pupil = pupil_mask(
        geom, n, geom.spectral_step, error_model.pupil if error_model else None
    )
    noise = error_model.noise if error_model else None

    spectrum = _fft2u(amplitude * np.exp(1j * phase))
    # unitary DFTs give a flat unit object LR intensity s**2; rescale so
    # the ideal on-axis flat image has mean 1
    intensity_scale = 1.0 / (s * s)

    if rng is None:
        rng = np.random.default_rng(seed)
    child_rngs = rng.spawn(len(leds))

    images = np.empty((len(leds), n, n))

    def render_one(i: int) -> None:
        window = _wrapped_window(n, hr, shifts[i])
        field = _ifft2u(spectrum[window] * pupil)
        intensity = (field.real**2 + field.imag**2) * intensity_scale
        if weights is not None:
            intensity *= weights[i]
        if isinstance(noise, GaussianNoise):
            intensity = intensity + child_rngs[i].normal(0.0, noise.sigma, intensity.shape)
            np.maximum(intensity, 0.0, out=intensity)
        elif isinstance(noise, PoissonNoise):
            scale = noise.photon_scale
            intensity = child_rngs[i].poisson(intensity * scale) / scale
        elif noise is not None:
            raise ValueError(f"unknown noise model {noise!r}")
        if not np.all(np.isfinite(intensity)):
            raise NumericalError(f"non-finite intensity for LED {leds[i]}")
        images[i] = intensity

    workers = thread_count()
    if workers > 1 and len(leds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(render_one, range(len(leds))))
    else:
        for i in range(len(leds)):
            render_one(i)

    return LrStack(images=images, leds=tuple(leds), geometry=geom)


def quantize_stack(stack: LrStack, bits: int = 8) -> LrStack:
    """Quantize a stack to the given bit depth against its global maximum.

    Models an integer camera: intensities are rounded to
    ``2**bits - 1`` uniform levels spanning ``[0, max(stack)]``.

    Parameters
    ----------
    stack : LrStack
        Input stack.
    bits : int
        Bit depth, >= 1.

    Returns
    -------
    LrStack
        New stack with quantized intensities.
    """
    bits = check_positive_int(bits, "bits")
    peak = stack.images.max()
    if peak == 0.0:
        return stack
    levels = float(2**bits - 1)
    quantized = np.rint(stack.images * (levels / peak)) * (peak / levels)
    return LrStack(images=quantized, leds=stack.leds, geometry=stack.geometry)
