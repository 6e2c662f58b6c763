"""Quantitative comparison of reconstructions against references.

Phase comparisons are circular: a global phase offset carries no
information, so callers align with :func:`phase_align` before measuring
errors.  Spectral artifact energy is measured on unshifted spectra (DC at
index (0, 0)), where the frequency axes are exactly row 0 and column 0.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from .validation import check_image, check_real_image

__all__ = [
    "rmse",
    "phase_align",
    "background_phase_std",
    "axis_artifact_energy",
    "block_consistency",
    "MetricReport",
]


def _wrap_angle(x: np.ndarray) -> np.ndarray:
    """Wrap angles to (-pi, pi]."""
    return np.angle(np.exp(1j * x))


def rmse(reference, test) -> float:
    """Root-mean-square error as a fraction of the reference dynamic range.

    Computes ``sqrt(mean(|reference - test|**2))`` divided by
    ``max(reference) - min(reference)``.  A constant reference has no
    dynamic range; the normalizer then falls back to ``max(|reference|)``,
    and to 1 for an all-zero reference, so the error stays finite and a
    unit constant against zero reads as 1.0 (100 %).

    Parameters
    ----------
    reference : array_like
        Ground-truth image; sets the normalization.
    test : array_like
        Image under evaluation, same shape.

    Returns
    -------
    float
    """
    f = check_image(reference, "reference")
    g = check_image(test, "test")
    if f.shape != g.shape:
        raise ValueError(f"shape mismatch: reference {f.shape} vs test {g.shape}")
    err = np.sqrt(np.mean(np.abs(f - g) ** 2))
    if np.iscomplexobj(f):
        span = np.abs(f).max() - np.abs(f).min()
        fallback = np.abs(f).max()
    else:
        span = f.max() - f.min()
        fallback = np.abs(f).max()
    denom = span if span > 0.0 else (fallback if fallback > 0.0 else 1.0)
    return float(err / denom)


def phase_align(phase, reference) -> np.ndarray:
    """Remove the global phase offset between two phase maps.

    The offset is the circular mean of the pointwise difference,
    ``arg(sum(exp(j*(phase - reference))))``, and the result is
    ``phase - offset`` wrapped to (-pi, pi].

    Parameters
    ----------
    phase : array_like
        Phase map to align, radians.
    reference : array_like
        Phase map defining the target offset, same shape.

    Returns
    -------
    ndarray
        Aligned phase in (-pi, pi].
    """
    p = check_real_image(phase, "phase")
    r = check_real_image(reference, "reference")
    if p.shape != r.shape:
        raise ValueError(f"shape mismatch: phase {p.shape} vs reference {r.shape}")
    offset = np.angle(np.sum(np.exp(1j * (p - r))))
    return _wrap_angle(p - offset)


def background_phase_std(phase, region: Tuple[int, int, int, int]) -> float:
    """Standard deviation of phase inside a sample-free rectangle.

    Parameters
    ----------
    phase : array_like
        Recovered phase map, radians.
    region : (row, col, height, width)
        Rectangle of background pixels; a 1-pixel-wide rectangle measures
        a line segment.

    Returns
    -------
    float
        Standard deviation after mean subtraction, radians.
    """
    p = check_real_image(phase, "phase")
    r0, c0, h, w = (int(v) for v in region)
    if h < 1 or w < 1:
        raise ValueError(f"region height and width must be >= 1, got {region}")
    if r0 < 0 or c0 < 0 or r0 + h > p.shape[0] or c0 + w > p.shape[1]:
        raise ValueError(f"region {region} outside phase map of shape {p.shape}")
    return float(np.std(p[r0 : r0 + h, c0 : c0 + w]))


def axis_artifact_energy(spectrum, exclude_dc_radius: int = 3) -> float:
    """Fraction of spectral energy on the frequency axes.

    Edge-effect artifacts concentrate on the ``k_row = 0`` and
    ``k_col = 0`` lines of the spectrum.  This returns the energy on those
    two lines divided by the total energy, with a disk of the given radius
    around DC excluded from both, so the object's own DC lobe does not
    dominate the ratio.

    Parameters
    ----------
    spectrum : array_like
        Complex (or real) spectrum, unshifted (DC at index (0, 0)).
    exclude_dc_radius : int
        Radius of the excluded DC disk in bins, >= 0.

    Returns
    -------
    float
        Axis-energy fraction in [0, 1]; 0 for an empty denominator.
    """
    s = check_image(spectrum, "spectrum")
    if exclude_dc_radius < 0:
        raise ValueError(f"exclude_dc_radius must be >= 0, got {exclude_dc_radius}")
    m, n = s.shape
    rows = np.arange(m)
    cols = np.arange(n)
    wrapped_r = np.minimum(rows, m - rows)[:, None]
    wrapped_c = np.minimum(cols, n - cols)[None, :]
    keep = wrapped_r**2 + wrapped_c**2 > exclude_dc_radius**2
    energy = np.abs(s) ** 2
    total = float(energy[keep].sum())
    if total == 0.0:
        return 0.0
    on_axis = np.zeros((m, n), dtype=bool)
    on_axis[0, :] = True
    on_axis[:, 0] = True
    return float(energy[keep & on_axis].sum() / total)


def block_consistency(
    full_phase,
    sub_phase,
    sub_origin: Tuple[int, int] = (0, 0),
    guard_fraction: float = 0.05,
) -> float:
    """Disagreement between a full-tile and a sub-tile reconstruction.

    The sub-tile phase is compared against the matching window of the
    full-tile phase after circular alignment.  A guard band of
    ``ceil(guard_fraction * side)`` pixels at the sub-tile edges is
    excluded, since both reconstructions are least trustworthy there.

    Parameters
    ----------
    full_phase : array_like
        Phase of the full-tile reconstruction.
    sub_phase : array_like
        Phase of the sub-tile reconstruction, same pixel pitch.
    sub_origin : (int, int)
        Position of the sub-tile's top-left pixel inside the full tile.
    guard_fraction : float
        Edge fraction to exclude per axis.

    Returns
    -------
    float
        Root-mean-square circular deviation over the interior, radians.
    """
    full = check_real_image(full_phase, "full_phase")
    sub = check_real_image(sub_phase, "sub_phase")
    r0, c0 = (int(v) for v in sub_origin)
    h, w = sub.shape
    if r0 < 0 or c0 < 0 or r0 + h > full.shape[0] or c0 + w > full.shape[1]:
        raise ValueError(
            f"sub-tile of shape {sub.shape} at origin {sub_origin} falls "
            f"outside full tile of shape {full.shape}"
        )
    window = full[r0 : r0 + h, c0 : c0 + w]
    guard_r = int(np.ceil(guard_fraction * h))
    guard_c = int(np.ceil(guard_fraction * w))
    if 2 * guard_r >= h or 2 * guard_c >= w:
        raise ValueError(f"guard band removes the whole {h}x{w} sub-tile")
    inner = (slice(guard_r, h - guard_r), slice(guard_c, w - guard_c))
    diff = sub[inner] - window[inner]
    offset = np.angle(np.sum(np.exp(1j * diff)))
    return float(np.sqrt(np.mean(_wrap_angle(diff - offset) ** 2)))


@dataclass
class MetricReport:
    """Flat bundle of evaluation results; unset fields stay ``None``.

    Serializes to a flat JSON object containing only the populated
    fields, so partial evaluations (for example background statistics
    without a ground truth) produce valid reports.
    """

    rmse_intensity: Optional[float] = None
    rmse_phase: Optional[float] = None
    background_phase_std: Optional[float] = None
    axis_artifact_energy: Optional[float] = None
    block_consistency: Optional[float] = None
    wall_time_seconds: Optional[float] = None

    def as_dict(self) -> dict:
        """Populated fields only, ready for JSON."""
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"
