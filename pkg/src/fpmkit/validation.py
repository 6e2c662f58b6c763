"""Input validation helpers.

Images are plain ndarrays throughout the package.  These checks centralise
the shared contract: two-dimensional, at least 2x2, finite everywhere.
Validation happens at public entry points; hot inner loops operate on arrays
that were checked once on the way in.
"""

from __future__ import annotations

import numbers

import numpy as np


def check_image(image, name: str = "image") -> np.ndarray:
    """Validate a real or complex image and return it as a float array.

    Parameters
    ----------
    image : array_like
        Candidate image.
    name : str
        Label used in error messages.

    Returns
    -------
    ndarray
        ``float64`` or ``complex128`` view/copy of the input.
    """
    a = np.asarray(image)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 2 or a.shape[1] < 2:
        raise ValueError(f"{name} must be at least 2x2, got shape {a.shape}")
    if np.iscomplexobj(a):
        a = a.astype(np.complex128, copy=False)
    else:
        a = a.astype(np.float64, copy=False)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def check_real_image(image, name: str = "image") -> np.ndarray:
    """Like :func:`check_image` but rejects complex input."""
    if np.iscomplexobj(np.asarray(image)):
        raise ValueError(f"{name} must be real-valued")
    return check_image(image, name)


def check_complex_image(image, name: str = "image") -> np.ndarray:
    """Validate an image and return it as ``complex128`` regardless of dtype."""
    return check_image(image, name).astype(np.complex128, copy=False)


def check_positive_scalar(value, name: str) -> float:
    """Validate a strictly positive finite real scalar."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    v = float(value)
    if not np.isfinite(v) or v <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {v}")
    return v


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    """Validate an integer >= ``minimum``."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    v = int(value)
    if v < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {v}")
    return v


def check_choice(value, choices, name: str):
    """Validate membership in a fixed set of options."""
    if value not in choices:
        raise ValueError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value
