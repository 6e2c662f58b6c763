"""File formats: PFM float images, binary PGM input, stack manifests.

PFM layout, as written here: the ASCII header ``Pf``, a dimensions line
``width height``, and a scale line whose sign encodes endianness (negative
means little-endian), followed by raw 32-bit float rows ordered bottom to
top.  Grayscale only; color ``PF`` files are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError
from .geometry import SystemGeometry
from .simulate import LrStack
from .validation import check_real_image

__all__ = [
    "read_pfm",
    "write_pfm",
    "read_pgm",
    "read_image",
    "save_stack",
    "load_stack",
    "MANIFEST_NAME",
]

MANIFEST_NAME = "manifest.json"
_MANIFEST_SCHEMA = 1

_GEOMETRY_FIELDS = (
    "led_rows",
    "led_cols",
    "led_pitch",
    "led_to_sample",
    "wavelength",
    "objective_na",
    "camera_pixel",
    "magnification",
    "lr_size",
)


def _read_header_line(handle, path) -> str:
    line = handle.readline()
    if not line:
        raise DataError(f"{path}: truncated header")
    return line.decode("ascii", errors="replace").strip()


def read_pfm(path) -> np.ndarray:
    """Read a grayscale PFM image as float64.

    Parameters
    ----------
    path : path-like
        File to read.

    Returns
    -------
    ndarray
        ``(height, width)`` array, top row first.
    """
    path = Path(path)
    with open(path, "rb") as handle:
        magic = _read_header_line(handle, path)
        if magic == "PF":
            raise DataError(f"{path}: color PFM is not supported")
        if magic != "Pf":
            raise DataError(f"{path}: not a PFM file (magic {magic!r})")
        dims = _read_header_line(handle, path).split()
        if len(dims) != 2:
            raise DataError(f"{path}: malformed dimensions line")
        try:
            width, height = int(dims[0]), int(dims[1])
            scale = float(_read_header_line(handle, path))
        except ValueError as exc:
            raise DataError(f"{path}: malformed header: {exc}") from exc
        if width < 1 or height < 1 or scale == 0.0:
            raise DataError(f"{path}: invalid header values")
        dtype = "<f4" if scale < 0.0 else ">f4"
        payload = handle.read(4 * width * height)
        if len(payload) != 4 * width * height:
            raise DataError(f"{path}: truncated pixel data")
    rows = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    # PFM stores rows bottom to top
    return np.flipud(rows).astype(np.float64)


def write_pfm(path, image) -> None:
    """Write a real image as little-endian grayscale PFM (float32)."""
    a = check_real_image(image, "image")
    path = Path(path)
    height, width = a.shape
    with open(path, "wb") as handle:
        handle.write(b"Pf\n")
        handle.write(f"{width} {height}\n".encode("ascii"))
        handle.write(b"-1.0\n")
        handle.write(np.flipud(a).astype("<f4").tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary 8-bit PGM (P5) image, scaled to [0, 1].

    Parameters
    ----------
    path : path-like
        File to read.

    Returns
    -------
    ndarray
        ``(height, width)`` float64 array.
    """
    path = Path(path)
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise DataError(f"{path}: not a binary PGM file")
    # header = magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments running to end of line
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        ch = data[pos : pos + 1]
        if ch == b"#":
            pos = data.find(b"\n", pos)
            if pos == -1:
                raise DataError(f"{path}: truncated header")
            pos += 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if len(tokens) < 3 or pos >= len(data):
        raise DataError(f"{path}: truncated header")
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise DataError(f"{path}: malformed header: {exc}") from exc
    if width < 1 or height < 1:
        raise DataError(f"{path}: invalid dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise DataError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    payload = data[pos : pos + width * height]
    if len(payload) != width * height:
        raise DataError(f"{path}: truncated pixel data")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return pixels.astype(np.float64) / float(maxval)


def read_image(path) -> np.ndarray:
    """Read a PFM or 8-bit PGM image by magic number."""
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            magic = handle.read(2)
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if magic == b"Pf":
        return read_pfm(path)
    if magic == b"P5":
        return read_pgm(path)
    raise DataError(f"{path}: unsupported image format (magic {magic!r})")


def save_stack(
    stack: LrStack,
    out_dir,
    *,
    seed: Optional[int] = None,
    upsampling: Optional[int] = None,
    extra: Optional[dict] = None,
) -> Path:
    """Write a stack as PFM images plus a manifest.

    Parameters
    ----------
    stack : LrStack
        Stack to persist.
    out_dir : path-like
        Target directory (created if missing).
    seed, upsampling : optional
        Provenance recorded in the manifest.
    extra : dict, optional
        Additional manifest entries (for example the error model).

    Returns
    -------
    Path
        Path of the written manifest.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, image in enumerate(stack.images):
        name = f"img_{i:04d}.pfm"
        write_pfm(out / name, image)
        files.append(name)
    manifest = {
        "schema_version": _MANIFEST_SCHEMA,
        "kind": "fpm-stack",
        "pixel_format": "pfm-float32",
        "geometry": {k: getattr(stack.geometry, k) for k in _GEOMETRY_FIELDS},
        "leds": [list(led) for led in stack.leds],
        "files": files,
    }
    if seed is not None:
        manifest["seed"] = seed
    if upsampling is not None:
        manifest["upsampling"] = upsampling
    if extra:
        manifest.update(extra)
    manifest_path = out / MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def load_stack(stack_dir) -> LrStack:
    """Load a stack written by :func:`save_stack`.

    Parameters
    ----------
    stack_dir : path-like
        Directory containing ``manifest.json`` and the image files.

    Returns
    -------
    LrStack
    """
    stack_dir = Path(stack_dir)
    manifest_path = stack_dir / MANIFEST_NAME
    if not manifest_path.is_file():
        raise DataError(f"{stack_dir}: no {MANIFEST_NAME} found")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: invalid JSON: {exc}") from exc
    for key in ("geometry", "leds", "files"):
        if key not in manifest:
            raise DataError(f"{manifest_path}: missing key {key!r}")
    geometry_raw = manifest["geometry"]
    missing = [k for k in _GEOMETRY_FIELDS if k not in geometry_raw]
    if missing:
        raise DataError(f"{manifest_path}: geometry missing fields {missing}")
    try:
        geom = SystemGeometry(**{k: geometry_raw[k] for k in _GEOMETRY_FIELDS})
    except ValueError as exc:
        raise DataError(f"{manifest_path}: invalid geometry: {exc}") from exc
    leds = [tuple(led) for led in manifest["leds"]]
    files = manifest["files"]
    if len(leds) != len(files):
        raise DataError(
            f"{manifest_path}: {len(leds)} LEDs but {len(files)} image files"
        )
    images = []
    n = geom.lr_size
    for name in files:
        img = read_pfm(stack_dir / name)
        if img.shape != (n, n):
            raise DataError(
                f"{stack_dir / name}: shape {img.shape} does not match "
                f"manifest lr_size {n}"
            )
        images.append(img)
    try:
        return LrStack(images=np.stack(images), leds=tuple(leds), geometry=geom)
    except ValueError as exc:
        raise DataError(f"{stack_dir}: inconsistent stack: {exc}") from exc
