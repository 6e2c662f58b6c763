"""Regenerate the bundled ground-truth textures.

The textures are smooth seeded noise plus a linear ramp, so they are
band-concentrated (safe to upsample onto the HR grid) while strongly
aperiodic: opposite tile edges disagree, which is exactly the situation
where plain-DFT analysis leaks a cross of energy onto the frequency axes.

Run from the repository root:

    python scripts/make_textures.py
"""

from pathlib import Path

import numpy as np
from scipy import ndimage

from fpmkit.io import write_pfm

SIZE = 192
RAMP_WEIGHT = 0.15


def texture(seed: int, sigma: float, ramp_direction) -> np.ndarray:
    rng = np.random.default_rng(seed)
    noise = ndimage.gaussian_filter(rng.standard_normal((SIZE, SIZE)), sigma)
    noise = (noise - noise.min()) / (noise.max() - noise.min())
    rows, cols = np.mgrid[0:SIZE, 0:SIZE] / (SIZE - 1)
    dr, dc = ramp_direction
    ramp = dr * rows + dc * cols
    ramp = (ramp - ramp.min()) / (ramp.max() - ramp.min())
    blend = noise + RAMP_WEIGHT * ramp
    return (blend - blend.min()) / (blend.max() - blend.min())


def main() -> None:
    data_dir = Path(__file__).resolve().parents[1] / "src" / "fpmkit" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    write_pfm(data_dir / "texture_amplitude.pfm", texture(7, 6.0, (0.4, 1.0)))
    write_pfm(data_dir / "texture_phase.pfm", texture(19, 8.0, (1.0, -0.5)))
    print(f"wrote textures to {data_dir}")


if __name__ == "__main__":
    main()
