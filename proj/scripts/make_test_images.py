#!/usr/bin/env python3
"""Regenerates the PGM test images under data/.

astronaut512.pgm 512x512 natural grayscale portrait (scikit-image "astronaut",
                public domain), converted with skimage.color.rgb2gray.
field135x90.pgm 135x90 smooth random field with a steep power-law spectrum,
                standing in for a single band of a pushbroom sounder.
"""
import pathlib

import numpy as np
from skimage import color, data

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def write_pgm(path, img):
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def smooth_field(rows, cols, beta, seed):
    rng = np.random.default_rng(seed)
    # Pad so the periodic FFT synthesis does not wrap top onto bottom.
    pr, pc = 2 * rows, 2 * cols
    fy = np.fft.fftfreq(pr)[:, None]
    fx = np.fft.fftfreq(pc)[None, :]
    f = np.sqrt(fx * fx + fy * fy)
    f[0, 0] = 1.0
    amp = f ** (-beta / 2.0)
    amp[0, 0] = 0.0
    noise = rng.standard_normal((pr, pc)) + 1j * rng.standard_normal((pr, pc))
    field = np.real(np.fft.ifft2(noise * amp))[:rows, :cols]
    field -= field.min()
    field /= field.max()
    return 0.1 + 0.8 * field


def main():
    OUT.mkdir(exist_ok=True)
    gray = color.rgb2gray(data.astronaut())
    write_pgm(OUT / "astronaut512.pgm", np.round(gray * 255.0))
    field = smooth_field(135, 90, beta=3.5, seed=20120901)
    write_pgm(OUT / "field135x90.pgm", np.round(field * 255.0))


if __name__ == "__main__":
    main()
