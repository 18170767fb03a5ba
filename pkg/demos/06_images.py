# Image recipes: inpainting by matrix completion, background subtraction by PCP.

import tempfile
from pathlib import Path

import numpy as np

from lowrank.images import background_subtract, inpaint, psnr, read_pgm, write_pgm

out = Path(tempfile.mkdtemp())
rng = np.random.default_rng(0)

# a 64x64 "image" of exact rank 5, with half of the pixels dropped
M = rng.standard_normal((64, 5)) @ rng.standard_normal((5, 64))
img = np.rint(255 * (M - M.min()) / (M.max() - M.min())).astype(np.uint8)
mask = np.where(rng.random(img.shape) < 0.5, 255, 0).astype(np.uint8)
restored = inpaint(img, mask)
print(f"PSNR zero-filled {psnr(np.where(mask == 255, img, 0), img):.1f} dB,"
      f" restored {psnr(restored, img):.1f} dB")
for name, a in (("original", img), ("mask", mask), ("restored", restored)):
    (out / f"{name}.pgm").write_bytes(write_pgm(a))

# PGM files round-trip through the reader
print(np.array_equal(read_pgm((out / "restored.pgm").read_bytes()), restored))

# 40 frames: a smooth static background and a bright square sliding across it
yy, xx = np.mgrid[:64, :64]
background = np.rint(120 + 40 * np.sin(xx / 9.0) + 30 * np.cos(yy / 7.0))
frames = []
for j in range(40):
    f = background.copy()
    x0 = round(j * 56 / 39)
    f[28:36, x0 : x0 + 8] = 250
    frames.append(f.astype(np.uint8))

bg, fg = background_subtract(frames)
print("background error:", np.abs(bg.astype(float) - background).max(), "grey levels")
print("foreground pixels per frame:", sorted(set((fg >= 128).sum(axis=(1, 2)).tolist())))
(out / "frame20_fg.pgm").write_bytes(write_pgm(fg[20]))
print("wrote PGM files to", out)
