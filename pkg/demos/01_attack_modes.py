"""
Attack modes
============

Drop a handful of rows from a synthetic frame two ways:

* pixel loss only: rows are removed from the RGB image and the rest slide up;
* color strips: the same rows are removed from the Bayer mosaic, so every
  row below an odd number of drops is demosaiced with the wrong filter row.

Writes PNGs to ``demos/output/``.
"""

from pathlib import Path

import numpy as np

from esia import color_strip_attack, generate_schedule, pixel_loss_attack, strip_map
from esia.fixtures import gradient_image
from esia.imageio import save_png

out = Path(__file__).parent / "output"

scene = gradient_image(120, 160, (210, 60, 30), (40, 90, 220), angle_deg=70.0)
schedule = generate_schedule(height=120, n=6, seed=2024)
print("dropped rows:", schedule.rows)

loss = pixel_loss_attack(scene, schedule)
strips = color_strip_attack(scene, schedule, phase="RGGB")

# The strip map says which output rows end up miscolored.  A strip opens at
# every even-numbered drop and closes at the next one; an unpaired last drop
# runs to the bottom of the frame.
sm = strip_map(schedule)
runs = []
for j in sm.corrupted:
    if runs and runs[-1][1] == j - 1:
        runs[-1][1] = j
    else:
        runs.append([j, j])
print("color strips (output rows):", [tuple(r) for r in runs])
print("padded rows:", sm.padded)

save_png(out / "scene.png", scene)
save_png(out / "pixel_loss.png", loss)
save_png(out / "color_strips.png", strips)
print("mean |strip - scene| per channel:", np.abs(strips.astype(int) - scene).mean(axis=(0, 1)).round(1))
print("wrote", sorted(p.name for p in out.glob("*.png")))
