"""Regenerate the frozen oscillatory-target coefficient table.

The packaged file src/sal_learn/data/oscillatory_coeffs.txt was produced by
this exact loop: one SplitMix64 stream seeded with 20, drawing a_k, b_k, c_k
interleaved for each of the 20 output indices.  Running the script verifies
that the recipe still reproduces the shipped bytes, and can rewrite the file
if a path is given.

    python3 demos/regenerate_coefficients.py [output-path]
"""

import sys
from importlib import resources

from sal_learn.rng import SplitMix64

rng = SplitMix64(20)
lines = []
for k in range(1, 21):
    a = 5.0 * rng.standard_normal()
    b = -5.0 * rng.standard_normal()
    c = 10.0 * rng.standard_normal()
    lines.append(f"{k} {a:.17g} {b:.17g} {c:.17g}")
text = "\n".join(lines) + "\n"

packaged = (resources.files("sal_learn") / "data" / "oscillatory_coeffs.txt").read_text()
if text == packaged:
    print("regenerated table matches the packaged file byte for byte")
else:
    print("WARNING: regenerated table differs from the packaged file")
    sys.exit(1)

if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(text)
    print(f"wrote {sys.argv[1]}")
