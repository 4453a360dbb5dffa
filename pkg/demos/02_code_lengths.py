"""
Code lengths of a histogram
===========================

Small worked examples of the code lengths used to choose which bins to keep.
"""
import numpy as np

from mdlhisto import build_equal_width, codelen_full, codelen_retained

# two bins of width 4 (in units of the precision), two values in each
h = build_equal_width([0.5, 1.0, 5.0, 6.0], 2, (0, 8), 1.0)
print("counts", h.counts.tolist())
print(f"full histogram:    {codelen_full(h):.3f} bits")
print(f"keep no bins:      {codelen_retained(h, []):.3f} bits")
print(f"keep both bins:    {codelen_retained(h, [0, 1]):.3f} bits")

# A concentrated histogram is cheaper to describe than a flat one.
rng = np.random.default_rng(0)
peaked = build_equal_width(np.clip(rng.laplace(0, 0.3, 500), -4, 4), 16, (-4, 4), 0.01)
flat = build_equal_width(rng.uniform(-4, 4, 500), 16, (-4, 4), 0.01)
print(f"\n500 Laplace values: {codelen_full(peaked):8.1f} bits")
print(f"500 uniform values: {codelen_full(flat):8.1f} bits")
