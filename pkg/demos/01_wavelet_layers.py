"""
Wavelet layers of the test signal
=================================

Decompose the ramp/sine/square test signal with a db5 wavelet and look at
how the detail energy is spread over the layers, with and without noise.
"""
import numpy as np

from mdlhisto import NoiseSpec, add_noise, daubechies_filter, dwt1d, gen_test_signal, idwt1d

clean = gen_test_signal(4000)
noisy = add_noise(clean, NoiseSpec("gaussian", sigma=10, seed=0))
f = daubechies_filter(5)

# 4000 = 125 * 2**5, so five levels fit exactly
for name, x in (("clean", clean), ("noisy", noisy)):
    d = dwt1d(x, f, 5)
    print(f"{name}: reconstruction error {np.max(np.abs(idwt1d(d) - x)):.2e}")
    for level, layer in enumerate(d.layers, 1):
        print(f"  level {level}: {layer.size:5d} coefficients, energy {np.sum(layer**2):12.1f}")

# The noise spreads evenly over all layers (an orthonormal transform keeps
# white noise white) while the signal concentrates in few large coefficients.
d = dwt1d(noisy, f, 5)
print("finest-layer noise estimate:", np.median(np.abs(d.layers[0])) / 0.6745)
