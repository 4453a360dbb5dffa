"""
Denoising the test signal
=========================

Compare the fixed- and variable-width histogram denoisers with universal
thresholding on one noisy copy of the test signal, then look at what the
selection kept.
"""
from mdlhisto import DenoiseConfig, NoiseSpec, add_noise, denoise1d, gen_test_signal, mae, universal_threshold_denoise

clean = gen_test_signal(4000)
noisy = add_noise(clean, NoiseSpec("gaussian", sigma=10, seed=1))
print(f"noisy input         MAE {mae(noisy, clean):.3f}")
print(f"universal threshold MAE {mae(universal_threshold_denoise(noisy), clean):.3f}")

for hist in ("fixed", "variable"):
    res = denoise1d(noisy, DenoiseConfig(hist=hist))
    bd = res.breakdown
    print(f"\n{hist}-width histograms ({bd.criterion}): MAE {mae(res.denoised, clean):.3f}")
    print(f"  total {bd.total:.0f} bits = layers {sum(bd.layer_bits):.0f} + residual {bd.residual_bits:.0f}"
          f" + parameters {bd.parameter_bits:.1f}, residual bins M = {bd.M}")
    for label, n, k, bins in zip(
        (layer.label for layer in res.layers.layers),
        (layer.n for layer in res.layers.layers),
        res.retained_counts,
        res.selection.to_lists(),
    ):
        print(f"  {label}: kept {k:4d} of {n:4d} coefficients from bins {bins}")

# the two parts always add back to the input
print("\nmax |denoised + residual - input| =", abs(res.denoised + res.residual - noisy).max())
