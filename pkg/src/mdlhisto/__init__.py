"""Wavelet denoising by minimum description length with histogram models."""
from .bench import NoiseSpec, add_noise, gen_test_signal, mae, mse, run_benchmark, universal_threshold_denoise
from .denoiser import DenoiseConfig, DenoiseResult, denoise, denoise1d, denoise2d, split_coefficients
from .histo import (
    Histogram,
    LaplaceModel,
    build_equal_mass,
    build_equal_width,
    codelen_full,
    codelen_retained,
    fit_laplace,
    log_binomial,
    log_multinomial,
    model_order_cost,
)
from .selector import (
    CodeLenBreakdown,
    LayerSet,
    Selection,
    build_layerset,
    criterion_fixed,
    criterion_variable,
    criterion_variable_alt,
    evaluate,
    optimize_exhaustive,
    optimize_greedy_lowfreq,
    optimize_greedy_magnitude,
    refine_by_splitting,
)
from .wavelet import FilterSpec, WaveletDecomposition, daubechies_filter, dwt1d, dwt2d, idwt1d, idwt2d

__version__ = "0.1.0"
