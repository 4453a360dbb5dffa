"""Wavelet MDL-histogram denoising of signals and images."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .selector import (
    CRITERIA,
    DEFAULT_M_SEARCH,
    OPTIMIZERS,
    CodeLenBreakdown,
    LayerSet,
    Selection,
    build_layerset,
    evaluate,
    optimize,
    refine_by_splitting,
)
from .wavelet import WaveletDecomposition, daubechies_filter, dwt1d, dwt2d, idwt

__all__ = ["DenoiseConfig", "DenoiseResult", "denoise", "denoise1d", "denoise2d", "split_coefficients"]


@dataclass
class DenoiseConfig:
    """Free parameters of the denoiser.

    ``levels`` and ``criterion`` default by context: 5 levels for signals
    and 3 for images; ``eq4`` for fixed-width histograms and ``eq7`` for
    variable-width ones.
    """

    wavelet: int = 5
    levels: int | None = None
    hist: str = "variable"
    criterion: str | None = None
    optimizer: str = "greedy-mag"
    refine: int = 0
    bins: int = 16
    M_search: tuple[int, ...] = DEFAULT_M_SEARCH
    delta: float | str = "auto"
    max_iters: int = 4
    literal_eq7: bool = False
    all_retained: bool = False

    def resolved(self, ndim: int) -> "DenoiseConfig":
        cfg = DenoiseConfig(**asdict(self))
        if cfg.levels is None:
            cfg.levels = 5 if ndim == 1 else 3
        if cfg.criterion is None:
            cfg.criterion = "eq4" if cfg.hist == "fixed" else "eq7"
        cfg.M_search = tuple(int(M) for M in cfg.M_search)
        cfg.validate()
        return cfg

    def validate(self):
        if self.hist not in ("fixed", "variable"):
            raise ValueError(f"hist must be 'fixed' or 'variable', got {self.hist!r}")
        if self.criterion is not None and self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {sorted(OPTIMIZERS)}, got {self.optimizer!r}")
        if not 1 <= self.wavelet <= 10:
            raise ValueError("wavelet order must be in 1..10")
        if self.levels is not None and self.levels < 1:
            raise ValueError("levels must be at least 1")
        if self.bins < 1 or self.refine < 0 or self.max_iters < 1:
            raise ValueError("bins and max_iters must be positive, refine non-negative")
        if not self.M_search or min(self.M_search) < 1:
            raise ValueError("M_search must hold positive integers")
        if self.delta != "auto" and not float(self.delta) > 0:
            raise ValueError("delta must be 'auto' or positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["M_search"] = list(self.M_search)
        return d


@dataclass
class DenoiseResult:
    denoised: np.ndarray
    residual: np.ndarray
    selection: Selection
    breakdown: CodeLenBreakdown
    retained_counts: list[int]
    config: DenoiseConfig
    layers: LayerSet = field(repr=False)
    decomposition: WaveletDecomposition = field(repr=False)
    refine_history: list[float] = field(default_factory=list)

    def report(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "breakdown": self.breakdown.to_dict(),
            "retained_counts": list(self.retained_counts),
            "layer_sizes": [layer.n for layer in self.layers.layers],
            "layer_labels": [layer.label for layer in self.layers.layers],
            "bins_per_layer": [layer.m for layer in self.layers.layers],
            "selection": self.selection.to_lists(),
            "delta": self.layers.delta,
            "refine_history": list(self.refine_history),
        }


def split_coefficients(decomp: WaveletDecomposition, layers: LayerSet, sel: Selection):
    """Split ``decomp`` into retained and residual parts.

    The approximation band goes entirely to the retained part. The two
    parts add up to ``decomp`` exactly, coefficient by coefficient.
    """
    if len(decomp.layers) != layers.L:
        raise ValueError("layer set was not built from this decomposition")
    for coeffs, layer in zip(decomp.layers, layers.layers):
        if coeffs.size != layer.n or not np.array_equal(np.ravel(coeffs), layer.values):
            raise ValueError("layer set was not built from this decomposition")
    sel.validate(layers)
    kept, dropped = [], []
    for coeffs, mask in zip(decomp.layers, sel.masks(layers)):
        mask = mask.reshape(coeffs.shape)
        kept.append(np.where(mask, coeffs, 0.0))
        dropped.append(np.where(mask, 0.0, coeffs))
    retained = decomp.with_layers(kept, decomp.approximation.copy())
    residual = decomp.with_layers(dropped, np.zeros_like(decomp.approximation))
    return retained, residual


def denoise(data, config: DenoiseConfig | None = None) -> DenoiseResult:
    data = np.asarray(data, dtype=float)
    if data.ndim not in (1, 2):
        raise ValueError("expected a 1D signal or a 2D image")
    if not np.all(np.isfinite(data)):
        raise ValueError("input contains NaN or infinite values")
    cfg = (config or DenoiseConfig()).resolved(data.ndim)
    filt = daubechies_filter(cfg.wavelet)
    decomp = dwt1d(data, filt, cfg.levels) if data.ndim == 1 else dwt2d(data, filt, cfg.levels)
    layers = build_layerset(decomp, cfg.hist, cfg.bins, cfg.delta)
    history = []
    if cfg.all_retained:
        sel = Selection.full(layers)
        breakdown = evaluate(layers, sel, cfg.criterion, cfg.M_search, cfg.literal_eq7)
    else:
        sel, breakdown = optimize(layers, cfg.optimizer, cfg.criterion, cfg.M_search, cfg.max_iters, cfg.literal_eq7)
        if cfg.refine:
            ref = refine_by_splitting(
                layers, sel, cfg.criterion, cfg.M_search, cfg.refine, cfg.max_iters, cfg.literal_eq7
            )
            layers, sel, breakdown, history = ref.layers, ref.selection, ref.breakdown, ref.history
    retained, _ = split_coefficients(decomp, layers, sel)
    denoised = idwt(retained)
    return DenoiseResult(
        denoised=denoised,
        residual=data - denoised,
        selection=sel,
        breakdown=breakdown,
        retained_counts=sel.retained_counts(layers),
        config=cfg,
        layers=layers,
        decomposition=decomp,
        refine_history=history,
    )


def denoise1d(signal, config: DenoiseConfig | None = None) -> DenoiseResult:
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 1:
        raise ValueError("denoise1d expects a 1D signal")
    return denoise(signal, config)


def denoise2d(image, config: DenoiseConfig | None = None) -> DenoiseResult:
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("denoise2d expects a 2D image")
    return denoise(image, config)
