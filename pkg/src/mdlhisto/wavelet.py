"""Orthonormal Daubechies wavelet transforms with periodic boundaries.

Layers are ordered finest first: ``layers[0]`` holds the highest-frequency
detail coefficients. In 2D every level contributes three subbands, stored
as consecutive layers in the order HL, LH, HH.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FilterSpec",
    "WaveletDecomposition",
    "daubechies_filter",
    "dwt1d",
    "idwt1d",
    "dwt2d",
    "idwt2d",
    "SUBBANDS",
]

SUBBANDS = ("HL", "LH", "HH")

# Minimum-phase Daubechies low-pass taps, sum = sqrt(2).
_DB_TAPS = {
    1: (
        0.7071067811865476,
        0.7071067811865476,
    ),
    2: (
        0.48296291314453416,
        0.8365163037378079,
        0.2241438680420134,
        -0.12940952255126037,
    ),
    3: (
        0.33267055295008263,
        0.8068915093110925,
        0.45987750211849154,
        -0.13501102001025458,
        -0.08544127388202666,
        0.03522629188570953,
    ),
    4: (
        0.2303778133088965,
        0.7148465705529157,
        0.6308807679298589,
        -0.027983769416859854,
        -0.18703481171909309,
        0.030841381835560764,
        0.0328830116668852,
        -0.010597401785069032,
    ),
    5: (
        0.16010239797419293,
        0.6038292697971896,
        0.7243085284377729,
        0.13842814590132074,
        -0.24229488706638203,
        -0.032244869584638375,
        0.07757149384004572,
        -0.006241490212798274,
        -0.012580751999081999,
        0.0033357252854737712,
    ),
    6: (
        0.11154074335010947,
        0.49462389039845306,
        0.7511339080210954,
        0.31525035170919763,
        -0.22626469396543983,
        -0.12976686756726194,
        0.09750160558732304,
        0.027522865530305727,
        -0.03158203931748603,
        0.0005538422011614961,
        0.004777257510945511,
        -0.0010773010853084796,
    ),
    7: (
        0.07785205408500918,
        0.3965393194819173,
        0.7291320908462351,
        0.4697822874051931,
        -0.14390600392856498,
        -0.22403618499387498,
        0.07130921926683026,
        0.08061260915108308,
        -0.03802993693501441,
        -0.01657454163066688,
        0.01255099855609984,
        0.0004295779729213665,
        -0.0018016407040474908,
        0.00035371379997452024,
    ),
    8: (
        0.05441584224310401,
        0.31287159091429995,
        0.6756307362972898,
        0.5853546836542067,
        -0.015829105256349306,
        -0.2840155429615469,
        0.0004724845739132828,
        0.12874742662047847,
        -0.017369301001807547,
        -0.044088253930794755,
        0.013981027917398282,
        0.008746094047405777,
        -0.004870352993451574,
        -0.00039174037337694705,
        0.0006754494064505693,
        -0.00011747678412476953,
    ),
    9: (
        0.038077947363878345,
        0.24383467461259034,
        0.6048231236901112,
        0.6572880780513005,
        0.13319738582500756,
        -0.2932737832791749,
        -0.09684078322297646,
        0.14854074933810638,
        0.03072568147933338,
        -0.06763282906132997,
        0.00025094711483145197,
        0.022361662123679096,
        -0.004723204757751397,
        -0.00428150368246343,
        0.0018476468830562265,
        0.00023038576352319597,
        -0.0002519631889427101,
        3.93473203162716e-05,
    ),
    10: (
        0.026670057900555554,
        0.1881768000776915,
        0.5272011889317256,
        0.6884590394536035,
        0.2811723436605775,
        -0.24984642432731538,
        -0.19594627437737705,
        0.12736934033579325,
        0.09305736460357235,
        -0.07139414716639708,
        -0.029457536821875813,
        0.033212674059341,
        0.0036065535669561697,
        -0.010733175483330575,
        0.001395351747052901,
        0.001992405295185056,
        -0.0006858566949597116,
        -0.00011646685512928545,
        9.358867032006959e-05,
        -1.3264202894521244e-05,
    ),
}


@dataclass(frozen=True)
class FilterSpec:
    """Quadrature-mirror filter pair for a Daubechies wavelet."""

    order: int
    lowpass: np.ndarray
    highpass: np.ndarray

    @property
    def length(self) -> int:
        return len(self.lowpass)


def daubechies_filter(order: int) -> FilterSpec:
    """Return the db``order`` filter pair (``order`` in 1..10).

    The high-pass filter is ``g[k] = (-1)**k * h[2*order - 1 - k]``.
    """
    if not isinstance(order, (int, np.integer)) or order not in _DB_TAPS:
        raise ValueError(f"unsupported Daubechies order {order!r}; expected 1..10")
    h = np.array(_DB_TAPS[order], dtype=float)
    k = np.arange(len(h))
    g = (-1.0) ** k * h[::-1]
    h.flags.writeable = False
    g.flags.writeable = False
    return FilterSpec(int(order), h, g)


@dataclass
class WaveletDecomposition:
    """Detail layers (finest first) plus the coarsest approximation band."""

    layers: list[np.ndarray]
    approximation: np.ndarray
    levels: int
    filter: FilterSpec
    shape: tuple[int, ...]
    labels: list[str] = field(default_factory=list)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(self.approximation.size + sum(layer.size for layer in self.layers))

    def copy(self) -> "WaveletDecomposition":
        return WaveletDecomposition(
            [layer.copy() for layer in self.layers],
            self.approximation.copy(),
            self.levels,
            self.filter,
            self.shape,
            list(self.labels),
        )

    def with_layers(self, layers, approximation=None) -> "WaveletDecomposition":
        """Same metadata, new coefficient arrays."""
        if approximation is None:
            approximation = self.approximation.copy()
        return WaveletDecomposition(
            [np.asarray(layer, dtype=float) for layer in layers],
            np.asarray(approximation, dtype=float),
            self.levels,
            self.filter,
            self.shape,
            list(self.labels),
        )


def _check_depth(shape, levels):
    if not isinstance(levels, (int, np.integer)) or levels < 1:
        raise ValueError(f"levels must be a positive integer, got {levels!r}")
    block = 2**levels
    for n in shape:
        if n < block or n % block:
            raise ValueError(
                f"dimension {n} cannot be decomposed to depth {levels}: "
                f"it must be a positive multiple of {block}"
            )


def _analysis(x, filt, axis):
    """One periodic analysis step along ``axis``; returns (low, high)."""
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(filt.length)[None, :]) % n
    windows = x[..., idx]
    low = windows @ filt.lowpass
    high = windows @ filt.highpass
    return np.moveaxis(low, -1, axis), np.moveaxis(high, -1, axis)


def _synthesis(low, high, filt, axis):
    """Adjoint (= inverse, by orthonormality) of :func:`_analysis`."""
    low = np.moveaxis(low, axis, -1)
    high = np.moveaxis(high, axis, -1)
    half = low.shape[-1]
    n = 2 * half
    out = np.zeros(low.shape[:-1] + (n,))
    base = 2 * np.arange(half)
    # for a fixed tap the target indices are distinct, so fancy += is safe
    for tap in range(filt.length):
        out[..., (base + tap) % n] += filt.lowpass[tap] * low + filt.highpass[tap] * high
    return np.moveaxis(out, -1, axis)


def dwt1d(signal, filter: FilterSpec, levels: int) -> WaveletDecomposition:
    """Multi-level periodic DWT of a 1D signal."""
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("dwt1d expects a 1D signal")
    _check_depth(x.shape, levels)
    layers = []
    approx = x
    for _ in range(levels):
        approx, detail = _analysis(approx, filter, axis=0)
        layers.append(detail)
    labels = [f"D{j}" for j in range(1, levels + 1)]
    return WaveletDecomposition(layers, approx, int(levels), filter, x.shape, labels)


def _check_consistency(decomp: WaveletDecomposition, ndim: int):
    if decomp.ndim != ndim:
        raise ValueError(f"expected a {ndim}D decomposition, got {decomp.ndim}D")
    per_level = 1 if ndim == 1 else 3
    if len(decomp.layers) != per_level * decomp.levels:
        raise ValueError("number of layers does not match the decomposition depth")
    scale = 2**decomp.levels
    expected = tuple(n // scale for n in decomp.shape)
    if decomp.approximation.shape != expected:
        raise ValueError(
            f"approximation has shape {decomp.approximation.shape}, expected {expected}"
        )
    for level in range(decomp.levels):
        want = tuple(n // 2 ** (level + 1) for n in decomp.shape)
        for b in range(per_level):
            layer = decomp.layers[level * per_level + b]
            if layer.shape != want:
                raise ValueError(
                    f"layer {level * per_level + b} has shape {layer.shape}, expected {want}"
                )


def idwt1d(decomp: WaveletDecomposition) -> np.ndarray:
    """Inverse of :func:`dwt1d`."""
    _check_consistency(decomp, 1)
    x = np.asarray(decomp.approximation, dtype=float)
    for detail in reversed(decomp.layers):
        x = _synthesis(x, np.asarray(detail, dtype=float), decomp.filter, axis=0)
    return x


def dwt2d(image, filter: FilterSpec, levels: int) -> WaveletDecomposition:
    """Multi-level separable periodic DWT of a 2D image.

    Rows are filtered first (axis 1), then columns (axis 0). ``HL`` is
    high-pass along rows and low-pass along columns.
    """
    x = np.asarray(image, dtype=float)
    if x.ndim != 2:
        raise ValueError("dwt2d expects a 2D image")
    _check_depth(x.shape, levels)
    layers, labels = [], []
    approx = x
    for level in range(1, levels + 1):
        lo, hi = _analysis(approx, filter, axis=1)
        ll, lh = _analysis(lo, filter, axis=0)
        hl, hh = _analysis(hi, filter, axis=0)
        layers.extend([hl, lh, hh])
        labels.extend(f"{band}{level}" for band in SUBBANDS)
        approx = ll
    return WaveletDecomposition(layers, approx, int(levels), filter, x.shape, labels)


def idwt2d(decomp: WaveletDecomposition) -> np.ndarray:
    """Inverse of :func:`dwt2d`."""
    _check_consistency(decomp, 2)
    x = np.asarray(decomp.approximation, dtype=float)
    for level in reversed(range(decomp.levels)):
        hl, lh, hh = (np.asarray(a, dtype=float) for a in decomp.layers[3 * level : 3 * level + 3])
        lo = _synthesis(x, lh, decomp.filter, axis=0)
        hi = _synthesis(hl, hh, decomp.filter, axis=0)
        x = _synthesis(lo, hi, decomp.filter, axis=1)
    return x


def dwt(data, filter: FilterSpec, levels: int) -> WaveletDecomposition:
    data = np.asarray(data, dtype=float)
    return dwt1d(data, filter, levels) if data.ndim == 1 else dwt2d(data, filter, levels)


def idwt(decomp: WaveletDecomposition) -> np.ndarray:
    return idwt1d(decomp) if decomp.ndim == 1 else idwt2d(decomp)
