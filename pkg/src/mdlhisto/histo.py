"""Histograms of wavelet coefficients and their exact code lengths.

All code lengths are in bits. Bin membership is left-closed, right-open,
with the last bin closed on the right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "Histogram",
    "LaplaceModel",
    "PrecisionError",
    "build_equal_width",
    "build_equal_mass",
    "fit_laplace",
    "laplace_quantile",
    "laplace_cdf",
    "log_multinomial",
    "log_binomial",
    "model_order_cost",
    "codelen_full",
    "codelen_retained",
]

_LN2 = math.log(2.0)


class PrecisionError(ValueError):
    """A bin would be narrower than the quantization precision."""


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    delta: float

    @property
    def m(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def assign(self, values) -> np.ndarray:
        """Bin index of every value; raises if a value is outside the edges."""
        values = np.asarray(values, dtype=float).ravel()
        if values.size and (values.min() < self.edges[0] or values.max() > self.edges[-1]):
            raise ValueError("value outside histogram range")
        idx = np.searchsorted(self.edges, values, side="right") - 1
        return np.minimum(idx, self.m - 1)


def _histogram(values, edges, delta):
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("histogram edges must be strictly increasing")
    widths = np.diff(edges)
    # tolerate rounding in edges computed as a + i*w
    if np.any(widths < delta * (1 - 1e-9)):
        raise PrecisionError(f"bin width {widths.min():g} is below the precision {delta:g}")
    h = Histogram(edges, np.zeros(len(edges) - 1, dtype=np.int64), float(delta))
    idx = h.assign(values)
    counts = np.bincount(idx, minlength=h.m).astype(np.int64)
    return Histogram(edges, counts, float(delta))


def build_equal_width(values, m: int, range: tuple[float, float], delta: float) -> Histogram:
    """Histogram with ``m`` equal bins over ``range``."""
    a, b = float(range[0]), float(range[1])
    if m < 1:
        raise ValueError("m must be at least 1")
    if not b > a:
        raise ValueError("range must satisfy b > a")
    values = np.asarray(values, dtype=float).ravel()
    if values.size and (values.min() < a or values.max() > b):
        raise ValueError(f"values fall outside the range [{a:g}, {b:g}]")
    if (b - a) / m < delta * (1 - 1e-9):
        raise PrecisionError(f"bin width {(b - a) / m:g} is below the precision {delta:g}")
    edges = a + (b - a) * np.arange(m + 1) / m
    edges[-1] = b
    return _histogram(values, edges, delta)


@dataclass(frozen=True)
class LaplaceModel:
    """Symmetric Laplace law with rate ``lam`` fitted on a ``delta`` grid."""

    lam: float
    delta: float
    mean_abs: float

    def pmf(self, i):
        """Mass of the quantized magnitude ``i * delta``, i = 0, 1, 2, ..."""
        q = math.exp(-self.lam * self.delta)
        return (1.0 - q) * q ** np.asarray(i, dtype=float)


def fit_laplace(values, delta: float) -> LaplaceModel:
    """Maximum-likelihood rate for magnitudes quantized to ``delta``.

    ``lam = ln(1 + delta / mean|values|) / delta``; tends to ``1/mean|values|``
    as ``delta -> 0``.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("cannot fit a Laplace model to no values")
    if delta <= 0:
        raise ValueError("delta must be positive")
    cbar = float(np.mean(np.abs(values)))
    if cbar == 0.0:
        raise ValueError("degenerate distribution: all values are zero")
    return LaplaceModel(math.log1p(delta / cbar) / delta, float(delta), cbar)


def laplace_cdf(x, lam: float):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, 0.5 * np.exp(lam * np.minimum(x, 0)), 1 - 0.5 * np.exp(-lam * np.maximum(x, 0)))


def laplace_quantile(q, lam: float):
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(
            q < 0.5,
            np.log(2 * np.minimum(q, 0.5)) / lam,
            -np.log(2 * (1 - np.maximum(q, 0.5))) / lam,
        )


def _snap_outward(x, delta):
    """Move ``x`` away from zero onto the ``delta`` grid."""
    x = np.asarray(x, dtype=float)
    steps = np.abs(x) / delta
    # absorb float noise so exact grid points stay put
    steps = np.ceil(steps - 1e-9)
    return np.sign(x) * steps * delta


def build_equal_mass(values, m: int, model: LaplaceModel, delta: float, symmetric: bool = True) -> Histogram:
    """Variable-width histogram whose bins carry equal Laplace mass.

    Interior edges are the ``i/m`` quantiles of the symmetric Laplace law,
    moved away from zero onto the ``delta`` grid. The outer edges sit at
    ``+-max|values|``, or at the smallest and largest value when
    ``symmetric`` is false, snapped the same way and widened if needed so
    the outermost bins stay at least ``delta`` wide.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    values = np.asarray(values, dtype=float).ravel()
    if values.size:
        hi, lo = max(float(values.max()), 0.0), min(float(values.min()), 0.0)
        if symmetric:
            hi = max(hi, -lo)
            lo = -hi
    else:
        hi = lo = 0.0
    hi = float(_snap_outward(max(hi, delta / 2), delta))
    lo = -float(_snap_outward(max(-lo, delta / 2), delta))
    inner = _snap_outward(laplace_quantile(np.arange(1, m) / m, model.lam), delta)
    if m % 2 == 0:
        inner[m // 2 - 1] = 0.0
    if inner.size:
        hi = max(hi, float(inner[-1]) + delta)
        lo = min(lo, float(inner[0]) - delta)
    edges = np.concatenate([[lo], inner, [hi]])
    widths = np.diff(edges)
    if np.any(widths < delta * (1 - 1e-9)):
        raise PrecisionError(f"{m} equal-mass bins collapse below the precision {delta:g}; reduce m")
    return _histogram(values, edges, delta)


def log_multinomial(counts) -> float:
    """``log2(n! / prod(counts_i!))``."""
    c = np.asarray(counts, dtype=float)
    if c.size == 0:
        return 0.0
    if np.any(c < 0):
        raise ValueError("counts must be non-negative")
    return float((gammaln(c.sum() + 1) - gammaln(c + 1).sum()) / _LN2)


def log_binomial(n: int, k: int) -> float:
    """``log2 C(n, k)``."""
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    return float((gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / _LN2)


def loglog2(x: float) -> float:
    """``log2 log2 x`` with the inner logarithm clamped to at least 1."""
    if x <= 2:
        return 0.0
    return math.log2(math.log2(x))


def model_order_cost(m: int) -> float:
    """Bits for the integer ``m``: ``log2 m + 2 log2 log2 m`` (0 for m < 2)."""
    if m < 2:
        return 0.0
    return math.log2(m) + 2 * loglog2(m)


def _data_bits(counts, widths, delta):
    counts = np.asarray(counts, dtype=float)
    if counts.size == 0:
        return 0.0
    ratio = np.asarray(widths, dtype=float) / delta
    return float(np.sum(counts * np.log2(ratio)))


def codelen_full(h: Histogram) -> float:
    """Code length of the data under the full histogram ``h``."""
    if np.any(h.widths < h.delta * (1 - 1e-9)):
        raise PrecisionError("bin narrower than the precision")
    n, m = h.n, h.m
    return log_multinomial(h.counts) + log_binomial(n + m, n) + _data_bits(h.counts, h.widths, h.delta)


def codelen_retained(h: Histogram, S) -> float:
    """Code length of the data with every bin outside ``S`` set to zero.

    ``S`` holds 0-based bin indices. The trailing ``m`` bits identify ``S``
    among the ``2**m`` subsets.
    """
    S = sorted(set(int(i) for i in S))
    if any(i < 0 or i >= h.m for i in S):
        raise IndexError(f"selection {S} references a bin outside 0..{h.m - 1}")
    n = h.n
    kept = h.counts[S]
    k = int(kept.sum())
    return (
        log_multinomial(np.append(kept, n - k))
        + log_binomial(n + len(S) + 1, n)
        + _data_bits(kept, h.widths[S], h.delta)
        + h.m
    )
