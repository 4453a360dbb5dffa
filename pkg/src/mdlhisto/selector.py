"""MDL criteria over bin selections and the searches that minimize them.

A :class:`LayerSet` holds one histogram per wavelet layer. A
:class:`Selection` names the retained bins of every layer; all other
detail coefficients form the residual, which is coded with a second
histogram of ``M`` bins. Three criteria are available:

``eq4``
    equal-width coding with a common layer range and an equal-width
    residual histogram whose range is coded explicitly.
``eq7``
    global criterion with per-layer native ranges and equal-mass residual
    bins; each layer codes the positions of its dropped coefficients.
``eq8``
    as ``eq7`` but the residual carries the positions of the retained
    coefficients instead.

Bin indices are 0-based throughout.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .histo import (
    Histogram,
    LaplaceModel,
    PrecisionError,
    build_equal_mass,
    build_equal_width,
    fit_laplace,
    laplace_cdf,
    laplace_quantile,
    log_binomial,
    log_multinomial,
    loglog2,
    model_order_cost,
)
from .wavelet import WaveletDecomposition

__all__ = [
    "CRITERIA",
    "DEFAULT_M_SEARCH",
    "CodeLenBreakdown",
    "Layer",
    "LayerSet",
    "Refinement",
    "Selection",
    "TooManyBinsError",
    "build_layerset",
    "criterion_fixed",
    "criterion_value",
    "criterion_variable",
    "criterion_variable_alt",
    "evaluate",
    "optimize",
    "optimize_exhaustive",
    "optimize_greedy_lowfreq",
    "optimize_greedy_magnitude",
    "optimize_layerwise",
    "refine_by_splitting",
]

CRITERIA = ("eq4", "eq7", "eq8")
DEFAULT_M_SEARCH = (1, 2, 4, 8, 16, 32)
# code lengths closer than this are treated as equal
TIE_TOL = 1e-9
SUBSET_BITS = 1


class TooManyBinsError(ValueError):
    pass


@dataclass
class Layer:
    """Coefficients of one wavelet layer and their histogram."""

    values: np.ndarray
    hist: Histogram
    label: str = ""
    model: LaplaceModel | None = None
    bin_of: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        self.bin_of = self.hist.assign(self.values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def m(self) -> int:
        return self.hist.m if self.n else 0

    @property
    def counts(self) -> np.ndarray:
        return self.hist.counts


@dataclass
class LayerSet:
    layers: list[Layer]
    delta: float
    R: float
    mode: str
    n_signal: int

    @property
    def n(self) -> int:
        """Number of modelled (detail) coefficients."""
        return sum(layer.n for layer in self.layers)

    @property
    def L(self) -> int:
        return len(self.layers)

    @property
    def total_bins(self) -> int:
        return sum(layer.m for layer in self.layers)

    def bin_keys(self) -> list[tuple[int, int]]:
        return [(j, i) for j, layer in enumerate(self.layers) for i in range(layer.m)]


@dataclass(frozen=True)
class Selection:
    """Retained bin indices per layer."""

    bins: tuple[frozenset, ...]

    @classmethod
    def empty(cls, layers: LayerSet) -> "Selection":
        return cls(tuple(frozenset() for _ in layers.layers))

    @classmethod
    def full(cls, layers: LayerSet) -> "Selection":
        return cls(tuple(frozenset(range(layer.m)) for layer in layers.layers))

    @classmethod
    def from_keys(cls, layers: LayerSet, keys) -> "Selection":
        bins = [set() for _ in layers.layers]
        for j, i in keys:
            bins[j].add(int(i))
        return cls(tuple(frozenset(b) for b in bins))

    def keys(self) -> list[tuple[int, int]]:
        return sorted((j, i) for j, b in enumerate(self.bins) for i in b)

    def toggled(self, j: int, i: int) -> "Selection":
        bins = list(self.bins)
        bins[j] = bins[j] ^ {i}
        return Selection(tuple(bins))

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.bins)

    def retained_counts(self, layers: LayerSet) -> list[int]:
        """k_j for every layer."""
        return [int(layer.counts[sorted(b)].sum()) if b else 0 for layer, b in zip(layers.layers, self.bins)]

    def masks(self, layers: LayerSet) -> list[np.ndarray]:
        """Boolean mask of retained coefficients per layer."""
        out = []
        for layer, b in zip(layers.layers, self.bins):
            keep = np.zeros(max(layer.hist.m, 1), dtype=bool)
            keep[list(b)] = True
            out.append(keep[layer.bin_of] if layer.n else np.zeros(0, dtype=bool))
        return out

    def validate(self, layers: LayerSet):
        if len(self.bins) != layers.L:
            raise ValueError(f"selection has {len(self.bins)} layers, layer set has {layers.L}")
        for j, (layer, b) in enumerate(zip(layers.layers, self.bins)):
            bad = [i for i in b if not 0 <= i < layer.m]
            if bad:
                raise IndexError(f"layer {j}: bins {sorted(bad)} do not exist")

    def to_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bins]


@dataclass
class CodeLenBreakdown:
    criterion: str
    M: int
    layer_bits: tuple[float, ...]
    residual_bits: float
    parameter_bits: float
    total: float

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "M": self.M,
            "layer_bits": list(self.layer_bits),
            "residual_bits": self.residual_bits,
            "parameter_bits": self.parameter_bits,
            "total": self.total,
        }


def _make_breakdown(criterion, M, layer_bits, residual_bits, parameter_bits):
    layer_bits = tuple(float(b) for b in layer_bits)
    total = math.fsum(layer_bits) + residual_bits + parameter_bits
    return CodeLenBreakdown(criterion, int(M), layer_bits, float(residual_bits), float(parameter_bits), float(total))


# ---------------------------------------------------------------------------
# layer set construction


def default_delta(decomp_layers) -> float:
    """Largest layer range divided by 1024 (1.0 if every layer is flat)."""
    ranges = [float(np.ptp(v)) for v in decomp_layers if np.size(v)]
    r = max(ranges, default=0.0)
    return r / 1024 if r > 0 else 1.0


def _fixed_histogram(values, m, R, delta):
    lo, hi = (float(values.min()), float(values.max())) if values.size else (0.0, 0.0)
    c = 0.5 * (lo + hi)
    a, b = c - R / 2, c + R / 2
    # widen by the rounding slack so every value lands inside
    a, b = min(a, lo), max(b, hi)
    return build_equal_width(values, m, (a, b), delta)


def _variable_histogram(values, m, delta):
    if not values.size or not np.any(values):
        return build_equal_width(values, 1, (-delta / 2, delta / 2), delta), None
    model = fit_laplace(values, delta)
    for mm in range(m, 0, -1):
        try:
            return build_equal_mass(values, mm, model, delta), model
        except PrecisionError:
            continue
    raise AssertionError("a single equal-mass bin is always feasible")


def build_layerset(source, mode: str = "variable", m: int = 8, delta="auto", n_signal=None) -> LayerSet:
    """Histogram every detail layer of ``source``.

    ``source`` is a :class:`WaveletDecomposition` or a list of coefficient
    arrays. In ``fixed`` mode all layers share the bin width ``R/m`` with
    ``R`` the largest layer range; in ``variable`` mode each layer gets
    ``m`` equal-mass bins from its own Laplace fit (fewer if the
    precision does not allow ``m``).
    """
    if isinstance(source, WaveletDecomposition):
        arrays = [np.ravel(v) for v in source.layers]
        labels = list(source.labels)
        if n_signal is None:
            n_signal = source.size
    else:
        arrays = [np.asarray(v, dtype=float).ravel() for v in source]
        labels = [f"L{j + 1}" for j in range(len(arrays))]
        if n_signal is None:
            n_signal = sum(a.size for a in arrays)
    if mode not in ("fixed", "variable"):
        raise ValueError(f"unknown histogram mode {mode!r}")
    if m < 1:
        raise ValueError("m must be at least 1")
    if delta == "auto" or delta is None:
        delta = default_delta(arrays)
    delta = float(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    R = max((float(np.ptp(a)) for a in arrays if a.size), default=0.0)
    layers = []
    if mode == "fixed":
        R = max(R, delta)
        m_eff = max(1, min(m, int(math.floor(R / delta * (1 + 1e-12)))))
        for a, lab in zip(arrays, labels):
            layers.append(Layer(a, _fixed_histogram(a, m_eff, R, delta), lab))
    else:
        for a, lab in zip(arrays, labels):
            hist, model = _variable_histogram(a, m, delta)
            layers.append(Layer(a, hist, lab, model))
    return LayerSet(layers, delta, R, mode, int(n_signal))


# ---------------------------------------------------------------------------
# criteria


def _width_bits(counts, widths, delta, literal=False):
    if len(counts) == 0:
        return 0.0
    per_bin = np.log2(np.asarray(widths, dtype=float) / delta)
    if literal:
        return float(per_bin.sum())
    return float(np.dot(np.asarray(counts, dtype=float), per_bin))


def _layer_terms(layers: LayerSet, sel: Selection, form: str, literal=False):
    bits = []
    for layer, b in zip(layers.layers, sel.bins):
        if layer.n == 0:
            bits.append(0.0)
            continue
        idx = sorted(b)
        kept = layer.counts[idx]
        k = int(kept.sum())
        s = len(idx)
        data = _width_bits(kept, layer.hist.widths[idx], layers.delta, literal)
        if form == "alt":
            combo = log_multinomial(kept) + log_binomial(k + s, k)
        else:
            combo = log_multinomial(np.append(kept, layer.n - k)) + log_binomial(layer.n + s + 1, layer.n)
        # layer.m bits name the subset among 2**m
        bits.append(combo + data + SUBSET_BITS * layer.m)
    return bits


def _residual_values(layers: LayerSet, sel: Selection) -> np.ndarray:
    parts = [layer.values[~mask] for layer, mask in zip(layers.layers, sel.masks(layers))]
    return np.concatenate(parts) if parts else np.zeros(0)


def _equal_width_residual(r, M, delta):
    """(counts, widths, range) of an equal-width residual histogram, or None."""
    lo, hi = float(r.min()), float(r.max())
    Re = max(hi - lo, delta)
    if Re / M < delta * (1 - 1e-9):
        return None
    h = build_equal_width(r, M, (lo, lo + Re if hi - lo < delta else hi), delta)
    return h.counts, h.widths, Re


def _equal_mass_residual(r, M, delta):
    if not np.any(r):
        if M != 1:
            return None
        return np.array([r.size]), np.array([delta])
    model = fit_laplace(r, delta)
    try:
        h = build_equal_mass(r, M, model, delta, symmetric=False)
    except PrecisionError:
        return None
    return h.counts, h.widths


def criterion_fixed(layers: LayerSet, sel: Selection, M: int) -> CodeLenBreakdown:
    """Equal-width criterion with an explicitly coded residual range.

    Returns a breakdown with ``total = inf`` when ``M`` equal residual bins
    would be narrower than the precision.
    """
    sel.validate(layers)
    layer_bits = _layer_terms(layers, sel, "model")
    r = _residual_values(layers, sel)
    if r.size == 0:
        return _make_breakdown("eq4", M, layer_bits, 0.0, 0.0)
    res = _equal_width_residual(r, M, layers.delta)
    if res is None:
        return _make_breakdown("eq4", M, layer_bits, math.inf, 0.0)
    nu, widths, Re = res
    ne = r.size
    residual = log_multinomial(nu) + log_binomial(ne + M, M) + _width_bits(nu, widths, layers.delta)
    ratio = Re / layers.delta
    params = math.log2(ratio) + loglog2(ratio) + model_order_cost(M)
    return _make_breakdown("eq4", M, layer_bits, residual, params)


def criterion_variable(layers: LayerSet, sel: Selection, M: int, literal_eq7: bool = False) -> CodeLenBreakdown:
    """Global criterion with equal-mass residual bins.

    ``literal_eq7`` charges each retained or residual bin ``log2(w/delta)``
    once instead of once per coefficient.
    """
    sel.validate(layers)
    layer_bits = _layer_terms(layers, sel, "model", literal_eq7)
    r = _residual_values(layers, sel)
    if r.size == 0:
        return _make_breakdown("eq7", M, layer_bits, 0.0, 0.0)
    res = _equal_mass_residual(r, M, layers.delta)
    if res is None:
        return _make_breakdown("eq7", M, layer_bits, math.inf, 0.0)
    nu, widths = res
    n = layers.n
    k = n - r.size
    residual = (
        log_multinomial(nu)
        + log_binomial(n + M - k, M)
        + _width_bits(nu, widths, layers.delta, literal_eq7)
    )
    return _make_breakdown("eq7", M, layer_bits, residual, model_order_cost(M))


def criterion_variable_alt(layers: LayerSet, sel: Selection, M: int, literal_eq7: bool = False) -> CodeLenBreakdown:
    """Like :func:`criterion_variable`, but the residual codes where the
    retained coefficients sit and each layer codes only its retained ones."""
    sel.validate(layers)
    layer_bits = _layer_terms(layers, sel, "alt", literal_eq7)
    r = _residual_values(layers, sel)
    n = layers.n
    k = n - r.size
    if r.size == 0:
        nu, widths = np.zeros(M, dtype=np.int64), np.full(M, layers.delta)
    else:
        res = _equal_mass_residual(r, M, layers.delta)
        if res is None:
            return _make_breakdown("eq8", M, layer_bits, math.inf, 0.0)
        nu, widths = res
    residual = (
        log_multinomial(np.append(nu, k))
        + log_binomial(n + M + 1, M)
        + _width_bits(nu, widths, layers.delta, literal_eq7)
    )
    return _make_breakdown("eq8", M, layer_bits, residual, model_order_cost(M))


def criterion_value(layers: LayerSet, sel: Selection, M: int, name: str = "eq7", literal_eq7: bool = False):
    """Dispatch to the criterion called ``name`` at a fixed ``M``."""
    if name == "eq4":
        return criterion_fixed(layers, sel, M)
    if name == "eq7":
        return criterion_variable(layers, sel, M, literal_eq7)
    if name == "eq8":
        return criterion_variable_alt(layers, sel, M, literal_eq7)
    raise ValueError(f"unknown criterion {name!r}; expected one of {CRITERIA}")


def evaluate(layers: LayerSet, sel: Selection, name: str = "eq7", M_search=DEFAULT_M_SEARCH, literal_eq7=False):
    """Criterion value minimized over the residual bin count ``M``.

    Ties go to the smaller ``M``.
    """
    best = None
    for M in sorted(set(int(x) for x in M_search)):
        if M < 1:
            raise ValueError("M must be at least 1")
        bd = criterion_value(layers, sel, M, name, literal_eq7)
        if best is None or bd.total < best.total - TIE_TOL:
            best = bd
    if best is None:
        raise ValueError("M_search is empty")
    return best


# ---------------------------------------------------------------------------
# searches


def _tie_key(sel: Selection, total: float):
    return (sel.size, sel.keys())


def optimize_exhaustive(layers: LayerSet, criterion="eq7", M_search=DEFAULT_M_SEARCH, max_bins: int = 20, literal_eq7=False):
    """Global minimum over every subset of bins.

    Among selections within ``TIE_TOL`` of each other the one with fewer
    retained bins wins, then the lexicographically smallest key list.
    """
    keys = layers.bin_keys()
    if len(keys) > max_bins:
        raise TooManyBinsError(
            f"{len(keys)} bins means 2**{len(keys)} subsets; exhaustive search is limited "
            f"to {max_bins} bins, use a greedy optimizer instead"
        )
    best_sel, best = None, None
    for r in range(len(keys) + 1):
        for combo in itertools.combinations(keys, r):
            sel = Selection.from_keys(layers, combo)
            bd = evaluate(layers, sel, criterion, M_search, literal_eq7)
            if best is None or bd.total < best.total - TIE_TOL:
                best_sel, best = sel, bd
            elif abs(bd.total - best.total) <= TIE_TOL and _tie_key(sel, bd.total) < _tie_key(best_sel, best.total):
                best_sel, best = sel, bd
    return best_sel, best


def _magnitude_order(layers: LayerSet, keys):
    def mag(key):
        j, i = key
        return -abs(float(layers.layers[j].hist.centers[i]))

    return sorted(keys, key=lambda key: (mag(key), key))


def _sweep(layers, order, criterion, M_search, sel, best, literal_eq7):
    """Best selection among ``sel`` plus the first t unselected bins of ``order``."""
    todo = [key for key in order if key[1] not in sel.bins[key[0]]]
    cand = sel
    out_sel, out = sel, best
    for j, i in todo:
        cand = cand.toggled(j, i)
        bd = evaluate(layers, cand, criterion, M_search, literal_eq7)
        if bd.total < out.total - TIE_TOL:
            out_sel, out = cand, bd
    return out_sel, out


def _greedy(layers, order, criterion, M_search, max_iters, init, literal_eq7):
    sel = init if init is not None else Selection.empty(layers)
    sel.validate(layers)
    best = evaluate(layers, sel, criterion, M_search, literal_eq7)
    for _ in range(max_iters):
        new_sel, new = _sweep(layers, order, criterion, M_search, sel, best, literal_eq7)
        changed = new_sel != sel
        sel, best = new_sel, new
        for j, i in order:
            cand = sel.toggled(j, i)
            bd = evaluate(layers, cand, criterion, M_search, literal_eq7)
            if bd.total < best.total - TIE_TOL:
                sel, best, changed = cand, bd, True
        if not changed:
            break
    return sel, best


def _occupied(layers: LayerSet):
    return [(j, i) for j, i in layers.bin_keys() if layers.layers[j].counts[i] > 0]


def optimize_greedy_magnitude(layers, criterion="eq7", M_search=DEFAULT_M_SEARCH, max_iters: int = 4, init=None, literal_eq7=False):
    """Visit occupied bins by decreasing ``|center|`` over all layers and flip
    each one whose change strictly shortens the code; repeat the pass up to
    ``max_iters`` times or until nothing changes."""
    order = _magnitude_order(layers, _occupied(layers))
    return _greedy(layers, order, criterion, M_search, max_iters, init, literal_eq7)


def optimize_greedy_lowfreq(layers, criterion="eq7", M_search=DEFAULT_M_SEARCH, max_iters: int = 4, init=None, literal_eq7=False):
    """Greedy flips visiting the coarsest layer first, bins by decreasing
    ``|center|`` within each layer."""
    occupied = _occupied(layers)
    order = []
    for j in reversed(range(layers.L)):
        order.extend(_magnitude_order(layers, [key for key in occupied if key[0] == j]))
    return _greedy(layers, order, criterion, M_search, max_iters, init, literal_eq7)


def optimize_layerwise(layers, criterion="eq4", M_search=DEFAULT_M_SEARCH, max_iters: int = 4, init=None, literal_eq7=False):
    """Layer-by-layer search from the finest layer up.

    Each layer is optimized greedily with earlier layers frozen at their
    chosen bins and later layers still fully in the residual.
    """
    sel = init if init is not None else Selection.empty(layers)
    best = evaluate(layers, sel, criterion, M_search, literal_eq7)
    occupied = _occupied(layers)
    for j in range(layers.L):
        order = _magnitude_order(layers, [key for key in occupied if key[0] == j])
        sel, best = _greedy(layers, order, criterion, M_search, max_iters, sel, literal_eq7)
    return sel, best


OPTIMIZERS = {
    "exhaustive": optimize_exhaustive,
    "greedy-mag": optimize_greedy_magnitude,
    "greedy-lowfreq": optimize_greedy_lowfreq,
    "layerwise": optimize_layerwise,
}


def optimize(layers, optimizer="greedy-mag", criterion="eq7", M_search=DEFAULT_M_SEARCH, max_iters=4, literal_eq7=False):
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {optimizer!r}; expected one of {sorted(OPTIMIZERS)}")
    if optimizer == "exhaustive":
        return optimize_exhaustive(layers, criterion, M_search, literal_eq7=literal_eq7)
    return OPTIMIZERS[optimizer](layers, criterion, M_search, max_iters, literal_eq7=literal_eq7)


# ---------------------------------------------------------------------------
# refinement


@dataclass
class Refinement:
    layers: LayerSet
    selection: Selection
    breakdown: CodeLenBreakdown
    history: list[float]
    rounds_accepted: int


def _split_point(layer: Layer, i: int, delta: float, mode: str):
    a, b = float(layer.hist.edges[i]), float(layer.hist.edges[i + 1])
    if mode == "variable" and layer.model is not None:
        lam = layer.model.lam
        q = 0.5 * (laplace_cdf(a, lam) + laplace_cdf(b, lam))
        x = float(laplace_quantile(q, lam))
        x = round(x / delta) * delta
    else:
        x = 0.5 * (a + b)
    if not (x - a >= delta * (1 - 1e-9) and b - x >= delta * (1 - 1e-9)):
        return None
    return x


def _split_layers(layers: LayerSet, sel: Selection):
    """Split every occupied non-retained bin in two.

    Returns the new layer set, the selection mapped onto it, and the keys
    of the freshly created bins.
    """
    new_layers, new_bins, fresh = [], [], []
    for j, (layer, kept) in enumerate(zip(layers.layers, sel.bins)):
        if layer.n == 0:
            new_layers.append(layer)
            new_bins.append(frozenset())
            continue
        edges = [float(layer.hist.edges[0])]
        mapped, children = set(), []
        for i in range(layer.hist.m):
            x = None
            if i not in kept and layer.counts[i] >= 2:
                x = _split_point(layer, i, layers.delta, layers.mode)
            start = len(edges) - 1
            if x is not None:
                edges.append(x)
                children.extend([start, start + 1])
            elif i in kept:
                mapped.add(start)
            edges.append(float(layer.hist.edges[i + 1]))
        hist = Histogram(np.array(edges), np.zeros(len(edges) - 1, dtype=np.int64), layers.delta)
        idx = hist.assign(layer.values)
        hist = Histogram(hist.edges, np.bincount(idx, minlength=hist.m).astype(np.int64), layers.delta)
        new_layers.append(Layer(layer.values, hist, layer.label, layer.model))
        new_bins.append(frozenset(mapped))
        fresh.extend((j, c) for c in children)
    out = LayerSet(new_layers, layers.delta, layers.R, layers.mode, layers.n_signal)
    return out, Selection(tuple(new_bins)), fresh


def refine_by_splitting(
    layers: LayerSet,
    sel: Selection,
    criterion="eq7",
    M_search=DEFAULT_M_SEARCH,
    max_rounds: int = 3,
    max_iters: int = 4,
    literal_eq7=False,
):
    """Successively halve the dropped bins and re-select among the halves.

    Retained bins are never revisited. A round is kept only if it strictly
    shortens the total code; the first round that does not ends the search.
    ``history`` lists the totals of the starting point and of every
    accepted round.
    """
    best = evaluate(layers, sel, criterion, M_search, literal_eq7)
    history = [best.total]
    accepted = 0
    for _ in range(max_rounds):
        cand_layers, cand_sel, fresh = _split_layers(layers, sel)
        if not fresh:
            break
        order = _magnitude_order(cand_layers, [key for key in fresh if cand_layers.layers[key[0]].counts[key[1]] > 0])
        cand_sel, cand = _greedy(cand_layers, order, criterion, M_search, max_iters, cand_sel, literal_eq7)
        if not cand.total < best.total - TIE_TOL:
            break
        layers, sel, best = cand_layers, cand_sel, cand
        history.append(best.total)
        accepted += 1
    return Refinement(layers, sel, best, history, accepted)
