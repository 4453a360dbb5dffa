"""Synthetic test signals, noise models, a universal-threshold baseline and
a multi-seed MAE/MSE comparison harness."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .denoiser import DenoiseConfig, denoise
from .wavelet import daubechies_filter, dwt1d, idwt1d

__all__ = [
    "BenchReport",
    "METHODS",
    "NoiseSpec",
    "add_noise",
    "gen_test_signal",
    "hard_threshold",
    "mae",
    "mse",
    "run_benchmark",
    "soft_threshold",
    "universal_threshold_denoise",
]

# gamma shape and the scale that gives variance 100
GAMMA_SHAPE = 2.0
GAMMA_SCALE = math.sqrt(100.0 / GAMMA_SHAPE)


def gen_test_signal(n: int = 4000) -> np.ndarray:
    """Ramp, sinusoid and square wave joined end to end.

    The ramp rises from 0 to 100 over the first quarter, the sinusoid
    (amplitude 50 around 50, four periods) fills the second quarter, and
    the square wave alternates between 0 and 100 over the second half
    in eight half-periods.
    """
    if n < 4 or n % 4:
        raise ValueError(f"n must be a positive multiple of 4 (at least 4), got {n}")
    q = n // 4
    ramp = 100.0 * np.arange(q) / q
    sine = 50.0 + 50.0 * np.sin(2 * np.pi * 4 * np.arange(q) / q)
    half = n - 2 * q
    square = np.where((8 * np.arange(half) // half) % 2 == 0, 100.0, 0.0)
    return np.concatenate([ramp, sine, square])


@dataclass(frozen=True)
class NoiseSpec:
    """Additive iid noise; gamma draws are shifted by ``shape*scale`` to zero mean."""

    kind: str = "gaussian"
    sigma: float = 10.0
    shape: float = GAMMA_SHAPE
    scale: float = GAMMA_SCALE
    seed: int = 0

    def validate(self):
        if self.kind not in ("gaussian", "gamma", "none"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.kind == "gamma" and (self.shape <= 0 or self.scale <= 0):
            raise ValueError("gamma shape and scale must be positive")

    @property
    def variance(self) -> float:
        if self.kind == "gaussian":
            return self.sigma**2
        if self.kind == "gamma":
            return self.shape * self.scale**2
        return 0.0


def add_noise(signal, spec: NoiseSpec) -> np.ndarray:
    spec.validate()
    x = np.asarray(signal, dtype=float)
    if spec.kind == "none":
        return x.copy()
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "gaussian":
        return x + rng.normal(0.0, spec.sigma, size=x.shape)
    return x + rng.gamma(spec.shape, spec.scale, size=x.shape) - spec.shape * spec.scale


def soft_threshold(c, t):
    c = np.asarray(c, dtype=float)
    return np.sign(c) * np.maximum(np.abs(c) - t, 0.0)


def hard_threshold(c, t):
    c = np.asarray(c, dtype=float)
    return np.where(np.abs(c) > t, c, 0.0)


def universal_threshold_denoise(signal, mode: str = "soft", wavelet: int = 5, levels: int = 5) -> np.ndarray:
    """Threshold every detail layer at ``sigma * sqrt(2 ln n)``.

    ``sigma`` is the median absolute finest-layer coefficient over 0.6745.
    """
    if mode not in ("hard", "soft"):
        raise ValueError("mode must be 'hard' or 'soft'")
    x = np.asarray(signal, dtype=float)
    decomp = dwt1d(x, daubechies_filter(wavelet), levels)
    sigma = np.median(np.abs(decomp.layers[0])) / 0.6745
    t = sigma * math.sqrt(2 * math.log(x.size))
    shrink = soft_threshold if mode == "soft" else hard_threshold
    return idwt1d(decomp.with_layers([shrink(d, t) for d in decomp.layers]))


def mae(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a - b)))


def mse(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


# --- methods: callable(noisy, config) -> (estimate, code length or None)


def _identity(noisy, config):
    return np.asarray(noisy, dtype=float).copy(), None


def _fixedform(mode):
    def run(noisy, config):
        return universal_threshold_denoise(noisy, mode, config.wavelet, config.levels or 5), None

    return run


def _mdl(hist):
    # a criterion chosen for the other histogram family falls back to the default
    def run(noisy, config):
        criterion = config.criterion
        if (hist == "fixed") != (criterion == "eq4"):
            criterion = None
        res = denoise(noisy, replace(config, hist=hist, criterion=criterion))
        return res.denoised, res.breakdown.total

    return run


METHODS = {
    "identity": _identity,
    "fixedform-soft": _fixedform("soft"),
    "fixedform-hard": _fixedform("hard"),
    "mdl-fixed": _mdl("fixed"),
    "mdl-variable": _mdl("variable"),
}


@dataclass
class BenchReport:
    """One row per (method, seed) plus per-method aggregates."""

    rows: list[dict]
    noise: dict
    n: int
    config: dict
    timing: dict = field(default_factory=dict)

    @property
    def methods(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r["method"] not in seen:
                seen.append(r["method"])
        return seen

    def values(self, method: str, metric: str = "mae") -> np.ndarray:
        return np.array([r[metric] for r in self.rows if r["method"] == method and r["error"] is None])

    def aggregate(self) -> dict:
        out = {}
        for method in self.methods:
            agg = {}
            for metric in ("mae", "mse"):
                v = self.values(method, metric)
                if v.size:
                    q1, med, q3 = np.percentile(v, [25, 50, 75])
                    agg[metric] = {"median": float(med), "iqr": float(q3 - q1), "mean": float(v.mean())}
                else:
                    agg[metric] = None
            bits = [r["codelen"] for r in self.rows if r["method"] == method and r["codelen"] is not None]
            agg["codelen_median"] = float(np.median(bits)) if bits else None
            agg["failures"] = sum(1 for r in self.rows if r["method"] == method and r["error"] is not None)
            out[method] = agg
        return out

    def median(self, method: str, metric: str = "mae") -> float:
        return float(np.median(self.values(method, metric)))

    def to_dict(self, with_timing: bool = False) -> dict:
        d = {
            "n": self.n,
            "noise": self.noise,
            "config": self.config,
            "rows": self.rows,
            "aggregate": self.aggregate(),
        }
        if with_timing:
            d["timing"] = self.timing
        return d

    def to_json(self, with_timing: bool = False) -> str:
        return json.dumps(self.to_dict(with_timing), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "seed", "mae", "mse", "codelen", "error"])
        for r in self.rows:
            writer.writerow([
                r["method"],
                r["seed"],
                _fmt(r["mae"]),
                _fmt(r["mse"]),
                _fmt(r["codelen"]),
                r["error"] or "",
            ])
        return buf.getvalue()

    def table(self) -> str:
        lines = [f"{'method':<16}{'median MAE':>12}{'IQR':>10}{'median MSE':>12}{'fails':>7}"]
        for method, agg in self.aggregate().items():
            if agg["mae"] is None:
                lines.append(f"{method:<16}{'-':>12}{'-':>10}{'-':>12}{agg['failures']:>7}")
                continue
            lines.append(
                f"{method:<16}{agg['mae']['median']:>12.4f}{agg['mae']['iqr']:>10.4f}"
                f"{agg['mse']['median']:>12.4f}{agg['failures']:>7}"
            )
        return "\n".join(lines)


def _fmt(x):
    return "" if x is None else repr(float(x)) if not math.isfinite(x) else f"{x:.17g}"


def run_benchmark(
    methods=("identity", "fixedform-soft", "mdl-fixed", "mdl-variable"),
    noise: NoiseSpec = NoiseSpec(),
    seeds=range(10),
    config: DenoiseConfig | None = None,
    n: int = 4000,
) -> BenchReport:
    """Denoise one noisy copy of the test signal per seed with every method.

    A method that raises is recorded with its error message; the run
    continues.
    """
    methods = list(methods)
    seeds = list(seeds)
    if not methods or not seeds:
        raise ValueError("need at least one method and one seed")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s) {unknown}; valid: {sorted(METHODS)}")
    config = config or DenoiseConfig()
    clean = gen_test_signal(n)
    rows = []
    timing = {m: 0.0 for m in methods}
    for seed in seeds:
        noisy = add_noise(clean, replace(noise, seed=int(seed)))
        for method in methods:
            t0 = time.perf_counter()
            try:
                estimate, bits = METHODS[method](noisy, config)
                row = {"mae": mae(estimate, clean), "mse": mse(estimate, clean), "codelen": bits, "error": None}
            except Exception as exc:  # recorded per cell, run continues
                row = {"mae": None, "mse": None, "codelen": None, "error": f"{type(exc).__name__}: {exc}"}
            timing[method] += time.perf_counter() - t0
            rows.append({"method": method, "seed": int(seed), **row})
    noise_dict = {"kind": noise.kind, "sigma": noise.sigma, "shape": noise.shape, "scale": noise.scale}
    return BenchReport(rows, noise_dict, n, config.to_dict(), timing)
