"""Command-line front end.

Subcommands: ``denoise1d`` (CSV), ``denoise2d`` (PGM), ``bench`` and
``codelen``. Every run writes a ``manifest.json`` next to its outputs. All
outputs are built in memory first and written at the end, so a failing run
leaves nothing behind.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bench import METHODS, NoiseSpec, run_benchmark
from .denoiser import DenoiseConfig, denoise
from .pgm import PGMImage, format_pgm, parse_pgm
from .selector import CRITERIA, OPTIMIZERS, Selection, build_layerset, evaluate, optimize_exhaustive
from .wavelet import daubechies_filter, dwt1d

PRESETS = {
    "fig2a": {"noise": "gaussian", "sigma": 10.0, "seeds": 10, "n": 4000},
    "fig2b": {"noise": "gamma", "seeds": 20, "n": 4000},
}
BENCH_METHODS = ("identity", "fixedform-soft", "fixedform-hard", "mdl-fixed", "mdl-variable")


class InputError(Exception):
    pass


# --- formatting


def fmt(x) -> str:
    return f"{float(x):.17g}"


def _clean(obj):
    """JSON-safe copy: tuples become lists, non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def csv_column(values) -> str:
    return "".join(fmt(v) + "\n" for v in np.ravel(values))


# --- input


def parse_csv(text: str, name: str = "input") -> np.ndarray:
    """One number per line, or a single comma-separated row."""
    lines = text.splitlines()
    content = [(i, line) for i, line in enumerate(lines, 1) if line.strip()]
    if not content:
        raise InputError(f"{name}: no values")
    values = []
    for lineno, line in content:
        for field in line.split(","):
            values.append(_number(field, lineno, name))
    return np.array(values, dtype=float)


def parse_layers_csv(text: str, name: str = "input") -> list[np.ndarray]:
    """One comma-separated layer of coefficients per line."""
    layers = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip():
            layers.append(np.array([_number(f, lineno, name) for f in line.split(",")], dtype=float))
    if not layers:
        raise InputError(f"{name}: no values")
    return layers


def _number(field: str, lineno: int, name: str) -> float:
    try:
        x = float(field)
    except ValueError:
        raise InputError(f"{name}: line {lineno}: cannot parse {field.strip()!r} as a number") from None
    if not math.isfinite(x):
        raise InputError(f"{name}: line {lineno}: non-finite value {field.strip()!r}")
    return x


def read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# --- configuration

_CONFIG_FIELDS = {f.name for f in fields(DenoiseConfig)}
_FLAG_TO_FIELD = {
    "wavelet": "wavelet",
    "levels": "levels",
    "bins": "bins",
    "delta": "delta",
    "criterion": "criterion",
    "hist": "hist",
    "optimizer": "optimizer",
    "refine": "refine",
    "literal_eq7": "literal_eq7",
    "all_retained": "all_retained",
    "max_iters": "max_iters",
    "m_search": "M_search",
}


def _delta(text):
    if text == "auto":
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'auto', got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("delta must be positive")
    return v


def _int_list(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def load_config(args) -> DenoiseConfig:
    """Defaults, then ``--config`` keys, then explicit flags."""
    cfg = DenoiseConfig()
    if getattr(args, "config", None):
        try:
            data = json.loads(read_bytes(args.config).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InputError(f"{args.config}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InputError(f"{args.config}: expected a JSON object")
        unknown = sorted(set(data) - _CONFIG_FIELDS)
        if unknown:
            raise InputError(f"{args.config}: unknown keys {unknown}; valid: {sorted(_CONFIG_FIELDS)}")
        if "M_search" in data:
            data["M_search"] = tuple(data["M_search"])
        cfg = replace(cfg, **data)
    for flag, name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None and value is not False:
            cfg = replace(cfg, **{name: value})
    try:
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    return cfg


def add_config_flags(p):
    g = p.add_argument_group("denoiser")
    g.add_argument("--wavelet", type=int, metavar="ORDER", help="Daubechies order 1..10 (default 5)")
    g.add_argument("--levels", type=int, metavar="N", help="decomposition depth (default 5 for 1D, 3 for 2D)")
    g.add_argument("--bins", type=int, metavar="M", help="initial bins per layer (default 16)")
    g.add_argument("--delta", type=_delta, metavar="V|auto", help="quantization precision")
    g.add_argument("--criterion", choices=CRITERIA)
    g.add_argument("--hist", choices=("fixed", "variable"))
    g.add_argument("--optimizer", choices=sorted(OPTIMIZERS))
    g.add_argument("--refine", type=int, metavar="ROUNDS", help="bin-splitting refinement rounds")
    g.add_argument("--literal-eq7", action="store_true", help="charge bin widths once per bin")
    g.add_argument("--max-iters", type=int, metavar="N", help="greedy passes (default 4)")
    g.add_argument("--m-search", type=_int_list, metavar="M1,M2,...", help="residual bin counts to try")
    g.add_argument("--all-retained", action="store_true", help="keep every coefficient (debug)")
    g.add_argument("--config", metavar="FILE", help="JSON object with DenoiseConfig keys")


def add_common_flags(p):
    p.add_argument("--out", default=".", metavar="DIR", help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=0, help="random seed (recorded in the manifest)")
    p.add_argument("--timing", action="store_true", help="include wall-clock timings in the manifest")


# --- output


def manifest(args, command, config, inputs, outputs, elapsed):
    m = {
        "tool": "mdlhisto",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": args.seed,
        "inputs": inputs,
        "outputs": sorted(outputs),
    }
    if args.timing:
        m["timing"] = {"seconds": elapsed}
    return m


def write_outputs(out_dir, files: dict[str, bytes]):
    """Write every file or none of them."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, data in files.items():
            tmp = out_dir / f".{name}.tmp"
            tmp.write_bytes(data)
            os.replace(tmp, out_dir / name)
            written.append(out_dir / name)
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        for name in files:
            (out_dir / f".{name}.tmp").unlink(missing_ok=True)
        raise


def _finish(args, command, config, inputs, files, t0):
    outputs = list(files) + ["manifest.json"]
    files["manifest.json"] = to_json(manifest(args, command, config, inputs, outputs, time.perf_counter() - t0)).encode()
    write_outputs(args.out, {k: v if isinstance(v, bytes) else v.encode() for k, v in files.items()})


# --- subcommands


def cmd_denoise1d(args) -> int:
    t0 = time.perf_counter()
    raw = read_bytes(args.input)
    x = parse_csv(raw.decode("utf-8", errors="replace"), args.input)
    cfg = load_config(args)
    res = denoise(x, cfg)
    report = res.report()
    files = {
        "denoised.csv": csv_column(res.denoised),
        "residual.csv": csv_column(res.residual),
        "report.json": to_json(report),
    }
    _finish(args, "denoise1d", report["config"], {"signal": {"path": str(args.input), "sha256": sha256(raw)}}, files, t0)
    return 0


def cmd_denoise2d(args) -> int:
    t0 = time.perf_counter()
    raw = read_bytes(args.input)
    img = parse_pgm(raw)
    cfg = load_config(args)
    res = denoise(img.to_unit(), cfg)
    mid = (img.maxval + 1) // 2
    resid = np.clip(np.rint(res.residual * img.maxval) + mid, 0, img.maxval).astype(np.int64)
    report = res.report()
    report["image"] = {"width": img.pixels.shape[1], "height": img.pixels.shape[0], "maxval": img.maxval}
    report["residual_offset"] = mid
    files = {
        "denoised.pgm": format_pgm(PGMImage.from_unit(res.denoised, img.maxval), args.plain),
        "residual.pgm": format_pgm(PGMImage(resid, img.maxval), args.plain),
        "report.json": to_json(report),
    }
    _finish(args, "denoise2d", report["config"], {"image": {"path": str(args.input), "sha256": sha256(raw)}}, files, t0)
    return 0


def _seed_list(args, count):
    if args.seed_list is not None:
        return list(args.seed_list)
    return list(range(args.seed, args.seed + count))


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    preset = PRESETS[args.preset] if args.preset else {}
    kind = args.noise or preset.get("noise", "gaussian")
    sigma = args.sigma if args.sigma is not None else preset.get("sigma", 10.0)
    seeds = _seed_list(args, args.seeds if args.seeds is not None else preset.get("seeds", 10))
    n = args.n if args.n is not None else preset.get("n", 4000)
    methods = args.methods.split(",") if args.methods else list(BENCH_METHODS)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise InputError(f"unknown method(s) {', '.join(unknown)}; valid methods: {', '.join(sorted(METHODS))}")
    noise = NoiseSpec(kind, sigma=sigma)
    try:
        noise.validate()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    cfg = load_config(args)
    rep = run_benchmark(methods, noise, seeds, cfg, n)
    print(rep.table())
    files = {"bench.json": to_json(rep.to_dict()), "bench.csv": rep.to_csv()}
    config = {"preset": args.preset, "methods": methods, "seeds": seeds, "n": n, "noise": rep.noise, "denoiser": rep.config}
    _finish(args, "bench", config, {}, files, t0)
    return 0


def _parse_selection(text, layers):
    if text in (None, "", "none"):
        return Selection.empty(layers)
    if text == "all":
        return Selection.full(layers)
    keys = []
    for item in text.split(","):
        try:
            j, i = (int(t) for t in item.split(":"))
        except ValueError:
            raise InputError(f"bad selection item {item!r}; expected LAYER:BIN with 0-based indices") from None
        keys.append((j, i))
    sel = Selection.from_keys(layers, keys)
    try:
        sel.validate(layers)
    except (IndexError, ValueError) as exc:
        raise InputError(str(exc)) from None
    return sel


def cmd_codelen(args) -> int:
    t0 = time.perf_counter()
    raw = read_bytes(args.input)
    text = raw.decode("utf-8", errors="replace")
    cfg = load_config(args)
    criterion = cfg.criterion or ("eq4" if cfg.hist == "fixed" else "eq7")
    if args.coefficients:
        source = parse_layers_csv(text, args.input)
    else:
        x = parse_csv(text, args.input)
        source = dwt1d(x, daubechies_filter(cfg.wavelet), cfg.levels or 5)
    layers = build_layerset(source, cfg.hist, cfg.bins, cfg.delta)
    if args.exhaustive:
        sel, bd = optimize_exhaustive(layers, criterion, cfg.M_search, literal_eq7=cfg.literal_eq7)
    else:
        sel = _parse_selection(args.select, layers)
        bd = evaluate(layers, sel, criterion, cfg.M_search, cfg.literal_eq7)
    result = {
        "criterion": criterion,
        "breakdown": bd.to_dict(),
        "selection": sel.to_lists(),
        "bins_per_layer": [layer.m for layer in layers.layers],
        "edges": [layer.hist.edges.tolist() for layer in layers.layers],
        "delta": layers.delta,
    }
    text = to_json(result)
    sys.stdout.write(text)
    config = {**cfg.to_dict(), "criterion": criterion, "coefficients": bool(args.coefficients)}
    _finish(args, "codelen", config, {"data": {"path": str(args.input), "sha256": sha256(raw)}}, {"codelen.json": text}, t0)
    return 0


# --- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mdlhisto", description="Wavelet denoising by MDL histogram bin selection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d1 = sub.add_parser("denoise1d", help="denoise a CSV signal")
    d1.add_argument("input", help="CSV: one value per line or one comma-separated row")
    add_config_flags(d1)
    add_common_flags(d1)
    d1.set_defaults(func=cmd_denoise1d)

    d2 = sub.add_parser("denoise2d", help="denoise a PGM image")
    d2.add_argument("input", help="PGM file, P2 or P5")
    d2.add_argument("--plain", action="store_true", help="write P2 instead of P5")
    add_config_flags(d2)
    add_common_flags(d2)
    d2.set_defaults(func=cmd_denoise2d)

    b = sub.add_parser("bench", help="multi-seed comparison on the synthetic test signal")
    b.add_argument("--preset", choices=sorted(PRESETS))
    b.add_argument("--methods", metavar="A,B,...", help=f"comma-separated; valid: {', '.join(sorted(METHODS))}")
    b.add_argument("--seeds", type=int, metavar="COUNT", help="number of seeds, starting at --seed")
    b.add_argument("--seed-list", type=_int_list, metavar="S1,S2,...", help="explicit seeds")
    b.add_argument("--noise", choices=("gaussian", "gamma", "none"))
    b.add_argument("--sigma", type=float)
    b.add_argument("--n", type=int, help="signal length (default 4000)")
    add_config_flags(b)
    add_common_flags(b)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("codelen", help="code-length breakdown of one selection")
    c.add_argument("input", help="CSV signal, or coefficient layers with --coefficients")
    c.add_argument("--coefficients", action="store_true", help="input holds one comma-separated layer per line")
    c.add_argument("--select", metavar="J:I,...|all|none", help="retained bins, 0-based (default none)")
    c.add_argument("--exhaustive", action="store_true", help="search all selections instead")
    add_config_flags(c)
    add_common_flags(c)
    c.set_defaults(func=cmd_codelen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, IndexError, OSError) as exc:
        print(f"mdlhisto {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
