"""Small seeded layer sets shared by the selector and acceptance tests."""
import numpy as np

from mdlhisto.selector import build_layerset

TINY_M_SEARCH = (1, 2, 4)


def tiny_arrays(seed, sizes=(6, 6)):
    rng = np.random.default_rng(seed)
    # a few large coefficients on top of small noise
    out = []
    for n in sizes:
        v = rng.normal(0, 1.0, n)
        spikes = rng.random(n) < 0.3
        v[spikes] += rng.choice([-8.0, 8.0], spikes.sum())
        out.append(np.round(v, 3))
    return out


def tiny_layerset(seed, mode="variable", m=3):
    return build_layerset(tiny_arrays(seed), mode, m, delta=0.01)


def as_oracle(layers):
    return [(layer.values.tolist(), layer.hist.edges.tolist()) for layer in layers.layers]


def criterion_for(mode):
    return "eq4" if mode == "fixed" else "eq7"
