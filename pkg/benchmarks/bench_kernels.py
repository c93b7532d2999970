"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from ftgcl import kernels
from ftgcl.graph import erdos_renyi, planted_partition
from ftgcl.train import TrainConfig, train


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(rng):
    g = erdos_renyi(2000, 0.005, seed=0)
    uniforms = rng.random((g.n, 30, 10))
    starts = np.arange(g.n)
    indptr, src, _ = g.attention_index()
    e = len(src)
    logits = rng.normal(size=e)
    values = rng.normal(size=(e, 64))
    alpha = kernels.segment_softmax(logits, indptr)
    grad = rng.normal(size=e)
    return {
        "random_walks (2000 nodes x 30 x 10)": lambda b: kernels.random_walks(
            g.out_indptr, g.out_indices, starts, uniforms, backend=b),
        f"segment_softmax ({e} arcs)": lambda b: kernels.segment_softmax(logits, indptr, b),
        f"segment_softmax_backward ({e} arcs)": lambda b: kernels.segment_softmax_backward(
            alpha, grad, indptr, b),
        f"segment_sum ({e} x 64)": lambda b: kernels.segment_sum(values, indptr, b),
        f"scatter_add_rows ({e} x 64)": lambda b: kernels.scatter_add_rows(values, src, g.n, b),
    }


def training_step_time(repeat):
    ds = planted_partition(3, 60, 0.1, 0.01, 16, 1.0, seed=0)
    cfg = TrainConfig(iterations=20, d=32, d_prime=32, k_max=5)
    return best_of(lambda: train(ds, cfg, "ft"), repeat) / cfg.iterations


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    print(f"{'kernel':45s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in cases(rng).items():
        t = {b: best_of(lambda b=b: fn(b), args.repeat) for b in backends}
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{name:45s}" + "".join(f"{t[b] * 1e3:10.2f}ms" for b in backends) + f"  {speed:8.1f}x")
    print(f"\ntraining step with default backend ({kernels.BACKEND}): "
          f"{training_step_time(2) * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
