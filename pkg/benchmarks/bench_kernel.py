#!/usr/bin/env python3
"""Benchmark the compiled model kernel against the numpy fallback.

Times the fused penalty evaluation (the hot call of the key-rate
minimisation) and one small end-to-end minimisation on each backend.

    python benchmarks/bench_kernel.py
"""

import time

import numpy as np

from rfiqkd import _kernel_py, core, devices, estimation, keyrates

try:
    from rfiqkd import _kernel

    BACKENDS = [("cython", _kernel), ("python", _kernel_py)]
except ImportError:
    print("compiled extension not built; benchmarking the fallback only\n")
    BACKENDS = [("python", _kernel_py)]


def bench_penalty(impl, repeats: int) -> float:
    rng = np.random.default_rng(0)
    x = np.empty(34)
    x[0], x[1] = 0.9, 0.8
    x[2:22] = rng.uniform(0, np.pi, 20)
    x[22:34] = rng.uniform(0.5, 2.0, 12)
    f = impl.model_constraints(x)
    lo = np.concatenate([f[:21] - 0.01, [0.0, 0.0]])
    hi = np.concatenate([f[:21] + 0.005, [np.inf, np.inf]])
    impl.penalty_value(x, lo, hi, 100.0)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        impl.penalty_value(x, lo, hi, 100.0)
    return (time.perf_counter() - t0) / repeats


def bench_minimisation(backend_name: str) -> float:
    import importlib
    import os

    os.environ["RFIQKD_PURE_PYTHON"] = "1" if backend_name == "python" else ""
    import rfiqkd.kernel

    importlib.reload(rfiqkd.kernel)
    importlib.reload(keyrates)

    p = devices.click_distribution(devices.ideal_params(), core.ChannelState(0.96, 0.9))
    m = estimation.CountMatrix(np.rint(p * 4e6).astype(np.int64))
    cs = estimation.constraints(m)
    cfg = keyrates.AnalysisConfig(sigma=0.0, n_starts=2, seed=1)
    t0 = time.perf_counter()
    res = keyrates.urfi_rate(cs, cfg)
    elapsed = time.perf_counter() - t0
    assert res.status == "ok"
    return elapsed


def main() -> None:
    print(f"{'backend':<10} {'penalty eval':>14} {'2-start analysis':>18}")
    times = {}
    for name, impl in BACKENDS:
        repeats = 200_000 if name == "cython" else 20_000
        per_eval = bench_penalty(impl, repeats)
        solve = bench_minimisation(name)
        times[name] = per_eval
        print(f"{name:<10} {per_eval * 1e6:>11.2f} us {solve:>16.2f} s")
    if len(times) == 2:
        print(f"\nspeedup: {times['python'] / times['cython']:.1f}x per evaluation")


if __name__ == "__main__":
    main()
