"""Compare the compiled and pure-numpy kernel backends on the hot paths.

Runs each workload in a fresh interpreter with STREAMREG_NUMBA set, so the
import-time backend choice is exercised exactly as a user would hit it.
JIT compilation happens during an untimed warmup inside the child.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from streamreg import backend
from streamreg.onlinesel import StreamState
from streamreg.simharness import SimScenario, run_scenario
from streamreg.suffstats import BlockStats, accumulate_chunk

def stream_updates(p, blocks, n_k, repeats):
    rng = np.random.default_rng(0)
    chunks = []
    for _ in range(blocks):
        x = np.hstack([np.ones((n_k, 1)), rng.standard_normal((n_k, p))])
        y = x @ rng.uniform(-2, 2, p + 1) + rng.standard_normal(n_k)
        stats = BlockStats.empty(p)
        accumulate_chunk(stats, x, y)
        chunks.append(stats)
    # warmup pass compiles the kernels when the numba backend is active
    state = StreamState(p)
    for stats in chunks:
        state.update(stats)
    t0 = time.perf_counter()
    for _ in range(repeats):
        state = StreamState(p)
        for stats in chunks:
            state.update(stats)
    took = time.perf_counter() - t0
    return blocks * repeats / took

def simulation(replicates):
    sc = SimScenario(beta_true=(-1.0, 3.0, 0.0, -1.5, 0.0), seed=1,
                     replicates=replicates)
    run_scenario(SimScenario(beta_true=sc.beta_true, seed=1, replicates=2))
    t0 = time.perf_counter()
    run_scenario(sc)
    return replicates / (time.perf_counter() - t0)

print(json.dumps({
    "backend": backend(),
    "stream_updates_per_s": stream_updates(4, 50, 100, 40),
    "sim_replicates_per_s": simulation(150),
}))
"""


def run_child(numba_flag: str) -> dict:
    env = dict(os.environ, STREAMREG_NUMBA=numba_flag)
    proc = subprocess.run(
        [sys.executable, "-c", CHILD], env=env, capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout)


def main() -> None:
    results = [run_child("1"), run_child("0")]
    width = max(len(r["backend"]) for r in results)
    print(f"{'backend':<{width}}  {'stream updates/s':>18}  {'sim replicates/s':>18}")
    for r in results:
        print(
            f"{r['backend']:<{width}}  {r['stream_updates_per_s']:>18.0f}"
            f"  {r['sim_replicates_per_s']:>18.1f}"
        )
    fast, slow = results
    print(
        f"\nspeedup: x{fast['stream_updates_per_s'] / slow['stream_updates_per_s']:.1f}"
        f" on stream updates, x"
        f"{fast['sim_replicates_per_s'] / slow['sim_replicates_per_s']:.1f}"
        f" on simulation replicates"
    )


if __name__ == "__main__":
    main()
