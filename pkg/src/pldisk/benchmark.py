"""Benchmark the compiled integrator core against the pure-Python fallback.

Run as:  python -m pldisk.benchmark [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ._kernel import available_backends
from ._kernel import common as C


def _workload(fn, repeat: int) -> tuple[float, int]:
    """Time a bundle of representative integrations; returns (seconds, steps)."""
    cfg = [0.0] * C.NCFG
    cfg[C.CFG_RECORD_CROSS] = 1.0
    tgt = np.empty((0, 6))
    cfg_chart = [0.0] * C.NCFG
    cases = [
        # periodic orbit around the center, long run
        (C.FIELD_TAU, (1.0, 1.0, 1.0), (0.1, 0.0), 60.0, cfg),
        # separatrix-level sweep toward the right barrier
        (C.FIELD_TAU, (1.0, 1.0, 1.0), (-0.4999999, 1e-7), 40.0, cfg),
        # chart relaxation onto the attracting corner
        (C.FIELD_U1, (1.0, 1.0, 1.0), (0.05, 0.3), 30.0, cfg_chart),
        # stiff-ish parameters
        (C.FIELD_TAU, (4.0, 0.25, 4.0), (0.05, 0.0), 40.0, cfg),
    ]
    steps = 0
    t0 = time.perf_counter()
    for _ in range(repeat):
        for field, (D, a, m), (y1, y2), t_cap, cf in cases:
            _, _, ts, _, _, _ = fn(field, D, a, m, y1, y2, 0.0, 1.0,
                                   1e-10, 1e-12, 10 ** 6, t_cap, cf, tgt)
            steps += len(ts)
    return time.perf_counter() - t0, steps


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    results = {}
    for name, fn in backends.items():
        _workload(fn, 1)  # warm-up
        secs, steps = _workload(fn, args.repeat)
        results[name] = (secs, steps)
        print(f"{name:>8}: {secs:8.3f} s   {steps / secs:12.0f} accepted steps/s")
    if "c" in results and "python" in results:
        speedup = results["python"][0] / results["c"][0]
        print(f"speedup (compiled vs pure Python): {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
