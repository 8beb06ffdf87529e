#!/usr/bin/env python3
"""Throughput comparison of the three simulation paths.

    kernel (compiled)     numba-jitted array kernel, the default backend
    kernel (pure python)  same kernel source interpreted, XORLINK_NO_NUMBA=1
    reference (objects)   the object-level engine used to audit the kernel

All three produce identical metrics for identical configs; this script
measures what that agreement costs. The pure-python row is collected in a
subprocess so the parent's compiled dispatcher stays untouched.

    python benchmarks/bench_backends.py [--intervals N] [--ref-intervals N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

from xorlink._accel import using_numba
from xorlink.channels import GilbertElliottParams
from xorlink.core import TimeConfig
from xorlink.engine import RunConfig, StopRule, run


def workload(intervals: int) -> RunConfig:
    return RunConfig(
        scheme="windowed",
        channel=GilbertElliottParams(0.2, 0.6, "stationary"),
        time=TimeConfig(delta_max=16, b=3, symbol_bytes=1),
        p_feedback=0.5,
        seed=7,
        stop=StopRule(min_failures=2**62, max_intervals=intervals),
    )


def timed(backend: str, intervals: int):
    run(workload(min(intervals, 2000)), backend=backend)  # warm-up / JIT
    t0 = time.perf_counter()
    m = run(workload(intervals), backend=backend)
    return time.perf_counter() - t0, m


def fmt_rate(rate: float) -> str:
    if rate >= 1e6:
        return f"{rate / 1e6:.1f}M/s"
    if rate >= 1e3:
        return f"{rate / 1e3:.1f}k/s"
    return f"{rate:.0f}/s"


def child_main(intervals: int) -> None:
    elapsed, m = timed("kernel", intervals)
    json.dump({"elapsed": elapsed, "numba": using_numba(), "dfr": m.dfr}, sys.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--intervals", type=int, default=200_000, help="kernel workload length")
    ap.add_argument("--ref-intervals", type=int, default=20_000, help="reference engine workload length")
    ap.add_argument("--child", type=int, default=None, help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child is not None:
        child_main(args.child)
        return

    cfg = workload(args.intervals)
    print(f"workload: {cfg.scheme} / gilbert_elliott(0.2, 0.6) / b=3 delta_max=16 fp=0.5")
    print(f"{'backend':<22}{'intervals':>10}{'time':>10}{'rate':>10}")

    rows = []
    if using_numba():
        elapsed, m_kernel = timed("kernel", args.intervals)
        rows.append(("kernel (compiled)", args.intervals, elapsed, m_kernel.dfr))
    else:
        print("  (numba unavailable or disabled; no compiled row)")
        m_kernel = None

    env = dict(os.environ, XORLINK_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, __file__, "--child", str(args.intervals)],
        capture_output=True, text=True, env=env, check=True,
    )
    res = json.loads(out.stdout)
    assert not res["numba"], "child failed to disable the compiled path"
    rows.append(("kernel (pure python)", args.intervals, res["elapsed"], res["dfr"]))

    elapsed, m_ref = timed("reference", args.ref_intervals)
    rows.append(("reference (objects)", args.ref_intervals, elapsed, m_ref.dfr))

    for name, n, elapsed, _ in rows:
        print(f"{name:<22}{n:>10}{elapsed:>9.3f}s{fmt_rate(n / elapsed):>10}")

    dfrs = {dfr for _, n, _, dfr in rows if n == args.intervals}
    if m_kernel is not None:
        _, m_check = timed("kernel", args.ref_intervals)
        assert m_check.dfr == m_ref.dfr, "kernel and reference disagree"
    assert len(dfrs) == 1, "backends disagree on the shared workload"
    print("metrics agree across backends")


if __name__ == "__main__":
    main()
