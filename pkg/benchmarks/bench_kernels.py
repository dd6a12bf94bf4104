"""Compare the compiled and pure-Python kernels on identical seeded runs.

Usage: python benchmarks/bench_kernels.py [t_max] [reps]

Both implementations consume the same random stream, so besides timing this
also asserts that every run agrees event-for-event.
"""

import sys
import time

import numpy as np

from competition_lab.engines import default_box, run_competition
from competition_lab.kernels import HAVE_SPEEDUPS
from competition_lab.random_media import SeedSpec


def bench(impl: str, t_max: float, reps: int):
    records = []
    elapsed = 0.0
    box = default_box([(0, 0), (1, 0)], t_max, speed_factor=2.8)
    for rep in range(reps):
        t0 = time.perf_counter()
        rec = run_competition(
            [(0, 0)], [(1, 0)], t_max, SeedSpec(1234).child("bench", rep),
            box=box, impl=impl,
        )
        elapsed += time.perf_counter() - t0
        records.append(rec)
    events = sum(r.n_events for r in records)
    return records, events, elapsed


def main():
    t_max = float(sys.argv[1]) if len(sys.argv) > 1 else 60.0
    reps = int(sys.argv[2]) if len(sys.argv) > 2 else 3

    print(f"competition model, two seeds, t_max={t_max}, reps={reps}")
    py_recs, py_events, py_time = bench("python", t_max, reps)
    print(f"python   : {py_events:>10d} events in {py_time:8.3f}s "
          f"({py_events / py_time:,.0f} events/s)")

    if not HAVE_SPEEDUPS:
        print("compiled : extension not built (pip install -e . to compile)")
        return

    cy_recs, cy_events, cy_time = bench("compiled", t_max, reps)
    print(f"compiled : {cy_events:>10d} events in {cy_time:8.3f}s "
          f"({cy_events / cy_time:,.0f} events/s)")
    print(f"speedup  : {py_time / cy_time:.1f}x")

    for rep, (a, b) in enumerate(zip(py_recs, cy_recs)):
        same = (
            a.n_events == b.n_events
            and a.t_end == b.t_end
            and np.array_equal(a.occupied, b.occupied)
            and np.array_equal(a.colors, b.colors)
        )
        if not same:
            raise SystemExit(f"MISMATCH at rep {rep}: kernels diverged")
    print("parity   : all runs bit-identical across implementations")


if __name__ == "__main__":
    main()
