"""Compare the compiled and numpy collision tallies on identical label streams.

    python benchmarks/bench_kernels.py --size 1000000 --domain 1000 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from collnorm.kernels import CTally, PyTally


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _ops(cls, labels: np.ndarray, k: int) -> dict:
    def ingest():
        cls().ingest(labels)

    def until():
        cls().ingest_until(labels, k)

    def stops():
        cls().stop_times(labels, k, labels.size)

    return {"ingest": ingest, "ingest_until": until, "stop_times": stops}


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000, help="labels per stream")
    ap.add_argument("--domain", type=int, default=1000, help="labels are drawn uniformly from [0, domain)")
    ap.add_argument("--k", type=int, default=50, help="collision target for the stopping operations")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    labels = np.random.default_rng(args.seed).integers(0, args.domain, size=args.size, dtype=np.int64)
    backends = {"python": PyTally}
    if CTally is not None:
        backends["compiled"] = CTally
    else:
        print("compiled tally not built; timing the numpy backend only")

    rows = {}
    for name, cls in backends.items():
        for op, fn in _ops(cls, labels, args.k).items():
            rows.setdefault(op, {})[name] = _best(fn, args.repeat)

    print(f"{args.size} labels over {args.domain} values, k={args.k}, best of {args.repeat}")
    print(f"{'operation':<14}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for op, times in rows.items():
        line = f"{op:<14}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) > 1:
            line += f"{times['python'] / times['compiled']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
