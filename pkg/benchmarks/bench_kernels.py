"""Time the compiled packing kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [-n ITEMS] [--repeat R]

Both backends pack the same seeded stream, and the final stats and
profiles are checked for equality before any timing is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sospack import kernels
from sospack.distribution import DiscreteDistribution as D
from sospack.model import Packing
from sospack.packers import SIMPLE, srs_spec, wss_spec
from sospack.rng import SizeStream, Streams


def cases():
    u = D.uniform_jk(9, 12)
    big = D.uniform_jk(99, 100)
    yield "ss U{9,12}", kernels.KernelSpec(SIMPLE["ss"], 12), u
    yield "ss U{99,100}", kernels.KernelSpec(SIMPLE["ss"], 100), big
    yield "sinf U{9,12}", kernels.KernelSpec(SIMPLE["sinf"], 12), u
    yield "srs:3 U{9,12}", srs_spec(12, 3), u
    yield "wss:B-h U{99,100}", wss_spec(100, "B-h"), big
    yield "bf U{99,100}", kernels.KernelSpec(SIMPLE["bf"], 100), big


def run(spec, sizes, backend):
    p = Packing(spec.B)
    t0 = time.perf_counter()
    kernels.pack_block(p, spec, sizes, backend=backend)
    return time.perf_counter() - t0, p


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=200_000, help="items per case")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; n={args.n}, best of {args.repeat}")
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'case':22s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, spec, dist in cases():
        sizes = np.ascontiguousarray(SizeStream(dist.sampler(), Streams(args.seed, 0).items).take(args.n), dtype=np.int32)
        best, final = {}, {}
        for b in backends:
            ts = []
            for _ in range(args.repeat):
                dt, p = run(spec, sizes, b)
                ts.append(dt)
            best[b], final[b] = min(ts), p
        ref = final[backends[0]]
        for b in backends[1:]:
            if not (np.array_equal(ref.stats, final[b].stats) and ref.profile == final[b].profile):
                raise SystemExit(f"{name}: backends disagree")
        line = f"{name:22s}" + "".join(f"{best[b] * 1e3:10.1f}ms" for b in backends)
        if len(backends) > 1:
            line += f"{best['python'] / best['cython']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
