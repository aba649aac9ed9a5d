"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--size 256] [--rmax 64] [--order 2] [--repeat 3]

Both backends run on the same image; their fields are also checked for
equality so a speedup never hides a divergence.
"""

import argparse
import time

from cohlen import _backend, synth
from cohlen.rays import DirectionSet, coherence_field


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--rmax", type=int, default=64)
    ap.add_argument("--order", type=int, default=2)
    ap.add_argument("--fraction", type=float, default=0.5)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    img = synth.generate(synth.TextureSpec("noise", args.size, seed=1))
    dirs = DirectionSet()
    names = ["numpy"]
    try:
        _backend.load("cython")
        names.insert(0, "cython")
    except ImportError:
        print("compiled extension unavailable; timing the fallback only")

    timings, fields = {}, {}
    for name in names:
        kernels = _backend.load(name)
        timings[name], fields[name] = best_of(
            lambda: coherence_field(img, dirs, args.fraction, args.rmax, args.order, args.threads,
                                    backend=kernels),
            args.repeat)
        print(f"{name:>7}: {timings[name]:.3f} s  ({args.size}x{args.size}, r_max {args.rmax}, "
              f"order {args.order}, threads {args.threads})")
    if len(names) == 2:
        same = fields["cython"] == fields["numpy"]
        print(f"speedup {timings['numpy'] / timings['cython']:.2f}x, fields identical: {same}")


if __name__ == "__main__":
    main()
