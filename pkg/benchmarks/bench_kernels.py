"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

from mlfactor import _pykernels

try:
    from mlfactor import _kernels
except ImportError:
    _kernels = None

SLOW_FERMAT = 1606938044260451777179292995662479178227815585735176483777629
SKEWED = 748543215795445052722625573101291605706283989  # p/q ~ 1.46, out of reach
MERSENNE = 2**1279 - 1  # prime, so every witness runs the full chain
WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

CASES = {
    "fermat_search 131072 iters": lambda k: k.fermat_search(SLOW_FERMAT, 200_000),
    "fermat_search 5000 iters (fail)": lambda k: k.fermat_search(SKEWED, 5_000),
    "strong_probable_prime 1279-bit x12": lambda k: k.strong_probable_prime(MERSENNE, WITNESSES),
    "strong_probable_prime 64-bit x10000": lambda k: [k.strong_probable_prime(2**64 - 59, WITNESSES[:7]) for _ in range(10_000)],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _pykernels)] + ([("gmp", _kernels)] if _kernels else [])
    if _kernels is None:
        print("compiled extension not built; timing the Python kernels only")
    print(f"{'case':40s}" + "".join(f"{name:>12s}" for name, _ in backends) + ("   speedup" if _kernels else ""))
    for label, fn in CASES.items():
        times = []
        for _, mod in backends:
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        row = f"{label:40s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
