"""Time the compiled marker kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--titles N] [--repeat R]
"""

import argparse
import random
import timeit

from noticedetect import _pykernels
from noticedetect.config import default_config

try:
    from noticedetect import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def make_titles(n: int, seed: int = 0) -> list:
    rng = random.Random(seed)
    config = default_config()
    words = "adaptive membrane kinetics cortical signalling lattice thermal coupling protein folding".split()
    out = []
    for _ in range(n):
        body = " ".join(rng.choice(words) for _ in range(rng.randint(4, 12))).capitalize()
        roll = rng.random()
        if roll < 0.05:
            body = rng.choice(config.prefixes) + " " + body
        elif roll < 0.08:
            body = body + " " + rng.choice(config.postfixes)
        out.append(body)
    return out


def bench(mod, titles, config, repeat):
    scan = min(timeit.repeat(lambda: mod.scan_titles(titles, config.prefixes, config.postfixes),
                             number=1, repeat=repeat))
    prefix = min(timeit.repeat(lambda: [mod.match_prefix(t, config.prefixes) for t in titles],
                               number=1, repeat=repeat))
    return scan, prefix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--titles", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    config = default_config()
    titles = make_titles(args.titles)

    py = bench(_pykernels, titles, config, args.repeat)
    print(f"{len(titles):,} titles, best of {args.repeat}")
    print(f"{'kernel':<14}{'python s':>10}{'cython s':>10}{'speedup':>9}")
    if _ckernels is None:
        for name, t in zip(("scan_titles", "match_prefix"), py):
            print(f"{name:<14}{t:>10.3f}{'n/a':>10}{'n/a':>9}")
        return
    assert _ckernels.scan_titles(titles, config.prefixes, config.postfixes) == \
        _pykernels.scan_titles(titles, config.prefixes, config.postfixes)
    cy = bench(_ckernels, titles, config, args.repeat)
    for name, p, c in zip(("scan_titles", "match_prefix"), py, cy):
        print(f"{name:<14}{p:>10.3f}{c:>10.3f}{p / c:>8.1f}x")


if __name__ == "__main__":
    main()
