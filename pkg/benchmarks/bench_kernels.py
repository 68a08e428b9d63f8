"""Time the compiled and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np
from scipy.special import gammaln

from ultraspec.kernels import get_backend


def _cases():
    log_values = gammaln(np.arange(4001) + 1.0)
    log_t = np.log(np.linspace(0.5, 3000.0, 20000))
    y = np.linspace(0.0, 60.0, 4000)
    x = np.linspace(-12.0, 12.0, 4000)
    return {
        "assoc_max (horizon 4000, 2e4 points)": lambda k: k.assoc_max(log_values, log_t, True),
        "assoc_max generic (no convexity)": lambda k: k.assoc_max(log_values, log_t[:2000], False),
        "laguerre_table (200 x 4000)": lambda k: k.laguerre_table(200, y),
        "hermite_table (200 x 4000)": lambda k: k.hermite_table(200, x),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": get_backend("python")}
    try:
        backends["cython"] = get_backend("cython")
    except ImportError:
        print("compiled backend not built; timing the numpy fallback only")
    print(f"{'kernel':40s} " + " ".join(f"{b:>12s}" for b in backends) + "  speedup")
    for name, fn in _cases().items():
        ref = fn(backends["python"])
        times = {}
        for b, mod in backends.items():
            out = fn(mod)
            for r, o in zip(np.atleast_1d(ref) if not isinstance(ref, tuple) else ref,
                            np.atleast_1d(out) if not isinstance(out, tuple) else out):
                np.testing.assert_allclose(o, r, rtol=1e-10, atol=1e-12)
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:40s} " + " ".join(f"{t * 1e3:10.2f}ms" for t in times.values())
              + f"  {speed:6.1f}x")


if __name__ == "__main__":
    main()
