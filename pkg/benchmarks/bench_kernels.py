"""Time the compiled word kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--out FILE]

Prints one CSV row per (kernel, backend) with nanoseconds per call, plus the
speedup of the compiled version.  Needs the extension to be built for the
comparison; otherwise only the Python column is reported.
"""
import argparse
import csv
import random
import sys
import timeit
from array import array

from treecascade.kernels import backends


def cases(rng):
    bits, per_word = 8, 8
    values = [rng.randrange(256) for _ in range(64)]
    words = array("Q", [rng.getrandbits(64) for _ in range(64)])
    sparse = array("Q", [0] * 63 + [1 << 17])
    mask = rng.getrandbits(64)
    return {
        "msb_upto": lambda k: k.msb_upto(mask, 40),
        "lsb_from": lambda k: k.lsb_from(mask, 20),
        "field_get": lambda k: k.field_get(words, 37, bits, per_word),
        "find_field": lambda k: k.find_field(words, 64 * per_word, bits, per_word, 4, 15),
        "field_max": lambda k, pos=tuple(range(0, 64, 3)): k.field_max(words, pos, bits, per_word),
        "pack_fields": lambda k: k.pack_fields(values, bits, per_word),
        "bitset_first": lambda k: k.bitset_first(sparse, 0, 64 * 64 - 1),
        "bitset_last": lambda k: k.bitset_last(sparse, 0, 64 * 64 - 1),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20000)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    impls = backends()
    rows = []
    for name, fn in cases(random.Random(1)).items():
        ns = {}
        for backend, mod in impls.items():
            best = min(timeit.repeat(lambda: fn(mod), number=args.number, repeat=args.repeat))
            ns[backend] = best / args.number * 1e9
        row = {"kernel": name, "python_ns": f"{ns['python']:.1f}"}
        if "cython" in ns:
            row["cython_ns"] = f"{ns['cython']:.1f}"
            row["speedup"] = f"{ns['python'] / ns['cython']:.2f}"
        rows.append(row)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8", newline="")
    w = csv.DictWriter(fh, fieldnames=["kernel", "python_ns", "cython_ns", "speedup"],
                       lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if fh is not sys.stdout:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
