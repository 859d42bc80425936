"""Operation-count benchmark: cascade walk against per-node binary search.

Each row reports one (workload, structure) cell.  Counts are exact and
deterministic for a given config; ``queries_per_sec`` is the only timing
column.
"""
import csv
import random
import time
from bisect import bisect_left, bisect_right

from .catalog import CatalogTree
from .search import PathSearcher, SearchCounters
from .trace import random_tree

HEADER = ["workload", "n", "structure", "queries_per_sec", "comparisons_per_query",
          "locator_queries_per_query", "path_length"]
TIMING_COLUMNS = ("queries_per_sec",)


def broom(depth, bristles):
    """A path of ``depth`` nodes starting at the root 0, with ``bristles`` leaves under its end.

    Every bristle is ``depth`` edges away from the root.
    """
    parents = [-1] + list(range(depth - 1))
    parents += [depth - 1] * bristles
    return parents


def make_tree(cfg, rng):
    if cfg.shape == "broom":
        return broom(cfg.depth, cfg.degree)
    if cfg.shape == "path":
        return [-1] + list(range(cfg.depth))
    return random_tree(rng, cfg.nodes, cfg.degree)


def make_catalogs(parents, n, key_bound, rng):
    """``n`` distinct random values spread uniformly over the nodes, as (value, id) pairs."""
    vals = rng.sample(range(key_bound), n) if key_bound <= 4 * n else None
    if vals is None:
        seen = set()
        while len(seen) < n:
            seen.add(rng.randrange(key_bound))
        vals = sorted(seen)
        rng.shuffle(vals)
    cats = {}
    for i, x in enumerate(vals):
        cats.setdefault(rng.randrange(len(parents)), []).append((x, i))
    return cats


def _deepest(parents):
    depth = [0] * len(parents)
    for v in range(1, len(parents)):
        depth[v] = depth[parents[v]] + 1
    far = max(depth)
    return [v for v in range(len(parents)) if depth[v] == far], depth


class Workload:
    """A built tree, its catalogs and a fixed query list."""

    def __init__(self, cfg):
        rng = random.Random(cfg.seed)
        self.cfg = cfg
        self.parents = make_tree(cfg, rng)
        self.catalogs = make_catalogs(self.parents, cfg.n, cfg.keys, rng)
        self.starts, self.depth = _deepest(self.parents)
        self.qrng = random.Random(cfg.seed + 1)
        self._tree = None

    @property
    def tree(self):
        if self._tree is None:
            cfg = self.cfg
            self._tree = CatalogTree(self.parents, self.catalogs, B=cfg.B, G=cfg.G, c=cfg.c,
                                     d=cfg.d, capacity=cfg.n, locator=cfg.locator)
        return self._tree

    def qpred_queries(self):
        r = self.qrng
        return [(r.randrange(self.cfg.keys), r.choice(self.starts)) for _ in range(self.cfg.queries)]

    def qreport_queries(self):
        r = self.qrng
        out = []
        for _ in range(self.cfg.queries):
            lo = r.randrange(self.cfg.keys)
            out.append((lo, min(lo + self.cfg.report_width, self.cfg.keys - 1), r.choice(self.starts)))
        return out

    def path(self, v):
        out = [v]
        while self.parents[out[-1]] >= 0:
            out.append(self.parents[out[-1]])
        return out


class PerNodeSearch:
    """Baseline: a separate binary search in every catalog on the path."""

    def __init__(self, parents, catalogs):
        self.parents = parents
        self.lists = [sorted(catalogs.get(v, ())) for v in range(len(parents))]
        self.comparisons = 0

    def _path(self, v):
        while v >= 0:
            yield v
            v = self.parents[v]

    def path_predecessor(self, x, v0):
        best = None
        for v in self._path(v0):
            lst = self.lists[v]
            self.comparisons += len(lst).bit_length()
            i = bisect_right(lst, (x, float("inf"))) - 1
            if i >= 0 and (best is None or lst[i] > best):
                best = lst[i]
        return best

    def path_report(self, lo, hi, v0):
        out = []
        for v in self._path(v0):
            lst = self.lists[v]
            self.comparisons += 2 * len(lst).bit_length()
            i = bisect_left(lst, (lo, -1))
            j = bisect_right(lst, (hi, float("inf")))
            out.extend(lst[i:j])
        return out


class FlatUnion:
    """Static reference: one sorted array over every key (answers the whole-tree query)."""

    def __init__(self, catalogs):
        self.keys = sorted(k for ks in catalogs.values() for k in ks)
        self.comparisons = 0

    def predecessor(self, x):
        self.comparisons += len(self.keys).bit_length()
        i = bisect_right(self.keys, (x, float("inf"))) - 1
        return self.keys[i] if i >= 0 else None

    def report(self, lo, hi):
        self.comparisons += 2 * len(self.keys).bit_length()
        return self.keys[bisect_left(self.keys, (lo, -1)):bisect_right(self.keys, (hi, float("inf")))]


def _row(workload, n, structure, elapsed, nq, comparisons, locator, path_len):
    return {
        "workload": workload,
        "n": n,
        "structure": structure,
        "queries_per_sec": f"{nq / elapsed:.1f}" if elapsed > 0 else "inf",
        "comparisons_per_query": f"{comparisons / nq:.4f}",
        "locator_queries_per_query": f"{locator / nq:.4f}",
        "path_length": f"{path_len / nq:.4f}",
    }


def run_bench(cfg, workload=None):
    """Rows (dicts keyed by :data:`HEADER`) for every requested workload."""
    wl = workload or Workload(cfg)
    rows = []
    base = PerNodeSearch(wl.parents, wl.catalogs)
    flat = FlatUnion(wl.catalogs)
    edges_of = {v: wl.depth[v] for v in wl.starts}
    for name in cfg.workloads:
        qs = wl.qpred_queries() if name == "qpred" else wl.qreport_queries()
        path_len = sum(edges_of[q[-1]] for q in qs)
        cnt = SearchCounters()
        s = PathSearcher(wl.tree, cnt)
        t0 = time.perf_counter()
        if name == "qpred":
            for x, v in qs:
                s.path_predecessor(x, v)
        else:
            for lo, hi, v in qs:
                for _ in s.path_report(lo, hi, v):
                    pass
        rows.append(_row(name, cfg.n, "cascade", time.perf_counter() - t0, len(qs),
                         cnt.comparisons, cnt.locator_queries, path_len))
        base.comparisons = 0
        t0 = time.perf_counter()
        if name == "qpred":
            for x, v in qs:
                base.path_predecessor(x, v)
        else:
            for lo, hi, v in qs:
                base.path_report(lo, hi, v)
        rows.append(_row(name, cfg.n, "per_node_bisect", time.perf_counter() - t0, len(qs),
                         base.comparisons, 0, path_len))
        flat.comparisons = 0
        t0 = time.perf_counter()
        if name == "qpred":
            for x, _ in qs:
                flat.predecessor(x)
        else:
            for lo, hi, _ in qs:
                flat.report(lo, hi)
        rows.append(_row(name, cfg.n, "flat_union", time.perf_counter() - t0, len(qs),
                         flat.comparisons, 0, path_len))
    return rows


def write_csv(rows, fh, cfg=None):
    """CSV with the fixed header; the config is echoed first as ``# key=value`` lines."""
    if cfg is not None:
        for k, v in cfg.items():
            fh.write(f"# {k}={v}\n")
    w = csv.DictWriter(fh, fieldnames=HEADER, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
