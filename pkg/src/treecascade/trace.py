"""Operation traces: grammar, seeded generator, differential runner, shrinker.

A trace is a flat list of operations, one per line::

    TREE p0 p1 ...          # optional header: parent of node i (-1 for the root)
    INSERT node key         DELETE node key        QPRED node x
    QREPORT v0 v1 xl xh     MINSERT key f l v      MDELETE key v
    QMAX v0 v1              SEG+ id xl xr y [p]    SEG- id
    QRAY x y                QSTAB x                QISECT x y1 y2
    RETRO+ key tI tD        RETRO- eid             QRETRO q t

``#`` starts a comment.  Segment endpoints and ``tD`` accept ``inf``/``-inf``.
Catalog keys are values; the runner pairs every inserted value with a fresh
id so equal values in different catalogs stay distinct.  Operations that are
invalid in the current state (deleting an absent key, re-inserting a present
one) are skipped on both sides and counted, which keeps shrunk traces valid.
"""
import random
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

from .catalog import CatalogTree
from .errors import TraceParseError
from .geometry import HSegment, RetroactiveSearch, SegmentStore, StabMax
from .keys import Key
from .maxima import MaximaTree
from .oracle import OracleWorld
from .search import PathSearcher, SearchCounters

INF = float("inf")


def _int(tok):
    return int(tok)


def _coord(tok):
    low = tok.lower()
    if low in ("inf", "+inf"):
        return INF
    if low == "-inf":
        return -INF
    return int(tok)


# name -> (required argument parsers, optional argument parsers)
GRAMMAR = {
    "INSERT": ((_int, _int), ()),
    "DELETE": ((_int, _int), ()),
    "QPRED": ((_int, _int), ()),
    "QREPORT": ((_int, _int, _int, _int), ()),
    "MINSERT": ((_int, _int, _int, _int), ()),
    "MDELETE": ((_int, _int), ()),
    "QMAX": ((_int, _int), ()),
    "SEG+": ((_int, _coord, _coord, _int), (_int,)),
    "SEG-": ((_int,), ()),
    "QRAY": ((_int, _int), ()),
    "QSTAB": ((_int,), ()),
    "QISECT": ((_int, _int, _int), ()),
    "RETRO+": ((_int, _int, _coord), ()),
    "RETRO-": ((_int,), ()),
    "QRETRO": ((_int, _int), ()),
}

UPDATES = {"INSERT", "DELETE", "MINSERT", "MDELETE", "SEG+", "SEG-", "RETRO+", "RETRO-"}


class Op(NamedTuple):
    name: str
    args: Tuple

    def __str__(self):
        return " ".join([self.name, *(_fmt(a) for a in self.args)])


def _fmt(a):
    if a == INF:
        return "inf"
    if a == -INF:
        return "-inf"
    return str(a)


@dataclass
class Trace:
    parents: Optional[List[int]]
    ops: List[Op]

    def dumps(self):
        lines = []
        if self.parents is not None:
            lines.append("TREE " + " ".join(str(p) for p in self.parents))
        lines.extend(str(op) for op in self.ops)
        return "\n".join(lines) + "\n"


def parse_trace(text):
    """Parse trace text; raises :class:`TraceParseError` with the offending line number."""
    parents = None
    ops = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        name = toks[0].upper()
        if name == "TREE":
            if parents is not None or ops:
                raise TraceParseError(lineno, "TREE must be the first operation and appear once")
            try:
                parents = [int(t) for t in toks[1:]]
            except ValueError:
                raise TraceParseError(lineno, "TREE expects integer parents") from None
            if not parents:
                raise TraceParseError(lineno, "TREE needs at least one node")
            continue
        if name not in GRAMMAR:
            raise TraceParseError(lineno, f"unknown operation {toks[0]!r}")
        req, opt = GRAMMAR[name]
        args = toks[1:]
        if not len(req) <= len(args) <= len(req) + len(opt):
            want = f"{len(req)}" if not opt else f"{len(req)}-{len(req) + len(opt)}"
            raise TraceParseError(lineno, f"{name} takes {want} arguments, got {len(args)}")
        try:
            vals = tuple(f(a) for f, a in zip(req + opt, args))
        except ValueError:
            raise TraceParseError(lineno, f"bad argument in {line!r}") from None
        ops.append(Op(name, vals))
    return Trace(parents, ops)


def load_trace(path):
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())


# generation

def random_tree(rng, nodes, degree, shape="random"):
    """Parent list of a random rooted tree (root 0) with bounded degree."""
    if shape == "path":
        return [-1] + list(range(nodes - 1))
    parents = [-1]
    deg = [0]
    open_nodes = [0]
    for v in range(1, nodes):
        i = rng.randrange(len(open_nodes))
        p = open_nodes[i]
        parents.append(p)
        deg[p] += 1
        if deg[p] >= degree:
            open_nodes[i] = open_nodes[-1]
            open_nodes.pop()
        deg.append(0)
        open_nodes.append(v)
    return parents


PROFILES = {
    "search": {"INSERT": 40, "DELETE": 20, "QPRED": 40},
    "report": {"INSERT": 40, "DELETE": 20, "QREPORT": 40},
    "maxima": {"MINSERT": 40, "MDELETE": 20, "QMAX": 40},
    "geometry": {"SEG+": 30, "SEG-": 10, "QRAY": 20, "QSTAB": 20, "QISECT": 20},
    "retro": {"RETRO+": 40, "RETRO-": 15, "QRETRO": 45},
    "mixed": {"INSERT": 15, "DELETE": 8, "QPRED": 10, "QREPORT": 7, "MINSERT": 10,
              "MDELETE": 5, "QMAX": 7, "SEG+": 8, "SEG-": 3, "QRAY": 5, "QSTAB": 5,
              "QISECT": 4, "RETRO+": 5, "RETRO-": 2, "QRETRO": 6},
}
WARMUP_OP = {"search": "INSERT", "report": "INSERT", "maxima": "MINSERT",
             "geometry": "SEG+", "retro": "RETRO+", "mixed": "INSERT"}


@dataclass
class GenSpec:
    profile: str = "search"
    ops: int = 1000
    nodes: int = 64
    degree: int = 8
    shape: str = "random"
    keys: int = 1 << 32
    coords: int = 1000
    times: int = 1000
    warmup: int = 0
    mix: dict = field(default_factory=dict)


_SPEC_INTS = {"ops", "nodes", "degree", "keys", "coords", "times", "warmup"}


def parse_gen_spec(text):
    """``profile[:key=value,...]``; ``mix`` is ``OP=weight/OP=weight``."""
    profile, _, rest = text.partition(":")
    profile = profile.strip() or "search"
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    spec = GenSpec(profile=profile)
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, eq, v = item.partition("=")
        if not eq:
            raise ValueError(f"expected key=value, got {item!r}")
        k = k.strip()
        if k in _SPEC_INTS:
            setattr(spec, k, int(v))
        elif k == "shape":
            if v not in ("random", "path"):
                raise ValueError("shape must be random or path")
            spec.shape = v
        elif k == "mix":
            mix = {}
            for part in v.split("/"):
                name, _, w = part.partition("=")
                name = name.strip().upper()
                if name not in GRAMMAR:
                    raise ValueError(f"unknown operation {name!r} in mix")
                mix[name] = float(w)
            spec.mix = mix
        else:
            raise ValueError(f"unknown generator key {k!r}")
    if spec.nodes < 1 or spec.degree < 1 or spec.ops < 0 or spec.keys < 2:
        raise ValueError("generator sizes out of range")
    if spec.keys > 1 << 32:
        raise ValueError("keys must be below 2^32")
    return spec


class _GenState:
    def __init__(self, rng, spec, parents):
        self.rng = rng
        self.spec = spec
        self.parents = parents
        self.children = [[] for _ in parents]
        for v, p in enumerate(parents):
            if p >= 0:
                self.children[p].append(v)
        self.internal = [v for v, ch in enumerate(self.children) if ch]
        self.live = []              # (node, value) catalog keys
        self.mlive = []             # (value, node) maxima keys
        self.mset = set()
        self.segs = []
        self.next_seg = 1
        self.events = []
        self.next_eid = 1

    def ancestor(self, v):
        path = [v]
        while self.parents[path[-1]] >= 0:
            path.append(self.parents[path[-1]])
        return self.rng.choice(path)

    def value(self):
        return self.rng.randrange(self.spec.keys)

    def coord(self):
        return self.rng.randrange(self.spec.coords)

    def make(self, name):
        rng = self.rng
        n = len(self.parents)
        if name == "INSERT":
            v = rng.randrange(n)
            x = self.value()
            self.live.append((v, x))
            return Op(name, (v, x))
        if name == "DELETE":
            if not self.live:
                return None
            i = rng.randrange(len(self.live))
            self.live[i], self.live[-1] = self.live[-1], self.live[i]
            return Op(name, self.live.pop())
        if name == "QPRED":
            return Op(name, (rng.randrange(n), self.value()))
        if name == "QREPORT":
            v0 = rng.randrange(n)
            a, b = sorted((self.value(), self.value()))
            if rng.random() < 0.5:
                b = min(a + rng.randrange(1 + self.spec.keys // 64), self.spec.keys - 1)
            return Op(name, (v0, self.ancestor(v0), a, b))
        if name == "MINSERT":
            if not self.internal:
                return None
            v = rng.choice(self.internal)
            x = self.value()
            if (x, v) in self.mset:
                return None
            d = len(self.children[v])
            f = rng.randint(1, d)
            l = rng.randint(f, d)
            self.mset.add((x, v))
            self.mlive.append((x, v))
            return Op(name, (x, f, l, v))
        if name == "MDELETE":
            if not self.mlive:
                return None
            i = rng.randrange(len(self.mlive))
            self.mlive[i], self.mlive[-1] = self.mlive[-1], self.mlive[i]
            x, v = self.mlive.pop()
            self.mset.discard((x, v))
            return Op(name, (x, v))
        if name == "QMAX":
            v0 = rng.randrange(n)
            return Op(name, (v0, self.ancestor(v0)))
        if name == "SEG+":
            sid = self.next_seg
            self.next_seg += 1
            a, b = sorted((self.coord(), self.coord()))
            r = rng.random()
            if r < 0.03:
                a = -INF
            elif r < 0.06:
                b = INF
            y = self.value()
            self.segs.append(sid)
            if rng.random() < 0.5:
                return Op(name, (sid, a, b, y, self.value()))
            return Op(name, (sid, a, b, y))
        if name == "SEG-":
            if not self.segs:
                return None
            i = rng.randrange(len(self.segs))
            self.segs[i], self.segs[-1] = self.segs[-1], self.segs[i]
            return Op(name, (self.segs.pop(),))
        if name == "QRAY":
            return Op(name, (rng.randrange(-2, self.spec.coords + 2), self.value()))
        if name == "QSTAB":
            return Op(name, (rng.randrange(-2, self.spec.coords + 2),))
        if name == "QISECT":
            a, b = sorted((self.value(), self.value()))
            if rng.random() < 0.8:
                b = min(a + rng.randrange(1 + self.spec.keys // 64), self.spec.keys - 1)
            return Op(name, (rng.randrange(-2, self.spec.coords + 2), a, b))
        if name == "RETRO+":
            t1 = rng.randrange(self.spec.times)
            t2 = INF if rng.random() < 0.3 else rng.randint(t1 + 1, self.spec.times)
            self.events.append(self.next_eid)
            self.next_eid += 1
            return Op(name, (self.value(), t1, t2))
        if name == "RETRO-":
            if not self.events:
                return None
            i = rng.randrange(len(self.events))
            self.events[i], self.events[-1] = self.events[-1], self.events[i]
            return Op(name, (self.events.pop(),))
        if name == "QRETRO":
            return Op(name, (self.value(), rng.randrange(-1, self.spec.times + 1)))
        raise ValueError(name)


def generate(spec, seed):
    """Deterministic trace for ``spec`` (a :class:`GenSpec` or spec string) and ``seed``."""
    if isinstance(spec, str):
        spec = parse_gen_spec(spec)
    rng = random.Random(seed)
    parents = random_tree(rng, spec.nodes, spec.degree, spec.shape)
    st = _GenState(rng, spec, parents)
    mix = spec.mix or PROFILES[spec.profile]
    names = list(mix)
    weights = [mix[k] for k in names]
    ops = []
    warm = WARMUP_OP[spec.profile]
    for _ in range(spec.warmup):
        op = st.make(warm)
        if op is not None:
            ops.append(op)
    while len(ops) < spec.warmup + spec.ops:
        op = st.make(rng.choices(names, weights)[0])
        if op is not None:
            ops.append(op)
    return Trace(parents, ops)


# differential runner

@dataclass
class RunParams:
    """Structure parameters for a differential run."""

    B: Optional[int] = None
    G: Optional[int] = None
    c: int = 4
    d: Optional[int] = None
    fanout: Optional[int] = None
    d_max: int = 8
    locator: str = "bitset"
    capacity: Optional[int] = None
    audit_every: int = 1000
    faults: Tuple[str, ...] = ()
    stop_on_first: bool = False


@dataclass
class Report:
    ops: dict = field(default_factory=dict)
    skipped: int = 0
    executed: int = 0
    mismatches: list = field(default_factory=list)
    audit_failures: list = field(default_factory=list)
    audits: int = 0
    stats: dict = field(default_factory=dict)
    aborted: Optional[str] = None

    @property
    def ok(self):
        return not self.mismatches and not self.audit_failures and self.aborted is None

    @property
    def first_failure(self):
        """Index of the first op at which a failure surfaced, or None."""
        idx = [m[0] for m in self.mismatches] + [a[0] for a in self.audit_failures]
        return min(idx) if idx else None

    def as_dict(self):
        return {
            "ok": self.ok, "executed": self.executed, "skipped": self.skipped,
            "ops": dict(sorted(self.ops.items())), "audits": self.audits,
            "mismatches": self.mismatches, "audit_failures": self.audit_failures,
            "aborted": self.aborted, "stats": self.stats,
        }

    def format(self, limit=10):
        lines = [f"result: {'OK' if self.ok else 'FAIL'}",
                 f"executed: {self.executed}  skipped: {self.skipped}  audits: {self.audits}",
                 "ops: " + " ".join(f"{k}={v}" for k, v in sorted(self.ops.items()))]
        for k, v in self.stats.items():
            lines.append(f"stat {k}: {v:.4f}" if isinstance(v, float) else f"stat {k}: {v}")
        lines.append(f"mismatches: {len(self.mismatches)}")
        for i, op, want, got in self.mismatches[:limit]:
            lines.append(f"  op {i} [{op}]: expected {want!r}, got {got!r}")
        lines.append(f"audit failures: {len(self.audit_failures)}")
        for i, msg in self.audit_failures[:limit]:
            lines.append(f"  after op {i}: {msg}")
        if self.aborted:
            lines.append(f"aborted: {self.aborted}")
        return "\n".join(lines)


class Differential:
    """Applies one trace to the structures and to an :class:`OracleWorld` in lockstep."""

    def __init__(self, parents, params=None):
        self.params = params or RunParams()
        self.parents = list(parents) if parents is not None else [-1]
        self.world = OracleWorld(self.parents)
        self.report = Report()
        self._cat = self._searcher = self._mt = None
        self._geo = None
        self._retro = None
        self.next_id = 0
        self.ids = {}           # (node, value) -> ids of live keys, oldest first
        self.since_audit = 0
        self.qpred_nodes = 0
        self.qpred_count = 0
        self.counters = SearchCounters()

    # structure construction on first use

    @property
    def cat(self):
        if self._cat is None:
            p = self.params
            self._cat = CatalogTree(self.parents, B=p.B, G=p.G, c=p.c, d=p.d,
                                    capacity=p.capacity, locator=p.locator,
                                    faults=[f for f in p.faults if f != "skip_rerank"])
            self._searcher = PathSearcher(self._cat, self.counters)
        return self._cat

    @property
    def mt(self):
        if self._mt is None:
            deg = max((self.world.children[v].__len__() for v in range(len(self.parents))), default=0)
            self._mt = MaximaTree(self.parents, d_max=max(self.params.d_max, deg),
                                  faults=[f for f in self.params.faults if f == "skip_rerank"])
        return self._mt

    def _geo_params(self):
        p = self.params
        return {"fanout": p.fanout, "capacity": p.capacity, "B": p.B, "G": p.G, "c": p.c,
                "locator": p.locator}

    @property
    def geo(self):
        if self._geo is None:
            gp = self._geo_params()
            cat_faults = [f for f in self.params.faults if f != "skip_rerank"]
            self._geo = (
                SegmentStore(faults=cat_faults, **gp),
                StabMax("A", fanout=self.params.fanout, capacity=self.params.capacity,
                        d_max=self.params.d_max,
                        faults=[f for f in self.params.faults if f == "skip_rerank"]),
                StabMax("B", faults=cat_faults, **gp),
            )
        return self._geo

    @property
    def retro(self):
        if self._retro is None:
            self._retro = RetroactiveSearch(**self._geo_params())
        return self._retro

    # execution

    def run(self, ops):
        last = -1
        for i, op in enumerate(ops):
            last = i
            if not self.step(i, op):
                break
        self.final_audit(last)
        self._finish()
        return self.report

    def step(self, i, op):
        rep = self.report
        try:
            done = getattr(self, "_op_" + op.name.replace("+", "_add").replace("-", "_del"))(i, op)
        except Exception as exc:  # a crash inside a structure is a localized failure
            rep.mismatches.append((i, str(op), "no exception", f"{type(exc).__name__}: {exc}"))
            rep.aborted = f"exception at op {i}"
            return False
        if done is False:
            rep.skipped += 1
        else:
            rep.executed += 1
            rep.ops[op.name] = rep.ops.get(op.name, 0) + 1
        if op.name in UPDATES and done is not False:
            self.since_audit += 1
            if self.params.audit_every and self.since_audit >= self.params.audit_every:
                self.audit(i)
        if self.params.stop_on_first and not rep.ok:
            return False
        return True

    def _check(self, i, op, want, got):
        if want != got:
            self.report.mismatches.append((i, str(op), want, got))

    def _node_ok(self, *vs):
        return all(0 <= v < len(self.parents) for v in vs)

    def _op_INSERT(self, i, op):
        v, x = op.args
        if not self._node_ok(v) or not 0 <= x < 1 << 32:
            return False
        key = Key(x, self.next_id)
        self.next_id += 1
        self.cat.insert(key, v)
        self.world.insert(tuple(key), v)
        self.ids.setdefault((v, x), []).append(key.id)

    def _op_DELETE(self, i, op):
        v, x = op.args
        lst = self.ids.get((v, x))
        if not lst:
            return False
        key = Key(x, lst.pop(0))
        self.cat.delete(key, v)
        self.world.delete(tuple(key), v)

    def _op_QPRED(self, i, op):
        v, x = op.args
        if not self._node_ok(v):
            return False
        before = self.counters.locator_queries
        got = tuple(self.searcher.path_predecessor(x, v))
        edges = self.counters.locator_queries - before
        plen = len(self.world.path(v))
        self.qpred_nodes += plen
        self.qpred_count += 1
        if edges != plen - 1:
            self.report.mismatches.append((i, str(op), f"{plen - 1} locator queries", edges))
        p, po, s, so = self.world.oracle_path_pred(x, v)
        self._check(i, op, (p, po, s, so), got)

    @property
    def searcher(self):
        self.cat
        return self._searcher

    def _op_QREPORT(self, i, op):
        v0, v1, xl, xh = op.args
        if not self._node_ok(v0, v1) or xl > xh or v1 not in self.world.path(v0):
            return False
        got = sorted((tuple(k), v) for k, v in self.searcher.path_report(xl, xh, v0, v1))
        self._check(i, op, self.world.oracle_path_report(xl, xh, v0, v1), got)

    def _op_MINSERT(self, i, op):
        x, f, l, v = op.args
        if not self._node_ok(v) or (Key(x, 0), v) in self.world.intervals:
            return False
        if not 1 <= f <= l <= len(self.world.children[v]) or not 0 <= x < 1 << 32:
            return False
        self.mt.minsert(Key(x, 0), f, l, v)
        self.world.minsert(Key(x, 0), f, l, v)

    def _op_MDELETE(self, i, op):
        x, v = op.args
        if (Key(x, 0), v) not in self.world.intervals:
            return False
        self.mt.mdelete(Key(x, 0), v)
        self.world.mdelete(Key(x, 0), v)

    def _op_QMAX(self, i, op):
        v0, v1 = op.args
        if not self._node_ok(v0, v1) or v1 not in self.world.path(v0):
            return False
        got = [(v, None if m is None else m.key) for v, m in self.mt.path_maxima(v0, v1)]
        want = self.world.oracle_path_maxima(v0, v1)
        # the root's catalog lives nowhere and is empty by definition
        self._check(i, op, want, got)

    def _op_SEG_add(self, i, op):
        sid, xl, xr, y = op.args[:4]
        p = op.args[4] if len(op.args) > 4 else y
        if sid in self.world.segments or not 0 <= sid < 1 << 24:
            return False
        if not xl <= xr or xl == INF or xr == -INF:
            return False
        if not (0 <= y < 1 << 32 and 0 <= p < 1 << 32):
            return False
        seg = HSegment(xl, xr, y, sid, p)
        for s in self.geo:
            s.insert_segment(seg)
        self.world.add_segment(seg)

    def _op_SEG_del(self, i, op):
        (sid,) = op.args
        if sid not in self.world.segments:
            return False
        for s in self.geo:
            s.delete_segment(sid)
        self.world.remove_segment(sid)

    def _op_QRAY(self, i, op):
        x, y = op.args
        st = self.geo[0]
        got = st.ray_shoot(x, y)
        self._check(i, op, self.world.oracle_ray_shoot(x, y), None if got is None else got.id)
        got = st.ray_shoot_above(x, y)
        self._check(i, Op("QRAY-UP", op.args), self.world.oracle_ray_shoot_above(x, y),
                    None if got is None else got.id)

    def _op_QSTAB(self, i, op):
        (x,) = op.args
        _, a, b = self.geo
        want = self.world.oracle_stab_max(x)
        ra, rb = a.stab_max_query(x), b.stab_max_query(x)
        self._check(i, Op("QSTAB-A", op.args), want, None if ra is None else ra[0].id)
        self._check(i, Op("QSTAB-B", op.args), want, None if rb is None else rb[0].id)

    def _op_QISECT(self, i, op):
        x, y1, y2 = op.args
        if y1 > y2:
            return False
        got = sorted(s.id for s in self.geo[0].segment_intersections(x, y1, y2))
        self._check(i, op, self.world.oracle_intersections(x, y1, y2), got)

    def _op_RETRO_add(self, i, op):
        key, t1, t2 = op.args
        if not 0 <= key < 1 << 32 or not t1 < t2 or t1 in (INF, -INF):
            return False
        eid = self.retro.retro_insert(key, t1, t2)
        self.world.retro_insert(eid, key, t1, t2)

    def _op_RETRO_del(self, i, op):
        (eid,) = op.args
        if eid not in self.world.events:
            return False
        self.retro.retro_delete(eid)
        self.world.retro_delete(eid)

    def _op_QRETRO(self, i, op):
        q, t = op.args
        self._check(i, op, self.world.oracle_retro(q, t), self.retro.retro_query(q, t))

    # audits

    def audit(self, i):
        self.since_audit = 0
        self.report.audits += 1
        msgs = []
        if self._cat is not None:
            msgs += self._cat.audit(deep=True)
            msgs += self._catalog_vs_world()
        if self._mt is not None:
            msgs += ["maxima: " + m for m in self._mt.audit()]
        if self._geo is not None:
            for s in (self._geo[0], self._geo[2]):
                msgs += ["geometry: " + m for m in s.audit()]
            msgs += ["stab-max A: " + m for m in self._geo[1].audit()]
        if self._retro is not None:
            msgs += ["retro: " + m for m in self._retro.audit()]
        for m in msgs:
            self.report.audit_failures.append((i, m))

    def _catalog_vs_world(self):
        out = []
        for v in range(len(self.parents)):
            if [tuple(k) for k in self._cat.catalog(v)] != self.world.catalogs[v]:
                out.append(f"node {v}: catalog contents differ from the oracle")
        return out

    def final_audit(self, i):
        if self.report.aborted is None and self.since_audit:
            self.audit(i)

    def _finish(self):
        st = {}
        c = self.counters
        if c.queries:
            st["queries"] = c.queries
            st["nodes_per_query"] = c.nodes / c.queries
            st["locator_queries_per_query"] = c.locator_queries / c.queries
            st["comparisons_per_query"] = c.comparisons / c.queries
            st["entries_touched_per_node"] = c.entries_touched / max(c.nodes, 1)
            st["group_probes_per_node"] = c.group_probes / max(c.nodes, 1)
        if self._cat is not None:
            sp = self._cat.space()
            st["catalog_keys"] = sp["proper"]
            st["rebuilds"] = self._cat.rebuilds
            st["block_size"] = self._cat.B
            st["group_size"] = self._cat.G
        self.report.stats = st


def run_differential(trace, params=None, **overrides):
    """Run ``trace`` (a :class:`Trace`) against the oracle; returns a :class:`Report`."""
    if params is None:
        params = RunParams(**overrides)
    elif overrides:
        params = RunParams(**{**params.__dict__, **overrides})
    return Differential(trace.parents, params).run(trace.ops)


# shrinking

def _fails(parents, ops, params):
    return not run_differential(Trace(parents, ops), params).ok


def _smaller_args(op):
    """Candidate argument tweaks that keep the op well formed, smallest first."""
    out = []
    for j, a in enumerate(op.args):
        if a in (INF, -INF) or not isinstance(a, int):
            continue
        for b in (0, a // 2, a - 1):
            if 0 <= b < a:
                args = op.args[:j] + (b,) + op.args[j + 1:]
                out.append(Op(op.name, args))
    return out


def shrink(trace, params=None, max_runs=2000):
    """Greedy minimal failing trace: drop operations, then shrink arguments.

    ``params`` should use a small ``audit_every`` (default 1) so audit
    failures surface next to their cause.
    """
    params = params or RunParams(audit_every=1, stop_on_first=True)
    parents = trace.parents
    ops = list(trace.ops)
    if not _fails(parents, ops, params):
        raise ValueError("trace does not fail")
    runs = 0
    # cut everything after the first failure
    rep = run_differential(Trace(parents, ops), params)
    if rep.first_failure is not None:
        ops = ops[:rep.first_failure + 1]
    chunk = max(1, len(ops) // 2)
    while chunk >= 1 and runs < max_runs:
        i = 0
        removed = False
        while i < len(ops) and runs < max_runs:
            cand = ops[:i] + ops[i + chunk:]
            runs += 1
            if cand and _fails(parents, cand, params):
                ops = cand
                removed = True
            else:
                i += chunk
        if not removed:
            chunk //= 2
    changed = True
    while changed and runs < max_runs:
        changed = False
        for i in range(len(ops)):
            for cand_op in _smaller_args(ops[i]):
                runs += 1
                cand = ops[:i] + [cand_op] + ops[i + 1:]
                if _fails(parents, cand, params):
                    ops = cand
                    changed = True
                    break
    return Trace(parents, ops)
