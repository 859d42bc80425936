"""Flat ``key=value`` configuration for the command-line tools."""
from dataclasses import dataclass, fields
from typing import Optional, Tuple

from .locator import BACKENDS

FAULT_NAMES = ("skip_bridge", "skip_label_split", "skip_rerank")
SHAPES = ("broom", "random", "path")
WORKLOADS = ("qpred", "qreport")


@dataclass
class BenchConfig:
    """Structure parameters, workload description and output path.

    ``None`` for ``B``, ``G``, ``d`` or ``fanout`` means "derive from sizes".
    """

    B: Optional[int] = None
    G: Optional[int] = None
    c: int = 4
    d: Optional[int] = None
    fanout: Optional[int] = None
    d_max: int = 8
    locator: str = "bitset"
    # workload
    n: int = 100000
    queries: int = 10000
    depth: int = 20
    nodes: int = 64
    degree: int = 8
    shape: str = "broom"
    keys: int = 1 << 32
    workloads: Tuple[str, ...] = WORKLOADS
    report_width: int = 1 << 20
    seed: int = 1
    # verification
    ops: int = 100000
    audit_every: int = 1000
    faults: Tuple[str, ...] = ()
    out: Optional[str] = None

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ValueError(msg)

        need(self.B is None or self.B >= 2, "B must be >= 2")
        need(self.G is None or self.G >= 1, "G must be >= 1")
        need(self.c >= 1, "c must be >= 1")
        need(self.d is None or self.d >= 1, "d must be >= 1")
        need(self.fanout is None or self.fanout >= 2, "fanout must be >= 2")
        need(3 <= self.d_max <= 64, "d_max must be in [3, 64]")
        need(self.locator in BACKENDS, f"locator must be one of {sorted(BACKENDS)}")
        need(self.n >= 1 and self.queries >= 1, "n and queries must be positive")
        need(self.depth >= 1 and self.nodes >= 1 and self.degree >= 1, "tree sizes must be positive")
        need(self.shape in SHAPES, f"shape must be one of {SHAPES}")
        need(2 <= self.keys <= 1 << 32, "keys must be in [2, 2^32]")
        need(all(w in WORKLOADS for w in self.workloads), f"workloads must be drawn from {WORKLOADS}")
        need(self.report_width >= 0, "report_width must be >= 0")
        need(self.ops >= 0 and self.audit_every >= 0, "ops and audit_every must be >= 0")
        need(all(f in FAULT_NAMES for f in self.faults), f"faults must be drawn from {FAULT_NAMES}")
        return self

    def items(self):
        """Settings as ``(key, text)`` pairs, in declaration order."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(v)
            out.append((f.name, "" if v is None else str(v)))
        return out


def _opt_int(text):
    text = text.strip()
    return None if text.lower() in ("", "auto", "none") else int(text)


def _tuple(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


_PARSERS = {
    "B": _opt_int, "G": _opt_int, "d": _opt_int, "fanout": _opt_int,
    "c": int, "d_max": int, "n": int, "queries": int, "depth": int, "nodes": int,
    "degree": int, "keys": int, "report_width": int, "seed": int, "ops": int,
    "audit_every": int,
    "locator": str.strip, "shape": str.strip, "out": lambda s: s.strip() or None,
    "workloads": _tuple, "faults": _tuple,
}


def parse_config(text):
    """Parse ``key=value`` lines (``#`` comments allowed) into a validated :class:`BenchConfig`."""
    cfg = BenchConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip()
        if not eq:
            raise ValueError(f"config line {lineno}: expected key=value")
        if key not in _PARSERS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            setattr(cfg, key, _PARSERS[key](val))
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: {exc}") from None
    return cfg.validate()


def load_config(path):
    if path is None:
        return BenchConfig().validate()
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
