"""Brute-force reference answers.

Nothing here touches the library's query code: per-node key lists are plain
sorted Python lists, and the geometric oracles scan numpy arrays holding
every live segment or event.
"""
from bisect import bisect_left, bisect_right, insort

import numpy as np

INF = float("inf")
_BIG = int(np.iinfo(np.int64).max)
_SMALL = int(np.iinfo(np.int64).min)


def _coord(x):
    if x == INF:
        return _BIG
    if x == -INF:
        return _SMALL
    return int(x)


class OracleWorld:
    """Explicit state mirrored from the same operation trace as the structures."""

    def __init__(self, parents):
        self.parents = [None if p is None or p == -1 else p for p in parents]
        self.children = [[] for _ in self.parents]
        for v, p in enumerate(self.parents):
            if p is not None:
                self.children[p].append(v)
        self.catalogs = [[] for _ in self.parents]   # sorted packed keys (value, id) tuples
        self.child_keys = {}                         # node -> sorted key tuples (maxima catalogs)
        self.intervals = {}                          # (key, v) -> (f, l)
        self.segments = {}
        self.events = {}
        self._segs = _Table(5)
        self._events = _Table(3)

    # path helpers

    def path(self, v0, v1=None):
        out = []
        v = v0
        while v is not None:
            out.append(v)
            if v == v1:
                return out
            v = self.parents[v]
        if v1 is not None:
            raise ValueError(f"{v1} is not an ancestor of {v0}")
        return out

    # catalogs

    def insert(self, key, v):
        insort(self.catalogs[v], key)

    def delete(self, key, v):
        lst = self.catalogs[v]
        del lst[bisect_left(lst, key)]

    def oracle_path_pred(self, x, v0):
        """(pred, pred_owner, succ, succ_owner) with the library's tie rule."""
        best_p = best_s = None
        for v in self.path(v0):
            lst = self.catalogs[v]
            i = bisect_right(lst, (x, INF)) - 1
            if i >= 0 and (best_p is None or lst[i] > best_p[0]):
                best_p = (lst[i], v)
            j = i + 1
            if j < len(lst) and (best_s is None or lst[j] < best_s[0]):
                best_s = (lst[j], v)
        if best_p is not None and best_p[0][0] == x:
            best_s = best_p
        p, po = best_p if best_p else (None, None)
        s, so = best_s if best_s else (None, None)
        return p, po, s, so

    def oracle_path_report(self, x_lo, x_hi, v0, v1):
        out = []
        for v in self.path(v0, v1):
            for k in self.catalogs[v]:
                if x_lo <= k[0] <= x_hi:
                    out.append((k, v))
        return sorted(out)

    # maxima

    def minsert(self, key, f, l, v):
        self.intervals[(key, v)] = (f, l)
        kids = self.children[v]
        for i in range(f, l + 1):
            insort(self.child_keys.setdefault(kids[i - 1], []), key)

    def mdelete(self, key, v):
        f, l = self.intervals.pop((key, v))
        kids = self.children[v]
        for i in range(f, l + 1):
            lst = self.child_keys[kids[i - 1]]
            del lst[bisect_left(lst, key)]

    def oracle_path_maxima(self, v0, v1):
        out = []
        for v in self.path(v0, v1):
            lst = self.child_keys.get(v)
            out.append((v, lst[-1] if lst else None))
        return out

    def oracle_stab_pred(self, v, q, x1, x2):
        """Largest key at ``v`` with key <= q (value <= q for a bare int) meeting [x1, x2]."""
        best = None
        for (key, u), (f, l) in self.intervals.items():
            below = key[0] <= q if isinstance(q, int) else tuple(key) <= tuple(q)
            if u == v and below and f <= x2 and x1 <= l:
                if best is None or key > best:
                    best = key
        return best

    # segments

    def add_segment(self, seg):
        p = seg.y if seg.p is None else seg.p
        self.segments[seg.id] = seg
        self._segs.add(seg.id, (_coord(seg.x_left), _coord(seg.x_right), seg.y, seg.id, p))

    def remove_segment(self, seg_id):
        del self.segments[seg_id]
        self._segs.remove(seg_id)

    def _stabbed(self, x):
        xl, xr, y, ids, p = self._segs.view()
        return (xl <= x) & (x <= xr), y, ids, p

    def oracle_ray_shoot(self, qx, qy, strict=False):
        """Id of the highest segment at or below (strictly below) the point; ties to the larger id."""
        limit = qy - 1 if strict else qy
        if limit < 0:
            return None
        m, y, ids, _ = self._stabbed(qx)
        m &= y <= limit
        return _pick(y, ids, m, True)

    def oracle_ray_shoot_above(self, qx, qy, strict=False):
        """Id of the lowest segment at or above the point; ties to the smaller id."""
        m, y, ids, _ = self._stabbed(qx)
        m &= y >= (qy + 1 if strict else qy)
        return _pick(y, ids, m, False)

    def oracle_stab_max(self, x):
        """Id of the stabbed segment with the highest priority; ties to the larger id."""
        m, _, ids, p = self._stabbed(x)
        return _pick(p, ids, m, True)

    def oracle_intersections(self, xq, y1, y2):
        m, y, ids, _ = self._stabbed(xq)
        m &= (y >= y1) & (y <= y2)
        return sorted(int(i) for i in ids[m])

    # retroactive timeline

    def retro_insert(self, eid, key, t_ins, t_del):
        self.events[eid] = (key, t_ins, t_del)
        self._events.add(eid, (key, t_ins, _coord(t_del)))

    def retro_delete(self, eid):
        del self.events[eid]
        self._events.remove(eid)

    def oracle_retro(self, q, t):
        """Largest key <= q alive at time t (alive on [t_ins, t_del))."""
        keys, ta, tb = self._events.view()
        m = (ta <= t) & (t < tb) & (keys <= q)
        if not m.any():
            return None
        return int(keys[m].max())


def _pick(primary, ids, mask, largest):
    """Id of the row with the extreme (primary, id) pair among ``mask``."""
    if not mask.any():
        return None
    vals = primary[mask]
    best = vals.max() if largest else vals.min()
    cand = ids[mask][vals == best]
    return int(cand.max() if largest else cand.min())


class _Table:
    """Columns of int64 rows addressed by an external id; swap-remove on delete."""

    def __init__(self, width):
        self.cols = np.zeros((width, 16), dtype=np.int64)
        self.n = 0
        self.slot = {}
        self.owner = []

    def add(self, rid, row):
        if self.n == self.cols.shape[1]:
            self.cols = np.concatenate([self.cols, np.zeros_like(self.cols)], axis=1)
        self.cols[:, self.n] = row
        self.slot[rid] = self.n
        self.owner.append(rid)
        self.n += 1

    def remove(self, rid):
        i = self.slot.pop(rid)
        last = self.n - 1
        if i != last:
            self.cols[:, i] = self.cols[:, last]
            moved = self.owner[last]
            self.owner[i] = moved
            self.slot[moved] = i
        self.owner.pop()
        self.n = last

    def view(self):
        return tuple(self.cols[:, :self.n])
