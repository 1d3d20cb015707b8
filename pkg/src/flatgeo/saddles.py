"""Saddle-connection enumeration by developing-map sector search.

From each corner of the cone point we develop the surface into the plane
(gluings are translations, so every developed polygon is a translated copy
of its chart) and run a breadth search over angular sectors: a node is a
developed polygon together with the sector of directions whose rays enter
it through the current portal edge.  Polygon vertices inside the sector are
developed copies of the cone point: each visible one is a saddle connection,
and its ray blocks everything behind it, splitting the sector.  Sector
bounds, membership and the length cutoff are all exact, so the enumeration
is a complete list of saddle connections of length <= L, one per direction.

Identifiers are ranks in the (length, departure)-sorted order, so they are
stable under increasing L: the enumeration at L' <= L is an exact prefix.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import sqrt

from .errors import LimitExceeded
from .exactnum import Quad, Vec, cross, dot_sign, norm_sq, same_ray, v_neg, v_sub
from .surface import ConeCoord, FlatSurface, format_coord


@dataclass(frozen=True)
class SaddleConnection:
    """A directed flat geodesic segment from the cone point to itself."""

    id: int
    holonomy: Vec
    length_sq: Quad
    dep: ConeCoord
    arr: ConeCoord  # inward direction at the endpoint (= dep of the reverse)
    crossing_word: tuple
    reverse_id: int

    @property
    def length(self) -> float:
        return sqrt(self.length_sq.to_float())

    def __repr__(self):
        hx, hy = self.holonomy
        return f"SC#{self.id}(hol=({hx!r},{hy!r}), dep@{self.dep.corner})"


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0
        self._lock = threading.Lock()

    def spend(self, n: int = 1):
        with self._lock:
            self.used += n
            if self.used > self.limit:
                raise LimitExceeded(
                    f"enumeration exceeded the node budget of {self.limit}"
                )


def _in_sector(w: Vec, lo: Vec, hi: Vec, lo_closed: bool) -> bool:
    s1 = cross(lo, w)
    if s1 < 0:
        return False
    if s1 == 0:
        return lo_closed and dot_sign(lo, w) > 0
    return cross(w, hi) > 0


def _seg_dist_sq(a: Vec, b: Vec) -> Quad:
    """Exact squared distance from the origin to segment [a, b]."""
    ab = v_sub(b, a)
    denom = norm_sq(ab)
    num = -(a[0] * ab[0] + a[1] * ab[1])  # t* = num/denom
    if num.sign() <= 0:
        return norm_sq(a)
    if (num - denom).sign() >= 0:
        return norm_sq(b)
    # |a|^2 - num^2/denom
    return norm_sq(a) - num * num / denom


def _scan_root(surface: FlatSurface, root: int, L_sq: Quad, budget: _Budget, reverse_edges: bool):
    """Depth-first sector search from one corner; yields raw hits
    (holonomy, crossing_word, final_corner)."""
    p0, i0 = surface.corners[root]
    poly0 = surface.polygons[p0]
    origin = poly0[i0]
    o0 = (-origin[0], -origin[1])
    lo0 = surface.corner_d1(root)
    hi0 = surface.corner_d2(root)
    hits = []
    # stack entries: (polygon, offset, lo, hi, lo_closed, entry_edge, word)
    stack = [(p0, o0, lo0, hi0, True, None, ())]
    while stack:
        p, o, lo, hi, lo_closed, entry, word = stack.pop()
        budget.spend()
        poly = surface.polygons[p]
        n = len(poly)
        dev = [(poly[j][0] + o[0], poly[j][1] + o[1]) for j in range(n)]
        # vertex events: developed cone-point copies inside the sector
        events = []
        for j in range(n):
            w = dev[j]
            if w[0].is_zero() and w[1].is_zero():
                continue
            if _in_sector(w, lo, hi, lo_closed):
                events.append((j, w))
        events.sort(key=cmp_to_key(lambda e1, e2: -cross(e1[1], e2[1])))
        visible = []
        for j, w in events:
            if visible and same_ray(visible[-1][1], w):
                continue  # a nearer vertex on the same ray blocks this one
            visible.append((j, w))
        for j, w in visible:
            if (norm_sq(w) - L_sq).sign() <= 0:
                hits.append((w, word, (p, j)))
        # recurse through far-side edges; vertex rays are span endpoints,
        # so the open-span clips exclude them automatically
        edge_range = range(n - 1, -1, -1) if reverse_edges else range(n)
        for e in edge_range:
            if e == entry:
                continue
            a, b = dev[e], dev[(e + 1) % n]
            if (a[0].is_zero() and a[1].is_zero()) or (b[0].is_zero() and b[1].is_zero()):
                continue
            if cross(a, b) <= 0:
                continue  # near side, or seen edge-on
            # clip [lo, hi) against the open span (a, b)
            if cross(a, lo) > 0 and cross(lo, b) > 0:
                clo, cclosed = lo, lo_closed
            else:
                s1 = cross(lo, a)
                if (s1 > 0 and cross(a, hi) > 0) or (s1 == 0 and dot_sign(lo, a) > 0):
                    clo, cclosed = a, False
                else:
                    continue
            if cross(a, hi) > 0 and cross(hi, b) > 0:
                chi = hi
            elif cross(lo, b) > 0 and cross(b, hi) >= 0:
                chi = b
            else:
                continue
            if cross(clo, chi) <= 0:
                continue
            if (_seg_dist_sq(a, b) - L_sq).sign() > 0:
                continue  # portal already beyond the length cutoff
            q, f = surface.gluings[(p, e)]
            qpoly = surface.polygons[q]
            anchor = qpoly[(f + 1) % len(qpoly)]
            o2 = (o[0] + poly[e][0] - anchor[0], o[1] + poly[e][1] - anchor[1])
            stack.append((q, o2, clo, chi, cclosed, f, word + ((p, e),)))
    return hits


def _sc_sort_cmp(surface: FlatSurface):
    def cmp(x, y):
        s = (x[0] - y[0]).sign()  # length_sq
        if s:
            return s
        if x[1] != y[1]:  # departure corner
            return -1 if x[1] < y[1] else 1
        return -cross(x[2], y[2])

    return cmp


def enumerate_saddle_connections(
    surface: FlatSurface,
    L,
    node_budget: int = 10_000_000,
    workers: int = 1,
    traversal: str = "sorted",
):
    """All directed saddle connections of length <= L, sorted by
    (squared length, departure coordinate), ids equal to ranks.

    Results are cached per (surface, L).  Raises LimitExceeded when the
    sector search expands more than ``node_budget`` nodes.
    """
    L = Fraction(L)
    cache = surface._caches.setdefault("saddle", {})
    if L in cache:
        return cache[L]
    L_sq = Quad.of(L * L, surface.disc)
    budget = _Budget(node_budget)
    reverse_edges = traversal == "reversed"
    roots = list(range(surface.n_corners))
    if reverse_edges:
        roots.reverse()

    raw = []
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        def run(root):
            return root, _scan_root(surface, root, L_sq, budget, reverse_edges)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for root, hits in pool.map(run, roots):
                raw.extend((root, h) for h in hits)
    else:
        for root in roots:
            raw.extend((root, h) for h in _scan_root(surface, root, L_sq, budget, reverse_edges))

    entries = []
    for root, (w, word, final) in raw:
        entries.append((norm_sq(w), root, w, word, final))
    entries.sort(key=cmp_to_key(_sc_sort_cmp(surface)))

    # pair each connection with its reverse: the reverse departs at this
    # one's arrival corner with the opposite holonomy
    by_key = {}
    arrs = []
    for idx, (lsq, root, w, word, final) in enumerate(entries):
        q, j = final
        arr = surface.coord(surface.corner_pos[(q, j)], v_neg(w))
        arrs.append(arr)
        key = (root, w)
        if key in by_key:
            raise AssertionError(f"duplicate saddle connection at {key}")
        by_key[key] = idx
    out = []
    for idx, (lsq, root, w, word, final) in enumerate(entries):
        arr = arrs[idx]
        rev = by_key.get((arr.corner, v_neg(w)))
        if rev is None:
            raise AssertionError(
                f"missing reverse of saddle connection #{idx} (hol {w})"
            )
        out.append(
            SaddleConnection(
                id=idx,
                holonomy=w,
                length_sq=lsq,
                dep=ConeCoord(root, w),
                arr=arr,
                crossing_word=word,
                reverse_id=rev,
            )
        )
    result = tuple(out)
    for sc in result:
        if result[sc.reverse_id].reverse_id != sc.id:
            raise AssertionError("orientation reversal is not an involution")
    cache[L] = result
    return result


def chart_pieces(surface: FlatSurface, sc: SaddleConnection):
    """Per-polygon pieces of the developed segment, in chart coordinates.

    Returns a list of (polygon, chart_start, chart_end, t_start, t_end)
    with exact parameters t along the segment (t in [0, 1]).
    """
    cache = surface._caches.setdefault("pieces", {})
    key = (sc.dep.corner, sc.holonomy)
    if key in cache:
        return cache[key]
    p, i = surface.corners[sc.dep.corner]
    poly = surface.polygons[p]
    o = (-poly[i][0], -poly[i][1])
    w = sc.holonomy
    one = Quad.of(1, surface.disc)
    t_prev = Quad.of(0, surface.disc)
    pieces = []
    for (pp, e) in sc.crossing_word:
        assert pp == p, "crossing word inconsistent with the developing walk"
        poly = surface.polygons[p]
        n = len(poly)
        a = (poly[e][0] + o[0], poly[e][1] + o[1])
        b = (poly[(e + 1) % n][0] + o[0], poly[(e + 1) % n][1] + o[1])
        ab = v_sub(b, a)
        denom = w[0] * ab[1] - w[1] * ab[0]
        t = (a[0] * ab[1] - a[1] * ab[0]) / denom
        pieces.append(
            (p,
             (w[0] * t_prev - o[0], w[1] * t_prev - o[1]),
             (w[0] * t - o[0], w[1] * t - o[1]),
             t_prev, t)
        )
        q, f = surface.gluings[(p, e)]
        qpoly = surface.polygons[q]
        anchor = qpoly[(f + 1) % len(qpoly)]
        o = (o[0] + poly[e][0] - anchor[0], o[1] + poly[e][1] - anchor[1])
        p = q
        t_prev = t
    pieces.append(
        (p,
         (w[0] * t_prev - o[0], w[1] * t_prev - o[1]),
         (w[0] * one - o[0], w[1] * one - o[1]),
         t_prev, one)
    )
    cache[key] = pieces
    return pieces


def retrace_holonomy(surface: FlatSurface, sc: SaddleConnection) -> bool:
    """Self-consistency: developing along the crossing word ends at the
    holonomy vector (the final chart point is a polygon vertex)."""
    pieces = chart_pieces(surface, sc)
    p, end, _ = pieces[-1][0], pieces[-1][2], None
    return any(
        (end[0] - vx).is_zero() and (end[1] - vy).is_zero()
        for (vx, vy) in surface.polygons[p]
    )


def saddle_growth(surface: FlatSurface, L_grid, node_budget: int = 10_000_000):
    """Counts of saddle connections per cutoff and the fitted quadratic
    constant b0 = max count / L^2 over the grid."""
    grid = [Fraction(L) for L in L_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("L grid must be nonempty and strictly increasing")
    rows = []
    b0 = 0.0
    for L in grid:
        count = len(enumerate_saddle_connections(surface, L, node_budget=node_budget))
        ratio = count / float(L * L)
        b0 = max(b0, ratio)
        rows.append({"L": float(L), "count": count, "count_over_L2": ratio})
    return {"rows": rows, "b0": b0}


def saddle_csv_rows(surface: FlatSurface, connections):
    """CSV dump rows: exact holonomy strings plus derived float length."""
    header = ["id", "hol_x", "hol_y", "length", "departure_index", "arrival_index", "reverse_id"]
    rows = [header]
    for sc in connections:
        rows.append([
            str(sc.id),
            format_coord(sc.holonomy[0]),
            format_coord(sc.holonomy[1]),
            f"{sc.length:.17g}",
            str(sc.dep.corner),
            str(sc.arr.corner),
            str(sc.reverse_id),
        ])
    return rows
