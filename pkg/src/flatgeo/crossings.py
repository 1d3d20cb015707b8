"""Geometric self-intersection numbers of words, computed combinatorially.

A word's crossings split into two exactly-computable parts:

* interior crossings: transverse intersection points of the developed
  saddle-connection segments away from the cone point.  Distinct saddle
  connections intersect transversally (one singular point), a saddle
  connection never crosses itself, and parallel traversals of one segment
  never cross, so this count is fixed by exact segment intersection on the
  polygon charts.

* disc crossings: inside a small disc around the cone point the word's
  strands enter and leave along their arrival/departure directions and are
  joined by chords.  Strands traversing one saddle connection form a
  parallel band whose transversal order is a free choice (ribbon-consistent
  at both ends: the counterclockwise boundary order is ascending in the
  band coordinate at one end and descending at the other); two chords cross
  iff their endpoints interleave on the boundary circle.  The
  self-intersection number is the interior count plus the minimum of the
  interleaving count over all band orderings, which the geodesic
  perturbation realizes.

Arcs get the same treatment with two free stubs instead of a closing chord;
stubs stop just inside the disc and cross nothing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cmp_to_key

from .errors import BudgetExceeded, NotSimple, TooFewPieces
from .exactnum import Quad, cross, cross_val
from .saddles import SaddleConnection, chart_pieces
from .surface import FlatSurface
from .words import ArcWord, GeodesicWord, canonicalize, word_length


@dataclass(frozen=True)
class CrossingReport:
    interior: int
    disc: int

    @property
    def total(self) -> int:
        return self.interior + self.disc


@dataclass(frozen=True)
class BandOrdering:
    """Transversal positions chosen per band: for each undirected saddle
    connection used k >= 2 times, a rank per traversal (in word order)."""

    ranks: tuple  # tuple of (band_id, tuple_of_ranks)


@dataclass(frozen=True)
class SimpleArcDecomposition:
    pieces: tuple  # ArcWords, cyclically concatenating to the word
    start_offset: int

    @property
    def m(self) -> int:
        return len(self.pieces)


@dataclass(frozen=True)
class ArcData:
    """Combinatorial data of a simple arc relative to its saddle-connection
    set: chord counts between boundary intervals, plus the positions and
    intervals of the two endpoints (clockwise numbering)."""

    n: tuple          # symmetric (2m x 2m) chord-count matrix
    t0: int
    t1: int
    i0: int
    i1: int


# --- interior crossings ------------------------------------------------------


def _undirected(sc: SaddleConnection) -> int:
    return min(sc.id, sc.reverse_id)


def interior_pair_crossings(surface: FlatSurface, a: SaddleConnection,
                            b: SaddleConnection) -> int:
    """Transverse interior intersection points of two saddle connections
    as subsets of the surface (0 for the same undirected connection)."""
    ua, ub = _undirected(a), _undirected(b)
    if ua == ub:
        return 0
    key = (min(ua, ub), max(ua, ub))
    cache = surface._caches.setdefault("interior", {})
    if key in cache:
        return cache[key]
    wa, wb = a.holonomy, b.holonomy
    if cross(wa, wb) == 0:
        cache[key] = 0  # parallel segments through one cone point are disjoint
        return 0
    pa = chart_pieces(surface, a)
    pb = chart_pieces(surface, b)
    det = cross_val(wa, wb)
    hits = set()
    for (p1, a1, b1, t0a, t1a) in pa:
        for (p2, a2, b2, t0b, t1b) in pb:
            if p1 != p2:
                continue
            # chart equation: t*wa - oa = u*wb - ob, with c = a-side offsets
            # folded in: solve t*wa - u*wb = c where c = (start of piece 2's
            # chart frame) difference; use absolute chart points instead.
            # Points on piece 1: a1 + (t - t0a)/(t1a - t0a) * (b1 - a1); all
            # pieces are straight in the chart, so solve with chart vectors.
            c = (a2[0] - a1[0], a2[1] - a1[1])
            # a1 + s*(b1-a1) = a2 + r*(b2-a2)
            d1 = (b1[0] - a1[0], b1[1] - a1[1])
            d2 = (b2[0] - a2[0], b2[1] - a2[1])
            den = cross_val(d1, d2)
            if den.sign() == 0:
                continue
            s = cross_val(c, d2) / den
            r = cross_val(c, d1) / den
            one = Quad.of(1, surface.disc)
            if s.sign() < 0 or (s - one).sign() > 0:
                continue
            if r.sign() < 0 or (r - one).sign() > 0:
                continue
            # global parameters along each connection
            t_glob = t0a + (t1a - t0a) * s
            u_glob = t0b + (t1b - t0b) * r
            if t_glob.sign() <= 0 or (t_glob - one).sign() >= 0:
                continue
            if u_glob.sign() <= 0 or (u_glob - one).sign() >= 0:
                continue
            hits.add((t_glob, u_glob))
    cache[key] = len(hits)
    return cache[key]


def interior_crossing_count(surface: FlatSurface, word) -> int:
    """Sum of interior crossings over unordered pairs of letter occurrences."""
    letters = word.letters
    total = 0
    for i in range(len(letters)):
        for j in range(i + 1, len(letters)):
            total += interior_pair_crossings(surface, letters[i], letters[j])
    return total


# --- strand diagrams ---------------------------------------------------------


@dataclass(frozen=True)
class _Point:
    ray: object        # ConeCoord
    band: int
    traversal: int     # index into the band's traversal list
    ascending: bool    # CCW order within the ray ascends in the band rank
    label: tuple       # (tag, word position, 'exit'|'entry')


@dataclass(frozen=True)
class StrandDiagram:
    points: tuple          # _Point, unsorted
    chords: tuple          # pairs of point indices
    stubs: tuple           # point indices with no chord
    bands: tuple           # (band_id, traversal_count)
    ray_order: tuple       # point indices grouped: list of (ray, [point idx])
    chord_tags: tuple      # tag per chord (for pair diagrams)


def _build_diagram(surface: FlatSurface, occurrences, closing_chords, tags):
    """occurrences: list of (tag, position, letter).  Produces boundary
    points (exit at the letter's departure ray, entry at its arrival ray),
    chords per ``closing_chords`` (pairs of (tag, pos) -> (tag, pos)), and
    the ray grouping in exact cyclic order."""
    band_traversals = {}
    band_of = {}
    for tag, pos, sc in occurrences:
        band = _undirected(sc)
        band_traversals.setdefault(band, []).append((tag, pos))
        band_of[(tag, pos)] = (band, len(band_traversals[band]) - 1, sc)
    points = []
    index = {}
    for tag, pos, sc in occurrences:
        band, trav, _ = band_of[(tag, pos)]
        canonical = sc.id < sc.reverse_id
        exit_pt = _Point(sc.dep, band, trav, canonical, (tag, pos, "exit"))
        entry_pt = _Point(sc.arr, band, trav, not canonical, (tag, pos, "entry"))
        index[(tag, pos, "exit")] = len(points)
        points.append(exit_pt)
        index[(tag, pos, "entry")] = len(points)
        points.append(entry_pt)
    chords = []
    chord_tags = []
    used = set()
    for (frm, to, tag) in closing_chords:
        i = index[frm + ("entry",)]
        j = index[to + ("exit",)]
        chords.append((i, j))
        chord_tags.append(tag)
        used.update((i, j))
    stubs = tuple(k for k in range(len(points)) if k not in used)

    def ray_cmp(i, j):
        return surface.coord_cmp(points[i].ray, points[j].ray)

    order = sorted(range(len(points)), key=cmp_to_key(ray_cmp))
    groups = []
    for k in order:
        if groups and surface.coord_cmp(points[groups[-1][0]].ray, points[k].ray) == 0:
            groups[-1].append(k)
        else:
            groups.append([k])
    bands = tuple(sorted((b, len(v)) for b, v in band_traversals.items()))
    return StrandDiagram(
        points=tuple(points),
        chords=tuple(chords),
        stubs=stubs,
        bands=bands,
        ray_order=tuple(tuple(g) for g in groups),
        chord_tags=tuple(chord_tags),
    )


def word_diagram(surface: FlatSurface, word: GeodesicWord) -> StrandDiagram:
    occ = [("w", i, sc) for i, sc in enumerate(word.letters)]
    n = len(word.letters)
    chords = [(("w", i), ("w", (i + 1) % n), "w") for i in range(n)]
    return _build_diagram(surface, occ, chords, ("w",))


def arc_diagram(surface: FlatSurface, arc: ArcWord, tag: str = "a") -> StrandDiagram:
    occ = [(tag, i, sc) for i, sc in enumerate(arc.letters)]
    n = len(arc.letters)
    chords = [((tag, i), (tag, i + 1), tag) for i in range(n - 1)]
    return _build_diagram(surface, occ, chords, (tag,))


def pair_diagram(surface: FlatSurface, a: ArcWord, b: ArcWord) -> StrandDiagram:
    occ = [("a", i, sc) for i, sc in enumerate(a.letters)]
    occ += [("b", i, sc) for i, sc in enumerate(b.letters)]
    chords = [(("a", i), ("a", i + 1), "a") for i in range(len(a.letters) - 1)]
    chords += [(("b", i), ("b", i + 1), "b") for i in range(len(b.letters) - 1)]
    return _build_diagram(surface, occ, chords, ("a", "b"))


def _assignments(diagram: StrandDiagram, budget: int):
    """All ribbon band orderings (rank tuples per multi-strand band)."""
    multi = [(b, k) for b, k in diagram.bands if k >= 2]
    size = 1
    for _, k in multi:
        size *= 1
        for j in range(2, k + 1):
            size *= j
        if size > budget:
            raise BudgetExceeded(
                f"band-ordering search space exceeds the budget {budget}"
            )
    pools = [itertools.permutations(range(k)) for _, k in multi]
    for combo in itertools.product(*pools):
        yield {b: ranks for (b, _), ranks in zip(multi, combo)}


def _crossings_for(diagram: StrandDiagram, assignment, count_pair=None) -> int:
    # circular positions: rays in cone order, in-ray order by signed rank
    pos = {}
    counter = 0
    for group in diagram.ray_order:
        def key(i):
            p = diagram.points[i]
            ranks = assignment.get(p.band)
            r = ranks[p.traversal] if ranks is not None else 0
            return r if p.ascending else -r
        for i in sorted(group, key=key):
            pos[i] = counter
            counter += 1
    total = 0
    nc = len(diagram.chords)
    for x in range(nc):
        for y in range(x + 1, nc):
            if count_pair is not None:
                tx, ty = diagram.chord_tags[x], diagram.chord_tags[y]
                if (tx, ty) != count_pair and (ty, tx) != count_pair:
                    continue
            a1, a2 = sorted((pos[diagram.chords[x][0]], pos[diagram.chords[x][1]]))
            b1, b2 = diagram.chords[y]
            p, q = pos[b1], pos[b2]
            if (a1 < p < a2) != (a1 < q < a2):
                total += 1
    return total


def min_disc_crossings(surface: FlatSurface, diagram: StrandDiagram,
                       band_budget: int = 1_000_000, count_pair=None):
    """Minimum interleaving count over ribbon-consistent band orderings,
    with a witnessing ordering (lexicographically first minimizer)."""
    best = None
    witness = None
    for assignment in _assignments(diagram, band_budget):
        c = _crossings_for(diagram, assignment, count_pair)
        if best is None or c < best:
            best, witness = c, assignment
            if best == 0:
                break
    ranks = tuple(sorted((b, tuple(r)) for b, r in witness.items()))
    return best, BandOrdering(ranks)


# --- self-intersection operations -------------------------------------------


def self_intersection(surface: FlatSurface, word: GeodesicWord,
                      band_budget: int = 1_000_000) -> CrossingReport:
    cache = surface._caches.setdefault("self_int", {})
    key = word.canonical_key
    if key in cache:
        return cache[key]
    interior = interior_crossing_count(surface, word)
    disc, _ = min_disc_crossings(surface, word_diagram(surface, word), band_budget)
    report = CrossingReport(interior, disc)
    cache[key] = report
    return report


def arc_self_intersection(surface: FlatSurface, arc: ArcWord,
                          band_budget: int = 1_000_000) -> CrossingReport:
    cache = surface._caches.setdefault("arc_int", {})
    key = arc.ids
    if key in cache:
        return cache[key]
    interior = interior_crossing_count(surface, arc)
    disc, _ = min_disc_crossings(surface, arc_diagram(surface, arc), band_budget)
    report = CrossingReport(interior, disc)
    cache[key] = report
    return report


def arc_pair_intersection(surface: FlatSurface, a: ArcWord, b: ArcWord,
                          band_budget: int = 1_000_000) -> int:
    """Crossings between two arcs: interior crossings of a-strands with
    b-strands plus minimized a-chord/b-chord interleavings under a joint
    band ordering (within-arc crossings are not counted)."""
    interior = 0
    for sa in a.letters:
        for sb in b.letters:
            interior += interior_pair_crossings(surface, sa, sb)
    disc, _ = min_disc_crossings(surface, pair_diagram(surface, a, b),
                                 band_budget, count_pair=("a", "b"))
    return interior + disc


def is_simple_arc(surface: FlatSurface, arc: ArcWord,
                  band_budget: int = 1_000_000) -> bool:
    return arc_self_intersection(surface, arc, band_budget).total == 0


# --- minimal simple-arc decomposition ----------------------------------------


def decompose_into_simple_arcs(surface: FlatSurface, word: GeodesicWord,
                               band_budget: int = 1_000_000) -> SimpleArcDecomposition:
    """Minimal number of consecutive simple arcs whose cyclic concatenation
    is the word, minimized over all rotations (exact dynamic program)."""
    letters = word.letters
    n = len(letters)

    def simple_slice(rot, i, j):
        return is_simple_arc(surface, ArcWord(rot[i:j]), band_budget)

    best = None  # (m, rotation offset, cut list)
    for r in range(n):
        rot = letters[r:] + letters[:r]
        dp = [None] * (n + 1)
        back = [None] * (n + 1)
        dp[0] = 0
        for j in range(1, n + 1):
            for i in range(j):
                if dp[i] is None:
                    continue
                if dp[j] is not None and dp[i] + 1 >= dp[j]:
                    continue
                if simple_slice(rot, i, j):
                    dp[j] = dp[i] + 1
                    back[j] = i
        if dp[n] is not None and (best is None or dp[n] < best[0]):
            cuts = []
            j = n
            while j > 0:
                cuts.append((back[j], j))
                j = back[j]
            cuts.reverse()
            best = (dp[n], r, [ArcWord(rot[i:j]) for i, j in cuts])
    if best is None:
        raise NotSimple("word admits no decomposition into simple arcs")
    return SimpleArcDecomposition(pieces=tuple(best[2]), start_offset=best[1])


@dataclass(frozen=True)
class ConcatenationFamilies:
    """The e_i = piece_i piece_{i+1} and f_i = e_i e_{i+2} arcs of a
    minimal decomposition (f family empty unless m >= 4)."""

    e: tuple
    f: tuple

    @property
    def too_few_for_f(self) -> bool:
        return not self.f


def build_c1_c2(surface: FlatSurface, decomposition: SimpleArcDecomposition,
                require_f: bool = False) -> ConcatenationFamilies:
    pieces = decomposition.pieces
    m = len(pieces)
    if m < 2:
        if require_f:
            raise TooFewPieces(f"need m >= 4 for the f family, got m={m}")
        return ConcatenationFamilies(e=(), f=())
    e = tuple(
        ArcWord(pieces[i].letters + pieces[(i + 1) % m].letters) for i in range(m)
    )
    if m < 4:
        if require_f:
            raise TooFewPieces(f"need m >= 4 for the f family, got m={m}")
        return ConcatenationFamilies(e=e, f=())
    f = tuple(
        ArcWord(e[i].letters + e[(i + 2) % m].letters) for i in range(m)
    )
    return ConcatenationFamilies(e=e, f=f)


# --- simple-arc data ----------------------------------------------------------


def encode_arc_data(surface: FlatSurface, arc: ArcWord, sigma=None,
                    band_budget: int = 1_000_000) -> ArcData:
    """Combinatorial data of a simple arc: boundary intervals are the 2m
    directed rays of its distinct saddle connections, numbered clockwise
    from the smallest ray; chords and endpoint positions are read off the
    witnessing zero-crossing band ordering."""
    if not is_simple_arc(surface, arc, band_budget):
        raise NotSimple("arc data is only defined for simple arcs")
    support = sorted({_undirected(sc) for sc in arc.letters})
    if sigma is not None and sorted(sigma) != support:
        raise ValueError("sigma must be exactly the arc's distinct saddle connections")
    diagram = arc_diagram(surface, arc)
    _, witness = min_disc_crossings(surface, diagram, band_budget)
    assignment = {b: list(r) for b, r in witness.ranks}

    # interval numbering: rays of the diagram in cone order; I_1 = smallest,
    # then clockwise (descending cone order)
    ray_reps = [g[0] for g in diagram.ray_order]
    k = len(ray_reps)
    interval_of_group = {}
    interval_of_group[0] = 0
    for step in range(1, k):
        interval_of_group[k - step] = step
    # boundary positions clockwise starting inside I_1: reverse the CCW
    # order and rotate so the I_1 group comes first
    ccw = []
    for group in diagram.ray_order:
        def key(i):
            p = diagram.points[i]
            ranks = assignment.get(p.band)
            r = ranks[p.traversal] if ranks is not None else 0
            return r if p.ascending else -r
        ccw.extend(sorted(group, key=key))
    cw = [ccw[0]] + list(reversed(ccw[1:]))
    pos = {i: t + 1 for t, i in enumerate(cw)}  # 1-based clockwise numbering
    group_of_point = {}
    for gi, group in enumerate(diagram.ray_order):
        for i in group:
            group_of_point[i] = gi
    nmat = [[0] * k for _ in range(k)]
    for (i, j) in diagram.chords:
        a = interval_of_group[group_of_point[i]]
        b = interval_of_group[group_of_point[j]]
        nmat[a][b] += 1
        if a != b:
            nmat[b][a] += 1
    start = next(i for i, p in enumerate(diagram.points)
                 if p.label[1] == 0 and p.label[2] == "exit")
    end = next(i for i, p in enumerate(diagram.points)
               if p.label[1] == len(arc.letters) - 1 and p.label[2] == "entry")
    return ArcData(
        n=tuple(tuple(row) for row in nmat),
        t0=pos[start],
        t1=pos[end],
        i0=interval_of_group[group_of_point[start]] + 1,
        i1=interval_of_group[group_of_point[end]] + 1,
    )


def crossing_csv_rows(surface, words, band_budget: int = 1_000_000):
    header = ["canonical_key", "length", "K_total", "K_interior", "K_disc", "m"]
    rows = [header]
    for w in words:
        rep = self_intersection(surface, w, band_budget)
        m = decompose_into_simple_arcs(surface, w, band_budget).m
        rows.append([
            w.canonical_key,
            f"{word_length(surface, w).to_float():.17g}",
            str(rep.total), str(rep.interior), str(rep.disc), str(m),
        ])
    return rows
