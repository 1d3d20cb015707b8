"""Geodesic words: concatenations of saddle connections through the cone point.

A concatenation is locally geodesic at the cone point iff both angular gaps
between the incoming back-direction and the outgoing direction are at least
pi.  Closed geodesics through the singularity are cyclic words of directed
saddle connections with every junction geodesic (including the wrap-around);
arcs are linear words.  Closed words are counted per free homotopy class:
the canonical key is the lexicographic minimum over rotations of the id
sequence and rotations of the orientation-reversed sequence.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from .errors import LimitExceeded
from .exactnum import RadicalSum
from .saddles import SaddleConnection, enumerate_saddle_connections
from .surface import FlatSurface


@dataclass(frozen=True)
class JunctionGeometry:
    """Angular gaps at the cone point between the incoming back-direction
    and the outgoing direction; gap_ccw + gap_cw equals the cone angle."""

    gap_ccw: float
    gap_cw: float
    ccw_ge_pi: bool
    cw_ge_pi: bool


@dataclass(frozen=True)
class ArcWord:
    letters: tuple

    @property
    def ids(self):
        return tuple(sc.id for sc in self.letters)

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class GeodesicWord:
    letters: tuple
    canonical_key: str

    @property
    def ids(self):
        return tuple(sc.id for sc in self.letters)

    def __len__(self):
        return len(self.letters)


def word_length(surface: FlatSurface, word) -> RadicalSum:
    total = RadicalSum(surface.disc)
    for sc in word.letters:
        total.add_sqrt_of(sc.length_sq)
    return total


def is_geodesic_junction(surface: FlatSurface, incoming: SaddleConnection,
                         outgoing: SaddleConnection):
    """Geodesic iff min(gap_ccw, gap_cw) >= pi, decided exactly.

    The counterclockwise gap runs from the incoming back-direction to the
    outgoing direction; immediate backtracking (outgoing = reversed
    incoming) has one gap 0 and is never geodesic.
    """
    import math

    u, v = incoming.arr, outgoing.dep
    theta = math.pi * surface.cone_angle_over_pi
    if surface.coord_cmp(u, v) == 0:
        geom = JunctionGeometry(0.0, theta, False, theta >= math.pi)
        return False, geom
    ccw = surface.gap_ge_pi(u, v)
    cw = surface.gap_ge_pi(v, u)
    gap_ccw = surface.gap_angle(u, v)
    geom = JunctionGeometry(gap_ccw, theta - gap_ccw, ccw, cw)
    return ccw and cw, geom


class _JunctionTable:
    """Per-surface cache of the junction relation over an alphabet."""

    def __init__(self, surface, alphabet):
        self.surface = surface
        self.alphabet = alphabet
        self._ok = {}

    def ok(self, a: SaddleConnection, b: SaddleConnection) -> bool:
        key = (a.id, b.id)
        hit = self._ok.get(key)
        if hit is None:
            hit = is_geodesic_junction(self.surface, a, b)[0]
            self._ok[key] = hit
        return hit


def junction_table(surface: FlatSurface, L) -> _JunctionTable:
    cache = surface._caches.setdefault("junctions", {})
    L = Fraction(L)
    if L not in cache:
        cache[L] = _JunctionTable(surface, enumerate_saddle_connections(surface, L))
    return cache[L]


def canonicalize(ids, reverse_of) -> tuple:
    """Lexicographically minimal representative over rotations of the word
    and rotations of the orientation-reversed word."""
    ids = tuple(ids)
    n = len(ids)
    rev = tuple(reverse_of[x] for x in reversed(ids))
    best = None
    for seq in (ids, rev):
        for r in range(n):
            cand = seq[r:] + seq[:r]
            if best is None or cand < best:
                best = cand
    return best


def canonical_rotations_only(ids) -> tuple:
    ids = tuple(ids)
    return min(ids[r:] + ids[:r] for r in range(len(ids)))


def _key_string(ids) -> str:
    return "-".join(str(x) for x in ids)


def _dfs_words(surface, alphabet, table, L, closed, oriented, word_budget, first_letters):
    """Generate valid words starting from the given first letters."""
    L = Fraction(L)
    rev_of = {sc.id: sc.reverse_id for sc in alphabet}
    by_id = {sc.id: sc for sc in alphabet}
    counter = {"n": 0}
    lock = threading.Lock()

    def spend():
        with lock:
            counter["n"] += 1
            if counter["n"] > word_budget:
                raise LimitExceeded(f"word enumeration exceeded budget {word_budget}")

    results = {}

    def extendable(total: RadicalSum, nxt: SaddleConnection) -> bool:
        t = total.copy()
        t.add_sqrt_of(nxt.length_sq)
        return t.le(L)

    def emit(seq):
        if closed:
            ids = tuple(sc.id for sc in seq)
            canon = (canonical_rotations_only(ids) if oriented
                     else canonicalize(ids, rev_of))
            if canon not in results:
                results[canon] = GeodesicWord(
                    tuple(by_id[x] for x in canon), _key_string(canon)
                )
        else:
            results[tuple(sc.id for sc in seq)] = ArcWord(tuple(seq))

    def rec(seq, total):
        spend()
        last = seq[-1]
        if closed:
            if table.ok(last, seq[0]):
                emit(seq)
        else:
            emit(seq)
        for nxt in alphabet:
            if table.ok(last, nxt) and extendable(total, nxt):
                t = total.copy()
                t.add_sqrt_of(nxt.length_sq)
                rec(seq + [nxt], t)

    for first in first_letters:
        total = RadicalSum(surface.disc)
        total.add_sqrt_of(first.length_sq)
        if total.le(L):
            rec([first], total)
    return results


def enumerate_closed_geodesics(surface: FlatSurface, L, oriented: bool = False,
                               word_budget: int = 2_000_000, workers: int = 1,
                               traversal: str = "sorted"):
    """All closed geodesics through the cone point of length <= L, one per
    free homotopy class (unoriented by default), deterministically sorted."""
    L = Fraction(L)
    table = junction_table(surface, L)
    alphabet = table.alphabet
    firsts = list(alphabet)
    if traversal == "reversed":
        firsts.reverse()
    results = {}
    if workers > 1 and len(firsts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        chunks = [firsts[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda ch: _dfs_words(surface, alphabet, table, L, True,
                                      oriented, word_budget, ch),
                chunks,
            )
            for part in parts:
                results.update(part)
    else:
        results = _dfs_words(surface, alphabet, table, L, True, oriented,
                             word_budget, firsts)
    return tuple(results[k] for k in sorted(results))


def enumerate_arcs(surface: FlatSurface, L, word_budget: int = 2_000_000,
                   workers: int = 1, traversal: str = "sorted"):
    """All geodesic arcs (linear words, junctions geodesic) of length <= L."""
    L = Fraction(L)
    table = junction_table(surface, L)
    alphabet = table.alphabet
    firsts = list(alphabet)
    if traversal == "reversed":
        firsts.reverse()
    results = _dfs_words(surface, alphabet, table, L, False, False,
                         word_budget, firsts)
    return tuple(results[k] for k in sorted(results))


def word_csv_rows(surface, words):
    header = ["canonical_key", "n_letters", "length", "letter_ids"]
    rows = [header]
    for w in words:
        rows.append([
            w.canonical_key if isinstance(w, GeodesicWord) else _key_string(w.ids),
            str(len(w)),
            f"{word_length(surface, w).to_float():.17g}",
            " ".join(str(i) for i in w.ids),
        ])
    return rows
