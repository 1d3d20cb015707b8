"""Hyperbolic oracle: an independent computation of lengths and
self-intersection numbers for the enumerated free homotopy classes.

The comparison surface is a genus-2 hyperbolic surface presented by a
*regular* hyperbolic octagon with vertex angle pi/4 (all eight corners in a
single vertex class, total angle 2*pi) and side-pairing isometries following
the same combinatorial pattern as the flat surface's cut polygon.  Flat
words map to group words by reading the deck letter of every gluing-edge
crossing, including the crossings of the counterclockwise push-off arc
around the cone point at each junction (a geodesic word passes through the
singularity; the detour letters carry the winding information).

Lengths are trace-based (2*arccosh(|tr|/2)).  Self-intersection numbers
count linked axes: conjugate axes h*gamma*h^-1 crossing a fundamental
segment of gamma's axis, candidates drawn from the tiles along the axis,
two axis events per surface crossing point.  Every floating predicate near
its threshold raises instead of guessing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import EllipticOrParabolic, NoCatalogue, NumericallyUnstable
from .words import GeodesicWord, word_length

# --- SL(2, R) toolkit (matrices as (a, b, c, d) float tuples) ----------------


def mat_mul(A, B):
    a, b, c, d = A
    e, f, g, h = B
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_inv(A):
    a, b, c, d = A  # det assumed 1
    return (d, -b, -c, a)


def mat_normalize(A):
    a, b, c, d = A
    det = a * d - b * c
    if det <= 0:
        raise ValueError("matrix is not orientation-preserving")
    s = math.sqrt(det)
    return (a / s, b / s, c / s, d / s)


def mat_trace(A):
    return A[0] + A[3]


def mat_key(A, digits=6):
    a, b, c, d = A
    for v in (a, b, c, d):
        if abs(v) > 10 ** -digits:
            if v < 0:
                a, b, c, d = -a, -b, -c, -d
            break
    return (round(a, digits), round(b, digits), round(c, digits), round(d, digits))


def mobius(A, z):
    a, b, c, d = A
    den = c * z + d
    if abs(den) < 1e-300:
        raise NumericallyUnstable("Mobius image at infinity")
    return (a * z + b) / den


def hyp_dist(z1, z2):
    d2 = abs(z1 - z2) ** 2 / (2.0 * z1.imag * z2.imag)
    return math.acosh(1.0 + d2)


def _to_i(p):
    """Isometry sending p to i."""
    x, y = p.real, p.imag
    s = math.sqrt(y)
    return (1.0 / s, -x / s, 0.0, s)


def _rot_i(phi):
    """Rotation of tangent vectors at i by phi (counterclockwise)."""
    c, s = math.cos(phi / 2.0), math.sin(phi / 2.0)
    return (c, s, -s, c)


def _dir_at_i(w):
    """Tangent direction angle at i of the geodesic from i to w."""
    # Cayley to the disk: i -> 0, geodesics from 0 are straight rays whose
    # euclidean direction differs from the UHP tangent angle by a fixed
    # conformal rotation; compute it through the derivative of the map.
    u = (w - 1j) / (w + 1j)
    # d/dz[(z-i)/(z+i)] at i = 1/(2i): multiply back out
    return cmath.phase(u * 2j)


def point_at(p, theta, dist):
    """Point at hyperbolic distance ``dist`` from p in tangent direction theta."""
    up = (math.exp(dist / 2.0), 0.0, 0.0, math.exp(-dist / 2.0))
    m = mat_mul(mat_inv(_to_i(p)), mat_mul(_rot_i(theta - math.pi / 2.0), up))
    return mobius(m, 1j)


def map_segment(p, q, p2, q2, tol=1e-9):
    """Unique orientation-preserving isometry with p -> p2, q -> q2."""
    if abs(hyp_dist(p, q) - hyp_dist(p2, q2)) > 1e-7:
        raise ValueError("segments have different lengths")

    def canon(a, b):
        A = _to_i(a)
        w = mobius(A, b)
        phi = math.pi / 2.0 - _dir_at_i(w)
        return mat_mul(_rot_i(phi), A)

    M = mat_normalize(mat_mul(mat_inv(canon(p2, q2)), canon(p, q)))
    if abs(mobius(M, p) - p2) > 1e-6 or abs(mobius(M, q) - q2) > 1e-6:
        raise NumericallyUnstable("segment-mapping isometry failed to verify")
    return M


def fixed_points(M, tol=1e-9):
    """(repelling, attracting) boundary fixed points of a hyperbolic M;
    either may be math.inf."""
    a, b, c, d = M
    tr = a + d
    if abs(tr) <= 2.0 + tol:
        raise EllipticOrParabolic(f"|trace| = {abs(tr):.6f} <= 2")
    if abs(c) < 1e-13:
        x = b / (d - a) if abs(d - a) > 1e-13 else math.inf
        pts = [math.inf, x]
    else:
        disc = math.sqrt(tr * tr - 4.0)
        pts = [(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)]

    def deriv_abs(x):
        if x is math.inf:
            return abs(a / d) if abs(d) > 1e-13 else math.inf
        return 1.0 / (c * x + d) ** 2 if abs(c * x + d) > 1e-13 else math.inf

    p0, p1 = pts
    return (p0, p1) if deriv_abs(p0) > 1.0 else (p1, p0)


def translation_length(M, tol=1e-9):
    tr = abs(mat_trace(M))
    if tr <= 2.0 + tol:
        raise EllipticOrParabolic(f"|trace| = {tr:.6f} <= 2")
    return 2.0 * math.acosh(tr / 2.0)


# --- the octagon group --------------------------------------------------------

_OPPOSITE_PATTERN = tuple((k, k + 4) for k in range(4))


@dataclass
class SurfaceGroup:
    """Fuchsian group of a genus-2 surface on the regular pi/4 octagon."""

    generators: tuple      # 4 side-pairing matrices
    relator: tuple         # ((gen index, sign), ...) of length 8
    tolerance: float
    vertices: tuple        # complex UHP positions of the fundamental octagon
    pattern: tuple         # 4 (positive slot, negative slot) pairs
    exit_letters: tuple    # per octagon side: (gen index, sign)
    corner_cycle: tuple    # vertex rotation order of the pattern

    def letter_matrix(self, letter):
        idx, sign = letter
        g = self.generators[idx]
        return g if sign > 0 else mat_inv(g)

    def word_matrix(self, letters):
        M = (1.0, 0.0, 0.0, 1.0)
        for letter in letters:
            M = mat_mul(M, self.letter_matrix(letter))
        return M

    def exit_matrix(self, slot):
        return self.letter_matrix(self.exit_letters[slot])


def _pattern_corner_cycle(pattern):
    partner = {}
    for i, j in pattern:
        partner[i], partner[j] = j, i
    cycle = [0]
    cur = partner[(0 - 1) % 8]
    while cur != 0:
        cycle.append(cur)
        cur = partner[(cur - 1) % 8]
    return tuple(cycle)


def build_octagon_group(tolerance: float = 1e-9, pattern=_OPPOSITE_PATTERN) -> SurfaceGroup:
    """Regular vertex-angle-pi/4 octagon with side pairings following
    ``pattern`` (default: opposite sides).  Verifies the vertex relation,
    the corner count, the vertex-angle sum, and one ring of translates."""
    R = math.acosh(3.0 + 2.0 * math.sqrt(2.0))  # circumradius
    base = 1j
    verts = tuple(
        point_at(base, -math.pi / 8.0 + k * math.pi / 4.0, R) for k in range(8)
    )
    exit_letters = [None] * 8
    gens = []
    for g_idx, (i, j) in enumerate(pattern):
        # pairing maps side j onto side i with reversed boundary orientation
        M = map_segment(verts[j], verts[(j + 1) % 8], verts[(i + 1) % 8], verts[i],
                        tol=tolerance)
        gens.append(M)
        exit_letters[i] = (g_idx, 1)
        exit_letters[j] = (g_idx, -1)
    cycle = _pattern_corner_cycle(pattern)
    if len(cycle) != 8:
        raise ValueError("side pattern does not give a single vertex class")
    relator = tuple(exit_letters[(c - 1) % 8] for c in cycle)
    group = SurfaceGroup(
        generators=tuple(gens),
        relator=relator,
        tolerance=tolerance,
        vertices=verts,
        pattern=tuple(pattern),
        exit_letters=tuple(exit_letters),
        corner_cycle=cycle,
    )
    M = group.word_matrix(relator)
    dev = min(
        max(abs(x - y) for x, y in zip(M, (1.0, 0.0, 0.0, 1.0))),
        max(abs(x + y) for x, y in zip(M, (1.0, 0.0, 0.0, 1.0))),
    )
    if dev > tolerance:
        raise NumericallyUnstable(f"vertex relation deviates from +-identity by {dev:.2e}")
    # vertex angle sum: each corner of the regular octagon has angle pi/4
    total = 0.0
    for k in range(8):
        t1 = _dir_at_i(mobius(_to_i(verts[k]), verts[(k + 1) % 8]))
        t2 = _dir_at_i(mobius(_to_i(verts[k]), verts[(k - 1) % 8]))
        ang = (t2 - t1) % (2.0 * math.pi)
        total += ang
    if abs(total - 2.0 * math.pi) > 1e-7:
        raise NumericallyUnstable(f"vertex angle sum {total} != 2*pi")
    # one ring of translates: each pairing carries the octagon across its side
    for g_idx, (i, j) in enumerate(pattern):
        M = gens[g_idx]
        if abs(mobius(M, verts[j]) - verts[(i + 1) % 8]) > 1e-7:
            raise NumericallyUnstable("side pairing does not glue the ring correctly")
        img_center = mobius(M, base)
        if hyp_dist(img_center, base) < 1e-6:
            raise NumericallyUnstable("pairing fixes the octagon center")
    return group


def group_for_surface(surface) -> SurfaceGroup:
    if surface.catalogue is None:
        raise NoCatalogue(f"surface {surface.name!r} has no hyperbolic catalogue")
    cache = surface._caches.setdefault("hyp_group", {})
    if "group" not in cache:
        cache["group"] = build_octagon_group(pattern=surface.catalogue.pattern)
    return cache["group"]


# --- flat words -> group words -----------------------------------------------


def cyclic_reduce(letters):
    """Free reduction of a cyclic word over (index, sign) letters."""
    out = []
    for letter in letters:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    while len(out) >= 2 and out[0][0] == out[-1][0] and out[0][1] == -out[-1][1]:
        out = out[1:-1]
    return tuple(out)


def word_from_crossing_sequence(surface, word: GeodesicWord):
    """Deck-letter word of a closed geodesic word: every gluing-edge crossing
    of each saddle connection plus the corner-fan crossings of the
    counterclockwise push-off at each junction; cyclically reduced."""
    if surface.catalogue is None:
        raise NoCatalogue(f"surface {surface.name!r} has no hyperbolic catalogue")
    table = surface.catalogue.letter_of_exit
    letters = []
    n = len(word.letters)
    for idx, sc in enumerate(word.letters):
        for crossing in sc.crossing_word:
            letter = table[crossing]
            if letter is not None:
                letters.append(letter)
        nxt = word.letters[(idx + 1) % n]
        for crossing in surface.fan_exits(sc.arr, nxt.dep):
            letter = table[crossing]
            if letter is not None:
                letters.append(letter)
    reduced = cyclic_reduce(letters)
    if not reduced:
        raise NumericallyUnstable(
            "crossing sequence reduced to the trivial word (non-geodesic input?)"
        )
    return reduced


def hyp_length(group: SurfaceGroup, letters) -> float:
    """Translation length 2*arccosh(|tr|/2) of the group word."""
    return translation_length(group.word_matrix(letters), group.tolerance)


def axis_displacement_length(group: SurfaceGroup, letters) -> float:
    """Independent length computation: distance a point of the axis moves."""
    M = group.word_matrix(letters)
    rep, att = fixed_points(M, group.tolerance)
    if rep is math.inf or att is math.inf:
        rot = _rot_i(0.61803)
        M = mat_normalize(mat_mul(rot, mat_mul(M, mat_inv(rot))))
        rep, att = fixed_points(M, group.tolerance)
    z = complex((rep + att) / 2.0, abs(att - rep) / 2.0)
    return hyp_dist(z, mobius(M, z))


# --- linked-axes self-intersection --------------------------------------------


def _axis_dist_to_i(M, tol):
    rep, att = fixed_points(M, tol)
    if rep is math.inf or att is math.inf:
        return math.inf
    m, r = (rep + att) / 2.0, abs(att - rep) / 2.0
    if r < 1e-12:
        return math.inf
    z = 1j
    # distance from i to the half circle (center m, radius r)
    d_center = hyp_dist(z, complex(m, r))
    return d_center  # proxy: distance to the axis midpoint (monotone enough)


def _conjugate_near_base(group, M):
    """Greedy conjugation pulling the axis of M toward the base point i."""
    best = M
    best_d = _axis_dist_to_i(M, group.tolerance)
    moves = [group.generators[k] for k in range(4)]
    moves += [mat_inv(g) for g in moves]
    for _ in range(200):
        improved = False
        for g in moves:
            cand = mat_normalize(mat_mul(mat_inv(g), mat_mul(best, g)))
            d = _axis_dist_to_i(cand, group.tolerance)
            if d < best_d - 1e-9:
                best, best_d, improved = cand, d, True
                break
        if not improved:
            return best
    return best


class _Tiling:
    """Base octagon side data and point-location / tracing utilities."""

    def __init__(self, group: SurfaceGroup):
        self.group = group
        self.sides = []
        base = 1j
        for k in range(8):
            z1, z2 = group.vertices[k], group.vertices[(k + 1) % 8]
            if abs(z1.real - z2.real) < 1e-12:
                # vertical geodesic x = const: signed by x difference
                self.sides.append(("line", z1.real))
            else:
                c = (abs(z1) ** 2 - abs(z2) ** 2) / (2.0 * (z1.real - z2.real))
                r2 = abs(z1 - c) ** 2
                self.sides.append(("circle", c, r2))
        self.inside_sign = [self._side_val(k, base) for k in range(8)]

    def _side_val(self, k, z):
        side = self.sides[k]
        if side[0] == "line":
            return z.real - side[1]
        _, c, r2 = side
        return abs(z - c) ** 2 - r2

    def violations(self, z):
        out = []
        for k in range(8):
            v = self._side_val(k, z)
            if v * self.inside_sign[k] < 0:
                out.append((abs(v), k))
        return out

    def locate(self, z):
        """Group element g with z inside (or on the boundary of) g*octagon."""
        g = (1.0, 0.0, 0.0, 1.0)
        for _ in range(600):
            zz = mobius(mat_inv(g), z)
            bad = self.violations(zz)
            if not bad:
                return g
            _, k = max(bad)
            g = mat_normalize(mat_mul(g, self.group.exit_matrix(k)))
        raise NumericallyUnstable("tile location walk did not converge")

    def trace_axis(self, axis_point, s_lo, s_hi, step=0.05):
        """Tiles crossed by the axis segment {axis_point(s) : s in [s_lo, s_hi]}."""
        tiles = {}
        z = axis_point(s_lo)
        g = self.locate(z)
        tiles[mat_key(g)] = g
        s = s_lo
        while s < s_hi:
            s2 = min(s + step, s_hi)
            zz = mobius(mat_inv(g), axis_point(s2))
            bad = self.violations(zz)
            if not bad:
                s = s2
                continue
            # bisect the earliest crossing of the current tile
            a, b = s, s2
            for _ in range(60):
                mid = 0.5 * (a + b)
                if self.violations(mobius(mat_inv(g), axis_point(mid))):
                    b = mid
                else:
                    a = mid
            viol = self.violations(mobius(mat_inv(g), axis_point(b)))
            _, k = max(viol)
            g = mat_normalize(mat_mul(g, self.group.exit_matrix(k)))
            tiles[mat_key(g)] = g
            s = b
        return tiles


def _tiling(group: SurfaceGroup) -> _Tiling:
    if not hasattr(group, "_tiling"):
        group._tiling = _Tiling(group)
    return group._tiling


def _primitive_power(letters):
    """(primitive cyclic subword, exponent) of a cyclic letter sequence."""
    n = len(letters)
    for d in range(1, n + 1):
        if n % d:
            continue
        if all(letters[i] == letters[i % d] for i in range(n)):
            return letters[:d], n // d
    return letters, 1


def hyp_self_intersection(group: SurfaceGroup, letters, multiplicity: bool = False) -> int:
    """Geometric self-intersection number of the free homotopy class.

    The word must be primitive unless ``multiplicity`` is set, in which
    case a p-th power contributes p^2 * i0 + (p - 1) for a primitive class
    with i0 crossings."""
    letters = cyclic_reduce(letters)
    prim, p = _primitive_power(letters)
    if p > 1 and not multiplicity:
        raise ValueError(f"word is a proper power (exponent {p}); pass multiplicity=True")
    i0 = _linked_axes_count(group, prim)
    if p == 1:
        return i0
    return p * p * i0 + (p - 1)


def _linked_axes_count(group: SurfaceGroup, letters) -> int:
    tol = group.tolerance
    W = _conjugate_near_base(group, mat_normalize(group.word_matrix(letters)))
    rep, att = fixed_points(W, tol)
    if rep is math.inf or att is math.inf:
        raise NumericallyUnstable("axis endpoint at infinity after normalization")
    ell = translation_length(W, tol)

    def to_axis(z):  # conjugacy sending axis -> imaginary axis (rep->0, att->inf)
        return (z - rep) / (z - att)

    def axis_point(s):
        w = 1j * math.exp(s)
        # invert to_axis: z = (att*w - rep)/(w - 1)
        return (att * w - rep) / (w - 1.0)

    # anchor the fundamental segment near the axis point closest to the
    # base tile, with a fixed small offset against boundary coincidences
    s0 = math.log(abs(to_axis(1j))) + 0.1234567
    pad = 2.5
    tiling = _tiling(group)
    chain = tiling.trace_axis(axis_point, s0 - pad, s0 + ell + pad)
    ring = dict(chain)
    for g in list(chain.values()):
        for k in range(8):
            g2 = mat_normalize(mat_mul(g, group.exit_matrix(k)))
            ring.setdefault(mat_key(g2), g2)
    def mobius_real(M, x):
        a, b, c, d = M
        den = c * x + d
        if abs(den) < 1e-12 * (abs(c) + abs(d) + 1.0):
            return math.inf
        return (a * x + b) / den

    def to_axis_real(x):
        if x is math.inf:
            return 1.0
        den = x - att
        if abs(den) < 1e-12:
            return math.inf
        return (x - rep) / den

    # The conjugate h W h^-1 is never formed (its entries cancel
    # catastrophically for distant tiles): its axis is h applied to the base
    # axis, so only the endpoint images are needed.  A crossing event is
    # identified by its parameter along the base axis plus the endpoint
    # angles; copies of one coset agree up to float noise, distinct events
    # are macroscopically separated, and the in-between band raises.
    events = []
    tiles = list(ring.values())
    for q in tiles:
        for t in tiles:
            h = mat_mul(q, mat_inv(t))
            e1 = mobius_real(h, rep)
            e2 = mobius_real(h, att)
            u = to_axis_real(e1)
            v = to_axis_real(e2)
            if u is math.inf or v is math.inf:
                continue  # axis through an endpoint of the base axis: same axis
            if abs(u) < 1e-11 and abs(v) > 1e11:
                continue  # base axis itself
            if abs(v) < 1e-11 and abs(u) > 1e11:
                continue  # base axis, reversed
            prod = u * v
            if prod > 0:
                continue  # endpoints do not interleave: no crossing
            if abs(prod) < 1e-12:
                raise NumericallyUnstable("axis crossing tangent to the base axis")
            s = 0.5 * math.log(-prod)
            if min(abs(s - s0), abs(s - (s0 + ell))) < 1e-6:
                raise NumericallyUnstable("axis crossing at the fundamental-segment boundary")
            if not (s0 <= s < s0 + ell):
                continue
            events.append((s, math.atan(u), math.atan(v)))
    events.sort()
    merge_tol, guard_tol = 1e-6, 1e-4
    merged = []
    for ev in events:
        if merged:
            prev = merged[-1]
            diffs = max(abs(a - b) for a, b in zip(ev, prev))
            if diffs < merge_tol:
                continue
            if abs(ev[0] - prev[0]) < guard_tol and diffs < guard_tol:
                raise NumericallyUnstable(
                    f"two crossing events within the ambiguity band: {prev} vs {ev}"
                )
        merged.append(ev)
    count = len(merged)
    if count % 2:
        raise NumericallyUnstable(f"odd axis-crossing count {count}")
    return count // 2


# --- reports -------------------------------------------------------------------


def length_ratio_report(surface, L, oriented: bool = False, word_budget: int = 2_000_000):
    """Hyperbolic/flat length ratio over all enumerated classes up to L."""
    from .words import enumerate_closed_geodesics

    group = group_for_surface(surface)
    words = enumerate_closed_geodesics(surface, L, oriented=oriented,
                                       word_budget=word_budget)
    rows = []
    for w in words:
        flat = word_length(surface, w).to_float()
        letters = word_from_crossing_sequence(surface, w)
        hyp = hyp_length(group, letters)
        rows.append({"canonical_key": w.canonical_key, "flat_length": flat,
                     "hyp_length": hyp, "ratio": hyp / flat})
    if not rows:
        return {"rows": rows, "min_ratio": None, "max_ratio": None, "lam": None}
    ratios = [r["ratio"] for r in rows]
    mn, mx = min(ratios), max(ratios)
    lam = math.ceil(max(mx, 1.0 / mn))
    return {"rows": rows, "min_ratio": mn, "max_ratio": mx, "lam": lam}
