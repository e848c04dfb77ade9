"""Exact lattice-polytope computations on Z^n, n <= 3.

Hulls, Minkowski sums, volumes, mixed volumes, faces and facet normals are
computed in exact integer / rational arithmetic, so root counts and degree
identities derived from them are exact integers.  Floating point enters only
in `projected_mixed_volumes`, which works in a real hyperplane.

Support functions follow the inner-normal convention h_P(v) = min over P of
<a, v>.  Test vectors imported from sources using the sup convention must be
sign-flipped.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key

import numpy as np

IntVec = tuple[int, ...]


class LatticeError(ValueError):
    pass


class UnsupportedDimensionError(LatticeError):
    """Raised for exact hull/volume requests in ambient dimension > 3."""


def _as_ivec(p) -> IntVec:
    v = tuple(int(c) for c in p)
    if any(c != int(c) for c in (list(p))):
        raise LatticeError(f"non-integer lattice point {p!r}")
    return v


def gcd_vec(v) -> int:
    g = 0
    for c in v:
        g = math.gcd(g, abs(int(c)))
    return g


def primitive(v: IntVec) -> IntVec:
    """Divide a nonzero integer vector by the gcd of its coordinates."""
    g = gcd_vec(v)
    if g == 0:
        raise LatticeError("zero vector has no primitive form")
    return tuple(c // g for c in v)


def _cross2(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _det3(a, b, c) -> int:
    return (
        a[0] * (b[1] * c[2] - b[2] * c[1])
        - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
    )


def int_det(rows: list[list[int]]) -> int:
    """Exact determinant of a small integer matrix (Bareiss elimination)."""
    m = [list(map(int, r)) for r in rows]
    n = len(m)
    if any(len(r) != n for r in m):
        raise LatticeError("determinant needs a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


def _affine_basis(points: list[IntVec]):
    """Greedy affinely independent subset: (base point, difference vectors)."""
    base = points[0]
    basis: list[IntVec] = []
    for p in points[1:]:
        d = tuple(a - b for a, b in zip(p, base))
        if all(c == 0 for c in d):
            continue
        cand = basis + [d]
        # rank test on the stacked difference vectors
        if _int_rank(cand) == len(cand):
            basis = cand
        if len(basis) == len(base):
            break
    return base, basis


def _int_rank(vecs: list[IntVec]) -> int:
    m = [list(map(Fraction, v)) for v in vecs]
    rank = 0
    ncols = len(m[0]) if m else 0
    row = 0
    for col in range(ncols):
        piv = None
        for r in range(row, len(m)):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        for r in range(row + 1, len(m)):
            f = m[r][col] / pv
            if f:
                for c in range(col, ncols):
                    m[r][c] -= f * m[row][c]
        row += 1
        rank += 1
    return rank


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of lattice points, stored by its exact vertex set.

    `vertices` holds exactly the extreme points (counterclockwise for
    full-dimensional 2-polytopes).  `affine_dim` may be less than the
    ambient dimension; lower-dimensional polytopes are legal values
    (faces are intrinsically lower-dimensional) and carry their own flag.
    """

    dim: int
    vertices: tuple[IntVec, ...]
    affine_dim: int

    def __post_init__(self):
        if not self.vertices:
            raise LatticeError("polytope needs at least one vertex")

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    def translate(self, b) -> "LatticePolytope":
        b = _as_ivec(b)
        return LatticePolytope(
            self.dim,
            tuple(tuple(x + y for x, y in zip(v, b)) for v in self.vertices),
            self.affine_dim,
        )

    def dilate(self, k: int) -> "LatticePolytope":
        if k < 0:
            raise LatticeError("dilation factor must be >= 0")
        return LatticePolytope(
            self.dim,
            tuple(tuple(k * c for c in v) for v in self.vertices),
            self.affine_dim if k > 0 else 0,
        )

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "vertices": [list(v) for v in self.vertices]})

    @staticmethod
    def from_json(text: str) -> "LatticePolytope":
        obj = json.loads(text)
        return convex_hull(obj["vertices"], dim=obj["dim"])


def _hull_1d(points: list[IntVec]) -> list[IntVec]:
    lo, hi = min(points), max(points)
    return [lo] if lo == hi else [lo, hi]


def _hull_2d(points: list[IntVec]) -> list[IntVec]:
    """Monotone chain with exact cross products; collinear points dropped.

    Returns counterclockwise ordering starting at the lexicographic minimum.
    """
    pts = sorted(set(points))
    if len(pts) == 1:
        return pts
    lower: list[IntVec] = []
    for p in pts:
        while len(lower) > 1 and _cross2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[IntVec] = []
    for p in reversed(pts):
        while len(upper) > 1 and _cross2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def _project_to_plane(points: list[IntVec], base: IntVec, basis: list[IntVec]):
    """Injective integer coordinates of coplanar points inside their plane."""
    coords = []
    for p in points:
        d = [a - b for a, b in zip(p, base)]
        coords.append(tuple(sum(di * ui for di, ui in zip(d, u)) for u in basis))
    return coords


def _facet_planes_3d(points: list[IntVec]):
    """All supporting planes of a full-dimensional 3D point set.

    Brute force over point triples with exact predicates; fine for the small
    vertex sets this library handles.  Returns a list of (inner normal,
    offset, points-on-plane indices).
    """
    planes = {}
    n = len(points)
    for i, j, k in itertools.combinations(range(n), 3):
        a, b, c = points[i], points[j], points[k]
        u = tuple(b[t] - a[t] for t in range(3))
        v = tuple(c[t] - a[t] for t in range(3))
        nrm = (
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        )
        if nrm == (0, 0, 0):
            continue
        nrm = primitive(nrm)
        h = sum(x * y for x, y in zip(a, nrm))
        vals = [sum(x * y for x, y in zip(p, nrm)) - h for p in points]
        if all(t >= 0 for t in vals):
            key = (nrm, h)
        elif all(t <= 0 for t in vals):
            nrm = tuple(-x for x in nrm)
            h = -h
            key = (nrm, h)
        else:
            continue
        if key not in planes:
            on = tuple(idx for idx, p in enumerate(points) if
                       sum(x * y for x, y in zip(p, key[0])) == key[1])
            planes[key] = on
    return [(nrm, h, on) for (nrm, h), on in planes.items()]


def _hull_3d(points: list[IntVec]):
    """Exact 3D hull: vertices plus facet planes with inner normals."""
    pts = sorted(set(points))
    planes = _facet_planes_3d(pts)
    verts = []
    for idx, p in enumerate(pts):
        active = [nrm for nrm, h, on in planes if idx in on]
        if len(active) >= 3 and _int_rank(active) == 3:
            verts.append(p)
    return verts, planes, pts


def convex_hull(points, dim: int | None = None) -> LatticePolytope:
    """Minimal vertex representation of conv(points), exact for n <= 3.

    Degenerate (lower-dimensional) hulls are returned with their affine
    dimension set accordingly, never rejected.
    """
    pts = [_as_ivec(p) for p in points]
    if not pts:
        raise LatticeError("empty point set")
    n = dim if dim is not None else len(pts[0])
    if any(len(p) != n for p in pts):
        raise LatticeError("points of mixed dimensions")
    if n > 3:
        raise UnsupportedDimensionError(
            f"exact convex hulls are implemented for n <= 3, got n = {n}")
    base, basis = _affine_basis(pts)
    adim = len(basis)
    if adim == 0:
        return LatticePolytope(n, (base,), 0)
    if adim == 1:
        # extremes along the single direction
        u = basis[0]
        keyed = sorted(pts, key=lambda p: sum((a - b) * c for a, b, c in zip(p, base, u)))
        return LatticePolytope(n, (keyed[0], keyed[-1]), 1)
    if n == 1:
        hull = _hull_1d(pts)
        return LatticePolytope(1, tuple(hull), len(hull) - 1)
    if n == 2 or adim == 2:
        if n == 2:
            hull = _hull_2d(pts)
        else:
            # coplanar 3D input: hull in exact in-plane coordinates
            coords = _project_to_plane(pts, base, basis)
            back = dict(zip(coords, pts))
            hull2 = _hull_2d(list(set(coords)))
            hull = [back[c] for c in hull2]
        return LatticePolytope(n, tuple(hull), adim)
    verts, planes, pts_u = _hull_3d(pts)
    # order is not geometrically meaningful in 3D; keep sorted for determinism
    return LatticePolytope(3, tuple(sorted(verts)), 3)


def minkowski_sum(P: LatticePolytope, Q: LatticePolytope) -> LatticePolytope:
    """Vertex representation of P + Q (edge merge for planar full-dim pairs)."""
    if P.dim != Q.dim:
        raise LatticeError("Minkowski sum needs equal ambient dimensions")
    if P.dim == 2 and P.affine_dim == 2 and Q.affine_dim == 2:
        return _minkowski_sum_2d(P, Q)
    sums = {tuple(a + b for a, b in zip(p, q))
            for p in P.vertices for q in Q.vertices}
    return convex_hull(sums, dim=P.dim)


def _edges_ccw(P: LatticePolytope) -> list[IntVec]:
    vs = P.vertices
    m = len(vs)
    return [tuple(vs[(i + 1) % m][k] - vs[i][k] for k in range(2)) for i in range(m)]


def _angle_cmp(a: IntVec, b: IntVec) -> int:
    def half(v):
        return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1

    ha, hb = half(a), half(b)
    if ha != hb:
        return -1 if ha < hb else 1
    cr = a[0] * b[1] - a[1] * b[0]
    if cr > 0:
        return -1
    if cr < 0:
        return 1
    return 0


def _minkowski_sum_2d(P: LatticePolytope, Q: LatticePolytope) -> LatticePolytope:
    """Merge the two edge fans by angle, walking from the bottom-left vertex."""
    edges = _edges_ccw(P) + _edges_ccw(Q)
    edges.sort(key=cmp_to_key(_angle_cmp))
    # combine parallel runs
    merged: list[list[int]] = []
    for e in edges:
        if merged and _angle_cmp(tuple(merged[-1]), e) == 0:
            merged[-1][0] += e[0]
            merged[-1][1] += e[1]
        else:
            merged.append(list(e))
    start_p = min(P.vertices, key=lambda v: (v[1], v[0]))
    start_q = min(Q.vertices, key=lambda v: (v[1], v[0]))
    cur = [start_p[0] + start_q[0], start_p[1] + start_q[1]]
    verts = []
    for e in merged:
        verts.append(tuple(cur))
        cur[0] += e[0]
        cur[1] += e[1]
    if tuple(cur) != verts[0]:
        raise LatticeError("edge merge failed to close the boundary")
    return LatticePolytope(2, tuple(verts), 2)


def volume(P: LatticePolytope) -> Fraction:
    """Exact Euclidean volume, 0 for lower-dimensional polytopes."""
    if P.dim > 3:
        raise UnsupportedDimensionError("exact volume needs n <= 3")
    if P.affine_dim < P.dim:
        return Fraction(0)
    if P.dim == 1:
        return Fraction(P.vertices[1][0] - P.vertices[0][0])
    if P.dim == 2:
        vs = P.vertices
        s = 0
        for i in range(len(vs)):
            x0, y0 = vs[i]
            x1, y1 = vs[(i + 1) % len(vs)]
            s += x0 * y1 - x1 * y0
        return Fraction(abs(s), 2)
    return _volume_3d(P)


def _volume_3d(P: LatticePolytope) -> Fraction:
    pts = list(P.vertices)
    planes = _facet_planes_3d(pts)
    total = 0
    for nrm, h, on in planes:
        face_pts = [pts[i] for i in on]
        fbase, fbasis = _affine_basis(face_pts)
        coords = _project_to_plane(face_pts, fbase, fbasis)
        back = dict(zip(coords, face_pts))
        ring2 = _hull_2d(list(set(coords)))
        ring = [back[c] for c in ring2]
        if len(ring) < 3:
            continue
        # orient the facet ring so its triangles face away from the interior
        u = tuple(ring[1][k] - ring[0][k] for k in range(3))
        v = tuple(ring[2][k] - ring[0][k] for k in range(3))
        if _det3(u, v, nrm) > 0:
            ring.reverse()
        for i in range(1, len(ring) - 1):
            total += _det3(ring[0], ring[i], ring[i + 1])
    return Fraction(abs(total), 6)


def mixed_volume(polys: list[LatticePolytope]) -> Fraction:
    """Inclusion-exclusion mixed volume of n polytopes in R^n.

    Normalized so that MV(P, ..., P) = n! vol(P); this is the Bernstein
    root count for lattice polytopes.  The empty family has MV = 1.
    """
    m = len(polys)
    if m == 0:
        return Fraction(1)
    if any(p.dim != m for p in polys):
        raise LatticeError(f"mixed volume of {m} polytopes needs ambient dimension {m}")
    if m > 3:
        raise UnsupportedDimensionError(
            "general exact mixed volume needs n <= 3 (see mixed_volume_boxes)")
    total = Fraction(0)
    for j in range(1, m + 1):
        sign = (-1) ** (m - j)
        for idxs in itertools.combinations(range(m), j):
            s = polys[idxs[0]]
            for i in idxs[1:]:
                s = minkowski_sum(s, polys[i])
            total += sign * volume(s)
    return total


def mixed_volume_boxes(lengths) -> Fraction:
    """Mixed volume of axis-aligned boxes in any dimension: a permanent.

    Analytic scaffolding for n >= 4, where the exact hull machinery stops.
    `lengths[i][j]` is the edge length of box i along axis j.
    """
    L = [list(map(Fraction, row)) for row in lengths]
    n = len(L)
    if any(len(r) != n for r in L):
        raise LatticeError("need n boxes with n edge lengths each")
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        term = Fraction(1)
        for i, j in enumerate(perm):
            term *= L[i][j]
        total += term
    return total


def support_function(P: LatticePolytope, v) -> int:
    """h_P(v) = min over vertices of <x, v> (inner-normal convention)."""
    v = _as_ivec(v)
    return min(sum(x * y for x, y in zip(p, v)) for p in P.vertices)


def face(points, v) -> list[IntVec]:
    """Subset of a point set attaining the support-function minimum at v."""
    v = _as_ivec(v)
    if all(c == 0 for c in v):
        raise LatticeError("face direction must be nonzero")
    pts = [_as_ivec(p) for p in points]
    vals = [sum(x * y for x, y in zip(p, v)) for p in pts]
    h = min(vals)
    return [p for p, t in zip(pts, vals) if t == h]


def facet_normals(P: LatticePolytope) -> list[IntVec]:
    """Primitive inner normals, one per facet; requires a full-dim polytope."""
    if not P.is_full_dimensional:
        raise LatticeError("facet normals need a full-dimensional polytope")
    if P.dim == 1:
        return [(1,), (-1,)]
    if P.dim == 2:
        out = []
        for d in _edges_ccw(P):
            out.append(primitive((-d[1], d[0])))
        return out
    if P.dim == 3:
        return [nrm for nrm, h, on in _facet_planes_3d(list(P.vertices))]
    raise UnsupportedDimensionError("facet normals need n <= 3")


def lattice_points(P: LatticePolytope) -> list[IntVec]:
    """All lattice points of P (n <= 3), via the facet inequalities."""
    n = P.dim
    V = np.array(P.vertices, dtype=np.int64)
    lo = V.min(axis=0)
    hi = V.max(axis=0)
    grids = np.meshgrid(*[np.arange(lo[k], hi[k] + 1) for k in range(n)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    if P.affine_dim == 0:
        return [tuple(int(c) for c in V[0])]
    keep = np.ones(len(pts), dtype=bool)
    if P.is_full_dimensional:
        for v in facet_normals(P):
            h = support_function(P, v)
            keep &= pts @ np.array(v, dtype=np.int64) >= h
    elif P.affine_dim == 1:
        base, basis = _affine_basis(list(P.vertices))
        for w in _line_complement(basis[0]):
            vals = pts @ np.array(w, dtype=np.int64)
            keep &= vals == sum(b * c for b, c in zip(base, w))
        d = basis[0]
        for v in (primitive(d), primitive(tuple(-c for c in d))):
            h = support_function(P, v)
            keep &= pts @ np.array(v, dtype=np.int64) >= h
    else:
        raise UnsupportedDimensionError(
            "lattice point enumeration of planar polytopes embedded in R^3 "
            "is not implemented")
    return [tuple(int(c) for c in row) for row in pts[keep]]


def _line_complement(u: IntVec) -> list[IntVec]:
    """Integer functionals vanishing exactly on the line spanned by u."""
    n = len(u)
    if n == 1:
        return []
    if n == 2:
        return [primitive((-u[1], u[0]))]
    # n == 3: cross with a non-parallel axis vector, then complete
    for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        w1 = (
            u[1] * e[2] - u[2] * e[1],
            u[2] * e[0] - u[0] * e[2],
            u[0] * e[1] - u[1] * e[0],
        )
        if w1 != (0, 0, 0):
            break
    w2 = (
        u[1] * w1[2] - u[2] * w1[1],
        u[2] * w1[0] - u[0] * w1[2],
        u[0] * w1[1] - u[1] * w1[0],
    )
    return [primitive(w1), primitive(w2)]


def projected_mixed_volumes(polys: list[LatticePolytope], w) -> list[float]:
    """For each i, the mixed volume in w-perp of the projections of the
    other polytopes.  Euclidean measure on w-perp; floating point.
    """
    w = np.asarray(w, dtype=float)
    n = len(polys)
    if abs(np.linalg.norm(w) - 1.0) > 1e-12:
        raise LatticeError("projection direction must be a unit vector")
    if any(p.dim != n for p in polys):
        raise LatticeError("need n polytopes in ambient dimension n")
    basis = _unit_complement_basis(w)
    out = []
    for i in range(n):
        others = [p for j, p in enumerate(polys) if j != i]
        proj = [np.array(p.vertices, dtype=float) @ basis.T for p in others]
        out.append(_mixed_volume_float(proj))
    return out


def _unit_complement_basis(w: np.ndarray) -> np.ndarray:
    n = len(w)
    M = np.eye(n) - np.outer(w, w)
    q, r = np.linalg.qr(M)
    cols = [q[:, j] for j in range(n) if abs(r[j, j]) > 1e-9]
    B = np.array(cols[: n - 1])
    if len(B) != n - 1:
        raise LatticeError("failed to build a basis of w-perp")
    return B


def _mixed_volume_float(proj: list[np.ndarray]) -> float:
    m = len(proj)
    if m == 0:
        return 1.0
    if m == 1:
        pts = proj[0][:, 0]
        return float(pts.max() - pts.min())
    if m == 2:
        a1 = _hull_area_float(proj[0])
        a2 = _hull_area_float(proj[1])
        s = np.array([p + q for p in proj[0] for q in proj[1]])
        return float(_hull_area_float(s) - a1 - a2)
    raise UnsupportedDimensionError("projected mixed volumes implemented for n <= 3")


def _hull_area_float(pts: np.ndarray) -> float:
    pts = np.unique(np.round(pts, 12), axis=0)
    if len(pts) < 3:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def chain(seq):
        out = []
        for p in seq:
            while len(out) > 1 and (
                (out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])
            ) <= 1e-18:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    ring = np.array(lower[:-1] + upper[:-1])
    if len(ring) < 3:
        return 0.0
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def complete_to_unimodular(a) -> tuple[list[list[int]], list[list[int]]]:
    """Integer matrix A with first row `a` and det +-1, plus its inverse.

    `a` must be primitive.  Built recursively from extended gcds.
    """
    a = _as_ivec(a)
    if gcd_vec(a) != 1:
        raise LatticeError(f"{a} is not primitive")
    A = _complete(list(a))
    d = int_det(A)
    if d not in (-1, 1):
        raise LatticeError("unimodular completion failed")
    Ainv = _int_inverse(A, d)
    return A, Ainv


def _complete(a: list[int]) -> list[list[int]]:
    n = len(a)
    if n == 1:
        return [[a[0]]]
    g = gcd_vec(a[:-1])
    if g == 0:
        # a = (0, ..., 0, +-1): swap the last axis to the front
        M = [[0] * n for _ in range(n)]
        M[0][n - 1] = a[-1]
        for i in range(1, n):
            M[i][i - 1] = 1
        return M
    ap = [c // g for c in a[:-1]]
    B = _complete(ap)
    gg, u, v = _xgcd(g, a[-1])
    assert gg == 1
    M = [[0] * n for _ in range(n)]
    M[0][: n - 1] = [g * c for c in ap]
    M[0][n - 1] = a[-1]
    M[1][: n - 1] = [-v * c for c in ap]
    M[1][n - 1] = u
    for i in range(2, n):
        M[i][: n - 1] = B[i - 1]
    return M


def _xgcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _int_inverse(A: list[list[int]], det: int) -> list[list[int]]:
    n = len(A)
    inv = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[A[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            cof = int_det(minor) if n > 1 else 1
            inv[i][j] = ((-1) ** (i + j)) * cof * det  # det is +-1, so 1/det = det
    return inv
