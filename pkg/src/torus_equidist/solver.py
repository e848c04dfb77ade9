"""Zero cycles of torus systems, n <= 2.

Univariate cycles come straight from the simultaneous root finder with
cluster-merged multiplicities.  Bivariate cycles go through the eliminant
for the first coordinate, back-substitution into the smaller univariate
slice, and a 2x2 Newton polish; the result is certified against the exact
Bernstein number and the solve fails loudly on any mismatch.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .laurent import LaurentPolynomial, SystemSpec, cpow_int
from .resultants import (
    DegenerateSystemError,
    InterpolationRangeError,
    check_nonzero_resultants,
    elimination_polynomial,
    interpolate_eliminant_window,
)
from .rootfind import aberth_roots, aberth_roots_batch


class SolverError(RuntimeError):
    pass


@dataclass
class ZeroCycle:
    """Finite multiset of torus points with positive integer multiplicities."""

    n: int
    points: list[tuple[tuple[complex, ...], int]]
    residuals: list[float] = field(default_factory=list)
    converged: bool = True

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.points)

    @property
    def support_size(self) -> int:
        return len(self.points)

    def coordinates(self) -> np.ndarray:
        return np.array([pt for pt, _ in self.points], dtype=complex)

    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.points], dtype=np.int64)

    def arguments(self) -> np.ndarray:
        a = np.angle(self.coordinates())
        a[a <= -np.pi] = np.pi  # keep arguments in (-pi, pi]
        return a

    def moduli(self) -> np.ndarray:
        return np.abs(self.coordinates())

    def to_json(self) -> str:
        obj = {
            "n": self.n,
            "degree": self.degree,
            "points": [
                {"z": [[z.real, z.imag] for z in pt], "m": int(m)}
                for pt, m in self.points
            ],
            "residual": max(self.residuals) if self.residuals else None,
        }
        return json.dumps(obj)

    @staticmethod
    def from_json(text: str) -> "ZeroCycle":
        obj = json.loads(text)
        pts = [
            (tuple(complex(re, im) for re, im in entry["z"]), int(entry["m"]))
            for entry in obj["points"]
        ]
        return ZeroCycle(int(obj["n"]), pts)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        header = []
        for j in range(self.n):
            header += [f"re{j+1}", f"im{j+1}", f"mod{j+1}", f"arg{j+1}"]
        header.append("multiplicity")
        w.writerow(header)
        for pt, m in self.points:
            row = []
            for z in pt:
                row += [repr(z.real), repr(z.imag), repr(abs(z)), repr(math.atan2(z.imag, z.real))]
            row.append(m)
            w.writerow(row)
        return buf.getvalue()


def _canonical_sort(points):
    def key(item):
        pt, _m = item
        out = []
        for z in pt:
            out += [abs(z), math.atan2(z.imag, z.real)]
        return tuple(out)

    return sorted(points, key=key)


def _cluster_points(roots: np.ndarray, radius_rel: float) -> list[tuple[complex, int]]:
    """Greedy merge of 1-D roots within a relative radius; sums multiplicity."""
    order = np.lexsort((roots.imag, roots.real))
    merged: list[list] = []
    for idx in order:
        z = roots[idx]
        placed = False
        for entry in merged:
            c = entry[0] / entry[1]
            if abs(z - c) <= radius_rel * (1.0 + abs(c)):
                entry[0] += z
                entry[1] += 1
                placed = True
                break
        if not placed:
            merged.append([z, 1])
    return [(entry[0] / entry[1], entry[1]) for entry in merged]


def univariate_roots(f, tol: float = 1e-12) -> ZeroCycle:
    """All torus roots of a univariate (Laurent) polynomial as a cycle.

    Monomial factors x^k are stripped (the cycle lives in the punctured
    plane), clusters of radius ~ sqrt(tol) merge into multiple roots, and
    each cluster gets a multiplicity-weighted Newton polish.
    """
    coeffs, low = _as_coeff_array(f)
    if len(coeffs) == 0:
        raise SolverError("zero polynomial has no root cycle")
    if len(coeffs) == 1:
        raise SolverError("constant polynomial has an empty cycle")
    roots, converged = aberth_roots(coeffs, tol=min(tol, 1e-13))
    radius = max(1e-7, math.sqrt(tol))
    clusters = _cluster_points(roots, radius)
    rows = []
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    for z, m in clusters:
        for _ in range(4 if m > 1 else 2):
            p = np.polyval(coeffs[::-1], z)
            dp = np.polyval(dcoeffs[::-1], z)
            if dp == 0:
                break
            z = z - m * p / dp
        rows.append((((complex(z),), m), abs(np.polyval(coeffs[::-1], z))))
    rows.sort(key=lambda r: (abs(r[0][0][0]), math.atan2(r[0][0][0].imag, r[0][0][0].real)))
    pts = [r[0] for r in rows]
    res = [float(r[1]) for r in rows]
    return ZeroCycle(1, pts, res, converged)


def _as_coeff_array(f) -> tuple[np.ndarray, int]:
    if isinstance(f, LaurentPolynomial):
        if f.n != 1:
            raise SolverError("univariate solver needs n = 1")
        if f.is_zero:
            return np.empty(0, dtype=complex), 0
        exps = sorted(e[0] for e in f.terms)
        lo, hi = exps[0], exps[-1]
        c = np.zeros(hi - lo + 1, dtype=complex)
        for (e,), v in f.terms.items():
            c[e - lo] = complex(v)
        return c, lo
    c = np.asarray(list(f), dtype=complex)
    nz = np.nonzero(c)[0]
    if len(nz) == 0:
        return np.empty(0, dtype=complex), 0
    return c[nz[0]:nz[-1] + 1], int(nz[0])


class _BivariateEval:
    """Matrix-based evaluation of a bivariate Laurent polynomial and its
    partial derivatives at many points at once."""

    def __init__(self, f: LaurentPolynomial):
        exps = np.array(list(f.terms.keys()), dtype=np.int64)
        self.lo = exps.min(axis=0)
        dx, dy = (exps.max(axis=0) - self.lo).astype(int)
        C = np.zeros((dy + 1, dx + 1), dtype=complex)
        for (ex, ey), c in f.terms.items():
            C[ey - self.lo[1], ex - self.lo[0]] = complex(c)
        self.C = C
        self.absC = np.abs(C)
        ky = np.arange(1, dy + 1)[:, None]
        kx = np.arange(1, dx + 1)[None, :]
        self.Cy = C[1:, :] * ky if dy else np.zeros((0, dx + 1), dtype=complex)
        self.Cx = C[:, 1:] * kx if dx else np.zeros((dy + 1, 0), dtype=complex)

    def _powers(self, x: np.ndarray, width: int) -> np.ndarray:
        V = np.empty((len(x), width), dtype=complex)
        V[:, 0] = 1.0
        for j in range(1, width):
            V[:, j] = V[:, j - 1] * x
        return V

    def _mono(self, x, y):
        mx = x ** int(self.lo[0]) if self.lo[0] else np.ones_like(x)
        my = y ** int(self.lo[1]) if self.lo[1] else np.ones_like(y)
        return mx * my

    def _eval_grid(self, M: np.ndarray, x, y):
        if M.size == 0:
            return np.zeros_like(x)
        V = self._powers(x, M.shape[1])
        rows = V @ M.T
        out = rows[:, -1]
        for k in range(M.shape[0] - 2, -1, -1):
            out = out * y + rows[:, k]
        return out

    def value(self, x, y):
        return self._mono(x, y) * self._eval_grid(self.C, x, y)

    def shifted_value(self, x, y):
        """Value without the monomial prefactor (same torus roots)."""
        return self._eval_grid(self.C, x, y)

    def shifted_grads(self, x, y):
        gx = self._eval_grid(self.Cx, x, y)
        gy_ = self._eval_grid(self.Cy, x, y)
        return gx, gy_

    def majorant(self, x, y):
        ax, ay = np.abs(x), np.abs(y)
        return self._eval_grid(self.absC, ax.astype(complex), ay.astype(complex)).real

    def row_coeffs_at(self, x: np.ndarray) -> np.ndarray:
        """Coefficients in y of f(x, .) for a batch of x values: (B, dy+1)."""
        V = self._powers(x, self.C.shape[1])
        return V @ self.C.T


def zero_cycle(system: SystemSpec, tol: float = 1e-12,
               candidate_rel: float = 1e-6) -> ZeroCycle:
    """Zero cycle of a square torus system, certified by the exact
    Bernstein number.  Raises DegenerateSystemError when the count cannot
    be attributed (vanishing directional resultant, cluster collision)."""
    if system.n == 1:
        return univariate_roots(system.polynomials[0], tol)
    if system.n != 2:
        raise SolverError("zero cycles implemented for n <= 2")
    D = system.bernstein_number
    if D < 1:
        raise DegenerateSystemError("Bernstein number must be >= 1 before solving")
    check_nonzero_resultants(system)
    single_band = True
    try:
        E = elimination_polynomial(system, (1, 0), check=False)
        x_roots, conv = aberth_roots(E.coeffs, tol=1e-13)
        if not conv:
            x_roots, conv = aberth_roots(E.coeffs, tol=1e-13, max_iter=400)
    except InterpolationRangeError:
        # extreme eliminant coefficients are unrecoverable on one circle;
        # sweep evaluation radii and collect the per-band root candidates
        single_band = False
        x_roots, conv = _multi_band_roots(system, D)
    f1, f2 = system.polynomials
    ev1, ev2 = _BivariateEval(f1), _BivariateEval(f2)
    pairs = _back_substitute(x_roots, ev1, ev2, candidate_rel)
    pts = _newton_polish(pairs, ev1, ev2, tol)
    pts = pts[np.all(pts != 0, axis=1)]
    rel1 = np.abs(ev1.shifted_value(pts[:, 0], pts[:, 1])) / ev1.majorant(pts[:, 0], pts[:, 1])
    rel2 = np.abs(ev2.shifted_value(pts[:, 0], pts[:, 1])) / ev2.majorant(pts[:, 0], pts[:, 1])
    ok = (rel1 < 1e-8) & (rel2 < 1e-8)
    pts = pts[ok]
    # cross-band duplicates polish to within Newton accuracy, not to the
    # single-band cluster scale, so the multi-band merge is looser
    distinct = [pt for pt, _ in _dedupe_points(pts, 1e-8 if single_band else 3e-7)]
    if single_band:
        merged = _attribute_multiplicities(distinct, x_roots, D)
    elif len(distinct) == D:
        merged = [(pt, 1) for pt in distinct]
    else:
        raise DegenerateSystemError(
            f"multi-band recovery found {len(distinct)} simple points, "
            f"expected {D}")
    total = sum(m for _, m in merged)
    if total != D:
        raise DegenerateSystemError(
            f"Bernstein certificate failed: found degree {total}, expected {D}")
    final_pts = _canonical_sort(merged)
    coords = np.array([p for p, _ in final_pts], dtype=complex)
    a1 = np.abs(ev1.value(coords[:, 0], coords[:, 1]))
    a2 = np.abs(ev2.value(coords[:, 0], coords[:, 1]))
    residuals = np.maximum(a1, a2).tolist()
    return ZeroCycle(2, final_pts, residuals, conv)


def _back_substitute(x_roots: np.ndarray, ev1: _BivariateEval, ev2: _BivariateEval,
                     candidate_rel: float) -> np.ndarray:
    """Candidate (x, y) pairs: roots in y of whichever polynomial has the
    healthier leading slice at each x, filtered by the other polynomial."""
    rows1 = ev1.row_coeffs_at(x_roots)
    rows2 = ev2.row_coeffs_at(x_roots)
    # per root, solve the univariate slice with the larger effective degree
    # (ties broken by the stronger relative leading coefficient); a slice can
    # collapse to a near-zero constant, e.g. in product systems
    eff1, lead1 = _effective_degree(rows1)
    eff2, lead2 = _effective_degree(rows2)
    use1 = (eff1 > eff2) | ((eff1 == eff2) & (lead1 >= lead2))
    out = []
    for use, rows, other in ((use1, rows1, ev2), (~use1, rows2, ev1)):
        idx = np.nonzero(use)[0]
        if len(idx) == 0:
            continue
        sub = _trim_rows(rows[idx])
        ys, _ok = aberth_roots_batch(sub, tol=1e-13)
        w = ys.shape[1]
        xs = np.repeat(x_roots[idx], w)
        flat_y = ys.ravel()
        valid = np.isfinite(flat_y) & (flat_y != 0)
        val = np.full(len(flat_y), np.inf)
        if valid.any():
            val[valid] = np.abs(other.shifted_value(xs[valid], flat_y[valid]))
            maj = np.ones_like(val)
            maj[valid] = np.maximum(other.majorant(xs[valid], flat_y[valid]), 1e-300)
            rel = (val / maj).reshape(len(idx), w)
        else:
            continue
        # keep candidates close to the per-root best: multiple elimination
        # roots perturb the slice, so an absolute cutoff alone misfires on
        # product-like systems where several branches tie
        row_best = rel.min(axis=1, keepdims=True)
        keep = (rel <= candidate_rel * 100) | (rel <= 50.0 * row_best)
        keep &= np.isfinite(rel)
        sel = keep.ravel() & valid
        out.append(np.stack([xs[sel], flat_y[sel]], axis=1))
    if not out or not any(len(o) for o in out):
        raise DegenerateSystemError("back-substitution produced no candidates")
    return np.concatenate(out, axis=0)


def _effective_degree(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per row: largest significant coefficient index and its relative size."""
    scale = np.abs(rows).max(axis=1)
    scale = np.where(scale == 0, 1.0, scale)
    sig = np.abs(rows) / scale[:, None] > 1e-12
    idx = np.arange(rows.shape[1])[None, :]
    eff = np.where(sig, idx, -1).max(axis=1)
    eff = np.maximum(eff, 0)
    lead = np.abs(rows[np.arange(len(rows)), eff]) / scale
    return eff, lead


def _trim_rows(rows: np.ndarray) -> np.ndarray:
    """Drop trailing coefficient columns that are negligible in every row."""
    scale = np.abs(rows).max(axis=1, keepdims=True)
    scale = np.where(scale == 0, 1, scale)
    sig = np.abs(rows) / scale > 1e-13
    width = int(np.max(np.nonzero(sig.any(axis=0))[0])) + 1 if sig.any() else 1
    rows = rows[:, :width]
    # rows whose own leading entries vanish get a tiny regularization so the
    # batch root finder stays well-posed; spurious huge roots are filtered
    lead = np.abs(rows[:, -1]) / scale[:, 0]
    weak = lead < 1e-13
    if weak.any():
        rows = rows.copy()
        rows[weak, -1] = scale[weak, 0] * 1e-13
    low = np.abs(rows[:, 0]) / scale[:, 0]
    weak0 = low < 1e-300
    if weak0.any():
        rows[weak0, 0] = scale[weak0, 0] * 1e-250
    return rows


def _newton_polish(pairs: np.ndarray, ev1, ev2, tol: float,
                   max_iter: int = 60) -> np.ndarray:
    x = pairs[:, 0].copy()
    y = pairs[:, 1].copy()
    for _ in range(max_iter):
        F1 = ev1.shifted_value(x, y)
        F2 = ev2.shifted_value(x, y)
        J11, J12 = ev1.shifted_grads(x, y)
        J21, J22 = ev2.shifted_grads(x, y)
        det = J11 * J22 - J12 * J21
        det = np.where(np.abs(det) < 1e-300, 1e-300, det)
        dx = (F1 * J22 - F2 * J12) / det
        dy = (F2 * J11 - F1 * J21) / det
        step = np.abs(dx) + np.abs(dy)
        cap = 0.5 * (1.0 + np.abs(x) + np.abs(y))
        shrink = np.where(step > cap, cap / np.maximum(step, 1e-300), 1.0)
        x = x - dx * shrink
        y = y - dy * shrink
        if np.max(step / (1.0 + np.abs(x) + np.abs(y))) < tol:
            break
    return np.stack([x, y], axis=1)


def _dedupe_points(pts: np.ndarray, rel: float) -> list[tuple[tuple[complex, complex], int]]:
    if len(pts) == 0:
        return []
    order = np.argsort(pts[:, 0].real, kind="stable")
    pts = pts[order]
    window = 10 * rel * (1.0 + np.abs(pts).max())
    merged: list[list] = []
    for x, y in pts:
        hit = None
        for entry in reversed(merged):
            cx, cy = entry[0] / entry[2], entry[1] / entry[2]
            if x.real - cx.real > window:
                break  # sorted by real part: nothing earlier can match
            if abs(x - cx) <= rel * (1 + abs(cx)) and abs(y - cy) <= rel * (1 + abs(cy)):
                entry[0] += x
                entry[1] += y
                entry[2] += 1
                hit = entry
                break
        if hit is None:
            merged.append([x, y, 1])
    return [((e[0] / e[2], e[1] / e[2]), e[2]) for e in merged]


def _multi_band_roots(system: SystemSpec, D: int,
                      max_passes: int = 9) -> tuple[np.ndarray, bool]:
    """First-coordinate root candidates from a ladder of evaluation radii.

    Each radius recovers the eliminant roots whose moduli lie in the band
    where the scaled coefficient window clears the noise floor.  The
    ladder extends outward while a window edge fades into noise (meaning
    more roots lie beyond) and stops at sharp edges.  Roots near faded
    edges are dropped; overlapping bands re-cover them.
    """
    import os

    f1, f2 = system.polynomials
    threads = max(1, int(os.environ.get("TORUS_EQUIDIST_THREADS", "1") or 1))

    def band(radius):
        win = interpolate_eliminant_window(f1, f2, D, threads=threads,
                                           radius=radius)
        roots, ok = aberth_roots(win.coeffs, tol=1e-12, max_iter=120)
        return roots * radius, win, ok

    def frontier_of(roots, direction):
        mods = np.abs(roots)
        q = 0.01 if direction == "low" else 0.99
        return float(np.quantile(mods, q))

    roots0, win0, conv = band(1.0)
    collected = [roots0]
    passes = 1
    for direction in ("low", "high"):
        faded = win0.faded_low if direction == "low" else win0.faded_high
        frontier = frontier_of(roots0, direction)
        while faded and passes < max_passes:
            radius = 0.87 * frontier if direction == "low" else 1.15 * frontier
            roots, win, ok = band(radius)
            conv = conv and ok
            passes += 1
            if len(roots) == 0:
                break
            collected.append(roots)
            new_frontier = frontier_of(roots, direction)
            if direction == "low":
                faded = win.faded_low and new_frontier < 0.999 * frontier
            else:
                faded = win.faded_high and new_frontier > 1.001 * frontier
            frontier = new_frontier
    return np.concatenate(collected), conv


def _attribute_multiplicities(distinct, x_roots: np.ndarray, D: int):
    """Cycle multiplicities from the eliminant's root multiset.

    Every eliminant root instance accounts for exactly one point of the
    cycle (counted with multiplicity).  When the distinct solved points
    already number D, all multiplicities are 1.  Otherwise each root copy
    is assigned to the nearest first coordinate and the copies of a shared
    first coordinate are split evenly; uneven splits mean the cluster
    cannot be attributed and the system is flagged degenerate.
    """
    if len(distinct) == D:
        return [(pt, 1) for pt in distinct]
    if not distinct:
        raise DegenerateSystemError("no solved points survived filtering")
    if len(distinct) > D or len(x_roots) > 20000:
        raise DegenerateSystemError(
            f"cannot attribute multiplicities: {len(distinct)} points for degree {D}")
    pxs = np.array([pt[0] for pt in distinct])
    # group point indices sharing a first coordinate
    groups: list[list[int]] = []
    centers: list[complex] = []
    for i, x in enumerate(pxs):
        for g, c in enumerate(centers):
            if abs(x - c) <= 1e-6 * (1.0 + abs(c)):
                groups[g].append(i)
                break
        else:
            groups.append([i])
            centers.append(complex(x))
    centers_arr = np.array(centers)
    counts = np.zeros(len(groups), dtype=np.int64)
    for r in x_roots:
        counts[int(np.argmin(np.abs(centers_arr - r)))] += 1
    mult = [0] * len(distinct)
    for g, members in enumerate(groups):
        k, rem = divmod(int(counts[g]), len(members))
        if rem != 0 or k < 1:
            raise DegenerateSystemError(
                "eliminant root cluster does not split evenly over the "
                f"{len(members)} points sharing a first coordinate")
        for i in members:
            mult[i] = k
    return [(pt, m) for pt, m in zip(distinct, mult)]


def direct_image(Z: ZeroCycle, a) -> ZeroCycle:
    """Pushforward of the cycle under the monomial character x -> x^a.

    Images within relative 1e-10 merge with summed multiplicity; the
    degree is preserved.
    """
    a = tuple(int(c) for c in a)
    if len(a) != Z.n or all(c == 0 for c in a):
        raise SolverError("pushforward direction must be a nonzero n-vector")
    images = []
    for pt, m in Z.points:
        w = 1.0 + 0j
        for z, k in zip(pt, a):
            w *= cpow_int(z, k)
        images.append((w, m))
    images.sort(key=lambda t: (t[0].real, t[0].imag))
    merged: list[list] = []
    for w, m in images:
        if merged:
            c = merged[-1][0] / merged[-1][2]
            if abs(w - c) <= 1e-10 * (1.0 + abs(c)):
                merged[-1][0] += w * m
                merged[-1][1] += m
                merged[-1][2] += m
                continue
        merged.append([w * m, m, m])
    pts = [((e[0] / e[1],), e[1]) for e in merged]
    return ZeroCycle(1, _canonical_sort(pts))
