"""Discrepancy statistics of zero cycles on the torus.

The angle discrepancy is the exact supremum over half-open boxes of the
deviation between normalized box mass and the uniform product measure of
the arguments.  Candidate box endpoints are the point arguments themselves
(plus -pi and pi); closed endpoints realize the excess suprema and open
endpoints the deficit suprema, so a prefix-scan over sorted candidates is
exact.  Above a degree cap the candidate set is subsampled and the result
is a flagged lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .solver import ZeroCycle

EXACT_CAP = 400


class CycleError(ValueError):
    pass


@dataclass
class BoxWitness:
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    mode: str  # "excess" (closed box limit) or "deficit" (open box limit)


@dataclass
class AngleDiscrepancy:
    value: float
    witness: BoxWitness
    exact: bool = True

    def __float__(self):
        return self.value


@dataclass
class DiscrepancyReport:
    """Everything the CLI reports about one cycle's distribution."""

    degree: int
    angle: AngleDiscrepancy
    radius: dict[float, float]
    pushforward_sup: float
    pushforward_sup_witness: tuple[int, ...]
    axis_radius: dict[float, float] = field(default_factory=dict)


def _weighted_args(args: np.ndarray, mult: np.ndarray):
    order = np.argsort(args, kind="stable")
    a = args[order]
    w = mult[order].astype(np.int64)
    pos, start = np.unique(a, return_index=True)
    wsum = np.add.reduceat(w, start)
    return pos, wsum


def _axis_candidates(pos: np.ndarray, cap: int | None):
    """Candidate endpoints: the point arguments plus the domain boundary.

    With a cap, a stratified (quantile-spaced) subsample of the arguments
    is used; counting stays exact, only endpoints are thinned.
    """
    exact = True
    sel = pos
    if cap is not None and len(pos) > cap:
        idx = np.unique(np.linspace(0, len(pos) - 1, cap).round().astype(int))
        sel = pos[idx]
        exact = False
    cand = np.unique(np.concatenate([[-np.pi], sel, [np.pi]]))
    return cand, exact


def _prefix_le(cand, pos, wsum):
    """Mass with argument <= c for every candidate c (exact counting)."""
    idx = np.searchsorted(pos, cand, side="right")
    cum = np.concatenate([[0], np.cumsum(wsum)])
    return cum[idx]


def _prefix_lt(cand, pos, wsum):
    """Mass with argument strictly < c for every candidate c."""
    idx = np.searchsorted(pos, cand, side="left")
    cum = np.concatenate([[0], np.cumsum(wsum)])
    return cum[idx]


def angle_discrepancy(Z: ZeroCycle, cap: int | None = EXACT_CAP) -> AngleDiscrepancy:
    """Sup over half-open boxes prod (alpha_j, beta_j] of
    |mass/deg - prod (beta_j - alpha_j)/(2 pi)|.

    Exact for n = 1 always and for n = 2 up to `cap` candidate positions
    per axis; beyond the cap (or for n >= 3) a stratified candidate
    subsample gives a flagged lower bound (counting stays exact, only the
    box endpoints are thinned).
    """
    if Z.degree < 1:
        raise CycleError("empty cycle")
    if Z.n == 1:
        return _angle_disc_1d(Z)
    if Z.n == 2:
        return _angle_disc_2d(Z, cap)
    return _angle_disc_sampled(Z, cap)


def _angle_disc_1d(Z: ZeroCycle) -> AngleDiscrepancy:
    args = Z.arguments().ravel()
    pos, wsum = _weighted_args(args, Z.multiplicities())
    cand, _ = _axis_candidates(pos, None)
    D = float(Z.degree)
    le = _prefix_le(cand, pos, wsum).astype(float)
    lt = _prefix_lt(cand, pos, wsum).astype(float)
    two_pi = 2.0 * math.pi
    # excess: closed [c_u, c_v], u <= v; count = le[v] - lt[u]
    A = le / D - cand / two_pi
    B = lt / D - cand / two_pi
    Bmin = np.minimum.accumulate(B)
    exc_v = int(np.argmax(A - Bmin))
    exc = float(A[exc_v] - Bmin[exc_v])
    exc_u = int(np.argmin(B[: exc_v + 1]))
    # deficit: open (c_u, c_v), u < v; count = lt[v] - le[u]
    F = cand / two_pi - lt / D
    E = cand / two_pi - le / D
    defic = -math.inf
    def_u = def_v = 0
    if len(cand) > 1:
        Emin = np.minimum.accumulate(E)
        vals = F[1:] - Emin[:-1]
        def_v = int(np.argmax(vals)) + 1
        defic = float(vals[def_v - 1])
        def_u = int(np.argmin(E[:def_v]))
    if exc >= defic:
        witness = BoxWitness((float(cand[exc_u]),), (float(cand[exc_v]),), "excess")
        return AngleDiscrepancy(exc, witness, True)
    witness = BoxWitness((float(cand[def_u]),), (float(cand[def_v]),), "deficit")
    return AngleDiscrepancy(defic, witness, True)


def _cumulative_grids(args, mult, cand1, cand2):
    """Four cumulative mass matrices indexed by candidate positions, one per
    combination of <= / < comparisons on the two axes."""
    m1, m2 = len(cand1), len(cand2)
    grids = {}
    for mode1, side1 in (("le", "left"), ("lt", "right")):
        i1 = np.searchsorted(cand1, args[:, 0], side=side1)
        for mode2, side2 in (("le", "left"), ("lt", "right")):
            i2 = np.searchsorted(cand2, args[:, 1], side=side2)
            g = np.zeros((m1 + 1, m2 + 1))
            np.add.at(g, (np.minimum(i1, m1), np.minimum(i2, m2)), mult)
            grids[mode1 + mode2] = g.cumsum(axis=0).cumsum(axis=1)[:m1, :m2]
    return grids


def _angle_disc_2d(Z: ZeroCycle, cap) -> AngleDiscrepancy:
    args = Z.arguments()
    mult = Z.multiplicities().astype(float)
    D = float(Z.degree)
    two_pi = 2.0 * math.pi

    pos1, _ = _weighted_args(args[:, 0], Z.multiplicities())
    pos2, _ = _weighted_args(args[:, 1], Z.multiplicities())
    cand1, exact1 = _axis_candidates(pos1, cap)
    cand2, exact2 = _axis_candidates(pos2, cap)
    exact = exact1 and exact2
    G = _cumulative_grids(args, mult, cand1, cand2)
    # G["le","lt"][i, k] = mass(arg1 <= cand1[i], arg2 < cand2[k]), etc.

    best_exc = (-math.inf, 0, 0, 0, 0)
    best_def = (-math.inf, 0, 0, 0, 0)
    m1 = len(cand1)
    p2 = cand2 / two_pi
    for u1 in range(m1):
        # closed x-range [cand1[u1], cand1[v1]], all v1 >= u1 at once
        lam = ((cand1[u1:] - cand1[u1]) / two_pi)[:, None]
        row_le = (G["lele"][u1:] - G["ltle"][u1][None, :]) / D
        row_lt = (G["lelt"][u1:] - G["ltlt"][u1][None, :]) / D
        A = row_le - lam * p2[None, :]
        B = row_lt - lam * p2[None, :]
        Bmin = np.minimum.accumulate(B, axis=1)
        gains = A - Bmin
        flat = int(np.argmax(gains))
        v1o, v2 = np.unravel_index(flat, gains.shape)
        if gains[v1o, v2] > best_exc[0]:
            u2 = int(np.argmin(B[v1o, : v2 + 1]))
            best_exc = (float(gains[v1o, v2]), u1, u1 + int(v1o), u2, int(v2))
        # open x-range (cand1[u1], cand1[v1]), v1 > u1
        if u1 + 1 < m1:
            lam_o = ((cand1[u1 + 1:] - cand1[u1]) / two_pi)[:, None]
            open_lt = (G["ltlt"][u1 + 1:] - G["lelt"][u1][None, :]) / D
            open_le = (G["ltle"][u1 + 1:] - G["lele"][u1][None, :]) / D
            F = lam_o * p2[None, :] - open_lt
            E = lam_o * p2[None, :] - open_le
            Emin = np.minimum.accumulate(E, axis=1)
            gains2 = F[:, 1:] - Emin[:, :-1]
            flat2 = int(np.argmax(gains2))
            v1o2, v2o = np.unravel_index(flat2, gains2.shape)
            if gains2[v1o2, v2o] > best_def[0]:
                u2o = int(np.argmin(E[v1o2, : v2o + 1]))
                best_def = (float(gains2[v1o2, v2o]), u1, u1 + 1 + int(v1o2),
                            u2o, int(v2o) + 1)
    if best_exc[0] >= best_def[0]:
        val, u1, v1, u2, v2 = best_exc
        witness = BoxWitness((float(cand1[u1]), float(cand2[u2])),
                             (float(cand1[v1]), float(cand2[v2])), "excess")
        return AngleDiscrepancy(val, witness, exact)
    val, u1, v1, u2, v2 = best_def
    witness = BoxWitness((float(cand1[u1]), float(cand2[u2])),
                         (float(cand1[v1]), float(cand2[v2])), "deficit")
    return AngleDiscrepancy(val, witness, exact)


def _angle_disc_sampled(Z: ZeroCycle, cap) -> AngleDiscrepancy:
    if cap is None:
        raise CycleError(
            "exact angle discrepancy is implemented for n <= 2; "
            "n >= 3 supports the flagged box-sample approximation only")
    rng = np.random.default_rng(20260811)
    args = Z.arguments()
    mult = Z.multiplicities().astype(float)
    D = float(Z.degree)
    n = Z.n
    best = -math.inf
    wit = None
    pool = np.concatenate([args, np.full((1, n), -np.pi), np.full((1, n), np.pi)])
    for _ in range(4000):
        a = pool[rng.integers(0, len(pool), n), range(n)]
        b = pool[rng.integers(0, len(pool), n), range(n)]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        inside = np.all((args > lo[None, :]) & (args <= hi[None, :]), axis=1)
        massr = mult[inside].sum() / D
        vol = np.prod((hi - lo) / (2 * math.pi))
        for val, mode in ((massr - vol, "excess"), (vol - massr, "deficit")):
            if val > best:
                best = val
                wit = BoxWitness(tuple(map(float, lo)), tuple(map(float, hi)), mode)
    return AngleDiscrepancy(float(best), wit, exact=False)


def radius_discrepancy(Z: ZeroCycle, eps: float) -> float:
    """1 - (mass with every |xi_j| inside (1-eps, (1-eps)^-1)) / deg."""
    if not 0 < eps < 1:
        raise CycleError("radius parameter must lie in (0, 1)")
    lo = 1.0 - eps
    hi = 1.0 / lo
    mods = Z.moduli()
    if mods.ndim == 1:
        mods = mods[:, None]
    inside = np.all((mods > lo) & (mods < hi), axis=1)
    return 1.0 - float(Z.multiplicities()[inside].sum()) / Z.degree


def _pushforward_args(Z: ZeroCycle, a: np.ndarray) -> np.ndarray:
    """Arguments of the monomial pushforward, folded into (-pi, pi]."""
    s = Z.arguments() @ a
    t = np.mod(s + np.pi, 2.0 * np.pi) - np.pi
    t[t <= -np.pi] = np.pi
    return t


def _angle_disc_args(args: np.ndarray, mult: np.ndarray, D: float) -> float:
    """Exact 1-D angle discrepancy straight from weighted arguments."""
    pos, wsum = _weighted_args(args, mult)
    cand = np.unique(np.concatenate([[-np.pi], pos, [np.pi]]))
    le = _prefix_le(cand, pos, wsum).astype(float)
    lt = np.concatenate([[0.0], le[:-1]])
    two_pi = 2.0 * math.pi
    A = le / D - cand / two_pi
    B = lt / D - cand / two_pi
    exc = float(np.max(A - np.minimum.accumulate(B)))
    if len(cand) > 1:
        F = cand / two_pi - lt / D
        E = cand / two_pi - le / D
        defic = float(np.max(F[1:] - np.minimum.accumulate(E)[:-1]))
    else:
        defic = -math.inf
    return max(exc, defic)


def pushforward_angle_discrepancy(Z: ZeroCycle, a) -> float:
    """Angle discrepancy of the direct image under x -> x^a (exact)."""
    a = np.asarray(a, dtype=np.int64)
    if not a.any():
        raise CycleError("pushforward direction must be nonzero")
    args = _pushforward_args(Z, a)
    return _angle_disc_args(args, Z.multiplicities(), float(Z.degree))


def pushforward_discrepancy_sup(Z: ZeroCycle) -> tuple[float, tuple[int, ...]]:
    """Exact sup over nonzero lattice directions a of
    (pushforward angle discrepancy) / ||a||^(1/2).

    Directions are enumerated by increasing Euclidean norm; once the best
    value exceeds ||a||^(-1/2) no further shell can improve, so the
    enumeration terminates.  Opposite directions give equal values and are
    enumerated once.
    """
    if Z.degree < 1:
        raise CycleError("empty cycle")
    n = Z.n
    best = 0.0
    witness = None
    processed = 0
    pending: list[tuple[float, tuple[int, ...]]] = []
    shell = 0
    while True:
        shell += 1
        pending.extend(
            (float(np.dot(v, v)), v) for v in _box_shell(n, shell) if _canonical_dir(v))
        pending.sort()
        while pending and pending[0][0] <= shell * shell:
            n2, v = pending.pop(0)
            if best > 0 and n2 > 1.0 / best ** 4:
                return best, witness
            val = pushforward_angle_discrepancy(Z, v) / n2 ** 0.25
            processed += 1
            if val > best:
                best, witness = val, v
        if best > 0 and (shell + 1) ** 2 > 1.0 / best ** 4 and not pending:
            return best, witness
        if shell > 10_000:
            raise CycleError("direction enumeration failed to terminate")


def pushforward_discrepancy_sup_bruteforce(Z: ZeroCycle, radius: float):
    """Reference enumeration over all 0 < ||a|| <= radius (up to sign)."""
    n = Z.n
    best, witness = 0.0, None
    r = int(math.floor(radius))
    for v in np.ndindex(*(2 * r + 1,) * n):
        a = tuple(int(c) - r for c in v)
        if all(c == 0 for c in a) or not _canonical_dir(a):
            continue
        n2 = sum(c * c for c in a)
        if n2 > radius * radius:
            continue
        val = pushforward_angle_discrepancy(Z, a) / n2 ** 0.25
        if val > best:
            best, witness = val, a
    return best, witness


def _canonical_dir(v) -> bool:
    for c in v:
        if c > 0:
            return True
        if c < 0:
            return False
    return False


def _box_shell(n: int, s: int):
    """Integer vectors with max-norm exactly s."""
    if n == 1:
        yield (s,)
        yield (-s,)
        return
    rng = range(-s, s + 1)
    for v in np.ndindex(*(2 * s + 1,) * n):
        a = tuple(int(c) - s for c in v)
        if max(abs(c) for c in a) == s:
            yield a


def axis_radius_discrepancy(Z: ZeroCycle, eps: float) -> float:
    """Sum over coordinate axes of the pushforward radius discrepancies.

    Dominates the joint radius discrepancy of the cycle.
    """
    if not 0 < eps < 1:
        raise CycleError("radius parameter must lie in (0, 1)")
    lo = 1.0 - eps
    hi = 1.0 / lo
    mods = Z.moduli()
    if mods.ndim == 1:
        mods = mods[:, None]
    mult = Z.multiplicities()
    total = 0.0
    for j in range(Z.n):
        inside = (mods[:, j] > lo) & (mods[:, j] < hi)
        total += 1.0 - float(mult[inside].sum()) / Z.degree
    return total


def exponential_sum(Z: ZeroCycle, a) -> complex:
    """Normalized Weyl sum (1/deg) sum m_xi e^{i <a, arg xi>}.

    For a = 0 the sum is identically 1 (kept as a documented convention).
    """
    a = np.asarray(a, dtype=np.int64)
    if not a.any():
        return 1.0 + 0.0j
    phases = np.exp(1j * (Z.arguments() @ a))
    return complex(np.dot(Z.multiplicities(), phases) / Z.degree)


def positive_degree(Z: ZeroCycle, rel_tol: float = 1e-9) -> int:
    """Mass of points with every coordinate on the positive real ray."""
    coords = Z.coordinates()
    if coords.ndim == 1:
        coords = coords[:, None]
    good = np.all(
        (np.abs(coords.imag) < rel_tol * np.abs(coords)) & (coords.real > 0), axis=1)
    return int(Z.multiplicities()[good].sum())


def argument_histogram(Z: ZeroCycle, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis histograms of arguments over (-pi, pi], mass-weighted.

    Returns (edges, masses) with masses of shape (n, bins); each row sums
    to deg(Z) exactly.
    """
    if bins < 1:
        raise CycleError("need at least one bin")
    edges = np.linspace(-np.pi, np.pi, bins + 1)
    args = Z.arguments()
    if args.ndim == 1:
        args = args[:, None]
    mult = Z.multiplicities()
    out = np.zeros((Z.n, bins), dtype=np.int64)
    for j in range(Z.n):
        idx = np.searchsorted(edges, args[:, j], side="left") - 1
        idx = np.clip(idx, 0, bins - 1)
        np.add.at(out[j], idx, mult)
    return edges, out


def modulus_histogram(Z: ZeroCycle, bins: int) -> tuple[np.ndarray, np.ndarray]:
    mods = Z.moduli()
    if mods.ndim == 1:
        mods = mods[:, None]
    lo = min(mods.min() * 0.999, 0.9)
    hi = max(mods.max() * 1.001, 1.1)
    edges = np.linspace(lo, hi, bins + 1)
    mult = Z.multiplicities()
    out = np.zeros((Z.n, bins), dtype=np.int64)
    for j in range(Z.n):
        idx = np.clip(np.searchsorted(edges, mods[:, j], side="left") - 1, 0, bins - 1)
        np.add.at(out[j], idx, mult)
    return edges, out


def discrepancy_report(Z: ZeroCycle, eps_list=(0.1, 0.2)) -> DiscrepancyReport:
    ang = angle_discrepancy(Z)
    theta, wit = pushforward_discrepancy_sup(Z)
    return DiscrepancyReport(
        degree=Z.degree,
        angle=ang,
        radius={e: radius_discrepancy(Z, e) for e in eps_list},
        pushforward_sup=theta,
        pushforward_sup_witness=wit,
        axis_radius={e: axis_radius_discrepancy(Z, e) for e in eps_list},
    )
