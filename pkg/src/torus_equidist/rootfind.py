"""Simultaneous complex root finding (Aberth-Ehrlich iteration).

Initial points sit on circles whose radii come from the upper convex hull
of (k, log|c_k|) with deterministic golden-angle phases, so runs are
reproducible.  Evaluation switches to the reversed polynomial outside the
unit disk, which keeps degree-10^4 problems free of overflow.
"""

from __future__ import annotations

import numpy as np

GOLDEN_STEP = 2.0 * np.pi * 0.3819660112501051
PHASE_OFFSET = 0.2718


def _initial_points(c: np.ndarray) -> np.ndarray:
    d = len(c) - 1
    mags = np.abs(c)
    logs = np.where(mags > 0, np.log(np.where(mags > 0, mags, 1.0)), -np.inf)
    hull = []
    for k in range(d + 1):
        if not np.isfinite(logs[k]):
            continue
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            if (logs[k] - logs[i]) * (j - i) >= (logs[j] - logs[i]) * (k - i):
                hull.pop()
            else:
                break
        hull.append(k)
    radii = np.empty(d)
    pos = 0
    for i, j in zip(hull[:-1], hull[1:]):
        r = np.exp((logs[i] - logs[j]) / (j - i))
        radii[pos:pos + (j - i)] = r
        pos += j - i
    angles = GOLDEN_STEP * np.arange(d) + PHASE_OFFSET
    return radii * np.exp(1j * angles)


def _newton_ratio(c: np.ndarray, dc: np.ndarray, z: np.ndarray) -> np.ndarray:
    """p(z)/p'(z), evaluated through the reversed polynomial when |z| > 1."""
    d = len(c) - 1
    out = np.empty_like(z)
    inner = np.abs(z) <= 1.0
    if inner.any():
        zi = z[inner]
        p = np.zeros_like(zi)
        for a in c[::-1]:
            p = p * zi + a
        dp = np.zeros_like(zi)
        for a in dc[::-1]:
            dp = dp * zi + a
        dp = np.where(dp == 0, 1e-300, dp)
        out[inner] = p / dp
    outer = ~inner
    if outer.any():
        u = 1.0 / z[outer]
        q = np.zeros_like(u)
        for a in c:  # reversed coefficients: q(u) = sum c_{d-m} u^m
            q = q * u + a
        dq = np.zeros_like(u)
        rev = c[::-1]
        for m in range(d, 0, -1):  # q'(u) with q coefficients rev[m]*u^m
            dq = dq * u + m * rev[m]
        denom = d * q - u * dq
        denom = np.where(denom == 0, 1e-300, denom)
        out[outer] = z[outer] * q / denom
    return out


def _pair_sums(z: np.ndarray, block: int = 1024) -> np.ndarray:
    n = len(z)
    if n <= 2048:
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        return inv.sum(axis=1)
    out = np.empty_like(z)
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = z[start:stop, None] - z[None, :]
        idx = np.arange(start, stop)
        diff[idx - start, idx] = 1.0
        inv = 1.0 / diff
        inv[idx - start, idx] = 0.0
        out[start:stop] = inv.sum(axis=1)
    return out


def aberth_roots(coeffs, tol: float = 1e-13, max_iter: int = 160):
    """All roots of a polynomial given by ascending coefficients.

    Requires nonzero leading and constant coefficients (strip zeros and
    handle x^k factors at the call site).  Returns (roots, converged).
    """
    c = np.asarray(coeffs, dtype=complex)
    if len(c) < 2:
        return np.empty(0, dtype=complex), True
    c = c / np.abs(c).max()
    d = len(c) - 1
    if d == 1:
        return np.array([-c[0] / c[1]]), True
    dc = c[1:] * np.arange(1, d + 1)
    z = _initial_points(c)
    for _ in range(max_iter):
        w = _newton_ratio(c, dc, z)
        s = _pair_sums(z)
        corr = w / (1.0 - w * s)
        bad = ~np.isfinite(corr)
        if bad.any():
            corr[bad] = w[bad]
        z = z - corr
        if np.max(np.abs(corr) / (1.0 + np.abs(z))) < tol:
            return z, True
    return z, False


def aberth_roots_batch(coeff_rows: np.ndarray, tol: float = 1e-13,
                       max_iter: int = 80, block: int = 256):
    """Roots of many same-degree polynomials, iterated in lock step.

    `coeff_rows` has shape (B, d+1), ascending, with nonzero leading and
    constant entries per row.  Returns (roots (B, d), converged mask (B,)).
    """
    C = np.asarray(coeff_rows, dtype=complex)
    B, w = C.shape
    d = w - 1
    if d == 0:
        return np.empty((B, 0), dtype=complex), np.ones(B, dtype=bool)
    scale = np.abs(C).max(axis=1, keepdims=True)
    C = C / np.where(scale == 0, 1.0, scale)
    if d == 1:
        return (-C[:, :1] / C[:, 1:]), np.ones(B, dtype=bool)
    Z = np.empty((B, d), dtype=complex)
    for b in range(B):
        Z[b] = _initial_points(C[b])
    K = np.arange(1, d + 1)
    DC = C[:, 1:] * K[None, :]
    ok = np.zeros(B, dtype=bool)
    active = np.arange(B)
    for _ in range(max_iter):
        Ca, DCa, Za = C[active], DC[active], Z[active]
        W = _newton_ratio_rows(Ca, DCa, Za)
        S = _pair_sums_rows(Za, block=block)
        corr = W / (1.0 - W * S)
        bad = ~np.isfinite(corr)
        if bad.any():
            corr[bad] = W[bad]
        Za = Za - corr
        Z[active] = Za
        done = np.max(np.abs(corr) / (1.0 + np.abs(Za)), axis=1) < tol
        ok[active[done]] = True
        active = active[~done]
        if len(active) == 0:
            break
    return Z, ok


def _newton_ratio_rows(C, DC, Z):
    d = C.shape[1] - 1
    P = np.zeros_like(Z)
    for k in range(d, -1, -1):
        P = P * Z + C[:, k][:, None]
    DP = np.zeros_like(Z)
    for k in range(d - 1, -1, -1):
        DP = DP * Z + DC[:, k][:, None]
    with np.errstate(all="ignore"):
        w_in = P / np.where(DP == 0, 1e-300, DP)
    U = np.zeros_like(Z)
    with np.errstate(all="ignore"):
        U = 1.0 / Z
        Q = np.zeros_like(Z)
        for k in range(0, d + 1):
            Q = Q * U + C[:, k][:, None]
        DQ = np.zeros_like(Z)
        for m in range(d, 0, -1):
            DQ = DQ * U + m * C[:, d - m][:, None]
        denom = d * Q - U * DQ
        w_out = Z * Q / np.where(denom == 0, 1e-300, denom)
    return np.where(np.abs(Z) <= 1.0, w_in, w_out)


def _pair_sums_rows(Z, block: int = 256):
    B, d = Z.shape
    if B * d * d <= 8_000_000:
        diff = Z[:, :, None] - Z[:, None, :]
        idx = np.arange(d)
        diff[:, idx, idx] = 1.0
        inv = 1.0 / diff
        inv[:, idx, idx] = 0.0
        return inv.sum(axis=2)
    out = np.empty_like(Z)
    rows = max(1, block)
    for start in range(0, B, rows):
        stop = min(start + rows, B)
        out[start:stop] = _pair_sums_rows(Z[start:stop], block=block)
    return out
