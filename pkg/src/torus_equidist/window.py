"""The C^1 plateau window used to smooth box indicators on the circle.

The window equals 1 on [alpha, beta], falls to 0 over ramps of width tau
on both sides through the cubic g(x) = -2x^3 + 3x^2, and is identically 0
outside.  Its integral identities and the decay of its Fourier
coefficients are verified numerically by the test suite; the Fourier
integrals are evaluated with an exact piecewise antiderivative, since
fixed-order quadrature cannot track e^{-iax} across the plateau once a
gets large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

G_POLY = Polynomial([0.0, 0.0, 3.0, -2.0])
G_D1 = G_POLY.deriv()
G_D2 = G_D1.deriv()


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class WindowSpec:
    alpha: float
    beta: float
    tau: float

    def __post_init__(self):
        if self.beta < self.alpha:
            raise WindowError("window needs alpha <= beta")
        if self.tau <= 0:
            raise WindowError("ramp width tau must be positive")

    @property
    def fits_on_circle(self) -> bool:
        return self.beta - self.alpha + 2 * self.tau < 2 * math.pi

    def knots(self) -> tuple[float, float, float, float]:
        return (self.alpha - self.tau, self.alpha, self.beta, self.beta + self.tau)


def window_eval(w: WindowSpec, x):
    """Five-case piecewise value; C^1 at every knot, range [0, 1]."""
    x = np.asarray(x, dtype=float)
    up = (x - w.alpha + w.tau) / w.tau
    down = (w.beta + w.tau - x) / w.tau
    out = np.where(
        x <= w.alpha - w.tau, 0.0,
        np.where(x <= w.alpha, G_POLY(up),
                 np.where(x <= w.beta, 1.0,
                          np.where(x <= w.beta + w.tau, G_POLY(down), 0.0))))
    return out if out.ndim else float(out)


def window_deriv(w: WindowSpec, x, order: int = 1):
    x = np.asarray(x, dtype=float)
    up = (x - w.alpha + w.tau) / w.tau
    down = (w.beta + w.tau - x) / w.tau
    gd = G_D1 if order == 1 else G_D2
    scale = w.tau ** order
    sign = -1.0 if order == 1 else 1.0
    out = np.where(
        (x <= w.alpha - w.tau) | (x > w.beta + w.tau), 0.0,
        np.where(x <= w.alpha, gd(up) / scale,
                 np.where(x <= w.beta, 0.0, sign * gd(down) / scale)))
    return out if out.ndim else float(out)


def _gauss_legendre(f, lo: float, hi: float, nodes: int = 64) -> float:
    x, wts = np.polynomial.legendre.leggauss(nodes)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return float(half * np.dot(wts, f(mid + half * x)))


def window_integrals(w: WindowSpec) -> tuple[float, float, float]:
    """(integral of h, of |h'|, of |h''|) by per-piece Gauss-Legendre.

    |h''| changes sign at the midpoint of each ramp (g'' vanishes at 1/2),
    so the ramps are split there.
    """
    t0, t1, t2, t3 = w.knots()
    i0 = (_gauss_legendre(lambda x: window_eval(w, x), t0, t1)
          + (t2 - t1)
          + _gauss_legendre(lambda x: window_eval(w, x), t2, t3))
    i1 = (_gauss_legendre(lambda x: np.abs(window_deriv(w, x, 1)), t0, t1)
          + _gauss_legendre(lambda x: np.abs(window_deriv(w, x, 1)), t2, t3))
    m01 = t0 + 0.5 * w.tau
    m23 = t2 + 0.5 * w.tau
    i2 = sum(
        _gauss_legendre(lambda x: np.abs(window_deriv(w, x, 2)), a, b)
        for a, b in ((t0, m01), (m01, t1), (t2, m23), (m23, t3)))
    return i0, i1, i2


def half_ramp_mass(w: WindowSpec) -> float:
    """Mass of one ramp, integral over [alpha - tau, alpha]; equals tau/2."""
    return _gauss_legendre(lambda x: window_eval(w, x), w.alpha - w.tau, w.alpha)


def _poly_times_exp_integral(p: Polynomial, a: int, lo: float, hi: float) -> complex:
    """Exact integral of p(x) e^{-iax} over [lo, hi]."""
    if a == 0:
        q = p.integ()
        return complex(q(hi) - q(lo))
    ia = 1j * a

    def antideriv(x: float) -> complex:
        total = 0.0 + 0.0j
        q = p
        power = ia
        while True:
            total -= q(x) / power
            q = q.deriv()
            if all(c == 0 for c in q.coef):
                break
            power *= ia
        return np.exp(-ia * x) * total

    return antideriv(hi) - antideriv(lo)


def fourier_coefficient(w: WindowSpec, a: int) -> complex:
    """c_a = (1/2 pi) integral of h(x) e^{-iax}, the window seen on R/2piZ.

    Needs beta - alpha + 2 tau < 2 pi so the support fits on the circle;
    shifting the support by full turns only multiplies the integrand by
    e^{2 pi i a} = 1, so the integral is taken over the support directly.
    """
    if not w.fits_on_circle:
        raise WindowError("window support does not fit on the circle")
    t0, t1, t2, t3 = w.knots()
    up = G_POLY(Polynomial([(w.tau - w.alpha) / w.tau, 1.0 / w.tau]))
    down = G_POLY(Polynomial([(w.beta + w.tau) / w.tau, -1.0 / w.tau]))
    total = (_poly_times_exp_integral(up, a, t0, t1)
             + _poly_times_exp_integral(Polynomial([1.0]), a, t1, t2)
             + _poly_times_exp_integral(down, a, t2, t3))
    return total / (2.0 * math.pi)


def fourier_bound(w: WindowSpec, a: int) -> float:
    """min(1/(pi a), 3/(pi tau a^2)) for a != 0."""
    if a == 0:
        raise WindowError("bound applies to nonzero frequencies")
    a = abs(a)
    return min(1.0 / (math.pi * a), 3.0 / (math.pi * w.tau * a * a))


def partial_fourier_sum(w: WindowSpec, x, max_freq: int) -> np.ndarray:
    """Symmetric partial sum of the Fourier series at the given points."""
    x = np.asarray(x, dtype=float)
    total = np.full_like(x, fourier_coefficient(w, 0).real)
    for a in range(1, max_freq + 1):
        c = fourier_coefficient(w, a)
        total += 2.0 * (c * np.exp(1j * a * x)).real  # c_{-a} = conj(c_a)
    return total


def g_reference_integrals() -> tuple[float, float, float]:
    """Quadrature values of (int g, int |g'|, int |g''|) over [0, 1]."""
    i0 = _gauss_legendre(lambda x: G_POLY(x), 0.0, 1.0)
    i1 = _gauss_legendre(lambda x: np.abs(G_D1(x)), 0.0, 1.0)
    i2 = (_gauss_legendre(lambda x: np.abs(G_D2(x)), 0.0, 0.5)
          + _gauss_legendre(lambda x: np.abs(G_D2(x)), 0.5, 1.0))
    return i0, i1, i2
