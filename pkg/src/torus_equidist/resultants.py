"""Resultants for torus systems with n <= 2.

Univariate Sylvester resultants back two pipelines: directional resultants
of face systems (restricted to the rank-one lattice orthogonal to the
direction) and the elimination polynomial of a bivariate system, computed
by evaluating the hidden-variable resultant on roots of unity and
interpolating with an inverse FFT.  All magnitudes are tracked in log scale
so dilated supports cannot overflow.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import (
    LatticePolytope,
    facet_normals,
    int_det,
    minkowski_sum,
    primitive,
    support_function,
)
from .laurent import (
    LaurentPolynomial,
    SystemSpec,
    change_of_variables,
    face_polynomial,
    restrict_to_sublattice,
)
from .lattice import complete_to_unimodular
from .lattice import face as lattice_face


class ResultantError(ValueError):
    pass


class DegenerateSystemError(ResultantError):
    """A vanishing directional resultant or a failed Bernstein certificate."""


class InterpolationRangeError(ResultantError):
    """Eliminant coefficients sank below the interpolation noise floor.

    The cycle may still be recoverable by sweeping evaluation radii; see
    the multi-band path in the solver."""


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TORUS_EQUIDIST_THREADS", "1")))
    except ValueError:
        return 1


def sylvester_matrix(p, q) -> np.ndarray:
    """Sylvester matrix of two ascending coefficient sequences."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    dp, dq = len(p) - 1, len(q) - 1
    s = dp + dq
    S = np.zeros((s, s), dtype=complex)
    for r in range(dq):
        S[r, r:r + dp + 1] = p[::-1]
    for r in range(dp):
        S[dq + r, r:r + dq + 1] = q[::-1]
    return S


def sylvester_resultant(p, q, with_cond: bool = False):
    """det of the Sylvester matrix; equals lc(p)^deg q * prod q(alpha_i).

    Polynomials are given by ascending coefficients; both extreme
    coefficients must stay above 1e-14 after sup-normalization.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    for name, c in (("p", p), ("q", q)):
        if len(c) == 0 or not np.any(c):
            raise ResultantError(f"zero polynomial {name}")
        scale = np.abs(c).max()
        if abs(c[0]) <= 1e-14 * scale or abs(c[-1]) <= 1e-14 * scale:
            raise ResultantError(
                f"extreme coefficient of {name} vanishes after normalization")
    dp, dq = len(p) - 1, len(q) - 1
    if dp == 0:
        value = p[0] ** dq
        return (value, 1.0) if with_cond else value
    if dq == 0:
        value = q[0] ** dp
        return (value, 1.0) if with_cond else value
    S = sylvester_matrix(p, q)
    sign, logabs = np.linalg.slogdet(S)
    value = sign * np.exp(logabs) if logabs < 700 else sign * np.inf
    if with_cond:
        cond = float(np.linalg.cond(S, 1)) if S.shape[0] <= 600 else float("nan")
        return value, cond
    return value


def sylvester_resultant_exact(p, q) -> int:
    """Exact integer resultant via Bareiss elimination."""
    p = [int(c) for c in p]
    q = [int(c) for c in q]
    dp, dq = len(p) - 1, len(q) - 1
    if dp == 0:
        return p[0] ** dq
    if dq == 0:
        return q[0] ** dp
    s = dp + dq
    M = [[0] * s for _ in range(s)]
    for r in range(dq):
        M[r][r:r + dp + 1] = p[::-1]
    for r in range(dp):
        M[dq + r][r:r + dq + 1] = q[::-1]
    return int_det(M)


@dataclass(frozen=True)
class DirectionalResultant:
    """Directional resultant value at a primitive facet direction.

    `log_abs` is always populated; `exact` carries the integer value when
    the face system had integer coefficients, `value` the complex value
    when it fits in double precision.
    """

    direction: tuple[int, ...]
    log_abs: float
    value: complex | None = None
    exact: int | None = None
    degrees: tuple[int, ...] = ()
    cond: float | None = None

    @property
    def is_trivial(self) -> bool:
        return self.degrees and all(d == 0 for d in self.degrees)


def _face_coeff_vector(f: LaurentPolynomial, v) -> tuple[np.ndarray, list[int], bool]:
    """Ascending coefficients of the face polynomial along the edge lattice.

    The index range comes from the declared support, so structural zeros
    keep their slots.  Returns (coeffs, face points count, integral flag).
    """
    fv = face_polynomial(f, v)
    if fv.is_zero:
        raise DegenerateSystemError(
            f"face polynomial in direction {tuple(v)} is zero")
    u = primitive((-v[1], v[0]))
    carrier = fv.declared_support
    g, base = restrict_to_sublattice(
        LaurentPolynomial(f.n, dict(fv.terms), carrier), u)
    # span from the declared face support, not just the nonzero terms
    decl_steps = []
    b0 = next(iter(carrier))
    for e in carrier:
        k = _step(e, b0, u)
        decl_steps.append(k)
    span = max(decl_steps) - min(decl_steps)
    coeffs = np.zeros(span + 1, dtype=complex)
    off = _step(base, b0, u) - min(decl_steps)
    for (k,), c in g.terms.items():
        coeffs[k + off] = complex(c)
    ints = all(
        isinstance(c, int) or (isinstance(c, float) and float(c).is_integer())
        or (isinstance(c, complex) and c.imag == 0 and c.real.is_integer())
        for c in g.terms.values())
    return coeffs, span, ints


def _step(e, b, u) -> int:
    for ei, bi, ui in zip(e, b, u):
        if ui != 0:
            k, r = divmod(ei - bi, ui)
            return k
    raise ResultantError("zero direction")


def directional_resultant(system: SystemSpec, v) -> DirectionalResultant:
    """Resultant of the face system in the direction of a primitive v.

    Equals 1 whenever v is not an inner facet normal of the Minkowski sum
    of the Newton polytopes.  Magnitudes only are meaningful downstream;
    the sign convention of sparse resultants is left unresolved.
    """
    v = tuple(int(c) for c in v)
    if all(c == 0 for c in v):
        raise ResultantError("direction must be nonzero")
    if primitive(v) != v:
        raise ResultantError(f"direction {v} is not primitive")
    n = system.n
    if n == 1:
        f = system.polynomials[0]
        carrier = system.supports[0]
        pts = lattice_face(carrier, v)
        c = complex(f.coefficient(pts[0]))
        if c == 0:
            raise DegenerateSystemError("extreme coefficient vanishes")
        ex = int(c.real) if (c.imag == 0 and c.real.is_integer()) else None
        return DirectionalResultant(v, math.log(abs(c)), c, ex, (0,))
    if n != 2:
        raise ResultantError("directional resultants implemented for n <= 2")
    c1, d1, int1 = _face_coeff_vector(system.polynomials[0], v)
    c2, d2, int2 = _face_coeff_vector(system.polynomials[1], v)
    if d1 == 0 and d2 == 0:
        return DirectionalResultant(v, 0.0, 1.0 + 0j, 1, (0, 0))
    if abs(c1[0]) == 0 or abs(c1[-1]) == 0 or abs(c2[0]) == 0 or abs(c2[-1]) == 0:
        raise DegenerateSystemError(
            f"declared face support in direction {v} has a vanishing extreme coefficient")
    if int1 and int2 and d1 + d2 <= 600:
        val = sylvester_resultant_exact([int(c.real) for c in c1],
                                        [int(c.real) for c in c2])
        if val == 0:
            return DirectionalResultant(v, float("-inf"), 0j, 0, (d1, d2))
        fval = complex(val) if abs(val) < 1e300 else None
        return DirectionalResultant(v, _log_abs_int(val), fval, val, (d1, d2))
    if d1 == 0:
        lv = d2 * math.log(abs(c1[0]))
        return DirectionalResultant(v, lv, c1[0] ** d2, None, (d1, d2))
    if d2 == 0:
        lv = d1 * math.log(abs(c2[0]))
        return DirectionalResultant(v, lv, c2[0] ** d1, None, (d1, d2))
    S = sylvester_matrix(c1, c2)
    sign, logabs = np.linalg.slogdet(S)
    if not np.isfinite(logabs) or sign == 0:
        return DirectionalResultant(v, float("-inf"), 0j, None, (d1, d2))
    val = sign * np.exp(logabs) if logabs < 700 else None
    cond = float(np.linalg.cond(S, 1)) if S.shape[0] <= 400 else None
    return DirectionalResultant(v, float(logabs), val, None, (d1, d2), cond)


def _log_abs_int(k: int) -> float:
    if k == 0:
        return float("-inf")
    a = abs(k)
    if a.bit_length() <= 900:
        return math.log(a)
    return (a.bit_length() - 1) * math.log(2) + math.log(
        a >> (a.bit_length() - 53)) - 52 * math.log(2)


def nontrivial_directions(system: SystemSpec) -> list[tuple[int, ...]]:
    """Primitive inner facet normals of the Minkowski sum of the polytopes."""
    Q = system.newton_polytopes[0]
    for P in system.newton_polytopes[1:]:
        Q = minkowski_sum(Q, P)
    if not Q.is_full_dimensional:
        raise DegenerateSystemError("Minkowski sum of Newton polytopes is degenerate")
    return facet_normals(Q)


def all_directional_resultants(system: SystemSpec) -> list[DirectionalResultant]:
    return [directional_resultant(system, v) for v in nontrivial_directions(system)]


def check_nonzero_resultants(system: SystemSpec) -> list[DirectionalResultant]:
    out = all_directional_resultants(system)
    for r in out:
        if not np.isfinite(r.log_abs):
            raise DegenerateSystemError(
                f"directional resultant vanishes in direction {r.direction}")
    return out


@dataclass
class EliminationPolynomial:
    """Univariate eliminant whose roots are the pushforward of the cycle.

    True coefficients are exp(log_scale) times `coeffs` (ascending, nonzero
    constant term); only magnitudes of the overall scale are tracked.
    """

    direction: tuple[int, ...]
    coeffs: np.ndarray
    log_scale: float
    low_power: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def monic(self) -> np.ndarray:
        return self.coeffs / self.coeffs[-1]

    def log_abs_extreme_product(self) -> float:
        """log |leading * constant coefficient| of the true eliminant."""
        return (math.log(abs(self.coeffs[0])) + math.log(abs(self.coeffs[-1]))
                + 2.0 * self.log_scale)

    def log_abs_at(self, z: complex) -> float:
        val = np.polyval(self.coeffs[::-1], z)
        return math.log(abs(val)) + self.log_scale


def _poly_x_coeff_matrix(f: LaurentPolynomial) -> tuple[np.ndarray, tuple[int, int]]:
    """Dense (deg_y+1, deg_x+1) coefficient grid after shifting exponents >= 0."""
    exps = np.array(list(f.terms.keys()), dtype=np.int64)
    lo = exps.min(axis=0)
    dx, dy = (exps.max(axis=0) - lo).astype(int)
    C = np.zeros((dy + 1, dx + 1), dtype=complex)
    for (ex, ey), c in f.terms.items():
        C[ey - lo[1], ex - lo[0]] = complex(c)
    return C, (int(dx), int(dy))


def _circle_values(C: np.ndarray, K: int) -> np.ndarray:
    """Each x-coefficient row evaluated at the K-th roots of unity."""
    dy1, dx1 = C.shape
    pad = np.zeros((dy1, K), dtype=complex)
    pad[:, :dx1] = C
    return np.fft.ifft(pad, axis=1) * K


def _batched_slogdet(C1V, C2V, d1, d2, idx, threads=1):
    """(sign, log|det|) of the Sylvester matrices at the given nodes."""
    s = d1 + d2
    max_elems = 12_000_000
    block = max(8, min(len(idx), max_elems // max(1, s * s)))

    def run(chunk):
        B = len(chunk)
        S = np.zeros((B, s, s), dtype=complex)
        p = C1V[:, chunk]
        q = C2V[:, chunk]
        for r in range(d2):
            S[:, r, r:r + d1 + 1] = p[::-1].T
        for r in range(d1):
            S[:, d2 + r, r:r + d2 + 1] = q[::-1].T
        return np.linalg.slogdet(S)

    chunks = [idx[i:i + block] for i in range(0, len(idx), block)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    signs = np.concatenate([r[0] for r in results])
    logs = np.concatenate([r[1] for r in results])
    return signs, logs


def _hidden_variable_values(f1, f2, K, threads=1, radius: float = 1.0):
    """Values of the hidden-variable resultant on the circle |x| = radius.

    Conjugate symmetry halves the work for real-coefficient systems on the
    unit circle (and any positive radius).
    """
    C1, (m1, l1) = _poly_x_coeff_matrix(f1)
    C2, (m2, l2) = _poly_x_coeff_matrix(f2)
    if l1 + l2 == 0:
        raise DegenerateSystemError("system does not involve the second variable")
    if radius != 1.0:
        C1 = C1 * (radius ** np.arange(C1.shape[1]))[None, :]
        C2 = C2 * (radius ** np.arange(C2.shape[1]))[None, :]
    C1V = _circle_values(C1, K)
    C2V = _circle_values(C2, K)
    real_input = (np.abs(C1.imag).max(initial=0.0) == 0.0
                  and np.abs(C2.imag).max(initial=0.0) == 0.0)
    signs = np.empty(K, dtype=complex)
    logs = np.empty(K, dtype=float)
    if real_input:
        half = np.arange(K // 2 + 1)
        s, l = _batched_slogdet(C1V, C2V, l1, l2, half, threads)
        signs[half], logs[half] = s, l
        mirror = np.arange(1, (K + 1) // 2)
        signs[K - mirror] = np.conj(signs[mirror])
        logs[K - mirror] = logs[mirror]
    else:
        s, l = _batched_slogdet(C1V, C2V, l1, l2, np.arange(K), threads)
        signs, logs = s, l
    return signs, logs, (m1, l1, m2, l2)


@dataclass
class EliminantWindow:
    """Coefficients of the hidden-variable resultant recovered above the
    interpolation noise floor, on a circle of given radius.

    Extreme coefficients below the noise floor are unrecoverable in double
    precision; `faded_low` / `faded_high` flag edges that sank into noise
    rather than ending sharply.
    """

    radius: float
    first: int
    coeffs: np.ndarray
    log_scale: float
    noise: float
    faded_low: bool
    faded_high: bool
    K: int

    @property
    def span(self) -> int:
        return len(self.coeffs) - 1


def _window_meta(coeffs: np.ndarray, K: int) -> tuple[int, int, float] | None:
    """Window indices and noise floor, or None when aliasing is suspected."""
    mags = np.abs(coeffs)
    top = mags.max()
    if top == 0:
        return None
    noise = float(np.quantile(mags, 0.10))
    thr = max(30.0 * noise, 1e-14 * top)
    idx = np.nonzero(mags > thr)[0]
    if len(idx) == 0:
        return None
    first, last = int(idx[0]), int(idx[-1])
    if last - first > 0.85 * K or last >= K - 1:
        return None  # window fills the circle: aliasing, escalate K
    return first, last, noise


def interpolate_eliminant_window(f1, f2, D: int, threads: int = 1,
                                 radius: float = 1.0,
                                 K: int | None = None) -> EliminantWindow:
    """Recover the above-noise coefficient window of the hidden-variable
    resultant on the circle |x1| = radius, escalating the node count on
    aliasing."""
    C1, (m1, l1) = _poly_x_coeff_matrix(f1)
    C2, (m2, l2) = _poly_x_coeff_matrix(f2)
    hard_bound = l2 * m1 + l1 * m2
    if K is None:
        K = 1
        while K < max(D + 2, 32):
            K *= 2
        if (D + 2) > 0.7 * K:
            K *= 2
    while True:
        signs, logs, _ = _hidden_variable_values(f1, f2, K, threads, radius)
        finite = np.isfinite(logs)
        if not finite.any():
            raise DegenerateSystemError(
                "hidden-variable resultant vanishes on the sample circle")
        mu = float(logs[finite].max())
        vals = np.where(finite, signs, 0.0) * np.exp(
            np.where(finite, logs - mu, -np.inf))
        coeffs = np.fft.fft(vals) / K
        meta = _window_meta(coeffs, K)
        if meta is not None:
            first, last, noise = meta
            window = coeffs[first:last + 1]
            edge = 1000.0 * max(noise, 1e-300)
            faded_low = bool(abs(window[0]) < edge)
            faded_high = bool(abs(window[-1]) < edge)
            return EliminantWindow(radius, first, window, mu, noise,
                                   faded_low, faded_high, K)
        if K > 2 * hard_bound:
            raise DegenerateSystemError(
                "eliminant interpolation failed: no clean coefficient window "
                f"below K={K}")
        K *= 2


def elimination_polynomial(system: SystemSpec, a,
                           check: bool = True) -> EliminationPolynomial:
    """Eliminant E whose root multiset is the pushforward of the zero cycle
    under the monomial map x -> x^a.

    Computed as the hidden-variable resultant on roots of unity with
    inverse-FFT interpolation.  The recovered window must have exactly the
    Bernstein number of nonzero roots; windows that sink into the noise
    floor raise InterpolationRangeError, genuinely short sharp windows
    raise DegenerateSystemError.
    """
    a = tuple(int(c) for c in a)
    if all(c == 0 for c in a):
        raise ResultantError("direction a must be nonzero")
    if system.n != 2:
        raise ResultantError("elimination polynomials implemented for n = 2")
    g = math.gcd(abs(a[0]), abs(a[1]))
    if g > 1:
        prim = elimination_polynomial(system, (a[0] // g, a[1] // g), check)
        return _root_power_compose(prim, g, a)
    if check:
        check_nonzero_resultants(system)
    if a != (1, 0):
        A, _Ainv = complete_to_unimodular(a)
        polys = [change_of_variables(f, A) for f in system.polynomials]
        work = SystemSpec(polys)
    else:
        work = system
    D = system.bernstein_number
    if D < 1:
        raise DegenerateSystemError("mixed volume of the system is zero")
    f1, f2 = work.polynomials
    win = interpolate_eliminant_window(f1, f2, D, threads=_threads())
    if win.span == D:
        return EliminationPolynomial(a, win.coeffs, win.log_scale, win.first)
    if win.faded_low or win.faded_high:
        raise InterpolationRangeError(
            f"eliminant window spans {win.span} of {D}: extreme coefficients "
            "are below the double-precision interpolation noise floor")
    raise DegenerateSystemError(
        f"eliminant degree {win.span} != Bernstein number {D}")


def _root_power_compose(E: EliminationPolynomial, m: int, a) -> EliminationPolynomial:
    """Eliminant for a = m a' from the primitive one: roots become m-th powers.

    The rotation product prod over omega in mu_m of E_a'(omega z) is a
    polynomial in z^m; decimating its coefficients gives a degree-D
    eliminant whose roots are the m-th powers of the roots of E_a'.
    """
    out = np.array([1.0 + 0j])
    for k in range(m):
        w = np.exp(2j * np.pi * k / m)
        scaled = E.coeffs * (w ** np.arange(len(E.coeffs)))
        out = np.convolve(out, scaled)
    dec = out[::m]
    return EliminationPolynomial(tuple(a), dec, m * E.log_scale, m * E.low_power)


def extreme_coefficient_logs(system: SystemSpec, a) -> tuple[float, float]:
    """(log|lc(E_a) E_a(0)|, sum over v of |<v,a>| log|Res_v|).

    The two sides agree for nondegenerate systems; this is the product
    identity behind the eliminant's extreme coefficients.
    """
    E = elimination_polynomial(system, a)
    lhs = E.log_abs_extreme_product()
    rhs = 0.0
    for r in check_nonzero_resultants(system):
        rhs += abs(sum(x * y for x, y in zip(r.direction, a))) * r.log_abs
    return lhs, rhs


def poisson_check(system: SystemSpec, a=(1, 0), cycle=None, samples: int = 12,
                  radius: float = 1.37) -> float:
    """Max relative magnitude residual of the product factorization of E_a.

    Compares |E_a(z)| against the product of directional resultants (with
    exponents -h_{{0,a}}(v)) times prod |z - x^a(xi)|^{m_xi} over the zero
    cycle, at sample points z on a circle.  Signs and phases are discarded.
    """
    if system.n != 2:
        raise ResultantError("poisson_check implemented for n = 2")
    if cycle is None:
        from .solver import zero_cycle
        cycle = zero_cycle(system)
    a = tuple(int(c) for c in a)
    E = elimination_polynomial(system, a)
    res = check_nonzero_resultants(system)
    res_part = 0.0
    for r in res:
        h = min(0, sum(x * y for x, y in zip(a, r.direction)))
        res_part += (-h) * r.log_abs
    from .laurent import cpow_int
    push = []
    for pt, m in cycle.points:
        val = 1.0 + 0j
        for z, k in zip(pt, a):
            val *= cpow_int(z, k)
        push.append((val, m))
    golden = 2.399963229728653
    worst = 0.0
    for t in range(samples):
        z = radius * np.exp(1j * golden * (t + 1))
        lhs = E.log_abs_at(z)
        rhs = res_part + sum(m * math.log(abs(z - w)) for w, m in push)
        worst = max(worst, abs(math.exp(lhs - rhs) - 1.0))
    return worst


def poisson_check_univariate(f: LaurentPolynomial, cycle=None,
                             samples: int = 10, radius: float = 1.618) -> float:
    """|lc prod (z - xi)| versus |f(z)| at sample points, max relative error."""
    if f.n != 1:
        raise ResultantError("univariate check needs n = 1")
    if cycle is None:
        from .solver import univariate_roots
        cycle = univariate_roots(f)
    exps = sorted(e[0] for e in f.terms)
    lead = complex(f.terms[(exps[-1],)])
    low = exps[0]
    worst = 0.0
    for t in range(samples):
        z = radius * np.exp(2j * np.pi * (t + 0.381) / samples)
        prod_log = math.log(abs(lead)) + low * math.log(abs(z))
        for (w,), m in cycle.points:
            prod_log += m * math.log(abs(z - w))
        fval = abs(f((z,)))
        worst = max(worst, abs(math.exp(prod_log - math.log(fval)) - 1.0))
    return worst
