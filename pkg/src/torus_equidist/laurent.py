"""Laurent polynomials on the algebraic torus: evaluation, norms, faces,
monomial changes of variables, and the text/JSON formats used by the CLI.

Coefficients are stored as given (int or complex), so integer systems keep
an exact coefficient path; numeric operations coerce to complex.  The
sup-norm over the unit polycircle is never computed exactly: `sup_norm`
returns a certified interval [grid maximum, l1 norm] and everything built
on top of it stays interval-valued.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lattice import (
    LatticePolytope,
    convex_hull,
    face as lattice_face,
    int_det,
    mixed_volume,
)

Expo = tuple[int, ...]


class LaurentError(ValueError):
    pass


class ZeroPolynomialError(LaurentError):
    """Norm and face operations reject the zero polynomial."""


def cpow_int(z: complex, e: int) -> complex:
    """z**e for integer e by repeated squaring (no polar round trip)."""
    if e == 0:
        return 1.0 + 0.0j
    if e < 0:
        return 1.0 / cpow_int(z, -e)
    result = 1.0 + 0.0j
    base = complex(z)
    while e:
        if e & 1:
            result *= base
        base *= base
        e >>= 1
    return result


@dataclass(frozen=True)
class LaurentPolynomial:
    """Finite map from integer exponent vectors to coefficients.

    Zero coefficients are pruned at construction.  `declared_support`, when
    given, is a superset of the actual support; faces and resultant degree
    data are taken from it so that structurally-zero coefficients keep
    their place.
    """

    n: int
    terms: dict[Expo, complex]
    declared_support: frozenset[Expo] | None = None

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != self.n:
                raise LaurentError(f"exponent {e} has wrong arity for n={self.n}")
            if c != 0:
                clean[e] = c
        object.__setattr__(self, "terms", clean)
        if self.declared_support is not None:
            decl = frozenset(tuple(int(x) for x in e) for e in self.declared_support)
            if not set(clean) <= decl:
                raise LaurentError("support exceeds the declared support set")
            object.__setattr__(self, "declared_support", decl)

    @staticmethod
    def from_terms(n: int, pairs, declared_support=None) -> "LaurentPolynomial":
        return LaurentPolynomial(n, dict(pairs), declared_support and frozenset(declared_support))

    @staticmethod
    def univariate(coeffs) -> "LaurentPolynomial":
        """Polynomial from an ascending coefficient sequence (exponent = index)."""
        return LaurentPolynomial(1, {(i,): c for i, c in enumerate(coeffs) if c != 0})

    @property
    def support(self) -> set[Expo]:
        return set(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_integral(self) -> bool:
        return all(isinstance(c, int) or (isinstance(c, float) and c.is_integer())
                   for c in self.terms.values())

    @cached_property
    def newton_polytope(self) -> LatticePolytope:
        if self.is_zero:
            raise ZeroPolynomialError("zero polynomial has no Newton polytope")
        return convex_hull(self.terms.keys(), dim=self.n)

    def coefficient(self, e: Expo) -> complex:
        return self.terms.get(tuple(e), 0)

    def scale(self, gamma: complex) -> "LaurentPolynomial":
        return LaurentPolynomial(self.n, {e: gamma * c for e, c in self.terms.items()},
                                 self.declared_support)

    def shift(self, b: Expo) -> "LaurentPolynomial":
        """Multiply by the monomial x^b (translates the support)."""
        b = tuple(int(x) for x in b)
        decl = None
        if self.declared_support is not None:
            decl = frozenset(tuple(e + d for e, d in zip(s, b)) for s in self.declared_support)
        return LaurentPolynomial(
            self.n, {tuple(e + d for e, d in zip(s, b)): c for s, c in self.terms.items()}, decl)

    def __call__(self, x):
        return evaluate(self, x)


def evaluate(f: LaurentPolynomial, x) -> complex:
    """Sum of coefficient * x^a; every coordinate of x must be nonzero."""
    xs = [complex(c) for c in x]
    if len(xs) != f.n:
        raise LaurentError("point arity mismatch")
    if any(c == 0 for c in xs):
        raise LaurentError("evaluation point has a zero coordinate")
    total = 0j
    for e, c in f.terms.items():
        m = complex(c)
        for z, k in zip(xs, e):
            m *= cpow_int(z, k)
        total += m
    return total


def height(f: LaurentPolynomial) -> float:
    """log of the largest coefficient magnitude."""
    if f.is_zero:
        raise ZeroPolynomialError("height of the zero polynomial")
    return math.log(max(abs(complex(c)) for c in f.terms.values()))


def l1_norm(f: LaurentPolynomial) -> float:
    return float(sum(abs(complex(c)) for c in f.terms.values()))


def _coefficient_grid(f: LaurentPolynomial):
    """Dense coefficient array after shifting exponents to be nonnegative."""
    exps = np.array(list(f.terms.keys()), dtype=np.int64)
    lo = exps.min(axis=0)
    shape = tuple(int(w) for w in exps.max(axis=0) - lo + 1)
    C = np.zeros(shape, dtype=complex)
    for e, c in f.terms.items():
        C[tuple(int(a - b) for a, b in zip(e, lo))] = complex(c)
    return C, lo


def sup_norm(f: LaurentPolynomial, grid_order: int | None = None,
             refine: bool = True) -> tuple[float, float]:
    """Certified interval for sup |f| over the unit polycircle.

    Lower bound: maximum over the grid of grid_order-th roots of unity per
    axis (one FFT), optionally improved by gradient ascent on the angles.
    Upper bound: the l1 norm of the coefficients.
    """
    if f.is_zero:
        raise ZeroPolynomialError("sup norm of the zero polynomial")
    upper = l1_norm(f)
    C, _lo = _coefficient_grid(f)
    if grid_order is None:
        width = max(C.shape) - 1
        grid_order = 4 * width + 5
    G = max(int(grid_order), max(C.shape), 2)
    pad = np.zeros((G,) * f.n, dtype=complex)
    pad[tuple(slice(0, s) for s in C.shape)] = C
    vals = np.fft.ifftn(pad) * (G ** f.n)
    mags = np.abs(vals)
    flat = int(np.argmax(mags))
    lower = float(mags.ravel()[flat])
    if refine and len(f.terms) <= 4096:
        idx = np.unravel_index(flat, mags.shape)
        theta0 = 2.0 * np.pi * np.array(idx, dtype=float) / G
        lower = max(lower, _ascend_on_torus(f, theta0))
    return min(lower, upper), upper


def _ascend_on_torus(f: LaurentPolynomial, theta: np.ndarray, steps: int = 50) -> float:
    exps = np.array(list(f.terms.keys()), dtype=float)
    coefs = np.array([complex(c) for c in f.terms.values()])

    def val_grad(th):
        phase = np.exp(1j * (exps @ th))
        v = np.dot(coefs, phase)
        # gradient of |f|^2 in the angles: 2 Re(conj(v) * i * sum a c_a e^{i<a,th>})
        g = 2.0 * np.real(np.conj(v) * 1j * (coefs * phase) @ exps)
        return abs(v), g

    best, g = val_grad(theta)
    step = 0.1
    for _ in range(steps):
        cand = theta + step * g
        v, g2 = val_grad(cand)
        if v > best:
            best, theta, g = v, cand, g2
            step *= 1.5
        else:
            step *= 0.5
            if step < 1e-14:
                break
    return float(best)


def face_polynomial(f: LaurentPolynomial, v) -> LaurentPolynomial:
    """Restriction of f to the exponents minimizing <a, v>.

    The face is taken on the declared support when present, so the result
    can be zero if f vanishes on that face.
    """
    if f.is_zero:
        raise ZeroPolynomialError("face of the zero polynomial")
    carrier = f.declared_support if f.declared_support is not None else f.support
    fc = lattice_face(carrier, v)
    fcset = set(fc)
    return LaurentPolynomial(f.n, {e: c for e, c in f.terms.items() if e in fcset},
                             frozenset(fcset))


def multiply(f: LaurentPolynomial, g: LaurentPolynomial) -> LaurentPolynomial:
    if f.n != g.n:
        raise LaurentError("arity mismatch in product")
    out: dict[Expo, complex] = {}
    for e1, c1 in f.terms.items():
        for e2, c2 in g.terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return LaurentPolynomial(f.n, out)


def change_of_variables(f: LaurentPolynomial, A, Ainv=None) -> LaurentPolynomial:
    """Pullback under the monomial map built from a unimodular matrix A.

    Exponent vectors map by a -> a . A^{-1}, so that evaluating the result
    at y equals evaluating f at the point with coordinates y^{b_i} for the
    rows b_i of A^{-1}.  The sup-norm is preserved.
    """
    A = [list(map(int, r)) for r in A]
    d = int_det(A)
    if d not in (-1, 1):
        raise LaurentError("change of variables needs |det A| = 1")
    if Ainv is None:
        from .lattice import _int_inverse
        Ainv = _int_inverse(A, d)
    out = {}
    for e, c in f.terms.items():
        ne = tuple(sum(e[i] * Ainv[i][j] for i in range(f.n)) for j in range(f.n))
        out[ne] = c
    decl = None
    if f.declared_support is not None:
        decl = frozenset(
            tuple(sum(e[i] * Ainv[i][j] for i in range(f.n)) for j in range(f.n))
            for e in f.declared_support)
    return LaurentPolynomial(f.n, out, decl)


def restrict_to_sublattice(f: LaurentPolynomial, u) -> tuple[LaurentPolynomial, Expo]:
    """Write f = x^b g(x^u) for a polynomial g in one variable.

    Requires the support of f to lie on a line b + Z u with u primitive.
    Returns (g, b) with b the exponent of the lowest term along u.
    """
    if f.is_zero:
        raise ZeroPolynomialError("cannot restrict the zero polynomial")
    u = tuple(int(c) for c in u)
    exps = list(f.terms.keys())
    e0 = exps[0]
    steps = {}
    for e in exps:
        d = tuple(a - b for a, b in zip(e, e0))
        k = _exact_multiple(d, u)
        if k is None:
            raise LaurentError(f"support of f does not lie on a line with direction {u}")
        steps[e] = k
    kmin = min(steps.values())
    b = tuple(a + kmin * c for a, c in zip(e0, u))
    g = {(steps[e] - kmin,): c for e, c in f.terms.items()}
    return LaurentPolynomial(1, g), b


def _exact_multiple(d: Expo, u: Expo) -> int | None:
    k = None
    for di, ui in zip(d, u):
        if ui == 0:
            if di != 0:
                return None
            continue
        q, r = divmod(di, ui)
        if r != 0:
            return None
        if k is None:
            k = q
        elif k != q:
            return None
    return 0 if k is None else k


@dataclass
class SystemSpec:
    """A square system of Laurent polynomials with its support data."""

    polynomials: list[LaurentPolynomial]
    supports: list[frozenset[Expo]] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.polynomials)
        if n == 0:
            raise LaurentError("empty system")
        if any(f.n != n for f in self.polynomials):
            raise LaurentError("system must be square: n polynomials in n variables")
        if not self.supports:
            self.supports = [
                f.declared_support if f.declared_support is not None else frozenset(f.support)
                for f in self.polynomials
            ]
        for f, A in zip(self.polynomials, self.supports):
            if not f.support <= set(A):
                raise LaurentError("polynomial support exceeds its declared support")

    @property
    def n(self) -> int:
        return len(self.polynomials)

    @cached_property
    def newton_polytopes(self) -> list[LatticePolytope]:
        return [convex_hull(A, dim=self.n) for A in self.supports]

    @cached_property
    def bernstein_number(self) -> int:
        mv = mixed_volume(self.newton_polytopes)
        if mv.denominator != 1:
            raise LaurentError(f"mixed volume {mv} is not an integer")
        return int(mv)

    def scale(self, gammas) -> "SystemSpec":
        return SystemSpec([f.scale(g) for f, g in zip(self.polynomials, gammas)],
                          list(self.supports))


# ---------------------------------------------------------------------------
# text and JSON formats

_NUM = r"\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
_TERM_RE = re.compile(
    rf"""
    (?P<coef>
        \(\s*[-+]?{_NUM}\s*(?:[-+]\s*{_NUM}\s*[iI])?\s*\)   # (re+imi)
      | [-+]?{_NUM}(?:\s*[iI])?                             # bare number
    )?
    (?P<vars>(?:\s*\*?\s*x\d*(?:\^-?\d+)?)+)?
    """,
    re.VERBOSE,
)
_VAR_RE = re.compile(r"x(?P<idx>\d*)(?:\^(?P<exp>-?\d+))?")


class ParseError(LaurentError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def parse_polynomial(text: str, n: int | None = None) -> LaurentPolynomial:
    """Parse `2*x1^3 - x1*x2^2 + 1` style input; `x` alone means `x1`."""
    src = text.strip()
    if not src:
        raise ParseError("empty polynomial", 0)
    chunks = _split_terms(src)
    raw_terms: list[tuple[dict[int, int], complex]] = []
    max_idx = 0
    for sign, chunk, pos in chunks:
        m = _TERM_RE.fullmatch(chunk.strip())
        if m is None or (m.group("coef") is None and m.group("vars") is None):
            raise ParseError(f"unreadable term {chunk.strip()!r}", pos)
        coef = _parse_coef(m.group("coef"), pos)
        powers: dict[int, int] = {}
        if m.group("vars"):
            for vm in _VAR_RE.finditer(m.group("vars")):
                idx = int(vm.group("idx")) if vm.group("idx") else 1
                exp = int(vm.group("exp")) if vm.group("exp") else 1
                powers[idx] = powers.get(idx, 0) + exp
                max_idx = max(max_idx, idx)
        raw_terms.append((powers, sign * coef))
    nn = n if n is not None else max(max_idx, 1)
    if max_idx > nn:
        raise ParseError(f"variable x{max_idx} exceeds declared arity {nn}", 0)
    terms: dict[Expo, complex] = {}
    for powers, c in raw_terms:
        e = tuple(powers.get(i + 1, 0) for i in range(nn))
        terms[e] = terms.get(e, 0) + c
    cleaned = {e: _tighten(c) for e, c in terms.items()}
    return LaurentPolynomial(nn, cleaned)


def _split_terms(src: str):
    out = []
    sign = 1
    buf = []
    start = 0
    depth = 0
    for i, ch in enumerate(src):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parenthesis", i)
        if ch in "+-" and depth == 0 and i > 0 and src[i - 1].lower() not in "e^(":
            if "".join(buf).strip():
                out.append((sign, "".join(buf), start))
            sign = 1 if ch == "+" else -1
            buf = []
            start = i + 1
        elif ch in "+-" and depth == 0 and i == 0:
            sign = 1 if ch == "+" else -1
            start = 1
        else:
            buf.append(ch)
    if depth != 0:
        raise ParseError("unbalanced parenthesis", len(src))
    if "".join(buf).strip():
        out.append((sign, "".join(buf), start))
    if not out:
        raise ParseError("no terms found", 0)
    return out


def _parse_coef(tok: str | None, pos: int) -> complex:
    if tok is None:
        return 1
    tok = tok.strip()
    if tok.startswith("("):
        inner = tok[1:-1].replace(" ", "").replace("I", "i").replace("i", "j")
        try:
            return complex(inner)
        except ValueError:
            raise ParseError(f"bad complex coefficient {tok!r}", pos) from None
    if tok.lower().endswith("i"):
        try:
            return complex(0.0, float(tok[:-1].strip() or "1"))
        except ValueError:
            raise ParseError(f"bad imaginary coefficient {tok!r}", pos) from None
    val = float(tok)
    return int(val) if val.is_integer() else val


def _tighten(c: complex):
    """Prefer exact ints where the value is an integer real."""
    if isinstance(c, int):
        return c
    z = complex(c)
    if z.imag == 0 and float(z.real).is_integer():
        return int(z.real)
    if z.imag == 0:
        return z.real
    return z


def format_polynomial(f: LaurentPolynomial) -> str:
    if f.is_zero:
        return "0"
    pieces = []
    for e in sorted(f.terms.keys(), reverse=True):
        c = f.terms[e]
        mono = "*".join(
            f"x{i+1}" + (f"^{k}" if k != 1 else "")
            for i, k in enumerate(e) if k != 0
        )
        ctext = _format_coef(c, bare=not mono)
        if mono:
            piece = mono if ctext == "1" else (f"-{mono}" if ctext == "-1" else f"{ctext}*{mono}")
        else:
            piece = ctext
        pieces.append(piece)
    out = pieces[0]
    for p in pieces[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


def _format_coef(c, bare: bool) -> str:
    z = complex(c)
    if z.imag == 0:
        r = z.real
        if float(r).is_integer():
            return str(int(r))
        return repr(r)
    re_s = repr(int(z.real)) if float(z.real).is_integer() else repr(z.real)
    im = z.imag
    im_s = repr(int(abs(im))) if float(im).is_integer() else repr(abs(im))
    sign = "+" if im >= 0 else "-"
    return f"({re_s}{sign}{im_s}i)"


def poly_to_obj(f: LaurentPolynomial) -> dict:
    return {
        "n": f.n,
        "terms": [
            {"e": list(e), "c": [complex(c).real, complex(c).imag]}
            for e, c in sorted(f.terms.items())
        ],
    }


def poly_from_obj(obj: dict) -> LaurentPolynomial:
    n = int(obj["n"])
    terms = {}
    for t in obj["terms"]:
        e = tuple(int(x) for x in t["e"])
        c = t["c"]
        terms[e] = _tighten(complex(float(c[0]), float(c[1])))
    return LaurentPolynomial(n, terms)


def system_to_json(system: SystemSpec) -> str:
    return json.dumps({"n": system.n,
                       "polynomials": [poly_to_obj(f) for f in system.polynomials]})


def system_from_json(text: str) -> SystemSpec:
    obj = json.loads(text)
    polys = [poly_from_obj(p) for p in obj["polynomials"]]
    return SystemSpec(polys)
