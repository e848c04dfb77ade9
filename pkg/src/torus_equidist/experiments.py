"""Desk-scale experiments: dilated integer families, random Gaussian
systems, and the projective-geometry ingredients (Fubini-Study chordal
distance, the hypersurface Lojasiewicz inequality, tube-volume bounds).

Trials are seeded by counter-based spawning from (seed, kappa, trial,
attempt), so tables are reproducible regardless of scheduling.  Rejected
trials (vanishing directional resultant or a failed Bernstein
certificate) are resampled from a fresh stream up to a 10x budget and
always accounted for, never silently dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cycles import angle_discrepancy, radius_discrepancy
from .et_bounds import et_size, multivariate_discrepancy_bounds
from .lattice import LatticePolytope, lattice_points
from .laurent import LaurentPolynomial, SystemSpec
from .resultants import DegenerateSystemError
from .solver import zero_cycle


class ExperimentError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    base_polytopes: list[LatticePolytope]
    kappa_list: list[int]
    trials: int | list[int] = 3
    seed: int = 0
    coefficient_law: str = "gaussian"  # "gaussian" | "signs" | "integer_uniform"
    integer_range: int = 10
    eps_list: tuple[float, ...] = (0.2,)
    angle_cap: int = 400
    refine_supnorm: bool = False

    def trials_for(self, idx: int) -> int:
        if isinstance(self.trials, int):
            return self.trials
        return self.trials[idx]


@dataclass
class TrialResult:
    kappa: int
    trial: int
    degree: int
    d_ang: float
    d_ang_exact: bool
    d_rad: dict[float, float]
    eta_interval: tuple[float, float]
    thm_angle_bound: float
    thm_radius_bounds: dict[float, float]
    log_supnorms: list[float]


@dataclass
class TrendRow:
    kappa: int
    trials: int
    accepted: int
    rejected: int
    mean_d_ang: float
    max_d_ang: float
    mean_d_rad: dict[float, float]
    rate_expected: float
    dilation_rate: float
    angle_bound_ok: bool
    radius_bound_ok: bool
    results: list[TrialResult] = field(default_factory=list)


def dilated_support(Q: LatticePolytope, kappa: int):
    """All lattice points of the kappa-fold dilate (exact, n <= 3)."""
    if kappa < 1:
        raise ExperimentError("dilation factor must be >= 1")
    return lattice_points(Q.dilate(kappa))


def _trial_rng(seed: int, kappa: int, trial: int, attempt: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(kappa, trial, attempt))
    return np.random.default_rng(ss)


def random_gaussian_system(polytopes, kappa: int, seed: int = 0,
                           rng: np.random.Generator | None = None) -> SystemSpec:
    """iid standard complex Gaussian coefficients on the dilated supports."""
    if rng is None:
        rng = _trial_rng(seed, kappa, 0, 0)
    polys = []
    for Q in polytopes:
        pts = dilated_support(Q, kappa)
        re = rng.standard_normal(len(pts)) * math.sqrt(0.5)
        im = rng.standard_normal(len(pts)) * math.sqrt(0.5)
        terms = {p: complex(a, b) for p, a, b in zip(pts, re, im)}
        polys.append(LaurentPolynomial(len(pts[0]), terms, frozenset(pts)))
    return SystemSpec(polys)


def random_sign_system(polytopes, kappa: int, seed: int = 0,
                       rng: np.random.Generator | None = None) -> SystemSpec:
    """Coefficients +-1 on every lattice point of the dilated supports."""
    if rng is None:
        rng = _trial_rng(seed, kappa, 0, 0)
    polys = []
    for Q in polytopes:
        pts = dilated_support(Q, kappa)
        signs = rng.integers(0, 2, len(pts)) * 2 - 1
        terms = {p: int(s) for p, s in zip(pts, signs)}
        polys.append(LaurentPolynomial(len(pts[0]), terms, frozenset(pts)))
    return SystemSpec(polys)


def random_integer_system(polytopes, kappa: int, rng: np.random.Generator,
                          coeff_range: int = 10) -> SystemSpec:
    """Nonzero integer coefficients, uniform on +-{1..range}."""
    polys = []
    for Q in polytopes:
        pts = dilated_support(Q, kappa)
        mags = rng.integers(1, coeff_range + 1, len(pts))
        signs = rng.integers(0, 2, len(pts)) * 2 - 1
        polys.append(LaurentPolynomial(len(pts[0]),
                                       {p: int(m * s) for p, m, s in zip(pts, mags, signs)},
                                       frozenset(pts)))
    return SystemSpec(polys)


def _draw_system(config: ExperimentConfig, kappa: int, rng) -> SystemSpec:
    law = config.coefficient_law
    if law == "gaussian":
        return random_gaussian_system(config.base_polytopes, kappa, rng=rng)
    if law == "signs":
        return random_sign_system(config.base_polytopes, kappa, rng=rng)
    if law == "integer_uniform":
        return random_integer_system(config.base_polytopes, kappa, rng,
                                     config.integer_range)
    raise ExperimentError(f"unknown coefficient law {law!r}")


def expected_rate(kappa: int, n: int) -> float:
    """log(kappa+1)^{(2/3)n - 1/3} / kappa^{1/3}, the random-family rate."""
    return math.log(kappa + 1.0) ** ((2.0 / 3.0) * n - 1.0 / 3.0) / kappa ** (1.0 / 3.0)


def dilation_rate(kappa: int, n: int, log_sup_sum: float) -> float:
    """(S/kappa)^{1/3} (1 + log+ (kappa/S))^{2(n-1)/3} with S the summed
    log sup-norms; the integer-family rate up to its absolute constant."""
    s = max(log_sup_sum, 1e-300)
    ratio = s / kappa
    logplus = math.log(max(1.0, kappa / s))
    return ratio ** (1.0 / 3.0) * (1.0 + logplus) ** ((2.0 / 3.0) * (n - 1))


def run_trial(config: ExperimentConfig, kappa: int, trial: int,
              max_attempts: int = 10) -> tuple[TrialResult | None, int]:
    """One accepted trial (or None) plus the number of rejections."""
    rejected = 0
    for attempt in range(max_attempts):
        rng = _trial_rng(config.seed, kappa, trial, attempt)
        system = _draw_system(config, kappa, rng)
        try:
            cyc = zero_cycle(system)
            breakdown = et_size(system, refine=config.refine_supnorm)
        except DegenerateSystemError:
            rejected += 1
            continue
        ang = angle_discrepancy(cyc, cap=config.angle_cap)
        drad = {e: radius_discrepancy(cyc, e) for e in config.eps_list}
        eta_lo = max(breakdown.eta_interval[0], 1e-300)
        angle_bound, _ = multivariate_discrepancy_bounds(eta_lo, system.n, 0.5)
        rad_bounds = {
            e: multivariate_discrepancy_bounds(eta_lo, system.n, e)[1]
            for e in config.eps_list
        }
        logsups = [math.log(s[1]) for s in breakdown.supnorm_intervals]
        return TrialResult(kappa, trial, cyc.degree, ang.value, ang.exact, drad,
                           breakdown.eta_interval, angle_bound, rad_bounds,
                           logsups), rejected
    return None, rejected


def discrepancy_trend(config: ExperimentConfig) -> list[TrendRow]:
    """Solve `trials` systems per dilation factor and tabulate discrepancies
    against the theoretical rates.  Raises if every trial of some kappa is
    rejected."""
    n = len(config.base_polytopes)
    rows = []
    for idx, kappa in enumerate(config.kappa_list):
        trials = config.trials_for(idx)
        results: list[TrialResult] = []
        rejected = 0
        for t in range(trials):
            res, rej = run_trial(config, kappa, t)
            rejected += rej
            if res is not None:
                results.append(res)
        if not results:
            raise ExperimentError(f"all trials rejected at kappa={kappa}")
        dang = [r.d_ang for r in results]
        mean_rad = {
            e: float(np.mean([r.d_rad[e] for r in results])) for e in config.eps_list
        }
        angle_ok = all(r.d_ang <= r.thm_angle_bound for r in results)
        radius_ok = all(
            r.d_rad[e] <= r.thm_radius_bounds[e]
            for r in results for e in config.eps_list)
        srate = float(np.mean([dilation_rate(kappa, n, sum(r.log_supnorms))
                               for r in results]))
        rows.append(TrendRow(
            kappa=kappa, trials=trials, accepted=len(results), rejected=rejected,
            mean_d_ang=float(np.mean(dang)), max_d_ang=float(np.max(dang)),
            mean_d_rad=mean_rad, rate_expected=expected_rate(kappa, n),
            dilation_rate=srate, angle_bound_ok=angle_ok, radius_bound_ok=radius_ok,
            results=results))
    return rows


def fitted_rate_constant(rows: list[TrendRow]) -> float:
    """Smallest c making every trial satisfy d_ang <= c * dilation rate."""
    worst = 0.0
    for row in rows:
        for r in row.results:
            rate = dilation_rate(r.kappa, len(r.log_supnorms), sum(r.log_supnorms))
            worst = max(worst, r.d_ang / rate)
    return worst


def trend_csv(rows: list[TrendRow], eps_list) -> str:
    header = ["kappa", "trials", "accepted", "rejected", "mean_dang", "max_dang"]
    header += [f"mean_drad_{e}" for e in eps_list]
    header += ["rate", "dilation_rate", "angle_bound_ok", "radius_bound_ok"]
    lines = [",".join(header)]
    for row in rows:
        cells = [str(row.kappa), str(row.trials), str(row.accepted), str(row.rejected),
                 repr(row.mean_d_ang), repr(row.max_d_ang)]
        cells += [repr(row.mean_d_rad[e]) for e in eps_list]
        cells += [repr(row.rate_expected), repr(row.dilation_rate),
                  str(row.angle_bound_ok).lower(), str(row.radius_bound_ok).lower()]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# projective space: chordal metric, Lojasiewicz slack, tube volumes

def fs_distance(z1, z2) -> float:
    """sin of the Fubini-Study geodesic distance between projective points.

    Representative-independent; 0 for equal points, 1 for orthogonal ones.
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    n1 = np.linalg.norm(z1)
    n2 = np.linalg.norm(z2)
    if n1 == 0 or n2 == 0:
        raise ExperimentError("projective points need nonzero representatives")
    c = abs(np.vdot(z1, z2)) / (n1 * n2)
    return math.sqrt(max(0.0, 1.0 - min(1.0, c) ** 2))


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """Homogeneous polynomial on C^N given by exponent -> coefficient."""

    nvars: int
    terms: dict[tuple[int, ...], complex]

    def __post_init__(self):
        degs = {sum(e) for e in self.terms}
        if len(degs) > 1:
            raise ExperimentError("polynomial is not homogeneous")

    @property
    def degree(self) -> int:
        return sum(next(iter(self.terms)))

    @property
    def is_integral(self) -> bool:
        return all(complex(c).imag == 0 and complex(c).real.is_integer()
                   for c in self.terms.values())

    def __call__(self, z) -> complex:
        z = np.asarray(z, dtype=complex)
        total = 0j
        for e, c in self.terms.items():
            m = complex(c)
            for zi, k in zip(z, e):
                if k:
                    m *= zi ** k
            total += m
        return total

    def value_many(self, Z: np.ndarray) -> np.ndarray:
        total = np.zeros(Z.shape[0], dtype=complex)
        for e, c in self.terms.items():
            m = np.full(Z.shape[0], complex(c))
            for j, k in enumerate(e):
                if k:
                    m = m * Z[:, j] ** k
            total += m
        return total

    def line_coefficients(self, z: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Ascending coefficients in t of f(z + t x)."""
        d = self.degree
        out = np.zeros(d + 1, dtype=complex)
        for e, c in self.terms.items():
            piece = np.array([complex(c)])
            for zi, xi, k in zip(z, x, e):
                if k:
                    binom = np.array(
                        [math.comb(k, j) * zi ** (k - j) * xi ** j for j in range(k + 1)],
                        dtype=complex)
                    piece = np.convolve(piece, binom)
            out[: len(piece)] += piece
        return out


def _unit_sphere_points(rng: np.random.Generator, count: int, nvars: int) -> np.ndarray:
    Z = rng.standard_normal((count, nvars)) + 1j * rng.standard_normal((count, nvars))
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    return Z


def sphere_sup_lower(f: HomogeneousPolynomial, rng, samples: int = 4000) -> float:
    Z = _unit_sphere_points(rng, samples, f.nvars)
    return float(np.abs(f.value_many(Z)).max())


def lojasiewicz_check(f: HomogeneousPolynomial, points: int = 100,
                      lines_per_point: int = 8, seed: int = 11) -> float:
    """Minimal slack of |f(z)| >= sup_lower * dist(z, V(f))^d over samples.

    dist(z, V(f)) is estimated from above by the nearest root along random
    lines; the sup is a sampled lower bound, and the global distance
    minimum is at most the distance on the sup-attaining line, so a
    negative slack beyond rounding would contradict the inequality.
    """
    from .rootfind import aberth_roots

    rng = np.random.default_rng(seed)
    d = f.degree
    min_slack = math.inf
    for _ in range(points):
        z = _unit_sphere_points(rng, 1, f.nvars)[0]
        sup_lower = 0.0
        dist_upper = math.inf
        for _ in range(lines_per_point):
            x = _unit_sphere_points(rng, 1, f.nvars)[0]
            fx = abs(f(x))
            if fx < 1e-12:
                continue
            sup_lower = max(sup_lower, fx)
            coeffs = f.line_coefficients(z, x)
            if abs(coeffs[0]) == 0:
                dist_upper = 0.0
                continue
            roots, _ = aberth_roots(coeffs)
            for t in roots:
                p = z + t * x
                dist_upper = min(dist_upper, fs_distance(z, p))
        if sup_lower == 0.0 or not math.isfinite(dist_upper):
            continue
        slack = abs(f(z)) - sup_lower * dist_upper ** d
        min_slack = min(min_slack, slack)
    if not math.isfinite(min_slack):
        raise ExperimentError("distance sampling failed on every point")
    return min_slack


@dataclass
class TubeResult:
    estimate: float
    sigma: float
    bound_conservative: float  # from the sampled sup lower bound
    bound_strict: float        # from the l1 upper bound on the sphere sup
    bound_integer: float | None

    @property
    def verdict(self) -> str:
        if self.estimate <= self.bound_strict + 3.0 * self.sigma:
            return "pass"
        if self.estimate <= self.bound_conservative + 3.0 * self.sigma:
            return "indeterminate"
        return "fail"


def tube_measure_estimate(f: HomogeneousPolynomial, delta: float,
                          samples: int = 200000, seed: int = 5) -> TubeResult:
    """Monte Carlo measure of {|f(z)|/||z||^d < delta} against the explicit
    tube bound 15 d N^3 (delta / sup)^{2/d}.

    Uniform sampling on projective space is a normalized complex Gaussian.
    The conservative bound uses the sampled lower bound of the sphere sup
    (enlarging the bound); the strict bound uses the l1 coefficient bound.
    """
    if delta <= 0:
        raise ExperimentError("delta must be positive")
    rng = np.random.default_rng(seed)
    N = f.nvars
    d = f.degree
    Z = _unit_sphere_points(rng, samples, N)
    vals = np.abs(f.value_many(Z))
    estimate = float(np.mean(vals < delta))
    sigma = math.sqrt(max(estimate * (1 - estimate), 1.0 / samples) / samples)
    sup_lower = max(float(vals.max()), 1e-300)
    sup_upper = float(sum(abs(complex(c)) for c in f.terms.values()))
    lead = 15.0 * d * N ** 3
    bound_cons = lead * (delta / sup_lower) ** (2.0 / d)
    bound_strict = lead * (delta / sup_upper) ** (2.0 / d)
    bound_int = lead * delta ** (2.0 / d) if f.is_integral else None
    return TubeResult(estimate, sigma, bound_cons, bound_strict, bound_int)
