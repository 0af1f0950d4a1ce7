"""Verification suites behind ``compcos verify``.

Each suite returns a list of :class:`~compcos.report.Case`.  Monte Carlo
cases pass at three combined standard errors; closed-form cases carry the
absolute or relative tolerance stated next to them.  Every estimate draws
from its own child stream of the run seed, so reports are reproducible.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma

from . import __version__
from .cone import (
    composite_power,
    composite_power_minors,
    reverse_index,
    reverse_matrix,
)
from .gaussian import GaussianSchwartz, random_mixture
from .geometry import (
    NESTED_POSITIVE_RANGE,
    NESTED_REAL_RANGE,
    integrate_cone,
    integrate_matrix_gaussian,
    integrate_stiefel,
    polar_nested_integral,
    sample_orthogonal,
    sample_stiefel,
    transpose,
    triangular_nested_integral,
)
from .mc import RngStream
from .radon import MatrixPlane, projection_slice_residual, radon_gaussian, radon_gaussian_mc
from .report import Case, SuiteReport, exact_case, flag_case, mc_case
from .special import (
    ZERO,
    average_closed_form,
    gamma_cone,
    injectivity_classify,
    multiplier_mu,
    siegel_gamma,
    stiefel_volume,
    stiefel_volume_spheres,
)
from .transforms import (
    annihilation_check,
    constant_one,
    cosine_transform,
    eigen_relation_check,
    make_h_polynomial,
    perp_duality_check,
    projection_quadratic,
)
from .zeta import (
    functional_equation_residual,
    power_fourier_residual,
    zeta_closed_form,
    zeta_integral,
    zeta_star,
    hecke_identity_residual,
)

SUITES = (
    "cone", "gamma", "measure", "average", "eigen", "annihilate",
    "zeta", "functional", "hecke", "radon", "perp",
)


@dataclass(frozen=True)
class RunSettings:
    seed: int = 42
    samples: int = 1_000_000
    partitions: int = 1
    # wall-clock of named parts of a suite, for criteria that cover only part of one
    sections: dict = field(default_factory=dict, compare=False)

    def stream(self, suite: str) -> RngStream:
        return RngStream(self.seed, SUITES.index(suite) + 1)

    @contextmanager
    def section(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.sections[name] = int((time.perf_counter() - t0) * 1000)


def _gen(settings: RunSettings, suite: str, offset: int = 0) -> np.random.Generator:
    return settings.stream(suite).child(10_000 + offset).generator()


def _random_pd(gen: np.random.Generator, m: int) -> np.ndarray:
    g = gen.standard_normal((m, m))
    return g.T @ g + np.eye(m)


def _random_triangular(gen: np.random.Generator, m: int) -> np.ndarray:
    t = np.triu(gen.standard_normal((m, m)))
    t[np.diag_indices(m)] = np.exp(0.5 * gen.standard_normal(m))
    return t


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), np.finfo(float).tiny)


def _max_rel_case(name: str, errors, tol: float) -> Case:
    worst = float(max(errors))
    return Case(name, complex(worst), 0j, 0.0, worst, tol, worst <= tol)


# -- cone algebra ---------------------------------------------------------------

def suite_cone(settings: RunSettings) -> list[Case]:
    """Composite-power identities on 200 random instances each, m = 1..4."""
    gen = _gen(settings, "cone")
    cases = []
    for m in range(1, 5):
        errs = {k: [] for k in ("multiplicativity", "shift", "triangular", "reversal", "inverse_reversal", "minor_path")}
        for _ in range(200):
            r = _random_pd(gen, m)
            lam = gen.uniform(-2, 2, m) + 1j * gen.uniform(-1, 1, m)
            mu = gen.uniform(-2, 2, m) + 1j * gen.uniform(-1, 1, m)
            alpha = complex(gen.uniform(-2, 2), gen.uniform(-1, 1))
            t = _random_triangular(gen, m)
            rinv = np.linalg.inv(r)
            rinv = 0.5 * (rinv + rinv.T)
            errs["multiplicativity"].append(
                _rel(composite_power(r, lam + mu), composite_power(r, lam) * composite_power(r, mu))
            )
            errs["shift"].append(
                _rel(composite_power(r, lam + alpha), composite_power(r, lam) * np.linalg.det(r) ** (alpha / 2))
            )
            errs["triangular"].append(
                _rel(composite_power(t.T @ r @ t, lam), composite_power(t.T @ t, lam) * composite_power(r, lam))
            )
            errs["reversal"].append(
                _rel(composite_power(r, reverse_index(lam)), composite_power(reverse_matrix(rinv), -lam))
            )
            errs["inverse_reversal"].append(
                _rel(composite_power(rinv, lam), composite_power(reverse_matrix(r), -reverse_index(lam)))
            )
            errs["minor_path"].append(_rel(composite_power(r, lam), composite_power_minors(r, lam)))
        for key, values in errs.items():
            cases.append(_max_rel_case(f"cone:{key}:m={m}", values, 1e-10))
    return cases


# -- gamma layer and classifier -------------------------------------------------

def classifier_expected(lam0: float, n: int, m: int) -> bool:
    """The constant-index dichotomy, written out independently of the classifier."""
    rank = min(m, n - m)
    is_int = float(lam0).is_integer() and lam0 >= 0
    if rank == 1:
        return not (is_int and int(lam0) % 2 == 0)
    return not is_int


CLASSIFIER_GRID = ((3, 1), (4, 2), (5, 2), (4, 1))
CLASSIFIER_LAMBDAS = (0.0, 0.5, 1.0, 2.0, 3.0)


def classifier_cases() -> list[Case]:
    cases = []
    for n, m in CLASSIFIER_GRID:
        for lam0 in CLASSIFIER_LAMBDAS:
            verdict = injectivity_classify(np.full(m, lam0), n)
            ok = verdict.injective is classifier_expected(lam0, n, m)
            cases.append(flag_case(f"gamma:classify:n={n}:m={m}:lam={lam0:g}", ok))
    return cases


def suite_gamma(settings: RunSettings) -> list[Case]:
    gen = _gen(settings, "gamma")
    cases = []
    errs = []
    for _ in range(50):
        m = int(gen.integers(1, 5))
        lam = complex(gen.uniform(m, m + 6), gen.uniform(-2, 2))
        errs.append(_rel(gamma_cone(np.full(m, lam)).value, siegel_gamma(lam / 2, m).value))
    cases.append(_max_rel_case("gamma:cone_vs_siegel", errs, 1e-12))
    errs = [
        _rel(stiefel_volume(n, m), stiefel_volume_spheres(n, m))
        for n in range(1, 11)
        for m in range(1, n + 1)
    ]
    cases.append(_max_rel_case("gamma:stiefel_volume_dual", errs, 1e-12))
    lam = np.array([3.0, 4.0])
    for i in range(5):
        s = _random_pd(gen, 2) / 2
        s_rev = reverse_matrix(s)

        def h(r, t, s=s):
            d = np.diagonal(t, axis1=-2, axis2=-1)
            return np.exp(np.log(d) @ lam - np.einsum("nij,ji->n", r, s))

        # the integrand decays like a Gaussian, so the narrow ranges suffice and
        # levels 4 and 5 agree to ~1e-12
        value = integrate_cone(
            h, 2, level=5, positive_range=NESTED_POSITIVE_RANGE, real_range=NESTED_REAL_RANGE, pass_factor=True
        )
        target = gamma_cone(lam).value * composite_power(s_rev, -reverse_index(lam))
        cases.append(exact_case(f"gamma:laplace:{i}", value, target, rtol=1e-6))
    with settings.section("gamma:classifier"):
        cases += classifier_cases()
    return cases


# -- measure layer -------------------------------------------------------------

MEASURE_PRECISION = np.array(
    [[1.2, 0.3, 0.0, 0.0], [0.3, 0.9, 0.1, 0.0], [0.0, 0.1, 1.5, 0.2], [0.0, 0.0, 0.2, 0.7]]
)


def suite_measure(settings: RunSettings) -> list[Case]:
    stream = settings.stream("measure")
    n, m = 4, 2
    a = MEASURE_PRECISION
    exact = (2 * math.pi) ** (n * m / 2) * np.linalg.det(a) ** (-m / 2)
    frames = max(64, settings.samples // 250)

    def phi(x):
        return np.exp(-0.5 * np.einsum("...ij,ik,...kj->...", x, a, x))

    direct = integrate_matrix_gaussian(phi, n, m, settings.samples, stream.child(0), settings.partitions)
    polar = polar_nested_integral(a, m, frames, stream.child(1))
    tri = triangular_nested_integral(a, m, frames, stream.child(2))
    cases = [
        mc_case("measure:polar_vs_direct", polar, direct),
        mc_case("measure:triangular_vs_direct", tri, direct),
        mc_case("measure:direct_vs_closed", direct, exact),
    ]
    sphere = integrate_stiefel(lambda v: v[..., 0, 0] ** 2, 3, 1, settings.samples, stream.child(3), settings.partitions)
    cases.append(mc_case("measure:sphere_moment", sphere, 4 * math.pi / 3))
    rot = sample_orthogonal(5, _gen(settings, "measure"))
    u0 = sample_stiefel(5, 2, _gen(settings, "measure", 1))
    tests = {
        "det": lambda v: np.linalg.det(transpose(v) @ u0) ** 2,
        "entry": lambda v: v[..., 0, 0] ** 2 * v[..., 1, 1] ** 2,
        "trace": lambda v: np.einsum("...ij,...ij->...", v, v[..., ::-1, :]) ** 2,
    }
    for i, (key, f) in enumerate(tests.items()):
        plain = integrate_stiefel(f, 5, 2, settings.samples, stream.child(10 + i), settings.partitions)
        rotated = integrate_stiefel(
            lambda v, f=f: f(rot @ v), 5, 2, settings.samples, stream.child(20 + i), settings.partitions
        )
        cases.append(mc_case(f"measure:haar_invariance:{key}", plain, rotated))
    return cases


# -- average identity ----------------------------------------------------------

AVERAGE_POINTS = ((4, 2, (1.0, 1.0)), (4, 2, (2.0, 0.5)), (4, 2, (0.5, -0.5)), (5, 2, (1.0, 1.0)))


def suite_average(settings: RunSettings) -> list[Case]:
    stream = settings.stream("average")
    cases = []
    for i, (n, m, lam) in enumerate(AVERAGE_POINTS):
        u = sample_stiefel(n, m, _gen(settings, "average", i))
        est = cosine_transform(constant_one(), lam, u, settings.samples, stream.child(i), settings.partitions)
        cases.append(mc_case(f"average:n={n}:m={m}:lam={lam}", est, average_closed_form(n, m, lam).value))
    u = sample_stiefel(4, 2, _gen(settings, "average", 99))
    est = cosine_transform(constant_one(), (0.0, 0.0), u, settings.samples, stream.child(99), settings.partitions)
    cases.append(mc_case("average:zero_index_mass", est, stiefel_volume(4, 2)))
    return cases


# -- eigen-relation ------------------------------------------------------------

RANK_ONE_LAMBDAS = (0.5, 1.0, 3.0)
COMPOSITE_POINTS = ((4, 2, 2, (1.0, 1.0)), (4, 2, 2, (1.5, 0.5)), (5, 2, 2, (1.0, 1.0)), (5, 2, 2, (1.5, 0.5)))


def _eigen_cases(prefix: str, report) -> list[Case]:
    cases = []
    for j, est in enumerate(report.estimates):
        cases.append(mc_case(f"{prefix}:frame{j}", est, report.target))
    d = report.details["dispersion"]
    cases.append(Case(f"{prefix}:dispersion", complex(d), 0j, 0.0, d, 3.0, d <= 3.0))
    return cases


def rank_one_multiplier(lam: float, k: int, n: int) -> complex:
    """Classical rank-one Funk-Hecke constant times multiplier, from scalar gammas."""
    c = 2 * math.pi ** ((n - 1) / 2) * (-1) ** (k // 2)
    return c * gamma((lam + 1) / 2) * gamma((k - lam) / 2) / (gamma(-lam / 2) * gamma((lam + k + n) / 2))


def suite_eigen(settings: RunSettings) -> list[Case]:
    stream = settings.stream("eigen")
    cases = []
    with settings.section("eigen:rank_one"):
        cases += _rank_one_eigen_cases(settings, stream)
    with settings.section("eigen:composite"):
        for i, (n, m, k, lam) in enumerate(COMPOSITE_POINTS):
            p = make_h_polynomial(n, m, k)
            rep = eigen_relation_check(p, lam, 5, settings.samples, stream.child(100 + i), settings.partitions)
            cases += _eigen_cases(f"eigen:n={n}:m={m}:k={k}:lam={lam}", rep)
    return cases


def _rank_one_eigen_cases(settings: RunSettings, stream: RngStream) -> list[Case]:
    cases = []
    p = make_h_polynomial(3, 1, 2)
    for i, lam in enumerate(RANK_ONE_LAMBDAS):
        rep = eigen_relation_check(p, [lam], 5, settings.samples, stream.child(i), settings.partitions)
        cases += _eigen_cases(f"eigen:n=3:m=1:k=2:lam={lam:g}", rep)
        cases.append(exact_case(
            f"eigen:rank_one_constant:lam={lam:g}", rep.target, rank_one_multiplier(lam, 2, 3), rtol=1e-12
        ))
    mu0 = multiplier_mu([0.0], 2, 3)
    cases.append(flag_case("eigen:rank_one_null_tag", mu0.kind == ZERO))
    u = sample_stiefel(3, 1, _gen(settings, "eigen"))
    null = cosine_transform(p.as_angle_function(), [0.0], u, settings.samples, stream.child(50), settings.partitions)
    cases.append(mc_case("eigen:rank_one_null_mc", null, 0j))
    return cases


# -- annihilation --------------------------------------------------------------

ANNIHILATION_POINTS = ((4, 2, 2, (1.0, 0.0)), (4, 2, 4, (1.0, 1.0)))


def suite_annihilate(settings: RunSettings) -> list[Case]:
    stream = settings.stream("annihilate")
    cases = []
    for i, (n, m, k, lam) in enumerate(ANNIHILATION_POINTS):
        p = make_h_polynomial(n, m, k)
        rep = annihilation_check(p, lam, settings.samples, stream.child(i), 5, settings.partitions)
        prefix = f"annihilate:n={n}:m={m}:k={k}:lam={lam}"
        cases.append(flag_case(f"{prefix}:mu_zero", rep.details["mu"].kind == ZERO))
        for j, est in enumerate(rep.estimates):
            cases.append(mc_case(f"{prefix}:frame{j}", est, 0j))
    return cases


# -- zeta integrals and the power Fourier identity ------------------------------

def suite_zeta(settings: RunSettings) -> list[Case]:
    stream = settings.stream("zeta")
    phi = GaussianSchwartz(4, 2, 1.0)
    cases = []
    z0 = zeta_integral(phi, (0.0, 0.0), None, settings.samples, stream.child(0), settings.partitions, 1.2)
    cases.append(mc_case("zeta:gaussian_mass", z0, (2 * math.pi) ** 4))
    z = zeta_integral(phi, (2.0, 2.0), None, settings.samples, stream.child(1), settings.partitions, 1.2)
    cases.append(mc_case("zeta:lam=(2,2)", z, zeta_closed_form(phi, (2.0, 2.0))))
    zs = zeta_star(phi, (2.0, 0.5), None, settings.samples, stream.child(2), settings.partitions, 1.2)
    cases.append(mc_case("zeta_star:lam=(2,0.5)", zs, zeta_closed_form(phi, (2.0, 0.5))))
    phi3 = GaussianSchwartz(3, 1, 1.0)
    for c in power_fourier_residual([-2.0], 3, 1, phi3, settings.samples, stream.child(3), settings.partitions):
        cases.append(_rename(c, "zeta:n=3:m=1:" + c.name))
    for c in power_fourier_residual([-2.5, -1.5], 4, 2, phi, settings.samples, stream.child(4), settings.partitions):
        cases.append(_rename(c, "zeta:n=4:m=2:" + c.name))
    return cases


def _rename(c: Case, name: str) -> Case:
    return Case(name, c.lhs, c.rhs, c.stderr, c.residual, c.tolerance, c.passed, c.skipped_fraction)


# -- functional equation --------------------------------------------------------

def suite_functional(settings: RunSettings) -> list[Case]:
    stream = settings.stream("functional")
    cases = []
    phi = GaussianSchwartz(4, 2, 1.0)
    lam = (-1.5, -0.5)
    for c in functional_equation_residual(lam, None, phi, 4, 2, settings.samples, stream.child(0), settings.partitions, 1.2):
        cases.append(_rename(c, "functional:n=4:m=2:f=one:" + c.name))
    f = projection_quadratic(np.diag([1.0, 2.0, 3.0, 4.0]))
    for c in functional_equation_residual(lam, f, phi, 4, 2, settings.samples, stream.child(1), settings.partitions, 1.2):
        cases.append(_rename(c, "functional:n=4:m=2:f=quadratic:" + c.name))
    phi3 = GaussianSchwartz(3, 1, 1.0)
    for c in functional_equation_residual([-0.5], None, phi3, 3, 1, settings.samples, stream.child(2), settings.partitions, 1.2):
        cases.append(_rename(c, "functional:n=3:m=1:f=one:" + c.name))
    return cases


# -- Hecke identity ---------------------------------------------------------------

def suite_hecke(settings: RunSettings) -> list[Case]:
    stream = settings.stream("hecke")
    gen = _gen(settings, "hecke")
    cases = []
    for k in (0, 1, 2):
        p = make_h_polynomial(4, 2, k)
        ys = [0.4 * gen.standard_normal((4, 2)) for _ in range(3)] if k else [0.4 * gen.standard_normal((4, 2))]
        for i, y in enumerate(ys):
            c = hecke_identity_residual(p, y, settings.samples, stream.child(10 * k + i), settings.partitions)
            cases.append(_rename(c, f"hecke:k={k}:y{i}"))
    p = make_h_polynomial(4, 2, 1)
    c = hecke_identity_residual(p, np.zeros((4, 2)), settings.samples, stream.child(99), settings.partitions)
    cases.append(_rename(c, "hecke:k=1:y=0"))
    return cases


# -- Radon transform and projection slice ----------------------------------------

def suite_radon(settings: RunSettings) -> list[Case]:
    stream = settings.stream("radon")
    gen = _gen(settings, "radon")
    cases = []
    for n, k, m in ((5, 3, 2), (4, 3, 2)):
        for i in range(10):
            mix = random_mixture(n, m, gen)
            xi = sample_stiefel(n, k, gen)
            b = gen.standard_normal((k, m))
            r = projection_slice_residual(mix, xi, b)
            cases.append(Case(f"radon:slice:n={n}:k={k}:m={m}:{i}", r.lhs, r.rhs, 0.0, r.residual, r.tolerance, r.passed))
        xi = sample_stiefel(n, k, gen)
        r = projection_slice_residual(random_mixture(n, m, gen), xi, np.zeros((k, m)))
        cases.append(Case(f"radon:slice_zero_frequency:n={n}:k={k}:m={m}", r.lhs, r.rhs, 0.0, r.residual, r.tolerance, r.passed))
    phi = GaussianSchwartz(4, 2, 1.0)
    xi = sample_stiefel(4, 3, gen)
    t = 0.5 * gen.standard_normal((3, 2))
    plane = MatrixPlane(xi, t)
    closed = (2 * math.pi) ** ((4 - 3) * 2 / 2) * math.exp(-np.sum(t * t) / 2)
    cases.append(exact_case("radon:isotropic_closed", radon_gaussian(phi, plane), closed, rtol=1e-12))
    mix = random_mixture(4, 2, gen)
    mc = radon_gaussian_mc(mix, plane, settings.samples, stream.child(0), settings.partitions)
    cases.append(mc_case("radon:mixture_mc", mc, radon_gaussian(mix, plane)))
    return cases


# -- perp duality -----------------------------------------------------------------

def suite_perp(settings: RunSettings) -> list[Case]:
    stream = settings.stream("perp")
    cases = []
    for i, (n, m) in enumerate(((4, 1), (5, 2))):
        lhs = average_closed_form(n, m, np.ones(m)).value / stiefel_volume(n, m)
        rhs = average_closed_form(n, n - m, np.ones(n - m)).value / stiefel_volume(n, n - m)
        cases.append(exact_case(f"perp:closed_form:n={n}:m={m}", lhs, rhs, rtol=1e-10))
        f = projection_quadratic(np.diag(np.arange(1.0, n + 1)))
        rep = perp_duality_check(f, 1.0, n, m, settings.samples, stream.child(i), partitions=settings.partitions)
        cases.append(mc_case(f"perp:n={n}:m={m}:vs:m={n - m}", rep.estimates[0], rep.estimates[1]))
    return cases


SUITE_FUNCS: dict[str, Callable[[RunSettings], list[Case]]] = {
    "cone": suite_cone,
    "gamma": suite_gamma,
    "measure": suite_measure,
    "average": suite_average,
    "eigen": suite_eigen,
    "annihilate": suite_annihilate,
    "zeta": suite_zeta,
    "functional": suite_functional,
    "hecke": suite_hecke,
    "radon": suite_radon,
    "perp": suite_perp,
}


def run_suites(names, seed: int, samples_for: Callable[[str], int], partitions: int = 1) -> SuiteReport:
    """Run suites in order and assemble one report.

    ``samples_for(suite)`` gives the Monte Carlo sample count of a suite.
    """
    names = list(names)
    start = time.perf_counter()
    cases: list[Case] = []
    timings = {}
    sections = {}
    for name in names:
        t0 = time.perf_counter()
        settings = RunSettings(seed, samples_for(name), partitions)
        cases += SUITE_FUNCS[name](settings)
        timings[name] = int((time.perf_counter() - t0) * 1000)
        sections.update(settings.sections)
    label = names[0] if len(names) == 1 else "all"
    samples = {samples_for(n) for n in names}
    meta = {
        "seed": seed,
        "samples": samples.pop() if len(samples) == 1 else None,
        "partitions": partitions,
        "runtime_ms": int((time.perf_counter() - start) * 1000),
        "version": __version__,
        "suites": names,
        "suite_runtime_ms": timings,
        "section_runtime_ms": sections,
    }
    return SuiteReport(label, cases, meta)
