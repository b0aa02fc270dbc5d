"""Statistical and deterministic verification of simulated Levy processes.

Every check returns a TestReport. Multi-case checks report the largest
normalized deviation against a threshold of 1; deterministic inequality
checks report the largest violation against a numerical tolerance.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import replace
from typing import Any

import numpy as np
from scipy import special, stats
from scipy.stats import qmc

from .char_func import (
    CharTriplet,
    cf_levy,
    cf_poisson_integral,
    lk_exponent,
    moments_poisson_integral,
    nth_root_triplet,
    second_moment_small_jumps,
    small_ball_seminorm_sq,
)
from .const import (
    CHI2_LEVEL,
    ECF_BAND,
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_PASS,
    FERNIQUE_MAX_EPSILON,
    IDENTITY_TOLERANCE,
    KS_LEVEL,
    MIN_ECF_REPLICAS,
    MIN_EXPECTED_BIN,
    MIN_INDEPENDENCE_REPLICAS,
    PROBE_COUNT,
    QUAD_REPORT_TOLERANCE,
    SE_BAND,
    SEMIGROUP_TOLERANCE,
)
from .coordinator import ReplicaCoordinator
from .exceptions import (
    DomainError,
    InfiniteMassError,
    InvalidParameterError,
    OrderingError,
)
from .levy_measure import (
    LevyMeasureSpec,
    Region,
    integrability_functional,
    integrate_measure,
    region_mass,
    second_moment,
)
from .sequence_space import IndexLike, TestFunction, hs_norm_sq, seminorm, weights
from .simulate import SimConfig
from .state import STATUS_FAIL, STATUS_INCONCLUSIVE, TestReport
from .streams import derive_seed

LOG = logging.getLogger(__name__)

PREMISE_NOTE = 'premise plausibly holds on the probe grid'
MINLOS_RADII = (1.0, 4.0, 16.0)


def _normalized(deviation: float, band: float) -> float:
    if band > 0.0:
        return deviation / band
    return 0.0 if deviation <= 0.0 else math.inf


def _max(values: Sequence[float]) -> float:
    return max(values, default=0.0)


def probe_functions(dim: int, count: int = 20) -> list[TestFunction]:
    """Deterministic quasi-random test functions with coordinates in [-1, 1].

    Rows 0 and 1 of the unscrambled Sobol sequence map to the corner and to
    phi = 0, so both are skipped.
    """
    m = max(1, math.ceil(math.log2(count + 2)))
    points = qmc.Sobol(d=dim, scramble=False).random_base2(m)
    return [TestFunction(2.0 * row - 1.0) for row in points[2 : count + 2]]


def _ball_probes(dim: int, p: IndexLike, radius: float = 1.0) -> list[TestFunction]:
    """Sobol points and scaled basis vectors inside the p-ball of radius `radius`."""
    w = weights(p, dim)
    m = math.ceil(math.log2(PROBE_COUNT))
    z = 2.0 * qmc.Sobol(d=dim, scramble=False).random_base2(m) - 1.0
    z /= np.maximum(1.0, np.linalg.norm(z, axis=1))[:, None]
    basis = np.eye(dim)
    rows = np.vstack([z, basis, -basis]) * radius / w
    return [TestFunction(row) for row in rows]


def _coordinator(triplet: CharTriplet, cfg: SimConfig) -> ReplicaCoordinator:
    return ReplicaCoordinator(triplet, cfg)


def _single_time_config(cfg: SimConfig, t: float, *labels: int) -> SimConfig:
    """Config with one grid cell ending at t and a derived master seed."""
    return replace(cfg, horizon=t, grid_dt=t, master_seed=derive_seed(cfg.master_seed, *labels))


def _check_node(cfg: SimConfig, t: float) -> None:
    if not cfg.is_node(t):
        raise DomainError(f'Time {t} is not a node of the grid with step {cfg.grid_dt}')


def _ks_compare(x: np.ndarray, y: np.ndarray, level: float) -> tuple[float, dict[str, Any]]:
    """Return D / critical value and details; equal constant samples are degenerate-equal."""
    scale = max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(y))))
    if np.ptp(x) <= IDENTITY_TOLERANCE * scale and np.ptp(y) <= IDENTITY_TOLERANCE * scale:
        equal = abs(float(x[0]) - float(y[0])) <= IDENTITY_TOLERANCE * scale
        return (0.0 if equal else math.inf), {'degenerate': True, 'equal': equal}
    result = stats.ks_2samp(x, y)
    n, m = x.size, y.size
    critical = float(special.kolmogi(level)) * math.sqrt((n + m) / (n * m))
    return float(result.statistic) / critical, {
        'ks': float(result.statistic),
        'pvalue': float(result.pvalue),
        'critical': critical,
    }


def ecf_test(
    triplet: CharTriplet,
    t: float,
    phis: Sequence[TestFunction],
    cfg: SimConfig,
    exponent_scale: float = 1.0,
) -> TestReport:
    """Compare the empirical CF of L_t[phi] with exp(t eta(phi)).

    The band per phi is ECF_BAND / sqrt(N) plus t p_r(phi)^2 res(K), the CF
    error left by truncating the small jumps at shell K.
    t must be a grid node.
    """
    if cfg.replicas < MIN_ECF_REPLICAS:
        raise InvalidParameterError(f'ECF test needs at least {MIN_ECF_REPLICAS} replicas')
    _check_node(cfg, t)
    coordinator = _coordinator(triplet, cfg)
    samples = coordinator.sample([t], phis)[0]
    residual = coordinator.decomposition.residual
    cases = []
    for phi, values in zip(phis, samples, strict=True):
        empirical = complex(np.mean(np.exp(1j * values)))
        theory = complex(np.exp(t * exponent_scale * lk_exponent(triplet, phi)))
        band = ECF_BAND / math.sqrt(cfg.replicas) + t * seminorm(phi, triplet.r) ** 2 * residual
        deviation = abs(empirical - theory)
        cases.append({'deviation': deviation, 'band': band, 'ratio': _normalized(deviation, band)})
    return TestReport.from_comparison(
        'ecf',
        _max([c['ratio'] for c in cases]),
        1.0,
        sample_size=cfg.replicas,
        seed=cfg.master_seed,
        notes=[f'max deviation {_max([c["deviation"] for c in cases]):.3g}'],
        details={'t': t, 'residual': residual, 'cases': cases},
    )


def _moment_case(
    values: np.ndarray, mean: float, variance: float, slack: float
) -> dict[str, float]:
    n = values.size
    empirical_mean = float(np.mean(values))
    empirical_var = float(np.var(values))
    centered = values - empirical_mean
    fourth = float(np.mean(centered**4))
    se_mean = math.sqrt(max(variance, empirical_var) / n)
    se_var = math.sqrt(max(fourth - empirical_var**2, 0.0) / n)
    mean_ratio = _normalized(abs(empirical_mean - mean), SE_BAND * se_mean)
    var_ratio = _normalized(abs(empirical_var - variance), SE_BAND * se_var + slack)
    return {
        'mean': empirical_mean,
        'theory_mean': mean,
        'variance': empirical_var,
        'theory_variance': variance,
        'ratio': max(mean_ratio, var_ratio),
    }


def moment_tests(
    triplet: CharTriplet,
    t: float,
    phis: Sequence[TestFunction],
    cfg: SimConfig,
    variance_scale: float = 1.0,
) -> TestReport:
    """Check mean and variance of the large-jump integral J_t and the compensated M_t."""
    _check_node(cfg, t)
    coordinator = _coordinator(triplet, cfg)
    samples = coordinator.sample_components([t], phis, ['large', 'small'])
    residual = coordinator.decomposition.residual
    tail = Region.complement(1.0, triplet.r)
    cases = []
    for j, phi in enumerate(phis):
        mean, variance = moments_poisson_integral(triplet.levy, tail, t, phi)
        case = _moment_case(samples['large'][0, j], mean, variance_scale * variance, 0.0)
        cases.append({'component': 'large', **case})

        variance = second_moment_small_jumps(triplet.levy, triplet.r, t, phi)
        slack = t * seminorm(phi, triplet.r) ** 2 * residual
        case = _moment_case(samples['small'][0, j], 0.0, variance_scale * variance, slack)
        cases.append({'component': 'small', **case})
    return TestReport.from_comparison(
        'moments',
        _max([c['ratio'] for c in cases]),
        1.0,
        sample_size=cfg.replicas,
        seed=cfg.master_seed,
        details={'t': t, 'residual': residual, 'cases': cases},
    )


def independence_test(
    triplet: CharTriplet,
    pairs: Sequence[tuple[str, str]],
    phi: TestFunction,
    psi: TestFunction,
    cfg: SimConfig,
    t: float | None = None,
) -> TestReport:
    """Empirical correlation of a[phi] and b[psi] at time t for each component pair."""
    if cfg.replicas < MIN_INDEPENDENCE_REPLICAS:
        raise InvalidParameterError(
            f'Independence test needs at least {MIN_INDEPENDENCE_REPLICAS} replicas'
        )
    t = cfg.horizon if t is None else t
    _check_node(cfg, t)
    components = sorted({name for pair in pairs for name in pair})
    coordinator = _coordinator(triplet, cfg)
    at_phi = coordinator.sample_components([t], [phi], components)
    at_psi = coordinator.sample_components([t], [psi], components) if psi != phi else at_phi
    band = SE_BAND / math.sqrt(cfg.replicas)
    notes: list[str] = []
    cases = []
    for a, b in pairs:
        x, y = at_phi[a][0, 0], at_psi[b][0, 0]
        if np.std(x) == 0.0 or np.std(y) == 0.0:
            notes.append(f'skipped {a}/{b}: zero-variance component')
            LOG.warning(f'Independence pair {a}/{b} skipped: zero-variance component')
            continue
        corr = float(np.corrcoef(x, y)[0, 1])
        cases.append({'pair': [a, b], 'corr': corr, 'ratio': abs(corr) / band})
    return TestReport.from_comparison(
        'independence',
        _max([c['ratio'] for c in cases]),
        1.0,
        sample_size=cfg.replicas,
        seed=cfg.master_seed,
        notes=notes,
        details={'t': t, 'band': band, 'cases': cases},
    )


def semigroup_test(
    triplet: CharTriplet,
    s: float,
    t: float,
    phis: Sequence[TestFunction],
    cfg: SimConfig,
    level: float = KS_LEVEL,
) -> TestReport:
    """Exact CF additivity plus a KS comparison of L_{s+t} with L_s + L'_t."""
    if not (s > 0.0 and t > 0.0):
        raise DomainError(f'Semigroup test needs s, t > 0, got s={s}, t={t}')
    exact = 0.0
    for phi in phis:
        product = cf_levy(triplet, s, phi) * cf_levy(triplet, t, phi)
        exact = max(exact, abs(cf_levy(triplet, s + t, phi) - product))
    whole = ReplicaCoordinator(triplet, _single_time_config(cfg, s + t, 1)).sample([s + t], phis)
    first = ReplicaCoordinator(triplet, _single_time_config(cfg, s, 2)).sample([s], phis)
    second = ReplicaCoordinator(triplet, _single_time_config(cfg, t, 3)).sample([t], phis)

    notes: list[str] = []
    cases = []
    for j in range(len(phis)):
        ratio, info = _ks_compare(whole[0, j], first[0, j] + second[0, j], level)
        if info.get('degenerate'):
            notes.append(f'phi {j}: degenerate-equal samples')
        cases.append({'ratio': ratio, **info})
    statistic = max(exact / SEMIGROUP_TOLERANCE, _max([c['ratio'] for c in cases]))
    return TestReport.from_comparison(
        'semigroup',
        statistic,
        1.0,
        sample_size=cfg.replicas,
        seed=cfg.master_seed,
        notes=notes,
        details={'s': s, 't': t, 'exact_deviation': exact, 'level': level, 'cases': cases},
    )


def infdiv_test(
    triplet: CharTriplet,
    n: int,
    phis: Sequence[TestFunction],
    cfg: SimConfig,
    level: float = KS_LEVEL,
) -> TestReport:
    """Compare L_1 with the sum of n independent copies under the n-th root triplet."""
    root = nth_root_triplet(triplet, n)
    exact = _max([abs(cf_levy(root, 1.0, phi) ** n - cf_levy(triplet, 1.0, phi)) for phi in phis])

    target = ReplicaCoordinator(triplet, _single_time_config(cfg, 1.0, 10)).sample([1.0], phis)
    total = np.zeros_like(target)
    for j in range(n):
        copy_cfg = _single_time_config(cfg, 1.0, 11 + j)
        total += ReplicaCoordinator(root, copy_cfg).sample([1.0], phis)

    notes: list[str] = []
    cases = []
    for j in range(len(phis)):
        ratio, info = _ks_compare(target[0, j], total[0, j], level)
        if info.get('degenerate'):
            notes.append(f'phi {j}: degenerate-equal samples')
        cases.append({'ratio': ratio, **info})
    statistic = max(exact / IDENTITY_TOLERANCE, _max([c['ratio'] for c in cases]))
    return TestReport.from_comparison(
        'infdiv',
        statistic,
        1.0,
        sample_size=cfg.replicas,
        seed=cfg.master_seed,
        notes=notes,
        details={'n': n, 'exact_deviation': exact, 'level': level, 'cases': cases},
    )


def _merge_bins(
    observed: np.ndarray, expected: np.ndarray, floor: float
) -> tuple[np.ndarray, np.ndarray]:
    """Merge adjacent bins left to right until each expectation reaches floor."""
    merged_obs: list[float] = []
    merged_exp: list[float] = []
    acc_obs = acc_exp = 0.0
    for o, e in zip(observed, expected, strict=True):
        acc_obs += o
        acc_exp += e
        if acc_exp >= floor:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
    if acc_exp > 0.0 or acc_obs > 0.0:
        if merged_exp:
            merged_obs[-1] += acc_obs
            merged_exp[-1] += acc_exp
        else:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
    return np.array(merged_obs), np.array(merged_exp)


def _poisson_gof(counts: np.ndarray, lam: float, level: float) -> tuple[float, dict[str, Any]]:
    """Chi-square goodness of fit against Poisson(lam); ratio <= 1 iff p >= level."""
    n = counts.size
    k_max = int(stats.poisson.ppf(1.0 - 1e-12, lam)) + 1
    pmf = stats.poisson.pmf(np.arange(k_max + 1), lam)
    pmf[-1] = stats.poisson.sf(k_max - 1, lam)
    observed = np.bincount(np.minimum(counts, k_max), minlength=k_max + 1).astype(float)
    obs, exp = _merge_bins(observed, n * pmf, MIN_EXPECTED_BIN)
    if obs.size < 2:
        return 0.0, {'skipped': 'fewer than two bins after merging'}
    chi2 = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    critical = float(stats.chi2.ppf(1.0 - level, dof))
    return chi2 / critical, {
        'chi2': chi2,
        'dof': dof,
        'pvalue': float(stats.chi2.sf(chi2, dof)),
        'critical': critical,
    }


def jump_count_test(
    triplet: CharTriplet,
    region: Region,
    t: float,
    cfg: SimConfig,
    intensity_scale: float = 1.0,
    other: Region | None = None,
    level: float = CHI2_LEVEL,
) -> TestReport:
    """Compare N(t, A) across replicas with Poisson(t nu(A)).

    With `other` given, counts in the two regions must also be uncorrelated
    (meaningful for disjoint regions).
    """
    if not region.bounded_below:
        raise InvalidParameterError(f'Jump counts need a region bounded below, got {region.kind}')
    mass = region_mass(triplet.levy, region)
    if mass == 0.0:
        return TestReport.from_comparison(
            'jump_count',
            0.0,
            1.0,
            sample_size=cfg.replicas,
            seed=cfg.master_seed,
            notes=['region has zero mass'],
        )
    lam = t * mass * intensity_scale
    regions = [region] if other is None else [region, other]
    counts = _coordinator(triplet, cfg).counts(regions, t)
    empirical = float(np.mean(counts[0]))
    mean_ratio = _normalized(abs(empirical - lam), SE_BAND * math.sqrt(lam / cfg.replicas))
    gof_ratio, gof = _poisson_gof(counts[0], lam, level)
    notes: list[str] = []
    if 'skipped' in gof:
        notes.append(f'chi-square skipped: {gof["skipped"]}')

    details: dict[str, Any] = {'t': t, 'lambda': lam, 'mean': empirical, 'gof': gof}
    ratios = [mean_ratio, gof_ratio]
    if other is not None:
        if np.std(counts[0]) == 0.0 or np.std(counts[1]) == 0.0:
            notes.append('correlation skipped: constant counts')
        else:
            corr = float(np.corrcoef(counts[0], counts[1])[0, 1])
            details['corr'] = corr
            ratios.append(abs(corr) / (SE_BAND / math.sqrt(cfg.replicas)))
    return TestReport.from_comparison(
        'jump_count',
        max(ratios),
        1.0,
        sample_size=cfg.replicas,
        seed=cfg.master_seed,
        notes=notes,
        details=details,
    )


def fernique_check(
    triplet: CharTriplet,
    p: IndexLike,
    eps: float,
    n_list: Sequence[int],
    phis: Sequence[TestFunction],
) -> TestReport:
    """Check n (1 - Re exp(eta/n)) <= 8 eps (1 + p(phi)^2) under a probed premise.

    The premise |1 - cf(phi)| < eps on the p unit ball is checked on Sobol
    probes; when it fails the report is inconclusive.
    """
    if not 0.0 < eps <= FERNIQUE_MAX_EPSILON:
        raise InvalidParameterError(f'Epsilon must lie in (0, {FERNIQUE_MAX_EPSILON}], got {eps}')
    if any(n < 1 for n in n_list):
        raise DomainError(f'Root orders must be positive, got {list(n_list)}')
    probes = _ball_probes(triplet.dim, p)
    premise = _max([abs(1.0 - cf_levy(triplet, 1.0, phi)) for phi in probes])
    if not premise < eps:
        LOG.warning(f'Fernique premise fails: max |1 - cf| = {premise:.3g} >= {eps}')
        return TestReport.inconclusive(
            'fernique',
            premise,
            eps,
            notes=['premise fails on the probe grid'],
            details={'probes': len(probes)},
        )

    worst = 0.0
    slack = math.inf
    for phi in phis:
        eta = lk_exponent(triplet, phi)
        rhs = 8.0 * eps * (1.0 + seminorm(phi, p) ** 2)
        for n in n_list:
            lhs = n * (1.0 - math.exp(eta.real / n) * math.cos(eta.imag / n))
            worst = max(worst, lhs / rhs)
            slack = min(slack, rhs - lhs)
    return TestReport.from_comparison(
        'fernique',
        worst,
        1.0,
        notes=[PREMISE_NOTE],
        details={'premise': premise, 'probes': len(probes), 'min_slack': slack},
    )


def minlos_check(
    mu: LevyMeasureSpec,
    p: IndexLike,
    q: IndexLike,
    eps: float,
    dim: int | None = None,
) -> TestReport:
    """Check int (q'^2 ^ 1) dmu <= eps (1 + ||i_{p,q}||_HS^2) under a probed premise.

    mu is read as the probability measure carrying the given atoms plus the
    remaining mass at the origin, so its total mass must not exceed 1.
    """
    if float(q) <= float(p) + 0.5:
        raise OrderingError(f'Minlos check needs q > p + 1/2, got p={float(p)}, q={float(q)}')
    if not mu.is_finite:
        raise InfiniteMassError('Minlos check needs a finite measure')
    if mu.total_mass > 1.0 + IDENTITY_TOLERANCE:
        raise InvalidParameterError(f'Measure mass {mu.total_mass} exceeds 1')
    dim = mu.dim if dim is None else dim
    points, masses = mu.point_masses

    premise = -math.inf
    probe_count = 0
    for radius in MINLOS_RADII:
        for phi in _ball_probes(mu.dim, p, radius):
            y = points @ phi.coords
            gap = float(np.sum(masses * 2.0 * np.sin(0.5 * y) ** 2))  # 1 - Re mu^(phi)
            premise = max(premise, gap - eps * (1.0 + seminorm(phi, p) ** 2))
            probe_count += 1
    if premise > 0.0:
        LOG.warning(f'Minlos premise fails by {premise:.3g}')
        return TestReport.inconclusive(
            'minlos',
            premise,
            0.0,
            notes=['premise fails on the probe grid'],
            details={'probes': probe_count},
        )

    lhs = float(integrability_functional(mu, q))
    hs = hs_norm_sq(p, q, dim)
    rhs = eps * (1.0 + hs.value)
    return TestReport.from_comparison(
        'minlos',
        lhs,
        rhs,
        notes=[PREMISE_NOTE],
        details={'hs_norm_sq': hs.value, 'probes': probe_count, 'slack': rhs - lhs},
    )


def small_ball_bound_check(
    nu: LevyMeasureSpec, r: IndexLike, phis: Sequence[TestFunction]
) -> TestReport:
    """Check int_B (1 - cos f[phi]) dnu <= q(phi)^2 / 2 <= C rho(phi)^2 / 2.

    q is the small-ball seminorm and C = int_B rho'(f)^2 dnu.
    """
    ball = Region.ball(1.0, r)
    constant = float(second_moment(nu, ball))
    worst = 0.0
    cases = []
    for phi in phis:
        coords = phi.coords

        def one_minus_cos(points: np.ndarray, coords: np.ndarray = coords) -> np.ndarray:
            return 2.0 * np.sin(0.5 * (points @ coords)) ** 2

        left = float(integrate_measure(nu, ball, one_minus_cos))
        half_q = 0.5 * small_ball_seminorm_sq(nu, r, phi)
        half_bound = 0.5 * constant * seminorm(phi, r) ** 2
        worst = max(worst, left - half_q, half_q - half_bound)
        cases.append({'integral': left, 'half_q_sq': half_q, 'half_bound': half_bound})
    return TestReport.from_comparison(
        'small_ball',
        worst,
        QUAD_REPORT_TOLERANCE,
        details={'constant': constant, 'cases': cases},
    )


def poisson_domination_check(
    triplet: CharTriplet, regions: Sequence[Region], phis: Sequence[TestFunction]
) -> TestReport:
    """Check 1 - |e^(nu_A)(phi)|^2 <= 1 - |mu^_{L_1}(phi)|^2 for regions bounded below."""
    worst = 0.0
    for region in regions:
        if not region.bounded_below:
            raise InvalidParameterError(f'Region {region.kind} is not bounded below')
        for phi in phis:
            poisson_sq = abs(cf_poisson_integral(triplet.levy, region, 1.0, phi)) ** 2
            levy_sq = abs(cf_levy(triplet, 1.0, phi)) ** 2
            worst = max(worst, (1.0 - poisson_sq) - (1.0 - levy_sq))
    return TestReport.from_comparison(
        'poisson_domination',
        worst,
        QUAD_REPORT_TOLERANCE,
        details={'regions': len(regions), 'phis': len(phis)},
    )


TESTS: dict[str, Callable[..., TestReport]] = {
    'ecf': ecf_test,
    'moments': moment_tests,
    'independence': independence_test,
    'semigroup': semigroup_test,
    'infdiv': infdiv_test,
    'jump_count': jump_count_test,
    'fernique': fernique_check,
    'minlos': minlos_check,
    'small_ball': small_ball_bound_check,
    'poisson_domination': poisson_domination_check,
}


def run_suite(tests: Sequence[tuple[str, dict[str, Any]]]) -> list[TestReport]:
    """Run (name, kwargs) pairs in order; reports keep the requested order."""
    reports = []
    for name, kwargs in tests:
        if name not in TESTS:
            raise InvalidParameterError(f"Unknown test '{name}'. Supported: {list(TESTS)}")
        LOG.info(f'Running {name}')
        report = TESTS[name](**kwargs)
        LOG.info(f'{name}: {report.status} ({report.statistic:.4g} vs {report.threshold:.4g})')
        reports.append(report)
    return reports


def exit_code(reports: Sequence[TestReport]) -> int:
    """0 if all pass, 1 if any fails, 2 if the only non-passes are inconclusive."""
    if any(report.status == STATUS_FAIL for report in reports):
        return EXIT_FAIL
    if any(report.status == STATUS_INCONCLUSIVE for report in reports):
        return EXIT_INCONCLUSIVE
    return EXIT_PASS
