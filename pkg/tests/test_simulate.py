"""Tests for Levy-Ito path simulation."""

from __future__ import annotations

from typing import TypeAlias

import math
from collections.abc import Callable

import numpy as np
import pytest
from scipy import stats

from nuclear_levy.char_func import CharTriplet, CovarianceForm, second_moment_small_jumps
from nuclear_levy.const import LARGE_TAG
from nuclear_levy.exceptions import DimensionError, DomainError, InvalidParameterError
from nuclear_levy.levy_measure import Atom, LevyMeasureSpec, Region, shell_decomposition
from nuclear_levy.sequence_space import DualPoint, TestFunction
from nuclear_levy.simulate import (
    JumpRecords,
    SimConfig,
    assemble_levy,
    count_jumps,
    evaluate_component,
    evaluate_path,
    sample_large_jumps,
    sample_small_jumps,
    sample_wiener,
    simulate_block,
)
from nuclear_levy.streams import derive_seed, substream

SimFactory: TypeAlias = Callable[..., SimConfig]


def test_sim_config_validation(make_sim: SimFactory) -> None:
    """Test simulation configs reject invalid parameters."""
    with pytest.raises(InvalidParameterError):
        make_sim(2, horizon=0.0)
    with pytest.raises(InvalidParameterError):
        make_sim(2, grid_dt=2.0)
    with pytest.raises(InvalidParameterError):
        make_sim(2, shells=0)
    with pytest.raises(InvalidParameterError):
        make_sim(2, replicas=0)
    with pytest.raises(InvalidParameterError):
        make_sim(2, master_seed=-1)
    with pytest.raises(DimensionError):
        make_sim(0)


def test_grid_with_short_last_cell(make_sim: SimFactory) -> None:
    """Test the grid ends exactly at the horizon."""
    cfg = make_sim(1, grid_dt=0.3)
    assert cfg.n_cells == 4
    assert cfg.grid == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    assert cfg.grid[-1] == 1.0


def test_block_layout(make_sim: SimFactory) -> None:
    """Test replicas are split into fixed blocks."""
    cfg = make_sim(1, replicas=1_100, block_size=512)
    assert cfg.n_blocks == 3
    assert cfg.block_range(2) == range(1_024, 1_100)


def test_substreams_are_reproducible() -> None:
    """Test substreams depend only on their keys."""
    a = substream(5, 1, 'small', 3).random(4)
    b = substream(5, 1, 'small', 3).random(4)
    c = substream(5, 1, 'small', 4).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert derive_seed(5, 1) != derive_seed(5, 2)
    assert 0 <= derive_seed(5, 1) < 2**63
    with pytest.raises(InvalidParameterError):
        substream(5, 0, 'gamma')


def test_zero_covariance_gives_zero_wiener(make_sim: SimFactory) -> None:
    """Test the Wiener component vanishes for Q=0."""
    cfg = make_sim(3)
    increments = sample_wiener(CovarianceForm.zeros(3), cfg, np.random.default_rng(0), 10)
    assert increments.shape == (10, cfg.n_cells, 3)
    assert not np.any(increments)


def test_wiener_variance(make_sim: SimFactory) -> None:
    """Test Var(W_1[phi]) = Q(phi)^2 within four standard errors."""
    cfg = make_sim(1, replicas=20_000)
    rng = substream(3, 0, 'wiener')
    increments = sample_wiener(CovarianceForm.diagonal([1.0]), cfg, rng, 20_000)
    values = increments.sum(axis=1)[:, 0]
    assert float(np.var(values)) == pytest.approx(1.0, abs=4.0 * math.sqrt(2.0 / values.size))


def test_large_jump_counts(make_sim: SimFactory) -> None:
    """Test the mean number of tail jumps equals the tail mass."""
    nu = LevyMeasureSpec(dim=1, atoms=(Atom(DualPoint([3.0]), 2.0),))
    n = 20_000
    cfg = make_sim(1, replicas=n)
    records = sample_large_jumps(nu, 0.0, cfg, substream(9, 0, 'large'), n)
    counts = np.bincount(records.replica, minlength=n)
    assert float(np.mean(counts)) == pytest.approx(2.0, abs=4.0 * math.sqrt(2.0 / n))
    assert np.all(records.tag == LARGE_TAG)
    assert np.all((records.time > 0.0) & (records.time <= cfg.horizon))


def test_empty_tail(make_sim: SimFactory, power_measure: LevyMeasureSpec) -> None:
    """Test a measure without tail mass has no large jumps."""
    cfg = make_sim(2)
    records = sample_large_jumps(power_measure, 0.0, cfg, np.random.default_rng(1), 100)
    assert len(records) == 0


def test_small_jumps_by_shell(make_sim: SimFactory, power_measure: LevyMeasureSpec) -> None:
    """Test small jumps carry their shell tag and stay inside that shell."""
    cfg = make_sim(2, shells=4)
    rngs = [np.random.default_rng(k) for k in range(4)]
    records, decomposition = sample_small_jumps(power_measure, 0.0, cfg, rngs, 50)
    assert len(decomposition.shells) == 4
    norms = np.abs(records.marks[:, 0])
    for k, shell in enumerate(decomposition.shells):
        in_shell = records.tag == k
        assert np.all(shell.region.contains(norms[in_shell]))
    with pytest.raises(InvalidParameterError):
        sample_small_jumps(power_measure, 0.0, cfg, rngs[:2], 50)


def test_path_starts_at_zero(make_sim: SimFactory, reference_triplet: CharTriplet) -> None:
    """Test L_0 = 0 for every component."""
    cfg = make_sim(reference_triplet.dim, replicas=20, shells=6)
    path = assemble_levy(reference_triplet, cfg, replica=3)
    phi = TestFunction(np.linspace(-1.0, 1.0, reference_triplet.dim))
    assert evaluate_path(path, 0.0, phi) == 0.0
    for component in ('drift', 'wiener', 'small', 'large'):
        assert evaluate_component(path, component, 0.0, phi) == 0.0


def test_cadlag_jumps(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test L_s - L_{s-} equals the jump mark paired with phi."""
    cfg = make_sim(atomic_triplet.dim, replicas=50)
    batch = simulate_block(atomic_triplet, cfg, 0)
    phi = TestFunction([1.0, -0.5, 0.25])
    assert len(batch.jumps) > 0
    for i in range(min(10, len(batch.jumps))):
        s = float(batch.jumps.time[i])
        replica = int(batch.jumps.replica[i])
        jump = batch.values(s, phi)[replica] - batch.values(s, phi, left_limit=True)[replica]
        assert jump == pytest.approx(float(batch.jumps.marks[i] @ phi.coords), abs=1e-10)


def test_linearity_in_phi(make_sim: SimFactory, reference_triplet: CharTriplet) -> None:
    """Test path evaluations are linear in the test function."""
    dim = reference_triplet.dim
    cfg = make_sim(dim, replicas=20)
    batch = simulate_block(reference_triplet, cfg, 0)
    phi = TestFunction(np.linspace(-1.0, 1.0, dim))
    psi = TestFunction(np.cos(np.arange(dim)))
    combined = phi.scaled(2.0) + psi.scaled(-3.0)
    for t in (0.1, 0.5, 1.0):
        expected = 2.0 * batch.values(t, phi) - 3.0 * batch.values(t, psi)
        np.testing.assert_allclose(batch.values(t, combined), expected, atol=1e-9)


def test_block_simulation_is_deterministic(
    make_sim: SimFactory, atomic_triplet: CharTriplet
) -> None:
    """Test re-simulating a block gives identical records."""
    cfg = make_sim(atomic_triplet.dim, replicas=100)
    first = simulate_block(atomic_triplet, cfg, 0)
    second = simulate_block(atomic_triplet, cfg, 0)
    np.testing.assert_array_equal(first.wiener_increments, second.wiener_increments)
    np.testing.assert_array_equal(first.jumps.time, second.jumps.time)
    np.testing.assert_array_equal(first.jumps.marks, second.jumps.marks)


def test_jump_records_are_sorted(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test jump records are ordered by replica and then time."""
    cfg = make_sim(atomic_triplet.dim, replicas=100)
    jumps = simulate_block(atomic_triplet, cfg, 0).jumps
    keys = list(zip(jumps.replica.tolist(), jumps.time.tolist(), strict=True))
    assert keys == sorted(keys)
    assert len(JumpRecords.concat([], 3)) == 0


def test_counts(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test jump counts add up over a two-shell partition."""
    cfg = make_sim(atomic_triplet.dim, replicas=200)
    batch = simulate_block(atomic_triplet, cfg, 0)
    whole = batch.counts(Region.shell(0.25, 1.0), 1.0)
    parts = batch.counts(Region.shell(0.25, 0.5), 1.0) + batch.counts(Region.shell(0.5, 1.0), 1.0)
    np.testing.assert_array_equal(whole, parts)
    assert count_jumps(batch, Region.complement(1.0), 0.0, replica=0) == 0
    with pytest.raises(InvalidParameterError):
        batch.counts(Region.ball(1.0), 1.0)


def test_evaluation_errors(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test evaluation outside the horizon or with unknown components raises."""
    cfg = make_sim(atomic_triplet.dim, replicas=5)
    batch = simulate_block(atomic_triplet, cfg, 0)
    phi = TestFunction([1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        batch.values(1.5, phi)
    with pytest.raises(InvalidParameterError):
        batch.values(0.5, phi, 'gamma')
    with pytest.raises(InvalidParameterError):
        batch.values(0.5, phi, 'shell:99')
    with pytest.raises(DimensionError):
        batch.values(0.5, TestFunction([1.0]))
    with pytest.raises(InvalidParameterError):
        assemble_levy(atomic_triplet, cfg, replica=5)


def test_shell_components_sum_to_small(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test per-shell components add up to the compensated small jumps."""
    cfg = make_sim(atomic_triplet.dim, replicas=30)
    batch = simulate_block(atomic_triplet, cfg, 0)
    phi = TestFunction([1.0, 1.0, 1.0])
    shells = sum(batch.values(0.7, phi, f'shell:{k}') for k in range(cfg.shells))
    np.testing.assert_allclose(shells, batch.values(0.7, phi, 'small'), atol=1e-12)


def test_increment_stationarity(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test L_{t+d} - L_t has the law of L_d."""
    n = 4_000
    phi = TestFunction([1.0, -1.0, 0.5])
    cfg = make_sim(atomic_triplet.dim, replicas=n, block_size=n, master_seed=21)
    batch = simulate_block(atomic_triplet, cfg, 0)
    increments = batch.values(0.75, phi) - batch.values(0.25, phi)
    reference = simulate_block(atomic_triplet, make_sim(3, replicas=n, block_size=n), 0)
    result = stats.ks_2samp(increments, reference.values(0.5, phi))
    assert result.pvalue > 1e-3


def test_triplet_dimension_mismatch(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test simulating with a config of another truncation raises."""
    with pytest.raises(DimensionError):
        simulate_block(atomic_triplet, make_sim(4), 0)


def _variance_band(values: np.ndarray) -> float:
    """Four standard errors of the sample variance."""
    centered = values - np.mean(values)
    fourth = float(np.mean(centered**4))
    return 4.0 * math.sqrt(max(fourth - float(np.var(values)) ** 2, 0.0) / values.size)


def test_wiener_covariance(make_sim: SimFactory) -> None:
    """Test Cov(W_s[phi], W_t[phi]) = (s ^ t) Q(phi)^2 at grid nodes."""
    n = 20_000
    triplet = CharTriplet(
        DualPoint.zeros(1), CovarianceForm.diagonal([2.0]), LevyMeasureSpec.empty(1)
    )
    batch = simulate_block(triplet, make_sim(1, replicas=n, block_size=n, master_seed=5), 0)
    phi = TestFunction([1.0])
    early = batch.values(0.25, phi, 'wiener')
    late = batch.values(0.75, phi, 'wiener')
    # Var W_0.25 = 0.5, Var W_0.75 = 1.5, Cov = 0.5
    band = 4.0 * math.sqrt((0.5 * 1.5 + 0.5**2) / n)
    assert float(np.cov(early, late)[0, 1]) == pytest.approx(0.5, abs=band)


def test_independent_increments(make_sim: SimFactory, atomic_triplet: CharTriplet) -> None:
    """Test increments over disjoint intervals are uncorrelated."""
    n = 10_000
    cfg = make_sim(atomic_triplet.dim, replicas=n, block_size=n, master_seed=17)
    batch = simulate_block(atomic_triplet, cfg, 0)
    phi = TestFunction([1.0, -1.0, 0.5])
    first = batch.values(0.5, phi)
    second = batch.values(1.0, phi) - first
    assert abs(float(np.corrcoef(first, second)[0, 1])) <= 4.0 / math.sqrt(n)


def test_compensated_small_jumps_of_an_atom(make_sim: SimFactory) -> None:
    """Test M_t[phi] of one atom inside the ball has mean 0 and the expected variance."""
    n = 20_000
    nu = LevyMeasureSpec(dim=1, atoms=(Atom(DualPoint([0.5]), 3.0),))
    triplet = CharTriplet(DualPoint.zeros(1), CovarianceForm.zeros(1), nu)
    cfg = make_sim(1, replicas=n, block_size=n, shells=3, master_seed=8)
    phi = TestFunction([1.0])
    values = simulate_block(triplet, cfg, 0).values(1.0, phi, 'small')

    variance = second_moment_small_jumps(nu, 0.0, 1.0, phi)
    assert variance == pytest.approx(0.75)
    assert float(np.mean(values)) == pytest.approx(0.0, abs=4.0 * math.sqrt(variance / n))
    assert float(np.var(values)) == pytest.approx(variance, abs=_variance_band(values))


def test_truncation_control(make_sim: SimFactory, power_measure: LevyMeasureSpec) -> None:
    """Test doubling the shell count shrinks the residual and simulated variances track it."""
    residuals = {k: shell_decomposition(power_measure, 0.0, k).residual for k in (3, 6, 12)}
    for k in (3, 6):
        # density x^-1.5 leaves (2/3) 2^(-1.5 K) below the last shell
        assert residuals[k] == pytest.approx((2.0 / 3.0) * 2.0 ** (-1.5 * k), rel=1e-8)
        assert residuals[2 * k] <= residuals[k] * 2.0 ** (-1.5 * k) * (1.0 + 1e-6)

    n = 20_000
    triplet = CharTriplet(DualPoint.zeros(2), CovarianceForm.zeros(2), power_measure)
    phi = TestFunction([1.0, 0.0])
    for k in (3, 6):
        cfg = make_sim(2, replicas=n, block_size=n, shells=k, master_seed=30 + k)
        values = simulate_block(triplet, cfg, 0).values(1.0, phi, 'small')
        expected = 2.0 / 3.0 - residuals[k]
        assert float(np.var(values)) == pytest.approx(expected, abs=_variance_band(values))
