"""Tests for Levy measures, regions and shell decompositions."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from nuclear_levy.exceptions import (
    DimensionError,
    EmptyRegionError,
    InfiniteMassError,
    InvalidMeasureError,
    InvalidParameterError,
    NonIntegrableError,
)
from nuclear_levy.levy_measure import (
    Atom,
    AtomicAxis,
    LevyMeasureSpec,
    PowerLawAxis,
    Region,
    complement_mass,
    first_moment,
    first_moment_finite,
    integrability_functional,
    region_mass,
    sample_jump,
    sample_jumps,
    second_moment,
    shell_decomposition,
    validate,
)
from nuclear_levy.sequence_space import DualPoint


def test_integrability_of_tail_atom() -> None:
    """Test an atom outside the unit ball contributes its mass."""
    nu = LevyMeasureSpec(dim=2, atoms=(Atom(DualPoint([2.0, 0.0]), 3.0),))
    assert float(integrability_functional(nu, 0.0)) == pytest.approx(3.0)


def test_integrability_of_power_law(power_measure: LevyMeasureSpec) -> None:
    """Test the quadrature against the analytic integral of x^0.5 on (0, 1]."""
    result = integrability_functional(power_measure, 0.0)
    assert float(result) == pytest.approx(2.0 / 3.0, rel=1e-8)
    assert result.abserr < 1e-8


def test_integrability_with_weighted_axis() -> None:
    """Test the axis weight (1+n)^r moves the unit-ball boundary."""
    nu = LevyMeasureSpec(dim=2, axes=(PowerLawAxis(n=1, c=1.0, alpha=0.5, x_max=4.0),))
    # at r=1 along axis 1 the dual norm is |x|/2, so the cap starts at |x|=2
    inside = (2.0 / 3.0) * 2.0**1.5 / 4.0
    outside = 2.0 * (2.0**-0.5 - 4.0**-0.5)
    assert float(integrability_functional(nu, 1.0)) == pytest.approx(inside + outside, rel=1e-8)


def test_validate_atom() -> None:
    """Test validation of a single in-ball atom."""
    nu = LevyMeasureSpec(dim=2, atoms=(Atom(DualPoint([0.5, 0.0]), 2.0),))
    report = validate(nu, 0.0)
    assert report.valid is True
    assert report.small_ball_moment == pytest.approx(0.5)
    assert report.tail_mass == 0.0
    assert report.origin_mass == 0.0


def test_validate_power_law(power_measure: LevyMeasureSpec) -> None:
    """Test validation of the power-law axis."""
    report = validate(power_measure, 0.0)
    assert report.valid is True
    assert report.small_ball_moment == pytest.approx(2.0 / 3.0, rel=1e-6)
    assert report.tail_mass == 0.0


def test_reject_atom_at_origin() -> None:
    """Test atoms at the origin are rejected at construction."""
    with pytest.raises(InvalidMeasureError):
        LevyMeasureSpec(dim=2, atoms=(Atom(DualPoint([0.0, 0.0]), 1.0),))
    with pytest.raises(InvalidMeasureError):
        AtomicAxis(n=0, atoms=((0.0, 1.0),))


def test_reject_bad_structure() -> None:
    """Test structural checks on masses, axes and dimensions."""
    with pytest.raises(InvalidMeasureError):
        LevyMeasureSpec(dim=2, atoms=(Atom(DualPoint([1.0, 0.0]), -1.0),))
    with pytest.raises(DimensionError):
        LevyMeasureSpec(dim=3, atoms=(Atom(DualPoint([1.0, 0.0]), 1.0),))
    with pytest.raises(InvalidMeasureError):
        LevyMeasureSpec(dim=2, axes=(AtomicAxis(n=2, atoms=((1.0, 1.0),)),))
    with pytest.raises(InvalidMeasureError):
        LevyMeasureSpec(
            dim=2,
            axes=(AtomicAxis(n=0, atoms=((1.0, 1.0),)), AtomicAxis(n=0, atoms=((2.0, 1.0),))),
        )
    with pytest.raises(InvalidParameterError):
        PowerLawAxis(n=0, c=1.0, alpha=2.0, x_max=1.0)
    with pytest.raises(InvalidMeasureError):
        PowerLawAxis(n=0, c=0.0, alpha=1.0, x_max=1.0)


def test_region_mass(power_measure: LevyMeasureSpec) -> None:
    """Test region masses of atoms and power-law bands."""
    nu = LevyMeasureSpec(dim=2, atoms=(Atom(DualPoint([2.0, 0.0]), 1.7),))
    assert region_mass(nu, Region.shell(1.0, 3.0)) == pytest.approx(1.7)
    assert region_mass(nu, Region.shell(2.0, 3.0)) == 0.0
    assert region_mass(power_measure, Region.shell(0.25, 1.0)) == pytest.approx(2.0)


def test_region_mass_symmetric_axis() -> None:
    """Test symmetric axes double the one-sided band mass."""
    nu = LevyMeasureSpec(
        dim=1, axes=(PowerLawAxis(n=0, c=1.0, alpha=0.5, x_max=1.0, side='symmetric'),)
    )
    assert region_mass(nu, Region.shell(0.25, 1.0)) == pytest.approx(4.0)


def test_infinite_mass(power_measure: LevyMeasureSpec) -> None:
    """Test regions reaching the origin have infinite power-law mass."""
    with pytest.raises(InfiniteMassError):
        region_mass(power_measure, Region.ball(1.0))
    assert power_measure.total_mass == math.inf
    assert power_measure.is_finite is False


def test_complement_mass(power_measure: LevyMeasureSpec) -> None:
    """Test complement masses are finite for every radius in (0, 1]."""
    assert complement_mass(power_measure, 0.0, 0.25) == pytest.approx(2.0)
    assert complement_mass(power_measure, 0.0, 1.0) == 0.0
    with pytest.raises(InvalidParameterError):
        complement_mass(power_measure, 0.0, 0.0)


def test_first_moment(power_measure: LevyMeasureSpec) -> None:
    """Test first moments and divergence detection."""
    moment = first_moment(power_measure, Region.ball(1.0))
    assert moment.coords[0] == pytest.approx(2.0)
    assert moment.coords[1] == 0.0

    heavy = LevyMeasureSpec(dim=1, axes=(PowerLawAxis(n=0, c=1.0, alpha=1.5, x_max=1.0),))
    assert first_moment_finite(heavy, Region.ball(1.0)) is False
    assert first_moment_finite(heavy, Region.shell(0.5, 1.0)) is True
    with pytest.raises(NonIntegrableError):
        first_moment(heavy, Region.ball(1.0))


def test_shell_decomposition(power_measure: LevyMeasureSpec) -> None:
    """Test shell moments and the residual sum to the small-ball moment."""
    decomposition = shell_decomposition(power_measure, 0.0, 2)
    assert decomposition.shells[0].second_moment == pytest.approx(
        (2.0 / 3.0) * (1.0 - 0.5**1.5), rel=1e-8
    )
    assert decomposition.residual == pytest.approx((2.0 / 3.0) * 0.25**1.5, rel=1e-8)
    total = sum(shell.second_moment for shell in decomposition.shells) + decomposition.residual
    assert total == pytest.approx(2.0 / 3.0, rel=1e-8)
    assert decomposition.compensators.shape == (2, 2)


def test_shell_masses_add_up(
    power_measure: LevyMeasureSpec, atomic_measure: LevyMeasureSpec
) -> None:
    """Test shell masses sum to the mass of the band they cover."""
    shells = 5
    covered = Region.shell(2.0**-shells, 1.0)
    for nu in (power_measure, atomic_measure):
        decomposition = shell_decomposition(nu, 0.0, shells)
        total = float(np.sum(decomposition.masses))
        assert total == pytest.approx(region_mass(nu, covered), rel=1e-10)
    assert region_mass(atomic_measure, covered) == pytest.approx(5.0)


def test_shell_of_atom() -> None:
    """Test an atom with dual norm 0.6 lands in shell 0 only."""
    nu = LevyMeasureSpec(dim=2, atoms=(Atom(DualPoint([0.6, 0.0]), 1.0),))
    decomposition = shell_decomposition(nu, 0.0, 3)
    assert list(decomposition.masses) == [1.0, 0.0, 0.0]
    assert decomposition.shells[0].compensator == DualPoint([0.6, 0.0])
    assert decomposition.residual == 0.0


def test_residual_rate(power_axis: PowerLawAxis) -> None:
    """Test the residual shrinks by 2^-(2-alpha) per shell."""
    nu = LevyMeasureSpec(dim=1, axes=(power_axis,))
    residuals = [shell_decomposition(nu, 0.0, k).residual for k in range(1, 6)]
    rate = 2.0 ** -(2.0 - power_axis.alpha)
    for before, after in zip(residuals[:-1], residuals[1:], strict=True):
        assert after / before <= rate + 1e-8


def test_scaled_measure(atomic_measure: LevyMeasureSpec) -> None:
    """Test scaling multiplies every mass."""
    assert atomic_measure.scaled(0.5).total_mass == pytest.approx(
        0.5 * atomic_measure.total_mass
    )
    with pytest.raises(InvalidParameterError):
        atomic_measure.scaled(0.0)


def test_region_validation() -> None:
    """Test malformed regions are rejected."""
    with pytest.raises(InvalidParameterError):
        Region.shell(1.0, 0.5)
    with pytest.raises(InvalidParameterError):
        Region('disk')
    assert Region.complement(0.5).bounded_below is True
    assert Region.ball(1.0).bounded_below is False


def test_sample_atom_frequencies() -> None:
    """Test sampling frequencies follow the atom masses."""
    nu = LevyMeasureSpec(
        dim=2,
        atoms=(Atom(DualPoint([2.0, 0.0]), 1.0), Atom(DualPoint([0.0, 2.0]), 3.0)),
    )
    rng = np.random.default_rng(42)
    draws = sample_jumps(nu, Region.whole(), 100_000, rng)
    frequency = float(np.mean(draws[:, 1] == 2.0))
    assert frequency == pytest.approx(0.75, abs=0.01)


def test_sample_power_law_band(power_measure: LevyMeasureSpec) -> None:
    """Test power-law draws stay in the band with the right mean."""
    rng = np.random.default_rng(7)
    draws = sample_jumps(power_measure, Region.shell(0.25, 1.0), 10_000, rng)
    assert np.all(draws[:, 1] == 0.0)
    assert np.all((draws[:, 0] > 0.25) & (draws[:, 0] <= 1.0))
    # normalized density x^-1.5 / 2 on (0.25, 1] has mean 0.5 and sd about 0.204
    assert float(np.mean(draws[:, 0])) == pytest.approx(0.5, abs=0.01)


def test_sample_power_law_distribution(power_measure: LevyMeasureSpec) -> None:
    """Test power-law draws follow the analytic band CDF 2 - x^-0.5 on (0.25, 1]."""

    def cdf(x: np.ndarray) -> np.ndarray:
        return np.clip(2.0 - 1.0 / np.sqrt(x), 0.0, 1.0)

    draws = sample_jumps(power_measure, Region.shell(0.25, 1.0), 100_000, np.random.default_rng(3))
    assert stats.kstest(draws[:, 0], cdf).statistic < 0.01

    rng = np.random.default_rng(4)
    single = np.array(
        [sample_jump(power_measure, Region.shell(0.25, 1.0), rng).coords[0] for _ in range(5_000)]
    )
    assert stats.kstest(single, cdf).pvalue > 1e-3


def test_sample_errors(atomic_measure: LevyMeasureSpec, power_measure: LevyMeasureSpec) -> None:
    """Test sampling from empty or infinite regions raises."""
    rng = np.random.default_rng(0)
    with pytest.raises(EmptyRegionError):
        sample_jump(atomic_measure, Region.complement(5.0), rng)
    with pytest.raises(InfiniteMassError):
        sample_jump(power_measure, Region.ball(1.0), rng)
    point = sample_jump(atomic_measure, Region.complement(1.0), rng)
    assert point == DualPoint([0.0, 0.0, 3.0])


def test_second_moment_with_other_index(atomic_measure: LevyMeasureSpec) -> None:
    """Test second moments under a different seminorm index."""
    ball = Region.ball(1.0, 0.0)
    # axis 1 atoms are weighted by 2^-2 under q=1
    expected = 2.0 * 0.36 + (1.0 * 0.09 + 2.0 * 0.04) / 4.0
    assert float(second_moment(atomic_measure, ball, 1.0)) == pytest.approx(expected)
