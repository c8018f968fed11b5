import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_pure_density
from oracles import fidelity_sqrtm, helstrom_brute
from spinframe.errors import (
    InvalidInputError,
    UndefinedAngleError,
    UnsupportedDimensionError,
)
from spinframe.fidelity import (
    bloch_vector,
    fidelity,
    fidelity_in,
    fidelity_povm_oracle,
    fidelity_squared,
    helstrom,
    helstrom_error,
    relative_angle,
    sphere_grid,
    trace_distance,
)
from spinframe.symmetry import haar_random_unitary

ZERO = np.diag([1.0, 0.0])
ONE = np.diag([0.0, 1.0])
PLUS = np.full((2, 2), 0.5)
MIXED = np.eye(2) / 2
seeds = st.integers(0, 2**32 - 1)


class TestExamples:
    def test_identical(self):
        assert fidelity(ZERO, ZERO) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal(self):
        assert fidelity(ZERO, ONE) == 0.0

    def test_zero_plus(self):
        assert fidelity(ZERO, PLUS) == pytest.approx(2**-0.5, abs=1e-15)
        assert fidelity_squared(ZERO, PLUS) == pytest.approx(0.5, abs=1e-15)

    def test_pure_vs_mixed(self):
        assert fidelity(ZERO, MIXED) == pytest.approx(2**-0.5, abs=1e-15)

    def test_convention_switch(self):
        assert fidelity_in("sqrt", ZERO, PLUS) == fidelity(ZERO, PLUS)
        assert fidelity_in("squared", ZERO, PLUS) == fidelity_squared(ZERO, PLUS)
        with pytest.raises(InvalidInputError):
            fidelity_in("root", ZERO, PLUS)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            fidelity(ZERO, np.eye(4) / 4)

    def test_not_psd(self):
        with pytest.raises(InvalidInputError):
            fidelity(np.diag([1.1, -0.1]), ZERO)

    def test_matches_sqrtm_oracle(self, rng):
        for dim in (2, 4, 8):
            for _ in range(10):
                r, s = random_density(dim, rng), random_density(dim, rng)
                assert fidelity(r, s) == pytest.approx(fidelity_sqrtm(r, s), abs=1e-9)


class TestHelstrom:
    def test_identical_states(self):
        assert helstrom_error(PLUS, PLUS) == pytest.approx(0.5, abs=1e-15)

    def test_orthogonal_states(self):
        assert helstrom_error(ZERO, ONE) == pytest.approx(0.0, abs=1e-15)

    def test_zero_vs_plus(self):
        assert helstrom_error(ZERO, PLUS) == pytest.approx((1 - math.sqrt(2) / 2) / 2, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5])
    def test_prior_out_of_range(self, p):
        with pytest.raises(InvalidInputError):
            helstrom(ZERO, ONE, p)

    def test_projectors_resolve_identity(self, rng):
        r, s = random_density(4, rng), random_density(4, rng)
        res = helstrom(r, s, 0.3)
        np.testing.assert_allclose(res.projector_a + res.projector_b, np.eye(4), atol=1e-12)
        err = 0.3 * np.trace(r @ res.projector_b).real + 0.7 * np.trace(s @ res.projector_a).real
        assert err == pytest.approx(res.error, abs=1e-12)

    def test_matches_subset_scan(self, rng):
        for p in (0.2, 0.5, 0.8):
            r, s = random_density(4, rng, rank=2), random_density(4, rng)
            assert helstrom_error(r, s, p) == pytest.approx(helstrom_brute(r, s, p), abs=1e-12)


class TestBloch:
    @pytest.mark.parametrize("rho, vec", [(ZERO, (0, 0, 1)), (MIXED, (0, 0, 0)), (PLUS, (1, 0, 0))])
    def test_examples(self, rho, vec):
        np.testing.assert_allclose(bloch_vector(rho), vec, atol=1e-15)

    def test_wrong_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            bloch_vector(np.eye(4) / 4)

    def test_angles(self):
        assert relative_angle((0, 0, 1), (0, 0, 1)) == 0.0
        assert relative_angle((0, 0, 1), (0, 0, -1)) == pytest.approx(math.pi)
        assert relative_angle((0, 0, 1), (1, 0, 0)) == pytest.approx(math.pi / 2)
        assert fidelity_squared(ZERO, PLUS) == pytest.approx((1 + math.cos(math.pi / 2)) / 2, abs=1e-12)

    def test_zero_vector_angle(self):
        with pytest.raises(UndefinedAngleError):
            relative_angle((0, 0, 0), (0, 0, 1))


class TestPovmOracle:
    def test_grid_contains_poles(self):
        g = sphere_grid(10)
        np.testing.assert_allclose(np.linalg.norm(g, axis=1), 1.0, atol=1e-12)
        assert g[0].tolist() == [0.0, 0.0, 1.0]
        assert g[-1][2] == -1.0

    def test_qubits_only(self):
        with pytest.raises(UnsupportedDimensionError):
            fidelity_povm_oracle(np.eye(4) / 4, np.eye(4) / 4)

    @pytest.mark.parametrize("resolution", [1, 5, 20, 60])
    def test_never_below_closed_form(self, rng, resolution):
        for rank in (1, 2):
            for _ in range(20):
                r, s = random_density(2, rng, rank), random_density(2, rng)
                assert fidelity_povm_oracle(r, s, resolution) >= fidelity(r, s) - 1e-12


# --- properties ------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4, 8]))
def test_symmetric(seed, dim):
    rng = np.random.default_rng(seed)
    r, s = random_density(dim, rng), random_density(dim, rng)
    assert abs(fidelity(r, s) - fidelity(s, r)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4]), rank=st.integers(1, 2))
def test_range(seed, dim, rank):
    rng = np.random.default_rng(seed)
    f = fidelity(random_density(dim, rng, rank), random_density(dim, rng))
    assert 0.0 <= f <= 1 + 1e-12


def test_fidelity_one_iff_equal(rng):
    for dim in (2, 4):
        for rank in (1, dim):
            r = random_density(dim, rng, rank)
            assert abs(fidelity(r, r) - 1) <= 1e-10
            s = random_density(dim, rng)
            assert np.abs(np.linalg.eigvalsh(r - s)).sum() > 1e-8
            assert abs(fidelity(r, s) - 1) > 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4, 8]))
def test_unitary_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    r, s = random_density(dim, rng), random_density(dim, rng, rank=1)
    u = haar_random_unitary(dim, rng)
    rotated = fidelity(u @ r @ u.conj().T, u @ s @ u.conj().T)
    assert abs(rotated - fidelity(r, s)) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4, 8, 16]))
def test_pure_state_overlap(seed, dim):
    rng = np.random.default_rng(seed)
    ra, a = random_pure_density(dim, rng)
    rb, b = random_pure_density(dim, rng)
    assert abs(fidelity(ra, rb) - abs(np.vdot(a, b))) <= 1e-12


def test_oracle_gap_pure_input_shrinks_with_resolution(rng):
    # a pure argument puts the optimum on the sqrt cusp, so the grid error is first order
    r, _ = random_pure_density(2, rng)
    s = random_density(2, rng)
    coarse = fidelity_povm_oracle(r, s, 20) - fidelity(r, s)
    fine = fidelity_povm_oracle(r, s, 400) - fidelity(r, s)
    assert 0 <= fine < coarse


def test_oracle_gap_at_default_resolution(rng):
    for _ in range(20):
        r, s = random_density(2, rng), random_density(2, rng)
        gap = fidelity_povm_oracle(r, s) - fidelity(r, s)
        assert -1e-12 <= gap <= 1e-3


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=st.sampled_from([2, 4]))
def test_fuchs_van_de_graaf(seed, dim):
    rng = np.random.default_rng(seed)
    r, s = random_density(dim, rng), random_density(dim, rng, rank=1)
    f, t = fidelity(r, s), trace_distance(r, s)
    assert 1 - f <= t + 1e-10
    assert t <= math.sqrt(max(0.0, 1 - f * f)) + 1e-10


@settings(max_examples=60, deadline=None)
@given(seed=seeds)
def test_overlap_angle_identity(seed):
    rng = np.random.default_rng(seed)
    ra, _ = random_pure_density(2, rng)
    rb, _ = random_pure_density(2, rng)
    theta = relative_angle(bloch_vector(ra), bloch_vector(rb))
    assert abs(fidelity_squared(ra, rb) - (1 + math.cos(theta)) / 2) <= 1e-10
