"""Norm engine: frozen reference values, invariants, and the oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgl import (
    ConditioningError,
    DimensionMismatchError,
    Exponent,
    GeneratedSpace,
    HaydonFamily,
    SizeCapError,
    SpanError,
    eval_norm,
    haydon_norm_power,
    haydon_separation_check,
    haydon_separation_threshold,
    norm_oracle,
)

from conftest import generated_spaces, spaces_with_vectors


# ---------------------------------------------------------------------------
# exponent
# ---------------------------------------------------------------------------

class TestExponent:
    def test_normalization(self):
        assert Exponent(2, 4) == Exponent(1, 2)
        assert Exponent(3, 3) == Exponent(1, 1)
        assert Exponent.of(0.5) == Exponent(1, 2)
        assert Exponent.of((2, 3)).value == pytest.approx(2 / 3)

    def test_range_enforced(self):
        with pytest.raises(ValueError):
            Exponent(0, 1)
        with pytest.raises(ValueError):
            Exponent(3, 2)
        with pytest.raises(ValueError):
            Exponent(-1, 2)
        with pytest.raises(ValueError):
            Exponent(1, 0)

    def test_inverse(self):
        assert Exponent(1, 2).inverse == 2.0
        assert Exponent(1, 1).inverse == 1.0


# ---------------------------------------------------------------------------
# space validation
# ---------------------------------------------------------------------------

class TestSpaceValidation:
    def test_zero_generator_rejected(self):
        with pytest.raises(SpanError):
            GeneratedSpace((1, 2), 2, [[1, 0], [0, 0], [0, 1]])

    def test_non_spanning_rejected(self):
        with pytest.raises(SpanError):
            GeneratedSpace((1, 2), 2, [[1, 0], [2, 0]])

    def test_exact_duplicates_dropped(self):
        s = GeneratedSpace(1, 2, [[1, 0], [0, 1], [1, 0]])
        assert s.gen_count == 2

    def test_zero_dimensional_space(self):
        s = GeneratedSpace((1, 2), 0, [])
        nv = eval_norm(s, [])
        assert nv.value == 0.0 and nv.support == ()
        assert norm_oracle(s, []) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            GeneratedSpace(1, 2, [[1, 0, 0]])
        s = GeneratedSpace.lp(1, 2)
        with pytest.raises(DimensionMismatchError):
            eval_norm(s, [1, 2, 3])

    def test_size_caps(self):
        gens = np.vstack([np.eye(2)] + [[[1, m]] for m in range(1, 16)])
        s = GeneratedSpace(1, 2, gens)  # 17 generators
        with pytest.raises(SizeCapError):
            eval_norm(s, [1, 1])

    def test_all_subsets_ill_conditioned(self):
        s = GeneratedSpace(1, 2, [[1.0, 0.0], [1.0, 1e-8]])
        with pytest.raises(ConditioningError):
            eval_norm(s, [1.0, 1.0])


# ---------------------------------------------------------------------------
# frozen norm values
# ---------------------------------------------------------------------------

class TestFrozenValues:
    """Reference values computed by hand from the defining infimum."""

    @pytest.fixture()
    def half_space(self):
        # p = 1/2, generators e1, e2, (1, 1)
        return GeneratedSpace((1, 2), 2, [[1, 0], [0, 1], [1, 1]])

    def test_diagonal_generator_attains(self, half_space):
        nv = eval_norm(half_space, [1, 1])
        assert nv.value == pytest.approx(1.0, abs=1e-12)
        assert nv.support == (2,)

    def test_mixed_representation(self, half_space):
        # best split: (2,1) = e1 + (1,1), cost (1 + 1)^2 = 4
        nv = eval_norm(half_space, [2, 1])
        assert nv.value == pytest.approx(4.0, abs=1e-11)
        assert set(nv.support) == {0, 2}

    def test_lp_half_norm(self):
        s = GeneratedSpace.lp((1, 2), 2)
        assert eval_norm(s, [1, 1]).value == pytest.approx(4.0, abs=1e-12)

    def test_l1_is_manhattan(self):
        s = GeneratedSpace.lp(1, 3)
        assert eval_norm(s, [1, -2, 3]).value == pytest.approx(6.0, abs=1e-12)

    def test_homogeneity_frozen(self, half_space):
        assert eval_norm(half_space, [3, 3]).value == pytest.approx(3.0, abs=1e-11)

    def test_tie_breaks_to_smallest_support(self):
        s = GeneratedSpace(1, 2, [[1, 0], [0, 1], [-1, 0]])
        nv = eval_norm(s, [1, 0])
        assert nv.support == (0,)
        assert nv.value == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# norm invariants
# ---------------------------------------------------------------------------

class TestNormInvariants:
    @settings(deadline=None, max_examples=60)
    @given(spaces_with_vectors(n_vectors=1))
    def test_witness_reproduces_vector(self, data):
        space, x = data
        nv = eval_norm(space, x)
        recon = space.generators.T @ nv.coefficients
        assert np.linalg.norm(recon - x) <= 1e-9 * max(1.0, np.linalg.norm(x))

    @settings(deadline=None, max_examples=60)
    @given(spaces_with_vectors(n_vectors=1))
    def test_witness_cost_matches_power(self, data):
        space, x = data
        nv = eval_norm(space, x)
        p = space.p.value
        cost = float(np.sum(np.abs(nv.coefficients) ** p))
        assert cost == pytest.approx(nv.power, rel=1e-12, abs=1e-12)
        assert nv.value == pytest.approx(
            nv.power ** (1 / p) if nv.power else 0.0, rel=1e-12, abs=1e-12
        )

    @settings(deadline=None, max_examples=60)
    @given(spaces_with_vectors(n_vectors=1), st.sampled_from([-3, -1, 2, 5]))
    def test_homogeneity(self, data, t):
        space, x = data
        a = eval_norm(space, x).value
        b = eval_norm(space, t * x).value
        assert b == pytest.approx(abs(t) * a, rel=1e-9, abs=1e-9)

    @settings(deadline=None, max_examples=60)
    @given(spaces_with_vectors(n_vectors=2))
    def test_power_triangle_inequality(self, data):
        space, x, y = data
        nx = eval_norm(space, x).power
        ny = eval_norm(space, y).power
        nxy = eval_norm(space, x + y).power
        assert nxy <= nx + ny + 1e-9 * max(1.0, nx + ny)

    @settings(deadline=None, max_examples=40)
    @given(spaces_with_vectors(n_vectors=1))
    def test_extra_generator_never_increases_norm(self, data):
        space, x = data
        if space.gen_count >= 16:
            return
        extra = np.vstack([space.generators, 2.0 * x + 1.0])
        bigger = GeneratedSpace(space.p, space.dim, extra)
        assert eval_norm(bigger, x).value <= eval_norm(space, x).value + 1e-9

    @settings(deadline=None, max_examples=40)
    @given(spaces_with_vectors(n_vectors=1))
    def test_generators_have_norm_at_most_one(self, data):
        space, _ = data
        for g in space.generators:
            assert eval_norm(space, g).value <= 1.0 + 1e-12

    def test_positive_definite(self):
        s = GeneratedSpace((2, 3), 2, [[1, 0], [0, 1], [1, -1]])
        assert eval_norm(s, [0, 0]).value == 0.0
        assert eval_norm(s, [1e-9, 0]).value > 0.0


# ---------------------------------------------------------------------------
# oracle agreement
# ---------------------------------------------------------------------------

class TestOracle:
    def test_frozen_l1(self):
        s = GeneratedSpace.lp(1, 2)
        assert norm_oracle(s, [1, 1], resolution=1e-3) == pytest.approx(
            2.0, abs=1e-3
        )

    def test_frozen_half(self):
        s = GeneratedSpace((1, 2), 2, [[1, 0], [0, 1], [1, 1]])
        assert norm_oracle(s, [2, 1], resolution=1e-3) == pytest.approx(
            4.0, abs=5e-3
        )

    @settings(deadline=None, max_examples=30)
    @given(spaces_with_vectors(n_vectors=1))
    def test_oracle_upper_bounds_engine(self, data):
        space, x = data
        value = eval_norm(space, x).value
        estimate = norm_oracle(space, x, resolution=1e-3)
        assert estimate >= value - 1e-9 * max(1.0, value)

    @settings(deadline=None, max_examples=30)
    @given(spaces_with_vectors(max_dim=2, n_vectors=1))
    def test_oracle_close_to_engine(self, data):
        space, x = data
        value = eval_norm(space, x).value
        estimate = norm_oracle(space, x, resolution=1e-3)
        assert abs(estimate - value) <= 5e-3 * max(1.0, value)


# ---------------------------------------------------------------------------
# two-functional family
# ---------------------------------------------------------------------------

class TestHaydonFamily:
    def test_frozen_euclidean_branch(self):
        fam = HaydonFamily((1, 2), np.array([1.0, 0.0]))
        assert haydon_norm_power(fam, [0.0, 3.0], 0.0) == pytest.approx(
            math.sqrt(3.0)
        )

    def test_frozen_pairing_branch(self):
        fam = HaydonFamily((1, 2), np.array([1.0, 0.0]))
        # |(mu*phi, 1)|^p = 1 + mu^p beyond the euclidean branch
        assert haydon_norm_power(fam, [4.0, 0.0], 1.0) == pytest.approx(3.0)

    def test_unit_vector_required(self):
        with pytest.raises(ValueError):
            HaydonFamily((1, 2), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            HaydonFamily((1, 2), np.array([-1.0, 0.0]))

    def test_separation_orthogonal_pair(self):
        fam = HaydonFamily((1, 2), np.array([1.0, 0.0]))
        cert = haydon_separation_check(fam, np.array([0.0, 1.0]), 2.0)
        assert cert.verdict == "pass"
        assert cert.evidence["gap"] == pytest.approx(1.0, abs=1e-12)
        assert cert.replay() == "pass"

    def test_separation_below_threshold_is_inconclusive(self):
        fam = HaydonFamily((1, 2), np.array([1.0, 0.0]))
        cert = haydon_separation_check(fam, np.array([0.0, 1.0]), 0.5)
        assert cert.verdict == "inconclusive"
        assert cert.replay() == "inconclusive"

    def test_identical_functionals_rejected(self):
        fam = HaydonFamily((1, 2), np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            haydon_separation_check(fam, np.array([1.0, 0.0]), 2.0)

    def test_threshold_formula(self):
        fam = HaydonFamily((1, 2), np.array([1.0, 0.0]))
        assert haydon_separation_threshold(fam, [0.0, 1.0]) == pytest.approx(1.0)
        psi = np.array([1.0, 1.0]) / math.sqrt(2.0)
        mu = haydon_separation_threshold(fam, psi)
        at = haydon_separation_check(fam, psi, mu * (1 + 1e-9))
        assert at.verdict == "pass"
        below = haydon_separation_check(fam, psi, mu * 0.9)
        assert below.verdict == "inconclusive"

    @settings(deadline=None, max_examples=40)
    @given(st.floats(0.05, 1.5), st.floats(0.1, 10.0),
           st.sampled_from([(1, 2), (2, 3), (1, 1)]))
    def test_norm_power_scales(self, angle, t, p):
        phi = np.array([math.cos(angle), math.sin(angle)])
        phi /= np.linalg.norm(phi)
        fam = HaydonFamily(p, phi)
        x = np.array([0.7, -0.2])
        base = haydon_norm_power(fam, x, 0.3)
        scaled = haydon_norm_power(fam, t * x, t * 0.3)
        assert scaled == pytest.approx((t ** fam.p.value) * base, rel=1e-9)
