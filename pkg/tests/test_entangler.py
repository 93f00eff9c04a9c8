"""Tests for iterative encoding, projection and trajectories."""

import logging
import math

import numpy as np
import pytest

from entlab.core.entangler import (
    EntanglementKey,
    encode,
    encode_step,
    entangle_pair,
    measure_trajectory,
    project,
    top_k_selection,
)
from entlab.core.errors import DimensionError, InputValidationError, ZeroVectorError
from entlab.core.rngcore import gaussian_matrix, gaussian_matvec


class TestEncodeStep:
    """Test cases for one encoding iteration."""

    def test_selection_is_top_k(self, feature_vector):
        """Test that kept rows dominate dropped rows in magnitude."""
        c = gaussian_matvec(3, 0, 80, feature_vector)
        _, selection = encode_step(feature_vector, 3, 0, 80, 20)
        kept = np.abs(c[list(selection)])
        dropped = np.abs(np.delete(c, list(selection)))
        assert kept.min() >= dropped.max()
        assert list(selection) == sorted(selection)

    def test_full_selection_when_k_equals_n(self):
        """Test that k = n keeps every row and normalizes G w."""
        w = np.array([0.72, -0.06])
        codeword, selection = encode_step(w, 1, 0, 4, 4)
        assert selection == (0, 1, 2, 3)
        c = gaussian_matrix(1, 0, 4, 2) @ w
        np.testing.assert_allclose(codeword.values, c / np.linalg.norm(c), atol=1e-15)

    def test_small_oracle(self):
        """Test a 4x2 example against an explicit sort and normalize."""
        w = np.array([0.72, -0.06])
        G = gaussian_matrix(1, 0, 4, 2)
        c = G @ w
        expected_rows = sorted(np.argsort(-np.abs(c), kind="stable")[:2])
        codeword, selection = encode_step(w, 1, 0, 4, 2)
        assert list(selection) == [int(i) for i in expected_rows]
        reduced = c[expected_rows]
        np.testing.assert_allclose(
            codeword.values, reduced / np.linalg.norm(reduced), atol=1e-12
        )
        assert codeword.step == 1

    def test_negated_input(self, feature_vector):
        """Test that -w keeps the selection and negates the codeword."""
        plus, sel_plus = encode_step(feature_vector, 4, 0, 60, 15)
        minus, sel_minus = encode_step(-feature_vector, 4, 0, 60, 15)
        assert sel_plus == sel_minus
        np.testing.assert_array_equal(minus.values, -plus.values)

    def test_ties_prefer_lower_index(self):
        """Test the tie-breaking rule on equal magnitudes."""
        assert top_k_selection(np.array([1.0, -2.0, 2.0, 2.0]), 2) == (1, 2)

    def test_k_greater_than_n(self, feature_vector):
        """Test that k > n is rejected."""
        with pytest.raises(InputValidationError, match="k must not exceed n"):
            encode_step(feature_vector, 0, 0, 10, 11)


class TestEncodeProject:
    """Test cases for full encoding and projection."""

    def test_codewords_are_unit_norm(self, feature_vector, small_dims):
        """Test unit norm and dimension of every reduced codeword."""
        codewords, key = encode(
            feature_vector, small_dims["n"], small_dims["k"], small_dims["t"], 7
        )
        assert len(codewords) == key.t == small_dims["t"]
        for step, c in enumerate(codewords, start=1):
            assert c.step == step
            assert c.values.shape == (small_dims["k"],)
            assert np.linalg.norm(c.values) == pytest.approx(1.0, abs=1e-12)

    def test_key_fields(self, small_key, small_dims):
        """Test the metadata recorded in the key."""
        assert small_key.master_seed == 7
        assert small_key.ell == small_dims["ell"]
        assert (small_key.n, small_key.k) == (small_dims["n"], small_dims["k"])

    def test_single_step_matches_encode_step(self, feature_vector):
        """Test that t = 1 is one encode_step."""
        codewords, key = encode(feature_vector, 50, 10, 1, 2)
        codeword, selection = encode_step(feature_vector, 2, 0, 50, 10)
        np.testing.assert_array_equal(codewords[0].values, codeword.values)
        assert key.selections == (selection,)

    def test_reconstruction_identity(self, feature_vector, small_key, small_dims):
        """Test that projecting the encoded vector replays the encoding."""
        codewords, _ = encode(
            feature_vector, small_dims["n"], small_dims["k"], small_dims["t"], 7
        )
        projected = project(small_key, feature_vector)
        for c, cp in zip(codewords, projected):
            np.testing.assert_array_equal(c.values, cp.values)

    def test_antisymmetry(self, small_key, partner_vector):
        """Test project(key, -w) = -project(key, w) exactly."""
        plus = project(small_key, partner_vector)
        minus = project(small_key, -partner_vector)
        for a, b in zip(plus, minus):
            np.testing.assert_array_equal(b.values, -a.values)

    def test_scale_invariance(self, feature_vector):
        """Test that encode(2 w) equals encode(w)."""
        first, key_a = encode(feature_vector, 100, 25, 4, 3)
        second, key_b = encode(2.0 * feature_vector, 100, 25, 4, 3)
        assert key_a == key_b
        for a, b in zip(first, second):
            np.testing.assert_allclose(a.values, b.values, atol=1e-12)

    def test_project_dimension_mismatch(self, small_key):
        """Test that a wrong-dimension input is rejected."""
        with pytest.raises(DimensionError):
            project(small_key, np.ones(small_key.ell + 1))

    def test_zero_input(self, small_dims):
        """Test that a zero input is rejected."""
        with pytest.raises(ZeroVectorError):
            encode(np.zeros(small_dims["ell"]), 20, 5, 2, 0)

    def test_causality_warning(self, feature_vector, caplog):
        """Test that k/n above 1/4 logs a warning but still encodes."""
        with caplog.at_level(logging.WARNING, logger="entlab.entangler"):
            codewords, _ = encode(feature_vector, 10, 5, 2, 0)
        assert len(codewords) == 2
        assert any("causality bound" in r.getMessage() for r in caplog.records)

    def test_no_warning_within_bound(self, feature_vector, caplog):
        """Test that k/n = 1/4 stays quiet."""
        with caplog.at_level(logging.WARNING, logger="entlab.entangler"):
            encode(feature_vector, 20, 5, 2, 0)
        assert not caplog.records


class TestEntanglementKey:
    """Test cases for key validation and helpers."""

    def test_truncate(self, small_key):
        """Test that truncation keeps the leading selections."""
        short = small_key.truncate(2)
        assert short.t == 2
        assert short.selections == small_key.selections[:2]
        with pytest.raises(InputValidationError):
            small_key.truncate(small_key.t + 1)

    def test_reduced_matrix_shape(self, small_key):
        """Test reduced matrix dimensions per step."""
        assert small_key.reduced_matrix(0).shape == (small_key.k, small_key.ell)
        assert small_key.reduced_matrix(1).shape == (small_key.k, small_key.k)

    @pytest.mark.parametrize(
        "selections",
        [
            ((0, 1),),  # wrong length
            ((2, 1, 0),),  # not ascending
            ((0, 1, 10),),  # out of range
            (),  # no steps
        ],
    )
    def test_invalid_selections(self, selections):
        """Test that malformed selections are rejected."""
        with pytest.raises(InputValidationError):
            EntanglementKey(master_seed=0, ell=4, n=10, k=3, selections=selections)


class TestEntanglePair:
    """Test cases for the synchronized pair iterator."""

    def test_matches_encode_and_project(self, feature_vector, partner_vector):
        """Test that the iterator agrees with encode and project."""
        steps = list(entangle_pair(feature_vector, partner_vector, 120, 30, 5, 9))
        codewords, key = encode(feature_vector, 120, 30, 5, 9)
        partners = project(key, partner_vector)
        assert [s.selection for s in steps] == list(key.selections)
        for s, c, cp in zip(steps, codewords, partners):
            np.testing.assert_array_equal(s.codeword.values, c.values)
            np.testing.assert_array_equal(s.partner.values, cp.values)

    def test_stop_predicate(self, feature_vector, partner_vector):
        """Test that iteration ends at the first accepted step."""
        steps = list(
            entangle_pair(
                feature_vector, partner_vector, 120, 30, 10, 9, stop=lambda s: s.step == 3
            )
        )
        assert [s.step for s in steps] == [1, 2, 3]

    def test_dimension_mismatch(self, feature_vector):
        """Test that unequal input dimensions are rejected."""
        with pytest.raises(DimensionError):
            next(entangle_pair(feature_vector, np.ones(3), 50, 10, 2, 0))


class TestTrajectory:
    """Test cases for trajectory measurements."""

    def test_identity_pair(self, feature_vector, small_key):
        """Test that w' = w gives zero distance at every step."""
        codewords = project(small_key, feature_vector)
        tr = measure_trajectory(codewords, codewords, small_key.n)
        assert np.all(tr.angle_theta == 0.0)
        assert np.all(tr.euclid_sq == 0.0)
        assert np.all(tr.hamming_k == 0.0)

    def test_anti_identity_pair(self, feature_vector, small_key):
        """Test that w' = -w gives angle 1 and distance 4 at every step."""
        codewords = project(small_key, feature_vector)
        partners = project(small_key, -feature_vector)
        tr = measure_trajectory(codewords, partners, small_key.n)
        np.testing.assert_allclose(tr.angle_theta, 1.0, atol=1e-15)
        np.testing.assert_allclose(tr.euclid_sq, 4.0, atol=1e-12)
        np.testing.assert_allclose(tr.hamming_k, 1.0)

    def test_trajectory_algebra(self, feature_vector, partner_vector, small_key):
        """Test the parallelogram law and the angle/distance identity."""
        codewords = project(small_key, feature_vector)
        partners = project(small_key, partner_vector)
        tr = measure_trajectory(codewords, partners, small_key.n)
        np.testing.assert_allclose(tr.euclid_sq + tr.euclid_sq_flipped, 4.0, atol=1e-9)
        np.testing.assert_allclose(
            tr.euclid_sq, 2 - 2 * np.cos(math.pi * tr.angle_theta), atol=1e-9
        )
        np.testing.assert_allclose(
            tr.hamming_n, tr.hamming_k * small_key.k / small_key.n, atol=1e-15
        )

    def test_length_mismatch(self, small_key, feature_vector):
        """Test that unequal sequences are rejected."""
        codewords = project(small_key, feature_vector)
        with pytest.raises(DimensionError):
            measure_trajectory(codewords, codewords[:-1], small_key.n)
