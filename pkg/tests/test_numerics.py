from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqsum.numerics import minmax_normalize, rank_ascending


class TestMinmaxNormalize:
    def test_affine_identity_case(self):
        np.testing.assert_allclose(minmax_normalize([1, 2, 3]), [0, 0.5, 1])

    def test_worked_example_vector_is_fixed_point(self):
        # Already normalized scores pass through unchanged.
        np.testing.assert_allclose(
            minmax_normalize([0, 0.56, 0.47, 1]), [0, 0.56, 0.47, 1], atol=1e-15
        )

    def test_constant_vector_maps_to_half_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING):
            out = minmax_normalize([7, 7, 7])
        np.testing.assert_array_equal(out, [0.5, 0.5, 0.5])
        assert any("constant" in message for message in caplog.messages)

    def test_output_extremes(self):
        out = minmax_normalize([3.2, -1.5, 0.7, 9.9])
        assert out.min() == 0.0
        assert out.max() == 1.0

    def test_rejects_empty_and_non_finite(self):
        with pytest.raises(ValueError):
            minmax_normalize([])
        with pytest.raises(ValueError):
            minmax_normalize([1.0, float("nan")])

    @given(
        values=st.lists(st.floats(min_value=-5, max_value=5), min_size=2, max_size=30),
        scale=st.floats(min_value=0.5, max_value=2.0),
        shift=st.floats(min_value=-5, max_value=5),
    )
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_positive_affine_transform(self, values, scale, shift):
        arr = np.asarray(values)
        if arr.max() - arr.min() < 1.0:
            arr = np.append(arr, arr.min() + 1.0)
        np.testing.assert_allclose(
            minmax_normalize(scale * arr + shift), minmax_normalize(arr), atol=1e-12
        )


class TestRankAscending:
    def test_basic_order(self):
        np.testing.assert_array_equal(rank_ascending([0.3, 0.1, 0.2]), [1, 2, 0])

    def test_stable_tie_break(self):
        np.testing.assert_array_equal(rank_ascending([0.5, 0.5]), [0, 1])

    def test_worked_example_risk_vector(self):
        np.testing.assert_array_equal(rank_ascending([1, 0.44, 0.53, 0]), [3, 1, 2, 0])

    @given(st.lists(st.floats(min_value=-100, max_value=100), min_size=1, max_size=50))
    @settings(max_examples=100, deadline=None)
    def test_applied_order_is_nondecreasing(self, values):
        arr = np.asarray(values)
        ordered = arr[rank_ascending(arr)]
        assert np.all(np.diff(ordered) >= 0)
