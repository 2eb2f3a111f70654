"""
Tests for seeding and allocation helpers.
"""

import json

import numpy as np
import pytest

from structfid.utils import derive_seed, dump_json, largest_remainder, reject_unknown_keys


@pytest.mark.unit
class TestDeriveSeed:
    """Test labelled seed derivation."""

    def test_stable(self):
        assert derive_seed(7, "cls", "smote", 0) == derive_seed(7, "cls", "smote", 0)

    def test_labels_change_the_seed(self):
        seeds = {
            derive_seed(7, "cls", "smote", 0),
            derive_seed(7, "cls", "smote", 1),
            derive_seed(7, "cls", "marginal_independent", 0),
            derive_seed(8, "cls", "smote", 0),
        }

        assert len(seeds) == 4

    def test_fits_in_64_bits(self):
        assert 0 <= derive_seed(0, "x") < 2**64

    def test_negative_part(self):
        with pytest.raises(ValueError):
            derive_seed(-1)


@pytest.mark.unit
class TestLargestRemainder:
    """Test proportional allocation."""

    def test_exact_quotas(self):
        assert largest_remainder([70, 30], 20) == [14, 6]

    def test_remainders_break_ties_low_index_first(self):
        assert largest_remainder([1, 1, 1], 2) == [1, 1, 0]

    def test_sums_to_total(self):
        assert sum(largest_remainder([5, 11, 2, 9], 13)) == 13

    def test_empty_groups(self):
        with pytest.raises(ValueError):
            largest_remainder([0, 0], 3)


@pytest.mark.unit
class TestJson:
    """Test JSON helpers."""

    def test_numpy_and_non_finite_values(self):
        text = dump_json({"a": np.int64(3), "b": np.float32(0.5), "c": float("nan")})

        assert json.loads(text) == {"a": 3, "b": 0.5, "c": None}

    def test_reject_unknown_keys(self):
        with pytest.raises(KeyError):
            reject_unknown_keys({"a": 1, "z": 2}, {"a"}, "thing", KeyError)
