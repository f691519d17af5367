"""Embedded reference tables: shape, sandwich property, comparison helper."""

import math

import pytest

from spherelp.reference import (LP_BOUND, RECORD_DENSITY,
                                compare_to_reference, lp_bound_reference,
                                record_density, reference_checksum)


class TestTables:
    def test_coverage(self):
        assert sorted(RECORD_DENSITY) == list(range(1, 37))
        assert sorted(LP_BOUND) == list(range(1, 37))

    def test_record_never_exceeds_bound(self):
        # the table is only consistent if every record sits under the bound
        for n in RECORD_DENSITY:
            assert RECORD_DENSITY[n] <= LP_BOUND[n] * (1 + 1e-9), n

    def test_sharp_dimensions(self):
        for n in (1, 8, 24):
            assert math.isclose(RECORD_DENSITY[n], LP_BOUND[n],
                                rel_tol=1e-7), n

    def test_known_values(self):
        assert record_density(8) == 0.253669507
        assert lp_bound_reference(16) == 0.0251941308

    def test_missing_dimension(self):
        with pytest.raises(KeyError):
            record_density(0)
        with pytest.raises(KeyError):
            lp_bound_reference(37)


class TestComparison:
    def test_fields(self):
        out = compare_to_reference(8, 0.2540)
        assert out["n"] == 8
        assert out["sandwiched"]
        assert abs(out["relative_deviation"]
                   - (0.2540 - LP_BOUND[8]) / LP_BOUND[8]) < 1e-15

    def test_below_record_not_sandwiched(self):
        assert not compare_to_reference(8, 0.2)["sandwiched"]

    def test_checksum_is_stable(self):
        a = reference_checksum()
        assert a == reference_checksum()
        assert len(a) == 64 and int(a, 16) >= 0
