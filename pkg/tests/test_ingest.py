import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_record
from metaemu.core import Assumption
from metaemu.ingest import (
    EstimatesLoadError,
    RowErrors,
    coarsen,
    empirical_frequency,
    load_distribution,
    load_estimates,
    snap_to_support,
    summarize,
)

WELL_FORMED = """scc,year,prtp,emuc,impact,growth_impact,impact_kind,weight,paper_id
100,2020,1.5,1.0,-1.3,,level,1,A
250.5,2021,0,1.5,,,unspecified,2,A
-5,1999,3,,-2.0,,level,0.5,B
"""


class TestLoadEstimates:
    def test_three_rows(self, tmp_path):
        path = tmp_path / "est.csv"
        path.write_text(WELL_FORMED)
        records, summary = load_estimates(path)
        assert len(records) == 3
        assert summary.n_records == 3
        assert summary.n_papers == 2

    def test_missing_weight_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("scc,year\n1,2000\n")
        with pytest.raises(EstimatesLoadError, match="missing mandatory column"):
            load_estimates(path)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_estimates(tmp_path / "nope.csv")

    def test_row_errors_carry_row_numbers(self, tmp_path):
        path = tmp_path / "est.csv"
        path.write_text("scc,year,weight\n1,2000,1\nx,1492,1\n2,2001,-3\n")
        with pytest.raises(RowErrors) as exc:
            load_estimates(path)
        assert [n for n, _ in exc.value.rows] == [2, 3]

    def test_zero_weight_rows_retained_but_excluded(self, tmp_path):
        path = tmp_path / "est.csv"
        path.write_text("scc,year,weight,paper_id\n"
                        "10,2000,1,A\n99999,2000,0,B\n")
        records, summary = load_estimates(path)
        assert len(records) == 2
        assert not records[1].usable
        # the zero-weight outlier must not move the weighted quantiles
        assert all(q == 10.0 for _, q in summary.scc_quantiles)

    def test_extra_columns_ignored(self, tmp_path):
        path = tmp_path / "est.csv"
        path.write_text("scc,year,weight,model,notes\n1,2000,1,DICE,hi\n")
        records, _ = load_estimates(path)
        assert records[0].scc == 1.0

    def test_summary_counts(self):
        records = [make_record(paper_id="A", prtp=1.0),
                   make_record(paper_id="A"),
                   make_record(paper_id="B", prtp=0.0, weight=0.0)]
        summary = summarize(records)
        assert summary.n_records == 3
        assert summary.n_papers == 2
        assert summary.n_records >= summary.n_papers >= 1
        # coverage counts usable records with the field present
        assert summary.coverage_for("prtp") == 1


class TestLoadDistribution:
    def test_csv_valid(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("support,probability\n0,0.5\n1,0.3\n3,0.2\n")
        d = load_distribution(path, assumption="prtp")
        assert d.support == (0.0, 1.0, 3.0)
        assert math.isclose(sum(d.probability), 1.0, abs_tol=1e-12)

    def test_sum_below_one_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("support,probability\n0,0.5\n1,0.3\n3,0.1\n")
        with pytest.raises(ValueError, match="sum to 1"):
            load_distribution(path, assumption="prtp")

    def test_negative_probability(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("support,probability\n0,0.5\n1,-0.1\n3,0.6\n")
        with pytest.raises(ValueError, match="negative probability"):
            load_distribution(path, assumption="prtp")

    def test_non_monotone_support(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("support,probability\n1,0.5\n0,0.5\n")
        with pytest.raises(ValueError, match="strictly increasing"):
            load_distribution(path, assumption="prtp")

    def test_rescale_within_1e6(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("support,probability\n0,0.5000001\n1,0.5\n")
        d = load_distribution(path, assumption="prtp")
        assert math.isclose(math.fsum(d.probability), 1.0, abs_tol=1e-9)

    def test_json_object(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text('{"assumption": "emuc", "label": "x", '
                        '"support": [0.5, 1.0], "probability": [0.4, 0.6]}')
        d = load_distribution(path)
        assert d.assumption is Assumption.EMUC
        assert d.label == "x"

    def test_csv_requires_assumption(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("support,probability\n0,1.0\n")
        with pytest.raises(ValueError, match="assumption"):
            load_distribution(path)


class TestCoarsen:
    def test_symmetric_split(self):
        d = coarsen([(0.5, 1.0), (1.5, 1.0)], [0, 1, 2], "prtp")
        assert d.support == (0.5, 1.5)
        assert d.probability == (0.5, 0.5)

    def test_weighted_hand_count(self):
        # weighted bin masses 2 and 2
        d = coarsen([(0.2, 1.0), (0.4, 1.0), (1.7, 2.0)], [0, 1, 2], "prtp")
        assert d.probability == (0.5, 0.5)

    def test_single_sample(self):
        d = coarsen([(1.5, 3.0)], [0, 1, 2, 3], "prtp")
        assert d.probability == (0.0, 1.0, 0.0)

    def test_bin_convention_right_closed_except_first(self):
        # 0 and 1 belong to the first bin [0,1]; 1.0+eps to the second
        d = coarsen([(0.0, 1.0), (1.0, 1.0), (1.0000001, 2.0)],
                    [0, 1, 2], "prtp")
        assert d.probability == (0.5, 0.5)

    def test_out_of_range_rejected_unless_clipped(self):
        with pytest.raises(ValueError, match="outside"):
            coarsen([(2.5, 1.0)], [0, 1, 2], "prtp")
        d = coarsen([(2.5, 1.0)], [0, 1, 2], "prtp", clip=True)
        assert d.probability == (0.0, 1.0)

    def test_empty_and_zero_weight_errors(self):
        with pytest.raises(ValueError, match="empty"):
            coarsen([], [0, 1], "prtp")
        with pytest.raises(ValueError, match="zero"):
            coarsen([(0.5, 0.0)], [0, 1], "prtp")

    def test_bad_edges(self):
        with pytest.raises(ValueError, match="increasing"):
            coarsen([(0.5, 1.0)], [0, 0], "prtp")
        with pytest.raises(ValueError, match="increasing"):
            coarsen([(0.5, 1.0)], [0], "prtp")

    @given(st.lists(st.tuples(st.floats(0.0, 10.0, allow_nan=False),
                              st.floats(0.01, 5.0, allow_nan=False)),
                    min_size=1, max_size=40))
    @settings(max_examples=50, deadline=None)
    def test_probabilities_sum_to_one(self, samples):
        d = coarsen(samples, [0, 2, 4, 6, 8, 10], "impact")
        assert abs(math.fsum(d.probability) - 1.0) <= 1e-12


class TestEmpiricalFrequency:
    def test_direct_counting(self):
        records = [make_record(prtp=0.0), make_record(prtp=0.0),
                   make_record(prtp=3.0)]
        d = empirical_frequency(records, "prtp", [0, 1, 3])
        assert d.probability == pytest.approx((2 / 3, 0.0, 1 / 3), abs=1e-15)

    def test_weighted_counting(self):
        records = [make_record(prtp=0.0, weight=1.0),
                   make_record(prtp=0.0, weight=1.0),
                   make_record(prtp=3.0, weight=2.0)]
        d = empirical_frequency(records, "prtp", [0, 1, 3])
        assert d.probability == (0.5, 0.0, 0.5)

    def test_snap_nearest(self):
        records = [make_record(prtp=0.49)]
        d = empirical_frequency(records, "prtp", [0, 1])
        assert d.probability == (1.0, 0.0)

    def test_tie_goes_lower(self):
        assert snap_to_support(0.5, [0.0, 1.0]) == 0.0

    def test_missing_and_zero_weight_skipped(self):
        records = [make_record(prtp=None), make_record(prtp=1.0, weight=0.0)]
        with pytest.raises(ValueError, match="no usable records"):
            empirical_frequency(records, "prtp", [0, 1])

    def test_weight_rescale_invariance(self):
        rng = np.random.default_rng(3)
        records = [make_record(prtp=float(rng.choice([0, 1, 1.5, 3])),
                               weight=float(rng.uniform(0.1, 4)))
                   for _ in range(50)]
        base = empirical_frequency(records, "prtp", [0, 1, 1.5, 3])
        scaled_records = [make_record(prtp=r.prtp, weight=r.weight * 7.3)
                          for r in records]
        scaled = empirical_frequency(scaled_records, "prtp", [0, 1, 1.5, 3])
        assert np.allclose(base.probability, scaled.probability, rtol=1e-12)

    @given(st.lists(st.integers(-100, 100), unique=True, min_size=1,
                    max_size=9), st.data())
    @settings(max_examples=50, deadline=None)
    def test_snapping_idempotent(self, support_ints, data):
        support = sorted(float(s) for s in support_ints)
        point = data.draw(st.sampled_from(support))
        snapped = snap_to_support(point, support)
        assert snapped == point
        assert snap_to_support(snapped, support) == snapped
