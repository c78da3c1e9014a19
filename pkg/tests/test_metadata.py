import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expdb.formats import MISSING, AttributeSpec, Dataset, UnknownAttribute, parse_arff
from expdb.metadata import (
    EmptyInput,
    class_entropy,
    compute_meta_features,
    dataset_summary,
    default_accuracy,
)

from datagen import random_dataset

BASIC = "@relation t\n@attribute a numeric\n@attribute c {x,y}\n@data\n1.0,x\n2.0,y\n"


def test_basic_example_profile():
    mf = compute_meta_features(parse_arff(BASIC), target="c")
    assert mf.n_instances == 2
    assert mf.n_attributes == 2
    assert mf.n_numeric == 1 and mf.n_nominal == 1 and mf.n_string == 0
    assert mf.n_classes == 2
    assert mf.class_entropy == 1.0
    assert mf.default_accuracy == 0.5
    assert mf.minority_class_fraction == 0.5


def test_single_class_dataset():
    ds = Dataset("t", [AttributeSpec("c", "nominal", ("a",))], [(0,), (0,), (0,)])
    mf = compute_meta_features(ds, target="c")
    assert mf.class_entropy == 0.0
    assert mf.default_accuracy == 1.0


def test_numeric_column_stats():
    ds = Dataset("t", [AttributeSpec("v", "numeric")], [(1.0,), (3.0,)])
    (stats,) = compute_meta_features(ds).numeric_stats
    assert stats.min == 1.0
    assert stats.max == 3.0
    assert stats.mean == 2.0
    assert stats.stdev == 1.0  # population stdev
    assert stats.n_missing == 0


def test_missing_cells_excluded_from_stats():
    ds = Dataset("t", [AttributeSpec("v", "numeric")], [(1.0,), (MISSING,), (3.0,)])
    mf = compute_meta_features(ds)
    (stats,) = mf.numeric_stats
    assert stats.mean == 2.0
    assert stats.n_missing == 1
    assert mf.n_missing_values == 1
    assert mf.pct_missing == pytest.approx(1 / 3)


def test_all_missing_numeric_column():
    ds = Dataset("t", [AttributeSpec("v", "numeric")], [(MISSING,), (MISSING,)])
    (stats,) = compute_meta_features(ds).numeric_stats
    assert stats.mean is None and stats.min is None
    assert stats.n_missing == 2


def test_nominal_stats_and_mode_tiebreak():
    ds = Dataset("t", [AttributeSpec("c", "nominal", ("z", "a"))],
                 [(0,), (1,), (MISSING,)])
    (stats,) = compute_meta_features(ds).nominal_stats
    assert stats.n_distinct_observed == 2
    assert stats.mode_label == "a"  # tie broken lexicographically


def test_numeric_target_has_no_class_fields():
    ds = parse_arff(BASIC)
    mf = compute_meta_features(ds, target="a")
    assert mf.n_classes is None
    assert "n_classes" not in mf.to_json_dict()


def test_unknown_target():
    with pytest.raises(UnknownAttribute):
        compute_meta_features(parse_arff(BASIC), target="nope")


def test_missing_target_cells_excluded_from_class_counts():
    ds = Dataset("t", [AttributeSpec("c", "nominal", ("a", "b"))],
                 [(0,), (0,), (1,), (MISSING,)])
    mf = compute_meta_features(ds, target="c")
    assert mf.default_accuracy == pytest.approx(2 / 3)


def test_class_entropy_examples():
    assert class_entropy([0, 0, 1, 1]) == 1.0
    assert class_entropy([0, 0, 0]) == 0.0
    assert class_entropy([0, 0, 1, 2]) == 1.5
    with pytest.raises(EmptyInput):
        class_entropy([])


def test_default_accuracy_examples():
    assert default_accuracy([0, 0, 1]) == pytest.approx(2 / 3)
    assert default_accuracy([0]) == 1.0
    assert default_accuracy([0, 1]) == 0.5
    with pytest.raises(EmptyInput):
        default_accuracy([])


def test_summary_counts():
    ds = parse_arff(BASIC)
    s = dataset_summary(ds)
    assert s.shape == (2, 2)
    assert len(s.preview) == 2
    assert s.preview[0] == "1.0,x"


def test_summary_empty_dataset():
    ds = Dataset("t", [AttributeSpec("a", "numeric")], [])
    s = dataset_summary(ds)
    assert s.preview == []
    assert len(s.attribute_table) == 1
    assert "a" in s.to_text()


def test_summary_preview_capped_at_ten():
    rows = [(float(i),) for i in range(100)]
    ds = Dataset("t", [AttributeSpec("a", "numeric")], rows)
    assert len(dataset_summary(ds).preview) == 10


def test_kind_counts_sum():
    rng = random.Random(11)
    for _ in range(20):
        ds = random_dataset(rng, max_rows=30)
        mf = compute_meta_features(ds)
        assert mf.n_numeric + mf.n_nominal + mf.n_string == mf.n_attributes


def test_permutation_invariance():
    rng = random.Random(99)
    ds = random_dataset(rng, min_rows=5, max_rows=40)
    target = next((a.name for a in ds.attributes if a.kind == "nominal"), None)
    shuffled_rows = list(ds.rows)
    rng.shuffle(shuffled_rows)
    shuffled = Dataset(ds.relation, ds.attributes, shuffled_rows)
    assert compute_meta_features(ds, target) == compute_meta_features(shuffled, target)


def test_missing_count_matches_brute_force():
    rng = random.Random(4242)
    for _ in range(10):
        ds = random_dataset(rng, max_rows=50)
        brute = 0
        for row in ds.rows:
            for cell in row:
                if cell is MISSING:
                    brute += 1
        assert compute_meta_features(ds).n_missing_values == brute


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=60))
def test_entropy_bounds_property(labels):
    h = class_entropy(labels)
    assert -1e-12 <= h <= math.log2(len(set(labels))) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=60))
def test_default_accuracy_times_n_is_integer(labels):
    scaled = default_accuracy(labels) * len(labels)
    assert abs(scaled - round(scaled)) < 1e-9
    assert round(scaled) == max(Counter(labels).values())
