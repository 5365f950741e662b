from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraudwood.dataset import (
    FeatureSchema,
    FeatureSpec,
    LabeledTable,
    SplitSpec,
    SynthConfig,
    apportion,
    class_balance,
    read_csv,
    split,
    synthesize,
    write_csv,
)
from fraudwood.errors import (
    BadLabel,
    MissingColumn,
    NonNumericCell,
    SchemaError,
    TooFewRows,
    UnknownCategory,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


HEADER = "income,employment,loan_amount,family_size,label\n"


class TestSchema:
    def test_numeric_with_categories_rejected(self):
        with pytest.raises(SchemaError):
            FeatureSpec("x", "financial", "numeric", ("a", "b"))

    def test_categorical_needs_two_unique(self):
        with pytest.raises(SchemaError):
            FeatureSpec("x", "work", "categorical", ("a",))
        with pytest.raises(SchemaError):
            FeatureSpec("x", "work", "categorical", ("a", "a"))

    def test_duplicate_names(self):
        f = FeatureSpec("x", "work", "numeric")
        with pytest.raises(SchemaError):
            FeatureSchema((f, f))

    def test_json_round_trip(self, small_schema, tmp_path):
        small_schema.save(tmp_path / "s.json")
        assert FeatureSchema.load(tmp_path / "s.json") == small_schema
        assert small_schema.to_dict()["schema_version"] == 1


class TestReadCsv:
    def test_three_rows(self, small_schema, tmp_path):
        p = _write(tmp_path / "d.csv", HEADER + "1.5,employed,2,one,0\n"
                   "2.5,self_employed,3,two,1\n3.5,employed,4,many,1\n")
        t = read_csv(p, small_schema)
        assert t.n_rows == 3
        assert t.labels.tolist() == [0, 1, 1]
        assert t.row(1) == (2.5, "self_employed", 3.0, "two")

    def test_missing_label_column(self, small_schema, tmp_path):
        p = _write(tmp_path / "d.csv", "income,employment,loan_amount,family_size\n1,employed,2,one\n")
        with pytest.raises(MissingColumn) as e:
            read_csv(p, small_schema)
        assert e.value.column == "label"

    def test_unknown_category(self, small_schema, tmp_path):
        p = _write(tmp_path / "d.csv", HEADER + "1,employed,2,one,0\n1,freelancer,2,one,0\n")
        with pytest.raises(UnknownCategory) as e:
            read_csv(p, small_schema)
        assert (e.value.row, e.value.feature) == (1, "employment")

    def test_first_offending_cell_is_row_major(self, small_schema, tmp_path):
        p = _write(tmp_path / "d.csv", HEADER + "1,employed,2,one,0\n"
                   "1,employed,abc,one,0\nxyz,freelancer,2,one,0\n")
        with pytest.raises(NonNumericCell) as e:
            read_csv(p, small_schema)
        assert (e.value.row, e.value.feature) == (1, "loan_amount")

    @pytest.mark.parametrize("cell", ["", "nan", "inf", "1e999"])
    def test_missing_or_nonfinite_numeric(self, small_schema, tmp_path, cell):
        p = _write(tmp_path / "d.csv", HEADER + f"{cell},employed,2,one,0\n")
        with pytest.raises(NonNumericCell):
            read_csv(p, small_schema)

    def test_bad_label(self, small_schema, tmp_path):
        p = _write(tmp_path / "d.csv", HEADER + "1,employed,2,one,2\n")
        with pytest.raises(BadLabel) as e:
            read_csv(p, small_schema)
        assert e.value.row == 0


class TestWriteCsv:
    def test_round_trip(self, small_table, tmp_path):
        write_csv(small_table, tmp_path / "t.csv")
        assert read_csv(tmp_path / "t.csv", small_table.schema) == small_table

    def test_empty_table_is_header_only(self, small_schema, tmp_path):
        empty = LabeledTable.from_rows(small_schema, [], [])
        write_csv(empty, tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_text() == HEADER
        assert read_csv(tmp_path / "e.csv", small_schema).n_rows == 0

    def test_point_one_bit_exact(self, small_table, tmp_path):
        write_csv(small_table, tmp_path / "t.csv")
        back = read_csv(tmp_path / "t.csv", small_table.schema)
        assert back.columns[0][2] == 0.1

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_property_round_trip(self, tmp_path_factory, data):
        n_num = data.draw(st.integers(0, 3))
        n_cat = data.draw(st.integers(0 if n_num else 1, 3))
        feats = [FeatureSpec(f"n{i}", "financial", "numeric") for i in range(n_num)]
        for i in range(n_cat):
            k = data.draw(st.integers(2, 4))
            feats.append(FeatureSpec(f"c{i}", "work", "categorical", tuple(f"v{j}" for j in range(k))))
        schema = FeatureSchema(tuple(feats))
        n = data.draw(st.integers(0, 8))
        finite = st.floats(allow_nan=False, allow_infinity=False)
        rows = []
        for _ in range(n):
            rows.append(tuple(
                data.draw(finite) if f.is_numeric else data.draw(st.sampled_from(f.categories))
                for f in feats
            ))
        labels = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
        table = LabeledTable.from_rows(schema, rows, labels)
        path = tmp_path_factory.mktemp("rt") / "t.csv"
        write_csv(table, path)
        assert read_csv(path, schema) == table


class TestSynthesize:
    def test_a_like_balance(self):
        table, schema = synthesize(SynthConfig.from_preset("A_like", seed=42))
        assert table.n_rows == 60000
        assert 0.495 <= class_balance(table)[2] <= 0.505
        assert len(schema) == 97 and schema.n_categorical == 33

    def test_low_fraud_rate(self):
        cfg = SynthConfig(n_rows=10000, fraud_rate=0.02, seed=3)
        table, _ = synthesize(cfg)
        assert 150 <= class_balance(table)[0] <= 250

    def test_deterministic(self):
        cfg = SynthConfig(n_rows=500, n_numeric=6, n_categorical=3, seed=9)
        a, sa = synthesize(cfg)
        b, sb = synthesize(cfg)
        assert a == b and sa == sb

    def test_groups_round_robin(self):
        _, schema = synthesize(SynthConfig(n_rows=50, n_numeric=5, n_categorical=3, seed=1))
        groups = [f.group for f in schema.features]
        assert groups == ["financial", "work", "transaction", "demographic"] * 2

    def test_magnitude_contrast(self):
        table, schema = synthesize(SynthConfig(n_rows=4000, seed=5))
        sds = [c.std() for f, c in zip(schema.features, table.columns) if f.is_numeric]
        assert max(sds) / min(sds) >= 1e4

    def test_preset_fixes_rows(self):
        with pytest.raises(ValueError):
            SynthConfig(preset="B_like", n_rows=10, fraud_rate=0.5)

    def test_b_like_rate(self):
        table, _ = synthesize(SynthConfig.from_preset("B_like", seed=1))
        n_pos, n_neg, rate = class_balance(table)
        assert n_pos + n_neg == 50000
        assert abs(rate - 0.5) <= 0.005


def _exact_apportion(n, ratio):
    # Independent: exact rational quotas.
    total = sum(ratio)
    quotas = [Fraction(n * r, total) for r in ratio]
    floors = [int(q) for q in quotas]
    rem = sorted(range(len(ratio)), key=lambda i: (-(quotas[i] - floors[i]), i))
    for i in rem[: n - sum(floors)]:
        floors[i] += 1
    return floors


class TestSplit:
    @pytest.mark.parametrize("n", [6, 7, 11, 100, 60000, 50001])
    @pytest.mark.parametrize("ratio", [(4, 1, 1), (3, 2, 2), (1, 1, 1)])
    def test_apportion_matches_rational(self, n, ratio):
        assert apportion(n, ratio) == _exact_apportion(n, ratio)

    def test_60000_unstratified(self):
        t = _balanced(60000, np.random.default_rng(0).permutation(60000) % 2)
        parts = split(t, SplitSpec((4, 1, 1), seed=1, stratify=False))
        assert [p.n_rows for p in parts] == [40000, 10000, 10000]

    def test_six_rows(self):
        t = _balanced(6, [0, 1, 0, 1, 0, 1])
        for seed in range(5):
            parts = split(t, SplitSpec((4, 1, 1), seed=seed, stratify=False))
            assert [p.n_rows for p in parts] == [4, 1, 1]

    def test_stratified_balanced(self):
        labels = np.r_[np.ones(25000), np.zeros(25000)].astype(int)
        t = _balanced(50000, labels)
        for part in split(t, SplitSpec((4, 1, 1), seed=7)):
            assert 2 * int(part.labels.sum()) == part.n_rows

    def test_partition_and_determinism(self):
        labels = np.random.default_rng(1).integers(0, 2, 97)
        t = _balanced(97, labels)
        spec = SplitSpec((4, 1, 1), seed=3)
        parts = split(t, spec)
        ids = np.concatenate([p.columns[0] for p in parts])
        assert sorted(ids.tolist()) == list(range(97))
        again = split(t, spec)
        assert all(a == b for a, b in zip(parts, again))
        pos = int(labels.sum())
        assert [int(p.labels.sum()) for p in parts] == apportion(pos, (4, 1, 1))
        assert [p.n_rows - int(p.labels.sum()) for p in parts] == apportion(97 - pos, (4, 1, 1))

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            split(_balanced(5, [0, 1, 0, 1, 0]), SplitSpec((4, 1, 1)))


def _balanced(n, labels):
    """Table whose only feature is the row id, so partitions are traceable."""
    schema = FeatureSchema((FeatureSpec("row_id", "financial", "numeric"),))
    return LabeledTable(schema, [np.arange(n, dtype=float)], np.asarray(labels))


class TestClassBalance:
    def test_counts(self):
        assert class_balance(_balanced(4, [1, 0, 1, 1])) == (3, 1, 0.75)

    def test_empty(self):
        assert class_balance(_balanced(0, [])) == (0, 0, 0.0)
