"""CSV recoding: configs, binning, NA handling, grouped-file round trips."""

import json

import numpy as np
import pytest

from multising import (
    ConfigError,
    DataError,
    GroupedData,
    IngestSpec,
    ingest,
    read_grouped_csv,
    write_grouped_csv,
)
from multising.ising import BinaryDataset


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def base_spec(**group):
    return IngestSpec.from_dict(
        {
            "variables": {
                "happy": {"one": ["yes"]},
                "trust": {"column": "trustv", "one": ["high", "some"]},
            },
            "group": {"column": "age", **(group or {"thresholds": [40]})},
        }
    )


class TestSpecParsing:
    def test_minimal_config(self):
        spec = base_spec()
        assert spec.variables["happy"].column == "happy"
        assert spec.variables["trust"].column == "trustv"
        assert spec.variables["trust"].one == frozenset({"high", "some"})
        assert spec.variables["happy"].zero is None
        assert spec.group_column == "age"
        assert spec.thresholds == [40.0]

    def test_explicit_zero_set(self):
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"], "zero": ["0", "2"]}},
                "group": {"column": "g", "labels": True},
            }
        )
        assert spec.variables["v"].zero == frozenset({"0", "2"})
        assert spec.labels

    def test_custom_na_values(self):
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"]}},
                "group": {"column": "g", "quantiles": 2},
                "na_values": ["?"],
            }
        )
        assert spec.na_values == frozenset({"?"})

    @pytest.mark.parametrize(
        "cfg, message",
        [
            ({}, "non-empty 'variables'"),
            ({"variables": {}}, "non-empty 'variables'"),
            (
                {"variables": {"v": {"zero": ["0"]}}},
                "rule must be an object with a 'one' list",
            ),
            ({"variables": {"v": {"one": []}}}, "'one' set is empty"),
            (
                {"variables": {"v": {"one": ["1"], "zero": ["1"]}}},
                "value sets overlap",
            ),
            ({"variables": {"v": {"one": ["1"]}}}, "'group' object"),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g"},
                },
                "exactly one of",
            ),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g", "quantiles": 2, "labels": True},
                },
                "exactly one of",
            ),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g", "thresholds": [3, 3]},
                },
                "strictly increasing",
            ),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g", "thresholds": []},
                },
                "strictly increasing",
            ),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g", "quantiles": 1},
                },
                "at least 2",
            ),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g", "labels": "yes"},
                },
                "must be set to true",
            ),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g", "labels": True},
                    "group_names": ["a"],
                },
                "cannot be combined",
            ),
            (
                {
                    "variables": {"v": {"one": ["1"]}},
                    "group": {"column": "g", "quantiles": 3},
                    "group_names": ["a", "b"],
                },
                "produces 3 groups",
            ),
        ],
    )
    def test_bad_configs_rejected(self, cfg, message):
        with pytest.raises(ConfigError, match=message):
            IngestSpec.from_dict(cfg)

    def test_from_json_round_trip(self, tmp_path):
        cfg = {
            "variables": {"v": {"one": ["1"]}},
            "group": {"column": "g", "quantiles": 2},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        spec = IngestSpec.from_json(path)
        assert spec.quantiles == 2

    def test_from_json_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            IngestSpec.from_json(path)

    def test_shipped_configs_parse(self):
        for name in ("gss_confidence.json", "gss_spending.json"):
            spec = IngestSpec.from_json(f"configs/{name}")
            assert spec.variables
            assert spec.group_column


class TestIngest:
    def test_basic_recode_and_thresholds(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv",
            ["happy", "trustv", "age"],
            [
                ["yes", "high", "25"],
                ["no", "low", "30"],
                ["yes", "some", "40"],  # threshold value goes to the low bin
                ["maybe", "high", "41"],
            ],
        )
        data, report = ingest(csv, base_spec())
        assert data.group_labels == ["g1", "g2"]
        assert data.variables == ["happy", "trust"]
        assert data.groups[0].rows.tolist() == [[1, 1], [0, 0], [1, 1]]
        assert data.groups[1].rows.tolist() == [[0, 1]]
        assert report.group_sizes == {"g1": 3, "g2": 1}
        assert report.thresholds == [40.0]

    def test_explicit_zero_flags_unmapped_values(self, tmp_path):
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["agree"], "zero": ["disagree"]}},
                "group": {"column": "g", "labels": True},
            }
        )
        csv = write_csv(
            tmp_path / "raw.csv",
            ["v", "g"],
            [["agree", "x"], ["neutral", "x"]],
        )
        with pytest.raises(DataError, match="neither"):
            ingest(csv, spec)

    def test_missing_values_dropped_and_counted(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv",
            ["happy", "trustv", "age"],
            [
                ["yes", "high", "25"],
                ["NA", "high", "30"],
                ["no", "", "35"],
                ["no", "low", "NA"],
                ["yes", "NA", "NA"],
                ["no", "low", "50"],
            ],
        )
        data, report = ingest(csv, base_spec())
        assert report.n_input == 6
        assert report.n_kept == 2
        assert report.dropped_total == 4
        assert report.dropped_by_column == {"happy": 1, "trustv": 2, "age": 2}
        assert data.groups[0].n == 1
        assert data.groups[1].n == 1

    def test_all_rows_missing(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv", ["happy", "trustv", "age"], [["NA", "x", "1"]]
        )
        with pytest.raises(DataError, match="every row has a missing value"):
            ingest(csv, base_spec())

    def test_missing_column(self, tmp_path):
        csv = write_csv(tmp_path / "raw.csv", ["happy", "age"], [["yes", "3"]])
        with pytest.raises(DataError, match="missing column 'trustv'"):
            ingest(csv, base_spec())

    def test_quantile_bins_balance(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.permutation(np.arange(1, 451))
        csv = write_csv(
            tmp_path / "raw.csv",
            ["v", "g"],
            [["1" if x % 2 else "0", str(x)] for x in values],
        )
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"]}},
                "group": {"column": "g", "quantiles": 3},
            }
        )
        data, report = ingest(csv, spec)
        assert report.group_sizes == {"g1": 150, "g2": 150, "g3": 150}
        assert len(report.thresholds) == 2

    def test_constant_group_column_fails_quantiles(self, tmp_path):
        # Three equal-frequency bins need two distinct realized thresholds.
        csv = write_csv(
            tmp_path / "raw.csv", ["v", "g"], [["1", "5"], ["0", "5"], ["1", "5"]]
        )
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"]}},
                "group": {"column": "g", "quantiles": 3},
            }
        )
        with pytest.raises(DataError, match="not strictly increasing"):
            ingest(csv, spec)

    def test_labels_mode_sorts_group_values(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv",
            ["v", "region"],
            [["1", "west"], ["0", "east"], ["1", "west"], ["1", "north"]],
        )
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"]}},
                "group": {"column": "region", "labels": True},
            }
        )
        data, report = ingest(csv, spec)
        assert data.group_labels == ["east", "north", "west"]
        assert report.group_sizes == {"east": 1, "north": 1, "west": 2}

    def test_non_numeric_group_value_rejected_outside_labels_mode(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv", ["v", "g"], [["1", "ten"], ["0", "20"]]
        )
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"]}},
                "group": {"column": "g", "thresholds": [15]},
            }
        )
        with pytest.raises(DataError, match="cannot be binned"):
            ingest(csv, spec)

    def test_empty_group_rejected(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv", ["v", "g"], [["1", "5"], ["0", "7"]]
        )
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"]}},
                "group": {"column": "g", "thresholds": [100]},
            }
        )
        with pytest.raises(DataError, match="'g2' is empty"):
            ingest(csv, spec)

    def test_custom_group_names(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv", ["v", "g"], [["1", "5"], ["0", "50"]]
        )
        spec = IngestSpec.from_dict(
            {
                "variables": {"v": {"one": ["1"]}},
                "group": {"column": "g", "thresholds": [10]},
                "group_names": ["young", "old"],
            }
        )
        data, _ = ingest(csv, spec)
        assert data.group_labels == ["young", "old"]

    def test_two_variables_can_share_a_raw_column(self, tmp_path):
        csv = write_csv(
            tmp_path / "raw.csv",
            ["answer", "g"],
            [["yes", "a"], ["no", "a"], ["maybe", "b"]],
        )
        spec = IngestSpec.from_dict(
            {
                "variables": {
                    "said_yes": {"column": "answer", "one": ["yes"]},
                    "said_no": {"column": "answer", "one": ["no"]},
                },
                "group": {"column": "g", "labels": True},
            }
        )
        data, report = ingest(csv, spec)
        assert data.variables == ["said_yes", "said_no"]
        assert data.groups[0].rows.tolist() == [[1, 0], [0, 1]]
        assert report.to_dict()["variables"] == ["said_yes", "said_no"]


class TestGroupedCsv:
    def make_data(self):
        rng = np.random.default_rng(4)
        return GroupedData(
            [
                BinaryDataset(rng.integers(0, 2, size=(6, 3)), "low"),
                BinaryDataset(rng.integers(0, 2, size=(4, 3)), "high"),
            ],
            variables=["a", "b", "c"],
        )

    def test_round_trip(self, tmp_path):
        data = self.make_data()
        path = write_grouped_csv(data, tmp_path / "data.csv")
        back = read_grouped_csv(path)
        assert back.group_labels == data.group_labels
        assert back.variables == data.variables
        for orig, new in zip(data.groups, back.groups):
            assert np.array_equal(orig.rows, new.rows)

    def test_missing_group_column(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["a", "b"], [["0", "1"]])
        with pytest.raises(DataError, match="missing the 'group' column"):
            read_grouped_csv(path)

    def test_no_variable_columns(self, tmp_path):
        path = write_csv(tmp_path / "d.csv", ["group"], [["x"]])
        with pytest.raises(DataError, match="no variable columns"):
            read_grouped_csv(path)

    def test_non_binary_cell(self, tmp_path):
        path = write_csv(
            tmp_path / "d.csv", ["a", "group"], [["1", "x"], ["2", "x"]]
        )
        with pytest.raises(DataError, match="non-binary value '2'"):
            read_grouped_csv(path)
