"""Survey-style ingestion: recode a raw CSV into grouped binary data.

A JSON recode config drives the conversion:

    {
      "variables": {
        "trust":   {"column": "contv", "one": ["Hardly any"]},
        "binary":  {"one": ["1"], "zero": ["0"]}
      },
      "group": {"column": "age", "quantiles": 3},
      "group_names": ["young", "mid", "old"],
      "na_values": ["", "NA"]
    }

Each key under "variables" names an output variable; "column" points at
the raw CSV column (defaults to the key itself). A rule maps a value set
to 1. With only "one" given, every other observed value maps to 0; with
an explicit "zero" set, values in neither set raise DataError. Cells are
compared as stripped strings, so numeric entries in the config should be
quoted as they appear in the file.

Grouping is one of
    {"column": c, "thresholds": [t1, t2, ...]}  bins (-inf, t1], (t1, t2], ...
    {"column": c, "quantiles": k}               k equal-frequency bins at
                                                linear-interpolation sample
                                                quantiles, boundary ties to
                                                the lower bin
    {"column": c, "labels": true}               use the column values as
                                                group labels (sorted order)

Rows with a missing value in any used column are dropped and counted per
column in the IngestReport.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError
from .ising import BinaryDataset, GroupedData

DEFAULT_NA = ("", "NA", "NaN", "nan", ".")


@dataclass
class VariableRule:
    column: str
    one: frozenset[str]
    zero: frozenset[str] | None = None  # None -> complement of `one`


@dataclass
class IngestSpec:
    """Parsed recode config; see the module docstring for the JSON layout."""

    variables: dict[str, VariableRule]
    group_column: str
    thresholds: list[float] | None = None
    quantiles: int | None = None
    labels: bool = False
    group_names: list[str] | None = None
    na_values: frozenset[str] = frozenset(DEFAULT_NA)

    @classmethod
    def from_dict(cls, cfg: dict) -> "IngestSpec":
        if not isinstance(cfg.get("variables"), dict) or not cfg["variables"]:
            raise ConfigError("config needs a non-empty 'variables' object")
        rules = {}
        for name, rule in cfg["variables"].items():
            if not isinstance(rule, dict) or "one" not in rule:
                raise ConfigError(
                    f"variable {name!r}: rule must be an object with a 'one' list"
                )
            one = frozenset(str(v).strip() for v in rule["one"])
            if not one:
                raise ConfigError(f"variable {name!r}: 'one' set is empty")
            zero = None
            if "zero" in rule:
                zero = frozenset(str(v).strip() for v in rule["zero"])
                if one & zero:
                    raise ConfigError(
                        f"variable {name!r}: value sets overlap: {sorted(one & zero)}"
                    )
            rules[name] = VariableRule(str(rule.get("column", name)), one, zero)

        grp = cfg.get("group")
        if not isinstance(grp, dict) or "column" not in grp:
            raise ConfigError("config needs a 'group' object with a 'column'")
        modes = [k for k in ("thresholds", "quantiles", "labels") if k in grp]
        if len(modes) != 1:
            raise ConfigError(
                "group must set exactly one of thresholds, quantiles, labels; "
                f"got {modes or 'none'}"
            )
        thresholds = quantiles = None
        labels = False
        if "thresholds" in grp:
            thresholds = [float(t) for t in grp["thresholds"]]
            if not thresholds or any(
                b <= a for a, b in zip(thresholds, thresholds[1:])
            ):
                raise ConfigError(
                    f"thresholds must be strictly increasing, got {thresholds}"
                )
        elif "quantiles" in grp:
            quantiles = int(grp["quantiles"])
            if quantiles < 2:
                raise ConfigError(f"quantiles must be at least 2, got {quantiles}")
        else:
            if grp["labels"] is not True:
                raise ConfigError("group 'labels' mode must be set to true")
            labels = True

        group_names = cfg.get("group_names")
        if group_names is not None:
            if labels:
                raise ConfigError("group_names cannot be combined with labels mode")
            k = quantiles if quantiles else len(thresholds) + 1
            if len(group_names) != k:
                raise ConfigError(
                    f"group_names has {len(group_names)} entries but the "
                    f"grouping produces {k} groups"
                )
            group_names = [str(n) for n in group_names]
        na = frozenset(
            str(v) for v in cfg.get("na_values", DEFAULT_NA)
        )
        return cls(
            variables=rules,
            group_column=str(grp["column"]),
            thresholds=thresholds,
            quantiles=quantiles,
            labels=labels,
            group_names=group_names,
            na_values=na,
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "IngestSpec":
        with open(path) as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(cfg)


@dataclass
class IngestReport:
    n_input: int
    n_kept: int
    dropped_total: int
    dropped_by_column: dict[str, int]
    group_column: str
    group_sizes: dict[str, int]
    thresholds: list[float] | None
    variables: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_kept": self.n_kept,
            "dropped_total": self.dropped_total,
            "dropped_by_column": dict(self.dropped_by_column),
            "group_column": self.group_column,
            "group_sizes": dict(self.group_sizes),
            "thresholds": self.thresholds,
            "variables": list(self.variables),
        }


def ingest(
    csv_path: str | Path, spec: IngestSpec
) -> tuple[GroupedData, IngestReport]:
    """Recode csv_path per spec; returns the data and an ingestion report."""
    df = pd.read_csv(csv_path, dtype=str, keep_default_na=False)
    used = list(
        dict.fromkeys(
            [r.column for r in spec.variables.values()] + [spec.group_column]
        )
    )
    for col in used:
        if col not in df.columns:
            raise DataError(f"{csv_path}: missing column {col!r}")
    cells = {col: df[col].str.strip() for col in used}

    missing = {col: cells[col].isin(spec.na_values) for col in used}
    drop = np.zeros(len(df), dtype=bool)
    for col in used:
        drop |= missing[col].to_numpy()
    keep = ~drop
    n_kept = int(keep.sum())
    if n_kept == 0:
        raise DataError(f"{csv_path}: every row has a missing value")

    group_vals = cells[spec.group_column][keep]
    if spec.labels:
        labels = sorted(group_vals.unique())
        assignment = group_vals.to_numpy()
        realized = None
    else:
        numeric = pd.to_numeric(group_vals, errors="coerce")
        if numeric.isna().any():
            bad = group_vals[numeric.isna()].iloc[0]
            raise DataError(
                f"column {spec.group_column!r}: non-numeric value {bad!r} "
                "cannot be binned"
            )
        values = numeric.to_numpy(dtype=float)
        if spec.thresholds is not None:
            realized = list(spec.thresholds)
        else:
            k = spec.quantiles
            realized = [
                float(np.quantile(values, i / k, method="linear"))
                for i in range(1, k)
            ]
            if any(b <= a for a, b in zip(realized, realized[1:])):
                raise DataError(
                    f"column {spec.group_column!r}: realized quantile "
                    f"thresholds are not strictly increasing: {realized}"
                )
        # value <= threshold goes to the lower bin
        bins = np.searchsorted(np.asarray(realized), values, side="left")
        names = spec.group_names or [
            f"g{i + 1}" for i in range(len(realized) + 1)
        ]
        labels = names
        assignment = np.asarray(names, dtype=object)[bins]

    recoded = np.empty((n_kept, len(spec.variables)), dtype=np.uint8)
    for v_idx, rule in enumerate(spec.variables.values()):
        col_vals = cells[rule.column][keep]
        ones = col_vals.isin(rule.one).to_numpy()
        if rule.zero is None:
            recoded[:, v_idx] = ones
        else:
            zeros = col_vals.isin(rule.zero).to_numpy()
            unmapped = ~(ones | zeros)
            if unmapped.any():
                bad = col_vals[unmapped].iloc[0]
                raise DataError(
                    f"column {rule.column!r}: value {bad!r} is in neither "
                    "the one set nor the zero set"
                )
            recoded[:, v_idx] = ones

    datasets = []
    sizes = {}
    for label in labels:
        mask = assignment == label
        if not mask.any():
            raise DataError(f"group {label!r} is empty after filtering")
        datasets.append(BinaryDataset(rows=recoded[mask], group_label=label))
        sizes[label] = int(mask.sum())

    report = IngestReport(
        n_input=len(df),
        n_kept=n_kept,
        dropped_total=int(drop.sum()),
        dropped_by_column={col: int(missing[col].sum()) for col in used},
        group_column=spec.group_column,
        group_sizes=sizes,
        thresholds=realized,
        variables=list(spec.variables),
    )
    data = GroupedData(groups=datasets, variables=list(spec.variables))
    return data, report


def write_grouped_csv(data: GroupedData, path: str | Path) -> Path:
    """Canonical layout: one column per variable plus a 'group' column."""
    path = Path(path)
    frames = []
    for ds in data.groups:
        frame = pd.DataFrame(ds.rows, columns=data.variables)
        frame["group"] = ds.group_label
        frames.append(frame)
    pd.concat(frames, ignore_index=True).to_csv(path, index=False)
    return path


def read_grouped_csv(path: str | Path) -> GroupedData:
    """Read a file produced by write_grouped_csv (or hand-built to match)."""
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    if "group" not in df.columns:
        raise DataError(f"{path}: missing the 'group' column")
    variables = [c for c in df.columns if c != "group"]
    if not variables:
        raise DataError(f"{path}: no variable columns")
    mat = np.empty((len(df), len(variables)), dtype=np.uint8)
    for v_idx, col in enumerate(variables):
        vals = df[col].str.strip()
        ok = vals.isin(("0", "1"))
        if not ok.all():
            bad = vals[~ok].iloc[0]
            raise DataError(
                f"{path}: column {col!r} has non-binary value {bad!r}"
            )
        mat[:, v_idx] = (vals == "1").to_numpy()
    labels = []
    for label in df["group"]:
        if label not in labels:
            labels.append(label)
    datasets = []
    for label in labels:
        mask = (df["group"] == label).to_numpy()
        datasets.append(BinaryDataset(rows=mat[mask], group_label=label))
    return GroupedData(groups=datasets, variables=variables)


__all__ = [
    "IngestReport",
    "IngestSpec",
    "VariableRule",
    "ingest",
    "read_grouped_csv",
    "write_grouped_csv",
]
