"""Graph exports: delimited edge lists, DOT, and GraphML.

Each format produces one file per group plus a combined file. Per-group
edges carry ``shared``, the number of other groups whose selected graph
contains the same edge. The combined file holds the union of all edges;
there ``shared`` is 1 when the edge appears in every group (rendered
solid in DOT, dashed otherwise) and the ``groups`` attribute lists the
groups containing it.

The edge list round-trips through read_edge_list; DOT and GraphML are
write-only conveniences for external viewers.
"""

from __future__ import annotations

import csv
from pathlib import Path
from xml.etree import ElementTree as ET

import numpy as np

from .errors import DataError
from .pairs import pair_count, pair_list
from .summaries import SelectedGraphs

FORMATS = ("edge-list", "dot", "graphml")
_NS = "http://graphml.graphdrawing.org/xmlns"


def _shared_counts(bits: np.ndarray) -> np.ndarray:
    """shared[x, k] = number of groups besides x that select pair k."""
    totals = bits.sum(axis=0)
    return totals[None, :] - bits


def write_edge_list(selected: SelectedGraphs, path: str | Path) -> Path:
    """Combined CSV with one row per selected edge per group."""
    path = Path(path)
    pl = pair_list(len(selected.variables))
    shared = _shared_counts(selected.bits)
    q = len(selected.group_labels)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "var_r", "var_j", "r", "j", "shared", "shared_all"])
        for x, label in enumerate(selected.group_labels):
            for k in np.flatnonzero(selected.bits[x]):
                r, j = pl[k]
                w.writerow(
                    [
                        label,
                        selected.variables[r],
                        selected.variables[j],
                        r + 1,
                        j + 1,
                        int(shared[x, k]),
                        int(shared[x, k] == q - 1),
                    ]
                )
    return path


def read_edge_list(
    path: str | Path,
    group_labels: list[str],
    variables: list[str],
) -> SelectedGraphs:
    """Rebuild SelectedGraphs from a write_edge_list file.

    group_labels and variables fix the layout; rows naming unknown groups
    or variables raise DataError.
    """
    p = len(variables)
    bits = np.zeros((len(group_labels), pair_count(p)), dtype=np.uint8)
    with open(path, newline="") as fh:
        for line_no, rec in enumerate(csv.DictReader(fh), start=2):
            try:
                x = group_labels.index(rec["group"])
            except ValueError:
                raise DataError(
                    f"{path}, line {line_no}: unknown group {rec['group']!r}"
                ) from None
            r, j = int(rec["r"]) - 1, int(rec["j"]) - 1
            if not 0 <= j < r < p:
                raise DataError(
                    f"{path}, line {line_no}: pair ({rec['r']}, {rec['j']}) "
                    f"out of range for p = {p}"
                )
            for idx, col in ((r, "var_r"), (j, "var_j")):
                if rec[col] != variables[idx]:
                    raise DataError(
                        f"{path}, line {line_no}: {col} is {rec[col]!r} but "
                        f"position {idx + 1} is named {variables[idx]!r}"
                    )
            bits[x, r * (r - 1) // 2 + j] = 1
    return SelectedGraphs(
        bits=bits,
        cutoff=float("nan"),
        group_labels=list(group_labels),
        variables=list(variables),
    )


def _safe_name(label: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in label)


def _dot_lines(title, variables, edges) -> str:
    """edges: iterable of (j, r, attrs dict)."""
    lines = [f'graph "{title}" {{']
    for name in variables:
        lines.append(f'  "{name}";')
    for j, r, attrs in edges:
        rendered = ", ".join(f"{k}={v}" for k, v in attrs.items())
        lines.append(f'  "{variables[j]}" -- "{variables[r]}" [{rendered}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(
    selected: SelectedGraphs, out_dir: str | Path, prefix: str = "graph"
) -> list[Path]:
    """Per-group <prefix>_<group>.dot plus <prefix>_combined.dot."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pl = pair_list(len(selected.variables))
    shared = _shared_counts(selected.bits)
    q = len(selected.group_labels)
    paths = []
    for x, label in enumerate(selected.group_labels):
        path = out / f"{prefix}_{_safe_name(label)}.dot"
        edges = [
            (pl[k][1], pl[k][0], {"shared": int(shared[x, k])})
            for k in np.flatnonzero(selected.bits[x])
        ]
        path.write_text(_dot_lines(label, selected.variables, edges))
        paths.append(path)

    union = np.flatnonzero(selected.bits.any(axis=0))
    edges = []
    for k in union:
        r, j = pl[k]
        members = [
            selected.group_labels[x]
            for x in np.flatnonzero(selected.bits[:, k])
        ]
        everywhere = len(members) == q
        edges.append(
            (
                j,
                r,
                {
                    "shared": int(everywhere),
                    "style": "solid" if everywhere else "dashed",
                    "groups": '"' + ";".join(members) + '"',
                },
            )
        )
    combined = out / f"{prefix}_combined.dot"
    combined.write_text(_dot_lines("combined", selected.variables, edges))
    paths.append(combined)
    return paths


def _graphml_tree(graph_id, variables, edges) -> ET.ElementTree:
    """edges: iterable of (j, r, shared int, groups str or None)."""
    root = ET.Element(f"{{{_NS}}}graphml")
    for key_id, name, typ in (
        ("d0", "shared", "int"),
        ("d1", "groups", "string"),
    ):
        key = ET.SubElement(root, f"{{{_NS}}}key")
        key.set("id", key_id)
        key.set("for", "edge")
        key.set("attr.name", name)
        key.set("attr.type", typ)
    graph = ET.SubElement(root, f"{{{_NS}}}graph")
    graph.set("id", graph_id)
    graph.set("edgedefault", "undirected")
    for name in variables:
        node = ET.SubElement(graph, f"{{{_NS}}}node")
        node.set("id", name)
    for j, r, shared, groups in edges:
        edge = ET.SubElement(graph, f"{{{_NS}}}edge")
        edge.set("source", variables[j])
        edge.set("target", variables[r])
        data = ET.SubElement(edge, f"{{{_NS}}}data")
        data.set("key", "d0")
        data.text = str(shared)
        if groups is not None:
            data = ET.SubElement(edge, f"{{{_NS}}}data")
            data.set("key", "d1")
            data.text = groups
    tree = ET.ElementTree(root)
    ET.indent(tree)
    return tree


def write_graphml(
    selected: SelectedGraphs, out_dir: str | Path, prefix: str = "graph"
) -> list[Path]:
    """Per-group <prefix>_<group>.graphml plus <prefix>_combined.graphml."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ET.register_namespace("", _NS)
    pl = pair_list(len(selected.variables))
    shared = _shared_counts(selected.bits)
    q = len(selected.group_labels)
    paths = []
    for x, label in enumerate(selected.group_labels):
        edges = [
            (pl[k][1], pl[k][0], int(shared[x, k]), None)
            for k in np.flatnonzero(selected.bits[x])
        ]
        tree = _graphml_tree(label, selected.variables, edges)
        path = out / f"{prefix}_{_safe_name(label)}.graphml"
        tree.write(path, encoding="unicode", xml_declaration=True)
        paths.append(path)

    edges = []
    for k in np.flatnonzero(selected.bits.any(axis=0)):
        r, j = pl[k]
        members = [
            selected.group_labels[x]
            for x in np.flatnonzero(selected.bits[:, k])
        ]
        edges.append((j, r, int(len(members) == q), ";".join(members)))
    tree = _graphml_tree("combined", selected.variables, edges)
    combined = out / f"{prefix}_combined.graphml"
    tree.write(combined, encoding="unicode", xml_declaration=True)
    paths.append(combined)
    return paths


def export_graphs(
    selected: SelectedGraphs,
    out_dir: str | Path,
    formats: tuple[str, ...] = FORMATS,
    prefix: str = "graph",
) -> list[Path]:
    """Write the requested formats into out_dir and return all paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    for fmt in formats:
        if fmt == "edge-list":
            paths.append(write_edge_list(selected, out / f"{prefix}_edges.csv"))
        elif fmt == "dot":
            paths.extend(write_dot(selected, out, prefix))
        elif fmt == "graphml":
            paths.extend(write_graphml(selected, out, prefix))
        else:
            raise DataError(f"unknown export format {fmt!r}; choose from {FORMATS}")
    return paths


__all__ = [
    "FORMATS",
    "export_graphs",
    "read_edge_list",
    "write_dot",
    "write_edge_list",
    "write_graphml",
]
