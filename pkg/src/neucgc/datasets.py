"""Readers for common raw citation/webpage graph dumps.

``linqs``: ``<name>.content`` (node id, binary features, class name per line)
and ``<name>.cites`` (pairs of node ids). ``geom-gcn``:
``out1_node_feature_label.txt`` (tab-separated id, comma-separated features,
label, after a header line) and ``out1_graph_edges.txt`` (header plus id
pairs). Both become an :class:`AttributedGraph` with nodes in file order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graph import AttributedGraph, GraphFormatError, GraphLoadError, load_graph

FORMATS = ("auto", "dir", "linqs", "geom-gcn")


def _single(data_dir: Path, pattern: str) -> Path:
    hits = sorted(data_dir.glob(pattern))
    if len(hits) != 1:
        raise GraphLoadError(f"{data_dir}: expected one {pattern} file, found {len(hits)}")
    return hits[0]


def load_linqs(data_dir) -> AttributedGraph:
    data_dir = Path(data_dir)
    content = _single(data_dir, "*.content")
    cites = _single(data_dir, "*.cites")
    ids, rows, classes = [], [], []
    with open(content) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise GraphFormatError(f"{content}:{lineno}: too few columns")
            ids.append(parts[0])
            rows.append([float(v) for v in parts[1:-1]])
            classes.append(parts[-1])
    index = {node: i for i, node in enumerate(ids)}
    names = sorted(set(classes))
    labels = np.array([names.index(c) for c in classes], dtype=np.int64)
    edges = []
    with open(cites) as fh:
        for line in fh:
            parts = line.split()
            # citations to papers outside the content file are dropped
            if len(parts) == 2 and parts[0] in index and parts[1] in index:
                edges.append((index[parts[0]], index[parts[1]]))
    return AttributedGraph.from_edges(
        np.array(rows), np.array(edges, dtype=np.int64).reshape(-1, 2), labels, len(names)
    )


def load_geom_gcn(data_dir) -> AttributedGraph:
    data_dir = Path(data_dir)
    nodes = data_dir / "out1_node_feature_label.txt"
    edges_path = data_dir / "out1_graph_edges.txt"
    for p in (nodes, edges_path):
        if not p.is_file():
            raise GraphLoadError(f"missing dataset file: {p}")
    entries = {}
    with open(nodes) as fh:
        next(fh)
        for line in fh:
            node, feats, label = line.rstrip("\n").split("\t")
            entries[int(node)] = ([float(v) for v in feats.split(",")], int(label))
    order = sorted(entries)
    if order != list(range(len(order))):
        raise GraphFormatError(f"{nodes}: node ids are not 0..N-1")
    x = np.array([entries[i][0] for i in order])
    y = np.array([entries[i][1] for i in order], dtype=np.int64)
    edges = np.loadtxt(edges_path, dtype=np.int64, skiprows=1, ndmin=2)
    return AttributedGraph.from_edges(x, edges, y)


def detect_format(path) -> str:
    path = Path(path)
    if (path / "features.txt").is_file():
        return "dir"
    if any(path.glob("*.content")):
        return "linqs"
    if (path / "out1_node_feature_label.txt").is_file():
        return "geom-gcn"
    raise GraphLoadError(f"{path}: no recognizable dataset files")


def load_dataset(path, fmt: str = "auto") -> AttributedGraph:
    if fmt == "auto":
        fmt = detect_format(path)
    if fmt == "dir":
        return load_graph(path)
    if fmt == "linqs":
        return load_linqs(path)
    if fmt == "geom-gcn":
        return load_geom_gcn(path)
    raise ValueError(f"unknown dataset format {fmt!r}; expected one of {FORMATS}")
