"""Readers and writers for graph, hypergraph, partition and fixed-vertex files.

Edge-list format (1-based vertex ids)::

    n num_edges m
    i j w            # num_edges lines
    b_1 ... b_m      # n lines of integer vertex weights

Hypergraph format follows hMETIS: header ``num_nets num_vertices [fmt]`` where
``fmt`` is 1 (net weights), 10 (vertex weights) or 11 (both).  Lines starting
with ``%`` are comments.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .graph import FixedAssignment, Hypergraph, InputError, WeightedGraph


class ParseError(InputError):
    def __init__(self, path, line: int, message: str, column: int | None = None):
        self.path = str(path)
        self.line = line
        self.column = column
        where = f"{self.path}:{line}" + (f":{column}" if column is not None else "")
        super().__init__(f"{where}: {message}")


def _content_lines(path):
    """Yield ``(line_number, tokens)`` for non-blank, non-comment lines."""
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            text = raw.split("%", 1)[0].strip()
            if text:
                yield number, raw, text.split()


def _column(raw: str, token_index: int) -> int:
    pos = 0
    for k, tok in enumerate(raw.split()):
        pos = raw.index(tok, pos)
        if k == token_index:
            return pos + 1
        pos += len(tok)
    return 1


def _int(path, number, raw, tokens, idx, what):
    try:
        return int(tokens[idx])
    except ValueError:
        raise ParseError(path, number, f"invalid {what} {tokens[idx]!r}", _column(raw, idx)) from None


def _float(path, number, raw, tokens, idx, what):
    try:
        value = float(tokens[idx])
    except ValueError:
        raise ParseError(path, number, f"invalid {what} {tokens[idx]!r}", _column(raw, idx)) from None
    if not np.isfinite(value):
        raise ParseError(path, number, f"non-finite {what}", _column(raw, idx))
    return value


def load_graph(path, format: str = "edgelist") -> WeightedGraph:
    if format == "hmetis":
        from .graph import expand_hypergraph

        return expand_hypergraph(load_hypergraph(path))
    if format != "edgelist":
        raise InputError(f"unknown graph format {format!r}")
    lines = _content_lines(path)
    try:
        number, raw, head = next(lines)
    except StopIteration:
        raise ParseError(path, 1, "empty file") from None
    if len(head) != 3:
        raise ParseError(path, number, "header must be 'n num_edges m'")
    n, ne, m = (_int(path, number, raw, head, k, "header field") for k in range(3))
    if n < 0 or ne < 0 or m < 1:
        raise ParseError(path, number, "header values out of range")

    seen: dict[tuple[int, int], int] = {}
    rows, cols, ws = [], [], []
    for _ in range(ne):
        try:
            number, raw, tok = next(lines)
        except StopIteration:
            raise ParseError(path, number + 1, f"expected {ne} edge lines") from None
        if len(tok) != 3:
            raise ParseError(path, number, "edge line must be 'i j w'")
        i = _int(path, number, raw, tok, 0, "vertex id")
        j = _int(path, number, raw, tok, 1, "vertex id")
        w = _float(path, number, raw, tok, 2, "edge weight")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(path, number, f"vertex id out of range 1..{n}")
        if i == j:
            raise ParseError(path, number, f"self-loop on vertex {i}")
        if w < 0:
            raise ParseError(path, number, "negative edge weight", _column(raw, 2))
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in seen:
            raise ParseError(path, number, f"duplicate edge {i}-{j} (first seen on line {seen[key]})")
        seen[key] = number
        rows.append(key[0])
        cols.append(key[1])
        ws.append(w)

    vw = np.ones((n, m), dtype=np.int64)
    for v in range(n):
        try:
            number, raw, tok = next(lines)
        except StopIteration:
            if v == 0:
                break  # weight block omitted: unit weights
            raise ParseError(path, number + 1, f"expected {n} vertex-weight lines") from None
        if len(tok) != m:
            raise ParseError(path, number, f"expected {m} vertex weights, got {len(tok)}")
        for k in range(m):
            vw[v, k] = _int(path, number, raw, tok, k, "vertex weight")
            if vw[v, k] < 0:
                raise ParseError(path, number, "negative vertex weight", _column(raw, k))
    extra = next(lines, None)
    if extra is not None:
        raise ParseError(path, extra[0], "unexpected trailing data")
    return WeightedGraph(n, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(ws), vw)


def save_graph(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.num_edges} {g.m}\n")
        for i, j, w in g.edges():
            fh.write(f"{i + 1} {j + 1} {w:g}\n")
        for row in g.vertex_weights:
            fh.write(" ".join(str(int(x)) for x in row) + "\n")


def load_hypergraph(path) -> Hypergraph:
    lines = _content_lines(path)
    try:
        number, raw, head = next(lines)
    except StopIteration:
        raise ParseError(path, 1, "empty file") from None
    if len(head) not in (2, 3):
        raise ParseError(path, number, "header must be 'num_nets num_vertices [fmt]'")
    nets = _int(path, number, raw, head, 0, "net count")
    n = _int(path, number, raw, head, 1, "vertex count")
    fmt = _int(path, number, raw, head, 2, "format flag") if len(head) == 3 else 0
    if fmt not in (0, 1, 10, 11):
        raise ParseError(path, number, f"unsupported fmt {fmt}", _column(raw, 2))
    net_weights = fmt in (1, 11)
    vertex_weights = fmt in (10, 11)

    edges = []
    for _ in range(nets):
        try:
            number, raw, tok = next(lines)
        except StopIteration:
            raise ParseError(path, number + 1, f"expected {nets} net lines") from None
        start = 0
        w = 1.0
        if net_weights:
            w = _float(path, number, raw, tok, 0, "net weight")
            if w < 0:
                raise ParseError(path, number, "negative net weight", _column(raw, 0))
            start = 1
        pins = [_int(path, number, raw, tok, k, "pin") for k in range(start, len(tok))]
        for k, p in enumerate(pins):
            if not 1 <= p <= n:
                raise ParseError(path, number, f"pin {p} out of range 1..{n}", _column(raw, start + k))
        pins = list(dict.fromkeys(p - 1 for p in pins))
        if len(pins) < 2:
            raise ParseError(path, number, "net must connect at least 2 distinct vertices")
        edges.append((tuple(pins), w))

    vw = np.ones((n, 1), dtype=np.int64)
    if vertex_weights:
        rows = []
        for v in range(n):
            try:
                number, raw, tok = next(lines)
            except StopIteration:
                raise ParseError(path, number + 1, f"expected {n} vertex-weight lines") from None
            rows.append([_int(path, number, raw, tok, k, "vertex weight") for k in range(len(tok))])
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise ParseError(path, number, "vertex-weight lines differ in length")
        vw = np.array(rows, dtype=np.int64).reshape(n, -1)
        if np.any(vw < 0):
            raise ParseError(path, number, "negative vertex weight")
    return Hypergraph(n, tuple(edges), vw)


def save_hypergraph(h: Hypergraph, path) -> None:
    weighted = any(w != 1 for _, w in h.hyperedges)
    has_vw = h.vertex_weights.shape[1] > 1 or np.any(h.vertex_weights != 1)
    fmt = (1 if weighted else 0) + (10 if has_vw else 0)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(h.hyperedges)} {h.n}" + (f" {fmt}" if fmt else "") + "\n")
        for pins, w in h.hyperedges:
            prefix = f"{w:g} " if weighted else ""
            fh.write(prefix + " ".join(str(p + 1) for p in pins) + "\n")
        if has_vw:
            for row in h.vertex_weights:
                fh.write(" ".join(str(int(x)) for x in row) + "\n")


def load_fixed(path, n: int) -> FixedAssignment:
    """hMETIS fix-file: ``n`` lines, ``-1`` free, ``0`` side 1, ``1`` side 2."""
    f1, f2 = set(), set()
    count = 0
    for number, raw, tok in _content_lines(path):
        if len(tok) != 1:
            raise ParseError(path, number, "fix file lines hold a single integer")
        value = _int(path, number, raw, tok, 0, "fixed side")
        if value not in (-1, 0, 1):
            raise ParseError(path, number, f"fixed side must be -1, 0 or 1, got {value}")
        if value == 0:
            f1.add(count)
        elif value == 1:
            f2.add(count)
        count += 1
    if count != n:
        raise ParseError(path, max(count, 1), f"fix file has {count} entries, graph has {n} vertices")
    return FixedAssignment(frozenset(f1), frozenset(f2))


def write_partition(labels, path) -> None:
    """One ``vertex_id part_id`` line per vertex, both 1-based."""
    with open(path, "w", encoding="utf-8") as fh:
        for v, part in enumerate(np.asarray(labels).tolist()):
            fh.write(f"{v + 1} {part + 1}\n")


def read_partition(path, n: int) -> np.ndarray:
    labels = np.full(n, -1, dtype=np.int64)
    for number, raw, tok in _content_lines(path):
        if len(tok) != 2:
            raise ParseError(path, number, "partition lines must be 'vertex_id part_id'")
        v = _int(path, number, raw, tok, 0, "vertex id")
        p = _int(path, number, raw, tok, 1, "part id")
        if not 1 <= v <= n:
            raise ParseError(path, number, f"vertex id {v} out of range 1..{n}")
        if p < 1:
            raise ParseError(path, number, "part ids are 1-based")
        if labels[v - 1] >= 0:
            raise ParseError(path, number, f"vertex {v} assigned twice")
        labels[v - 1] = p - 1
    missing = np.flatnonzero(labels < 0)
    if len(missing):
        raise InputError(f"{os.fspath(Path(path))}: vertices without a part: {(missing[:5] + 1).tolist()}")
    return labels
