"""File formats.

Samples (CSV)
    One row per time point, one column per vertex, nonnegative integer symbols.
    An optional header line is skipped when ``has_header`` is set. The alphabet
    size is ``1 + max symbol`` (at least 2) unless declared.

Models (plain text)
    Line 1: ``d |A|``. Vertex lines: ``v h_0 ... h_{|A|-1}``. Edge lines:
    ``u v J_00 J_01 ... J_{|A|-1,|A|-1}`` (row-major, row = symbol at u).
    Vertices are 1-indexed. A line's kind follows from its token count.
    Blank lines and lines starting with ``#`` are ignored. Omitted
    vertices/edges have zero potentials.

Graphs (DOT)
    ``graph G { ... }`` with one ``u -- v;`` line per edge, 1-indexed.
"""
from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidSymbol
from .model import Graph, ProblemDims, Sample
from .truth import PairwisePotentialSpec


def ingest_csv(path, has_header: bool = False, alphabet_size: int | None = None) -> Sample:
    rows: list[list[int]] = []
    width = None
    first_line = None
    with open(path, newline="") as fh:
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not cells or all(not c.strip() for c in cells):
                continue
            if width is None:
                width, first_line = len(cells), lineno
            elif len(cells) != width:
                raise FormatError(f"expected {width} cells as on line {first_line}, got {len(cells)}", line=lineno)
            row = []
            for col, cell in enumerate(cells, start=1):
                text = cell.strip()
                if not text:
                    raise FormatError("missing cell", line=lineno, col=col)
                try:
                    value = int(text)
                except ValueError:
                    raise FormatError(f"non-integer cell {text!r}", line=lineno, col=col) from None
                if value < 0:
                    raise FormatError(f"negative symbol {value}", line=lineno, col=col)
                row.append(value)
            rows.append(row)
    if not rows:
        raise FormatError("no data rows", line=1)
    data = np.asarray(rows, dtype=np.int64)
    observed = int(data.max()) + 1
    if alphabet_size is None:
        alphabet_size = max(2, observed)
    elif observed > alphabet_size:
        where = np.argwhere(data >= alphabet_size)[0]
        raise InvalidSymbol(
            f"symbol {data[where[0], where[1]]} (data row {where[0] + 1}, column {where[1] + 1}) "
            f"not below declared alphabet size {alphabet_size}"
        )
    return Sample(ProblemDims(data.shape[1], alphabet_size), data)


def export_csv(sample: Sample, path, header: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(",".join(f"x{v + 1}" for v in range(sample.dims.d)) + "\n")
        np.savetxt(fh, sample.data, fmt="%d", delimiter=",")


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _parse_float(tok: str, lineno: int, col: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise FormatError(f"not a number: {tok!r}", line=lineno, col=col) from None


def _parse_int(tok: str, lineno: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"not an integer: {tok!r}", line=lineno, col=col) from None


def loads_model(text: str) -> PairwisePotentialSpec:
    dims = None
    vertex, edge = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if dims is None:
            if len(toks) != 2:
                raise FormatError("header must be 'd |A|'", line=lineno)
            d, A = (_parse_int(t, lineno, i + 1) for i, t in enumerate(toks))
            try:
                dims = ProblemDims(d, A)
            except ValueError as exc:
                raise FormatError(str(exc), line=lineno) from None
            continue
        A = dims.alphabet_size
        if len(toks) == 1 + A:
            v = _parse_int(toks[0], lineno, 1) - 1
            if not 0 <= v < dims.d:
                raise FormatError(f"vertex {v + 1} out of range 1..{dims.d}", line=lineno, col=1)
            if v in vertex:
                raise FormatError(f"vertex {v + 1} given twice", line=lineno)
            vertex[v] = tuple(_parse_float(t, lineno, i + 2) for i, t in enumerate(toks[1:]))
        elif len(toks) == 2 + A * A:
            u = _parse_int(toks[0], lineno, 1) - 1
            v = _parse_int(toks[1], lineno, 2) - 1
            if not (0 <= u < dims.d and 0 <= v < dims.d) or u == v:
                raise FormatError(f"bad edge {u + 1} {v + 1}", line=lineno)
            vals = [_parse_float(t, lineno, i + 3) for i, t in enumerate(toks[2:])]
            J = [tuple(vals[i * A : (i + 1) * A]) for i in range(A)]
            if u > v:
                u, v = v, u
                J = [tuple(r) for r in np.asarray(J).T.tolist()]
            if (u, v) in edge:
                raise FormatError(f"edge {u + 1} {v + 1} given twice", line=lineno)
            edge[(u, v)] = tuple(J)
        else:
            raise FormatError(
                f"expected {1 + A} tokens (vertex line) or {2 + A * A} tokens (edge line), got {len(toks)}",
                line=lineno,
            )
    if dims is None:
        raise FormatError("empty model file", line=1)
    return PairwisePotentialSpec(dims, vertex, edge)


def dumps_model(spec: PairwisePotentialSpec) -> str:
    lines = [f"{spec.dims.d} {spec.dims.alphabet_size}"]
    for v, h in sorted(spec.vertex_potentials.items()):
        lines.append(" ".join([str(v + 1)] + [_fmt(x) for x in h]))
    for (u, v), J in sorted(spec.edge_potentials.items()):
        lines.append(" ".join([str(u + 1), str(v + 1)] + [_fmt(x) for row in J for x in row]))
    return "\n".join(lines) + "\n"


def import_model(path) -> PairwisePotentialSpec:
    return loads_model(Path(path).read_text())


def export_model(spec: PairwisePotentialSpec, path) -> None:
    Path(path).write_text(dumps_model(spec))


def graph_to_dot(G: Graph) -> str:
    lines = ["graph G {"]
    lines += [f"  {v + 1};" for v in range(G.dims.d)]
    lines += [f"  {u + 1} -- {v + 1};" for u, v in G.edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_schema(name: str) -> dict:
    return json.loads(resources.files("mrfselect").joinpath("schemas", f"{name}.schema.json").read_text())


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
