"""File formats: matrix CSV/PGM exports, edge lists, partitions, run files.

Every text artifact carries a `# seed=N` header comment so a run can be
reproduced from its outputs alone (JSON-lines files are the exception: the
format has no comment syntax).
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParseError
from .partition import Partition, Subgraph
from .sampling import SparseGraph


def _seed_comment(seed) -> str:
    return f"# seed={seed}\n"


def write_matrix_csv(path, matrix: np.ndarray, seed=0) -> None:
    """One row per line, 6-decimal fixed point."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_seed_comment(seed))
        for row in np.asarray(matrix, dtype=np.float64):
            fh.write(",".join(f"{v:.6f}" for v in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                raise ParseError(path, line_no, f"bad matrix row: {exc}") from exc
    return np.array(rows, dtype=np.float64)


def write_matrix_pgm(path, matrix: np.ndarray, seed=0) -> None:
    """Binary 8-bit PGM heatmap with gray = round(255 * value)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    gray = np.rint(np.clip(matrix, 0.0, 1.0) * 255).astype(np.uint8)
    height, width = gray.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n")
        fh.write(_seed_comment(seed).encode("ascii"))
        fh.write(f"{width} {height}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def read_matrix_pgm(path) -> np.ndarray:
    """Gray levels back as floats in [0, 1] (round-trip of write_matrix_pgm)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ParseError(path, 1, "not a binary PGM file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    width, height, maxval = fields
    pos += 1
    gray = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return gray.reshape(height, width).astype(np.float64) / maxval


def write_edge_list(path, graph: SparseGraph) -> None:
    """Sorted `i j` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_seed_comment(graph.seed))
        fh.write(f"# num_nodes={graph.num_nodes}\n")
        for i, j in graph.sorted_edges():
            fh.write(f"{i} {j}\n")


def read_edge_list(path) -> SparseGraph:
    num_nodes = None
    seed = 0
    edges = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# num_nodes="):
                    num_nodes = int(line.split("=", 1)[1])
                elif line.startswith("# seed="):
                    seed = int(line.split("=", 1)[1])
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(path, line_no, "expected `i j`")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from exc
            edges.add((min(i, j), max(i, j)))
    if num_nodes is None:
        num_nodes = 1 + max((j for _, j in edges), default=-1)
    return SparseGraph(num_nodes=num_nodes, edges=frozenset(edges), seed=seed)


def write_adjacency_pgm(path, graph: SparseGraph, seed=None) -> None:
    """255 where an edge exists, 0 elsewhere."""
    adj = np.zeros((graph.num_nodes, graph.num_nodes), dtype=np.float64)
    for i, j in graph.edges:
        adj[i, j] = adj[j, i] = 1.0
    write_matrix_pgm(path, adj, seed=graph.seed if seed is None else seed)


def write_partition_jsonl(path, part: Partition) -> None:
    """One circle per line: {"rank": r, "center": c, "members": [...]}."""
    with open(path, "w", encoding="utf-8") as fh:
        for sg in part.subgraphs:
            fh.write(
                json.dumps(
                    {"rank": sg.rank, "center": sg.central_node, "members": list(sg.members)}
                )
            )
            fh.write("\n")


def read_partition_jsonl(path, mode: str, k: int, cap: int) -> Partition:
    subgraphs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                subgraphs.append(
                    Subgraph(
                        central_node=rec["center"],
                        members=tuple(rec["members"]),
                        rank=rec["rank"],
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise ParseError(path, line_no, str(exc)) from exc
    return Partition(mode=mode, subgraphs=tuple(subgraphs), k=k, cap=cap)


def write_csv_rows(path, header: str, rows, seed=0) -> None:
    """Small CSV writer shared by the stats/metrics/loss artifacts."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_seed_comment(seed))
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row))
            fh.write("\n")
