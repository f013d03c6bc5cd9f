"""Flat-file formats for graphs, instances, matchings, configs and reports.

* ``edges.tsv``: one ``u<TAB>v`` line per undirected edge, no header.
* ``nodes.csv``: header ``node_id,class,status[,team][,level]``; class is
  empty only for open positions.
* ``candidates.csv``: header ``candidate_id,class[,origin_node]``.
* ``fitness.csv``: header ``open_position_id,candidate_id,weight``.
* configs and reports: JSON with sorted keys; per-trial tables as CSV.

Class labels that are all integers are used as class indices directly;
otherwise they are numbered in lexicographic order. Extra columns of
``nodes.csv``/``candidates.csv`` can be merged into the class attribute.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FairAssignError, GraphError, IngestError
from .fairea import merge_attributes
from .netcore import FILLED, OPEN, AttributedGraph, Position
from .problem import AssignmentInstance, Candidate, feasibility_check, validate_instance

BAD_ID_CHARS = (",", "\t", "\n", "\r", '"')


@dataclass(frozen=True)
class FileBundle:
    nodes: Path
    edges: Path
    candidates: Path
    fitness: Path
    config: Path | None = None

    @classmethod
    def in_dir(cls, directory) -> "FileBundle":
        d = Path(directory)
        cfg = d / "config.json"
        return cls(d / "nodes.csv", d / "edges.tsv", d / "candidates.csv", d / "fitness.csv", cfg if cfg.exists() else None)


def _bad_id(value: str) -> str | None:
    if value == "":
        return "empty id"
    for ch in BAD_ID_CHARS:
        if ch in value:
            return f"id {value!r} contains {ch!r}"
    return None


def _check_ids(ids: Iterable[str]):
    for x in ids:
        problem = _bad_id(x)
        if problem:
            raise FairAssignError(f"cannot write {problem}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_text(path, text: str):
    Path(path).write_text(text, encoding="utf-8", newline="")


def _label(graph: AttributedGraph, cls: int | None) -> str:
    if cls is None:
        return ""
    return graph.class_labels[cls] if graph.class_labels is not None else str(cls)


# writing


def format_edges(graph: AttributedGraph) -> str:
    _check_ids(graph.node_ids)
    return "".join(f"{u}\t{v}\n" for u, v in graph.edges)


def format_nodes(graph: AttributedGraph) -> str:
    _check_ids(graph.node_ids)
    has_team = any(p.team is not None for p in graph.positions)
    has_level = any(p.level is not None for p in graph.positions)
    header = ["node_id", "class", "status"] + (["team"] if has_team else []) + (["level"] if has_level else [])
    lines = [",".join(header)]
    for p in graph.positions:
        row = [p.id, _label(graph, p.class_index), p.status]
        if has_team:
            row.append(p.team or "")
        if has_level:
            row.append(p.level or "")
        _check_ids(v for v in row[3:] if v)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def format_candidates(instance: AssignmentInstance) -> str:
    cands = instance.candidates
    has_origin = any(c.origin is not None for c in cands)
    lines = ["candidate_id,class" + (",origin_node" if has_origin else "")]
    _check_ids(c.id for c in cands)
    for c in cands:
        row = [c.id, _label(instance.graph, c.class_index)]
        if has_origin:
            row.append(c.origin or "")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def format_fitness(instance: AssignmentInstance) -> str:
    lines = ["open_position_id,candidate_id,weight"]
    lines += [f"{o},{c},{_fmt(w)}" for (o, c), w in sorted(instance.fitness.items())]
    return "\n".join(lines) + "\n"


def format_matching(matching: dict[str, str]) -> str:
    lines = ["open_position_id,candidate_id"] + [f"{o},{matching[o]}" for o in sorted(matching)]
    return "\n".join(lines) + "\n"


def write_graph(graph: AttributedGraph, nodes_path, edges_path):
    _write_text(nodes_path, format_nodes(graph))
    _write_text(edges_path, format_edges(graph))


def write_bundle(instance: AssignmentInstance, directory) -> FileBundle:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    bundle = FileBundle.in_dir(d)
    write_graph(instance.graph, bundle.nodes, bundle.edges)
    _write_text(bundle.candidates, format_candidates(instance))
    _write_text(bundle.fitness, format_fitness(instance))
    return bundle


def dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, data):
    _write_text(path, dump_json(data))


def format_table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        out = []
        for col in columns:
            v = row.get(col)
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(_fmt(v))
            else:
                out.append(str(v))
        writer.writerow(out)
    return buf.getvalue()


def trial_table(records) -> str:
    rows = [asdict(r) for r in records]
    columns = list(rows[0]) if rows else ["cell", "trial", "method"]
    return format_table(rows, columns)


# reading


class _Diagnostics:
    def __init__(self):
        self.problems: list[str] = []

    def add(self, where: str, message: str):
        self.problems.append(f"{where}: {message}")

    def raise_if_any(self):
        if self.problems:
            raise IngestError(self.problems)


def _read_csv(path, required: Sequence[str], diag: _Diagnostics) -> tuple[list[str], list[tuple[int, dict]]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        diag.add(str(path), f"cannot read: {exc}")
        return [], []
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None:
        diag.add(f"{path}:1", "missing header")
        return [], []
    header = [h.strip() for h in header]
    missing = [h for h in required if h not in header]
    if missing:
        diag.add(f"{path}:1", f"header lacks column(s) {', '.join(missing)}")
        return header, []
    rows = []
    for row in reader:
        line = reader.line_num
        if not row or all(not x.strip() for x in row):
            continue
        if len(row) != len(header):
            diag.add(f"{path}:{line}", f"expected {len(header)} fields, got {len(row)} (ids must not contain commas)")
            continue
        rows.append((line, {h: v.strip() for h, v in zip(header, row)}))
    return header, rows


def _read_edges(path, diag: _Diagnostics) -> list[tuple[int, str, str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        diag.add(str(path), f"cannot read: {exc}")
        return []
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            diag.add(f"{path}:{n}", "expected 'u<TAB>v'")
            continue
        out.append((n, parts[0], parts[1]))
    return out


def _class_table(labels: Iterable[str]) -> tuple[dict[str, int], int, tuple[str, ...] | None]:
    labels = set(labels)
    if labels and all(_is_int(x) for x in labels):
        values = {x: int(x) for x in labels}
        if min(values.values()) < 0:
            raise GraphError("negative class labels")
        return values, max(values.values()) + 1, None
    ordered = sorted(labels)
    return {x: i for i, x in enumerate(ordered)}, max(len(ordered), 1), tuple(ordered) if ordered else None


def _is_int(x: str) -> bool:
    try:
        return str(int(x)) == x
    except ValueError:
        return False


def _merged_classes(node_rows, cand_rows, merge: Sequence[str], diag: _Diagnostics, nodes_path, cand_path):
    """Replace the ``class`` value of every row with a merged-label string."""
    combos = []
    targets = []
    for path, rows, is_node in ((nodes_path, node_rows, True), (cand_path, cand_rows, False)):
        for line, row in rows:
            values = tuple(row.get(a, "") for a in merge)
            if is_node and row.get("status") == OPEN and all(v == "" for v in values):
                continue
            if any(v == "" for v in values):
                diag.add(f"{path}:{line}", f"missing value for merged attribute(s) {list(merge)}")
                continue
            combos.append(values)
            targets.append(row)
    if not combos:
        return None
    indices, legend = merge_attributes(combos)
    for row, idx in zip(targets, indices):
        row["class"] = str(idx)
    return legend


def _parse_graph(nodes_path, edges_path, diag: _Diagnostics, extra_labels=(), merge=None, cand_rows=None, cand_path=None):
    required = ["node_id", "status"] + ([] if merge else ["class"])
    header, node_rows = _read_csv(nodes_path, required, diag)
    if merge:
        missing = [a for a in merge if a not in header]
        if missing and header:
            diag.add(f"{nodes_path}:1", f"header lacks merged column(s) {', '.join(missing)}")
            return None, None, {}
        legend = _merged_classes(node_rows, cand_rows or [], merge, diag, nodes_path, cand_path)
    else:
        legend = None
    labels = [r["class"] for _, r in node_rows if r.get("class")] + list(extra_labels)
    if cand_rows is not None:
        labels += [r["class"] for _, r in cand_rows if r.get("class")]
    try:
        table, k, class_labels = _class_table(labels)
    except GraphError as exc:
        diag.add(str(nodes_path), str(exc))
        return None, None, {}
    if legend is not None:
        class_labels = None

    positions = []
    seen: dict[str, int] = {}
    for line, r in node_rows:
        where = f"{nodes_path}:{line}"
        nid = r["node_id"]
        bad = _bad_id(nid)
        if bad:
            diag.add(where, bad)
            continue
        if nid in seen:
            diag.add(where, f"duplicate node id {nid!r} (first on line {seen[nid]})")
            continue
        seen[nid] = line
        status = r["status"]
        if status not in (FILLED, OPEN):
            diag.add(where, f"status must be 'filled' or 'open', got {status!r}")
            continue
        cls = r.get("class", "")
        if cls == "" and status == FILLED:
            diag.add(where, f"filled node {nid!r} has no class")
            continue
        positions.append(
            Position(nid, status, table[cls] if cls else None, team=r.get("team") or None, level=r.get("level") or None)
        )

    edges = []
    edge_seen: dict[frozenset, int] = {}
    for line, u, v in _read_edges(edges_path, diag):
        where = f"{edges_path}:{line}"
        for x in (u, v):
            if x not in seen:
                diag.add(where, f"unknown node {x!r}")
        if u == v:
            diag.add(where, f"self-loop on {u!r}")
            continue
        key = frozenset((u, v))
        if key in edge_seen:
            diag.add(where, f"duplicate edge ({u!r}, {v!r}) (first on line {edge_seen[key]})")
            continue
        edge_seen[key] = line
        if u in seen and v in seen:
            edges.append((u, v))
    status = {p.id: p.status for p in positions}
    if diag.problems:
        return None, table, status
    try:
        return AttributedGraph(positions, edges, k, class_labels), table, status
    except GraphError as exc:
        diag.add(str(nodes_path), str(exc))
        return None, table, status


def read_graph(nodes_path, edges_path) -> AttributedGraph:
    diag = _Diagnostics()
    graph, _, _ = _parse_graph(nodes_path, edges_path, diag)
    diag.raise_if_any()
    return graph


def ingest(bundle: FileBundle, merge: Sequence[str] | None = None, check_feasible: bool = True) -> AssignmentInstance:
    """Parse, cross-check and validate a file bundle into an instance.

    Every problem found is collected before raising :class:`IngestError`,
    each prefixed with its file and line number where one applies.
    """
    diag = _Diagnostics()
    cand_required = ["candidate_id"] + ([] if merge else ["class"])
    _, cand_rows = _read_csv(bundle.candidates, cand_required, diag)
    graph, table, status = _parse_graph(bundle.nodes, bundle.edges, diag, merge=merge, cand_rows=cand_rows, cand_path=bundle.candidates)

    candidates = []
    seen: dict[str, int] = {}
    for line, r in cand_rows:
        where = f"{bundle.candidates}:{line}"
        cid = r["candidate_id"]
        bad = _bad_id(cid)
        if bad:
            diag.add(where, bad)
            continue
        if cid in seen:
            diag.add(where, f"duplicate candidate id {cid!r} (first on line {seen[cid]})")
            continue
        seen[cid] = line
        cls = r.get("class", "")
        if cls == "":
            diag.add(where, f"candidate {cid!r} has no class")
            continue
        origin = r.get("origin_node") or None
        if origin is not None and origin not in status:
            diag.add(where, f"unknown origin node {origin!r}")
            continue
        if table is not None and cls in table:
            candidates.append(Candidate(cid, table[cls], origin))

    _, fit_rows = _read_csv(bundle.fitness, ["open_position_id", "candidate_id", "weight"], diag)
    fitness = {}
    for line, r in fit_rows:
        where = f"{bundle.fitness}:{line}"
        o, c = r["open_position_id"], r["candidate_id"]
        try:
            w = float(r["weight"])
        except ValueError:
            diag.add(where, f"weight {r['weight']!r} is not a number")
            continue
        if not math.isfinite(w) or w <= 0 or w > 1:
            diag.add(where, f"weight {w!r} outside (0, 1]")
            continue
        if status.get(o) != OPEN:
            diag.add(where, f"{'not an open position' if o in status else 'unknown open position'} {o!r}")
            continue
        if c not in seen:
            diag.add(where, f"unknown candidate {c!r}")
            continue
        if (o, c) in fitness:
            diag.add(where, f"duplicate pair ({o!r}, {c!r})")
            continue
        fitness[(o, c)] = w
    diag.raise_if_any()

    instance = AssignmentInstance(graph, tuple(candidates), fitness)
    problems = validate_instance(instance)
    if problems:
        raise IngestError(problems)
    if check_feasible and not feasibility_check(instance):
        from .evaluation import _require_feasible

        _require_feasible(instance)
    return instance


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError([f"{path}: {exc}"]) from exc
