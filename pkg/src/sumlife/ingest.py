"""Streaming N-Triples / N-Quads ingestion into an interned snapshot graph.

A snapshot is one file or one directory of files (plain or ``.gz``).  Parsing
is line-local and never aborts on bad statements: malformed lines are counted
and skipped.  Duplicate triples are detected during the load with per-subject
hash sets, so memory is bounded by the number of unique edges.

Terms are interned into a dense, append-only :class:`TermTable`.  Blank node
labels have document scope, so each file in a directory snapshot gets its own
blank namespace.  Literals are interned by their full lexical token (including
datatype/language suffix) and behave as sink vertices.

The finished :class:`SnapshotGraph` is immutable: edges live in CSR arrays
keyed by vertex *position* (0..n-1), with each vertex's out-edges sorted by
(predicate id, object id) and free of duplicates.
"""

from __future__ import annotations

import gzip
import math
import re
import zlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import IngestError

RDF_TYPE_IRI = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

IRI = "iri"
BLANK = "blank"
LITERAL = "literal"

_IRI_PAT = r"<[^<>\"{}|^`\\\x00-\x20]*>"
_BLANK_PAT = r"_:[A-Za-z0-9][A-Za-z0-9_.\-]*"
_LITERAL_PAT = r'"(?:[^"\\]|\\.)*"(?:\^\^<[^<>"\s]*>|@[A-Za-z]+(?:-[A-Za-z0-9]+)*)?'

_STATEMENT_RE = re.compile(
    rf"^({_IRI_PAT}|{_BLANK_PAT})\s+({_IRI_PAT})\s+"
    rf"({_IRI_PAT}|{_BLANK_PAT}|{_LITERAL_PAT})"
    rf"(?:\s+({_IRI_PAT}|{_BLANK_PAT}))?\s*\.\s*(?:#.*)?$"
)


@dataclass(frozen=True)
class Triple:
    """One statement, as term ids into the snapshot's TermTable."""

    subject: int
    predicate: int
    object: int


@dataclass(frozen=True)
class Skip:
    """A non-statement line and why it was skipped."""

    reason: str  # "comment" | "blank" | "malformed"


class TermTable:
    """Append-only intern table mapping (kind, lexical form) <-> dense id."""

    __slots__ = ("kinds", "lexicals", "_index")

    def __init__(self) -> None:
        self.kinds: list[str] = []
        self.lexicals: list[str] = []
        self._index: dict[tuple[str, str], int] = {}

    def __len__(self) -> int:
        return len(self.lexicals)

    def intern(self, kind: str, lexical: str) -> int:
        key = (kind, lexical)
        tid = self._index.get(key)
        if tid is None:
            tid = len(self.lexicals)
            self.kinds.append(kind)
            self.lexicals.append(lexical)
            self._index[key] = tid
        return tid

    def lookup(self, kind: str, lexical: str) -> Optional[int]:
        return self._index.get((kind, lexical))

    def lexical(self, term_id: int) -> str:
        return self.lexicals[term_id]

    def kind(self, term_id: int) -> str:
        return self.kinds[term_id]


def _intern_token(token: str, table: TermTable, blank_scope: str) -> int:
    if token[0] == "<":
        return table.intern(IRI, token[1:-1])
    if token[0] == "_":
        label = token[2:]
        return table.intern(BLANK, f"_:{blank_scope}.{label}" if blank_scope else token)
    return table.intern(LITERAL, token)


def parse_line(line: str, table: TermTable, blank_scope: str = "") -> Triple | Skip:
    """Parse one physical N-Triples/N-Quads line.

    Returns a :class:`Triple` (context term of quads is discarded) or a
    :class:`Skip` with reason ``comment``, ``blank`` or ``malformed``.
    Never raises on bad input.
    """
    stripped = line.strip()
    if not stripped:
        return Skip("blank")
    if stripped.startswith("#"):
        return Skip("comment")
    m = _STATEMENT_RE.match(stripped)
    if m is None:
        return Skip("malformed")
    s_tok, p_tok, o_tok = m.group(1), m.group(2), m.group(3)
    return Triple(
        _intern_token(s_tok, table, blank_scope),
        _intern_token(p_tok, table, blank_scope),
        _intern_token(o_tok, table, blank_scope),
    )


class SnapshotGraph:
    """Immutable interned multigraph for one timestamped snapshot.

    Vertices are the term ids appearing in subject or object position; edge
    endpoints are stored as positions into the sorted ``vertex_ids`` array.
    rdf:type edges are kept but flagged so downstream consumers can skip them.
    """

    __slots__ = (
        "timestamp",
        "terms",
        "vertex_ids",
        "indptr",
        "edge_pred",
        "edge_obj",
        "edge_is_type",
        "predicates",
        "edge_count",
        "skip_reasons",
    )

    def __init__(
        self,
        timestamp: str,
        terms: TermTable,
        vertex_ids: np.ndarray,
        indptr: np.ndarray,
        edge_pred: np.ndarray,
        edge_obj: np.ndarray,
        edge_is_type: np.ndarray,
        skip_reasons: Counter | None = None,
    ):
        self.timestamp = timestamp
        self.terms = terms
        self.vertex_ids = vertex_ids
        self.indptr = indptr
        self.edge_pred = edge_pred
        self.edge_obj = edge_obj
        self.edge_is_type = edge_is_type
        self.predicates = frozenset(int(p) for p in np.unique(edge_pred)) if len(edge_pred) else frozenset()
        self.edge_count = int(len(edge_pred))
        self.skip_reasons = skip_reasons if skip_reasons is not None else Counter()

    # -- basic accessors ---------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_ids)

    @property
    def skipped_lines(self) -> int:
        """Count of malformed plus duplicate input lines."""
        return self.skip_reasons.get("malformed", 0) + self.skip_reasons.get("duplicate", 0)

    def position(self, term_id: int) -> int:
        """Dense position of a vertex term id; raises KeyError if absent."""
        i = int(np.searchsorted(self.vertex_ids, term_id))
        if i >= len(self.vertex_ids) or self.vertex_ids[i] != term_id:
            raise KeyError(f"term id {term_id} is not a vertex")
        return i

    def position_of(self, lexical: str, kind: str = IRI) -> int:
        tid = self.terms.lookup(kind, lexical)
        if tid is None:
            raise KeyError(f"unknown term {lexical!r}")
        return self.position(tid)

    def vertex_lexical(self, position: int) -> str:
        return self.terms.lexical(int(self.vertex_ids[position]))

    def out_pairs(self, position: int) -> list[tuple[int, int]]:
        """Sorted, duplicate-free (predicate id, object term id) pairs."""
        lo, hi = int(self.indptr[position]), int(self.indptr[position + 1])
        return [
            (int(self.edge_pred[e]), int(self.vertex_ids[self.edge_obj[e]]))
            for e in range(lo, hi)
        ]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def in_degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        if len(self.edge_obj):
            np.add.at(deg, self.edge_obj, 1)
        return deg

    def edge_sources(self) -> np.ndarray:
        """Per-edge source positions expanded from the CSR index."""
        return np.repeat(
            np.arange(self.num_vertices, dtype=np.int64), np.diff(self.indptr)
        )

    def considered_mask(self, include_rdf_types: bool = False) -> np.ndarray:
        """Edge mask used by summarization/features (drops rdf:type by default)."""
        if include_rdf_types:
            return np.ones(self.edge_count, dtype=bool)
        return ~self.edge_is_type

    # -- construction ------------------------------------------------------

    @classmethod
    def from_term_edges(
        cls,
        timestamp: str,
        terms: TermTable,
        subjects: np.ndarray,
        preds: np.ndarray,
        objects: np.ndarray,
        skip_reasons: Counter | None = None,
        count_duplicates: bool = False,
    ) -> "SnapshotGraph":
        """Build a snapshot from parallel term-id arrays (deduplicates)."""
        skips = skip_reasons if skip_reasons is not None else Counter()
        subjects = np.asarray(subjects, dtype=np.int64)
        preds = np.asarray(preds, dtype=np.int64)
        objects = np.asarray(objects, dtype=np.int64)
        vertex_ids = np.unique(np.concatenate([subjects, objects])) if len(subjects) else np.empty(0, np.int64)
        if len(subjects):
            order = np.lexsort((objects, preds, subjects))
            s, p, o = subjects[order], preds[order], objects[order]
            keep = np.ones(len(s), dtype=bool)
            keep[1:] = (s[1:] != s[:-1]) | (p[1:] != p[:-1]) | (o[1:] != o[:-1])
            if count_duplicates:
                skips["duplicate"] += int(len(s) - keep.sum())
            s, p, o = s[keep], p[keep], o[keep]
            src_pos = np.searchsorted(vertex_ids, s)
            obj_pos = np.searchsorted(vertex_ids, o)
            indptr = np.zeros(len(vertex_ids) + 1, dtype=np.int64)
            np.add.at(indptr, src_pos + 1, 1)
            np.cumsum(indptr, out=indptr)
        else:
            p = np.empty(0, np.int64)
            obj_pos = np.empty(0, np.int64)
            indptr = np.zeros(len(vertex_ids) + 1, dtype=np.int64)
        type_id = terms.lookup(IRI, RDF_TYPE_IRI)
        is_type = (p == type_id) if type_id is not None else np.zeros(len(p), dtype=bool)
        return cls(timestamp, terms, vertex_ids, indptr, p, obj_pos, is_type, skips)


def build_snapshot(
    timestamp: str, triples: Iterable[tuple[str, str, str]]
) -> SnapshotGraph:
    """Convenience builder from string triples.

    Subjects and predicates are IRIs; objects are IRIs unless they start with
    ``"`` (literal token) or ``_:`` (blank label).
    """
    table = TermTable()
    ss, ps, os_ = [], [], []
    for s, p, o in triples:
        ss.append(table.intern(IRI, s))
        ps.append(table.intern(IRI, p))
        if o.startswith('"'):
            os_.append(table.intern(LITERAL, o))
        elif o.startswith("_:"):
            os_.append(table.intern(BLANK, o))
        else:
            os_.append(table.intern(IRI, o))
    return SnapshotGraph.from_term_edges(
        timestamp, table, np.array(ss, np.int64), np.array(ps, np.int64), np.array(os_, np.int64)
    )


def _snapshot_files(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file())
        if not files:
            raise IngestError(f"{path}: snapshot directory is empty")
        return files
    return [path]


def _iter_lines(path: Path) -> Iterator[tuple[bytes, int]]:
    """Yield (raw line, byte offset of line start) from a plain or gzip file."""
    opener = gzip.open if path.name.endswith(".gz") else open
    offset = 0
    with opener(path, "rb") as fh:
        for raw in fh:
            yield raw, offset
            offset += len(raw)


def load_snapshot(path: str | Path, timestamp: str) -> SnapshotGraph:
    """Load, clean and deduplicate one snapshot (file or directory)."""
    path = Path(path)
    table = TermTable()
    adj: dict[int, set[tuple[int, int]]] = {}
    object_ids: set[int] = set()
    skips: Counter = Counter()
    offset = 0
    current: Path | None = None
    try:
        for file_index, file_path in enumerate(_snapshot_files(path)):
            current = file_path
            scope = f"f{file_index}"
            for raw, offset in _iter_lines(file_path):
                parsed = parse_line(raw.decode("utf-8", errors="replace"), table, scope)
                if isinstance(parsed, Skip):
                    skips[parsed.reason] += 1
                    continue
                pairs = adj.setdefault(parsed.subject, set())
                pair = (parsed.predicate, parsed.object)
                if pair in pairs:
                    skips["duplicate"] += 1
                else:
                    pairs.add(pair)
                    object_ids.add(parsed.object)
    except (OSError, EOFError, zlib.error) as exc:
        raise IngestError(f"{current}: read failed at byte offset {offset}: {exc}") from exc

    n_edges = sum(len(v) for v in adj.values())
    subjects = np.empty(n_edges, dtype=np.int64)
    preds = np.empty(n_edges, dtype=np.int64)
    objects = np.empty(n_edges, dtype=np.int64)
    i = 0
    for s, pairs in adj.items():
        for p, o in pairs:
            subjects[i] = s
            preds[i] = p
            objects[i] = o
            i += 1
    return SnapshotGraph.from_term_edges(timestamp, table, subjects, preds, objects, skips)


def filter_high_degree(
    g: SnapshotGraph, cap: float | int | None, mode: str = "total"
) -> SnapshotGraph:
    """Remove every vertex whose degree exceeds ``cap``, with incident edges.

    Single pass, no cascading re-check.  ``mode`` selects which degree is
    capped: "total" (in+out, the default), "out" or "in".  ``cap`` of None or
    infinity is the identity.
    """
    if cap is None or (isinstance(cap, float) and math.isinf(cap)):
        return g
    if cap < 1:
        raise ValueError("degree cap must be >= 1")
    if mode not in ("total", "out", "in"):
        raise ValueError(f"unknown degree mode {mode!r}")
    out_deg = g.out_degrees()
    in_deg = g.in_degrees()
    degree = {"total": out_deg + in_deg, "out": out_deg, "in": in_deg}[mode]
    keep_vertex = degree <= cap
    if keep_vertex.all():
        return g
    src = g.edge_sources()
    keep_edge = keep_vertex[src] & keep_vertex[g.edge_obj]
    kept_ids = g.vertex_ids[keep_vertex]
    new = SnapshotGraph.from_term_edges(
        g.timestamp,
        g.terms,
        g.vertex_ids[src[keep_edge]],
        g.edge_pred[keep_edge],
        g.vertex_ids[g.edge_obj[keep_edge]],
        Counter(g.skip_reasons),
    )
    # keep surviving isolated vertices that from_term_edges cannot see
    if len(new.vertex_ids) != len(kept_ids):
        return _with_vertices(new, kept_ids)
    return new


def _with_vertices(g: SnapshotGraph, vertex_ids: np.ndarray) -> SnapshotGraph:
    """Rebuild ``g`` over a superset vertex id array (adds isolated vertices).

    Position mappings are monotone in term id, so the existing edge order
    stays sorted and no resort is needed.
    """
    old_src = g.edge_sources()
    src_pos = np.searchsorted(vertex_ids, g.vertex_ids[old_src]) if len(old_src) else old_src
    obj_pos = np.searchsorted(vertex_ids, g.vertex_ids[g.edge_obj]) if len(g.edge_obj) else g.edge_obj
    indptr = np.zeros(len(vertex_ids) + 1, dtype=np.int64)
    np.add.at(indptr, src_pos + 1, 1)
    np.cumsum(indptr, out=indptr)
    return SnapshotGraph(
        g.timestamp,
        g.terms,
        vertex_ids,
        indptr,
        g.edge_pred.copy(),
        obj_pos.astype(np.int64),
        g.edge_is_type.copy(),
        Counter(g.skip_reasons),
    )
