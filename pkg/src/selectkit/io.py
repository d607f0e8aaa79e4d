"""File formats: binary embeddings, line-delimited token stats, JSON selections.

All three formats round-trip exactly (write-then-read reproduces the
source values bit for bit) and every read validates domain invariants
eagerly, naming the offending record and step.

Embeddings are binary because they dominate storage; token stats are
line-delimited JSON so they stay human-inspectable; selections are a
single JSON document carrying the strategy, its parameters, and content
digests of the inputs for reproducibility audits.

Layout of the embedding file (all integers little-endian)::

    magic   4 bytes  "SKEM"
    version u32      currently 1
    n       u64      rows
    d       u32      columns
    dtype   u8       1 = float32, 2 = float64
    plen    u32      provenance byte length
    prov    plen bytes of UTF-8
    payload n * d * itemsize bytes, row-major

The provenance string names the upstream feature extractor.  It is
required because RBF kernel widths are only meaningful relative to the
embedding scale; writing an empty provenance demands an explicit
override.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .core import EmbeddingMatrix, SelectionResult, TokenStatsSequence
from .errors import (
    InvariantViolation,
    MagicMismatch,
    TruncatedPayload,
    ValidationError,
)

__all__ = [
    "file_digest",
    "read_embeddings",
    "read_selection",
    "read_token_stats",
    "write_embeddings",
    "write_selection",
    "write_token_stats",
]

MAGIC = b"SKEM"
VERSION = 1
_HEADER = struct.Struct("<4sIQIB")
_PLEN = struct.Struct("<I")
_DTYPE_TAGS = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_TAG_FOR = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}


def write_embeddings(path, matrix, provenance: str | None = None, *,
                     allow_empty_provenance: bool = False, dtype=None):
    """Write an embedding pool; ``matrix`` may be an EmbeddingMatrix or array."""
    emb = matrix if isinstance(matrix, EmbeddingMatrix) else EmbeddingMatrix(matrix)
    if provenance is None:
        provenance = emb.provenance
    if provenance == "" and not allow_empty_provenance:
        raise ValidationError(
            "embedding provenance is required (kernel widths depend on the "
            "extractor's scale); pass allow_empty_provenance=True to override"
        )
    arr = emb.data if dtype is None else emb.data.astype(dtype)
    tag = _TAG_FOR.get(arr.dtype)
    if tag is None:
        raise ValidationError(f"unsupported embedding dtype {arr.dtype}")
    prov = provenance.encode("utf-8")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, emb.n, emb.d, tag))
        f.write(_PLEN.pack(len(prov)))
        f.write(prov)
        f.write(np.ascontiguousarray(arr, dtype=arr.dtype.newbyteorder("<")).tobytes())


def read_embeddings(path) -> EmbeddingMatrix:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < _HEADER.size + _PLEN.size:
        raise TruncatedPayload(f"file is {len(blob)} bytes, smaller than any valid header")
    magic, version, n, d, tag = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise MagicMismatch(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise MagicMismatch(f"unsupported version {version}, expected {VERSION}")
    if tag not in _DTYPE_TAGS:
        raise InvariantViolation(f"unknown dtype tag {tag}")
    off = _HEADER.size
    (plen,) = _PLEN.unpack_from(blob, off)
    off += _PLEN.size
    if len(blob) < off + plen:
        raise TruncatedPayload("file ends inside the provenance string")
    provenance = blob[off:off + plen].decode("utf-8")
    off += plen
    dt = _DTYPE_TAGS[tag]
    expected = n * d * dt.itemsize
    actual = len(blob) - off
    if actual != expected:
        raise TruncatedPayload(
            f"payload is {actual} bytes, header promises n*d*itemsize = {expected}"
        )
    if n < 1 or d < 1:
        raise InvariantViolation(f"embedding file declares n={n}, d={d}; both must be >= 1")
    data = np.frombuffer(blob, dtype=dt, count=n * d, offset=off).reshape(n, d).copy()
    return EmbeddingMatrix(data, provenance=provenance)


def write_token_stats(path, stats):
    """One JSON record per prompt: {"id": i, "steps": [[entropy, top1, top2, chosen], ...]}."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, seq in enumerate(stats):
            if not isinstance(seq, TokenStatsSequence):
                seq = TokenStatsSequence(seq)
            steps = [[s.entropy, s.top1_prob, s.top2_prob, s.chosen_prob] for s in seq.steps]
            f.write(json.dumps({"id": i, "steps": steps}, separators=(",", ":")))
            f.write("\n")


def read_token_stats(path) -> list[TokenStatsSequence]:
    """Load and validate token stats; ids must be 0..n-1 exactly once, in order."""
    out: list[TokenStatsSequence] = []
    with open(path, "r", encoding="utf-8") as f:
        expected_id = 0
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvariantViolation(f"line {lineno}: not valid JSON ({exc})") from None
            rid = rec.get("id")
            if rid != expected_id:
                raise InvariantViolation(
                    f"line {lineno}: id {rid!r}, expected {expected_id} (ids must be "
                    f"0..n-1 in order)", record_id=rid,
                )
            try:
                seq = TokenStatsSequence(rec.get("steps", []))
            except ValidationError as exc:
                raise InvariantViolation(f"record {rid}: {exc}", record_id=rid) from None
            problem = seq.first_violation(record_id=rid)
            if problem is not None:
                raise InvariantViolation(problem, record_id=rid)
            out.append(seq)
            expected_id += 1
    if not out:
        raise InvariantViolation("token stats file holds no records")
    return out


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def write_selection(path, result: SelectionResult, *, strategy: str, params: dict,
                    input_digests: dict | None = None):
    """Persist a selection with everything needed to audit and reproduce it."""
    result.check(params.get("n"))
    doc = {
        "strategy": strategy,
        "params": params,
        "indices": list(result.indices),
        "objective_trace": list(result.objective_trace),
        "gains": list(result.gains),
        "input_digests": input_digests or {},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def read_selection(path) -> tuple[SelectionResult, dict]:
    """Load a selection file; returns (result, full document)."""
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    for key in ("strategy", "params", "indices"):
        if key not in doc:
            raise InvariantViolation(f"selection file missing {key!r}")
    result = SelectionResult(
        indices=[int(i) for i in doc["indices"]],
        objective_trace=[float(v) for v in doc.get("objective_trace", [])],
        gains=[float(v) for v in doc.get("gains", [])],
    )
    try:
        result.check(doc["params"].get("n"))
    except ValidationError as exc:
        raise InvariantViolation(str(exc)) from None
    return result, doc
