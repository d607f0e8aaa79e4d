"""Pairwise similarity and distance primitives, evaluated blockwise.

A full n x n kernel is never materialized: every consumer works from
single columns (one candidate against the whole pool), produced in row
blocks via the norm expansion ||f_i - f_j||^2 = ||f_i||^2 + ||f_j||^2
- 2 f_i . f_j with cached squared norms.  Tiny negative squared
distances from cancellation are clamped to zero before use.

All arithmetic runs in float64 regardless of the stored embedding dtype.
Column evaluation is pure, so callers may request columns for distinct
candidates concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmbeddingMatrix, KernelSpec
from .errors import DimensionMismatch, ZeroNormRow

__all__ = [
    "DEFAULT_BLOCK_ROWS",
    "SimilarityColumn",
    "column_sums",
    "cosine_clipped_similarity",
    "pairwise_sq_distance_column",
    "rbf_similarity",
    "similarity_column",
]

# Rows per block when streaming a column over the pool.
DEFAULT_BLOCK_ROWS = 8192

# Cap on the temporary (block_rows x n) tile used by column_sums, in bytes.
_TILE_BYTES = 256 * 2**20


@dataclass(frozen=True)
class SimilarityColumn:
    """Similarity of candidate j against every pool member: values[i] = w_ij."""

    j: int
    values: np.ndarray


def _as_f64_vector(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64).ravel()


def rbf_similarity(fi, fj, gamma: float) -> float:
    """exp(-||fi - fj||^2 / gamma), in (0, 1]."""
    spec = KernelSpec.rbf(gamma)  # validates gamma > 0
    a, b = _as_f64_vector(fi), _as_f64_vector(fj)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dims {a.shape[0]} vs {b.shape[0]}")
    d2 = a @ a + b @ b - 2.0 * (a @ b)
    return float(np.exp(-max(d2, 0.0) / spec.gamma))


def cosine_clipped_similarity(fi, fj) -> float:
    """max(0, cos(fi, fj)), in [0, 1]; rejects zero-norm rows."""
    a, b = _as_f64_vector(fi), _as_f64_vector(fj)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dims {a.shape[0]} vs {b.shape[0]}")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormRow("cosine similarity undefined for a zero-norm vector")
    return float(min(max((a @ b) / (na * nb), 0.0), 1.0))


def _check_index(emb: EmbeddingMatrix, j: int):
    if not 0 <= j < emb.n:
        raise IndexError(f"candidate index {j} out of range for pool of {emb.n}")


def pairwise_sq_distance_column(emb: EmbeddingMatrix, j: int, block_rows: int | None = None) -> np.ndarray:
    """||f_i - f_j||^2 for all i, clamped at zero; result is block-size independent."""
    _check_index(emb, j)
    block = block_rows or DEFAULT_BLOCK_ROWS
    data, rsn = emb.data64, emb.row_sq_norms
    fj = data[j]
    out = np.empty(emb.n, dtype=np.float64)
    for a in range(0, emb.n, block):
        b = min(a + block, emb.n)
        d2 = rsn[a:b] + rsn[j] - 2.0 * (data[a:b] @ fj)
        np.maximum(d2, 0.0, out=d2)
        out[a:b] = d2
    out[j] = 0.0
    return out


def _cosine_norms(emb: EmbeddingMatrix) -> np.ndarray:
    norms = np.sqrt(emb.row_sq_norms)
    if (norms == 0.0).any():
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise ZeroNormRow(f"row {bad} has zero norm; cosine kernel undefined")
    return norms


def similarity_column(emb: EmbeddingMatrix, j: int, spec: KernelSpec, block_rows: int | None = None) -> SimilarityColumn:
    """One kernel column w_.j, self-similarity pinned to exactly 1."""
    _check_index(emb, j)
    if spec.kind == KernelSpec.RBF:
        vals = pairwise_sq_distance_column(emb, j, block_rows)
        vals /= -spec.gamma
        np.exp(vals, out=vals)
    else:
        block = block_rows or DEFAULT_BLOCK_ROWS
        data = emb.data64
        norms = _cosine_norms(emb)
        fj = data[j]
        vals = np.empty(emb.n, dtype=np.float64)
        for a in range(0, emb.n, block):
            b = min(a + block, emb.n)
            c = (data[a:b] @ fj) / (norms[a:b] * norms[j])
            vals[a:b] = np.clip(c, 0.0, 1.0)
    vals[j] = 1.0
    return SimilarityColumn(j=j, values=vals)


def column_sums(emb: EmbeddingMatrix, spec: KernelSpec, block_rows: int | None = None) -> np.ndarray:
    """sum_i w_ij for every candidate j, via (block x n) tiles.

    This is the facility-location gain of each singleton.  Tile GEMMs do
    not reproduce the per-column evaluation of similarity_column bitwise,
    so callers needing exact agreement with column evaluations must treat
    these sums as approximations (see the lazy greedy's slack handling).
    """
    n = emb.n
    data = emb.data64
    block = block_rows or max(16, min(DEFAULT_BLOCK_ROWS, _TILE_BYTES // (8 * n)))
    sums = np.zeros(n, dtype=np.float64)
    if spec.kind == KernelSpec.RBF:
        rsn = emb.row_sq_norms
        for a in range(0, n, block):
            b = min(a + block, n)
            tile = data[a:b] @ data.T
            tile *= -2.0
            tile += rsn[np.newaxis, :]
            tile += rsn[a:b, np.newaxis]
            np.maximum(tile, 0.0, out=tile)
            tile /= -spec.gamma
            np.exp(tile, out=tile)
            sums += tile.sum(axis=0)
    else:
        norms = _cosine_norms(emb)
        unit = data / norms[:, np.newaxis]
        for a in range(0, n, block):
            b = min(a + block, n)
            tile = unit[a:b] @ unit.T
            np.clip(tile, 0.0, 1.0, out=tile)
            sums += tile.sum(axis=0)
    return sums
