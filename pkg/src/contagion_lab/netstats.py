"""Topology diagnostics for the interbank exposure graph.

Works on binary adjacency views of the weighted exposure matrix: the
directed borrowing matrix, its transpose (the lending view), and the
undirected union. Provides degree CCDFs, degree assortativity, local
clustering, and the short directed cycle / triad motif censuses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .balance import ExposureMatrix


@dataclass(frozen=True)
class AdjacencyViews:
    """Binary adjacency matrices derived from the exposures.

    x_lia[i, j] is True iff bank i borrowed from bank j; x_asset is its
    transpose; x_und is the symmetric union with a zero diagonal.
    """

    x_lia: np.ndarray
    x_asset: np.ndarray
    x_und: np.ndarray

    @classmethod
    def from_exposures(cls, exposures: ExposureMatrix) -> "AdjacencyViews":
        n = exposures.n
        x_lia = np.zeros((n, n), dtype=bool)
        for (i, j) in exposures.entries:
            x_lia[i, j] = True
        return cls.from_directed(x_lia)

    @classmethod
    def from_directed(cls, x_lia: np.ndarray) -> "AdjacencyViews":
        x_lia = np.asarray(x_lia, dtype=bool)
        np.fill_diagonal(x_lia, False)
        x_asset = x_lia.T.copy()
        return cls(x_lia=x_lia, x_asset=x_asset, x_und=x_lia | x_asset)


@dataclass(frozen=True)
class CcdfSeries:
    """Empirical P(X > value) at each observed value, in increasing value order."""

    points: tuple[tuple[float, float], ...]


def _empirical_ccdf(values: np.ndarray) -> CcdfSeries:
    values = np.sort(np.asarray(values))
    n = len(values)
    if n == 0:
        return CcdfSeries(points=())
    uniq, first_idx = np.unique(values, return_index=True)
    # P(X > v) = fraction strictly above v; the last unique value gets 0
    counts_le = np.append(first_idx[1:], n)
    probs = 1.0 - counts_le / n
    return CcdfSeries(points=tuple((float(v), float(p)) for v, p in zip(uniq, probs)))


def degree_ccdfs(views: AdjacencyViews) -> tuple[CcdfSeries, CcdfSeries, CcdfSeries]:
    """CCDFs of in-degree (lending), out-degree (borrowing) and undirected degree."""
    k_in = views.x_asset.sum(axis=1)
    k_out = views.x_lia.sum(axis=1)
    k_und = views.x_und.sum(axis=1)
    return _empirical_ccdf(k_in), _empirical_ccdf(k_out), _empirical_ccdf(k_und)


def assortativity(views: AdjacencyViews) -> float | None:
    """Degree correlation across undirected links.

    Each link contributes both (k, k') and (k', k) to the link averages.
    Returns None when the denominator vanishes (all endpoint degrees equal).
    """
    k = views.x_und.sum(axis=1).astype(np.float64)
    ii, jj = np.nonzero(np.triu(views.x_und, k=1))
    if len(ii) == 0:
        return None
    ka = np.concatenate([k[ii], k[jj]])
    kb = np.concatenate([k[jj], k[ii]])
    mean_prod = float(np.mean(ka * kb))
    mean_sum_half = float(np.mean((ka + kb) / 2.0))
    mean_sq_half = float(np.mean((ka**2 + kb**2) / 2.0))
    denom = mean_sq_half - mean_sum_half**2
    if denom == 0.0:
        return None
    return (mean_prod - mean_sum_half**2) / denom


def clustering(views: AdjacencyViews) -> tuple[np.ndarray, float]:
    """Local clustering per node on the undirected view, plus the plain average.

    Nodes of degree < 2 contribute 0 to the average rather than being
    dropped, which weights the mean toward weakly connected nodes.
    """
    und = views.x_und
    n = und.shape[0]
    coeffs = np.zeros(n, dtype=np.float64)
    if n == 0:
        return coeffs, 0.0
    degrees = und.sum(axis=1)
    for i in range(n):
        d = int(degrees[i])
        if d < 2:
            continue
        nbrs = np.flatnonzero(und[i])
        links = int(und[np.ix_(nbrs, nbrs)].sum()) // 2
        coeffs[i] = links / (d * (d - 1) / 2)
    return coeffs, float(coeffs.mean())


def directed_cycle_census(views: AdjacencyViews, max_len: int = 5) -> dict[int, int]:
    """Count simple directed cycles of each length 3..max_len on the borrowing view.

    Each cycle is counted once: the DFS roots every cycle at its
    minimum-index vertex and only walks through higher-numbered nodes.
    Before each root's walk, nodes that cannot reach the root within the
    remaining depth (reverse BFS) are pruned.
    """
    if max_len not in (3, 4, 5):
        raise ValueError(f"max_len must be 3, 4 or 5, got {max_len}")
    adj = views.x_lia
    n = adj.shape[0]
    out_nbrs = [np.flatnonzero(adj[v]) for v in range(n)]
    in_nbrs = [np.flatnonzero(adj[:, v]) for v in range(n)]
    counts = {length: 0 for length in range(3, max_len + 1)}

    for root in range(n):
        # dist_to_root[v]: shortest path length v -> root using nodes > root
        dist_to_root = np.full(n, n + 1, dtype=np.int64)
        dist_to_root[root] = 0
        frontier = [root]
        for d in range(1, max_len):
            nxt = []
            for v in frontier:
                for u in in_nbrs[v]:
                    if u > root and dist_to_root[u] > d:
                        dist_to_root[u] = d
                        nxt.append(u)
            frontier = nxt
            if not frontier:
                break

        # iterative DFS over paths root -> v1 -> ... (all nodes > root)
        on_path = np.zeros(n, dtype=bool)
        stack = [(root, 1, iter(out_nbrs[root]))]
        on_path[root] = True
        while stack:
            v, depth, it = stack[-1]
            advanced = False
            for u in it:
                if u == root:
                    if depth >= 3:
                        counts[depth] += 1
                    continue
                if u < root or on_path[u]:
                    continue
                if depth + 1 > max_len or dist_to_root[u] > max_len - depth:
                    continue
                on_path[u] = True
                stack.append((int(u), depth + 1, iter(out_nbrs[u])))
                advanced = True
                break
            if not advanced:
                on_path[v] = False
                stack.pop()
    return counts


def triad_motif_census(views: AdjacencyViews) -> tuple[int, int]:
    """Counts of the two directed 3-node patterns over all node triples.

    Returns (cycle_triads, source_sink_triads): rotations of i->j->k->i,
    counted once per cycle, and ordered patterns i->j, j->k, i->k where i
    feeds both and k absorbs both.
    """
    a = views.x_lia.astype(np.int64)
    a2 = a @ a
    cycle_triads = int(np.trace(a2 @ a)) // 3
    source_sink = int((a2 * a).sum())
    return cycle_triads, source_sink
