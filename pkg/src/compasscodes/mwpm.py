"""Minimum-weight perfect-matching decoder.

Defect-to-defect path weights are shortest paths under the log-odds
metric -log(p/(1-p)) (most probable error chains); the boundary enters
through per-defect nearest-boundary attachments.  The matching itself
is exact blossom (networkx), run on a reduced graph with one node per
defect: a pair's weight is min(interior path, via-boundary), which is
equivalent to duplicating every defect with a virtual boundary partner
and zero-weight virtual-virtual edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .graphs import DecoderGraph


@dataclass
class DefectGraph:
    """Pairwise defect metric plus path-recovery state."""

    defects: np.ndarray  # (k,) vertex ids
    weights: np.ndarray  # (k, k) interior path weights
    boundary_weight: np.ndarray  # (k,) cheapest route to any boundary
    boundary_attach: np.ndarray  # (k,) interior vertex where that route leaves
    boundary_edge: np.ndarray  # (k,) final boundary edge id (-1 if unreachable)
    predecessors: np.ndarray  # (k, n_vertices) dijkstra predecessor maps


class MWPMDecoder:
    """One instance per worker; precomputes the interior metric graph."""

    def __init__(self, graph: DecoderGraph):
        self.graph = graph
        w = -graph.edge_weight
        if (w <= 0).any():
            raise ValueError("nonpositive path weight; edge probability >= 1/2")
        interior = ~(
            graph.boundary_mask[graph.edge_u] | graph.boundary_mask[graph.edge_v]
        )
        n = graph.n_vertices
        iu = graph.edge_u[interior]
        iv = graph.edge_v[interior]
        iw = w[interior]
        self._metric = csr_matrix(
            (np.concatenate([iw, iw]),
             (np.concatenate([iu, iv]), np.concatenate([iv, iu]))),
            shape=(n, n),
        )
        # Cheapest boundary edge per interior vertex.
        self._bmin = np.full(n, np.inf)
        self._bedge = np.full(n, -1, dtype=np.int64)
        bidx = np.nonzero(~interior)[0]
        for e in bidx:
            u, v = graph.edge_u[e], graph.edge_v[e]
            t = v if graph.boundary_mask[u] else u
            if w[e] < self._bmin[t]:
                self._bmin[t] = w[e]
                self._bedge[t] = e
        self._edge_id = {
            (min(int(graph.edge_u[e]), int(graph.edge_v[e])),
             max(int(graph.edge_u[e]), int(graph.edge_v[e]))): e
            for e in range(graph.n_edges)
        }

    def path_weights(self, defects: np.ndarray) -> DefectGraph:
        """Shortest-path metric from every defect, plus boundary routes."""
        defects = np.asarray(defects, dtype=np.int64)
        dist, pred = dijkstra(
            self._metric, indices=defects, return_predecessors=True
        )
        dist = np.atleast_2d(dist)
        pred = np.atleast_2d(pred)
        W = dist[:, defects]
        via = dist + self._bmin[None, :]
        battach = np.argmin(via, axis=1)
        bweight = via[np.arange(len(defects)), battach]
        bedge = np.where(np.isfinite(bweight), self._bedge[battach], -1)
        return DefectGraph(defects, W, bweight, battach, bedge, pred)

    def match(self, dg: DefectGraph) -> tuple[list[tuple[int, int]], list[int]]:
        """Exact minimum-weight pairing; returns (defect pairs, boundary-matched).

        Indices refer to positions in ``dg.defects``.  Each pair's
        reduced weight already folds in the via-boundary alternative;
        the cheaper interpretation is recovered by comparison.
        """
        k = len(dg.defects)
        if k == 0:
            return [], []
        if k == 1:
            return [], [0]
        g = nx.Graph()
        for i in range(k):
            for j in range(i + 1, k):
                g.add_edge(i, j, weight=min(
                    dg.weights[i, j], dg.boundary_weight[i] + dg.boundary_weight[j]
                ))
        if k % 2 == 1:
            for i in range(k):
                g.add_edge(i, k, weight=dg.boundary_weight[i])
        matching = nx.min_weight_matching(g)
        pairs: list[tuple[int, int]] = []
        to_boundary: list[int] = []
        for a, b in matching:
            if a > b:
                a, b = b, a
            if b == k:
                to_boundary.append(a)
            elif dg.weights[a, b] <= dg.boundary_weight[a] + dg.boundary_weight[b]:
                pairs.append((a, b))
            else:
                to_boundary.extend((a, b))
        return pairs, to_boundary

    def _xor_path(self, dg: DefectGraph, i: int, dst: int, corr: np.ndarray):
        pred = dg.predecessors[i]
        v = int(dst)
        src = int(dg.defects[i])
        while v != src:
            u = int(pred[v])
            corr[self._edge_id[(min(u, v), max(u, v))]] ^= 1
            v = u

    def decode(self, syndrome: np.ndarray) -> np.ndarray:
        """Match defects and XOR the recovered paths into a correction."""
        corr = np.zeros(self.graph.n_edges, dtype=np.uint8)
        defects = np.nonzero(syndrome)[0]
        if len(defects) == 0:
            return corr
        dg = self.path_weights(defects)
        pairs, to_boundary = self.match(dg)
        for i, j in pairs:
            self._xor_path(dg, i, int(dg.defects[j]), corr)
        for i in to_boundary:
            if dg.boundary_edge[i] < 0:
                raise RuntimeError("defect has no boundary route; odd syndrome on a closed graph")
            self._xor_path(dg, i, int(dg.boundary_attach[i]), corr)
            corr[dg.boundary_edge[i]] ^= 1
        return corr
