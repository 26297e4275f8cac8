"""Asymmetrically-weighted union-find decoder.

Pipeline: weighted syndrome validation (cluster growth with the
boundary acting as a parity sink), maximum-weight spanning forest over
the erased edges, forced-move peeling, and a parity-constrained tree
dynamic program that picks the maximum-probability consistent subset.
Setting ``weighted=False`` gives the conventional unweighted decoder
(all edges equivalent) for comparison studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._uf_kernels import dp_kernel, forest_kernel, peel_kernel, validate_kernel
from .graphs import DecoderGraph


@dataclass
class ClusterState:
    """Result of syndrome validation.

    ``support[e]`` is the growth stage of edge ``e`` (0, 1 = half,
    2 = full/erased); ``parity``/``boundary_touched`` are valid at
    cluster roots of the ``parent`` disjoint-set array.
    """

    support: np.ndarray
    parent: np.ndarray
    parity: np.ndarray
    boundary_touched: np.ndarray
    in_cluster: np.ndarray

    @property
    def erasure(self) -> np.ndarray:
        return self.support >= 2


@dataclass
class ErasureForest:
    """Spanning forest over the erasure.

    ``status[e]``: 0 = not in forest, 1 = interior tree edge, 2 = open
    edge (boundary-incident, no parity constraint at its outer end).
    """

    status: np.ndarray

    @property
    def tree_edges(self) -> np.ndarray:
        return self.status == 1

    @property
    def open_edges(self) -> np.ndarray:
        return self.status == 2


class UnionFindDecoder:
    """One decoder instance per worker; the graph itself is shared read-only."""

    def __init__(self, graph: DecoderGraph, weighted: bool = True):
        self.graph = graph
        self.weighted = weighted
        self._boundary = graph.boundary_mask.astype(np.uint8)
        if weighted:
            self._order = graph.kruskal_order
            self._weights = graph.edge_weight
        else:
            self._order = np.arange(graph.n_edges, dtype=np.int32)
            self._weights = np.full(graph.n_edges, -1.0)

    def validate(self, syndrome: np.ndarray) -> ClusterState:
        """Grow odd clusters (smallest frontier first) until even or boundary."""
        g = self.graph
        support, parent, parity, btouch, in_cl, rc = validate_kernel(
            g.n_vertices, self._boundary, g.edge_u, g.edge_v,
            syndrome.astype(np.uint8),
        )
        if rc != 0:
            raise RuntimeError(
                "syndrome validation stalled: odd cluster with empty frontier "
                "(syndrome inconsistent with graph)"
            )
        return ClusterState(support, parent, parity, btouch, in_cl)

    def spanning_forest(self, state: ClusterState) -> ErasureForest:
        """Kruskal forest over the erasure, heaviest failure probability first."""
        g = self.graph
        status = forest_kernel(
            g.n_vertices, self._boundary, g.edge_u, g.edge_v,
            state.support, self._order,
        )
        return ErasureForest(status)

    def peel(
        self, forest: ErasureForest, syndrome: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, ErasureForest]:
        """Forced leaf moves; returns (partial correction, residual marks, residual forest)."""
        g = self.graph
        corr, marks, alive, rc = peel_kernel(
            g.n_vertices, self._boundary, g.edge_u, g.edge_v,
            forest.status, syndrome.astype(np.uint8),
        )
        if rc != 0:
            raise RuntimeError(
                "peeling left a marked vertex with no edges: validation bug"
            )
        return corr, marks, ErasureForest(alive)

    def tree_dp(self, forest: ErasureForest, marks: np.ndarray) -> np.ndarray:
        """Maximum-weight parity-consistent subset of the remaining forest."""
        g = self.graph
        corr, rc = dp_kernel(
            g.n_vertices, self._boundary, g.edge_u, g.edge_v,
            forest.status, marks.astype(np.uint8), self._weights,
        )
        if rc == -1:
            raise RuntimeError("tree DP hit infeasible parity: validation bug")
        if rc == -2:
            raise RuntimeError("cycle in spanning forest: Kruskal bug")
        return corr

    def decode(self, syndrome: np.ndarray) -> np.ndarray:
        """Full pipeline; returns a 0/1 correction vector over edges."""
        state = self.validate(syndrome)
        forest = self.spanning_forest(state)
        corr, marks, rest = self.peel(forest, syndrome)
        if rest.status.any() or marks.any():
            corr = corr ^ self.tree_dp(rest, marks)
        return corr


def trace_growth(graph: DecoderGraph, syndrome: np.ndarray) -> str:
    """Pure-Python re-run of syndrome validation that logs every step.

    Debug aid (and an independent cross-check of the compiled kernel):
    returns a text trace of which clusters grew at which frontier size,
    ending with the erased edge set.
    """
    n_v = graph.n_vertices
    boundary = graph.boundary_mask
    eu, ev = graph.edge_u, graph.edge_v
    parent = list(range(n_v))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    marks = np.asarray(syndrome).astype(bool)
    parity = {v: 1 for v in np.nonzero(marks)[0]}
    btouch: set[int] = set()
    in_cl = set(int(v) for v in np.nonzero(marks)[0])
    support = np.zeros(graph.n_edges, dtype=int)
    lines = []
    step = 0
    while True:
        roots = {find(v) for v in in_cl}
        active = sorted(
            r for r in roots if parity.get(r, 0) % 2 == 1 and r not in btouch
        )
        if not active:
            break
        fsize = {r: 0 for r in active}
        for e in range(graph.n_edges):
            if support[e] >= 2:
                continue
            rs = {find(int(x)) for x in (eu[e], ev[e]) if int(x) in in_cl}
            for r in rs:
                if r in fsize:
                    fsize[r] += 1
        minf = min(fsize.values())
        if minf == 0:
            raise RuntimeError(
                "syndrome validation stalled: odd cluster with empty frontier"
            )
        growing = [r for r in active if fsize[r] == minf]
        lines.append(
            f"step {step}: frontier={minf} growing clusters {growing}"
        )
        full_now = []
        for e in range(graph.n_edges):
            if support[e] >= 2:
                continue
            rs = {find(int(x)) for x in (eu[e], ev[e]) if int(x) in in_cl}
            add = sum(1 for r in rs if r in growing)
            if add:
                support[e] = min(2, support[e] + add)
                if support[e] >= 2:
                    full_now.append(e)
        for e in full_now:
            u, v = int(eu[e]), int(ev[e])
            if boundary[u] or boundary[v]:
                iv = v if boundary[u] else u
                btouch.add(find(iv))
                lines.append(f"  edge {e} full: boundary fusion")
            else:
                in_cl.update((u, v))
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[rv] = ru
                    parity[ru] = parity.get(ru, 0) ^ parity.get(rv, 0)
                    if rv in btouch:
                        btouch.add(ru)
                lines.append(f"  edge {e} full: fuse {u},{v}")
        step += 1
    erased = np.nonzero(support >= 2)[0]
    lines.append(f"erasure: {erased.tolist()}")
    return "\n".join(lines) + "\n"
