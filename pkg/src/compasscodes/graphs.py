"""Weighted decoder multigraphs derived from a code and a noise map.

Vertices are stabilizers of one type (plus boundary vertices in open
mode), edges are qubits (or measurement opportunities in spacetime
graphs).  Parallel qubit edges are merged into a single edge carrying
the odd-parity failure probability; corrections returned on a merged
edge apply to exactly one representative qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .codes import CompassCode
from .noise import WEIGHT_CAP, NoiseMap, PauliSample

OPEN = "open"
PERIODIC = "periodic"


@dataclass(frozen=True)
class DecoderGraph:
    """Immutable decoder graph, shared read-only by decoder workers.

    ``kind`` is ``'z'`` for the phase-error graph (X-stabilizer
    vertices) or ``'x'`` for the bit-flip graph.  ``seam_mask`` marks
    the homology cut whose odd crossing parity defines logical failure.
    """

    kind: str
    L: int
    boundary_mode: str
    n_vertices: int
    boundary_mask: np.ndarray  # bool (n_vertices,)
    edge_u: np.ndarray  # int32 (E,)
    edge_v: np.ndarray
    edge_p: np.ndarray  # float64 (E,)
    seam_mask: np.ndarray  # bool (E,)
    pay_indptr: np.ndarray  # int64 (E+1,)
    pay_item: np.ndarray  # int64; >=0: layer*n+qubit, <0: -(slice*nv2d+vertex)-1
    vertex_weights: np.ndarray  # stabilizer weight per vertex (0 at boundary)
    qubit_edge: np.ndarray  # int32 (layers, L*L), -1 when the qubit has no edge
    meas_edge: np.ndarray | None = None  # int32 (slices, nv2d)
    layers: int = 1
    nv2d: int = 0

    @property
    def n_edges(self) -> int:
        return len(self.edge_p)

    @cached_property
    def edge_weight(self) -> np.ndarray:
        """Log-odds weight ``log(p / (1 - p))`` per edge (negative)."""
        return np.log(self.edge_p / (1.0 - self.edge_p))

    @cached_property
    def kruskal_order(self) -> np.ndarray:
        """Edge ids sorted by failure probability descending, id ascending."""
        return np.lexsort((np.arange(self.n_edges), -self.edge_p)).astype(np.int32)

    def payload(self, e: int) -> list[tuple]:
        """Decode edge ``e``'s payload to (kind, round, index) tuples."""
        items = self.pay_item[self.pay_indptr[e] : self.pay_indptr[e + 1]]
        n = self.L * self.L
        out = []
        for it in items:
            if it >= 0:
                out.append(("qubit", int(it) // n, int(it) % n))
            else:
                raw = -int(it) - 1
                out.append(("measurement", raw // self.nv2d, raw % self.nv2d))
        return out

    def syndrome_of(self, err_edges: np.ndarray) -> np.ndarray:
        """Marked-vertex parity vector of an edge error set.

        ``err_edges`` is a parity (0/1) vector over edges; boundary
        vertices absorb parity silently.
        """
        idx = np.nonzero(err_edges)[0]
        marks = (
            np.bincount(self.edge_u[idx], minlength=self.n_vertices)
            + np.bincount(self.edge_v[idx], minlength=self.n_vertices)
        ) % 2
        marks[self.boundary_mask] = 0
        return marks.astype(np.uint8)

    def project_sample(self, sample: PauliSample) -> np.ndarray:
        """Map a Pauli sample onto this graph's edge parity vector."""
        flips = sample.z_flips if self.kind == "z" else sample.x_flips
        if flips.shape[0] != self.layers:
            raise ValueError(
                f"sample has {flips.shape[0]} rounds, graph has {self.layers} layers"
            )
        counts = np.zeros(self.n_edges, dtype=np.int64)
        for t in range(self.layers):
            edges = self.qubit_edge[t, flips[t]]
            edges = edges[edges >= 0]
            counts += np.bincount(edges, minlength=self.n_edges)
        meas = sample.meas_x_flips if self.kind == "z" else sample.meas_z_flips
        if self.meas_edge is not None and meas is not None:
            for t in range(self.meas_edge.shape[0]):
                edges = self.meas_edge[t, meas[t]]
                edges = edges[edges >= 0]
                counts += np.bincount(edges, minlength=self.n_edges)
        return (counts % 2).astype(np.uint8)

    def seam_parity(self, err_edges: np.ndarray) -> int:
        return int(err_edges[self.seam_mask].sum() % 2)

    def dump(self) -> str:
        """Debug text dump: one line per vertex and edge."""
        lines = []
        for v in range(self.n_vertices):
            kind = "boundary" if self.boundary_mask[v] else "stabilizer"
            lines.append(f"vertex {v} {kind}")
        for e in range(self.n_edges):
            pay = ";".join(
                f"{k}:{t}:{i}" for k, t, i in self.payload(e)
            )
            lines.append(
                f"edge {e} {self.edge_u[e]} {self.edge_v[e]} {self.edge_p[e]:.10g} {pay}"
            )
        return "\n".join(lines) + "\n"


def merged_probability(ps: np.ndarray) -> float:
    """Odd-parity failure probability of independent parallel edges."""
    return 0.5 * (1.0 - np.prod(1.0 - 2.0 * np.asarray(ps)))


def _assemble(
    kind: str,
    L: int,
    mode: str,
    nv: int,
    boundary_mask: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    p_qubit: np.ndarray,
    seam_qubit: np.ndarray,
    vertex_weights: np.ndarray,
) -> DecoderGraph:
    """Merge parallel qubit edges and package the graph."""
    n = L * L
    if (p_qubit >= WEIGHT_CAP).any():
        raise ValueError("an edge failure probability reached 1/2")
    if (u == v).any():
        raise ValueError("self-loop edge; malformed coloring or boundary handling")

    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    qubits = np.arange(n, dtype=np.int64)
    order = np.lexsort((qubits, hi, lo))
    lo, hi, p_q, qubits = lo[order], hi[order], p_qubit[order], qubits[order]
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    group_id = np.cumsum(new_group) - 1
    n_groups = group_id[-1] + 1

    # Odd-parity merge per group in log space of (1 - 2p).
    log_terms = np.log1p(-2.0 * p_q)
    gsum = np.bincount(group_id, weights=log_terms, minlength=n_groups)
    p_merged = 0.5 * (1.0 - np.exp(gsum))
    starts = np.nonzero(new_group)[0]

    keep = p_merged > 0.0
    edge_of_group = np.full(n_groups, -1, dtype=np.int32)
    edge_of_group[keep] = np.arange(keep.sum(), dtype=np.int32)

    edge_u = lo[starts][keep].astype(np.int32)
    edge_v = hi[starts][keep].astype(np.int32)
    edge_p = p_merged[keep]
    seam_mask = seam_qubit[qubits[starts]][keep]

    counts = np.bincount(group_id, minlength=n_groups)[keep]
    pay_indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    pay_item = qubits[np.repeat(keep, np.bincount(group_id, minlength=n_groups))]

    qubit_edge = np.full((1, n), -1, dtype=np.int32)
    qubit_edge[0, qubits] = edge_of_group[group_id]

    return DecoderGraph(
        kind=kind,
        L=L,
        boundary_mode=mode,
        n_vertices=nv,
        boundary_mask=boundary_mask,
        edge_u=edge_u,
        edge_v=edge_v,
        edge_p=edge_p,
        seam_mask=seam_mask,
        pay_indptr=pay_indptr,
        pay_item=pay_item,
        vertex_weights=vertex_weights,
        qubit_edge=qubit_edge,
        layers=1,
        nv2d=nv,
    )


def build_z_error_graph(
    code: CompassCode,
    noise_map: NoiseMap,
    boundary_mode: str = OPEN,
    seam_index: int | None = None,
) -> DecoderGraph:
    """Phase-error decoder graph: X-stabilizer vertices, qubit edges.

    In open mode qubits in the first/last row attach to north/south
    boundary vertices; in periodic mode the two boundaries are
    identified as the uncut wrap-around row-pair stabilizer, which is a
    regular (markable) vertex.
    """
    L = code.L
    mem = code.x_membership()
    above, below = mem[:, 0].copy(), mem[:, 1].copy()
    nx = code.n_x
    if boundary_mode == OPEN:
        nv = nx + 2
        boundary_mask = np.zeros(nv, dtype=bool)
        boundary_mask[nx:] = True
        above[above < 0] = nx  # north
        below[below < 0] = nx + 1  # south
        vertex_weights = np.concatenate([code.x_weights, [0, 0]])
    elif boundary_mode == PERIODIC:
        nv = nx + 1
        boundary_mask = np.zeros(nv, dtype=bool)
        above[above < 0] = nx  # wrap-around row pair
        below[below < 0] = nx
        vertex_weights = np.concatenate([code.x_weights, [2 * L]])
    else:
        raise ValueError(f"unknown boundary mode {boundary_mode!r}")

    rows = np.arange(L * L) // L
    seam_qubit = rows == (L // 2 if seam_index is None else seam_index)
    return _assemble(
        "z", L, boundary_mode, nv, boundary_mask, above, below,
        noise_map.z_marginal.ravel(), seam_qubit, vertex_weights,
    )


def build_x_error_graph(
    code: CompassCode,
    noise_map: NoiseMap,
    boundary_mode: str = OPEN,
    seam_index: int | None = None,
) -> DecoderGraph:
    """Bit-flip decoder graph: Z-stabilizer vertices, east-west boundaries.

    Periodic (north-south) mode identifies, for every column pair, the
    Z-segment containing row 0 with the segment containing row L-1;
    east-west boundaries stay open.
    """
    L = code.L
    mem = code.z_membership()
    left, right = mem[:, 0].copy(), mem[:, 1].copy()
    nz = code.n_z
    weights = code.z_weights.astype(np.int64)

    if boundary_mode == PERIODIC:
        relabel = np.arange(nz)
        for jp in range(L - 1):
            top = code.z_seg[0, jp]
            bot = code.z_seg[L - 1, jp]
            rt, rb = relabel[top], relabel[bot]
            if rt != rb:
                relabel[relabel == rb] = rt
        uniq, compact = np.unique(relabel, return_inverse=True)
        n_int = len(uniq)
        merged_weights = np.bincount(compact, weights=weights, minlength=n_int)
        left = np.where(left >= 0, compact[np.clip(left, 0, None)], -1)
        right = np.where(right >= 0, compact[np.clip(right, 0, None)], -1)
        weights = merged_weights
    elif boundary_mode == OPEN:
        n_int = nz
    else:
        raise ValueError(f"unknown boundary mode {boundary_mode!r}")

    nv = n_int + 2
    boundary_mask = np.zeros(nv, dtype=bool)
    boundary_mask[n_int:] = True
    left = np.where(left < 0, n_int, left)  # west
    right = np.where(right < 0, n_int + 1, right)  # east
    vertex_weights = np.concatenate([weights, [0, 0]])

    cols = np.arange(L * L) % L
    seam_qubit = cols == (L // 2 if seam_index is None else seam_index)
    return _assemble(
        "x", L, boundary_mode, nv, boundary_mask, left, right,
        noise_map.x_marginal.ravel(), seam_qubit, vertex_weights,
    )


def build_spacetime_graph(
    graph2d: DecoderGraph, rounds: int, meas_rates: np.ndarray
) -> DecoderGraph:
    """(2+1)-D graph: ``rounds + 1`` space layers, ``rounds`` time slices.

    ``meas_rates`` gives the measurement-failure probability per 2-D
    vertex (boundary entries ignored); zero-rate time edges are
    excluded so that ``rounds`` with ideal measurements reduces to
    independent copies of the 2-D graph.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if graph2d.layers != 1:
        raise ValueError("spacetime graphs must be built from a 2-D graph")
    meas_rates = np.asarray(meas_rates, dtype=np.float64)
    if len(meas_rates) != graph2d.n_vertices:
        raise ValueError("meas_rates must have one entry per 2-D vertex")
    if (meas_rates >= WEIGHT_CAP).any():
        raise ValueError("a measurement-failure rate reached 1/2")

    nv2d = graph2d.n_vertices
    e2d = graph2d.n_edges
    layers = rounds + 1
    n = graph2d.L * graph2d.L
    nv = layers * nv2d

    boundary_mask = np.tile(graph2d.boundary_mask, layers)
    vertex_weights = np.tile(graph2d.vertex_weights, layers)

    offs = (np.arange(layers) * nv2d)[:, None]
    space_u = (graph2d.edge_u[None, :] + offs).ravel()
    space_v = (graph2d.edge_v[None, :] + offs).ravel()
    space_p = np.tile(graph2d.edge_p, layers)
    space_seam = np.tile(graph2d.seam_mask, layers)

    time_v2d = np.nonzero(~graph2d.boundary_mask & (meas_rates > 0))[0]
    k = len(time_v2d)
    toffs = (np.arange(rounds) * nv2d)[:, None]
    time_u = (time_v2d[None, :] + toffs).ravel()
    time_v = time_u + nv2d
    time_p = np.tile(meas_rates[time_v2d], rounds)

    edge_u = np.concatenate([space_u, time_u]).astype(np.int32)
    edge_v = np.concatenate([space_v, time_v]).astype(np.int32)
    edge_p = np.concatenate([space_p, time_p])
    seam_mask = np.concatenate([space_seam, np.zeros(rounds * k, dtype=bool)])

    # Payload: replicate qubit payloads per layer; time edges carry the
    # (round, vertex) measurement they represent.
    counts2d = np.diff(graph2d.pay_indptr)
    space_counts = np.tile(counts2d, layers)
    space_items = (
        graph2d.pay_item[None, :] + (np.arange(layers) * n)[:, None]
    ).ravel()
    time_items = -((toffs + time_v2d[None, :]).ravel()) - 1
    pay_counts = np.concatenate([space_counts, np.ones(rounds * k, dtype=np.int64)])
    pay_indptr = np.concatenate([[0], np.cumsum(pay_counts)]).astype(np.int64)
    pay_item = np.concatenate([space_items, time_items])

    qubit_edge = np.empty((layers, n), dtype=np.int32)
    for t in range(layers):
        q2e = graph2d.qubit_edge[0]
        qubit_edge[t] = np.where(q2e >= 0, q2e + t * e2d, -1)

    meas_edge = np.full((rounds, nv2d), -1, dtype=np.int32)
    base = layers * e2d
    for t in range(rounds):
        meas_edge[t, time_v2d] = base + t * k + np.arange(k)

    return DecoderGraph(
        kind=graph2d.kind,
        L=graph2d.L,
        boundary_mode=graph2d.boundary_mode,
        n_vertices=nv,
        boundary_mask=boundary_mask,
        edge_u=edge_u,
        edge_v=edge_v,
        edge_p=edge_p,
        seam_mask=seam_mask,
        pay_indptr=pay_indptr,
        pay_item=pay_item,
        vertex_weights=vertex_weights,
        qubit_edge=qubit_edge,
        meas_edge=meas_edge,
        layers=layers,
        nv2d=nv2d,
    )


def syndrome_of(graph: DecoderGraph, err_edges: np.ndarray) -> np.ndarray:
    """Module-level alias of :meth:`DecoderGraph.syndrome_of`."""
    return graph.syndrome_of(err_edges)
