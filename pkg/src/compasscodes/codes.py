"""Compass-code construction from plaquette colorings.

The convention used throughout: X-stabilizers are row-pair operators
``prod_j X[i,j] X[i+1,j]`` split into contiguous column segments at
every blue plaquette of that row pair; Z-stabilizers are column-pair
operators ``prod_i Z[i,j] Z[i,j+1]`` split into contiguous row segments
at every red plaquette of that column pair.  Blank plaquettes split
neither.  Qubit ``(i, j)`` has linear index ``i * L + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .colorings import BLUE, RED, Coloring


@dataclass(frozen=True)
class CompassCode:
    """Stabilizer supports of a gauge-fixed compass code.

    ``x_seg[ip, c]`` is the id of the X-stabilizer of row pair
    ``(ip, ip+1)`` that covers column ``c``; ``z_seg[r, jp]`` the id of
    the Z-stabilizer of column pair ``(jp, jp+1)`` covering row ``r``.
    These segment maps are what the decoder-graph builders consume.
    """

    L: int
    x_seg: np.ndarray  # (L-1, L) int32
    z_seg: np.ndarray  # (L, L-1) int32

    @property
    def n_qubits(self) -> int:
        return self.L * self.L

    @property
    def n_x(self) -> int:
        return int(self.x_seg.max()) + 1

    @property
    def n_z(self) -> int:
        return int(self.z_seg.max()) + 1

    @cached_property
    def x_weights(self) -> np.ndarray:
        """Weight (support size) of each X-stabilizer."""
        return 2 * np.bincount(self.x_seg.ravel(), minlength=self.n_x)

    @cached_property
    def z_weights(self) -> np.ndarray:
        return 2 * np.bincount(self.z_seg.ravel(), minlength=self.n_z)

    @cached_property
    def x_stabilizers(self) -> tuple[np.ndarray, ...]:
        """Qubit supports of the X-stabilizers, sorted by qubit index."""
        L = self.L
        ip, c = np.indices((L - 1, L))
        ids = np.repeat(self.x_seg.ravel(), 2)
        qubits = np.stack([ip * L + c, (ip + 1) * L + c], axis=-1).ravel()
        return _group(ids, qubits, self.n_x)

    @cached_property
    def z_stabilizers(self) -> tuple[np.ndarray, ...]:
        L = self.L
        r, jp = np.indices((L, L - 1))
        ids = np.repeat(self.z_seg.ravel(), 2)
        qubits = np.stack([r * L + jp, r * L + jp + 1], axis=-1).ravel()
        return _group(ids, qubits, self.n_z)

    def x_membership(self) -> np.ndarray:
        """(L*L, 2) array: X-stabilizer above/below each qubit, -1 if none."""
        L = self.L
        out = np.full((L, L, 2), -1, dtype=np.int32)
        out[1:, :, 0] = self.x_seg  # pair (r-1, r)
        out[:-1, :, 1] = self.x_seg  # pair (r, r+1)
        return out.reshape(L * L, 2)

    def z_membership(self) -> np.ndarray:
        """(L*L, 2) array: Z-stabilizer left/right of each qubit, -1 if none."""
        L = self.L
        out = np.full((L, L, 2), -1, dtype=np.int32)
        out[:, 1:, 0] = self.z_seg
        out[:, :-1, 1] = self.z_seg
        return out.reshape(L * L, 2)


def _group(ids: np.ndarray, qubits: np.ndarray, n: int) -> tuple[np.ndarray, ...]:
    order = np.argsort(ids, kind="stable")
    counts = np.bincount(ids, minlength=n)
    parts = np.split(qubits[order], np.cumsum(counts)[:-1])
    return tuple(np.sort(p) for p in parts)


def build_code(coloring: Coloring) -> CompassCode:
    """Gauge-fix a coloring into explicit stabilizer segment maps.

    Deterministic: identical colorings yield identical codes.
    """
    L = coloring.L
    cells = coloring.cells

    # X-stabilizers: row pairs, cut after every blue column.
    blue_cuts = np.cumsum(cells == BLUE, axis=1)
    x_local = np.concatenate(
        [np.zeros((L - 1, 1), dtype=np.int64), blue_cuts], axis=1
    )
    x_counts = x_local[:, -1] + 1
    x_offsets = np.concatenate([[0], np.cumsum(x_counts)[:-1]])
    x_seg = (x_local + x_offsets[:, None]).astype(np.int32)

    # Z-stabilizers: column pairs, cut after every red row.
    red_cuts = np.cumsum(cells == RED, axis=0)
    z_local = np.concatenate(
        [np.zeros((1, L - 1), dtype=np.int64), red_cuts], axis=0
    )
    z_counts = z_local[-1, :] + 1
    z_offsets = np.concatenate([[0], np.cumsum(z_counts)[:-1]])
    z_seg = (z_local + z_offsets[None, :]).astype(np.int32)

    return CompassCode(L, x_seg, z_seg)


def validate_code(code) -> list[str]:
    """Check the compass-code invariants, returning a list of violations.

    Accepts any object with ``L``, ``x_stabilizers`` and
    ``z_stabilizers`` attributes, so hand-built codes can be checked
    too.  An empty list means the code is valid.
    """
    violations: list[str] = []
    L = code.L
    n = L * L
    xs = [np.asarray(s) for s in code.x_stabilizers]
    zs = [np.asarray(s) for s in code.z_stabilizers]

    xmat = np.zeros((len(xs), n), dtype=np.int32)
    for i, s in enumerate(xs):
        xmat[i, s] = 1
    zmat = np.zeros((len(zs), n), dtype=np.int32)
    for i, s in enumerate(zs):
        zmat[i, s] = 1

    overlap = xmat @ zmat.T
    bad = np.argwhere(overlap % 2 == 1)
    for i, j in bad:
        violations.append(f"odd overlap: X-stabilizer {i} and Z-stabilizer {j}")

    for name, mat, limit in (("X", xmat, 2), ("Z", zmat, 2)):
        per_qubit = mat.sum(axis=0)
        for q in np.nonzero(per_qubit > limit)[0]:
            violations.append(
                f"qubit {q} appears in {per_qubit[q]} {name}-stabilizers (max {limit})"
            )

    return violations
