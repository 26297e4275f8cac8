"""Plaquette colorings that define 2-D compass codes.

A coloring assigns one of ``{RED, BLUE, BLANK}`` to each of the
``(L-1) x (L-1)`` plaquettes of an ``L x L`` qubit lattice.  A red
plaquette cuts the vertical (column-pair) Z-type stabilizer passing
through it, a blue plaquette cuts the horizontal (row-pair) X-type
stabilizer, and a blank plaquette leaves the gauge degree of freedom
unfixed.  Plaquette ``(i, j)`` is indexed by its top-left qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RED = 0
BLUE = 1
BLANK = 2

_CHAR = {RED: "R", BLUE: "B", BLANK: "."}
_COLOR = {v: k for k, v in _CHAR.items()}


@dataclass(frozen=True)
class Coloring:
    """An ``(L-1) x (L-1)`` grid of plaquette colors.

    ``cells[i, j]`` is the color of the plaquette whose top-left qubit
    is at row ``i``, column ``j``.
    """

    L: int
    cells: np.ndarray

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"lattice size must be >= 2, got {self.L}")
        cells = np.asarray(self.cells, dtype=np.int8)
        if cells.shape != (self.L - 1, self.L - 1):
            raise ValueError(
                f"cells must have shape {(self.L - 1, self.L - 1)}, got {cells.shape}"
            )
        if not np.isin(cells, (RED, BLUE, BLANK)).all():
            raise ValueError("cells must contain only RED, BLUE or BLANK")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def is_subspace(self) -> bool:
        """True when no plaquette is blank (all gauge freedom fixed)."""
        return not (self.cells == BLANK).any()

    def to_text(self) -> str:
        lines = [f"L={self.L}"]
        for row in self.cells:
            lines.append("".join(_CHAR[c] for c in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Coloring":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("L="):
            raise ValueError("coloring text must start with an 'L=<n>' header")
        L = int(lines[0][2:])
        rows = lines[1:]
        if len(rows) != L - 1:
            raise ValueError(f"expected {L - 1} rows, got {len(rows)}")
        cells = np.empty((L - 1, L - 1), dtype=np.int8)
        for i, row in enumerate(rows):
            if len(row) != L - 1:
                raise ValueError(f"row {i} has length {len(row)}, expected {L - 1}")
            try:
                cells[i] = [_COLOR[ch] for ch in row]
            except KeyError as exc:
                raise ValueError(f"invalid color character in row {i}") from exc
        return cls(L, cells)


def elongated_coloring(L: int, ell: int) -> Coloring:
    """Elongation-``ell`` coloring: red on diagonals ``i - j = 0 (mod ell)``.

    ``ell=1`` is Shor's code (all red), ``ell=2`` the rotated surface
    code checkerboard; larger ``ell`` stretches Z-stabilizers to weight
    ``2*ell`` in the bulk.
    """
    if ell < 1:
        raise ValueError(f"elongation must be >= 1, got {ell}")
    i, j = np.indices((L - 1, L - 1))
    cells = np.where((i - j) % ell == 0, RED, BLUE).astype(np.int8)
    return Coloring(L, cells)


def surface_density_coloring(L: int, q_surf: float, rng: np.random.Generator) -> Coloring:
    """Random interpolation between Bacon-Shor (q=0) and the surface code (q=1).

    Plaquettes with ``i + j`` odd are red; plaquettes with ``i + j``
    even are blue independently with probability ``q_surf`` and red
    otherwise, so the result is always a subspace coloring.
    """
    if not 0.0 <= q_surf <= 1.0:
        raise ValueError(f"q_surf must be in [0, 1], got {q_surf}")
    i, j = np.indices((L - 1, L - 1))
    even = (i + j) % 2 == 0
    blue = even & (rng.random((L - 1, L - 1)) < q_surf)
    cells = np.where(blue, BLUE, RED).astype(np.int8)
    return Coloring(L, cells)


def shor_density_coloring(L: int, q_shor: float, rng: np.random.Generator) -> Coloring:
    """Random interpolation between Shor's code (q=0 red) and its dual (q=1 blue)."""
    if not 0.0 <= q_shor <= 1.0:
        raise ValueError(f"q_shor must be in [0, 1], got {q_shor}")
    blue = rng.random((L - 1, L - 1)) < q_shor
    cells = np.where(blue, BLUE, RED).astype(np.int8)
    return Coloring(L, cells)


def tailored_coloring(noise_map, p_tot: float, rng: np.random.Generator) -> Coloring:
    """Coloring adapted to spatially varying dephasing noise.

    Plaquette ``(i, j)`` is cut blue with probability
    ``clamp(2 * p_z(i, j) / p_tot)`` where ``p_z`` is taken at the
    plaquette's top-left (anchor) qubit, and red otherwise.
    """
    if p_tot <= 0:
        raise ValueError(f"p_tot must be positive, got {p_tot}")
    L = noise_map.L
    anchor_pz = noise_map.p_z[: L - 1, : L - 1]
    blue_prob = np.clip(2.0 * anchor_pz / p_tot, 0.0, 1.0)
    blue = rng.random((L - 1, L - 1)) < blue_prob
    cells = np.where(blue, BLUE, RED).astype(np.int8)
    return Coloring(L, cells)
