import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compasscodes.colorings import (
    BLANK,
    BLUE,
    RED,
    Coloring,
    elongated_coloring,
    shor_density_coloring,
    surface_density_coloring,
    tailored_coloring,
)
from compasscodes.noise import linear_profile_map


def test_elongated_ell1_is_all_red():
    c = elongated_coloring(5, 1)
    assert (c.cells == RED).all()
    assert c.is_subspace


def test_elongated_ell2_is_checkerboard():
    c = elongated_coloring(5, 2)
    i, j = np.indices((4, 4))
    assert ((c.cells == RED) == ((i - j) % 2 == 0)).all()


def test_elongated_red_diagonals():
    c = elongated_coloring(9, 3)
    i, j = np.indices((8, 8))
    assert ((c.cells == RED) == ((i - j) % 3 == 0)).all()
    assert c.is_subspace


def test_surface_density_extremes():
    rng = np.random.default_rng(0)
    c0 = surface_density_coloring(7, 0.0, rng)
    assert (c0.cells == RED).all()
    c1 = surface_density_coloring(7, 1.0, rng)
    i, j = np.indices((6, 6))
    assert ((c1.cells == BLUE) == ((i + j) % 2 == 0)).all()


def test_surface_density_odd_cells_always_red():
    rng = np.random.default_rng(1)
    for q in (0.3, 0.7):
        c = surface_density_coloring(9, q, rng)
        i, j = np.indices((8, 8))
        assert (c.cells[(i + j) % 2 == 1] == RED).all()


def test_surface_density_rate():
    rng = np.random.default_rng(2)
    q = 0.4
    counts = []
    for _ in range(200):
        c = surface_density_coloring(9, q, rng)
        i, j = np.indices((8, 8))
        even = (i + j) % 2 == 0
        counts.append((c.cells[even] == BLUE).mean())
    n = 200 * 32
    assert abs(np.mean(counts) - q) < 3 * np.sqrt(q * (1 - q) / n)


def test_shor_density_extremes():
    rng = np.random.default_rng(3)
    assert (shor_density_coloring(6, 0.0, rng).cells == RED).all()
    assert (shor_density_coloring(6, 1.0, rng).cells == BLUE).all()


def test_tailored_coloring_follows_noise():
    # Strong dephasing on the right-hand side: right plaquettes mostly blue.
    nm = linear_profile_map(9, 0.2, 1.0)
    rng = np.random.default_rng(4)
    blues = np.zeros((8, 8))
    for _ in range(300):
        blues += tailored_coloring(nm, 0.2, rng).cells == BLUE
    blues /= 300
    # Expected blue probability = clamp(2 p_z(i,j) / p_tot) = j / 9.
    j = np.arange(8)
    expect = j / 9
    assert np.allclose(blues.mean(axis=0), expect, atol=0.1)


def test_text_round_trip():
    c = elongated_coloring(5, 3)
    assert Coloring.from_text(c.to_text()).cells.tolist() == c.cells.tolist()


def test_from_text_rejects_bad_input():
    with pytest.raises(ValueError):
        Coloring.from_text("R\nB\n")
    with pytest.raises(ValueError):
        Coloring.from_text("L=3\nRB\n")
    with pytest.raises(ValueError):
        Coloring.from_text("L=3\nRX\nBB\n")


def test_validation_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        Coloring(1, np.zeros((0, 0), dtype=np.int8))
    with pytest.raises(ValueError):
        Coloring(3, np.zeros((3, 3), dtype=np.int8))
    with pytest.raises(ValueError):
        Coloring(3, np.full((2, 2), 7, dtype=np.int8))


def test_cells_are_read_only():
    c = elongated_coloring(4, 2)
    with pytest.raises(ValueError):
        c.cells[0, 0] = BLUE


def test_blank_breaks_subspace():
    cells = np.full((2, 2), RED, dtype=np.int8)
    cells[0, 1] = BLANK
    assert not Coloring(3, cells).is_subspace


@settings(max_examples=50, deadline=None)
@given(
    L=st.integers(min_value=2, max_value=9),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_round_trip_random_colorings(L, seed):
    rng = np.random.default_rng(seed)
    cells = rng.integers(0, 3, size=(L - 1, L - 1)).astype(np.int8)
    c = Coloring(L, cells)
    back = Coloring.from_text(c.to_text())
    assert back.L == c.L and (back.cells == c.cells).all()
