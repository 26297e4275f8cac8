"""Biased, spatially inhomogeneous Pauli noise and faulty measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Probabilities at or above this value have undefined log-odds weights and
#: are rejected wherever a decoder weight is derived from them.
WEIGHT_CAP = 0.5


@dataclass(frozen=True)
class BiasedChannel:
    """Single-qubit Pauli channel with bias ``eta = p_z / (p_x + p_y)``.

    ``p_x = p_y`` by convention; ``eta = inf`` is pure dephasing.
    """

    p: float
    eta: float
    p_x: float
    p_y: float
    p_z: float


def channel_from_bias(p: float, eta: float) -> BiasedChannel:
    """Split a total error rate ``p`` into Pauli rates at bias ``eta``."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"total error rate must be in [0, 1), got {p}")
    if eta < 0:
        raise ValueError(f"bias must be >= 0, got {eta}")
    if math.isinf(eta):
        return BiasedChannel(p, eta, 0.0, 0.0, p)
    pxy = p / (2.0 * (1.0 + eta))
    pz = p * eta / (1.0 + eta)
    return BiasedChannel(p, eta, pxy, pxy, pz)


@dataclass(frozen=True)
class NoiseMap:
    """Per-qubit Pauli rates, plus optional per-stabilizer measurement rates.

    ``meas_x``/``meas_z`` are failure probabilities for the X-type and
    Z-type stabilizer measurements; ``None`` means ideal measurements
    (code-capacity setting).
    """

    p_x: np.ndarray
    p_y: np.ndarray
    p_z: np.ndarray
    meas_x: np.ndarray | None = None
    meas_z: np.ndarray | None = None

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_z"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError(f"{name} must be a square LxL array")
            if (arr < 0).any() or (arr > 1).any():
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, arr)
        if (self.p_x + self.p_y + self.p_z > 1.0 + 1e-12).any():
            raise ValueError("per-qubit Pauli rates must sum to at most 1")

    @property
    def L(self) -> int:
        return self.p_x.shape[0]

    @property
    def z_marginal(self) -> np.ndarray:
        """Flip rate seen by the Z-error (phase) decoder: p_z + p_y."""
        return self.p_z + self.p_y

    @property
    def x_marginal(self) -> np.ndarray:
        return self.p_x + self.p_y

    def average_infidelity(self) -> float:
        return float((self.p_x + self.p_y + self.p_z).mean())

    def to_csv(self) -> str:
        lines = ["i,j,p_x,p_y,p_z"]
        L = self.L
        for i in range(L):
            for j in range(L):
                lines.append(
                    f"{i},{j},{self.p_x[i, j]:.12g},{self.p_y[i, j]:.12g},{self.p_z[i, j]:.12g}"
                )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PauliSample:
    """One sampled noise realization.

    ``z_flips``/``x_flips`` have shape ``(rounds, L*L)``; a Y error sets
    both.  ``meas_x_flips``/``meas_z_flips`` have shape
    ``(rounds - 1, n_stabilizers)`` (the final round is ideal) and are
    ``None`` for single-round (code-capacity) samples.
    """

    z_flips: np.ndarray
    x_flips: np.ndarray
    meas_x_flips: np.ndarray | None = None
    meas_z_flips: np.ndarray | None = None


def uniform_map(L: int, channel: BiasedChannel) -> NoiseMap:
    """Spatially uniform map from a biased channel."""
    full = np.full((L, L), 1.0)
    return NoiseMap(channel.p_x * full, channel.p_y * full, channel.p_z * full)


def linear_profile_map(L: int, p_tot: float, w: float) -> NoiseMap:
    """Dephasing that decays linearly from the right-hand side.

    ``p_z(i, j) = (w * j/L + (1 - w) * (1 - j/L)) * p_tot / 2`` with
    uniform ``p_x = p_tot / 2`` and ``p_y = 0``.  ``p_tot`` is treated
    as a scale parameter of the printed formula.
    """
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"incline must be in [0, 1], got {w}")
    if p_tot < 0:
        raise ValueError(f"p_tot must be >= 0, got {p_tot}")
    j = np.arange(L) / L
    profile = w * j + (1.0 - w) * (1.0 - j)
    p_z = np.tile(profile * p_tot / 2.0, (L, 1))
    p_x = np.full((L, L), p_tot / 2.0)
    p_y = np.zeros((L, L))
    if (p_z >= WEIGHT_CAP).any() or (p_x >= WEIGHT_CAP).any():
        raise ValueError("linear profile produces a marginal >= 1/2")
    return NoiseMap(p_x, p_y, p_z)


def random_uniform_map(L: int, p: float, rng: np.random.Generator) -> NoiseMap:
    """Per-qubit dephasing rates drawn uniformly from ``[0, 2p]``.

    The drawn rates are recorded in the map, i.e. the decoder is told
    the true per-qubit probabilities.
    """
    if not 0.0 <= 2 * p < WEIGHT_CAP:
        raise ValueError(f"need 2p < 1/2 for decoder weighting, got p={p}")
    p_z = rng.uniform(0.0, 2.0 * p, size=(L, L))
    zero = np.zeros((L, L))
    return NoiseMap(zero, zero.copy(), p_z)


def measurement_rates(code, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-stabilizer measurement-failure rates, linear in weight.

    A stabilizer of weight ``w`` fails with probability ``p * w / 4``,
    so weight-4 plaquettes fail at exactly the physical rate ``p``.
    Returns ``(rates_x, rates_z)`` aligned with the code's stabilizer
    lists.
    """
    rates_x = p * code.x_weights / 4.0
    rates_z = p * code.z_weights / 4.0
    if (rates_x >= WEIGHT_CAP).any() or (rates_z >= WEIGHT_CAP).any():
        raise ValueError("a measurement-failure rate reached 1/2; decoder weighting breaks")
    return rates_x, rates_z


def sample_pauli(noise_map: NoiseMap, rounds: int, rng: np.random.Generator) -> PauliSample:
    """Sample data errors for ``rounds`` rounds plus measurement flips.

    ``rounds = 1`` is the code-capacity setting: one data-error window
    and no measurement flips.  For ``rounds > 1`` each stabilizer
    outcome flips independently in every round but the last with its
    rate from the map.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    L = noise_map.L
    n = L * L
    px = noise_map.p_x.ravel()
    py = noise_map.p_y.ravel()
    pz = noise_map.p_z.ravel()

    u = rng.random((rounds, n))
    # Intervals: [0, pz) -> Z, [pz, pz+py) -> Y, [pz+py, pz+py+px) -> X.
    z_flips = u < pz + py
    x_flips = (u >= pz) & (u < pz + py + px)

    meas_x_flips = meas_z_flips = None
    if rounds > 1:
        if noise_map.meas_x is not None:
            meas_x_flips = rng.random((rounds - 1, len(noise_map.meas_x))) < noise_map.meas_x
        if noise_map.meas_z is not None:
            meas_z_flips = rng.random((rounds - 1, len(noise_map.meas_z))) < noise_map.meas_z
    return PauliSample(z_flips, x_flips, meas_x_flips, meas_z_flips)
