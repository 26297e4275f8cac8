"""Monte Carlo trials, threshold estimation, bias sweeps, analytic oracles.

A trial samples a Pauli error (plus measurement flips when rounds > 1),
projects it onto each decoder graph, decodes, and declares logical
failure iff the residual (error XOR correction) crosses the graph's
seam an odd number of times.  Per-trial RNGs derive from
``(master_seed, trial_index)`` so results are independent of worker
count and batch splitting.

``rounds = 1`` is the code-capacity setting; ``rounds = R > 1`` runs R
noisy syndrome-extraction rounds followed by one ideal round (the
standard phenomenological protocol uses R = L).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.stats import binom

from .codes import build_code
from .colorings import (
    elongated_coloring,
    shor_density_coloring,
    surface_density_coloring,
    tailored_coloring,
)
from .graphs import (
    DecoderGraph,
    build_spacetime_graph,
    build_x_error_graph,
    build_z_error_graph,
)
from .mwpm import MWPMDecoder
from .noise import (
    NoiseMap,
    channel_from_bias,
    linear_profile_map,
    random_uniform_map,
    sample_pauli,
    uniform_map,
)
from .uf import UnionFindDecoder

FAMILIES = ("elongated", "surface-density", "shor-density", "tailored")
DECODERS = ("uf", "uf-unweighted", "mwpm")
NOISES = ("biased", "linear", "random-uniform")

CSV_HEADER = (
    "family,decoder,boundary,L,ell,q_surf,q_shor,w,eta,rounds,p,trials,"
    "fail_z,fail_x,fail_any,ci_low,ci_high,master_seed"
)


@dataclass(frozen=True)
class BatchConfig:
    """Complete, picklable description of one Monte Carlo batch."""

    family: str
    decoder: str
    L: int
    p: float
    trials: int
    master_seed: int
    boundary: str = "open"
    ell: int | None = None
    q_surf: float | None = None
    q_shor: float | None = None
    w: float | None = None
    eta: float | None = None
    rounds: int = 1
    noise: str = "biased"
    measure: str = "both"  # both | z | x
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.noise not in NOISES:
            raise ValueError(f"unknown noise model {self.noise!r}")
        if self.measure not in ("both", "z", "x"):
            raise ValueError(f"unknown measure {self.measure!r}")
        if self.family == "elongated" and self.ell is None:
            raise ValueError("elongated family requires ell")
        if self.family == "surface-density" and self.q_surf is None:
            raise ValueError("surface-density family requires q_surf")
        if self.family == "shor-density" and self.q_shor is None:
            raise ValueError("shor-density family requires q_shor")
        if self.noise == "biased" and self.eta is None:
            raise ValueError("biased noise requires eta")
        if self.noise == "linear" and self.w is None:
            raise ValueError("linear-profile noise requires w")
        if self.family == "tailored" and self.noise == "biased":
            raise ValueError("tailored family needs a spatial noise model")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")


@dataclass
class TrialBatch:
    """Aggregated failure counts for one (config, p) point."""

    config: BatchConfig
    trials: int
    failures_z: int
    failures_x: int
    failures_any: int
    ci_low: float
    ci_high: float

    @property
    def rate(self) -> float:
        """Failure rate of the measured quantity (any / z / x per config)."""
        return self.measured_failures / self.trials

    @property
    def measured_failures(self) -> int:
        if self.config.measure == "z":
            return self.failures_z
        if self.config.measure == "x":
            return self.failures_x
        return self.failures_any


def wilson_interval(failures: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial rate."""
    if trials == 0:
        return 0.0, 1.0
    ph = failures / trials
    denom = 1.0 + z * z / trials
    centre = ph + z * z / (2 * trials)
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials))
    return (centre - half) / denom, (centre + half) / denom


def repetition_oracle(L: int, p: float) -> tuple[float, float]:
    """Majority-vote failure of one length-L repetition code and the
    L-fold parity composition ``1/2 (1 - (1 - 2 p_rep)^L)``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    p_rep = float(binom.sf(math.ceil(L / 2) - 1, L, p))
    p_logical = 0.5 * (1.0 - (1.0 - 2.0 * p_rep) ** L)
    return p_rep, p_logical


def binary_entropy(p: float) -> float:
    """Binary entropy in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def gv_gap(p_x: float, p_z: float) -> float:
    """Residual of the zero-rate bound: ``1 - H(p_x) - H(p_z)``."""
    return 1.0 - binary_entropy(p_x) - binary_entropy(p_z)


def _make_noise_map(cfg: BatchConfig, rng: np.random.Generator) -> NoiseMap:
    if cfg.noise == "biased":
        return uniform_map(cfg.L, channel_from_bias(cfg.p, cfg.eta))
    if cfg.noise == "linear":
        return linear_profile_map(cfg.L, cfg.p, cfg.w)
    return random_uniform_map(cfg.L, cfg.p, rng)


def _make_coloring(cfg: BatchConfig, nm: NoiseMap, rng: np.random.Generator):
    if cfg.family == "elongated":
        return elongated_coloring(cfg.L, cfg.ell)
    if cfg.family == "surface-density":
        return surface_density_coloring(cfg.L, cfg.q_surf, rng)
    if cfg.family == "shor-density":
        return shor_density_coloring(cfg.L, cfg.q_shor, rng)
    return tailored_coloring(nm, cfg.p, rng)


_DECODER_CTORS = {
    "uf": lambda g: UnionFindDecoder(g, weighted=True),
    "uf-unweighted": lambda g: UnionFindDecoder(g, weighted=False),
    "mwpm": MWPMDecoder,
}


def _build_setup(cfg: BatchConfig, rng: np.random.Generator):
    """Build (graphs, decoders, noise map incl. measurement rates)."""
    nm = _make_noise_map(cfg, rng)
    code = build_code(_make_coloring(cfg, nm, rng))
    kinds = ("z", "x") if cfg.measure == "both" else (cfg.measure,)
    graphs: dict[str, DecoderGraph] = {}
    meas = {"z": None, "x": None}
    for kind in kinds:
        if kind == "z":
            g = build_z_error_graph(code, nm, cfg.boundary)
            m_mean = float(nm.z_marginal.mean())
        else:
            g = build_x_error_graph(code, nm, cfg.boundary)
            m_mean = float(nm.x_marginal.mean())
        if cfg.rounds > 1:
            rates = m_mean * g.vertex_weights / 4.0
            rates[g.boundary_mask] = 0.0
            meas[kind] = rates
            g = build_spacetime_graph(g, cfg.rounds, rates)
        graphs[kind] = g
    if cfg.rounds > 1:
        nm = NoiseMap(nm.p_x, nm.p_y, nm.p_z, meas_x=meas["z"], meas_z=meas["x"])
    decoders = {k: _DECODER_CTORS[cfg.decoder](g) for k, g in graphs.items()}
    return graphs, decoders, nm


def run_trial(
    graphs: dict[str, DecoderGraph],
    decoders: dict,
    noise_map: NoiseMap,
    rounds: int,
    rng: np.random.Generator,
) -> tuple[bool, bool]:
    """One trial; returns (fail_z, fail_x) for the graphs present."""
    total_rounds = 1 if rounds == 1 else rounds + 1
    sample = sample_pauli(noise_map, total_rounds, rng)
    fails = {"z": False, "x": False}
    for kind, g in graphs.items():
        err = g.project_sample(sample)
        syn = g.syndrome_of(err)
        corr = decoders[kind].decode(syn)
        residual = err ^ corr
        if g.syndrome_of(residual).any():
            raise RuntimeError(
                f"{kind}-decoder left a nonzero residual syndrome (decoder bug)"
            )
        fails[kind] = bool(g.seam_parity(residual))
    return fails["z"], fails["x"]


def _is_static(cfg: BatchConfig) -> bool:
    """Whether code and graphs are shared by all trials of the batch."""
    if cfg.noise == "random-uniform":
        return False
    if cfg.family == "elongated":
        return True
    # Density colorings degenerate to deterministic ones at q = 0 or 1.
    if cfg.family == "shor-density" and cfg.q_shor in (0.0, 1.0):
        return True
    if cfg.family == "surface-density" and cfg.q_surf in (0.0, 1.0):
        return True
    return False


def _run_range(cfg: BatchConfig, start: int, stop: int) -> tuple[int, int, int]:
    fz = fx = fa = 0
    setup = None
    if _is_static(cfg):
        setup = _build_setup(cfg, np.random.default_rng(cfg.master_seed))
    for idx in range(start, stop):
        rng = np.random.default_rng((cfg.master_seed, idx))
        graphs, decoders, nm = setup if setup else _build_setup(cfg, rng)
        z, x = run_trial(graphs, decoders, nm, cfg.rounds, rng)
        fz += z
        fx += x
        fa += z or x
    return fz, fx, fa


def run_batch(config: BatchConfig) -> TrialBatch:
    """Run all trials of a batch, fanning out across workers if asked."""
    n = config.trials
    if config.workers <= 1 or n < 2 * config.workers:
        fz, fx, fa = _run_range(config, 0, n)
    else:
        bounds = np.linspace(0, n, config.workers + 1).astype(int)
        fz = fx = fa = 0
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            futures = [
                ex.submit(_run_range, config, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
            ]
            for fut in futures:
                dz, dx, da = fut.result()
                fz += dz
                fx += dx
                fa += da
    measured = {"z": fz, "x": fx, "both": fa}[config.measure]
    lo, hi = wilson_interval(measured, n)
    return TrialBatch(config, n, fz, fx, fa, lo, hi)


def batch_csv_row(batch: TrialBatch) -> str:
    c = batch.config

    def fmt(v):
        return "" if v is None else f"{v:.10g}" if isinstance(v, float) else str(v)

    cells = [
        c.family, c.decoder, c.boundary, c.L, c.ell, c.q_surf, c.q_shor,
        c.w, c.eta, c.rounds, c.p, batch.trials, batch.failures_z,
        batch.failures_x, batch.failures_any, batch.ci_low, batch.ci_high,
        c.master_seed,
    ]
    return ",".join(fmt(v) for v in cells)


def write_csv(batches: list[TrialBatch], path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for b in batches:
            fh.write(batch_csv_row(b) + "\n")


@dataclass
class Curve:
    """One lattice size's logical-rate curve."""

    L: int
    p: np.ndarray
    rate: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    batches: list[TrialBatch] = field(default_factory=list, repr=False)


@dataclass
class ThresholdEstimate:
    """Crossing of the two largest sizes' curves, or an explicit no-crossing."""

    p_star: float | None
    ci_low: float | None
    ci_high: float | None
    curves: dict[int, Curve]
    no_crossing: bool

    @property
    def all_batches(self) -> list[TrialBatch]:
        return [b for c in self.curves.values() for b in c.batches]


def _point_seed(master_seed: int, li: int, pi: int) -> int:
    return int(np.random.SeedSequence([master_seed, li, pi]).generate_state(1)[0])


def _linear_fit(p: np.ndarray, rate: np.ndarray, sigma: np.ndarray):
    wgt = 1.0 / np.maximum(sigma, 1e-9) ** 2
    # Weighted least squares for rate = a*p + b.
    sw = wgt.sum()
    mx = (wgt * p).sum() / sw
    my = (wgt * rate).sum() / sw
    var = (wgt * (p - mx) ** 2).sum()
    if var == 0:
        return 0.0, my
    a = (wgt * (p - mx) * (rate - my)).sum() / var
    return a, my - a * mx


def _crossing(p, r1, s1, r2, s2, lo, hi):
    a1, b1 = _linear_fit(p, r1, s1)
    a2, b2 = _linear_fit(p, r2, s2)
    if a1 == a2:
        return None
    ps = (b1 - b2) / (a2 - a1)
    if not (lo <= ps <= hi):
        return None
    return ps


def estimate_threshold(
    base: BatchConfig,
    sizes: list[int],
    p_grid: np.ndarray,
    trials_per_point: int,
    n_boot: int = 200,
    rounds_equal_L: bool = False,
) -> ThresholdEstimate:
    """Logical-rate curves per size; threshold = crossing of the two largest.

    The crossing comes from weighted linear fits over the scanned grid;
    the CI from bootstrap over binomial resamples of every point.  A
    fit intersection outside the grid is reported as "no crossing".
    ``rounds_equal_L`` ties the number of noisy measurement rounds to
    each lattice size (the standard phenomenological scaling).
    """
    if len(sizes) < 2:
        raise ValueError("need at least two lattice sizes")
    sizes = sorted(sizes)
    p_grid = np.asarray(p_grid, dtype=np.float64)
    curves: dict[int, Curve] = {}
    for li, L in enumerate(sizes):
        batches = []
        for pi, p in enumerate(p_grid):
            cfg = replace(
                base, L=L, p=float(p), trials=trials_per_point,
                master_seed=_point_seed(base.master_seed, li, pi),
                rounds=L if rounds_equal_L else base.rounds,
            )
            batches.append(run_batch(cfg))
        rate = np.array([b.rate for b in batches])
        lo = np.array([b.ci_low for b in batches])
        hi = np.array([b.ci_high for b in batches])
        curves[L] = Curve(L, p_grid.copy(), rate, lo, hi, batches)

    c1, c2 = curves[sizes[-2]], curves[sizes[-1]]
    s1 = np.maximum((c1.ci_high - c1.ci_low) / 2, 1e-9)
    s2 = np.maximum((c2.ci_high - c2.ci_low) / 2, 1e-9)
    gl, gh = p_grid.min(), p_grid.max()
    p_star = _crossing(p_grid, c1.rate, s1, c2.rate, s2, gl, gh)
    if p_star is None:
        return ThresholdEstimate(None, None, None, curves, True)

    boot_rng = np.random.default_rng((base.master_seed, 0xB007))
    n = trials_per_point
    samples = []
    for _ in range(n_boot):
        r1 = boot_rng.binomial(n, np.clip(c1.rate, 0, 1)) / n
        r2 = boot_rng.binomial(n, np.clip(c2.rate, 0, 1)) / n
        ps = _crossing(p_grid, r1, s1, r2, s2, gl, gh)
        if ps is not None:
            samples.append(ps)
    if len(samples) >= n_boot // 2:
        lo, hi = np.percentile(samples, [2.5, 97.5])
    else:
        lo = hi = p_star
    return ThresholdEstimate(float(p_star), float(lo), float(hi), curves, False)


@dataclass
class BiasSweep:
    """Threshold-vs-bias profile of one code, from per-type marginal thresholds.

    For uniform biased noise the two decoding problems decouple: the
    Z-type (phase) graph sees marginal ``m_z = p(2 eta + 1)/(2(1 + eta))``
    and the X-type graph ``m_x = p/(1 + eta)``.  Estimating the per-type
    marginal thresholds once therefore fixes the whole curve
    ``p_thr(eta) = min(2 m_z* (1+eta)/(2 eta+1), m_x* (1+eta))`` exactly,
    at a fraction of the cost of rerunning every eta.
    """

    eta_grid: np.ndarray
    p_thr: np.ndarray
    eta_opt: float
    p_thr_opt: float
    eta_star: float | None
    m_z_star: float
    m_x_star: float
    est_z: ThresholdEstimate
    est_x: ThresholdEstimate


def p_thr_of_eta(m_z_star: float, m_x_star: float, eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta, dtype=np.float64)
    z_bound = 2.0 * m_z_star * (1.0 + eta) / (2.0 * eta + 1.0)
    x_bound = m_x_star * (1.0 + eta)
    return np.minimum(z_bound, x_bound)


def sweep_bias(
    base: BatchConfig,
    eta_grid: np.ndarray,
    sizes: list[int],
    z_grid: np.ndarray,
    x_grid: np.ndarray,
    trials_per_point: int,
    surface_reference: float | None = None,
) -> BiasSweep:
    """Bias sweep via the marginal decoupling described on :class:`BiasSweep`.

    ``surface_reference`` is the surface code's depolarizing threshold
    for the same decoder and setting; ``eta_star`` is the bias above
    which this code's threshold exceeds it.
    """
    est_z = estimate_threshold(
        replace(base, noise="biased", eta=math.inf, measure="z"),
        sizes, z_grid, trials_per_point,
    )
    est_x = estimate_threshold(
        replace(base, noise="biased", eta=0.0, measure="x"),
        sizes, x_grid, trials_per_point,
    )
    if est_z.no_crossing or est_x.no_crossing:
        raise RuntimeError("no per-type threshold crossing in the scanned grids")
    m_z, m_x = est_z.p_star, est_x.p_star
    eta_grid = np.asarray(eta_grid, dtype=np.float64)
    p_thr = p_thr_of_eta(m_z, m_x, eta_grid)
    eta_opt = m_z / m_x - 0.5
    p_opt = m_x * (1.0 + eta_opt)
    eta_star = None
    if surface_reference is not None and surface_reference < p_opt:
        # Below eta_opt the X-type bound binds: p_thr = m_x (1 + eta).
        eta_star = surface_reference / m_x - 1.0
    return BiasSweep(
        eta_grid, p_thr, float(eta_opt), float(p_opt), eta_star,
        float(m_z), float(m_x), est_z, est_x,
    )
