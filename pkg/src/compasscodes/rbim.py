"""Random-bond Ising model mapped from a coloring's phase-error problem.

Spins live on the Z-type stabilizers of the built code; every qubit
contributes one two-body bond coupling the (at most two) Z-stabilizers
containing it, with boundary qubits coupling to a ghost spin frozen at
+1.  Disorder tau_j = -1 marks a Z error on qubit j; simulation runs on
the Nishimori line beta_p = log((1-p)/p)/2 with Swendsen-Wang cluster
updates restricted to satisfied bonds.  Criticality is located through
Binder-cumulant crossings using improved (cluster) estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .codes import build_code
from .colorings import Coloring, surface_density_coloring
from .harness import _crossing, _point_seed

RBIM_CSV_HEADER = "q_surf,L,p,beta,samples,U,U_err,tau_int"


def nishimori_beta(p: float) -> float:
    """Inverse temperature on the Nishimori line."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return 0.5 * math.log((1.0 - p) / p)


@dataclass
class RBIMInstance:
    """One quenched-disorder realization.

    ``bond_a``/``bond_b`` index free spins, with ``n_spins`` standing
    for the frozen ghost spin.
    """

    n_spins: int
    bond_a: np.ndarray
    bond_b: np.ndarray
    tau: np.ndarray  # int8 couplings, -1 where the qubit carries a Z error
    p: float
    beta: float

    @property
    def n_bonds(self) -> int:
        return len(self.tau)

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR neighbor lists (indptr, neighbor spin, bond coupling)."""
        cached = getattr(self, "_adj", None)
        if cached is None:
            ends = np.concatenate([self.bond_a, self.bond_b])
            others = np.concatenate([self.bond_b, self.bond_a])
            taus = np.concatenate([self.tau, self.tau])
            keep = ends < self.n_spins
            ends, others, taus = ends[keep], others[keep], taus[keep]
            order = np.argsort(ends, kind="stable")
            indptr = np.zeros(self.n_spins + 1, dtype=np.int32)
            np.add.at(indptr, ends + 1, 1)
            np.cumsum(indptr, out=indptr)
            cached = (
                indptr,
                others[order].astype(np.int32),
                taus[order].astype(np.int8),
            )
            self._adj = cached
        return cached

    def energy(self, spins: np.ndarray) -> float:
        """H = -sum_j tau_j s_a s_b with the ghost spin fixed at +1."""
        s = np.concatenate([spins, [1]])
        return -float(np.sum(self.tau * s[self.bond_a] * s[self.bond_b]))


def build_rbim(coloring: Coloring, p: float, rng: np.random.Generator) -> RBIMInstance:
    """Quench disorder at rate p onto the coloring's two-body Ising model."""
    if not 0.0 < p < 0.5:
        raise ValueError(f"disorder rate must be in (0, 1/2), got {p}")
    code = build_code(coloring)
    mem = code.z_membership()
    ghost = code.n_z
    a = np.where(mem[:, 0] >= 0, mem[:, 0], ghost).astype(np.int32)
    b = np.where(mem[:, 1] >= 0, mem[:, 1], ghost).astype(np.int32)
    tau = np.where(rng.random(code.n_qubits) < p, -1, 1).astype(np.int8)
    return RBIMInstance(code.n_z, a, b, tau, p, nishimori_beta(p))


@njit(cache=True, inline="always")
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _sw_run(n, bond_a, bond_b, tau, spins, p_act, beta, indptr, nbr, ntau,
            u_bond, u_flip, u_metro, m2_out, m4_out):
    """Hybrid Swendsen-Wang/Metropolis sweeps with improved estimators.

    Per sweep: activate satisfied bonds with probability p_act, flip
    non-ghost clusters with probability 1/2, record the
    cluster-decomposition estimates of <m^2> and <m^4> (exact average
    over the independent cluster signs, ghost cluster held fixed), then
    run one sequential single-spin Metropolis pass.  The local pass is
    required for ergodicity in practice: pure cluster updates trap
    random starts in metastable domain states at low temperature.
    """
    sweeps = u_bond.shape[0]
    E = bond_a.shape[0]
    parent = np.empty(n + 1, dtype=np.int32)
    csum = np.empty(n + 1, dtype=np.float64)
    for t in range(sweeps):
        for v in range(n + 1):
            parent[v] = v
        for e in range(E):
            a = bond_a[e]
            b = bond_b[e]
            sa = spins[a] if a < n else 1
            sb = spins[b] if b < n else 1
            if tau[e] * sa * sb > 0 and u_bond[t, e] < p_act:
                ra = _find(parent, a)
                rb = _find(parent, b)
                if ra != rb:
                    parent[rb] = ra
        for v in range(n + 1):
            csum[v] = 0.0
        for v in range(n):
            csum[_find(parent, v)] += spins[v]
        rg = _find(parent, n)
        sg = csum[rg] / n
        s2 = 0.0
        s4 = 0.0
        for r in range(n + 1):
            if r == rg or csum[r] == 0.0:
                continue
            mc = csum[r] / n
            mc2 = mc * mc
            s2 += mc2
            s4 += mc2 * mc2
        if m2_out.shape[0] > 0:
            m2_out[t] = sg * sg + s2
            m4_out[t] = sg ** 4 + 6.0 * sg * sg * s2 + 3.0 * s2 * s2 - 2.0 * s4
        for v in range(n):
            r = _find(parent, v)
            if r != rg and u_flip[t, r] < 0.5:
                spins[v] = -spins[v]
        for v in range(n):
            h = 0.0
            for k in range(indptr[v], indptr[v + 1]):
                w = nbr[k]
                h += ntau[k] * (spins[w] if w < n else 1)
            dE = 2.0 * spins[v] * h
            if dE <= 0.0 or u_metro[t, v] < math.exp(-beta * dE):
                spins[v] = -spins[v]


def cluster_sweep(
    instance: RBIMInstance, spins: np.ndarray, rng: np.random.Generator
) -> tuple[float, float]:
    """One hybrid sweep in place; returns the improved (m2, m4)."""
    n = instance.n_spins
    p_act = 1.0 - math.exp(-2.0 * instance.beta)
    indptr, nbr, ntau = instance.adjacency()
    u_bond = rng.random((1, instance.n_bonds))
    u_flip = rng.random((1, n + 1))
    u_metro = rng.random((1, n))
    m2 = np.empty(1)
    m4 = np.empty(1)
    _sw_run(
        n, instance.bond_a, instance.bond_b, instance.tau, spins,
        p_act, instance.beta, indptr, nbr, ntau, u_bond, u_flip, u_metro,
        m2, m4,
    )
    return float(m2[0]), float(m4[0])


@dataclass
class EstimatorSeries:
    """Per-sweep improved moments from one equilibrated realization."""

    m2: np.ndarray
    m4: np.ndarray


def run_realization(
    instance: RBIMInstance,
    sweeps: int,
    therm: int,
    rng: np.random.Generator,
    chunk: int = 2048,
) -> EstimatorSeries:
    """Thermalize, then record ``sweeps`` improved-estimator samples.

    Starts from the ordered (all +1) configuration: random starts can
    stay trapped in metastable domain states for thousands of sweeps at
    low temperature, while the cold start relaxes quickly on both sides
    of the transition.
    """
    n = instance.n_spins
    p_act = 1.0 - math.exp(-2.0 * instance.beta)
    indptr, nbr, ntau = instance.adjacency()
    spins = np.ones(n, dtype=np.int8)
    empty = np.empty(0)
    done = 0
    while done < therm:
        step = min(chunk, therm - done)
        u_bond = rng.random((step, instance.n_bonds))
        u_flip = rng.random((step, n + 1))
        u_metro = rng.random((step, n))
        _sw_run(
            n, instance.bond_a, instance.bond_b, instance.tau, spins,
            p_act, instance.beta, indptr, nbr, ntau, u_bond, u_flip, u_metro,
            empty, empty,
        )
        done += step
    m2 = np.empty(sweeps)
    m4 = np.empty(sweeps)
    done = 0
    while done < sweeps:
        step = min(chunk, sweeps - done)
        u_bond = rng.random((step, instance.n_bonds))
        u_flip = rng.random((step, n + 1))
        u_metro = rng.random((step, n))
        _sw_run(
            n, instance.bond_a, instance.bond_b, instance.tau, spins,
            p_act, instance.beta, indptr, nbr, ntau, u_bond, u_flip, u_metro,
            m2[done : done + step], m4[done : done + step],
        )
        done += step
    return EstimatorSeries(m2, m4)


def _binned_error(series: np.ndarray, n_bins: int = 32) -> tuple[float, float, bool]:
    """(error of mean, tau_int, converged) from a binning analysis."""
    n = len(series)
    if n < 2:
        return 0.0, 1.0, False
    naive_var = series.var(ddof=1) / n
    errors = []
    size = 1
    while n // size >= n_bins:
        m = (n // size) * size
        binned = series[:m].reshape(-1, size).mean(axis=1)
        errors.append(math.sqrt(binned.var(ddof=1) / len(binned)))
        size *= 2
    if not errors:
        return math.sqrt(naive_var), 1.0, False
    err = errors[-1]
    tau_int = 0.5 * (err * err / naive_var) if naive_var > 0 else 1.0
    converged = len(errors) >= 3 and errors[-1] <= errors[-2] * 1.05
    return err, tau_int, converged


@dataclass
class BinderPoint:
    """Disorder-averaged Binder cumulant at one (L, p)."""

    U: float
    U_err: float
    tau_int: float
    converged: bool
    samples: int


def binder_cumulant(series_list: list[EstimatorSeries]) -> BinderPoint:
    """U = 1 - [<m^4>] / (3 [<m^2>]^2), averaged over disorder realizations.

    The error bar combines a jackknife over realizations with a binning
    analysis of the slowest single-realization series (autocorrelation
    diagnostic).
    """
    if not series_list:
        raise ValueError("need at least one estimator series")
    a2 = np.array([s.m2.mean() for s in series_list])
    a4 = np.array([s.m4.mean() for s in series_list])
    m2, m4 = a2.mean(), a4.mean()
    U = 1.0 - m4 / (3.0 * m2 * m2)
    n = len(series_list)
    if n > 1:
        jack = np.empty(n)
        for i in range(n):
            j2 = (a2.sum() - a2[i]) / (n - 1)
            j4 = (a4.sum() - a4[i]) / (n - 1)
            jack[i] = 1.0 - j4 / (3.0 * j2 * j2)
        U_err = math.sqrt((n - 1) / n * ((jack - jack.mean()) ** 2).sum())
    else:
        U_err = 0.0
    err2, tau_int, conv = _binned_error(series_list[0].m2)
    return BinderPoint(float(U), float(U_err), float(tau_int), conv, n)


@dataclass
class CriticalEstimate:
    """Binder-crossing estimate of the critical disorder."""

    p_c: float | None
    ci_low: float | None
    ci_high: float | None
    points: dict[int, list[BinderPoint]]
    p_grid: np.ndarray
    no_crossing: bool


def find_critical(
    q_surf: float,
    sizes: list[int],
    p_grid: np.ndarray,
    realizations: int,
    sweeps: int,
    therm: int,
    master_seed: int,
    n_boot: int = 200,
) -> CriticalEstimate:
    """Binder curves U(p, L); p_c = crossing of the two largest sizes.

    A fresh surface-density coloring and disorder sample are drawn per
    realization; the CI comes from bootstrap over realizations.
    """
    if len(sizes) < 2:
        raise ValueError("need at least two lattice sizes")
    sizes = sorted(sizes)
    p_grid = np.asarray(p_grid, dtype=np.float64)
    points: dict[int, list[BinderPoint]] = {L: [] for L in sizes}
    moments: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
    for li, L in enumerate(sizes):
        for pi, p in enumerate(p_grid):
            a2 = np.empty(realizations)
            a4 = np.empty(realizations)
            series = []
            for r in range(realizations):
                rng = np.random.default_rng(
                    (_point_seed(master_seed, li, pi), r)
                )
                coloring = surface_density_coloring(L, q_surf, rng)
                inst = build_rbim(coloring, float(p), rng)
                s = run_realization(inst, sweeps, therm, rng)
                a2[r] = s.m2.mean()
                a4[r] = s.m4.mean()
                if r == 0:
                    series.append(s)
            series_all = [
                EstimatorSeries(np.array([a2[r]]), np.array([a4[r]]))
                for r in range(realizations)
            ]
            bp = binder_cumulant(series_all)
            err2, tau_int, conv = _binned_error(series[0].m2)
            bp.tau_int = tau_int
            bp.converged = conv
            points[L].append(bp)
            moments[(li, pi)] = (a2, a4)

    def curve(li):
        return np.array([points[sizes[li]][pi].U for pi in range(len(p_grid))])

    def errs(li):
        return np.maximum(
            np.array([points[sizes[li]][pi].U_err for pi in range(len(p_grid))]),
            1e-9,
        )

    u1, u2 = curve(len(sizes) - 2), curve(len(sizes) - 1)
    s1, s2 = errs(len(sizes) - 2), errs(len(sizes) - 1)
    gl, gh = p_grid.min(), p_grid.max()
    # Larger sizes order below p_c as U_large > U_small; reuse the same
    # weighted-linear-fit crossing used for logical-rate curves.
    p_c = _crossing(p_grid, u1, s1, u2, s2, gl, gh)
    if p_c is None:
        return CriticalEstimate(None, None, None, points, p_grid, True)

    boot_rng = np.random.default_rng((master_seed, 0xB007))
    samples = []
    for _ in range(n_boot):
        def resample(li):
            u = np.empty(len(p_grid))
            for pi in range(len(p_grid)):
                a2, a4 = moments[(li, pi)]
                idx = boot_rng.integers(0, realizations, realizations)
                m2, m4 = a2[idx].mean(), a4[idx].mean()
                u[pi] = 1.0 - m4 / (3.0 * m2 * m2)
            return u
        ps = _crossing(
            p_grid, resample(len(sizes) - 2), s1, resample(len(sizes) - 1), s2,
            gl, gh,
        )
        if ps is not None:
            samples.append(ps)
    if len(samples) >= n_boot // 2:
        lo, hi = np.percentile(samples, [2.5, 97.5])
    else:
        lo = hi = p_c
    return CriticalEstimate(float(p_c), float(lo), float(hi), points, p_grid, False)


def critical_csv_rows(q_surf: float, est: CriticalEstimate, sizes: list[int]) -> list[str]:
    rows = []
    for L in sorted(sizes):
        for pi, p in enumerate(est.p_grid):
            bp = est.points[L][pi]
            beta = nishimori_beta(float(p))
            rows.append(
                f"{q_surf:.10g},{L},{p:.10g},{beta:.10g},{bp.samples},"
                f"{bp.U:.10g},{bp.U_err:.10g},{bp.tau_int:.10g}"
            )
    return rows
