"""Monte Carlo harness for the law of large numbers on ring densities.

Each replica draws an independent scatterer field and product-Bernoulli
initial state, evolves it, and records every ring density at the requested
times.  Aggregation is a fixed-order fold over replica index, so reports do
not depend on how many worker threads produced the replicas.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import rng
from .diffusion import DiffusionParams, solve_diffusion
from .lattice import Geometry, ring_counts_at, sample_initial, sample_scatterers

__all__ = [
    "EnsembleConfig", "EnsembleReport", "ScanRow", "run_replica", "run_ensemble",
    "chebyshev_envelope", "variance_envelope", "lln_convergence_scan",
    "scan_is_nonincreasing",
]

Z = 4.0


def chebyshev_envelope(epsilon, R, alpha):
    """Upper bound ``6 / (epsilon**2 R**(1 - alpha))`` on a deviation probability."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not R >= 1:
        raise ValueError("R must be at least 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return 6.0 / (epsilon ** 2 * R ** (1.0 - alpha))


def variance_envelope(t, R):
    """Bound ``1/R + 4(t-1)/R`` on the variance of a ring density at time ``t >= 1``.

    At ``t = 0`` the densities are independent averages and ``1/R`` is used.
    """
    return (1.0 + 4.0 * max(t - 1, 0)) / R


@dataclass(frozen=True)
class EnsembleConfig:
    geometry: Geometry
    mu: float
    initial_profile: tuple
    replicas: int
    times: tuple
    epsilon: float
    alpha: float
    master_seed: int
    strict_regime: bool = False

    def __post_init__(self):
        g = self.geometry
        profile = tuple(float(p) for p in self.initial_profile)
        object.__setattr__(self, "initial_profile", profile)
        object.__setattr__(self, "times", tuple(int(t) for t in self.times))
        if len(profile) != g.rings:
            raise ValueError(f"initial profile must have length {g.rings}")
        if any(not 0.0 <= p <= 1.0 for p in profile):
            raise ValueError("initial profile values must lie in [0, 1]")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must lie in [0, 1]")
        if self.replicas < 1:
            raise ValueError("replicas must be positive")
        if not self.times or any(t < 0 for t in self.times):
            raise ValueError("times must be a non-empty list of non-negative integers")
        if list(self.times) != sorted(set(self.times)):
            raise ValueError("times must be strictly increasing")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.strict_regime and self.times[-1] >= g.R:
            raise ValueError(f"time {self.times[-1]} is outside the regime t < R = {g.R}")

    def regime_warnings(self):
        R = self.geometry.R
        horizon = R ** self.alpha
        out = []
        for t in self.times:
            if t >= R:
                out.append(f"t={t} >= R={R}: scatterer rows are revisited, independence fails")
            elif t > horizon:
                out.append(f"t={t} > R^alpha={horizon:.6g}: outside the time window [0, R^alpha]")
        return out

    def with_R(self, R, times=None):
        g = Geometry(R, self.geometry.N)
        return EnsembleConfig(g, self.mu, self.initial_profile, self.replicas,
                              self.times if times is None else times,
                              self.epsilon, self.alpha, self.master_seed, self.strict_regime)


def run_replica(config, replica_index):
    """Ring densities of one replica, shape ``(len(times), 2N + 1)``."""
    if not 0 <= replica_index < config.replicas:
        raise ValueError(f"replica_index {replica_index} outside [0, {config.replicas})")
    g = config.geometry
    field_seed = rng.mix_seed(config.master_seed, replica_index, rng.SCATTERERS)
    state_seed = rng.mix_seed(config.master_seed, replica_index, rng.OCCUPATIONS)
    field_ = sample_scatterers(g, config.mu, field_seed)
    state = sample_initial(g, np.array(config.initial_profile), state_seed)
    return ring_counts_at(state, field_, config.times) / g.R


def _binomial_radius(hits, n, z=Z):
    # Laplace-smoothed so an observed frequency of 0 or 1 still gets a non-zero radius
    p = (hits + 1.0) / (n + 2.0)
    return z * np.sqrt(p * (1.0 - p) / n)


@dataclass
class EnsembleReport:
    """Aggregated replica statistics; arrays are indexed ``[time, ring]``."""

    config: EnsembleConfig
    times: np.ndarray
    rings: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    mean_se: np.ndarray
    var_se: np.ndarray
    freq: np.ndarray
    freq_radius: np.ndarray
    union_freq: np.ndarray
    union_radius: np.ndarray
    rho_hat: np.ndarray
    rho_hat_paper: np.ndarray
    env_cheb: float
    env_var: np.ndarray
    warnings: list = field(default_factory=list)
    z: float = Z

    @property
    def replicas(self):
        return self.config.replicas

    def in_window(self):
        """Boolean per time: inside ``[0, R^alpha]`` and below ``R``."""
        R = self.config.geometry.R
        return (self.times <= R ** self.config.alpha) & (self.times < R)

    def mean_check(self):
        return np.abs(self.mean - self.rho_hat) <= self.z * self.mean_se

    def variance_check(self):
        return self.var <= self.env_var[:, None] + self.z * self.var_se

    def chebyshev_check(self):
        ok = self.freq <= self.env_cheb + self.freq_radius
        return ok | ~self.in_window()[:, None]

    def passed(self):
        return bool(self.variance_check().all() and self.chebyshev_check().all())

    def to_rows(self):
        """Rows ``(i, t, mean, var, freq, rho_hat, env_cheb, env_var)`` in ring-major order."""
        rows = []
        for col, i in enumerate(self.rings):
            for n, t in enumerate(self.times):
                rows.append((int(i), int(t), self.mean[n, col], self.var[n, col],
                             self.freq[n, col], self.rho_hat[n, col],
                             self.env_cheb, self.env_var[n]))
        return rows


def run_ensemble(config, threads=1):
    if config.replicas < 2:
        raise ValueError("run_ensemble needs at least 2 replicas")
    g = config.geometry
    work = partial(run_replica, config)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(work, range(config.replicas)))
    else:
        samples = [work(r) for r in range(config.replicas)]
    samples = np.stack(samples)  # (replicas, times, rings), replica order
    n = config.replicas

    times = np.array(config.times)
    mean = samples.mean(axis=0)
    centered = samples - mean
    m2 = (centered ** 2).mean(axis=0)
    m4 = (centered ** 4).mean(axis=0)
    var = m2 * n / (n - 1)
    mean_se = np.sqrt(var / n)
    var_se = np.sqrt(np.maximum(m4 - m2 ** 2, 0.0) / n)

    horizon = times[-1]
    flux = solve_diffusion(config.initial_profile, DiffusionParams(config.mu, g.N, "flux"), horizon)[times]
    paper = solve_diffusion(config.initial_profile, DiffusionParams(config.mu, g.N, "paper"), horizon)[times]

    deviates = np.abs(samples - flux[None]) > config.epsilon
    hits = deviates.sum(axis=0)
    union_hits = deviates.any(axis=2).sum(axis=0)

    return EnsembleReport(
        config=config,
        times=times,
        rings=g.ring_indices(),
        mean=mean,
        var=var,
        mean_se=mean_se,
        var_se=var_se,
        freq=hits / n,
        freq_radius=_binomial_radius(hits, n),
        union_freq=union_hits / n,
        union_radius=_binomial_radius(union_hits, n),
        rho_hat=flux,
        rho_hat_paper=paper,
        env_cheb=chebyshev_envelope(config.epsilon, g.R, config.alpha),
        env_var=np.array([variance_envelope(int(t), g.R) for t in times]),
        warnings=config.regime_warnings(),
    )


@dataclass(frozen=True)
class ScanRow:
    R: int
    times: tuple
    max_freq: float
    max_freq_radius: float
    max_union_freq: float
    envelope: float

    @property
    def below_envelope(self):
        if self.envelope > 1:
            return True
        return self.max_freq <= self.envelope + self.max_freq_radius


def window_times(R, alpha, count=8):
    """Up to ``count`` integer times spread evenly over ``[0, R^alpha]``."""
    top = min(math.floor(R ** alpha), R - 1)
    return tuple(int(t) for t in np.unique(np.linspace(0, top, count).round()))


def lln_convergence_scan(base_config, R_list, threads=1, time_count=8):
    """Sup-over-window deviation frequency for each ring length in ``R_list``."""
    R_list = [int(R) for R in R_list]
    if R_list != sorted(R_list) or len(set(R_list)) != len(R_list):
        raise ValueError("R_list must be strictly increasing")
    rows = []
    for R in R_list:
        cfg = base_config.with_R(R, window_times(R, base_config.alpha, time_count))
        report = run_ensemble(cfg, threads=threads)
        flat = np.argmax(report.freq)
        rows.append(ScanRow(
            R=R,
            times=cfg.times,
            max_freq=float(report.freq.flat[flat]),
            max_freq_radius=float(report.freq_radius.flat[flat]),
            max_union_freq=float(report.union_freq.max()),
            envelope=report.env_cheb,
        ))
    return rows


def scan_is_nonincreasing(rows):
    """Whether the max frequency never rises by more than the combined CI radii."""
    for prev, cur in zip(rows, rows[1:]):
        slack = math.hypot(prev.max_freq_radius, cur.max_freq_radius)
        if cur.max_freq > prev.max_freq + slack:
            return False
    return True
