"""Data generation under spreading changes and the Monte Carlo benchmark harness."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from . import detect
from .cusum import cusum_transform
from .detect import DEFAULT_RATE_GRID, DetectionResult
from .graph import NetworkGraph, adjacency_matrix, all_pairs_distances, from_spec

__all__ = [
    "SpreadSpec",
    "spread_schedule",
    "generate_data",
    "coordinatewise_baseline",
    "BenchConfig",
    "BenchmarkRow",
    "monte_carlo",
    "write_benchmark_csv",
    "BENCH_CSV_COLUMNS",
]

MODELS = ("deterministic", "stochastic")


@dataclass(eq=False)
class SpreadSpec:
    """Ground-truth generative parameters for a spreading change.

    The change appears at node j_star at time z_star and reaches node j at
    spread time s_j; row j has mean mu0[j] for t <= s_j and mu0[j] + theta[j]
    strictly after. theta identically zero encodes the no-change null.
    """

    z_star: int
    j_star: int
    n: int
    mu0: np.ndarray
    theta: np.ndarray
    model: str = "deterministic"
    q: float | None = None

    def __post_init__(self) -> None:
        self.mu0 = np.atleast_1d(np.asarray(self.mu0, dtype=float))
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if self.mu0.shape != self.theta.shape or self.mu0.ndim != 1:
            raise ValueError(
                f"mu0 and theta must be 1-D with equal length, got {self.mu0.shape} and {self.theta.shape}"
            )
        p = self.mu0.shape[0]
        if not 1 <= self.z_star <= self.n - 1:
            raise ValueError(f"z_star must be in 1..{self.n - 1}, got {self.z_star}")
        if not 1 <= self.j_star <= p:
            raise ValueError(f"j_star must be in 1..{p}, got {self.j_star}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.model == "stochastic":
            if self.q is None or not 0.0 < self.q <= 1.0:
                raise ValueError(f"stochastic model needs q in (0, 1], got {self.q}")

    @property
    def p(self) -> int:
        return self.mu0.shape[0]

    @classmethod
    def uniform(
        cls,
        p: int,
        z_star: int,
        j_star: int,
        n: int,
        signal: float,
        mu0: float = 0.0,
        model: str = "deterministic",
        q: float | None = None,
    ) -> "SpreadSpec":
        """Equal change of size `signal` in every coordinate, constant baseline."""
        return cls(
            z_star=z_star,
            j_star=j_star,
            n=n,
            mu0=np.full(p, mu0),
            theta=np.full(p, signal),
            model=model,
            q=q,
        )


def spread_schedule(
    g: NetworkGraph,
    spec: SpreadSpec,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """First time the change reaches each node, as a length-p float vector.

    Deterministic model: z_star + d(j, j_star). Stochastic model: starting
    from the source at z_star, each infected node transmits to each
    susceptible neighbor independently with probability q per step; nodes
    not reached by time n get inf. Requires rng for the stochastic model.
    """
    if g.p != spec.p:
        raise ValueError(f"spec has p={spec.p} but graph has p={g.p}")
    if spec.model == "deterministic":
        dmat = all_pairs_distances(g)
        return spec.z_star + dmat[spec.j_star - 1].astype(float)

    if rng is None:
        raise ValueError("stochastic spread requires an rng")
    adj = adjacency_matrix(g)
    times = np.full(g.p, np.inf)
    infected = np.zeros(g.p, dtype=bool)
    infected[spec.j_star - 1] = True
    times[spec.j_star - 1] = spec.z_star
    for t in range(spec.z_star + 1, spec.n + 1):
        if infected.all():
            break
        # a susceptible node with c infected neighbors escapes with prob (1-q)^c
        n_infected_nbrs = adj[:, infected].sum(axis=1)
        at_risk = ~infected & (n_infected_nbrs > 0)
        draws = rng.random(g.p)
        caught = at_risk & (draws < 1.0 - (1.0 - spec.q) ** n_infected_nbrs)
        times[caught] = t
        infected |= caught
    return times


def generate_data(
    g: NetworkGraph,
    spec: SpreadSpec,
    rng: np.random.Generator | None = None,
    noise_sd: float = 1.0,
    schedule: np.ndarray | None = None,
) -> np.ndarray:
    """Draw a p-by-n data matrix: row means follow the spread schedule, with
    independent Gaussian noise of standard deviation noise_sd added to every
    entry. noise_sd=0 returns the exact mean matrix (useful in tests).

    Pass a precomputed schedule to reuse one stochastic realization.
    """
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be nonnegative, got {noise_sd}")
    if schedule is None:
        schedule = spread_schedule(g, spec, rng)
    t_grid = np.arange(1, spec.n + 1)
    changed = t_grid[None, :] > schedule[:, None]
    x = spec.mu0[:, None] + spec.theta[:, None] * changed
    if noise_sd > 0.0:
        if rng is None:
            raise ValueError("noisy generation requires an rng")
        x = x + noise_sd * rng.standard_normal((spec.p, spec.n))
    return x


def coordinatewise_baseline(x: np.ndarray, threshold: float | None = None) -> DetectionResult:
    """Per-row CUSUM baseline: test each row on its own, then take the
    earliest detected change.

    Each row j picks the time of its largest |T[j, .]| (ties to the smallest
    time). Rows whose peak fails the detection threshold are treated as
    changeless and dropped; among the rest the earliest peak wins, row ties
    going to the smallest label. If no row passes, all rows compete.
    threshold defaults to the universal level sqrt(2 log(p n)); pass 0 to
    rank every row regardless of peak height. stat_value reports |T| at the
    winning (row, time).
    """
    t_mat = cusum_transform(x)
    p, width = t_mat.shape
    if threshold is None:
        threshold = math.sqrt(2.0 * math.log(p * (width + 1)))
    abs_t = np.abs(t_mat)
    peak_t = np.argmax(abs_t, axis=1)  # first max per row = smallest t
    peak_v = abs_t[np.arange(p), peak_t]
    detected = np.nonzero(peak_v >= threshold)[0]
    if detected.size:
        j0 = int(detected[np.argmin(peak_t[detected])])  # first min = smallest label
    else:
        j0 = int(np.argmin(peak_t))
    t0 = int(peak_t[j0])
    return DetectionResult(j_hat=j0 + 1, z_hat=t0 + 1, stat_value=float(abs_t[j0, t0]))


# ---------------------------------------------------------------------------
# Monte Carlo benchmarks
# ---------------------------------------------------------------------------

METHODS = ("SD", "rSD", "coordwise")


@dataclass(eq=False)
class BenchConfig:
    """One benchmark configuration: a generative setting plus methods to score."""

    n: int
    p: int
    z_star: int
    j_star: int
    signal: float
    model: str = "deterministic"
    q: float | None = None
    graph: str | None = None  # graph spec string; default cycle:<p>
    methods: tuple[str, ...] = ("SD", "coordwise")
    q_grid: tuple[float, ...] = DEFAULT_RATE_GRID
    noise_sd: float = 1.0

    def __post_init__(self) -> None:
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if self.graph is None:
            self.graph = f"cycle:{self.p}"

    def model_token(self) -> str:
        if self.model == "stochastic":
            return f"stoch:{self.q:g}"
        return "det"

    def make_spec(self) -> SpreadSpec:
        return SpreadSpec.uniform(
            p=self.p,
            z_star=self.z_star,
            j_star=self.j_star,
            n=self.n,
            signal=self.signal,
            model=self.model,
            q=self.q,
        )


@dataclass(eq=False)
class BenchmarkRow:
    """Aggregated deviations for one method in one configuration.

    mad_z and mad_j are mean absolute deviations of the estimated time and
    source label; mad_j_dist measures the source error in graph distance.
    """

    n: int
    p: int
    z_star: int
    j_star: int
    signal: float
    model: str
    method: str
    mad_z: float
    mad_j: float
    mad_j_dist: float
    reps: int
    seed: int


BENCH_CSV_COLUMNS = (
    "n",
    "p",
    "z_star",
    "j_star",
    "signal",
    "model",
    "method",
    "mad_z",
    "mad_j",
    "mad_j_dist",
    "reps",
    "seed",
)


def _run_replication(g, spec, methods, q_grid, noise_sd, seed_seq):
    rng = np.random.default_rng(seed_seq)
    x = generate_data(g, spec, rng, noise_sd=noise_sd)
    out = {}
    for method in methods:
        if method == "SD":
            r = detect.estimate(x, g, kind="quadratic")
        elif method == "rSD":
            r = detect.estimate_with_rate_search(x, g, q_grid)
        else:
            r = coordinatewise_baseline(x)
        out[method] = (r.z_hat, r.j_hat)
    return out


def monte_carlo(
    config: BenchConfig,
    reps: int,
    seed: int,
    n_jobs: int = 1,
) -> list[BenchmarkRow]:
    """Run `reps` independent replications of a configuration and aggregate.

    Each replication draws from its own child stream of SeedSequence(seed),
    so results are identical for any n_jobs and any replication order. All
    requested methods score the same data within a replication.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    g = from_spec(config.graph)
    if g.p != config.p:
        raise ValueError(f"graph spec {config.graph!r} has p={g.p}, config says p={config.p}")
    spec = config.make_spec()
    dmat = all_pairs_distances(g)
    children = np.random.SeedSequence(seed).spawn(reps)

    runner = Parallel(n_jobs=n_jobs) if n_jobs != 1 else None
    args = [(g, spec, config.methods, config.q_grid, config.noise_sd, child) for child in children]
    if runner is None:
        results = [_run_replication(*a) for a in args]
    else:
        results = runner(delayed(_run_replication)(*a) for a in args)

    rows = []
    for method in config.methods:
        z_hats = np.array([r[method][0] for r in results], dtype=float)
        j_hats = np.array([r[method][1] for r in results], dtype=int)
        rows.append(
            BenchmarkRow(
                n=config.n,
                p=config.p,
                z_star=config.z_star,
                j_star=config.j_star,
                signal=config.signal,
                model=config.model_token(),
                method=method,
                mad_z=float(np.mean(np.abs(z_hats - config.z_star))),
                mad_j=float(np.mean(np.abs(j_hats - config.j_star))),
                mad_j_dist=float(np.mean(dmat[j_hats - 1, config.j_star - 1])),
                reps=reps,
                seed=seed,
            )
        )
    return rows


def write_benchmark_csv(path, rows: list[BenchmarkRow], append: bool = False) -> None:
    """Write benchmark rows as CSV with a fixed column order."""
    mode = "a" if append else "w"
    with open(path, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if not append:
            writer.writerow(BENCH_CSV_COLUMNS)
        for row in rows:
            writer.writerow([getattr(row, col) for col in BENCH_CSV_COLUMNS])
