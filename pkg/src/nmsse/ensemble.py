"""Monte Carlo ensembles of SSE trajectories and their comparison with the exact state.

Trajectories are grouped in fixed-size chunks by index.  Chunks may run in
worker processes, but their partial sums are always merged in chunk order
with compensated summation, so the output depends only on
``(spec, init, cfg, N, master_seed, mode, chunk_size)``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bath import BathSpec, sample_batch
from .errors import ConfigError, DegenerateStateError, TrajectoryError
from .oracle import exact_series, reduced_state
from .qcore import SystemState, bloch_array, bloch_of_vectors
from .sse import IntegratorConfig, integrate_batch

DEFAULT_CHUNK = 500


class _Kahan:
    """Elementwise compensated sum of equally shaped arrays."""

    def __init__(self, shape, dtype=float):
        self.total = np.zeros(shape, dtype=dtype)
        self.comp = np.zeros(shape, dtype=dtype)

    def add(self, value):
        y = value - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


@dataclass
class EnsembleAccumulator:
    """Running sums over trajectories at each output time.

    ``rho`` samples are ``|psi><psi|`` in nonlinear mode and
    ``|psi_bar><psi_bar|`` (Girsanov-weighted) in linear mode; the Bloch
    samples are the Bloch components of those same matrices.
    """

    times: np.ndarray
    mode: str = "nonlinear"
    master_seed: int = 0
    count: int = 0
    _rho: _Kahan = field(init=False, repr=False)
    _bloch: _Kahan = field(init=False, repr=False)
    _bloch_sq: _Kahan = field(init=False, repr=False)
    _w: _Kahan = field(init=False, repr=False)
    _w_sq: _Kahan = field(init=False, repr=False)

    def __post_init__(self):
        m = len(self.times)
        self._rho = _Kahan((m, 2, 2), complex)
        self._bloch = _Kahan((m, 3))
        self._bloch_sq = _Kahan((m, 3))
        self._w = _Kahan(m)
        self._w_sq = _Kahan(m)

    def add_chunk(self, sums: dict):
        self._rho.add(sums["rho"])
        self._bloch.add(sums["bloch"])
        self._bloch_sq.add(sums["bloch_sq"])
        self._w.add(sums["w"])
        self._w_sq.add(sums["w_sq"])
        self.count += sums["n"]

    def mean_rho(self) -> np.ndarray:
        rho = self._rho.total / self.count
        return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))

    def mean_bloch(self) -> np.ndarray:
        return self._bloch.total / self.count

    def bloch_std(self) -> np.ndarray:
        """Sample standard deviation of the per-trajectory Bloch samples."""
        n = self.count
        if n < 2:
            return np.full_like(self._bloch.total, np.nan)
        mean = self.mean_bloch()
        var = (self._bloch_sq.total - n * mean**2) / (n - 1)
        return np.sqrt(np.maximum(var, 0.0))

    def bloch_stderr(self) -> np.ndarray:
        return self.bloch_std() / np.sqrt(self.count)

    def mean_weight(self) -> np.ndarray:
        return self._w.total / self.count

    def weight_std(self) -> np.ndarray:
        n = self.count
        if n < 2:
            return np.full_like(self._w.total, np.nan)
        mean = self.mean_weight()
        return np.sqrt(np.maximum((self._w_sq.total - n * mean**2) / (n - 1), 0.0))


def _chunk_sums(spec, init, cfg, mode, master_seed, start, stop):
    x0 = sample_batch(spec, master_seed, range(start, stop))
    try:
        res = integrate_batch(spec, init, cfg, x0, mode)
    except DegenerateStateError as exc:
        raise TrajectoryError(
            f"trajectories in [{start}, {stop}) failed: {exc}", failures=[(start, stop, str(exc))]
        ) from exc
    psi = res.psi
    rho = np.einsum("mni,mnj->mij", psi, psi.conj())
    b = bloch_of_vectors(psi)
    w = res.weight
    return {
        "times": res.times,
        "rho": rho,
        "bloch": b.sum(axis=1),
        "bloch_sq": (b**2).sum(axis=1),
        "w": w.sum(axis=1),
        "w_sq": (w**2).sum(axis=1),
        "n": stop - start,
    }


def _chunk_job(args):
    return _chunk_sums(*args)


def run_ensemble(
    spec: BathSpec,
    init: SystemState,
    cfg: IntegratorConfig,
    N: int,
    master_seed: int = 0,
    mode: str = "nonlinear",
    jobs: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> EnsembleAccumulator:
    """Average ``N`` trajectories; trajectory ``i`` draws from stream ``(master_seed, i)``.

    Any failing trajectory aborts the whole run with :class:`TrajectoryError`
    since dropping members would bias the average.
    """
    if N < 1:
        raise ConfigError("N must be at least 1")
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")
    bounds = [(s, min(s + chunk_size, N)) for s in range(0, N, chunk_size)]
    tasks = [(spec, init, cfg, mode, master_seed, a, b) for a, b in bounds]
    acc = EnsembleAccumulator(cfg.output_times(spec.t0), mode, master_seed)
    if jobs == 1 or len(tasks) == 1:
        results = map(_chunk_job, tasks)
        for sums in results:
            acc.add_chunk(sums)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for sums in pool.map(_chunk_job, tasks):
                acc.add_chunk(sums)
    return acc


def oracle_rho_series(spec: BathSpec, init: SystemState, times, dt=1e-4) -> np.ndarray:
    """Exact reduced states at ``times``, shape ``(M, 2, 2)``."""
    return np.array([reduced_state(j) for j in exact_series(spec, init, times, dt=dt)])


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    times: np.ndarray
    d_bloch: np.ndarray  # (M, 3) absolute Bloch-component differences
    max_entry_diff: np.ndarray  # (M,)
    N: int
    seed: int

    @property
    def max_bloch_diff(self) -> float:
        return float(np.max(self.d_bloch))

    @property
    def rms_bloch_diff(self) -> float:
        return float(np.sqrt(np.mean(self.d_bloch**2)))

    def rows(self):
        for t, d, e in zip(self.times, self.d_bloch, self.max_entry_diff):
            yield (t, d[0], d[1], d[2], e)


def compare_rho(times, rho, oracle_times, oracle_rho, N=0, seed=0) -> ComparisonReport:
    """Compare two ``(M, 2, 2)`` series sampled on the same grid."""
    times = np.asarray(times, dtype=float)
    oracle_times = np.asarray(oracle_times, dtype=float)
    if times.shape != oracle_times.shape or not np.allclose(times, oracle_times, rtol=0, atol=1e-9):
        raise ConfigError("time grids of ensemble and oracle do not match")
    rho = np.asarray(rho)
    oracle_rho = np.asarray(oracle_rho)
    d_bloch = np.abs(bloch_array(rho) - bloch_array(oracle_rho))
    max_entry = np.max(np.abs(rho - oracle_rho), axis=(-2, -1))
    return ComparisonReport(times, d_bloch, max_entry, N, seed)


def compare(acc: EnsembleAccumulator, oracle_times, oracle_rho) -> ComparisonReport:
    """Entrywise and Bloch differences between an ensemble average and the oracle."""
    return compare_rho(acc.times, acc.mean_rho(), oracle_times, oracle_rho, acc.count, acc.master_seed)


@dataclass(frozen=True)
class ConvergenceTable:
    N: np.ndarray
    rms_error: np.ndarray  # root of the seed-averaged mean-square Bloch error
    per_seed: np.ndarray  # (len(N), len(seeds)) RMS Bloch error per run
    slope: float


def derived_seed(seed: int, N: int) -> int:
    """Master seed for the run with ``N`` trajectories, independent across ``N``."""
    return int(np.random.SeedSequence([seed, N]).generate_state(1)[0])


def convergence_study(
    spec: BathSpec,
    init: SystemState,
    cfg: IntegratorConfig,
    N_list,
    seeds,
    mode="nonlinear",
    jobs=1,
    chunk_size=DEFAULT_CHUNK,
) -> ConvergenceTable:
    """RMS Bloch error against the oracle as a function of ensemble size.

    The slope is the least-squares fit of ``log rms`` against ``log N``.
    """
    N_list = [int(n) for n in N_list]
    if sorted(N_list) != N_list or len(set(N_list)) != len(N_list):
        raise ConfigError("N_list must be strictly ascending")
    times = cfg.output_times(spec.t0)
    oracle = oracle_rho_series(spec, init, times)
    per_seed = np.empty((len(N_list), len(seeds)))
    for a, n in enumerate(N_list):
        for b, seed in enumerate(seeds):
            acc = run_ensemble(spec, init, cfg, n, derived_seed(seed, n), mode, jobs, chunk_size)
            per_seed[a, b] = compare(acc, times, oracle).rms_bloch_diff
    rms = np.sqrt(np.mean(per_seed**2, axis=1))
    slope = float(np.polyfit(np.log(N_list), np.log(rms), 1)[0]) if len(N_list) > 1 else float("nan")
    return ConvergenceTable(np.array(N_list), rms, per_seed, slope)
