"""Bosonic bath: mode specification, correlation functions, noise function.

Units are hbar = 1 with couplings ``g_k`` and detunings ``Omega_k`` in the
same inverse-time unit.  Every phase factor depends on ``t - t0`` only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class BathSpec:
    """K bath modes with complex couplings and real detunings.

    Parameters
    ----------
    couplings : sequence of complex
        ``g_k``.
    detunings : sequence of float, optional
        ``Omega_k = omega_k - Omega``; zeros (resonant) if omitted.
    t0 : float
        Start time of the interaction; the bath is in vacuum at ``t0``.
    """

    couplings: np.ndarray
    detunings: np.ndarray = None
    t0: float = 0.0

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.couplings, dtype=complex)).copy()
        if self.detunings is None:
            om = np.zeros(g.shape, dtype=float)
        else:
            om = np.atleast_1d(np.asarray(self.detunings, dtype=float)).copy()
        if g.ndim != 1 or g.size == 0:
            raise ConfigError("bath needs at least one mode")
        if om.shape != g.shape:
            raise ConfigError("couplings and detunings must have equal length")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(om))):
            raise ConfigError("couplings and detunings must be finite")
        if not np.isfinite(self.t0):
            raise ConfigError("t0 must be finite")
        g.flags.writeable = False
        om.flags.writeable = False
        object.__setattr__(self, "couplings", g)
        object.__setattr__(self, "detunings", om)
        object.__setattr__(self, "t0", float(self.t0))

    @classmethod
    def single_mode(cls, g=1.0, detuning=0.0, t0=0.0) -> "BathSpec":
        return cls([g], [detuning], t0)

    @classmethod
    def from_triples(cls, triples, t0=0.0) -> "BathSpec":
        """Build from ``(Re g, Im g, Omega)`` triples as stored in config files."""
        triples = [tuple(map(float, tr)) for tr in triples]
        if any(len(tr) != 3 for tr in triples):
            raise ConfigError("bath modes must be (Re g, Im g, Omega) triples")
        return cls([complex(a, b) for a, b, _ in triples], [om for *_, om in triples], t0)

    @property
    def K(self) -> int:
        return self.couplings.size

    @property
    def is_resonant_single_mode(self) -> bool:
        return self.K == 1 and self.detunings[0] == 0.0

    def __eq__(self, other):
        if not isinstance(other, BathSpec):
            return NotImplemented
        return (
            np.array_equal(self.couplings, other.couplings)
            and np.array_equal(self.detunings, other.detunings)
            and self.t0 == other.t0
        )

    def __hash__(self):
        return hash((self.couplings.tobytes(), self.detunings.tobytes(), self.t0))

    def phases(self, t) -> np.ndarray:
        """``exp(-i Omega_k (t - t0))`` for each mode."""
        return np.exp(-1j * self.detunings * (t - self.t0))


@dataclass(frozen=True, eq=False)
class BathConfiguration:
    """Real bath coordinates ``{x_k}`` at time ``t``."""

    coords: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.coords, dtype=float)).copy()
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise ConfigError("bath coordinates must be a finite 1-d array")
        x.flags.writeable = False
        object.__setattr__(self, "coords", x)
        object.__setattr__(self, "t", float(self.t))

    @property
    def K(self) -> int:
        return self.coords.size


def alpha(spec: BathSpec, tau):
    """``alpha(tau) = sum_k |g_k|^2 exp(-i Omega_k tau)``."""
    tau = np.asarray(tau, dtype=float)
    w = np.abs(spec.couplings) ** 2
    out = np.exp(-1j * np.multiply.outer(tau, spec.detunings)) @ w
    return complex(out) if out.ndim == 0 else out


def gamma(spec: BathSpec, s_plus_sprime):
    """``gamma(s + s') = sum_k g_k^2 exp(-i Omega_k (s + s' - 2 t0))``."""
    arg = np.asarray(s_plus_sprime, dtype=float) - 2.0 * spec.t0
    out = np.exp(-1j * np.multiply.outer(arg, spec.detunings)) @ spec.couplings**2
    return complex(out) if out.ndim == 0 else out


def ostensible_density(coords) -> np.ndarray:
    """``Lambda({x_k}) = prod_k exp(-x_k^2) / sqrt(pi)``; last axis is the mode axis."""
    coords = np.asarray(coords, dtype=float)
    return np.prod(np.exp(-(coords**2)) / np.sqrt(np.pi), axis=-1)


def trajectory_rng(master_seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based (Philox) stream for trajectory ``index`` of a run.

    The stream depends only on ``(master_seed, index)``, never on how the
    trajectories are scheduled across workers.
    """
    if master_seed < 0 or index < 0:
        raise ConfigError("seeds and trajectory indices must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([master_seed, index])))


def sample_initial(spec: BathSpec, rng: np.random.Generator) -> BathConfiguration:
    """Draw ``{x_k(t0)}`` from the ostensible distribution (mean 0, variance 1/2)."""
    return BathConfiguration(rng.normal(0.0, np.sqrt(0.5), size=spec.K), spec.t0)


def sample_batch(spec: BathSpec, master_seed: int, indices) -> np.ndarray:
    """Initial coordinates for trajectories ``indices``, shape ``(len(indices), K)``."""
    return np.array(
        [sample_initial(spec, trajectory_rng(master_seed, int(i))).coords for i in indices]
    ).reshape(len(indices), spec.K)


def noise_z(spec: BathSpec, config, s) -> complex:
    """``z(t, s) = sum_k g_k sqrt(2) x_k(t) exp(-i Omega_k (s - t0))``.

    ``config`` is a :class:`BathConfiguration` or an array of coordinates
    whose last axis runs over modes (vectorized over trajectories).
    """
    coords = config.coords if isinstance(config, BathConfiguration) else np.asarray(config)
    out = coords @ (SQRT2 * spec.couplings * spec.phases(s))
    return complex(out) if np.ndim(out) == 0 else out
