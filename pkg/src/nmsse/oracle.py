"""Exact reference solutions for the atom + bath problem.

With the bath initially in vacuum and an excitation-conserving coupling,
the combined state stays in the span of ``|e,vac>``, ``|b,vac>`` and
``|b,1_k>``.  This module solves that (K+2)-dimensional problem exactly
(closed form for one resonant mode, RK4 otherwise) and projects it onto
bath position eigenstates to obtain conditioned system states.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .bath import SQRT2, BathConfiguration, BathSpec, ostensible_density
from .errors import ConfigError, DegenerateStateError, UnsupportedRegimeError
from .qcore import SystemState

PI_QUARTER = np.pi ** -0.25
#: Default oracle step; matches the SSE integrator.
DEFAULT_DT = 1e-4


@dataclass(frozen=True, eq=False)
class JointState:
    """Amplitudes of the combined state in the one-excitation sector.

    ``c_b1[k]`` is the amplitude of ``|b>|1_k>`` (one photon in mode k).
    """

    c_e0: complex
    c_b0: complex
    c_b1: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        c_b1 = np.atleast_1d(np.asarray(self.c_b1, dtype=complex)).copy()
        c_b1.flags.writeable = False
        object.__setattr__(self, "c_b1", c_b1)
        object.__setattr__(self, "c_e0", complex(self.c_e0))
        object.__setattr__(self, "c_b0", complex(self.c_b0))
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_vector(cls, y, t) -> "JointState":
        return cls(y[0], y[1], y[2:], t)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([[self.c_e0, self.c_b0], self.c_b1])

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.vector) ** 2))

    @property
    def excitation(self) -> float:
        return abs(self.c_e0) ** 2 + float(np.sum(np.abs(self.c_b1) ** 2))


def phi0(x):
    """Oscillator ground state in the position representation."""
    x = np.asarray(x, dtype=float)
    return PI_QUARTER * np.exp(-0.5 * x**2)


def phi1(x):
    """First excited oscillator state in the position representation."""
    x = np.asarray(x, dtype=float)
    return PI_QUARTER * SQRT2 * x * np.exp(-0.5 * x**2)


def initial_joint(spec: BathSpec, init: SystemState) -> JointState:
    return JointState(init.amp_e, init.amp_b, np.zeros(spec.K), spec.t0)


def analytic_tla(spec: BathSpec, init: SystemState, t: float) -> JointState:
    """Closed-form amplitudes for one resonant mode.

    c_e0(t) = c_e0(t0) cos(|g| tau), c_b0(t) = c_b0(t0),
    c_b1(t) = c_e0(t0) sin(|g| tau) exp(-i theta), with theta = arg g.
    """
    if not spec.is_resonant_single_mode:
        raise UnsupportedRegimeError("analytic solution needs K = 1 and zero detuning")
    g = spec.couplings[0]
    wt = abs(g) * (t - spec.t0)
    c_b1 = init.amp_e * np.sin(wt) * np.exp(-1j * np.angle(g))
    return JointState(init.amp_e * np.cos(wt), init.amp_b, [c_b1], t)


def sector_rhs(spec: BathSpec, detuning: float):
    g = spec.couplings
    gc = g.conj()

    def rhs(t, y):
        ph = spec.phases(t)
        c_e0, c_b1 = y[0], y[2:]
        dy = np.empty_like(y)
        dy[0] = -np.dot(g * ph, c_b1) - 0.5j * detuning * c_e0
        dy[1] = 0.5j * detuning * y[1]
        dy[2:] = gc * ph.conj() * c_e0 + 0.5j * detuning * c_b1
        return dy

    return rhs


def _rk4(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def sector_series(spec: BathSpec, init: SystemState, times, dt=DEFAULT_DT, detuning=0.0):
    """Integrate the sector ODE once and return the joint state at each of ``times``.

    ``times`` must be non-decreasing and not earlier than ``t0``.  Each
    interval between consecutive output times is split into equal RK4
    steps no longer than ``dt``.

    ``detuning`` adds the diagonal system term ``(delta/2)(|e><e| - |b><b|)``,
    which keeps the dynamics inside the sector.
    """
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < spec.t0 or np.any(np.diff(times) < 0)):
        raise ConfigError("output times must be sorted and >= t0")
    rhs = sector_rhs(spec, detuning)
    y = initial_joint(spec, init).vector
    t = spec.t0
    out = []
    for t_out in times:
        span = t_out - t
        n = int(np.ceil(span / dt - 1e-9)) if span > 0 else 0
        if n:
            h = span / n
            for i in range(n):
                y = _rk4(rhs, t + i * h, y, h)
        t = t_out
        out.append(JointState.from_vector(y, t))
    return out


def evolve_sector(spec: BathSpec, init: SystemState, t: float, dt=DEFAULT_DT, detuning=0.0):
    """Joint state at time ``t`` from the one-excitation-sector ODE (RK4)."""
    return sector_series(spec, init, [t], dt=dt, detuning=detuning)[0]


def exact_series(spec: BathSpec, init: SystemState, times, dt=DEFAULT_DT):
    """Closed form when available, RK4 sector solution otherwise."""
    if spec.is_resonant_single_mode:
        return [analytic_tla(spec, init, t) for t in times]
    return sector_series(spec, init, times, dt=dt)


def reduced_state(joint: JointState) -> np.ndarray:
    """Partial trace over the bath, in the (e, b) basis."""
    rho_ee = abs(joint.c_e0) ** 2
    rho_bb = abs(joint.c_b0) ** 2 + float(np.sum(np.abs(joint.c_b1) ** 2))
    rho_eb = joint.c_e0 * joint.c_b0.conjugate()
    return np.array([[rho_ee, rho_eb], [rho_eb.conjugate(), rho_bb]], dtype=complex)


def linear_vectors(joint: JointState, coords) -> np.ndarray:
    """``<{x_k}|Psi> / sqrt(Lambda({x_k}))`` for coordinates with modes on the last axis.

    Dividing by the vacuum wavefunction leaves ``c_e0 |e> +
    (c_b0 + sum_k sqrt(2) x_k c_b1[k]) |b>``; the result has shape
    ``coords.shape[:-1] + (2,)``.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != joint.c_b1.size:
        raise ConfigError("configuration size does not match the number of modes")
    amp_b = joint.c_b0 + SQRT2 * (coords @ joint.c_b1)
    amp_e = np.broadcast_to(joint.c_e0, amp_b.shape)
    return np.stack([amp_e, amp_b], axis=-1)


def projection_vectors(joint: JointState, coords) -> np.ndarray:
    """Unnormalized ``<{x_k}|Psi>`` built from the oscillator wavefunctions."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != joint.c_b1.size:
        raise ConfigError("configuration size does not match the number of modes")
    p0 = phi0(coords)
    p1 = phi1(coords)
    vac = np.prod(p0, axis=-1)
    one = np.zeros(vac.shape, dtype=complex)
    for k, c in enumerate(joint.c_b1):
        others = np.prod(np.delete(p0, k, axis=-1), axis=-1)
        one = one + c * p1[..., k] * others
    return np.stack([joint.c_e0 * vac, joint.c_b0 * vac + one], axis=-1)


def probability_density(joint: JointState, coords) -> np.ndarray:
    """``P({x_k}, t) = || <{x_k}|Psi(t)> ||^2``."""
    vec = projection_vectors(joint, coords)
    return np.sum(np.abs(vec) ** 2, axis=-1)


def conditional_state(joint: JointState, config) -> tuple[SystemState, float]:
    """Conditioned system state and its probability density at ``config``."""
    coords = config.coords if isinstance(config, BathConfiguration) else np.asarray(config)
    vec = projection_vectors(joint, coords)
    weight = float(np.sum(np.abs(vec) ** 2))
    if not weight > 0.0:
        raise DegenerateStateError(f"zero-probability configuration {coords!r}")
    return SystemState.from_vector(vec / np.sqrt(weight)), weight


def gauss_hermite_grid(K: int, order: int = 30):
    """Tensor Gauss-Hermite nodes ``(order**K, K)`` and weights for ``exp(-|x|^2)``."""
    x, w = np.polynomial.hermite.hermgauss(order)
    nodes = np.array(list(product(x, repeat=K)))
    weights = np.array([np.prod(c) for c in product(w, repeat=K)])
    return nodes, weights


def integrate_conditional(joint: JointState, order: int = 30):
    """Quadrature of ``P`` and of ``P |psi_x><psi_x|`` over all bath configurations.

    Returns ``(total_probability, rho)``.  Each integrand carries the factor
    ``Lambda`` exactly, which is the Gauss-Hermite weight up to ``pi^(-K/2)``.
    """
    K = joint.c_b1.size
    nodes, weights = gauss_hermite_grid(K, order)
    vec = projection_vectors(joint, nodes)
    p = np.sum(np.abs(vec) ** 2, axis=-1)
    if np.any(p <= 0.0):
        raise DegenerateStateError("quadrature node with zero probability")
    psi = vec / np.sqrt(p)[:, None]
    q = weights * np.pi ** (-K / 2) * p / ostensible_density(nodes)
    rho = np.einsum("n,ni,nj->ij", q, psi, psi.conj())
    return float(np.sum(q)), rho
