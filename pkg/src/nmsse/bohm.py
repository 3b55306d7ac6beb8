"""Pilot-wave view of the bath coordinates.

The exact combined state acts as a guiding wave for the bath positions
``{x_k}`` in the interaction frame.  The velocity operator
``v_k = -i [X_k, V_int]`` is a pure system operator for the linear
coupling, so the velocity field is its expectation in the conditioned
system state.  Phases use ``t - t0`` like the rest of the package.
"""

from __future__ import annotations

import numpy as np

from .bath import BathConfiguration, BathSpec
from .errors import ConfigError, NodeError
from .oracle import (
    JointState,
    conditional_state,
    initial_joint,
    linear_vectors,
    probability_density,
    sector_rhs,
)
from .qcore import SIGMA, SIGMA_DAG, SystemState, expectation
from .sse import IntegratorConfig

#: Relative conditional weight ``||psi_bar||^2 = P / Lambda`` treated as a node.
NODE_WEIGHT = 1e-14


def velocity_operator(spec: BathSpec, k: int, t: float) -> np.ndarray:
    """``[g_k^* e^{i Omega_k tau} L + g_k e^{-i Omega_k tau} L^dag] / sqrt(2)``."""
    gph = spec.couplings[k] * spec.phases(t)[k]
    return (gph.conjugate() * SIGMA + gph * SIGMA_DAG) / np.sqrt(2.0)


def velocity_field(joint: JointState, config, spec: BathSpec, t=None) -> np.ndarray:
    """Velocities ``v_k = Re <psi_x| v_k |psi_x>`` at one configuration."""
    t = joint.t if t is None else t
    coords = config.coords if isinstance(config, BathConfiguration) else np.asarray(config)
    rel = float(np.sum(np.abs(linear_vectors(joint, coords)) ** 2))
    if not rel >= NODE_WEIGHT:
        raise NodeError(f"configuration {coords!r} sits on a node of the guiding wave")
    psi, _ = conditional_state(joint, coords)
    return np.array(
        [expectation(psi, velocity_operator(spec, k, t)).real for k in range(spec.K)]
    )


def _velocity_batch(spec: BathSpec, y: np.ndarray, x: np.ndarray, t: float) -> np.ndarray:
    joint = JointState.from_vector(y, t)
    vec = linear_vectors(joint, x)
    w = np.sum(np.abs(vec) ** 2, axis=-1)
    bad = np.flatnonzero(~(w >= NODE_WEIGHT))
    if bad.size:
        raise NodeError(f"trajectories {bad.tolist()} reached a node at t={t:.6g}")
    ops = np.array([velocity_operator(spec, k, t) for k in range(spec.K)])
    num = np.einsum("ni,kij,nj->nk", vec.conj(), ops, vec)
    return num.real / w[:, None]


def bohmian_bundle(spec: BathSpec, init: SystemState, x0, cfg: IntegratorConfig):
    """Integrate many Bohmian trajectories along the exact guiding wave.

    The guiding wave and the coordinates are advanced together with RK4
    (``cfg.method`` is ignored).  Returns ``(times, coords)`` with coords of
    shape ``(M, N, K)`` sampled every ``cfg.stride`` steps.
    """
    x = np.array(x0, dtype=float).reshape(-1, spec.K)
    if not np.all(np.isfinite(x)):
        raise ConfigError("initial coordinates must be finite")
    wave = sector_rhs(spec, 0.0)
    y = initial_joint(spec, init).vector
    h = cfg.step
    record = set(cfg.output_steps().tolist())
    times, out = [spec.t0], [x.copy()]

    def rhs(t, state):
        yy, xx = state
        return wave(t, yy), _velocity_batch(spec, yy, xx, t)

    for i in range(cfg.n_steps):
        t = spec.t0 + i * h
        k1 = rhs(t, (y, x))
        k2 = rhs(t + 0.5 * h, (y + 0.5 * h * k1[0], x + 0.5 * h * k1[1]))
        k3 = rhs(t + 0.5 * h, (y + 0.5 * h * k2[0], x + 0.5 * h * k2[1]))
        k4 = rhs(t + h, (y + h * k3[0], x + h * k3[1]))
        y = y + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        x = x + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if i + 1 in record:
            times.append(t + h)
            out.append(x.copy())
    return np.array(times), np.array(out)


def bohmian_trajectory(spec: BathSpec, init: SystemState, x0: BathConfiguration, cfg: IntegratorConfig):
    """Single trajectory as a list of ``(t, coords)`` pairs."""
    coords = x0.coords if isinstance(x0, BathConfiguration) else np.asarray(x0)
    times, xs = bohmian_bundle(spec, init, coords[None, :], cfg)
    return [(float(t), xs[m, 0].copy()) for m, t in enumerate(times)]


def continuity_terms(joints, spec: BathSpec, grid):
    """Time-derivative and divergence terms of the continuity equation (K = 1).

    ``joints`` are three guiding-wave snapshots at equally spaced times
    ``t - d, t, t + d``; ``dP/dt`` is taken by central difference in time
    and ``d(P v)/dx`` by central difference on ``grid`` (uniform).  Both
    arrays refer to the interior grid points ``grid[1:-1]``.
    """
    if spec.K != 1:
        raise ConfigError("grid continuity check is implemented for K = 1")
    before, mid, after = joints
    d = mid.t - before.t
    if not (d > 0 and abs((after.t - mid.t) - d) <= 1e-9 * max(1.0, abs(d))):
        raise ConfigError("snapshots must be equally spaced in time")
    grid = np.asarray(grid, dtype=float)
    h = grid[1] - grid[0]
    if not np.allclose(np.diff(grid), h, rtol=1e-9, atol=0):
        raise ConfigError("grid must be uniform")
    pts = grid[:, None]
    dPdt = (probability_density(after, pts) - probability_density(before, pts)) / (2 * d)
    P = probability_density(mid, pts)
    v = _velocity_batch(spec, mid.vector, pts, mid.t)[:, 0]
    j = P * v
    div = (j[2:] - j[:-2]) / (2 * h)
    return dPdt[1:-1], div


def continuity_residual(joints, spec: BathSpec, grid) -> float:
    """``max |dP/dt + d(P v)/dx|`` over the interior grid."""
    dPdt, div = continuity_terms(joints, spec, grid)
    return float(np.max(np.abs(dPdt + div)))
