"""Invariant checks run by ``nmsse verify``.

Each check returns a :class:`CheckResult` holding the measured value and the
tolerance it was held to.  Checks that do not apply to the configured bath
(e.g. closed-form comparisons for a detuned bath) report ``skipped``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, sample_batch
from .bohm import continuity_residual, velocity_field
from .oracle import (
    JointState,
    conditional_state,
    exact_series,
    integrate_conditional,
    linear_vectors,
    reduced_state,
    sector_series,
)
from .qcore import SIGMA, SystemState, expectation
from .sse import (
    AnsatzCoefficients,
    IntegratorConfig,
    ansatz_coeffs_analytic,
    ansatz_coeffs_ode_step,
    drift,
    integrate_batch,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    skipped: bool = False
    detail: str = ""

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{status:4s}  {self.name:22s} value={self.value:.3e}  tol={self.tolerance:.1e}  {self.detail}"


def _skip(name, tol, why):
    return CheckResult(name, float("nan"), tol, True, True, why)


def check_oracle_equivalence(spec, init, cfg, seed, n_traj=20, tol=1e-6):
    """Nonlinear SSE state vs normalized projection of the exact joint state."""
    x0 = sample_batch(spec, seed, range(n_traj))
    res = integrate_batch(spec, init, cfg, x0, "nonlinear")
    joints = exact_series(spec, init, res.times, dt=cfg.step)
    worst = 0.0
    for m, joint in enumerate(joints):
        ref = linear_vectors(joint, res.coords[m])
        ref = ref / np.linalg.norm(ref, axis=-1, keepdims=True)
        fid = np.abs(np.sum(ref.conj() * res.psi[m], axis=-1)) ** 2
        worst = max(worst, float(np.max(1.0 - fid)))
    return CheckResult("oracle_equivalence", worst, tol, worst <= tol, detail="1 - min fidelity")


def check_ansatz_ode(spec, cfg, tol=1e-6):
    """Riccati-integrated A, B against the tan closed form over the horizon."""
    if not spec.is_resonant_single_mode:
        return _skip("ansatz_ode", tol, "closed form needs one resonant mode")
    c = AnsatzCoefficients.initial(spec)
    h = cfg.step
    worst = 0.0
    for i in range(cfg.n_steps):
        c = ansatz_coeffs_ode_step(c, spec, h, cfg.method, cfg.blowup_threshold)
        t = spec.t0 + (i + 1) * h
        ref = ansatz_coeffs_analytic(spec, t)
        worst = max(worst, abs(c.A - ref.A) / abs(ref.A), abs(c.B - ref.B) / abs(ref.B))
    return CheckResult("ansatz_ode", worst, tol, worst <= tol, detail="max relative error")


def check_bohm_drift(spec, init, cfg, seed, n_samples=1000, tol=1e-12):
    """Velocity field from the velocity operator vs the Girsanov drift formula.

    The identity is algebraic, so random joint states are used rather than
    states reachable from ``init``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        t = spec.t0 + rng.uniform(0.0, cfg.horizon)
        amps = rng.normal(size=spec.K + 2) + 1j * rng.normal(size=spec.K + 2)
        joint = JointState.from_vector(amps / np.linalg.norm(amps), t)
        x = rng.normal(0.0, np.sqrt(0.5), spec.K)
        psi, _ = conditional_state(joint, x)
        v = velocity_field(joint, x, spec, t)
        d = drift(spec, expectation(psi, SIGMA), t)
        worst = max(worst, float(np.max(np.abs(v - d))))
    return CheckResult("bohm_equals_drift", worst, tol, worst <= tol, detail="max |v - drift|")


def check_continuity(spec, init, cfg, h=1e-2, tol=5e-3):
    if spec.K != 1:
        return _skip("continuity", tol, "grid check implemented for K = 1")
    t = spec.t0 + min(0.5, 0.5 * cfg.horizon)
    d = 1e-4
    joints = sector_series(spec, init, [t - d, t, t + d], dt=min(cfg.step, d))
    grid = np.arange(-4.0, 4.0 + h / 2, h)
    r = continuity_residual(joints, spec, grid)
    return CheckResult("continuity", r, tol, r <= tol, detail=f"t={t:.3g}, h={h:g}")


def check_quadrature(spec, init, cfg, n_times=10, order=30, tol=1e-8):
    if spec.K > 3:
        return _skip("quadrature", tol, "tensor quadrature limited to K <= 3")
    times = spec.t0 + np.linspace(0.0, cfg.horizon, n_times)
    joints = exact_series(spec, init, times, dt=cfg.step)
    worst = 0.0
    for joint in joints:
        total, rho = integrate_conditional(joint, order)
        worst = max(worst, abs(total - 1.0), float(np.max(np.abs(rho - reduced_state(joint)))))
    return CheckResult("quadrature", worst, tol, worst <= tol, detail="max |int - exact|")


def run_checks(spec: BathSpec, init: SystemState, cfg: IntegratorConfig, seed: int = 0):
    return [
        check_oracle_equivalence(spec, init, cfg, seed),
        check_ansatz_ode(spec, cfg),
        check_bohm_drift(spec, init, cfg, seed),
        check_continuity(spec, init, cfg),
        check_quadrature(spec, init, cfg),
    ]
