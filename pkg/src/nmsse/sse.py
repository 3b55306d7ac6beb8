"""Position-unraveling non-Markovian SSE for a two-level atom.

The system operator is the atomic lowering operator ``L = sigma``.  The
functional derivatives of the linear state factor as
``sqrt(2) d/dx_k |psi_bar> = F_k(t) sigma |psi_bar>``, where the mode
amplitudes ``F_k`` are noise-independent and obey the Riccati system

    dF_k/dt = g_k^* e^{i Omega_k tau} + A(t) F_k,        F_k(t0) = 0,

with ``A = sum_k g_k e^{-i Omega_k tau} F_k`` and
``B = sum_k g_k^* e^{i Omega_k tau} F_k`` (``tau = t - t0``).  The ansatz
operators are then ``A_z = A sigma`` and ``B_z = B sigma``; for a single
resonant mode this reduces to ``dA/dt = |g|^2 + A^2`` and
``dB/dt = g^{*2} + A B``.

Given a sample ``x_k(t0)`` the nonlinear SSE is an ordinary differential
equation for ``(psi, x, F)``: the noise ``z(t, t)`` only changes through
the drift of ``x``, so no stochastic-calculus corrections appear.  All the
randomness sits in the initial coordinates.

Integration is vectorized over a batch of trajectories; the scalar
``step_*`` functions are thin wrappers around the same kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .bath import SQRT2, BathConfiguration, BathSpec, noise_z, sample_initial, trajectory_rng
from .errors import ConfigError, DegenerateStateError, SingularityError, UnsupportedRegimeError
from .qcore import BlochVector, SystemState, bloch_of_vectors

MODES = ("nonlinear", "linear")
METHODS = ("rk4", "euler")
COEFFICIENTS = ("ode", "analytic")
#: Pre-renormalization norm below which a nonlinear step is declared degenerate.
COLLAPSE_NORM = 1e-12


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    ``stride`` is the number of steps between recorded samples.
    ``coefficients`` selects ODE-integrated (``"ode"``) or closed-form
    (``"analytic"``, one resonant mode only) ansatz coefficients.
    """

    dt: float = 1e-4
    horizon: float = 1.5
    method: str = "rk4"
    blowup_threshold: float = 1e6
    stride: int = 100
    coefficients: str = "ode"

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.coefficients not in COEFFICIENTS:
            raise ConfigError(f"coefficients must be one of {COEFFICIENTS}")
        if not self.blowup_threshold > 0:
            raise ConfigError("blowup_threshold must be positive")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ConfigError("stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(1, int(np.ceil(self.horizon / self.dt - 1e-9)))

    @property
    def step(self) -> float:
        """Actual step size: ``horizon`` split into ``n_steps`` equal steps."""
        return self.horizon / self.n_steps

    def output_steps(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps

    def output_times(self, t0: float = 0.0) -> np.ndarray:
        return t0 + self.output_steps() * self.step


@dataclass(frozen=True, eq=False)
class AnsatzCoefficients:
    """Scalar ansatz coefficients at time ``t`` plus the mode amplitudes ``F``."""

    A: complex
    B: complex
    F: np.ndarray
    t: float

    @classmethod
    def initial(cls, spec: BathSpec) -> "AnsatzCoefficients":
        return cls(0j, 0j, np.zeros(spec.K, dtype=complex), spec.t0)


def _check_closed_form(spec: BathSpec, t: float):
    if not spec.is_resonant_single_mode:
        raise UnsupportedRegimeError("closed-form coefficients need K = 1 and zero detuning")
    g = spec.couplings[0]
    if abs(g) * (t - spec.t0) >= np.pi / 2:
        raise SingularityError(
            f"|g|(t - t0) = {abs(g) * (t - spec.t0):.6g} reached the tan pole at pi/2", t=t
        )
    return g


def ansatz_coeffs_analytic(spec: BathSpec, t: float) -> AnsatzCoefficients:
    """A = |g| tan(|g| tau), B = exp(-2i theta) |g| tan(|g| tau)."""
    g = _check_closed_form(spec, t)
    tn = np.tan(abs(g) * (t - spec.t0))
    phase = np.exp(-1j * np.angle(g))
    return AnsatzCoefficients(
        complex(abs(g) * tn), complex(phase**2 * abs(g) * tn), np.array([phase * tn]), t
    )


def _coeffs(spec: BathSpec, t: float, F: np.ndarray):
    gph = spec.couplings * spec.phases(t)
    return np.sum(gph * F), np.sum(gph.conj() * F)


def _dF(spec: BathSpec, t: float, F: np.ndarray) -> np.ndarray:
    gph = spec.couplings * spec.phases(t)
    return gph.conj() + F * np.sum(gph * F)


def _check_blowup(A, B, threshold, t):
    if not (abs(A) <= threshold and abs(B) <= threshold):
        raise SingularityError(
            f"ansatz coefficients exceeded {threshold:g} (|A|={abs(A):.3g}) at t={t:.6g}", t=t
        )


def ansatz_coeffs_ode_step(
    coeffs: AnsatzCoefficients, spec: BathSpec, dt: float, method="rk4", blowup_threshold=1e6
) -> AnsatzCoefficients:
    """One RK4 or Euler step of the mode-resolved Riccati system."""
    t, F = coeffs.t, coeffs.F
    if method == "euler":
        F_new = F + dt * _dF(spec, t, F)
    elif method == "rk4":
        k1 = _dF(spec, t, F)
        k2 = _dF(spec, t + 0.5 * dt, F + 0.5 * dt * k1)
        k3 = _dF(spec, t + 0.5 * dt, F + 0.5 * dt * k2)
        k4 = _dF(spec, t + dt, F + dt * k3)
        F_new = F + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        raise ConfigError(f"unknown method {method!r}")
    A, B = _coeffs(spec, t + dt, F_new)
    _check_blowup(A, B, blowup_threshold, t + dt)
    return AnsatzCoefficients(complex(A), complex(B), F_new, t + dt)


def integrate_ansatz(spec: BathSpec, t: float, dt=1e-4, method="rk4", blowup_threshold=1e6):
    """Coefficients at ``t`` by stepping the Riccati system from ``t0``."""
    n = max(1, int(np.ceil((t - spec.t0) / dt - 1e-9)))
    h = (t - spec.t0) / n
    c = AnsatzCoefficients.initial(spec)
    for i in range(n):
        c = ansatz_coeffs_ode_step(c, spec, h, method, blowup_threshold)
        # re-anchor time to avoid accumulated rounding in t
        c = replace(c, t=spec.t0 + (i + 1) * h)
    return c


def drift(spec: BathSpec, exp_L, t: float) -> np.ndarray:
    """Girsanov drift ``dx_k/dt = sqrt(2) Re(<L> g_k^* e^{i Omega_k tau})``.

    ``exp_L`` may be a scalar or an array of expectations (one per
    trajectory); the mode axis is appended last.
    """
    gph_c = (spec.couplings * spec.phases(t)).conj()
    return SQRT2 * np.real(np.multiply.outer(exp_L, gph_c))


# -- vectorized kernels -----------------------------------------------------


class _Kernel:
    """Right-hand side of the coupled (psi, x, F) system for a batch."""

    def __init__(self, spec: BathSpec, cfg: IntegratorConfig, mode: str):
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
        self.spec = spec
        self.cfg = cfg
        self.mode = mode
        self.analytic = cfg.coefficients == "analytic"
        if self.analytic:
            _check_closed_form(spec, spec.t0)
        self._g = spec.couplings
        self._om = spec.detunings
        self._resonant = not np.any(spec.detunings)
        self._single = spec.K == 1

    def coeffs(self, t, F):
        if self.analytic:
            c = ansatz_coeffs_analytic(self.spec, t)
            return c.A, c.B
        return _coeffs(self.spec, t, F)

    def gph(self, t):
        """``g_k exp(-i Omega_k tau)``; constant for a resonant bath."""
        if self._resonant:
            return self._g
        return self._g * np.exp(-1j * self._om * (t - self.spec.t0))

    def rhs(self, t, psi, x, F):
        gph = self.gph(t)
        gph_c = gph.conj()
        if self.analytic:
            A, B = self.coeffs(t, F)
            dF = None
        else:
            A = np.dot(gph, F)
            B = np.dot(gph_c, F)
            dF = gph_c + A * F
        zc = (x * gph_c).sum(axis=-1) * SQRT2  # z*(t, t)
        pe, pb = psi[:, 0], psi[:, 1]
        dpsi = np.empty_like(psi)
        if self.mode == "linear":
            # d|psi_bar> = [sigma z* - A sigma^dag sigma] |psi_bar>; L B_z = B sigma^2 = 0
            dpsi[:, 0] = -A * pe
            dpsi[:, 1] = zc * pe
            return dpsi, None, dF
        ne = (pe.conj() * pe).real
        inv = 1.0 / (ne + (pb.conj() * pb).real)
        s = pe * pb.conj() * inv  # <sigma> = psi_b^* psi_e
        s_c = s.conj()
        # (sigma - <sigma>) z* - (sigma - <sigma>) B sigma + <.> - (sigma^dag - <sigma^dag>) A sigma + <.>
        diag = A * (ne * inv - (s * s_c).real) - (zc + B * s) * s
        dpsi[:, 0] = (diag - A) * pe
        dpsi[:, 1] = diag * pb + (zc + B * s + A * s_c) * pe
        if self._single:
            dx = (SQRT2 * (s * gph_c[0]).real)[:, None]
        else:
            dx = SQRT2 * (s[:, None] * gph_c).real
        return dpsi, dx, dF

    def step(self, t, h, psi, x, F):
        """One step; returns new ``(psi, x, F)`` (psi not renormalized)."""
        if self.cfg.method == "euler":
            dpsi, dx, dF = self.rhs(t, psi, x, F)
            return _axpy(psi, x, F, h, dpsi, dx, dF)
        k1 = self.rhs(t, psi, x, F)
        s2 = _axpy(psi, x, F, 0.5 * h, *k1)
        k2 = self.rhs(t + 0.5 * h, *s2)
        s3 = _axpy(psi, x, F, 0.5 * h, *k2)
        k3 = self.rhs(t + 0.5 * h, *s3)
        s4 = _axpy(psi, x, F, h, *k3)
        k4 = self.rhs(t + h, *s4)
        comb = [
            None if a is None else (a + 2.0 * b + 2.0 * c + d)
            for a, b, c, d in zip(k1, k2, k3, k4)
        ]
        return _axpy(psi, x, F, h / 6.0, *comb)


def _axpy(psi, x, F, h, dpsi, dx, dF):
    return (
        psi + h * dpsi,
        x if dx is None else x + h * dx,
        F if dF is None else F + h * dF,
    )


class BatchResult(NamedTuple):
    """Recorded samples of a batch of trajectories.

    ``psi`` is normalized in nonlinear mode and the unnormalized linear
    state in linear mode; ``weight`` is ``||psi||^2`` of the recorded
    vector (identically 1 in nonlinear mode).
    """

    times: np.ndarray  # (M,)
    psi: np.ndarray  # (M, N, 2)
    coords: np.ndarray  # (M, N, K)
    A: np.ndarray  # (M,)
    B: np.ndarray  # (M,)
    max_norm_drift: float

    @property
    def weight(self) -> np.ndarray:
        return np.sum(np.abs(self.psi) ** 2, axis=-1)


def integrate_batch(
    spec: BathSpec, init: SystemState, cfg: IntegratorConfig, x0, mode="nonlinear"
) -> BatchResult:
    """Integrate ``N`` trajectories sharing ``init`` from coordinates ``x0`` (N, K)."""
    kernel = _Kernel(spec, cfg, mode)
    x = np.array(x0, dtype=float).reshape(-1, spec.K)
    n_traj = x.shape[0]
    psi = np.tile(init.vector, (n_traj, 1))
    F = np.zeros(spec.K, dtype=complex)
    h = cfg.step
    record = set(cfg.output_steps().tolist())
    times, psis, xs, As, Bs = [], [], [], [], []
    drift_max = 0.0

    def save(i):
        t = spec.t0 + i * h
        A, B = kernel.coeffs(t, F)
        times.append(t)
        psis.append(psi.copy())
        xs.append(x.copy())
        As.append(A)
        Bs.append(B)

    save(0)
    for i in range(cfg.n_steps):
        t = spec.t0 + i * h
        psi, x, F = kernel.step(t, h, psi, x, F)
        t_new = t + h
        if not kernel.analytic:
            A, B = _coeffs(spec, t_new, F)
            _check_blowup(A, B, cfg.blowup_threshold, t_new)
        norm = np.sqrt(np.sum(psi.real**2 + psi.imag**2, axis=-1))
        if mode == "nonlinear":
            bad = np.flatnonzero(~(norm >= COLLAPSE_NORM))
            if bad.size:
                raise DegenerateStateError(
                    f"norm collapse at t={t_new:.6g} in trajectories {bad.tolist()}"
                )
            drift_max = max(drift_max, float(np.max(np.abs(norm - 1.0))))
            psi = psi / norm[:, None]
        elif not np.all(norm**2 <= cfg.blowup_threshold):
            raise SingularityError(f"linear state norm exceeded blow-up threshold at t={t_new:.6g}", t=t_new)
        if i + 1 in record:
            save(i + 1)
    return BatchResult(
        np.array(times), np.array(psis), np.array(xs), np.array(As), np.array(Bs), drift_max
    )


# -- single-trajectory API ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrajectoryState:
    psi: SystemState
    coords: BathConfiguration
    ansatz: AnsatzCoefficients
    t: float
    girsanov_weight: float = 1.0
    norm_drift: float = field(default=0.0, compare=False)


def initial_state(spec: BathSpec, init: SystemState, config: BathConfiguration, mode="nonlinear"):
    return TrajectoryState(
        SystemState(init.amp_e, init.amp_b, normalized=(mode == "nonlinear")),
        BathConfiguration(config.coords, spec.t0),
        AnsatzCoefficients.initial(spec),
        spec.t0,
        init.norm_sq,
    )


def _single_step(traj: TrajectoryState, spec: BathSpec, cfg: IntegratorConfig, mode: str):
    kernel = _Kernel(spec, cfg, mode)
    psi = traj.psi.vector[None, :]
    x = traj.coords.coords[None, :].copy()
    F = traj.ansatz.F
    h = cfg.dt
    psi, x, F = kernel.step(traj.t, h, psi, x, F)
    t = traj.t + h
    A, B = kernel.coeffs(t, F)
    _check_blowup(A, B, cfg.blowup_threshold, t)
    if kernel.analytic:
        F = ansatz_coeffs_analytic(spec, t).F
    return psi[0], x[0], AnsatzCoefficients(complex(A), complex(B), F, t), t


def step_nonlinear(traj: TrajectoryState, spec: BathSpec, cfg: IntegratorConfig) -> TrajectoryState:
    """Advance ``(psi, x, A, B)`` by ``cfg.dt`` and renormalize ``psi``."""
    vec, x, coeffs, t = _single_step(traj, spec, cfg, "nonlinear")
    norm = float(np.linalg.norm(vec))
    if not norm >= COLLAPSE_NORM:
        raise DegenerateStateError(f"norm collapse at t={t:.6g}")
    return TrajectoryState(
        SystemState.from_vector(vec / norm),
        BathConfiguration(x, t),
        coeffs,
        t,
        1.0,
        abs(norm - 1.0),
    )


def step_linear(traj: TrajectoryState, spec: BathSpec, cfg: IntegratorConfig) -> TrajectoryState:
    """Advance the unnormalized linear state; coordinates stay frozen."""
    vec, x, coeffs, t = _single_step(traj, spec, cfg, "linear")
    weight = float(np.sum(np.abs(vec) ** 2))
    if not weight <= cfg.blowup_threshold:
        raise SingularityError(f"linear state norm exceeded blow-up threshold at t={t:.6g}", t=t)
    return TrajectoryState(
        SystemState.from_vector(vec, normalized=False),
        BathConfiguration(x, t),
        coeffs,
        t,
        weight,
    )


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    t: float
    bloch: BlochVector
    coords: np.ndarray
    re_z: float
    im_z: float
    weight: float
    psi: SystemState


def records_from_batch(spec: BathSpec, result: BatchResult, j: int = 0) -> list[TrajectoryRecord]:
    """Per-sample records of trajectory ``j`` of a batch (Bloch of the normalized state)."""
    out = []
    for m, t in enumerate(result.times):
        vec = result.psi[m, j]
        w = float(np.sum(np.abs(vec) ** 2))
        unit = vec / np.sqrt(w)
        z = noise_z(spec, result.coords[m, j], t)
        out.append(
            TrajectoryRecord(
                float(t),
                BlochVector(*map(float, bloch_of_vectors(unit))),
                result.coords[m, j].copy(),
                float(z.real),
                float(z.imag),
                w,
                SystemState.from_vector(unit),
            )
        )
    return out


def run_trajectory(
    spec: BathSpec, init: SystemState, cfg: IntegratorConfig, seed: int, mode="nonlinear", index=0
) -> list[TrajectoryRecord]:
    """One trajectory whose initial coordinates come from stream ``(seed, index)``.

    Step errors propagate; singularities carry the failing time in ``t``.
    """
    x0 = sample_initial(spec, trajectory_rng(seed, index)).coords
    result = integrate_batch(spec, init, cfg, x0[None, :], mode)
    return records_from_batch(spec, result, 0)
