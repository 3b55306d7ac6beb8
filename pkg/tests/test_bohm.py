import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from fock import interaction, position
from nmsse.bath import BathConfiguration, BathSpec, ostensible_density, sample_batch
from nmsse.bohm import (
    bohmian_bundle,
    bohmian_trajectory,
    continuity_residual,
    continuity_terms,
    velocity_field,
    velocity_operator,
)
from nmsse.errors import ConfigError, NodeError
from nmsse.oracle import (
    JointState,
    analytic_tla,
    conditional_state,
    initial_joint,
    probability_density,
    sector_series,
)
from nmsse.qcore import SIGMA, expectation, superposition
from nmsse.sse import IntegratorConfig, drift, integrate_batch

MULTI = BathSpec.from_triples([[1, 0, 0.3], [0, 0.5, -1.0], [0.4, -0.2, 1.7]], t0=0.25)


def test_velocity_operator_example(resonant):
    assert np.allclose(velocity_operator(resonant, 0, 0.8), np.array([[0, 1], [1, 0]]) / np.sqrt(2))


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-4, 4), st.floats(-5, 5))
def test_velocity_operator_hermitian(gr, gi, om, t):
    v = velocity_operator(BathSpec.from_triples([[gr, gi, om]]), 0, t)
    assert np.array_equal(v, v.conj().T)


@pytest.mark.parametrize("t", [0.0, 0.37, 1.2])
def test_velocity_operator_from_commutator(t):
    g, om = [1.0 + 0.4j, -0.3j], [0.7, -1.1]
    spec = BathSpec(np.array(g), np.array(om))
    nmax, K = 3, 2
    V = interaction(g, om, t, nmax)
    d = nmax + 1
    # indices of states with at most one quantum in total
    low = [0, d, 1]  # |00>, |10>, |01> in the mode product basis
    keep = [a * d**K + i for a in (0, 1) for i in low]
    for k in range(K):
        X = position(k, K, nmax)
        comm = -1j * (X @ V - V @ X)
        v = velocity_operator(spec, k, t)
        ref = np.kron(v, np.eye(d**K))
        assert np.max(np.abs(comm[np.ix_(keep, keep)] - ref[np.ix_(keep, keep)])) < 1e-12


def test_velocity_field_examples(resonant, e_state):
    j = initial_joint(resonant, e_state)
    assert np.all(velocity_field(j, BathConfiguration([0.7]), resonant) == 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_velocity_field_equals_drift(seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=5) + 1j * rng.normal(size=5)
    t = MULTI.t0 + rng.uniform(0, 1.5)
    j = JointState.from_vector(amps / np.linalg.norm(amps), t)
    x = rng.normal(0, np.sqrt(0.5), 3)
    psi, _ = conditional_state(j, x)
    v = velocity_field(j, BathConfiguration(x), MULTI)
    assert np.max(np.abs(v - drift(MULTI, expectation(psi, SIGMA), t))) < 1e-12


def test_velocity_field_node():
    j = JointState(0.0, 0.0, [1.0], 1.0)
    with pytest.raises(NodeError):
        velocity_field(j, BathConfiguration([0.0]), BathSpec.single_mode())


def test_velocity_matches_current(resonant, e_state):
    # j(x) = -int_{-inf}^x dP/dt, then v = j / P, on a grid of spacing 1e-2
    t, d, h = 0.5, 1e-5, 1e-2
    x = np.arange(-6.0, 6.0 + h / 2, h)
    pts = x[:, None]
    dPdt = (
        probability_density(analytic_tla(resonant, e_state, t + d), pts)
        - probability_density(analytic_tla(resonant, e_state, t - d), pts)
    ) / (2 * d)
    current = -integrate.cumulative_trapezoid(dPdt, x, initial=0.0)
    P = probability_density(analytic_tla(resonant, e_state, t), pts)
    j = analytic_tla(resonant, e_state, t)
    inside = np.abs(x) <= 2.0
    v = np.array([velocity_field(j, BathConfiguration([xi]), resonant)[0] for xi in x[inside]])
    assert np.max(np.abs(current[inside] / P[inside] - v)) < 2e-3


def test_bundle_matches_sse(e_state, resonant):
    cfg = IntegratorConfig(dt=1e-3, stride=100)
    for spec, init in ((resonant, e_state), (MULTI, superposition(0.6, 0.8j))):
        x0 = sample_batch(spec, 3, range(8))
        times, xb = bohmian_bundle(spec, init, x0, cfg)
        res = integrate_batch(spec, init, cfg, x0)
        assert np.allclose(times, res.times)
        assert np.max(np.abs(xb - res.coords)) < 1e-8


def test_trajectory_api(b_state, e_state, resonant, cfg_short):
    x0 = BathConfiguration([0.4, -1.0, 0.2])
    path = bohmian_trajectory(MULTI, b_state, x0, cfg_short)
    assert all(np.array_equal(c, x0.coords) for _, c in path)
    a = bohmian_trajectory(resonant, e_state, BathConfiguration([0.3]), cfg_short)
    b = bohmian_trajectory(resonant, e_state, BathConfiguration([0.3]), cfg_short)
    assert [t for t, _ in a] == [t for t, _ in b]
    assert all(np.array_equal(p, q) for (_, p), (_, q) in zip(a, b))
    with pytest.raises(ConfigError):
        bohmian_bundle(resonant, e_state, [[np.nan]], cfg_short)


def test_equivariance(resonant, e_state):
    # positions drawn from P(t0) = Lambda are distributed as P(t) later
    cfg = IntegratorConfig(dt=1e-3, horizon=1.2, stride=1200)
    x0 = sample_batch(resonant, 21, range(10_000))
    times, xs = bohmian_bundle(resonant, e_state, x0, cfg)
    t = times[-1]

    def density(x):
        return ostensible_density([x]) * (np.cos(t) ** 2 + 2 * x**2 * np.sin(t) ** 2)

    def cdf(x):
        return np.array([integrate.quad(density, -np.inf, xi)[0] for xi in np.atleast_1d(x)])

    assert integrate.quad(density, -np.inf, np.inf)[0] == pytest.approx(1.0, abs=1e-10)
    assert stats.kstest(xs[-1, :, 0], cdf).pvalue > 1e-3
    # and the initial sample was not already distributed that way
    assert stats.kstest(xs[0, :, 0], cdf).pvalue < 1e-3


def _exact_div(x, t):
    # for an initially excited atom P = Lambda (cos^2 t + 2 x^2 sin^2 t)
    return -ostensible_density(x[:, None]) * (2 * x**2 - 1) * np.sin(2 * t)


def test_continuity(resonant, e_state):
    t, d = 0.5, 1e-4
    joints = sector_series(resonant, e_state, [t - d, t, t + d], dt=d)
    errs = []
    for h in (1e-2, 5e-3):
        grid = np.arange(-4.0, 4.0 + h / 2, h)
        assert continuity_residual(joints, resonant, grid) < 5e-3
        _, div = continuity_terms(joints, resonant, grid)
        errs.append(np.max(np.abs(div - _exact_div(grid[1:-1], t))))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_continuity_near_t0(resonant, plus):
    d, h = 1e-5, 1e-2
    joints = [analytic_tla(resonant, plus, t) for t in (0.0, d, 2 * d)]
    assert continuity_residual(joints, resonant, np.arange(-4, 4 + h / 2, h)) < 1e-3


def test_continuity_input_checks(resonant, e_state):
    joints = sector_series(resonant, e_state, [0.1, 0.2, 0.4])
    with pytest.raises(ConfigError):
        continuity_terms(joints, resonant, np.linspace(-1, 1, 11))
    j3 = sector_series(MULTI, e_state, [0.3, 0.4, 0.5])
    with pytest.raises(ConfigError):
        continuity_terms(j3, MULTI, np.linspace(-1, 1, 11))
