import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmsse.errors import ContractViolation, DegenerateStateError
from nmsse.qcore import (
    EXCITED_PROJ,
    IDENTITY,
    SIGMA,
    SIGMA_DAG,
    SystemState,
    bloch,
    check_density_matrix,
    excited,
    expectation,
    ground,
    normalize,
    outer_product,
    superposition,
)

finite = st.floats(-10, 10, allow_nan=False)
amps = st.tuples(finite, finite, finite, finite).filter(lambda a: sum(v * v for v in a) > 1e-6)


def _state(a):
    return normalize(SystemState(complex(a[0], a[1]), complex(a[2], a[3]), normalized=False))


def test_sigma_algebra():
    assert np.allclose(SIGMA @ SIGMA, 0)
    assert np.allclose(SIGMA_DAG @ SIGMA + SIGMA @ SIGMA_DAG, IDENTITY)
    # sigma lowers: |e> -> |b> with (e, b) ordering
    assert np.allclose(SIGMA @ excited().vector, ground().vector)


def test_expectation_examples(plus):
    assert expectation(excited(), SIGMA) == 0
    assert expectation(plus, SIGMA) == pytest.approx(0.5)
    assert expectation(ground(), EXCITED_PROJ) == 0


def test_expectation_requires_normalized():
    with pytest.raises(ContractViolation):
        expectation(SystemState(2.0, 0.0, normalized=False), SIGMA)


def test_state_invariants():
    with pytest.raises(ValueError):
        SystemState(1.0, 1.0)
    with pytest.raises(ValueError):
        SystemState(float("nan"), 0.0, normalized=False)


def test_bloch_examples():
    assert tuple(bloch(np.diag([1.0, 0.0]))) == pytest.approx((0, 0, 1))
    assert tuple(bloch(np.eye(2) / 2)) == pytest.approx((0, 0, 0))
    assert tuple(bloch(np.diag([0.0, 1.0]))) == pytest.approx((0, 0, -1))


def test_normalize_examples():
    s = normalize(SystemState(2.0, 0.0, normalized=False))
    assert (s.amp_e, s.amp_b) == (1.0, 0.0)
    s = normalize(SystemState(1 + 1j, 1 - 1j, normalized=False))
    assert s.norm_sq == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DegenerateStateError):
        normalize(SystemState(0.0, 0.0, normalized=False))


def test_outer_product_examples(plus):
    assert np.allclose(outer_product(excited(), 1.0), np.diag([1, 0]))
    assert np.allclose(outer_product(plus, 1.0), 0.5)
    assert np.allclose(outer_product(ground(), 0.25), np.diag([0, 0.25]))
    with pytest.raises(ContractViolation):
        outer_product(plus, -1.0)


@settings(max_examples=200, deadline=None)
@given(amps, st.floats(0, 5))
def test_properties(a, w):
    psi = _state(a)
    b = bloch(outer_product(psi, 1.0))
    assert abs(b.x**2 + b.y**2 + b.z**2 - 1) < 1e-9
    assert expectation(psi, SIGMA_DAG) == np.conj(expectation(psi, SIGMA))
    rho = outer_product(psi, w)
    assert np.trace(rho).real == pytest.approx(w * psi.norm_sq, abs=1e-12)
    assert np.allclose(rho, w * outer_product(psi, 1.0), atol=1e-13)
    check_density_matrix(outer_product(psi, 1.0))
    # idempotent
    again = normalize(psi)
    assert np.allclose(again.vector, psi.vector)


def test_check_density_matrix_rejects():
    with pytest.raises(ValueError):
        check_density_matrix(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.5, -0.5]))
    assert superposition(0.6, 0.8).norm_sq == pytest.approx(1.0)
