import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uncertainty_bounds.qmcore import (
    DimensionError,
    HermitianObservable,
    NonHermitianError,
    NormalizationError,
    StateVector,
    anticommutator_mean,
    commutator_mean,
    complete_basis,
    covariance,
    expectation,
    project_complement,
    random_observable,
    random_orthogonal_state,
    random_state,
    variance,
)

from conftest import make_instance


def brute_expectation(psi, m):
    v = psi.amplitudes
    return sum(np.conj(v[i]) * m[i, j] * v[j] for i in range(len(v)) for j in range(len(v)))


class TestExpectation:
    def test_eigenstate(self, spin1):
        assert expectation(StateVector.basis(3, 0), spin1.Jz) == pytest.approx(1.0)

    def test_zero_diagonal(self, spin1):
        assert expectation(StateVector.basis(3, 0), spin1.Jx) == pytest.approx(0.0, abs=1e-15)

    def test_jx_squared(self, spin1, ket):
        jx2 = spin1.Jx.matrix @ spin1.Jx.matrix
        # on |1> the diagonal entry of Jx^2 is 1/2
        assert expectation(StateVector.basis(3, 0), jx2).real == pytest.approx(0.5)
        psi = ket(1, 0, 1)
        expected = brute_expectation(psi, jx2)
        assert expected == pytest.approx(1.0)
        assert expectation(psi, jx2) == pytest.approx(expected, abs=1e-14)

    def test_real_for_hermitian(self):
        inst = make_instance(3)
        assert abs(expectation(inst.psi, inst.A).imag) <= 1e-12

    def test_dimension_mismatch(self, spin1):
        with pytest.raises(DimensionError):
            expectation(StateVector.basis(2, 0), spin1.Jz)


class TestVariance:
    @pytest.mark.parametrize("comp, expected", [("Jz", 0.0), ("Jx", 0.5), ("Jy", 0.5)])
    def test_spin1_top_state(self, spin1, comp, expected):
        obs = getattr(spin1, comp)
        m = obs.matrix
        psi = StateVector.basis(3, 0)
        oracle = (brute_expectation(psi, m @ m) - brute_expectation(psi, m) ** 2).real
        assert oracle == pytest.approx(expected, abs=1e-15)
        assert variance(psi, obs) == pytest.approx(expected, abs=1e-14)

    def test_near_eigenstate_never_negative(self):
        a = HermitianObservable(np.diag([1e3, -2.0, 7.0]))
        for eps in (0.0, 1e-9, 1e-7):
            psi = StateVector.normalized([1.0, eps, eps])
            assert variance(psi, a) >= 0.0

    def test_mismatch(self, spin1):
        with pytest.raises(DimensionError):
            variance(StateVector.basis(4, 0), spin1.Jx)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_variance_is_deviation_norm(seed):
    inst = make_instance(seed)
    dev = inst.A.matrix @ inst.psi.amplitudes - expectation(inst.psi, inst.A) * inst.psi.amplitudes
    v = variance(inst.psi, inst.A)
    assert v >= 0
    assert v == pytest.approx(np.vdot(dev, dev).real, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_covariance_two_routes(seed):
    inst = make_instance(seed)
    a, b, psi = inst.A, inst.B, inst.psi
    m = dict(A=a.matrix, B=b.matrix)
    direct = 0.5 * expectation(psi, m["A"] @ m["B"] - m["B"] @ m["A"]) + 0.5 * expectation(
        psi, m["A"] @ m["B"] + m["B"] @ m["A"]
    ) - expectation(psi, a) * expectation(psi, b)
    assert covariance(psi, a, b) == pytest.approx(direct, abs=1e-12)


class TestCommutators:
    def test_jx_jy_top(self, spin1):
        psi = StateVector.basis(3, 0)
        jx, jy = spin1.Jx.matrix, spin1.Jy.matrix
        assert brute_expectation(psi, jx @ jy - jy @ jx) == pytest.approx(1j)
        assert commutator_mean(psi, spin1.Jx, spin1.Jy) == pytest.approx(1j, abs=1e-14)
        assert brute_expectation(psi, jx @ jy + jy @ jx) == pytest.approx(0.0, abs=1e-15)
        assert anticommutator_mean(psi, spin1.Jx, spin1.Jy) == pytest.approx(0.0, abs=1e-14)

    def test_self_commutation(self):
        inst = make_instance(11)
        assert commutator_mean(inst.psi, inst.A, inst.A) == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_phases(self, seed):
        inst = make_instance(seed)
        assert abs(commutator_mean(inst.psi, inst.A, inst.B).real) <= 1e-12
        assert abs(anticommutator_mean(inst.psi, inst.A, inst.B).imag) <= 1e-12


class TestConstruction:
    def test_non_hermitian_rejected(self):
        with pytest.raises(NonHermitianError, match=r"\(0,1\)"):
            HermitianObservable([[0, 1], [0, 0]])

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            HermitianObservable(np.zeros((2, 3)))

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            HermitianObservable([[np.nan, 0], [0, 1]])

    def test_state_renormalized_within_gate(self):
        psi = StateVector(np.array([1 + 5e-9, 0]))
        assert abs(np.linalg.norm(psi.amplitudes) - 1) <= 1e-12

    def test_state_rejected_outside_gate(self):
        with pytest.raises(NormalizationError):
            StateVector(np.array([1.1, 0]))

    def test_immutable(self):
        psi = StateVector.basis(2, 0)
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 2


class TestProjectComplement:
    def test_kernel(self):
        psi = random_state(4, 0)
        assert np.allclose(project_complement(psi, psi.amplitudes), 0, atol=1e-15)

    def test_fixed_point(self):
        psi = random_state(4, 0)
        v = random_orthogonal_state(psi, 1).amplitudes
        assert np.allclose(project_complement(psi, v), v, atol=1e-12)

    def test_basis_decomposition(self):
        out = project_complement(StateVector.basis(3, 0), np.array([1, 1, 0]))
        assert np.allclose(out, [0, 1, 0])

    @pytest.mark.parametrize("seed", range(5))
    def test_output_orthogonal(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(6, rng)
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert abs(np.vdot(psi.amplitudes, project_complement(psi, v))) <= 1e-12 * np.linalg.norm(v)


class TestCompleteBasis:
    def test_dim2(self):
        fr = complete_basis(StateVector.basis(2, 0))
        (c,) = fr.complement
        assert abs(abs(c.amplitudes[1]) - 1) < 1e-15

    def test_dim3_top(self):
        fr = complete_basis(StateVector.basis(3, 0))
        span = np.column_stack([c.amplitudes for c in fr.complement])
        assert np.allclose(span[0], 0)
        assert np.linalg.matrix_rank(span[1:]) == 2

    def test_random_dim5_gram(self):
        psi = random_state(5, 2024)
        fr = complete_basis(psi)
        f = fr.matrix()
        assert np.abs(f.conj().T @ f - np.eye(5)).max() <= 1e-12

    def test_deterministic(self):
        psi = random_state(4, 3)
        a, b = complete_basis(psi).matrix(), complete_basis(psi).matrix()
        assert np.array_equal(a, b)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_gram_identity(self, dim, seed):
        assert complete_basis(random_state(dim, seed)).gram_defect() <= 1e-12

    def test_negative_first_amplitude(self):
        psi = StateVector(np.array([-0.6, 0.8j, 0]))
        assert complete_basis(psi).gram_defect() <= 1e-12


class TestRandomStates:
    def test_deterministic(self):
        assert np.array_equal(random_state(5, 9).amplitudes, random_state(5, 9).amplitudes)
        psi = random_state(5, 9)
        assert np.array_equal(
            random_orthogonal_state(psi, 4).amplitudes, random_orthogonal_state(psi, 4).amplitudes
        )

    def test_dim1_has_no_complement(self):
        with pytest.raises(ValueError):
            random_orthogonal_state(StateVector.basis(1, 0), 0)

    def test_haar_moments_on_complement(self):
        # E|<e|perp>|^2 = 1/(d-1) for any fixed unit e in the complement
        d, n = 3, 10_000
        psi = random_state(d, 1)
        e = complete_basis(psi).complement[0].amplitudes
        rng = np.random.default_rng(5)
        overlaps, weights = [], []
        for _ in range(n):
            perp = random_orthogonal_state(psi, rng).amplitudes
            overlaps.append(abs(np.vdot(psi.amplitudes, perp)))
            weights.append(abs(np.vdot(e, perp)) ** 2)
        assert max(overlaps) <= 1e-12
        weights = np.array(weights)
        se = weights.std(ddof=1) / math.sqrt(n)
        assert abs(weights.mean() - 1 / (d - 1)) <= 3 * se

    def test_random_observable_hermitian(self):
        a = random_observable(6, 0)
        assert a.hermiticity_defect == 0.0
