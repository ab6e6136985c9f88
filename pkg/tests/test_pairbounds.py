import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uncertainty_bounds import pairbounds as pb
from uncertainty_bounds.explore import cell_rng
from uncertainty_bounds.qmcore import DimensionError, HermitianObservable, StateVector, random_orthogonal_state
from uncertainty_bounds.statefam import Fig1Params, fig1_state

from conftest import make_instance

TOP = StateVector.basis(3, 0)
MID = StateVector.basis(3, 1)


def moments(x, w):
    return pb.PairMoments(0.0, 0.0, 1.0, 1.0, complex(x / 2, w / 2), x, w)


class TestMoments:
    def test_jx_jy_top(self, spin1):
        m = pb.pair_moments(spin1.Jx, spin1.Jy, TOP)
        assert m.x == pytest.approx(0.0, abs=1e-15)
        assert m.w == pytest.approx(1.0, abs=1e-15)
        assert m.varA == pytest.approx(0.5) and m.varB == pytest.approx(0.5)

    def test_self_pair(self):
        inst = make_instance(4)
        m = pb.pair_moments(inst.A, inst.A, inst.psi)
        assert m.w == pytest.approx(0.0, abs=1e-14)
        assert m.corr.real == pytest.approx(m.varA, abs=1e-12)

    def test_eigenstate(self, spin1):
        jz2 = HermitianObservable(spin1.Jz.matrix @ spin1.Jz.matrix)
        m = pb.pair_moments(spin1.Jz, jz2, MID)
        assert (m.varA, m.varB, m.x, m.w) == (0.0, 0.0, 0.0, 0.0)

    def test_glossary_definition(self):
        # x = <{A,B}> - 2<A><B>, w = -i<[A,B]>
        inst = make_instance(8)
        a, b, v = inst.A.matrix, inst.B.matrix, inst.psi.amplitudes
        ev = lambda m: np.vdot(v, m @ v)
        m = pb.pair_moments(inst.A, inst.B, inst.psi)
        assert m.x == pytest.approx((ev(a @ b + b @ a) - 2 * ev(a) * ev(b)).real, abs=1e-12)
        assert m.w == pytest.approx((-1j * ev(a @ b - b @ a)).real, abs=1e-12)

    def test_dim_mismatch(self, spin1):
        with pytest.raises(DimensionError):
            pb.pair_moments(spin1.Jx, np.eye(2), TOP)


class TestAlpha:
    @pytest.mark.parametrize("x, w, expected", [(1, 0, 0.0), (0, 1, math.pi / 2), (-1, 0, math.pi),
                                                (0, -1, -math.pi / 2), (0, 0, 0.0)])
    def test_branches(self, x, w, expected):
        assert pb.alpha_phase(moments(x, w)) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("x, w", [(2.0, 1.0), (-2.0, 1.0), (-2.0, -1.0), (2.0, -1.0)])
    def test_arctan_rule(self, x, w):
        a = pb.alpha_phase(moments(x, w))
        base = math.atan(w / x)
        assert a == pytest.approx(base if x > 0 else math.pi + base, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
    def test_phase_coherence(self, x, w):
        z = cmath.exp(-1j * pb.alpha_phase(moments(x, w))) * complex(x, w)
        assert abs(z.imag) <= 1e-12 * max(1.0, abs(z))
        assert z.real >= 0


class TestExamples:
    def test_hr_tight(self, spin1):
        r = pb.bound_hr(spin1.Jx, spin1.Jy, TOP)
        assert r.lhs == pytest.approx(0.25) and r.rhs == pytest.approx(0.25)
        assert r.satisfied

    def test_hr_commuting_eigenstate(self, spin1):
        r = pb.bound_hr(spin1.Jz, spin1.Jz, TOP)
        assert r.lhs == 0 and r.rhs == 0

    def test_mp1_tight_any_perp(self, spin1):
        for seed in range(5):
            r = pb.bound_mp_sum(spin1.Jx, spin1.Jy, TOP, random_orthogonal_state(TOP, seed))
            assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0, abs=1e-12)

    def test_mp1_self_pair_eigenstate(self, spin1):
        r = pb.bound_mp_sum(spin1.Jz, spin1.Jz, TOP, MID)
        assert r.rhs == pytest.approx(0.0, abs=1e-15) and r.lhs == 0

    def test_mp1_fig1_cloud(self, spin1):
        psi = fig1_state(Fig1Params(math.pi / 4, 1.1))
        for j in range(20):
            r = pb.bound_mp_sum(spin1.Jx, spin1.Jy, psi, random_orthogonal_state(psi, cell_rng(3, 0, j)))
            assert r.rhs <= r.lhs + 1e-9

    def test_mp2_value(self):
        inst = make_instance(17)
        r = pb.bound_mp_sum2(inst.A, inst.B, inst.psi)
        assert r.rhs == pytest.approx(0.5 * r.params["var_sum"], abs=1e-12)

    def test_mp2_degenerate(self, spin1):
        r = pb.bound_mp_sum2(spin1.Jz, spin1.Jz, TOP)
        assert r.rhs == 0.0 and "degenerate deviation vector" in r.flags

    def test_new_sum_tight(self, spin1):
        r = pb.bound_new_sum(spin1.Jx, spin1.Jy, TOP, random_orthogonal_state(TOP, 1))
        assert r.rhs == pytest.approx(1.0, abs=1e-12) and r.lhs == pytest.approx(1.0)

    def test_new_sum_alpha_degenerate(self):
        a = HermitianObservable(np.diag([1.0, -1.0, 0.0]))
        b = HermitianObservable(np.diag([0.0, 2.0, 1.0]))
        psi = StateVector.basis(3, 0)
        perp = StateVector.normalized([0, 1, 1])
        r = pb.bound_new_sum(a, b, psi, perp)
        assert "alpha degenerate" in r.flags and r.params["alpha"] == 0.0
        ladder = abs(np.vdot(psi.amplitudes, (a.matrix - b.matrix) @ perp.amplitudes)) ** 2
        assert r.rhs == pytest.approx(ladder, abs=1e-15)

    def test_new_sum_first_term(self):
        inst = make_instance(21)
        a, b, v = inst.A.matrix, inst.B.matrix, inst.psi.amplitudes
        ev = lambda m: np.vdot(v, m @ v)
        direct = abs(ev(a @ b - b @ a) + ev(a @ b + b @ a) - 2 * ev(a) * ev(b))
        r = pb.bound_new_sum(inst.A, inst.B, inst.psi, inst.perp)
        assert r.params["first_term"] == pytest.approx(direct, abs=1e-12)

    def test_new_sum_fig1_cloud(self, spin1):
        psi = fig1_state(Fig1Params(math.pi / 3, math.pi / 6))
        for j in range(20):
            r = pb.bound_new_sum(spin1.Jx, spin1.Jy, psi, random_orthogonal_state(psi, cell_rng(7, 0, j)))
            assert r.slack >= -1e-9

    def test_reduced(self, spin1):
        r = pb.bound_new_sum_reduced(spin1.Jx, spin1.Jy, fig1_state(Fig1Params(0, 0)))
        assert r.rhs == pytest.approx(1.0) and r.lhs == pytest.approx(1.0)
        inst = make_instance(5)
        r = pb.bound_new_sum_reduced(inst.A, inst.A, inst.psi)
        assert r.rhs == pytest.approx(r.lhs, abs=1e-12)

    def test_new_product_tight(self, spin1):
        r = pb.bound_new_product(spin1.Jx, spin1.Jy, TOP, MID)
        assert r.params["denominator"] == pytest.approx(1.0, abs=1e-15)
        assert r.rhs == pytest.approx(0.25) and r.lhs == pytest.approx(0.25)

    def test_new_product_reduces_when_d_is_one(self):
        inst = make_instance(6, dim=4)
        m = pb.pair_moments(inst.A, inst.B, inst.psi)
        alpha = pb.alpha_phase(m)
        op = inst.A.matrix / math.sqrt(m.varA) - cmath.exp(1j * alpha) * inst.B.matrix / math.sqrt(m.varB)
        # partner orthogonal to both psi and op^dagger psi
        basis = np.column_stack([inst.psi.amplitudes, op.conj().T @ inst.psi.amplitudes])
        q, _ = np.linalg.qr(np.column_stack([basis, np.eye(4)]))
        perp = StateVector(q[:, 2])
        r = pb.bound_new_product(inst.A, inst.B, inst.psi, perp)
        assert r.rhs == pytest.approx(r.params["schrodinger_rhs"], abs=1e-12)

    def test_amended_hr_tight(self, spin1):
        r = pb.bound_amended_hr(spin1.Jx, spin1.Jy, TOP, MID)
        assert r.lhs == pytest.approx(0.5) and r.rhs == pytest.approx(0.5, abs=1e-12)


class TestErrors:
    @pytest.mark.parametrize("fn", [pb.bound_mp_sum, pb.bound_new_sum, pb.bound_new_product, pb.bound_amended_hr])
    def test_non_orthogonal(self, spin1, fn):
        with pytest.raises(pb.OrthogonalityError):
            fn(spin1.Jx, spin1.Jy, TOP, StateVector.normalized([1, 1, 0]))

    @pytest.mark.parametrize("fn", [pb.bound_new_product, pb.bound_amended_hr])
    def test_zero_variance(self, spin1, fn):
        with pytest.raises(pb.ZeroVarianceError):
            fn(spin1.Jz, spin1.Jx, TOP, MID)

    def test_degenerate_denominator(self):
        # uncorrelated orthogonal deviations and the partner along their difference give D = 0
        a = HermitianObservable([[0, 1, 0], [1, 0, 0], [0, 0, 0]])
        b = HermitianObservable([[0, 0, 1], [0, 0, 0], [1, 0, 0]])
        with pytest.raises(pb.DegenerateDenominatorError):
            pb.bound_new_product(a, b, TOP, StateVector.normalized([0, 1, -1]))

    def test_triviality_flag(self, spin1):
        psi = fig1_state(Fig1Params(0.4, 0.2))
        dev = spin1.Jx.matrix @ psi.amplitudes
        dev = dev - np.vdot(psi.amplitudes, dev) * psi.amplitudes
        r = pb.bound_mp_sum(spin1.Jx, spin1.Jy, psi, StateVector.normalized(dev))
        assert "perp parallel to deviation of A" in r.flags


def fuzz_reports(seed):
    inst = make_instance(seed)
    a, b, psi, perp = inst.A, inst.B, inst.psi, inst.perp
    return [
        pb.bound_hr(a, b, psi),
        pb.bound_schrodinger(a, b, psi),
        pb.bound_mp_sum(a, b, psi, perp),
        pb.bound_mp_sum2(a, b, psi),
        pb.bound_new_sum(a, b, psi, perp),
        pb.bound_new_sum_reduced(a, b, psi),
        pb.bound_amended_hr(a, b, psi, perp),
        pb.bound_new_product(a, b, psi, perp),
    ]


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**63))
def test_validity(seed):
    for r in fuzz_reports(seed):
        assert r.slack >= -pb.SLACK_TOLERANCE, r.relation_id


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**63))
def test_dominance_chain(seed):
    hr, sc, mp1, _, new_sum, _, _, new_product = fuzz_reports(seed)
    assert sc.rhs >= hr.rhs
    assert new_sum.params["first_term"] >= mp1.params["commutator_term"] - 1e-15
    d = new_product.params["denominator"]
    if 0 < d <= 1:
        assert new_product.rhs >= sc.rhs * (1 - 1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**63))
def test_reduces_to_mp1_when_x_vanishes(seed):
    # x is linear in B, so B = A + tC with t = -x(A,A)/x(A,C) has x = 0
    inst = make_instance(seed)
    a = inst.A
    m_ac = pb.pair_moments(a, inst.C, inst.psi)
    m_aa = pb.pair_moments(a, a, inst.psi)
    if abs(m_ac.x) < 1e-6:
        return
    t = -m_aa.x / m_ac.x
    b = HermitianObservable(a.matrix + t * inst.C.matrix)
    m = pb.pair_moments(a, b, inst.psi)
    assert abs(m.x) <= 1e-9 * (1 + abs(t))
    ns = pb.bound_new_sum(a, b, inst.psi, inst.perp)
    mp = pb.bound_mp_sum(a, b, inst.psi, inst.perp)
    assert ns.rhs == pytest.approx(mp.rhs, rel=1e-6, abs=1e-8)


def test_report_json_roundtrip():
    inst = make_instance(2)
    d = pb.bound_new_sum(inst.A, inst.B, inst.psi, inst.perp).to_dict()
    assert d["relation"] == "new_sum"
    assert len(d["params"]["perp"]) == inst.dim
