"""First-integral construction H_F, certification, and problem-file assembly."""

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from poissondarboux import (
    EXACT,
    FLOAT,
    NaturalSpec,
    NotProperError,
    PolyMap,
    Polynomial,
    SingularMatrixError,
    TheoremInstance,
    build_poisson_from_diffeo,
    build_theorem1_system,
    canonical_matrix,
    construct_HF,
    hamiltonian_vector_field,
    hypothesis_report,
    independence_report,
    instance_from_problem,
    load_problem,
    natural_system,
    parse_expression,
    parse_problem,
    structure_from_problem,
    system_from_problem,
    transform_structure,
    verify_first_integral,
)

from helpers import random_triangular_map

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"
Q2 = ["q1", "q2", "p1", "p2"]
SQRT2 = 2**0.5


def poly(text, names, mode=EXACT):
    return parse_expression(text, names, mode)


def quartic_spec(mode=EXACT):
    # V = q1^2 + q2^4, unit masses
    V = poly("q1^2 + q2^4", ["q1", "q2"], mode)
    return NaturalSpec(2, (1, 1), V)


def darboux_F():
    # proper Darboux polynomial of the canonical quartic flow (FLOAT data)
    return poly(f"i*p2 + {SQRT2!r}*q2^2", Q2, FLOAT)


class TestNaturalSpec:
    def test_hamiltonian_and_field(self):
        spec = quartic_spec()
        H = spec.hamiltonian()
        assert H == poly("q1^2 + q2^4 + 1/2*p1^2 + 1/2*p2^2", Q2)
        field = spec.field()
        assert field[0] == poly("p1", Q2)
        assert field[2] == poly("-2*q1", Q2)
        assert field[3] == poly("-4*q2^3", Q2)

    def test_casimir_slots(self):
        spec = quartic_spec()
        W = poly("z^2", ["z"])
        H = spec.hamiltonian(1, W)
        names = Q2 + ["z"]
        assert H == poly("q1^2 + q2^4 + 1/2*p1^2 + 1/2*p2^2 + z^2", names)
        field = spec.field(1)
        assert field[4].is_zero()

    def test_mu_coerced_to_mode(self):
        spec = NaturalSpec(1, (2,), poly("q^4", ["q"]))
        assert spec.mu == (2,)
        assert spec.mode == EXACT

    def test_validation(self):
        with pytest.raises(ValueError):
            NaturalSpec(0, (), poly("1", []))
        with pytest.raises(ValueError):
            NaturalSpec(2, (1, 1), poly("q^2", ["q"]))
        with pytest.raises(ValueError):
            quartic_spec().hamiltonian(0, poly("z", ["z"]))


class TestTheoremInstance:
    def test_t1_validation(self):
        spec = quartic_spec()
        inst = TheoremInstance(kind="T1", spec=spec, A=((1, 1), (0, 1)))
        assert inst.mode == EXACT
        with pytest.raises(SingularMatrixError):
            TheoremInstance(kind="T1", spec=spec, A=((1, 1), (1, 1)))
        with pytest.raises(ValueError):
            TheoremInstance(kind="T1", spec=spec, A=((1,),))
        with pytest.raises(ValueError):
            TheoremInstance(
                kind="T1", spec=spec, A=((1, 0), (0, 1)), pmap=PolyMap.identity(4, EXACT)
            )

    def test_t2_t3_validation(self):
        spec = quartic_spec()
        ident = PolyMap.identity(4, EXACT)
        assert TheoremInstance(kind="T2", spec=spec, pmap=ident).s == 0
        with pytest.raises(ValueError):
            TheoremInstance(kind="T2", spec=spec, pmap=ident, s=1)
        with pytest.raises(ValueError):
            TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(3, EXACT))
        with pytest.raises(ValueError):
            TheoremInstance(kind="T3", spec=spec, pmap=PolyMap.identity(5, EXACT), s=1,
                            W=poly("z1^2 + z2^2", ["z1", "z2"]))
        with pytest.raises(ValueError):
            TheoremInstance(kind="T9", spec=spec)


class TestTheorem1:
    def test_shear_build(self):
        build = build_theorem1_system(((1, 1), (0, 1)), quartic_spec())
        H = build.system.H
        expected = poly(
            "q1^2 + (q1 + q2)^4 + 1/2*p1^2 - p1*p2 + p2^2", Q2
        )
        assert H == expected
        assert build.B == ((1, 0, 0, 0), (-1, 1, 0, 0), (0, 0, 1, 1), (0, 0, 0, 1))
        assert build.A_inverse == ((1, -1), (0, 1))

    def test_structure_stays_canonical(self):
        build = build_theorem1_system(((2, 1), (1, 1)), quartic_spec())
        assert build.system.J == canonical_matrix(2, 0)

    def test_hf_through_linear_change(self):
        spec = quartic_spec()
        inst = TheoremInstance(kind="T1", spec=spec, A=((1, 1), (0, 1)))
        HF = construct_HF(inst, darboux_F())
        assert HF.mode == EXACT
        assert HF == poly("2*(q1 + q2)^4 + p2^2", Q2)
        build = build_theorem1_system(inst.A, spec)
        assert verify_first_integral(build.system, HF).ok

    def test_singular_matrix_rejected(self):
        with pytest.raises(SingularMatrixError):
            build_theorem1_system(((1, 2), (2, 4)), quartic_spec())


class TestConstructHF:
    def test_identity_chart_exact_bridge(self):
        spec = quartic_spec()  # EXACT
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        HF = construct_HF(inst, darboux_F())  # FLOAT F, EXACT instance
        assert HF.mode == EXACT
        assert HF == poly("p2^2 + 2*q2^4", Q2)

    def test_exact_f_stays_exact(self):
        spec = NaturalSpec(1, (2,), poly("q^4", ["q"]))
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(2, EXACT))
        F = poly("q^2 + i*p", ["q", "p"])
        HF = construct_HF(inst, F)
        assert HF == poly("q^4 + p^2", ["q", "p"])

    def test_improper_f_raises(self):
        spec = quartic_spec()
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        with pytest.raises(NotProperError):
            construct_HF(inst, spec.hamiltonian())  # first integral, cofactor 0
        HF = construct_HF(inst, spec.hamiltonian(), allow_improper=True)
        assert verify_first_integral(natural_system(spec), HF).ok

    def test_wrong_arity_rejected(self):
        spec = quartic_spec()
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        with pytest.raises(ValueError):
            construct_HF(inst, poly("q", ["q"]))

    def test_float_instance_stays_float(self):
        spec = quartic_spec(FLOAT)
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, FLOAT))
        HF = construct_HF(inst, darboux_F())
        assert HF.mode == FLOAT
        target = poly("p2^2 + 2*q2^4", Q2, FLOAT)
        assert (HF - target).max_abs_coeff() <= 1e-12


class TestVerification:
    def test_hf_is_integral(self):
        spec = quartic_spec(FLOAT)
        system = natural_system(spec)
        assert verify_first_integral(system, poly("p2^2 + 2*q2^4", Q2, FLOAT)).ok

    def test_hamiltonian_is_integral(self):
        system = natural_system(quartic_spec())
        assert verify_first_integral(system, system.H).ok

    def test_residual_reported(self):
        spec = quartic_spec(FLOAT)
        system = natural_system(spec)
        report = verify_first_integral(system, poly("q1", Q2, FLOAT))
        assert not report.ok
        assert report.residual == poly("p1", Q2, FLOAT)

    def test_mode_mismatch_raises(self):
        system = natural_system(quartic_spec())
        with pytest.raises(ValueError):
            verify_first_integral(system, poly("q1", Q2, FLOAT))

    def test_dependent_integral_not_additional(self):
        system = natural_system(quartic_spec())
        I = system.H.scale(2) + poly("7", Q2)
        assert verify_first_integral(system, I).ok
        report = independence_report(system, I)
        assert not report.additional
        assert report.full_rank == 2

    def test_hf_is_additional(self):
        spec = quartic_spec()
        system = natural_system(spec)
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        HF = construct_HF(inst, darboux_F())
        assert verify_first_integral(system, HF).ok
        report = independence_report(system, HF)
        assert report.additional
        assert max(report.ranks) == 2 + 0  # s + 2 with s = 0


class TestHypothesisReport:
    def test_all_green(self):
        spec = quartic_spec()
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        report = hypothesis_report(inst, darboux_F())
        assert report.ok() and report.failed() == []
        names = [name for name, _, _ in report.entries]
        assert "deg_V_at_least_3" in names and "F_proper" in names

    def test_quadratic_potential_flagged(self):
        spec = NaturalSpec(2, (1, 1), poly("q1^2 + q2^2", ["q1", "q2"]))
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        assert "deg_V_at_least_3" in hypothesis_report(inst).failed()

    def test_single_degree_of_freedom_flagged(self):
        spec = NaturalSpec(1, (2,), poly("q^4", ["q"]))
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(2, EXACT))
        assert "additionality_m_and_mu" in hypothesis_report(inst).failed()

    def test_f_entry_absent_without_f(self):
        spec = quartic_spec()
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        entry = dict((name, ok) for name, ok, _ in hypothesis_report(inst).entries)
        assert entry["F_proper"] is None

    def test_improper_f_flagged(self):
        spec = quartic_spec()
        inst = TheoremInstance(kind="T2", spec=spec, pmap=PolyMap.identity(4, EXACT))
        report = hypothesis_report(inst, spec.hamiltonian())
        assert "F_proper" in report.failed()


class TestTransformedSystems:
    def test_t2_end_to_end_random_charts(self):
        rng = random.Random(2024)
        spec = quartic_spec()  # EXACT
        F = darboux_F()  # FLOAT, bridged to exact inside construct_HF
        for _ in range(4):
            pmap = random_triangular_map(rng, 4)
            inst = TheoremInstance(kind="T2", spec=spec, pmap=pmap)
            system = build_poisson_from_diffeo(inst)
            HF = construct_HF(inst, F)
            assert HF.mode == EXACT
            assert verify_first_integral(system, HF).ok
            assert verify_first_integral(system, system.H).ok

    def test_t3_with_s_zero_matches_t2(self):
        rng = random.Random(5)
        spec = quartic_spec()
        pmap = random_triangular_map(rng, 4)
        t2 = TheoremInstance(kind="T2", spec=spec, pmap=pmap)
        t3 = TheoremInstance(kind="T3", spec=spec, pmap=pmap, s=0)
        F = darboux_F()
        assert construct_HF(t2, F) == construct_HF(t3, F)
        sys2 = build_poisson_from_diffeo(t2)
        sys3 = build_poisson_from_diffeo(t3)
        assert sys2.H == sys3.H
        assert sys2.J == sys3.J

    def test_casimir_potential_changes_nothing(self):
        rng = random.Random(9)
        spec = NaturalSpec(1, (2,), poly("q^4", ["q"]))
        pmap = random_triangular_map(rng, 3)
        W = poly("5*z^2 - z", ["z"])
        with_w = TheoremInstance(kind="T3", spec=spec, pmap=pmap, s=1, W=W)
        without = TheoremInstance(kind="T3", spec=spec, pmap=pmap, s=1)
        sys_w = build_poisson_from_diffeo(with_w)
        sys_0 = build_poisson_from_diffeo(without)
        field_w = hamiltonian_vector_field(sys_w)
        field_0 = hamiltonian_vector_field(sys_0)
        assert all(a == b for a, b in zip(field_w, field_0))
        F = poly("q^2 + i*p", ["q", "p"])
        HF_w = construct_HF(with_w, F)
        HF_0 = construct_HF(without, F)
        assert HF_w == HF_0
        assert verify_first_integral(sys_w, HF_w).ok
        assert verify_first_integral(sys_0, HF_0).ok

    def test_transformed_structure_returns_canonical(self):
        rng = random.Random(11)
        spec = quartic_spec()
        pmap = random_triangular_map(rng, 4)
        inst = TheoremInstance(kind="T2", spec=spec, pmap=pmap)
        system = build_poisson_from_diffeo(inst)
        assert transform_structure(system.J, pmap) == canonical_matrix(2, 0)


class TestProblemAssembly:
    def test_example1_exact_structure(self):
        pd = load_problem(PROBLEMS / "example1.json")
        J, casimirs = structure_from_problem(pd)
        assert casimirs == ()
        assert pd.mode == EXACT
        inst = instance_from_problem(pd)
        assert inst.kind == "T2"
        system = system_from_problem(pd)
        assert verify_first_integral(system, system.H).ok

    def test_example2_canonical_chart(self):
        pd = load_problem(PROBLEMS / "example2.json")
        inst = instance_from_problem(pd)
        assert inst.kind == "T2"
        system = system_from_problem(pd)
        HF = construct_HF(inst, pd.F)
        assert verify_first_integral(system, HF).ok

    def test_example3_float_chart(self):
        pd = load_problem(PROBLEMS / "example3.json")
        inst = instance_from_problem(pd)
        assert inst.kind == "T2"
        system = system_from_problem(pd)
        HF = construct_HF(inst, pd.F)
        report = verify_first_integral(system, HF)
        assert report.ok

    def test_example4_infers_t3(self):
        pd = load_problem(PROBLEMS / "example4.json")
        inst = instance_from_problem(pd)
        assert inst.kind == "T3" and inst.s == 1
        system = system_from_problem(pd)
        assert len(system.casimirs) == 1
        HF = construct_HF(inst, pd.F)
        assert verify_first_integral(system, HF).ok
        assert independence_report(system, HF).additional

    def test_blocks_without_c_infer_t1(self):
        text = json.dumps(
            {
                "mode": "exact",
                "m": 2,
                "s": 0,
                "variables": ["q1", "q2", "p1", "p2"],
                "mu": [1, 1],
                "V": "q1^2 + q2^4",
                "A_blocks": {"B": [[1, 1], [0, 1]]},
            }
        )
        pd = parse_problem(text)
        inst = instance_from_problem(pd)
        assert inst.kind == "T1"
        assert inst.A == ((1, 1), (0, 1))
        system = system_from_problem(pd)
        assert system.H == poly("q1^2 + (q1 + q2)^4 + 1/2*p1^2 - p1*p2 + p2^2", Q2)

    def test_theorem_override_validation(self):
        pd = load_problem(PROBLEMS / "example2.json")
        with pytest.raises(ValueError):
            instance_from_problem(pd, theorem=1)  # no A_blocks present
        pd4 = load_problem(PROBLEMS / "example4.json")
        with pytest.raises(ValueError):
            instance_from_problem(pd4, theorem=2)  # s = 1 needs theorem 3

    def test_structure_grid_has_no_instance(self):
        text = json.dumps(
            {
                "mode": "exact",
                "m": 1,
                "s": 1,
                "variables": ["x1", "x2", "x3"],
                "mu": [1],
                "V": "q^4",
                "canonical_variables": ["q", "p", "z"],
                "structure": [["0", "1", "0"], ["-1", "0", "0"], ["0", "0", "0"]],
            }
        )
        pd = parse_problem(text)
        J, casimirs = structure_from_problem(pd)
        assert J == canonical_matrix(1, 1)
        with pytest.raises(ValueError):
            instance_from_problem(pd)
        system = system_from_problem(pd)
        assert verify_first_integral(system, system.H).ok

    def test_identity_chart_when_no_source(self):
        text = json.dumps(
            {
                "mode": "exact",
                "m": 1,
                "s": 0,
                "variables": ["q", "p"],
                "mu": [2],
                "V": "q1^4",
            }
        )
        pd = parse_problem(text)
        inst = instance_from_problem(pd)
        assert inst.kind == "T2"
        assert inst.pmap.forward[0] == poly("q", ["q", "p"])
        system = system_from_problem(pd)
        assert system.H == poly("q^4 + p^2", ["q", "p"])
