import numpy as np
import pytest

from mixedpath.action import (
    ActionMatrix,
    HamiltonianModel,
    ModelKind,
    build_action_matrix,
    evaluate_action_R,
    evaluate_action_S,
    matched_actions,
)
from mixedpath.errors import DomainError, MatrixTooLarge, ModelDomain
from mixedpath.lattice import LatticeSpec, PathSet, PPath, QPath, enumerate_paths

FREE = HamiltonianModel()


def loop_action(levels, sites, m, dt, dq, V=lambda q: 0.0):
    """Slice-by-slice rectangle rule written out with plain floats."""
    total = 0.0
    for j, level in enumerate(levels):
        p = level * m * dq / dt
        qdot = (sites[j + 1] - sites[j]) * dq / dt
        qbar = 0.5 * (sites[j] + sites[j + 1]) * dq
        total += (p * qdot - p * p / (2 * m) - V(qbar)) * dt
    return total


def one_step():
    return LatticeSpec(num_steps=1, dt=1.0, dq=1.0)


def test_S_matched_single_slice():
    assert evaluate_action_S(PPath((1,)), QPath((0, 1)), FREE, one_step()) == pytest.approx(0.5)


def test_S_constant_path_zero():
    assert evaluate_action_S(PPath((0,)), QPath((0, 0)), FREE, one_step()) == 0.0


def test_S_mismatched_pair():
    assert evaluate_action_S(PPath((1,)), QPath((0, 0)), FREE, one_step()) == pytest.approx(-0.5)


def test_R_constant_momentum():
    assert evaluate_action_R(PPath((1,)), QPath((0, 1)), FREE, one_step()) == pytest.approx(-0.5)


def test_R_zero():
    assert evaluate_action_R(PPath((0,)), QPath((0, 0)), FREE, one_step()) == 0.0


def test_boundary_identity_single_slice():
    # S - R = p q at the end minus p q at the start = 1 * 1 - 1 * 0
    spec = one_step()
    s = evaluate_action_S(PPath((1,)), QPath((0, 1)), FREE, spec)
    r = evaluate_action_R(PPath((1,)), QPath((0, 1)), FREE, spec)
    assert s - r == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "model",
    [FREE, HamiltonianModel(ModelKind.HARMONIC, mass=2.0, omega=1.3), HamiltonianModel(mass=0.7, hbar=0.1)],
)
def test_boundary_identity_all_matched_pairs(model):
    spec = LatticeSpec(num_steps=5, dt=0.3, dq=0.2, branching=5, mass=model.mass, endpoint_start=-1)
    ps = enumerate_paths(spec)
    for q, p in zip(ps.qpaths, ps.ppaths):
        s = evaluate_action_S(p, q, model, spec)
        r = evaluate_action_R(p, q, model, spec)
        mom = p.momenta(spec)
        boundary = mom[-1] * q.sites[-1] * spec.dq - mom[0] * q.sites[0] * spec.dq
        assert s - r == pytest.approx(boundary, rel=1e-12, abs=1e-12)


def test_three_path_matrix_against_loop_oracle():
    spec = LatticeSpec(num_steps=2, dt=1.0, dq=1.0, endpoint_end=0)
    ps = enumerate_paths(spec)
    mat = build_action_matrix(ps, FREE)
    assert mat.entries.shape == (3, 3)
    # (0,-1,0) with p = (-1, 1): two slices of (1 - 1/2)
    assert mat.entries[0, 0] == pytest.approx(1.0)
    for j, p in enumerate(ps.ppaths):
        for k, q in enumerate(ps.qpaths):
            assert mat.entries[j, k] == pytest.approx(loop_action(p.levels, q.sites, 1.0, 1.0, 1.0), abs=1e-14)
    assert np.allclose(np.diag(mat.entries), matched_actions(ps, FREE))


def test_harmonic_matrix_against_loop_oracle():
    m, w = 1.5, 0.8
    model = HamiltonianModel(ModelKind.HARMONIC, mass=m, omega=w)
    spec = LatticeSpec(num_steps=3, dt=0.4, dq=0.3, mass=m, endpoint_start=1, endpoint_end=0)
    ps = enumerate_paths(spec)
    mat = build_action_matrix(ps, model)
    V = lambda q: 0.5 * m * w * w * q * q  # noqa: E731
    for j, p in enumerate(ps.ppaths):
        for k, q in enumerate(ps.qpaths):
            expect = loop_action(p.levels, q.sites, m, spec.dt, spec.dq, V)
            assert mat.entries[j, k] == pytest.approx(expect, rel=1e-12, abs=1e-14)


def test_tabulated_potential_midpoint_average():
    table = {-1: 2.0, 0: 0.0, 1: 1.0, 2: 4.0}
    model = HamiltonianModel(ModelKind.TABULATED, potential_table=table)
    spec = LatticeSpec(num_steps=2, dt=0.5, dq=1.0)
    s = evaluate_action_S(PPath((1, 1)), QPath((0, 1, 2)), model, spec)
    # p = 2; per slice p qdot - p^2/2 = 4 - 2, potentials 0.5 and 2.5
    assert s == pytest.approx(((4 - 2 - 0.5) + (4 - 2 - 2.5)) * 0.5)


def test_tabulated_potential_missing_site():
    model = HamiltonianModel(ModelKind.TABULATED, potential_table={0: 0.0})
    with pytest.raises(ModelDomain):
        evaluate_action_S(PPath((1,)), QPath((0, 1)), model, one_step())


def test_single_path_matrix():
    spec = LatticeSpec(num_steps=1, dt=1.0, dq=1.0, branching=1)
    ps = enumerate_paths(spec)
    mat = build_action_matrix(ps, FREE)
    assert mat.entries.shape == (1, 1)
    assert mat.entries[0, 0] == evaluate_action_S(ps.ppaths[0], ps.qpaths[0], FREE, spec)


def test_mass_and_potential_scaling():
    # scaling mass and V by c at fixed levels scales every entry by c
    c = 2.5
    spec = LatticeSpec(num_steps=3, dt=0.5, dq=0.25, endpoint_end=0)
    spec_c = LatticeSpec(num_steps=3, dt=0.5, dq=0.25, endpoint_end=0, mass=c)
    a = build_action_matrix(enumerate_paths(spec), HamiltonianModel(ModelKind.HARMONIC, omega=1.1))
    b = build_action_matrix(enumerate_paths(spec_c), HamiltonianModel(ModelKind.HARMONIC, mass=c, omega=1.1))
    assert np.allclose(b.entries, c * a.entries, rtol=1e-12, atol=1e-14)


def test_parallel_fill_bit_identical():
    spec = LatticeSpec(num_steps=5, dt=0.3, dq=0.2, endpoint_end=1)
    ps = enumerate_paths(spec)
    model = HamiltonianModel(ModelKind.HARMONIC, omega=2.0)
    a = build_action_matrix(ps, model)
    b = build_action_matrix(ps, model, workers=4)
    assert np.array_equal(a.entries, b.entries)


def test_matrix_cap():
    ps = enumerate_paths(LatticeSpec(num_steps=4, dt=1, dq=1))
    with pytest.raises(MatrixTooLarge):
        build_action_matrix(ps, FREE, cap=50)


def test_empty_pathset_rejected():
    spec = LatticeSpec(num_steps=1, dt=1, dq=1)
    with pytest.raises(DomainError):
        build_action_matrix(PathSet(spec, np.zeros((0, 2), dtype=int)), FREE)


def test_model_validation():
    with pytest.raises(DomainError):
        HamiltonianModel(mass=0.0)
    with pytest.raises(DomainError):
        HamiltonianModel(omega=-1.0)
    with pytest.raises(DomainError):
        HamiltonianModel(ModelKind.TABULATED)
    assert HamiltonianModel(hbar=2.0).h == pytest.approx(4 * np.pi)


def test_csv_and_json():
    mat = ActionMatrix.from_array([[1.0, 2.0], [3.0, 4.5]])
    lines = mat.to_csv().splitlines()
    assert lines[0] == "path,q0,q1"
    assert lines[2] == "p1,3.0,4.5"
    assert mat.to_dict()["entries"] == [[1.0, 2.0], [3.0, 4.5]]
