import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from asymtop_lie.closure import (
    LieClosure,
    assemble_generators,
    full_rank_check,
    lie_closure,
)
from asymtop_lie.oplib import DriftSpec
from asymtop_lie.proof import verify_proof

from _oracles import random_unitary

SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1, -1]).astype(complex)


def test_su2_from_two_generators():
    rep, basis = lie_closure([1j * SX, 1j * SY])
    assert rep.generated_dimension == 3 == rep.target_dimension
    assert rep.full_rank
    assert len(basis) == 3


def test_abelian_generators():
    rep, _ = lie_closure([1j * SZ])
    assert rep.generated_dimension == 1
    assert not rep.full_rank


def test_trace_part_reported():
    rep, _ = lie_closure([1j * SX + 0.5j * np.eye(2), 1j * SY])
    assert rep.trace_parts[0] == pytest.approx(0.5)
    assert rep.generated_dimension == 3


def test_rejects_non_anti_hermitian():
    with pytest.raises(ValueError):
        lie_closure([SX])
    with pytest.raises(ValueError):
        lie_closure([1j * SX, 1j * np.eye(3)])
    with pytest.raises(ValueError):
        lie_closure([np.full((2, 2), np.nan)])
    with pytest.raises(ValueError):
        LieClosure(tol=0).fit([1j * SX])


def test_budget_flag():
    gens, _ = assemble_generators(1)
    ok, rep = full_rank_check(1, max_pairs=50)
    assert rep.budget_exhausted and not ok
    assert rep.iterations <= 50


def test_report_dict_shape():
    ok, rep = full_rank_check(1)
    d = rep.to_dict()
    assert set(d) == {"dimension", "target", "iterations", "residual_spectrum", "rejected", "budget_exhausted", "elapsed"}
    assert all(r > 1e-12 for r in d["residual_spectrum"])
    assert d["dimension"] == d["target"] == 168


@pytest.mark.parametrize("J,dim", [(1, 168), (2, 360)])
def test_invariant_under_unitary_conjugation(J, dim, rng):
    gens, _ = assemble_generators(J)
    U = random_unitary(gens[0].shape[0], rng)
    rot = [U @ g @ U.conj().T for g in gens]
    rep, _ = lie_closure(rot)
    assert rep.generated_dimension == dim


def test_invariant_under_scaling_and_order(rng):
    gens, _ = assemble_generators(1)
    scaled = [g * s for g, s in zip(gens, rng.uniform(0.2, 5, len(gens)))]
    perm = [gens[i] for i in rng.permutation(len(gens))]
    assert lie_closure(scaled)[0].generated_dimension == 168
    assert lie_closure(perm)[0].generated_dimension == 168


def test_monotone_in_generators():
    gens, _ = assemble_generators(1)
    dims = [lie_closure(gens[:k])[0].generated_dimension for k in range(1, len(gens) + 1)]
    assert dims == sorted(dims)
    assert dims[-1] == 168


@pytest.mark.parametrize("J", [0, 1, 2, 3])
def test_tolerance_plateau(J):
    dims = {full_rank_check(J, tolerance=t)[1].generated_dimension for t in (1e-10, 1e-9, 1e-8, 1e-7)}
    assert len(dims) == 1


def test_j0_structural_gap():
    ok, rep = full_rank_check(0)
    assert not ok
    assert rep.generated_dimension == 25 and rep.target_dimension == 48


@pytest.mark.parametrize(
    "pols,dims",
    [
        (("x", "x", "y", "z"), (16, 64, 148)),
        (("x", "y", "x", "y"), (25, 88, 184)),
        (("x", "y", "z", "z"), (16, 64, 148)),
        (("y", "y", "x", "z"), (16, 64, 148)),
    ],
)
def test_negative_controls(pols, dims):
    for J, dim in enumerate(dims):
        ok, rep = full_rank_check(J, polarizations=pols)
        assert not ok
        assert rep.generated_dimension == dim


def test_physical_proven_matches_structural():
    for J, dim in [(0, 25), (1, 168), (2, 360)]:
        assert full_rank_check(J, source="physical")[1].generated_dimension == dim


def test_structural_source_requires_proven_polarizations():
    with pytest.raises(ValueError):
        assemble_generators(1, polarizations="x,x,y,z", source="structural")
    with pytest.raises(ValueError):
        assemble_generators(1, source="nope")


def test_custom_drift():
    d = DriftSpec.from_floats(0.0, 1.0, 1.7320508075688772)
    assert full_rank_check(1, drift=d)[0]


def test_sklearn_api():
    est = LieClosure(tol=1e-8, max_pairs=1000)
    assert est.get_params() == {"tol": 1e-8, "max_pairs": 1000, "remove_trace": True, "n_residuals": 16}
    c = clone(est)
    assert c.get_params() == est.get_params() and not hasattr(c, "basis_")
    with pytest.raises(NotFittedError):
        est.transform([1j * SX])
    est.set_params(max_pairs=None).fit([1j * SX, 1j * SY])
    coords = est.transform(1j * SZ)
    assert coords.shape == (1, 3)
    assert np.linalg.norm(coords) == pytest.approx(np.linalg.norm(SZ))
    assert est.residual(1j * SZ)[0] < 1e-12
    assert est.residual(np.eye(2) * 1j)[0] == pytest.approx(np.sqrt(2))
    with pytest.raises(ValueError):
        est.transform(np.eye(3))


@pytest.mark.parametrize("J", [1, 2])
def test_proof_elements_lie_in_closure(J):
    gens, _ = assemble_generators(J)
    est = LieClosure().fit(gens)
    rep = verify_proof(J)
    from asymtop_lie.oplib import element_matrix

    n = gens[0].shape[0]
    mats = np.array([element_matrix(e, n).toarray() for e in rep.isolated.elements])
    assert est.residual(mats).max() < 1e-8


@pytest.mark.parametrize("J", [1, 2, 3])
def test_closure_dimension_equals_proof_count(J):
    rep = verify_proof(J)
    ok, crep = full_rank_check(J)
    assert sum(rep.counts().values()) == crep.generated_dimension == rep.target_dim
