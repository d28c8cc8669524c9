import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy.physics.wigner import wigner_3j

from asymtop_lie.oplib import Subsystem
from asymtop_lie.rotor import (
    RotationalConstants,
    SubsystemSpec,
    build_h0_symtop,
    build_physical_drive,
    decompositions_for,
    diagonalize,
    dipole_element,
    dipole_type,
    find_subsystem,
    structural_phases,
    subsystem_energies,
)

DEFAULT = RotationalConstants(1.0, 0.6, 0.2)


@st.composite
def constants(draw):
    c = draw(st.floats(0.05, 1.0))
    b = c + draw(st.floats(0.05, 1.0))
    a = b + draw(st.floats(0.05, 1.0))
    return RotationalConstants(a, b, c)


def test_constants_validated():
    with pytest.raises(ValueError):
        RotationalConstants(0.5, 0.6, 0.2)
    with pytest.raises(ValueError):
        RotationalConstants(1.0, 0.6, 0.0)
    with pytest.raises(ValueError):
        RotationalConstants(float("inf"), 0.6, 0.2)


def test_subsystem_spec_validated():
    with pytest.raises(ValueError):
        SubsystemSpec(1, 2, 0, 1)
    with pytest.raises(ValueError):
        SubsystemSpec(1, 0, 1, 1)
    with pytest.raises(ValueError):
        SubsystemSpec(1, 0, 3, 1)


def test_j0_matrix():
    assert build_h0_symtop(0, DEFAULT).tolist() == [[0.0]]
    dec = diagonalize(0, DEFAULT)
    assert dec.energies.tolist() == [0.0]
    assert dec.coefficients.tolist() == [[1.0]]


@given(constants())
def test_j1_levels(c):
    w = np.linalg.eigvalsh(build_h0_symtop(1, c))
    assert np.allclose(sorted(w), sorted([c.A + c.B, c.A + c.C, c.B + c.C]), atol=1e-12)


def test_j1_default_levels():
    assert np.allclose(diagonalize(1, DEFAULT).energies, [0.8, 1.2, 1.6], atol=1e-14)


@pytest.mark.parametrize("J", [0, 1, 2, 5])
def test_symmetric_top_limit(J):
    c = RotationalConstants.limit(1.0, 0.4, 0.4)
    h = build_h0_symtop(J, c)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    ks = np.arange(-J, J + 1)
    assert np.allclose(np.diag(h), 0.4 * J * (J + 1) + 0.6 * ks**2)


def test_limit_constructor():
    with pytest.raises(ValueError):
        RotationalConstants(1.0, 0.4, 0.4)
    with pytest.raises(ValueError):
        RotationalConstants.limit(0.4, 1.0, 0.4)
    with pytest.raises(ValueError):
        RotationalConstants.limit(1.0, 0.4, 0.0)
    assert RotationalConstants.limit(1, 0.6, 0.2) == RotationalConstants(1, 0.6, 0.2)


@pytest.mark.parametrize("J", [1, 3, 6])
def test_band_structure(J):
    h = build_h0_symtop(J, DEFAULT)
    assert np.allclose(h, h.T)
    i, k = np.nonzero(h)
    assert set(np.abs(i - k)) <= {0, 2}


@given(constants(), st.integers(0, 10))
def test_trace_equals_level_sum(c, J):
    dec = diagonalize(J, c)
    assert math.isclose(dec.energies.sum(), np.trace(build_h0_symtop(J, c)), rel_tol=1e-10, abs_tol=1e-12)


@given(constants(), st.integers(0, 8))
def test_axis_relabeling_invariance(c, J):
    # reversing K (a 180 degree turn about b) must not move the levels
    h = build_h0_symtop(J, c)
    P = np.eye(2 * J + 1)[::-1]
    assert np.allclose(np.linalg.eigvalsh(P @ h @ P), diagonalize(J, c).energies, rtol=1e-10, atol=1e-12)


def test_orthonormal_and_sign_fixed():
    for J in range(21):
        dec = diagonalize(J, DEFAULT)
        V = dec.coefficients
        assert np.abs(V @ V.T - np.eye(2 * J + 1)).max() < 1e-12
        assert np.all(np.diff(dec.energies) >= 0)
        for row in V:
            first = row[np.flatnonzero(np.abs(row) > 1e-12)[0]]
            assert first > 0
        assert not V.flags.writeable


def test_selection_rules_exact_zero():
    decs = decompositions_for((1, 2), DEFAULT)
    dip = (1.0, 0.7, 0.3)
    assert dipole_element((2, 0, 1), (1, 0, 0), "z", dip, decs) == 0j
    assert dipole_element((2, 0, 0), (1, 0, 0), "x", dip, decs) == 0j
    assert dipole_element((2, 0, 2), (1, 0, 0), "y", dip, decs) == 0j
    decs3 = decompositions_for((1, 3), DEFAULT)
    assert dipole_element((3, 0, 0), (1, 0, 0), "z", dip, decs3) == 0j


def test_j0_to_j1_hand_assembly():
    decs = decompositions_for((0, 1), DEFAULT)
    w = float(wigner_3j(0, 1, 1, 0, 0, 0))
    for tau in (-1, 0, 1):
        c0 = decs[1].vector(tau)[1]
        got = dipole_element((1, tau, 0), (0, 0, 0), "z", (1.0, 0.0, 0.0), decs)
        assert abs(abs(got) - math.sqrt(3) * w * w * abs(c0)) < 1e-14


@pytest.mark.parametrize("J", [1, 2])
@pytest.mark.parametrize("pol", ["x", "y", "z"])
def test_line_strength_sum_rule(J, pol):
    # sum over the whole J manifold of |<f|mu_p|i>|^2 equals (2J+1)^2 |mu|^2 / 3
    dip = (1.0, 0.5, 0.3)
    decs = decompositions_for((J - 1, J, J + 1), DEFAULT)
    total = 0.0
    for tau in range(-J, J + 1):
        for M in range(-J, J + 1):
            for J2 in (J - 1, J, J + 1):
                for t2 in range(-J2, J2 + 1):
                    for M2 in range(-J2, J2 + 1):
                        total += abs(dipole_element((J2, t2, M2), (J, tau, M), pol, dip, decs)) ** 2
    assert math.isclose(total, (2 * J + 1) ** 2 * sum(d * d for d in dip) / 3, rel_tol=1e-12)


@pytest.mark.parametrize("J", [0, 1, 3])
def test_physical_drive_blocks(J):
    spec = find_subsystem(J, DEFAULT)
    decs = decompositions_for((J, J + 1), DEFAULT)
    sub = Subsystem(J)
    up = slice(2 * J + 1, sub.n)
    for res in ("w1", "w2"):
        for pol in ("x", "y", "z"):
            h = build_physical_drive(spec, res, pol, decs)
            assert np.array_equal(h, h.conj().T)
            assert not np.any(h[up, up])
            assert not np.any(h[: 2 * J + 1, : 2 * J + 1])
            other = slice(4 * J + 4, sub.n) if res == "w1" else slice(2 * J + 1, 4 * J + 4)
            assert not np.any(h[: 2 * J + 1, other])


def test_structural_phases_unit_modulus():
    g = structural_phases(2)
    assert np.allclose(np.abs(g), 1)
    assert g[0] == 1j ** 0  # (J=2, tau, M=-2)


def test_find_subsystem_types():
    for J in range(4):
        spec = find_subsystem(J, DEFAULT)
        decs = decompositions_for((J, J + 1), DEFAULT)
        assert dipole_type(spec, "w1", decs) == ("c",)
        assert dipole_type(spec, "w2", decs) == ("a",)
        e = subsystem_energies(spec, DEFAULT, decs)
        assert len(set(e)) == 3


def test_find_subsystem_reports_missing():
    with pytest.raises(LookupError):
        find_subsystem(1, DEFAULT, dipole=(0.0, 1.0, 0.0), w1_type="c", w2_type="a")
