"""Asymmetric-top spectrum and dipole couplings of a J / J+1 / J+1 subsystem.

Working basis: symmetric-top states ``|J, K, M>`` with the molecular ``a`` axis
as the body-fixed quantization axis (``a -> z``, ``b -> x``, ``c -> y``). In
that basis ``H0 = A Ja^2 + B Jb^2 + C Jc^2`` is real symmetric and couples only
``K`` with ``K`` and ``K +- 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy import linalg

from .exact import wigner3j

__all__ = [
    "RotationalConstants",
    "SubsystemSpec",
    "EigenDecomposition",
    "build_h0_symtop",
    "diagonalize",
    "decompositions_for",
    "dipole_element",
    "build_physical_drive",
    "structural_phases",
    "dipole_type",
    "find_subsystem",
    "subsystem_energies",
    "POLARIZATIONS",
]

POLARIZATIONS = ("x", "y", "z")


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class RotationalConstants:
    A: float
    B: float
    C: float

    def __post_init__(self):
        vals = (self.A, self.B, self.C)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rotational constants must be finite")
        if not (self.A > self.B > self.C > 0):
            raise ValueError(f"need A > B > C > 0, got A={self.A}, B={self.B}, C={self.C}")

    @classmethod
    def limit(cls, A: float, B: float, C: float) -> "RotationalConstants":
        """Constants allowing the symmetric-top limits A >= B >= C > 0.

        Only the spectrum is meaningful there; subsystem selection assumes
        distinct constants.
        """
        if not all(math.isfinite(v) for v in (A, B, C)) or not (A >= B >= C > 0):
            raise ValueError(f"need A >= B >= C > 0, got A={A}, B={B}, C={C}")
        obj = cls.__new__(cls)
        for name, v in zip("ABC", (A, B, C)):
            object.__setattr__(obj, name, float(v))
        return obj


@dataclass(frozen=True)
class SubsystemSpec:
    """Levels (J, tau), (J+1, tauP), (J+1, tauPP) plus the body-fixed dipole."""

    J: int
    tau: int
    tauP: int
    tauPP: int
    dipole: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        J = self.J
        if not isinstance(J, int) or J < 0:
            raise ValueError("J must be a non-negative integer")
        if abs(self.tau) > J:
            raise ValueError(f"tau={self.tau} outside [-{J}, {J}]")
        for t in (self.tauP, self.tauPP):
            if abs(t) > J + 1:
                raise ValueError(f"tau'={t} outside [-{J + 1}, {J + 1}]")
        if self.tauP == self.tauPP:
            raise ValueError("tau' and tau'' must differ")
        if len(self.dipole) != 3:
            raise ValueError("dipole needs three components (mu_a, mu_b, mu_c)")

    def check_energies(self, constants: RotationalConstants, decompositions=None) -> tuple[float, float, float]:
        """Energies (E_tau, E_tau', E_tau''); raises if the two resonances coincide."""
        e = subsystem_energies(self, constants, decompositions)
        w1, w2 = abs(e[1] - e[0]), abs(e[2] - e[0])
        scale = max(abs(x) for x in e) or 1.0
        if min(w1, w2, abs(w1 - w2)) <= 1e-12 * scale:
            raise ValueError(f"degenerate subsystem: omega1={w1}, omega2={w2}")
        return e


@dataclass(frozen=True)
class EigenDecomposition:
    """Levels of one J. ``coefficients[tau + J, K + J]`` is c_K^J(tau)."""

    J: int
    energies: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)

    def energy(self, tau: int) -> float:
        return float(self.energies[tau + self.J])

    def vector(self, tau: int) -> np.ndarray:
        return self.coefficients[tau + self.J]


def build_h0_symtop(J: int, constants: RotationalConstants) -> np.ndarray:
    """Matrix of A Ja^2 + B Jb^2 + C Jc^2 in the |J, K> basis (K = -J..J)."""
    if J < 0:
        raise ValueError("J must be non-negative")
    A, B, C = constants.A, constants.B, constants.C
    jj = J * (J + 1)
    ks = np.arange(-J, J + 1)
    h = np.diag((B + C) / 2 * (jj - ks**2) + A * ks**2).astype(float)
    for i, k in enumerate(ks[:-2]):
        # <J, k+2| (J+^2 + J-^2) |J, k> with the usual positive phases
        v = (B - C) / 4 * math.sqrt((jj - k * (k + 1)) * (jj - (k + 1) * (k + 2)))
        h[i + 2, i] = h[i, i + 2] = v
    return h


def diagonalize(J: int, constants: RotationalConstants) -> EigenDecomposition:
    h = build_h0_symtop(J, constants)
    try:
        w, v = linalg.eigh(h)
    except linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed for J={J}: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise EigensolverError(f"non-finite eigenvalues for J={J}")
    vecs = v.T.copy()
    for row in vecs:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row *= -1
    w.setflags(write=False)
    vecs.setflags(write=False)
    return EigenDecomposition(J=J, energies=w, coefficients=vecs)


def decompositions_for(Js, constants: RotationalConstants) -> dict[int, EigenDecomposition]:
    return {J: diagonalize(J, constants) for J in sorted(set(Js))}


def subsystem_energies(spec: SubsystemSpec, constants: RotationalConstants, decompositions=None):
    decs = decompositions or decompositions_for((spec.J, spec.J + 1), constants)
    return (
        decs[spec.J].energy(spec.tau),
        decs[spec.J + 1].energy(spec.tauP),
        decs[spec.J + 1].energy(spec.tauPP),
    )


# Lab-frame dipole components as combinations of D^1_{M K}:
# polarization -> body component index -> {(M, K): weight}
_R2 = math.sqrt(2.0)
_DIPOLE_PROJECTIONS: dict[str, tuple[dict, dict, dict]] = {
    "x": (
        {(-1, 0): 1 / _R2, (1, 0): -1 / _R2},
        {(1, 1): 0.5, (1, -1): -0.5, (-1, 1): -0.5, (-1, -1): 0.5},
        {(1, 1): -0.5j, (1, -1): -0.5j, (-1, 1): 0.5j, (-1, -1): 0.5j},
    ),
    "y": (
        {(-1, 0): -1j / _R2, (1, 0): -1j / _R2},
        {(1, 1): 0.5j, (1, -1): -0.5j, (-1, 1): 0.5j, (-1, -1): -0.5j},
        {(1, 1): 0.5, (1, -1): 0.5, (-1, 1): 0.5, (-1, -1): 0.5},
    ),
    "z": (
        {(0, 0): 1.0},
        {(0, 1): -1 / _R2, (0, -1): 1 / _R2},
        {(0, 1): 1j / _R2, (0, -1): 1j / _R2},
    ),
}


@lru_cache(maxsize=None)
def _w3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    return float(wigner3j(j1, j2, j3, m1, m2, m3))


def _symtop_element(J2, K2, M2, J1, K1, M1, M, K) -> float:
    """<J2 K2 M2| D^1_{M K} |J1 K1 M1>, standard two-3j form."""
    if M2 != M1 + M or K2 != K1 + K:
        return 0.0
    a = _w3j(J1, 1, J2, M1, M, -M2)
    if a == 0.0:
        return 0.0
    b = _w3j(J1, 1, J2, K1, K, -K2)
    if b == 0.0:
        return 0.0
    phase = -1.0 if (M2 + K2) % 2 else 1.0
    return math.sqrt((2 * J2 + 1) * (2 * J1 + 1)) * phase * a * b


def dipole_element(bra, ket, polarization: str, dipole, decompositions: Mapping[int, EigenDecomposition]) -> complex:
    """Matrix element <bra| -mu_p |ket> between asymmetric-top states.

    ``bra`` and ``ket`` are ``(J, tau, M)`` triples. Forbidden transitions give
    exactly ``0j``.
    """
    if polarization not in _DIPOLE_PROJECTIONS:
        raise ValueError(f"polarization must be one of {POLARIZATIONS}")
    J2, t2, M2 = bra
    J1, t1, M1 = ket
    if abs(J2 - J1) > 1 or (J1 == 0 and J2 == 0):
        return 0j
    dM = M2 - M1
    allowed = {"z": (0,), "x": (-1, 1), "y": (-1, 1)}[polarization]
    if dM not in allowed:
        return 0j
    c1 = decompositions[J1].vector(t1)
    c2 = decompositions[J2].vector(t2)
    total = 0j
    for mu, proj in zip(dipole, _DIPOLE_PROJECTIONS[polarization]):
        if mu == 0:
            continue
        for (M, K), weight in proj.items():
            if M != dM:
                continue
            acc = 0.0
            for K1 in range(-J1, J1 + 1):
                K2 = K1 + K
                if abs(K2) > J2:
                    continue
                x = c1[K1 + J1] * c2[K2 + J2]
                if x:
                    acc += x * _symtop_element(J2, K2, M2, J1, K1, M1, M, K)
            total += mu * weight * acc
    return -total


def structural_phases(J: int) -> np.ndarray:
    """Diagonal of the basis change |J_l, tau, M> -> i**(J_l + M) |J_l, tau, M>.

    ``J_l`` is J for the lower level and J+1 for both upper levels. In the
    rephased basis the omega1 drives (mu_c) and the omega2 drives (mu_a or
    mu_b) are real multiples of the prefactor-free G/F ladder operators.
    """
    from .oplib import Subsystem

    sub = Subsystem(J)
    out = np.empty(sub.n, dtype=complex)
    for i, st in enumerate(sub.states()):
        jl = J if st.level == "tau" else J + 1
        out[i] = 1j ** ((jl + st.M) % 4)
    return out


def build_physical_drive(
    spec: SubsystemSpec,
    resonance: str,
    polarization: str,
    decompositions: Mapping[int, EigenDecomposition],
    phase_convention: str = "standard",
) -> np.ndarray:
    """Hermitian matrix of -mu_p restricted to the resonant level pair.

    ``resonance`` is ``"w1"`` for (J, tau) <-> (J+1, tau') or ``"w2"`` for
    (J, tau) <-> (J+1, tau''). State order: tau block, tau' block, tau''
    block, each with M ascending. ``phase_convention="structural"`` expresses
    the matrix in the rephased basis of :func:`structural_phases`.
    """
    if phase_convention not in ("standard", "structural"):
        raise ValueError("phase_convention must be 'standard' or 'structural'")
    from .oplib import Subsystem  # local: keep rotor importable without oplib

    sub = Subsystem(spec.J)
    J = spec.J
    if resonance == "w1":
        level, tau_up = "tauP", spec.tauP
    elif resonance == "w2":
        level, tau_up = "tauPP", spec.tauPP
    else:
        raise ValueError("resonance must be 'w1' or 'w2'")
    h = np.zeros((sub.n, sub.n), dtype=complex)
    for M in range(-J, J + 1):
        col = sub.flat("tau", M)
        for Mu in range(-J - 1, J + 2):
            v = dipole_element((J + 1, tau_up, Mu), (J, spec.tau, M), polarization, spec.dipole, decompositions)
            if v != 0:
                row = sub.flat(level, Mu)
                h[row, col] = v
                h[col, row] = np.conj(v)
    if phase_convention == "structural":
        g = structural_phases(J)
        h = (g.conj()[:, None] * h) * g[None, :]
    return h


def dipole_type(spec: SubsystemSpec, resonance: str, decompositions) -> tuple[str, ...]:
    """Body-fixed dipole components that drive the resonance (for unit components)."""
    out = []
    for comp, name in enumerate("abc"):
        dip = [0.0, 0.0, 0.0]
        dip[comp] = 1.0
        probe = SubsystemSpec(spec.J, spec.tau, spec.tauP, spec.tauPP, tuple(dip))
        h = build_physical_drive(probe, resonance, "z", decompositions)
        h += build_physical_drive(probe, resonance, "x", decompositions)
        if np.abs(h).max() > 1e-12:
            out.append(name)
    return tuple(out)


def find_subsystem(
    J: int,
    constants: RotationalConstants,
    dipole=(1.0, 1.0, 1.0),
    w1_type: str | None = "c",
    w2_type: str | None = "a",
) -> SubsystemSpec:
    """First (tau, tau', tau'') in lexicographic order whose omega1 / omega2
    transitions are driven by the requested dipole components.

    ``None`` accepts any nonzero coupling. Raises ``LookupError`` if no level
    triple qualifies.
    """
    decs = decompositions_for((J, J + 1), constants)
    for tau in range(-J, J + 1):
        for tp in range(-J - 1, J + 2):
            for tpp in range(-J - 1, J + 2):
                if tp == tpp:
                    continue
                spec = SubsystemSpec(J, tau, tp, tpp, tuple(dipole))
                try:
                    spec.check_energies(constants, decs)
                except ValueError:
                    continue
                t1 = dipole_type(spec, "w1", decs)
                t2 = dipole_type(spec, "w2", decs)
                if not t1 or not t2:
                    continue
                if w1_type is not None and t1 != (w1_type,):
                    continue
                if w2_type is not None and t2 != (w2_type,):
                    continue
                if any(dipole["abc".index(t)] == 0 for t in t1 + t2):
                    continue
                return spec
    raise LookupError(f"no subsystem at J={J} with omega1 ~ mu_{w1_type}, omega2 ~ mu_{w2_type}")
