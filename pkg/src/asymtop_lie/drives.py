"""Structural (prefactor-free) drive operators of the J / J+1 / J+1 subsystem.

The M-dependence of every drive comes from a closed-form 3j symbol; the
M-independent factor (dipole component, c-coefficient sums, 3j denominator)
is stripped so that edge coefficients read sqrt((J+1)(2J+1)), sqrt(J(2J+1)),
..., sqrt(3), 1 for the omega_1 drives and sqrt(2J+1), sqrt(4J), ..., J+1 for
the z drive at omega_2.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import RadicalNumber, wigner3j_x, wigner3j_z
from .oplib import DriftSpec, ExactOperator, Subsystem, commute_drift

__all__ = [
    "StructuralDrive",
    "ConventionError",
    "ladder_coefficient",
    "z_coefficient",
    "drive_w1x",
    "drive_w1y",
    "drive_w2y",
    "drive_w2z",
    "sigma_pm",
    "printed_ladder",
    "structural_drive",
    "DRIVE_LABELS",
    "physical_consistency",
]

DRIVE_LABELS = ("w1x", "w1y", "w2y", "w2z", "sigmaPlus", "sigmaMinus")


class ConventionError(AssertionError):
    """A computed operator disagrees with its expected closed form."""


@dataclass(frozen=True)
class StructuralDrive:
    label: str
    op: ExactOperator
    J: int

    def __post_init__(self):
        if self.label not in DRIVE_LABELS:
            raise ValueError(f"unknown drive label {self.label!r}")


def ladder_coefficient(J: int, M: int, s: int) -> RadicalNumber:
    """Coefficient of the (tau, M) -> (J+1, M+s) element, s = +-1.

    |(J 1 J+1; M s -(M+s))| with the factor sqrt(2/((2J+3)(2J+2)(2J+1)))
    removed, i.e. sqrt((J+sM+2)(J+sM+1)/2).
    """
    strip = RadicalNumber.sqrt(Fraction((2 * J + 3) * (2 * J + 2) * (2 * J + 1), 2))
    return abs(wigner3j_x(J, M, s)) * strip


def z_coefficient(J: int, M: int) -> RadicalNumber:
    """|(J 1 J+1; M 0 -M)| scaled by sqrt((2J+3)(2J+1)(J+1)): sqrt((J+M+1)(J-M+1))."""
    strip = RadicalNumber.sqrt((2 * J + 3) * (2 * J + 1) * (J + 1))
    return abs(wigner3j_z(J, M)) * strip


def _ladders(J: int, upper: str, kind: str, down_sign: int) -> ExactOperator:
    sub = Subsystem(J)
    terms = {}
    for M in range(-J, J + 1):
        for s, sign in ((1, 1), (-1, down_sign)):
            e, o = sub.element(kind, ("tau", M), (upper, M + s))
            terms[e] = ladder_coefficient(J, M, s) * (sign * o)
    return ExactOperator(sub.n, terms)


def drive_w1x(J: int) -> StructuralDrive:
    """i H_{omega1,x}: G^{tau,tau'} on both M ladders, all coefficients positive."""
    return StructuralDrive("w1x", _ladders(J, "tauP", "G", 1), J)


def drive_w1y(J: int) -> StructuralDrive:
    """i H_{omega1,y}: F^{tau,tau'}, M-descending members carry a minus sign."""
    return StructuralDrive("w1y", _ladders(J, "tauP", "F", -1), J)


def drive_w2y(J: int) -> StructuralDrive:
    """i H_{omega2,y}: G^{tau,tau''}, M-descending members carry a minus sign."""
    return StructuralDrive("w2y", _ladders(J, "tauPP", "G", -1), J)


def drive_w2z(J: int) -> StructuralDrive:
    """i H_{omega2,z}: M-conserving G^{tau,tau''}_{M,M}."""
    sub = Subsystem(J)
    terms = {}
    for M in range(-J, J + 1):
        e, o = sub.element("G", ("tau", M), ("tauPP", M))
        terms[e] = z_coefficient(J, M) * o
    return StructuralDrive("w2z", ExactOperator(sub.n, terms), J)


def structural_drive(label: str, J: int, drift: DriftSpec | None = None) -> StructuralDrive:
    builders = {"w1x": drive_w1x, "w1y": drive_w1y, "w2y": drive_w2y, "w2z": drive_w2z}
    if label in builders:
        return builders[label](J)
    if label in ("sigmaPlus", "sigmaMinus"):
        return sigma_pm(J, drift or DriftSpec.default(), +1 if label == "sigmaPlus" else -1)
    raise ValueError(f"unknown drive label {label!r}")


def printed_ladder(J: int, direction: int, upper: str = "tauP") -> ExactOperator:
    """Single-ladder operator sum_M sqrt((J+dM+2)(J+dM+1)/2) G^{tau,upper}_{M,M+d}.

    Coefficients are evaluated from the polynomial directly (no 3j symbols),
    giving sqrt((J+1)(2J+1)), sqrt(J(2J+1)), ..., sqrt(3), 1 from the top of
    the ladder down.
    """
    sub = Subsystem(J)
    terms = {}
    for M in range(-J, J + 1):
        a = J + direction * M
        e, o = sub.element("G", ("tau", M), (upper, M + direction))
        terms[e] = RadicalNumber.sqrt(Fraction((a + 2) * (a + 1), 2)) * o
    return ExactOperator(sub.n, terms)


def sigma_pm(J: int, drift: DriftSpec, sign: int) -> StructuralDrive:
    """Circular drive (i H_x +- [i H0, i H_y] / omega1) / 2 at omega1.

    Built with the exact drift commutator. With E_tau' > E_tau the ``+`` sign
    keeps only the M-ascending ladder; if E_tau' < E_tau the two ladders
    trade places. Raises :class:`ConventionError` unless the result collapses
    onto a single printed ladder.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    sub = Subsystem(J)
    wx = drive_w1x(J).op
    wy = drive_w1y(J).op
    rot = commute_drift(drift, wy, sub) / drift.omega1
    op = (wx + rot * sign) * Fraction(1, 2)
    up = 1 if drift.E_tauP > drift.E_tau else -1
    direction = sign * up
    expected = printed_ladder(J, direction, "tauP")
    if op != expected:
        raise ConventionError(
            f"sigma{'+' if sign > 0 else '-'} at J={J} does not collapse to the "
            f"{'ascending' if direction > 0 else 'descending'} ladder: {op}"
        )
    return StructuralDrive("sigmaPlus" if sign > 0 else "sigmaMinus", op, J)


_PHYSICAL_SOURCE = {"w1x": ("w1", "x"), "w1y": ("w1", "y"), "w2y": ("w2", "y"), "w2z": ("w2", "z")}


def physical_consistency(label: str, J: int, constants=None, spec=None) -> dict:
    """Compare i*(physical dipole drive) with the structural drive.

    The physical matrix is taken in the rephased basis of
    :func:`rotor.structural_phases`. Returns the best single complex factor
    ``k`` (structural ~ k * physical) and the largest entrywise deviation
    relative to the largest structural entry.
    """
    import numpy as np

    from .oplib import to_dense
    from .rotor import RotationalConstants, build_physical_drive, decompositions_for, find_subsystem

    if label not in _PHYSICAL_SOURCE:
        raise ValueError(f"no physical counterpart for {label!r}")
    constants = constants or RotationalConstants(1.0, 0.6, 0.2)
    spec = spec or find_subsystem(J, constants)
    decs = decompositions_for((J, J + 1), constants)
    resonance, pol = _PHYSICAL_SOURCE[label]
    phys = 1j * build_physical_drive(spec, resonance, pol, decs, phase_convention="structural")
    struct = to_dense(structural_drive(label, J).op)
    mask = np.abs(struct) > 0
    if not np.any(np.abs(phys) > 0):
        return {"label": label, "J": J, "factor": None, "max_relative_deviation": float("inf")}
    k = np.vdot(phys[mask], struct[mask]) / np.vdot(phys[mask], phys[mask])
    dev = np.abs(struct - k * phys).max() / np.abs(struct).max()
    return {"label": label, "J": J, "factor": complex(k), "max_relative_deviation": float(dev)}
