"""Separating a ladder sum into its basis elements by a Vandermonde solve.

For ``X = sum_k c_k E_k`` over pairwise disjoint transitions and
``Y = [iH0, X] / omega``, every pair (E_k, its drift partner) spans a local
su(2) and ``ad_Y^2 (c_k E_k) = -4 c_k^2 (c_k E_k)``. Hence

    ad_Y^{2s} X = (-4)^s sum_q q^s P_q,     P_q = sum_{c_k^2 = q} c_k E_k,

a Vandermonde system in the rational nodes ``q``; inverting it expresses each
``P_q`` as a rational combination of operators in L.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..drives import StructuralDrive, ladder_coefficient, z_coefficient
from ..exact import RadicalNumber
from ..oplib import (
    DriftSpec,
    ExactOperator,
    PauliElement,
    _subsystem_for,
    commutator,
    commute_drift,
    linear_combination,
)

KAPPA = -4
MODULUS = 2147483647  # 2**31 - 1


class StructuralFailure(AssertionError):
    """The ladder cannot be separated (coinciding nodes or unexpected rows)."""


@dataclass
class VandermondeResult:
    nodes: list[Fraction]
    groups: list[ExactOperator]  # P_q divided by sqrt(q)
    elements: list[PauliElement]  # members of singleton groups

    @property
    def paired(self) -> list[ExactOperator]:
        return [g for g in self.groups if len(g) > 1]


def _square(c: RadicalNumber) -> Fraction:
    sq = c * c
    if not sq.is_rational():
        raise StructuralFailure(f"coefficient {c} is not a single square root")
    return sq.rational_part()


def _resonance(drift: DriftSpec, op: ExactOperator, sub_energies) -> Fraction:
    gaps = {abs(sub_energies[e.k] - sub_energies[e.j]) for e in op}
    if len(gaps) != 1:
        raise StructuralFailure(f"ladder terms span several transition frequencies: {sorted(gaps)}")
    (w,) = gaps
    if not w:
        raise StructuralFailure("ladder couples degenerate states")
    return w


def lagrange_inverse(nodes: list[Fraction]) -> list[list[Fraction]]:
    """W with sum_s W[i][s] * nodes[j]**s = delta_ij (exact)."""
    m = len(nodes)
    W = []
    for i, qi in enumerate(nodes):
        poly = [Fraction(1)]
        denom = Fraction(1)
        for j, qj in enumerate(nodes):
            if j == i:
                continue
            d = qi - qj
            if d == 0:
                raise StructuralFailure(f"coinciding nodes at positions {i}, {j}: {qi}")
            denom *= d
            nxt = [Fraction(0)] * (len(poly) + 1)
            for p, a in enumerate(poly):
                nxt[p + 1] += a
                nxt[p] -= a * qj
            poly = nxt
        W.append([a / denom for a in poly] + [Fraction(0)] * (m - len(poly)))
    return W


def vandermonde_isolate(ladder: StructuralDrive | ExactOperator, drift: DriftSpec) -> VandermondeResult:
    """Isolate the node groups of a ladder operator, exactly.

    Rows ``ad_Y^{2s} X`` are produced by the generic commutator engine and
    checked against ``(-4)^s sum_q q^s P_q`` before the system is solved.
    """
    X = ladder.op if isinstance(ladder, StructuralDrive) else ladder
    sub = _subsystem_for(X.n)
    energies = drift.diagonal(sub)
    omega = _resonance(drift, X, energies)
    vertices = [v for e in X for v in (e.j, e.k)]
    if len(vertices) != len(set(vertices)):
        raise StructuralFailure("ladder terms share a state; local su(2) blocks are not disjoint")

    nodes: list[Fraction] = []
    members: dict[Fraction, dict[PauliElement, RadicalNumber]] = {}
    for e, c in X.sorted_items():
        q = _square(c)
        if q not in members:
            nodes.append(q)
            members[q] = {}
        members[q][e] = c
    P = [ExactOperator(X.n, members[q]) for q in nodes]
    m = len(nodes)

    Y = commute_drift(drift, X, sub) / omega
    rows = [X]
    for s in range(1, m):
        rows.append(commutator(Y, commutator(Y, rows[-1])))
    for s, R in enumerate(rows):
        expected = linear_combination([Fraction(KAPPA) ** s * q**s for q in nodes], P, X.n)
        if R != expected:
            raise StructuralFailure(f"row s={s} is not (-4)^s sum q^s P_q")

    W = lagrange_inverse(nodes)
    scaled = [R / (Fraction(KAPPA) ** s) for s, R in enumerate(rows)]
    groups, elements = [], []
    for i, q in enumerate(nodes):
        Pq = linear_combination(W[i], scaled, X.n)
        if Pq != P[i] or Pq.is_zero():
            raise StructuralFailure(f"solve did not recover the node group q={q}")
        unit = Pq / RadicalNumber.sqrt(q)
        groups.append(unit)
        if len(unit) == 1:
            elements.append(unit.single()[0])
    return VandermondeResult(nodes, groups, elements)


def vandermonde_determinant(nodes) -> int | Fraction:
    """det V, V[s][k] = nodes[k]**s, from the product formula."""
    det = 1
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            det *= nodes[j] - nodes[i]
    return det


def modular_determinant(nodes, p: int = MODULUS) -> int:
    """det V mod p by Gaussian elimination in int64 (integer nodes only)."""
    xs = np.array([int(x) % p for x in nodes], dtype=np.int64)
    m = len(xs)
    V = np.ones((m, m), dtype=np.int64)
    for s in range(1, m):
        V[s] = (V[s - 1] * xs) % p
    det = 1
    for col in range(m):
        piv = next((r for r in range(col, m) if V[r, col]), None)
        if piv is None:
            return 0
        if piv != col:
            V[[col, piv]] = V[[piv, col]]
            det = -det
        det = det * int(V[col, col]) % p
        inv = pow(int(V[col, col]), p - 2, p)
        f = (V[col + 1 :, col] * inv) % p
        V[col + 1 :] = (V[col + 1 :] - (f[:, None] * V[col]) % p) % p
    return det % p


def ladder_nodes(J: int, which: str) -> list[Fraction]:
    """Squared structural coefficients of a ladder, from the 3j route.

    ``which`` is ``"sigmaPlus"``, ``"sigmaMinus"`` (one per M) or ``"w2z"``
    (one per |M|, the symmetric pairs sharing a node).
    """
    if which in ("sigmaPlus", "sigmaMinus"):
        s = 1 if which == "sigmaPlus" else -1
        return [_square(ladder_coefficient(J, M, s)) for M in range(-J, J + 1)]
    if which == "w2z":
        return [_square(z_coefficient(J, M)) for M in range(0, J + 1)]
    raise ValueError(f"unknown ladder {which!r}")


def vandermonde_soundness(J_max: int = 50, p: int = MODULUS) -> list[dict]:
    """Exact determinant checks for every ladder and J <= J_max."""
    out = []
    for J in range(J_max + 1):
        for which in ("sigmaPlus", "sigmaMinus", "w2z"):
            nodes = ladder_nodes(J, which)
            det = vandermonde_determinant(nodes)
            mod = modular_determinant(nodes, p)
            out.append(
                {
                    "J": J,
                    "ladder": which,
                    "size": len(nodes),
                    "nonzero": det != 0,
                    "modular_agrees": int(det) % p == mod,
                }
            )
    return out
