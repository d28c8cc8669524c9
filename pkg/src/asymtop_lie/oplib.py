"""Exact su(n) operator algebra in the generalized Pauli basis.

Basis elements (``e_jk`` is the matrix unit)::

    G_jk = e_jk - e_kj,   F_jk = i e_jk + i e_kj,   D_jk = i e_jj - i e_kk

Off-diagonal elements are keyed with ``j < k``. The ``D_jk`` are linearly
dependent, so an :class:`ExactOperator` stores its diagonal part in the star
basis ``D_{0,k}`` (``D_jk = D_0k - D_0j``); with that choice every operator has
a unique term map and equality is decidable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np
from scipy import sparse

from .exact import RadicalNumber, as_rational

__all__ = [
    "LEVELS",
    "StateIndex",
    "Subsystem",
    "PauliElement",
    "ExactOperator",
    "DriftSpec",
    "STRUCTURE_TABLE",
    "pauli",
    "element_matrix",
    "commutator",
    "commute_drift",
    "ad_power",
    "to_dense",
]

LEVELS = ("tau", "tauP", "tauPP")
KINDS = ("G", "F", "D")


class StateIndex(NamedTuple):
    level: str
    M: int


class Subsystem:
    """Flat indexing of the 6J+7 states: tau block, then tau', then tau''."""

    __slots__ = ("J", "n", "_offsets")

    def __init__(self, J: int):
        if not isinstance(J, int) or J < 0:
            raise ValueError("J must be a non-negative integer")
        self.J = J
        self.n = 6 * J + 7
        self._offsets = {"tau": 0, "tauP": 2 * J + 1, "tauPP": 4 * J + 4}

    def __eq__(self, other):
        return isinstance(other, Subsystem) and other.J == self.J

    def __hash__(self):
        return hash(("Subsystem", self.J))

    def __repr__(self):
        return f"Subsystem(J={self.J})"

    def mmax(self, level: str) -> int:
        return self.J if level == "tau" else self.J + 1

    def has(self, level: str, M: int) -> bool:
        return level in self._offsets and abs(M) <= self.mmax(level)

    def flat(self, level: str, M: int) -> int:
        if level not in self._offsets:
            raise ValueError(f"unknown level {level!r}")
        m = self.mmax(level)
        if abs(M) > m:
            raise IndexError(f"M={M} out of range for level {level} at J={self.J}")
        return self._offsets[level] + M + m

    def state(self, i: int) -> StateIndex:
        if not 0 <= i < self.n:
            raise IndexError(f"flat index {i} out of range 0..{self.n - 1}")
        J = self.J
        if i < 2 * J + 1:
            return StateIndex("tau", i - J)
        if i < 4 * J + 4:
            return StateIndex("tauP", i - (2 * J + 1) - (J + 1))
        return StateIndex("tauPP", i - (4 * J + 4) - (J + 1))

    def level_of(self, i: int) -> str:
        return self.state(i).level

    def states(self) -> list[StateIndex]:
        return [self.state(i) for i in range(self.n)]

    def element(self, kind: str, a: tuple[str, int], b: tuple[str, int]) -> tuple["PauliElement", int]:
        """Element ``kind^{a.level, b.level}_{a.M, b.M}`` as (canonical element, sign)."""
        return pauli(kind, self.flat(*a), self.flat(*b))

    def label(self, e: "PauliElement") -> str:
        sj, sk = self.state(e.j), self.state(e.k)
        return f"{e.kind}[{sj.level}:{sj.M},{sk.level}:{sk.M}]"


class PauliElement(NamedTuple):
    kind: str
    j: int
    k: int

    def vertices(self) -> tuple[int, int]:
        return (self.j, self.k)


def pauli(kind: str, j: int, k: int) -> tuple[PauliElement, int]:
    """Canonical element for ``kind_{j,k}`` and the sign relating them.

    G_kj = -G_jk, F_kj = F_jk, D_kj = -D_jk.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if j == k:
        raise ValueError("generalized Pauli elements need two distinct indices")
    if j < 0 or k < 0:
        raise IndexError("negative index")
    if j < k:
        return PauliElement(kind, j, k), 1
    return PauliElement(kind, k, j), (1 if kind == "F" else -1)


def element_matrix(e: PauliElement, n: int) -> sparse.csr_matrix:
    if not (0 <= e.j < n and 0 <= e.k < n):
        raise IndexError(f"{e} does not fit dimension {n}")
    j, k = e.j, e.k
    if e.kind == "G":
        data, rows, cols = [1, -1], [j, k], [k, j]
    elif e.kind == "F":
        data, rows, cols = [1j, 1j], [j, k], [k, j]
    else:
        data, rows, cols = [1j, -1j], [j, k], [j, k]
    return sparse.csr_matrix((np.array(data, dtype=complex), (rows, cols)), shape=(n, n))


# ---------------------------------------------------------------------------
# Structure constants, generated once from small dense matrices


def _local_dense(kind: str, p: int, q: int, m: int) -> np.ndarray:
    return element_matrix(PauliElement(kind, p, q), m).toarray()


def _decompose_local(X: np.ndarray) -> tuple[tuple, tuple]:
    """Off-diagonal (kind, p, q, int) terms and the diagonal vector d, X_pp = i d_p."""
    m = X.shape[0]
    off = []
    for p in range(m):
        for q in range(p + 1, m):
            g, f = X[p, q].real, X[p, q].imag
            if round(g):
                off.append(("G", p, q, int(round(g))))
            if round(f):
                off.append(("F", p, q, int(round(f))))
    diag = tuple(int(round(X[p, p].imag)) for p in range(m))
    rebuilt = np.zeros_like(X)
    for kind, p, q, c in off:
        rebuilt += c * _local_dense(kind, p, q, m)
    rebuilt += np.diag(1j * np.array(diag, dtype=float))
    if not np.allclose(rebuilt, X, atol=0) or sum(diag) != 0:
        raise AssertionError("structure constant is not an integer G/F/D combination")
    return tuple(off), diag


def _build_structure_table() -> dict:
    table = {}
    for m in (2, 3, 4):
        pairs = [(p, q) for p in range(m) for q in range(p + 1, m)]
        for (a, b), (c, d) in itertools.product(pairs, pairs):
            if len({a, b, c, d}) != m:
                continue
            for k1, k2 in itertools.product(KINDS, KINDS):
                X1 = _local_dense(k1, a, b, m)
                X2 = _local_dense(k2, c, d, m)
                C = X1 @ X2 - X2 @ X1
                table[(k1, a, b, k2, c, d)] = _decompose_local(C)
    return table


STRUCTURE_TABLE: dict = _build_structure_table()


def _bracket(e1: PauliElement, e2: PauliElement) -> list[tuple[PauliElement, int]]:
    """[e1, e2] as canonical (element, integer coefficient) pairs."""
    idx = sorted({e1.j, e1.k, e2.j, e2.k})
    if len(idx) == 4:
        return []
    pos = {v: i for i, v in enumerate(idx)}
    off, diag = STRUCTURE_TABLE[(e1.kind, pos[e1.j], pos[e1.k], e2.kind, pos[e2.j], pos[e2.k])]
    out: dict[PauliElement, int] = {}
    for kind, p, q, c in off:
        e = PauliElement(kind, idx[p], idx[q])
        out[e] = out.get(e, 0) + c
    # sum_p d_p i e_pp with sum d_p = 0 equals -sum_p d_p D_{0,p}
    for p, dp in enumerate(diag):
        if dp and idx[p] != 0:
            e = PauliElement("D", 0, idx[p])
            out[e] = out.get(e, 0) - dp
    return [(e, c) for e, c in out.items() if c]


# ---------------------------------------------------------------------------
# Exact operators


def _as_radical(x) -> RadicalNumber:
    return x if isinstance(x, RadicalNumber) else RadicalNumber(x)


class ExactOperator:
    """Immutable sparse combination of generalized Pauli elements.

    Coefficients are :class:`RadicalNumber`; the represented matrix is
    anti-Hermitian and traceless.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[PauliElement, object] | None = None):
        self.n = n
        out: dict[PauliElement, RadicalNumber] = {}
        for e, c in (terms or {}).items():
            c = _as_radical(c)
            if c.is_zero():
                continue
            if not (0 <= e.j < e.k < n):
                raise IndexError(f"{e} is not canonical for dimension {n}")
            if e.kind == "D" and e.j != 0:
                for ee, s in ((PauliElement("D", 0, e.k), 1), (PauliElement("D", 0, e.j), -1)):
                    v = out.get(ee, RadicalNumber()) + c * s
                    if v.is_zero():
                        out.pop(ee, None)
                    else:
                        out[ee] = v
                continue
            v = out.get(e)
            v = c if v is None else v + c
            if v.is_zero():
                out.pop(e, None)
            else:
                out[e] = v
        self._terms = out

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "ExactOperator":
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = terms
        return obj

    @classmethod
    def zero(cls, n: int) -> "ExactOperator":
        return cls._raw(n, {})

    @classmethod
    def element(cls, kind: str, j: int, k: int, n: int, coeff=1) -> "ExactOperator":
        """``coeff * kind_{j,k}`` for any index order."""
        e, s = pauli(kind, j, k)
        return cls(n, {e: _as_radical(coeff) * s})

    @property
    def terms(self) -> dict[PauliElement, RadicalNumber]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliElement]:
        return iter(self._terms)

    def __contains__(self, e) -> bool:
        return e in self._terms

    def coefficient(self, e: PauliElement) -> RadicalNumber:
        return self._terms.get(e, RadicalNumber())

    def is_zero(self) -> bool:
        return not self._terms

    def single(self) -> tuple[PauliElement, RadicalNumber] | None:
        """The (element, coefficient) pair if exactly one term is present."""
        if len(self._terms) != 1:
            return None
        return next(iter(self._terms.items()))

    def support(self) -> set[int]:
        out = set()
        for e in self._terms:
            out.update((e.j, e.k))
        return out

    def _check(self, other: "ExactOperator"):
        if not isinstance(other, ExactOperator):
            raise TypeError("expected an ExactOperator")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, ExactOperator):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v.is_zero():
                    del out[e]
                else:
                    out[e] = v
        return ExactOperator._raw(self.n, out)

    def __neg__(self):
        return ExactOperator._raw(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ExactOperator):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, ExactOperator):
            return NotImplemented
        s = _as_radical(scalar)
        if s.is_zero():
            return ExactOperator.zero(self.n)
        return ExactOperator._raw(self.n, {e: c * s for e, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = _as_radical(scalar)
        if s.is_zero():
            raise ZeroDivisionError("division of an operator by zero")
        inv = s.inverse()
        return ExactOperator._raw(self.n, {e: c * inv for e, c in self._terms.items()})

    def __eq__(self, other):
        if not isinstance(other, ExactOperator):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"{e.kind}{e.j},{e.k}: {c}" for e, c in self.sorted_items())
        return f"ExactOperator(n={self.n}, {{{body}}})"

    def sorted_items(self):
        order = {"G": 0, "F": 1, "D": 2}
        return sorted(self._terms.items(), key=lambda t: (order[t[0].kind], t[0].j, t[0].k))

    def restrict(self, keep) -> "ExactOperator":
        """Terms whose element satisfies ``keep(element)``."""
        return ExactOperator._raw(self.n, {e: c for e, c in self._terms.items() if keep(e)})


def linear_combination(coeffs: Iterable, ops: Iterable[ExactOperator], n: int) -> ExactOperator:
    acc: dict[PauliElement, RadicalNumber] = {}
    for a, op in zip(coeffs, ops):
        a = _as_radical(a)
        if a.is_zero():
            continue
        if op.n != n:
            raise ValueError("dimension mismatch")
        for e, c in op.items():
            v = acc.get(e)
            acc[e] = c * a if v is None else v + c * a
    return ExactOperator._raw(n, {e: c for e, c in acc.items() if not c.is_zero()})


def commutator(a: ExactOperator, b: ExactOperator) -> ExactOperator:
    """Exact [a, b] via the structure-constant table."""
    a._check(b)
    by_vertex: dict[int, list] = {}
    for e, c in b.items():
        by_vertex.setdefault(e.j, []).append((e, c))
        by_vertex.setdefault(e.k, []).append((e, c))
    acc: dict[PauliElement, RadicalNumber] = {}
    for e1, c1 in a.items():
        seen = set()
        for v in (e1.j, e1.k):
            for e2, c2 in by_vertex.get(v, ()):
                if e2 in seen:
                    continue
                seen.add(e2)
                terms = _bracket(e1, e2)
                if not terms:
                    continue
                prod = c1 * c2
                for e, s in terms:
                    x = prod * s
                    old = acc.get(e)
                    acc[e] = x if old is None else old + x
    return ExactOperator._raw(a.n, {e: c for e, c in acc.items() if not c.is_zero()})


@dataclass(frozen=True)
class DriftSpec:
    """Exact level energies of the subsystem (diagonal drift H0)."""

    E_tau: Fraction
    E_tauP: Fraction
    E_tauPP: Fraction

    def __post_init__(self):
        for name in ("E_tau", "E_tauP", "E_tauPP"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        es = (self.E_tau, self.E_tauP, self.E_tauPP)
        if len(set(es)) != 3:
            raise ValueError("drift energies must be pairwise distinct")
        if self.omega1 == self.omega2:
            raise ValueError("resonances omega1 and omega2 coincide")

    @classmethod
    def from_floats(cls, e_tau: float, e_taup: float, e_taupp: float, tol: float = 1e-9) -> "DriftSpec":
        from .exact import rationalize

        return cls(rationalize(e_tau, tol), rationalize(e_taup, tol), rationalize(e_taupp, tol))

    @classmethod
    def default(cls) -> "DriftSpec":
        """E = (0, 1, sqrt 2) rationalized to 1e-9."""
        return cls.from_floats(0.0, 1.0, 2.0**0.5)

    def energy(self, level: str) -> Fraction:
        return {"tau": self.E_tau, "tauP": self.E_tauP, "tauPP": self.E_tauPP}[level]

    @property
    def omega1(self) -> Fraction:
        return abs(self.E_tauP - self.E_tau)

    @property
    def omega2(self) -> Fraction:
        return abs(self.E_tauPP - self.E_tau)

    def diagonal(self, sub: Subsystem) -> list[Fraction]:
        return [self.energy(sub.level_of(i)) for i in range(sub.n)]

    def dense(self, sub: Subsystem, traceless: bool = False) -> np.ndarray:
        """The matrix i*H0 (optionally with its trace part removed)."""
        d = np.array([float(x) for x in self.diagonal(sub)])
        if traceless:
            d = d - d.mean()
        return np.diag(1j * d)


def commute_drift(drift: DriftSpec, a: ExactOperator, sub: Subsystem | None = None) -> ExactOperator:
    """Exact [i H0, a]: G_jk -> -(E_k - E_j) F_jk, F_jk -> (E_k - E_j) G_jk, D -> 0."""
    if sub is None:
        sub = _subsystem_for(a.n)
    energies = drift.diagonal(sub)
    out: dict[PauliElement, RadicalNumber] = {}
    for e, c in a.items():
        if e.kind == "D":
            continue
        dE = energies[e.k] - energies[e.j]
        if not dE:
            continue
        if e.kind == "G":
            out[PauliElement("F", e.j, e.k)] = c * (-dE)
        else:
            out[PauliElement("G", e.j, e.k)] = c * dE
    return ExactOperator._raw(a.n, out)


def _subsystem_for(n: int) -> Subsystem:
    if (n - 7) % 6 or n < 7:
        raise ValueError(f"dimension {n} is not of the form 6J+7")
    return Subsystem((n - 7) // 6)


def ad_power(base: ExactOperator, target: ExactOperator, p: int) -> ExactOperator:
    """``ad_base^p target``; ``p = 0`` returns ``target``."""
    if p < 0:
        raise ValueError("p must be non-negative")
    base._check(target)
    out = target
    for _ in range(p):
        out = commutator(base, out)
    return out


def to_dense(a: ExactOperator) -> np.ndarray:
    X = np.zeros((a.n, a.n), dtype=complex)
    for e, c in a.items():
        v = float(c)
        j, k = e.j, e.k
        if e.kind == "G":
            X[j, k] += v
            X[k, j] -= v
        elif e.kind == "F":
            X[j, k] += 1j * v
            X[k, j] += 1j * v
        else:
            X[j, j] += 1j * v
            X[k, k] -= 1j * v
    return X
