"""Numerical Lie closure of anti-Hermitian generators.

The generated algebra is built as an orthonormal basis under the real inner
product <A, B> = Re tr(A^H B). Pairs (i, j), i < j, of basis elements are
commuted in insertion order; each commutator is projected off the current
span (two Gram-Schmidt sweeps) and kept when the residual norm exceeds the
tolerance.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_generators, check_j, check_polarizations
from .drives import structural_drive
from .oplib import DriftSpec, Subsystem, to_dense
from .rotor import (
    RotationalConstants,
    SubsystemSpec,
    build_physical_drive,
    decompositions_for,
    find_subsystem,
)

__all__ = [
    "ClosureReport",
    "LieBasis",
    "LieClosure",
    "lie_closure",
    "full_rank_check",
    "assemble_generators",
    "PROVEN_POLARIZATIONS",
    "DEFAULT_CONSTANTS",
]

PROVEN_POLARIZATIONS = ("x", "y", "y", "z")
# rejected norms below this are round-off; their exact values depend on BLAS
# threading, so reports only count them
NOISE_FLOOR = 1e-12
DEFAULT_CONSTANTS = RotationalConstants(1.0, 0.6, 0.2)


@dataclass
class ClosureReport:
    generated_dimension: int
    target_dimension: int
    iterations: int
    residual_spectrum: list[float] = field(default_factory=list)
    budget_exhausted: bool = False
    trace_parts: list[float] = field(default_factory=list)
    elapsed: float | None = None
    n_rejected: int = 0

    @property
    def full_rank(self) -> bool:
        return self.generated_dimension == self.target_dimension

    def to_dict(self) -> dict:
        return {
            "dimension": self.generated_dimension,
            "target": self.target_dimension,
            "iterations": self.iterations,
            "residual_spectrum": [float(f"{r:.3e}") for r in self.residual_spectrum if r > NOISE_FLOOR],
            "rejected": self.n_rejected,
            "budget_exhausted": self.budget_exhausted,
            "elapsed": self.elapsed,
        }


@dataclass
class LieBasis:
    elements: np.ndarray  # (m, n, n), orthonormal under Re tr(A^H B)
    n: int
    tolerance: float

    def __len__(self):
        return self.elements.shape[0]

    def vectors(self) -> np.ndarray:
        m = self.elements.shape[0]
        flat = self.elements.reshape(m, -1)
        return np.concatenate([flat.real, flat.imag], axis=1)


def _realify(X: np.ndarray) -> np.ndarray:
    flat = X.reshape(X.shape[0], -1)
    return np.concatenate([flat.real, flat.imag], axis=1)


def _complexify(V: np.ndarray, n: int) -> np.ndarray:
    half = V.shape[-1] // 2
    return (V[..., :half] + 1j * V[..., half:]).reshape(V.shape[:-1] + (n, n))


class LieClosure(BaseEstimator):
    """Estimator computing a basis of the Lie algebra generated by ``X``.

    ``fit(X)`` takes a (k, n, n) stack of anti-Hermitian matrices;
    ``transform(Y)`` returns coordinates of matrices in the fitted basis and
    ``residual(Y)`` the norm of their component outside the algebra.

    Parameters
    ----------
    tol : float
        Acceptance threshold on the residual norm of a projected commutator
        (basis elements have unit norm, so this is relative to unit scale).
    max_pairs : int or None
        Budget on commutator evaluations; exceeding it stops early and flags
        the report.
    remove_trace : bool
        Project generators onto su(n) before closing.
    n_residuals : int
        How many of the largest rejected residual norms to keep.
    """

    def __init__(self, tol=1e-9, max_pairs=None, remove_trace=True, n_residuals=16):
        self.tol = tol
        self.max_pairs = max_pairs
        self.remove_trace = remove_trace
        self.n_residuals = n_residuals

    def fit(self, X, y=None):
        start = time.perf_counter()
        gens = check_generators(X)
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        k, n, _ = gens.shape
        traces = np.trace(gens, axis1=1, axis2=2) / n
        if self.remove_trace:
            gens = gens - traces[:, None, None] * np.eye(n)
        target = n * n - 1 if self.remove_trace else n * n

        Q = np.zeros((0, 2 * n * n))
        rejected: list[float] = []

        def absorb(V: np.ndarray, scales: np.ndarray) -> int:
            # V rows already projected once off Q; second sweep plus in-batch GS
            nonlocal Q
            V = V - (V @ Q.T) @ Q
            added = []
            for row, scale in zip(V, scales):
                if Q.shape[0] + len(added) >= target:
                    break
                r = row
                for _ in range(2):
                    for a in added:
                        r = r - (a @ r) * a
                nr = np.linalg.norm(r)
                if nr > self.tol * scale:
                    added.append(r / nr)
                else:
                    rejected.append(nr / scale)
            if added:
                Q = np.vstack([Q, np.array(added)])
            return len(added)

        G = _realify(gens)
        gnorm = np.linalg.norm(G, axis=1)
        nz = gnorm > 0
        if np.any(nz):
            Gn = G[nz]
            absorb(Gn - (Gn @ Q.T) @ Q if Q.size else Gn, gnorm[nz])

        pairs = 0
        exhausted = False
        j = 1
        while j < Q.shape[0] and Q.shape[0] < target:
            if self.max_pairs is not None and pairs + j > self.max_pairs:
                exhausted = True
                break
            mats = _complexify(Q[: j + 1], n)
            Bj = mats[j]
            C = mats[:j] @ Bj - Bj @ mats[:j]
            pairs += j
            V = _realify(C)
            V = V - (V @ Q.T) @ Q
            absorb(V, np.ones(V.shape[0]))
            j += 1

        self.basis_ = LieBasis(_complexify(Q, n) if Q.size else np.zeros((0, n, n), complex), n, self.tol)
        self.dimension_ = int(Q.shape[0])
        self.target_dimension_ = target
        self.n_pairs_ = pairs
        self.trace_parts_ = [float(t.imag) for t in traces]
        top = sorted(rejected)[-self.n_residuals:] if self.n_residuals else []
        self.report_ = ClosureReport(
            generated_dimension=self.dimension_,
            target_dimension=target,
            iterations=pairs,
            residual_spectrum=sorted(top),
            budget_exhausted=exhausted,
            trace_parts=self.trace_parts_,
            elapsed=time.perf_counter() - start,
            n_rejected=len(rejected),
        )
        self._Q = Q
        return self

    def _check_fitted(self):
        if not hasattr(self, "_Q"):
            raise NotFittedError("LieClosure is not fitted yet; call fit first")

    def transform(self, X):
        """Coordinates of each matrix in the fitted orthonormal basis."""
        self._check_fitted()
        Y = np.asarray(X, dtype=complex)
        if Y.ndim == 2:
            Y = Y[None]
        if Y.shape[1:] != (self.basis_.n, self.basis_.n):
            raise ValueError(f"expected matrices of size {self.basis_.n}, got {Y.shape[1:]}")
        return _realify(Y) @ self._Q.T

    def residual(self, X) -> np.ndarray:
        """Frobenius norm of the part of each matrix outside the algebra."""
        self._check_fitted()
        Y = np.asarray(X, dtype=complex)
        if Y.ndim == 2:
            Y = Y[None]
        V = _realify(Y)
        R = V - (V @ self._Q.T) @ self._Q
        return np.linalg.norm(R, axis=1)


def lie_closure(generators, tolerance: float = 1e-9, max_pairs=None) -> tuple[ClosureReport, LieBasis]:
    est = LieClosure(tol=tolerance, max_pairs=max_pairs).fit(generators)
    return est.report_, est.basis_


_PHYSICAL_LABELS = {0: "w1", 1: "w1", 2: "w2", 3: "w2"}


def assemble_generators(
    J: int,
    drift: DriftSpec | None = None,
    polarizations=PROVEN_POLARIZATIONS,
    spec: SubsystemSpec | None = None,
    constants: RotationalConstants | None = None,
    source: str = "auto",
) -> tuple[list[np.ndarray], list[str]]:
    """Traceless drift plus the four drives, as dense anti-Hermitian matrices.

    ``source="structural"`` uses the exact structural drives (only for the
    proven polarization choice x, y, y, z); ``"physical"`` computes dipole
    couplings of a molecule; ``"auto"`` picks structural when possible.
    Returns the matrices and the labels of any identically zero drives.
    """
    J = check_j(J)
    pols = check_polarizations(polarizations)
    drift = drift or DriftSpec.default()
    sub = Subsystem(J)
    gens = [drift.dense(sub, traceless=True)]
    zero: list[str] = []
    if source == "auto":
        source = "structural" if pols == PROVEN_POLARIZATIONS else "physical"
    if source == "structural":
        if pols != PROVEN_POLARIZATIONS:
            raise ValueError("structural drives exist only for polarizations x, y, y, z")
        for label in ("w1x", "w1y", "w2y", "w2z"):
            gens.append(to_dense(structural_drive(label, J).op))
    elif source == "physical":
        constants = constants or DEFAULT_CONSTANTS
        spec = spec or find_subsystem(J, constants)
        if spec.J != J:
            raise ValueError("subsystem spec and J disagree")
        decs = decompositions_for((J, J + 1), constants)
        for i, p in enumerate(pols):
            h = build_physical_drive(spec, _PHYSICAL_LABELS[i], p, decs)
            if not np.any(h):
                zero.append(f"{_PHYSICAL_LABELS[i]},{p}")
            gens.append(1j * h)
    else:
        raise ValueError("source must be 'auto', 'structural' or 'physical'")
    return gens, zero


def full_rank_check(
    J: int,
    drift: DriftSpec | None = None,
    polarizations=PROVEN_POLARIZATIONS,
    tolerance: float = 1e-9,
    spec: SubsystemSpec | None = None,
    constants: RotationalConstants | None = None,
    source: str = "auto",
    max_pairs=None,
) -> tuple[bool, ClosureReport]:
    """True iff the closure reaches dim su(6J+7) = (6J+7)**2 - 1."""
    gens, zero = assemble_generators(J, drift, polarizations, spec, constants, source)
    report, _ = lie_closure(gens, tolerance, max_pairs=max_pairs)
    report.zero_drives = zero  # type: ignore[attr-defined]
    return report.full_rank and not report.budget_exhausted, report
