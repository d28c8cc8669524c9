"""Input checks shared by the estimator and the CLI."""
from __future__ import annotations

import numpy as np

from .rotor import POLARIZATIONS


def check_generators(generators, atol: float = 1e-10) -> np.ndarray:
    """Return generators as a complex (k, n, n) array of anti-Hermitian matrices.

    Accepts a single matrix or any sequence of equally sized square matrices.
    """
    if isinstance(generators, np.ndarray) and generators.ndim == 2:
        generators = [generators]
    try:
        mats = [np.asarray(g, dtype=complex) for g in generators]
    except TypeError as exc:
        raise TypeError("generators must be a sequence of square matrices") from exc
    if not mats:
        raise ValueError("at least one generator is required")
    n = mats[0].shape[0] if mats[0].ndim == 2 else -1
    for i, g in enumerate(mats):
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"generator {i} is not a square matrix: shape {g.shape}")
        if g.shape[0] != n:
            raise ValueError(f"dimension mismatch: generator {i} is {g.shape[0]}x{g.shape[0]}, expected {n}x{n}")
        if not np.all(np.isfinite(g)):
            raise ValueError(f"generator {i} has non-finite entries")
        dev = np.abs(g + g.conj().T).max()
        if dev > atol * max(1.0, np.abs(g).max()):
            raise ValueError(f"generator {i} is not anti-Hermitian (max |X + X^H| = {dev:.3g})")
    return np.stack(mats)


def check_polarizations(pols) -> tuple[str, str, str, str]:
    if isinstance(pols, str):
        pols = [p.strip() for p in pols.split(",") if p.strip()]
    pols = tuple(pols)
    if len(pols) != 4:
        raise ValueError(f"need four polarizations (p1, p2, p3, p4), got {len(pols)}")
    for p in pols:
        if p not in POLARIZATIONS:
            raise ValueError(f"polarization {p!r} not in {POLARIZATIONS}")
    return pols  # type: ignore[return-value]


def polarization_condition(pols) -> bool:
    """Pairs (p1, p2) and (p3, p4) differ internally and x, y, z all appear."""
    p1, p2, p3, p4 = pols
    return p1 != p2 and p3 != p4 and set(pols) == set(POLARIZATIONS)


def check_j(J) -> int:
    if isinstance(J, bool) or not isinstance(J, (int, np.integer)) or J < 0:
        raise ValueError(f"J must be a non-negative integer, got {J!r}")
    return int(J)
