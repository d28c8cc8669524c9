"""Acceptance suite: one PASS/FAIL line per criterion.

Runs under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py`` (exit status 1 if any criterion fails).
Artifacts are produced through the command line exactly as a user would,
once per run; the determinism criterion repeats the run and compares bytes.
"""
import contextlib
import io
import json
import sys
import tempfile
import time
from itertools import permutations
from pathlib import Path

import pytest

from asymtop_lie.cli import main
from asymtop_lie.drives import ConventionError, drive_w2z, physical_consistency, printed_ladder, sigma_pm
from asymtop_lie.exact import RadicalNumber, wigner3j, wigner3j_x, wigner3j_z
from asymtop_lie.oplib import DriftSpec, ExactOperator, PauliElement, Subsystem, commutator, commute_drift
from asymtop_lie.proof import (
    ProofFailure,
    StructuralFailure,
    step3_groups,
    vandermonde_isolate,
    vandermonde_soundness,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

# pinned limits
CLOSURE_JS = (0, 1, 2, 3)
CLOSURE_LIMIT = 120.0
CLOSURE_J4_LIMIT = 600.0
CLOSURE_TOL = 1e-9
PROOF_JS = (0, 1, 2, 3, 5, 10, 20)
PROOF_LIMIT = 60.0
WIGNER_JMAX = 20
IDENTITY_JMAX = 5
PHYSICAL_JMAX = 5
PHYSICAL_TOL = 1e-9
CONTROL_JS = (0, 1, 2)
CONTROLS = ("x,x,y,z", "x,y,x,y", "x,y,z,z", "y,y,x,z")
VANDERMONDE_JMAX = 50
VANDERMONDE_LIMIT = 5.0


def _target(J):
    return (6 * J + 7) ** 2 - 1


def record(number: int, name: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number} ({name}): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def _cli(*argv) -> tuple[int, float]:
    start = time.perf_counter()
    code = main([str(a) for a in argv])
    return code, time.perf_counter() - start


def produce_artifacts(out: Path) -> dict:
    """Write every JSON/DOT artifact of criteria 1-7 into ``out``; return wall times and exit codes."""
    out.mkdir(parents=True, exist_ok=True)
    runs = {}
    for J in CLOSURE_JS + (4,):
        runs[f"closure_J{J}"] = _cli("closure", "--j", J, "--tolerance", CLOSURE_TOL, "--json", out / f"closure_J{J}.json")
    for J in PROOF_JS:
        dots = out / f"dot_J{J}"
        runs[f"prove_J{J}"] = _cli("prove", "--j", J, "--json", out / f"prove_J{J}.json", "--dot-dir", dots)
    for J in range(PHYSICAL_JMAX + 1):
        runs[f"drives_J{J}"] = _cli("drives", "--j", J, "--physical", "--json", out / f"drives_J{J}.json")
    for pols in CONTROLS:
        for J in CONTROL_JS:
            name = f"control_{pols.replace(',', '')}_J{J}"
            runs[name] = _cli("closure", "--j", J, "--polarizations", pols, "--json", out / f"{name}.json")
    for J in (0, 1):
        runs[f"graph_J{J}"] = _cli("graph", "--j", J, "--out", out / f"graph_J{J}.dot", "--json", out / f"graph_J{J}.json")
    rows = vandermonde_soundness(VANDERMONDE_JMAX)
    (out / "vandermonde.json").write_text(json.dumps(rows, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return runs


def _load(out: Path, name: str) -> dict:
    return json.loads((out / f"{name}.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def first_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run1")
    return out, produce_artifacts(out)


# criteria -------------------------------------------------------------------

def check_lie_rank(out: Path, runs: dict) -> bool:
    parts, ok = [], True
    for J in CLOSURE_JS + (4,):
        doc = _load(out, f"closure_J{J}")
        secs = runs[f"closure_J{J}"][1]
        limit = CLOSURE_J4_LIMIT if J == 4 else CLOSURE_LIMIT
        good = doc["dimension"] == _target(J) and doc["pass"] and secs < limit
        ok &= good
        parts.append(f"J={J} {doc['dimension']}/{_target(J)} {secs:.1f}s")
    return record(1, "Lie rank", ok, ", ".join(parts))


def check_proof_replay(out: Path, runs: dict) -> bool:
    parts, ok = [], True
    for J in PROOF_JS:
        doc = _load(out, f"prove_J{J}")
        secs = runs[f"prove_J{J}"][1]
        total = doc["steps"][-1]["cumulative"] if doc["steps"] else 0
        good = doc["pass"] and total == _target(J) and secs < PROOF_LIMIT
        ok &= good
        where = "" if doc["pass"] else f" halted at {doc['failures'][0]['step']}"
        parts.append(f"J={J} {total}/{_target(J)}{where} {secs:.1f}s")
    return record(2, "exact proof replay", ok, ", ".join(parts))


def check_wigner() -> bool:
    checked, bad = 0, []
    for J in range(WIGNER_JMAX + 1):
        for M in range(-J, J + 1):
            pairs = [(wigner3j_x(J, M, s), wigner3j(J, 1, J + 1, M, s, -(M + s))) for s in (1, -1)]
            pairs.append((wigner3j_z(J, M), wigner3j(J, 1, J + 1, M, 0, -M)))
            for closed, racah in pairs:
                checked += 1
                # magnitudes exactly equal, and the global convention is sign-equal
                if abs(closed) != abs(racah) or closed.sign() != racah.sign():
                    bad.append((J, M))
    return record(3, "3j closed forms", not bad, f"{checked} symbols J<={WIGNER_JMAX}, {len(bad)} mismatches")


def _drift_operator(drift: DriftSpec, sub: Subsystem) -> ExactOperator:
    # i diag(E) minus its trace part, written as -sum_k d_k D_{0,k}
    E = drift.diagonal(sub)
    mean = sum(E, RadicalNumber(0)) / sub.n
    return ExactOperator(sub.n, {PauliElement("D", 0, k): -(E[k] - mean) for k in range(1, sub.n) if E[k] != mean})


def _pauli_relations(n: int) -> int:
    el = lambda kind, j, k: ExactOperator.element(kind, j, k, n)
    count = 0
    for j, k, m in permutations(range(n), 3):
        assert commutator(el("G", j, k), el("G", k, m)) == el("G", j, m)
        assert commutator(el("F", j, k), el("F", k, m)) == -el("G", j, m)
        assert commutator(el("G", j, k), el("F", k, m)) == el("F", j, m)
        count += 3
    for j in range(n):
        for k in range(j + 1, n):
            assert commutator(el("G", j, k), el("F", j, k)) == el("D", j, k) * 2
            assert commutator(el("F", j, k), el("D", j, k)) == el("G", j, k) * 2
            count += 2
    edges = [(j, k) for j in range(n) for k in range(j + 1, n)]
    for i, (j, k) in enumerate(edges):
        for jj, kk in edges[i + 1 :]:
            if {j, k} & {jj, kk}:
                continue
            for t in "GFD":
                for u in "GFD":
                    assert commutator(el(t, j, k), el(u, jj, kk)).is_zero()
                    count += 1
    return count


def _drift_relations(J: int, drift: DriftSpec) -> int:
    sub = Subsystem(J)
    n = sub.n
    H = _drift_operator(drift, sub)
    E = drift.diagonal(sub)
    count = 0
    for j in range(n):
        for k in range(j + 1, n):
            g = ExactOperator.element("G", j, k, n)
            f = ExactOperator.element("F", j, k, n)
            dE = E[k] - E[j]
            assert commutator(H, g) == f * (-dE) == commute_drift(drift, g, sub)
            assert commutator(H, f) == g * dE == commute_drift(drift, f, sub)
            count += 2
    return count


def _split_relation(J: int, drift: DriftSpec) -> int:
    sub = Subsystem(J)
    count = 0
    for pair in vandermonde_isolate(drive_w2z(J), drift).paired:
        M = max(sub.state(e.j).M for e in pair)
        sep_e, so = sub.element("G", ("tau", M), ("tauP", M + 1))
        sep = ExactOperator(sub.n, {sep_e: RadicalNumber(so)})
        target_e, to = sub.element("G", ("tau", M), ("tauPP", M))
        assert commutator(commutator(pair, sep), sep) == ExactOperator(sub.n, {target_e: RadicalNumber(-to)})
        count += 1
    assert count == J
    return count


def check_printed_identities() -> bool:
    drift = DriftSpec.default()
    counts = {"pauli": 0, "drift": 0, "ladders": 0, "split": 0, "groups": 0}
    try:
        for J in range(IDENTITY_JMAX + 1):
            counts["pauli"] += _pauli_relations(Subsystem(J).n)
            counts["drift"] += _drift_relations(J, drift)
            for sign in (1, -1):
                assert sigma_pm(J, drift, sign).op == printed_ladder(J, sign)
                counts["ladders"] += 1
            counts["split"] += _split_relation(J, drift)
            groups = step3_groups(J)
            assert len(groups) == 2 * J + 1
            counts["groups"] += len(groups)
        ok, why = True, ""
    except (AssertionError, ConventionError, ProofFailure, StructuralFailure) as exc:
        ok, why = False, f" first failure: {exc}"
    detail = ", ".join(f"{k} {v}" for k, v in counts.items())
    return record(4, "printed identities", ok, f"J<={IDENTITY_JMAX}: {detail}{why}")


def check_physical(out: Path) -> bool:
    worst, ok = 0.0, True
    for J in range(PHYSICAL_JMAX + 1):
        doc = _load(out, f"drives_J{J}")
        ok &= all(d["physical"]["proportional"] for d in doc["drives"] if "physical" in d)
        for label in ("w1x", "w1y", "w2y", "w2z"):
            worst = max(worst, physical_consistency(label, J)["max_relative_deviation"])
    ok &= worst < PHYSICAL_TOL
    return record(5, "physical/structural", ok, f"J<={PHYSICAL_JMAX}, 4 drives, max relative deviation {worst:.1e}")


def check_negative_controls(out: Path) -> bool:
    parts, ok = [], True
    for pols in CONTROLS:
        dims = []
        for J in CONTROL_JS:
            doc = _load(out, f"control_{pols.replace(',', '')}_J{J}")
            ok &= (not doc["admissible"]) and doc["dimension"] < _target(J) and not doc["pass"]
            dims.append(str(doc["dimension"]))
        parts.append(f"{pols}: {'/'.join(dims)}")
    return record(6, "negative controls", ok, "; ".join(parts))


def check_vandermonde(out: Path) -> bool:
    start = time.perf_counter()
    rows = vandermonde_soundness(VANDERMONDE_JMAX)
    secs = time.perf_counter() - start
    # the timed run must agree with the stored artifact
    assert rows == json.loads((out / "vandermonde.json").read_text(encoding="utf-8"))
    good = all(r["nonzero"] and r["modular_agrees"] for r in rows)
    ok = good and secs < VANDERMONDE_LIMIT and len(rows) == 3 * (VANDERMONDE_JMAX + 1)
    return record(7, "Vandermonde soundness", ok, f"{len(rows)} systems J<={VANDERMONDE_JMAX}, all nonzero={good}, {secs:.2f}s")


def check_determinism(first: Path, second: Path) -> bool:
    a = {p.relative_to(first): p.read_bytes() for p in sorted(first.rglob("*")) if p.is_file()}
    b = {p.relative_to(second): p.read_bytes() for p in sorted(second.rglob("*")) if p.is_file()}
    differ = sorted(str(k) for k in set(a) | set(b) if a.get(k) != b.get(k))
    ok = not differ and len(a) > 0
    return record(8, "determinism", ok, f"{len(a)} artifacts compared, {len(differ)} differ" + (f": {differ[:3]}" if differ else ""))


# pytest entry points ----------------------------------------------------------

def test_criterion_1_lie_rank(first_run):
    assert check_lie_rank(*first_run)


def test_criterion_2_proof_replay(first_run):
    assert check_proof_replay(*first_run)


def test_criterion_3_wigner():
    assert check_wigner()


def test_criterion_4_printed_identities():
    assert check_printed_identities()


def test_criterion_5_physical(first_run):
    assert check_physical(first_run[0])


def test_criterion_6_negative_controls(first_run):
    assert check_negative_controls(first_run[0])


def test_criterion_7_vandermonde(first_run):
    assert check_vandermonde(first_run[0])


def test_criterion_8_determinism(first_run, tmp_path, capsys):
    out = tmp_path / "run2"
    produce_artifacts(out)
    capsys.readouterr()
    assert check_determinism(first_run[0], out)


def run_all() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "run1", Path(tmp) / "run2"
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            runs = produce_artifacts(first)
        results = [
            check_lie_rank(first, runs),
            check_proof_replay(first, runs),
            check_wigner(),
            check_printed_identities(),
            check_physical(first),
            check_negative_controls(first),
            check_vandermonde(first),
        ]
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            produce_artifacts(second)
        results.append(check_determinism(first, second))
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(run_all())
