"""The six isolation steps, executed in exact arithmetic.

Every claimed member of L is obtained from operators already in L by exact
commutators and rational linear combinations; the closed forms expected at
each stage are asserted against the engine output, never substituted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..drives import drive_w2y, drive_w2z, sigma_pm
from ..exact import RadicalNumber
from ..oplib import DriftSpec, ExactOperator, PauliElement, Subsystem, commutator, commute_drift
from .graph import STEP_TAGS, IsolatedSet, TransitionGraph, state_label
from .vandermonde import StructuralFailure, vandermonde_isolate


class ProofFailure(AssertionError):
    """A step could not establish what it needed; ``diagnosis`` is JSON-ready."""

    def __init__(self, step: str, reason: str, **detail):
        super().__init__(f"{step}: {reason}")
        self.diagnosis = {"step": step, "reason": reason, **detail}


def _half_sqrt(x: int) -> RadicalNumber:
    return RadicalNumber.sqrt(Fraction(x, 2))


def _g(sub: Subsystem, upper: str, M: int, Mp: int) -> tuple[PauliElement, ExactOperator]:
    """G^{tau,upper}_{M,Mp} as canonical element and unit operator."""
    e, sign = sub.element("G", ("tau", M), (upper, Mp))
    return e, ExactOperator(sub.n, {e: RadicalNumber(sign)})


def double_commutator(op: ExactOperator, sep: ExactOperator) -> ExactOperator:
    return commutator(commutator(op, sep), sep)


def _label(sub, e):
    return sub.label(e)


# step 1 ---------------------------------------------------------------------

def isolate_ladders(J: int, drift: DriftSpec, iso: IsolatedSet) -> list[PauliElement]:
    """sigma+- drives and their Vandermonde separation."""
    new = []
    for sign in (1, -1):
        try:
            sig = sigma_pm(J, drift, sign)
            res = vandermonde_isolate(sig, drift)
        except (StructuralFailure, AssertionError) as exc:
            raise ProofFailure("step1", str(exc)) from exc
        if len(res.elements) != 2 * J + 1 or res.paired:
            raise ProofFailure("step1", f"{sig.label} did not separate into 2J+1 single elements")
        for e in res.elements:
            if iso.add(e, "step1"):
                new.append(e)
    return new


# step 2 ---------------------------------------------------------------------

def split_z_pairs(pairs: list[ExactOperator], iso: IsolatedSet, tag: str = "step2") -> list[PauliElement]:
    """Split G^{tau,tau''}_{-M,-M} + G^{tau,tau''}_{M,M} using G^{tau,tau'}_{M,M+1}.

    Asserts [[pair, G^{tau,tau'}_{M,M+1}], G^{tau,tau'}_{M,M+1}] = -G^{tau,tau''}_{M,M}.
    Singletons (M = 0) pass through.
    """
    sub = iso.sub
    new = []
    for pair in pairs:
        if len(pair) == 1:
            e, _ = pair.single()
            if iso.add(e, tag):
                new.append(e)
            continue
        Ms = sorted(sub.state(e.j).M for e in pair)
        if len(pair) != 2 or Ms[0] != -Ms[1]:
            raise ProofFailure(tag, "w2z group is not a symmetric pair", group=repr(pair))
        M = Ms[1]
        eM, opM = _g(sub, "tauPP", M, M)
        eN, opN = _g(sub, "tauPP", -M, -M)
        if pair != opM + opN:
            raise ProofFailure(tag, f"w2z group at |M|={M} is not G_-M,-M + G_M,M", group=repr(pair))
        sep_e, sep = _g(sub, "tauP", M, M + 1)
        iso.require(sep_e, tag)
        dc = double_commutator(pair, sep)
        if dc != -opM:
            raise ProofFailure(tag, f"double commutator at M={M} is not -G^(tau,tau'')_(M,M)", result=repr(dc))
        rest = pair - opM
        if rest != opN:
            raise ProofFailure(tag, f"subtraction at M={M} left {rest}")
        for e in (eN, eM):
            if iso.add(e, tag):
                new.append(e)
    return new


def isolate_z(J: int, drift: DriftSpec, iso: IsolatedSet) -> list[PauliElement]:
    try:
        res = vandermonde_isolate(drive_w2z(J), drift)
    except StructuralFailure as exc:
        raise ProofFailure("step2", str(exc)) from exc
    if len(res.groups) != J + 1:
        raise ProofFailure("step2", f"w2z gave {len(res.groups)} groups, expected J+1")
    return split_z_pairs(res.groups, iso)


# step 3 ---------------------------------------------------------------------

def printed_group(J: int, M: int) -> ExactOperator:
    """Closed form of [[iH_{w2,y}, G^{tau,tau''}_{M,M}], G^{tau,tau''}_{M,M}].

    Interior M uses the four-term form; the edges M = -J and M = J the
    three-term forms (at J = 0 the two edge forms coincide). Terms with a
    vanishing coefficient are dropped.
    """
    sub = Subsystem(J)
    terms: list[tuple[RadicalNumber, int, int]] = []
    if M == -J:
        terms = [
            (RadicalNumber.sqrt((J + 1) * (2 * J + 1)), -J, -J - 1),
            (RadicalNumber.sqrt(J * (2 * J + 1)), -J + 1, -J),
            (RadicalNumber(-1), -J, -J + 1),
        ]
    elif M == J:
        terms = [
            (-RadicalNumber.sqrt((J + 1) * (2 * J + 1)), J, J + 1),
            (-RadicalNumber.sqrt(J * (2 * J + 1)), J - 1, J),
            (RadicalNumber(1), J, J - 1),
        ]
    else:
        terms = [
            (-_half_sqrt((J + M + 1) * (J + M)), M - 1, M),
            (-_half_sqrt((J + M + 2) * (J + M + 1)), M, M + 1),
            (_half_sqrt((J - M + 1) * (J - M)), M + 1, M),
            (_half_sqrt((J - M + 2) * (J - M + 1)), M, M - 1),
        ]
    out = ExactOperator.zero(sub.n)
    for c, a, b in terms:
        if c.is_zero():
            continue
        _, op = _g(sub, "tauPP", a, b)
        out = out + op * c
    return out


def vanishing_printed_coefficients(J: int) -> list[int]:
    """Interior M whose four-term form loses a term to a zero coefficient."""
    return [M for M in range(-J + 1, J) if len(printed_group(J, M)) != 4]


def step3_groups(J: int, iso: IsolatedSet | None = None) -> dict[int, ExactOperator]:
    """Double commutators of iH_{w2,y} with each G^{tau,tau''}_{M,M}, checked
    against their printed closed forms."""
    sub = Subsystem(J)
    w2y = drive_w2y(J).op
    groups = {}
    for M in range(-J, J + 1):
        e, op = _g(sub, "tauPP", M, M)
        if iso is not None:
            iso.require(e, "step3")
        grp = double_commutator(w2y, op)
        expected = printed_group(J, M)
        if grp != expected:
            raise ProofFailure("step3", f"group M={M} differs from its closed form", got=repr(grp), expected=repr(expected))
        groups[M] = grp
    return groups


# steps 4 and 5 ----------------------------------------------------------------

def _separate(iso, tag, op, sep_upper, sep_M, sep_Mp, expect) -> PauliElement:
    sub = iso.sub
    sep_e, sep = _g(sub, sep_upper, sep_M, sep_Mp)
    iso.require(sep_e, tag)
    got = double_commutator(op, sep).single()
    if got is None or got[0] != expect:
        raise ProofFailure(
            tag,
            f"separator {_label(sub, sep_e)} did not isolate {_label(sub, expect)}",
            result=repr(double_commutator(op, sep)),
        )
    return got[0]


def _subtract(iso, tag, op, known: list[PauliElement], expect) -> PauliElement:
    sub = iso.sub
    rest = op
    for e in known:
        iso.require(e, tag)
        rest = rest - ExactOperator(sub.n, {e: op.coefficient(e)})
    got = rest.single()
    if got is None or got[0] != expect:
        raise ProofFailure(tag, f"subtraction did not leave {_label(sub, expect)}", result=repr(rest))
    return got[0]


def _purple(sub, M, Mp) -> PauliElement:
    return _g(sub, "tauPP", M, Mp)[0]


def _j0_attempt(groups, iso: IsolatedSet):
    """At J = 0 the single w2y group has two terms; look for any separator."""
    sub = iso.sub
    grp = groups[0]
    for e in iso:
        op = ExactOperator(sub.n, {e: RadicalNumber(1)})
        got = double_commutator(grp, op).single()
        if got is not None and got[0] in grp:
            return
    optimistic = iso.filtered(lambda e, t: True)
    for e in grp:
        optimistic.add(e, "step4")
    comps = TransitionGraph.from_isolated(optimistic).components()
    raise ProofFailure(
        "step4",
        "w2y group cannot be split: every isolated element shares a vertex with both terms",
        group=[_label(sub, e) for e in sorted(grp)],
        optimistic_components=[[state_label(sub, sub.state(i)) for i in c] for c in comps],
    )


def induction_isolate(J: int, iso: IsolatedSet, groups: dict[int, ExactOperator] | None = None) -> IsolatedSet:
    """Base case (step4) and inductive step (step5): all tau<->tau'' ladder elements."""
    sub = iso.sub
    if groups is None:
        groups = step3_groups(J, iso)
    if J == 0:
        _j0_attempt(groups, iso)
        return iso

    t = "step4"
    one = _separate(iso, t, groups[-J], "tauP", -J + 1, -J + 2, _purple(sub, -J + 1, -J))
    iso.add(one, t)
    two = _separate(iso, t, groups[-J + 1], "tauP", -J, -J - 1, _purple(sub, -J, -J + 1))
    iso.add(two, t)
    three = _separate(iso, t, groups[-J + 1], "tauP", -J + 2, -J + 3, _purple(sub, -J + 2, -J + 1))
    iso.add(three, t)
    four = _subtract(iso, t, groups[-J + 1], [one, two, three], _purple(sub, -J + 1, -J + 2))
    iso.add(four, t)
    five = _subtract(iso, t, groups[-J], [one, two], _purple(sub, -J, -J - 1))
    iso.add(five, t)

    t = "step5"
    for M in range(-J + 1, J - 1):
        known = [_purple(sub, M, M + 1), _purple(sub, M + 1, M)]
        rest = groups[M + 1]
        for e in known:
            iso.require(e, t)
            rest = rest - ExactOperator(sub.n, {e: rest.coefficient(e)})
        if len(rest) != 2:
            raise ProofFailure(t, f"group M={M + 1} minus shared elements has {len(rest)} terms", result=repr(rest))
        a = _separate(iso, t, rest, "tauP", M + 2, M + 3, _purple(sub, M + 2, M + 1))
        iso.add(a, t)
        b = _separate(iso, t, rest, "tauP", M + 1, M, _purple(sub, M + 1, M + 2))
        iso.add(b, t)
    top = _subtract(iso, t, groups[J], [_purple(sub, J - 1, J), _purple(sub, J, J - 1)], _purple(sub, J, J + 1))
    iso.add(top, t)
    return iso


# step 6 ---------------------------------------------------------------------

def _single_on(op: ExactOperator, kind: str, j: int, k: int):
    got = op.single()
    if got is None:
        return None
    e, c = got
    if e.kind != kind or {e.j, e.k} != {j, k} or c.is_zero():
        return None
    return e


def connect_and_span(iso: IsolatedSet, J: int) -> IsolatedSet:
    """Connectedness and concatenation closure up to all n**2 - 1 elements."""
    sub = iso.sub
    n = sub.n
    t = "step6"
    graph = TransitionGraph.from_isolated(iso)
    comps = graph.components()
    if len(comps) > 1:
        raise ProofFailure(
            t,
            "transition graph is disconnected",
            components=[[state_label(sub, sub.state(i)) for i in c] for c in comps],
        )
    for e in iso:
        iso.require(e, t)

    known = [0] * n
    for e in iso:
        if e.kind == "G":
            known[e.j] |= 1 << e.k
            known[e.k] |= 1 << e.j
    while True:
        found = []
        for a in range(n):
            for c in range(a + 1, n):
                if known[a] >> c & 1:
                    continue
                common = known[a] & known[c]
                if not common:
                    continue
                b = (common & -common).bit_length() - 1
                op = commutator(ExactOperator.element("G", a, b, n), ExactOperator.element("G", b, c, n))
                e = _single_on(op, "G", a, c)
                if e is None:
                    raise ProofFailure(t, f"[G_{a},{b}, G_{b},{c}] is not a multiple of G_{a},{c}", result=repr(op))
                found.append(e)
        if not found:
            break
        for e in found:
            iso.add(e, t)
            known[e.j] |= 1 << e.k
            known[e.k] |= 1 << e.j
    missing = [(a, c) for a in range(n) for c in range(a + 1, n) if not known[a] >> c & 1]
    if missing:
        raise ProofFailure(t, f"{len(missing)} G elements not reached", first=list(missing[0]))

    drift = _probe_drift()
    levels = [sub.level_of(i) for i in range(n)]
    for a in range(n):
        for c in range(a + 1, n):
            g = ExactOperator.element("G", a, c, n)
            if levels[a] != levels[c]:
                op = commute_drift(drift, g, sub)
            else:
                b = next(i for i in range(n) if levels[i] != levels[a])
                op = commutator(ExactOperator.element("G", a, b, n), ExactOperator.element("F", b, c, n))
            e = _single_on(op, "F", a, c)
            if e is None:
                raise ProofFailure(t, f"could not produce F_{a},{c}", result=repr(op))
            iso.add(e, t)

    for k in range(n - 1):
        op = commutator(ExactOperator.element("G", k, k + 1, n), ExactOperator.element("F", k, k + 1, n))
        if op != ExactOperator.element("D", k, k + 1, n, 2):
            raise ProofFailure(t, f"[G,F] on ({k},{k + 1}) is not 2 D", result=repr(op))
        iso.add(PauliElement("D", k, k + 1), t)
    if len(iso) != n * n - 1:
        raise ProofFailure(t, f"final count {len(iso)} differs from {n * n - 1}")
    return iso


_DRIFT: list[DriftSpec] = []


def _probe_drift() -> DriftSpec:
    # any drift with distinct level energies works for the F partners
    if not _DRIFT:
        _DRIFT.append(DriftSpec.default())
    return _DRIFT[0]


# report ---------------------------------------------------------------------

@dataclass
class StepRecord:
    tag: str
    new_elements: int
    cumulative: int


@dataclass
class ProofReport:
    j: int
    n: int
    target_dim: int
    steps: list[StepRecord] = field(default_factory=list)
    passed: bool = False
    failures: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    isolated: IsolatedSet | None = None

    def counts(self) -> dict[str, int]:
        return {s.tag: s.new_elements for s in self.steps}

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "n": self.n,
            "target_dim": self.target_dim,
            "steps": [{"tag": s.tag, "new_elements": s.new_elements, "cumulative": s.cumulative} for s in self.steps],
            "pass": self.passed,
            "failures": self.failures,
            "notes": self.notes,
        }


def verify_proof(J: int, drift: DriftSpec | None = None) -> ProofReport:
    """Run steps 1-6 exactly; stops at the first failing step."""
    drift = drift or DriftSpec.default()
    sub = Subsystem(J)
    iso = IsolatedSet(sub)
    report = ProofReport(J, sub.n, sub.n**2 - 1, isolated=iso)
    report.notes["vanishing_printed_coefficients"] = vanishing_printed_coefficients(J)
    groups: dict[int, ExactOperator] = {}

    def run_step3():
        groups.update(step3_groups(J, iso))

    actions = {
        "step1": lambda: isolate_ladders(J, drift, iso),
        "step2": lambda: isolate_z(J, drift, iso),
        "step3": run_step3,
        "step4": lambda: induction_isolate(J, iso, groups),
        "step5": lambda: None,  # executed together with step4, counted separately
        "step6": lambda: connect_and_span(iso, J),
    }
    for tag in STEP_TAGS:
        try:
            actions[tag]()
        except ProofFailure as exc:
            report.failures.append(exc.diagnosis)
            break
        except AssertionError as exc:
            report.failures.append({"step": tag, "reason": str(exc)})
            break
    done = len(report.failures) == 0
    last = STEP_TAGS if done else STEP_TAGS[: STEP_TAGS.index(report.failures[0]["step"]) + 1]
    total = 0
    for tag in last:
        c = iso.count(tag)
        total += c
        report.steps.append(StepRecord(tag, c, total))
    report.passed = done and len(iso) == report.target_dim
    return report
