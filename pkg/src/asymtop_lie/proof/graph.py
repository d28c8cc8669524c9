"""Isolated basis elements and the transition graph they induce."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..oplib import PauliElement, StateIndex, Subsystem

STEP_TAGS = ("step1", "step2", "step3", "step4", "step5", "step6")
_RANK = {t: i for i, t in enumerate(STEP_TAGS)}

_LEVEL_SYMBOL = {"tau": "τ", "tauP": "τ′", "tauPP": "τ″"}


def step_rank(tag: str) -> int:
    try:
        return _RANK[tag]
    except KeyError:
        raise ValueError(f"unknown step tag {tag!r}; expected one of {STEP_TAGS}") from None


class ProvenanceError(AssertionError):
    pass


class IsolatedSet:
    """Basis elements proven to lie in L, each with the step that isolated it.

    Grows monotonically. :meth:`require` enforces that a step only uses
    elements isolated at or before itself.
    """

    def __init__(self, sub: Subsystem):
        self.sub = sub
        self._prov: dict[PauliElement, str] = {}
        self._order: list[PauliElement] = []

    @property
    def n(self) -> int:
        return self.sub.n

    def add(self, e: PauliElement, tag: str) -> bool:
        step_rank(tag)
        if e in self._prov:
            return False
        self._prov[e] = tag
        self._order.append(e)
        return True

    def __contains__(self, e) -> bool:
        return e in self._prov

    def __len__(self):
        return len(self._prov)

    def __iter__(self):
        return iter(self._order)

    def provenance(self, e: PauliElement) -> str:
        return self._prov[e]

    @property
    def elements(self) -> list[PauliElement]:
        return list(self._order)

    def require(self, e: PauliElement, reader: str) -> PauliElement:
        if e not in self._prov:
            raise ProvenanceError(f"{self.sub.label(e)} is not isolated (needed by {reader})")
        if step_rank(self._prov[e]) > step_rank(reader):
            raise ProvenanceError(
                f"{reader} reads {self.sub.label(e)} which was isolated later, in {self._prov[e]}"
            )
        return e

    def count(self, tag: str) -> int:
        return sum(1 for t in self._prov.values() if t == tag)

    def filtered(self, keep) -> "IsolatedSet":
        """Copy holding the elements with ``keep(element, tag)`` true."""
        out = IsolatedSet(self.sub)
        for e in self._order:
            if keep(e, self._prov[e]):
                out.add(e, self._prov[e])
        return out


@dataclass
class TransitionGraph:
    """Vertices are subsystem states; an edge holds the G/F elements on that pair."""

    sub: Subsystem
    edges: dict[tuple[int, int], dict[str, str]] = field(default_factory=dict)  # (j, k) -> kind -> tag

    @classmethod
    def from_isolated(cls, iso: IsolatedSet, stage: str | None = None) -> "TransitionGraph":
        limit = step_rank(stage) if stage is not None else len(STEP_TAGS)
        g = cls(iso.sub)
        for e in iso:
            tag = iso.provenance(e)
            if e.kind == "D" or step_rank(tag) > limit:
                continue
            g.edges.setdefault((e.j, e.k), {})[e.kind] = tag
        return g

    @property
    def vertices(self) -> list[StateIndex]:
        return self.sub.states()

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.sub.n)]
        for j, k in sorted(self.edges):
            adj[j].append(k)
            adj[k].append(j)
        return adj

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = [False] * self.sub.n
        comps = []
        for start in range(self.sub.n):
            if seen[start]:
                continue
            seen[start] = True
            comp, queue = [], deque([start])
            while queue:
                v = queue.popleft()
                comp.append(v)
                for w in adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def state_name(self, i: int) -> str:
        s = self.sub.state(i)
        return state_label(self.sub, s)


def state_label(sub: Subsystem, s: StateIndex) -> str:
    Jl = sub.J if s.level == "tau" else sub.J + 1
    return f"({Jl},{_LEVEL_SYMBOL[s.level]},{s.M})"


def _node_id(s: StateIndex) -> str:
    m = f"m{-s.M}" if s.M < 0 else f"p{s.M}" if s.M > 0 else "0"
    return f"{s.level}_{m}"


def _edge_color(sub: Subsystem, j: int, k: int, tag: str) -> str:
    a, b = sub.state(j), sub.state(k)
    if tag == "step1":
        return "blue" if b.M > a.M else "red"
    if tag == "step2":
        return "darkgreen"
    if tag in ("step3", "step4", "step5"):
        return "purple"
    return "gray60"


def export_graph(graph: TransitionGraph, stage: str = "step6") -> str:
    """DOT text of the edges isolated up to ``stage``, one rank per level."""
    limit = step_rank(stage)
    sub = graph.sub
    lines = [
        "graph transitions {",
        f'  label="J={sub.J} stage={stage}";',
        "  rankdir=BT;",
        "  node [shape=box, fontsize=10];",
        "  edge [fontsize=8];",
    ]
    for level in ("tau", "tauP", "tauPP"):
        lines.append(f"  subgraph level_{level} {{")
        lines.append("    rank=same;")
        for M in range(-sub.mmax(level), sub.mmax(level) + 1):
            s = StateIndex(level, M)
            lines.append(f'    {_node_id(s)} [label="{state_label(sub, s)}"];')
        lines.append("  }")
    for (j, k) in sorted(graph.edges):
        held = {kind: tag for kind, tag in graph.edges[(j, k)].items() if step_rank(tag) <= limit}
        if not held:
            continue
        first = min(held.values(), key=step_rank)
        label = ",".join(f"{kind}:{held[kind]}" for kind in sorted(held))
        a, b = sub.state(j), sub.state(k)
        lines.append(
            f'  {_node_id(a)} -- {_node_id(b)} [color={_edge_color(sub, j, k, first)}, label="{label}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
