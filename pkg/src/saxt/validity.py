"""Termination validity of recursive definitions.

Every call node of a circular derivation is an edge from the definition
being checked to the callee.  The edge carries the arithmetic context at
the call (variables and constraints accumulated from the root), the
caller's bound vector and the callee's bound instantiated at the call.

Definitions are grouped into strongly connected blocks of the call graph.
Edges between blocks are always accepted since the block graph is acyclic.
Inside a block an edge is accepted when the instantiated bound is
lexicographically smaller than the caller's (after zero padding) or, in
numbered mode, when it is equal and the callee is declared earlier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .arith import ArithContext, Order, lex_lt, pad_compare, vec_eq
from .syntax.ast import Signature
from .syntax.pretty import show_expr
from .syntax.subst import subst_expr
from .typecheck import Derivation, TypeCheckFailure, check_signature, query_text


class Mode(str, enum.Enum):
    STRICT = "strict"
    NUMBERED = "numbered"


@dataclass(frozen=True)
class CallEdge:
    caller: str
    callee: str
    vars: tuple
    constraints: tuple
    bound: tuple  # the caller's bound vector
    args: tuple  # the callee's bound at the call site
    loc: object = field(default=None, compare=False)

    @property
    def ctx(self) -> ArithContext:
        return ArithContext(self.vars, self.constraints)

    @property
    def strict_query(self) -> str:
        return query_text(self.ctx, lex_lt(self.args, self.bound))

    @property
    def equal_query(self) -> str:
        return query_text(self.ctx, vec_eq(self.args, self.bound))


@dataclass
class CallGraph:
    nodes: list[str]
    edges: list[CallEdge]
    blocks: list[list[str]]  # callees before callers
    numbering: dict[str, int]

    def block_of(self, name: str) -> int:
        for n, b in enumerate(self.blocks):
            if name in b:
                return n
        raise KeyError(name)


@dataclass(frozen=True)
class EdgeVerdict:
    edge: CallEdge
    intra_block: bool
    order: Optional[Order]
    accepted: bool
    reason: str
    query: Optional[str]

    def to_json(self) -> dict:
        e = self.edge
        return {
            "caller": e.caller, "callee": e.callee, "context": str(e.ctx),
            "args": [show_expr(x) for x in e.args], "bound": [show_expr(x) for x in e.bound],
            "intraBlock": self.intra_block,
            "order": self.order.value if self.order else None,
            "valid": self.accepted, "reason": self.reason, "query": self.query,
        }


@dataclass
class ValidityReport:
    mode: Mode
    graph: CallGraph
    verdicts: list[EdgeVerdict]

    @property
    def valid(self) -> bool:
        return all(v.accepted for v in self.verdicts)

    @property
    def failures(self) -> list[EdgeVerdict]:
        return [v for v in self.verdicts if not v.accepted]

    def table(self) -> str:
        rows = [("caller", "callee", "context", "args vs bound", "verdict")]
        for v in self.verdicts:
            e = v.edge
            cmp = {Order.LESS: "<", Order.EQUAL: "=", Order.OTHER: "?", None: "~"}[v.order]
            vec = (f"[{', '.join(show_expr(x) for x in e.args)}] {cmp} "
                   f"[{', '.join(show_expr(x) for x in e.bound)}]")
            verdict = ("valid" if v.accepted else "INVALID") + f" ({v.reason})"
            rows.append((e.caller, e.callee, str(e.ctx), vec, verdict))
        widths = [max(len(r[k]) for r in rows) for k in range(4)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r[:4], widths)) + "  " + r[4]
                 for r in rows]
        for v in self.failures:
            lines.append(f"failed: {v.query}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"mode": self.mode.value, "valid": self.valid,
                "blocks": self.graph.blocks,
                "edges": [v.to_json() for v in self.verdicts]}


def _edges_of(sig: Signature, name: str, deriv: Derivation) -> list[CallEdge]:
    caller = sig.procs[name]
    out = []
    for node in deriv.calls():
        site = node.call
        callee = sig.procs[site.callee]
        s = dict(site.subst)
        args = tuple(subst_expr(e, s) for e in callee.bound)
        j = node.judgment
        out.append(CallEdge(name, site.callee, j.vars, j.constraints, tuple(caller.bound),
                            args, node.process.loc))
    return out


def build_call_graph(sig: Signature, derivations: dict[str, Derivation]) -> CallGraph:
    """One edge per call node, in declaration then derivation order."""
    names = list(sig.procs)
    edges = []
    for name in names:
        if name in derivations:
            edges.extend(_edges_of(sig, name, derivations[name]))
    g = nx.DiGraph()
    g.add_nodes_from(names)
    g.add_edges_from((e.caller, e.callee) for e in edges)
    cond = nx.condensation(g)
    order = {n: i for i, n in enumerate(names)}
    topo = list(nx.lexicographical_topological_sort(
        cond, key=lambda c: min(order[m] for m in cond.nodes[c]["members"])))
    blocks = [sorted(cond.nodes[c]["members"], key=order.get) for c in reversed(topo)]
    return CallGraph(names, edges, blocks, {n: sig.number(n) for n in names})


def validate(graph: CallGraph, mode: Mode | str = Mode.NUMBERED) -> ValidityReport:
    mode = Mode(mode)
    verdicts = []
    for e in graph.edges:
        if graph.block_of(e.caller) != graph.block_of(e.callee):
            verdicts.append(EdgeVerdict(e, False, None, True, "inter-block", None))
            continue
        order = pad_compare(e.ctx, e.args, e.bound)
        if order is Order.LESS:
            verdicts.append(EdgeVerdict(e, True, order, True, "decreasing", e.strict_query))
        elif order is Order.EQUAL and mode is Mode.NUMBERED \
                and graph.numbering[e.callee] < graph.numbering[e.caller]:
            verdicts.append(EdgeVerdict(e, True, order, True,
                                        f"equal, {e.callee} numbered before {e.caller}",
                                        e.equal_query))
        else:
            reason = "not decreasing"
            if order is Order.EQUAL:
                reason = ("equal, strict mode" if mode is Mode.STRICT
                          else f"equal, but {e.callee} is not numbered before {e.caller}")
            verdicts.append(EdgeVerdict(e, True, order, False, reason, e.strict_query))
    return ValidityReport(mode, graph, verdicts)


def validate_program(sig: Signature, derivations: Optional[dict] = None,
                     mode: Mode | str = Mode.NUMBERED) -> ValidityReport:
    """Typecheck (unless derivations are given), build the graph and validate."""
    if derivations is None:
        derivations = check_signature(sig)
    return validate(build_call_graph(sig, derivations), mode)


__all__ = [
    "CallEdge", "CallGraph", "EdgeVerdict", "Mode", "TypeCheckFailure",
    "ValidityReport", "build_call_graph", "validate", "validate_program",
]
