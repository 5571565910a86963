"""Dependency multigraph of a flat specification and the well-formedness check."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .errors import NotFlat, NotWellFormed
from .ir import CoreSpec, Delay, Last, Var, children, is_flat_expr


@dataclass(frozen=True)
class Edge:
    source: str   # the equation using the variable
    target: str   # the equation being used
    delayed: bool


@dataclass
class DependencyGraph:
    nodes: list
    edges: list = field(default_factory=list)

    def successors(self, name, delayed=None):
        return [e.target for e in self.edges if e.source == name and (delayed is None or e.delayed == delayed)]


@dataclass
class WellFormednessReport:
    ok: bool
    witness: Optional[list] = None


def build_graph(spec: CoreSpec) -> DependencyGraph:
    """Edge (y, x) for each use of equation name x in the right-hand side of y.

    Occurrences as the first argument of last or delay are labelled delayed.
    Inputs have no node. Parallel edges are kept.
    """
    if not spec.is_flat():
        bad = next(n for n, e in spec.equations.items() if not is_flat_expr(e))
        raise NotFlat(f"equation {bad} contains a nested expression; flatten first")
    names = list(spec.equations)
    edges = []
    for name, e in spec.equations.items():
        args = (e,) if isinstance(e, Var) else children(e)
        for i, arg in enumerate(args):
            assert isinstance(arg, Var)
            if arg.name in spec.equations:
                delayed = isinstance(e, (Last, Delay)) and i == 0
                edges.append(Edge(name, arg.name, delayed))
    return DependencyGraph(names, edges)


def _nondelayed_adjacency(g: DependencyGraph) -> dict:
    adj = {n: [] for n in g.nodes}
    for e in g.edges:
        if not e.delayed:
            adj[e.source].append(e.target)
    return adj


def _find_cycle(adj: dict, order: list) -> Optional[list]:
    """Iterative DFS; returns a cycle as a node list or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {n: WHITE for n in order}
    for root in order:
        if colour[root] != WHITE:
            continue
        stack = [(root, iter(adj[root]))]
        path = [root]
        colour[root] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = BLACK
                stack.pop()
                path.pop()
            elif colour[nxt] == GREY:
                return path[path.index(nxt):]
            elif colour[nxt] == WHITE:
                colour[nxt] = GREY
                stack.append((nxt, iter(adj[nxt])))
                path.append(nxt)
    return None


def check_well_formed(g: DependencyGraph) -> WellFormednessReport:
    """Every cycle has a delayed edge iff the non-delayed subgraph is acyclic."""
    cycle = _find_cycle(_nondelayed_adjacency(g), g.nodes)
    if cycle is None:
        return WellFormednessReport(True)
    return WellFormednessReport(False, cycle)


def is_cycle_witness(g: DependencyGraph, cycle: list) -> bool:
    """Does ``cycle`` follow non-delayed edges all the way round?"""
    if not cycle:
        return False
    adj = _nondelayed_adjacency(g)
    return all(cycle[(i + 1) % len(cycle)] in adj.get(n, ()) for i, n in enumerate(cycle))


def topo_order_nondelayed(g: DependencyGraph) -> list:
    """Dependencies first; ties broken by declaration order (Kahn's algorithm)."""
    rank = {n: i for i, n in enumerate(g.nodes)}
    adj = _nondelayed_adjacency(g)
    pending = {n: len(set(adj[n])) for n in g.nodes}
    users = {n: set() for n in g.nodes}
    for n, targets in adj.items():
        for t in targets:
            users[t].add(n)
    heap = [rank[n] for n in g.nodes if pending[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = g.nodes[heapq.heappop(heap)]
        order.append(n)
        for u in users[n]:
            pending[u] -= 1
            if pending[u] == 0:
                heapq.heappush(heap, rank[u])
    if len(order) != len(g.nodes):
        raise NotWellFormed(check_well_formed(g).witness)
    return order


def require_well_formed(spec: CoreSpec) -> list:
    """Build the graph, reject ill-formed specs, return the evaluation order."""
    g = build_graph(spec)
    report = check_well_formed(g)
    if not report.ok:
        raise NotWellFormed(report.witness)
    return topo_order_nondelayed(g)


def to_dot(g: DependencyGraph, inputs=()) -> str:
    lines = ["digraph dependencies {", "  rankdir=LR;"]
    for i in inputs:
        lines.append(f'  "{i}" [shape=box];')
    for n in g.nodes:
        lines.append(f'  "{n}";')
    for e in g.edges:
        style = " [style=dashed]" if e.delayed else ""
        lines.append(f'  "{e.source}" -> "{e.target}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
