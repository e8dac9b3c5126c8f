"""Quotients of term graphs by node partitions, and decompositions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .bisim import OMEGA, EqLevel, el_lt, eqlevel, leasteqlev
from .grammar import Grammar
from .terms import Handle, TermStore


@dataclass
class TermGraph:
    """A (not necessarily minimal) graph presentation.

    ``syms[i]`` is a nonterminal name or a variable index; ``kids[i]`` lists
    successor node indices in argument order.
    """

    syms: list
    kids: list

    def __post_init__(self):
        if len(self.syms) != len(self.kids):
            raise ValueError("syms and kids differ in length")
        n = len(self.syms)
        for i, ks in enumerate(self.kids):
            if isinstance(self.syms[i], int) and ks:
                raise ValueError(f"variable node {i} has successors")
            if any(not 0 <= k < n for k in ks):
                raise ValueError(f"node {i} has a dangling arc")

    def __len__(self):
        return len(self.syms)

    @staticmethod
    def from_term(store: TermStore, h: Handle) -> "TermGraph":
        order = store.subterms(h)
        idx = {t: i for i, t in enumerate(order)}
        return TermGraph([store.root(t) for t in order],
                         [[idx[c] for c in store.children(t)] for t in order])

    def arcs(self) -> list:
        return [(i, p, k) for i, ks in enumerate(self.kids) for p, k in enumerate(ks, start=1)]

    def terms(self, store: TermStore) -> list[Handle]:
        return store.intern_graph_all([(s, list(ks)) for s, ks in zip(self.syms, self.kids)])

    def to_json(self) -> dict:
        return {"syms": [s if isinstance(s, str) else f"x{s}" for s in self.syms], "kids": self.kids}


@dataclass
class NodePartition:
    blocks: list  # lists of node indices
    reps: list = field(default_factory=list)

    def block_of(self) -> dict:
        return {n: b for b, blk in enumerate(self.blocks) for n in blk}

    def to_json(self) -> list:
        return [sorted(b) for b in self.blocks]


def make_partition(store: TermStore, graph: TermGraph, blocks) -> NodePartition:
    """Validate blocks and pick each block's node with the least term handle."""
    blocks = [sorted(set(b)) for b in blocks if b]
    seen = [n for b in blocks for n in b]
    if len(seen) != len(set(seen)) or set(seen) != set(range(len(graph))):
        raise ValueError("blocks must be disjoint and cover every node")
    blocks.sort()
    hs = graph.terms(store)
    reps = [min(b, key=lambda n: (hs[n], n)) for b in blocks]
    return NodePartition(blocks, reps)


def discrete_partition(store: TermStore, graph: TermGraph) -> NodePartition:
    return make_partition(store, graph, [[i] for i in range(len(graph))])


@dataclass
class Quotient:
    graph: TermGraph
    red: list  # node -> quotient node
    handles: list  # quotient node -> term handle

    def red_term(self, n: int) -> Handle:
        return self.handles[self.red[n]]


def quotient(store: TermStore, graph: TermGraph, P: NodePartition) -> Quotient:
    blk = P.block_of()
    qidx = {r: i for i, r in enumerate(P.reps)}
    red = [qidx[P.reps[blk[n]]] for n in range(len(graph))]
    qg = TermGraph([graph.syms[r] for r in P.reps],
                   [[red[k] for k in graph.kids[r]] for r in P.reps])
    return Quotient(qg, red, qg.terms(store))


def red1(store: TermStore, graph: TermGraph, P: NodePartition, n: int, q: Quotient | None = None) -> Handle:
    """Node ``n`` with each outgoing arc redirected into the quotient."""
    q = q or quotient(store, graph, P)
    sym = graph.syms[n]
    if isinstance(sym, int):
        return store.var(sym)
    return store.app(sym, [q.red_term(k) for k in graph.kids[n]])


def decompose(store: TermStore, graph: TermGraph, P: NodePartition) -> list:
    q = quotient(store, graph, P)
    return [(red1(store, graph, P, n, q), q.red_term(n)) for n in range(len(graph))]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def smallest_partition_from_arcs(store: TermStore, graph: TermGraph, seeds=(), marked_arcs=()) -> NodePartition:
    """Least partition joining seed pairs and both ends of each marked arc.

    Marked arcs are ``(source, position)``; loop arcs contribute nothing.
    """
    uf = _UnionFind(len(graph))
    for a, b in seeds:
        uf.union(a, b)
    for src, pos in marked_arcs:
        dst = graph.kids[src][pos - 1]
        if dst != src:
            uf.union(src, dst)
    groups: dict = {}
    for n in range(len(graph)):
        groups.setdefault(uf.find(n), []).append(n)
    return make_partition(store, graph, list(groups.values()))


@dataclass
class MergeBoundReport:
    least: EqLevel
    checked: int = 0
    violations: list = field(default_factory=list)
    undetermined: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"least": self.least.to_json(), "checked": self.checked,
                "violations": self.violations, "undetermined": self.undetermined}


def prop8_check(g: Grammar, graph: TermGraph, P: NodePartition, cap: int = 16, budget: int = 10000) -> MergeBoundReport:
    """Merged nodes are at least as equal as the decomposition's least pair."""
    store = g.store
    dec = decompose(store, graph, P)
    least = leasteqlev(g, dec, cap, budget)
    rep = MergeBoundReport(least)
    hs = graph.terms(store)
    q = quotient(store, graph, P)

    def need(tag, a: Handle, b: Handle):
        e = eqlevel(g, a, b, cap, budget) if a != b else OMEGA
        verdict = el_lt(e, least)
        if verdict is None:
            rep.undetermined.append((tag, g.render(a), g.render(b)))
            return
        rep.checked += 1
        if verdict:
            rep.violations.append((tag, g.render(a), g.render(b), str(e), str(least)))

    for blk in P.blocks:
        for i, n1 in enumerate(blk):
            for n2 in blk[i + 1:]:
                need("block", hs[n1], hs[n2])
    for n in range(len(graph)):
        need("red", hs[n], q.red_term(n))
        need("red1", hs[n], dec[n][0])
    return rep
