"""Regular terms as maximally shared graphs.

Every handle issued by a :class:`TermStore` denotes exactly one regular term,
and two handles are equal iff their (possibly infinite) unfoldings agree.
Acyclic construction goes through a node index; graphs with cycles are
minimized by partition refinement and then matched against the store.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

INFINITE = math.inf

Handle = int


class TermError(ValueError):
    pass


class ArityError(TermError):
    pass


class TermSyntaxError(TermError):
    def __init__(self, msg: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Subst:
    """Finite substitution; ``items`` is sorted by variable index."""

    items: tuple = ()

    @staticmethod
    def of(mapping: Mapping[int, Handle] | Iterable[tuple[int, Handle]]) -> "Subst":
        pairs = mapping.items() if isinstance(mapping, Mapping) else mapping
        return Subst(tuple(sorted(dict(pairs).items())))

    def get(self, i: int, default=None):
        for k, v in self.items:
            if k == i:
                return v
        return default

    def as_dict(self) -> dict:
        return dict(self.items)

    @property
    def support(self) -> tuple:
        return tuple(k for k, _ in self.items)

    @property
    def range(self) -> tuple:
        return tuple(v for _, v in self.items)

    def __len__(self):
        return len(self.items)

    def __bool__(self):
        return bool(self.items)


EMPTY = Subst()


def _refine(syms: Sequence, kids: Sequence[Sequence[int]]) -> list[int]:
    """Coarsest stable partition of a labelled ordered graph (Moore style)."""
    ids: dict = {}
    block = [ids.setdefault(("s", s), len(ids)) for s in syms]
    count = len(ids)
    while True:
        ids = {}
        new = [ids.setdefault((block[i], tuple(block[k] for k in kids[i])), len(ids))
               for i in range(len(syms))]
        if len(ids) == count:
            return new
        block, count = new, len(ids)


def _canonical_key(root, sym_of, kids_of) -> tuple:
    """Preorder DFS numbering of the graph reachable from ``root``."""
    number = {root: 0}
    order = [root]
    stack = [root]
    while stack:
        n = stack.pop()
        for c in reversed(kids_of(n)):
            if c not in number:
                number[c] = len(order)
                order.append(c)
                stack.append(c)
    # numbering above is a DFS discovery order; it is deterministic in the
    # structure, which is all a key needs
    return tuple((sym_of(n), tuple(number[c] for c in kids_of(n))) for n in order)


class TermStore:
    """Append-only store of canonical regular-term nodes."""

    def __init__(self):
        self._sym: list = []
        self._kids: list[tuple] = []
        self._index: dict = {}
        self._cyc_keys: dict = {}
        self._arity: dict[str, int] = {}
        self._vars: dict[Handle, frozenset] = {}
        self._depth: dict[Handle, float] = {}
        self._size: dict[Handle, int] = {}

    # construction

    def __len__(self):
        return len(self._sym)

    def declare(self, name: str, arity: int) -> None:
        old = self._arity.get(name)
        if old is not None and old != arity:
            raise ArityError(f"{name} has arity {old}, not {arity}")
        self._arity[name] = arity

    def arity(self, name: str) -> int | None:
        return self._arity.get(name)

    def _new(self, sym, kids: tuple) -> Handle:
        h = len(self._sym)
        self._sym.append(sym)
        self._kids.append(kids)
        self._index[(sym, kids)] = h
        return h

    def var(self, i: int) -> Handle:
        if not isinstance(i, int) or i < 1:
            raise TermError(f"variable index must be >= 1, got {i!r}")
        h = self._index.get((i, ()))
        return h if h is not None else self._new(i, ())

    def app(self, name: str, children: Sequence[Handle] = ()) -> Handle:
        kids = tuple(children)
        self.declare(name, len(kids))
        for c in kids:
            self._check(c)
        h = self._index.get((name, kids))
        return h if h is not None else self._new(name, kids)

    def _check(self, h: Handle) -> None:
        if not (isinstance(h, int) and 0 <= h < len(self._sym)):
            raise TermError(f"handle {h!r} does not belong to this store")

    # accessors

    def is_var(self, h: Handle) -> bool:
        return isinstance(self._sym[h], int)

    def var_index(self, h: Handle) -> int | None:
        s = self._sym[h]
        return s if isinstance(s, int) else None

    def root(self, h: Handle):
        """Nonterminal name, or the variable index for a variable leaf."""
        return self._sym[h]

    def children(self, h: Handle) -> tuple:
        return self._kids[h]

    def label(self, h: Handle) -> str:
        s = self._sym[h]
        return f"x{s}" if isinstance(s, int) else s

    # graph interning

    def intern_graph(self, nodes: Sequence, root: int = 0) -> Handle:
        return self.intern_graph_all(nodes)[root]

    def intern_graph_all(self, nodes: Sequence) -> list[Handle]:
        """Intern a graph presentation; returns the handle of every node.

        ``nodes[i]`` is ``(sym, kids)`` with local child indices, or
        ``("@", handle)`` for a reference to an existing term.
        """
        syms: list = []
        kids: list = []
        pinned: dict[int, Handle] = {}
        slot: dict[Handle, int] = {}

        def pin(h: Handle) -> int:
            if h in slot:
                return slot[h]
            self._check(h)
            # copy the stored subgraph so refinement can see through references
            todo = [h]
            slot[h] = len(syms)
            syms.append(None)
            kids.append(None)
            while todo:
                n = todo.pop()
                for c in self._kids[n]:
                    if c not in slot:
                        slot[c] = len(syms)
                        syms.append(None)
                        kids.append(None)
                        todo.append(c)
                j = slot[n]
                syms[j] = self._sym[n]
                kids[j] = [slot[c] for c in self._kids[n]]
                pinned[j] = n
            return slot[h]

        n_local = len(nodes)
        syms.extend([None] * n_local)
        kids.extend([None] * n_local)
        alias: dict[int, int] = {}
        for i, node in enumerate(nodes):
            if node[0] == "@":
                alias[i] = pin(node[1])
            else:
                sym, ks = node
                if isinstance(sym, str):
                    self.declare(sym, len(ks))
                elif not (isinstance(sym, int) and sym >= 1) or ks:
                    raise TermError(f"bad node {node!r}")
                syms[i] = sym
                kids[i] = list(ks)
        for i in range(n_local):
            if i in alias:
                syms[i] = "@alias"
                kids[i] = []
            else:
                for k in kids[i]:
                    if not 0 <= k < n_local:
                        raise TermError(f"dangling child index {k}")
                kids[i] = [alias.get(k, k) for k in kids[i]]
        live = [i for i in range(len(syms)) if i not in alias]
        pos = {i: p for p, i in enumerate(live)}
        block = _refine([syms[i] for i in live], [[pos[k] for k in kids[i]] for i in live])

        cls_handle: dict[int, Handle] = {}
        rep: dict[int, int] = {}
        for p, i in enumerate(live):
            b = block[p]
            rep.setdefault(b, i)
            if i in pinned:
                cls_handle[b] = pinned[i]
        cls_sym = {b: syms[i] for b, i in rep.items()}
        cls_kids = {b: tuple(block[pos[k]] for k in kids[i]) for b, i in rep.items()}

        for scc in _sccs([b for b in rep if b not in cls_handle],
                         lambda b: [c for c in cls_kids[b] if c not in cls_handle]):
            self._resolve_scc(scc, cls_sym, cls_kids, cls_handle)

        out = []
        for i in range(n_local):
            j = alias.get(i, i)
            out.append(cls_handle[block[pos[j]]])
        return out

    def _resolve_scc(self, scc, cls_sym, cls_kids, cls_handle) -> None:
        if len(scc) == 1 and scc[0] not in cls_kids[scc[0]]:
            b = scc[0]
            ks = tuple(cls_handle[c] for c in cls_kids[b])
            key = (cls_sym[b], ks)
            h = self._index.get(key)
            cls_handle[b] = h if h is not None else self._new(*key)
            return
        members = set(scc)

        def sym_of(n):
            return self._sym[n[1]] if n[0] == "h" else cls_sym[n[1]]

        def kids_of(n):
            if n[0] == "h":
                return [("h", c) for c in self._kids[n[1]]]
            return [("c", c) if c in members else ("h", cls_handle[c]) for c in cls_kids[n[1]]]

        start = min(scc)
        found = self._cyc_keys.get(_canonical_key(("c", start), sym_of, kids_of))
        if found is not None:
            todo = [(start, found)]
            while todo:
                b, h = todo.pop()
                if b in cls_handle:
                    continue
                cls_handle[b] = h
                for c, hc in zip(cls_kids[b], self._kids[h]):
                    if c in members and c not in cls_handle:
                        todo.append((c, hc))
            return
        for b in sorted(scc):
            cls_handle[b] = len(self._sym)
            self._sym.append(cls_sym[b])
            self._kids.append(())
        for b in sorted(scc):
            h = cls_handle[b]
            self._kids[h] = tuple(cls_handle[c] for c in cls_kids[b])
            self._index[(self._sym[h], self._kids[h])] = h
        for b in sorted(scc):
            h = cls_handle[b]
            self._cyc_keys[self._key(h)] = h

    def _key(self, h: Handle) -> tuple:
        return _canonical_key(h, self._sym.__getitem__, self._kids.__getitem__)

    def canonicalize(self, t) -> Handle:
        """Handle of the minimal presentation.

        Handles are canonical on creation, so a handle maps to itself; a
        ``(nodes, root)`` graph presentation is minimized and interned.
        """
        if isinstance(t, tuple):
            nodes, root = t
            return self.intern_graph(nodes, root)
        self._check(t)
        return t

    # measurement

    def subterms(self, h: Handle) -> list[Handle]:
        seen = {h}
        order = [h]
        stack = [h]
        while stack:
            n = stack.pop()
            for c in self._kids[n]:
                if c not in seen:
                    seen.add(c)
                    order.append(c)
                    stack.append(c)
        return order

    def pressize(self, *hs: Handle) -> int:
        total = 0
        for h in hs:
            s = self._size.get(h)
            if s is None:
                s = self._size[h] = len(self.subterms(h))
            total += s
        return total

    def vars(self, h: Handle) -> frozenset:
        v = self._vars.get(h)
        if v is None:
            v = frozenset(self._sym[n] for n in self.subterms(h) if isinstance(self._sym[n], int))
            self._vars[h] = v
        return v

    def depth(self, h: Handle) -> float:
        """Height of the term; ``INFINITE`` when the graph has a cycle."""
        d = self._depth.get(h)
        if d is not None:
            return d
        # iterative post-order with grey marking for cycle detection
        state: dict[Handle, int] = {}
        stack = [(h, 0)]
        while stack:
            n, i = stack.pop()
            if n in self._depth:
                continue
            ks = self._kids[n]
            if i == 0:
                state[n] = 1
            if i < len(ks):
                stack.append((n, i + 1))
                c = ks[i]
                if c in self._depth:
                    continue
                if state.get(c) == 1:
                    for m, _ in stack:
                        self._depth[m] = INFINITE
                    self._depth[c] = INFINITE
                    break
                stack.append((c, 0))
            else:
                state[n] = 2
                self._depth[n] = 0 if not ks else 1 + max(self._depth[c] for c in ks)
        if h not in self._depth:
            # cycle found on a branch that did not include h's own stack frame
            self._depth[h] = INFINITE if any(self.depth(c) == INFINITE for c in self._kids[h]) \
                else 0 if not self._kids[h] else 1 + max(self.depth(c) for c in self._kids[h])
        return self._depth[h]

    def is_finite(self, h: Handle) -> bool:
        return self.depth(h) != INFINITE

    def occurrences_at(self, h: Handle, d: int) -> list[Handle]:
        """Subterm occurrences at depth ``d`` of the unfolding (with repeats)."""
        level = [h]
        for _ in range(d):
            level = [c for n in level for c in self._kids[n]]
        return level

    # substitutions

    def subst(self, mapping) -> Subst:
        """Build a substitution, dropping identity entries."""
        pairs = mapping.items() if isinstance(mapping, Mapping) else mapping
        out = {}
        for i, t in pairs:
            self._check(t)
            if self._sym[t] != i:
                out[i] = t
        return Subst.of(out)

    def apply(self, h: Handle, sigma: Subst) -> Handle:
        if not sigma:
            return h
        m = sigma.as_dict()
        if not (self.vars(h) & m.keys()):
            return h
        if self.depth(h) != INFINITE:
            memo: dict[Handle, Handle] = {}

            def go(n: Handle) -> Handle:
                r = memo.get(n)
                if r is None:
                    s = self._sym[n]
                    if isinstance(s, int):
                        r = m.get(s, n)
                    elif not (self.vars(n) & m.keys()):
                        r = n
                    else:
                        r = self.app(s, [go(c) for c in self._kids[n]])
                    memo[n] = r
                return r

            return go(h)
        sub = self.subterms(h)
        pos = {n: i for i, n in enumerate(sub)}
        nodes = []
        for n in sub:
            s = self._sym[n]
            if isinstance(s, int) and s in m:
                nodes.append(("@", m[s]))
            else:
                nodes.append((s, [pos[c] for c in self._kids[n]]))
        return self.intern_graph(nodes, 0)

    def compose(self, s1: Subst, s2: Subst) -> Subst:
        """Substitution with x(s1 s2) = (x s1) s2."""
        out = {i: self.apply(t, s2) for i, t in s1.items}
        for i, t in s2.items:
            out.setdefault(i, t)
        return self.subst(out)

    def limit(self, i: int, h: Handle) -> Handle:
        """The term H' = H{x_i -> H'}; arcs into x_i are bent to the root."""
        if self._sym[h] == i or i not in self.vars(h):
            return h
        sub = self.subterms(h)
        pos = {n: k for k, n in enumerate(sub)}
        nodes = []
        for n in sub:
            ks = [0 if self._sym[c] == i else pos[c] for c in self._kids[n]]
            nodes.append((self._sym[n], ks))
        return self.intern_graph(nodes, 0)

    @staticmethod
    def remove_from_support(sigma: Subst, i: int) -> Subst:
        return Subst(tuple((k, v) for k, v in sigma.items if k != i))

    # text syntax

    def parse(self, text: str) -> Handle:
        return self.build(parse_term_ast(text))

    def build(self, ast) -> Handle:
        if not _has_rec(ast):
            return self._build_plain(ast)
        nodes: list = []
        alias: dict[int, int] = {}

        def visit(a, env) -> int:
            kind = a[0]
            if kind == "var":
                nodes.append((a[1], []))
                return len(nodes) - 1
            if kind == "ref":
                return env[a[1]]
            if kind == "rec":
                me = len(nodes)
                nodes.append(None)
                alias[me] = visit(a[2], {**env, a[1]: me})
                return me
            me = len(nodes)
            nodes.append(None)
            nodes[me] = (a[1], [visit(b, env) for b in a[2]])
            return me

        root = visit(ast, {})

        def find(i):
            seen = set()
            while i in alias:
                if i in seen:
                    raise TermSyntaxError("unguarded recursion")
                seen.add(i)
                i = alias[i]
            return i

        # binder slots are placeholders; drop them before interning
        keep = [i for i in range(len(nodes)) if i not in alias]
        pos = {i: p for p, i in enumerate(keep)}
        packed = [(nodes[i][0], [pos[find(k)] for k in nodes[i][1]]) for i in keep]
        return self.intern_graph(packed, pos[find(root)])

    def _build_plain(self, a) -> Handle:
        if a[0] == "var":
            return self.var(a[1])
        if a[0] != "app":
            raise TermSyntaxError(f"unexpected {a[0]} node")
        return self.app(a[1], [self._build_plain(b) for b in a[2]])

    def text_size(self, h: Handle, limit: int = 1_000_000) -> int:
        """Number of symbols ``render`` would emit, capped at ``limit + 1``."""
        fin: dict[Handle, int] = {}

        def finite_size(n: Handle) -> int:
            if n not in fin:
                for m in sorted(self.subterms(n), key=self.depth):
                    if m not in fin:
                        fin[m] = min(limit + 1, 1 + sum(fin[c] for c in self._kids[m]))
            return fin[n]

        total = 0
        stack = [(h, frozenset())]
        while stack and total <= limit:
            n, path = stack.pop()
            if n in path:
                total += 1
            elif self.depth(n) != INFINITE:
                total += finite_size(n)
            else:
                total += 1
                stack.extend((c, path | {n}) for c in self._kids[n])
        return min(total, limit + 1)

    def render(self, h: Handle) -> str:
        """Text form; cyclic terms get binders r1, r2, ... in DFS order."""
        parts: list = []
        counter = [0]
        used: set[int] = set()

        def go(n: Handle, stack: dict[Handle, int]):
            if n in stack:
                used.add(stack[n])
                parts.append(("ref", stack[n]))
                return
            s = self._sym[n]
            if isinstance(s, int):
                parts.append(f"x{s}")
                return
            occ = counter[0]
            counter[0] += 1
            cyclic = self.depth(n) == INFINITE
            if cyclic:
                parts.append(("bind", occ))
                stack[n] = occ
            parts.append(s)
            ks = self._kids[n]
            if ks:
                parts.append("(")
                for j, c in enumerate(ks):
                    if j:
                        parts.append(", ")
                    go(c, stack)
                parts.append(")")
            if cyclic:
                del stack[n]

        go(h, {})
        names = {occ: f"r{k + 1}" for k, occ in enumerate(sorted(used))}
        out = []
        for p in parts:
            if isinstance(p, tuple):
                if p[0] == "bind":
                    if p[1] in names:
                        out.append(f"rec {names[p[1]]} . ")
                else:
                    out.append(names[p[1]])
            else:
                out.append(p)
        return "".join(out)


def _sccs(nodes: list, succ) -> list[list]:
    """Tarjan's algorithm; components come out children-first."""
    index: dict = {}
    low: dict = {}
    on: set = set()
    stack: list = []
    out: list = []
    counter = 0
    for v0 in nodes:
        if v0 in index:
            continue
        work = [(v0, iter(succ(v0)))]
        index[v0] = low[v0] = counter
        counter += 1
        stack.append(v0)
        on.add(v0)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


# parsing

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<p>[(),.]))")
_VAR = re.compile(r"x([1-9][0-9]*)$")


def _tokens(text: str, line: int = 1, col0: int = 1):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:]
            if rest.strip():
                off = pos + len(rest) - len(rest.lstrip())
                raise TermSyntaxError(f"unexpected character {text[off]!r}", line, col0 + off)
            break
        kind = "id" if m.group("id") else "p"
        tok = m.group(kind)
        out.append((tok, col0 + m.start(kind)))
        pos = m.end()
    return out


def _has_rec(a) -> bool:
    if a[0] in ("rec", "ref"):
        return True
    return a[0] == "app" and any(_has_rec(b) for b in a[2])


def parse_term_ast(text: str, line: int = 1, col: int = 1, allow_rec: bool = True):
    """Parse the term syntax into a nested-tuple AST.

    Nodes: ``("var", i)``, ``("app", name, [args])``, ``("rec", name, body)``,
    ``("ref", name)``.
    """
    toks = _tokens(text, line, col)
    i = 0

    def peek():
        return toks[i][0] if i < len(toks) else None

    def where():
        return toks[i][1] if i < len(toks) else col + len(text)

    def expect(t):
        nonlocal i
        if peek() != t:
            raise TermSyntaxError(f"expected {t!r}, got {peek()!r}", line, where())
        i += 1

    def term(env):
        nonlocal i
        tok = peek()
        if tok is None or tok in "(),.":
            raise TermSyntaxError(f"expected a term, got {tok!r}", line, where())
        c = where()
        i += 1
        if tok == "rec":
            if not allow_rec:
                raise TermSyntaxError("rec binder not allowed here", line, c)
            name = peek()
            if name is None or name in "(),." or _VAR.match(name) or name == "rec":
                raise TermSyntaxError("expected a binder name after rec", line, where())
            i += 1
            expect(".")
            return ("rec", name, term(env | {name}))
        m = _VAR.match(tok)
        if m:
            return ("var", int(m.group(1)))
        if re.fullmatch(r"x[0-9]+", tok):
            raise TermSyntaxError(f"{tok} is not a variable (indices start at 1)", line, c)
        if tok in env:
            if peek() == "(":
                raise TermSyntaxError(f"binder {tok} cannot take arguments", line, where())
            return ("ref", tok)
        args = []
        if peek() == "(":
            i += 1
            if peek() != ")":
                args.append(term(env))
                while peek() == ",":
                    i += 1
                    args.append(term(env))
            expect(")")
        return ("app", tok, args)

    ast = term(frozenset())
    if i != len(toks):
        raise TermSyntaxError(f"trailing input {peek()!r}", line, where())
    return ast


def ast_symbols(ast, out: dict | None = None) -> dict:
    """Map nonterminal name -> set of arities used in an AST."""
    out = {} if out is None else out
    if ast[0] == "app":
        out.setdefault(ast[1], set()).add(len(ast[2]))
        for b in ast[2]:
            ast_symbols(b, out)
    elif ast[0] == "rec":
        ast_symbols(ast[2], out)
    return out


def ast_vars(ast) -> set:
    if ast[0] == "var":
        return {ast[1]}
    if ast[0] == "app":
        return set().union(*[ast_vars(b) for b in ast[2]]) if ast[2] else set()
    if ast[0] == "rec":
        return ast_vars(ast[2])
    return set()
