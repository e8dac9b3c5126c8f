"""First-order grammars and their rule-based / action-based transition systems."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from .terms import (
    INFINITE,
    Handle,
    Subst,
    TermStore,
    TermSyntaxError,
    ast_symbols,
    ast_vars,
    parse_term_ast,
)


class GrammarError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class MissingSinkWord(ValueError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.level}: {self.message}"


@dataclass(frozen=True)
class Rule:
    id: int
    lhs: str
    action: str
    rhs: Handle
    line: int = 0


def var_action(i: int) -> str:
    return f"@x{i}"


@dataclass
class Grammar:
    store: TermStore
    nonterminals: dict  # name -> arity, declaration order
    actions: list
    rules: list
    diagnostics: list = field(default_factory=list)
    _raw: list = field(default_factory=list, repr=False)

    @cached_property
    def by_lhs(self) -> dict:
        out = {A: [] for A in self.nonterminals}
        for r in self.rules:
            out.setdefault(r.lhs, []).append(r)
        return out

    @cached_property
    def rule(self) -> dict:
        return {r.id: r for r in self.rules}

    @cached_property
    def max_arity(self) -> int:
        return max(self.nonterminals.values(), default=0)

    def lhs_term(self, A: str) -> Handle:
        return self.store.app(A, [self.store.var(i) for i in range(1, self.nonterminals[A] + 1)])

    def term(self, text: str) -> Handle:
        ast = parse_term_ast(text)
        for name, ars in ast_symbols(ast).items():
            if name not in self.nonterminals:
                raise GrammarError([Diagnostic("error", 0, f"undeclared nonterminal {name}")])
            if ars != {self.nonterminals[name]}:
                raise GrammarError([Diagnostic(
                    "error", 0, f"{name} used with arity {sorted(ars)}, declared {self.nonterminals[name]}")])
        return self.store.build(ast)

    def render(self, h: Handle) -> str:
        return self.store.render(h)

    def dump(self) -> str:
        lines = [f"nonterminal {A} {m}" for A, m in self.nonterminals.items()]
        lines += [f"action {a}" for a in self.actions]
        for r in self.rules:
            m = self.nonterminals[r.lhs]
            args = ",".join(f"x{i}" for i in range(1, m + 1))
            lhs = f"{r.lhs}({args})" if m else r.lhs
            lines.append(f"rule {lhs} {r.action} {self.store.render(r.rhs)}")
        return "\n".join(lines) + "\n"

    # cached transitions

    @cached_property
    def _step_cache(self) -> dict:
        return {}

    def steps_rule(self, t: Handle) -> list:
        """All rule-based successors ``(rule, target)`` in rule-id order."""
        hit = self._step_cache.get(t)
        if hit is not None:
            return hit
        s = self.store
        sym = s.root(t)
        out = []
        if isinstance(sym, str):
            kids = s.children(t)
            sigma = Subst(tuple((i + 1, c) for i, c in enumerate(kids)))
            for r in self.by_lhs.get(sym, ()):
                out.append((r, s.apply(r.rhs, sigma)))
        self._step_cache[t] = out
        return out


# parsing

_LHS = re.compile(r"^([A-Za-z_][A-Za-z0-9_']*)\s*(?:\(([^)]*)\))?$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")


def _split_rule(body: str):
    """Split ``A(x1,...) act rhs`` into its three parts."""
    depth = 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch.isspace() and depth == 0:
            lhs = body[:i]
            rest = body[i:].lstrip()
            parts = rest.split(None, 1)
            if len(parts) < 2:
                break
            return lhs, parts[0], parts[1], i + (len(body[i:]) - len(rest)) + len(parts[0])
    raise TermSyntaxError("rule needs a left-hand side, an action and a right-hand side")


def parse_grammar(text: str, store: TermStore | None = None, strict: bool = True) -> Grammar:
    """Parse the line-oriented grammar format.

    Syntax errors raise :class:`TermSyntaxError` with line/column. Semantic
    problems are collected as diagnostics; with ``strict`` any error-level
    diagnostic raises :class:`GrammarError`.
    """
    store = store or TermStore()
    nts: dict[str, int] = {}
    acts: list[str] = []
    raw = []
    diags: list[Diagnostic] = []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        col0 = line.index(body) + 1
        kw, _, rest = body.partition(" ")
        rest = rest.strip()
        if kw == "nonterminal":
            parts = rest.split()
            if len(parts) != 2 or not _NAME.match(parts[0]) or not parts[1].isdigit():
                raise TermSyntaxError("expected: nonterminal <name> <arity>", ln, col0)
            name, ar = parts[0], int(parts[1])
            if re.fullmatch(r"x[1-9][0-9]*", name) or name == "rec":
                raise TermSyntaxError(f"reserved name {name}", ln, col0)
            if name in nts and nts[name] != ar:
                diags.append(Diagnostic("error", ln, f"{name} redeclared with arity {ar}"))
            nts.setdefault(name, ar)
        elif kw == "action":
            parts = rest.split()
            if len(parts) != 1 or parts[0].startswith("@"):
                raise TermSyntaxError("expected: action <name> (names starting with @ are reserved)",
                                      ln, col0)
            if parts[0] not in acts:
                acts.append(parts[0])
        elif kw == "rule":
            lhs_txt, act, rhs_txt, rhs_off = _split_rule(rest)
            m = _LHS.match(lhs_txt.strip())
            if not m:
                raise TermSyntaxError(f"bad left-hand side {lhs_txt!r}", ln, col0)
            params = [p.strip() for p in m.group(2).split(",")] if m.group(2) and m.group(2).strip() else []
            rhs_col = col0 + len(kw) + 1 + (len(rest) - len(rest.lstrip())) + rhs_off + 1
            ast = parse_term_ast(rhs_txt, ln, rhs_col, allow_rec=False)
            raw.append((ln, m.group(1), params, act, ast))
        else:
            raise TermSyntaxError(f"unknown directive {kw!r}", ln, col0)

    rules = []
    for ln, A, params, act, ast in raw:
        bad = False
        if A not in nts:
            diags.append(Diagnostic("error", ln, f"undeclared nonterminal {A}"))
            bad = True
        else:
            want = [f"x{i}" for i in range(1, nts[A] + 1)]
            if params != want:
                diags.append(Diagnostic("error", ln, f"left-hand side must be {A}({','.join(want)})"))
                bad = True
        if act not in acts:
            diags.append(Diagnostic("error", ln, f"undeclared action {act}"))
            bad = True
        for name, ars in sorted(ast_symbols(ast).items()):
            if name not in nts:
                diags.append(Diagnostic("error", ln, f"undeclared nonterminal {name}"))
                bad = True
            elif ars != {nts[name]}:
                diags.append(Diagnostic("error", ln, f"{name} used with arity {sorted(ars)}, declared {nts[name]}"))
                bad = True
        m = nts.get(A, 0)
        for v in sorted(ast_vars(ast)):
            if v > m:
                diags.append(Diagnostic("error", ln, f"variable x{v} outside x1..x{m}"))
                bad = True
        if bad:
            continue
        for name, ar in nts.items():
            store.declare(name, ar)
        rules.append(Rule(len(rules) + 1, A, act, store.build(ast), ln))
    for name, ar in nts.items():
        store.declare(name, ar)
    g = Grammar(store, nts, acts, rules, diags, raw)
    dead = [A for A in nts if not g.by_lhs.get(A)]
    for A in dead:
        g.diagnostics.append(Diagnostic("warning", 0, f"nonterminal {A} has no rules (dead)"))
    if strict and any(d.level == "error" for d in g.diagnostics):
        raise GrammarError([d for d in g.diagnostics if d.level == "error"])
    return g


def validate(g: Grammar) -> list:
    """Diagnostics collected while parsing (errors and warnings)."""
    return list(g.diagnostics)


def make_grammar(nonterminals: dict, rules: list, store: TermStore | None = None) -> Grammar:
    """Programmatic constructor; ``rules`` holds ``(lhs, action, rhs_text)``."""
    lines = [f"nonterminal {A} {m}" for A, m in nonterminals.items()]
    acts = []
    for _, a, _ in rules:
        if a not in acts:
            acts.append(a)
    lines += [f"action {a}" for a in acts]
    for A, a, rhs in rules:
        m = nonterminals[A]
        lhs = f"{A}({','.join(f'x{i}' for i in range(1, m + 1))})" if m else A
        lines.append(f"rule {lhs} {a} {rhs}")
    return parse_grammar("\n".join(lines), store)


# LTS semantics

def step_rule(g: Grammar, t: Handle, rule) -> Handle | None:
    rid = rule if isinstance(rule, int) else rule.id
    for r, target in g.steps_rule(t):
        if r.id == rid:
            return target
    return None


def steps_action(g: Grammar, t: Handle) -> list:
    """Action-based successors; a variable x_i only loops on ``@x<i>``."""
    i = g.store.var_index(t)
    if i is not None:
        return [(var_action(i), t)]
    return [(r.action, target) for r, target in g.steps_rule(t)]


def path(g: Grammar, t: Handle, word) -> Handle | None:
    for rid in word:
        t = step_rule(g, t, rid)
        if t is None:
            return None
    return t


def path_terms(g: Grammar, t: Handle, word) -> list | None:
    out = [t]
    for rid in word:
        t = step_rule(g, t, rid)
        if t is None:
            return None
        out.append(t)
    return out


def reachable(g: Grammar, t: Handle, limit: int) -> dict:
    """Terms reachable within ``limit`` rule steps, with a shortest word each.

    Breadth-first with successors in rule-id order, so the recorded word is
    the lexicographically least among shortest ones.
    """
    seen = {t: ()}
    frontier = [t]
    for _ in range(limit):
        nxt = []
        for u in frontier:
            for r, v in g.steps_rule(u):
                if v not in seen:
                    seen[v] = seen[u] + (r.id,)
                    nxt.append(v)
        if not nxt:
            break
        frontier = nxt
    return seen


# sink words

class SinkWords:
    """Shortest (A,i)-sink words; lengths eager, words rebuilt on demand."""

    def __init__(self, g: Grammar):
        self.g = g
        self.length: dict = {}
        self._words: dict = {}
        self._solve()

    def _cost(self, t: Handle, i: int) -> float:
        """Length of the shortest word taking a rule rhs to x_i."""
        s = self.g.store
        sym = s.root(t)
        if isinstance(sym, int):
            return 0 if sym == i else INFINITE
        best = INFINITE
        for j, c in enumerate(s.children(t), start=1):
            if i in s.vars(c):
                best = min(best, self.length.get((sym, j), INFINITE) + self._cost(c, i))
        return best

    def _solve(self):
        g = self.g
        changed = True
        while changed:
            changed = False
            for A, m in g.nonterminals.items():
                for i in range(1, m + 1):
                    best = min((1 + self._cost(r.rhs, i) for r in g.by_lhs.get(A, ())),
                               default=INFINITE)
                    if best < self.length.get((A, i), INFINITE):
                        self.length[(A, i)] = best
                        changed = True
        self.length = {k: int(v) for k, v in self.length.items() if v != INFINITE}

    def has(self, A: str, i: int) -> bool:
        return (A, i) in self.length

    def word(self, A: str, i: int) -> tuple | None:
        if (A, i) not in self.length:
            return None
        w = self._words.get((A, i))
        if w is None:
            target = self.length[(A, i)]
            cands = []
            for r in self.g.by_lhs.get(A, ()):
                if 1 + self._cost(r.rhs, i) == target:
                    cands.append((r.id,) + self._expr_word(r.rhs, i))
            w = min(cands)
            self._words[(A, i)] = w
        return w

    def _expr_word(self, t: Handle, i: int) -> tuple:
        s = self.g.store
        sym = s.root(t)
        if isinstance(sym, int):
            return ()
        target = self._cost(t, i)
        cands = []
        for j, c in enumerate(s.children(t), start=1):
            if i in s.vars(c) and (sym, j) in self.length:
                if self.length[(sym, j)] + self._cost(c, i) == target:
                    cands.append(self.word(sym, j) + self._expr_word(c, i))
        return min(cands)

    def max_length(self) -> int:
        return max(self.length.values(), default=0)

    def missing(self) -> list:
        return [(A, i) for A, m in self.g.nonterminals.items()
                for i in range(1, m + 1) if (A, i) not in self.length]

    def to_json(self) -> dict:
        out = {}
        for A, m in self.g.nonterminals.items():
            for i in range(1, m + 1):
                w = self.word(A, i)
                out[f"{A}.{i}"] = None if w is None else {"len": len(w), "word": list(w)}
        return out


def sink_words(g: Grammar) -> SinkWords:
    sw = getattr(g, "_sink_words", None)
    if sw is None:
        sw = SinkWords(g)
        g._sink_words = sw
    return sw


def reduce_arities(g: Grammar) -> Grammar:
    """Drop root-successor positions that no sink word can expose."""
    sw = sink_words(g)
    keep = {A: [i for i in range(1, m + 1) if sw.has(A, i)] for A, m in g.nonterminals.items()}
    if all(len(keep[A]) == m for A, m in g.nonterminals.items()):
        return g
    store = TermStore()
    return _rebuild(g, store, keep)


def _rebuild(g: Grammar, store: TermStore, keep: dict) -> Grammar:
    nts = {A: len(keep[A]) for A in g.nonterminals}
    for A, m in nts.items():
        store.declare(A, m)
    rules = []
    for r in g.rules:
        renum = {old: new for new, old in enumerate(keep[r.lhs], start=1)}
        rhs = project_term(g, store, keep, r.rhs, renum)
        rules.append(Rule(r.id, r.lhs, r.action, rhs, r.line))
    out = Grammar(store, nts, list(g.actions), rules, [d for d in g.diagnostics])
    out._keep = keep
    return out


def project_term(g: Grammar, store: TermStore, keep: dict, t: Handle, renum: dict | None = None) -> Handle:
    """Image of a term of ``g`` after deleting positions not in ``keep``."""
    src = g.store
    sub = src.subterms(t)
    pos = {n: k for k, n in enumerate(sub)}
    nodes = []
    for n in sub:
        sym = src.root(n)
        if isinstance(sym, int):
            nodes.append((renum.get(sym, sym) if renum else sym, []))
        else:
            kids = src.children(n)
            nodes.append((sym, [pos[kids[i - 1]] for i in keep[sym]]))
    return store.intern_graph(nodes, 0)


def project_for(g_reduced: Grammar, g: Grammar, t: Handle) -> Handle:
    """Map a term of ``g`` into the arity-reduced grammar ``g_reduced``."""
    keep = getattr(g_reduced, "_keep", None)
    if keep is None:
        return t
    return project_term(g, g_reduced.store, keep, t)


# constants

@dataclass(frozen=True)
class ExactPower:
    """An exact natural ``base ** exponent`` kept unevaluated until asked."""

    base: int
    exponent: int

    @cached_property
    def value(self) -> int:
        return self.base ** self.exponent

    def bit_length(self) -> int:
        if self.base <= 1:
            return self.base
        return (self.base.bit_length() - 1) * self.exponent + 1 if self.base & (self.base - 1) == 0 \
            else self.value.bit_length()

    def __str__(self):
        if self.base <= 1 or self.exponent < 64:
            return str(self.value)
        return f"{self.base}^{self.exponent}"


@dataclass(frozen=True)
class GrammarConstants:
    M0: int
    Mprime0: int
    M1: int
    maxruleheight: int
    sizeinc: int
    n0: ExactPower
    arity_max: int

    def to_json(self) -> dict:
        return {"M0": self.M0, "Mprime0": self.Mprime0, "M1": self.M1,
                "maxruleheight": self.maxruleheight, "sizeinc": self.sizeinc,
                "n0": str(self.n0), "arity_max": self.arity_max}


def maxruleheight(g: Grammar) -> int:
    return max((int(g.store.depth(r.rhs)) for r in g.rules), default=0)


def sizeinc(g: Grammar) -> int:
    return max((g.store.pressize(r.rhs) for r in g.rules), default=0)


def constants(g: Grammar) -> GrammarConstants:
    sw = sink_words(g)
    missing = sw.missing()
    if missing:
        raise MissingSinkWord(f"no sink word for {missing}; reduce arities first")
    M0 = 1 + sw.max_length()
    mrh = maxruleheight(g)
    Mp0 = (1 + M0) * mrh
    M1 = M0 * (Mp0 + 1)
    m = g.max_arity
    return GrammarConstants(M0, Mp0, M1, mrh, sizeinc(g), ExactPower(m, M1), m)


# path classification

@dataclass(frozen=True)
class PathClass:
    sinking: bool
    first_nonsink: int | None = None
    last_nonsink: int | None = None


def is_root_performable(g: Grammar, A: str, word) -> bool:
    return path(g, g.lhs_term(A), word) is not None


def classify_path(g: Grammar, t: Handle, word, M0: int | None = None) -> PathClass:
    word = tuple(word)
    if M0 is None:
        M0 = 1 + sink_words(g).max_length()
    terms = path_terms(g, t, word)
    if terms is None:
        raise ValueError("word is not performable from the term")
    hits = []
    for k in range(0, len(word) - M0 + 1):
        sym = g.store.root(terms[k])
        if isinstance(sym, str) and is_root_performable(g, sym, word[k:k + M0]):
            hits.append(k)
    if not hits:
        return PathClass(True)
    return PathClass(False, hits[0], hits[-1])


def split_last_nonsink(g: Grammar, t: Handle, word, M0: int | None = None):
    """Write the target as G sigma where sigma ranges over root-successors of
    the term at the start of the last non-sink window."""
    word = tuple(word)
    pc = classify_path(g, t, word, M0)
    if pc.sinking:
        raise ValueError("path is sinking; nothing to split")
    k = pc.last_nonsink
    V = path(g, t, word[:k])
    A = g.store.root(V)
    G = path(g, g.lhs_term(A), word[k:])
    if G is None:
        raise ValueError("suffix after the last non-sink is not root-performable (path not shortest)")
    sigma = g.store.subst({i: c for i, c in enumerate(g.store.children(V), start=1)})
    return G, sigma
