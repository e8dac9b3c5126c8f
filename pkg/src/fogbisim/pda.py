"""Pushdown automata and their first-order grammar encoding."""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field

from .grammar import Grammar, parse_grammar, steps_action
from .terms import Handle, TermStore, TermSyntaxError

EPS = "eps"
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")


class PdaError(ValueError):
    pass


@dataclass(frozen=True)
class PdaRule:
    state: str
    top: str
    action: str  # EPS for an epsilon move
    target: str
    push: tuple

    def __str__(self):
        return f'pdarule {self.state} {self.top} {self.action} {self.target} "{" ".join(self.push)}"'


@dataclass(frozen=True)
class Config:
    """State plus stack contents, top first; the bottom marker is implicit."""

    state: str
    stack: tuple = ()

    def __str__(self):
        return f"{self.state}{''.join(' ' + s for s in self.stack)} ⊥"


@dataclass
class Pda:
    states: list
    stack: list
    actions: list
    rules: list = field(default_factory=list)

    def rules_for(self, state: str, top: str) -> list:
        return [r for r in self.rules if r.state == state and r.top == top]

    def swallowable(self) -> dict:
        """(p, X) -> q for every deterministic popping epsilon rule."""
        out = {}
        for r in self.rules:
            if r.action == EPS and not r.push and len(self.rules_for(r.state, r.top)) == 1:
                out[(r.state, r.top)] = r.target
        return out

    def bad_eps(self) -> list:
        sw = self.swallowable()
        return [r for r in self.rules if r.action == EPS and (r.state, r.top) not in sw]


def parse_pda(text: str) -> Pda:
    states, stack, actions, raw = [], [], [], []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            parts = shlex.split(body)
        except ValueError as exc:
            raise TermSyntaxError(str(exc), ln, 1) from exc
        kw, args = parts[0], parts[1:]
        if kw in ("state", "stack", "action"):
            for a in args:
                if not _NAME.match(a) or (kw == "action" and a == EPS):
                    raise TermSyntaxError(f"bad {kw} name {a!r}", ln, 1)
            {"state": states, "stack": stack, "action": actions}[kw].extend(
                a for a in args if a not in {"state": states, "stack": stack, "action": actions}[kw])
        elif kw == "pdarule":
            if len(args) != 5:
                raise TermSyntaxError('expected: pdarule p X a q "Y Z"', ln, 1)
            raw.append((ln, args))
        else:
            raise TermSyntaxError(f"unknown directive {kw!r}", ln, 1)
    pda = Pda(states, stack, actions)
    for ln, (p, X, a, q, push) in raw:
        push = tuple(push.split())
        for what, v, pool in (("state", p, states), ("stack symbol", X, stack), ("state", q, states)):
            if v not in pool:
                raise TermSyntaxError(f"undeclared {what} {v}", ln, 1)
        if a != EPS and a not in actions:
            raise TermSyntaxError(f"undeclared action {a}", ln, 1)
        for Y in push:
            if Y not in stack:
                raise TermSyntaxError(f"undeclared stack symbol {Y}", ln, 1)
        pda.rules.append(PdaRule(p, X, a, q, push))
    if not states:
        raise PdaError("no states declared")
    return pda


@dataclass
class Encoding:
    pda: Pda
    grammar: Grammar
    swallow: bool
    bottom: str
    names: dict  # (state, stack symbol) -> nonterminal
    pops: dict  # swallowed (state, top) -> state

    def collapse(self, c: Config) -> Config:
        return collapse(self.pda, c, self.pops)


def nonterminal_name(state: str, top: str) -> str:
    return f"{state}_{top}"


def _expr(ctx_names: dict, pops: dict, states: list, bottom: str, state: str, stack: tuple, tail) -> str:
    """Text of T(state stack tail); ``tail`` is None for the bottom marker or
    'vars' for the variable tail x."""
    while stack and (state, stack[0]) in pops:
        state, stack = pops[(state, stack[0])], stack[1:]
    if not stack:
        if tail == "vars":
            return f"x{states.index(state) + 1}"
        return bottom
    head, rest = stack[0], stack[1:]
    args = [_expr(ctx_names, pops, states, bottom, q, rest, tail) for q in states]
    return f"{ctx_names[(state, head)]}({', '.join(args)})"


def to_grammar(pda: Pda, swallow: bool = True, store: TermStore | None = None) -> Encoding:
    bad = pda.bad_eps()
    if any(r.action == EPS for r in pda.rules) and not swallow:
        raise PdaError("epsilon rules need swallowing: " + "; ".join(
            str(r) for r in pda.rules if r.action == EPS))
    if bad:
        raise PdaError("epsilon rules that are not deterministic pops: " + "; ".join(map(str, bad)))
    pops = pda.swallowable() if swallow else {}
    names = {(q, Y): nonterminal_name(q, Y) for q in pda.states for Y in pda.stack}
    used = set(names.values())
    bottom = "Bot"
    while bottom in used:
        bottom += "_"
    m = len(pda.states)
    lines = [f"nonterminal {names[(q, Y)]} {m}" for q in pda.states for Y in pda.stack
             if (q, Y) not in pops]
    lines.append(f"nonterminal {bottom} 0")
    lines += [f"action {a}" for a in pda.actions]
    params = ",".join(f"x{i}" for i in range(1, m + 1))
    for r in pda.rules:
        if (r.state, r.top) in pops:
            continue
        rhs = _expr(names, pops, pda.states, bottom, r.target, r.push, "vars")
        lines.append(f"rule {names[(r.state, r.top)]}({params}) {r.action} {rhs}")
    g = parse_grammar("\n".join(lines) + "\n", store)
    return Encoding(pda, g, swallow, bottom, names, pops)


def encode_config(ctx: Encoding, c: Config) -> Handle:
    text = _expr(ctx.names, ctx.pops, ctx.pda.states, ctx.bottom, c.state, tuple(c.stack), None)
    return ctx.grammar.term(text)


def collapse(pda: Pda, c: Config, pops: dict | None = None) -> Config:
    pops = pda.swallowable() if pops is None else pops
    state, stack = c.state, tuple(c.stack)
    while stack and (state, stack[0]) in pops:
        state, stack = pops[(state, stack[0])], stack[1:]
    return Config(state, stack)


def pda_steps(pda: Pda, c: Config, swallow: bool = False) -> list:
    """Moves of a configuration; with ``swallow`` targets are collapsed and
    swallowed epsilon moves disappear."""
    pops = pda.swallowable() if swallow else {}
    if swallow:
        c = collapse(pda, c, pops)
    if not c.stack:
        return []
    out = []
    for r in pda.rules_for(c.state, c.stack[0]):
        nxt = Config(r.target, r.push + tuple(c.stack[1:]))
        out.append((r.action, collapse(pda, nxt, pops) if swallow else nxt))
    return out


def pda_traces(pda: Pda, c: Config, depth: int, swallow: bool = True) -> set:
    out = {()}
    frontier = {((), collapse(pda, c) if swallow else c)}
    for _ in range(depth):
        nxt = set()
        for w, cfg in frontier:
            for a, c2 in pda_steps(pda, cfg, swallow):
                nxt.add((w + (a,), c2))
        out |= {w for w, _ in nxt}
        frontier = nxt
    return out


def grammar_traces(g: Grammar, t: Handle, depth: int) -> set:
    out = {()}
    frontier = {((), t)}
    for _ in range(depth):
        nxt = set()
        for w, u in frontier:
            for a, v in steps_action(g, u):
                nxt.add((w + (a,), v))
        out |= {w for w, _ in nxt}
        frontier = nxt
    return out


ANBN = """\
# accepts a^n b^n, n >= 1
state p q f
stack Z A
action a b
pdarule p Z a p "A Z"
pdarule p A a p "A A"
pdarule p A b q ""
pdarule q A b q ""
pdarule q Z eps f ""
"""


def anbn() -> Pda:
    return parse_pda(ANBN)
