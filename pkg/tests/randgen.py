"""Random small grammars, terms and substitutions for property tests."""

from __future__ import annotations

import random

from fogbisim.grammar import Grammar, parse_grammar
from fogbisim.terms import Handle

ACTIONS = ("a", "b")


def random_grammar(rng: random.Random, max_nts: int = 3, max_arity: int = 2, rhs_depth: int = 2) -> Grammar:
    n = rng.randint(1, max_nts)
    names = ["A", "B", "C"][:n]
    ar = {A: rng.randint(0, max_arity) for A in names}
    lines = [f"nonterminal {A} {ar[A]}" for A in names]
    lines += [f"action {a}" for a in ACTIONS]

    def rhs(m: int, d: int) -> str:
        if m and (d == 0 or rng.random() < 0.35):
            return f"x{rng.randint(1, m)}"
        A = rng.choice(names)
        if ar[A] == 0 or d == 0:
            return A if ar[A] == 0 else f"x{rng.randint(1, m)}" if m else A if ar[A] == 0 else None
        return f"{A}({', '.join(rhs(m, d - 1) or names_nullary(m) for _ in range(ar[A]))})"

    def names_nullary(m: int) -> str:
        nul = [A for A in names if ar[A] == 0]
        if m:
            return f"x{rng.randint(1, m)}"
        return rng.choice(nul) if nul else None

    for A in names:
        m = ar[A]
        lhs = f"{A}({','.join(f'x{i}' for i in range(1, m + 1))})" if m else A
        for _ in range(rng.randint(1, 2)):
            body = None
            for _ in range(20):
                body = rhs(m, rng.randint(0, rhs_depth))
                if body is not None and "None" not in body:
                    break
                body = None
            if body is None:
                continue
            lines.append(f"rule {lhs} {rng.choice(ACTIONS)} {body}")
    return parse_grammar("\n".join(lines) + "\n")


def random_term(rng: random.Random, g: Grammar, depth: int, var_limit: int = 2) -> Handle:
    s = g.store
    names = list(g.nonterminals)
    if depth == 0 or rng.random() < 0.25:
        nul = [A for A in names if g.nonterminals[A] == 0]
        if nul and rng.random() < 0.5:
            return s.app(rng.choice(nul), [])
        return s.var(rng.randint(1, var_limit))
    A = rng.choice(names)
    return s.app(A, [random_term(rng, g, depth - 1, var_limit) for _ in range(g.nonterminals[A])])


def random_subst(rng: random.Random, g: Grammar, var_limit: int = 2, depth: int = 2):
    return g.store.subst({i: random_term(rng, g, depth, var_limit) for i in range(1, var_limit + 1)
                          if rng.random() < 0.8})


def random_graph(rng: random.Random, g: Grammar, max_nodes: int = 6, var_limit: int = 2):
    """A possibly cyclic graph presentation over the grammar's nonterminals."""
    from fogbisim.quotient import TermGraph

    n = rng.randint(1, max_nodes)
    names = list(g.nonterminals)
    syms, kids = [], []
    for _ in range(n):
        if rng.random() < 0.25:
            syms.append(rng.randint(1, var_limit))
            kids.append([])
        else:
            A = rng.choice(names)
            syms.append(A)
            kids.append([rng.randrange(n) for _ in range(g.nonterminals[A])])
    return TermGraph(syms, kids)


def random_blocks(rng: random.Random, n: int, groups: int = 2) -> list:
    out: dict = {}
    for i in range(n):
        out.setdefault(rng.randrange(groups), []).append(i)
    return list(out.values())
