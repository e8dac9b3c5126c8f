import random

import pytest
from conftest import LOOPS, N_GRAMMAR
from oracles import closure_blocks
from randgen import random_blocks, random_grammar, random_graph

from fogbisim.bisim import OMEGA, Finite, el_ge, eqlevel
from fogbisim.grammar import parse_grammar
from fogbisim.quotient import (
    TermGraph,
    decompose,
    discrete_partition,
    make_partition,
    prop8_check,
    quotient,
    red1,
    smallest_partition_from_arcs,
)


def test_graph_validation():
    with pytest.raises(ValueError):
        TermGraph(["A"], [[3]])
    with pytest.raises(ValueError):
        TermGraph([1], [[0]])
    with pytest.raises(ValueError):
        TermGraph(["A", 1], [[1]])


def test_partition_validation(loops):
    gr = TermGraph(["A", "C"], [[], []])
    with pytest.raises(ValueError):
        make_partition(loops.store, gr, [[0], [0, 1]])
    with pytest.raises(ValueError):
        make_partition(loops.store, gr, [[0]])


def test_discrete_partition_is_identity():
    rng = random.Random(3)
    for _ in range(30):
        g = random_grammar(rng)
        gr = random_graph(rng, g)
        P = discrete_partition(g.store, gr)
        q = quotient(g.store, gr, P)
        hs = gr.terms(g.store)
        assert q.red == list(range(len(gr)))
        assert [q.red_term(n) for n in range(len(gr))] == hs
        assert [red1(g.store, gr, P, n) for n in range(len(gr))] == hs
        assert all(a == b for a, b in decompose(g.store, gr, P))


def test_one_block_of_strongly_equal_nodes():
    g = parse_grammar("nonterminal C 1\naction a\nrule C(x1) a x1\n")
    gr = TermGraph(["C", "C"], [[1], [0]])
    hs = gr.terms(g.store)
    assert hs[0] == hs[1]  # both are the infinite C-chain
    P = make_partition(g.store, gr, [[0, 1]])
    q = quotient(g.store, gr, P)
    assert len(q.graph) == 1 and q.graph.kids == [[0]]
    assert q.red_term(0) == hs[0]


def test_red_idempotent_and_root_preserved():
    rng = random.Random(4)
    for _ in range(50):
        g = random_grammar(rng)
        gr = random_graph(rng, g)
        P = make_partition(g.store, gr, random_blocks(rng, len(gr), 3))
        q = quotient(g.store, gr, P)
        for n in range(len(gr)):
            r = P.reps[P.block_of()[n]]
            assert q.red[r] == q.red[n]
            assert q.graph.syms[q.red[r]] == gr.syms[r]
            h = red1(g.store, gr, P, n, q)
            if isinstance(gr.syms[n], int):
                assert g.store.is_var(h) and g.store.var_index(h) == gr.syms[n]
            else:
                assert g.store.root(h) == gr.syms[n]


def test_representative_is_least_handle(loops):
    gr = TermGraph(["A", "C", "A"], [[], [], []])
    P = make_partition(loops.store, gr, [[0, 1, 2]])
    hs = gr.terms(loops.store)
    assert hs[P.reps[0]] == min(hs)


def test_no_seeds_gives_discrete(loops):
    gr = TermGraph(["A", "C"], [[], []])
    assert smallest_partition_from_arcs(loops.store, gr).blocks == [[0], [1]]


def test_seed_pair_shares_block():
    g = parse_grammar(N_GRAMMAR)
    gr = TermGraph(["N", "N", 1], [[1], [2], []])
    P = smallest_partition_from_arcs(g.store, gr, seeds=[(0, 2)])
    assert [0, 2] in P.blocks


def test_loop_arcs_ignored():
    g = parse_grammar("nonterminal C 1\naction a\nrule C(x1) a x1\n")
    gr = TermGraph(["C", "C"], [[0], [1]])
    assert smallest_partition_from_arcs(g.store, gr, marked_arcs=[(0, 1), (1, 1)]).blocks == [[0], [1]]


def test_union_find_matches_closure():
    rng = random.Random(7)
    for _ in range(100):
        g = random_grammar(rng)
        gr = random_graph(rng, g, max_nodes=8)
        arcs = [(i, p) for i, p, _ in gr.arcs()]
        marked = [a for a in arcs if rng.random() < 0.4]
        seeds = [(rng.randrange(len(gr)), rng.randrange(len(gr))) for _ in range(rng.randint(0, 2))]
        edges = list(seeds) + [(i, gr.kids[i][p - 1]) for i, p in marked]
        assert smallest_partition_from_arcs(g.store, gr, seeds, marked).blocks == closure_blocks(len(gr), edges)


def test_merge_bound_discrete_is_vacuous(sample):
    gr = TermGraph(["A", "B", 1], [[1, 2, 1], [], []])
    rep = prop8_check(sample, gr, discrete_partition(sample.store, gr), cap=6, budget=2000)
    assert rep.least == OMEGA and rep.ok


def test_merge_bound_merging_equivalent_loops():
    g = parse_grammar(LOOPS)
    gr = TermGraph(["A", "C"], [[], []])
    rep = prop8_check(g, gr, make_partition(g.store, gr, [[0, 1]]), cap=6, budget=2000)
    assert rep.least == OMEGA and rep.ok and rep.checked >= 1


def test_merge_bound_merging_level_one_nodes():
    g = parse_grammar(N_GRAMMAR)
    gr = TermGraph(["N", 1, "N"], [[1], [], [0]])  # N(x1) and N(N(x1))
    hs = gr.terms(g.store)
    assert eqlevel(g, hs[0], hs[2], 6, 2000) == Finite(1)
    rep = prop8_check(g, gr, make_partition(g.store, gr, [[0, 2], [1]]), cap=6, budget=2000)
    assert el_ge(Finite(1), rep.least) and rep.ok


def test_merge_bound_random_and_congruence_chain():
    rng = random.Random(11)
    checked = 0
    for _ in range(100):
        g = random_grammar(rng)
        gr = random_graph(rng, g, max_nodes=5)
        P = make_partition(g.store, gr, random_blocks(rng, len(gr), 2))
        rep = prop8_check(g, gr, P, cap=6, budget=3000)
        assert rep.ok, rep.violations
        checked += rep.checked
    assert checked > 100
