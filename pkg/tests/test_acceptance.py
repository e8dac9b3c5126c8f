"""Acceptance criteria; each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time

import pytest
from conftest import N_GRAMMAR, nterm
from oracles import brute_level, chain_grammar_text, chain_lengths, ell_unfold_empty
from randgen import random_blocks, random_grammar, random_graph, random_subst, random_term

from fogbisim.bisim import Finite, approx_equiv, eqlevel, eqlevel_limit_invariance_check, find_eq_witness
from fogbisim.bounds import CandidateSet, ExactMel, GrowthFn, ell, lemma2_bruteforce_check
from fogbisim.game import GameConfig, V3Setup, dumps, play, play_v3, replay, validate_transcript
from fogbisim.grammar import constants, parse_grammar, path, sink_words
from fogbisim.pda import EPS, Config, anbn, encode_config, grammar_traces, pda_steps, pda_traces, to_grammar
from fogbisim.quotient import make_partition, prop8_check

# tolerances
C1_SECONDS = 1.0
C2_SECONDS = 5.0
C3_SECONDS = 60.0
C3_INSTANCES = 200
C3_MAX_LEVEL = 6
C4_MIN_INSTANCES = 50
C5_STARTS = 50
C5_MAX_LEVEL = 5
C6_SECONDS = 300.0
C7_INSTANCES = 100
C7_CAP = 6
C8_DEPTH = 10


@pytest.fixture
def report(capsys):
    def emit(n: int, what: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {what}" + (f" ({detail})" if detail else ""))
        assert ok, detail
    return emit


def test_criterion_1_sink_word_family(report):
    t0 = time.perf_counter()
    g = parse_grammar(chain_grammar_text(10))
    sw = sink_words(g)
    w = sw.word("A10", 1)
    m0 = constants(g).M0
    took = time.perf_counter() - t0
    lengths = [len(sw.word(f"A{j}", 1)) for j in range(1, 11)]
    walks = path(g, g.lhs_term("A10"), w) == g.term("x1")
    ok = lengths == chain_lengths(10) and len(w) == 1023 and m0 == 1024 and walks and took < C1_SECONDS
    report(1, "chain grammar k=10 sink word 1023, M0 1024", ok, f"{len(w)}, {m0}, {took:.3f}s")


def test_criterion_2_eqlevel_exactness(report):
    g = parse_grammar(N_GRAMMAR)
    t0 = time.perf_counter()
    bad = []
    for p in range(9):
        for q in range(9):
            if p == q:
                continue
            T, U = g.term(nterm(p)), g.term(nterm(q))
            got = eqlevel(g, T, U, cap=12)
            if got != Finite(min(p, q)) or brute_level(g, T, U, 12) != min(p, q):
                bad.append((p, q, str(got)))
    took = time.perf_counter() - t0
    report(2, "N-grammar eq-levels min(p,q) for p != q <= 8", not bad and took < C2_SECONDS,
           f"{len(bad)} mismatches, {took:.2f}s")


def test_criterion_3_congruence(report):
    rng = random.Random(2024)
    t0 = time.perf_counter()
    violations, plain, strengthened, cross = [], 0, 0, 0
    for _ in range(C3_INSTANCES):
        g = random_grammar(rng)
        s = g.store
        E, F = random_term(rng, g, 2), random_term(rng, g, 2)
        sigma = random_subst(rng, g)
        sigma2 = s.subst({i: (t if rng.random() < 0.5 else random_term(rng, g, 2))
                          for i, t in sigma.items})
        eF = eqlevel(g, E, F, C3_MAX_LEVEL, 3000)
        k = C3_MAX_LEVEL if eF.is_omega else min(eF.value, C3_MAX_LEVEL)
        if approx_equiv(g, E, F, k):
            plain += 1
            if not approx_equiv(g, s.apply(E, sigma), s.apply(F, sigma), k):
                violations.append(("plain", g.dump(), g.render(E), g.render(F), k))
            want = brute_level(g, s.apply(E, sigma), s.apply(F, sigma), C3_MAX_LEVEL)
            if want is not None:
                cross += 1
                if want < k:
                    violations.append(("oracle", g.dump(), g.render(E), g.render(F), k))
        # componentwise level of the two substitutions
        ks = C3_MAX_LEVEL
        for i in range(1, 3):
            a, b = s.apply(s.var(i), sigma), s.apply(s.var(i), sigma2)
            e = eqlevel(g, a, b, C3_MAX_LEVEL, 3000)
            ks = min(ks, e.value if e.is_finite else C3_MAX_LEVEL)
        if not s.is_var(E) and ks < C3_MAX_LEVEL:
            strengthened += 1
            if not approx_equiv(g, s.apply(E, sigma), s.apply(E, sigma2), ks + 1):
                violations.append(("plus-one", g.dump(), g.render(E), ks))
    took = time.perf_counter() - t0
    ok = not violations and took < C3_SECONDS and plain > 0 and strengthened > 0
    report(3, "congruence and +1 strengthening", ok,
           f"{plain} plain, {strengthened} strengthened, {cross} oracle cross-checks, "
           f"{len(violations)} violations, {took:.1f}s")


def test_criterion_4_witness_algebra(report):
    rng = random.Random(77)
    cap = 10
    instances, failures, tries = 0, [], 0
    while instances < 60 and tries < 20000:
        tries += 1
        g = random_grammar(rng)
        s = g.store
        E, F = random_term(rng, g, 2), random_term(rng, g, 2)
        base = eqlevel(g, E, F, cap, 3000)
        if not base.is_finite:
            continue
        sigma = random_subst(rng, g, depth=2)
        e = eqlevel(g, s.apply(E, sigma), s.apply(F, sigma), cap, 3000)
        if not e.is_finite or e.value <= base.value:
            continue
        instances += 1
        k = base.value
        w = find_eq_witness(g, E, F, sigma, cap, 3000)
        if w is None or len(w.word) > k:
            failures.append(("extract", g.dump(), g.render(E), g.render(F)))
            continue
        xs, Hs = s.apply(s.var(w.var), sigma), s.apply(w.H, sigma)
        if not approx_equiv(g, xs, Hs, e.value - k):
            failures.append(("level", g.dump(), g.render(E), g.render(F)))
        if not eqlevel_limit_invariance_check(g, w.var, w.H, sigma, cap, 3000):
            failures.append(("limit", g.dump(), g.render(E), g.render(F)))
    ok = instances >= C4_MIN_INSTANCES and not failures
    report(4, "witness extraction and limit substitution", ok, f"{instances} instances, {len(failures)} failures")


PROVERS = [("balancing", 1), ("balancing", 2), ("greedy", None), ("firstmatch", None)]


def _c5_starts():
    """Quota-sampled non-equivalent starts with levels 0 to 5."""
    rng = random.Random(5)
    per_level = {lv: 0 for lv in range(C5_MAX_LEVEL + 1)}
    quota = {0: 6, 1: 10, 2: 10, 3: 10, 4: 8, 5: 6}
    out = []
    tries = 0
    while len(out) < C5_STARTS and tries < 40000:
        tries += 1
        g = random_grammar(rng)
        T, U = random_term(rng, g, rng.choice((2, 3))), random_term(rng, g, rng.choice((2, 3)))
        e = eqlevel(g, T, U, 12, 5000)
        if not e.is_finite or e.value > C5_MAX_LEVEL or per_level[e.value] >= quota[e.value]:
            continue
        per_level[e.value] += 1
        out.append((g, T, U, e.value))
    # top up from the N-grammar if the random pool ran dry at high levels
    g = parse_grammar(N_GRAMMAR)
    lv = C5_MAX_LEVEL
    while len(out) < C5_STARTS:
        out.append((g, g.term(nterm(lv)), g.term(nterm(lv + 1 + len(out) % 3)), lv))
        lv = lv - 1 if lv > 2 else C5_MAX_LEVEL
    return out


_TRANSCRIPTS: list = []


def test_criterion_5_game_soundness(report):
    starts = _c5_starts()
    failures = []
    for g, T, U, e in starts:
        for prover, k in PROVERS:
            cfg = GameConfig(prover=prover, k_override=k, head_depth_override=3 if prover == "balancing" else None,
                             cap=12, budget=5000)
            t = play(g, T, U, config=cfg)
            _TRANSCRIPTS.append((g, t))
            o = t["outcome"]
            if o["winner"] != "Refuter" or o["round"] > e + 1:
                failures.append((prover, k, e, o))
            elif prover == "balancing" and k == 1 and o["round"] < e + 1:
                failures.append((prover, k, e, o))
    levels = sorted({e for *_, e in starts})
    report(5, "least-eqlevel Refuter wins within e+1 rounds", len(starts) == C5_STARTS and not failures,
           f"{len(starts)} starts, levels {levels}, {len(failures)} failures")


def test_criterion_6_bounds(report):
    t0 = time.perf_counter()
    empty = [ell(n, GrowthFn.constant(2), CandidateSet(None), 1) for n in range(11)]
    ok = empty == [ell_unfold_empty(n) for n in range(11)]
    g = parse_grammar(N_GRAMMAR)
    rows = []
    for n in (0, 1):
        for c in (2, 3, 4):
            rep = lemma2_bruteforce_check(g, n, GrowthFn.constant(c), var_limit=1)
            rows.append((n, c, rep["max_found"], rep["ell"]))
            ok &= rep["ok"]
    took = time.perf_counter() - t0
    report(6, "ell over empty candidates is n+1; exhaustive sequence search within ell", ok and took < C6_SECONDS,
           f"(n, g, longest, ell) {rows}, {took:.1f}s")


def test_criterion_7_decomposition(report):
    rng = random.Random(8)
    checked, violations, skipped = 0, 0, 0
    for _ in range(C7_INSTANCES):
        g = random_grammar(rng)
        gr = random_graph(rng, g, max_nodes=5)
        P = make_partition(g.store, gr, random_blocks(rng, len(gr), rng.randint(1, 3)))
        rep = prop8_check(g, gr, P, cap=C7_CAP, budget=3000)
        checked += rep.checked
        violations += len(rep.violations)
        skipped += len(rep.undetermined)
    report(7, "merged nodes at least as equal as the decomposition", violations == 0 and checked > 0,
           f"{C7_INSTANCES} instances, {checked} comparisons, {skipped} undetermined, {violations} violations")


def test_criterion_8_pda_bridge(report):
    pda = anbn()
    ctx = to_grammar(pda)
    seen, frontier = set(), {Config("p", ("Z",))}
    for _ in range(6):
        seen |= frontier
        frontier = {c2 for c in frontier for _, c2 in pda_steps(pda, c)} - seen
    mismatched = [str(c) for c in sorted(seen, key=str)
                  if pda_traces(pda, c, C8_DEPTH) != grammar_traces(ctx.grammar, encode_config(ctx, c), C8_DEPTH)]
    ok = not mismatched and EPS not in ctx.grammar.actions and len(seen) >= 8
    report(8, "a^n b^n traces coincide to depth 10; no eps action", ok,
           f"{len(seen)} configurations, {len(mismatched)} mismatches")


def test_criterion_9_transcript_integrity(report):
    pool = list(_TRANSCRIPTS)
    if not pool:
        for g, T, U, _ in _c5_starts()[:10]:
            pool.append((g, play(g, T, U, config=GameConfig(k_override=1, head_depth_override=3, cap=12))))
    g = parse_grammar(N_GRAMMAR)
    C = CandidateSet(g, [(E, F, e.value) for (E, F), e in ExactMel(g, 1).levels(6) if e.is_finite])
    setup = V3Setup(C, 1, GrowthFn([2] * 6), 6, 6, var_limit=1)
    pool.append((g, play_v3(g, g.term(nterm(4)), g.term(nterm(2)), setup,
                            GameConfig(version=3, k_override=1, head_depth_override=2))))
    bad, balanced = [], 0
    for gr, t in pool:
        problems = validate_transcript(gr, t)
        same = dumps(replay(gr, t)) == dumps(t)
        balanced += sum(r["balance"] is not None for r in t["rounds"])
        if problems or not same:
            bad.append((problems, same))
    report(9, "transcripts replay byte-identically and re-validate", not bad,
           f"{len(pool)} transcripts, {balanced} balancing certificates, {len(bad)} bad")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
