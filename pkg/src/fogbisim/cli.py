"""``fog`` command line."""

from __future__ import annotations

import argparse
import json
import sys

from .bisim import eqlevel
from .bounds import CandidateSet, ExactMel, GrowthFn, InsufficientBound, Undetermined, ell, lemma2_bruteforce_check
from .game import (
    PROVER,
    REFUTER,
    FirstMatchProver,
    GameConfig,
    Refuter,
    dumps,
    left_balance,
    play,
    replay,
    right_balance,
    validate_transcript,
)
from .grammar import GrammarError, MissingSinkWord, constants, parse_grammar, reachable, reduce_arities, sink_words
from .pda import PdaError, parse_pda, to_grammar
from .quotient import TermGraph, decompose, make_partition, prop8_check, smallest_partition_from_arcs
from .terms import TermError

EXIT_OK, EXIT_NEGATIVE, EXIT_UNDETERMINED, EXIT_INPUT = 0, 1, 2, 64


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(args, data: dict, human: str):
    if args.json:
        print(json.dumps(data, sort_keys=True, indent=1))
    else:
        print(human)


def cmd_check(args) -> int:
    g = parse_grammar(_read(args.grammar))
    T, U = g.term(args.left), g.term(args.right)
    e = eqlevel(g, T, U, args.cap, args.budget)
    _emit(args, {"left": g.render(T), "right": g.render(U), "eqlevel": e.to_json()}, str(e))
    if e.is_omega:
        return EXIT_OK
    return EXIT_NEGATIVE if e.is_finite else EXIT_UNDETERMINED


def cmd_constants(args) -> int:
    g = parse_grammar(_read(args.grammar))
    if args.reduce:
        g = reduce_arities(g)
    c = constants(g)
    data = c.to_json()
    _emit(args, data, "\n".join(f"{k} = {v}" for k, v in data.items()))
    return EXIT_OK


def cmd_sinkwords(args) -> int:
    g = parse_grammar(_read(args.grammar))
    sw = sink_words(g)
    data = sw.to_json()
    lines = [f"{k}: " + ("none" if v is None else f"len {v['len']}"
                         + ("" if v["len"] > 40 else f"  word {' '.join(map(str, v['word']))}"))
             for k, v in data.items()]
    _emit(args, {"sink_words": data, "M0": 1 + sw.max_length()}, "\n".join(lines))
    return EXIT_NEGATIVE if sw.missing() else EXIT_OK


def cmd_lts(args) -> int:
    g = parse_grammar(_read(args.grammar))
    t = g.term(args.term)
    reach = reachable(g, t, args.depth)
    rows = []
    for u, w in reach.items():
        rows.append({"term": g.render(u), "word": list(w),
                     "moves": [[r.id, r.action, g.render(v)] for r, v in g.steps_rule(u)]})
    _emit(args, {"states": rows},
          "\n".join(f"[{' '.join(map(str, r['word']))}] {r['term']}" for r in rows))
    return EXIT_OK


def cmd_import_pda(args) -> int:
    enc = to_grammar(parse_pda(_read(args.pda)), swallow=not args.no_swallow)
    text = enc.grammar.dump()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK


def _pairs(spec: str | None) -> list:
    if not spec:
        return []
    return [tuple(int(x) for x in item.split(":")) for item in spec.split(",") if item]


def cmd_decompose(args) -> int:
    g = parse_grammar(_read(args.grammar))
    s = g.store
    graph = TermGraph.from_term(s, g.term(args.term))
    if args.blocks:
        P = make_partition(s, graph, [[int(x) for x in b.split(",")] for b in args.blocks.split(";")])
    else:
        P = smallest_partition_from_arcs(s, graph, _pairs(args.seed), _pairs(args.arc))
    rep = prop8_check(g, graph, P, args.cap, args.budget)
    dec = decompose(s, graph, P)
    data = {"graph": graph.to_json(), "partition": P.to_json(),
            "decomposition": [[g.render(a), g.render(b)] for a, b in dec], "check": rep.to_json()}
    human = [f"partition {P.to_json()}"] + [f"  ({g.render(a)}, {g.render(b)})" for a, b in dec]
    human.append(f"least eq-level {rep.least}; {rep.checked} comparisons, "
                 f"{len(rep.violations)} violations, {len(rep.undetermined)} undetermined")
    _emit(args, data, "\n".join(human))
    return EXIT_NEGATIVE if rep.violations else (EXIT_UNDETERMINED if rep.undetermined else EXIT_OK)


# interactive strategies

def _ask(prompt: str, n: int, stream) -> int:
    while True:
        print(prompt, end=" ", flush=True)
        line = stream.readline()
        if not line:
            raise EOFError("input closed")
        line = line.strip()
        if line.isdigit() and 0 <= int(line) < n:
            return int(line)
        print(f"enter a number from 0 to {n - 1}")


class HumanRefuter(Refuter):
    name = "human"

    def __init__(self, stream):
        self.stream = stream

    def pick(self, game, rnd):
        g = game.g
        print(f"round {len(game.rounds) + 1}: eligible pairs")
        for i, (a, b) in enumerate(rnd.eligible):
            print(f"  {i}: ({g.render(a)}, {g.render(b)})  eq-level {game.level(a, b)}")
        return rnd.eligible[_ask("pick:", len(rnd.eligible), self.stream)]


class HumanProver(FirstMatchProver):
    name = "human"

    def __init__(self, stream):
        super().__init__(1)
        self.stream = stream

    def chain(self, game, T, U):
        g = game.g
        print(f"round {len(game.rounds) + 1}: start ({g.render(T)}, {g.render(U)})")
        self.k = 1 + _ask("k - 1:", 1 << 16, self.stream)
        return super().chain(game, T, U)

    def choose(self, game, options):
        if len(options) == 1:
            return options[0]
        g = game.g
        for i, (a, b) in enumerate(options):
            print(f"  {i}: ({g.render(a)}, {g.render(b)})")
        return options[_ask("match:", len(options), self.stream)]

    def balance(self, game, rnd):
        offers = [None]
        for fn in (left_balance, right_balance):
            ev = fn(game, rnd)
            if ev is not None:
                offers.append(ev)
        if len(offers) == 1:
            return None
        g = game.g
        print("  0: no balancing")
        for i, ev in enumerate(offers[1:], start=1):
            print(f"  {i}: {ev['side']} head {g.render(ev['_G'])}")
        return offers[_ask("balance:", len(offers), self.stream)]


def cmd_game(args) -> int:
    g = parse_grammar(_read(args.grammar))
    cfg = GameConfig(version=args.version, prover=args.prover, refuter=args.refuter,
                     proxy=args.proxy, k_override=args.override_k,
                     head_depth_override=args.override_head_depth, cap=args.cap,
                     budget=args.budget, max_rounds=args.max_rounds, seed=args.seed)
    prover = refuter = None
    if args.interactive:
        if args.role == "prover":
            prover = HumanProver(sys.stdin)
        else:
            refuter = HumanRefuter(sys.stdin)
    t = play(g, g.term(args.left), g.term(args.right), prover, refuter, cfg)
    text = dumps(t)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    o = t["outcome"]
    _emit(args, t, f"{o['winner'] or 'nobody'} ({o['reason']}) in round {o['round']}; "
                   f"certified {str(t['certified']).lower()}")
    if o["winner"] == PROVER:
        return EXIT_OK
    return EXIT_NEGATIVE if o["winner"] == REFUTER else EXIT_UNDETERMINED


def cmd_replay(args) -> int:
    g = parse_grammar(_read(args.grammar))
    t = json.loads(_read(args.transcript))
    problems = validate_transcript(g, t)
    human = "human" in (t["config"]["prover"], t["config"]["refuter"])
    same = None if human else dumps(replay(g, t)) == dumps(t)
    if same is False:
        problems.append("replay produced a different transcript")
    _emit(args, {"problems": problems, "identical_replay": same},
          "ok" if not problems else "\n".join(problems))
    return EXIT_OK if not problems else EXIT_NEGATIVE


def cmd_bounds(args) -> int:
    growth = GrowthFn(args.g_table) if args.g_table else GrowthFn.constant(args.g_const)
    g = parse_grammar(_read(args.grammar)) if args.grammar else None
    if args.lemma2:
        if g is None:
            raise ValueError("--lemma2 needs --grammar")
        rep = lemma2_bruteforce_check(g, args.n, growth, args.var_limit, cap=args.cap,
                                      budget=args.budget, jobs=args.jobs)
        _emit(args, rep, f"ell = {rep['ell']}, longest sequence found = {rep['max_found']}")
        return EXIT_OK if rep["ok"] else EXIT_NEGATIVE
    trace: list = []
    if g is None:
        mel = CandidateSet(None)
        inc = args.sizeinc
    elif args.candidates:
        rows = json.loads(_read(args.candidates))
        mel = CandidateSet(g, [(g.term(E), g.term(F), lv) for E, F, lv in rows])
        inc = args.sizeinc if args.sizeinc is not None else constants(reduce_arities(g)).sizeinc
    else:
        mel = ExactMel(g, args.var_limit, args.cap, args.budget, args.jobs)
        inc = args.sizeinc if args.sizeinc is not None else constants(reduce_arities(g)).sizeinc
    value = ell(args.n, growth, mel, inc or 0, trace)
    _emit(args, {"n": args.n, "ell": value, "trace": trace}, f"ell = {value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, default=16)
    common.add_argument("--budget", type=int, default=10000)
    common.add_argument("--json", action="store_true")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--override-k", type=int)
    common.add_argument("--override-head-depth", type=int)

    p = argparse.ArgumentParser(prog="fog", description="First-order grammar bisimilarity workbench")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", parents=[common], help="eq-level of two terms")
    c.add_argument("grammar")
    c.add_argument("left")
    c.add_argument("right")
    c.set_defaults(fn=cmd_check)

    c = sub.add_parser("constants", parents=[common], help="M0, M'0, M1, n0, sizeinc")
    c.add_argument("grammar")
    c.add_argument("--reduce", action="store_true", help="drop positions without sink words first")
    c.set_defaults(fn=cmd_constants)

    c = sub.add_parser("sinkwords", parents=[common], help="shortest sink words")
    c.add_argument("grammar")
    c.set_defaults(fn=cmd_sinkwords)

    c = sub.add_parser("lts", parents=[common], help="bounded reachable states")
    c.add_argument("grammar")
    c.add_argument("term")
    c.add_argument("--depth", type=int, default=3)
    c.set_defaults(fn=cmd_lts)

    c = sub.add_parser("import-pda", parents=[common], help="encode a pushdown automaton")
    c.add_argument("pda")
    c.add_argument("--no-swallow", action="store_true")
    c.add_argument("-o", "--output")
    c.set_defaults(fn=cmd_import_pda)

    c = sub.add_parser("decompose", parents=[common], help="quotient decomposition of a term graph")
    c.add_argument("grammar")
    c.add_argument("term")
    c.add_argument("--blocks", help="node blocks, e.g. '0,1;2'")
    c.add_argument("--seed", help="node pairs to join, e.g. '0:2,1:3'")
    c.add_argument("--arc", help="marked arcs as node:position")
    c.set_defaults(fn=cmd_decompose)

    c = sub.add_parser("game", parents=[common], help="play the Prover-Refuter game")
    c.add_argument("grammar")
    c.add_argument("left")
    c.add_argument("right")
    c.add_argument("--version", type=int, choices=(1, 2), default=2)
    c.add_argument("--prover", default="balancing", choices=("balancing", "greedy", "firstmatch"))
    c.add_argument("--refuter", default="least-eqlevel", choices=("least-eqlevel", "first", "random"))
    c.add_argument("--proxy", default="exact", choices=("exact", "approx"))
    c.add_argument("--max-rounds", type=int, default=40)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--interactive", action="store_true")
    c.add_argument("--role", choices=("prover", "refuter"), default="refuter")
    c.add_argument("-o", "--output")
    c.set_defaults(fn=cmd_game)

    c = sub.add_parser("replay", parents=[common], help="re-validate and replay a transcript")
    c.add_argument("grammar")
    c.add_argument("transcript")
    c.set_defaults(fn=cmd_replay)

    c = sub.add_parser("bounds", parents=[common], help="the length bound ell and exhaustive sequence search")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--g-const", type=int, default=2)
    c.add_argument("--g-table", type=lambda s: [int(x) for x in s.split(",")])
    c.add_argument("--grammar")
    c.add_argument("--candidates", help="JSON list of [E, F, level]")
    c.add_argument("--sizeinc", type=int)
    c.add_argument("--var-limit", type=int, default=1)
    c.add_argument("--lemma2", action="store_true")
    c.set_defaults(fn=cmd_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cap < 1 or args.budget < 1:
        print("fog: --cap and --budget must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.fn(args)
    except (Undetermined, InsufficientBound) as exc:
        print(f"fog: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except (TermError, GrammarError, PdaError, MissingSinkWord, OSError, ValueError, KeyError) as exc:
        print(f"fog: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
