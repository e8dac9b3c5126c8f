"""Prover-Refuter game: rounds, balancing, closeness, transcripts."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from types import SimpleNamespace

from .bisim import EqLevel, covers_all, eqlevel
from .bounds import (
    CandidateSet,
    GrowthFn,
    NgPresentation,
    default_g0,
    enumerate_pairs,
    ell,
    sufficient_segment_bound,
    sufficient_size_bound,
    validate_ng_sequence,
)
from .grammar import (
    Grammar,
    classify_path,
    maxruleheight,
    path,
    reachable,
    sink_words,
    sizeinc,
)
from .terms import Handle, Subst

PROVER, REFUTER = "Prover", "Refuter"
REPEAT, SUBSET_COVERED, NG_OVERFLOW = "Repeat", "SubsetCovered", "NgOverflow"
NOT_COVERABLE, FORFEIT, EXHAUSTED = "NotCoverable", "Forfeit", "Exhausted"
SIZE_LIMIT = "SizeLimit"


class SetupError(ValueError):
    pass


@dataclass
class GameConfig:
    version: int = 2
    prover: str = "balancing"
    refuter: str = "least-eqlevel"
    proxy: str = "exact"
    k_override: int | None = None
    head_depth_override: int | None = None
    cap: int = 16
    budget: int = 10000
    max_rounds: int = 40
    seed: int = 0
    max_text: int = 20000


@dataclass
class PlayConstants:
    M0: int
    Mprime0: int
    M1: int
    arity_max: int
    full_arity: bool


def play_constants(g: Grammar) -> PlayConstants:
    sw = sink_words(g)
    M0 = 1 + sw.max_length()
    mrh = maxruleheight(g)
    Mp0 = (1 + M0) * mrh
    return PlayConstants(M0, Mp0, M0 * (Mp0 + 1), g.max_arity, not sw.missing())


# closeness

def close_k(g: Grammar, W: Handle, T: Handle, k: int) -> tuple | None:
    """A rule word of length <= k leading from W to T, if any."""
    return reachable(g, W, k).get(T)


def min_height_head(g: Grammar, t: Handle, is_hole, max_depth: int, base_var: int):
    """Finite G of least height (<= max_depth) with t = G sigma, holes at is_hole."""
    s = g.store
    memo: dict = {}

    def h(u: Handle, d: int):
        key = (u, d)
        if key in memo:
            return memo[key]
        if is_hole(u):
            r = 0
        elif not s.children(u):
            r = 0
        elif d == 0:
            r = None
        else:
            r = 0
            for c in s.children(u):
                v = h(c, d - 1)
                if v is None:
                    r = None
                    break
                r = max(r, v + 1)
        memo[key] = r
        return r

    for d in range(max_depth + 1):
        if h(t, d) is not None:
            break
    else:
        return None
    holes: dict[Handle, int] = {}

    def build(u: Handle) -> Handle:
        if is_hole(u):
            if u not in holes:
                holes[u] = base_var + len(holes)
            return s.var(holes[u])
        ks = s.children(u)
        if not ks:
            return u
        return s.app(s.root(u), [build(c) for c in ks])

    G = build(t)
    return G, Subst.of({i: u for u, i in holes.items()})


def _base_var(g: Grammar, *terms: Handle) -> int:
    return 1 + max((max(g.store.vars(t), default=0) for t in terms), default=0)


def close_lr(g: Grammar, W: Handle, pair, d: int, k: int, side: str) -> dict | None:
    """Certificate that W is (d,k)-close to the pair on the given side."""
    T, U = pair
    headed, other = (T, U) if side == "L" else (U, T)
    reach = reachable(g, W, k)
    if other not in reach:
        return None
    res = min_height_head(g, headed, lambda u: u in reach, d, _base_var(g, headed))
    if res is None:
        return None
    G, sigma = res
    return {"side": side, "d": d, "k": k, "pivot": g.render(W), "head": g.render(G),
            "sigma": {f"x{i}": g.render(v) for i, v in sigma.items},
            "words": {f"x{i}": list(reach[v]) for i, v in sigma.items},
            "other_word": list(reach[other])}


def check_certificate(g: Grammar, cert: dict, pair) -> list:
    problems = []
    s = g.store
    W = g.term(cert["pivot"])
    T, U = pair
    headed, other = (T, U) if cert["side"] == "L" else (U, T)
    G = g.term(cert["head"])
    if s.depth(G) > cert["d"]:
        problems.append("head too deep")
    sigma = s.subst({int(x[1:]): g.term(v) for x, v in cert["sigma"].items()})
    if s.apply(G, sigma) != headed:
        problems.append("head does not reassemble the balanced component")
    for x, w in cert["words"].items():
        if len(w) > cert["k"] or path(g, W, w) != g.term(cert["sigma"][x]):
            problems.append(f"range term {x} not reachable within k")
    w = cert["other_word"]
    if len(w) > cert["k"] or path(g, W, w) != other:
        problems.append("other component not reachable within k")
    return problems


# rounds

@dataclass
class Round:
    start: tuple
    k: int
    chain: list
    eligible: list = field(default_factory=list)
    pick: tuple | None = None
    u1: tuple = ()
    u2: tuple = ()
    balance: dict | None = None
    next: tuple | None = None


class Game:
    def __init__(self, g: Grammar, config: GameConfig):
        self.g = g
        self.config = config
        self.consts = play_constants(g)
        self.k_bal = config.k_override or self.consts.M1
        self.head_depth = (config.head_depth_override if config.head_depth_override is not None
                           else self.consts.Mprime0)
        self.rounds: list[Round] = []
        self.notes: list = []
        self.uncertified = bool(config.k_override or config.head_depth_override is not None
                                or config.proxy != "exact" or not self.consts.full_arity)

    def level(self, T: Handle, U: Handle) -> EqLevel:
        return eqlevel(self.g, T, U, self.config.cap, self.config.budget)

    def level_key(self, T: Handle, U: Handle):
        """Sort key: lower eq-level first, AtLeast after Finite, Omega last."""
        e = self.level(T, U)
        rank = 0 if e.is_finite else (1 if not e.is_omega else 2)
        return (rank, e.value, T, U)

    # chain witnesses

    def chain_paths(self, chain: list) -> list:
        """Per level, reachable pairs of the chain with their back-pointers."""
        g = self.g
        reach = [{chain[0][0]: None}]
        for j in range(1, len(chain)):
            members = set(chain[j])
            cur = {}
            for (s, t) in reach[j - 1]:
                for r1, s2 in g.steps_rule(s):
                    for r2, t2 in g.steps_rule(t):
                        if r1.action == r2.action and (s2, t2) in members and (s2, t2) not in cur:
                            cur[(s2, t2)] = ((s, t), r1.id, r2.id)
            reach.append(cur)
        return reach

    @staticmethod
    def words_for(reach: list, pick) -> tuple:
        u1, u2 = [], []
        p = pick
        for j in range(len(reach) - 1, 0, -1):
            prev, r1, r2 = reach[j][p]
            u1.append(r1)
            u2.append(r2)
            p = prev
        return tuple(reversed(u1)), tuple(reversed(u2))

    def apply_balance(self, rnd: Round, ev: dict) -> tuple | None:
        """Validate a balancing event; returns the resulting pair."""
        s = self.g.store
        T2, U2 = rnd.pick
        earlier = set()
        for B in rnd.chain[:-1]:
            earlier.update(B)
        G = ev["_G"]
        sigma, sigma2 = ev["_sigma"], ev["_sigma2"]
        if s.depth(G) > self.head_depth:
            return None
        headed = T2 if ev["side"] == "L" else U2
        if s.apply(G, sigma) != headed:
            return None
        if sigma.support != sigma2.support and set(sigma2.support) - set(sigma.support):
            return None
        m2 = sigma2.as_dict()
        for i, V in sigma.items:
            V2 = m2.get(i, s.var(i))
            if (ev["side"] == "L" and (V, V2) not in earlier) or (ev["side"] == "R" and (V2, V) not in earlier):
                return None
        new = s.apply(G, sigma2)
        return (new, U2) if ev["side"] == "L" else (T2, new)


# strategies

class Prover:
    name = "prover"

    def chain(self, game: Game, T: Handle, U: Handle):
        raise NotImplementedError

    def balance(self, game: Game, rnd: Round):
        return None


class GreedyProver(Prover):
    """Fixed k; every demand answered by the best-level matching move."""

    name = "greedy"

    def __init__(self, k: int = 1):
        self.k = k

    def choose(self, game: Game, options: list):
        # best eq-level first, earliest rule on ties (options come in rule order)
        best = None
        for o in options:
            key = game.level_key(*o)
            if best is None or (key[0], key[1]) > (best[0][0], best[0][1]):
                best = (key, o)
        if not best[0][0] == 0 and not best[0][0] == 2:
            game.uncertified = True
        return best[1]

    def chain(self, game: Game, T: Handle, U: Handle):
        g = game.g
        chain = [[(T, U)]]
        for _ in range(self.k):
            nxt = []
            for s, t in chain[-1]:
                if s == t and g.store.is_var(s):
                    continue
                if g.store.is_var(s) or g.store.is_var(t):
                    return chain if len(chain) > 1 else None
                rs, rt = g.steps_rule(s), g.steps_rule(t)
                if {r.action for r, _ in rs} != {r.action for r, _ in rt}:
                    return chain if len(chain) > 1 else None
                for r, s2 in rs:
                    nxt.append(self.choose(game, [(s2, t2) for r2, t2 in rt if r2.action == r.action]))
                for r, t2 in rt:
                    nxt.append(self.choose(game, [(s2, t2) for r2, s2 in rs if r2.action == r.action]))
            chain.append(list(dict.fromkeys(nxt)))
        return chain


class FirstMatchProver(GreedyProver):
    """Answers each demand with the first matching rule, no look-ahead."""

    name = "firstmatch"

    def choose(self, game: Game, options: list):
        return options[0]


class BalancingProver(GreedyProver):
    """k = M1 (or override), chains kept inside the equivalence proxy, and
    left/right balancing with least-height heads."""

    name = "balancing"

    def __init__(self):
        super().__init__(1)

    def chain(self, game: Game, T: Handle, U: Handle):
        self.k = game.k_bal
        return super().chain(game, T, U)

    def balance(self, game: Game, rnd: Round):
        prev = game.rounds[-1].balance["side"] if game.rounds and game.rounds[-1].balance else None
        T, U = rnd.start
        if prev != "R" and self._wants(game, T, rnd.pick[0], rnd.u1):
            ev = left_balance(game, rnd)
            if ev is not None:
                return ev
        if prev != "L" and self._wants(game, U, rnd.pick[1], rnd.u2):
            return right_balance(game, rnd)
        return None

    @staticmethod
    def _wants(game: Game, src: Handle, dst: Handle, word) -> bool:
        if len(word) and close_k(game.g, src, dst, len(word) - 1) is not None:
            return True
        return not classify_path(game.g, src, word, game.consts.M0).sinking


def _balance(game: Game, rnd: Round, side: str):
    g = game.g
    partner: dict = {}
    for j, B in enumerate(rnd.chain[:-1]):
        for (a, b) in B:
            if side == "L":
                partner.setdefault(a, (b, j))
            else:
                partner.setdefault(b, (a, j))
    T2, U2 = rnd.pick
    headed = T2 if side == "L" else U2
    res = min_height_head(g, headed, lambda u: u in partner, game.head_depth, _base_var(g, T2, U2))
    if res is None:
        return None
    G, sigma = res
    if not sigma.items:
        return None
    sigma2 = Subst.of({i: partner[V][0] for i, V in sigma.items})
    return {"side": side, "_G": G, "_sigma": sigma, "_sigma2": sigma2,
            "levels": [partner[V][1] for _, V in sigma.items]}


def left_balance(game: Game, rnd: Round):
    return _balance(game, rnd, "L")


def right_balance(game: Game, rnd: Round):
    return _balance(game, rnd, "R")


class Refuter:
    name = "refuter"

    def pick(self, game: Game, rnd: Round):
        raise NotImplementedError


class LeastEqlevelRefuter(Refuter):
    name = "least-eqlevel"

    def pick(self, game: Game, rnd: Round):
        return min(rnd.eligible, key=lambda p: game.level_key(*p))


class FirstRefuter(Refuter):
    name = "first"

    def pick(self, game: Game, rnd: Round):
        return rnd.eligible[0]


class RandomRefuter(Refuter):
    name = "random"

    def pick(self, game: Game, rnd: Round):
        rng = random.Random(game.config.seed * 1000003 + len(game.rounds))
        return rnd.eligible[rng.randrange(len(rnd.eligible))]


def least_eqlevel_refuter(cap: int | None = None) -> Refuter:
    return LeastEqlevelRefuter()


def balancing_prover(overrides: dict | None = None) -> Prover:
    return BalancingProver()


PROVERS = {"balancing": BalancingProver, "greedy": GreedyProver, "firstmatch": FirstMatchProver}
REFUTERS = {"least-eqlevel": LeastEqlevelRefuter, "first": FirstRefuter, "random": RandomRefuter}


# play

def grammar_sha(g: Grammar) -> str:
    return hashlib.sha256(g.dump().encode()).hexdigest()


def _pair_json(g: Grammar, p) -> list:
    return [g.render(p[0]), g.render(p[1])]


def _round_json(g: Grammar, r: Round) -> dict:
    bal = None
    if r.balance is not None:
        b = r.balance
        bal = {"side": b["side"], "head": g.render(b["_G"]),
               "sigma": {f"x{i}": g.render(v) for i, v in b["_sigma"].items},
               "sigma_prime": {f"x{i}": g.render(v) for i, v in b["_sigma2"].items},
               "partner_levels": b["levels"], "pivot": b["pivot"], "certificate": b["certificate"]}
    return {"start": _pair_json(g, r.start), "k": r.k,
            "chain": [[_pair_json(g, p) for p in B] for B in r.chain],
            "pick": _pair_json(g, r.pick) if r.pick else None,
            "words": {"u1": list(r.u1), "u2": list(r.u2)},
            "balance": bal,
            "next": _pair_json(g, r.next) if r.next else None}


def play(g: Grammar, T0: Handle, U0: Handle, prover: Prover | None = None, refuter: Refuter | None = None,
         config: GameConfig | None = None, extra: dict | None = None) -> dict:
    """Run one play and return its transcript (a JSON-ready dict)."""
    config = config or GameConfig()
    prover = prover or PROVERS[config.prover]()
    refuter = refuter or REFUTERS[config.refuter]()
    game = Game(g, config)
    outcome = _run(game, T0, U0, prover, refuter, extra or {})
    return _transcript(game, (T0, U0), prover, refuter, outcome, extra or {})


def _run(game: Game, T: Handle, U: Handle, prover: Prover, refuter: Refuter, extra: dict) -> dict:
    g, cfg = game.g, game.config
    seen = set()
    for i in range(cfg.max_rounds):
        key = frozenset((T, U))
        if key in seen:
            return {"winner": PROVER, "reason": REPEAT, "round": i + 1}
        seen.add(key)
        chain = prover.chain(game, T, U)
        if chain is None:
            return {"winner": REFUTER, "reason": NOT_COVERABLE, "round": i + 1}
        chain = [list(B) for B in chain]
        if any(g.store.text_size(t, cfg.max_text) > cfg.max_text for B in chain for p in B for t in p):
            return {"winner": None, "reason": SIZE_LIMIT, "round": i + 1}
        if chain[0] != [(T, U)] or len(chain) < 2 or not all(
                covers_all(g, chain[j + 1], chain[j]) for j in range(len(chain) - 1)):
            return {"winner": REFUTER, "reason": FORFEIT, "round": i + 1, "detail": "invalid chain"}
        k = len(chain) - 1
        rnd = Round((T, U), k, chain)
        reach = game.chain_paths(chain)
        earlier = set()
        for B in chain[:-1]:
            earlier.update(B)
        rnd.eligible = [p for p in chain[-1] if p in reach[-1] and p not in earlier]
        if not rnd.eligible:
            game.rounds.append(rnd)
            return {"winner": PROVER, "reason": SUBSET_COVERED, "round": i + 1}
        pick = refuter.pick(game, rnd)
        if pick not in rnd.eligible:
            game.rounds.append(rnd)
            return {"winner": PROVER, "reason": FORFEIT, "round": i + 1, "detail": "illegal pick"}
        rnd.pick = pick
        rnd.u1, rnd.u2 = game.words_for(reach, pick)
        nxt = pick
        if cfg.version >= 2:
            ev = prover.balance(game, rnd)
            if ev is not None:
                res = game.apply_balance(rnd, ev)
                if res is None:
                    game.rounds.append(rnd)
                    return {"winner": REFUTER, "reason": FORFEIT, "round": i + 1, "detail": "illegal balancing"}
                pivot = U if ev["side"] == "L" else T
                ev["pivot"] = g.render(pivot)
                ev["certificate"] = close_lr(g, pivot, res, game.head_depth, k, ev["side"])
                rnd.balance = ev
                nxt = res
        rnd.next = nxt
        game.rounds.append(rnd)
        if cfg.version >= 3 and extra.get("ell") is not None:
            found = extract_ng_presentation(game, game.rounds, extra.get("n0"), extra.get("g0"))
            if found is not None and len(found[0].heads) > extra["ell"]:
                return {"winner": PROVER, "reason": NG_OVERFLOW, "round": i + 1,
                        "length": len(found[0].heads)}
        T, U = nxt
    return {"winner": None, "reason": EXHAUSTED, "round": cfg.max_rounds}


def _transcript(game: Game, start, prover, refuter, outcome: dict, extra: dict) -> dict:
    g = game.g
    cfg = asdict(game.config)
    cfg["prover"], cfg["refuter"] = prover.name, refuter.name
    cfg["k_policy"] = "override" if game.config.k_override else "M1"
    cfg["k"] = game.k_bal
    cfg["head_depth"] = game.head_depth
    cfg["constants"] = asdict(game.consts)
    cfg["head_tiebreak"] = "least height, holes preferred, canonical handle order"
    if extra.get("v3"):
        cfg["v3"] = extra["v3"]
    return {"grammar_sha": grammar_sha(g), "config": cfg, "start": _pair_json(g, start),
            "rounds": [_round_json(g, r) for r in game.rounds],
            "outcome": outcome, "certified": not game.uncertified}


def dumps(transcript: dict) -> str:
    return json.dumps(transcript, sort_keys=True, indent=1)


def config_from_transcript(t: dict) -> GameConfig:
    c = t["config"]
    return GameConfig(**{k: c[k] for k in GameConfig.__dataclass_fields__})


def replay(g: Grammar, transcript: dict) -> dict:
    """Re-run a recorded play with the strategies named in its config."""
    cfg = config_from_transcript(transcript)
    if "v3" in transcript["config"]:
        v3 = transcript["config"]["v3"]
        setup = V3Setup.from_json(g, v3["setup"])
        return play_v3(g, g.term(v3["E0"]), g.term(v3["F0"]), setup, cfg)
    T0, U0 = (g.term(x) for x in transcript["start"])
    return play(g, T0, U0, config=cfg)


def validate_transcript(g: Grammar, t: dict) -> list:
    """Re-check chains, picks, witness words and balancing certificates."""
    problems = []
    s = g.store
    if t["grammar_sha"] != grammar_sha(g):
        problems.append("grammar fingerprint mismatch")
    prev_next = tuple(g.term(x) for x in t["start"])
    for n, r in enumerate(t["rounds"], start=1):
        start = tuple(g.term(x) for x in r["start"])
        if prev_next is not None and start != prev_next:
            problems.append(f"round {n}: start differs from previous next")
        chain = [[tuple(g.term(x) for x in p) for p in B] for B in r["chain"]]
        if chain[0] != [start]:
            problems.append(f"round {n}: B_0 is not the start pair")
        for j in range(len(chain) - 1):
            if not covers_all(g, chain[j + 1], chain[j]):
                problems.append(f"round {n}: B_{j + 1} does not cover B_{j}")
        if r["pick"] is None:
            continue
        pick = tuple(g.term(x) for x in r["pick"])
        earlier = set()
        for B in chain[:-1]:
            earlier.update(B)
        if pick not in chain[-1] or pick in earlier:
            problems.append(f"round {n}: pick not in B_k minus earlier sets")
        u1, u2 = r["words"]["u1"], r["words"]["u2"]
        if len(u1) != r["k"] or len(u2) != r["k"]:
            problems.append(f"round {n}: witness words have wrong length")
        if path(g, start[0], u1) != pick[0] or path(g, start[1], u2) != pick[1]:
            problems.append(f"round {n}: witness words do not reach the pick")
        if [g.rule[i].action for i in u1] != [g.rule[i].action for i in u2]:
            problems.append(f"round {n}: witness words have different labels")
        nxt = tuple(g.term(x) for x in r["next"])
        b = r["balance"]
        if b is None:
            if nxt != pick:
                problems.append(f"round {n}: next differs from pick without balancing")
        else:
            G = g.term(b["head"])
            sigma = s.subst({int(x[1:]): g.term(v) for x, v in b["sigma"].items()})
            sigma2 = s.subst({int(x[1:]): g.term(v) for x, v in b["sigma_prime"].items()})
            headed = pick[0] if b["side"] == "L" else pick[1]
            if s.apply(G, sigma) != headed:
                problems.append(f"round {n}: balancing head does not match the pick")
            want = (s.apply(G, sigma2), pick[1]) if b["side"] == "L" else (pick[0], s.apply(G, sigma2))
            if want != nxt:
                problems.append(f"round {n}: balancing result differs from next")
            m2 = sigma2.as_dict()
            for i, V in sigma.items:
                V2 = m2.get(i, s.var(i))
                pair = (V, V2) if b["side"] == "L" else (V2, V)
                if pair not in earlier:
                    problems.append(f"round {n}: balancing partner missing from earlier sets")
            cert = b["certificate"]
            if cert is None:
                problems.append(f"round {n}: no closeness certificate")
            else:
                problems += [f"round {n}: {p}" for p in check_certificate(g, cert, nxt)]
        prev_next = nxt
    return problems


# (n,g)-presentations from a play

def _cut(g: Grammar, V: Handle, D: int, base: int):
    """V = F sigma with sigma ranging over the subterms at depth D."""
    s = g.store
    holes: dict[Handle, int] = {}

    def go(u: Handle, d: int) -> Handle:
        if d == D:
            if u not in holes:
                holes[u] = base + len(holes)
            return s.var(holes[u])
        ks = s.children(u)
        if not ks:
            return u
        return s.app(s.root(u), [go(c, d + 1) for c in ks])

    F = go(V, 0)
    return F, Subst.of({i: u for u, i in holes.items()})


def _factor(g: Grammar, t: Handle, inv: dict, limit: int) -> Handle | None:
    s = g.store

    def go(u: Handle, d: int):
        if u in inv:
            return s.var(inv[u])
        ks = s.children(u)
        if not ks:
            return u
        if d >= limit:
            return None
        out = []
        for c in ks:
            v = go(c, d + 1)
            if v is None:
                return None
            out.append(v)
        return s.app(s.root(u), out)

    return go(t, 0)


def extract_ng_presentation(game: Game, rounds=None, n_bound=None, g_bound=None):
    """Present the bal-results after some pivot as (E_l sigma, F_l sigma)."""
    g = game.g
    rounds = game.rounds if rounds is None else rounds
    bal = [(i, r) for i, r in enumerate(rounds) if r.balance is not None]
    if len(bal) < 2:
        return None
    D = game.k_bal
    terms = [t for _, r in bal for t in (r.next[0], r.next[1], r.start[0], r.start[1])]
    base = _base_var(g, *terms)
    best = None
    for idx, (i, r) in enumerate(bal[:-1]):
        V0 = g.term(r.balance["pivot"])
        F, sigma = _cut(g, V0, D, base)
        inv = {v: k for k, v in sigma.items}
        heads = []
        limit = int(min(1 + max(g.store.depth(F), 0) + 4 * D * max(1, game.consts.Mprime0 + 1), 4096))
        for _, r2 in bal[idx + 1:]:
            E = _factor(g, r2.next[0], inv, limit)
            Fh = _factor(g, r2.next[1], inv, limit)
            if E is None or Fh is None:
                break
            heads.append((E, Fh))
        if len(heads) >= 1 and (best is None or len(heads) > len(best[0].heads)):
            used = set()
            for E, Fh in heads:
                used |= g.store.vars(E) | g.store.vars(Fh)
            sig = Subst(tuple((k, v) for k, v in sigma.items if k in used))
            pres = NgPresentation(sig, heads)
            if n_bound is not None and len(sig) > n_bound:
                continue
            if g_bound is not None and not validate_ng_sequence(
                    g, pres, n_bound if n_bound is not None else len(sig), g_bound,
                    require_decreasing=False).valid:
                continue
            best = (pres, {"pivot_round": i + 1, "V0": r.balance["pivot"], "depth": D})
    return best


def scaled_g0(game: Game) -> GrowthFn:
    """The derived growth bound with the play's (possibly overridden) constants."""
    c = SimpleNamespace(arity_max=game.consts.arity_max, M0=game.consts.M0, M1=game.k_bal,
                        Mprime0=game.head_depth, maxruleheight=maxruleheight(game.g))
    return default_g0(c)


# third game version

@dataclass
class V3Setup:
    C: CandidateSet
    n0: int
    g0: GrowthFn
    B: int
    S: int
    var_limit: int = 1

    def to_json(self, g: Grammar) -> dict:
        return {"C": [[g.render(E), g.render(F), lv] for E, F, lv in self.C.pairs],
                "n0": self.n0, "g0": list(self.g0.values(self.S)), "B": self.B, "S": self.S,
                "var_limit": self.var_limit}

    @staticmethod
    def from_json(g: Grammar, d: dict) -> "V3Setup":
        C = CandidateSet(g, [(g.term(E), g.term(F), lv) for E, F, lv in d["C"]])
        return V3Setup(C, d["n0"], GrowthFn(d["g0"]), d["B"], d["S"], d.get("var_limit", 1))


def play_v3(g: Grammar, E0: Handle, F0: Handle, setup: V3Setup, config: GameConfig | None = None,
            prover: Prover | None = None, refuter: Refuter | None = None) -> dict:
    config = config or GameConfig(version=3)
    if config.version != 3:
        config = GameConfig(**{**asdict(config), "version": 3})
    bad = setup.C.verify(config.cap, config.budget)
    if bad:
        raise SetupError(f"claimed levels do not verify: {bad[:3]}")
    inc = sizeinc(g)
    C = setup.C
    if not sufficient_size_bound(C, setup.n0, setup.g0, setup.B, inc, C):
        raise SetupError("size bound B is not sufficient")
    table = GrowthFn(setup.g0.values(setup.S))
    if not sufficient_segment_bound(C, setup.n0, table, setup.S, inc):
        raise SetupError("segment bound S is not sufficient")
    ell_c = ell(setup.n0, table, C, inc)
    rest = [p for p in enumerate_pairs(g, setup.B, setup.var_limit) if not C.contains(*p)]
    game_refuter = refuter or REFUTERS[config.refuter]()
    probe = Game(g, config)
    options = [(E0, F0)] + rest
    if isinstance(game_refuter, LeastEqlevelRefuter):
        keyed = [(probe.level_key(*p)[:2], n) for n, p in enumerate(options)]
        start = options[min(keyed)[1]]
    else:
        start = (E0, F0)
    extra = {"ell": ell_c, "n0": setup.n0, "g0": table,
             "v3": {"E0": g.render(E0), "F0": g.render(F0), "ell": ell_c,
                    "start": _pair_json(g, start), "rest_size": len(rest), "setup": setup.to_json(g)}}
    return play(g, start[0], start[1], prover, game_refuter, config, extra)
