"""Length bounds for eqlevel-decreasing (n,g)-sequences."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .bisim import EqLevel, Finite, OMEGA, eqlevel
from .grammar import Grammar, parse_grammar
from .terms import Handle, Subst


class SegmentError(LookupError):
    """A growth function was queried outside its known segment."""


class Undetermined(RuntimeError):
    """Some eq-level needed by the computation is only known as AtLeast(cap)."""


class InsufficientBound(ValueError):
    pass


class GrowthFn:
    """Nondecreasing g: N+ -> N+ given by a table and an optional tail."""

    def __init__(self, table: Sequence[int] = (), tail: Callable[[int], int] | None = None):
        self.table = tuple(int(v) for v in table)
        self.tail = tail
        if any(v < 1 for v in self.table):
            raise ValueError("growth values must be positive")
        if any(a > b for a, b in zip(self.table, self.table[1:])):
            raise ValueError("growth table must be nondecreasing")

    @staticmethod
    def constant(c: int) -> "GrowthFn":
        return GrowthFn((), lambda j: c)

    def __call__(self, j: int) -> int:
        if j < 1:
            raise ValueError("growth functions are defined on positive integers")
        if j <= len(self.table):
            return self.table[j - 1]
        if self.tail is None:
            raise SegmentError(j)
        return self.tail(j)

    def restrict(self, S: int) -> "GrowthFn":
        return _Restricted(self, S)

    def values(self, upto: int) -> list:
        return [self(j) for j in range(1, upto + 1)]


class _Restricted(GrowthFn):
    def __init__(self, base: GrowthFn, S: int):
        self.base, self.S = base, S
        self.table, self.tail = (), None

    def __call__(self, j: int) -> int:
        if j > self.S:
            raise SegmentError(j)
        return self.base(j)


class _Shifted(GrowthFn):
    """g'(j) = g(shift + j) + add."""

    def __init__(self, base: GrowthFn, shift: int, add: int):
        self.base, self.shift, self.add = base, shift, add
        self.table, self.tail = (), None

    def __call__(self, j: int) -> int:
        if j < 1:
            raise ValueError("growth functions are defined on positive integers")
        return self.base(self.shift + j) + self.add


def next_growth(g: GrowthFn, mel1: int, sizeinc: int) -> GrowthFn:
    return _Shifted(g, 1 + mel1, 2 * (g(1) + mel1 * sizeinc))


# term and pair enumeration

def enumerate_terms(g: Grammar, max_size: int, var_limit: int) -> list:
    """Canonical regular terms (cyclic ones included) with pressize <= max_size.

    Graphs are generated with nodes numbered in DFS discovery order, so each
    rooted graph is produced once; only minimal ones are kept.
    """
    labels = [(A, m) for A, m in g.nonterminals.items()] + [(i, 0) for i in range(1, var_limit + 1)]
    store = g.store
    found: dict[Handle, int] = {}
    nodes: list = []

    def emit():
        h = store.intern_graph([(s, list(k)) for s, k in nodes], 0)
        if h not in found and store.pressize(h) == len(nodes):
            found[h] = len(nodes)

    def fill(slots: list):
        if not slots:
            emit()
            return
        node, pos = slots[-1]
        rest = slots[:-1]
        for j in range(len(nodes)):
            nodes[node][1][pos] = j
            fill(rest)
        if len(nodes) < max_size:
            for sym, m in labels:
                nodes.append((sym, [None] * m))
                nodes[node][1][pos] = len(nodes) - 1
                fill(rest + [(len(nodes) - 1, p) for p in reversed(range(m))])
                nodes.pop()
        nodes[node][1][pos] = None

    if max_size >= 1:
        for sym, m in labels:
            nodes.append((sym, [None] * m))
            fill([(0, p) for p in reversed(range(m))])
            nodes.pop()
    return sorted(found, key=lambda h: (found[h], store.render(h)))


def enumerate_pairs(g: Grammar, max_pressize: int, var_limit: int):
    terms = enumerate_terms(g, max_pressize - 1, var_limit)
    size = {t: g.store.pressize(t) for t in terms}
    for E in terms:
        for F in terms:
            if size[E] + size[F] <= max_pressize:
                yield (E, F)


# max eq-levels

_WORKER = {}


def _worker_init(text: str, cap: int, budget: int):
    _WORKER["g"] = parse_grammar(text)
    _WORKER["cap"], _WORKER["budget"] = cap, budget


def _worker_level(pair_text):
    g = _WORKER["g"]
    e = eqlevel(g, g.term(pair_text[0]), g.term(pair_text[1]), _WORKER["cap"], _WORKER["budget"])
    return e.kind, e.value


class ExactMel:
    """bmel_b = maxeqlev(size_{<=b} minus equivalent pairs), computed exactly."""

    def __init__(self, g: Grammar, var_limit: int = 1, cap: int = 16, budget: int = 10000, jobs: int = 1):
        self.g, self.var_limit, self.cap, self.budget, self.jobs = g, var_limit, cap, budget, jobs
        self._memo: dict[int, int] = {}
        self.trace: list = []

    def levels(self, b: int) -> list:
        pairs = [(E, F) for E, F in enumerate_pairs(self.g, b, self.var_limit) if E != F]
        if self.jobs > 1 and len(pairs) > 64:
            texts = [(self.g.render(E), self.g.render(F)) for E, F in pairs]
            with ProcessPoolExecutor(self.jobs, initializer=_worker_init,
                                     initargs=(self.g.dump(), self.cap, self.budget)) as ex:
                res = list(ex.map(_worker_level, texts, chunksize=32))
            return [(p, EqLevel(k, v) if k != "omega" else OMEGA) for p, (k, v) in zip(pairs, res)]
        return [(p, eqlevel(self.g, p[0], p[1], self.cap, self.budget)) for p in pairs]

    def __call__(self, b: int) -> int:
        if b in self._memo:
            return self._memo[b]
        best = 0
        bad = []
        for (E, F), e in self.levels(b):
            if e.is_omega:
                continue
            if not e.is_finite:
                bad.append((self.g.render(E), self.g.render(F)))
                continue
            best = max(best, e.value)
        if bad:
            raise Undetermined(f"bmel_{b}: undetermined pairs {bad[:5]}")
        self._memo[b] = best
        self.trace.append((b, best))
        return best


@dataclass
class CandidateSet:
    """Claimed non-equivalent pairs with their claimed (finite) eq-levels."""

    g: Grammar
    pairs: list = field(default_factory=list)  # (E, F, level)
    trace: list = field(default_factory=list)

    def verify(self, cap: int = 16, budget: int = 10000) -> list:
        bad = []
        for E, F, lv in self.pairs:
            e = eqlevel(self.g, E, F, cap, budget)
            if e != Finite(lv):
                bad.append((self.g.render(E), self.g.render(F), lv, str(e)))
        return bad

    def max_pressize(self) -> int:
        return max((self.g.store.pressize(E, F) for E, F, _ in self.pairs), default=0)

    def contains(self, E: Handle, F: Handle) -> bool:
        return any(E == a and F == b for a, b, _ in self.pairs)

    def __call__(self, b: int) -> int:
        v = max((lv for E, F, lv in self.pairs if self.g.store.pressize(E, F) <= b), default=0)
        self.trace.append((b, v))
        return v


def bmel(g: Grammar, b: int, C: CandidateSet | None = None, cap: int = 16, budget: int = 10000,
         var_limit: int = 1, jobs: int = 1) -> EqLevel:
    if C is not None:
        return Finite(C(b))
    return Finite(ExactMel(g, var_limit, cap, budget, jobs)(b))


def ell(n: int, growth: GrowthFn, mel, sizeinc: int, trace: list | None = None) -> int:
    """The bound l_{n,g}; ``mel`` maps a size bound b to the (b)mel value."""
    total = 0
    g = growth
    for level in range(n, -1, -1):
        try:
            g1 = g(1)
        except SegmentError as exc:
            raise InsufficientBound(f"growth segment too short (index {exc.args[0]})") from exc
        m = mel(g1)
        if trace is not None:
            trace.append({"n": level, "g1": g1, "mel": m})
        total += 1 + m
        if level:
            g = next_growth(g, m, sizeinc)
    return total


def sufficient_size_bound(mel, n: int, growth: GrowthFn, B: int, sizeinc: int,
                          C: CandidateSet | None = None) -> bool:
    if C is None and isinstance(mel, CandidateSet):
        C = mel
    if C is not None and C.max_pressize() > B:
        return False
    g = growth
    try:
        for level in range(n, -1, -1):
            if g(1) > B:
                return False
            if level:
                g = next_growth(g, mel(g(1)), sizeinc)
    except SegmentError:
        return False
    return True


def min_segment_bound(mel, n: int, growth: GrowthFn, sizeinc: int) -> int:
    if n == 0:
        return 1
    m = mel(growth(1))
    return 1 + m + min_segment_bound(mel, n - 1, next_growth(growth, m, sizeinc), sizeinc)


def sufficient_segment_bound(mel, n: int, growth: GrowthFn, S: int, sizeinc: int) -> bool:
    if S < 1:
        return False
    try:
        return S >= min_segment_bound(mel, n, growth.restrict(S), sizeinc)
    except SegmentError:
        return False


def default_g0(consts) -> GrowthFn:
    """Generous growth bound read off the forcing argument.

    g0(l) = 2 N^2 where N = 1 + m + ... + m^H bounds the nodes of a depth-H tree,
    with H = M'0 + depth(H_l) + M1*maxruleheight,
    depth(H_l) <= depth(G_l) + M1 and depth(G_l) <= 1 + l (2 M1 + M0) maxruleheight.
    """
    m, M0, M1, Mp0, mrh = consts.arity_max, consts.M0, consts.M1, consts.Mprime0, consts.maxruleheight

    def g0(j: int) -> int:
        depth_G = 1 + j * (2 * M1 + M0) * mrh
        H = Mp0 + depth_G + M1 + M1 * mrh
        nodes = H + 1 if m <= 1 else (m ** (H + 1) - 1) // (m - 1)
        return 2 * nodes ** 2

    return GrowthFn((), g0)


# (n,g)-sequences

@dataclass
class NgPresentation:
    sigma: Subst
    heads: list  # (E_j, F_j)


@dataclass
class NgVerdict:
    valid: bool
    violations: list
    levels: list
    undetermined: bool = False


def validate_ng_sequence(g: Grammar, p: NgPresentation, n: int, growth: GrowthFn,
                         require_decreasing: bool = True, cap: int = 16, budget: int = 10000) -> NgVerdict:
    s = g.store
    bad = []
    if len(p.sigma) > n:
        bad.append(f"support size {len(p.sigma)} exceeds {n}")
    for j, (E, F) in enumerate(p.heads, start=1):
        try:
            lim = growth(j)
        except SegmentError:
            bad.append(f"g({j}) unknown")
            continue
        if s.pressize(E, F) > lim:
            bad.append(f"pressize of head {j} is {s.pressize(E, F)} > g({j}) = {lim}")
    levels = []
    undetermined = False
    if require_decreasing:
        prev = None
        for j, (E, F) in enumerate(p.heads, start=1):
            e = eqlevel(g, s.apply(E, p.sigma), s.apply(F, p.sigma), cap, budget)
            levels.append(e)
            if e.is_omega:
                bad.append(f"element {j} is equivalent")
            elif not e.is_finite:
                undetermined = True
            elif prev is not None and prev.is_finite and e.value >= prev.value:
                bad.append(f"eq-level does not decrease at element {j}")
            prev = e
    return NgVerdict(not bad and not undetermined, bad, levels, undetermined)


def _longest_decreasing(avail: list, length_cap: int) -> tuple[int, list]:
    """Longest strictly decreasing choice l_1 > l_2 > ... with l_j in avail[j-1]."""
    memo: dict = {}

    def f(j: int, prev: float):
        if j > min(len(avail), length_cap):
            return 0, []
        key = (j, prev)
        if key not in memo:
            best = (0, [])
            for lv in sorted(avail[j - 1], reverse=True):
                if lv < prev:
                    sub = f(j + 1, lv)
                    if 1 + sub[0] > best[0]:
                        best = (1 + sub[0], [lv] + sub[1])
            memo[key] = best
        return memo[key]

    return f(1, float("inf"))


def lemma2_bruteforce_check(g: Grammar, n: int, growth: GrowthFn, var_limit: int = 2, pool_size: int = 3,
                            cap: int = 16, budget: int = 10000, sizeinc: int | None = None,
                            jobs: int = 1) -> dict:
    """Exhaustively search eqlevel-decreasing (n,g)-sequences and compare with l_{n,g}."""

    s = g.store
    if sizeinc is None:
        sizeinc = max((s.pressize(r.rhs) for r in g.rules), default=0)
    mel = ExactMel(g, var_limit, cap, budget, jobs)
    bound = ell(n, growth, mel, sizeinc)
    positions = bound + 1
    limits = []
    for j in range(1, positions + 1):
        try:
            limits.append(growth(j))
        except SegmentError:
            break
    heads = list(enumerate_pairs(g, max(limits), var_limit))
    head_size = {p: s.pressize(*p) for p in heads}
    pool = enumerate_terms(g, pool_size, var_limit)
    sigmas = [Subst()]
    if n >= 1:
        for k in range(1, n + 1):
            for xs in itertools.combinations(range(1, var_limit + 1), k):
                for imgs in itertools.product(pool, repeat=k):
                    sg = s.subst(dict(zip(xs, imgs)))
                    if len(sg) == k:
                        sigmas.append(sg)
    best = (0, None, [])
    undetermined = []
    for sg in sigmas:
        lv = {}
        for p in heads:
            e = eqlevel(g, s.apply(p[0], sg), s.apply(p[1], sg), cap, budget)
            if e.is_finite:
                lv[p] = e.value
            elif not e.is_omega:
                undetermined.append((g.render(p[0]), g.render(p[1]), sg.items))
        avail = [{lv[p] for p in lv if head_size[p] <= lim} for lim in limits]
        length, chain = _longest_decreasing(avail, positions)
        if length > best[0]:
            best = (length, sg, chain)
    if undetermined:
        raise Undetermined(f"{len(undetermined)} undetermined levels, e.g. {undetermined[:3]}")
    return {"n": n, "ell": bound, "max_found": best[0], "levels": best[2],
            "sigma": [(k, g.render(v)) for k, v in best[1].items] if best[1] is not None else [],
            "substitutions": len(sigmas), "heads": len(heads), "ok": best[0] <= bound,
            "bmel_trace": list(mel.trace)}
