"""Stratified bisimilarity, eq-levels and the covering machinery."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .grammar import Grammar, steps_action
from .terms import Handle, Subst

FINITE, ATLEAST, OMEGA_KIND = "finite", "atleast", "omega"


@dataclass(frozen=True, order=False)
class EqLevel:
    kind: str
    value: int = 0

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @property
    def is_omega(self) -> bool:
        return self.kind == OMEGA_KIND

    @property
    def determined(self) -> bool:
        return self.kind != ATLEAST

    def __str__(self):
        if self.kind == FINITE:
            return f"Finite({self.value})"
        if self.kind == ATLEAST:
            return f"AtLeast({self.value})"
        return "Omega"

    def to_json(self):
        return {"kind": self.kind, "value": self.value} if self.kind != OMEGA_KIND else {"kind": "omega"}

    @staticmethod
    def from_json(d) -> "EqLevel":
        return OMEGA if d["kind"] == OMEGA_KIND else EqLevel(d["kind"], d["value"])


def Finite(k: int) -> EqLevel:
    return EqLevel(FINITE, k)


def AtLeast(c: int) -> EqLevel:
    return EqLevel(ATLEAST, c)


OMEGA = EqLevel(OMEGA_KIND)


def el_min(a: EqLevel, b: EqLevel) -> EqLevel:
    if a.is_omega:
        return b
    if b.is_omega:
        return a
    if a.is_finite and b.is_finite:
        return a if a.value <= b.value else b
    if a.is_finite:
        a, b = b, a
    # a is AtLeast(c)
    if b.is_finite:
        return b if b.value <= a.value else a
    return AtLeast(min(a.value, b.value))


def el_max(a: EqLevel, b: EqLevel) -> EqLevel:
    if a.is_omega or b.is_omega:
        return OMEGA
    if a.is_finite and b.is_finite:
        return a if a.value >= b.value else b
    return AtLeast(max(a.value, b.value))


def el_lt(a: EqLevel, b: EqLevel) -> bool | None:
    """a < b, or None when the capped values cannot decide it."""
    if a.is_omega:
        return False
    if a.is_finite:
        if b.is_omega:
            return True
        if b.is_finite:
            return a.value < b.value
        return True if a.value < b.value else None
    # a = AtLeast(c)
    if b.is_finite:
        return False if b.value <= a.value else None
    return None


def el_ge(a: EqLevel, b: EqLevel) -> bool | None:
    r = el_lt(a, b)
    return None if r is None else not r


def el_sub(a: EqLevel, k: int) -> EqLevel:
    if a.is_omega:
        return a
    return EqLevel(a.kind, max(a.value - k, 0))


class Bisim:
    """Memoized stratified-level computations for one grammar."""

    def __init__(self, g: Grammar):
        self.g = g
        self.exact: dict = {}
        self.lower: dict = {}
        self.omega: set = set()

    def _succ(self, t: Handle) -> dict:
        out: dict = {}
        for a, v in steps_action(self.g, t):
            out.setdefault(a, []).append(v)
        return out

    def level(self, T: Handle, U: Handle, c: int) -> int:
        """min(eqlevel(T,U), c), exact."""
        if c <= 0 or T == U:
            return max(c, 0)
        key = (T, U) if T <= U else (U, T)
        if key in self.omega:
            return c
        e = self.exact.get(key)
        if e is not None:
            return min(e, c)
        if self.lower.get(key, 0) >= c:
            return c
        sT, sU = self._succ(T), self._succ(U)
        if sT.keys() != sU.keys():
            self.exact[key] = 0
            return 0
        best = c
        for a in sT:
            for left, right, flip in ((sT[a], sU[a], False), (sU[a], sT[a], True)):
                for x in left:
                    m = -1
                    for y in right:
                        v = self.level(y, x, best - 1) if flip else self.level(x, y, best - 1)
                        if v > m:
                            m = v
                            if m >= best - 1:
                                break
                    best = min(best, 1 + m)
                    if best == 0:
                        break
        if best < c:
            self.exact[key] = best
        else:
            self.lower[key] = c
        return best

    def approx_equiv(self, T: Handle, U: Handle, k: int) -> bool:
        return self.level(T, U, k) >= k

    def fragment(self, roots, budget: int) -> list | None:
        """Joint reachable states in BFS order, or None beyond ``budget``."""
        seen = {}
        order = []
        q = deque()
        for r in roots:
            if r not in seen:
                seen[r] = len(order)
                order.append(r)
                q.append(r)
        while q:
            t = q.popleft()
            for _, v in steps_action(self.g, t):
                if v not in seen:
                    if len(order) >= budget:
                        return None
                    seen[v] = len(order)
                    order.append(v)
                    q.append(v)
        return order

    def fragment_level(self, states: list, T: Handle, U: Handle) -> EqLevel:
        """Exact level on a successor-closed finite fragment."""
        idx = {s: i for i, s in enumerate(states)}
        succ = [[(a, idx[v]) for a, v in steps_action(self.g, s)] for s in states]
        block = [0] * len(states)
        count = 1
        k = 0
        while True:
            if block[idx[T]] != block[idx[U]]:
                return Finite(k - 1)
            ids: dict = {}
            new = [ids.setdefault((block[i], frozenset((a, block[j]) for a, j in succ[i])), len(ids))
                   for i in range(len(states))]
            k += 1
            if len(ids) == count:
                return OMEGA
            block, count = new, len(ids)

    def eqlevel(self, T: Handle, U: Handle, cap: int = 16, budget: int = 10000) -> EqLevel:
        if T == U:
            return OMEGA
        key = (T, U) if T <= U else (U, T)
        if key in self.omega:
            return OMEGA
        v = self.level(T, U, cap)
        if v < cap:
            return Finite(v)
        states = self.fragment([T, U], budget)
        if states is None:
            return AtLeast(cap)
        r = self.fragment_level(states, T, U)
        if r.is_omega:
            self.omega.add(key)
        else:
            self.exact[key] = r.value
        return r


def engine(g: Grammar) -> Bisim:
    b = getattr(g, "_bisim", None)
    if b is None:
        b = Bisim(g)
        g._bisim = b
    return b


def approx_equiv(g: Grammar, T: Handle, U: Handle, k: int) -> bool:
    return engine(g).approx_equiv(T, U, k)


def eqlevel(g: Grammar, T: Handle, U: Handle, cap: int = 16, budget: int = 10000) -> EqLevel:
    if cap < 1:
        raise ValueError("cap must be >= 1")
    return engine(g).eqlevel(T, U, cap, budget)


def leasteqlev(g: Grammar, B, cap: int = 16, budget: int = 10000) -> EqLevel:
    out = OMEGA
    for s, t in B:
        out = el_min(out, eqlevel(g, s, t, cap, budget))
    return out


def maxeqlev(g: Grammar, B, cap: int = 16, budget: int = 10000) -> EqLevel:
    out = Finite(0)
    for s, t in B:
        out = el_max(out, eqlevel(g, s, t, cap, budget))
    return out


# covering and expansions

def _is_var_loop(g: Grammar, s: Handle, t: Handle) -> bool:
    return s == t and g.store.is_var(s)


def covers(g: Grammar, B, pair) -> bool:
    s, t = pair
    if _is_var_loop(g, s, t):
        return True
    B = B if isinstance(B, (set, frozenset)) else set(B)
    sS, sT = steps_action(g, s), steps_action(g, t)
    for a, s2 in sS:
        if not any(b == a and (s2, t2) in B for b, t2 in sT):
            return False
    for a, t2 in sT:
        if not any(b == a and (s2, t2) in B for b, s2 in sS):
            return False
    return True


def covers_all(g: Grammar, B2, B1) -> bool:
    B2 = set(B2)
    return all(covers(g, B2, p) for p in B1)


def _demands(g: Grammar, B):
    """Per-demand option lists, ordered by (pair, side, demanding rule)."""
    out = []
    for s, t in B:
        if _is_var_loop(g, s, t):
            continue
        if g.store.is_var(s) or g.store.is_var(t):
            return None
        rs, rt = g.steps_rule(s), g.steps_rule(t)
        for r, s2 in rs:
            opts = [(s2, t2) for r2, t2 in rt if r2.action == r.action]
            if not opts:
                return None
            out.append(opts)
        for r, t2 in rt:
            opts = [(s2, t2) for r2, s2 in rs if r2.action == r.action]
            if not opts:
                return None
            out.append(opts)
    return out


def expansions(g: Grammar, B, minimal_only: bool = False):
    """Covering sets built from choice functions, in a fixed order."""
    B = list(dict.fromkeys(B))
    dem = _demands(g, B)
    if dem is None:
        return
    seen = set()
    for choice in itertools.product(*dem):
        cand = tuple(dict.fromkeys(choice))
        key = frozenset(cand)
        if key in seen:
            continue
        seen.add(key)
        if minimal_only and not _is_minimal(g, cand, B):
            continue
        yield cand


def _is_minimal(g: Grammar, cand, B) -> bool:
    for p in cand:
        rest = set(cand) - {p}
        if covers_all(g, rest, B):
            return False
    return True


# witness algebra

LEFT_SINKS, RIGHT_SINKS = "LeftSinks", "RightSinks"


@dataclass(frozen=True)
class EqWitness:
    var: int
    H: Handle
    word: tuple
    side: str


def find_eq_witness(g: Grammar, E: Handle, F: Handle, sigma: Subst, cap: int = 16,
                    budget: int = 10000) -> EqWitness | None:
    s = g.store
    base = eqlevel(g, E, F, cap, budget)
    if not base.is_finite:
        return None
    k = base.value
    e = eqlevel(g, s.apply(E, sigma), s.apply(F, sigma), cap, budget)
    if el_lt(base, e) is not True:
        return None
    need = cap - k if not e.is_finite else e.value - k
    supp = set(sigma.support)
    bis = engine(g)
    seen = {(E, F)}
    q = deque([(E, F, ())])
    while q:
        a, b, w = q.popleft()
        for x, H, side in ((a, b, LEFT_SINKS), (b, a, RIGHT_SINKS)):
            i = s.var_index(x)
            if i is not None and i in supp and H != x:
                if bis.approx_equiv(s.apply(x, sigma), s.apply(H, sigma), need):
                    return EqWitness(i, H, w, side)
        if len(w) >= k:
            continue
        sa, sb = steps_action(g, a), steps_action(g, b)
        for act, a2 in sa:
            for act2, b2 in sb:
                if act == act2 and (a2, b2) not in seen:
                    seen.add((a2, b2))
                    q.append((a2, b2, w + (act,)))
    return None


def eqlevel_limit_invariance_check(g: Grammar, x: int, H: Handle, sigma: Subst, cap: int = 16,
                                   budget: int = 10000) -> bool:
    s = g.store
    if s.var_index(H) == x:
        raise ValueError("H must differ from the variable")
    Hp = s.limit(x, H)
    xs = s.apply(s.var(x), sigma)
    a = eqlevel(g, xs, s.apply(H, sigma), cap, budget)
    b = eqlevel(g, xs, s.apply(Hp, sigma), cap, budget)
    return levels_agree(a, b)


def levels_agree(a: EqLevel, b: EqLevel) -> bool:
    """False only when the two capped levels are provably different."""
    if a.determined and b.determined:
        return a == b
    return el_lt(a, b) is not True and el_lt(b, a) is not True
