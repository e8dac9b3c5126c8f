"""Play every bundled Prover against the least-eqlevel Refuter on random non-equivalent starts.

Prints per-prover win counts, round statistics relative to the start level,
and balancing counts; exits non-zero if any play breaks the round bound or
fails to replay.
"""

import argparse
import json
import random
import sys
from collections import Counter

import _common  # noqa: F401
from randgen import random_grammar, random_term

from fogbisim.bisim import eqlevel
from fogbisim.game import GameConfig, dumps, play, replay, validate_transcript

PROVERS = [("balancing", 1), ("balancing", 2), ("greedy", None), ("firstmatch", None)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--starts", type=int, default=50)
    ap.add_argument("--max-level", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--depth", type=int, default=3)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    stats = {f"{p}/{k}": Counter() for p, k in PROVERS}
    levels = Counter()
    bad = 0
    n = 0
    while n < args.starts:
        g = random_grammar(rng)
        T, U = random_term(rng, g, args.depth), random_term(rng, g, args.depth)
        e = eqlevel(g, T, U, 12, 5000)
        if not e.is_finite or e.value > args.max_level:
            continue
        n += 1
        levels[e.value] += 1
        for prover, k in PROVERS:
            cfg = GameConfig(prover=prover, k_override=k, head_depth_override=3, cap=12, budget=5000)
            t = play(g, T, U, config=cfg)
            o = t["outcome"]
            st = stats[f"{prover}/{k}"]
            st[o["winner"] or "none"] += 1
            st["rounds_minus_level"] += o["round"] - e.value
            st["balancings"] += sum(r["balance"] is not None for r in t["rounds"])
            ok = o["winner"] == "Refuter" and o["round"] <= e.value + 1
            ok &= not validate_transcript(g, t) and dumps(replay(g, t)) == dumps(t)
            if not ok:
                bad += 1
                print("violation:", prover, k, e, o, file=sys.stderr)
    print(json.dumps({"levels": dict(sorted(levels.items())), "provers": stats, "violations": bad},
                     indent=1, sort_keys=True))
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
