"""Random graph/partition instances checked against the decomposition lower bound."""

import argparse
import json
import random

import _common  # noqa: F401
from randgen import random_blocks, random_grammar, random_graph

from fogbisim.quotient import make_partition, prop8_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--cap", type=int, default=6)
    ap.add_argument("--max-nodes", type=int, default=5)
    ap.add_argument("--seed", type=int, default=8)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    totals = {"checked": 0, "violations": 0, "undetermined": 0}
    for _ in range(args.instances):
        g = random_grammar(rng)
        gr = random_graph(rng, g, args.max_nodes)
        P = make_partition(g.store, gr, random_blocks(rng, len(gr), rng.randint(1, 3)))
        rep = prop8_check(g, gr, P, cap=args.cap, budget=3000)
        totals["checked"] += rep.checked
        totals["violations"] += len(rep.violations)
        totals["undetermined"] += len(rep.undetermined)
        for v in rep.violations:
            print("violation:", g.dump(), gr.to_json(), P.to_json(), v)
    print(json.dumps(totals))


if __name__ == "__main__":
    main()
