"""Exhaustive search for long eqlevel-decreasing (n,g)-sequences on a one-nonterminal grammar."""

import argparse
import json
import os

from fogbisim.bounds import GrowthFn, lemma2_bruteforce_check
from fogbisim.grammar import parse_grammar

DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "n_grammar.txt")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grammar", default=DATA)
    ap.add_argument("--n", type=int, nargs="+", default=[0, 1])
    ap.add_argument("--g", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--var-limit", type=int, default=1)
    ap.add_argument("--pool-size", type=int, default=3)
    args = ap.parse_args()
    with open(args.grammar, encoding="utf-8") as fh:
        g = parse_grammar(fh.read())
    rows = []
    for n in args.n:
        for c in args.g:
            rep = lemma2_bruteforce_check(g, n, GrowthFn.constant(c), args.var_limit, args.pool_size)
            rows.append({k: rep[k] for k in ("n", "ell", "max_found", "levels", "sigma", "ok")} | {"g": c})
    print(json.dumps(rows, indent=1))


if __name__ == "__main__":
    main()
