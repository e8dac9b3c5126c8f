"""Sink-word lengths and M0 on the doubling chain grammar A_j(x) -> A_{j-1}(A_{j-1}(x))."""

import argparse
import json
import time

from fogbisim.grammar import constants, parse_grammar, sink_words


def chain(k: int) -> str:
    lines = [f"nonterminal A{j} 1" for j in range(1, k + 1)] + ["action a", "rule A1(x1) a x1"]
    lines += [f"rule A{j}(x1) a A{j - 1}(A{j - 1}(x1))" for j in range(2, k + 1)]
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-k", type=int, default=16)
    args = ap.parse_args()
    rows = []
    for k in range(1, args.max_k + 1):
        t0 = time.perf_counter()
        g = parse_grammar(chain(k))
        sw = sink_words(g)
        rows.append({"k": k, "len": sw.length[(f"A{k}", 1)], "M0": constants(g).M0,
                     "seconds": round(time.perf_counter() - t0, 4)})
    print(json.dumps(rows, indent=1))


if __name__ == "__main__":
    main()
