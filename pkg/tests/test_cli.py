import io
import json

import pytest
from conftest import LOOPS, N_GRAMMAR, SAMPLE_GRAMMAR, nterm
from oracles import chain_grammar_text

from fogbisim.cli import main
from fogbisim.pda import ANBN, Config, encode_config, parse_pda, pda_traces, to_grammar


GROW = "nonterminal P 1\nnonterminal N 1\naction a\naction b\nrule P(x1) a P(N(x1))\nrule N(x1) b x1\n"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in (("n", N_GRAMMAR), ("loops", LOOPS), ("sample", SAMPLE_GRAMMAR),
                       ("chain3", chain_grammar_text(3)), ("grow", GROW), ("anbn", ANBN), ("bad", "nonterminal A 1\nrule A a\n")):
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        out[name] = str(p)
    out["dir"] = tmp_path
    return out


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_exit_codes(files, capsys):
    assert run(capsys, "check", files["loops"], "A", "C")[0] == 0
    code, out = run(capsys, "check", files["n"], nterm(2), nterm(3))
    assert code == 1 and "2" in out
    code, out = run(capsys, "check", "--json", files["n"], "x1", "N(x1)")
    assert code == 1 and json.loads(out)["eqlevel"] == {"kind": "finite", "value": 0}
    assert run(capsys, "check", "--cap", "3", files["grow"], "P(x1)", "P(N(x1))")[0] == 2


def test_input_errors(files, capsys):
    assert run(capsys, "check", files["bad"], "A", "A")[0] == 64
    assert run(capsys, "check", files["n"], "N(", "x1")[0] == 64
    assert run(capsys, "check", files["n"], "x0", "x1")[0] == 64
    assert run(capsys, "check", "--cap", "0", files["n"], "x1", "x1")[0] == 64
    assert run(capsys, "check", str(files["dir"] / "missing"), "x1", "x1")[0] == 64


def test_sinkwords_chain(files, capsys):
    code, out = run(capsys, "sinkwords", "--json", files["chain3"])
    data = json.loads(out)
    assert code == 0
    assert [data["sink_words"][f"A{i}.1"]["len"] for i in (1, 2, 3)] == [1, 3, 7]
    assert data["M0"] == 8


def test_constants_and_lts(files, capsys):
    assert run(capsys, "constants", files["sample"])[0] == 64
    code, out = run(capsys, "constants", "--json", "--reduce", files["sample"])
    assert code == 0 and json.loads(out)["arity_max"] == 1
    code, out = run(capsys, "lts", "--json", "--depth", "2", files["n"], nterm(3))
    assert code == 0 and len(json.loads(out)["states"]) == 3


def test_bounds_empty_candidates(files, capsys):
    code, out = run(capsys, "bounds", "--n", "4")
    assert code == 0 and out.strip() == "ell = 5"
    code, out = run(capsys, "bounds", "--json", "--n", "0", "--g-const", "3")
    assert json.loads(out)["ell"] == 1


def test_import_pda_then_check(files, capsys):
    out_path = str(files["dir"] / "anbn.g")
    assert run(capsys, "import-pda", files["anbn"], "-o", out_path)[0] == 0
    assert run(capsys, "import-pda", "--no-swallow", files["anbn"])[0] == 64
    pda = parse_pda(ANBN)
    ctx = to_grammar(pda)
    configs = [Config("p", ("A", "Z")), Config("p", ("A", "A", "Z")), Config("q", ("A", "Z")),
               Config("q", ("A", "A", "Z"))]
    for c1 in configs:
        for c2 in configs:
            if c1 == c2:
                continue
            # deterministic systems: level k iff trace sets agree up to depth k only
            direct = next(d for d in range(12) if pda_traces(pda, c1, d + 1) != pda_traces(pda, c2, d + 1))
            code, out = run(capsys, "check", "--json", out_path, ctx.grammar.render(encode_config(ctx, c1)),
                            ctx.grammar.render(encode_config(ctx, c2)))
            assert code == 1
            assert json.loads(out)["eqlevel"]["value"] == direct


def test_decompose(files, capsys):
    code, out = run(capsys, "decompose", "--json", "--blocks", "0,1;2", files["n"], nterm(2))
    data = json.loads(out)
    assert data["partition"] == [[0, 1], [2]]
    assert len(data["decomposition"]) == 3 and data["check"]["violations"] == []
    code, out = run(capsys, "decompose", "--json", files["n"], nterm(2))
    assert json.loads(out)["partition"] == [[0], [1], [2]]


def test_game_transcript_round_trip(files, capsys):
    path = str(files["dir"] / "t.json")
    code, out = run(capsys, "game", "--override-k", "1", "-o", path, files["n"], nterm(2), nterm(4))
    assert code == 1 and out.startswith("Refuter")
    code, out = run(capsys, "replay", "--json", files["n"], path)
    assert code == 0 and json.loads(out) == {"problems": [], "identical_replay": True}
    t = json.loads(open(path).read())
    t["rounds"][0]["pick"] = t["rounds"][0]["start"]
    with open(path, "w") as fh:
        json.dump(t, fh)
    assert run(capsys, "replay", files["n"], path)[0] == 1


def test_game_prover_wins(files, capsys):
    code, out = run(capsys, "game", "--override-k", "2", files["loops"], "A", "C")
    assert code == 0 and out.startswith("Prover")


def test_interactive_refuter(files, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("x\n0\n0\n0\n0\n"))
    code, out = run(capsys, "game", "--interactive", "--override-k", "1", files["n"], nterm(2), nterm(3))
    assert code == 1 and "pick:" in out and "enter a number" in out
