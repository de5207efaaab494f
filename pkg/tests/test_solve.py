import sys
import time
from importlib.resources import files

import psutil
import pytest

from muse import corpus
from muse.analysis import CHC, COCHC, MUCLP, SMT, SPLIT, classify
from muse.core import TRUE, Verdict
from muse.encode import EncodedQuery, encode
from muse.oracle import FiniteDomain
from muse.solve import (
    ENV_VAR,
    ConfigError,
    SolverConfig,
    SolverSet,
    VerifyOptions,
    classify_output,
    combine_split,
    config_path,
    load_config,
    parse_config,
    portfolio,
    run_backend,
    verify,
)

from conftest import ROOT, load, needs_z3

REPO_CONFIG = ROOT / "solvers.toml"


def fake(name, kind, script, timeout_s=30.0, **kw):
    """An adapter whose "solver" is a short Python snippet."""
    return SolverConfig(name, kind, "{python}", ("-c", script, "{file}"), timeout_s=timeout_s, **kw)


def printing(name, kind, text, **kw):
    return fake(name, kind, f"print({text!r})", **kw)


SLEEPER = "import time; time.sleep(30)"


def _smt_query(falsify=False):
    return EncodedQuery(SMT, [], TRUE, text="(check-sat)\n", falsify=falsify)


def _no_children():
    return psutil.Process().children(recursive=True) == []


# -- configuration ------------------------------------------------------------


def test_parse_config_defaults():
    s = parse_config('[backend.a]\nkind = "horn"\ncmd = "spacer"\n')
    (b,) = s.backends
    assert (b.name, b.args, b.timeout_s, b.memory_mb) == ("a", ("{file}",), 300.0, 6144)
    assert b.valid_regex == r"^sat\b" and b.invalid_regex == r"^unsat\b"
    assert s.for_encoding(CHC) is b and s.for_encoding(SMT) is None


def test_muclp_adapter_takes_cochc_too():
    s = parse_config('[backend.m]\nkind = "muclp"\ncmd = "m"\n')
    assert s.for_encoding(MUCLP) is s.for_encoding(COCHC) is s.backends[0]


@pytest.mark.parametrize(
    "text,message",
    [
        ('[backend.a]\nkind = "horn"\ncmd = "x"\ntimeout = 3\n', "unknown key 'timeout'"),
        ('[backend.a]\nkind = "sat"\ncmd = "x"\n', "kind must be one of"),
        ('[backend.a]\nkind = "smt"\n', "needs kind and cmd"),
        ('[backend.a]\nkind = "smt"\ncmd = "x"\ntimeout_s = 0\n', "timeout_s must be positive"),
        ('[backend.a]\nkind = "smt"\ncmd = "x"\nvalid_regex = "("\n', "bad regex"),
        ("[backend.a\n", "<string>"),
    ],
)
def test_config_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(text)


def test_command_placeholders():
    c = SolverConfig("z", "smt", "{python}", ("-m", "x", "{file}"))
    assert c.command("/tmp/q.smt2") == [sys.executable, "-m", "x", "/tmp/q.smt2"]


def test_with_timeout_overrides_every_backend():
    s = load_config(REPO_CONFIG).with_timeout(1.5)
    assert {b.timeout_s for b in s.backends} == {1.5}
    assert load_config(REPO_CONFIG).with_timeout(None).backends[0].timeout_s == 60


def test_named_lookup():
    s = load_config(REPO_CONFIG)
    assert s.named("z3-spacer").kind == "horn"
    with pytest.raises(ConfigError, match="no backend named"):
        s.named("cvc5")


def test_config_lookup_order(tmp_path, monkeypatch):
    env_file = tmp_path / "env.toml"
    env_file.write_text('[backend.e]\nkind = "smt"\ncmd = "e"\n')
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert config_path() is None
    assert load_config().source == "built-in defaults"
    (tmp_path / "solvers.toml").write_text('[backend.local]\nkind = "smt"\ncmd = "l"\n')
    assert load_config().backends[0].name == "local"
    monkeypatch.setenv(ENV_VAR, str(env_file))
    assert load_config().backends[0].name == "e"
    assert load_config(REPO_CONFIG).source == str(REPO_CONFIG)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")


def test_builtin_defaults_name_no_external_solver():
    s = load_config(files("muse.solve") / "default_solvers.toml")
    assert [b.cmd for b in s.backends] == ["{python}"]


# -- output mapping -----------------------------------------------------------


@pytest.mark.parametrize(
    "kind,out,expected",
    [
        ("smt", "unsat\n", "valid"),
        ("smt", "sat\n", "invalid"),
        ("smt", "unknown\n", None),
        ("horn", "sat\n", "valid"),
        ("horn", "unsat\n", "invalid"),
        ("muclp", "valid\n", "valid"),
        ("muclp", "invalid\n", "invalid"),
        ("muclp", "warning: x\ninvalid\n", "invalid"),
        ("horn", "(error)\n", None),
    ],
)
def test_classify_output(kind, out, expected):
    got = classify_output(out, SolverConfig("s", kind, "x"))
    assert (got.kind if got else None) == expected


def test_earliest_match_wins():
    c = SolverConfig("s", "smt", "x", valid_regex="PROVED", invalid_regex="FAILED")
    assert classify_output("FAILED then PROVED", c).kind == "invalid"


# -- single runs --------------------------------------------------------------


def test_missing_executable_is_unknown():
    run = run_backend(_smt_query(), SolverConfig("nope", "smt", "/nonexistent/solver"))
    assert run.verdict.kind == "unknown" and run.verdict.reason.startswith("spawn")


def test_timeout_kills_the_process():
    start = time.monotonic()
    run = run_backend(_smt_query(), fake("slow", "smt", SLEEPER, timeout_s=0.2))
    assert run.verdict.kind == "timeout"
    assert time.monotonic() - start < 5
    assert _no_children()


def test_unrecognized_output_is_kept():
    run = run_backend(_smt_query(), printing("odd", "smt", "maybe"))
    assert run.verdict.kind == "unknown" and "maybe" in run.verdict.reason
    assert run.output.strip() == "maybe"


def test_falsify_flips_definitive_verdicts():
    cfg = printing("m", "muclp", "valid")
    assert run_backend(_smt_query(), cfg).verdict.kind == "valid"
    assert run_backend(_smt_query(falsify=True), cfg).verdict.kind == "invalid"


def test_solver_sees_the_query_file():
    script = "import sys; print('unsat' if 'check-sat' in open(sys.argv[1]).read() else 'sat')"
    assert run_backend(_smt_query(), fake("cat", "smt", script)).verdict.kind == "valid"


@needs_z3
def test_max2_through_z3():
    s = load_config(REPO_CONFIG)
    run = run_backend(encode(*load("max2.sem", "max2.sol"), SMT), s.named("z3-smt"))
    assert run.verdict.kind == "valid" and run.backend == "z3-smt" and run.wall_s > 0


# -- split --------------------------------------------------------------------


@pytest.mark.parametrize(
    "neg,pos,expected",
    [
        ("valid", "valid", "valid"),
        ("invalid", "valid", "invalid"),
        ("valid", "invalid", "invalid"),
        ("invalid", "timeout", "invalid"),
        ("valid", "timeout", "unknown"),
        ("unknown", "valid", "unknown"),
    ],
)
def test_combine_split(neg, pos, expected):
    assert combine_split(Verdict(neg), Verdict(pos)).kind == expected


def test_split_stops_after_invalid_chc_half():
    p, s = load("loop_both.sem", "loop.sol")
    solvers = SolverSet([printing("h", "horn", "unsat"), fake("m", "muclp", SLEEPER)])
    run = verify(p, s, solvers)
    assert run.kind == SPLIT and run.verdict.kind == "invalid"
    assert [r.kind for r in run.parts] == [CHC]


def test_split_runs_both_halves():
    p, s = load("loop_both.sem", "loop.sol")
    # the coCHC half is a falsification query: "invalid" from the adapter means valid
    solvers = SolverSet([printing("h", "horn", "sat"), printing("m", "muclp", "invalid")])
    run = verify(p, s, solvers)
    assert run.verdict.kind == "valid" and run.backend == "h+m"
    assert [r.kind for r in run.parts] == [CHC, COCHC]


# -- verify over the corpus ---------------------------------------------------


def test_missing_backend_is_unknown(max2):
    run = verify(*max2, SolverSet([]))
    assert run.verdict.kind == "unknown" and "no backend configured" in run.verdict.reason


def test_fallback_oracle_is_labelled(max2):
    run = verify(*max2, SolverSet([]), VerifyOptions(fallback_domain=FiniteDomain(-3, 3)))
    assert run.verdict.kind == "valid" and run.verdict.bounded and run.backend == "oracle"
    assert "domain-bounded" in str(run.verdict)


def test_forced_backend(loop):
    run = verify(*loop, SolverSet([printing("m", "muclp", "valid")]), VerifyOptions(backend=MUCLP))
    assert run.kind == MUCLP and run.verdict.kind == "valid"


@needs_z3
@pytest.mark.parametrize("sem,sol,expected", [(c[0], c[1], c[2]) for c in corpus.CASES], ids=lambda v: str(v))
def test_corpus_verify(sem, sol, expected):
    run = verify(*load(sem, sol), load_config(REPO_CONFIG))
    bounded = next(c[4] for c in corpus.CASES if c[:2] == (sem, sol))
    # the bundled muclp adapter decides on a finite window; otherwise the
    # verdict must match the unbounded one
    if run.backend == "bounded-muclp" and bounded is not None:
        assert run.verdict.kind in (expected, bounded)
    else:
        assert run.verdict.kind == expected, run.verdict


@needs_z3
def test_definitive_verdicts_agree_across_backends():
    solvers = load_config(REPO_CONFIG)
    for sem, sol, expected, _domain, _bounded in corpus.CASES:
        if sem == "loop_comm.sem":
            continue  # the bounded adapter window is not the integers
        p, s = load(sem, sol)
        verdicts = set()
        for kind in classify(p, s).applicable():
            v = verify(p, s, solvers, VerifyOptions(backend=kind)).verdict
            if v.definitive:
                verdicts.add(v.kind)
        assert verdicts <= {expected}, (sem, sol, verdicts)


# -- portfolio ----------------------------------------------------------------


@needs_z3
def test_portfolio_chc_beats_timed_out_muclp(loop):
    solvers = SolverSet([load_config(REPO_CONFIG).named("z3-spacer"), fake("slow", "muclp", SLEEPER, timeout_s=0.1)])
    run = portfolio(*loop, solvers)
    assert run.verdict.kind == "valid" and run.kind == CHC
    assert {r.kind: r.verdict.kind for r in run.parts}[MUCLP] == "timeout"


@needs_z3
def test_portfolio_cancels_losers(loop):
    solvers = SolverSet([load_config(REPO_CONFIG).named("z3-spacer"), fake("slow", "muclp", SLEEPER, timeout_s=120)])
    start = time.monotonic()
    run = portfolio(*loop, solvers)
    assert run.verdict.kind == "valid"
    assert time.monotonic() - start < 20
    slow = next(r for r in run.parts if r.kind == MUCLP)
    assert slow.verdict.kind == "unknown" and slow.verdict.reason == "cancelled"
    assert _no_children()


def test_portfolio_single_backend_matches_verify(buchi):
    solvers = SolverSet([printing("m", "muclp", "valid")])
    a, b = verify(*buchi, solvers), portfolio(*buchi, solvers)
    assert (a.kind, a.backend, a.verdict.kind) == (b.kind, b.backend, b.verdict.kind)


def test_portfolio_all_unknown(max2):
    solvers = SolverSet([printing("s", "smt", "unknown"), printing("m", "muclp", "dunno")])
    assert portfolio(*max2, solvers).verdict.kind == "unknown"


def test_portfolio_prefers_timeout_to_unknown(max2):
    solvers = SolverSet([printing("s", "smt", "unknown"), fake("m", "muclp", SLEEPER, timeout_s=0.2)])
    run = portfolio(*max2, solvers)
    assert run.verdict.kind == "timeout"
    assert _no_children()


def test_portfolio_without_backends(max2):
    run = portfolio(*max2, SolverSet([]))
    assert run.verdict.kind == "unknown" and "no applicable backend" in run.verdict.reason


def test_portfolio_runs_every_applicable_kind(max2):
    solvers = SolverSet([printing("s", "smt", "unsat"), printing("m", "muclp", "valid")])
    run = portfolio(*max2, solvers)
    assert run.verdict.kind == "valid"
    assert sorted(r.kind for r in run.parts) == sorted([SMT, MUCLP])
