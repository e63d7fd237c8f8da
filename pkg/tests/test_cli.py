"""Command-line behavior: outputs, record parity, exit codes, composition."""

import io
import os
import subprocess
import sys

import pytest

from bellsim import belltest, mdf, zoo
from bellsim.cli import main

MISSING = "/nonexistent/machine.mdf"


def records(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition("=")
        out[key] = value
    return out


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --------------------------------------------------------------------------
# validate


def test_validate_zoo_machine(capsys):
    code, out, _ = run_cli(capsys, "validate", "zoo:M2")
    assert code == 0
    assert out == "fpsm M2: valid\n"


def test_validate_records(capsys):
    code, out, _ = run_cli(capsys, "validate", "--records", "zoo:M1_pair")
    assert code == 0
    assert records(out) == {"kind": "pair_fpsm", "name": "M1_pair", "valid": "1"}


def test_validate_broken_file(tmp_path, capsys):
    bad = tmp_path / "bad.mdf"
    bad.write_text(zoo.export("M2").replace("(0,0,l0), s0] = 1", "(0,0,l0), s0] = 1/2"))
    code, out, err = run_cli(capsys, "validate", str(bad))
    assert code == 1
    assert out == ""
    assert err.startswith("error:")
    assert "sum to 0.5" in err


def test_validate_missing_file(capsys):
    code, _, err = run_cli(capsys, "validate", MISSING)
    assert code == 2
    assert err.startswith("error:")


# --------------------------------------------------------------------------
# exact


def test_exact_human_and_records_carry_the_same_numbers(capsys):
    code, human, _ = run_cli(capsys, "exact", "zoo:M5")
    assert code == 0
    code, recs, _ = run_cli(capsys, "exact", "--records", "zoo:M5")
    assert code == 0
    kv = records(recs)
    want = belltest.exact_chsh(zoo.builtin("M5").machine)
    assert kv["e00"] == f"{want.e00:.12f}" == "0.707106781187"
    assert kv["chsh"] == f"{want.chsh:.12f}" == "2.828427124746"
    assert kv["classification"] == "superclassical"
    for a, b, field in ((0, 0, "e00"), (1, 1, "e11")):
        assert f"e[{a},{b}] = {kv[field]}" in human
    assert f"chsh = {kv['chsh']}" in human
    assert "classification = superclassical" in human


def test_exact_on_quantum_pair(capsys):
    code, out, _ = run_cli(capsys, "exact", "--records", "zoo:Q_pair_product")
    assert code == 0
    kv = records(out)
    assert kv["chsh"] == "-1.414213562373"
    assert kv["classification"] == "classical"


# --------------------------------------------------------------------------
# run


def test_run_reports_cells_and_chsh_without_classification(capsys):
    code, out, _ = run_cli(capsys, "run", "zoo:M5", "--runs", "400", "--seed", "7")
    assert code == 0
    assert "runs = 400" in out
    assert "seed = 7" in out
    assert "classification" not in out
    counts = [int(line.split(" = ")[1]) for line in out.splitlines() if line.startswith("n[")]
    assert len(counts) == 4
    assert sum(counts) == 400


def test_run_is_deterministic(capsys):
    _, first, _ = run_cli(capsys, "run", "zoo:M3_pair", "--runs", "500")
    _, second, _ = run_cli(capsys, "run", "zoo:M3_pair", "--runs", "500")
    assert first == second
    _, other_seed, _ = run_cli(capsys, "run", "zoo:M3_pair", "--runs", "500", "--seed", "1")
    assert other_seed != first


def test_run_records_match_the_library(capsys):
    code, out, _ = run_cli(capsys, "run", "--records", "zoo:M2", "--runs", "300", "--seed", "3")
    assert code == 0
    kv = records(out)
    mut = belltest.as_machine_under_test(zoo.builtin("M2").machine)
    stats = belltest.run_protocol(mut, n_runs=300, master_seed=3)
    assert kv["runs"] == "300"
    for a in (0, 1):
        for b in (0, 1):
            assert kv[f"n{a}{b}"] == str(int(stats.counts[a, b]))
    assert kv["chsh"] == f"{belltest.empirical_chsh(stats).chsh:.12f}"


def test_run_rejects_nonpositive_runs(capsys):
    code, _, _ = run_cli(capsys, "run", "zoo:M1", "--runs", "0")
    assert code == 2


def test_interactive_run(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("0 0\n0 1\nbogus\n1 0\n1 1\n\n"))
    code, out, err = run_cli(capsys, "run", "zoo:M2", "--interactive")
    assert code == 0
    assert "expected two bits" in err
    assert err.count("A=") == 4
    assert "runs = 4" in out
    for a in (0, 1):
        for b in (0, 1):
            assert f"n[{a},{b}] = 1" in out
    # M2 always answers (1,1)
    assert "chsh = 2.000000000000" in out


def test_interactive_needs_at_least_one_round(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO(""))
    code, _, err = run_cli(capsys, "run", "zoo:M2", "--interactive")
    assert code == 1
    assert "no rounds recorded" in err


# --------------------------------------------------------------------------
# independence and theorem


def test_independence_names_the_dependent_half(capsys):
    code, out, _ = run_cli(capsys, "independence", "zoo:M3_pair")
    assert code == 0
    assert "left: independent of the remote selection" in out
    assert "right: DEPENDENT on the remote selection" in out
    assert "witness[right]:" in out


def test_independence_records(capsys):
    code, out, _ = run_cli(capsys, "independence", "--records", "zoo:M3_pair")
    assert code == 0
    kv = records(out)
    assert kv["left_independent"] == "1"
    assert kv["right_independent"] == "0"
    assert kv["right_witness_output"] == "-1"
    assert kv["right_witness_remote0"] == "0.000000000000"
    assert kv["right_witness_remote1"] == "1.000000000000"


def test_independence_on_quantum_pair_is_trivial(capsys):
    code, out, _ = run_cli(capsys, "independence", "zoo:Q_pair_entangled")
    assert code == 0
    assert out.count("independent of the remote selection") == 2


def test_independence_rejects_plain_machines(capsys):
    code, _, err = run_cli(capsys, "independence", "zoo:M5")
    assert code == 1
    assert "half machines and pairs" in err


def test_theorem_on_a_violating_pair(capsys):
    code, out, _ = run_cli(capsys, "theorem", "zoo:M3_pair")
    assert code == 0
    assert "chsh = 4.000000000000" in out
    assert "violating = yes" in out
    assert "witness[right]:" in out


def test_theorem_on_a_classical_pair(capsys):
    code, out, _ = run_cli(capsys, "theorem", "--records", "zoo:M1_pair")
    assert code == 0
    kv = records(out)
    assert kv["violating"] == "0"
    assert kv["left_independent"] == "1"
    assert kv["right_independent"] == "1"
    assert "right_witness_output" not in kv


# --------------------------------------------------------------------------
# corners


def test_corners_table(capsys):
    code, out, _ = run_cli(capsys, "corners")
    assert code == 0
    rows = [line for line in out.splitlines() if line.startswith("A0=")]
    assert len(rows) == 16
    assert "max = 2" in out


def test_corners_records(capsys):
    code, out, _ = run_cli(capsys, "corners", "--records")
    assert code == 0
    kv = records(out)
    assert kv["max"] == "2"
    assert kv["value[1,1,1,1]"] == "2"
    assert kv["value[1,1,-1,1]"] == "-2"
    # one of b0+b1, b0-b1 vanishes at every corner, so values are all +-2
    values = {v for k, v in kv.items() if k.startswith("value[")}
    assert values == {"2", "-2"}


# --------------------------------------------------------------------------
# compose


@pytest.fixture
def halves(tmp_path):
    pair = zoo.builtin("M2_pair").machine
    pa = tmp_path / "ha.mdf"
    pb = tmp_path / "hb.mdf"
    pa.write_text(mdf.serialize(pair.left, "ha"))
    pb.write_text(mdf.serialize(pair.right, "hb"))
    return pa, pb


def test_compose_writes_a_pair_document(halves, capsys):
    pa, pb = halves
    code, out, _ = run_cli(capsys, "compose", str(pa), str(pb))
    assert code == 0
    doc = mdf.parse(out)
    assert doc.kind == "pair_fpsm"
    assert doc.name == "ha_hb"
    assert belltest.exact_chsh(doc.machine).chsh == pytest.approx(2.0, abs=1e-9)


def test_compose_with_joint_init_yields_a_compound(halves, tmp_path, capsys):
    pa, pb = halves
    frag = tmp_path / "init.mdf"
    frag.write_text("init_joint (s0,s0) = 1\n")
    out_file = tmp_path / "pair.mdf"
    code, out, _ = run_cli(
        capsys, "compose", str(pa), str(pb),
        "--init", str(frag), "--name", "glued", "-o", str(out_file),
    )
    assert code == 0
    assert out == ""
    doc = mdf.parse(out_file.read_text())
    assert doc.kind == "compound"
    assert doc.name == "glued"


def test_compose_rejects_entangled_fragments(halves, tmp_path, capsys):
    pa, pb = halves
    frag = tmp_path / "init.mdf"
    frag.write_text("init_entangled (s0,s0) = 1\n")
    code, _, err = run_cli(capsys, "compose", str(pa), str(pb), "--init", str(frag))
    assert code == 1
    assert "entangled init fragment requires a quantum pair" in err


def test_compose_rejects_non_half_sources(capsys):
    code, _, err = run_cli(capsys, "compose", "zoo:M5", "zoo:M5")
    assert code == 1
    assert "two half documents" in err


# --------------------------------------------------------------------------
# zoo


def test_zoo_list(capsys):
    code, out, _ = run_cli(capsys, "zoo", "list")
    assert code == 0
    assert tuple(out.splitlines()) == zoo.names()


def test_zoo_list_records(capsys):
    code, out, _ = run_cli(capsys, "zoo", "list", "--records")
    assert code == 0
    assert out.splitlines()[0] == "name=M1"


def test_zoo_export(capsys):
    code, out, _ = run_cli(capsys, "zoo", "export", "M5")
    assert code == 0
    assert out == zoo.export("M5")


def test_zoo_export_needs_a_name(capsys):
    code, _, err = run_cli(capsys, "zoo", "export")
    assert code == 2
    assert "needs a machine name" in err


def test_zoo_export_unknown_name(capsys):
    code, _, err = run_cli(capsys, "zoo", "export", "M99")
    assert code == 1
    assert "M99" in err


# --------------------------------------------------------------------------
# parser plumbing


def test_no_arguments_is_a_usage_error(capsys):
    assert main([]) == 2


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "bellsim" in capsys.readouterr().out


def test_thread_count_does_not_change_the_output():
    argv = [sys.executable, "-m", "bellsim", "run", "zoo:M5", "--runs", "2000"]
    outs = []
    for threads in ("1", "4"):
        env = dict(os.environ, BELLSIM_THREADS=threads)
        proc = subprocess.run(argv, capture_output=True, text=True, env=env, check=True)
        outs.append(proc.stdout)
    assert outs[0] == outs[1]
