"""End-to-end CLI tests, run in-process through main()."""

from pathlib import Path

import pytest

from nestfold.cli import main

ROOT = Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"
GOLDEN = ROOT / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# check


def test_check_bush(capsys):
    code, out, _ = run(capsys, "check", SAMPLES / "bush.ndt")
    assert code == 0
    assert out.strip() == "Bush: nested, index ≅ Nat"


def test_check_list(capsys):
    code, out, _ = run(capsys, "check", SAMPLES / "list.ndt")
    assert code == 0
    assert out.strip() == "List: ordinary"


def test_check_mutual_group(capsys):
    code, out, _ = run(capsys, "check", SAMPLES / "bobdylan.ndt")
    assert code == 0
    assert out.strip() == "Bob, Dylan: nested, mutual, index universe BobDylanIndex"


def test_check_arity_error(capsys):
    code, out, err = run(capsys, "check", SAMPLES / "bad-arity.ndt")
    assert code == 1
    assert "argument" in err
    assert out == ""


def test_check_missing_file(capsys):
    code, _, err = run(capsys, "check", "no-such-file.ndt")
    assert code == 2
    assert "error" in err


# ---------------------------------------------------------------------------
# derive


def test_derive_bush_matches_golden(capsys, tmp_path):
    code, out, _ = run(
        capsys, "derive", SAMPLES / "bush.ndt", "--nat-index", "-o", tmp_path
    )
    assert code == 0
    assert (tmp_path / "Bush.agda").read_bytes() == (GOLDEN / "Bush.agda").read_bytes()
    assert "Bush: derived " in out
    assert "nfold'" in out


def test_derive_bobdylan_matches_golden_and_reports_skip(capsys, tmp_path):
    code, out, _ = run(capsys, "derive", SAMPLES / "bobdylan.ndt", "-o", tmp_path)
    assert code == 0
    emitted = (tmp_path / "BobDylan.agda").read_bytes()
    assert emitted == (GOLDEN / "BobDylan.agda").read_bytes()
    assert "PS bridge: skipped" in out


def test_derive_list_reports_skip(capsys, tmp_path):
    code, out, _ = run(capsys, "derive", SAMPLES / "list.ndt", "-o", tmp_path)
    assert code == 0
    assert (tmp_path / "List.agda").exists()
    assert "hfold-list" in out
    assert "PS bridge: skipped" in out


def test_derive_missing_file(capsys):
    code, _, err = run(capsys, "derive", "missing.ndt")
    assert code == 2


def test_derive_rejects_nat_index_for_mutual_groups(capsys, tmp_path):
    code, _, err = run(
        capsys, "derive", SAMPLES / "bobdylan.ndt", "--nat-index", "-o", tmp_path
    )
    assert code == 1
    assert "one declaration" in err


def test_derive_is_deterministic(capsys, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    code1, out1, _ = run(capsys, "derive", SAMPLES / "bush.ndt", "--nat-index", "-o", a)
    code2, out2, _ = run(capsys, "derive", SAMPLES / "bush.ndt", "--nat-index", "-o", b)
    assert code1 == code2 == 0
    assert out1.replace(str(a), "OUT") == out2.replace(str(b), "OUT")
    assert (a / "Bush.agda").read_bytes() == (b / "Bush.agda").read_bytes()


def test_derive_backend_choice_is_validated(capsys, tmp_path):
    code, _, err = run(
        capsys, "derive", SAMPLES / "bush.ndt", "--backend", "coq", "-o", tmp_path
    )
    assert code == 2


# ---------------------------------------------------------------------------
# the optional external type-check hook


def _fake_agda(tmp_path, exit_code):
    script = tmp_path / "fakeagda"
    script.write_text(f"#!/bin/sh\nexit {exit_code}\n")
    script.chmod(0o755)
    return script


def test_agda_hook_absent_is_a_note(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("NESTFOLD_AGDA", raising=False)
    code, out, _ = run(capsys, "derive", SAMPLES / "bush.ndt", "--nat-index", "-o", tmp_path)
    assert code == 0
    assert "NESTFOLD_AGDA is not set" in out


def test_agda_hook_accepts(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("NESTFOLD_AGDA", str(_fake_agda(tmp_path, 0)))
    code, out, _ = run(capsys, "derive", SAMPLES / "bush.ndt", "--nat-index", "-o", tmp_path)
    assert code == 0
    assert "agda accepted" in out


def test_agda_hook_rejection_fails(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("NESTFOLD_AGDA", str(_fake_agda(tmp_path, 1)))
    code, _, err = run(capsys, "derive", SAMPLES / "bush.ndt", "--nat-index", "-o", tmp_path)
    assert code == 1
    assert "agda rejected" in err


# ---------------------------------------------------------------------------
# eval


def test_eval_sum_is_34(capsys):
    code, out, _ = run(
        capsys, "eval", SAMPLES / "bush.ndt", SAMPLES / "bush1.ndv", "--algebra", "sum"
    )
    assert code == 0
    assert out.strip() == "34"


def test_eval_length_is_4(capsys):
    code, out, _ = run(
        capsys, "eval", SAMPLES / "bush.ndt", SAMPLES / "bush1.ndv", "--algebra", "length"
    )
    assert code == 0
    assert out.strip() == "4"


def test_eval_empty_sum_is_0(capsys):
    code, out, _ = run(
        capsys, "eval", SAMPLES / "bush.ndt", SAMPLES / "empty.ndv", "--algebra", "sum"
    )
    assert code == 0
    assert out.strip() == "0"


def test_eval_depth_matches_frozen_value(capsys):
    code, out, _ = run(
        capsys, "eval", SAMPLES / "bush.ndt", SAMPLES / "bush1.ndv", "--algebra", "depth"
    )
    assert code == 0
    assert out.strip() == "9"


def test_eval_at_an_explicit_deeper_type(capsys, tmp_path):
    lit = tmp_path / "nested.ndv"
    lit.write_text("[ [ 1 ] ]\n")  # typechecks one level up, at Bush (Bush Nat)
    code, out, _ = run(
        capsys,
        "eval",
        SAMPLES / "bush.ndt",
        lit,
        "--algebra",
        "sum",
        "--type",
        "Bush (Bush Nat)",
    )
    assert code == 0
    assert out.strip() == "1"


def test_eval_ill_typed_value(capsys, tmp_path):
    lit = tmp_path / "bad.ndv"
    lit.write_text("[ [ 1 ] ]\n")  # an element must be a plain natural at Bush Nat
    code, _, err = run(capsys, "eval", SAMPLES / "bush.ndt", lit, "--algebra", "sum")
    assert code == 1
    assert "expected a base value" in err


def test_eval_unknown_algebra(capsys):
    code, _, err = run(
        capsys, "eval", SAMPLES / "bush.ndt", SAMPLES / "bush1.ndv", "--algebra", "nope"
    )
    assert code == 2
    assert "available: sum, depth, trace, length" in err


def test_eval_mutual_sum(capsys, tmp_path):
    lit = tmp_path / "bob.ndv"
    lit.write_text(
        "zimmerman"
        " (duluth (robert (robert (duluth (robert 1) (robert (robert 2)))))"
        "         (robert (robert 3)))"
        " (robert (duluth (robert 4) (robert 5)))\n"
    )
    code, out, _ = run(
        capsys, "eval", SAMPLES / "bobdylan.ndt", lit, "--algebra", "sum"
    )
    assert code == 0
    assert out.strip() == "15"


# ---------------------------------------------------------------------------
# test


def test_test_bush_passes(capsys):
    code, out, _ = run(capsys, "test", SAMPLES / "bush.ndt", "--max-size", "4")
    assert code == 0
    assert "nfold-vs-nfold-prime: ok" in out
    assert "FAIL" not in out


def test_test_list_runs_the_spine_property(capsys):
    code, out, _ = run(capsys, "test", SAMPLES / "list.ndt", "--max-size", "6")
    assert code == 0
    assert "spine-fold-agreement: ok" in out


def test_test_mutual_group(capsys):
    code, out, _ = run(capsys, "test", SAMPLES / "bobdylan.ndt", "--max-size", "4")
    assert code == 0
    assert "ind-agreement: ok" in out


def test_test_max_size_zero_is_a_usage_error(capsys):
    code, _, err = run(capsys, "test", SAMPLES / "bush.ndt", "--max-size", "0")
    assert code == 2
    assert "--max-size" in err


def test_counterexample_is_printed_on_failure(capsys, monkeypatch):
    import nestfold.properties as properties
    from nestfold.runtime import RNat

    monkeypatch.setattr(
        properties, "eval_nfold_prime", lambda ctx, alg, idx, v: RNat(10**9)
    )
    code, out, err = run(capsys, "test", SAMPLES / "bush.ndt", "--max-size", "3")
    assert code == 1
    assert "nfold-vs-nfold-prime: FAIL" in out
    assert "counterexample for nfold-vs-nfold-prime" in err
    assert "algebra:" in err


# ---------------------------------------------------------------------------
# usage plumbing


def test_no_arguments_is_a_usage_error(capsys):
    assert main([]) == 2


def test_unknown_subcommand_is_a_usage_error(capsys):
    assert main(["frobnicate"]) == 2


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    assert "check" in out and "derive" in out
