"""Command-line interface: verbs, exit codes, global option precedence and report determinism."""

import json
import subprocess
import sys
from argparse import Namespace

import pytest

from rbloch.cli import GLOBALS, UsageError, main, resolve_globals

FAST = ["--only", "field.arithmetic_and_sign", "--only", "psi.order_two", "--only", "config.d1_worked_example"]


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_eval(capsys):
    assert run(capsys, "eval", "sqrt(2)*sqrt(2)") == (0, "2\n")
    code, out = run(capsys, "--format", "json", "eval", "sqrt(8)/sqrt(2)")
    assert code == 0 and json.loads(out)["value"] == "2"


def test_parse_error_is_usage(capsys):
    assert main(["eval", "sqrt(2"]) == 2
    assert main(["eval", "1/0"]) == 2
    assert main(["nonsense-verb"]) == 2


def test_globals_after_verb(capsys):
    code, out = run(capsys, "eval", "sqrt(3)", "--backend", "tower", "--format", "json")
    assert code == 0 and "sqrt(3)" in out


def test_rational_backend_rejects_irrational(capsys):
    assert main(["--backend", "rational", "eval", "sqrt(2)"]) == 2


def test_certify_then_check(tmp_path, capsys):
    claim, cert = tmp_path / "claim.json", tmp_path / "cert.json"
    code, out = run(capsys, "--backend", "rational", "certify", "psi-additivity", "--x", "2", "--y", "3",
                    "--claim-out", str(claim), "--cert-out", str(cert))
    assert code == 0 and "PROVED" in out
    code, out = run(capsys, "--backend", "rational", "check-cert", str(claim), str(cert))
    assert code == 0 and out.startswith("PROVED")


def test_tampered_certificate_fails(tmp_path, capsys):
    claim, cert = tmp_path / "claim.json", tmp_path / "cert.json"
    run(capsys, "--backend", "rational", "certify", "c-constant", "--x", "2", "--y", "3",
        "--claim-out", str(claim), "--cert-out", str(cert))
    data = json.loads(cert.read_text())
    data = data[1:]
    cert.write_text(json.dumps(data))
    code, out = run(capsys, "--backend", "rational", "check-cert", str(claim), str(cert))
    assert code == 1 and "FAIL" in out


def test_certify_domain_error(capsys):
    assert main(["certify", "trivial-action", "--x", "1"]) == 2
    assert main(["certify", "psi-additivity", "--x", "2"]) == 2


def test_refute(tmp_path, capsys):
    claim = tmp_path / "claim.json"
    run(capsys, "certify", "psi-vanish", "--x", "2", "--claim-out", str(claim))
    code, out = run(capsys, "refute", str(claim))
    assert code == 0 and "UNKNOWN" in out

    false = json.loads(claim.read_text())
    code, _ = run(capsys, "--backend", "rational", "certify", "psi-vanish", "--x", "2", "--claim-out", str(claim))
    # psi_1(2) does not vanish over the rationals, so the claim cannot be proved
    assert code in (1, 2)
    claim.write_text(json.dumps(false))
    code, out = run(capsys, "--backend", "rational", "refute", str(claim))
    assert code == 1 and "REFUTED" in out


def test_canonicalize_and_boundary(capsys):
    code, out = run(capsys, "--format", "json", "canonicalize", "0", "inf", "1", "2", "3")
    assert code == 0
    data = json.loads(out)
    assert data["z"] == ["2", "3"]
    assert main(["canonicalize", "1", "1", "2"]) == 2
    code, out = run(capsys, "boundary", "0", "inf", "1", "2")
    assert code == 0 and out.strip()


def test_d1_worked_value(capsys):
    code, out = run(capsys, "--backend", "rational", "d1", "2")
    assert code == 0
    for part in ("<-1>", "<-2>", "<2>", "<1>"):
        assert part in out


def test_milnor_verbs(capsys):
    code, out = run(capsys, "km-reduce", "-2", "-3")
    assert code == 0 and "-1" in out
    code, out = run(capsys, "km-halve", "4", "3")
    assert code == 0 and "2" in out
    assert main(["km-halve", "-4", "3"]) == 2


# -- global options ------------------------------------------------------------------


def _ns(**kw):
    return Namespace(**{name: kw.get(name) for name in GLOBALS})


def test_defaults():
    g = resolve_globals(_ns(), environ={})
    assert g == {name: default for name, (_, default) in GLOBALS.items()}
    assert g["backend"] == "tower"


def test_env_then_flag():
    env = {"SEED": "7", "BACKEND": "rational", "WORKERS": "3"}
    g = resolve_globals(_ns(), environ=env)
    assert (g["seed"], g["backend"], g["workers"]) == (7, "rational", 3)
    g = resolve_globals(_ns(seed=11, backend="tower"), environ=env)
    assert (g["seed"], g["backend"], g["workers"]) == (11, "tower", 3)


@pytest.mark.parametrize("env", [{"SEED": "abc"}, {"BACKEND": "complex"}, {"FORMAT": "xml"}])
def test_bad_environment(env):
    with pytest.raises(UsageError):
        resolve_globals(_ns(), environ=env)


def test_bad_environment_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("SEED", "abc")
    assert main(["eval", "2"]) == 2


# -- run-suite ---------------------------------------------------------------------


def test_run_suite_subset(capsys):
    code, out = run(capsys, "--format", "json", "run-suite", *FAST)
    report = json.loads(out)
    assert code == 0 and report["ok"]
    assert [e["label"] for e in report["entries"]] == sorted(FAST[1::2])


def test_run_suite_rejects_unknown_label(capsys):
    assert main(["run-suite", "--only", "no.such.entry"]) == 2
    assert main(["run-suite", "--samples", "0"]) == 2


def test_run_suite_subset_deterministic_with_workers(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["--seed", "3", "run-suite", *FAST, "--out", str(a)]) == 0
    assert main(["--seed", "3", "--workers", "2", "run-suite", *FAST, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "rbloch.cli", "eval", "sqrt(2)+sqrt(2)"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "2*sqrt(2)"
