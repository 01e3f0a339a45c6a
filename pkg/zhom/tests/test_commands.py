from __future__ import annotations

import copy
import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from zhom.cli import main
from zhom.services.algebra import Window, ZAlgebra, make_poly
from zhom.services.algebra_file import write_algebra

POLY1 = ["--builtin", "poly", "--param", "n=1", "--window", "0", "10"]


def _run(name, *args):
    out = StringIO()
    call_command(name, *args, stdout=out)
    return out.getvalue()


def _broken_file(tmp_path):
    a = make_poly(1, Window(0, 3, 1))
    mult = copy.deepcopy(a.mult)
    mult[(0, 1, 2)] = {(0, 0): {0: 2}}
    return write_algebra(ZAlgebra(a.window, a.field, a.dims, mult, name="broken"), tmp_path / "broken.json")


def test_validate_builtin():
    out = _run("zhom_validate", "--builtin", "skew", "--param", "q=2", "--window", "0", "4")
    assert "- violations: 0" in out
    assert "Algebra is valid." in out


def test_validate_reports_violations_with_exit_code_2(tmp_path):
    path = _broken_file(tmp_path)
    out = StringIO()
    with pytest.raises(CommandError) as excinfo:
        call_command("zhom_validate", str(path), "--json", stdout=out)

    assert excinfo.value.returncode == 2
    payload = json.loads(out.getvalue())
    assert payload["violations"][0]["axiom"] == "associativity"


def test_path_and_builtin_are_exclusive(tmp_path):
    path = write_algebra(make_poly(1, Window(0, 3, 1)), tmp_path / "poly1.json")
    with pytest.raises(CommandError) as excinfo:
        call_command("zhom_validate", str(path), "--builtin", "poly")
    assert excinfo.value.returncode == 1


def test_parse_error_exit_code(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(CommandError) as excinfo:
        call_command("zhom_validate", str(path))
    assert excinfo.value.returncode == 3
    assert "line 1" in str(excinfo.value)


def test_missing_file_exit_code(tmp_path):
    with pytest.raises(CommandError) as excinfo:
        call_command("zhom_resolve", str(tmp_path / "nope.json"))
    assert excinfo.value.returncode == 4


def test_resolve_prints_betti_table():
    out = _run("zhom_resolve", "--builtin", "poly", "--param", "n=2", "--window", "0", "8")

    assert "- status: Terminated" in out
    assert "- pd: ExactPd(2)" in out
    assert "F1: [1, 1]" in out


def test_resolve_json_is_deterministic():
    args = ["--builtin", "poly", "--param", "n=2", "--window", "0", "8", "--module", "A/A>=2@0", "--json"]
    first, second = _run("zhom_resolve", *args), _run("zhom_resolve", *args)

    assert first == second
    payload = json.loads(first)
    assert payload["pd"] == {"pd": 2, "exact": True}
    assert payload["generators"] == [[0], [2, 2, 2], [3, 3]]


def test_resolve_warns_when_window_limited():
    out = _run("zhom_resolve", "--builtin", "nil", "--window", "0", "8", "--max-length", "3")
    assert "Window-limited" in out
    assert "AtLeast(3" in out


def test_check_as_json():
    payload = json.loads(_run("zhom_check", *POLY1, "--as", "--dmax", "1", "--json"))

    assert payload["kind"] == "AS"
    assert payload["verdict"] == "Regular"
    assert (payload["d"], payload["l"]) == (1, -1)


def test_check_asf_text():
    out = _run("zhom_check", *POLY1, "--asf", "--dmax", "1")
    assert "ASF check:" in out
    assert "- verdict: Regular(d=1, l=-1)" in out


def test_check_window_too_small_is_a_failure():
    with pytest.raises(CommandError) as excinfo:
        call_command("zhom_check", "--builtin", "poly", "--window", "0", "4", "--as", "--dmax", "3")
    assert excinfo.value.returncode == 1


def test_duality_matches_on_simple_module(settings):
    settings.ZHOM_DMAX = 1
    out = _run("zhom_duality", *POLY1, "--module", "e_3A0")
    assert "- matched: True" in out


def test_duality_requires_regular_algebra(settings):
    settings.ZHOM_DMAX = 1
    with pytest.raises(CommandError) as excinfo:
        call_command("zhom_duality", "--builtin", "nil", "--window", "0", "10", "--module", "e_3A0")
    assert excinfo.value.returncode == 1
    assert "Requires a regular algebra" in str(excinfo.value)


def test_cli_dispatches_to_management_commands(capsys):
    main(["validate", "--builtin", "trivial", "--window", "0", "3"])
    assert "Algebra is valid." in capsys.readouterr().out


def test_cli_rejects_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2
    assert "usage: zhom" in capsys.readouterr().err


def test_cli_exit_codes_follow_command_errors(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["validate", str(tmp_path / "nope.json")])
    assert excinfo.value.code == 4
