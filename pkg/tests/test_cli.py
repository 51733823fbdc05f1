import json

import pytest

from jacv import cli, dsl

ROUND_TRIP = [
    "patch p = (x1, x2, y1, y2, z)",
    "algebroid TA = tangent(p)",
    "jacobi J = (TA, 0)",
    "form bO = -(y1*dx1) - (y2*dx2) + dz",
    "jacobi C = extend(TA)",
    "form Om = merge(C, (d(J, bO), bO))",
    "scalar f = 1/2",
    "section Ez = ddz",
    "map NH = inverse(flat(Om)) . flat(wH)",
    "bialgebroid B = standard(C)",
    "lift L = jacobize(C)",
    "let pr = split(C, Om)",
    "check algebroid TA",
    "check presymplectic C Om",
    "check zero (first(pr))",
    "check equal (wH^3) -(Om^3)",
    "check dirac_pair C (flat Om) (flat wH) strategy=auto",
    "check main1 C (sharp Pi) (flat wE)",
    "check lift_scaling L Pi Om",
    "check omegan C Om NH weak=true",
]

PARSE_ERRORS = [
    ("scalar q = 1/0", "zero denominator"),
    ("check equal a strategy=auto b", "positional argument after options"),
    ("frobnicate x", "unknown statement"),
    ("let a = (1 +", "unexpected end of line"),
    ("let a = 1 ? 2", "unexpected character"),
    ("check", "expected 'name'"),
    ("patch p = x", "expected '('"),
    ("let = 3", "expected 'name'"),
]


def test_parse_render_round_trip():
    for line in ROUND_TRIP:
        first = dsl.parse(line)
        again = dsl.parse(dsl.render(first))
        assert again == first, line


def test_parse_error_messages():
    for text, fragment in PARSE_ERRORS:
        with pytest.raises(dsl.ScriptError) as err:
            dsl.parse(text)
        assert fragment in str(err.value), text


def test_call_requires_adjacent_paren_in_check_args():
    tight = dsl.parse("check zero f(x)").statements[0]
    assert len(tight.args) == 1
    assert isinstance(tight.args[0], dsl.Call)
    spaced = dsl.parse("check zero f (x)").statements[0]
    assert len(spaced.args) == 2
    assert isinstance(spaced.args[0], dsl.Name)


PASSING = """\
patch p = (x, y)
algebroid A = tangent(p)
check algebroid A
check equal e1 ddx
check equal (pair(dx, ddx)) 1
jacobi C = extend(A)
check equal ehat e3
check equal epshat eps3
"""


def _run(tmp_path, capsys, text, *flags):
    path = tmp_path / "case.jac"
    path.write_text(text, encoding="utf-8")
    code = cli.main(["check", str(path), *flags])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_exit_zero_and_plain_text_output(tmp_path, capsys):
    code, out, err = _run(tmp_path, capsys, PASSING)
    assert code == 0
    assert err == ""
    assert "pass" in out
    assert "\x1b[" not in out  # no colors without a terminal
    assert "[L3]" in out  # records carry their source line


def test_exit_one_on_failing_check(tmp_path, capsys):
    text = PASSING + "scalar c = 1\ncheck zero c\n"
    code, out, _ = _run(tmp_path, capsys, text)
    assert code == 1
    assert "fail" in out


def test_exit_two_on_parse_error(tmp_path, capsys):
    code, out, err = _run(tmp_path, capsys, "garbage !!\n")
    assert code == 2
    assert out == ""
    assert "error:" in err


def test_exit_two_on_declaration_error(tmp_path, capsys):
    code, _, err = _run(tmp_path, capsys, "patch p = (t, x)\n")
    assert code == 2
    assert "reserved" in err


def test_exit_two_on_missing_file(tmp_path, capsys):
    code = cli.main(["check", str(tmp_path / "absent.jac")])
    captured = capsys.readouterr()
    assert code == 2
    assert "error:" in captured.err


def test_check_errors_are_recorded_and_run_continues(tmp_path, capsys):
    text = PASSING + "check zero nosuchname\ncheck algebroid A\n"
    code, out, _ = _run(tmp_path, capsys, text, "--json")
    assert code == 2
    data = json.loads(out)
    statuses = [rec["status"] for rec in data["checks"]]
    assert "error" in statuses
    assert statuses[-1] == "pass"  # the run kept going past the bad check
    assert data["summary"]["error"] == 1


NOT_DECIDED = """\
patch p = (x, y)
algebroid A = tangent(p)
section P = zero_section(A, 2)
check condition31 P P
"""


def test_strict_turns_not_decided_into_exit_three(tmp_path, capsys):
    code, out, _ = _run(tmp_path, capsys, NOT_DECIDED, "--json")
    assert code == 0
    data = json.loads(out)
    assert data["summary"]["not_decided"] == 1
    assert data["checks"][0]["status"] == "not-decided"
    code2, _, _ = _run(tmp_path, capsys, NOT_DECIDED, "--strict")
    assert code2 == 3


def test_json_output_is_byte_stable(tmp_path, capsys):
    args = ("--json", "--seed", "7")
    code1, out1, _ = _run(tmp_path, capsys, PASSING, *args)
    code2, out2, _ = _run(tmp_path, capsys, PASSING, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    data = json.loads(out1)
    assert data["version"] == 1
    for rec in data["checks"]:
        assert set(rec) >= {"name", "status", "strategy"}
    summary = data["summary"]
    assert set(summary) == {"pass", "fail", "not_decided", "error"}
    assert summary["pass"] == len(data["checks"])


def test_shipped_script_is_all_green(tmp_path, capsys):
    code = cli.main(["check", "scripts/paper.jac", "--json"])
    captured = capsys.readouterr()
    assert code == 0
    data = json.loads(captured.out)
    summary = data["summary"]
    assert summary["fail"] == 0
    assert summary["error"] == 0
    assert summary["not_decided"] == 0
    assert summary["pass"] >= 40


def test_env_names_shadow_frame_tokens():
    report = cli.run_text(
        "patch p = (x)\n"
        "algebroid A = tangent(p)\n"
        "scalar c = 5\n"
        "let dx = c\n"
        "check equal dx 5\n"
    )
    assert report.counts() == {"pass": 1, "fail": 0, "not_decided": 0, "error": 0}


def test_names_bind_once():
    with pytest.raises(dsl.ScriptError) as err:
        cli.run_text(
            "patch p = (x)\n"
            "algebroid A = tangent(p)\n"
            "scalar c = 5\n"
            "scalar c = 6\n"
        )
    assert "already" in str(err.value)


def test_frame_tokens_need_an_ambient():
    with pytest.raises(dsl.ScriptError):
        cli.run_text("patch p = (x)\nlet v = ddx\n")
