import csv
import subprocess
import sys
import textwrap
from pathlib import Path

import pytest
import yaml

from fixvi.cli import SUMMARY_HEADER, main
from fixvi.config import ConfigError, parse_config

DEMO_CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"

QBOX = """
problem: {generator: quadratic_box, d: 2, seed: 7}
schemes:
  - name: karahan12
"""


def write(tmp_path, text, name="exp.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def strip_timing(text):
    return "\n".join(",".join(line.split(",")[:-1]) for line in text.splitlines())


def test_single_run_exits_zero_with_one_trace(tmp_path, capsys):
    cfg = write(tmp_path, QBOX)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--output-dir", str(out)]) == 0
    assert sorted(p.name for p in out.glob("*.csv")) == ["00_karahan12.csv"]
    echo = yaml.safe_load((out / "00_karahan12.config.yaml").read_text())
    assert echo["problem"] == {"generator": "quadratic_box", "d": 2, "seed": 7}
    assert echo["terminated_by"] == "Tolerance"


def test_empty_scheme_list_is_a_parse_error(tmp_path, capsys):
    cfg = write(tmp_path, "problem: {generator: quadratic_box, d: 2, seed: 7}\nschemes: []\n")
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "schemes" in err and ":2:" in err


def test_yaml_syntax_error_reports_line(tmp_path, capsys):
    cfg = write(tmp_path, "problem: {generator: quadratic_box, d: 2\nschemes:\n  - name: [\n")
    assert main(["validate", str(cfg)]) == 1
    assert "exp.yaml:" in capsys.readouterr().out


def test_unknown_fields_are_named(tmp_path):
    with pytest.raises(ConfigError, match=r"problem.generator"):
        parse_config("problem: {generator: spiral, d: 2}\nschemes: [{name: karahan12}]\n")
    with pytest.raises(ConfigError, match=r"schemes\[1\]"):
        parse_config(QBOX + "  - name: nesterov\n")
    with pytest.raises(ConfigError, match=r"schemes\[0\].lambda"):
        parse_config(QBOX + "    lambda: {type: cosine}\n")


def test_corridor_violation_fails_one_scheme_and_siblings_run(tmp_path, capsys):
    cfg = write(tmp_path, QBOX + """\
    lambda: {type: constant, times_alpha: 2.0}
    label: boundary
  - name: takahashi-toyoda
  - name: karahan12
compare: true
""")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--output-dir", str(out), "--quiet"]) == 1
    assert "boundary" in capsys.readouterr().err
    assert sorted(p.name for p in out.glob("[0-9]*.csv")) == ["01_takahashi-toyoda.csv", "02_karahan12.csv"]
    with open(out / "summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == SUMMARY_HEADER
    assert rows[0]["terminated_by"].startswith("Error(") and rows[1]["terminated_by"] == "Tolerance"
    table = (out / "summary.txt").read_text().splitlines()
    assert table[0].split() == list(SUMMARY_HEADER)
    assert len({line.index("terminated_by") for line in table[:1]}) == 1


def test_max_iter_exit_code(tmp_path):
    cfg = write(tmp_path, QBOX.replace("seed: 7", "seed: 1") + "stop: {max_iter: 1, tol: 1.0e-15}\n")
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "o"), "--quiet"]) == 2


def test_validate_ok_prints_corridors(tmp_path, capsys):
    cfg = write(tmp_path, QBOX)
    assert main(["validate", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "OK"
    assert "certified" in out and "nominal" in out and "schemes[0] karahan12" in out


def test_validate_names_corridor_violation_with_both_numbers(tmp_path, capsys):
    cfg = write(tmp_path, QBOX + "    lambda: {type: constant, value: 1.5}\n")
    assert main(["validate", str(cfg)]) == 1
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if "VIOLATION" in l)
    assert "1.5" in line and "2*alpha = 1.10477" in line


def test_validate_reports_expansive_member_with_pair(capsys):
    assert main(["validate", str(DEMO_CONFIGS / "expansive_member.yaml")]) == 1
    out = capsys.readouterr().out
    assert "T_2" in out and "mappings[1]" in out and "witnessing pair x=" in out


def test_validate_performs_no_iteration(tmp_path, monkeypatch):
    import fixvi.cli as cli

    def boom(*a, **k):
        raise AssertionError("validate must not iterate")

    monkeypatch.setattr(cli, "run_scheme", boom)
    assert main(["validate", str(write(tmp_path, QBOX))]) == 0


def test_seed_override_changes_the_problem(tmp_path):
    cfg = write(tmp_path, QBOX + "compare: true\n")
    main(["run", str(cfg), "--output-dir", str(tmp_path / "a"), "--quiet"])
    main(["run", str(cfg), "--output-dir", str(tmp_path / "b"), "--quiet", "--seed", "8"])
    echo = yaml.safe_load((tmp_path / "b" / "00_karahan12.config.yaml").read_text())
    assert echo["problem"]["seed"] == 8
    with pytest.raises(SystemExit):
        main(["run", str(cfg), "--seed", "-3"])


def test_explicit_problem_replays_from_echo(tmp_path):
    out = tmp_path / "o"
    assert main(["run", str(DEMO_CONFIGS / "explicit_quadratic.yaml"), "--output-dir", str(out), "--quiet"]) == 0
    echo = yaml.safe_load((out / "00_karahan12.config.yaml").read_text())
    replay = {"problem": echo["problem"], "schemes": [echo["scheme"]], "stop": echo["stop"]}
    replay_cfg = write(tmp_path, yaml.safe_dump(replay), "replay.yaml")
    out2 = tmp_path / "o2"
    assert main(["run", str(replay_cfg), "--output-dir", str(out2), "--quiet"]) == 0
    assert strip_timing((out / "00_karahan12.csv").read_text()) == strip_timing(
        (out2 / "00_karahan12.csv").read_text())


def test_two_invocations_give_identical_traces(tmp_path):
    cfg = DEMO_CONFIGS / "baselines.yaml"
    for d in ("a", "b"):
        assert main(["run", str(cfg), "--output-dir", str(tmp_path / d), "--quiet"]) == 0
    names = sorted(p.name for p in (tmp_path / "a").glob("[0-9]*"))
    assert len(names) == 10
    for name in names:
        a, b = (tmp_path / "a" / name).read_text(), (tmp_path / "b" / name).read_text()
        if name.endswith(".csv"):
            a, b = strip_timing(a), strip_timing(b)
        assert a == b


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "fixvi", "validate", str(write(tmp_path, QBOX))],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("OK")
