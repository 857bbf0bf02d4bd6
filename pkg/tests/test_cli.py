import subprocess
import sys

import pytest

from atompurify import cli

SMALL = {
    "distill-depolarizing": "a = 0.8\nb = 0.6\np_max = 0.3\np_step = 0.1\n",
    "distill-damping": "p_max = 0.5\np_step = 0.1\n",
    "distill-phase": "a = 0.8\nb = 0.6\np_max = 0.4\np_step = 0.2\n",
    "rank-two": "F_step = 0.3\neps_step = 0.3\n",
    "recurrence": "F = 0.8\n",
    "cavity-sweep": "g_min = 20\ng_max = 27\ng_step = 3.5\nrecurrence_fidelity = 0.9\n",
    "polarizer-design": "theta_steps = 7\n",
}


def _write(tmp_path, name, body, run_extra=""):
    path = tmp_path / f"{name}.ini"
    path.write_text(f"[run]\nexperiment = {name}\nseed = 3\n{run_extra}\n[{name}]\n{body}")
    return str(path)


def test_validate_examples(tmp_path):
    assert cli.validate(_write(tmp_path, "distill-damping", "p_max = 0.95\n")) == []
    diags = cli.validate(_write(tmp_path, "distill-damping", "p_min = 0\n"))
    assert [d.key for d in diags] == ["distill-damping.p_max"]
    diags = cli.validate(_write(tmp_path, "cavity-sweep", "eps = 1.5\n"))
    assert len(diags) == 1 and "out of range" in diags[0].message and diags[0].key == "cavity-sweep.eps"


def test_validate_reports_unknown_and_malformed_keys(tmp_path):
    diags = cli.validate(_write(tmp_path, "recurrence", "F = high\nbogus = 1\n"))
    assert {d.key for d in diags} == {"recurrence.F", "recurrence.bogus"}
    path = tmp_path / "bad.ini"
    path.write_text("[run]\nexperiment = nope\n")
    assert [d.key for d in cli.validate(str(path))] == ["run.experiment"]
    with pytest.raises(cli.ConfigError):
        cli.validate(str(tmp_path / "missing.ini"))


@pytest.mark.parametrize("name", sorted(cli.EXPERIMENTS))
def test_every_experiment_runs_deterministically(tmp_path, name, capsys):
    path = _write(tmp_path, name, SMALL[name])
    assert cli.main(["run", path, "--output", "-"]) == 0
    first = capsys.readouterr().out
    assert cli.main(["run", path, "--output", "-"]) == 0
    assert capsys.readouterr().out == first
    lines = first.split("\n")
    assert lines[0].startswith(f"# experiment: {name}")
    assert lines[1] == "# seed: 3"
    assert "\r" not in first and first.endswith("\n")


def test_thread_count_does_not_change_output(tmp_path):
    cfg = cli.load_config(_write(tmp_path, "distill-damping", SMALL["distill-damping"]))
    assert cli.run(cfg, threads=1) == cli.run(cfg, threads=4)
    cfg = cli.load_config(_write(tmp_path, "cavity-sweep", SMALL["cavity-sweep"]))
    assert cli.run(cfg, threads=1) == cli.run(cfg, threads=3)


def test_distill_damping_columns(tmp_path):
    cfg = cli.load_config(_write(tmp_path, "distill-damping", "p_max = 0.95\n"))
    text = cli.run(cfg)
    header = next(line for line in text.splitlines() if not line.startswith("#"))
    assert header.split(",")[:5] == ["p", "C_before", "C_after", "beta_before", "beta_after"]
    rows = [line for line in text.splitlines() if not line.startswith("#")][1:]
    assert len(rows) == 96
    assert "# hidden nonlocality grid interval: [0.3, 0.35]" in text


def test_recurrence_columns(tmp_path):
    text = cli.run(cli.load_config(_write(tmp_path, "recurrence", "F = 0.8\n")))
    header = next(line for line in text.splitlines() if not line.startswith("#"))
    assert header.startswith("round,fidelity,N,yield")
    assert "# converged: 1" in text


def test_output_file_and_seed_override(tmp_path):
    out = tmp_path / "out.csv"
    path = _write(tmp_path, "recurrence", "F = 0.8\n", f"output = {out}\n")
    assert cli.main(["run", path, "--seed", "11"]) == 0
    assert "# seed: 11" in out.read_text()


def test_exit_codes(tmp_path, capsys):
    bad = _write(tmp_path, "distill-damping", "p_min = 0\n")
    assert cli.main(["validate", bad]) == 1
    assert cli.main(["run", bad]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: ") and "p_max" in err[0]
    # a = b = 0 cannot be normalized: a numeric failure
    numeric = _write(tmp_path, "distill-depolarizing", "a = 0\nb = 0\np_max = 0.1\n")
    assert cli.main(["run", numeric, "--output", "-"]) == 2
    assert capsys.readouterr().err.startswith("error: ")
    assert cli.main(["run", _write(tmp_path, "recurrence", "F = 0.8\n"), "--threads", "0"]) == 1


def test_list_experiments(capsys):
    assert cli.main(["list-experiments"]) == 0
    names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == list(cli.EXPERIMENTS)


def test_module_entry_point(tmp_path):
    path = _write(tmp_path, "rank-two", SMALL["rank-two"])
    runs = [subprocess.run([sys.executable, "-m", "atompurify", "run", path, "--output", "-"],
                           capture_output=True, check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1] and runs[0].startswith(b"# experiment: rank-two")
