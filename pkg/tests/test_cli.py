import json

import pytest

from metadec import cli


def test_list_runs():
    assert cli.main(["list"]) == 0


def _train_args(tmp_path, extra=()):
    return [
        "train",
        "--components", "DQN_DE_MS",
        "--problem-set", "bbob",
        "--split", "custom:1,2",
        "--dim", "3",
        "--max-episodes", "2",
        "--max-steps", "10",
        "--stop-threshold", "1e9",
        "--pop-size", "8",
        "--seed", "1",
        "--out", str(tmp_path / "model.json"),
        *extra,
    ]


def test_train_and_test_roundtrip(tmp_path, capsys):
    assert cli.main(_train_args(tmp_path)) == 0
    assert (tmp_path / "model.json").exists()
    rc = cli.main([
        "test",
        "--components", "DQN_DE_MS",
        "--model", str(tmp_path / "model.json"),
        "--split", "custom:1,2",
        "--dims", "3",
        "--replications", "2",
        "--max-steps", "10",
        "--pop-size", "8",
        "--baseline", "DE",
        "--report-dir", str(tmp_path / "reports"),
        "--format", "csv",
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "+/-/=" in out
    assert (tmp_path / "reports" / "results.csv").exists()


def test_config_file_defaults_and_flag_override(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(
        "# training defaults\n"
        "max-episodes = 2\n"
        "max_steps = 10\n"
        "stop-threshold = 1e9\n"
        "pop-size = 8\n"
        "dim = 3\n"
        "split = custom:1\n"
        "out = {}\n".format(tmp_path / "cfg_model.json")
    )
    rc = cli.main([
        "train",
        "--components", "DQN_DE_MS",
        "--config", str(config),
        "--max-episodes", "1",  # flag overrides the file
        "--seed", "0",
    ])
    assert rc == 0
    doc = json.loads((tmp_path / "cfg_model.json").read_text())
    assert doc["episodes_trained"] == 1


def test_bad_config_line(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("this is not a key value pair\n")
    rc = cli.main(["train", "--components", "DQN_DE_MS", "--config", str(config)])
    assert rc == 2


def test_unknown_components_exit_code():
    assert cli.main(["train", "--components", "NOPE", "--max-episodes", "0"]) == 2


def test_unknown_problem_set_exit_code():
    rc = cli.main([
        "train", "--components", "DQN_DE_MS", "--problem-set", "cec2017",
    ])
    assert rc == 2


def test_bad_split_exit_code():
    rc = cli.main([
        "train", "--components", "DQN_DE_MS", "--split", "custom:0",
        "--max-episodes", "0",
    ])
    assert rc == 2


def test_corrupt_model_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    rc = cli.main([
        "test", "--components", "DQN_DE_MS", "--model", str(bad),
        "--dims", "3", "--replications", "2",
    ])
    assert rc == 3


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["train"])  # missing required --components
    assert exc.value.code == 2
