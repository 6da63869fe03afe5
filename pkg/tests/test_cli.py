"""Command-line entry points, driven in-process through main()."""

import csv
import io
import json

import pytest

from seqnash.cli import main
from seqnash.jsonio import load_game, profile_from_json
from seqnash.verify import epsilon_report


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_kuhn3_reduced(tmp_path, capsys):
    out = str(tmp_path / "k3r.efg")
    code, stdout, _ = run(capsys, "gen", "kuhn3-reduced", "--out", out)
    assert code == 0
    game, pins = load_game(out)
    c = game.counts()
    assert (c.total, c.decision, c.terminal) == (415, 252, 162)
    assert pins is None


def test_gen_kuhn3_writes_sidecar(tmp_path, capsys):
    out = str(tmp_path / "k3.efg")
    code, _, _ = run(capsys, "gen", "kuhn3", "--out", out)
    assert code == 0
    assert (tmp_path / "k3.pins.json").exists()
    _, pins = load_game(out)
    assert len(pins) == 22


def test_gen_sfg(tmp_path, capsys):
    out = str(tmp_path / "g.json")
    code, _, _ = run(capsys, "gen", "sfg", "--players", "4", "--strategies",
                     "2", "--seed", "5", "--out", out)
    assert code == 0
    game, _ = load_game(out)
    assert game.num_players == 4
    assert game.strategy_counts == (2, 2, 2, 2)


def test_inspect_counts(tmp_path, capsys):
    out = str(tmp_path / "k3.efg")
    run(capsys, "gen", "kuhn3", "--out", out)
    code, stdout, _ = run(capsys, "inspect", out, "--ncp")
    assert code == 0
    assert "601" in stdout and "288" in stdout and "312" in stdout
    assert "249" in stdout  # system variables with pins as constraints
    assert "72" in stdout


def test_inspect_pins_none(tmp_path, capsys):
    out = str(tmp_path / "k3.efg")
    run(capsys, "gen", "kuhn3", "--out", out)
    code, stdout, _ = run(capsys, "inspect", out, "--ncp", "--pins", "none")
    assert code == 0
    assert "51" in stdout


def test_solve_and_verify_round_trip(tmp_path, capsys):
    game_path = str(tmp_path / "k2.efg")
    prof_path = str(tmp_path / "k2.profile.json")
    run(capsys, "gen", "kuhn2", "--out", game_path)
    code, stdout, _ = run(capsys, "solve", game_path, "--epsilon", "1e-9",
                          "--out", prof_path)
    assert code == 0
    assert "status: equilibrium_found" in stdout
    assert "epsilon:" in stdout and "stats:" in stdout

    code, stdout, _ = run(capsys, "verify", game_path, prof_path)
    assert code == 0
    assert "player 1:" in stdout and "player 2:" in stdout
    assert "epsilon:" in stdout

    game, _ = load_game(game_path)
    with open(prof_path) as fh:
        profile = profile_from_json(fh.read())
    assert epsilon_report(game, profile).epsilon <= 1e-9


def test_solve_zslp_reports_value(tmp_path, capsys):
    game_path = str(tmp_path / "k2.efg")
    run(capsys, "gen", "kuhn2", "--out", game_path)
    code, stdout, _ = run(capsys, "solve", game_path, "--method", "zslp")
    assert code == 0
    assert "value: -0.0" in stdout
    assert "-0.05555555" in stdout


def test_solve_unmet_target_exits_nonzero(tmp_path, capsys):
    # an impossible target must fail loudly but still save the best profile
    game_path = str(tmp_path / "k2.efg")
    prof_path = str(tmp_path / "best.json")
    run(capsys, "gen", "kuhn2", "--out", game_path)
    code, stdout, err = run(capsys, "solve", game_path, "--epsilon", "1e-30",
                            "--node-limit", "5", "--out", prof_path)
    assert code == 1
    assert "not met" in err
    assert (tmp_path / "best.json").exists()


def test_solve_sfg_pure(tmp_path, capsys):
    game_path = str(tmp_path / "g.json")
    run(capsys, "gen", "sfg", "--players", "3", "--strategies", "3",
        "--seed", "2", "--out", game_path)
    code, stdout, _ = run(capsys, "solve", game_path)
    assert code == 0
    assert "equilibrium_found" in stdout


def test_bench_csv(tmp_path, capsys):
    out = str(tmp_path / "bench.csv")
    code, _, _ = run(capsys, "bench", "sfg", "--players", "3", "--strategies",
                     "3", "--count", "3", "--seed", "0", "--out", out)
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["seed", "n", "m", "status", "nodes", "lp_solves",
                       "wall_ms", "epsilon"]
    assert len(rows) == 4
    for seed, row in zip(("0", "1", "2"), rows[1:]):
        assert row[0] == seed
        assert row[3] == "equilibrium_found"
        assert float(row[7]) <= 1e-6


def test_missing_file_exit_code(capsys):
    code, _, err = run(capsys, "solve", "/nonexistent/game.efg")
    assert code == 2
    assert err.strip()


def test_malformed_game_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.efg"
    bad.write_text("garbage\n")
    code, _, err = run(capsys, "inspect", str(bad))
    assert code == 2
    assert "error" in err


def test_zslp_rejects_three_player(tmp_path, capsys):
    game_path = str(tmp_path / "k3.efg")
    run(capsys, "gen", "kuhn3", "--out", game_path)
    code, _, err = run(capsys, "solve", game_path, "--method", "zslp")
    assert code == 2
    assert err.strip()
