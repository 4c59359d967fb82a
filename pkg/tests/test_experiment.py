import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gossip_rmf import ModelKind, cli, experiment
from gossip_rmf.experiment import (
    InvariantViolation,
    ResultTable,
    TypeMismatch,
    UnknownKey,
    csv_text,
    load_config,
    parse_config,
    read_csv,
    single_fresh_counts,
    run,
    write_csv,
    write_plot_script,
)
from gossip_rmf.kernels import ModelKind


def test_fig7_preset():
    cfg = load_config("fig7")
    assert cfg.model is ModelKind.SIX_STATE
    assert (cfg.N, cfg.params.n_items, cfg.params.c, cfg.params.s, cfg.params.gmax) == (100, 500, 100, 50, 3)
    assert cfg.counts == (0, 0, 99, 0, 1, 0)
    assert cfg.t_max == 500 and cfg.runs == 500


def test_fig8_preset():
    cfg = load_config("fig8")
    assert cfg.model is ModelKind.SIX_STATE and cfg.N == 2500 and cfg.params.gmax == 9
    assert cfg.counts == (0, 0, 2499, 0, 1, 0) and cfg.t_max == 1500


@pytest.mark.parametrize("name", experiment.PRESETS)
def test_every_preset_parses(name):
    cfg = load_config(name)
    assert sum(cfg.counts) == cfg.N


def test_fig3_and_fig5_counts():
    assert load_config("fig3").counts == (615,) * 4 + (10,) * 4
    cfg = load_config("fig5")
    assert cfg.N == 120 and cfg.counts == (29,) * 4 + (1,) * 4 and cfg.t_max == 500


def test_counts_must_sum_to_n():
    with pytest.raises(InvariantViolation) as err:
        parse_config("model = three-state\nN = 10\ncounts = 1, 2, 6\n")
    assert err.value.key == "counts"


def test_unknown_key_and_type_mismatch():
    with pytest.raises(UnknownKey) as err:
        parse_config("model = three-state\ncolour = blue\n")
    assert err.value.key == "colour"
    with pytest.raises(TypeMismatch):
        parse_config("model = three-state\nN = many\n")
    with pytest.raises(TypeMismatch):
        parse_config("model = nine-state\n")
    with pytest.raises(TypeMismatch):
        parse_config("model three-state\n")


def test_other_invariants():
    with pytest.raises(InvariantViolation):
        parse_config("model = three-state\nN = 10\ncounts = 1, 2, 7\nmethods = agentsim\n")
    with pytest.raises(InvariantViolation):
        parse_config("model = two-state\nmeasures = coverage\n")
    with pytest.raises(InvariantViolation):
        parse_config("model = three-state\nmethods = classic, magic\n")
    with pytest.raises(InvariantViolation):
        parse_config("model = three-state\ns = 200\n")
    with pytest.raises(InvariantViolation):
        parse_config("model = three-state\nruns = 0\n")


def test_comments_and_method_order():
    cfg = parse_config("# header\nmodel = three-state  # trailing\nN = 20\nmethods = refined, classic\n\n")
    assert cfg.methods == ("classic", "refined")
    assert cfg.counts == (0, 1, 19)


def test_single_fresh_full_models():
    cfg = parse_config("model = full-coverage\nN = 9\ngmax = 3\n")
    assert cfg.counts[4] == 1 and sum(cfg.counts[8:]) == 8 and sum(cfg.counts[:4]) == 0


def test_header_rule(tmp_path):
    cfg = parse_config("model = six-state\nN = 100\nt_max = 5\nmethods = refined, classic\nmeasures = replication\n")
    table = run(cfg)
    assert table.header == ["t", "classic_replication", "refined_replication"]
    assert csv_text(table).splitlines()[0] == "t,classic_replication,refined_replication"


def test_empty_method_set_header_only(tmp_path):
    cfg = parse_config("model = three-state\nmethods =\n")
    table = run(cfg)
    path = write_csv(table, tmp_path / "empty.csv")
    assert path.read_text() == "t\n"


def test_degenerate_model_constant_column():
    cfg = parse_config("model = three-state\nN = 10\ncounts = 0, 0, 10\nt_max = 20\nmethods = classic, refined\nmeasures = replication, coverage\n")
    table = run(cfg)
    assert np.all(table["classic_replication"] == 0) and np.all(table["classic_coverage"] == 0)
    assert np.all(table["refined_coverage"] == 0)


def test_full_column_order():
    cfg = parse_config(
        "model = six-state\nN = 6\nt_max = 3\nruns = 3\nmethods = exact, agentsim, popsim, refined, classic\nmeasures = coverage, replication\n"
    )
    table = run(cfg)
    groups = ["classic", "refined", "popsim_mean", "popsim_std", "agentsim_mean", "agentsim_std", "exact"]
    assert table.header == ["t"] + [f"{g}_{m}" for g in groups for m in ("replication", "coverage")]
    assert len(table.t) == 4 and all(len(c) == 4 for c in table.columns.values())


def test_fig1_classic_coverage_curve():
    cfg = load_config("fig1").with_overrides(methods=["classic"])
    table = run(cfg)
    cov = table["classic_coverage"]
    assert np.all(np.diff(cov) >= 0) and cov[-1] > 0.9999


def test_csv_round_trip_and_determinism(tmp_path):
    cfg = load_config("fig7").with_overrides(t_max=30, runs=4, methods=["classic", "refined", "popsim", "agentsim"])
    a = run(cfg)
    path = write_csv(a, tmp_path / "a.csv")
    assert read_csv(path) == a
    b = run(cfg)
    assert csv_text(a) == csv_text(b)
    text = path.read_text()
    assert "\r" not in text and text.endswith("\n")


@settings(max_examples=100, deadline=None)
@given(values=st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_17_digits_round_trip(tmp_path_factory, values):
    table = ResultTable(np.arange(len(values)), {"classic_replication": np.array(values)})
    path = write_csv(table, tmp_path_factory.mktemp("csv") / "t.csv")
    assert read_csv(path) == table


def test_plot_script_references_columns(tmp_path):
    cfg = load_config("fig7").with_overrides(t_max=10, runs=2, methods=["classic", "popsim"])
    table = run(cfg)
    csv_path = write_csv(table, tmp_path / "r.csv")
    script = write_plot_script(table, tmp_path / "r_plot.py", csv_path)
    text = script.read_text()
    for name in ("classic_replication", "popsim_mean_coverage", "popsim_std_coverage"):
        assert name in text
    compile(text, str(script), "exec")


def test_write_errors_name_the_path(tmp_path):
    table = ResultTable(np.arange(0), {})
    with pytest.raises(OSError, match="missing"):
        write_csv(table, tmp_path / "missing" / "x.csv")


def test_cli_run_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "fig7.csv"
    assert cli.main(["run", "fig7", "--t-max", "5", "--runs", "2", "--methods", "classic,refined", "--out", str(out)]) == 0
    assert out.exists() and (tmp_path / "fig7_plot.py").exists()
    assert read_csv(out).header == ["t", "classic_replication", "classic_coverage", "refined_replication", "refined_coverage"]

    bad = tmp_path / "bad.cfg"
    bad.write_text("model = six-state\nN = 10\ncounts = 1, 1, 1, 1, 1, 1\n")
    assert cli.main(["run", str(bad)]) == 1
    assert cli.main(["run", str(tmp_path / "nope.cfg")]) == 1
    assert cli.main(["run", "fig7", "--methods", "classic,telepathy"]) == 1

    big = tmp_path / "big.cfg"
    big.write_text("model = six-state\nN = 80\nt_max = 1\nmethods = exact\n")
    assert cli.main(["run", str(big)]) == 2
    assert "StateSpaceTooLarge" in capsys.readouterr().err


def test_cli_stdout_csv(capsys):
    assert cli.main(["run", "fig3", "--t-max", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,classic_replication" and len(lines) == 4


def test_cli_verify_and_bench(capsys, monkeypatch):
    assert cli.main(["verify"]) == 0
    assert "FAIL" not in capsys.readouterr().out
    assert cli.main(["bench", "--t-max", "20", "--sizes", "100,2500"]) == 0
    out = capsys.readouterr().out
    assert "(classic mean field)" in out and "(refined mean field)" in out

    from gossip_rmf import verify

    failing = verify.CheckResult("forced", False, "x")
    monkeypatch.setattr(cli, "run_checks", lambda: [failing])
    assert cli.main(["verify"]) == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gossip_rmf", "run", "fig3", "--t-max", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("t,classic_replication\n0,")


@pytest.mark.parametrize(
    "kind, expected",
    [
        ("six-state", (0, 0, 9, 0, 1, 0)),
        ("three-state", (0, 1, 9)),
        ("two-state", (9, 1)),
    ],
)
def test_single_fresh_counts_accepts_names(kind, expected):
    assert single_fresh_counts(kind, 10, 3) == expected


def test_single_fresh_counts_delay_models():
    counts = single_fresh_counts(ModelKind.FULL_REPLICATION, 9, 3)
    assert counts == (2, 2, 2, 2, 1, 0, 0, 0)
