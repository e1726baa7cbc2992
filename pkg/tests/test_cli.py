import json

from congestsim.cli import EXIT_INVALID, EXIT_OK, EXIT_TIMEOUT, main
from congestsim.graph import gen_cycle, save_edge_list


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_gen_cycle_summary(capsys, tmp_path):
    out_path = tmp_path / "c.txt"
    code, out = run_cli(capsys, ["gen", "cycle", "n=8", "seed=1", "--out", str(out_path)])
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["n"] == 8 and record["m"] == 8
    text = out_path.read_text()
    assert text.startswith("congest-graph v1 n=8")


def test_gen_bridge_has_tag_lines(capsys, tmp_path):
    out_path = tmp_path / "b.txt"
    code, out = run_cli(capsys, ["gen", "bridge", "n=16", "seed=7", "--out", str(out_path)])
    assert code == EXIT_OK
    tags = [ln for ln in out_path.read_text().splitlines() if ln.startswith("tag")]
    assert len(tags) == 2 and all("bridge" in t for t in tags)


def test_gen_tight_edge_count(capsys):
    code, out = run_cli(capsys, ["gen", "tight", "n=256", "eps=0.5", "epsp=0.25", "seed=3"])
    assert code == EXIT_OK
    assert json.loads(out)["m"] == 12240


def test_gen_rejects_bad_params(capsys):
    code, _ = run_cli(capsys, ["gen", "cycle", "n=2", "seed=1"])
    assert code == 4


def test_run_luby_valid(capsys):
    code, out = run_cli(capsys, ["run", "luby", "--graph", "cycle:n=16", "--seed", "1"])
    assert code == EXIT_OK
    assert json.loads(out)["valid"] is True


def test_run_msg_separation_sanity(capsys):
    # In the dense regime the frugal algorithm spends far fewer messages
    # than one per directed edge.
    code, out = run_cli(capsys, ["run", "2rs-msg", "--graph", "gnp:n=512,p=0.2", "--seed", "2"])
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["valid"] is True
    assert record["messages_total"] < 2 * record["m"]


def test_run_repeat_byte_identical(capsys):
    argv = ["run", "2rs-msg", "--graph", "gnp:n=64,p=0.05", "--seed", "2"]
    _, out1 = run_cli(capsys, argv)
    _, out2 = run_cli(capsys, argv)
    assert out1 == out2


def test_run_reports_timeout_distinctly(capsys):
    code, out = run_cli(
        capsys,
        ["run", "2rs-msg", "--graph", "gnp:n=64,p=0.3", "--seed", "3", "--round-cap", "2"],
    )
    assert code == EXIT_TIMEOUT
    assert json.loads(out)["timeout"] is True


def test_verify_subcommand(capsys, tmp_path):
    g = gen_cycle(6, seed=1)
    graph_path = tmp_path / "g.txt"
    save_edge_list(g, graph_path)
    set_path = tmp_path / "set.txt"
    set_path.write_text("0\n3\n")
    code, out = run_cli(capsys, ["verify", str(graph_path), str(set_path), "--beta", "2"])
    assert code == EXIT_OK
    assert json.loads(out)["valid"] is True
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, out = run_cli(capsys, ["verify", str(graph_path), str(empty)])
    assert code == EXIT_INVALID
    assert json.loads(out)["beta_violations"] == [0, 1, 2, 3, 4, 5]


def test_verify_alpha_violation_listed(capsys, tmp_path):
    g = gen_cycle(6, seed=1)
    graph_path = tmp_path / "g.txt"
    save_edge_list(g, graph_path)
    set_path = tmp_path / "set.txt"
    set_path.write_text("0\n1\n3\n")
    code, out = run_cli(capsys, ["verify", str(graph_path), str(set_path)])
    assert code == EXIT_INVALID
    assert [0, 1] in json.loads(out)["alpha_violations"]


def test_sweep_rows_and_columns(capsys, tmp_path):
    out_path = tmp_path / "sweep.csv"
    code, _ = run_cli(
        capsys,
        [
            "experiment", "sweep", "--algo", "luby", "--family", "cycle",
            "--sizes", "16,32", "--trials", "2", "--seed", "4",
            "--out", str(out_path),
        ],
    )
    assert code == EXIT_OK
    lines = out_path.read_text().splitlines()
    assert lines[0].startswith("kind,n,m,max_degree,seed,rounds,messages,valid")
    kinds = [ln.split(",")[0] for ln in lines[1:]]
    assert kinds == ["run", "run", "median", "max", "run", "run", "median", "max"]


def test_sweep_gnp_scaled_p(capsys):
    code, out = run_cli(
        capsys,
        [
            "experiment", "sweep", "--algo", "luby", "--family", "gnp",
            "--family-params", "p=8/n", "--sizes", "64,128", "--trials", "2",
            "--seed", "4", "--format", "json",
        ],
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    runs = [r for r in payload["rows"] if r["kind"] == "run"]
    assert all(r["valid"] for r in runs)


def test_sweep_rejects_unsorted_sizes(capsys):
    code, _ = run_cli(
        capsys,
        ["experiment", "sweep", "--algo", "luby", "--family", "cycle",
         "--sizes", "32,16", "--trials", "1"],
    )
    assert code == 4


def test_bridge_experiment_row(capsys):
    code, out = run_cli(
        capsys,
        ["experiment", "bridge", "--algo", "luby", "--sizes", "16",
         "--trials", "5", "--seed", "2", "--format", "json"],
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    row = payload["rows"][0]
    assert row["trials"] == 5
    assert row["crossing_rate"] == 1.0  # the marking MIS floods every edge


def test_bridge_mu_zero_never_crosses(capsys):
    code, out = run_cli(
        capsys,
        ["experiment", "bridge", "--algo", "luby", "--sizes", "16",
         "--trials", "5", "--mu", "0", "--seed", "2", "--format", "json"],
    )
    assert code == EXIT_OK
    row = json.loads(out)["rows"][0]
    assert row["crossing_rate"] == 0.0
    assert row["hist_incomplete"] == 5


def test_env_var_default_seed(capsys, monkeypatch):
    monkeypatch.setenv("CONGESTSIM_SEED", "77")
    code, out = run_cli(capsys, ["gen", "cycle", "n=8"])
    assert code == EXIT_OK
    assert json.loads(out)["seed"] == 77
