import json

from phi4sim.cli import main, slope_target
from phi4sim.serialize import load_diagram_set


def run_cli(tmp_path, *argv):
    out = tmp_path / "out"
    code = main(["--out", str(out), *argv])
    return code, out


def write_cfg(tmp_path, text):
    p = tmp_path / "cfg.txt"
    p.write_text(text)
    return str(p)


def test_slope_targets_match_table():
    targets = [slope_target(3, lbl) for lbl in
               ("linear", "square", "tree", "tree_lin", "square_square",
                "tree_square")]
    assert targets == [-2.0, -1.0, -4.0, -3.0, -3.0, -2.0]


def test_constants_command(tmp_path):
    code, out = run_cli(tmp_path, "constants", "--n-list", "1,2,4,8,16",
                        "--cprime-n-list", "0,1,2,4")
    assert code in (0, 1)
    assert (out / "constants.csv").exists()
    summary = json.loads((out / "constants.summary.json").read_text())
    assert "config_hash" in summary and summary["claims"]


def test_moments_small_instance(tmp_path):
    # tree compares against the step-exact kernel, so a coarse grid is unbiased
    cfg = write_cfg(tmp_path, "d = 1\nn = 2\ndt = 0.0625\nreplicas = 256\n"
                              "report_nodes = 32\nnode_stride = 4\nseed = 21\n"
                              "fit_min = 1.0\nfit_max = 2.0\n")
    code = main(["--config", cfg, "--out", str(tmp_path / "m"),
                 "moments", "--diagram", "tree"])
    assert code == 0
    rows = (tmp_path / "m" / "moments.csv").read_text().splitlines()
    assert rows[0].startswith("diagram,omega")
    assert len(rows) == 1 + 5  # header + five modes


def test_moments_unknown_diagram(tmp_path):
    code, _ = run_cli(tmp_path, "moments", "--diagram", "circle")
    assert code == 2


def test_csv_determinism_rerun(tmp_path):
    cfg = write_cfg(tmp_path, "d = 2\nn = 3\nreplicas = 60\nseed = 5\n")
    code1 = main(["--config", cfg, "--out", str(tmp_path / "a"),
                  "moments", "--diagram", "square"])
    code2 = main(["--config", cfg, "--out", str(tmp_path / "b"),
                  "moments", "--diagram", "square"])
    assert code1 == code2 == 0
    a = (tmp_path / "a" / "moments.csv").read_bytes()
    b = (tmp_path / "b" / "moments.csv").read_bytes()
    assert a == b
    sa = (tmp_path / "a" / "moments.summary.json").read_bytes()
    sb = (tmp_path / "b" / "moments.summary.json").read_bytes()
    assert sa == sb


def test_threads_do_not_change_output_bytes(tmp_path):
    base = "d = 2\nn = 3\nreplicas = 120\nseed = 5\n"
    cfg1 = write_cfg(tmp_path, base + "threads = 1\n")
    main(["--config", cfg1, "--out", str(tmp_path / "a"),
          "moments", "--diagram", "linear"])
    cfg2 = write_cfg(tmp_path, base + "threads = 2\n")
    main(["--config", cfg2, "--out", str(tmp_path / "b"),
          "moments", "--diagram", "linear"])
    a = (tmp_path / "a" / "moments.csv").read_bytes()
    b = (tmp_path / "b" / "moments.csv").read_bytes()
    assert a == b


def test_besov_precondition_exit_code(tmp_path):
    code, _ = run_cli(tmp_path, "besov", "--diagram", "linear",
                      "--p", "8", "--beta", "-0.5", "--n-list", "2")
    assert code == 2


def test_time_regularity_linear(tmp_path):
    cfg = write_cfg(tmp_path, "d = 1\nn = 2\ndt = 0.03125\nreplicas = 64\n"
                              "report_nodes = 72\nnode_stride = 1\nseed = 3\n"
                              "lag_steps = 1,2,4\n")
    code = main(["--config", cfg, "--out", str(tmp_path / "tr"),
                 "time-regularity", "--diagram", "linear"])
    assert code == 0
    summary = json.loads((tmp_path / "tr" / "time_regularity.summary.json").read_text())
    assert summary["verdicts"]["z_ok:linear"]


def test_lemmas_and_chaos_commands(tmp_path):
    for which in ("partition", "conv"):
        code, _ = run_cli(tmp_path, "lemmas", "--which", which)
        assert code == 0
    cfg = write_cfg(tmp_path, "replicas = 12000\nseed = 2\n")
    code = main(["--config", cfg, "--out", str(tmp_path / "ch"),
                 "chaos", "--which", "nelson"])
    assert code == 0


def test_dump_runs_and_loads(tmp_path):
    cfg = write_cfg(tmp_path, "d = 3\nn = 1\ndt = 0.125\nburn_in = 2.0\nseed = 7\n")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code = main(["--config", cfg, "--out", str(tmp_path / "d"),
                     "dump-diagrams", "--nodes", "2"])
    assert code == 0
    ds = load_diagram_set(str(tmp_path / "d" / "diagrams.bin"))
    assert len(ds.times) == 3
    assert ds.provenance["seed"] == 7
    assert ds.provenance["warnings"]  # short burn-in recorded


def test_missing_config_file(tmp_path):
    code = main(["--config", str(tmp_path / "absent.cfg"), "--out",
                 str(tmp_path / "x"), "lemmas", "--which", "partition"])
    assert code == 2
