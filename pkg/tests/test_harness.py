import logging
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqforge import ParameterError
from pqforge.cli import main
from pqforge.harness import commands
from pqforge.harness.config import RunConfig, epsilon_for_t_max, load_config, parse_pairs
from pqforge.harness.records import (
    RunRecord,
    StoredColoring,
    dumps_coloring,
    dumps_csv,
    dumps_history,
    dumps_record,
    loads_coloring,
    loads_csv,
    loads_history,
    loads_record,
    read_record,
)
from pqforge.harness.svg import line_chart
from pqforge.platonic import MuTable

FIXTURE = Path(__file__).parent / "fixtures" / "k4_one_factorization.txt"


# --- config -----------------------------------------------------------------------


def test_parse_pairs_lists_and_comments():
    text = "p = 4  # pair\nq=5\nseed = 1\nseed = 2, 3\ncolors = 40\nprobes = off\n"
    vals = parse_pairs(text)
    assert vals == {"p": 4, "q": 5, "seeds": (1, 2, 3), "num_colors": 40, "probes": False}


@pytest.mark.parametrize("text", ["p 4", "bogus = 1", "p = four", "probes = maybe"])
def test_parse_pairs_errors(text):
    with pytest.raises(ParameterError):
        parse_pairs(text)


def test_load_config_merges(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("mode = phase1\np = 4\nq = 5\nn = 20\nseeds = 1,2\n")
    cfg = load_config(str(path), {"n": 30, "kappa": None})
    assert cfg.mode == "phase1" and cfg.n == 30 and cfg.seeds == (1, 2)
    assert load_config(str(path), {}, "full").mode == "full"
    with pytest.raises(ParameterError):
        load_config(str(tmp_path / "missing.txt"))


def test_duplicate_seeds_warn(caplog):
    with caplog.at_level(logging.WARNING):
        cfg = load_config(None, {"p": 4, "q": 5, "n": 10, "seeds": (3, 1, 3)})
    assert cfg.seeds == (3, 1)
    assert "duplicate seed 3" in caplog.text


@pytest.mark.parametrize(
    "over",
    [
        {"mode": "nope"},
        {"q": None},
        {"n": None},
        {"seeds": ()},
        {"jobs": 0},
        {"epsilon": "1", "t_max": 0.5},
        {"t_max": 1.0},
        {"kappa": 1.0, "num_colors": 9},
    ],
)
def test_config_validation(over):
    base = {"mode": "phase1", "p": 4, "q": 5, "n": 10}
    base.update(over)
    with pytest.raises(ParameterError):
        RunConfig(**base).validate()


def test_out_root_env(monkeypatch, tmp_path):
    monkeypatch.setenv("PQFORGE_OUT", str(tmp_path / "env"))
    assert RunConfig().out_root == tmp_path / "env"
    assert RunConfig(out=str(tmp_path / "flag")).out_root == tmp_path / "flag"
    monkeypatch.delenv("PQFORGE_OUT")
    assert str(RunConfig().out_root) == "results"


def test_t_max_override():
    eps = epsilon_for_t_max(50, 0.4)
    assert 1 - 50 ** (-eps) == pytest.approx(0.4)
    cfg = RunConfig(mode="phase1", p=4, q=5, n=50, t_max=0.4, num_colors=30).validate()
    assert cfg.params().t_max == pytest.approx(0.4)


def test_config_lines_round_trip():
    cfg = RunConfig(mode="phase1", p=4, q=5, n=10, seeds=(4, 5), epsilon="1/3", probes=False).validate()
    again = load_config(None, parse_pairs("\n".join(cfg.lines())))
    assert again == cfg


# --- records ----------------------------------------------------------------------


@st.composite
def stored(draw):
    n = draw(st.integers(3, 8))
    mat = np.full((n, n), -1, dtype=np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            c = draw(st.integers(-1, 9))
            mat[u, v] = mat[v, u] = c
    phase = draw(st.sampled_from(["phase1", "full"]))
    return StoredColoring(3, 3, n, draw(st.integers(0, 99)), phase, mat, 5, 5)


@given(stored())
def test_coloring_round_trip(c):
    assert loads_coloring(dumps_coloring(c)) == c


def test_fixture_loads():
    c = loads_coloring(FIXTURE.read_text())
    assert c.n == 4 and c.phase == "full" and (c.matrix[np.triu_indices(4, 1)] >= 0).all()


@pytest.mark.parametrize("text", ["", "pqn 3 3 4 0 weird\n", "pqn 3 3 4 0 full\n0 0 1\n", "pqn 3 3 4 0 full\n0 1\n"])
def test_coloring_parse_errors(text):
    with pytest.raises(ParameterError):
        loads_coloring(text)


def test_history_round_trip():
    h = [(0, 1, 2, 3), (1, 0, 4, 0)]
    assert loads_history(dumps_history(h)) == h


def test_record_round_trip():
    r = RunRecord("full", 4, 5, 30, 2, 99, 3, "1/10", 1.25, 40, 400, "reached_imax", 400,
                  colors_used=55, phase2_ok=True, verified="pass", wall_time=0.5, config=["p=4", "q=5"])
    assert loads_record(dumps_record(r)) == r
    with pytest.raises(ParameterError):
        loads_record("unknown=1\n")


def test_csv_round_trip():
    rows = [[0, 0.1, math.nan], [1, 1e-17, 3.0]]
    header, back = loads_csv(dumps_csv(["i", "t", "x"], rows))
    assert header == ["i", "t", "x"]
    assert back[1] == [1.0, 1e-17, 3.0] and math.isnan(back[0][2])


# --- svg --------------------------------------------------------------------------


def test_svg_well_formed():
    svg = line_chart(
        [("a<b", [0, 1, 2], [1, 2, float("nan")]), ("c & d", [0, 1], [3, 1]), ("empty", [], [])],
        title="t <x>", x_label="t", y_label="y",
    )
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    lines = root.findall(f".//{ns}polyline")
    assert len(lines) == 3
    assert len(lines[0].get("points").split()) == 2
    assert lines[0].get("data-name") == "a<b"


# --- commands and cli ---------------------------------------------------------------


def test_run_phase1_writes_outputs(tmp_path, capsys):
    out = tmp_path / "res"
    code = main(["run", "--mode", "phase1", "--p", "4", "--q", "5", "--n", "12", "--colors", "30",
                 "--epsilon", "1/2", "--seeds", "0,1", "--out", str(out)])
    assert code == commands.EXIT_OK
    seed_dir = out / "4-5-12" / "0"
    for name in ("history.txt", "deviations.csv", "plot.svg", "coloring.txt", "record.txt"):
        assert (seed_dir / name).exists()
    rec = read_record(seed_dir / "record.txt")
    assert rec.verified == "pass" and rec.mode == "phase1" and "p=4" in rec.config
    assert (out / "4-5-12" / "index.txt").exists()
    assert "stuck rate" in capsys.readouterr().out
    assert main(["verify", str(seed_dir / "coloring.txt")]) == commands.EXIT_OK


def test_run_full_and_verify(tmp_path):
    out = tmp_path / "res"
    code = main(["run", "--p", "4", "--q", "5", "--n", "12", "--colors", "30", "--t-max", "0.5",
                 "--seeds", "3", "--out", str(out)])
    assert code == commands.EXIT_OK
    rec = read_record(out / "4-5-12" / "3" / "record.txt")
    assert rec.mode == "full" and rec.verified == "pass" and rec.phase2_ok
    assert main(["verify", str(out / "4-5-12" / "3" / "coloring.txt")]) == commands.EXIT_OK


def test_run_jobs_matches_serial(tmp_path):
    args = ["run", "--mode", "phase1", "--p", "4", "--q", "5", "--n", "10", "--colors", "20",
            "--epsilon", "1", "--seeds", "0,1,2"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b"), "--jobs", "2"])
    for s in "012":
        a = (tmp_path / "a" / "4-5-10" / s / "history.txt").read_text()
        b = (tmp_path / "b" / "4-5-10" / s / "history.txt").read_text()
        assert a == b


def test_all_stuck_exit_code(tmp_path):
    code = main(["run", "--mode", "phase1", "--p", "3", "--q", "3", "--n", "8", "--colors", "2",
                 "--epsilon", "10", "--out", str(tmp_path)])
    assert code == commands.EXIT_STUCK


def test_verify_fixture_and_bad_coloring(tmp_path, capsys):
    assert main(["verify", str(FIXTURE)]) == commands.EXIT_OK
    assert "violations=0" in capsys.readouterr().out
    bad = tmp_path / "bad.txt"
    bad.write_text(FIXTURE.read_text().replace("0 2 1", "0 2 0"))
    assert main(["verify", str(bad)]) == commands.EXIT_VERIFY
    assert main(["verify", str(tmp_path / "none.txt")]) == commands.EXIT_CONFIG


def test_config_errors_exit_2(tmp_path):
    assert main(["run", "--p", "4", "--q", "5", "--out", str(tmp_path)]) == commands.EXIT_CONFIG
    assert main(["run", "--p", "4", "--q", "99", "--n", "9", "--out", str(tmp_path)]) == commands.EXIT_CONFIG
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_trajectory_dump(tmp_path):
    code = main(["trajectory-dump", "--p", "4", "--q", "5", "--n", "100", "--out", str(tmp_path),
                 "--set", "grid_points=11"])
    assert code == commands.EXIT_OK
    header, rows = loads_csv((tmp_path / "4-5-100" / "trajectory.csv").read_text())
    assert header == ["t", "a", "h", "H", "f_Ava", "f_Ext"]
    assert len(rows) == 11 and rows[0][:2] == [0.0, 1.0] and rows[0][3] == 0.0


def test_mu_dump(tmp_path, capsys):
    assert main(["mu-dump", "--p", "4", "--q", "5", "--out", str(tmp_path)]) == commands.EXIT_OK
    text = (tmp_path / "mu-4-5.txt").read_text()
    assert "3 1 1 2" in text.splitlines()
    assert MuTable.loads(text).entries[(1, 1, 3)] == 2
    assert "identical" in capsys.readouterr().out


def test_concentration_small(tmp_path):
    cfg = load_config(None, {"p": 4, "q": 5, "n": 12, "num_colors": 36, "t_max": 0.5, "seeds": (0, 1),
                             "out": str(tmp_path), "ext_types": 2}, "concentration")
    code, devs = commands.cmd_concentration(cfg)
    assert code == commands.EXIT_OK and set(devs) == {0.25, 0.5}
    header, rows = loads_csv((tmp_path / "4-5-12" / "0" / "deviations.csv").read_text())
    first = dict(zip(header, rows[0]))
    assert first["t"] == 0 and first["mean_ava"] == 36 and first["ava_traj"] == 36
    eh, erows = loads_csv((tmp_path / "4-5-12" / "0" / "ext.csv").read_text())
    assert erows and all(r[eh.index("ext")] >= 0 for r in erows)
    ET.fromstring((tmp_path / "4-5-12" / "plot.svg").read_text())


def test_lemma_suite_guard(tmp_path):
    assert main(["lemma-suite", "--p", "7", "--q", "9", "--out", str(tmp_path)]) == commands.EXIT_CONFIG


def test_retry_seed():
    assert commands.retry_seed(5, 0) == 5
    assert commands.retry_seed(5, 1) != commands.retry_seed(5, 2)
    assert commands.retry_seed(5, 1) == commands.retry_seed(5, 1)
