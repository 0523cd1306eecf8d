import csv
import json

import pytest

from allee.cli import main
from allee.config import RECIPES, parse_config
from allee.errors import ConfigError
from allee.recipes import run_experiment

BASE = """
[model]
s = 1.0
gamma2 = 0.1
gamma3 = 2.67
gamma4 = {g4}
lambda = {lam}
epsilon = {eps}

[solver]
T = {T}
n_paths = 40
x0_list = 0.3, 5.0
lambda_list = 0.4
gamma3_steps = 60
hold_product = {hold}

[run]
experiment = {name}
seed = 3
"""

LIGHT = {
    "potential": dict(g4=1 / 2.67, lam=0.0, eps=0.0, T=1, hold="true"),
    "phaselines": dict(g4=1 / 2.67, lam=0.0, eps=0.0, T=1, hold="true"),
    "paths": dict(g4=1.0, lam=0.1, eps=0.5, T=2, hold="false"),
    "transition": dict(g4=1.0, lam=0.0, eps=0.0, T=10, hold="false"),
    "steady_curve": dict(g4=1.0, lam=0.0, eps=0.0, T=1, hold="false"),
    "fpe": dict(g4=1.0, lam=0.0, eps=0.5, T=0.3, hold="false"),
    "mppp": dict(g4=1.0, lam=0.0, eps=0.5, T=0.3, hold="false"),
}


def light_config(name):
    return parse_config(BASE.format(name=name, **LIGHT[name]))


@pytest.mark.parametrize("name", RECIPES)
def test_recipe_manifest_lists_every_file(name, tmp_path):
    manifest = run_experiment(light_config(name), tmp_path)
    on_disk = sorted(p.name for p in tmp_path.iterdir() if p.name != "manifest.json")
    assert sorted(f["name"] for f in manifest["files"]) == on_disk
    written = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert written["seed"] == 3
    assert parse_config(written["config"]) == light_config(name)
    assert written["wall_time_s"] >= 0


@pytest.mark.parametrize("name", ["paths", "mppp"])
def test_rerun_is_byte_identical(name, tmp_path):
    cfg = light_config(name)
    a = run_experiment(cfg, tmp_path / "a")
    b = run_experiment(cfg, tmp_path / "b")
    for f in a["files"]:
        assert (tmp_path / "a" / f["name"]).read_bytes() == (tmp_path / "b" / f["name"]).read_bytes()
    assert [f["sha256"] for f in a["files"]] == [f["sha256"] for f in b["files"]]


def test_seed_changes_paths(tmp_path):
    from dataclasses import replace

    cfg = light_config("paths")
    run_experiment(cfg, tmp_path / "a")
    run_experiment(replace(cfg, run=replace(cfg.run, seed=4)), tmp_path / "b")
    assert (tmp_path / "a" / "path_x0_5.csv").read_bytes() != (tmp_path / "b" / "path_x0_5.csv").read_bytes()


def test_phaselines_csv_contains_fold(tmp_path):
    run_experiment(light_config("phaselines"), tmp_path)
    info = json.loads((tmp_path / "phaselines.json").read_text())
    with open(tmp_path / "branches.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["gamma3", "beta", "x1", "x2", "x3", "stability_pattern"]
    fold = [r for r in rows if float(r["gamma3"]) == info["fold_gamma3"]]
    assert len(fold) == 1
    assert float(fold[0]["x2"]) == pytest.approx(float(fold[0]["x3"]), rel=1e-6)


def test_export_headers(tmp_path):
    run_experiment(light_config("mppp"), tmp_path / "m")
    first = lambda p: p.read_text().splitlines()[0]
    assert first(tmp_path / "m" / "mppp_x0_5.csv") == "t,x_m,mode_count"
    assert first(tmp_path / "m" / "density_x0_5.csv") == "t,x,p"
    ev = json.loads((tmp_path / "m" / "mppp_x0_5_events.json").read_text())
    assert {"bifurcation_times", "x_m_terminal"} <= set(ev)
    run_experiment(light_config("transition"), tmp_path / "t")
    assert first(tmp_path / "t" / "transition_lambda_0.4.csv") == "t,z,x,z_dot"
    run_experiment(light_config("paths"), tmp_path / "p")
    assert first(tmp_path / "p" / "path_x0_0.3.csv") == "t,x,jump_flag"
    ens = json.loads((tmp_path / "p" / "ensemble_x0_5.json").read_text())
    assert {"extinction_fraction", "n_paths", "seed", "histogram"} <= set(ens)


def test_transition_rejects_zero_noise(tmp_path):
    cfg = parse_config(BASE.format(name="transition", **LIGHT["transition"]).replace("lambda_list = 0.4", "lambda_list = 0.0"))
    with pytest.raises(ConfigError):
        run_experiment(cfg, tmp_path)


def test_cli_list(capsys):
    assert main(["list-recipes"]) == 0
    out = capsys.readouterr().out
    assert [line.split()[0] for line in out.splitlines()] == list(RECIPES)


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.ini"
    good.write_text(BASE.format(name="potential", **LIGHT["potential"]))
    assert main(["run", "--config", str(good), "--seed", "9", "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["seed"] == 9

    bad = tmp_path / "bad.ini"
    bad.write_text(BASE.format(name="potential", **LIGHT["potential"]).replace("epsilon = 0.0", "alpha = 2.5"))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "(0, 2)" in capsys.readouterr().err

    assert main(["run", "--config", str(tmp_path / "missing.ini")]) == 2

    numerical = tmp_path / "num.ini"
    text = BASE.format(name="transition", **LIGHT["transition"]).replace("n_paths = 40", "n_paths = 40\ntol = 1e-15\nmax_iter = 5")
    numerical.write_text(text)
    assert main(["run", "--config", str(numerical), "--out", str(tmp_path / "n")]) == 3
    assert "numerical failure" in capsys.readouterr().err
