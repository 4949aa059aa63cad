import json
from dataclasses import replace

import numpy as np
import pytest

from identconcepts import cli
from identconcepts.exceptions import ConfigError
from identconcepts.generators import GeneratorSpec
from identconcepts.harness import config as cfg_mod
from identconcepts.harness import runner
from identconcepts.harness.gradcheck import VARIANTS, grad_check
from identconcepts.sampling import ComponentDistribution

FAST_SGD = {"preset": "robust", "epochs": 20}


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def small_config(**overrides):
    data = {
        "schema": 1,
        "experiment": "identifiability",
        "generator": "fourbars",
        "methods": ["dma_analytic", "ima_analytic", "dma_sgd"],
        "seeds": [0, 1],
        "n_samples": 12,
        "sgd": FAST_SGD,
    }
    data.update(overrides)
    return data


# --- config ------------------------------------------------------------------

def test_config_round_trip_through_dict():
    cfg = cfg_mod.config_from_dict(small_config())
    assert cfg.generator.kind == "fourbars" and cfg.seeds == (0, 1)
    assert cfg.sgd.update == "relative" and cfg.sgd.epochs == 20
    again = cfg_mod.config_from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


@pytest.mark.parametrize("bad", [
    {"schema": 2},
    {"schema": None},
    {"methods": ["lda"]},
    {"methods": "pca"},
    {"seeds": []},
    {"noise_levels": [0.1, 0.0]},
    {"noise_levels": [-0.1]},
    {"experiment": "benchmark"},
    {"colour": "red"},
    {"sgd": {"preset": "turbo"}},
    {"sgd": {"learning_rate": -1}},
    {"generator": {"kind": "fivebars"}},
    {"distribution": {"kind": "independent_uniform", "k": 3}},
    {"experiment": "noise_sweep"},
    {"experiment": "noise_sweep", "generator": "fourbars_nemr", "methods": ["pca"]},
    {"experiment": "correlation_sweep", "methods": ["ica"]},
    {"n_jacobians": 0},
    {"mixing": "diagonal"},
])
def test_config_validation_errors(bad):
    with pytest.raises(ConfigError):
        cfg_mod.config_from_dict(small_config(**bad))


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        cfg_mod.load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        cfg_mod.load_config(broken)


def test_seeds_from_env():
    assert cfg_mod.seeds_from_env({}) is None
    assert cfg_mod.seeds_from_env({"IDENTCONCEPTS_SEED": "3, 7"}) == (3, 7)
    with pytest.raises(ConfigError):
        cfg_mod.seeds_from_env({"IDENTCONCEPTS_SEED": "x"})


def test_shipped_configs_load():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    paths = sorted(root.glob("*.json"))
    assert len(paths) == 5
    for path in paths:
        cfg_mod.load_config(path)


# --- runner ------------------------------------------------------------------

def test_csv_header_and_format():
    rows = [runner.ResultRow("identifiability", "pca", "fourbars", 0, 0.0, None,
                             1 / 3, 1.0, 1.0, None, 1e-12, None, 12.5)]
    text = runner.rows_to_csv(rows)
    header, line = text.strip().split("\n")
    assert header.split(",") == list(runner.CSV_HEADER)
    assert header == ("experiment,method,generator,seed,noise_sigma,correlation_param,"
                      "dci_d,dci_c,dci_i,mig,residual,final_loss,wall_time_ms")
    assert line == "identifiability,pca,fourbars,0,0,,0.333333333,1,1,,1e-12,,12.5"


def test_identifiability_rows_cover_every_cell():
    cfg = cfg_mod.config_from_dict(small_config())
    rows = runner.run(cfg)
    assert [(r.seed, r.method) for r in rows] == [(s, m) for s in (0, 1) for m in cfg.methods]
    assert all(not r.failed for r in rows)
    by = {(r.method, r.seed): r for r in rows}
    assert by["dma_analytic", 0].residual < 1e-6
    assert by["ima_analytic", 0].residual > 1e-3


def test_failed_cell_gives_null_row(caplog):
    cfg = cfg_mod.config_from_dict(small_config(methods=["pca", "dma_analytic"], n_samples=3))
    rows = runner.run(cfg)
    pca_rows = [r for r in rows if r.method == "pca"]
    assert pca_rows and all(r.failed for r in pca_rows)
    assert all(r.dci_d is None and r.mig is None and r.final_loss is None for r in pca_rows)
    assert all(not r.failed for r in rows if r.method == "dma_analytic")
    line = runner.rows_to_csv(pca_rows).split("\n")[1]
    assert line.split(",")[6:12] == [""] * 6


def test_rerun_is_byte_identical_without_timing(tmp_path):
    cfg = cfg_mod.config_from_dict(small_config(methods=["dma_sgd", "ima_sgd", "ica"], n_samples=150))

    def strip(rows):
        return runner.rows_to_csv([replace(r, wall_time_ms=None) for r in rows])

    first = strip(runner.run(cfg))
    assert first == strip(runner.run(cfg))
    assert first == strip(runner.run(cfg, jobs=2))


def test_identity_mixing_is_no_harder():
    base = small_config(generator="colorbar", methods=["dma_analytic", "ima_analytic"], seeds=[0, 1, 2])
    random_rows = runner.run(cfg_mod.config_from_dict(base))
    identity_rows = runner.run(cfg_mod.config_from_dict(dict(base, mixing="identity")))
    for method in ("dma_analytic", "ima_analytic"):
        rand = np.mean([r.residual for r in random_rows if r.method == method])
        ident = np.mean([r.residual for r in identity_rows if r.method == method])
        assert ident <= rand + 1e-9


def test_noise_sweep_cell_layout():
    cfg = cfg_mod.config_from_dict(small_config(
        experiment="noise_sweep", generator="fourbars_nemr", methods=["dma_sgd", "ima_sgd"],
        noise_levels=[0.0, 0.05], seeds=[0], sgd={"preset": "robust", "epochs": 5}))
    rows = runner.run_noise_sweep(cfg)
    assert [(r.noise_sigma, r.method) for r in rows] == [
        (0.0, "dma_sgd"), (0.0, "ima_sgd"), (0.05, "dma_sgd"), (0.05, "ima_sgd")]


def test_correlation_sweep_each_pair_once_per_value():
    cfg = cfg_mod.ExperimentConfig(
        experiment="correlation_sweep",
        generator=GeneratorSpec("fourbars"),
        methods=("ica", "dma_analytic"),
        distribution=ComponentDistribution("correlated_gaussian", k=4, pairs=((0, 1),)),
        seeds=(0, 1),
        n_samples=200,
        n_jacobians=1,
        correlation_values=(0.0, 0.9),
    )
    rows = runner.run_correlation_sweep(cfg)
    for value in (0.0, 0.9):
        keys = [(r.method, r.seed) for r in rows if r.correlation_param == value]
        assert sorted(keys) == sorted({(m, s) for m in cfg.methods for s in cfg.seeds})
    assert all(r.dci_d >= 0.95 for r in rows if r.method == "dma_analytic")


def test_grad_check_rows():
    cfg = cfg_mod.ExperimentConfig(experiment="grad_check", seeds=(0,))
    rows = runner.run_grad_check(cfg)
    assert [r.method for r in rows] == list(VARIANTS)
    assert all(r.residual < 1e-5 for r in rows)


def test_grad_check_single_component():
    for variant in VARIANTS:
        if variant.startswith("frobenius"):
            assert grad_check(variant, seed=0, instances=3, k=1) < 1e-20


def test_summarize_skips_failed_rows():
    rows = [runner.ResultRow("identifiability", "pca", "fourbars", s, 0.0, None, d)
            for s, d in ((0, 0.5), (1, None), (2, 1.0))]
    assert runner.summarize(rows) == {("pca", 0.0, None): 0.75}


# --- CLI ---------------------------------------------------------------------

def test_cli_run_writes_csv(tmp_path, capsys):
    path = write_json(tmp_path / "cfg.json", small_config(methods=["dma_analytic"]))
    assert cli.main(["run", "--config", path, "--out", str(tmp_path / "out")]) == 0
    text = (tmp_path / "out" / "identifiability.csv").read_text()
    assert text.count("\n") == 3
    assert "dma_analytic" in capsys.readouterr().out


def test_cli_env_seed_override(tmp_path, monkeypatch):
    path = write_json(tmp_path / "cfg.json", small_config(methods=["dma_analytic"]))
    monkeypatch.setenv("IDENTCONCEPTS_SEED", "7")
    assert cli.main(["run", "--config", path, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "identifiability.csv").read_text().strip().split("\n")
    assert len(lines) == 2 and lines[1].split(",")[3] == "7"


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = write_json(tmp_path / "cfg.json", small_config(schema=9))
    assert cli.main(["run", "--config", path]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_failed_cell_exit_code(tmp_path):
    path = write_json(tmp_path / "cfg.json", small_config(methods=["pca"], n_samples=3))
    assert cli.main(["run", "--config", path, "--out", str(tmp_path)]) == 2


def test_cli_grad_check(capsys):
    assert cli.main(["grad-check", "--seed", "4", "--instances", "5"]) == 0
    out = capsys.readouterr().out
    assert all(v in out for v in VARIANTS)


def test_cli_render(tmp_path):
    out = tmp_path / "img.pgm"
    assert cli.main(["render", "--generator", "fourbars", "--z", "0.2,0.4,0.6,0.8", "--out", str(out)]) == 0
    assert out.read_bytes().startswith(b"P5\n16 16\n255\n")
    assert cli.main(["render", "--z", "0.2,0.4", "--out", str(out)]) == 1
    with pytest.raises(SystemExit):
        cli.main(["render", "--z", "a,b", "--out", str(out)])
