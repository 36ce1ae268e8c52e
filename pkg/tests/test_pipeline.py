import json
from pathlib import Path

import pandas as pd
import pytest

import main
from config import get_config
from src.database import ForecastRunCRUD, ModelInstanceCRUD, get_database_url, get_db
from src.evaluation import ForecastReport
from src.pipeline import (
    ExperimentConfig,
    cmd_all,
    cmd_eval,
    cmd_gen_data,
    cmd_report,
    cmd_train,
    dataset_path,
    model_path,
    report_frames,
    stats_from_report_data,
)
from src.datagen import TargetKind
from src.utils.exceptions import ConfigurationError, MissingArtifactError

DETERMINISTIC_GLOBS = [
    "trajectories/*.csv",
    "datasets/*",
    "models/*.json",
    "report.json",
    "runs.csv",
    "forecast_bands.csv",
    "violin_data.csv",
    "blowups.csv",
]


def with_changes(cfg, **sections):
    document = cfg.to_dict()
    for name, values in sections.items():
        if isinstance(values, dict):
            document[name].update(values)
        else:
            document[name] = values
    return ExperimentConfig.from_dict(document)


def artifact_bytes(root):
    files = {}
    for pattern in DETERMINISTIC_GLOBS:
        for path in sorted(root.glob(pattern)):
            files[str(path.relative_to(root))] = path.read_bytes()
    return files


@pytest.fixture(scope="module")
def finished_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    shared = {"epochs": 2, "batch_size": 64, "validation_fraction": 0.1}
    cfg = ExperimentConfig.from_dict({
        "seed": 7,
        "paths": {"out_dir": str(root / "run")},
        "simulation": {"steps": 60},
        "datagen": {"n_train": 2, "n_test": 2},
        "training": {
            "instances": 2,
            "model_types": {
                "ddm_dense": {"kind": "DDM", "l1_lambda": 0.0, **shared},
                "ddm_sparse": {"kind": "DDM", "l1_lambda": 1e-4, **shared},
                "costa_dense": {"kind": "CoSTA", "l1_lambda": 0.0, **shared},
                "costa_sparse": {"kind": "CoSTA", "l1_lambda": 1e-4, **shared},
            },
        },
        "evaluation": {"horizons": [20, 40, 60], "band_trajectory": 1, "band_stride": 5},
        "logging": {"log_to_file": False, "log_to_console": False},
        "processing": {"num_workers": 1, "show_progress": False},
    })
    summary = cmd_all(cfg)
    return cfg, summary


def test_full_run_writes_every_artifact(finished_run):
    cfg, summary = finished_run
    root = Path(cfg.paths.out_dir)
    assert dataset_path(cfg, TargetKind.RESIDUAL) == root / "datasets" / "residual.csv"
    assert len(list(root.glob("trajectories/train_*.csv"))) == 2
    assert len(list(root.glob("trajectories/test_*.csv"))) == 2
    assert len(list(root.glob("models/*.json"))) == 8
    for name in ("config.json", "report.json", "runs.csv", "forecast_bands.csv", "violin_data.csv",
                 "blowups.csv", "catalog_summary.csv", "catalog.sqlite", "datasets/residual.stats.json"):
        assert (root / name).exists(), name
    assert summary["gen_data"]["envelope_coverage"] <= 8
    assert len(summary["models"]) == 8

    report = ForecastReport.load_json(root / "report.json")
    assert set(report.model_types) == set(cfg.model_types)
    assert report.horizons == [20, 40, 60]
    for model_type, by_horizon in report.stats.items():
        expected_runs = 2 if model_type == "pbm" else 4
        for stats in by_horizon.values():
            assert len(stats.values) + stats.blowup_count == stats.n == expected_runs
    assert all(s.blowup_count == 0 for s in report.stats["pbm"].values())
    assert len(report.metadata["pbm_error"]) == 2
    assert set(report.metadata["sparsity"]) == set(cfg.training.model_types)

    runs = pd.read_csv(root / "runs.csv")
    assert len(runs) == (1 + 8) * 2 * 3
    bands = pd.read_csv(root / "forecast_bands.csv")
    assert set(bands["model_type"]) == set(cfg.model_types)


def test_sparse_types_use_their_lambda(finished_run):
    cfg, _ = finished_run
    for model_type, expected in (("ddm_dense", 0.0), ("ddm_sparse", 1e-4), ("costa_sparse", 1e-4)):
        document = json.loads(model_path(cfg, model_type, 1).read_text())
        assert document["train_config"]["l1_lambda"] == expected
        assert document["model_type"] == model_type and document["instance"] == 1
    costa = json.loads(model_path(cfg, "costa_dense", 0).read_text())
    assert costa["kind"] == "CoSTA" and costa["target_kind"] == "Residual"


def test_catalog_records_models_and_runs(finished_run):
    cfg, _ = finished_run
    url = get_database_url(cfg.database.url, cfg.paths.out_dir)
    with get_db(url) as db:
        sparsity = ModelInstanceCRUD().sparsity_by_type(db)
        stats = ForecastRunCRUD().get_statistics(db, cfg.seed)
    assert {t: s["instances"] for t, s in sparsity.items()} == {t: 2 for t in cfg.training.model_types}
    assert stats["pbm"][60]["runs"] == 2
    assert stats["costa_sparse"][20]["runs"] == 4

    summary = pd.read_csv(Path(cfg.paths.out_dir) / "catalog_summary.csv")
    bars = pd.read_csv(Path(cfg.paths.out_dir) / "blowups.csv")
    merged = bars.merge(summary, on=["model_type", "horizon"])
    assert len(merged) == len(bars) == len(summary)
    assert (merged["runs"] == merged["n"]).all()
    assert (merged["blowups"] == merged["blowup_count"]).all()
    assert summary.loc[summary["model_type"] == "pbm", "instances"].isna().all()
    assert (summary.loc[summary["model_type"] != "pbm", "instances"] == 2).all()


def test_report_data_rebuilds_statistics(finished_run):
    cfg, _ = finished_run
    root = Path(cfg.paths.out_dir)
    report = ForecastReport.load_json(root / "report.json")
    violin = pd.read_csv(root / "violin_data.csv", float_precision="round_trip")
    bars = pd.read_csv(root / "blowups.csv")
    assert stats_from_report_data(violin, bars) == report.stats
    frame_violin, frame_bars = report_frames(report)
    assert len(frame_violin) == len(violin) and len(frame_bars) == len(cfg.model_types) * 3


def test_training_is_reproducible(finished_run):
    cfg, _ = finished_run
    original = model_path(cfg, "costa_sparse", 0).read_bytes()
    cmd_train(cfg, "costa_sparse", 0)
    assert model_path(cfg, "costa_sparse", 0).read_bytes() == original


def test_artifacts_are_identical_across_runs_and_workers(finished_run, tmp_path):
    cfg, _ = finished_run
    reference = artifact_bytes(Path(cfg.paths.out_dir))
    for workers in (1, 2):
        again = with_changes(cfg, paths={"out_dir": str(tmp_path / f"w{workers}")},
                             processing={"num_workers": workers})
        cmd_all(again)
        assert artifact_bytes(tmp_path / f"w{workers}") == reference


def test_stages_report_missing_artifacts(small_config):
    with pytest.raises(MissingArtifactError):
        cmd_train(small_config, "ddm_dense", 0)
    with pytest.raises(MissingArtifactError):
        cmd_report(small_config)
    cmd_gen_data(small_config)
    with pytest.raises(MissingArtifactError) as excinfo:
        cmd_eval(small_config)
    assert len(excinfo.value.missing) == 8
    assert any(m.endswith("ddm_dense_00.json") for m in excinfo.value.missing)


def test_config_validation(small_config):
    with pytest.raises(ConfigurationError):
        with_changes(small_config, evaluation={"horizons": [10, 100]})
    with pytest.raises(ConfigurationError):
        with_changes(small_config, evaluation={"band_trajectory": 5})
    with pytest.raises(ConfigurationError):
        with_changes(small_config, datagen={"input_policy": {"u9": {}}}).input_policy()
    with pytest.raises(ConfigurationError):
        small_config.train_config("pbm", 0)
    assert small_config.model_kind("pbm") == "PBM"
    assert small_config.train_config("ddm_sparse", 0).seed != small_config.train_config("ddm_sparse", 1).seed


def test_command_line_overrides():
    args = main.build_parser().parse_args(
        ["train", "--lambda", "1e-3", "--epochs", "3", "--steps", "2000", "--n-test", "4"]
    )
    config = main.apply_overrides(get_config(), args)
    types = config["training"]["model_types"]
    assert types["ddm_sparse"]["l1_lambda"] == 1e-3
    assert types["costa_sparse"]["l1_lambda"] == 1e-3
    assert types["ddm_dense"]["l1_lambda"] == 0.0
    assert all(t["epochs"] == 3 for t in types.values())
    assert config["evaluation"]["horizons"] == [1000]
    ExperimentConfig.from_dict(config)

    args = main.build_parser().parse_args(["eval", "--horizons", "5,10", "--steps", "10"])
    assert main.apply_overrides(get_config(), args)["evaluation"]["horizons"] == [5, 10]


def test_main_exit_codes(tmp_path, capsys):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({
        "paths": {"out_dir": str(tmp_path / "empty")},
        "simulation": {"steps": 10},
        "evaluation": {"horizons": [10]},
        "logging": {"log_to_file": False, "log_to_console": False},
    }))
    assert main.main(["eval", "--config", str(config_file)]) == 1
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "MissingArtifactError"

    assert main.main(["train", "--instance", "0", "--config", str(config_file)]) == 1
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "ConfigurationError"

    assert main.main(["eval", "--horizons", "10,ten", "--config", str(config_file)]) == 1
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "ConfigurationError" and "10,ten" in error["message"]

    with pytest.raises(SystemExit) as excinfo:
        main.main(["no-such-command"])
    assert excinfo.value.code == 2
