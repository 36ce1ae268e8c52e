"""
Experiment subcommands: gen-data, train, eval, report and all.

Every command reads its inputs from and writes its artifacts to
``paths.out_dir``:

    config.json                      resolved configuration
    trajectories/{train,test}_NNN.csv
    datasets/state_derivative.csv    + .stats.json
    datasets/residual.csv            + .stats.json
    models/{model_type}_NN.json
    report.json, runs.csv, forecast_bands.csv
    violin_data.csv, blowups.csv
    catalog_summary.csv              per-type catalog statistics
    catalog.sqlite                   run catalog (unless a database URL is configured)
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..database import ForecastRunCRUD, ModelInstanceCRUD, get_database_url, get_db, init_db, test_connection
from ..datagen import (
    TEST,
    TRAIN,
    NormStats,
    RegressionDataset,
    TargetKind,
    build_dataset,
    envelope_coverage,
    generate_corpus,
    load_split,
)
from ..evaluation import (
    ForecastReport,
    HorizonStats,
    ModelInstance,
    evaluate_experiment,
    forecast_bands,
    pbm_error_summary,
)
from ..nn import save_model, sparsity_metrics, train
from ..predictor import ModelKind, Predictor, load_predictor
from ..utils import get_logger
from ..utils.exceptions import ConfigurationError, MissingArtifactError
from .schema import ExperimentConfig

logger = get_logger(__name__)

CSV_OPTIONS = {"index": False, "float_format": "%.17g", "lineterminator": "\n"}
DATASET_FILES = {
    TargetKind.STATE_DERIVATIVE: "state_derivative.csv",
    TargetKind.RESIDUAL: "residual.csv",
}
VIOLIN_COLUMNS = ["model_type", "horizon", "rank", "an_rfmse"]
BLOWUP_COLUMNS = ["model_type", "horizon", "n", "blowup_count"]
CATALOG_COLUMNS = [
    "model_type", "horizon", "runs", "blowups", "blowup_rate", "mean_an_rfmse", "instances", "mean_l0", "mean_l1",
]


def out_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.paths.out_dir)


def dataset_path(cfg: ExperimentConfig, target_kind: TargetKind) -> Path:
    return out_dir(cfg) / "datasets" / DATASET_FILES[TargetKind(target_kind)]


def model_path(cfg: ExperimentConfig, model_type: str, instance: int) -> Path:
    return out_dir(cfg) / "models" / f"{model_type}_{instance:02d}.json"


def catalog_url(cfg: ExperimentConfig) -> str:
    url = get_database_url(cfg.database.url, out_dir(cfg))
    init_db(url)
    if not test_connection(url):
        raise ConfigurationError(f"Run catalog at {cfg.database.url or url} does not answer")
    return url


def provenance(cfg: ExperimentConfig) -> Dict[str, Any]:
    """The part of the config that determines artifact contents (no paths or worker counts)."""
    document = cfg.to_dict()
    return {key: document[key] for key in ("seed", "simulation", "datagen", "training", "evaluation")}


def write_config(cfg: ExperimentConfig) -> Path:
    path = out_dir(cfg) / "config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def _require(paths: List[Path]) -> None:
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        raise MissingArtifactError(missing)


def cmd_gen_data(cfg: ExperimentConfig) -> Dict[str, Any]:
    """
    Simulate the training and test corpus and build both regression datasets.

    Returns:
        Dict with the trajectory and dataset paths
    """
    out = out_dir(cfg)
    write_config(cfg)
    consts = cfg.plant_constants()
    train_set, test_set = generate_corpus(
        cfg.seed,
        n_train=cfg.datagen.n_train,
        n_test=cfg.datagen.n_test,
        steps=cfg.simulation.steps,
        dt=cfg.simulation.dt,
        ranges=cfg.init_ranges(),
        policy=cfg.input_policy(),
        consts=consts,
        workers=cfg.processing.num_workers,
        max_resample_attempts=cfg.datagen.max_resample_attempts,
        out_dir=out / "trajectories",
        show_progress=cfg.processing.show_progress,
    )

    datasets = {}
    for kind in TargetKind:
        dataset = build_dataset(train_set, kind, consts)
        datasets[kind.value] = str(dataset.save(dataset_path(cfg, kind)))
        logger.info(f"{kind.value} dataset: {len(dataset)} pairs")

    return {
        "trajectories": str(out / "trajectories"),
        "n_train": len(train_set),
        "n_test": len(test_set),
        "datasets": datasets,
        "envelope_coverage": envelope_coverage(train_set, test_set),
    }


def _load_dataset(cfg: ExperimentConfig, model_type: str) -> RegressionDataset:
    kind = ModelKind(cfg.model_kind(model_type))
    target_kind = TargetKind.STATE_DERIVATIVE if kind is ModelKind.DDM else TargetKind.RESIDUAL
    path = dataset_path(cfg, target_kind)
    _require([path, path.with_suffix(".stats.json")])
    return RegressionDataset.load(path)


def _train_instance(cfg: ExperimentConfig, model_type: str, instance: int,
                    dataset: RegressionDataset) -> Tuple[Path, Dict[str, Any]]:
    train_cfg = cfg.train_config(model_type, instance)
    logger.info(f"Training {model_type} instance {instance} (seed {train_cfg.seed})")
    params, history = train(dataset, train_cfg, show_progress=False)
    path = save_model(
        model_path(cfg, model_type, instance),
        params,
        train_cfg,
        history,
        metadata={
            "kind": cfg.model_kind(model_type),
            "model_type": model_type,
            "instance": instance,
            "master_seed": cfg.seed,
            "experiment": provenance(cfg),
        },
    )
    l0, l1 = sparsity_metrics(params)
    final = history.final()
    record = {
        "seed": train_cfg.seed,
        "l1_lambda": train_cfg.l1_lambda,
        "target_kind": dataset.target_kind.value,
        "final_train_loss": final["train"],
        "final_validation_loss": final["validation"],
        "l0_count": l0,
        "l1_norm": l1,
        "pruned_fraction": history.pruned_fraction,
        "path": str(path),
    }
    return path, record


def _catalog_models(cfg: ExperimentConfig, rows: List[Tuple[str, int, Dict[str, Any]]]) -> None:
    url = catalog_url(cfg)
    crud = ModelInstanceCRUD()
    with get_db(url) as db:
        for model_type, instance, record in rows:
            crud.upsert(db, model_type, instance, **record)


def cmd_train(cfg: ExperimentConfig, model_type: str, instance: int) -> Path:
    """
    Train one instance of ``model_type`` and write its model JSON.

    Raises:
        MissingArtifactError: the dataset of the model's target kind is absent.
        TrainingDivergedError: the loss became non-finite.
    """
    dataset = _load_dataset(cfg, model_type)
    path, record = _train_instance(cfg, model_type, instance, dataset)
    _catalog_models(cfg, [(model_type, instance, record)])
    return path


def cmd_train_all(cfg: ExperimentConfig) -> List[Path]:
    """Train every configured instance of every model type."""
    jobs = [
        (model_type, instance)
        for model_type in sorted(cfg.training.model_types)
        for instance in range(cfg.training.instances)
    ]
    datasets = {model_type: _load_dataset(cfg, model_type) for model_type in cfg.training.model_types}
    logger.info(f"Training {len(jobs)} networks with {cfg.processing.num_workers} worker(s)")
    results = Parallel(n_jobs=cfg.processing.num_workers)(
        delayed(_train_instance)(cfg, model_type, instance, datasets[model_type])
        for model_type, instance in jobs
    )
    _catalog_models(cfg, [(t, i, record) for (t, i), (_, record) in zip(jobs, results)])
    return [path for path, _ in results]


def _state_std(cfg: ExperimentConfig) -> np.ndarray:
    stats_path = dataset_path(cfg, TargetKind.STATE_DERIVATIVE).with_suffix(".stats.json")
    _require([stats_path])
    return NormStats.from_dict(json.loads(stats_path.read_text())).state_std


def _load_models(cfg: ExperimentConfig) -> Tuple[List[ModelInstance], Dict[str, Dict[str, float]]]:
    consts = cfg.plant_constants()
    expected = [
        model_path(cfg, model_type, instance)
        for model_type in sorted(cfg.training.model_types)
        for instance in range(cfg.training.instances)
    ]
    _require(expected)

    models = []
    if cfg.evaluation.include_pbm:
        models.append(ModelInstance("pbm", 0, Predictor.pbm(consts)))
    sparsity: Dict[str, List[Tuple[int, float]]] = {}
    for model_type in sorted(cfg.training.model_types):
        for instance in range(cfg.training.instances):
            predictor = load_predictor(model_path(cfg, model_type, instance), consts)
            models.append(ModelInstance(model_type, instance, predictor))
            sparsity.setdefault(model_type, []).append(sparsity_metrics(predictor.net))
    summary = {
        model_type: {
            "mean_l0": float(np.mean([l0 for l0, _ in values])),
            "mean_l1": float(np.mean([l1 for _, l1 in values])),
        }
        for model_type, values in sparsity.items()
    }
    return models, summary


def cmd_eval(cfg: ExperimentConfig) -> Dict[str, Path]:
    """
    Rolling-forecast every test trajectory with every model instance.

    Raises:
        MissingArtifactError: listing absent model files, test trajectories or norm stats.
    """
    out = out_dir(cfg)
    testset = load_split(out / "trajectories", TEST)
    if len(testset) < cfg.datagen.n_test:
        raise MissingArtifactError([
            str(out / "trajectories" / f"{TEST}_{i:03d}.csv") for i in range(len(testset), cfg.datagen.n_test)
        ])
    testset = testset[:cfg.datagen.n_test]
    state_std = _state_std(cfg)
    models, sparsity = _load_models(cfg)
    horizons = cfg.evaluation.horizons
    band_trajectory = cfg.evaluation.band_trajectory

    metadata: Dict[str, Any] = {"experiment": provenance(cfg), "sparsity": sparsity}
    if cfg.evaluation.include_pbm:
        metadata["pbm_error"] = [
            pbm_error_summary(models[0].predictor, t, horizons[-1]) for t in testset
        ]

    report, bands = evaluate_experiment(
        models,
        testset,
        horizons,
        state_std,
        workers=cfg.processing.num_workers,
        metadata=metadata,
        band_trajectory=band_trajectory,
        threshold=cfg.evaluation.blowup_threshold,
    )

    paths = {
        "report": report.save_json(out / "report.json"),
        "runs": report.save_runs_csv(out / "runs.csv"),
    }
    if band_trajectory is not None:
        predictors = {}
        for model in models:
            predictors.setdefault(model.model_type, model.predictor)
        frame = forecast_bands(bands, predictors, testset[band_trajectory], stride=cfg.evaluation.band_stride)
        paths["bands"] = out / "forecast_bands.csv"
        frame.to_csv(paths["bands"], **CSV_OPTIONS)

    url = catalog_url(cfg)
    crud = ForecastRunCRUD()
    with get_db(url) as db:
        crud.replace_for_seed(db, cfg.seed, (
            {
                "model_type": r.model_type,
                "instance": r.instance,
                "trajectory": r.trajectory,
                "horizon": r.horizon,
                "an_rfmse": r.an_rfmse,
                "blowup": r.blowup,
            }
            for r in report.records
        ))
    return paths


def report_frames(report: ForecastReport) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Violin source data (sorted AN-RFMSE per type and horizon) and blow-up bar data."""
    violin, bars = [], []
    for model_type, by_horizon in report.stats.items():
        for horizon in report.horizons:
            stats = by_horizon[horizon]
            violin.extend(
                (model_type, horizon, rank, value) for rank, value in enumerate(stats.values)
            )
            bars.append((model_type, horizon, stats.n, stats.blowup_count))
    return pd.DataFrame(violin, columns=VIOLIN_COLUMNS), pd.DataFrame(bars, columns=BLOWUP_COLUMNS)


def stats_from_report_data(violin: pd.DataFrame, bars: pd.DataFrame) -> Dict[str, Dict[int, HorizonStats]]:
    """Rebuild per-(type, horizon) statistics from the two plot-data tables."""
    stats: Dict[str, Dict[int, HorizonStats]] = {}
    for row in bars.itertuples(index=False):
        values = violin.loc[
            (violin["model_type"] == row.model_type) & (violin["horizon"] == row.horizon), "an_rfmse"
        ].tolist()
        n, blowups = int(row.n), int(row.blowup_count)
        flags = [False] * len(values) + [True] * blowups
        padded = values + [None] * (n - len(values))
        stats.setdefault(row.model_type, {})[int(row.horizon)] = HorizonStats.from_runs(padded, flags)
    return stats


def catalog_frame(cfg: ExperimentConfig) -> pd.DataFrame:
    """Per-(type, horizon) run statistics and mean sparsity as recorded in the run catalog."""
    with get_db(catalog_url(cfg)) as db:
        runs = ForecastRunCRUD().get_statistics(db, cfg.seed)
        sparsity = ModelInstanceCRUD().sparsity_by_type(db)
    rows = []
    for model_type in sorted(runs):
        means = sparsity.get(model_type, {})
        for horizon in sorted(runs[model_type]):
            entry = runs[model_type][horizon]
            rows.append((
                model_type,
                horizon,
                entry["runs"],
                entry["blowups"],
                entry["blowup_rate"],
                entry["mean_an_rfmse"],
                means.get("instances"),
                means.get("mean_l0"),
                means.get("mean_l1"),
            ))
    return pd.DataFrame(rows, columns=CATALOG_COLUMNS)


def _check_catalog(catalog: pd.DataFrame, bars: pd.DataFrame) -> None:
    if catalog.empty:
        logger.warning("Run catalog holds no forecast runs for this seed")
        return
    merged = bars.merge(catalog, on=["model_type", "horizon"], how="left")
    stale = merged[(merged["runs"] != merged["n"]) | (merged["blowups"] != merged["blowup_count"])]
    if len(stale):
        logger.warning(
            f"Run catalog disagrees with report.json for {len(stale)} (type, horizon) pairs; "
            "re-run eval to refresh it"
        )


def cmd_report(cfg: ExperimentConfig) -> Dict[str, Path]:
    """Turn report.json and the run catalog into plot-ready CSV files."""
    out = out_dir(cfg)
    _require([out / "report.json"])
    report = ForecastReport.load_json(out / "report.json")
    violin, bars = report_frames(report)
    catalog = catalog_frame(cfg)
    _check_catalog(catalog, bars)
    paths = {
        "violin": out / "violin_data.csv",
        "blowups": out / "blowups.csv",
        "catalog": out / "catalog_summary.csv",
    }
    violin.to_csv(paths["violin"], **CSV_OPTIONS)
    bars.to_csv(paths["blowups"], **CSV_OPTIONS)
    catalog.to_csv(paths["catalog"], **CSV_OPTIONS)
    logger.info(f"Wrote {len(violin)} violin rows and {len(bars)} blow-up rows to {out}")
    return paths


def cmd_all(cfg: ExperimentConfig) -> Dict[str, Any]:
    """gen-data, train (every type and instance), eval and report in one go."""
    summary: Dict[str, Any] = {"gen_data": cmd_gen_data(cfg)}
    summary["models"] = [str(p) for p in cmd_train_all(cfg)]
    summary["eval"] = {k: str(v) for k, v in cmd_eval(cfg).items()}
    summary["report"] = {k: str(v) for k, v in cmd_report(cfg).items()}
    return summary
