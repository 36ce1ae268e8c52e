"""
Model JSON files.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from ..datagen.dataset import NormStats
from .mlp import MlpParameters
from .optim import TrainConfig
from .sparsity import sparsity_metrics
from .train import LossHistory


def model_to_dict(
    params: MlpParameters,
    cfg: TrainConfig,
    history: Optional[LossHistory] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    if params.norm_stats is None:
        raise ValueError("Only networks carrying normalization statistics can be saved")
    l0, l1 = sparsity_metrics(params)
    document = {
        "layer_sizes": list(params.layer_sizes),
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "norm_stats": params.norm_stats.to_dict(),
        "target_kind": params.norm_stats.target_kind.value,
        "train_config": cfg.to_dict(),
        "final_losses": history.final() if history else None,
        "loss_history": {"train": history.train, "validation": history.validation} if history else None,
        "pruned_fraction": history.pruned_fraction if history else 0.0,
        "l0_count": l0,
        "l1_norm": l1,
    }
    if metadata:
        document.update(metadata)
    return document


def save_model(
    path: Union[str, Path],
    params: MlpParameters,
    cfg: TrainConfig,
    history: Optional[LossHistory] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(params, cfg, history, metadata), indent=1) + "\n")
    return path


def load_model(path: Union[str, Path]) -> Tuple[MlpParameters, Dict[str, Any]]:
    """Parameters and the full JSON document (for kind, config and metadata)."""
    document = json.loads(Path(path).read_text())
    params = MlpParameters(
        weights=document["weights"],
        biases=document["biases"],
        norm_stats=NormStats.from_dict(document["norm_stats"]),
    )
    if list(params.layer_sizes) != list(document["layer_sizes"]):
        raise ValueError(f"{path}: layer_sizes {document['layer_sizes']} do not match weights {params.layer_sizes}")
    return params, document
