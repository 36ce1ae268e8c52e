from .predictors import ModelKind, NetworkTerm, Predictor, SourceTerm, load_predictor, oracle_term

__all__ = ["ModelKind", "NetworkTerm", "Predictor", "SourceTerm", "load_predictor", "oracle_term"]
