from .agreement import AnnotatorReport, annotator_report, load_ratings, randolph_kappa
from .experiment import (
    ABLATION_FLAGS,
    AblationReport,
    AblationRow,
    CVReport,
    FoldResult,
    ablation,
    ablation_label,
    cross_validate,
    derive_seed,
)
from .metrics import Metrics, confusion_matrix, metrics, score, select_best

__all__ = [
    "ABLATION_FLAGS",
    "AblationReport",
    "AblationRow",
    "AnnotatorReport",
    "CVReport",
    "FoldResult",
    "Metrics",
    "ablation",
    "ablation_label",
    "annotator_report",
    "confusion_matrix",
    "cross_validate",
    "derive_seed",
    "load_ratings",
    "metrics",
    "randolph_kappa",
    "score",
    "select_best",
]
