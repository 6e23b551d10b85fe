from .cv import CvResult, PipelineConfig, fit_fold, loocv_evaluate
from .metrics import Metrics, compute_metrics, roc_auc
from .smote import SmoteConfig, balance, smote
from .svm import SvmModel, predict, train_svm

__all__ = [
    "CvResult", "Metrics", "PipelineConfig", "SmoteConfig", "SvmModel", "balance",
    "compute_metrics", "fit_fold", "loocv_evaluate", "predict", "roc_auc", "smote", "train_svm",
]
