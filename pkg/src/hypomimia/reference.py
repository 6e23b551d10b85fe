"""Published cohort figures used for calibration and as labelled reference values."""

from .ingest import Expression

N_PD = 61
N_NONPD = 543

# (expression, AU): (pd_mean, pd_sd, nonpd_mean, nonpd_sd, reported p)
TABLE2 = {
    (Expression.SMILE, 1): (0.15, 0.18, 0.07, 0.12, 0.001),
    (Expression.SMILE, 6): (0.17, 0.15, 0.25, 0.25, 0.047),
    (Expression.SMILE, 12): (0.21, 0.18, 0.27, 0.24, 0.065),
    (Expression.DISGUST, 4): (0.19, 0.20, 0.26, 0.31, 0.063),
    (Expression.DISGUST, 7): (0.19, 0.20, 0.24, 0.27, 0.103),
    (Expression.DISGUST, 9): (0.04, 0.06, 0.04, 0.07, 0.267),
    (Expression.SURPRISE, 1): (0.28, 0.28, 0.27, 0.32, 0.172),
    (Expression.SURPRISE, 2): (0.15, 0.29, 0.12, 0.18, 0.144),
    (Expression.SURPRISE, 4): (0.31, 0.37, 0.40, 0.43, 0.061),
}

CLASSIFIER_METRICS = {
    "accuracy": 0.956,
    "f1": 0.95,
    "auc": 0.94,
    "precision": 0.958,
    "recall": 0.943,
}

TOP_CLUSTER_PD_FRACTION = 0.757
NEGATIVE_LOGIT_WEIGHTS = 7
