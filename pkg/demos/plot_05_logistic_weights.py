"""
Logistic-regression weights
===========================

An unpenalised logistic model on standardized features gives one signed
weight per feature, with a Wald test for each.
"""

from hypomimia.errors import SeparationError
from hypomimia.logit import figure1_report, regress
from hypomimia.synth import CohortSpec, generate_features

fit = regress(generate_features(CohortSpec(seed=42)))
print(f"converged in {fit.iterations} Newton steps, log-likelihood {fit.log_likelihood:.2f}")
for row in figure1_report(fit):
    flag = "*" if row.significant else " "
    print(f"{row.feature:14s} {row.weight:+.3f} (se {row.se:.3f})  p={row.p:.3g} {flag}")

# Thirty participants in nine dimensions are often linearly separable; the
# maximum-likelihood weights then diverge and the fit is refused
try:
    regress(generate_features(CohortSpec(n_pd=10, n_nonpd=20, seed=42)))
except SeparationError as exc:
    print("\nrefused:", exc)
