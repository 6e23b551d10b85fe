"""
Two-dimensional map and clusters
================================

Project the features on their first two principal axes, partition the map
with k-means and report the PD share of each cluster.
"""

from hypomimia.cluster import figure2_report, kmeans, pca_fit
from hypomimia.numcore import RandomStream
from hypomimia.synth import CohortSpec, generate_features

table = generate_features(CohortSpec(seed=42))
for standardize in (False, True):
    pca = pca_fit(table.X, standardize=standardize)
    points = pca.transform(table.X)
    part = kmeans(points, k=3, stream=RandomStream(42))
    print(f"standardize={standardize}: explained variance {pca.explained_variance.round(4)}, "
          f"inertia {part.inertia:.4f} (restart {part.restart})")
    for c in figure2_report(part, table.labels):
        print(f"  cluster {c.cluster}: {c.size:3d} members, PD share {c.pd_fraction:.3f}")
