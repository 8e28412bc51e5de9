"""Bond percolation on finite graphs: samplers, exact enumeration, operator norms and exponent estimators."""

__version__ = "0.1.0"

from .graphgen import Graph, CombinatorialMap, build_grid, build_tiling, build_tree, dual, ball  # noqa: E402
from .percengine import sample_config, sample_clusters, clusters  # noqa: E402

__all__ = [
    "Graph", "CombinatorialMap", "build_grid", "build_tiling", "build_tree", "dual", "ball",
    "sample_config", "sample_clusters", "clusters", "__version__",
]
