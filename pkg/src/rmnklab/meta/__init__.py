"""Performance prediction, SHAP meta-representations, clustering and algorithm footprints."""

from .cluster import ClusterModel, cluster_meta, cosine_distances, silhouette
from .dataset import Dataset, build_dataset, load_dataset
from .footprint import (
    DecisionPath,
    Footprint,
    MetaRepresentations,
    build_footprints,
    cluster_importance,
    decision_path,
    meta_representations,
    project_2d,
)
from .forest import DEFAULT_PARAMS, ForestModel, ForestParams, cross_validate, fit_forest, random_search, sffs, train_forest
from .treeshap import ShapExplanation, tree_shap

__all__ = [
    "DEFAULT_PARAMS", "ClusterModel", "Dataset", "DecisionPath", "Footprint", "ForestModel", "ForestParams",
    "MetaRepresentations", "ShapExplanation", "build_dataset", "build_footprints", "cluster_importance",
    "cluster_meta", "cosine_distances", "cross_validate", "decision_path", "fit_forest", "load_dataset",
    "meta_representations", "project_2d", "random_search", "sffs", "silhouette", "train_forest", "tree_shap",
]
