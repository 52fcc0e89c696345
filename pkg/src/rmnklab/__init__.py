"""Correlated multi-objective NK landscapes, their local-optima networks,
multi-objective search baselines, and an explainable performance-prediction
pipeline that derives algorithm footprints."""

__version__ = "0.1.0"
