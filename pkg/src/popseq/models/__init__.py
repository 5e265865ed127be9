"""Predictive models: bagged CART forests and a ridge baseline."""

from .forest import (
    FlatTree,
    ForestClassifier,
    ForestRegressor,
    ModelParams,
    TreeNode,
)
from .linear import RidgeClassifier, RidgeRegressor

__all__ = [
    "FlatTree",
    "ForestClassifier",
    "ForestRegressor",
    "ModelParams",
    "TreeNode",
    "RidgeClassifier",
    "RidgeRegressor",
]
