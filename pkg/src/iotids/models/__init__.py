"""From-scratch classifiers sharing a numpy predict contract."""

from .tree import DecisionTree, TreeParams, fit_tree
from .forest import ForestModel, ForestParams, fit_random_forest, predict_forest
from .adaboost import AdaModel, AdaParams, fit_adaboost, predict_adaboost
from .gbm import GbmModel, GbmParams, TrainCurve, fit_gbm, predict_gbm
from .knn import KnnModel, fit_knn, predict_knn
from .svm import SvmModel, SvmParams, fit_linear_svm, predict_svm

__all__ = [
    "DecisionTree",
    "TreeParams",
    "fit_tree",
    "ForestModel",
    "ForestParams",
    "fit_random_forest",
    "predict_forest",
    "AdaModel",
    "AdaParams",
    "fit_adaboost",
    "predict_adaboost",
    "GbmModel",
    "GbmParams",
    "TrainCurve",
    "fit_gbm",
    "predict_gbm",
    "KnnModel",
    "fit_knn",
    "predict_knn",
    "SvmModel",
    "SvmParams",
    "fit_linear_svm",
    "predict_svm",
]
