"""Dimensionality classification toolkit for hybrid metal halide compounds.

Provides CSV ingestion, chemical formula parsing, descriptor and interaction
feature engineering, SMOTE oversampling, four from-scratch classifiers plus a
stacking ensemble, an evaluation suite (per-class F1, one-vs-rest ROC/AUC,
feature importance, stratified cross-validation), and a CLI.
"""

__version__ = "0.1.0"

from .dataset import DatasetTable, SplitPlan, FoldPlan
from .formula import FormulaComposition, MassTable, parse_formula, molecular_weight
from .features import DescriptorRecord, StandardizationParams
from .resample import SmoteConfig, SyntheticSample, smote
from .pipeline import ExperimentConfig, run_experiment, cross_validate

__all__ = [
    "DatasetTable",
    "SplitPlan",
    "FoldPlan",
    "FormulaComposition",
    "MassTable",
    "parse_formula",
    "molecular_weight",
    "DescriptorRecord",
    "StandardizationParams",
    "SmoteConfig",
    "SyntheticSample",
    "smote",
    "ExperimentConfig",
    "run_experiment",
    "cross_validate",
    "__version__",
]
