"""From-scratch classifier suite behind a uniform fit/predict contract."""

from .base import (
    ALGORITHMS,
    Dataset,
    DegenerateFitError,
    ModelSpec,
    ShapeError,
    Standardizer,
    TrainedModel,
    default_specs,
    fit,
    fit_standardizer,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    standardize,
)

__all__ = [
    "ALGORITHMS",
    "Dataset",
    "DegenerateFitError",
    "ModelSpec",
    "ShapeError",
    "Standardizer",
    "TrainedModel",
    "default_specs",
    "fit",
    "fit_standardizer",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "predict",
    "save_model",
    "standardize",
]
