from ._faithlab import (
    Model,
    auc,
    auc_concentration,
    baseline_image,
    baselines,
    deletion_trace,
    exact_deletion_sum,
    exact_insertion_sum,
    explain,
    insertion_trace,
    irfft2,
    kendall_tau,
    linear_closed_form,
    linear_model,
    load_idx,
    load_model,
    methods,
    model_from_json,
    optimal_orderings,
    predict,
    predicted_class,
    rfft2,
)

__all__ = [
    "Model",
    "auc",
    "auc_concentration",
    "baseline_image",
    "baselines",
    "deletion_trace",
    "exact_deletion_sum",
    "exact_insertion_sum",
    "explain",
    "insertion_trace",
    "irfft2",
    "kendall_tau",
    "linear_closed_form",
    "linear_model",
    "load_idx",
    "load_model",
    "methods",
    "model_from_json",
    "optimal_orderings",
    "predict",
    "predicted_class",
    "rfft2",
]
