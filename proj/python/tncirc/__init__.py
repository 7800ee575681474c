"""Python interface to the tensor-network quantum circuit toolkit."""

from ._core import (
    AnsatzLayout,
    Circuit,
    LabeledDataset,
    ParamVector,
    TrainedModel,
    build_circuit,
    circuit_expval,
    circuit_tn_expval,
    count_configs_mps,
    count_configs_ttn,
    cut_run,
    estimate_cost,
    evaluate_accuracy,
    generate_bas,
    load_model,
    loss,
    make_layout,
    predict_label,
    prob_correct,
    sample_bas,
    save_model,
    tn_layout_from_text,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AnsatzLayout",
    "Circuit",
    "LabeledDataset",
    "ParamVector",
    "TrainedModel",
    "build_circuit",
    "circuit_expval",
    "circuit_tn_expval",
    "count_configs_mps",
    "count_configs_ttn",
    "cut_run",
    "estimate_cost",
    "evaluate_accuracy",
    "generate_bas",
    "load_model",
    "loss",
    "make_layout",
    "predict_label",
    "prob_correct",
    "sample_bas",
    "save_model",
    "tn_layout_from_text",
    "train",
]
