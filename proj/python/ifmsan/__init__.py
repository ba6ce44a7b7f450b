"""Feature-map sanitization toolkit."""

from ._core import (
    AccuracyHistogram,
    BudgetUnreachableError,
    ConfigError,
    ControlResult,
    DimensionError,
    FormatError,
    Model,
    ParameterError,
    SweepRecord,
    Tensor,
    accuracy_histogram,
    attenuation_threshold,
    control_sanitize,
    eff_san,
    epsilon_lower_bound,
    fold,
    ifm_at,
    infer,
    load_model,
    make_toy_input,
    make_toy_model,
    meets_degree,
    multi_layer_sweep,
    observed_privacy_loss,
    plan_normalized,
    read_sweep_csv,
    read_tensor,
    sanitize_ifm,
    sanitize_stream,
    sanitize_window,
    save_model,
    sweep,
    top_class,
    unfold,
    write_sweep_csv,
    write_tensor,
    zero_ratio,
)

__all__ = [
    "AccuracyHistogram",
    "BudgetUnreachableError",
    "ConfigError",
    "ControlResult",
    "DimensionError",
    "FormatError",
    "Model",
    "ParameterError",
    "SweepRecord",
    "Tensor",
    "accuracy_histogram",
    "attenuation_threshold",
    "control_sanitize",
    "eff_san",
    "epsilon_lower_bound",
    "fold",
    "ifm_at",
    "infer",
    "load_model",
    "make_toy_input",
    "make_toy_model",
    "meets_degree",
    "multi_layer_sweep",
    "observed_privacy_loss",
    "plan_normalized",
    "read_sweep_csv",
    "read_tensor",
    "sanitize_ifm",
    "sanitize_stream",
    "sanitize_window",
    "save_model",
    "sweep",
    "top_class",
    "unfold",
    "write_sweep_csv",
    "write_tensor",
    "zero_ratio",
]
