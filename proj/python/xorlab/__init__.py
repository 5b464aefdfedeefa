"""Training and diagnostics lab for noisy 2-XOR cluster experiments."""

import json as _json

from ._core import (  # noqa: F401
    Dataset,
    DistributionSpec,
    ErrorEstimate,
    IterationStats,
    MarginReport,
    NetworkParams,
    TrainTrace,
    activation_pattern,
    candidate_sets,
    dataset_accuracy,
    empirical_risk,
    feature_displacement,
    forward,
    forward_batch,
    gd_step,
    generalization_bound,
    gradient,
    hidden_features,
    init_network,
    load_checkpoint,
    logistic_loss,
    logistic_loss_deriv,
    make_spec,
    margin_report,
    normalized_correlations,
    nu_oracle_network,
    preset_json,
    ramp_risk,
    reference_error,
    run_config_json,
    sample_dataset,
    save_checkpoint,
    subnetwork_forward,
    test_error,
    theorem_schedule,
    train,
)

__version__ = "0.1.0"


def preset(name):
    """Preset experiment configuration as a dict."""
    return _json.loads(preset_json(name))


def run(config):
    """Run the full experiment pipeline for a config dict; returns the summary."""
    return _json.loads(run_config_json(_json.dumps(config)))
