"""Individual-fairness auditing of black-box classifiers.

Reports come back as plain dicts parsed from the same JSON the command-line
tool writes.
"""
import json as _json

from . import _fairprobe
from ._fairprobe import (
    BoundError,
    ContractError,
    Domain,
    Estimate,
    FairprobeError,
    InvariantError,
    Model,
    ParseError,
    ProtocolError,
    RetrainIteration,
    SchemaError,
    SpecError,
    TrainingError,
    TransportError,
    UsageError,
    check_discriminatory,
    connect_external,
    detection_probability,
    estimate,
    load_model,
    parse_model,
    perturb,
    planted,
    planted_fraction,
    resolve_model,
    retrain,
    train,
)

STRATEGIES = ("fully_directed", "semi_directed", "aequitas_random", "baseline_random")


def audit(model, domain, **kwargs):
    """Runs the global and local search; returns the report dict."""
    return _json.loads(_fairprobe.audit(model, domain, **kwargs))


def cmd_train(domain_file, csv_file, model_kind, out_path, **kwargs):
    """Trains from files and writes the model; returns its serialized text."""
    return _fairprobe.cmd_train(str(domain_file), str(csv_file), model_kind, str(out_path), **kwargs)


def _paths(kwargs):
    return {k: str(v) if k.endswith(("_file", "_out")) else v for k, v in kwargs.items()}


def cmd_audit(domain_file, model_ref, **kwargs):
    return _json.loads(_fairprobe.cmd_audit(str(domain_file), model_ref, **_paths(kwargs)))


def cmd_estimate(domain_file, model_ref, **kwargs):
    return _json.loads(_fairprobe.cmd_estimate(str(domain_file), model_ref, **_paths(kwargs)))


def cmd_retrain(domain_file, model_kind, csv_file, findings_file, **kwargs):
    return _json.loads(
        _fairprobe.cmd_retrain(str(domain_file), model_kind, str(csv_file), str(findings_file), **_paths(kwargs))
    )


def cmd_compare(domain_file, model_ref, seeds, **kwargs):
    return _json.loads(_fairprobe.cmd_compare(str(domain_file), model_ref, list(seeds), **_paths(kwargs)))
