"""Declarative experiment configs: one JSON document per run.

``resolve`` folds defaults into a raw dict and validates it; the resolved
form (every default made explicit) is what gets echoed next to run outputs,
so a run directory always records exactly what it executed.
"""

import copy
import json

import numpy as np

from . import data_io, targets


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


TARGET_DEFAULTS = {
    "banana": {"a": 1.0, "b": 0.1, "c": 1.0},
    "ill_gaussian": {"dim": 30, "seed": 0, "smallest": 0.1, "largest": 1000.0,
                     "variances": None},
    "logistic": {"prior": "gaussian", "prior_scale": 10.0, "dataset": None},
    "garch": {"m": 1, "r": 1, "prior_sd": 10.0, "dataset": None},
    "gp_regression": {
        "prior_loc": [0.0, 0.0],
        "prior_scale": [3.0, 3.0],
        "dataset": None,
    },
}

ORACLE_DEFAULTS = {
    "exact": {},
    "nn": {
        "hidden": 100,
        "blocks": 1,
        "epochs": 50,
        "batch_size": 32,
        "learning_rate": 1e-3,
        "seed": 0,
        "max_train_points": None,
        "collect_stride": 1,
    },
    "sghmc": {"minibatch_size": 5000, "friction": 0.1, "mh_correction": True},
    "gp_surrogate": {"n_train": 500, "length_grid": None, "noise_grid": None},
}

SAMPLER_DEFAULTS = {
    "leapfrog_steps": 10,
    "step_size": 0.1,
    "n_iterations": 1000,
    "seed": 0,
    "init": None,
}

SCHEDULE_DEFAULTS = {
    "start_iter": None,  # default: 10% of iterations
    "end_iter": None,  # default: 30% of iterations
    "check_interval": None,  # default: one check at end_iter
    "acceptance_target": 0.9,
    "probe_draws": 50,
}

DATASET_DEFAULTS = {
    "logistic_gen": {"n": 1000, "d": 10, "seed": 0},
    "garch_gen": {"T": 1000, "alpha": [0.1, 0.1, 0.1], "beta": [0.4], "seed": 1},
    "gp_gen": {"n": 500, "k": 4, "seed": 0, "noise_sd": 0.3},
    "csv": {
        "path": None,
        "label_column": None,
        "feature_columns": None,
        "subsample": None,
        "seed": 0,
        "standardize": False,
        "positive_label": None,
    },
}


def _merge(defaults, given, where):
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown key {key!r} in {where}")
        out[key] = val
    return out


def resolve(raw):
    """Fill defaults, validate, and return the fully explicit config."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {"name", "target", "oracle", "sampler", "schedule", "output_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    for section in ("target", "oracle", "sampler"):
        if section not in raw:
            raise ConfigError(f"missing {section!r} section")

    tgt = dict(raw["target"])
    family = tgt.pop("family", None)
    if family not in TARGET_DEFAULTS:
        raise ConfigError(f"unknown target family {family!r}")
    tgt = _merge(TARGET_DEFAULTS[family], tgt, f"target.{family}")
    tgt["family"] = family
    if tgt.get("dataset") is not None:
        tgt["dataset"] = _resolve_dataset(tgt["dataset"])

    orc = dict(raw["oracle"])
    kind = orc.pop("kind", None)
    if kind not in ORACLE_DEFAULTS:
        raise ConfigError(f"unknown oracle kind {kind!r}")
    orc = _merge(ORACLE_DEFAULTS[kind], orc, f"oracle.{kind}")
    orc["kind"] = kind

    smp = _merge(SAMPLER_DEFAULTS, raw["sampler"], "sampler")
    if smp["leapfrog_steps"] < 1 or smp["step_size"] <= 0 or smp["n_iterations"] < 1:
        raise ConfigError("sampler values must be positive")

    sched = _merge(SCHEDULE_DEFAULTS, raw.get("schedule", {}), "schedule")
    n = smp["n_iterations"]
    if sched["start_iter"] is None:
        sched["start_iter"] = max(1, n // 10)
    if sched["end_iter"] is None:
        sched["end_iter"] = max(sched["start_iter"] + 1, (3 * n) // 10)
    if sched["check_interval"] is None:
        sched["check_interval"] = sched["end_iter"] - sched["start_iter"]
    if kind == "nn" and not sched["start_iter"] < sched["end_iter"] <= n:
        raise ConfigError("schedule must satisfy start < end <= n_iterations")

    return {
        "name": raw.get("name", f"{family}-{kind}"),
        "target": tgt,
        "oracle": orc,
        "sampler": smp,
        "schedule": sched,
        "output_dir": raw.get("output_dir", "runs"),
    }


def _resolve_dataset(spec):
    spec = dict(spec)
    source = spec.pop("source", None)
    if source not in DATASET_DEFAULTS:
        raise ConfigError(f"unknown dataset source {source!r}")
    out = _merge(DATASET_DEFAULTS[source], spec, f"dataset.{source}")
    out["source"] = source
    if source == "csv" and (out["path"] is None or out["label_column"] is None):
        raise ConfigError("csv dataset needs path and label_column")
    return out


def load_dataset(spec):
    if spec["source"] == "logistic_gen":
        ds, _ = data_io.gen_logistic(spec["n"], spec["d"], spec["seed"])
        return ds
    if spec["source"] == "garch_gen":
        y = data_io.gen_garch(spec["T"], spec["alpha"], spec["beta"], spec["seed"])
        return data_io.Dataset(
            X=y[:, None], y=y, feature_names=["y"], provenance=dict(spec)
        )
    if spec["source"] == "gp_gen":
        return data_io.gen_gp_regression(
            spec["n"], spec["k"], spec["seed"], noise_sd=spec["noise_sd"]
        )
    if spec["source"] == "csv":
        return data_io.load_csv(
            spec["path"],
            spec["label_column"],
            feature_columns=spec["feature_columns"],
            subsample=spec["subsample"],
            seed=spec["seed"],
            standardize=spec["standardize"],
            positive_label=spec["positive_label"],
        )
    raise ConfigError(f"unknown dataset source {spec['source']!r}")


def build_target(tgt_cfg):
    family = tgt_cfg["family"]
    if family == "banana":
        return targets.BananaTarget(tgt_cfg["a"], tgt_cfg["b"], tgt_cfg["c"])
    if family == "ill_gaussian":
        if tgt_cfg.get("variances") is not None:
            variances = np.asarray(tgt_cfg["variances"], dtype=float)
        else:
            variances = targets.ill_conditioned_variances(
                tgt_cfg["dim"],
                tgt_cfg["seed"],
                smallest=tgt_cfg["smallest"],
                largest=tgt_cfg["largest"],
            )
        return targets.IllConditionedGaussianTarget(variances)
    if family == "logistic":
        if tgt_cfg.get("dataset") is None:
            raise ConfigError("logistic target needs a dataset")
        ds = load_dataset(tgt_cfg["dataset"])
        return targets.LogisticRegressionTarget(
            ds.X, ds.y, prior=tgt_cfg["prior"], prior_scale=tgt_cfg["prior_scale"]
        )
    if family == "garch":
        if tgt_cfg.get("dataset") is None:
            raise ConfigError("garch target needs a dataset")
        ds = load_dataset(tgt_cfg["dataset"])
        return targets.GarchTarget(
            ds.y, m=tgt_cfg["m"], r=tgt_cfg["r"], prior_sd=tgt_cfg["prior_sd"]
        )
    if family == "gp_regression":
        if tgt_cfg.get("dataset") is None:
            raise ConfigError("gp_regression target needs a dataset")
        ds = load_dataset(tgt_cfg["dataset"])
        return targets.GpRegressionTarget(
            ds.X,
            ds.y,
            prior_loc=tgt_cfg["prior_loc"],
            prior_scale=tgt_cfg["prior_scale"],
        )
    raise ConfigError(f"unknown target family {family!r}")


def default_init(target, tgt_cfg):
    family = tgt_cfg["family"]
    if family == "banana":
        return np.array([0.0, 100.0 * tgt_cfg["b"] / tgt_cfg["c"]])
    if family == "garch":
        m, r = tgt_cfg["m"], tgt_cfg["r"]
        init = np.empty(1 + m + r)
        init[0] = 0.4 * target.presample_var
        init[1 : 1 + m] = 0.2 / m
        init[1 + m :] = 0.2 / max(r, 1)
        return init
    if family == "gp_regression":
        return np.array([0.0, -1.0])
    return np.zeros(target.dim)


def loads(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return resolve(raw)


def load(path):
    with open(path) as fh:
        return loads(fh.read())


def dumps(cfg):
    return json.dumps(cfg, indent=2, sort_keys=True)
