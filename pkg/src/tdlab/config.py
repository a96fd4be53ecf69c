"""Plain-JSON configuration: instances, experiment settings, overrides.

One format serves both the MDP description (nested numeric arrays) and
the experiment settings.  Overrides are dotted paths whose values parse
as JSON when possible and fall back to strings.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import ConfigError
from .experiments import ExperimentConfig, boyan_chain
from .learners import LrSchedule

DEFAULT_CONFIG: dict = {
    "mdp": "boyan15",
    "setting": "discounted",
    "gamma": 0.9,
    "lambda": 0.0,
    "schedule": {"initial_step": 0.01, "t0": 1.0e7, "xi": 1.0, "c_beta": 1.0},
    "horizon": 1_500_000,
    "num_runs": 10,
    "seed_base": 0,
    "checkpoints": 200,
    "name": "experiment",
}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    return cfg


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply repeatable `--set dotted.path=value` assignments in order."""
    out = json.loads(json.dumps(cfg))  # deep copy, JSON-typed
    for item in assignments or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        node[parts[-1]] = value
    return out


def merged_config(path=None, assignments=None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path is not None:
        file_cfg = load_config(path)
        cfg.update(file_cfg)
    return apply_overrides(cfg, assignments)


def schedule_from_dict(d: dict) -> LrSchedule:
    d = dict(d)
    t0 = float(d.get("t0", 1.0))
    xi = float(d.get("xi", 1.0))
    c_beta = float(d.get("c_beta", 1.0))
    if "alpha" in d and "initial_step" in d:
        raise ConfigError("schedule takes alpha or initial_step, not both")
    if "initial_step" in d:
        return LrSchedule.from_effective(float(d["initial_step"]), t0, xi, c_beta)
    if "alpha" in d:
        return LrSchedule(alpha=float(d["alpha"]), t0=t0, xi=xi, c_beta=c_beta)
    raise ConfigError("schedule needs alpha or initial_step")


def resolve_mdp_spec(spec):
    """Return the instance spec as the experiments module expects it:
    a builtin key, or a dict of arrays (possibly loaded from a path)."""
    if isinstance(spec, str) and spec != "boyan15":
        path = Path(spec)
        if not path.exists():
            raise ConfigError(f"unknown builtin or missing instance file: {spec!r}")
        loaded = load_config(path)
        required = {"transition", "reward", "initial_dist", "policy", "features"}
        missing = required - set(loaded)
        if missing:
            raise ConfigError(f"instance file lacks fields: {sorted(missing)}")
        return loaded
    return spec


def experiment_from_config(cfg: dict) -> ExperimentConfig:
    try:
        schedule = schedule_from_dict(cfg.get("schedule", {}))
        seeds = cfg.get("seeds")
        if seeds is None:
            base = int(cfg.get("seed_base", 0))
            seeds = [base + i for i in range(int(cfg.get("num_runs", 1)))]
        return ExperimentConfig(
            schedule=schedule,
            horizon=int(cfg["horizon"]),
            seeds=tuple(int(s) for s in seeds),
            mdp=resolve_mdp_spec(cfg.get("mdp", "boyan15")),
            setting=str(cfg.get("setting", "discounted")),
            gamma=float(cfg.get("gamma", 0.9)),
            lam=float(cfg.get("lambda", 0.0)),
            checkpoints=int(cfg.get("checkpoints", 200)),
            name=str(cfg.get("name", "experiment")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad experiment config: {exc}") from exc


def builtin_instance_dict() -> dict:
    mdp, policy, features = boyan_chain()
    return {
        "transition": mdp.transition.tolist(),
        "reward": mdp.reward.tolist(),
        "initial_dist": mdp.initial_dist.tolist(),
        "policy": policy.probs.tolist(),
        "features": features.matrix.tolist(),
    }


def export_builtin(path) -> dict:
    """Write the built-in instance plus default settings as editable JSON."""
    payload = dict(DEFAULT_CONFIG)
    payload["mdp"] = builtin_instance_dict()
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return payload


def default_output_dir() -> Path:
    return Path(os.environ.get("TDLAB_OUT", "."))
