"""Run-config files: JSON documents validated against per-command schemas.

Unknown keys are rejected by name so typos never silently fall back to
defaults.  Command-line flags override file values.
"""

from __future__ import annotations

import json
from typing import Optional

from .device import ParamRanges, default_ranges
from .errors import ConfigError
from .harness import HierarchyConfig, SweepConfig
from .solver import DEFAULT_DT, DEFAULT_DURATION, DEFAULT_FREQUENCY

GENERATE_KEYS = {"interface_dim", "subdivision", "alpha", "beta", "xi",
                 "edge_count", "ranges", "seed", "input_node", "ground_node"}
SIMULATE_KEYS = {"amplitude", "frequency", "dt", "duration", "decay_mode",
                 "decimation"}
SWEEP_KEYS = {"alphas", "betas", "xis", "amplitudes", "trials", "base_seed",
              "interface_dim", "subdivision", "ranges", "dt", "duration",
              "frequency", "center", "decay_mode", "edge_count"}
HIERARCHY_KEYS = SWEEP_KEYS | {"k", "readout_a", "readout_b"}


def load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


def check_keys(doc: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s) in {where}: {', '.join(unknown)}")


def parse_ranges(doc: dict) -> ParamRanges:
    raw = doc.get("ranges")
    if raw is None:
        return default_ranges()
    if not isinstance(raw, dict):
        raise ConfigError("'ranges' must be an object of [lo, hi] pairs")
    try:
        return ParamRanges.from_dict(raw)
    except Exception as exc:
        raise ConfigError(f"bad 'ranges': {exc}") from None


def parse_generate(doc: dict) -> dict:
    check_keys(doc, GENERATE_KEYS, "generate config")
    out = {
        "interface_dim": int(doc.get("interface_dim", 4)),
        "subdivision": int(doc.get("subdivision", 1)),
        "alpha": float(doc.get("alpha", 1.0)),
        "beta": float(doc.get("beta", 1.0)),
        "xi": int(doc.get("xi", 4)),
        "edge_count": None if doc.get("edge_count") is None else int(doc["edge_count"]),
        "ranges": parse_ranges(doc),
        "seed": int(doc.get("seed", 0)),
        "input_node": doc.get("input_node"),
        "ground_node": doc.get("ground_node"),
    }
    if out["seed"] < 0:
        raise ConfigError("'seed' must be >= 0")
    return out


def parse_simulate(doc: dict) -> dict:
    check_keys(doc, SIMULATE_KEYS, "simulate config")
    out = {
        "amplitude": float(doc.get("amplitude", 1.0)),
        "frequency": float(doc.get("frequency", DEFAULT_FREQUENCY)),
        "dt": float(doc.get("dt", DEFAULT_DT)),
        "duration": float(doc.get("duration", DEFAULT_DURATION)),
        "decay_mode": str(doc.get("decay_mode", "state_dependent")),
        "decimation": int(doc.get("decimation", 1)),
    }
    if out["dt"] <= 0 or out["duration"] < out["dt"]:
        raise ConfigError("need dt > 0 and duration >= dt")
    if out["decimation"] < 1:
        raise ConfigError("'decimation' must be >= 1")
    return out


def _sweep_kwargs(doc: dict) -> dict:
    kw = {}
    for key, cast in (("alphas", float), ("betas", float), ("amplitudes", float)):
        if key in doc:
            kw[key] = tuple(cast(x) for x in doc[key])
    if "xis" in doc:
        kw["xis"] = tuple(int(x) for x in doc["xis"])
    for key, cast in (("trials", int), ("base_seed", int), ("interface_dim", int),
                      ("subdivision", int), ("dt", float), ("duration", float),
                      ("frequency", float), ("center", bool),
                      ("decay_mode", str)):
        if key in doc:
            kw[key] = cast(doc[key])
    if doc.get("edge_count") is not None:
        kw["edge_count"] = int(doc["edge_count"])
    kw["ranges"] = parse_ranges(doc)
    return kw


def parse_sweep(doc: dict) -> SweepConfig:
    check_keys(doc, SWEEP_KEYS, "sweep config")
    try:
        return SweepConfig(**_sweep_kwargs(doc))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad sweep config: {exc}") from None


def parse_hierarchy(doc: dict) -> tuple:
    check_keys(doc, HIERARCHY_KEYS, "hierarchy config")
    sweep_doc = {k: v for k, v in doc.items() if k in SWEEP_KEYS}
    hier = HierarchyConfig(k=int(doc.get("k", 16)),
                           readout_a=int(doc.get("readout_a", 2)),
                           readout_b=int(doc.get("readout_b", 9)))
    return parse_sweep(sweep_doc), hier


def sweep_config_to_dict(cfg: SweepConfig) -> dict:
    return {
        "alphas": list(cfg.alphas), "betas": list(cfg.betas),
        "xis": list(cfg.xis), "amplitudes": list(cfg.amplitudes),
        "trials": cfg.trials, "base_seed": cfg.base_seed,
        "interface_dim": cfg.interface_dim, "subdivision": cfg.subdivision,
        "ranges": cfg.ranges.to_dict(), "dt": cfg.dt, "duration": cfg.duration,
        "frequency": cfg.frequency, "center": cfg.center,
        "decay_mode": cfg.decay_mode, "edge_count": cfg.edge_count,
    }
