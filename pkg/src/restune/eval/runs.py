"""Run-directory bookkeeping: config loading, hashing, and the manifest."""

from __future__ import annotations

import hashlib
import json
import os

import yaml

from ..errors import ConfigError, MissingArtifactError

MANIFEST_NAME = "manifest.json"


def load_config(path) -> dict:
    """Parse a YAML experiment config; must be a mapping."""
    if not os.path.exists(path):
        raise MissingArtifactError(f"config file not found: {path}")
    with open(path) as f:
        try:
            cfg = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML in {path}: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"config must be a mapping, got {type(cfg).__name__}: {path}")
    return cfg


def config_hash(cfg: dict) -> str:
    """Stable SHA-256 over the canonical JSON form of the config."""
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def require(cfg: dict, key: str, section: str = ""):
    if key not in cfg:
        where = f" in section {section!r}" if section else ""
        raise ConfigError(f"missing config key {key!r}{where}")
    return cfg[key]


def require_artifact(path) -> str:
    if not os.path.exists(path):
        raise MissingArtifactError(f"required artifact not found: {path}")
    return path


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def update_manifest(run_dir, command: str, cfg: dict, seed: int, artifacts) -> str:
    """Record what a command produced; one manifest per run directory.

    The manifest maps command name to (config hash, seed, sorted artifact
    paths relative to the run dir).  Content is timestamp-free so reruns
    with identical inputs rewrite identical bytes.
    """
    ensure_dir(run_dir)
    path = os.path.join(run_dir, MANIFEST_NAME)
    manifest = {}
    if os.path.exists(path):
        with open(path) as f:
            manifest = json.load(f)
    manifest[command] = {
        "config_sha256": config_hash(cfg),
        "seed": seed,
        "artifacts": sorted(os.path.relpath(a, run_dir) for a in artifacts),
    }
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
