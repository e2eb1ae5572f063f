"""Versioned JSON round-trip for fitted models."""
from __future__ import annotations

import json

FORMAT_VERSION = 1


def _registry() -> dict:
    from . import ALGORITHMS

    return ALGORITHMS


def model_to_json(model) -> str:
    """Serialize a fitted model; deserializing predicts identically."""
    if not getattr(model, "algorithm", ""):
        raise ValueError(f"not a serializable model: {model!r}")
    payload = {
        "format_version": FORMAT_VERSION,
        "algorithm": model.algorithm,
        "state": model.to_state(),
    }
    return json.dumps(payload, sort_keys=True)


def model_from_json(text: str):
    payload = json.loads(text)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version: {version}")
    algorithm = payload.get("algorithm")
    registry = _registry()
    if algorithm not in registry:
        raise ValueError(f"unknown algorithm tag: {algorithm}")
    return registry[algorithm].from_state(payload["state"])
