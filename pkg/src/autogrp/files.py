"""Definition-file loading with relative references between files."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .endo import hom_from_json
from .errors import ContractError
from .groups import group_from_json
from .structures import structure_from_json

REF_KEYS = ("group", "source", "target", "left", "right", "free")


def gallery_dir() -> Path:
    return Path(str(resources.files("autogrp") / "gallery"))


def resolve(path) -> Path:
    """A path as given, or the bundled gallery file of that name."""
    p = Path(path)
    if p.exists():
        return p
    g = gallery_dir() / p.name
    if g.exists():
        return g
    raise ContractError(f"no such definition file: {path}")


def _expand(doc, base: Path, depth=0):
    if depth > 20:
        raise ContractError("definition files reference each other in a cycle")
    if isinstance(doc, dict):
        out = {}
        for k, v in doc.items():
            if k in REF_KEYS and isinstance(v, str) and v.endswith(".json"):
                out[k] = load_doc(_ref_path(v, base), depth + 1)
            else:
                out[k] = _expand(v, base, depth) if isinstance(v, dict) else v
        return out
    return doc


def _ref_path(ref: str, base: Path) -> Path:
    p = Path(ref)
    if not p.is_absolute():
        cand = base / p
        if cand.exists():
            return cand
    return resolve(ref)


def load_doc(path, depth=0) -> dict:
    p = resolve(path)
    try:
        with open(p) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ContractError(f"cannot read {p}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ContractError(f"{p} does not hold a JSON object")
    return _expand(doc, p.parent, depth)


def load_group(path):
    return group_from_json(load_doc(path))


def load_structure(path, group=None):
    return structure_from_json(load_doc(path), group)


def load_hom(path, source=None, target=None):
    return hom_from_json(load_doc(path), source, target)
