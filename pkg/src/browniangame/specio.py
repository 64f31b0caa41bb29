"""Loading and validation of game and organization spec files.

A spec file is a flat JSON document discriminated by a top-level ``kind``
field (``"game"``, the default, or ``"organization"``).  Game specs carry
``n``, ``G`` (row-major flat list or nested rows), ``d``, ``mu``, ``sigma2``,
``p0``, ``X0`` and the optional generalized-mode fields ``sigma_pairs`` and
``mu_vec``.  Organization specs carry ``a1``, ``a2``, ``b``, ``c1``, ``c2``,
``g_org``, ``mu``, ``sigma2``, ``p0``, ``X0``.  Unknown fields are rejected.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .game import NetworkGame, build_game
from .organization import OrgSpec, build_org

GAME_REQUIRED = {"n", "G", "d", "mu", "sigma2", "p0", "X0"}
GAME_OPTIONAL = {"kind", "sigma_pairs", "mu_vec"}
ORG_REQUIRED = {"a1", "a2", "b", "c1", "c2", "g_org", "mu", "sigma2", "p0", "X0"}
ORG_OPTIONAL = {"kind"}


def spec_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_spec(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"spec file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"spec file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("spec file must hold a JSON object")
    return doc


def spec_kind(doc: dict) -> str:
    kind = doc.get("kind", "game")
    if kind not in ("game", "organization"):
        raise ValidationError(f"unknown spec kind {kind!r}")
    return kind


def _check_fields(doc: dict, required: set, optional: set, what: str) -> None:
    keys = set(doc)
    missing = required - keys
    if missing:
        raise ValidationError(f"{what} spec is missing fields: {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ValidationError(f"{what} spec has unknown fields: {sorted(unknown)}")


def _square_matrix(raw, n: int, name: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 1:
        if arr.size != n * n:
            raise ValidationError(f"{name} must have {n * n} row-major entries")
        arr = arr.reshape(n, n)
    if arr.shape != (n, n):
        raise ValidationError(f"{name} must be {n}x{n}")
    return arr


def game_from_spec(doc: dict) -> NetworkGame:
    _check_fields(doc, GAME_REQUIRED, GAME_OPTIONAL, "game")
    n = int(doc["n"])
    if n < 1:
        raise ValidationError("n must be at least 1")
    G = _square_matrix(doc["G"], n, "G")
    kwargs = {}
    if doc.get("sigma_pairs") is not None:
        kwargs["sigma_pairs"] = _square_matrix(doc["sigma_pairs"], n, "sigma_pairs")
    if doc.get("mu_vec") is not None:
        kwargs["mu_vec"] = np.asarray(doc["mu_vec"], dtype=float)
    return build_game(
        G=G,
        d=np.asarray(doc["d"], dtype=float),
        mu=float(doc["mu"]),
        sigma2=float(doc["sigma2"]),
        p0=float(doc["p0"]),
        X0=float(doc["X0"]),
        **kwargs,
    )


def org_from_spec(doc: dict) -> OrgSpec:
    _check_fields(doc, ORG_REQUIRED, ORG_OPTIONAL, "organization")
    return build_org(**{k: float(doc[k]) for k in ORG_REQUIRED})


def load_game(path) -> NetworkGame:
    doc = load_spec(path)
    if spec_kind(doc) != "game":
        raise ValidationError("expected a game spec (kind == 'game')")
    return game_from_spec(doc)


def load_org(path) -> OrgSpec:
    doc = load_spec(path)
    if spec_kind(doc) != "organization":
        raise ValidationError("expected an organization spec (kind == 'organization')")
    return org_from_spec(doc)
