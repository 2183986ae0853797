# -*- coding: utf-8 -*-
"""Helper functions: seed derivation, config hashing and small formatting utilities."""

import hashlib
import json
import logging
import math
import os
from typing import Any, Dict

from rich.logging import RichHandler

SEED_BYTES = 8


def canonical_json(data: Dict[str, Any]) -> str:
    """Stable JSON rendering (sorted keys, no whitespace)."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(data: Dict[str, Any], length: int = 12) -> str:
    """First hex digits of the SHA-256 of the canonical JSON of a config."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()[:length]


def derive_seed(base_seed: int, *indices: int) -> int:
    """64-bit seed of one trial, derived from the base seed and the trial indices."""
    hash_obj = hashlib.sha256(str(int(base_seed)).encode("ascii"))
    for index in indices:
        hash_obj.update(b":" + str(int(index)).encode("ascii"))
    return int.from_bytes(hash_obj.digest()[:SEED_BYTES], "big")


def ensure_directory(dir_path: str) -> bool:
    """Create dir_path if missing; False when it cannot be created."""
    try:
        os.makedirs(dir_path, exist_ok=True)
        return True
    except OSError:
        return False


def format_value(value: float, digits: int = 10) -> str:
    """Render a float for reports; infinities print as inf."""
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}g}"


def setup_logging(verbose: bool = False) -> None:
    """Route the root logger through a rich handler; DEBUG when verbose."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(name)s: %(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )
