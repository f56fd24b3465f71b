"""Loader for the embedded reference constants used by the table reports."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def load_reference() -> dict:
    text = resources.files("sparda.data").joinpath("reference_tables.json").read_text()
    return json.loads(text)
