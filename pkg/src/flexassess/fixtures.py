"""Bundled example models."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .loader import parse_model
from .model import ModelRepository


def case_study_path() -> Path:
    return Path(str(resources.files(__package__) / "data" / "case_study.json"))


def case_study() -> ModelRepository:
    return parse_model(case_study_path().read_text(encoding="utf-8"))
