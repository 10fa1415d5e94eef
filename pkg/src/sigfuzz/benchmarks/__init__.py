"""Bundled benchmark models."""

from __future__ import annotations

from importlib import resources

from ..ir import ModelIR, parse_model

NAMES = ("ondlc", "oshotc", "twotank", "piregulator", "guidance")


def model_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(NAMES)}")
    return resources.files(__package__).joinpath(f"{name}.ir").read_text(encoding="utf-8")


def load(name: str) -> ModelIR:
    return parse_model(model_text(name))


def load_all() -> dict:
    return {n: load(n) for n in NAMES}
