"""Versioned prompt assets. Load by asset name, format with keyword vars."""

from importlib import resources


def load_prompt(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def render_prompt(name: str, **variables: str) -> str:
    return load_prompt(name).format(**variables)
