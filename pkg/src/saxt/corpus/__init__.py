"""Example programs shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

POSITIVE = ("eat", "evens_odds", "stream_processor", "bin")
MUTANTS = ("eat_same_size", "loop", "noncontractive", "noncontractive2", "eat_wrong_id")


def path(name: str) -> Path:
    """Path of a corpus file; ``name`` may be ``'eat'`` or ``'mutants/loop'``."""
    base = Path(str(resources.files(__name__)))
    if name in MUTANTS:
        name = f"mutants/{name}"
    p = base / (name if name.endswith(".sax") else f"{name}.sax")
    if not p.exists():
        raise FileNotFoundError(p)
    return p


def source(name: str) -> str:
    return path(name).read_text(encoding="utf-8")
