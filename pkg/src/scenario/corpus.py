"""Shipped scenario corpus (src/scenario/corpus/*.scenario)."""

import logging
from pathlib import Path

from scenario.model import ScenarioSpec
from scenario.parser import parse_scenario

logger = logging.getLogger(__name__)

CORPUS_DIR = Path(__file__).resolve().parent / "corpus"
SUFFIX = ".scenario"


def corpus_names(directory=None) -> list:
    directory = Path(directory or CORPUS_DIR)
    return sorted(p.stem for p in directory.glob(f"*{SUFFIX}"))


def corpus_path(name: str, directory=None) -> Path:
    """
    Path of a corpus scenario by name.

    Raises:
        FileNotFoundError: no such scenario in the directory.
    """
    path = Path(directory or CORPUS_DIR) / f"{name}{SUFFIX}"
    if not path.is_file():
        raise FileNotFoundError(f"no corpus scenario named '{name}'")
    return path


def load_scenario(path) -> ScenarioSpec:
    """Read and parse a scenario file (UTF-8)."""
    path = Path(path)
    logger.debug("loading scenario %s", path)
    return parse_scenario(path.read_text(encoding="utf-8"))


def resolve(name_or_path, directory=None) -> Path:
    """A file path as given, or else a corpus name."""
    path = Path(name_or_path)
    if path.suffix == SUFFIX or path.exists():
        return path
    return corpus_path(str(name_or_path), directory)


def load_corpus(directory=None) -> dict:
    return {name: load_scenario(corpus_path(name, directory)) for name in corpus_names(directory)}
