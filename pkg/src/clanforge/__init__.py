"""clanforge: a workbench for dependently sorted algebraic theories,
finite categories with display-map structure, their finite models, the
extension/full weak factorization system, and finite cell complexes."""

from importlib import resources

__version__ = "0.1.0"


def corpus_path(name: str):
    """Path to a bundled corpus file (honors CLANFORGE_CORPUS)."""
    import os
    import pathlib

    override = os.environ.get("CLANFORGE_CORPUS")
    if override:
        return pathlib.Path(override) / name
    return resources.files(__name__) / "corpus" / name


def load_corpus(name: str) -> str:
    p = corpus_path(name)
    return p.read_text(encoding="utf-8")
