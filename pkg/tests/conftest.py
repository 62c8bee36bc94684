from pathlib import Path

import pytest

from cna.process import parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def corpus_programs():
    return {
        path.name: parse_program(path.read_text(encoding="utf-8"))
        for path in sorted(CORPUS.glob("*.cna"))
    }
