from __future__ import annotations

from importlib.resources import files

import pytest

from audala.syntax.checker import load_program

EXTS = {
    "listing1.adl": (),
    "listing6.adl": (),
    "listing8.adl": (),
    "listing9.adl": ("param-fix",),
    "listing10.adl": ("arrays",),
    "listing11.adl": ("iter",),
}


def corpus_text(name: str) -> str:
    return files("audala.corpus").joinpath(name).read_text()


def load(name: str, ext=None):
    return load_program(corpus_text(name), EXTS[name] if ext is None else ext)


@pytest.fixture
def listing1():
    return load("listing1.adl")
