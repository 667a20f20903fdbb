from __future__ import annotations

import shutil

import pytest

from ltesmt import parse
from ltesmt.harness.corpus import INJECTIVE_NO_PSI, INJECTIVE_PSI, MONOTONE

Z3 = shutil.which("z3")
needs_z3 = pytest.mark.skipif(Z3 is None, reason="z3 executable not on PATH")
BACKEND = "z3 -in"


@pytest.fixture
def mono():
    return parse(MONOTONE)


@pytest.fixture
def inj_psi():
    return parse(INJECTIVE_PSI)


@pytest.fixture
def inj_nopsi():
    return parse(INJECTIVE_NO_PSI)
