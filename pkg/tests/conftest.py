import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cyclelab import cycles as cy
from cyclelab.field import ck_system


@pytest.fixture(scope="session")
def ck():
    return {k: ck_system(k) for k in (1, 2, 3)}


@pytest.fixture(scope="session")
def section(ck):
    # transversal for every CK(k): the flow crosses the positive x-axis upward
    return cy.section_for_field(ck[1], (1.0, 0.0))


@pytest.fixture(scope="session")
def ck_cycles(ck, section):
    return {k: cy.build_cycle(ck[k], section, 0.0) for k in (1, 2, 3)}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
