"""Shared fixtures for the rwrc-lab test suite."""

from pathlib import Path
from typing import Iterator

import pytest
import structlog

from rwrc_lab.conductance.models import EllipticModel, TailModel
from rwrc_lab.lattice import LatticeBox, build_box, centred_cube


@pytest.fixture(autouse=True)
def reset_structlog() -> Iterator[None]:
    """Route log events to stdout (structlog defaults) so capsys sees them."""
    structlog.reset_defaults()
    yield
    structlog.reset_defaults()


@pytest.fixture
def path_box() -> LatticeBox:
    """Five sites 1..5 on a line."""
    return build_box(1, 6.0, [(0.0, 1.0)])


@pytest.fixture
def square_box() -> LatticeBox:
    """A 4x3 box in d = 2."""
    return build_box(2, 1.0, [(0.5, 4.5), (0.5, 3.5)])


@pytest.fixture
def q2() -> LatticeBox:
    """Q_2 in d = 1 (five sites -2..2)."""
    return centred_cube(1, 2)


@pytest.fixture
def tail_model() -> TailModel:
    return TailModel(eta=1.0, D=0.5)


@pytest.fixture
def elliptic_model() -> EllipticModel:
    return EllipticModel(lam=0.5)


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    return tmp_path / "out"
