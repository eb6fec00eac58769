"""Shared fixtures: small grids that run in well under a second."""

import sys

import numpy as np
import pytest
from loguru import logger

from app.config import settings
from app.enums import DamperKind
from app.schemas import DamperSection, Disk, DomainSpec
from app.services.domain_service import DomainService


@pytest.fixture(autouse=True)
def reset_logger():
    """`main` swaps loguru sinks onto the captured stderr; put a live one back."""
    yield
    logger.remove()
    logger.add(lambda message: sys.stderr.write(message), level=settings.log_level)


@pytest.fixture
def disk_spec() -> DomainSpec:
    return DomainSpec(
        dimension=2,
        r_box=6.0,
        h=0.2,
        obstacles=[Disk(center=(0.0, 0.0), radius=0.6)],
        r0=1.5,
        r1=2.5,
    )


@pytest.fixture
def disk_grid(disk_spec):
    return DomainService.build_grid(disk_spec)


@pytest.fixture
def disk_damper(disk_spec, disk_grid):
    section = DamperSection(kind=DamperKind.EXTERIOR_SMOOTH, inner_radius=0.8)
    return DomainService.sample_damper(section, disk_spec, disk_grid)


@pytest.fixture
def line_spec() -> DomainSpec:
    return DomainSpec(dimension=1, r_box=10.0, h=0.1, r0=1.0, r1=2.0)


@pytest.fixture
def line_grid(line_spec):
    return DomainService.build_grid(line_spec)


@pytest.fixture
def trap_spec() -> DomainSpec:
    return DomainSpec(
        dimension=2,
        r_box=6.0,
        h=0.1,
        obstacles=[
            Disk(center=(-2.0, 0.0), radius=0.5),
            Disk(center=(2.0, 0.0), radius=0.5),
        ],
        r0=3.0,
        r1=4.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def write_config(path, text: str):
    path.write_text(text, encoding="utf-8")
    return path
