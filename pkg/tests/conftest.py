"""Shared fixtures: the two built-in benchmark plants and small helpers."""

import numpy as np
import pytest

from quantstab import (
    LinearSystem,
    Partition,
    Polytope,
    builtin_partition,
    builtin_system,
)


@pytest.fixture(scope="session")
def sys1():
    """3-state 2-input open-loop-unstable benchmark plant."""
    return builtin_system("sys1")


@pytest.fixture(scope="session")
def sys2():
    """5-state 3-input benchmark plant with a structured A."""
    return builtin_system("sys2")


@pytest.fixture(scope="session")
def part1():
    """Unit-step partition on [-4, 4]."""
    return builtin_partition("p1")


@pytest.fixture(scope="session")
def part2():
    """Half-step partition on [-6, 6]."""
    return builtin_partition("p2")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_stabilizable_system(rng, n, m, scale=0.6):
    """A random plant whose open loop is already mildly contractive-ish.

    Drawn so that synthesis problems are usually (not always) feasible at
    moderate densities; used by cross-validation sweeps that only need
    agreement between two methods, not feasibility per se.
    """
    A = scale * rng.uniform(-1.0, 1.0, size=(n, n))
    B = rng.uniform(-1.0, 1.0, size=(n, m))
    return LinearSystem(A=A, B=B)


def box_polytope(center, halfwidth):
    """Axis-aligned box as a face representation."""
    center = np.asarray(center, dtype=float)
    halfwidth = np.asarray(halfwidth, dtype=float)
    d = center.size
    G = np.vstack([np.eye(d), -np.eye(d)])
    h = np.concatenate([center + halfwidth, -(center - halfwidth)])
    return Polytope(G=G, h=h)
