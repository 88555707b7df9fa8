import numpy as np
import pytest

from modeforge import ModeRegistry, StateVector
from modeforge.states import standard_registry


@pytest.fixture
def registry():
    return standard_registry()


def random_sparse_state(registry: ModeRegistry, rng: np.random.Generator,
                        max_particles: int = 4, entries: int = 5) -> StateVector:
    """Random normalized state with bounded occupations, for property tests."""
    n_modes = len(registry)
    amps = {}
    for _ in range(entries):
        occ = tuple(int(rng.integers(0, max_particles + 1)) for _ in range(n_modes))
        if sum(occ) > max_particles:
            continue
        amps[occ] = complex(rng.normal(), rng.normal())
    if not amps:
        amps[(0,) * n_modes] = 1.0
    return StateVector(registry, amps).normalized()


def random_fixed_n_state(registry: ModeRegistry, rng: np.random.Generator,
                         total: int, entries: int = 6) -> StateVector:
    """Random normalized state inside one total-particle sector."""
    n_modes = len(registry)
    amps = {}
    for _ in range(entries):
        cuts = sorted(rng.integers(0, total + 1, size=n_modes - 1))
        occ = []
        prev = 0
        for c in list(cuts) + [total]:
            occ.append(int(c - prev))
            prev = c
        amps[tuple(occ)] = complex(rng.normal(), rng.normal())
    return StateVector(registry, amps).normalized()
