"""Interferometric phase estimation: generators, exact evolution, Fisher information.

Conventions.  The quantum Fisher information of a pure state is four times
the generator variance.  The built-in estimation generators are the
half-imbalance (n_a - n_b)/2 and the half-exchange (a†b + b†a)/2 of the two
occupied modes, so that the NOON state saturates F = N^2 and a dressed
single-mode state gives F = 4 xi (1-xi) N.  ``evolve`` applies the mode-phase
unitaries themselves: for the imbalance kind each basis vector gains
e^{i theta (n_a - n_b)}, i.e. twice the generator phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError
from .fock import (
    ATOL,
    LadderPolynomial,
    Mode,
    ModeRegistry,
    StateVector,
    variance,
)

GENERATOR_KINDS = ("nlr", "tlr", "custom")

SUB_SHOT_NOISE = "sub_shot_noise"
SHOT_NOISE = "shot_noise"
SUPER_SHOT_NOISE = "super_shot_noise"
HEISENBERG = "heisenberg"


@dataclass(frozen=True)
class Generator:
    """A Hermitian estimation generator, optionally tied to a mode pair."""

    kind: str
    poly: LadderPolynomial
    mode_a: Mode | None = None
    mode_b: Mode | None = None

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise DomainError(f"unknown generator kind {self.kind!r}")
        if not self.poly.is_hermitian():
            raise UsageError("generator polynomial must be Hermitian")

    @classmethod
    def imbalance(cls, registry: ModeRegistry, mode_a: Mode, mode_b: Mode) -> "Generator":
        """Half the occupation imbalance, (n_a - n_b)/2."""
        poly = (LadderPolynomial.number(registry, mode_a)
                - LadderPolynomial.number(registry, mode_b)) * 0.5
        return cls("nlr", poly, mode_a, mode_b)

    @classmethod
    def exchange(cls, registry: ModeRegistry, mode_a: Mode, mode_b: Mode) -> "Generator":
        """Half the mode-exchange (beam-splitter) coupling, (a†b + b†a)/2."""
        ia, ib = registry.index(mode_a), registry.index(mode_b)
        poly = LadderPolynomial(registry, {((ia,), (ib,)): 0.5, ((ib,), (ia,)): 0.5})
        return cls("tlr", poly, mode_a, mode_b)

    @classmethod
    def custom(cls, poly: LadderPolynomial) -> "Generator":
        return cls("custom", poly)


def qfi(state: StateVector, gen: Generator) -> float:
    """Quantum Fisher information 4 * Var(generator) of a normalized pure state."""
    if not state.is_normalized:
        raise UsageError("qfi requires a normalized state")
    return max(4.0 * variance(gen.poly, state), 0.0)


def closed_form_qfi(family: str, **params) -> float:
    """Closed-form Fisher information for the named state/generator pairings.

    two_fock_imbalance(xi, l1, l2) -> 4 xi (1-xi) (l1-l2)^2
    uniform_imbalance(n)           -> (n^2 + 2 n) / 3
    coherent_imbalance(xi, n)      -> 4 xi (1-xi) n
    fock_exchange(l, n)            -> n + 2 l (n-l)
    """
    def need(*keys):
        missing = [k for k in keys if k not in params]
        if missing:
            raise DomainError(f"{family} needs parameters {missing}")
        return [params[k] for k in keys]

    if family == "two_fock_imbalance":
        xi, l1, l2 = need("xi", "l1", "l2")
        if not 0.0 <= xi <= 1.0:
            raise DomainError(f"xi must lie in [0, 1], got {xi}")
        return 4.0 * xi * (1.0 - xi) * (l1 - l2) ** 2
    if family == "uniform_imbalance":
        (n,) = need("n")
        if n < 0:
            raise DomainError("n must be >= 0")
        return (n * n + 2.0 * n) / 3.0
    if family == "coherent_imbalance":
        xi, n = need("xi", "n")
        if not 0.0 <= xi <= 1.0:
            raise DomainError(f"xi must lie in [0, 1], got {xi}")
        if n < 0:
            raise DomainError("n must be >= 0")
        return 4.0 * xi * (1.0 - xi) * n
    if family == "fock_exchange":
        l, n = need("l", "n")
        if not 0 <= l <= n:
            raise DomainError(f"l must lie in [0, {n}], got {l}")
        return float(n + 2 * l * (n - l))
    raise DomainError(f"unknown closed-form family {family!r}")


def phase_evolution(state: StateVector, weights: dict[Mode, float], theta: float) -> StateVector:
    """Exact diagonal unitary exp(i theta sum_m w_m n_m) applied per basis vector."""
    idx = {state.registry.index(m): w for m, w in weights.items()}
    out = {}
    for occ, amp in state._amps.items():
        phase = theta * sum(w * occ[i] for i, w in idx.items())
        out[occ] = amp * cmath.exp(1j * phase)
    return StateVector(state.registry, out)


def _two_mode_sector_vector(state: StateVector, mode_a: Mode, mode_b: Mode):
    """Dense coefficients over |l, N-l> for a fixed-N two-mode state."""
    n_total = state.sector
    if n_total is None:
        raise UsageError("exchange evolution needs a fixed total particle number")
    reg = state.registry
    ia, ib = reg.index(mode_a), reg.index(mode_b)
    vec = np.zeros(n_total + 1, dtype=complex)
    for occ, amp in state._amps.items():
        if any(n and i not in (ia, ib) for i, n in enumerate(occ)):
            raise UsageError("exchange evolution needs a state confined to the two modes")
        vec[occ[ia]] = amp
    return vec, n_total, ia, ib


def _exchange_matrix(n_total: int) -> np.ndarray:
    """(a†_a a_b + a†_b a_a) on the fixed-N two-mode sector, basis |l, N-l>."""
    t = np.zeros((n_total + 1, n_total + 1))
    for ell in range(n_total):
        t[ell + 1, ell] = math.sqrt((ell + 1) * (n_total - ell))
    return t + t.T


def evolve(state: StateVector, gen: Generator, theta: float) -> StateVector:
    """Unitary evolution of a state by the generator's mode unitary.

    nlr: per-basis-vector phase e^{i theta (n_a - n_b)}, exact for any state.
    tlr: dense exponential of the fixed-N two-mode exchange operator, built
         from a Hermitian eigendecomposition (unitary to machine precision).
    """
    if gen.kind == "nlr":
        return phase_evolution(state, {gen.mode_a: 1.0, gen.mode_b: -1.0}, theta)
    if gen.kind == "tlr":
        vec, n_total, ia, ib = _two_mode_sector_vector(state, gen.mode_a, gen.mode_b)
        evals, evecs = np.linalg.eigh(_exchange_matrix(n_total))
        new = evecs @ (np.exp(1j * theta * evals) * (evecs.conj().T @ vec))
        out = {}
        for ell, amp in enumerate(new):
            occ = [0] * len(state.registry)
            occ[ia] = ell
            occ[ib] = n_total - ell
            out[tuple(occ)] = amp
        return StateVector(state.registry, out)
    raise UsageError("evolution is implemented for the built-in generator kinds only")


def shot_noise_verdict(fisher: float, n: int) -> str:
    """Classify a Fisher information value against the N and N^2 thresholds."""
    if fisher < 0.0:
        raise DomainError(f"Fisher information must be >= 0, got {fisher}")
    if n < 1:
        raise DomainError(f"particle number must be >= 1, got {n}")
    if abs(fisher - n * n) <= ATOL:
        return HEISENBERG
    if fisher > n + ATOL:
        return SUPER_SHOT_NOISE
    if abs(fisher - n) <= ATOL:
        return SHOT_NOISE
    return SUB_SHOT_NOISE
