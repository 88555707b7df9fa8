"""Particle-based entanglement notions, reproduced numerically.

Two constructions are implemented for comparison against mode entanglement:
the selective-removal matrix obtained by annihilating n particles inside a
chosen single-particle subspace, and the condensate-style separability test
that accepts only N-fold powers of one dressed creation operator.  The
entanglement-swapping protocol built on the latter notion is reproduced,
post-selection included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _iproduct

import numpy as np

from .errors import DomainError, UndefinedReductionError, UsageError
from .entanglement import Bipartition, DensityMatrix, negativity
from .fock import (
    ATOL,
    PRUNE_TOL,
    LadderPolynomial,
    Mode,
    ModeRegistry,
    StateVector,
    inner,
    partial_project,
    restrict,
    tensor,
)
from .states import (
    L_DOWN,
    L_UP,
    R_DOWN,
    TwoModeSpec,
    X_UP,
    Y_DOWN,
    su2_coherent,
    teleport_registry,
)

INTERNAL_ORDER = ("up", "down")


@dataclass(frozen=True)
class SubspaceSpec:
    """Single-particle subspace used by the selective-removal construction."""

    modes: tuple[Mode, ...]

    def __post_init__(self):
        if not self.modes:
            raise DomainError("the subspace needs at least one mode")
        if len(set(self.modes)) != len(self.modes):
            raise DomainError("subspace modes must be distinct")

    @classmethod
    def left_site(cls) -> "SubspaceSpec":
        """The usual choice: both internal states at the L location."""
        return cls((L_UP, L_DOWN))


def _compositions(total: int, parts: int):
    """All tuples of `parts` non-negative integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _subspace_annihilators(state_registry: ModeRegistry, spec: SubspaceSpec,
                           rotation=None) -> list[LadderPolynomial]:
    """Annihilators of the subspace basis, optionally unitarily rotated.

    With a rotation U, column i defines the dressed mode
    |i'> = sum_j U[j,i] |j>, whose annihilator is sum_j conj(U[j,i]) a_j.
    """
    base = [LadderPolynomial.annihilator(state_registry, m) for m in spec.modes]
    if rotation is None:
        return base
    u = np.asarray(rotation, dtype=complex)
    p = len(spec.modes)
    if u.shape != (p, p):
        raise UsageError(f"rotation must be {p}x{p}")
    if not np.allclose(u.conj().T @ u, np.eye(p), atol=ATOL):
        raise UsageError("rotation must be unitary")
    rotated = []
    for i in range(p):
        poly = LadderPolynomial.zero(state_registry)
        for j in range(p):
            poly = poly + base[j] * complex(u[j, i]).conjugate()
        rotated.append(poly)
    return rotated


def nolabel_rho_n(state: StateVector, spec: SubspaceSpec, n: int,
                  rotation=None) -> DensityMatrix:
    """Selective-removal matrix: annihilate n particles inside the subspace.

    Sums |v_c><v_c| over all ways c of distributing the n removals across the
    subspace basis modes, normalized by the total captured weight.  The result
    is supported on the sector with n fewer particles.
    """
    total = state.sector
    if total is None:
        raise UsageError("the construction needs a fixed-particle-number state")
    if not 1 <= n <= total:
        raise DomainError(f"removal count must lie in [1, {total}], got {n}")
    ops = _subspace_annihilators(state.registry, spec, rotation)
    vectors = []
    weight = 0.0
    for comp in _compositions(n, len(ops)):
        poly = LadderPolynomial.identity(state.registry)
        for op, power in zip(ops, comp):
            for _ in range(power):
                poly = poly * op
        v = poly.apply(state)
        norm_sq = v.norm() ** 2
        if norm_sq >= PRUNE_TOL:
            vectors.append(v)
            weight += norm_sq
    if weight < PRUNE_TOL:
        raise UndefinedReductionError(
            "no support remains after removing the requested particles")
    basis = sorted({occ for v in vectors for occ in v.occupations()})
    pos = {occ: i for i, occ in enumerate(basis)}
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for v in vectors:
        vec = np.zeros(len(basis), dtype=complex)
        for occ, amp in v.items():
            vec[pos[occ]] = amp
        rho += np.outer(vec, vec.conj())
    return DensityMatrix(state.registry.modes, tuple(basis), rho / weight)


def nolabel_local_operator(matrix, spatial: str, n: int,
                           registry: ModeRegistry) -> LadderPolynomial:
    """n-particle operator confined to one spatial site's internal modes.

    sum <s_1...s_n| O |s'_1...s'_n>  prod_j a†_{site,s_j} a_{site,s'_j}.
    ``matrix`` addresses the n-fold internal tensor basis (2^n x 2^n); a 2x2
    matrix with n > 1 is lifted to its n-fold Kronecker power.
    """
    if n < 1:
        raise DomainError(f"particle count must be >= 1, got {n}")
    o = np.asarray(matrix, dtype=complex)
    if o.shape == (2, 2) and n > 1:
        lifted = o
        for _ in range(n - 1):
            lifted = np.kron(lifted, o)
        o = lifted
    dim = 2 ** n
    if o.shape != (dim, dim):
        raise UsageError(f"matrix must be 2x2 or {dim}x{dim} for n={n}")
    site_modes = {label: Mode(spatial, label) for label in INTERNAL_ORDER}
    for m in site_modes.values():
        if m not in registry:
            raise UsageError(f"registry lacks mode {m}")
    factors = {
        (bra, ket): (LadderPolynomial.creator(registry, site_modes[bra])
                     * LadderPolynomial.annihilator(registry, site_modes[ket]))
        for bra in INTERNAL_ORDER for ket in INTERNAL_ORDER
    }
    result = LadderPolynomial.zero(registry)
    for bras in _iproduct(INTERNAL_ORDER, repeat=n):
        row = sum(INTERNAL_ORDER.index(b) << (n - 1 - j) for j, b in enumerate(bras))
        for kets in _iproduct(INTERNAL_ORDER, repeat=n):
            col = sum(INTERNAL_ORDER.index(k) << (n - 1 - j) for j, k in enumerate(kets))
            c = o[row, col]
            if abs(c) < PRUNE_TOL:
                continue
            term = LadderPolynomial.identity(registry)
            for b, k in zip(bras, kets):
                term = term * factors[(b, k)]
            result = result + term * c
    return result


def single_particle_rdm(state: StateVector) -> np.ndarray:
    """One-body matrix <a†_m a_m'> over the registry modes; trace equals N."""
    reg = state.registry
    lowered = [LadderPolynomial.annihilator(reg, m).apply(state) for m in reg]
    dim = len(reg)
    rho = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            rho[i, j] = inner(lowered[i], lowered[j])
    return rho


def particle_separability_verdict(state: StateVector, tol: float = ATOL) -> bool:
    """True iff every particle occupies one and the same dressed mode.

    Equivalent to the one-body matrix having rank one; such states are
    exactly the N-fold powers of a single dressed creation operator.
    """
    if state.sector is None:
        raise UsageError("the verdict needs a fixed-particle-number state")
    if state.sector == 0:
        return True
    if not state.is_normalized:
        raise UsageError("the verdict needs a normalized state")
    evals = np.linalg.eigvalsh(single_particle_rdm(state))
    return bool(evals[-2] / evals[-1] <= tol) if len(evals) > 1 else True


@dataclass(frozen=True)
class SwapParadoxResult:
    """Post-selected swap outcome: probability, states, and (X,R) negativity."""

    probability: float
    post_state: StateVector
    residual_xr: StateVector
    negativity_xr: float


def swap_paradox(zeta: float, xi: float, eta: float,
                 theta: float = 0.0, phi: float = 0.0, omega: float = 0.0,
                 n: int = 2) -> SwapParadoxResult:
    """Entanglement swapping between condensate-style separable states.

    Prepares dressed-mode states of n particles each on (X,up),(Y,down) and
    (L,up),(R,down), projects (Y,down),(L,up) onto the dressed target state
    parametrized by (eta, omega), and reports the outcome probability, the
    renormalized post-selected state, and the entanglement generated across
    the untouched pair (X,up)|(R,down).
    """
    if n < 1:
        raise DomainError(f"particle count must be >= 1, got {n}")
    for name, value in (("zeta", zeta), ("xi", xi), ("eta", eta)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value}")
    registry = teleport_registry()
    input_state = su2_coherent(TwoModeSpec(registry, X_UP, Y_DOWN, n), zeta, theta)
    resource = su2_coherent(TwoModeSpec(registry, L_UP, R_DOWN, n), xi, phi)
    target = su2_coherent(TwoModeSpec(registry, Y_DOWN, L_UP, n), eta, omega)
    joint = tensor(input_state, resource)
    residual = partial_project(target, [Y_DOWN, L_UP], joint)
    probability = residual.norm() ** 2
    if probability < PRUNE_TOL:
        raise UndefinedReductionError("the selected outcome has zero probability")
    residual = residual * (1.0 / math.sqrt(probability))
    post_state = tensor(target, residual)
    residual_xr = restrict(residual, [X_UP, R_DOWN])
    neg = negativity(residual_xr, Bipartition.split(residual_xr.registry, [X_UP]))
    return SwapParadoxResult(probability, post_state, residual_xr, neg)
