"""Mode-entanglement machinery: bipartitions, reductions, entropy, negativity.

A bipartition splits the registry into two disjoint mode subsets, each
generating a commuting operator algebra.  Pure-state entanglement across the
split is read off the Schmidt decomposition of the amplitude matrix indexed
by (side-1 occupation, side-2 occupation); mixed-state measures are out of
scope and rejected explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UsageError
from .fock import (
    ATOL,
    PRUNE_TOL,
    LadderPolynomial,
    Mode,
    ModeRegistry,
    StateVector,
    expectation,
    one_body_operator,
)


@dataclass(frozen=True)
class Bipartition:
    """Disjoint split of a registry into two non-empty mode subsets."""

    registry: ModeRegistry
    side_1: tuple[Mode, ...]
    side_2: tuple[Mode, ...]

    def __post_init__(self):
        s1, s2 = set(self.side_1), set(self.side_2)
        if not s1 or not s2:
            raise UsageError("both sides of a bipartition must be non-empty")
        if s1 & s2:
            raise UsageError("bipartition sides must be disjoint")
        if s1 | s2 != set(self.registry.modes):
            raise UsageError("bipartition sides must cover the whole registry")

    @classmethod
    def split(cls, registry: ModeRegistry, side_1: Sequence[Mode]) -> "Bipartition":
        s1 = tuple(side_1)
        s2 = tuple(m for m in registry if m not in set(s1))
        return cls(registry, s1, s2)

    @classmethod
    def by_spatial(cls, registry: ModeRegistry, labels: Sequence[str]) -> "Bipartition":
        wanted = set(labels)
        return cls.split(registry, [m for m in registry if m.spatial in wanted])

    @classmethod
    def left_right(cls, registry: ModeRegistry) -> "Bipartition":
        return cls.by_spatial(registry, ["L"])

    @classmethod
    def up_down(cls, registry: ModeRegistry) -> "Bipartition":
        return cls.split(registry, [m for m in registry if m.internal == "up"])


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix over an explicit occupation basis."""

    modes: tuple[Mode, ...]
    basis: tuple[tuple, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (len(self.basis), len(self.basis)):
            raise UsageError("density matrix shape does not match its basis")
        if not np.allclose(m, m.conj().T, atol=ATOL):
            raise UsageError("density matrix must be Hermitian")
        tr = m.trace().real
        if abs(tr - 1.0) > ATOL:
            raise UsageError(f"density matrix trace is {tr:.12g}, expected 1")
        if np.linalg.eigvalsh(m).min() < -ATOL:
            raise UsageError("density matrix has a negative eigenvalue beyond tolerance")
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _amplitude_matrix(state: StateVector, part: Bipartition):
    """Amplitudes as a matrix indexed by (side-1 occupation, side-2 occupation)."""
    reg = state.registry
    idx1 = [reg.index(m) for m in part.side_1]
    idx2 = [reg.index(m) for m in part.side_2]
    entries = {}
    rows, cols = set(), set()
    for occ, amp in state.items():
        r = tuple(occ[i] for i in idx1)
        c = tuple(occ[i] for i in idx2)
        entries[(r, c)] = amp
        rows.add(r)
        cols.add(c)
    row_list = sorted(rows)
    col_list = sorted(cols)
    mat = np.zeros((len(row_list), len(col_list)), dtype=complex)
    rpos = {r: i for i, r in enumerate(row_list)}
    cpos = {c: i for i, c in enumerate(col_list)}
    for (r, c), amp in entries.items():
        mat[rpos[r], cpos[c]] = amp
    return mat, row_list, col_list


def reduce_state(state: StateVector, part: Bipartition, keep: int = 1) -> DensityMatrix:
    """Partial trace of a pure state onto one side of the bipartition."""
    if keep not in (1, 2):
        raise UsageError("keep must be 1 or 2")
    if not state.is_normalized:
        raise UsageError("reduction requires a normalized state")
    mat, rows, cols = _amplitude_matrix(state, part)
    if keep == 1:
        rho = mat @ mat.conj().T
        return DensityMatrix(part.side_1, tuple(rows), rho)
    rho = mat.T @ mat.conj()
    return DensityMatrix(part.side_2, tuple(cols), rho)


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits; eigenvalues below 1e-12 are dropped."""
    evals = rho.eigenvalues()
    return float(-sum(lam * math.log2(lam) for lam in evals if lam >= PRUNE_TOL))


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2); equals 1 exactly for pure states."""
    return float((rho.matrix @ rho.matrix).trace().real)


def schmidt_values(state: StateVector, part: Bipartition) -> np.ndarray:
    """Schmidt coefficients (descending singular values of the amplitude matrix)."""
    if not state.is_normalized:
        raise UsageError("Schmidt decomposition requires a normalized state")
    mat, _, _ = _amplitude_matrix(state, part)
    return np.linalg.svd(mat, compute_uv=False)


def negativity(state: StateVector, part: Bipartition) -> float:
    """Entanglement negativity of a pure state: ((sum_i s_i)^2 - 1) / 2."""
    if state.sector is None:
        raise UsageError("negativity is implemented for fixed-sector pure states")
    s = schmidt_values(state, part)
    return max((float(s.sum()) ** 2 - 1.0) / 2.0, 0.0)


def is_mode_separable(state: StateVector, part: Bipartition, tol: float = ATOL) -> bool:
    """True iff the state has Schmidt rank 1 across the bipartition."""
    s = schmidt_values(state, part)
    return len(s) < 2 or float(s[1]) <= tol


def _check_side_support(poly: LadderPolynomial, side: Sequence[Mode], which: str) -> None:
    extra = poly.support() - set(side)
    if extra:
        raise UsageError(
            f"operator {which} acts on modes {sorted(str(m) for m in extra)} outside its side"
        )


def factorization_witness(state: StateVector, part: Bipartition,
                          op_1: LadderPolynomial, op_2: LadderPolynomial) -> float:
    """|<A1 A2> - <A1><A2>| for operators local to the two sides.

    A value above tolerance certifies mode entanglement across the
    bipartition; separable states give zero for every admissible pair.
    """
    _check_side_support(op_1, part.side_1, "A1")
    _check_side_support(op_2, part.side_2, "A2")
    joint = expectation(op_1 * op_2, state)
    split = expectation(op_1, state) * expectation(op_2, state)
    return abs(joint - split)


def symmetrized_observable(registry: ModeRegistry,
                           side_1: Sequence[Mode], x_matrix,
                           side_2: Sequence[Mode], y_matrix) -> LadderPolynomial:
    """Two-body observable sum (X ⊗ Y)_{ik,jl} a†_{ψi} a†_{φk} a_{φl} a_{ψj}.

    Built directly in normal-ordered form; equals the operator product
    X_sym * Y_sym of the corresponding one-body operators because the two
    mode sets are disjoint.
    """
    if set(side_1) & set(side_2):
        raise UsageError("the two mode sets must be disjoint")
    x = np.asarray(x_matrix, dtype=complex)
    y = np.asarray(y_matrix, dtype=complex)
    n1, n2 = len(side_1), len(side_2)
    if x.shape != (n1, n1) or y.shape != (n2, n2):
        raise UsageError("matrices must be square over their mode subsets")
    i1 = [registry.index(m) for m in side_1]
    i2 = [registry.index(m) for m in side_2]
    terms = {}
    for i in range(n1):
        for j in range(n1):
            for k in range(n2):
                for l in range(n2):
                    c = x[i, j] * y[k, l]
                    if abs(c) < PRUNE_TOL:
                        continue
                    key = (tuple(sorted((i1[i], i2[k]))), tuple(sorted((i2[l], i1[j]))))
                    terms[key] = terms.get(key, 0j) + c
    return LadderPolynomial(registry, terms)


def one_body_on_side(registry: ModeRegistry, side: Sequence[Mode], matrix) -> LadderPolynomial:
    """Second-quantized one-body operator supported on one side's modes."""
    return one_body_operator(registry, side, matrix)


def side_number_operator(registry: ModeRegistry, side: Sequence[Mode]) -> LadderPolynomial:
    """Total number operator of a mode subset."""
    total = LadderPolynomial.zero(registry)
    for m in side:
        total = total + LadderPolynomial.number(registry, m)
    return total
