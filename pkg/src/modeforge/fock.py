"""Exact sparse bosonic Fock-space arithmetic.

States are sparse maps from occupation tuples to complex amplitudes over a
fixed, ordered mode registry.  Observables and operations are normal-ordered
polynomials in the mode creation/annihilation operators; products are
rewritten into normal order with the bosonic commutation rule
``a_m a†_m' - a†_m' a_m = delta_{m m'}``.

Ladder factors (sqrt(n), sqrt(n+1), ...) are accumulated as exact integer
products before a single square root, so factorial-sized normalizations stay
exact for any particle number representable in double precision.
"""

from __future__ import annotations

import math
from collections import Counter
from itertools import product as _iproduct
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import ConfigurationError, DomainError, UsageError

#: comparison tolerance for derived quantities (norms, expectation values)
ATOL = 1e-9
#: amplitudes and coefficients below this magnitude are pruned
PRUNE_TOL = 1e-12

INTERNAL_LABELS = ("up", "down")


class Mode(NamedTuple):
    """A single-particle mode: spatial label paired with an internal label."""

    spatial: str
    internal: str

    def __str__(self) -> str:
        return f"{self.spatial},{self.internal}"


def mode(spatial: str, internal: str) -> Mode:
    """Build a validated mode; internal label must be 'up' or 'down'."""
    if not isinstance(spatial, str) or not spatial:
        raise DomainError(f"spatial label must be a non-empty string, got {spatial!r}")
    if internal not in INTERNAL_LABELS:
        raise DomainError(f"internal label must be one of {INTERNAL_LABELS}, got {internal!r}")
    return Mode(spatial, internal)


class ModeRegistry:
    """Ordered collection of distinct modes; fixes the occupation-tuple layout."""

    __slots__ = ("_modes", "_index")

    def __init__(self, modes: Iterable[Mode | Sequence[str]]):
        mods = tuple(mode(*m) for m in modes)
        if not mods:
            raise ConfigurationError("a mode registry needs at least one mode")
        if len(set(mods)) != len(mods):
            raise ConfigurationError(f"registry modes must be unique, got {mods}")
        self._modes = mods
        self._index = {m: i for i, m in enumerate(mods)}

    @property
    def modes(self) -> tuple[Mode, ...]:
        return self._modes

    def index(self, m: Mode) -> int:
        try:
            return self._index[m]
        except KeyError:
            raise UsageError(f"mode {m} is not in this registry") from None

    def __contains__(self, m: Mode) -> bool:
        return m in self._index

    def __len__(self) -> int:
        return len(self._modes)

    def __iter__(self) -> Iterator[Mode]:
        return iter(self._modes)

    def __eq__(self, other) -> bool:
        return isinstance(other, ModeRegistry) and self._modes == other._modes

    def __hash__(self) -> int:
        return hash(self._modes)

    def __repr__(self) -> str:
        return f"ModeRegistry({[str(m) for m in self._modes]})"


Occupation = tuple  # occupation-number tuple, one entry per registry mode


class StateVector:
    """Sparse Fock-space vector: occupation tuple -> complex amplitude.

    The total-particle ``sector`` is derived on construction: it is set when
    every stored occupation carries the same particle number and cleared
    (None) otherwise.  Amplitudes below PRUNE_TOL are dropped.
    """

    __slots__ = ("registry", "_amps", "sector")

    def __init__(self, registry: ModeRegistry, amplitudes: Mapping[Occupation, complex]):
        n_modes = len(registry)
        amps: dict[Occupation, complex] = {}
        totals: set[int] = set()
        for occ, a in amplitudes.items():
            a = complex(a)
            if abs(a) < PRUNE_TOL:
                continue
            occ = tuple(int(n) for n in occ)
            if len(occ) != n_modes:
                raise UsageError(f"occupation {occ} does not match registry size {n_modes}")
            if any(n < 0 for n in occ):
                raise UsageError(f"negative occupation in {occ}")
            amps[occ] = a
            totals.add(sum(occ))
        self.registry = registry
        self._amps = amps
        self.sector = totals.pop() if len(totals) == 1 else None

    # -- inspection ---------------------------------------------------------

    def amplitude(self, occ: Occupation) -> complex:
        return self._amps.get(tuple(occ), 0j)

    def items(self) -> list[tuple[Occupation, complex]]:
        """Amplitudes in lexicographic occupation order (deterministic)."""
        return sorted(self._amps.items())

    def occupations(self) -> list[Occupation]:
        return sorted(self._amps)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._amps.values()))

    @property
    def is_zero(self) -> bool:
        return not self._amps

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm() - 1.0) <= ATOL

    def support_modes(self) -> frozenset[Mode]:
        """Modes that are occupied in at least one basis vector."""
        occupied = set()
        for occ in self._amps:
            for i, n in enumerate(occ):
                if n:
                    occupied.add(self.registry.modes[i])
        return frozenset(occupied)

    def __len__(self) -> int:
        return len(self._amps)

    def __repr__(self) -> str:
        parts = ", ".join(f"{occ}: {a:.6g}" for occ, a in self.items()[:4])
        more = "..." if len(self._amps) > 4 else ""
        return f"StateVector(sector={self.sector}, {{{parts}{more}}})"

    # -- linear structure ---------------------------------------------------

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < PRUNE_TOL:
            raise UsageError("cannot normalize a zero vector")
        return self * (1.0 / n)

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same_registry(self, other)
        out = dict(self._amps)
        for occ, a in other._amps.items():
            out[occ] = out.get(occ, 0j) + a
        return StateVector(self.registry, out)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + (other * -1.0)

    def __mul__(self, scalar: complex) -> "StateVector":
        scalar = complex(scalar)
        return StateVector(self.registry, {occ: a * scalar for occ, a in self._amps.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "StateVector":
        return self * -1.0


def _check_same_registry(a, b) -> None:
    if a.registry != b.registry:
        raise UsageError("operands live on different mode registries")


def vacuum(registry: ModeRegistry) -> StateVector:
    """The zero-particle state |vac>; annihilated by every mode operator."""
    return StateVector(registry, {(0,) * len(registry): 1.0})


def basis_state(registry: ModeRegistry, occ: Occupation) -> StateVector:
    """A single occupation-number basis vector with amplitude one."""
    return StateVector(registry, {tuple(occ): 1.0})


# ---------------------------------------------------------------------------
# Ladder polynomials
# ---------------------------------------------------------------------------

TermKey = tuple  # (create_indices, annihilate_indices), both sorted tuples


class LadderPolynomial:
    """Normal-ordered polynomial in creation/annihilation operators.

    Terms are stored canonically as ``(create, annihilate) -> coefficient``
    where ``create`` and ``annihilate`` are sorted tuples of registry mode
    indices (repeats encode powers).  All creations stand left of all
    annihilations; products re-establish this form via bosonic commutators.
    """

    __slots__ = ("registry", "_terms")

    def __init__(self, registry: ModeRegistry,
                 terms: Mapping[TermKey, complex] | Iterable[tuple[complex, Iterable[int], Iterable[int]]] = ()):
        canon: dict[TermKey, complex] = {}
        if isinstance(terms, Mapping):
            entries = [(c, key[0], key[1]) for key, c in terms.items()]
        else:
            entries = [(c, cr, an) for c, cr, an in terms]
        n_modes = len(registry)
        for c, cr, an in entries:
            cr = tuple(sorted(int(i) for i in cr))
            an = tuple(sorted(int(i) for i in an))
            if any(i < 0 or i >= n_modes for i in cr + an):
                raise UsageError("term references a mode index outside the registry")
            key = (cr, an)
            canon[key] = canon.get(key, 0j) + complex(c)
        self.registry = registry
        self._terms = {k: v for k, v in canon.items() if abs(v) >= PRUNE_TOL}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, registry: ModeRegistry) -> "LadderPolynomial":
        return cls(registry)

    @classmethod
    def identity(cls, registry: ModeRegistry) -> "LadderPolynomial":
        return cls(registry, {((), ()): 1.0})

    @classmethod
    def creator(cls, registry: ModeRegistry, m: Mode) -> "LadderPolynomial":
        return cls(registry, {((registry.index(m),), ()): 1.0})

    @classmethod
    def annihilator(cls, registry: ModeRegistry, m: Mode) -> "LadderPolynomial":
        return cls(registry, {((), (registry.index(m),)): 1.0})

    @classmethod
    def number(cls, registry: ModeRegistry, m: Mode) -> "LadderPolynomial":
        i = registry.index(m)
        return cls(registry, {((i,), (i,)): 1.0})

    # -- inspection ---------------------------------------------------------

    def terms(self) -> list[tuple[TermKey, complex]]:
        return sorted(self._terms.items())

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def support(self) -> frozenset[Mode]:
        """Modes referenced by at least one term."""
        modes = self.registry.modes
        out = set()
        for cr, an in self._terms:
            for i in cr + an:
                out.add(modes[i])
        return frozenset(out)

    def particle_shift(self) -> int | None:
        """Common particle-number shift of all terms, or None if mixed."""
        shifts = {len(cr) - len(an) for cr, an in self._terms}
        if len(shifts) == 1:
            return shifts.pop()
        return None

    def __repr__(self) -> str:
        return f"LadderPolynomial({len(self._terms)} terms)"

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "LadderPolynomial") -> "LadderPolynomial":
        _check_same_registry(self, other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0j) + c
        return LadderPolynomial(self.registry, out)

    def __sub__(self, other: "LadderPolynomial") -> "LadderPolynomial":
        return self + (other * -1.0)

    def __neg__(self) -> "LadderPolynomial":
        return self * -1.0

    def __mul__(self, other):
        if isinstance(other, LadderPolynomial):
            return self._mul_poly(other)
        scalar = complex(other)
        return LadderPolynomial(self.registry, {k: c * scalar for k, c in self._terms.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def _mul_poly(self, other: "LadderPolynomial") -> "LadderPolynomial":
        """Operator product, rewritten into normal order.

        For each mode shared between the left factor's annihilators (power p)
        and the right factor's creators (power q), the rewriting
        a^p a†^q = sum_k k! C(p,k) C(q,k) a†^(q-k) a^(p-k) contributes one
        contraction term per k.
        """
        _check_same_registry(self, other)
        out: dict[TermKey, complex] = {}
        for (c1, a1), x1 in self._terms.items():
            a1c = Counter(a1)
            for (c2, a2), x2 in other._terms.items():
                c2c = Counter(c2)
                shared = sorted(m for m in a1c if m in c2c)
                ranges = [range(min(a1c[m], c2c[m]) + 1) for m in shared]
                for ks in _iproduct(*ranges):
                    weight = 1
                    for m, k in zip(shared, ks):
                        weight *= math.comb(a1c[m], k) * math.comb(c2c[m], k) * math.factorial(k)
                    create = list(c1)
                    annihilate = list(a2)
                    contracted = dict(zip(shared, ks))
                    for m, n in c2c.items():
                        create.extend([m] * (n - contracted.get(m, 0)))
                    for m, n in a1c.items():
                        annihilate.extend([m] * (n - contracted.get(m, 0)))
                    key = (tuple(sorted(create)), tuple(sorted(annihilate)))
                    out[key] = out.get(key, 0j) + x1 * x2 * weight
        return LadderPolynomial(self.registry, out)

    def dagger(self) -> "LadderPolynomial":
        """Formal adjoint: swap creators/annihilators, conjugate coefficients."""
        return LadderPolynomial(
            self.registry, {(an, cr): c.conjugate() for (cr, an), c in self._terms.items()}
        )

    def is_hermitian(self, tol: float = ATOL) -> bool:
        adj = self.dagger()._terms
        keys = set(self._terms) | set(adj)
        return all(abs(self._terms.get(k, 0j) - adj.get(k, 0j)) <= tol for k in keys)

    # -- action on states ---------------------------------------------------

    def apply(self, state: StateVector) -> StateVector:
        """Apply the polynomial with exact sqrt(n) ladder factors."""
        _check_same_registry(self, state)
        out: dict[Occupation, complex] = {}
        for (cr, an), coeff in self._terms.items():
            an_counts = Counter(an)
            cr_counts = Counter(cr)
            for occ, amp in state._amps.items():
                factor = 1  # exact integer product of ladder factors
                new = list(occ)
                alive = True
                for m, k in an_counts.items():
                    n = new[m]
                    if n < k:
                        alive = False
                        break
                    for j in range(k):
                        factor *= n - j
                    new[m] = n - k
                if not alive:
                    continue
                for m, k in cr_counts.items():
                    n = new[m]
                    for j in range(1, k + 1):
                        factor *= n + j
                    new[m] = n + k
                key = tuple(new)
                out[key] = out.get(key, 0j) + coeff * amp * math.sqrt(factor)
        return StateVector(self.registry, out)


def apply_ladder(poly: LadderPolynomial, state: StateVector) -> StateVector:
    """Apply a normal-ordered ladder polynomial to a state."""
    return poly.apply(state)


def one_body_operator(registry: ModeRegistry, modes: Sequence[Mode], matrix) -> LadderPolynomial:
    """sum_ij X[i,j] a†_{m_i} a_{m_j} for a square matrix over the given modes."""
    n = len(modes)
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise UsageError(f"matrix must be {n}x{n} to match the mode list")
    idx = [registry.index(m) for m in modes]
    terms = {}
    for i in range(n):
        for j in range(n):
            c = complex(matrix[i][j])
            if abs(c) >= PRUNE_TOL:
                terms[((idx[i],), (idx[j],))] = c
    return LadderPolynomial(registry, terms)


# ---------------------------------------------------------------------------
# Inner products, moments
# ---------------------------------------------------------------------------

def inner(bra: StateVector, ket: StateVector) -> complex:
    """<bra|ket> = sum over common occupations of conj(bra) * ket."""
    _check_same_registry(bra, ket)
    a, b = bra._amps, ket._amps
    if len(a) > len(b):
        return sum(a[occ].conjugate() * x for occ, x in b.items() if occ in a)
    return sum(x.conjugate() * b[occ] for occ, x in a.items() if occ in b)


def expectation(op: LadderPolynomial, state: StateVector) -> complex:
    """<state| op |state>; real for Hermitian op on any state."""
    return inner(state, op.apply(state))


def variance(op: LadderPolynomial, state: StateVector) -> float:
    """<op^2> - <op>^2 for a Hermitian op; roundoff in [-1e-9, 0) clamps to 0."""
    if not op.is_hermitian():
        raise UsageError("variance requires a Hermitian operator")
    phi = op.apply(state)
    second = inner(phi, phi).real
    first = inner(state, phi).real
    var = second - first * first
    if var < -ATOL:
        raise UsageError(f"variance {var} below the roundoff floor; inconsistent inputs")
    return max(var, 0.0)


# ---------------------------------------------------------------------------
# State composition and slicing
# ---------------------------------------------------------------------------

def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Product of two states on the same registry with disjoint occupied modes."""
    _check_same_registry(a, b)
    overlap = a.support_modes() & b.support_modes()
    if overlap:
        raise UsageError(f"tensor factors both occupy modes {sorted(str(m) for m in overlap)}")
    out: dict[Occupation, complex] = {}
    for oa, xa in a._amps.items():
        for ob, xb in b._amps.items():
            key = tuple(na + nb for na, nb in zip(oa, ob))
            out[key] = out.get(key, 0j) + xa * xb
    return StateVector(a.registry, out)


def restrict(state: StateVector, modes: Sequence[Mode]) -> StateVector:
    """Project the bookkeeping onto a sub-registry; dropped modes must be empty."""
    keep = [state.registry.index(m) for m in modes]
    keep_set = set(keep)
    out = {}
    for occ, amp in state._amps.items():
        if any(n and i not in keep_set for i, n in enumerate(occ)):
            raise UsageError("cannot restrict: a dropped mode is occupied")
        out[tuple(occ[i] for i in keep)] = amp
    return StateVector(ModeRegistry(modes), out)


def embed(state: StateVector, target: ModeRegistry) -> StateVector:
    """Re-express a state on a larger registry containing all its modes."""
    positions = [target.index(m) for m in state.registry]
    out = {}
    for occ, amp in state._amps.items():
        new = [0] * len(target)
        for pos, n in zip(positions, occ):
            new[pos] = n
        out[tuple(new)] = amp
    return StateVector(target, out)


def partial_project(bra: StateVector, modes: Sequence[Mode], ket: StateVector) -> StateVector:
    """Contract <bra| against |ket> over the given modes only.

    ``bra`` must be supported on ``modes`` alone; the result is the
    (unnormalized) residual state on the remaining modes of the registry.
    """
    _check_same_registry(bra, ket)
    idx = [bra.registry.index(m) for m in modes]
    idx_set = set(idx)
    if any(n and i not in idx_set for occ in bra._amps for i, n in enumerate(occ)):
        raise UsageError("bra occupies modes outside the projection subset")
    out: dict[Occupation, complex] = {}
    for occ, amp in ket._amps.items():
        sub = [0] * len(bra.registry)
        rest = list(occ)
        for i in idx:
            sub[i] = occ[i]
            rest[i] = 0
        ba = bra._amps.get(tuple(sub))
        if ba is None:
            continue
        key = tuple(rest)
        out[key] = out.get(key, 0j) + ba.conjugate() * amp
    return StateVector(ket.registry, out)


def shift_occupation(state: StateVector, m: Mode, delta: int) -> StateVector:
    """Relabel occupations of one mode by a constant offset (bookkeeping only)."""
    i = state.registry.index(m)
    out = {}
    for occ, amp in state._amps.items():
        n = occ[i] + delta
        if n < 0:
            raise UsageError(f"occupation shift drives mode {m} negative")
        out[occ[:i] + (n,) + occ[i + 1:]] = amp
    return StateVector(state.registry, out)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def state_to_json(state: StateVector) -> dict:
    """JSON-ready dict: modes, sector, and lexicographically sorted amplitudes."""
    return {
        "modes": [[m.spatial, m.internal] for m in state.registry],
        "sector": state.sector,
        "amps": [[list(occ), a.real, a.imag] for occ, a in state.items()],
    }


def state_from_json(data: Mapping) -> StateVector:
    try:
        registry = ModeRegistry([mode(s, i) for s, i in data["modes"]])
        amps = {tuple(occ): complex(re, im) for occ, re, im in data["amps"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed state JSON: {exc}") from exc
    state = StateVector(registry, amps)
    sector = data.get("sector")
    if sector is not None and state.sector != sector:
        raise DomainError(f"declared sector {sector} does not match amplitudes")
    return state
