"""Constructors for the named two-mode state families.

All constructors return unit-norm states with a fixed total particle number,
built over an explicit pair of modes inside a larger registry.  Amplitude
profiles are always renormalized regardless of any printed prefactor
convention; a diagnostic is logged when that renormalization is non-trivial.
"""

from __future__ import annotations

import cmath
import json
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, UsageError
from .fock import ATOL, Mode, ModeRegistry, StateVector, embed, state_from_json

log = logging.getLogger(__name__)

L_UP = Mode("L", "up")
L_DOWN = Mode("L", "down")
R_UP = Mode("R", "up")
R_DOWN = Mode("R", "down")
X_UP = Mode("X", "up")
Y_DOWN = Mode("Y", "down")


def standard_registry() -> ModeRegistry:
    """The four-mode registry (L,up), (L,down), (R,up), (R,down)."""
    return ModeRegistry([L_UP, L_DOWN, R_UP, R_DOWN])


def teleport_registry() -> ModeRegistry:
    """Registry for the teleportation setting: (X,up), (Y,down), (L,up), (R,down)."""
    return ModeRegistry([X_UP, Y_DOWN, L_UP, R_DOWN])


@dataclass(frozen=True)
class TwoModeSpec:
    """Target mode pair and total particle number for a two-mode state."""

    registry: ModeRegistry
    mode_a: Mode
    mode_b: Mode
    total_n: int

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise DomainError("the two target modes must differ")
        if self.mode_a not in self.registry or self.mode_b not in self.registry:
            raise UsageError("both target modes must belong to the registry")
        if self.total_n < 0:
            raise DomainError(f"total particle number must be >= 0, got {self.total_n}")


def _from_profile(spec: TwoModeSpec, alphas: Sequence[complex]) -> StateVector:
    """State sum_l alphas[l] |l in mode_a, N-l in mode_b>, renormalized."""
    n_total = spec.total_n
    ia = spec.registry.index(spec.mode_a)
    ib = spec.registry.index(spec.mode_b)
    amps = {}
    for ell, a in enumerate(alphas):
        if abs(a) == 0.0:
            continue
        occ = [0] * len(spec.registry)
        occ[ia] = ell
        occ[ib] = n_total - ell
        amps[tuple(occ)] = complex(a)
    state = StateVector(spec.registry, amps)
    norm = state.norm()
    if norm == 0.0:
        raise DomainError("amplitude profile is identically zero")
    if abs(norm - 1.0) > ATOL:
        log.debug("renormalizing two-mode profile (norm was %.12g)", norm)
    return state * (1.0 / norm)


def fock_state(spec: TwoModeSpec, ell: int) -> StateVector:
    """Number state with ell particles in mode_a and N-ell in mode_b."""
    if not 0 <= ell <= spec.total_n:
        raise DomainError(f"occupation {ell} outside [0, {spec.total_n}]")
    alphas = [0.0] * (spec.total_n + 1)
    alphas[ell] = 1.0
    return _from_profile(spec, alphas)


def two_fock_superposition(spec: TwoModeSpec, ell1: int, ell2: int,
                           xi: float, phi: float = 0.0) -> StateVector:
    """sqrt(xi)|ell1> + e^{i phi} sqrt(1-xi)|ell2> over the two-mode sector."""
    if ell1 == ell2:
        raise DomainError("the two Fock components must differ")
    for ell in (ell1, ell2):
        if not 0 <= ell <= spec.total_n:
            raise DomainError(f"occupation {ell} outside [0, {spec.total_n}]")
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"weight xi must lie in [0, 1], got {xi}")
    alphas = [0j] * (spec.total_n + 1)
    alphas[ell1] += math.sqrt(xi)
    alphas[ell2] += cmath.exp(1j * phi) * math.sqrt(1.0 - xi)
    return _from_profile(spec, alphas)


def noon_state(spec: TwoModeSpec) -> StateVector:
    """Equal superposition of all N particles in mode_a and all N in mode_b."""
    if spec.total_n < 1:
        raise DomainError("a NOON state needs at least one particle")
    return two_fock_superposition(spec, spec.total_n, 0, 0.5, 0.0)


def uniform_state(spec: TwoModeSpec, phases: Sequence[float] | None = None,
                  linear_phase: float | None = None) -> StateVector:
    """Uniform-weight superposition of all N+1 Fock components.

    Component phases are arbitrary: pass an explicit list, or a linear
    coefficient c giving phase c*l per component, or neither (all zero).
    """
    n_total = spec.total_n
    if phases is not None and linear_phase is not None:
        raise DomainError("give either explicit phases or a linear coefficient, not both")
    if phases is None:
        c = linear_phase or 0.0
        phases = [c * ell for ell in range(n_total + 1)]
    if len(phases) != n_total + 1:
        raise DomainError(f"expected {n_total + 1} phases, got {len(phases)}")
    w = 1.0 / math.sqrt(n_total + 1)
    return _from_profile(spec, [w * cmath.exp(1j * p) for p in phases])


def su2_coherent(spec: TwoModeSpec, xi: float, phi: float = 0.0) -> StateVector:
    """All N particles in the dressed mode sqrt(xi) a + e^{i phi} sqrt(1-xi) b.

    The occupation amplitudes follow the binomial profile
    sqrt(C(N,l)) xi^(l/2) (1-xi)^((N-l)/2) e^{i phi (N-l)}.
    """
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"weight xi must lie in [0, 1], got {xi}")
    n_total = spec.total_n
    alphas = []
    for ell in range(n_total + 1):
        mag = math.sqrt(math.comb(n_total, ell)) * xi ** (ell / 2.0) * (1.0 - xi) ** ((n_total - ell) / 2.0)
        alphas.append(mag * cmath.exp(1j * phi * (n_total - ell)))
    return _from_profile(spec, alphas)


def generic_two_mode(spec: TwoModeSpec, alphas: Sequence[complex],
                     renormalize: bool = False) -> StateVector:
    """State with an explicit amplitude per Fock component."""
    if len(alphas) != spec.total_n + 1:
        raise DomainError(f"expected {spec.total_n + 1} amplitudes, got {len(alphas)}")
    total = sum(abs(a) ** 2 for a in alphas)
    if total < ATOL:
        raise DomainError("amplitude profile is not normalizable")
    if not renormalize and abs(total - 1.0) > ATOL:
        raise DomainError(f"profile norm^2 is {total:.6g}; pass renormalize=True to accept")
    return _from_profile(spec, alphas)


# ---------------------------------------------------------------------------
# CLI state-spec mini-grammar
# ---------------------------------------------------------------------------
# fock:N=4,l=2 | noon:N=4 | unif:N=4[,c=0.3] | coh:N=4,xi=0.5,phi=0 | custom:@file.json

MAX_PARTICLES = 50


def _parse_fields(body: str, spec_text: str) -> dict[str, str]:
    fields = {}
    for part in body.split(","):
        if not part:
            continue
        if "=" not in part:
            raise DomainError(f"bad state spec {spec_text!r}: expected key=value, got {part!r}")
        key, _, value = part.partition("=")
        if not value:
            raise DomainError(f"bad state spec {spec_text!r}: empty value for {key!r}")
        fields[key.strip()] = value.strip()
    return fields


def _field_int(fields: dict, key: str, spec_text: str) -> int:
    if key not in fields:
        raise DomainError(f"bad state spec {spec_text!r}: missing {key!r}")
    try:
        return int(fields[key])
    except ValueError:
        raise DomainError(f"bad state spec {spec_text!r}: {key!r} must be an integer") from None


def _field_float(fields: dict, key: str, spec_text: str, default=None) -> float:
    if key not in fields:
        if default is None:
            raise DomainError(f"bad state spec {spec_text!r}: missing {key!r}")
        return default
    try:
        return float(fields[key])
    except ValueError:
        raise DomainError(f"bad state spec {spec_text!r}: {key!r} must be a number") from None


def parse_state_spec(text: str, registry: ModeRegistry,
                     mode_a: Mode, mode_b: Mode) -> StateVector:
    """Build a state from the CLI mini-grammar over the given mode pair."""
    kind, sep, body = text.partition(":")
    if not sep:
        raise DomainError(f"bad state spec {text!r}: expected '<family>:<fields>'")
    kind = kind.strip()

    if kind == "custom":
        if not body.startswith("@"):
            raise DomainError(f"bad state spec {text!r}: custom expects '@<file.json>'")
        path = body[1:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise DomainError(f"cannot read state file {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DomainError(f"state file {path!r} is not valid JSON: {exc}") from exc
        state = state_from_json(data)
        if state.registry == registry:
            return state
        if all(m in registry for m in state.registry):
            return embed(state, registry)
        raise DomainError(f"state file {path!r} uses modes outside the target registry")

    fields = _parse_fields(body, text)
    n_total = _field_int(fields, "N", text)
    if not 0 <= n_total <= MAX_PARTICLES:
        raise DomainError(f"bad state spec {text!r}: N must be in [0, {MAX_PARTICLES}]")
    spec = TwoModeSpec(registry, mode_a, mode_b, n_total)

    if kind == "fock":
        return fock_state(spec, _field_int(fields, "l", text))
    if kind == "noon":
        return noon_state(spec)
    if kind == "unif":
        if "c" in fields:
            return uniform_state(spec, linear_phase=_field_float(fields, "c", text))
        return uniform_state(spec)
    if kind == "coh":
        xi = _field_float(fields, "xi", text)
        phi = _field_float(fields, "phi", text, default=0.0)
        return su2_coherent(spec, xi, phi)
    raise DomainError(f"bad state spec {text!r}: unknown family {kind!r}")
