"""Particle-based entanglement notions: selective removal, locality, the paradox."""

import math

import numpy as np
import pytest

from modeforge import (
    DomainError,
    LadderPolynomial,
    UndefinedReductionError,
    UsageError,
    partial_project,
    tensor,
)
from modeforge.entanglement import entropy, purity
from modeforge.nolabel import (
    SubspaceSpec,
    nolabel_local_operator,
    nolabel_rho_n,
    particle_separability_verdict,
    single_particle_rdm,
    swap_paradox,
)
from modeforge.states import (
    L_DOWN,
    L_UP,
    R_DOWN,
    TwoModeSpec,
    X_UP,
    Y_DOWN,
    fock_state,
    generic_two_mode,
    noon_state,
    su2_coherent,
    teleport_registry,
    uniform_state,
)

from conftest import random_fixed_n_state


def _random_profile_state(registry, rng, n_total):
    z = rng.normal(size=n_total + 1) + 1j * rng.normal(size=n_total + 1)
    return generic_two_mode(TwoModeSpec(registry, L_UP, R_DOWN, n_total),
                            z / np.linalg.norm(z), renormalize=True)


def test_removal_matrix_is_pure_for_two_mode_states(registry):
    rng = np.random.default_rng(71)
    for n_total in range(2, 9):
        for _ in range(3):
            state = _random_profile_state(registry, rng, n_total)
            for n in range(1, n_total):
                rho = nolabel_rho_n(state, SubspaceSpec.left_site(), n)
                assert entropy(rho) <= 1e-9
                assert abs(purity(rho) - 1.0) <= 1e-9


def test_removal_matrix_trace_and_support(registry):
    state = uniform_state(TwoModeSpec(registry, L_UP, R_DOWN, 4))
    rho = nolabel_rho_n(state, SubspaceSpec.left_site(), 2)
    assert abs(rho.matrix.trace().real - 1.0) < 1e-12
    assert all(sum(occ) == 2 for occ in rho.basis)


def test_removal_matrix_matches_shifted_profile(registry):
    # removing n particles from the first mode keeps the upper amplitudes,
    # shifted down and renormalized
    rng = np.random.default_rng(72)
    n_total, n = 5, 2
    z = rng.normal(size=n_total + 1) + 1j * rng.normal(size=n_total + 1)
    z /= np.linalg.norm(z)
    state = generic_two_mode(TwoModeSpec(registry, L_UP, R_DOWN, n_total), z)
    rho = nolabel_rho_n(state, SubspaceSpec.left_site(), n)
    weights = np.array([abs(z[ell]) ** 2 * math.factorial(ell) // 1
                        for ell in range(n_total + 1)])
    expected = {}
    for ell in range(n, n_total + 1):
        # ladder factor sqrt(ell!/(ell-n)!) from the n annihilations
        factor = math.sqrt(math.factorial(ell) / math.factorial(ell - n))
        occ = [0] * 4
        occ[registry.index(L_UP)] = ell - n
        occ[registry.index(R_DOWN)] = n_total - ell
        expected[tuple(occ)] = z[ell] * factor
    norm = math.sqrt(sum(abs(a) ** 2 for a in expected.values()))
    basis_pos = {occ: i for i, occ in enumerate(rho.basis)}
    for occ_i, amp_i in expected.items():
        for occ_j, amp_j in expected.items():
            got = rho.matrix[basis_pos[occ_i], basis_pos[occ_j]]
            want = (amp_i / norm) * (amp_j / norm).conjugate()
            assert abs(got - want) < 1e-9


def test_removal_matrix_basis_rotation_invariance(registry):
    rng = np.random.default_rng(73)
    for n_total in (3, 5):
        state = _random_profile_state(registry, rng, n_total)
        for n in (1, 2):
            plain = nolabel_rho_n(state, SubspaceSpec.left_site(), n)
            theta = float(rng.uniform(0, 2 * math.pi))
            phase = float(rng.uniform(0, 2 * math.pi))
            u = np.array([
                [math.cos(theta), -math.sin(theta) * np.exp(1j * phase)],
                [math.sin(theta) * np.exp(-1j * phase), math.cos(theta)],
            ])
            rotated = nolabel_rho_n(state, SubspaceSpec.left_site(), n, rotation=u)
            assert plain.basis == rotated.basis
            assert np.abs(plain.matrix - rotated.matrix).max() < 1e-9


def test_removal_needs_support(registry):
    # all particles in (R,down): removing from the L site has no support
    state = fock_state(TwoModeSpec(registry, L_UP, R_DOWN, 3), 0)
    with pytest.raises(UndefinedReductionError):
        nolabel_rho_n(state, SubspaceSpec.left_site(), 1)


def test_removal_count_validation(registry):
    state = uniform_state(TwoModeSpec(registry, L_UP, R_DOWN, 3))
    with pytest.raises(DomainError):
        nolabel_rho_n(state, SubspaceSpec.left_site(), 0)
    with pytest.raises(DomainError):
        nolabel_rho_n(state, SubspaceSpec.left_site(), 4)
    with pytest.raises(UsageError):
        nolabel_rho_n(state, SubspaceSpec.left_site(), 1, rotation=np.ones((2, 2)))


def test_local_operator_identity_is_site_number(registry):
    op = nolabel_local_operator(np.eye(2), "L", 1, registry)
    expected = (LadderPolynomial.number(registry, L_UP)
                + LadderPolynomial.number(registry, L_DOWN))
    assert (op - expected).is_zero


def test_local_operator_projector(registry):
    op = nolabel_local_operator(np.array([[1.0, 0.0], [0.0, 0.0]]), "L", 1, registry)
    assert (op - LadderPolynomial.number(registry, L_UP)).is_zero


def test_local_operator_supported_on_one_site(registry):
    rng = np.random.default_rng(74)
    o = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    op = nolabel_local_operator(o + o.conj().T, "L", 2, registry)
    assert all(m.spatial == "L" for m in op.support())


def test_local_operators_commute_across_sites(registry):
    rng = np.random.default_rng(75)
    for _ in range(10):
        ol = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        orr = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        left = nolabel_local_operator(ol, "L", 1, registry)
        right = nolabel_local_operator(orr, "R", 1, registry)
        comm = left * right - right * left
        for _ in range(3):
            s = random_fixed_n_state(registry, rng, total=3)
            assert comm.apply(s).norm() < 1e-9


def test_two_particle_local_operator_kron_lift(registry):
    rng = np.random.default_rng(76)
    o = rng.normal(size=(2, 2))
    lifted = nolabel_local_operator(o, "L", 2, registry)
    explicit = nolabel_local_operator(np.kron(o, o), "L", 2, registry)
    assert (lifted - explicit).is_zero


def test_phase_unitary_generator_is_site_local(registry):
    # the interferometer's factors act on single sites, hence are local in
    # the site-restricted sense as well
    gen_left = nolabel_local_operator(np.diag([1.0, 0.0]), "L", 1, registry)
    assert (gen_left - LadderPolynomial.number(registry, L_UP)).is_zero
    assert {m.spatial for m in gen_left.support()} == {"L"}


def test_single_particle_rdm_rank(registry):
    coh = su2_coherent(TwoModeSpec(registry, L_UP, R_DOWN, 4), 0.3, 0.5)
    evals = np.linalg.eigvalsh(single_particle_rdm(coh))
    assert abs(evals[-1] - 4.0) < 1e-9
    assert abs(evals[:-1]).max() < 1e-9


def test_separability_verdicts(registry):
    rng = np.random.default_rng(77)
    for _ in range(10):
        xi = float(rng.uniform(0, 1))
        phi = float(rng.uniform(0, 2 * math.pi))
        n = int(rng.integers(1, 7))
        s = su2_coherent(TwoModeSpec(registry, L_UP, R_DOWN, n), xi, phi)
        assert particle_separability_verdict(s)
    assert not particle_separability_verdict(
        noon_state(TwoModeSpec(registry, L_UP, R_DOWN, 2)))
    reg = teleport_registry()
    joint = tensor(su2_coherent(TwoModeSpec(reg, X_UP, Y_DOWN, 2), 0.5),
                   su2_coherent(TwoModeSpec(reg, L_UP, R_DOWN, 2), 0.5))
    assert not particle_separability_verdict(joint)


def test_projector_is_idempotent():
    reg = teleport_registry()
    target = su2_coherent(TwoModeSpec(reg, Y_DOWN, L_UP, 2), 0.5, 0.3)
    joint = tensor(su2_coherent(TwoModeSpec(reg, X_UP, Y_DOWN, 2), 0.4),
                   su2_coherent(TwoModeSpec(reg, L_UP, R_DOWN, 2), 0.6))
    once = partial_project(target, [Y_DOWN, L_UP], joint)
    back = tensor(target, once)
    twice = partial_project(target, [Y_DOWN, L_UP], back)
    assert (twice - once).norm() < 1e-12


def test_swap_paradox_symmetric_point():
    result = swap_paradox(0.5, 0.5, 0.5, n=2)
    assert abs(result.probability - 10.0 / 64.0) < 1e-12
    assert result.negativity_xr > 0.1
    assert abs(result.negativity_xr - (2.0 + 8.0 * math.sqrt(2)) / 20.0) < 1e-9


def test_swap_paradox_amplitude_profile():
    # residual amplitudes follow C(n,k)^(3/2) times the parameter powers,
    # term by term up to overall normalization and global phase
    rng = np.random.default_rng(78)
    for _ in range(5):
        zeta, xi, eta = (float(x) for x in rng.uniform(0.15, 0.85, size=3))
        theta, phi, omega = (float(x) for x in rng.uniform(0, 2 * math.pi, size=3))
        n = int(rng.integers(1, 5))
        result = swap_paradox(zeta, xi, eta, theta, phi, omega, n)
        # real half-powers with the phases written out; the compact display
        # folds e^{i(theta+phi)} and e^{-i omega} into the bases
        profile = np.array([
            math.comb(n, k) ** 1.5
            * (eta * (1 - xi) * (1 - zeta)) ** ((n - k) / 2.0)
            * (xi * zeta * (1 - eta)) ** (k / 2.0)
            * np.exp(1j * (theta + phi) * (n - k))
            * np.exp(-1j * omega * k)
            for k in range(n + 1)
        ])
        profile /= np.linalg.norm(profile)
        got = np.array([result.residual_xr.amplitude((k, n - k)) for k in range(n + 1)])
        overlap = abs(np.vdot(profile, got))
        assert abs(overlap - 1.0) < 1e-9
        assert np.abs(np.abs(got) - np.abs(profile)).max() < 1e-9


def test_swap_paradox_probability_oracle():
    rng = np.random.default_rng(79)
    for _ in range(5):
        zeta, xi, eta = (float(x) for x in rng.uniform(0.1, 0.9, size=3))
        n = int(rng.integers(1, 5))
        result = swap_paradox(zeta, xi, eta, n=n)
        expected = sum(
            math.comb(n, k) ** 3
            * (eta * (1 - xi) * (1 - zeta)) ** (n - k)
            * (xi * zeta * (1 - eta)) ** k
            for k in range(n + 1)
        )
        assert abs(result.probability - expected) < 1e-9


def test_swap_paradox_ingredients_are_particle_separable():
    reg = teleport_registry()
    for state in (su2_coherent(TwoModeSpec(reg, X_UP, Y_DOWN, 2), 0.5),
                  su2_coherent(TwoModeSpec(reg, L_UP, R_DOWN, 2), 0.5),
                  su2_coherent(TwoModeSpec(reg, Y_DOWN, L_UP, 2), 0.5)):
        assert particle_separability_verdict(state)


def test_swap_paradox_initial_state_uncorrelated():
    reg = teleport_registry()
    from modeforge.entanglement import Bipartition, is_mode_separable

    joint = tensor(su2_coherent(TwoModeSpec(reg, X_UP, Y_DOWN, 2), 0.5),
                   su2_coherent(TwoModeSpec(reg, L_UP, R_DOWN, 2), 0.5))
    part = Bipartition.split(reg, [X_UP, Y_DOWN])
    assert is_mode_separable(joint, part)


def test_swap_paradox_product_edge_cases():
    assert swap_paradox(0.5, 0.0, 0.5, n=2).negativity_xr < 1e-12
    assert swap_paradox(0.0, 0.5, 0.5, n=2).negativity_xr < 1e-12


def test_swap_paradox_zero_probability():
    # eta = 1 targets only (Y,down); zeta = 1 leaves (Y,down) empty while the
    # resource cannot fill it, so outcome 0 never fires
    with pytest.raises(UndefinedReductionError):
        swap_paradox(1.0, 1.0, 1.0, n=2)


def test_swap_paradox_parameter_validation():
    with pytest.raises(DomainError):
        swap_paradox(1.2, 0.5, 0.5)
    with pytest.raises(DomainError):
        swap_paradox(0.5, 0.5, 0.5, n=0)
