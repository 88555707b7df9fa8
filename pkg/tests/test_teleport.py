"""Bell-like bases, measurement statistics, correction, and fidelities."""

import math

import numpy as np
import pytest

from modeforge import DomainError, UsageError, inner, tensor
from modeforge.states import (
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
    two_fock_superposition,
    uniform_state,
)
from modeforge.teleport import (
    COMPLETE,
    RESTRICTED,
    ProtocolConfig,
    bell_indices,
    bell_measure,
    bell_state,
    correct,
    fidelity_closed_form,
    fidelity_monte_carlo,
    fidelity_simulated,
    phase_count,
    protocol_fidelity_for_input,
    swap_entanglement,
    teleported_overlap,
)


@pytest.fixture
def reg():
    return teleport_registry()


def _resource(reg, kind, n, **kw):
    spec = TwoModeSpec(reg, L_UP, R_DOWN, n)
    if kind == "fock":
        return fock_state(spec, kw.get("l", n // 2))
    if kind == "two_fock":
        return two_fock_superposition(spec, kw.get("l1", 0), kw.get("l2", n),
                                      kw.get("xi", 0.4), kw.get("phi", 0.3))
    if kind == "unif":
        return uniform_state(spec, linear_phase=kw.get("c", 0.0))
    return su2_coherent(spec, kw.get("xi", 0.5), kw.get("phi", 0.0))


def _random_input(reg, rng, m):
    z = rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1)
    return generic_two_mode(TwoModeSpec(reg, X_UP, Y_DOWN, m),
                            z / np.linalg.norm(z), renormalize=True)


def test_phase_count_cases():
    assert phase_count(-2, 3, 5) == 2
    assert phase_count(0, 3, 5) == 4
    assert phase_count(2, 3, 5) == 4
    assert phase_count(4, 3, 5) == 2
    assert phase_count(5, 3, 5) == 1
    with pytest.raises(DomainError):
        phase_count(6, 3, 5)


def test_bell_states_are_normalized(reg):
    for m, n in ((1, 1), (2, 4), (3, 5)):
        for variant in (RESTRICTED, COMPLETE):
            for ell, lam in bell_indices(m, n, variant):
                b = bell_state(reg, ell, lam, m, n, variant)
                assert abs(b.norm() - 1.0) < 1e-12


def test_complete_family_is_orthonormal(reg):
    for m, n in ((1, 3), (2, 4), (3, 6), (6, 6)):
        idx = bell_indices(m, n, COMPLETE)
        states = [bell_state(reg, ell, lam, m, n, COMPLETE) for ell, lam in idx]
        gram = np.array([[inner(a, b) for b in states] for a in states])
        assert np.abs(gram - np.eye(len(idx))).max() < 1e-12


def test_complete_family_count(reg):
    for m in range(0, 5):
        for n in range(m, 7):
            assert len(bell_indices(m, n, COMPLETE)) == (m + 1) * (n + 1)


def test_restricted_family_spans_expected_fraction():
    for m in range(0, 5):
        for n in range(m, 7):
            restricted = len(bell_indices(m, n, RESTRICTED))
            complete = len(bell_indices(m, n, COMPLETE))
            assert restricted / complete == pytest.approx((n - m + 1) / (n + 1))


def test_bell_state_index_validation(reg):
    with pytest.raises(DomainError):
        bell_state(reg, 3, 0, 2, 4, RESTRICTED)
    with pytest.raises(DomainError):
        bell_state(reg, -3, 0, 2, 4, COMPLETE)
    with pytest.raises(DomainError):
        bell_state(reg, 0, 3, 2, 4, COMPLETE)


def test_complete_measurement_probabilities_sum_to_one(reg):
    rng = np.random.default_rng(61)
    for m, n in ((1, 2), (2, 4), (3, 3)):
        config = ProtocolConfig(m, n, _resource(reg, "coh", n, xi=0.35, phi=1.1))
        joint = tensor(_random_input(reg, rng, m), config.resource)
        outs = bell_measure(joint, config)
        assert abs(sum(o.probability for o in outs) - 1.0) < 1e-9
        assert all(0.0 <= o.probability <= 1.0 + 1e-12 for o in outs)
        for o in outs:
            assert abs(o.post_state.norm() - 1.0) < 1e-9


def test_restricted_capture_for_uniform_resource(reg):
    rng = np.random.default_rng(62)
    for m, n in ((1, 3), (2, 4), (2, 6)):
        resource = _resource(reg, "unif", n, c=0.7)
        config = ProtocolConfig(m, n, resource, RESTRICTED)
        joint = tensor(_random_input(reg, rng, m), resource)
        captured = sum(o.probability for o in bell_measure(joint, config))
        assert abs(captured - (n - m + 1) / (n + 1)) < 1e-9


def test_in_range_outcomes_teleport_exactly_with_uniform_resource(reg):
    rng = np.random.default_rng(63)
    m, n = 2, 5
    resource = _resource(reg, "unif", n, c=1.3)
    config = ProtocolConfig(m, n, resource, COMPLETE)
    input_state = _random_input(reg, rng, m)
    joint = tensor(input_state, resource)
    for o in bell_measure(joint, config):
        if 0 <= o.ell <= n - m:
            ov = teleported_overlap(o, config, input_state)
            assert abs(abs(ov) - 1.0) < 1e-9


def test_correction_is_identity_for_zero_phases(reg):
    # lam = 0 and a positive-amplitude resource leave nothing to correct
    m, n = 2, 4
    resource = _resource(reg, "unif", n)
    config = ProtocolConfig(m, n, resource, COMPLETE)
    joint = tensor(_random_input(reg, np.random.default_rng(64), m), resource)
    for o in bell_measure(joint, config):
        if o.lam == 0:
            assert (correct(o, config) - o.post_state).norm() < 1e-12


def test_single_particle_regression(reg):
    # N = M = 1: in-range outcomes project onto single-particle Bell-like
    # states and teleport the single-particle input exactly
    rng = np.random.default_rng(65)
    resource = _resource(reg, "unif", 1)
    config = ProtocolConfig(1, 1, resource, RESTRICTED)
    input_state = _random_input(reg, rng, 1)
    joint = tensor(input_state, resource)
    outs = bell_measure(joint, config)
    assert {o.lam for o in outs} == {0, 1}
    for o in outs:
        assert abs(o.probability - 0.25) < 1e-9
        assert o.post_state.sector == 1
        assert abs(abs(teleported_overlap(o, config, input_state)) - 1.0) < 1e-9


def test_fock_resource_fidelity(reg):
    for m, n in ((2, 4), (1, 5), (3, 6)):
        for ell in (0, n // 2, n):
            resource = _resource(reg, "fock", n, l=ell)
            f = fidelity_closed_form(resource, m)
            assert abs(f - 2.0 / (m + 2)) < 1e-12
            sim = fidelity_simulated(ProtocolConfig(m, n, resource))
            assert abs(sim.value - f) < 1e-9


def test_uniform_resource_fidelity(reg):
    assert abs(fidelity_closed_form(_resource(reg, "unif", 9), 3) - 0.9) < 1e-12
    sim = fidelity_simulated(ProtocolConfig(2, 6, _resource(reg, "unif", 6, c=0.4)))
    assert abs(sim.value - (1.0 - 2.0 / 21.0)) < 1e-9


def test_simulated_matches_closed_form_all_families(reg):
    rng = np.random.default_rng(66)
    for kind in ("fock", "two_fock", "unif", "coh"):
        for n in (2, 5, 8):
            for m in sorted({1, n // 2, n}):
                resource = _resource(reg, kind, n, xi=float(rng.uniform(0.1, 0.9)),
                                     phi=float(rng.uniform(0, 6)), c=float(rng.uniform(0, 2)))
                closed = fidelity_closed_form(resource, m)
                sim = fidelity_simulated(ProtocolConfig(m, n, resource))
                assert abs(sim.value - closed) < 1e-9
                assert sim.complete
                assert abs(sim.captured_probability - 1.0) < 1e-9


def test_zero_m_is_perfect(reg):
    sim = fidelity_simulated(ProtocolConfig(0, 3, _resource(reg, "coh", 3)))
    assert abs(sim.value - 1.0) < 1e-12


def test_uniform_fidelity_monotone_in_n(reg):
    m = 2
    values = [fidelity_simulated(ProtocolConfig(m, n, _resource(reg, "unif", n))).value
              for n in range(m, 11)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_restricted_variant_flags_partial_capture(reg):
    m, n = 2, 4
    resource = _resource(reg, "unif", n)
    sim = fidelity_simulated(ProtocolConfig(m, n, resource, RESTRICTED))
    assert not sim.complete
    assert sim.captured_probability < 1.0 - 1e-9
    full = fidelity_simulated(ProtocolConfig(m, n, resource, COMPLETE))
    assert sim.value < full.value


def test_outcome_stats_decompose_fidelity(reg):
    sim = fidelity_simulated(ProtocolConfig(2, 4, _resource(reg, "coh", 4, xi=0.3)))
    total = sum(o.probability * o.overlap for o in sim.outcomes)
    assert abs(total - sim.value) < 1e-12


def test_monte_carlo_agrees_within_three_sigma(reg):
    config = ProtocolConfig(2, 5, _resource(reg, "coh", 5, xi=0.4, phi=0.8))
    exact = fidelity_simulated(config).value
    mc = fidelity_monte_carlo(config, samples=120_000, seed=2024)
    assert abs(mc.value - exact) <= 3.0 * mc.stderr
    again = fidelity_monte_carlo(config, samples=120_000, seed=2024)
    assert again.value == mc.value  # deterministic for a fixed seed


def test_monte_carlo_restricted_variant(reg):
    config = ProtocolConfig(2, 5, _resource(reg, "unif", 5, c=0.6), RESTRICTED)
    exact = fidelity_simulated(config).value
    mc = fidelity_monte_carlo(config, samples=120_000, seed=31)
    assert abs(mc.value - exact) <= 3.0 * mc.stderr


def test_mechanical_protocol_matches_analytic_average(reg):
    # run the full measure/correct/compare pipeline for explicit inputs and
    # compare with the per-outcome Haar statistics restricted to that input
    rng = np.random.default_rng(67)
    m, n = 2, 3
    resource = _resource(reg, "two_fock", n, l1=0, l2=2, xi=0.35, phi=0.9)
    config = ProtocolConfig(m, n, resource, COMPLETE)
    abs_alpha = [abs(config.resource_amplitude(j)) for j in range(n + 1)]
    for _ in range(5):
        input_state = _random_input(reg, rng, m)
        ix = reg.index(X_UP)
        weights = {occ[ix]: abs(amp) ** 2 for occ, amp in input_state.items()}
        expected = 0.0
        for ell in range(-m, n + 1):
            window = sum(weights.get(k, 0.0) * abs_alpha[k + ell]
                         for k in range(max(0, -ell), min(m, n - ell) + 1))
            expected += window ** 2
        assert abs(protocol_fidelity_for_input(input_state, config) - expected) < 1e-9


def test_swap_entanglement_product_resource_generates_nothing(reg):
    rng = np.random.default_rng(68)
    config = ProtocolConfig(2, 4, _resource(reg, "fock", 4, l=2))
    report = swap_entanglement(_random_input(reg, rng, 2), config)
    assert report.initial_negativity == 0.0
    assert all(o.negativity < 1e-9 for o in report.outcomes)
    assert report.average_negativity < 1e-9


def test_swap_entanglement_entangled_input_uniform_resource(reg):
    m, n = 2, 4
    input_state = noon_state(TwoModeSpec(reg, X_UP, Y_DOWN, m))
    config = ProtocolConfig(m, n, _resource(reg, "unif", n))
    report = swap_entanglement(input_state, config)
    assert report.initial_negativity == 0.0
    assert report.average_negativity > 0.0
    assert any(o.negativity > 0.1 for o in report.outcomes)


def test_config_validation(reg):
    good = _resource(reg, "unif", 3)
    with pytest.raises(DomainError):
        ProtocolConfig(4, 3, good, RESTRICTED)
    with pytest.raises(UsageError):
        ProtocolConfig(2, 4, good)  # sector mismatch
    bad_modes = noon_state(TwoModeSpec(reg, X_UP, Y_DOWN, 3))
    with pytest.raises(UsageError):
        ProtocolConfig(2, 3, bad_modes)
    with pytest.raises(UsageError):
        bell_measure(noon_state(TwoModeSpec(reg, X_UP, Y_DOWN, 3)),
                     ProtocolConfig(2, 3, good))


def test_fidelity_closed_form_validation(reg):
    with pytest.raises(DomainError):
        fidelity_closed_form(_resource(reg, "unif", 3), -1)
    mixed_sector = (fock_state(TwoModeSpec(reg, L_UP, R_DOWN, 2), 1) * math.sqrt(0.5)
                    + fock_state(TwoModeSpec(reg, L_UP, R_DOWN, 3), 1) * math.sqrt(0.5))
    with pytest.raises(UsageError):
        fidelity_closed_form(mixed_sector, 1)
