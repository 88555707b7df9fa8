"""Deterministic report builders shared by the service endpoints and the CLI.

Every builder is a pure function from validated parameters to a JSON-ready
dict.  Floats are rounded to 12 significant digits before emission and sweep
rows are computed on a bounded worker pool but gathered in sweep order, so
two runs with the same inputs produce byte-identical output at any worker
count.  MODEFORGE_THREADS caps the pool.
"""

from __future__ import annotations

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DomainError
from .entanglement import (
    Bipartition,
    entropy,
    factorization_witness,
    is_mode_separable,
    negativity,
    purity,
    reduce_state,
    side_number_operator,
)
from .metrology import Generator, closed_form_qfi, qfi, shot_noise_verdict
from .nolabel import SubspaceSpec, nolabel_rho_n, particle_separability_verdict, swap_paradox
from .states import (
    L_UP,
    R_DOWN,
    TwoModeSpec,
    X_UP,
    Y_DOWN,
    fock_state,
    generic_two_mode,
    parse_state_spec,
    standard_registry,
    su2_coherent,
    teleport_registry,
    two_fock_superposition,
    uniform_state,
)
from .teleport import (
    COMPLETE,
    ProtocolConfig,
    fidelity_closed_form,
    fidelity_monte_carlo,
    fidelity_simulated,
)

MAX_SWEEP_N = 50
TOLERANCE = 1e-9


def worker_count() -> int:
    raw = os.environ.get("MODEFORGE_THREADS", "")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise DomainError(f"MODEFORGE_THREADS must be an integer, got {raw!r}") from None
        if value < 1:
            raise DomainError("MODEFORGE_THREADS must be >= 1")
        return value
    return min(8, os.cpu_count() or 1)


def _pool_map(fn, items: list) -> list:
    """Evaluate fn over items on the worker pool, preserving input order."""
    items = list(items)
    if len(items) <= 1 or worker_count() == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(fn, items))


def round_floats(value):
    """Recursively round floats to 12 significant digits for stable output."""
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v) for v in value]
    return value


# ---------------------------------------------------------------------------
# metrology
# ---------------------------------------------------------------------------

_SWEEP_RE = re.compile(r"^N=(\d+)\.\.(\d+)$")


def parse_sweep(text: str) -> list[int]:
    m = _SWEEP_RE.match(text.strip())
    if not m:
        raise DomainError(f"bad sweep {text!r}: expected N=<lo>..<hi>")
    lo, hi = int(m.group(1)), int(m.group(2))
    if not 1 <= lo <= hi <= MAX_SWEEP_N:
        raise DomainError(f"sweep bounds must satisfy 1 <= lo <= hi <= {MAX_SWEEP_N}")
    return list(range(lo, hi + 1))


def _split_spec(spec_text: str) -> tuple[str, dict[str, str]]:
    kind, sep, body = spec_text.partition(":")
    if not sep:
        raise DomainError(f"bad state spec {spec_text!r}: expected '<family>:<fields>'")
    fields = {}
    if kind != "custom":
        for part in body.split(","):
            if not part:
                continue
            key, _, value = part.partition("=")
            fields[key.strip()] = value.strip()
    return kind.strip(), fields


def _respec(spec_text: str, n: int) -> str:
    kind, fields = _split_spec(spec_text)
    if kind == "custom":
        raise DomainError("custom states cannot be swept over N")
    fields["N"] = str(n)
    return kind + ":" + ",".join(f"{k}={v}" for k, v in fields.items())


def _metrology_closed_form(kind: str, fields: dict, generator: str, n: int) -> float | None:
    if generator == "nlr":
        if kind == "fock":
            return 0.0
        if kind == "noon":
            return closed_form_qfi("two_fock_imbalance", xi=0.5, l1=n, l2=0)
        if kind == "unif":
            return closed_form_qfi("uniform_imbalance", n=n)
        if kind == "coh":
            return closed_form_qfi("coherent_imbalance", xi=float(fields["xi"]), n=n)
    if generator == "tlr" and kind == "fock":
        return closed_form_qfi("fock_exchange", l=int(fields["l"]), n=n)
    return None


def metrology_report(state_spec: str, generator: str, sweep: str | None = None) -> dict:
    """Fisher-information rows for one state family, optionally swept over N."""
    registry = standard_registry()
    gen = (Generator.imbalance(registry, L_UP, R_DOWN) if generator == "nlr"
           else Generator.exchange(registry, L_UP, R_DOWN))
    kind, fields = _split_spec(state_spec)
    if sweep is not None:
        points = [(_respec(state_spec, n), n) for n in parse_sweep(sweep)]
    else:
        state = parse_state_spec(state_spec, registry, L_UP, R_DOWN)
        if state.sector is None or state.sector < 1:
            raise DomainError("metrology needs a state with at least one particle")
        points = [(state_spec, state.sector)]

    def one_row(point):
        spec_text, n = point
        state = parse_state_spec(spec_text, registry, L_UP, R_DOWN)
        f_num = qfi(state, gen)
        f_closed = _metrology_closed_form(kind, _split_spec(spec_text)[1], generator, n)
        return {
            "N": n,
            "family": kind,
            "params": spec_text,
            "F_numeric": f_num,
            "F_closed_form": f_closed,
            "verdict": shot_noise_verdict(f_num, n),
        }

    rows = _pool_map(one_row, points)
    return round_floats({"command": "metrology", "generator": generator, "rows": rows})


# ---------------------------------------------------------------------------
# entanglement
# ---------------------------------------------------------------------------

MEASURE_NAMES = ("entropy", "negativity", "witness")


def entangle_report(state_spec: str, bipartition: str, measures: list[str]) -> dict:
    registry = standard_registry()
    state = parse_state_spec(state_spec, registry, L_UP, R_DOWN)
    if bipartition == "LR":
        part = Bipartition.left_right(registry)
    elif bipartition == "updown":
        part = Bipartition.up_down(registry)
    else:
        raise DomainError(f"unknown bipartition {bipartition!r}")
    rows = []
    for measure in measures:
        if measure == "entropy":
            rows.append({"measure": "entropy", "value": entropy(reduce_state(state, part)),
                         "detail": "bits, side-1 reduction"})
        elif measure == "negativity":
            rows.append({"measure": "negativity", "value": negativity(state, part),
                         "detail": None})
        elif measure == "witness":
            op1 = side_number_operator(registry, part.side_1)
            op2 = side_number_operator(registry, part.side_2)
            rows.append({"measure": "witness",
                         "value": factorization_witness(state, part, op1, op2),
                         "detail": "side number operators N1 x N2"})
        else:
            raise DomainError(f"unknown measure {measure!r}")
    return round_floats({
        "command": "entangle",
        "state": state_spec,
        "bipartition": bipartition,
        "mode_separable": bool(is_mode_separable(state, part)),
        "rows": rows,
    })


# ---------------------------------------------------------------------------
# teleport
# ---------------------------------------------------------------------------

def teleport_report(resource_spec: str, m: int, variant: str = COMPLETE,
                    simulate: str = "exact", seed: int | None = None,
                    samples: int = 100_000) -> dict:
    registry = teleport_registry()
    resource = parse_state_spec(resource_spec, registry, L_UP, R_DOWN)
    if resource.sector is None:
        raise DomainError("teleport resource must have a fixed particle number")
    if m > resource.sector:
        raise DomainError(f"input particle number {m} exceeds resource size {resource.sector}")
    config = ProtocolConfig(m, resource.sector, resource, variant)
    report = fidelity_simulated(config)
    out = {
        "command": "teleport",
        "resource": resource_spec,
        "M": m,
        "N": resource.sector,
        "variant": variant,
        "complete": report.complete,
        "captured_probability": report.captured_probability,
        "f_closed": fidelity_closed_form(resource, m),
        "f_sim": report.value,
        "outcomes": [
            {"ell": o.ell, "lam": o.lam, "p": o.probability, "overlap": o.overlap}
            for o in report.outcomes
        ],
        "mc": None,
    }
    if simulate == "mc":
        mc = fidelity_monte_carlo(config, samples=samples, seed=seed or 0)
        out["mc"] = {"value": mc.value, "stderr": mc.stderr,
                     "samples": mc.samples, "seed": mc.seed}
    return round_floats(out)


# ---------------------------------------------------------------------------
# paradox
# ---------------------------------------------------------------------------

def paradox_report(zeta: float, xi: float, eta: float, theta: float = 0.0,
                   phi: float = 0.0, omega: float = 0.0, n: int = 2) -> dict:
    result = swap_paradox(zeta, xi, eta, theta, phi, omega, n)
    registry = teleport_registry()
    verdicts = {
        "input": particle_separability_verdict(
            su2_coherent(TwoModeSpec(registry, X_UP, Y_DOWN, n), zeta, theta)),
        "resource": particle_separability_verdict(
            su2_coherent(TwoModeSpec(registry, L_UP, R_DOWN, n), xi, phi)),
        "target": particle_separability_verdict(
            su2_coherent(TwoModeSpec(registry, Y_DOWN, L_UP, n), eta, omega)),
    }
    return round_floats({
        "command": "paradox",
        "params": {"zeta": zeta, "xi": xi, "eta": eta,
                   "theta": theta, "phi": phi, "omega": omega, "n": n},
        "probability": result.probability,
        "negativity_xr": result.negativity_xr,
        "verdicts": verdicts,
        "residual_amplitudes": [
            [list(occ), amp.real, amp.imag] for occ, amp in result.residual_xr.items()
        ],
    })


# ---------------------------------------------------------------------------
# reproduce-all
# ---------------------------------------------------------------------------

def _row(quantity: str, closed, numeric: float, ok: bool | None = None) -> dict:
    err = abs(numeric - closed) if closed is not None else None
    if ok is None:
        ok = err is not None and err <= TOLERANCE
    return {"quantity": quantity, "closed_form": closed, "numeric": numeric,
            "abs_error": err, "pass": bool(ok)}


def _qfi_tables(n_max: int) -> dict:
    registry = standard_registry()
    gen_n = Generator.imbalance(registry, L_UP, R_DOWN)
    gen_t = Generator.exchange(registry, L_UP, R_DOWN)

    def two_fock_rows(n):
        rows = []
        for xi, phi in ((0.3, 0.9), (0.5, 0.0)):
            spec = TwoModeSpec(registry, L_UP, R_DOWN, n)
            state = two_fock_superposition(spec, 0, n, xi, phi)
            rows.append(_row(f"two_fock N={n} xi={xi} l1=0 l2={n}",
                             closed_form_qfi("two_fock_imbalance", xi=xi, l1=0, l2=n),
                             qfi(state, gen_n)))
        return rows

    def uniform_rows(n):
        spec = TwoModeSpec(registry, L_UP, R_DOWN, n)
        state = uniform_state(spec, linear_phase=0.37)
        return [_row(f"uniform N={n}",
                     closed_form_qfi("uniform_imbalance", n=n), qfi(state, gen_n))]

    def coherent_rows(n):
        rows = []
        for xi in (0.25, 0.5):
            spec = TwoModeSpec(registry, L_UP, R_DOWN, n)
            state = su2_coherent(spec, xi, 0.4)
            rows.append(_row(f"coherent N={n} xi={xi}",
                             closed_form_qfi("coherent_imbalance", xi=xi, n=n),
                             qfi(state, gen_n)))
        return rows

    def exchange_rows(n):
        rows = []
        for ell in sorted({0, n // 2, n}):
            spec = TwoModeSpec(registry, L_UP, R_DOWN, n)
            state = fock_state(spec, ell)
            rows.append(_row(f"fock_exchange N={n} l={ell}",
                             closed_form_qfi("fock_exchange", l=ell, n=n),
                             qfi(state, gen_t)))
        return rows

    ns = list(range(1, n_max + 1))
    return {
        "imbalance_two_fock": [r for rows in _pool_map(two_fock_rows, ns) for r in rows],
        "imbalance_uniform": [r for rows in _pool_map(uniform_rows, ns) for r in rows],
        "imbalance_coherent": [r for rows in _pool_map(coherent_rows, ns) for r in rows],
        "exchange_fock": [r for rows in _pool_map(exchange_rows, ns) for r in rows],
    }


def _fidelity_table(n_max: int) -> list[dict]:
    registry = teleport_registry()
    rows = []
    n = n_max
    m_values = sorted({1, 2, max(1, n // 2)})
    for m in m_values:
        spec = TwoModeSpec(registry, L_UP, R_DOWN, n)
        fock = fock_state(spec, n // 2)
        golden = 2.0 / (m + 2)
        rows.append(_row(f"fock_resource N={n} M={m} simulated", golden,
                         fidelity_simulated(ProtocolConfig(m, n, fock)).value))
        rows.append(_row(f"fock_resource N={n} M={m} formula", golden,
                         fidelity_closed_form(fock, m)))
        unif = uniform_state(spec, linear_phase=0.21)
        golden = 1.0 - m / (3.0 * n + 3.0)
        rows.append(_row(f"uniform_resource N={n} M={m} simulated", golden,
                         fidelity_simulated(ProtocolConfig(m, n, unif)).value))
        rows.append(_row(f"uniform_resource N={n} M={m} formula", golden,
                         fidelity_closed_form(unif, m)))
    m = min(2, n_max)
    deficits = []
    for n in range(max(2, m), n_max + 1):
        spec = TwoModeSpec(registry, L_UP, R_DOWN, n)
        coh = su2_coherent(spec, 0.5, 0.0)
        value = fidelity_simulated(ProtocolConfig(m, n, coh)).value
        deficits.append(1.0 - value)
        rows.append(_row(f"coherent_resource N={n} M={m} one_minus_f", None,
                         1.0 - value, ok=True))
    monotone = all(b < a for a, b in zip(deficits, deficits[1:]))
    rows.append(_row(f"coherent_resource M={m} deficit_monotone_decreasing", None,
                     float(monotone), ok=monotone))
    return rows


def _nolabel_table(n_max: int) -> list[dict]:
    registry = standard_registry()
    rows = []
    rng = np.random.default_rng(20240810)
    for n_total in range(2, min(n_max, 8) + 1):
        z = rng.normal(size=n_total + 1) + 1j * rng.normal(size=n_total + 1)
        spec = TwoModeSpec(registry, L_UP, R_DOWN, n_total)
        state = generic_two_mode(spec, z / np.linalg.norm(z), renormalize=True)
        for n in range(1, n_total):
            rho = nolabel_rho_n(state, SubspaceSpec.left_site(), n)
            rows.append(_row(f"removal_entropy N={n_total} n={n}", 0.0, entropy(rho)))
            rows.append(_row(f"removal_purity N={n_total} n={n}", 1.0, purity(rho)))
    return rows


def _paradox_table() -> list[dict]:
    n = 2
    result = swap_paradox(0.5, 0.5, 0.5, n=n)
    # independent profile: occupation amplitude of (k, n-k) on (X,R) is
    # proportional to C(n,k)^(3/2) at the symmetric parameter point
    profile = np.array([math.comb(n, k) ** 1.5 * 0.5 ** n * 0.5 ** (n / 2) for k in range(n + 1)])
    profile /= np.linalg.norm(profile)
    closed_prob = float(sum(math.comb(n, k) ** 3 * (1 / 8) ** n for k in range(n + 1)))
    closed_neg = (float(profile.sum()) ** 2 - 1.0) / 2.0
    rows = [
        _row("swap_probability zeta=xi=eta=0.5 n=2", closed_prob, result.probability),
        _row("swap_negativity_xr zeta=xi=eta=0.5 n=2", closed_neg, result.negativity_xr),
    ]
    registry = teleport_registry()
    for name, state in (
        ("input", su2_coherent(TwoModeSpec(registry, X_UP, Y_DOWN, n), 0.5)),
        ("resource", su2_coherent(TwoModeSpec(registry, L_UP, R_DOWN, n), 0.5)),
        ("target", su2_coherent(TwoModeSpec(registry, Y_DOWN, L_UP, n), 0.5)),
    ):
        rows.append(_row(f"swap_{name}_particle_separable", 1.0,
                         float(particle_separability_verdict(state))))
    return rows


def reproduce_all_report(n_max: int = 8) -> dict:
    """One table per closed-form result; exits clean only if every row passes."""
    if not 2 <= n_max <= 12:
        raise DomainError(f"n_max must lie in [2, 12], got {n_max}")
    tables = dict(_qfi_tables(n_max))
    tables["teleport_fidelity"] = _fidelity_table(n_max)
    tables["nolabel_entropy"] = _nolabel_table(n_max)
    tables["swap_paradox"] = _paradox_table()
    all_pass = all(row["pass"] for rows in tables.values() for row in rows)
    columns = ["quantity", "closed_form", "numeric", "abs_error", "pass"]
    return round_floats({
        "command": "reproduce-all",
        "n_max": n_max,
        "tolerance": TOLERANCE,
        "all_pass": bool(all_pass),
        "tables": {name: {"columns": columns, "rows": rows}
                   for name, rows in tables.items()},
    })
