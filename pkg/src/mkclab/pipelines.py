"""End-to-end contradiction reports.

``pipeline_section2`` runs the local argument: choose rational detector
alignments near the six targets, measure how far the four GHZ correlations
are from +-1, and set that against the product-model bound. A product-form
model needs E_a >= 1 - eps for every combo, hence mu(A_a) >= 1 - eps/2 and
mu(A_0 & A_1 & A_2 & A_3) >= 1 - 2 eps. The parity identity makes that
intersection empty, so eps < 1/2 rules every product-form model out.

``pipeline_section3`` does the same with non-local commuting triplets built
by conjugating the local observables with one entangling unitary.

Both return plain dicts of JSON-ready values. Exact quantities are written as
fraction strings.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import constants as C
from .errors import InvariantError, ValidationError
from .ghz import COMBOS, AlignmentSextet, TARGET_SEXTET, correlation, correlation_closed_form, epsilon_report, perturb_direction
from .hvm import (
    as_fraction,
    contradiction_verdict,
    demand_feasibility,
    max_min_correlation,
    measure_bound_check,
    parity_exhaustive,
)
from .mkc import (
    _check_bound,
    nearest_rational,
    nonlocal_epsilon_report,
    perturbed_commuting_triplet,
    perturbed_observables,
)

_SLOTS = ("n1x", "n1y", "n2x", "n2y", "n3x", "n3y")


def _frac(x) -> str:
    return str(Fraction(x))


def _verdict_dict(v) -> dict:
    return {"kind": v.kind.value, "fires": v.fires, "eps": v.eps, "threshold": v.threshold, "slack": v.slack}


def _product_model_block() -> dict:
    value, witness = max_min_correlation()
    parity = parity_exhaustive()
    return {
        "max_min_E": _frac(value),
        "witness": {str(i): _frac(w) for i, w in enumerate(witness.exact) if w},
        "min_eps_for_product_models": _frac(1 - value),
        "valuations_checked": parity.checked,
        "valuations_with_all_f_plus": parity.all_plus_count,
    }


def _chain(eps: float) -> dict:
    """The implication chain for a product-form model reaching this eps."""
    e = as_fraction(eps)
    demand = demand_feasibility(e)
    _, witness = max_min_correlation()
    evidence = measure_bound_check(witness, e)
    block = {
        "premise": "E_a >= 1 - eps for a = 0..3",
        "E_lower_bound": 1.0 - eps,
        "muA_lower_bound": 1.0 - eps / 2,
        "intersection_lower_bound": 1.0 - 2 * eps,
        # parity: no valuation has all four f_a = +1, so the intersection is empty
        "intersection_measure": "0",
        "contradiction": 1 - 2 * e > 0,
        "premise_satisfiable": demand.feasible,
        "witness_check": evidence.status.value,
    }
    if demand.certificate is not None:
        y, z = demand.certificate
        block["farkas_certificate"] = {"y": [_frac(v) for v in y], "z": _frac(z)}
    if block["contradiction"] == demand.feasible:
        raise InvariantError("LP feasibility disagrees with the measure-bound chain")
    return block


def pipeline_section2(delta: float, bound: int, seed: int) -> dict:
    """Local-detector contradiction at misalignment scale ``delta``.

    Each target direction is rotated by exactly ``delta`` along a seeded
    random tangent and then replaced by the nearest rational direction with
    denominator <= ``bound``.
    """
    if not (math.isfinite(delta) and 0 < delta <= math.pi / 4):
        raise ValidationError(f"delta must lie in (0, pi/4], got {delta!r}")
    _check_bound(bound)
    rng = np.random.default_rng(seed)
    targets = TARGET_SEXTET.as_dict()
    chosen, detail = {}, {}
    for slot in _SLOTS:
        moved = perturb_direction(targets[slot], delta, rng)
        rational, _ = nearest_rational(moved, bound)
        d = rational.direction()
        chosen[slot] = d
        detail[slot] = {"rational": str(rational), "angle_to_target": d.angle_to(targets[slot])}
    sextet = AlignmentSextet(**chosen)
    report = epsilon_report(sextet)
    closed = epsilon_report(sextet, closed_form=True)
    if abs(report.eps - closed.eps) > C.CLOSED_FORM_TOL:
        raise InvariantError("closed form and matrix correlations disagree")
    verdict = contradiction_verdict(report)
    return {
        "pipeline": "section2",
        "delta": delta,
        "bound": bound,
        "seed": seed,
        "sextet": detail,
        "correlations": {c: correlation(sextet.triplet(c)) for c in COMBOS},
        "closed_form": {c: correlation_closed_form(sextet.triplet(c)) for c in COMBOS},
        "eps_components": list(report.components),
        "eps": report.eps,
        "product_models": _product_model_block(),
        "chain": _chain(report.eps),
        "verdict": _verdict_dict(verdict),
    }


def pipeline_section3(eta: float, seed: int) -> dict:
    """Non-local commuting-triplet contradiction at perturbation strength ``eta``."""
    obs = perturbed_observables(eta, seed)
    triplets = [perturbed_commuting_triplet(c, eta, seed) for c in COMBOS]
    taus = [obs.taus[(r, j)] for r in (1, 2, 3) for j in "xy"]
    report = nonlocal_epsilon_report(*taus)
    verdict = contradiction_verdict(report)
    evidence = {}
    for t in triplets:
        spectra = t.spectra()
        evidence[t.combo] = {
            "max_commutator_norm": t.max_commutator_norm(),
            "spectrum_deviation": max(float(np.abs(np.abs(w) - 1).max()) for w in spectra),
            "eigenvalue_counts": [[int((w < 0).sum()), int((w > 0).sum())] for w in spectra],
            "distances_to_local": list(t.distances),
        }
    return {
        "pipeline": "section3",
        "eta": eta,
        "seed": seed,
        "distance_bound": obs.distance_constant * eta,
        "triplets": evidence,
        "max_commutator_norm": max(e["max_commutator_norm"] for e in evidence.values()),
        "eps_components": list(report.components),
        "eps": report.eps,
        "product_models": _product_model_block(),
        "chain": _chain(report.eps),
        "verdict": _verdict_dict(verdict),
    }
