"""Infection growth quotients and persistence/extinction classification.

The step-to-step growth of a small infected compartment is governed by
quotients of the form

    (1 + transmission_k * prey_ref_{k+1})
    -----------------------------------------------------------
    (1 + infected_removal_k + infected_predation_k * g(prey_ref_k, 0, pred_ref_k))

evaluated on an attractor of the auxiliary systems.  The "upper" kind uses
the predation-free prey reference and the predator reference and bounds
the infection from above; the "lower" kind uses the disease-free pair
attractor and bounds it from below.  Window products of these factors over
lam+1 consecutive steps, minimised (lower) or maximised (upper) over the
start index, give finite-horizon surrogates of the asymptotic thresholds:
an upper product below one certifies extinction, a lower product above one
certifies uniform strong persistence.

All products are accumulated as sums of logarithms; a thousand-factor
window of strongly subcritical quotients underflows a plain running
product long before it troubles the log sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .auxiliary import (find_attractor, pair_system, predator_system,
                        prey_system, autonomous_fixed_point,
                        _constant_value)
from .errors import AperiodicInput, ReferenceWindowExhausted

# scan length for aperiodic inputs; periodic inputs need only one period
DEFAULT_SCAN = 10_000

# quotients within this distance of 1 never decide a classification
TIE_TOL = 1e-9

_FACTOR_COEFFS = ("transmission", "infected_removal", "infected_predation")


@dataclass
class ReferenceSet:
    """Attractor samples backing the threshold quotients."""

    prey: object = None
    predator: object = None
    pair: object = None

    def meta(self):
        out = {}
        for name in ("prey", "predator", "pair"):
            ref = getattr(self, name)
            if ref is None:
                continue
            out[name] = {
                "start": ref.start,
                "burn_in": ref.burn_in,
                "window": int(len(ref.values)),
                "detected_period": ref.detected_period,
                "convergence_residual": ref.convergence_residual,
                "tol": ref.tol,
            }
        return out


def build_references(scenario, burn_in=5000, window=None, tol=1e-8):
    """Run all three auxiliary systems onto their attractors.

    Seeds are the leading-order balance points of each subsystem; by the
    contraction properties of the auxiliary maps the attractor reached is
    seed-independent, which the test suite checks rather than assumes.
    """
    coeffs = scenario.coeffs
    rec0 = coeffs.recruitment.value_at(0)
    mu0 = coeffs.mortality.value_at(0)
    gro0 = coeffs.predator_growth.value_at(0)
    comp0 = coeffs.predator_competition.value_at(0)
    s_seed = rec0 / mu0 if mu0 > 0 else 1.0
    y_seed = gro0 / comp0 if comp0 > 0 else 1.0

    prey_ref = find_attractor(prey_system(coeffs), s_seed,
                              burn_in=burn_in, window=window, tol=tol)
    pred_ref = find_attractor(predator_system(coeffs), y_seed,
                              burn_in=burn_in, window=window, tol=tol)
    pair_ref = find_attractor(pair_system(coeffs, scenario.f),
                              (s_seed, y_seed),
                              burn_in=burn_in, window=window, tol=tol)
    return ReferenceSet(prey=prey_ref, predator=pred_ref, pair=pair_ref)


def _refs_for(kind, refs):
    if kind == "lower":
        if refs.pair is None:
            raise ValueError("lower quotients need the pair reference")
        return (refs.pair,)
    if kind == "upper":
        if refs.prey is None or refs.predator is None:
            raise ValueError("upper quotients need prey and predator references")
        return (refs.prey, refs.predator)
    raise ValueError(f"unknown threshold kind {kind!r}")


def _ref_states(kind, refs, k):
    # (prey-like value at k, prey-like value at k+1, predator-like value at k)
    if kind == "lower":
        xk, zk = refs.pair.value_at(k)
        x1 = refs.pair.value_at(k + 1)[0]
        return xk, x1, zk
    sk = refs.prey.value_at(k)
    s1 = refs.prey.value_at(k + 1)
    yk = refs.predator.value_at(k)
    return sk, s1, yk


def threshold_factor(coeffs, g, k, kind, refs):
    """One growth quotient at index k."""
    xk, x1, zk = _ref_states(kind, refs, k)
    beta = coeffs.transmission.value_at(k)
    irem = coeffs.infected_removal.value_at(k)
    ipred = coeffs.infected_predation.value_at(k)
    return (1.0 + beta * x1) / (1.0 + irem + ipred * g(xk, 0.0, zk))


def _log_factors(coeffs, g, kind, refs, k0, count):
    beta = coeffs.transmission.array(k0, k0 + count)
    irem = coeffs.infected_removal.array(k0, k0 + count)
    ipred = coeffs.infected_predation.array(k0, k0 + count)
    num = np.empty(count)
    den = np.empty(count)
    for j in range(count):
        xk, x1, zk = _ref_states(kind, refs, k0 + j)
        num[j] = beta[j] * x1
        den[j] = irem[j] + ipred[j] * g(xk, 0.0, zk)
    return np.log1p(num) - np.log1p(den)


def _common_period(coeffs, kind, refs):
    p = coeffs.period(_FACTOR_COEFFS)
    if p is None:
        return None
    for ref in _refs_for(kind, refs):
        q = ref.detected_period
        if q is None:
            return None
        p = math.lcm(p, q)
    return p


def r_threshold(coeffs, g, lam, kind, refs, scan=None):
    """Window-product threshold surrogate for window length lam+1.

    The product of lam+1 consecutive quotients is swept over start
    indices and the minimum (kind "lower") or maximum (kind "upper") is
    returned.  Periodic inputs are swept over exactly one common period;
    aperiodic references limit the sweep to their recorded windows and
    raise ReferenceWindowExhausted when nothing fits.
    """
    lam = int(lam)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    involved = _refs_for(kind, refs)
    start = max(ref.start for ref in involved)

    period = _common_period(coeffs, kind, refs)
    if scan is not None:
        scan = int(scan)
    elif period is not None:
        scan = period
    else:
        scan = DEFAULT_SCAN
    if period is None:
        # clamp to what the recorded windows support
        avail = min(ref.start + len(ref.values) for ref in involved) - start
        scan = min(scan, avail - lam - 1)
        if scan < 1:
            raise ReferenceWindowExhausted(
                f"window length {lam + 1} does not fit the recorded "
                "reference windows")

    logs = _log_factors(coeffs, g, kind, refs, start, scan + lam)
    cums = np.concatenate(([0.0], np.cumsum(logs)))
    win = cums[lam + 1:lam + 1 + scan] - cums[:scan]
    best = float(np.min(win)) if kind == "lower" else float(np.max(win))
    return math.exp(best)


def r_periodic(coeffs, g, kind, refs):
    """Single-product threshold over one common period.

    Requires the factor coefficients and the involved references to share
    an integer period; AperiodicInput is raised otherwise.  Over a full
    period the product is independent of the starting phase.
    """
    period = _common_period(coeffs, kind, refs)
    if period is None:
        raise AperiodicInput(
            "periodic threshold needs a common integer period")
    start = max(ref.start for ref in _refs_for(kind, refs))
    logs = _log_factors(coeffs, g, kind, refs, start, period)
    return math.exp(float(np.sum(logs)))


def r_autonomous(coeffs, kind):
    """Closed-form thresholds for constant coefficients with identity
    responses.

    upper:  (1 + beta*rec/mu) / (1 + irem + ipred*gro/comp)
    lower:  same shape evaluated at the positive fixed point (x, z) of the
            disease-free pair system.
    """
    beta = _constant_value(coeffs.transmission)
    irem = _constant_value(coeffs.infected_removal)
    ipred = _constant_value(coeffs.infected_predation)
    if kind == "upper":
        rec = _constant_value(coeffs.recruitment)
        mu = _constant_value(coeffs.mortality)
        gro = _constant_value(coeffs.predator_growth)
        comp = _constant_value(coeffs.predator_competition)
        if mu <= 0 or comp <= 0:
            raise ValueError("autonomous upper threshold needs mu, comp > 0")
        return (1.0 + beta * rec / mu) / (1.0 + irem + ipred * gro / comp)
    if kind == "lower":
        x, z = autonomous_fixed_point(coeffs)
        return (1.0 + beta * x) / (1.0 + irem + ipred * z)
    raise ValueError(f"unknown threshold kind {kind!r}")


def r_no_predation(coeffs, g, lam, kind, refs, horizon=2000):
    """Threshold surrogate for the predation-free submodel.

    Guards that the predation coefficient really vanishes on the sampled
    horizon, then defers to r_threshold; with no predation the pair
    attractor coincides with the (prey, predator) pair, so both kinds run
    on the same quotients and differ only in the sweep direction.
    """
    atk = coeffs.predation.array(0, horizon + 1)
    if np.any(atk != 0.0):
        bad = int(np.argmax(atk != 0.0))
        raise ValueError(
            f"predation-free threshold requested but predation is nonzero "
            f"at index {bad}")
    return r_threshold(coeffs, g, lam, kind, refs)


@dataclass
class ThresholdReport:
    """Outcome of a lambda sweep.

    entries[i] = (lam, r_lower, r_upper).  classification is "Extinction"
    when some upper entry is below one, "StrongPersistence" when some
    lower entry is above one, otherwise "Inconclusive"; quotients within
    TIE_TOL of one never decide.  Should both conditions fire at once --
    which the comparison structure rules out for sound inputs -- the
    report keeps Inconclusive and raises the inconsistent flag.
    """

    entries: list
    classification: str
    witnesses: dict
    refs_meta: dict = field(default_factory=dict)
    inconsistent: bool = False

    def to_json_dict(self):
        return {
            "lambda_entries": [
                {"lambda": lam, "r_lower": rl, "r_upper": ru}
                for (lam, rl, ru) in self.entries
            ],
            "classification": self.classification,
            "witnesses": self.witnesses,
            "refs_meta": self.refs_meta,
            "inconsistent": self.inconsistent,
        }


def lambda_scan(scenario, lambda_max=None, refs=None, scan=None,
                burn_in=5000, window=None, tol=1e-8):
    """Sweep window lengths 0..lambda_max and classify the scenario."""
    coeffs = scenario.coeffs
    if refs is None:
        refs = build_references(scenario, burn_in=burn_in, window=window,
                                tol=tol)
    if lambda_max is None:
        period = coeffs.period() or 1
        lambda_max = max(4 * period, 40)
    lambda_max = int(lambda_max)
    if lambda_max < 0:
        raise ValueError("lambda_max must be nonnegative")

    entries = []
    for lam in range(lambda_max + 1):
        rl = r_threshold(coeffs, scenario.g, lam, "lower", refs, scan=scan)
        ru = r_threshold(coeffs, scenario.g, lam, "upper", refs, scan=scan)
        entries.append((lam, rl, ru))

    ext_witness = next((lam for (lam, rl, ru) in entries
                        if ru < 1.0 - TIE_TOL), None)
    per_witness = next((lam for (lam, rl, ru) in entries
                        if rl > 1.0 + TIE_TOL), None)
    inconsistent = ext_witness is not None and per_witness is not None
    if inconsistent:
        classification = "Inconclusive"
    elif ext_witness is not None:
        classification = "Extinction"
    elif per_witness is not None:
        classification = "StrongPersistence"
    else:
        classification = "Inconclusive"

    return ThresholdReport(
        entries=entries,
        classification=classification,
        witnesses={"extinction_lambda": ext_witness,
                   "persistence_lambda": per_witness},
        refs_meta=refs.meta(),
        inconsistent=inconsistent)
