"""Trajectory-level verdicts: extinction, persistence, attractivity, bounds.

These operate on finished trajectories and are deliberately dumb about
where the trajectory came from; the threshold machinery predicts, this
module observes.  The acceptance pairing of the two (classification
against observed tail behaviour) lives in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import COEFF_NAMES


@dataclass
class ExtinctionVerdict:
    extinct: bool
    crossing_index: object        # first index after which I stays below tol
    tail_sup: float
    tol: float
    tail: int


@dataclass
class PersistenceVerdict:
    persistent: bool
    tail_min: float
    eps: float
    tail: int


@dataclass
class AttractivityReport:
    attained: bool
    per_trajectory_sup: list
    pairwise_sup: list            # [(i, j, sup-distance), ...]
    tol: float
    window: tuple                 # absolute index range checked


@dataclass
class BoundReport:
    holds: bool
    bound: float
    entry_index: object           # first index from which the sum stays below
    slack: float
    parameter_mismatch: bool = False


def _require_tail(traj, tail, what):
    if len(traj) <= tail:
        raise ValueError(
            f"{what} needs more than {tail} recorded states, got {len(traj)}")


def detect_extinction(traj, tol=1e-4, tail=500):
    """Declare extinction when the infected compartment stays below tol
    over the final tail states.

    The crossing index is the first index after which I never again
    reaches tol within the recorded horizon (0 when it never did).  It is
    only reported for an extinct verdict.
    """
    if tol <= 0 or tail < 1:
        raise ValueError("tol must be positive and tail at least 1")
    _require_tail(traj, tail, "extinction detection")
    infected = traj.I
    tail_sup = float(np.max(infected[-tail:]))
    extinct = tail_sup < tol
    crossing = None
    if extinct:
        above = np.nonzero(infected >= tol)[0]
        crossing = int(above[-1]) + 1 + traj.start if above.size else traj.start
    return ExtinctionVerdict(extinct=extinct, crossing_index=crossing,
                             tail_sup=tail_sup, tol=tol, tail=tail)


def detect_persistence(traj, eps=1e-3, tail=500):
    """Declare persistence when the infected compartment stays above eps
    over the final tail states."""
    if eps <= 0 or tail < 1:
        raise ValueError("eps must be positive and tail at least 1")
    _require_tail(traj, tail, "persistence detection")
    tail_min = float(np.min(traj.I[-tail:]))
    return PersistenceVerdict(persistent=tail_min > eps, tail_min=tail_min,
                              eps=eps, tail=tail)


def check_attractivity(trajectories, prey_ref, predator_ref, tol=1e-4):
    """Check convergence to the disease-free reference (s_n, 0, y_n).

    Only meaningful when predation on susceptible prey is absent and the
    infected-prey response factors as g0(x, y)*z, which is what makes the
    disease-free reference an actual solution; both preconditions are
    enforced.  The distance at index n is |S - s_n| + |I| + |P - y_n| and
    convergence is judged by its sup over the last quarter of each
    trajectory; the mutual distances over the same window (same norm) are
    reported alongside.  By the triangle inequality an attained check
    caps every pairwise distance below 2*tol.
    """
    if not trajectories:
        raise ValueError("need at least one trajectory")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scen = trajectories[0].scenario
    if scen is not None:
        horizon = max(len(t) for t in trajectories)
        atk = scen.coeffs.predation.array(0, horizon)
        if np.any(atk != 0.0):
            raise ValueError(
                "attractivity check needs vanishing predation on "
                "susceptible prey")
        if scen.g.predator_factor is None:
            raise ValueError(
                "attractivity check needs a response of the form "
                "g0(x, y) * z")

    quarter = max(len(trajectories[0]) // 4, 1)
    lo = len(trajectories[0]) - quarter

    sups = []
    windows = []
    for traj in trajectories:
        if len(traj) != len(trajectories[0]):
            raise ValueError("trajectories must share a common length")
        idx = np.arange(lo, len(traj)) + traj.start
        s_star = np.array([prey_ref.value_at(int(n)) for n in idx])
        y_star = np.array([predator_ref.value_at(int(n)) for n in idx])
        window = traj.states[lo:]
        d = (np.abs(window[:, 0] - s_star)
             + np.abs(window[:, 1])
             + np.abs(window[:, 2] - y_star))
        sups.append(float(np.max(d)))
        windows.append(window)

    pairwise = []
    for i in range(len(windows)):
        for j in range(i + 1, len(windows)):
            gap = np.sum(np.abs(windows[i] - windows[j]), axis=1)
            pairwise.append((i, j, float(np.max(gap))))

    attained = all(s < tol for s in sups)
    return AttractivityReport(attained=attained, per_trajectory_sup=sups,
                              pairwise_sup=pairwise, tol=tol,
                              window=(int(lo + trajectories[0].start),
                                      int(len(trajectories[0]) - 1
                                          + trajectories[0].start)))


def _coeff_bounds(coeffs, horizon):
    table = coeffs.table(0, horizon)
    return ({name: float(np.max(table[name])) for name in COEFF_NAMES},
            {name: float(np.min(table[name])) for name in COEFF_NAMES})


def eventual_bound(coeffs, f, g, horizon, slack=0.5):
    """Absorbing bound for the total population derived from coefficient
    extremes over the horizon.

    Total prey is eventually confined below rec_sup/mort_inf; feeding that
    through the predator equation caps predators at the bracketed gain
    over the competition floor.  Requires the infected-prey response to
    factor as g0(x, y)*z.  The slack absorbs the finite-time approach to
    the asymptotic box.
    """
    if g.predator_factor is None:
        raise ValueError("eventual bound needs a response of the form "
                         "g0(x, y) * z")
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    sup, inf = _coeff_bounds(coeffs, horizon)
    if inf["mortality"] <= 0 or inf["predator_competition"] <= 0:
        raise ValueError("eventual bound needs mortality and competition "
                         "bounded away from zero")
    prey_cap = sup["recruitment"] / inf["mortality"]
    gain = (sup["predator_growth"]
            + sup["conversion"] * sup["predation"] * f(prey_cap, 0.0, 0.0)
            + sup["infected_conversion"] * sup["infected_predation"]
            * g.predator_factor(0.0, prey_cap) * prey_cap)
    return prey_cap + gain / inf["predator_competition"] + slack


def verify_bound_L(traj, slack=0.5, coeffs=None):
    """Check that S+I+P enters and then never leaves the eventual bound.

    coeffs defaults to the trajectory's own scenario; passing different
    coefficients recomputes the bound under those and flags the mismatch.
    """
    scen = traj.scenario
    if scen is None:
        raise ValueError("trajectory carries no scenario")
    mismatch = False
    if coeffs is None:
        coeffs = scen.coeffs
    elif coeffs is not scen.coeffs:
        mismatch = True
    bound = eventual_bound(coeffs, scen.f, scen.g, len(traj), slack=slack)

    total = traj.states.sum(axis=1)
    above = np.nonzero(total > bound)[0]
    if above.size == 0:
        entry = traj.start
        holds = True
    elif int(above[-1]) + 1 < len(traj):
        entry = int(above[-1]) + 1 + traj.start
        holds = True
    else:
        entry = None
        holds = False
    return BoundReport(holds=holds, bound=float(bound), entry_index=entry,
                       slack=slack, parameter_mismatch=mismatch)


def verdict_json_dict(extinction=None, persistence=None, attractivity=None,
                      bound=None):
    """Flat JSON-ready dict combining the individual verdicts."""
    out = {
        "extinction": None, "crossing_index": None,
        "persistence": None, "tail_min": None,
        "attractivity": None, "bound_L": None, "T": None,
    }
    if extinction is not None:
        out["extinction"] = extinction.extinct
        out["crossing_index"] = extinction.crossing_index
    if persistence is not None:
        out["persistence"] = persistence.persistent
        out["tail_min"] = persistence.tail_min
    if attractivity is not None:
        out["attractivity"] = attractivity.attained
    if bound is not None:
        out["bound_L"] = bound.bound
        out["T"] = bound.entry_index
    return out
