"""Auxiliary comparison systems and their attractors.

Three reduced systems bracket the full dynamics:

  prey      s' = (rec + s) / (1 + mu)            dominates total prey
  predator  y' = (1 + gro) * y / (1 + comp * y)  is dominated by predators
  pair      disease-free (x, z) subsystem with predation

The pair system comes in three variants.  "base" is the plain disease-free
limit.  "lower" drains the prey by an extra eps*x_n and feeds the predator
through f evaluated with eps in the infected slot; "upper" removes prey
through f with eps in the infected slot and grants the predator an extra
iconv*ipred*g(x', 0, z)*eps.  For small eps these bracket the full system
once the infection is confined below eps, which is how the persistence
and extinction arguments use them.

find_attractor iterates past a burn-in, records a window, and certifies
convergence by running one further pass; the resulting ReferenceSolution
is what the threshold quotients are evaluated on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, ReferenceWindowExhausted
from .dynamics import solve_implicit_s

_PAIR_VARIANTS = ("base", "lower", "upper")


@dataclass(frozen=True)
class AuxiliarySystem:
    """A reduced recurrence with a step(state, n) map.

    kind is "prey", "predator" or "pair"; dim is 1 or 2 accordingly.
    period is the common integer period of the coefficient sequences the
    map actually reads (None when aperiodic); it sizes attractor windows.
    """

    kind: str
    dim: int
    step: object
    period: object = None


def prey_system(coeffs):
    rec_seq = coeffs.recruitment
    mu_seq = coeffs.mortality

    def step(s, n):
        return (rec_seq.value_at(n) + s) / (1.0 + mu_seq.value_at(n))

    return AuxiliarySystem(kind="prey", dim=1, step=step,
                           period=coeffs.period(("recruitment", "mortality")))


def predator_system(coeffs):
    gro_seq = coeffs.predator_growth
    comp_seq = coeffs.predator_competition

    def step(y, n):
        return (1.0 + gro_seq.value_at(n)) * y / (1.0 + comp_seq.value_at(n) * y)

    return AuxiliarySystem(
        kind="predator", dim=1, step=step,
        period=coeffs.period(("predator_growth", "predator_competition")))


def pair_system(coeffs, f, g=None, variant="base", eps=0.0):
    """Disease-free (x, z) subsystem, optionally perturbed by eps.

    g is only consulted by the "upper" variant.  The x update is implicit
    through f exactly as in the full system and is solved the same way,
    with a closed form when f is the identity response.
    """
    if variant not in _PAIR_VARIANTS:
        raise ValueError(f"unknown pair variant {variant!r}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if variant == "base":
        eps = 0.0
    if variant == "upper" and g is None:
        raise ValueError("upper variant needs the infected-prey response g")

    names = ("recruitment", "mortality", "predation", "predator_growth",
             "predator_competition", "conversion")
    if variant == "upper":
        names = names + ("infected_predation", "infected_conversion")

    rec_seq = coeffs.recruitment
    mu_seq = coeffs.mortality
    atk_seq = coeffs.predation
    gro_seq = coeffs.predator_growth
    comp_seq = coeffs.predator_competition
    conv_seq = coeffs.conversion
    ipred_seq = coeffs.infected_predation
    iconv_seq = coeffs.infected_conversion
    linear = f.linear_in_x

    def step(state, n):
        x, z = state
        rec = rec_seq.value_at(n)
        mu = mu_seq.value_at(n)
        atk = atk_seq.value_at(n)
        # infected slot seen by the prey-loss response
        y_loss = eps if variant == "upper" else 0.0
        keep = (1.0 - eps) * x if variant == "lower" else x
        if linear:
            x1 = (rec + keep) / (1.0 + mu + atk * z)
        else:
            x1 = solve_implicit_s(rec, mu, atk, 0.0, keep, y_loss, z,
                                  f)
        gro = gro_seq.value_at(n)
        comp = comp_seq.value_at(n)
        conv = conv_seq.value_at(n)
        y_gain = eps if variant == "lower" else 0.0
        gain = z * (1.0 + gro + conv * atk * f(x1, y_gain, z))
        if variant == "upper":
            gain += (iconv_seq.value_at(n) * ipred_seq.value_at(n)
                     * g(x1, 0.0, z) * eps)
        z1 = gain / (1.0 + comp * z)
        return (x1, z1)

    return AuxiliarySystem(kind="pair", dim=2, step=step,
                           period=coeffs.period(names))


@dataclass
class ReferenceSolution:
    """An attractor sample of one auxiliary system.

    values[j] is the state at absolute index start + j.  When a period was
    detected the sample extends to arbitrary indices by phase-aligned
    wrapping; otherwise queries outside the window raise.
    """

    kind: str
    start: int
    values: np.ndarray
    burn_in: int
    detected_period: object
    convergence_residual: float
    tol: float

    def value_at(self, n):
        i = n - self.start
        if 0 <= i < len(self.values):
            return self.values[i]
        if self.detected_period:
            return self.values[i % self.detected_period]
        raise ReferenceWindowExhausted(
            f"{self.kind} reference queried at index {n}, window is "
            f"[{self.start}, {self.start + len(self.values)}) and no period "
            "was detected")

    def component(self, idx):
        """Scalar view of a pair reference (idx 0 for prey, 1 for predator)."""
        if self.values.ndim == 1:
            raise ValueError("component() only applies to pair references")
        return ReferenceSolution(
            kind=f"{self.kind}[{idx}]", start=self.start,
            values=self.values[:, idx], burn_in=self.burn_in,
            detected_period=self.detected_period,
            convergence_residual=self.convergence_residual, tol=self.tol)


def _detect_period(stacked, window, tol):
    # smallest shift under which the doubled window repeats within tol
    n = stacked.shape[0]
    for p in range(1, window + 1):
        d = stacked[p:] - stacked[:n - p]
        if np.max(np.abs(d)) < tol:
            return p
    return None


def find_attractor(system, initial, burn_in=5000, window=None, tol=1e-8):
    """Run an auxiliary system onto its attractor and certify the sample.

    After burn_in steps a window of states is recorded and one further
    pass of the same length is generated; the sup-distance between the two
    passes is the convergence residual and must come in below tol, else
    NoConvergence is raised.  The default window is ten periods of the
    driving coefficients, or 100 steps when they are constant.  Note the
    residual criterion presumes the true period divides the window, which
    the default guarantees.
    """
    if window is None:
        window = 100 if (system.period or 1) == 1 else 10 * system.period
    window = int(window)
    if window < 1:
        raise ValueError("window must be at least one step")
    burn_in = int(burn_in)
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")

    state = tuple(float(v) for v in np.atleast_1d(initial)) \
        if system.dim == 2 else float(np.asarray(initial).reshape(()))
    step = system.step
    for n in range(burn_in):
        state = step(state, n)

    shape = (2 * window, system.dim) if system.dim == 2 else (2 * window,)
    rec = np.empty(shape)
    for j in range(2 * window):
        rec[j] = state
        state = step(state, burn_in + j)
    first = rec[:window]
    second = rec[window:]
    residual = float(np.max(np.abs(second - first)))
    if not math.isfinite(residual) or residual > tol:
        raise NoConvergence(
            f"{system.kind} system did not settle: window residual "
            f"{residual:.3e} exceeds tol {tol:.1e}", residual=residual)

    stacked = rec if system.dim == 2 else rec[:, None]
    period = _detect_period(stacked, window, tol)

    return ReferenceSolution(kind=system.kind, start=burn_in,
                             values=first.copy(), burn_in=burn_in,
                             detected_period=period,
                             convergence_residual=residual, tol=tol)


def _constant_value(seq, probe=8):
    v0 = seq.value_at(0)
    for n in range(1, probe):
        if seq.value_at(n) != v0:
            raise ValueError(
                "closed-form fixed point needs constant coefficients")
    return v0


def autonomous_fixed_point(coeffs):
    """Positive fixed point (x, z) of the constant-coefficient pair system
    with identity responses.

    Eliminating z = (gro + conv*atk*x) / comp from the fixed-point
    equations leaves half_curv*x**2 + lin*x - rec = 0 with
    lin = mu + atk*gro/comp and half_curv = conv*atk**2/comp, taking the
    positive root.  With no predation the quadratic degenerates and the
    limit rec/lin = rec/mu is returned.  The z formula above is used
    directly instead of its expanded radical form, which is equivalent but
    loses accuracy as atk -> 0.
    """
    rec = _constant_value(coeffs.recruitment)
    mu = _constant_value(coeffs.mortality)
    atk = _constant_value(coeffs.predation)
    gro = _constant_value(coeffs.predator_growth)
    comp = _constant_value(coeffs.predator_competition)
    conv = _constant_value(coeffs.conversion)
    if mu <= 0 or comp <= 0:
        raise ValueError("fixed point needs positive mortality and competition")

    lin = mu + atk * gro / comp
    curv = 2.0 * conv * atk * atk / comp
    if curv < 1e-14:
        x = rec / lin
    else:
        x = (-lin + math.sqrt(lin * lin + 2.0 * rec * curv)) / curv
    z = (gro + conv * atk * x) / comp
    return (x, z)
