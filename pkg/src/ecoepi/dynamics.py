"""Core state propagation for the discretised predator-prey-disease system.

State is the triple (S, I, P): susceptible prey, infected prey, predators.
One step of the scheme solves

    S' - S = rec - mu*S' - atk*f(S', I, P)*P - beta*S'*I
    I' - I = beta*S'*I - ipred*g(S, I, P)*I' - irem*I'
    P' - P = (gro - comp*P')*P + conv*atk*f(S', I, P)*P
             + iconv*ipred*g(S, I, P)*I'

where primes denote the next step and all coefficients are evaluated at the
current index.  Loss terms are sampled implicitly, which keeps every update
a ratio of nonnegative quantities: positive states stay positive for any
admissible coefficients, with no step-size restriction.

The predation responses f (susceptible prey) and g (infected prey) come
from a small registry.  When both are the identity-type responses the
implicit S equation is linear and the whole step has a closed form
(step_explicit); otherwise S' is found by bracketed bisection
(step_general).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import COEFF_NAMES
from .errors import PositivityViolation

_BISECT_MAX_ITER = 200
_BISECT_RESIDUAL_TOL = 1e-12


# ---------------------------------------------------------------------------
# functional responses

@dataclass(frozen=True)
class FunctionalResponse:
    """A named predation response (x, y, z) -> value >= 0.

    Arguments follow the state order: x susceptible prey, y infected prey,
    z predators.  Declared monotonicity per argument is one of
    "nondecreasing", "nonincreasing" or "flat" and can be spot-checked on a
    grid with check_monotonicity.  linear_in_x marks responses equal to x
    itself, which unlocks closed-form implicit solves.  predator_factor, if
    set, is the factor g0(x, y) of a response of the form g0(x, y)*z; the
    boundedness analysis needs this factorisation.
    """

    name: str
    fn: object
    monotone_x: str
    monotone_y: str
    monotone_z: str
    linear_in_x: bool = False
    predator_factor: object = None
    params: dict = field(default_factory=dict)

    def __call__(self, x, y, z):
        return self.fn(x, y, z)


_BUILDERS = {}


def register_response(name, builder):
    """Register a response builder: params dict -> FunctionalResponse."""
    _BUILDERS[name] = builder


def make_response(name, **params):
    """Instantiate a registered response by name."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown functional response {name!r}") from None
    return builder(params)


def _build_linear_prey(params):
    if params:
        raise ValueError("linear_prey takes no parameters")
    return FunctionalResponse(
        name="linear_prey", fn=lambda x, y, z: x,
        monotone_x="nondecreasing", monotone_y="flat", monotone_z="flat",
        linear_in_x=True)


def _build_linear_predator(params):
    if params:
        raise ValueError("linear_predator takes no parameters")
    return FunctionalResponse(
        name="linear_predator", fn=lambda x, y, z: z,
        monotone_x="flat", monotone_y="flat", monotone_z="nondecreasing",
        predator_factor=lambda x, y: 1.0)


def _build_holling2_prey(params):
    extra = set(params) - {"m"}
    if extra:
        raise ValueError(f"holling2_prey: unknown parameters {sorted(extra)}")
    m = float(params.get("m", 1.0))
    if m < 0:
        raise ValueError("holling2_prey: m must be nonnegative")
    return FunctionalResponse(
        name="holling2_prey", fn=lambda x, y, z: x / (1.0 + m * x),
        monotone_x="nondecreasing", monotone_y="flat", monotone_z="flat",
        params={"m": m})


def _build_ratio_modified(params):
    extra = set(params) - {"q"}
    if extra:
        raise ValueError(f"ratio_modified: unknown parameters {sorted(extra)}")
    q = float(params.get("q", 1.0))
    if q < 0:
        raise ValueError("ratio_modified: q must be nonnegative")
    return FunctionalResponse(
        name="ratio_modified", fn=lambda x, y, z: z / (1.0 + q * y),
        monotone_x="flat", monotone_y="nonincreasing",
        monotone_z="nondecreasing",
        predator_factor=lambda x, y: 1.0 / (1.0 + q * y),
        params={"q": q})


register_response("linear_prey", _build_linear_prey)
register_response("linear_predator", _build_linear_predator)
register_response("holling2_prey", _build_holling2_prey)
register_response("ratio_modified", _build_ratio_modified)


def check_monotonicity(response, grid=20, upper=5.0):
    """Spot-check the declared monotonicity flags on a cubic grid.

    Returns a list of violation witnesses (axis, point_before, point_after,
    value_before, value_after); empty means no violation was found on the
    grid.  A "flat" declaration means constant along that axis and is
    checked as such.
    """
    pts = np.linspace(0.0, upper, grid)
    violations = []
    flags = {"x": response.monotone_x, "y": response.monotone_y,
             "z": response.monotone_z}
    tol = 1e-12 * max(1.0, upper)
    for axis, flag in flags.items():
        for u in pts:
            for v in pts:
                prev = None
                prev_pt = None
                for w in pts:
                    if axis == "x":
                        pt = (w, u, v)
                    elif axis == "y":
                        pt = (u, w, v)
                    else:
                        pt = (u, v, w)
                    val = response(*pt)
                    if prev is not None:
                        diff = val - prev
                        bad = (
                            (flag == "nondecreasing" and diff < -tol)
                            or (flag == "nonincreasing" and diff > tol)
                            or (flag == "flat" and abs(diff) > tol)
                        )
                        if bad:
                            violations.append((axis, prev_pt, pt, prev, val))
                    prev = val
                    prev_pt = pt
    return violations


def h3_requirements_met(f, g):
    """Whether declared flags satisfy the standing monotonicity hypothesis:
    f nondecreasing in x and nonincreasing in y; g nonincreasing in x and y.
    The direction of g in z is free (it only has to be declared)."""
    def at_most(flag, allowed):
        return flag in allowed
    ok_f = (at_most(f.monotone_x, ("nondecreasing", "flat"))
            and at_most(f.monotone_y, ("nonincreasing", "flat")))
    ok_g = (at_most(g.monotone_x, ("nonincreasing", "flat"))
            and at_most(g.monotone_y, ("nonincreasing", "flat")))
    return ok_f and ok_g


# ---------------------------------------------------------------------------
# scenario and trajectory containers

@dataclass(frozen=True)
class Scenario:
    """A fully specified discrete model instance."""

    coeffs: object                 # DiscreteCoefficients
    f: FunctionalResponse          # susceptible-prey predation response
    g: FunctionalResponse          # infected-prey predation response
    initial: tuple                 # (S0, I0, P0)
    label: str = ""


@dataclass
class Trajectory:
    """States along one run, states[j] being the state at index start+j."""

    states: np.ndarray             # shape (steps+1, 3)
    start: int = 0
    scenario: Scenario = None

    @property
    def S(self):
        return self.states[:, 0]

    @property
    def I(self):
        return self.states[:, 1]

    @property
    def P(self):
        return self.states[:, 2]

    def __len__(self):
        return self.states.shape[0]


# ---------------------------------------------------------------------------
# steppers

def _rates_at(coeffs, n):
    return tuple(getattr(coeffs, name).value_at(n) for name in COEFF_NAMES)


def step_explicit(coeffs, n, state):
    """One step of the closed-form scheme for identity-type responses
    (f(x,y,z) = x, g(x,y,z) = z).

    Every factor below is a sum of nonnegative terms, so the update maps
    the nonnegative cone into itself exactly.
    """
    rec, mu, atk, beta, ipred, irem, gro, comp, conv, iconv = _rates_at(coeffs, n)
    S, I, P = state
    s_den = 1.0 + mu + beta * I + atk * P
    i_den = 1.0 + ipred * P + irem
    s_num = rec + S
    S1 = s_num / s_den
    I1 = (beta * s_num + s_den) * I / (s_den * i_den)
    P1 = ((1.0 + gro) * s_den * i_den
          + conv * atk * s_num * i_den
          + iconv * ipred * (s_den + beta * s_num) * I) * P \
        / (s_den * i_den * (1.0 + comp * P))
    return (S1, I1, P1)


def solve_implicit_s(rec, mu, atk, beta, S, I, P, f, *, extra_const=0.0):
    """Solve x*(1 + mu + beta*I) = rec + S + extra_const - atk*f(x, I, P)*P
    for x in [0, rec + S + extra_const] by bracketed bisection.

    The residual at x = 0 is nonnegative whenever f(0, I, P) contributes
    nothing (true for all registered responses) and the residual at the
    upper end is nonpositive since f >= 0, so a root always lies in the
    bracket.  Monotonicity of f in x makes it unique.  The bracket is
    narrowed to machine resolution, well below the 1e-12 residual target.
    """
    total = rec + S + extra_const
    lin = 1.0 + mu + beta * I

    def residual(x):
        return total - x * lin - atk * f(x, I, P) * P

    lo, hi = 0.0, total
    r_lo = residual(lo)
    if r_lo < 0.0:
        raise PositivityViolation(
            "implicit prey update has no nonnegative root")
    if residual(hi) > 0.0:
        # cannot happen for nonnegative f; defensive
        raise PositivityViolation("implicit prey update not bracketed")
    width_tol = 1e-15 * max(1.0, total)
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        r_mid = residual(mid)
        if r_mid == 0.0:
            return mid
        if r_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= width_tol:
            break
    return 0.5 * (lo + hi)


def step_general(coeffs, f, g, n, state):
    """One step of the scheme for arbitrary registered responses.

    The susceptible update is implicit through f and solved by bisection;
    the infected and predator updates are then explicit ratios.
    """
    rec, mu, atk, beta, ipred, irem, gro, comp, conv, iconv = _rates_at(coeffs, n)
    S, I, P = state
    S1 = solve_implicit_s(rec, mu, atk, beta, S, I, P, f)
    g_now = g(S, I, P)
    I1 = (1.0 + beta * S1) * I / (1.0 + ipred * g_now + irem)
    P1 = ((1.0 + gro) * P + conv * atk * f(S1, I, P) * P
          + iconv * ipred * g_now * I1) / (1.0 + comp * P)
    return (S1, I1, P1)


def _linear_pair(scenario):
    return (scenario.f.name == "linear_prey"
            and scenario.g.name == "linear_predator")


def simulate(scenario, n_steps, method="auto"):
    """Iterate the scheme n_steps times from the scenario's initial state.

    method "auto" picks the closed form when both responses are the
    identity type and the bisection stepper otherwise; "explicit" and
    "general" force the choice ("explicit" is rejected for non-identity
    responses).  Returns a Trajectory of n_steps+1 states.
    """
    n_steps = int(n_steps)
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if method not in ("auto", "explicit", "general"):
        raise ValueError(f"unknown method {method!r}")
    use_explicit = _linear_pair(scenario) if method == "auto" else method == "explicit"
    if use_explicit and not _linear_pair(scenario):
        raise ValueError("explicit stepper needs identity-type responses")

    coeffs = scenario.coeffs
    table = coeffs.table(0, n_steps) if n_steps > 0 else {}
    cols = [table[name].tolist() if n_steps > 0 else []
            for name in COEFF_NAMES]
    rec_a, mu_a, atk_a, beta_a, ipred_a, irem_a, gro_a, comp_a, conv_a, iconv_a = cols

    out = np.empty((n_steps + 1, 3))
    S, I, P = (float(v) for v in scenario.initial)
    out[0] = (S, I, P)
    f = scenario.f
    g = scenario.g

    if use_explicit:
        for n in range(n_steps):
            rec = rec_a[n]; mu = mu_a[n]; atk = atk_a[n]; beta = beta_a[n]
            ipred = ipred_a[n]; irem = irem_a[n]; gro = gro_a[n]
            comp = comp_a[n]; conv = conv_a[n]; iconv = iconv_a[n]
            s_den = 1.0 + mu + beta * I + atk * P
            i_den = 1.0 + ipred * P + irem
            s_num = rec + S
            S = s_num / s_den
            I1 = (beta * s_num + s_den) * I / (s_den * i_den)
            P = ((1.0 + gro) * s_den * i_den
                 + conv * atk * s_num * i_den
                 + iconv * ipred * (s_den + beta * s_num) * I) * P \
                / (s_den * i_den * (1.0 + comp * P))
            I = I1
            out[n + 1] = (S, I, P)
    else:
        for n in range(n_steps):
            rec = rec_a[n]; mu = mu_a[n]; atk = atk_a[n]; beta = beta_a[n]
            ipred = ipred_a[n]; irem = irem_a[n]; gro = gro_a[n]
            comp = comp_a[n]; conv = conv_a[n]; iconv = iconv_a[n]
            try:
                S1 = solve_implicit_s(rec, mu, atk, beta, S, I, P, f)
            except PositivityViolation as exc:
                raise PositivityViolation(str(exc), step=n) from None
            g_now = g(S, I, P)
            I1 = (1.0 + beta * S1) * I / (1.0 + ipred * g_now + irem)
            P = ((1.0 + gro) * P + conv * atk * f(S1, I, P) * P
                 + iconv * ipred * g_now * I1) / (1.0 + comp * P)
            S, I = S1, I1
            out[n + 1] = (S, I, P)

    if not np.all(np.isfinite(out)) or np.any(out < 0):
        bad = np.argmax(~np.all(np.isfinite(out) & (out >= 0), axis=1))
        raise PositivityViolation("trajectory left the nonnegative cone",
                                  step=int(bad))
    return Trajectory(states=out, start=0, scenario=scenario)
