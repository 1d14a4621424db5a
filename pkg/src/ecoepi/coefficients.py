"""Time-varying coefficients and their nonstandard discretisation.

A model instance is declared through ten continuous-time coefficient
profiles.  The discrete system samples them at t = n*h; rate coefficients
are additionally scaled by the step size h while conversion fractions are
sampled unscaled.  Everything downstream (steppers, auxiliary systems,
thresholds) consumes the resulting per-step sequences and never touches
continuous time again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AperiodicInput

# Canonical coefficient roles.  The first eight are rates (scaled by h on
# discretisation), the last two are dimensionless conversion fractions.
RATE_NAMES = (
    "recruitment",            # susceptible prey inflow
    "mortality",              # susceptible natural death
    "predation",              # predator attack rate on susceptible prey
    "transmission",           # disease incidence rate
    "infected_predation",     # predator attack rate on infected prey
    "infected_removal",       # infected prey death (natural + disease)
    "predator_growth",        # predator intrinsic growth
    "predator_competition",   # predator intraspecific competition
)
FRACTION_NAMES = (
    "conversion",             # biomass conversion from susceptible prey
    "infected_conversion",    # biomass conversion from infected prey
)
COEFF_NAMES = RATE_NAMES + FRACTION_NAMES

_PERIOD_RTOL = 1e-9


@dataclass(frozen=True)
class CoefficientSpec:
    """One coefficient profile in continuous time.

    kind is "constant", "cosine" or "table".  A cosine profile evaluates to
    base*(1 + amplitude*cos(frequency*t)); a table holds its k-th entry on
    [k, k+1) and extends past the end either by holding the last value
    ("hold") or wrapping periodically ("wrap").
    """

    kind: str
    value: float = 0.0
    base: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0
    values: tuple = ()
    extend: str = "hold"

    def __post_init__(self):
        if self.kind not in ("constant", "cosine", "table"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "table":
            if len(self.values) == 0:
                raise ValueError("table coefficient needs at least one value")
            if self.extend not in ("hold", "wrap"):
                raise ValueError(f"unknown table extension {self.extend!r}")

    @staticmethod
    def constant(value):
        return CoefficientSpec(kind="constant", value=float(value))

    @staticmethod
    def cosine(base, amplitude, frequency):
        return CoefficientSpec(kind="cosine", base=float(base),
                               amplitude=float(amplitude),
                               frequency=float(frequency))

    @staticmethod
    def table(values, extend="hold"):
        return CoefficientSpec(kind="table",
                               values=tuple(float(v) for v in values),
                               extend=extend)

    def at(self, t):
        """Continuous-time value at t >= 0."""
        if self.kind == "constant":
            return self.value
        if self.kind == "cosine":
            return self.base * (1.0 + self.amplitude * math.cos(self.frequency * t))
        i = int(math.floor(t))
        m = len(self.values)
        if self.extend == "wrap":
            return self.values[i % m]
        return self.values[min(max(i, 0), m - 1)]

    def sample(self, t_array):
        """Vectorised evaluation over an array of times."""
        t = np.asarray(t_array, dtype=float)
        if self.kind == "constant":
            return np.full(t.shape, self.value)
        if self.kind == "cosine":
            return self.base * (1.0 + self.amplitude * np.cos(self.frequency * t))
        idx = np.floor(t).astype(int)
        m = len(self.values)
        table = np.asarray(self.values)
        if self.extend == "wrap":
            return table[idx % m]
        return table[np.clip(idx, 0, m - 1)]

    def period_steps(self, h):
        """Smallest integer p with value((n+p)*h) == value(n*h) for all n,
        or None when no such integer exists."""
        if self.kind == "constant":
            return 1
        if self.kind == "cosine":
            if self.amplitude == 0.0 or self.frequency == 0.0:
                return 1
            p = 2.0 * math.pi / (abs(self.frequency) * h)
            p_int = round(p)
            if p_int >= 1 and abs(p - p_int) <= _PERIOD_RTOL * max(1.0, p):
                return p_int
            return None
        # table
        if len(set(self.values)) == 1:
            return 1
        if self.extend == "hold":
            return None
        p = len(self.values) / h
        p_int = round(p)
        if p_int >= 1 and abs(p - p_int) <= _PERIOD_RTOL * max(1.0, p):
            return p_int
        return None


@dataclass(frozen=True)
class CoefficientSequence:
    """A coefficient profile sampled on the step grid.

    value_at(n) returns h*profile(n*h) for rates and profile(n*h) for
    conversion fractions.  Sequences are pure: the same n always yields the
    same value.
    """

    spec: CoefficientSpec
    step_size: float = 1.0
    scale_by_step: bool = True

    def value_at(self, n):
        v = self.spec.at(n * self.step_size)
        return v * self.step_size if self.scale_by_step else v

    def array(self, n0, n1):
        """Values for n in [n0, n1) as a numpy array."""
        if n1 <= n0:
            return np.empty(0)
        t = np.arange(n0, n1, dtype=float) * self.step_size
        v = self.spec.sample(t)
        return v * self.step_size if self.scale_by_step else v

    def period(self):
        return self.spec.period_steps(self.step_size)


@dataclass(frozen=True)
class ContinuousModelSpec:
    """The ten coefficient profiles of the continuous model."""

    recruitment: CoefficientSpec
    mortality: CoefficientSpec
    predation: CoefficientSpec
    transmission: CoefficientSpec
    infected_predation: CoefficientSpec
    infected_removal: CoefficientSpec
    predator_growth: CoefficientSpec
    predator_competition: CoefficientSpec
    conversion: CoefficientSpec
    infected_conversion: CoefficientSpec
    label: str = ""


@dataclass(frozen=True)
class DiscreteCoefficients:
    """Per-step coefficient sequences for the discretised system."""

    recruitment: CoefficientSequence
    mortality: CoefficientSequence
    predation: CoefficientSequence
    transmission: CoefficientSequence
    infected_predation: CoefficientSequence
    infected_removal: CoefficientSequence
    predator_growth: CoefficientSequence
    predator_competition: CoefficientSequence
    conversion: CoefficientSequence
    infected_conversion: CoefficientSequence
    step_size: float = 1.0

    def sequences(self):
        return {name: getattr(self, name) for name in COEFF_NAMES}

    def table(self, n0, n1):
        """Materialise all ten sequences over [n0, n1) as arrays."""
        return {name: getattr(self, name).array(n0, n1) for name in COEFF_NAMES}

    def period(self, names=None):
        """Common integer period of the named sequences (all ten when names
        is None), or None when any member is aperiodic."""
        if names is None:
            names = COEFF_NAMES
        p = 1
        for name in names:
            q = getattr(self, name).period()
            if q is None:
                return None
            p = p * q // math.gcd(p, q)
        return p

    def require_period(self, names=None):
        p = self.period(names)
        if p is None:
            raise AperiodicInput("coefficients have no common integer period")
        return p


def discretize_continuous(model, h):
    """Build per-step sequences from a continuous model spec.

    Rates are scaled by h, conversion fractions are not.  h must be a
    positive finite float.
    """
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0):
        raise ValueError(f"step size must be positive and finite, got {h!r}")
    h = float(h)
    kwargs = {"step_size": h}
    for name in RATE_NAMES:
        kwargs[name] = CoefficientSequence(getattr(model, name), h, True)
    for name in FRACTION_NAMES:
        kwargs[name] = CoefficientSequence(getattr(model, name), h, False)
    return DiscreteCoefficients(**kwargs)


@dataclass
class ValidationReport:
    """Outcome of the admissibility checks over a finite horizon."""

    h1_ok: bool
    h2_ok: bool
    violations: list = field(default_factory=list)
    horizon: int = 0

    @property
    def ok(self):
        return self.h1_ok and self.h2_ok


def validate_h1_h2(coeffs, horizon=1000):
    """Check coefficient admissibility over step indices [0, horizon].

    The first group of clauses (nonnegativity and finiteness of all ten
    sequences, strictly positive mortality, mortality never exceeding
    infected removal) must hold for the discrete system to make sense at
    all.  The second group (recruitment, predator growth and predator
    competition staying positive) is only needed by the threshold and
    persistence machinery.  Violations carry the clause and the first
    offending index.
    """
    horizon = int(horizon)
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    n1 = horizon + 1
    table = coeffs.table(0, n1)
    violations = []
    h1_ok = True
    h2_ok = True

    for name in COEFF_NAMES:
        vals = table[name]
        if not np.all(np.isfinite(vals)):
            h1_ok = False
            idx = int(np.argmax(~np.isfinite(vals)))
            violations.append(("h1", f"{name} non-finite", idx))
        elif np.any(vals < 0):
            h1_ok = False
            idx = int(np.argmax(vals < 0))
            violations.append(("h1", f"{name} negative", idx))
        # structural check: a cosine with |amplitude| > 1 dips negative at
        # some real time even if the sampled grid happens to miss it
        spec = getattr(coeffs, name).spec
        if spec.kind == "cosine" and (spec.base < 0 or abs(spec.amplitude) > 1):
            h1_ok = False
            violations.append(("h1", f"{name} cosine profile attains negative values", -1))

    mort = table["mortality"]
    if np.any(mort <= 0):
        h1_ok = False
        violations.append(("h1", "mortality not strictly positive",
                           int(np.argmax(mort <= 0))))
    gap = table["infected_removal"] - mort
    if np.any(gap < 0):
        h1_ok = False
        violations.append(("h1", "mortality exceeds infected removal",
                           int(np.argmax(gap < 0))))

    for name in ("recruitment", "predator_growth", "predator_competition"):
        vals = table[name]
        if np.any(vals <= 0):
            h2_ok = False
            violations.append(("h2", f"{name} not bounded away from zero",
                               int(np.argmax(vals <= 0))))

    return ValidationReport(h1_ok=h1_ok, h2_ok=h2_ok, violations=violations,
                            horizon=horizon)


@dataclass
class H4Certificate:
    """Geometric-decay certificate for the mortality survival products.

    When holds is True, the product of 1/(1+mortality_k) over any index
    range [m, n) within the horizon is bounded by K * decay_rate**(n-m),
    with decay_rate < 1 estimated from the worst tail window of length
    window+1 and K the smallest constant validating the bound on the
    horizon.
    """

    holds: bool
    decay_rate: float
    bound_constant: float
    window: int
    horizon: int
    worst_window_product: float


def check_h4(coeffs, window, horizon=2000):
    """Certify geometric decay of survival products over a finite horizon.

    The decay rate is estimated from the maximum of the sliding products
    prod_{k=n}^{n+window} 1/(1+mortality_k) over the second half of the
    horizon, so the horizon should cover several periods of a periodic
    mortality profile.  This is an empirical certificate, not a proof for
    the infinite sequence.
    """
    window = int(window)
    horizon = int(horizon)
    if window < 0:
        raise ValueError("window must be nonnegative")
    if horizon < window + 1:
        raise ValueError("horizon too short for the requested window")

    mort = coeffs.mortality.array(0, horizon + 1)
    logs = -np.log1p(mort)
    # cum[j] = sum of logs over k < j
    cum = np.concatenate(([0.0], np.cumsum(logs)))

    w = window + 1
    starts = np.arange(0, horizon + 1 - w + 1)
    win_logs = cum[starts + w] - cum[starts]
    tail_from = len(starts) // 2
    worst_log = float(np.max(win_logs[tail_from:]))
    worst = math.exp(worst_log)
    holds = worst < 1.0
    rate = worst ** (1.0 / w)

    if holds:
        # smallest K with cum-products <= K * rate**(n-m) for all m < n
        log_rate = worst_log / w
        drift = cum - log_rate * np.arange(len(cum))
        running_min = np.minimum.accumulate(drift)
        log_k = float(np.max(drift[1:] - running_min[:-1]))
        bound_k = math.exp(log_k)
    else:
        bound_k = math.inf

    return H4Certificate(holds=holds, decay_rate=rate, bound_constant=bound_k,
                         window=window, horizon=horizon,
                         worst_window_product=worst)
