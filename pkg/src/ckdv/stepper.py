"""Two-step, three-time-level explicit scheme for coupled KdV systems.

One time step advances a layer j to j+1 through an intermediate layer at
j+1/2. With D1 and D3 the centered first/third difference stencils and
e_n the grid-corrected dispersion constants,

    theta^(j+1/2) = theta^j - (tau/2) * R(theta^j)
    theta^(j+1)   = theta^j -  tau    * R(theta^(j+1/2))

where for each mode n

    R_n(u) = c_n D1(u_n) + sum_terms g * u_k * D1(u_m) + e_n D3(u_n).

The scheme is conditionally stable: tau must shrink faster than h. The
step-size advisor offers the strict sixth-power bound
tau = safety * h^6 / (9 e_max^2 t_end) and the practical dispersive limit
tau = safety * h^3 / (3 e_max); the latter is what makes desk-scale runs
tractable and is validated empirically by the stability tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BlowUpError
from .model import FieldSet, Grid, NonlinearTerm, SystemSpec, effective_dispersion

RULE_PAPER_STRICT = "paper_strict"
RULE_DISPERSIVE_CFL = "dispersive_cfl"
RULE_MANUAL = "manual"
RULES = (RULE_PAPER_STRICT, RULE_DISPERSIVE_CFL, RULE_MANUAL)

# A layer has blown up when its max-norm exceeds this factor times the
# initial max-norm (or contains non-finite entries).
BLOWUP_FACTOR = 1.0e6

Observer = Callable[[int, FieldSet], None]


@dataclass(frozen=True)
class StepPlan:
    """A chosen time step and the rule that produced it."""

    tau: float
    rule: str
    safety: float
    t_end: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.safety <= 0:
            raise ValueError("safety must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")


def central_diff1(field: Sequence[float], i: int, h: float) -> float:
    """Centered first difference (f_{i+1} - f_{i-1}) / 2h with periodic wrap."""
    f = np.asarray(field, dtype=float)
    m = f.size
    return (f[(i + 1) % m] - f[(i - 1) % m]) / (2.0 * h)


def central_diff3(field: Sequence[float], i: int, h: float) -> float:
    """Centered third difference over the five-point stencil, periodic wrap.

    (f_{i+2} - 2 f_{i+1} + 2 f_{i-1} - f_{i-2}) / 2h^3; exact for cubics.
    """
    f = np.asarray(field, dtype=float)
    m = f.size
    return (
        f[(i + 2) % m] - 2.0 * f[(i + 1) % m] + 2.0 * f[(i - 1) % m] - f[(i - 2) % m]
    ) / (2.0 * h**3)


class _Kernel:
    """Precomputed per-run coefficients for the right-hand side R."""

    def __init__(self, spec: SystemSpec, h: float):
        self.h = h
        self.speeds = np.asarray(spec.linear_speeds, dtype=float).reshape(-1, 1)
        self.e = effective_dispersion(spec, h).reshape(-1, 1)
        # 0-based (n, k, m, coef) term list in spec order
        self.terms = [(t.n - 1, t.k - 1, t.m - 1, float(t.coef)) for t in spec.nonlinear_terms]

    def rhs(self, values: np.ndarray) -> np.ndarray:
        # all modes at once; the stencils act along the spatial axis
        h = self.h
        up1 = np.roll(values, -1, axis=1)
        dn1 = np.roll(values, 1, axis=1)
        d1 = (up1 - dn1) / (2.0 * h)
        d3 = (np.roll(values, -2, axis=1) - 2.0 * up1 + 2.0 * dn1 - np.roll(values, 2, axis=1)) / (
            2.0 * h**3
        )
        acc = np.zeros_like(values)
        for n, k, m, coef in self.terms:
            acc[n] += coef * (values[k] * d1[m])
        return self.speeds * d1 + acc + self.e * d3


def half_step(state: FieldSet, spec: SystemSpec, grid: Grid) -> FieldSet:
    """Advance to the intermediate layer at t + tau/2."""
    kern = _Kernel(spec, grid.h)
    new_values = state.values - (0.5 * grid.tau) * kern.rhs(state.values)
    if not np.isfinite(new_values).all():
        raise BlowUpError("non-finite values in half step", time=state.time)
    return FieldSet(new_values, state.time + 0.5 * grid.tau)


def full_step(state_j: FieldSet, state_half: FieldSet, spec: SystemSpec, grid: Grid) -> FieldSet:
    """Complete the step to t + tau from layer j and the intermediate layer."""
    expected = state_j.time + 0.5 * grid.tau
    if abs(state_half.time - expected) > 1e-9 * max(1.0, abs(expected)):
        raise ValueError(
            f"intermediate layer at t={state_half.time} does not sit tau/2 after t={state_j.time}"
        )
    kern = _Kernel(spec, grid.h)
    new_values = state_j.values - grid.tau * kern.rhs(state_half.values)
    if not np.isfinite(new_values).all():
        raise BlowUpError("non-finite values in full step", time=state_j.time)
    return FieldSet(new_values, state_j.time + grid.tau)


def single_mode_step(field: np.ndarray, c: float, g: float, d: float, grid: Grid) -> np.ndarray:
    """Reference one-step update for a single KdV equation.

    Direct transcription of the scheme for one mode with one self-coupling
    term, kept textually independent of the general path so the two can be
    cross-checked; for an N=1 system both must agree bitwise.
    """
    spec1 = SystemSpec(1, (c,), (d,), (NonlinearTerm(1, 1, 1, g),))
    e = float(effective_dispersion(spec1, grid.h)[0])
    h = grid.h
    tau = grid.tau
    f = np.asarray(field, dtype=float)

    d1 = (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
    d3 = (np.roll(f, -2) - 2.0 * np.roll(f, -1) + 2.0 * np.roll(f, 1) - np.roll(f, 2)) / (
        2.0 * h**3
    )
    acc = np.zeros(f.size)
    acc = acc + g * (f * d1)
    half = f - (0.5 * tau) * (c * d1 + acc + e * d3)

    d1h = (np.roll(half, -1) - np.roll(half, 1)) / (2.0 * h)
    d3h = (
        np.roll(half, -2) - 2.0 * np.roll(half, -1) + 2.0 * np.roll(half, 1) - np.roll(half, 2)
    ) / (2.0 * h**3)
    acch = np.zeros(f.size)
    acch = acch + g * (half * d1h)
    return f - tau * (c * d1h + acch + e * d3h)


def advance(
    state: FieldSet,
    spec: SystemSpec,
    grid: Grid,
    n_steps: int,
    observer: Observer | None = None,
) -> FieldSet:
    """Run ``n_steps`` full steps from ``state``; return the final layer.

    ``observer(step, layer)`` is called after each completed step with the
    1-based step index. Raises :class:`BlowUpError` carrying the offending
    step index when a layer goes non-finite or its max-norm exceeds 1e6
    times the initial max-norm.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    kern = _Kernel(spec, grid.h)
    tau = grid.tau
    t0 = state.time
    values = state.values
    initial_max = float(np.max(np.abs(values)))
    limit = BLOWUP_FACTOR * initial_max if initial_max > 0 else np.inf

    def check(layer: np.ndarray, j: int) -> None:
        # a NaN max-norm fails the comparison, so this also catches non-finite layers
        amax = float(np.max(np.abs(layer)))
        if not (amax <= limit) or not np.isfinite(amax):
            raise BlowUpError(
                f"blow-up at step {j} (t ~ {t0 + j * tau:.6g})", step=j, time=t0 + j * tau
            )

    current = state
    for j in range(1, n_steps + 1):
        half = values - (0.5 * tau) * kern.rhs(values)
        check(half, j)
        nxt = values - tau * kern.rhs(half)
        check(nxt, j)
        values = nxt
        current = FieldSet(values, t0 + j * tau)
        if observer is not None:
            observer(j, current)
    return current


def advise_tau(
    spec: SystemSpec,
    h: float,
    t_end: float,
    rule: str = RULE_DISPERSIVE_CFL,
    safety: float = 0.25,
    tau: float | None = None,
) -> StepPlan:
    """Pick a stable time step for the given grid spacing and run length.

    ``paper_strict`` solves the conservative bound
    ``tau * (3 e_max / h^3)^2 * t_end = safety``; ``dispersive_cfl`` is the
    practical explicit-scheme limit ``tau = safety * h^3 / (3 e_max)``
    (default safety 0.25); ``manual`` passes the caller's ``tau`` through.
    Non-manual rules reject pure-advection systems (e_max = 0).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {RULES}")
    if rule == RULE_MANUAL:
        if tau is None:
            raise ValueError("manual rule requires an explicit tau")
        return StepPlan(tau=float(tau), rule=rule, safety=safety, t_end=t_end)
    e_max = float(np.max(np.abs(effective_dispersion(spec, h))))
    if e_max == 0.0:
        raise ValueError("e_max is zero (pure advection); use the manual rule")
    if rule == RULE_PAPER_STRICT:
        chosen = safety * h**6 / (9.0 * e_max**2 * t_end)
    else:
        chosen = safety * h**3 / (3.0 * e_max)
    return StepPlan(tau=chosen, rule=rule, safety=safety, t_end=t_end)
