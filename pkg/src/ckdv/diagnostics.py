"""Norms, conserved-quantity tracking, oracle errors, and refinement studies.

All integral diagnostics use the rectangle rule sum(f_i) * h, the discrete
counterpart of the norms the scheme is built around. On a periodic lattice
this rule is spectrally accurate for smooth data, so quadrature error is
negligible next to scheme error at the grid sizes used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import FieldSet, Grid, SystemSpec
from .stepper import RULE_DISPERSIVE_CFL, advance, advise_tau
from .analytic import IC_SOLITON, InitialCondition, sample_initial, soliton_evaluator

# evaluator protocol: t -> exact (n_modes, m_points) values on the grid nodes
OracleEvaluator = Callable[[float], np.ndarray]
# factory protocol: grid nodes -> evaluator for that grid
OracleFactory = Callable[[np.ndarray], OracleEvaluator]


def l2_norm(field_values: Sequence[float], h: float) -> float:
    """Discrete L2 norm sqrt(sum(f_i^2) * h) of one mode."""
    f = np.asarray(field_values, dtype=float)
    return float(np.sqrt(np.sum(f * f) * h))


def hs_invariant(state: FieldSet, h: float) -> float:
    """The conserved functional Q = sum(0.5 theta_1^2 - theta_2^2) * h.

    Only defined for two-mode states.
    """
    if state.n_modes != 2:
        raise ValueError(f"hs_invariant needs a 2-mode state, got {state.n_modes}")
    th1, th2 = state.values
    return float(np.sum(0.5 * th1 * th1 - th2 * th2) * h)


def mode_mass(state: FieldSet, h: float) -> np.ndarray:
    """Per-mode discrete mass sum(theta_n_i) * h."""
    return np.sum(state.values, axis=1) * h


def percent_error(numeric: FieldSet, oracle_eval: OracleEvaluator, amplitude: float) -> np.ndarray:
    """Per-mode max of |exact - numeric| / amplitude * 100.

    The oracle is evaluated at the state's own time on the grid nodes;
    ``amplitude`` is the initial amplitude the error is related to.
    """
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    exact = oracle_eval(numeric.time)
    return np.max(np.abs(exact - numeric.values), axis=1) / amplitude * 100.0


def count_peaks(field_values: Sequence[float], threshold: float) -> int:
    """Count strict local maxima above ``threshold`` on the periodic lattice.

    A plateau (run of equal values) flanked by strictly lower values on
    both sides counts once.
    """
    f = np.asarray(field_values, dtype=float)
    m = f.size
    count = 0
    for i in range(m):
        if f[i] <= threshold or f[i] <= f[(i - 1) % m]:
            continue
        # ascended into a run starting at i; walk to its right edge
        j = i
        while j - i < m and f[(j + 1) % m] == f[i]:
            j += 1
        if j - i >= m:
            break  # constant field, unreachable after the ascent check
        if f[(j + 1) % m] < f[i]:
            count += 1
    return count


@dataclass
class DiagnosticTrace:
    """Time series of run diagnostics, one record per sampled instant.

    ``l2_norms`` and ``mass`` are indexed [mode][record]. ``hs_invariant``
    stays empty for systems that are not two-mode; ``max_percent_error``
    stays empty when no oracle is attached. All populated sequences share
    the length of ``times``.
    """

    times: list[float] = field(default_factory=list)
    l2_norms: list[list[float]] = field(default_factory=list)
    mass: list[list[float]] = field(default_factory=list)
    hs_invariant: list[float] = field(default_factory=list)
    max_percent_error: list[list[float]] = field(default_factory=list)

    def record(
        self,
        state: FieldSet,
        h: float,
        oracle_eval: OracleEvaluator | None = None,
        amplitude: float | None = None,
    ) -> None:
        n = state.n_modes
        if not self.l2_norms:
            self.l2_norms = [[] for _ in range(n)]
            self.mass = [[] for _ in range(n)]
            if oracle_eval is not None:
                self.max_percent_error = [[] for _ in range(n)]
        self.times.append(state.time)
        masses = mode_mass(state, h)
        for mode in range(n):
            self.l2_norms[mode].append(l2_norm(state.values[mode], h))
            self.mass[mode].append(float(masses[mode]))
        if n == 2:
            self.hs_invariant.append(hs_invariant(state, h))
        if oracle_eval is not None:
            errs = percent_error(state, oracle_eval, amplitude)
            for mode in range(n):
                self.max_percent_error[mode].append(float(errs[mode]))

    @property
    def n_records(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors against the oracle across a sequence of halved grid spacings."""

    h_values: tuple[float, ...]
    errors: tuple[float, ...]          # max-norm over all modes and nodes
    l2_errors: tuple[float, ...]       # vector L2 norm over all modes
    observed_orders: tuple[float, ...]  # log2(E_k / E_{k+1})

    def __post_init__(self):
        for a, b in zip(self.h_values, self.h_values[1:]):
            if not math.isclose(b, a / 2.0, rel_tol=1e-12):
                raise ValueError("h_values must decrease by exact factors of 2")


def observed_orders(errors: Sequence[float]) -> tuple[float, ...]:
    """Empirical orders log2(E_k / E_{k+1}) from successive halvings."""
    if any(e <= 0 for e in errors):
        raise ValueError("zero error ratio undefined")
    return tuple(math.log2(errors[k] / errors[k + 1]) for k in range(len(errors) - 1))


def convergence_study(
    spec: SystemSpec,
    ic: InitialCondition | None,
    t_end: float,
    h_coarsest: float,
    n_levels: int = 3,
    *,
    x_min: float = -20.0,
    x_max: float = 20.0,
    safety: float = 0.25,
    oracle_factory: OracleFactory | None = None,
) -> ConvergenceReport:
    """Refinement study at h, h/2, h/4, ... against an exact solution.

    With the default oracle the initial condition must be the plain
    soliton kind and ``spec`` the system it solves. A custom
    ``oracle_factory`` (grid nodes -> time evaluator) covers other exactly
    solvable cases, e.g. decoupled linear modes with sinusoidal data; the
    initial state is then sampled from the oracle at t = 0 and ``ic`` may
    be ``None``. Time steps follow the dispersive limit, so the tau error
    term is subdominant to the h^2 one at every level.
    """
    if n_levels < 3:
        raise ValueError("n_levels must be >= 3")
    if oracle_factory is None:
        if ic is None or ic.kind != IC_SOLITON:
            raise ValueError("default oracle needs an hs_soliton initial condition")
        params = ic.soliton

        def oracle_factory(x: np.ndarray) -> OracleEvaluator:
            return soliton_evaluator(params, x)

    h_values: list[float] = []
    errors: list[float] = []
    l2_errors: list[float] = []
    for level in range(n_levels):
        h = h_coarsest / 2**level
        plan = advise_tau(spec, h, t_end, RULE_DISPERSIVE_CFL, safety)
        n_steps = max(1, math.ceil(t_end / plan.tau - 1e-12))
        tau = t_end / n_steps
        m_points = int(round((x_max - x_min) / h))
        grid = Grid(x_min, h, m_points, tau)
        evaluate = oracle_factory(grid.nodes())
        if ic is not None:
            state = sample_initial(ic, grid)
        else:
            state = FieldSet(evaluate(0.0), 0.0)
        final = advance(state, spec, grid, n_steps)
        diff = np.abs(evaluate(final.time) - final.values)
        h_values.append(h)
        errors.append(float(diff.max()))
        l2_errors.append(float(np.sqrt(np.sum(diff * diff) * h)))
    orders = observed_orders(errors)
    return ConvergenceReport(tuple(h_values), tuple(errors), tuple(l2_errors), orders)
