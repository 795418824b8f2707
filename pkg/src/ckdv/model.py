"""System definitions for N-mode coupled Korteweg-de Vries equations.

A system of N interacting wave modes theta_n(x, t) is

    (theta_n)_t + c_n (theta_n)_x
        + sum over terms g * theta_k * (theta_m)_x
        + d_n (theta_n)_xxx = 0,

with linear speeds c_n, dispersion constants d_n, and a sparse set of
nonlinear coupling coefficients. Mode indices n, k, m are 1-based
everywhere in the public records (matching the usual subscript notation);
array storage inside the solver is 0-based.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NonlinearTerm:
    """One coupling term of mode ``n``'s equation: ``coef * theta_k * (theta_m)_x``.

    ``n`` is the equation the term belongs to, ``k`` the undifferentiated
    factor, ``m`` the differentiated factor. Indices are 1-based.
    """

    n: int
    k: int
    m: int
    coef: float


@dataclass(frozen=True)
class SystemSpec:
    """Coefficients defining an N-mode coupled KdV system.

    Immutable after construction; safe to share across concurrent runs.
    Use :func:`validate_spec` to check the index invariants of data that
    did not come from one of the factory functions.
    """

    n_modes: int
    linear_speeds: tuple[float, ...]
    dispersions: tuple[float, ...]
    nonlinear_terms: tuple[NonlinearTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "linear_speeds", tuple(float(c) for c in self.linear_speeds))
        object.__setattr__(self, "dispersions", tuple(float(d) for d in self.dispersions))
        object.__setattr__(self, "nonlinear_terms", tuple(self.nonlinear_terms))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic spatial lattice plus the time step.

    Nodes are ``x_min + i*h`` for ``i in [0, m_points)``; index arithmetic
    wraps modulo ``m_points``, so the right edge is identified with the
    left one.
    """

    x_min: float
    h: float
    m_points: int
    tau: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("grid spacing h must be positive")
        if self.tau <= 0:
            raise ValueError("time step tau must be positive")
        if self.m_points < 5:
            raise ValueError("m_points must be at least 5 (widest stencil spans 5 points)")

    @property
    def x_max(self) -> float:
        return self.x_min + self.m_points * self.h

    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.m_points)


@dataclass(frozen=True, eq=False)
class FieldSet:
    """Mode amplitudes on the grid at one time level.

    ``values`` has shape (N, M): one row per mode. The array is copied and
    frozen read-only on construction. Non-finite entries are representable
    (they signal blow-up) and are detected by the stepper, not here.
    """

    values: np.ndarray
    time: float

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim != 2:
            raise ValueError("FieldSet values must be a 2-D (n_modes, m_points) array")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "time", float(self.time))

    @property
    def n_modes(self) -> int:
        return self.values.shape[0]

    @property
    def m_points(self) -> int:
        return self.values.shape[1]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def make_hirota_satsuma() -> SystemSpec:
    """The integrable Hirota-Satsuma two-mode system.

        (theta_1)_t - 0.25 (theta_1)_xxx - 1.5 theta_1 (theta_1)_x
                    + 3 theta_2 (theta_2)_x = 0
        (theta_2)_t + 0.5 (theta_2)_xxx + 1.5 theta_1 (theta_2)_x = 0
    """
    return SystemSpec(
        n_modes=2,
        linear_speeds=(0.0, 0.0),
        dispersions=(-0.25, 0.5),
        nonlinear_terms=(
            NonlinearTerm(n=1, k=1, m=1, coef=-1.5),
            NonlinearTerm(n=1, k=2, m=2, coef=3.0),
            NonlinearTerm(n=2, k=1, m=2, coef=1.5),
        ),
    )


def make_perturbed_hs(d1_new: float) -> SystemSpec:
    """Hirota-Satsuma with the first dispersion constant replaced by ``d1_new``.

    Any value other than -0.25 breaks integrability; nearby values give a
    slightly nonintegrable system that still evolves soliton-like states.
    """
    hs = make_hirota_satsuma()
    return dataclasses.replace(hs, dispersions=(float(d1_new), hs.dispersions[1]))


def make_hs_first_kdv() -> SystemSpec:
    """The isolated first Hirota-Satsuma equation as a single-mode KdV.

        theta_t - 0.25 theta_xxx - 1.5 theta theta_x = 0
    """
    return SystemSpec(
        n_modes=1,
        linear_speeds=(0.0,),
        dispersions=(-0.25,),
        nonlinear_terms=(NonlinearTerm(n=1, k=1, m=1, coef=-1.5),),
    )


def effective_dispersion(spec: SystemSpec, h: float) -> np.ndarray:
    """Grid-corrected dispersion constants ``e_n = d_n - c_n h^2 / 6``.

    The correction cancels the leading truncation error of the centered
    first-derivative stencil, making the advective part fourth-order
    accurate.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    c = np.asarray(spec.linear_speeds, dtype=float)
    d = np.asarray(spec.dispersions, dtype=float)
    return d - c * h * h / 6.0


def validate_spec(spec: SystemSpec) -> str | None:
    """Check SystemSpec invariants; return a description of the first
    violation found, or ``None`` when the system definition is well formed."""
    n = spec.n_modes
    if n < 1:
        return f"n_modes must be >= 1, got {n}"
    if len(spec.linear_speeds) != n:
        return f"expected {n} linear speeds, got {len(spec.linear_speeds)}"
    if len(spec.dispersions) != n:
        return f"expected {n} dispersion constants, got {len(spec.dispersions)}"
    seen: set[tuple[int, int, int]] = set()
    for term in spec.nonlinear_terms:
        for label, idx in (("n", term.n), ("k", term.k), ("m", term.m)):
            if not 1 <= idx <= n:
                return (
                    f"index out of range: term ({term.n},{term.k},{term.m}) "
                    f"has {label}={idx} outside [1, {n}]"
                )
        triple = (term.n, term.k, term.m)
        if triple in seen:
            return f"duplicate term ({term.n},{term.k},{term.m}); pre-sum repeated coefficients"
        seen.add(triple)
    return None
