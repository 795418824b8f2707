import math

import numpy as np
import pytest

from ckdv.analytic import InitialCondition, SolitonParams, sample_initial, soliton_evaluator
from ckdv.diagnostics import l2_norm, mode_mass
from ckdv.errors import BlowUpError
from ckdv.model import (
    FieldSet,
    Grid,
    NonlinearTerm,
    SystemSpec,
    make_hirota_satsuma,
    make_hs_first_kdv,
)
from ckdv.stepper import (
    StepPlan,
    advance,
    advise_tau,
    central_diff1,
    central_diff3,
    full_step,
    half_step,
    single_mode_step,
)

HS = make_hirota_satsuma()
SOLITON = InitialCondition("hs_soliton", soliton=SolitonParams(1.0, 0.0))


def steps_for(spec, h, t_end, safety=0.25):
    plan = advise_tau(spec, h, t_end, "dispersive_cfl", safety)
    n = max(1, math.ceil(t_end / plan.tau - 1e-12))
    return n, t_end / n


# ---------------------------------------------------------------- stencils


def test_diff1_exact_for_quadratic():
    h = 0.25
    i = 8
    x = (np.arange(17) - i) * h + 1.0
    assert central_diff1(x * x, i, h) == 2.0


def test_diff1_zero_on_constant():
    f = np.full(12, 3.7)
    for i in range(12):
        assert central_diff1(f, i, h=0.3) == 0.0


def test_diff1_sin_truncation():
    # error bound h^2/6 * max|f'''| = 1e-4/6 for sin
    h = 0.01
    i = 50
    x = (np.arange(101) - i) * h
    err = abs(central_diff1(np.sin(x), i, h) - 1.0)
    assert err <= 1.7e-5


def test_diff3_exact_for_cubic():
    h = 0.5
    i = 6
    x = (np.arange(13) - i) * h + 1.0
    assert central_diff3(x**3, i, h) == 6.0


def test_diff3_zero_on_constant():
    f = np.full(9, -1.25)
    for i in range(9):
        assert central_diff3(f, i, h=0.1) == 0.0


def test_diff3_sin_at_half_pi():
    # f''' = -cos vanishes at pi/2; the symmetric stencil nearly cancels
    h = 0.01
    i = 50
    x = (np.arange(101) - i) * h + np.pi / 2
    assert abs(central_diff3(np.sin(x), i, h)) <= 2e-5


def test_diff_periodic_wrap():
    f = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    # at i=0 the left neighbour is f[-1]
    assert central_diff1(f, 0, 1.0) == (f[1] - f[5]) / 2.0
    assert central_diff3(f, 5, 1.0) == (f[1] - 2 * f[0] + 2 * f[4] - f[3]) / 2.0


# ---------------------------------------------------------------- steps


def test_half_step_constant_state():
    grid = Grid(0.0, 0.1, 32, 1e-3)
    state = FieldSet(np.full((2, 32), 1.3), 0.5)
    out = half_step(state, HS, grid)
    assert np.array_equal(out.values, state.values)
    assert out.time == pytest.approx(0.5 + 5e-4, rel=1e-15)


def test_half_step_zero_state():
    grid = Grid(0.0, 0.1, 32, 1e-3)
    out = half_step(FieldSet(np.zeros((2, 32)), 0.0), HS, grid)
    assert np.array_equal(out.values, np.zeros((2, 32)))


def test_half_step_matches_oracle():
    # local error O(tau^2 + tau h^2); observed ~5.4e-7 at tau=1e-4, h=0.05
    grid = Grid(-20.0, 0.05, 800, 1e-4)
    state = sample_initial(SOLITON, grid)
    evaluate = soliton_evaluator(SOLITON.soliton, grid.nodes())
    out = half_step(state, HS, grid)
    assert out.time == pytest.approx(5e-5)
    assert np.max(np.abs(out.values - evaluate(out.time))) <= 2e-6


def test_full_step_constant_and_zero():
    grid = Grid(0.0, 0.1, 32, 1e-3)
    const = FieldSet(np.full((2, 32), -0.7), 0.0)
    out = full_step(const, half_step(const, HS, grid), HS, grid)
    assert np.array_equal(out.values, const.values)
    zero = FieldSet(np.zeros((2, 32)), 0.0)
    out = full_step(zero, half_step(zero, HS, grid), HS, grid)
    assert np.array_equal(out.values, zero.values)
    assert out.time == pytest.approx(1e-3)


def test_full_step_matches_oracle():
    grid = Grid(-20.0, 0.05, 800, 1e-4)
    state = sample_initial(SOLITON, grid)
    evaluate = soliton_evaluator(SOLITON.soliton, grid.nodes())
    out = full_step(state, half_step(state, HS, grid), HS, grid)
    assert out.time == pytest.approx(1e-4)
    assert np.max(np.abs(out.values - evaluate(out.time))) <= 4e-6


def test_full_step_rejects_misaligned_half_layer():
    grid = Grid(0.0, 0.1, 32, 1e-3)
    state = FieldSet(np.zeros((2, 32)), 0.0)
    wrong = FieldSet(np.zeros((2, 32)), 0.9)
    with pytest.raises(ValueError):
        full_step(state, wrong, HS, grid)


def test_half_step_flags_nonfinite_output():
    grid = Grid(0.0, 0.1, 32, 1e-3)
    bad = np.zeros((2, 32))
    bad[0, 3] = 1e308
    bad[0, 5] = -1e308
    with np.errstate(all="ignore"), pytest.raises(BlowUpError):
        half_step(FieldSet(bad, 0.0), HS, grid)


# ---------------------------------------------------------------- advance


def test_advance_zero_state_many_steps():
    grid = Grid(0.0, 0.2, 16, 1e-3)
    out = advance(FieldSet(np.zeros((2, 16)), 0.0), HS, grid, 1000)
    assert np.array_equal(out.values, np.zeros((2, 16)))
    assert out.time == pytest.approx(1.0)


def test_advance_soliton_crest_transport():
    # crest of the m=1 soliton must sit within one spacing of x = t/2
    h = 0.1
    n, tau = steps_for(HS, h, 1.0)
    grid = Grid(-20.0, h, 400, tau)
    state = sample_initial(SOLITON, grid)
    final = advance(state, HS, grid, n)
    crest = grid.nodes()[int(np.argmax(final.values[0]))]
    assert abs(crest - 0.5) <= h + 1e-12


def test_advance_blow_up_at_inflated_tau():
    h = 0.05
    plan = advise_tau(HS, h, 1.0, "dispersive_cfl", 0.25)
    grid = Grid(-20.0, h, 800, plan.tau * 100.0)
    state = sample_initial(SOLITON, grid)
    with pytest.raises(BlowUpError) as info:
        advance(state, HS, grid, 1000)
    assert info.value.step is not None and info.value.step <= 1000


def test_advance_stable_at_cfl_tau():
    h = 0.1
    n, tau = steps_for(HS, h, 1.0)
    grid = Grid(-20.0, h, 400, tau)
    final = advance(sample_initial(SOLITON, grid), HS, grid, n)
    assert final.is_finite()
    assert final.max_norm() < 10.0


def test_advance_observer_sees_every_layer():
    grid = Grid(0.0, 0.2, 16, 1e-3)
    seen = []
    advance(FieldSet(np.zeros((2, 16)), 0.0), HS, grid, 7, observer=lambda j, s: seen.append((j, s.time)))
    assert [j for j, _ in seen] == list(range(1, 8))
    assert seen[-1][1] == pytest.approx(7e-3)


# ------------------------------------------------------- scheme invariants


def test_mass_telescopes_for_k_equals_m_modes():
    # HS mode 1 couples only through k=m products: its discrete mass is
    # exact per step; mode 2 is not protected
    rng = np.random.default_rng(7)
    grid = Grid(0.0, 0.1, 64, 1e-4)
    values = rng.normal(scale=0.5, size=(2, 64))
    state = FieldSet(values, 0.0)
    half = half_step(state, HS, grid)
    full = full_step(state, half, HS, grid)
    scale = np.sum(np.abs(values[0])) * grid.h
    tol = 100 * np.finfo(float).eps * max(1.0, scale)
    m0 = mode_mass(state, grid.h)
    assert abs(mode_mass(half, grid.h)[0] - m0[0]) <= tol
    assert abs(mode_mass(full, grid.h)[0] - m0[0]) <= tol


def test_shift_equivariance_is_exact():
    n_steps = 40
    h = 0.1
    grid = Grid(-20.0, h, 400, 1e-4)
    state = sample_initial(SOLITON, grid)
    shifted = FieldSet(np.roll(state.values, 123, axis=1), 0.0)
    out = advance(state, HS, grid, n_steps)
    out_shifted = advance(shifted, HS, grid, n_steps)
    assert np.array_equal(np.roll(out.values, 123, axis=1), out_shifted.values)


def test_single_mode_reduction_is_bitwise():
    rng = np.random.default_rng(0)
    f = np.cumsum(rng.standard_normal(64))
    f -= f.mean()
    grid = Grid(0.0, 0.3, 64, 1e-4)
    c, g, d = 0.7, -1.5, -0.25
    spec = SystemSpec(1, (c,), (d,), (NonlinearTerm(1, 1, 1, g),))
    state = FieldSet(f[None, :], 0.0)
    general = full_step(state, half_step(state, spec, grid), spec, grid)
    reference = single_mode_step(f, c, g, d, grid)
    assert np.array_equal(general.values[0], reference)


def test_l2_drift_shrinks_under_refinement():
    # left-moving exact soliton of the isolated first equation
    kdv1 = make_hs_first_kdv()
    drifts = []
    for h in (0.2, 0.1, 0.05):
        n, tau = steps_for(kdv1, h, 1.0)
        grid = Grid(-20.0, h, round(40 / h), tau)
        u0 = 2.0 / np.cosh(grid.nodes()) ** 2
        state = FieldSet(u0[None, :], 0.0)
        final = advance(state, kdv1, grid, n)
        n0 = l2_norm(state.values[0], h)
        n1 = l2_norm(final.values[0], h)
        drifts.append(abs(n1 - n0) / n0)
    assert drifts[1] <= drifts[0] * 1.05
    assert drifts[2] <= drifts[1] * 1.05


# ---------------------------------------------------------------- advisor


def test_advise_tau_paper_strict_arithmetic():
    plan = advise_tau(HS, 0.2, 1.0, "paper_strict", safety=1.0)
    assert plan.tau == pytest.approx(0.2**6 / (9 * 0.5**2 * 1.0), rel=1e-12)
    assert plan.tau == pytest.approx(2.844e-5, rel=1e-3)
    assert plan.rule == "paper_strict"


def test_advise_tau_dispersive_cfl_arithmetic():
    plan = advise_tau(HS, 0.1, 1.0, "dispersive_cfl", safety=0.25)
    assert plan.tau == pytest.approx(0.25 * 0.1**3 / (3 * 0.5), rel=1e-12)
    assert plan.tau == pytest.approx(1.667e-4, rel=1e-3)


def test_advise_tau_linear_in_safety():
    one = advise_tau(HS, 0.2, 1.0, "paper_strict", safety=1.0)
    two = advise_tau(HS, 0.2, 1.0, "paper_strict", safety=2.0)
    assert two.tau == 2.0 * one.tau


def test_advise_tau_manual_passthrough():
    plan = advise_tau(HS, 0.1, 1.0, "manual", tau=0.017)
    assert plan.tau == 0.017
    with pytest.raises(ValueError):
        advise_tau(HS, 0.1, 1.0, "manual")


def test_advise_tau_rejects_pure_advection():
    spec = SystemSpec(1, (1.0,), (1.0 * 0.1**2 / 6.0,), ())  # e vanishes at h=0.1
    with pytest.raises(ValueError):
        advise_tau(spec, 0.1, 1.0, "dispersive_cfl")


def test_advise_tau_rejects_bad_inputs():
    with pytest.raises(ValueError):
        advise_tau(HS, -0.1, 1.0)
    with pytest.raises(ValueError):
        advise_tau(HS, 0.1, 0.0)
    with pytest.raises(ValueError):
        advise_tau(HS, 0.1, 1.0, "no_such_rule")


def test_step_plan_invariants():
    with pytest.raises(ValueError):
        StepPlan(tau=0.0, rule="manual", safety=1.0, t_end=1.0)
    with pytest.raises(ValueError):
        StepPlan(tau=0.1, rule="manual", safety=-1.0, t_end=1.0)
