"""Time integration: classical RK4 and its integrating-factor variant.

The integrating-factor scheme absorbs the stiff relaxation -u/tau exactly by
integrating the transformed velocity w(t) = exp(t/tau) u(t); the remaining
terms see the standard RK4 tableau.  A pure relaxation step is then exact to
roundoff, and small tau costs no extra stability margin.

Trajectories are sequential; independent runs may execute in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CflViolationError, DomainViolationError
from .spectral import ScalarField, VectorField
from .model import (
    Params,
    SymmetricState,
    PrimitiveState,
    Tendencies,
    project_electric_field,
    rhs_primitive,
    rhs_symmetric,
)

__all__ = ["StepControl", "step", "evolve", "cfl_time_step"]

SCHEMES = ("rk4", "rk4-integrating-factor")


@dataclass(frozen=True)
class StepControl:
    """Time-stepping knobs.

    dt must respect cfl * dx / (psibar + max|u|); violation raises during the
    run, when growing velocity actually breaks the bound.
    """

    dt: float
    t_end: float
    sample_interval: float | None = None
    cfl: float = 0.4
    scheme: str = "rk4"
    e_mode: str = "evolved"        # evolved | projected
    linearized: bool = False

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.e_mode not in ("evolved", "projected"):
            raise ValueError(f"e_mode must be 'evolved' or 'projected', got {self.e_mode!r}")


def cfl_time_step(params: Params, grid, max_speed: float, cfl: float = 0.4) -> float:
    """CFL bound cfl * dx / (psibar + max|u|)."""
    return cfl * grid.dx / (params.psi_bar + max_speed)


def _max_speed(u: VectorField) -> float:
    return float(np.sqrt(np.sum(u.values ** 2, axis=0)).max())


def _pack(state) -> list[np.ndarray]:
    if isinstance(state, SymmetricState):
        return [state.m.values, state.u.values, state.e.values]
    return [state.n.values, state.u.values, state.e.values]


def _rhs(state, params: Params, control: StepControl) -> Tendencies:
    if isinstance(state, SymmetricState):
        return rhs_symmetric(state, params, linearized=control.linearized)
    if control.linearized:
        raise ValueError("linearized mode is only available for the symmetric system")
    return rhs_primitive(state, params)


def _make_state(template, grid, scalar_vals, u_vals, e_vals, params, control):
    scalar = ScalarField(grid, scalar_vals)
    if isinstance(template, SymmetricState):
        if control.e_mode == "projected":
            e = project_electric_field(scalar, params)
        else:
            e = VectorField(grid, e_vals)
        return SymmetricState(scalar, VectorField(grid, u_vals), e)
    return PrimitiveState(scalar, VectorField(grid, u_vals), VectorField(grid, e_vals))


def step(state, params: Params, control: StepControl, t: float = 0.0):
    """Advance one RK4 step; returns the new state.

    Raises CflViolationError when dt exceeds the advective bound and
    DomainViolationError (with time attached) when a stage state leaves the
    admissible region.
    """
    grid = state.u.grid
    bound = cfl_time_step(params, grid, _max_speed(state.u), control.cfl)
    if control.dt > bound * (1.0 + 1e-12):
        raise CflViolationError(
            f"dt={control.dt:.6g} exceeds CFL bound {bound:.6g}", t=t
        )

    h = control.dt
    y0 = _pack(state)
    use_if = control.scheme == "rk4-integrating-factor"

    def eval_rhs(stage_offset: float, ys: list[np.ndarray]) -> list[np.ndarray]:
        scalar_vals, u_vals, e_vals = ys
        if use_if:
            u_vals = u_vals * math.exp(-stage_offset / params.tau)
        stage = _make_state(state, grid, scalar_vals, u_vals, e_vals, params, control)
        try:
            tend = _rhs(stage, params, control)
        except DomainViolationError as err:
            raise DomainViolationError(str(err), t=t, location=err.location) from None
        du = tend.u_t.values
        if use_if:
            # remove the stiff part (handled by the factor) and transform back
            du = (du + u_vals / params.tau) * math.exp(stage_offset / params.tau)
        return [tend.m_t.values, du, tend.e_t.values]

    k1 = eval_rhs(0.0, y0)
    k2 = eval_rhs(0.5 * h, [y + 0.5 * h * k for y, k in zip(y0, k1)])
    k3 = eval_rhs(0.5 * h, [y + 0.5 * h * k for y, k in zip(y0, k2)])
    k4 = eval_rhs(h, [y + h * k for y, k in zip(y0, k3)])
    y1 = [
        y + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        for y, a, b, c, d in zip(y0, k1, k2, k3, k4)
    ]
    if use_if:
        y1[1] = y1[1] * math.exp(-h / params.tau)
    new_state = _make_state(state, grid, y1[0], y1[1], y1[2], params, control)
    _check_admissible(new_state, params, t + h)
    return new_state


def _check_admissible(state, params: Params, t: float) -> None:
    if isinstance(state, SymmetricState):
        margin = 0.5 * (params.gamma - 1.0) * state.m.values + params.psi_bar
        field = "(gamma-1)/2 m + psibar"
    else:
        margin = state.n.values
        field = "density"
    worst = int(np.argmin(margin))
    if margin.flat[worst] <= 0.0:
        where = np.unravel_index(worst, margin.shape)
        raise DomainViolationError(
            f"{field} reached {margin.flat[worst]:.3e} at lattice index {where}",
            t=t, location=where,
        )


Observer = Callable[[float, object, Tendencies], None]


def evolve(
    state,
    params: Params,
    control: StepControl,
    observers: Sequence[Observer] = (),
):
    """Integrate to t_end, invoking observers at sample times.

    Observers receive (t, state, tendencies) where the tendencies are the
    exact right-hand side at the sample state (never finite differences).
    Deterministic for fixed inputs; returns the final state.
    """
    def notify(t, current):
        if observers:
            tend = _rhs(current, params, control)
            for obs in observers:
                obs(t, current, tend)

    notify(0.0, state)
    if control.t_end == 0.0:
        return state

    n_steps = max(1, int(round(control.t_end / control.dt)))
    if abs(n_steps * control.dt - control.t_end) > 1e-9 * max(1.0, control.t_end):
        raise ValueError(
            f"t_end={control.t_end} is not an integer number of steps of dt={control.dt}"
        )
    if control.sample_interval is None:
        stride = n_steps
    else:
        stride = max(1, int(round(control.sample_interval / control.dt)))

    current = state
    for n in range(1, n_steps + 1):
        t_prev = (n - 1) * control.dt
        current = step(current, params, control, t=t_prev)
        if n % stride == 0 or n == n_steps:
            notify(n * control.dt, current)
    return current
