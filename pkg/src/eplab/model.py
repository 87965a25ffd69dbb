"""Physical parameters, state bundles, variable transforms, and tendencies.

Primitive variables are the density ``n``, velocity ``u``, and electric field
``e`` of the relaxed Euler-Poisson system

    n_t + div(n u) = 0,
    u_t + (u.grad) u + (1/n) grad p(n) = e - u / tau,         p(n) = A n^gamma,
    e_t = -grad lap^{-1} div(n u),            div e = n - nbar,

on the periodic box.  The symmetrized variables replace ``n`` by a scaled
sound-speed perturbation: with ``psi(n) = sqrt(p'(n))`` and
``psibar = psi(nbar)``,

    isentropic (gamma > 1):  m = 2 (psi(n) - psibar) / (gamma - 1),
    isothermal (gamma = 1):  m = sqrt(A) (log n - log nbar),

which turns the pressure nonlinearity into linear and bilinear terms:

    m_t + psibar div u = -u.grad m - (gamma-1)/2 m div u,
    u_t + psibar grad m + u/tau = -u.grad u - (gamma-1)/2 m grad m + e,
    e_t = -grad lap^{-1} div{(h(m) + nbar) u},

where ``h(m) = n - nbar`` expressed through ``m``:

    isentropic:  h(m) = nbar (1 + (gamma-1) m / (2 psibar))^(2/(gamma-1)) - nbar,
    isothermal:  h(m) = nbar (exp(m / sqrt(A)) - 1),

smooth on ``(gamma-1)/2 m + psibar > 0`` with ``h(0) = 0`` and
``h'(0) = c = (A gamma)^(-1/2) nbar^((3-gamma)/2)``.  The divergence
constraint ``div e = h(m)`` is preserved by the flow and doubles as a
discretization diagnostic.

Every nonlinear product is evaluated pointwise and masked (2/3 rule); the
masked part of quadratic products is then exact.  All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .errors import DomainViolationError, NonPositiveDensityError
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    dealias,
    divergence,
    gradient,
    l2_norm,
    poisson_gradient,
    riesz_div_projection,
)

__all__ = [
    "Params",
    "PrimitiveState",
    "SymmetricState",
    "Tendencies",
    "ModeSeed",
    "RandomSeedSpec",
    "InitSpec",
    "sound_speed",
    "to_symmetric",
    "from_symmetric",
    "h_of",
    "rhs_symmetric",
    "rhs_primitive",
    "constraint_residual",
    "compatible_init",
    "project_electric_field",
    "domain_margin",
]


@dataclass(frozen=True)
class Params:
    """Physical constants and the derived ones used throughout.

    ``gamma = 1`` selects the isothermal branch exactly; ``gamma > 1`` the
    isentropic branch.  Derived values are properties so they can never go
    stale.
    """

    A: float
    gamma: float
    tau: float
    n_bar: float
    dim: int

    def __post_init__(self):
        if self.A <= 0.0:
            raise ValueError(f"pressure constant A must be positive, got {self.A}")
        if self.gamma < 1.0:
            raise ValueError(f"adiabatic exponent gamma must be >= 1, got {self.gamma}")
        if self.tau <= 0.0:
            raise ValueError(f"relaxation time tau must be positive, got {self.tau}")
        if self.n_bar <= 0.0:
            raise ValueError(f"background density must be positive, got {self.n_bar}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")

    @property
    def isothermal(self) -> bool:
        return self.gamma == 1.0

    @property
    def psi_bar(self) -> float:
        """Sound speed at the background density, sqrt(A gamma nbar^(gamma-1))."""
        return float(np.sqrt(self.A * self.gamma * self.n_bar ** (self.gamma - 1.0)))

    @property
    def c(self) -> float:
        """Linearized density response h'(0) = (A gamma)^(-1/2) nbar^((3-gamma)/2)."""
        return float((self.A * self.gamma) ** -0.5 * self.n_bar ** ((3.0 - self.gamma) / 2.0))

    @property
    def sigma(self) -> float:
        """Critical smoothness index 1 + N/2."""
        return 1.0 + self.dim / 2.0


@dataclass
class PrimitiveState:
    """Field bundle (n, u, e) in physical variables."""

    n: ScalarField
    u: VectorField
    e: VectorField


@dataclass
class SymmetricState:
    """Field bundle (m, u, e) in symmetrized variables."""

    m: ScalarField
    u: VectorField
    e: VectorField


@dataclass
class Tendencies:
    """Right-hand-side values (m_t or n_t, u_t, e_t)."""

    m_t: ScalarField
    u_t: VectorField
    e_t: VectorField


def sound_speed(n: ScalarField, params: Params) -> ScalarField:
    """Pointwise sound speed psi(n) = sqrt(p'(n)) = sqrt(A gamma n^(gamma-1))."""
    if np.min(n.values) <= 0.0:
        raise NonPositiveDensityError(f"min density {np.min(n.values):.3e} <= 0")
    return ScalarField(n.grid, np.sqrt(params.A * params.gamma * n.values ** (params.gamma - 1.0)))


def to_symmetric(state: PrimitiveState, params: Params) -> SymmetricState:
    """Map (n, u, e) to the symmetrized bundle; u and e pass through."""
    n = state.n.values
    if np.min(n) <= 0.0:
        raise NonPositiveDensityError(f"min density {np.min(n):.3e} <= 0")
    if params.isothermal:
        m = np.sqrt(params.A) * (np.log(n) - np.log(params.n_bar))
    else:
        psi = np.sqrt(params.A * params.gamma * n ** (params.gamma - 1.0))
        m = (2.0 / (params.gamma - 1.0)) * (psi - params.psi_bar)
    return SymmetricState(ScalarField(state.n.grid, m), state.u, state.e)


def from_symmetric(state: SymmetricState, params: Params) -> PrimitiveState:
    """Invert the sound-speed transform; raises if the domain constraint fails."""
    _check_domain(state.m, params)
    m = state.m.values
    if params.isothermal:
        n = params.n_bar * np.exp(m / np.sqrt(params.A))
    else:
        psi = 0.5 * (params.gamma - 1.0) * m + params.psi_bar
        n = (psi ** 2 / (params.A * params.gamma)) ** (1.0 / (params.gamma - 1.0))
    return PrimitiveState(ScalarField(state.m.grid, n), state.u, state.e)


def domain_margin(m: ScalarField, params: Params) -> float:
    """Min over the grid of (gamma-1)/2 m + psibar (== psibar when isothermal)."""
    return float(np.min(0.5 * (params.gamma - 1.0) * m.values) + params.psi_bar)


def _check_domain(m: ScalarField, params: Params, t: float | None = None) -> None:
    margin = 0.5 * (params.gamma - 1.0) * m.values + params.psi_bar
    worst = int(np.argmin(margin))
    if margin.flat[worst] <= 0.0:
        raise DomainViolationError(
            f"(gamma-1)/2 m + psibar reached {margin.flat[worst]:.3e} "
            f"at lattice index {np.unravel_index(worst, m.grid.shape)}",
            t=t,
            location=np.unravel_index(worst, m.grid.shape),
        )


def h_of(m: ScalarField, params: Params) -> ScalarField:
    """Density perturbation n - nbar as a function of the symmetrized variable.

    Written through expm1/log1p so that h(0) = 0 exactly in floating point.
    """
    vals = m.values
    if params.isothermal:
        h = params.n_bar * np.expm1(vals / np.sqrt(params.A))
    else:
        _check_domain(m, params)
        ratio = 0.5 * (params.gamma - 1.0) * vals / params.psi_bar
        h = params.n_bar * np.expm1((2.0 / (params.gamma - 1.0)) * np.log1p(ratio))
    return ScalarField(m.grid, h)


def rhs_symmetric(
    state: SymmetricState, params: Params, linearized: bool = False
) -> Tendencies:
    """Tendencies of the symmetrized system; all nonlinear products masked.

    With ``linearized=True`` only the terms linear around equilibrium are
    kept (advection and bilinear couplings dropped) - the test mode used to
    compare against the per-mode predictions.
    """
    grid = state.m.grid
    m, u, e = state.m, state.u, state.e
    _check_domain(m, params, None)
    half_gm1 = 0.5 * (params.gamma - 1.0)

    div_u = divergence(u)
    m_t_vals = -params.psi_bar * div_u.values
    u_t_vals = -params.psi_bar * gradient(m).values - u.values / params.tau + e.values

    if linearized:
        flux = VectorField(grid, params.n_bar * u.values)
        m_t = ScalarField(grid, m_t_vals)
        u_t = VectorField(grid, u_t_vals)
    else:
        grad_m = gradient(m)
        adv_m = np.sum(u.values * grad_m.values, axis=0)
        nonlin_m = adv_m + half_gm1 * m.values * div_u.values
        m_t = dealias(ScalarField(grid, m_t_vals - nonlin_m))

        adv_u = np.einsum("j...,ij...->i...", u.values, _velocity_gradient(u))
        nonlin_u = adv_u + half_gm1 * m.values * grad_m.values
        u_t = VectorField(grid, u_t_vals - dealias(VectorField(grid, nonlin_u)).values)

        h = h_of(m, params)
        flux = dealias(VectorField(grid, (h.values + params.n_bar) * u.values))

    e_t = VectorField.from_hat(grid, -riesz_div_projection(flux).hat)
    return Tendencies(m_t, u_t, e_t)


def _velocity_gradient(u: VectorField) -> np.ndarray:
    """d u_i / d x_j, shape (dim, dim, *shape); one batched inverse transform."""
    grid = u.grid
    hat = grid.ik[None, :] * u.hat[:, None]
    axes = tuple(range(-grid.dim, 0))
    return _fft.ifftn(hat * grid.points ** grid.dim, axes=axes).real


def rhs_primitive(state: PrimitiveState, params: Params) -> Tendencies:
    """Tendencies of the primitive system (cross-validation twin).

    Evaluated in perturbation form: the mass flux splits as
    ``n u = (n - nbar) u + nbar u`` and the pressure gradient differentiates
    ``n - nbar`` instead of ``n``, so spectral derivatives never amplify the
    roundoff of the O(1) background.
    """
    grid = state.n.grid
    n, u, e = state.n, state.u, state.e
    nvals = n.values
    if np.min(nvals) <= 0.0:
        raise NonPositiveDensityError(f"min density {np.min(nvals):.3e} <= 0")
    dn = ScalarField(grid, nvals - params.n_bar)

    flux_pert = dealias(VectorField(grid, dn.values * u.values))
    flux = VectorField.from_hat(grid, flux_pert.hat + params.n_bar * u.hat)
    n_t = ScalarField.from_hat(grid, -divergence(flux).hat)

    adv_u = np.einsum("j...,ij...->i...", u.values, _velocity_gradient(u))
    # (1/n) grad p(n) = A gamma n^(gamma-2) grad(n - nbar), evaluated pointwise
    pressure = params.A * params.gamma * nvals ** (params.gamma - 2.0) * gradient(dn).values
    u_t = VectorField(
        grid,
        -dealias(VectorField(grid, adv_u + pressure)).values
        - u.values / params.tau
        + e.values,
    )

    e_t = VectorField.from_hat(grid, -riesz_div_projection(flux).hat)
    return Tendencies(n_t, u_t, e_t)


def constraint_residual(state: SymmetricState, params: Params) -> float:
    """Relative size of div e - h(m), the conserved Poisson constraint."""
    h = h_of(state.m, params)
    dive = divergence(state.e)
    res = ScalarField(state.m.grid, dive.values - h.values)
    return l2_norm(res) / (1.0 + l2_norm(h))


def project_electric_field(m: ScalarField, params: Params) -> VectorField:
    """Electric field slaved to the density constraint, grad lap^{-1} h(m).

    The (tiny) mean of h(m) is removed before inversion; in projection mode
    this runs every stage, where time-discretization drift makes the mean
    slightly nonzero.
    """
    h = h_of(m, params)
    centered = ScalarField(m.grid, h.values - np.mean(h.values))
    return poisson_gradient(centered)


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeSeed:
    """One excited lattice mode: amp * cos(k.x + phase) into the target field.

    target is one of ``m`` (density-side variable), ``u-longitudinal``
    (velocity along k), ``u-solenoidal`` (velocity perpendicular to k).
    """

    target: str
    k: tuple[int, ...]
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if self.target not in ("m", "u-longitudinal", "u-solenoidal"):
            raise ValueError(f"unknown init target {self.target!r}")
        if not all(isinstance(c, int) for c in self.k):
            raise ValueError("mode wavevector must be integer")
        if all(c == 0 for c in self.k):
            raise ValueError("mode wavevector must be nonzero")


@dataclass(frozen=True)
class RandomSeedSpec:
    """Seeded random band spectrum for m and u."""

    amplitude: float
    band: tuple[float, float]
    seed: int
    solenoidal: bool = True


@dataclass(frozen=True)
class InitSpec:
    """Initial condition: a list of modes or a seeded random spectrum."""

    modes: tuple[ModeSeed, ...] = ()
    random: RandomSeedSpec | None = None


def _perp_direction(kvec: np.ndarray) -> np.ndarray:
    """Deterministic unit vector perpendicular to k."""
    if kvec.size == 2:
        perp = np.array([-kvec[1], kvec[0]], dtype=float)
    else:
        ref = np.array([0.0, 0.0, 1.0])
        if np.allclose(np.cross(ref, kvec), 0.0):
            ref = np.array([1.0, 0.0, 0.0])
        perp = np.cross(ref, kvec)
    return perp / np.linalg.norm(perp)


def _solve_mean_shift(m_vals: np.ndarray, params: Params) -> float:
    """Constant delta with mean(h(m + delta)) = 0, so mean(n - nbar) = 0.

    Isothermal: closed form.  Isentropic: Newton on a scalar; h is strictly
    increasing on its domain so this converges fast.
    """
    if params.isothermal:
        return float(-np.sqrt(params.A) * np.log(np.mean(np.exp(m_vals / np.sqrt(params.A)))))
    psibar, gm1 = params.psi_bar, params.gamma - 1.0
    delta = 0.0
    for _ in range(60):
        arg = 1.0 + 0.5 * gm1 * (m_vals + delta) / psibar
        if np.min(arg) <= 0.0:
            raise DomainViolationError("mean-shift left the transform domain")
        h = params.n_bar * np.expm1((2.0 / gm1) * np.log1p(0.5 * gm1 * (m_vals + delta) / psibar))
        hp = params.n_bar * (2.0 / gm1) * arg ** (2.0 / gm1 - 1.0) * (0.5 * gm1 / psibar)
        f, fp = np.mean(h), np.mean(hp)
        step = f / fp
        delta -= step
        if abs(step) < 1e-17 * max(1.0, abs(delta)) or abs(f) < 1e-18 * params.n_bar:
            break
    return float(delta)


def compatible_init(spec: InitSpec, params: Params, grid: Grid) -> SymmetricState:
    """Build a symmetric state whose electric field satisfies div e = h(m).

    The m template is shifted by a constant so the mapped density
    perturbation is exactly mean free (torus compatibility); the mean of m
    itself is then small but not exactly zero.  e is constructed by the
    periodic Poisson solve; all fields are masked.
    """
    m_vals = np.zeros(grid.shape)
    u_vals = np.zeros((grid.dim, *grid.shape))
    coords = grid.coords()
    scale = 2.0 * np.pi / grid.length

    for mode in spec.modes:
        if len(mode.k) != grid.dim:
            raise ValueError(f"mode wavevector {mode.k} has wrong dimension for grid")
        if any(abs(c) > grid.points / 3.0 for c in mode.k):
            raise ValueError(f"mode wavevector {mode.k} falls outside the dealias mask")
        kvec = scale * np.asarray(mode.k, dtype=float)
        phase_field = np.tensordot(kvec, coords, axes=1) + mode.phase
        carrier = mode.amplitude * np.cos(phase_field)
        if mode.target == "m":
            m_vals += carrier
        elif mode.target == "u-longitudinal":
            khat = kvec / np.linalg.norm(kvec)
            u_vals += khat.reshape((-1,) + (1,) * grid.dim) * carrier
        else:
            perp = _perp_direction(kvec)
            u_vals += perp.reshape((-1,) + (1,) * grid.dim) * carrier

    if spec.random is not None:
        from .spectral import random_band_field

        rs = spec.random
        rng = np.random.default_rng(rs.seed)
        m_vals += random_band_field(grid, rng, band=rs.band, rms=rs.amplitude).values
        for i in range(grid.dim):
            u_vals[i] += random_band_field(grid, rng, band=rs.band, rms=rs.amplitude).values
        if not rs.solenoidal:
            u_vals = riesz_div_projection(VectorField(grid, u_vals)).values

    m = dealias(ScalarField(grid, m_vals))
    u = dealias(VectorField(grid, u_vals))
    if np.any(m.values):
        # constant shift only moves the k = 0 coefficient, so m stays masked
        m = ScalarField(grid, m.values + _solve_mean_shift(m.values, params))
    e = dealias(poisson_gradient(h_of(m, params)))
    return SymmetricState(m, u, e)
