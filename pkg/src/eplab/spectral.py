"""Periodic grid, Fourier transforms, and spectral differential operators.

Conventions
-----------
Fields are real valued on the uniform lattice ``x_j = j L / M`` of the torus
``[0, L)^N``.  Fourier coefficients are series coefficients ``c_k`` with

    f(x) = sum_k c_k exp(i k.x),   k in (2 pi / L) Z^N,  |k_j| <= pi M / L,

i.e. ``c = fftn(values) / M^N``.  With this normalization Parseval reads

    integral |f|^2 dx = L^N sum_k |c_k|^2,

so a single complex exponential has L2 norm ``L^(N/2)``.

Nonlinear products are evaluated pointwise on the lattice.  The 2/3-rule mask
(``|k_j| <= (2/3) pi M / L`` on every axis) guarantees that aliased images of
a quadratic product of masked fields land outside the mask, so the masked part
of such a product is exact.  :func:`padded_product` gives the fully alias-free
product on a doubled lattice for the places where spectrum beyond the mask
matters (dyadic-block algebra).

All operations are pure; grids and fields are treated as immutable.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _fft

from .errors import NonZeroMeanError

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "forward_transform",
    "inverse_transform",
    "gradient",
    "divergence",
    "curl",
    "poisson_gradient",
    "riesz_div_projection",
    "dealias",
    "padded_product",
    "l2_norm",
    "mean_value",
    "random_band_field",
]

#: relative mean size above which the periodic Poisson problem is rejected
POISSON_MEAN_TOL = 1e-10


class Grid:
    """Uniform periodic lattice with its wavenumbers and 2/3 dealias mask.

    Parameters
    ----------
    dim:
        Spatial dimension, 2 or 3.
    points:
        Points per axis ``M`` (even, >= 16).
    length:
        Box edge length ``L`` (default ``2 pi``).
    """

    def __init__(self, dim: int, points: int, length: float = 2.0 * np.pi):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        if points < 16 or points % 2 != 0:
            raise ValueError(f"points must be even and >= 16, got {points}")
        if not length > 0.0:
            raise ValueError(f"length must be positive, got {length}")
        self.dim = dim
        self.points = points
        self.length = float(length)
        self.shape = (points,) * dim

        # integer lattice n_j in [-M/2, M/2); k = (2 pi / L) n
        n1d = np.fft.fftfreq(points) * points
        ints = np.meshgrid(*([n1d] * dim), indexing="ij")
        self.k_int = np.stack(ints)                          # (dim, *shape)
        self.k = (2.0 * np.pi / self.length) * self.k_int
        self.ik = 1j * self.k
        self.k2 = np.sum(self.k ** 2, axis=0)
        self.kmag = np.sqrt(self.k2)

        # |k_j| <= (2/3)(pi M / L)  <=>  |n_j| <= M/3 on every axis
        self.dealias_mask = np.all(np.abs(self.k_int) <= points / 3.0, axis=0)

        with np.errstate(divide="ignore"):
            inv = np.where(self.k2 > 0.0, 1.0 / np.where(self.k2 > 0.0, self.k2, 1.0), 0.0)
        self._inv_k2 = inv

        self.dx = self.length / points
        self.cell_volume = self.dx ** dim
        self.volume = self.length ** dim

    def axis(self) -> np.ndarray:
        """Physical coordinates along one axis."""
        return np.arange(self.points) * self.dx

    def coords(self) -> np.ndarray:
        """Physical coordinates, shape ``(dim, *shape)``."""
        ax = self.axis()
        return np.stack(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    @property
    def dealias_limit(self) -> float:
        return (2.0 / 3.0) * np.pi * self.points / self.length

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid)
            and self.dim == other.dim
            and self.points == other.points
            and self.length == other.length
        )

    def __repr__(self) -> str:
        return f"Grid(dim={self.dim}, points={self.points}, length={self.length!r})"


def _fft_axes(dim: int) -> tuple[int, ...]:
    return tuple(range(-dim, 0))


class _Field:
    """Real samples and Fourier coefficients, each computed lazily.

    Either representation may be supplied at construction; the other is
    produced on first access.  Purely spectral pipelines therefore never pay
    for an inverse transform.
    """

    __slots__ = ("grid", "_values", "_hat")

    def __init__(self, grid: Grid, values: np.ndarray | None, hat: np.ndarray | None = None):
        self.grid = grid
        self._values = values
        self._hat = hat

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = _fft.ifftn(
                self._hat * self.grid.points ** self.grid.dim, axes=_fft_axes(self.grid.dim)
            ).real
        return self._values

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = _fft.fftn(self._values, axes=_fft_axes(self.grid.dim)) / (
                self.grid.points ** self.grid.dim
            )
        return self._hat


class ScalarField(_Field):
    """Scalar samples on the physical lattice, shape ``grid.shape``."""

    def __init__(self, grid: Grid, values: np.ndarray, hat: np.ndarray | None = None):
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.shape != grid.shape:
                raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
        super().__init__(grid, values, hat)

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "ScalarField":
        hat = np.asarray(hat, dtype=complex)
        if hat.shape != grid.shape:
            raise ValueError(f"coefficient shape {hat.shape} does not match grid {grid.shape}")
        return cls(grid, None, hat)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))


class VectorField(_Field):
    """Vector samples on the physical lattice, shape ``(dim, *grid.shape)``."""

    def __init__(self, grid: Grid, values: np.ndarray, hat: np.ndarray | None = None):
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.shape != (grid.dim, *grid.shape):
                raise ValueError(
                    f"vector shape {values.shape} does not match grid {(grid.dim, *grid.shape)}"
                )
        super().__init__(grid, values, hat)

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "VectorField":
        hat = np.asarray(hat, dtype=complex)
        if hat.shape != (grid.dim, *grid.shape):
            raise ValueError(
                f"coefficient shape {hat.shape} does not match grid {(grid.dim, *grid.shape)}"
            )
        return cls(grid, None, hat)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.dim, *grid.shape)))


Field = ScalarField | VectorField


def forward_transform(f: Field) -> np.ndarray:
    """Fourier coefficients of a field (series normalization, see module docs)."""
    return f.hat


def inverse_transform(grid: Grid, hat: np.ndarray) -> Field:
    """Field with the given Fourier coefficients (scalar or vector by shape)."""
    hat = np.asarray(hat, dtype=complex)
    if hat.shape == grid.shape:
        return ScalarField.from_hat(grid, hat)
    if hat.shape == (grid.dim, *grid.shape):
        return VectorField.from_hat(grid, hat)
    raise ValueError(f"coefficient shape {hat.shape} does not match grid {grid.shape}")


def l2_norm(f: Field) -> float:
    """L2 norm over the box, ``sqrt(integral |f|^2 dx)``, via Parseval."""
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(f.hat) ** 2)))


def mean_value(f: ScalarField) -> float:
    """Box average of a scalar field (the k = 0 coefficient)."""
    if f._values is not None:
        return float(np.mean(f.values))
    return float(f.hat[(0,) * f.grid.dim].real)


def gradient(f: ScalarField) -> VectorField:
    """Spectral gradient; exact for band-limited fields."""
    return VectorField.from_hat(f.grid, f.grid.ik * f.hat)


def divergence(v: VectorField) -> ScalarField:
    """Spectral divergence of a vector field."""
    return ScalarField.from_hat(v.grid, np.sum(v.grid.ik * v.hat, axis=0))


def curl(v: VectorField) -> Field:
    """Curl of a vector field: scalar for dim 2, vector for dim 3."""
    g = v.grid
    k, vh = g.k, v.hat
    if g.dim == 2:
        return ScalarField.from_hat(g, 1j * (k[0] * vh[1] - k[1] * vh[0]))
    wh = np.empty_like(vh)
    wh[0] = 1j * (k[1] * vh[2] - k[2] * vh[1])
    wh[1] = 1j * (k[2] * vh[0] - k[0] * vh[2])
    wh[2] = 1j * (k[0] * vh[1] - k[1] * vh[0])
    return VectorField.from_hat(g, wh)


def poisson_gradient(rho: ScalarField) -> VectorField:
    """Gradient of the periodic Poisson potential, ``grad lap^{-1} rho``.

    Solves ``lap phi = rho`` with the zero mode of ``phi`` gauged to zero and
    returns ``grad phi``.  The source must be (numerically) mean free:
    ``|mean(rho)| <= 1e-10 ||rho||_2`` is enforced, since a constant has no
    periodic potential.
    """
    g = rho.grid
    norm = l2_norm(rho)
    mean = abs(rho.hat[(0,) * g.dim].real)
    if mean > POISSON_MEAN_TOL * norm:
        raise NonZeroMeanError(
            f"poisson source has mean {mean:.3e} > {POISSON_MEAN_TOL:.0e} * ||rho||_2 = "
            f"{POISSON_MEAN_TOL * norm:.3e}"
        )
    e_hat = -1j * g.k * (rho.hat * g._inv_k2)
    return VectorField.from_hat(g, e_hat)


def riesz_div_projection(v: VectorField) -> VectorField:
    """Curl-free (gradient) part of a vector field, ``grad lap^{-1} div v``.

    The zero mode is annihilated; the projection is idempotent.
    """
    g = v.grid
    kdotv = np.sum(g.k * v.hat, axis=0)
    return VectorField.from_hat(g, g.k * (kdotv * g._inv_k2))


def dealias(f: Field) -> Field:
    """Zero all coefficients outside the 2/3 mask (idempotent)."""
    return type(f).from_hat(f.grid, f.hat * f.grid.dealias_mask)


# ---------------------------------------------------------------------------
# alias-free products on a padded lattice
# ---------------------------------------------------------------------------

def _pad_hat(hat: np.ndarray, dim: int, small: int, big: int) -> np.ndarray:
    axes = _fft_axes(dim)
    shifted = np.fft.fftshift(hat, axes=axes)
    pad = [(0, 0)] * (hat.ndim - dim) + [((big - small) // 2, big - small - (big - small) // 2)] * dim
    return np.fft.ifftshift(np.pad(shifted, pad), axes=axes)


def _crop_hat(hat: np.ndarray, dim: int, small: int, big: int) -> np.ndarray:
    axes = _fft_axes(dim)
    shifted = np.fft.fftshift(hat, axes=axes)
    lo = (big - small) // 2
    index = [slice(None)] * (hat.ndim - dim) + [slice(lo, lo + small)] * dim
    return np.fft.ifftshift(shifted[tuple(index)], axes=axes)


def padded_product(f: ScalarField, g: ScalarField) -> ScalarField:
    """Alias-free pointwise product, truncated to the original lattice band.

    Both factors are zero padded to a doubled lattice, multiplied there, and
    the result cropped back; the surviving coefficients are exact as long as
    the combined spectrum fits in the doubled lattice (always true for masked
    factors).  Nyquist bins of the result are zeroed to keep the band
    conjugate symmetric.
    """
    grid = f.grid
    if g.grid != grid:
        raise ValueError("padded_product requires fields on the same grid")
    small, big, dim = grid.points, 2 * grid.points, grid.dim
    fbig = _fft.ifftn(_pad_hat(f.hat, dim, small, big) * big ** dim, axes=_fft_axes(dim)).real
    gbig = _fft.ifftn(_pad_hat(g.hat, dim, small, big) * big ** dim, axes=_fft_axes(dim)).real
    prod_hat = _fft.fftn(fbig * gbig, axes=_fft_axes(dim)) / big ** dim
    hat = _crop_hat(prod_hat, dim, small, big)
    nyq = small // 2
    for ax in range(dim):
        index = [slice(None)] * dim
        index[ax] = nyq
        hat[tuple(index)] = 0.0
    return ScalarField.from_hat(grid, hat)


# ---------------------------------------------------------------------------
# reproducible band-limited random fields
# ---------------------------------------------------------------------------

def random_band_field(
    grid: Grid,
    rng: np.random.Generator,
    band: tuple[float, float] = (1.0, 8.0),
    rms: float = 1.0,
) -> ScalarField:
    """Real random field supported on ``band[0] <= |k| <= band[1]``.

    Coefficients are drawn in a fixed lexicographic order over the integer
    wavevectors of the band, so the same seed produces the same continuum
    field on every grid resolving the band.  The field is scaled to the
    requested root-mean-square amplitude and is always inside the dealias
    mask (the band is clipped to it).
    """
    scale = 2.0 * np.pi / grid.length
    lo, hi = band
    nmax = int(np.floor(hi / scale))
    hat = np.zeros(grid.shape, dtype=complex)
    rng_draw = rng.standard_normal
    limit = grid.points / 3.0
    for n in np.ndindex(*[2 * nmax + 1] * grid.dim):
        nvec = tuple(n[i] - nmax for i in range(grid.dim))
        kmag = scale * np.sqrt(sum(c * c for c in nvec))
        amp = rng_draw() + 1j * rng_draw()  # always draw: keeps stream grid independent
        if not (lo <= kmag <= hi):
            continue
        if any(abs(c) > limit for c in nvec):
            continue
        idx = tuple(c % grid.points for c in nvec)
        cidx = tuple(-c % grid.points for c in nvec)
        hat[idx] += 0.5 * amp
        hat[cidx] += 0.5 * np.conj(amp)
    f = ScalarField.from_hat(grid, hat)
    norm = l2_norm(f)
    if norm > 0.0:
        target = rms * np.sqrt(grid.volume)
        f = ScalarField(grid, f.values * (target / norm), f.hat * (target / norm))
    return f
