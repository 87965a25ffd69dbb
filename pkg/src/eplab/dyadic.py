"""Dyadic frequency decomposition, Besov norms, and product splitting.

The decomposition uses a smooth radial cutoff ``chi`` equal to 1 on the ball
``|k| <= 3/4`` and 0 outside ``|k| < 4/3``, built from the classical smooth
step

    zeta(t) = g(t) / (g(t) + g(1 - t)),   g(t) = exp(-1/t) for t > 0 else 0,

and the annular bump ``phi(k) = chi(k/2) - chi(k)`` supported on the shell
``3/4 <= |k| <= 8/3`` with ``phi = 1`` on ``4/3 <= |k| <= 3/2``.  Defining
``phi`` by that difference makes the partition of unity

    chi(k) + sum_{q=0}^{Q} phi(2^{-q} k) = chi(2^{-Q-1} k)

telescope exactly, so it equals 1 with zero residual on every retained mode
once ``Q`` is large enough.

Blocks are sharp Fourier multipliers on the grid:

    D_{-1} f = chi(|k|) f^,    D_q f = phi(2^{-q}|k|) f^   (q >= 0),
    S_q f = sum_{p <= q-1} D_p f = chi(2^{-q}|k|) f^.

``q_max`` is the largest ``q`` whose shell meets the dealiased lattice, so
block products of masked fields remain alias free.  Products inside this
module (paraproducts, remainders, commutators) are evaluated alias free on a
zero-padded lattice; see :func:`eplab.spectral.padded_product`.

The product of two fields splits into two paraproducts and a remainder,

    f g = T_f g + T_g f + R(f, g),
    T_f g = sum_{q >= 1} S_{q-1} f  D_q g,
    R(f, g) = sum_q D_q f (D_{q-1} + D_q + D_{q+1}) g,

which is an exact algebraic identity here: low-order terms (q - 1 < 0) are
routed into the remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarseError
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    Field,
    gradient,
    padded_product,
)

__all__ = [
    "BesovIndex",
    "DyadicCutoffs",
    "build_cutoffs",
    "smooth_step",
    "radial_cutoff",
    "besov_norm",
    "paraproduct",
    "remainder",
    "bernstein_ratio",
    "commutator_block",
    "lp_property_report",
]


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C^infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between."""
    t = np.asarray(t, dtype=float)

    def g(s):
        out = np.zeros_like(s)
        pos = s > 0.0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    return g(t) / (g(t) + g(1.0 - t))


def radial_cutoff(r: np.ndarray) -> np.ndarray:
    """chi(|k|): 1 on |k| <= 3/4, 0 on |k| >= 4/3, smooth in between."""
    r = np.asarray(r, dtype=float)
    inner, outer = 0.75, 4.0 / 3.0
    t = np.clip((outer - r) / (outer - inner), 0.0, 1.0)
    out = smooth_step(t)
    out[r <= inner] = 1.0
    out[r >= outer] = 0.0
    return out


@dataclass(frozen=True)
class BesovIndex:
    """Besov exponents ``B^s_{p,r}``; only the working space p=2, r=1 exists here."""

    s: float
    p: int = 2
    r: int = 1

    def __post_init__(self):
        if self.p != 2 or self.r != 1:
            raise ValueError(f"only B^s_(2,1) is supported, got p={self.p}, r={self.r}")


def _as_smoothness(index: "BesovIndex | float") -> float:
    return index.s if isinstance(index, BesovIndex) else float(index)


@dataclass
class DyadicCutoffs:
    """Sampled dyadic multipliers on a grid.

    Attributes
    ----------
    chi:
        ``chi(|k|)`` per mode (the q = -1 block).
    phis:
        ``phi(2^{-q}|k|)`` for q = 0..q_max, shape ``(q_max + 1, *grid.shape)``.
    q_max:
        Largest q whose shell meets the masked lattice.
    """

    grid: Grid
    chi: np.ndarray
    phis: np.ndarray
    q_max: int
    _sq_mults: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        # stacked squared multipliers, flattened: block L2 norms become one matmul
        mults = np.concatenate([self.chi[None], self.phis], axis=0)
        self._sq_mults = (mults ** 2).reshape(self.n_blocks, -1)

    @property
    def n_blocks(self) -> int:
        return self.q_max + 2

    @property
    def qs(self) -> np.ndarray:
        """Block indices -1..q_max."""
        return np.arange(-1, self.q_max + 1)

    def multiplier(self, q: int) -> np.ndarray:
        if not -1 <= q <= self.q_max:
            raise ValueError(f"block index q={q} outside [-1, {self.q_max}]")
        return self.chi if q == -1 else self.phis[q]

    def block(self, f: Field, q: int) -> Field:
        """Dyadic block ``D_q f`` (q = -1 is the low ball)."""
        return type(f).from_hat(f.grid, f.hat * self.multiplier(q))

    def low_pass(self, f: Field, q: int) -> Field:
        """``S_q f = sum_{p <= q-1} D_p f``, realized as the multiplier chi(2^{-q}|k|)."""
        if not 0 <= q <= self.q_max + 1:
            raise ValueError(f"low-pass index q={q} outside [0, {self.q_max + 1}]")
        return type(f).from_hat(f.grid, f.hat * self.low_pass_multiplier(q))

    def low_pass_multiplier(self, q: int) -> np.ndarray:
        return radial_cutoff(self.grid.kmag / 2.0 ** q)

    def block_l2_norms(self, f: Field) -> np.ndarray:
        """L2 norms of every block of ``f``, shape ``(q_max + 2,)``.

        Computed on the Fourier side (Parseval), summing vector components.
        """
        power = np.abs(f.hat) ** 2
        if power.ndim > self.grid.dim:  # vector field: total over components
            power = power.sum(axis=0)
        return np.sqrt(self.grid.volume * (self._sq_mults @ power.ravel()))


def build_cutoffs(grid: Grid) -> DyadicCutoffs:
    """Sample the dyadic multipliers on a grid and fix q_max from its mask."""
    masked_kmag = grid.kmag[grid.dealias_mask]
    kmax = float(masked_kmag.max())
    if not np.any((masked_kmag >= 0.75) & (masked_kmag <= 8.0 / 3.0)):
        raise GridTooCoarseError(
            "no retained lattice point falls in the first dyadic shell "
            f"[3/4, 8/3]; largest retained |k| is {kmax:.3g}"
        )
    q_max = int(np.floor(np.log2(kmax / 0.75)))
    chi = radial_cutoff(grid.kmag)
    phis = np.stack(
        [radial_cutoff(grid.kmag / 2.0 ** (q + 1)) - radial_cutoff(grid.kmag / 2.0 ** q)
         for q in range(q_max + 1)]
    )
    return DyadicCutoffs(grid=grid, chi=chi, phis=phis, q_max=q_max)


def besov_norm(cutoffs: DyadicCutoffs, f: Field, index: BesovIndex | float) -> float:
    """``B^s_{2,1}`` norm: ``sum_q 2^{qs} ||D_q f||_2``."""
    s = _as_smoothness(index)
    norms = cutoffs.block_l2_norms(f)
    return float(np.sum(2.0 ** (cutoffs.qs * s) * norms))


def paraproduct(cutoffs: DyadicCutoffs, f: ScalarField, g: ScalarField) -> ScalarField:
    """``T_f g = sum_{q >= 1} S_{q-1} f D_q g`` with alias-free products."""
    grid = cutoffs.grid
    acc = np.zeros(grid.shape, dtype=complex)
    for q in range(1, cutoffs.q_max + 1):
        low = cutoffs.low_pass(f, q - 1)
        blk = cutoffs.block(g, q)
        acc += padded_product(low, blk).hat
    return ScalarField.from_hat(grid, acc)


def remainder(cutoffs: DyadicCutoffs, f: ScalarField, g: ScalarField) -> ScalarField:
    """``R(f, g) = sum_q D_q f (D_{q-1} + D_q + D_{q+1}) g`` with alias-free products."""
    grid = cutoffs.grid
    acc = np.zeros(grid.shape, dtype=complex)
    for q in range(-1, cutoffs.q_max + 1):
        near = np.zeros(grid.shape)
        for p in (q - 1, q, q + 1):
            if -1 <= p <= cutoffs.q_max:
                near = near + cutoffs.multiplier(p)
        blk_f = cutoffs.block(f, q)
        blk_g = ScalarField.from_hat(grid, g.hat * near)
        acc += padded_product(blk_f, blk_g).hat
    return ScalarField.from_hat(grid, acc)


def bernstein_ratio(cutoffs: DyadicCutoffs, f: ScalarField, q: int, order: float = 1.0) -> float:
    """``|| |grad|^order D_q f ||_2 / || D_q f ||_2``.

    The derivative magnitude is the radial multiplier ``|k|^order``, so for
    q >= 0 the ratio is pinned to the shell: it lies in
    ``[(3/4 2^q)^order, (8/3 2^q)^order]`` exactly, by support.
    """
    grid = cutoffs.grid
    blk_hat = f.hat * cutoffs.multiplier(q)
    denom2 = np.sum(np.abs(blk_hat) ** 2)
    if denom2 <= (1e-14) ** 2 * np.sum(np.abs(f.hat) ** 2):
        raise ValueError(f"block q={q} of the field is zero; ratio undefined")
    numer2 = np.sum((grid.kmag ** (2.0 * order)) * np.abs(blk_hat) ** 2)
    return float(np.sqrt(numer2 / denom2))


def commutator_block(
    cutoffs: DyadicCutoffs, u: VectorField, f: ScalarField, q: int
) -> ScalarField:
    """Block commutator ``[u, D_q] . grad f = u . D_q grad f - D_q (u . grad f)``.

    All products are evaluated alias free; the result is a diagnostic field
    whose weighted norms measure commutator smallness.
    """
    grid = cutoffs.grid
    grad_f = gradient(f)
    mult = cutoffs.multiplier(q)
    first = np.zeros(grid.shape, dtype=complex)
    second = np.zeros(grid.shape, dtype=complex)
    for i in range(grid.dim):
        ui = ScalarField.from_hat(grid, u.hat[i])
        dfi = ScalarField.from_hat(grid, grad_f.hat[i])
        first += padded_product(ui, ScalarField.from_hat(grid, dfi.hat * mult)).hat
        second += padded_product(ui, dfi).hat
    return ScalarField.from_hat(grid, first - second * mult)


# ---------------------------------------------------------------------------
# property suite (used by the lp-check command and the negative-control test)
# ---------------------------------------------------------------------------

def lp_property_report(
    grid: Grid,
    n_fields: int = 20,
    seed: int = 0,
    band: tuple[float, float] = (1.0, 12.0),
    cutoffs: DyadicCutoffs | None = None,
) -> dict:
    """Run the dyadic-analysis property checks on random fields.

    Returns a machine-readable report; failures are content, not exceptions.
    ``cutoffs`` may be injected (test hook) to check a deliberately corrupted
    multiplier family against the same suite.
    """
    from .spectral import l2_norm, random_band_field

    if cutoffs is None:
        cutoffs = build_cutoffs(grid)
    rng = np.random.default_rng(seed)
    qs = cutoffs.qs

    def make():
        return random_band_field(grid, rng, band=band)

    # (1) partition of unity on covered retained modes
    total = cutoffs.chi + cutoffs.phis.sum(axis=0)
    covered = grid.dealias_mask & (grid.kmag <= 1.5 * 2.0 ** cutoffs.q_max)
    partition_res = float(np.max(np.abs(total[covered] - 1.0)))

    # (2) almost orthogonality and reconstruction on random fields
    ortho_res = 0.0
    recon_res = 0.0
    n_recon = max(2, n_fields // 10)
    for _ in range(n_recon):
        f = make()
        norm = l2_norm(f)
        blocks = [cutoffs.block(f, q) for q in qs]
        total_hat = np.sum([b.hat for b in blocks], axis=0)
        recon_res = max(recon_res, float(np.sqrt(np.sum(np.abs(total_hat - f.hat) ** 2))
                                          * np.sqrt(grid.volume) / norm))
        for i, p in enumerate(qs):
            for q in qs:
                if abs(p - q) >= 2:
                    cross = l2_norm(cutoffs.block(blocks[i], q))
                    ortho_res = max(ortho_res, cross / norm)

    # (3) paraproduct support: D_q(S_{p-1} f D_p g) = 0 for |p - q| >= 5
    support_res = 0.0
    n_sup = max(1, n_fields // 10)
    for _ in range(n_sup):
        f, g = make(), make()
        ref = l2_norm(f) * l2_norm(g)
        for p in range(1, cutoffs.q_max + 1):
            term = padded_product(cutoffs.low_pass(f, p - 1), cutoffs.block(g, p))
            for q in qs:
                if abs(p - q) >= 5:
                    support_res = max(support_res, l2_norm(cutoffs.block(term, q)) / ref)

    # (4) product splitting reconstructs f g
    bony_res = 0.0
    n_bony = max(2, n_fields - 2 * n_recon - 2 * n_sup)
    for _ in range(n_bony // 2):
        f, g = make(), make()
        total = paraproduct(cutoffs, f, g).hat + paraproduct(cutoffs, g, f).hat \
            + remainder(cutoffs, f, g).hat
        exact = padded_product(f, g)
        denom = np.sqrt(np.sum(np.abs(exact.hat) ** 2))
        bony_res = max(bony_res, float(np.sqrt(np.sum(np.abs(total - exact.hat) ** 2)) / denom))

    # (5) two-sided derivative bounds on shell blocks
    bern_lo = np.inf
    bern_hi = 0.0
    bern_ok = True
    for _ in range(n_recon):
        f = make()
        for q in range(0, cutoffs.q_max + 1):
            blk = cutoffs.block(f, q)
            if l2_norm(blk) / l2_norm(f) < 1e-13:
                continue
            ratio = bernstein_ratio(cutoffs, f, q, order=1.0)
            lo, hi = 0.75 * 2.0 ** q, (8.0 / 3.0) * 2.0 ** q
            bern_lo = min(bern_lo, ratio / lo)
            bern_hi = max(bern_hi, ratio / hi)
            bern_ok = bern_ok and (lo <= ratio <= hi)

    checks = [
        {"name": "partition_of_unity", "max_residual": partition_res, "tolerance": 1e-14},
        {"name": "almost_orthogonality", "max_residual": ortho_res, "tolerance": 1e-12},
        {"name": "reconstruction", "max_residual": recon_res, "tolerance": 1e-12},
        {"name": "paraproduct_support", "max_residual": support_res, "tolerance": 1e-12},
        {"name": "product_splitting", "max_residual": bony_res, "tolerance": 1e-10},
        {
            "name": "derivative_shell_bounds",
            "max_residual": 0.0 if bern_ok else 1.0,
            "tolerance": 0.5,
            "ratio_to_lower": None if not np.isfinite(bern_lo) else bern_lo,
            "ratio_to_upper": bern_hi,
        },
    ]
    for entry in checks:
        entry["pass"] = bool(entry["max_residual"] <= entry["tolerance"])
    return {
        "grid": {"dim": grid.dim, "points": grid.points, "length": grid.length},
        "q_max": cutoffs.q_max,
        "n_fields": n_fields,
        "seed": seed,
        "checks": checks,
        "all_pass": bool(all(c["pass"] for c in checks)),
    }
