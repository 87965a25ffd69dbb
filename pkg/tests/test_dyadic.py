"""Dyadic blocks, Besov norms, product splitting, and shell inequalities.

Validates:
- cutoff construction (plateaus, supports, exact telescoping partition)
- block localization, reconstruction, low-pass telescoping
- Besov norm closed forms, homogeneity, triangle inequality
- paraproduct + remainder reconstruction of products (alias free)
- two-sided derivative bounds on shell blocks
- block commutators (constants commute; closed-form single-mode case;
  grid-refinement stability of weighted sums)
- the property-report entry point and its negative control
"""

import numpy as np
import pytest

from eplab.dyadic import (
    BesovIndex,
    DyadicCutoffs,
    bernstein_ratio,
    besov_norm,
    build_cutoffs,
    commutator_block,
    lp_property_report,
    paraproduct,
    radial_cutoff,
    remainder,
    smooth_step,
)
from eplab.errors import GridTooCoarseError
from eplab.spectral import (
    Grid,
    ScalarField,
    VectorField,
    gradient,
    l2_norm,
    padded_product,
)
from util import cos_mode, masked_random, random_vector, rel_l2


class TestCutoffConstruction:
    def test_smooth_step_endpoints(self):
        t = np.array([-1.0, 0.0, 1e-9, 0.5, 1.0 - 1e-9, 1.0, 2.0])
        z = smooth_step(t)
        assert z[0] == 0.0 and z[1] == 0.0
        assert z[-1] == 1.0 and z[-2] > 0.999
        assert np.all(np.diff(z) >= 0.0)

    def test_radial_cutoff_plateaus(self):
        r = np.array([0.0, 0.5, 0.75, 1.0, 4.0 / 3.0, 2.0])
        chi = radial_cutoff(r)
        assert chi[0] == 1.0  # center of the ball
        assert chi[1] == 1.0 and chi[2] == 1.0
        assert 0.0 < chi[3] < 1.0
        assert chi[4] == 0.0 and chi[5] == 0.0
        assert np.all((chi >= 0.0) & (chi <= 1.0))

    def test_annulus_plateau(self):
        # phi = chi(r/2) - chi(r) equals 1 exactly on 4/3 <= r <= 3/2
        r = np.linspace(4.0 / 3.0, 1.5, 20)
        phi = radial_cutoff(r / 2.0) - radial_cutoff(r)
        assert np.abs(phi - 1.0).max() == 0.0

    def test_annulus_support(self):
        r = np.array([0.5, 0.75, 8.0 / 3.0, 3.0])
        phi = radial_cutoff(r / 2.0) - radial_cutoff(r)
        assert np.abs(phi).max() == 0.0

    def test_partition_of_unity(self, grid2d, cutoffs2d):
        total = cutoffs2d.chi + cutoffs2d.phis.sum(axis=0)
        covered = grid2d.dealias_mask & (grid2d.kmag <= 1.5 * 2.0**cutoffs2d.q_max)
        assert np.abs(total[covered] - 1.0).max() <= 1e-14

    def test_q_max_covers_mask(self, grid2d, cutoffs2d):
        kmax = grid2d.kmag[grid2d.dealias_mask].max()
        assert 0.75 * 2.0**cutoffs2d.q_max <= kmax
        assert 1.5 * 2.0**cutoffs2d.q_max > kmax

    def test_multiplier_ranges(self, cutoffs2d):
        assert cutoffs2d.chi.min() >= 0.0 and cutoffs2d.chi.max() <= 1.0
        assert cutoffs2d.phis.min() >= -1e-15 and cutoffs2d.phis.max() <= 1.0

    def test_too_coarse_box(self):
        # spacing 2 pi / L = 16: no retained mode in the first shell [3/4, 8/3]
        with pytest.raises(GridTooCoarseError):
            build_cutoffs(Grid(2, 16, length=np.pi / 8.0))


class TestBlocks:
    def test_constant_lives_in_low_ball(self, grid2d, cutoffs2d):
        f = ScalarField(grid2d, np.full(grid2d.shape, 2.0))
        low = cutoffs2d.block(f, -1)
        assert np.abs(low.values - f.values).max() <= 1e-14
        for q in range(0, cutoffs2d.q_max + 1):
            assert l2_norm(cutoffs2d.block(f, q)) <= 1e-14

    def test_plateau_mode_single_block(self, grid2d, cutoffs2d):
        # |k| = 2 sqrt(2) = 2.83: 2^-1 |k| = 1.414 in [4/3, 3/2], so D_1 f = f
        f = cos_mode(grid2d, (2, 2))
        blk = cutoffs2d.block(f, 1)
        assert np.abs(blk.values - f.values).max() <= 1e-13
        for q in (-1, 0, 2, 3):
            assert l2_norm(cutoffs2d.block(f, q)) <= 1e-13 * l2_norm(f)

    def test_reconstruction(self, grid2d, cutoffs2d, rng):
        f = masked_random(grid2d, rng)
        total = np.sum([cutoffs2d.block(f, q).hat for q in cutoffs2d.qs], axis=0)
        assert rel_l2(total, f.hat) <= 1e-12

    def test_block_range_errors(self, grid2d, cutoffs2d):
        f = ScalarField.zeros(grid2d)
        with pytest.raises(ValueError, match="outside"):
            cutoffs2d.block(f, -2)
        with pytest.raises(ValueError, match="outside"):
            cutoffs2d.block(f, cutoffs2d.q_max + 1)

    def test_almost_orthogonality(self, grid2d, cutoffs2d, rng):
        f = masked_random(grid2d, rng)
        norm = l2_norm(f)
        for p in cutoffs2d.qs:
            blk = cutoffs2d.block(f, p)
            for q in cutoffs2d.qs:
                if abs(p - q) >= 2:
                    assert l2_norm(cutoffs2d.block(blk, q)) <= 1e-12 * norm

    def test_vector_block(self, grid2d, cutoffs2d, rng):
        v = random_vector(grid2d, rng)
        blk = cutoffs2d.block(v, 2)
        assert isinstance(blk, VectorField)
        comp = cutoffs2d.block(ScalarField.from_hat(grid2d, v.hat[0]), 2)
        assert np.abs(blk.values[0] - comp.values).max() <= 1e-13


class TestLowPass:
    def test_s0_equals_low_ball(self, grid2d, cutoffs2d, rng):
        f = masked_random(grid2d, rng)
        s0 = cutoffs2d.low_pass(f, 0)
        d_minus1 = cutoffs2d.block(f, -1)
        assert np.abs(s0.values - d_minus1.values).max() <= 1e-14

    def test_plateau_mode_not_in_s1(self, grid2d, cutoffs2d):
        # chi(2^-1 |k|) = chi(1.414) = 0 for |k| = 2.83
        f = cos_mode(grid2d, (2, 2))
        assert l2_norm(cutoffs2d.low_pass(f, 1)) <= 1e-13 * l2_norm(f)

    def test_telescoping(self, grid2d, cutoffs2d, rng):
        f = masked_random(grid2d, rng)
        for q in range(0, cutoffs2d.q_max + 2):
            tail = np.sum(
                [cutoffs2d.block(f, p).hat for p in range(q, cutoffs2d.q_max + 1)],
                axis=0,
            ) if q <= cutoffs2d.q_max else np.zeros(grid2d.shape, dtype=complex)
            total = cutoffs2d.low_pass(f, q).hat + tail
            assert rel_l2(total, f.hat) <= 1e-12

    def test_full_low_pass_is_identity(self, grid2d, cutoffs2d, rng):
        f = masked_random(grid2d, rng)
        s_top = cutoffs2d.low_pass(f, cutoffs2d.q_max + 1)
        assert rel_l2(s_top.values, f.values) <= 1e-12

    def test_range_errors(self, grid2d, cutoffs2d):
        f = ScalarField.zeros(grid2d)
        with pytest.raises(ValueError, match="outside"):
            cutoffs2d.low_pass(f, -1)


class TestBesovNorm:
    def test_index_validation(self):
        BesovIndex(2.0)
        with pytest.raises(ValueError, match="B\\^s"):
            BesovIndex(2.0, p=3)
        with pytest.raises(ValueError, match="B\\^s"):
            BesovIndex(2.0, r=2)

    def test_zero_field(self, grid2d, cutoffs2d):
        assert besov_norm(cutoffs2d, ScalarField.zeros(grid2d), BesovIndex(2.0)) == 0.0

    def test_single_block_closed_form(self, grid2d, cutoffs2d):
        # cos(2 x1 + 2 x2) sits entirely in block q = 1:
        # norm = 2^(qs) ||f||_2 = 4 sqrt(L^2 / 2)
        f = cos_mode(grid2d, (2, 2))
        expect = 4.0 * np.sqrt(grid2d.volume / 2.0)
        assert besov_norm(cutoffs2d, f, BesovIndex(2.0)) == pytest.approx(expect, rel=1e-11)

    def test_homogeneity(self, grid2d, cutoffs2d, rng):
        f = masked_random(grid2d, rng)
        n1 = besov_norm(cutoffs2d, f, 1.5)
        n2 = besov_norm(cutoffs2d, ScalarField(grid2d, -2.5 * f.values), 1.5)
        assert n2 == pytest.approx(2.5 * n1, rel=1e-12)

    def test_triangle_inequality(self, grid2d, cutoffs2d, rng):
        for _ in range(5):
            f = masked_random(grid2d, rng)
            g = masked_random(grid2d, rng)
            both = ScalarField(grid2d, f.values + g.values)
            lhs = besov_norm(cutoffs2d, both, 2.0)
            rhs = besov_norm(cutoffs2d, f, 2.0) + besov_norm(cutoffs2d, g, 2.0)
            assert lhs <= rhs * (1.0 + 1e-12)

    def test_zero_iff_zero(self, grid2d, cutoffs2d, rng):
        f = masked_random(grid2d, rng)
        assert besov_norm(cutoffs2d, f, 2.0) > 0.0


class TestProductSplitting:
    def test_reconstructs_product(self, grid2d, cutoffs2d, rng):
        for _ in range(3):
            f = masked_random(grid2d, rng)
            g = masked_random(grid2d, rng)
            total = (paraproduct(cutoffs2d, f, g).hat
                     + paraproduct(cutoffs2d, g, f).hat
                     + remainder(cutoffs2d, f, g).hat)
            exact = padded_product(f, g).hat
            assert rel_l2(total, exact) <= 1e-10

    def test_constant_factor(self, grid2d, cutoffs2d, rng):
        c = 3.0
        f = ScalarField(grid2d, np.full(grid2d.shape, c))
        g = masked_random(grid2d, rng)
        total = (paraproduct(cutoffs2d, f, g).hat
                 + paraproduct(cutoffs2d, g, f).hat
                 + remainder(cutoffs2d, f, g).hat)
        assert rel_l2(total, c * g.hat) <= 1e-10

    def test_paraproduct_block_support(self, grid2d, cutoffs2d, rng):
        # D_q(S_{p-1} f D_p g) vanishes once |p - q| >= 5
        f = masked_random(grid2d, rng)
        g = masked_random(grid2d, rng)
        ref = l2_norm(f) * l2_norm(g)
        for p in range(1, cutoffs2d.q_max + 1):
            term = padded_product(cutoffs2d.low_pass(f, p - 1), cutoffs2d.block(g, p))
            for q in cutoffs2d.qs:
                if abs(p - q) >= 5:
                    assert l2_norm(cutoffs2d.block(term, q)) <= 1e-12 * ref


class TestDerivativeShellBounds:
    def test_pure_mode_ratio(self, grid2d, cutoffs2d):
        f = cos_mode(grid2d, (2, 2))
        ratio = bernstein_ratio(cutoffs2d, f, 1, order=1.0)
        assert ratio == pytest.approx(np.sqrt(8.0), rel=1e-12)

    @pytest.mark.parametrize("order", [1.0, 2.0])
    def test_two_sided_bounds(self, grid2d, cutoffs2d, rng, order):
        f = masked_random(grid2d, rng)
        for q in range(0, cutoffs2d.q_max + 1):
            if l2_norm(cutoffs2d.block(f, q)) <= 1e-13 * l2_norm(f):
                continue
            ratio = bernstein_ratio(cutoffs2d, f, q, order=order)
            assert (0.75 * 2.0**q) ** order <= ratio <= ((8.0 / 3.0) * 2.0**q) ** order

    def test_zero_block_rejected(self, grid2d, cutoffs2d):
        f = cos_mode(grid2d, (2, 2))  # lives in q = 1 only
        with pytest.raises(ValueError, match="zero"):
            bernstein_ratio(cutoffs2d, f, 3)


class TestCommutator:
    def test_constant_velocity_commutes(self, grid2d, cutoffs2d, rng):
        u = VectorField(grid2d, np.broadcast_to(
            np.array([1.5, -0.5]).reshape(2, 1, 1), (2, *grid2d.shape)).copy())
        f = masked_random(grid2d, rng)
        for q in (-1, 1, 3):
            com = commutator_block(cutoffs2d, u, f, q)
            assert np.abs(com.values).max() <= 1e-12 * np.abs(f.values).max()

    def test_single_mode_closed_form(self, grid2d, cutoffs2d):
        # u = grad f with f = cos(k.x):  u.D_q grad f - D_q(u.grad f) where
        # u.grad f = |k|^2 sin^2(k.x) = |k|^2 (1 - cos(2 k.x)) / 2
        kvec = (2, 2)
        k2 = 8.0
        f = cos_mode(grid2d, kvec)
        u = gradient(f)
        for q in cutoffs2d.qs:
            com = commutator_block(cutoffs2d, u, f, q)
            phi_q_k = float(cutoffs2d.multiplier(q)[2, 2])
            mult_2k = float(cutoffs2d.multiplier(q)[4, 4])
            mult_0 = float(cutoffs2d.multiplier(q)[0, 0])
            expect = (phi_q_k * k2 * (1.0 - cos_mode(grid2d, (4, 4)).values) / 2.0
                      - (mult_0 * k2 / 2.0 - mult_2k * k2 * cos_mode(grid2d, (4, 4)).values / 2.0))
            assert np.abs(com.values - expect).max() <= 1e-11

    def test_weighted_sum_grid_stable(self, params_ref):
        sums = []
        for points in (64, 96):
            grid = Grid(2, points)
            cut = build_cutoffs(grid)
            rng = np.random.default_rng(7)
            f = masked_random(grid, rng, band=(1.0, 8.0))
            u = random_vector(grid, rng, band=(1.0, 8.0))
            total = sum(
                2.0 ** (q * params_ref.sigma) * l2_norm(commutator_block(cut, u, f, q))
                for q in cut.qs
            )
            sums.append(total)
        assert np.isfinite(sums).all()
        assert abs(sums[0] - sums[1]) <= 1e-9 * abs(sums[0])


class TestPropertyReport:
    def test_default_grid_passes(self):
        report = lp_property_report(Grid(2, 64), n_fields=12, seed=3)
        assert report["all_pass"], report
        for check in report["checks"]:
            assert check["max_residual"] <= check["tolerance"]

    def test_corrupted_cutoffs_fail_partition(self, grid2d, cutoffs2d):
        bad = DyadicCutoffs(
            grid=grid2d,
            chi=cutoffs2d.chi * 1.01,   # breaks the partition of unity
            phis=cutoffs2d.phis,
            q_max=cutoffs2d.q_max,
        )
        report = lp_property_report(grid2d, n_fields=6, seed=3, cutoffs=bad)
        assert not report["all_pass"]
        by_name = {c["name"]: c for c in report["checks"]}
        assert not by_name["partition_of_unity"]["pass"]

    def test_report_lists_residuals(self):
        report = lp_property_report(Grid(2, 64), n_fields=6, seed=0)
        names = {c["name"] for c in report["checks"]}
        assert {"partition_of_unity", "almost_orthogonality", "reconstruction",
                "paraproduct_support", "product_splitting",
                "derivative_shell_bounds"} <= names
        for check in report["checks"]:
            assert "max_residual" in check and "tolerance" in check
