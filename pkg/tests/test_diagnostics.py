"""Norm records, the block energy functional, and rate fitting.

Validates:
- the energy functional: zero at equilibrium, single-block closed form,
  equivalence to the sum of state and tendency norms on random states
- the vorticity norm: gradient fields give zero, single-block closed form
- least-squares rate fitting on exact and degenerate series
- record validation and the builder observer
"""

import numpy as np
import pytest

from eplab.diagnostics import (
    RecordBuilder,
    RunRecord,
    decay_fit,
    q_functional,
    vorticity_norm,
)
from eplab.errors import NonPositiveSeriesError, TooFewSamplesError
from eplab.model import (
    InitSpec,
    ModeSeed,
    SymmetricState,
    compatible_init,
    rhs_symmetric,
)
from eplab.spectral import ScalarField, VectorField, dealias, gradient
from eplab.timestep import StepControl, evolve
from util import cos_mode, masked_random, random_vector


class TestQFunctional:
    def test_equilibrium_zero(self, grid2d, cutoffs2d, params_ref):
        st = SymmetricState(ScalarField.zeros(grid2d), VectorField.zeros(grid2d),
                            VectorField.zeros(grid2d))
        tend = rhs_symmetric(st, params_ref)
        assert q_functional(cutoffs2d, st, tend, params_ref) == 0.0

    @pytest.mark.parametrize("amp", [1.0, 1e-4])
    def test_single_block_closed_form(self, grid2d, cutoffs2d, params_ref, amp):
        # m = a cos(2x1 + 2x2) lives in block q = 1; with u = e = 0 the exact
        # tendencies are m_t = 0, e_t = 0 and
        #   u_t = -psibar grad m - (1/2) m grad m,
        # whose linear part stays in q = 1 while m grad m = -a^2 k sin(2k.x)/2
        # lands in q = 2.  Hand evaluation:
        #   Q = 2 a l2 sqrt(4 + 8 psibar^2) + 4 a^2 sqrt(8) l2 / 4,
        # with l2 = ||cos||_2 = sqrt(L^2/2).
        m = cos_mode(grid2d, (2, 2), amplitude=amp)
        st = SymmetricState(dealias(m), VectorField.zeros(grid2d),
                            VectorField.zeros(grid2d))
        tend = rhs_symmetric(st, params_ref)
        l2 = np.sqrt(grid2d.volume / 2.0)
        linear_term = 2.0 * amp * l2 * np.sqrt(4.0 + 8.0 * params_ref.psi_bar**2)
        bilinear_term = amp**2 * np.sqrt(8.0) * l2
        got = q_functional(cutoffs2d, st, tend, params_ref)
        assert got == pytest.approx(linear_term + bilinear_term, rel=1e-10)
        if amp < 1e-3:
            # at small amplitude the single linear block dominates
            assert got == pytest.approx(linear_term, rel=10.0 * amp)

    def test_equivalent_to_norm_sum(self, grid2d, cutoffs2d, params_ref, rng):
        # C3 (state+tendency norms) <= Q <= C4 (state+tendency norms)
        from eplab.diagnostics import _stacked_block_norms, _weighted_block_norm

        ratios = []
        for _ in range(5):
            st = SymmetricState(
                masked_random(grid2d, rng, rms=1e-3),
                random_vector(grid2d, rng, rms=1e-3),
                gradient(masked_random(grid2d, rng, rms=1e-3)),
            )
            tend = rhs_symmetric(st, params_ref)
            q = q_functional(cutoffs2d, st, tend, params_ref)
            state_n = _weighted_block_norm(
                cutoffs2d, _stacked_block_norms(cutoffs2d, (st.m, st.u, st.e)), 2.0)
            tend_n = _weighted_block_norm(
                cutoffs2d,
                _stacked_block_norms(cutoffs2d, (tend.m_t, tend.u_t, tend.e_t)), 1.0)
            ratios.append(q / (state_n + tend_n))
        ratios = np.array(ratios)
        assert np.all(ratios > 0.1) and np.all(ratios < 10.0)


class TestVorticityNorm:
    def test_gradient_field_zero(self, grid2d, cutoffs2d, params_ref, rng):
        u = gradient(masked_random(grid2d, rng))
        assert vorticity_norm(cutoffs2d, u, params_ref) <= 1e-12

    def test_single_block_closed_form(self, grid2d, cutoffs2d, params_ref):
        # u = (sin(2x1+2x2), 0): omega = -2 cos(2x1+2x2) in block q = 1,
        # so the index-(sigma-1) norm is 2^1 * 2 * sqrt(L^2/2)
        x = grid2d.coords()
        u = VectorField(grid2d, np.stack(
            [np.sin(2 * x[0] + 2 * x[1]), np.zeros(grid2d.shape)]))
        expect = 2.0 * 2.0 * np.sqrt(grid2d.volume / 2.0)
        got = vorticity_norm(cutoffs2d, dealias(u), params_ref)
        assert got == pytest.approx(expect, rel=1e-11)


class TestDecayFit:
    def test_exact_exponential(self):
        t = np.linspace(0.0, 5.0, 60)
        fit = decay_fit(t, 3.0 * np.exp(-1.7 * t))
        assert fit.mu == pytest.approx(1.7, abs=1e-10)
        assert fit.residual <= 1e-12

    def test_constant_series(self):
        t = np.linspace(0.0, 5.0, 20)
        fit = decay_fit(t, np.full(20, 2.5))
        assert fit.mu == pytest.approx(0.0, abs=1e-14)

    def test_window_selection(self):
        t = np.linspace(0.0, 10.0, 101)
        y = np.exp(-2.0 * t) + 1e-8  # floor contaminates late times
        fit = decay_fit(t, y, window=(1.0, 4.0))
        assert fit.window == (1.0, 4.0)
        assert fit.n_samples == 31
        assert fit.mu == pytest.approx(2.0, rel=1e-3)

    def test_default_window_drops_transient(self):
        t = np.linspace(0.0, 10.0, 101)
        y = np.exp(-1.0 * t)
        fit = decay_fit(t, y)
        assert fit.window[0] == pytest.approx(2.0)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamplesError):
            decay_fit(np.linspace(0, 1, 5), np.ones(5))

    def test_nonpositive_series(self):
        t = np.linspace(0.0, 5.0, 20)
        y = np.exp(-t)
        y[12] = 0.0
        with pytest.raises(NonPositiveSeriesError):
            decay_fit(t, y)


class TestRunRecord:
    def test_builder_populates_all_columns(self, grid2d, cutoffs2d, params_ref):
        from eplab.diagnostics import SERIES_COLUMNS

        st = compatible_init(InitSpec(modes=(ModeSeed("m", (1, 0), 1e-3),)),
                             params_ref, grid2d)
        builder = RecordBuilder(cutoffs2d, params_ref)
        evolve(st, params_ref,
               StepControl(dt=0.025, t_end=0.1, sample_interval=0.05, cfl=0.9),
               observers=(builder,))
        rec = builder.record
        rec.validate()
        assert rec.times == pytest.approx([0.0, 0.05, 0.1])
        for name in SERIES_COLUMNS:
            assert rec.series(name).shape == (3,)
        assert np.all(rec.series("min_domain_margin") > 0.0)
        assert np.all(np.diff(rec.series("state_norm")) < 0.0)  # decaying

    def test_validate_rejects_bad_times(self):
        rec = RunRecord()
        rec.times = [0.0, 0.0]
        for key in rec.columns:
            rec.columns[key] = [1.0, 1.0]
        with pytest.raises(ValueError, match="increasing"):
            rec.validate()
