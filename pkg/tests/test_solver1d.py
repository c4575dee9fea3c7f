import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasefront import (
    Grid1D,
    MaterialModel,
    SimulationConfig,
    TemperatureField,
    assemble_step,
    run_simulation,
    thomas_solve,
)
from phasefront.sources import CallbackSource, LogisticBeamSource

ZERO_Q = CallbackSource(lambda x, t: np.zeros_like(np.asarray(x, dtype=float)))


def diffusion_config(n_x=50, n_t=100, t_max=0.1, gamma=0.5, amp=0.0, mode=1, **kw):
    mat = MaterialModel(
        conductivity=1.0, latent_heat=0.0, transition_temp=20.0, smoothing_width=0.05
    )
    return SimulationConfig(
        grid_x=Grid1D(n_x, 1.0),
        grid_t=Grid1D(n_t, t_max),
        material=mat,
        source=ZERO_Q,
        gamma=gamma,
        initial_temp=1.0,
        cosine_amp=amp,
        cosine_mode=mode,
        **kw,
    )


class TestAssembleStep:
    def test_explicit_weight_leaves_diagonal_only(self):
        cfg = diffusion_config(gamma=0.0)
        prev = TemperatureField(cfg.grid_x, np.full(51, 1.5), 0.0)
        sys = assemble_step(prev, cfg, 0)
        h_t = cfg.grid_t.spacing
        assert sys.lower == pytest.approx(np.zeros(51))
        assert sys.upper == pytest.approx(np.zeros(51))
        assert sys.diag == pytest.approx(np.full(51, 1.0 / h_t))

    def test_uniform_field_is_steady_without_source(self):
        cfg = diffusion_config()
        prev = TemperatureField(cfg.grid_x, np.full(51, 1.5), 0.0)
        out = thomas_solve(assemble_step(prev, cfg, 0))
        assert out == pytest.approx(np.full(51, 1.5), abs=1e-13)

    def test_hand_assembled_three_cell_system(self):
        # n_x = 3, h_x = 1/3, h_t = 1/2, gamma = 1/2, unit capacity and
        # conductivity, no source, previous field (1, 2, 4, 8).
        # Face coupling k/h^2 = 9, so with the reflected boundary rows:
        #   diag  = 2 + 0.5*18 = 11 at every row
        #   lower = (0, -4.5, -4.5, -9),  upper = (-9, -4.5, -4.5, 0)
        #   explicit diffusion = (18, 9, 18, -72)
        #   rhs = 2*T + 0.5*lap = (11, 8.5, 17, -20)
        cfg = diffusion_config(n_x=3, n_t=2, t_max=1.0)
        prev = TemperatureField(cfg.grid_x, np.array([1.0, 2.0, 4.0, 8.0]), 0.0)
        sys = assemble_step(prev, cfg, 0)
        assert sys.diag == pytest.approx([11.0, 11.0, 11.0, 11.0])
        assert sys.lower == pytest.approx([0.0, -4.5, -4.5, -9.0])
        assert sys.upper == pytest.approx([-9.0, -4.5, -4.5, 0.0])
        assert sys.rhs == pytest.approx([11.0, 8.5, 17.0, -20.0])

    def test_source_sampled_at_half_level(self):
        # a source returning the sample time exposes where it was evaluated
        cfg = dataclasses.replace(
            diffusion_config(n_x=4, n_t=10, t_max=1.0, gamma=0.5),
            source=CallbackSource(
                lambda x, t: np.full_like(np.asarray(x, dtype=float), t)
            ),
        )
        prev = TemperatureField(cfg.grid_x, np.full(5, 1.0), 0.3)
        sys = assemble_step(prev, cfg, k=3)
        h_t = cfg.grid_t.spacing
        q_term = sys.rhs - prev.values / h_t  # uniform field: no diffusion part
        assert q_term == pytest.approx(np.full(5, 3 * h_t + 0.5 * h_t))

    def test_assembled_system_is_diagonally_dominant(self, rng):
        mat = MaterialModel(
            conductivity=0.3, latent_heat=2.0, transition_temp=2.0, smoothing_width=0.05
        )
        for gamma in (0.0, 0.5, 1.0):
            cfg = SimulationConfig(
                grid_x=Grid1D(40, 1.0), grid_t=Grid1D(50, 0.5), material=mat,
                source=ZERO_Q, gamma=gamma,
            )
            prev = TemperatureField(cfg.grid_x, 1.0 + rng.uniform(0, 2.5, 41), 0.0)
            assert assemble_step(prev, cfg, 0).is_diagonally_dominant()

    def test_too_few_cells_rejected(self):
        cfg = diffusion_config(n_x=2)
        prev = TemperatureField(cfg.grid_x, np.full(3, 1.0), 0.0)
        with pytest.raises(ValueError, match="3 cells"):
            assemble_step(prev, cfg, 0)


class TestRunSimulation:
    def test_equilibrium_stays_put(self):
        trace = run_simulation(diffusion_config(n_x=20, n_t=50))
        assert len(trace.fields) == 51  # every level stored at default stride
        for field in trace.fields:
            assert field.values == pytest.approx(np.ones(21), abs=1e-12)

    def test_cosine_mode_decay_matches_analytic(self):
        # separation of variables: the cos(pi x) mode decays as exp(-pi^2 t)
        cfg = diffusion_config(n_x=200, n_t=400, t_max=0.1, amp=0.1)
        trace = run_simulation(cfg)
        x = cfg.grid_x.nodes()
        exact = 1.0 + 0.1 * np.cos(np.pi * x) * np.exp(-np.pi**2 * 0.1)
        assert np.max(np.abs(trace.fields[-1].values - exact)) < 1e-3

    @settings(max_examples=20, deadline=None)
    @given(
        mode=st.integers(min_value=1, max_value=6),
        amp=st.floats(0.01, 0.4),
    )
    def test_maximum_principle_single_mode(self, mode, amp):
        cfg = diffusion_config(n_x=40, n_t=20, t_max=0.05, amp=amp, mode=mode)
        trace = run_simulation(cfg)
        for field in trace.fields:
            assert field.values.max() <= 1.0 + amp + 1e-12
            assert field.values.min() >= 1.0 - amp - 1e-12

    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    @pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
    def test_nonfinite_field_aborts_with_step_diagnostic(self):
        # fully explicit update far beyond its stability limit
        cfg = diffusion_config(n_x=50, n_t=400, t_max=400.0, gamma=0.0, amp=0.1)
        with pytest.raises(RuntimeError, match="non-finite field"):
            run_simulation(cfg)

    def test_solve_residuals_recorded_and_small(self):
        trace = run_simulation(diffusion_config(n_x=50, n_t=50, amp=0.2))
        assert np.all(trace.residual_norms < 1e-10)
        for report in trace.reports:
            assert report.residual_norm < 1e-10

    def test_discrete_conservation_without_latent_heat(self, rng):
        # the reflected flux form telescopes: deposited == enthalpy change
        src = LogisticBeamSource(amplitude=3.0, x_edge=0.3, t_edge=0.4, steepness_x=20, steepness_t=15)
        # the explicit member needs a step below its stability limit
        for gamma, n_t in ((0.0, 600), (0.5, 60), (0.75, 60), (1.0, 60)):
            cfg = dataclasses.replace(
                diffusion_config(n_x=30, n_t=n_t, t_max=0.3, gamma=gamma), source=src
            )
            trace = run_simulation(cfg)
            ledger = trace.ledger()
            assert ledger["relative_error"] < 1e-12

    def test_fixed_boundary_ledger_closes_without_latent_heat(self):
        cfg = diffusion_config(n_x=40, n_t=100, t_max=0.2, left_boundary=2.0)
        trace = run_simulation(cfg)
        assert trace.ledger()["boundary_in"] > 0
        assert trace.ledger()["relative_error"] < 1e-12

    def test_midpoint_capacity_iteration_runs(self):
        mat = MaterialModel(
            conductivity=0.5, latent_heat=0.8, transition_temp=1.5, smoothing_width=0.05
        )
        src = LogisticBeamSource(amplitude=8.0, x_edge=0.2, t_edge=0.5, steepness_x=50, steepness_t=50)
        cfg = SimulationConfig(
            grid_x=Grid1D(60, 1.0),
            grid_t=Grid1D(300, 1.0),
            material=mat,
            source=src,
            capacity_iterations=2,
        )
        trace = run_simulation(cfg)
        assert trace.ledger()["relative_error"] < 0.02

    def test_store_stride_decimates_fields_only(self):
        cfg = diffusion_config(n_x=20, n_t=100, amp=0.1, store_stride=10)
        trace = run_simulation(cfg)
        assert len(trace.fields) == 11
        assert trace.stored_levels[-1] == 100
        assert len(trace.enthalpy_total) == 101
        assert len(trace.melt_thickness) == 101
        trace.field_at(50)
        with pytest.raises(KeyError):
            trace.field_at(55)

    def test_temperature_dependent_conductivity_conserves(self):
        mat = MaterialModel(
            conductivity=lambda t: 0.5 + 0.1 * t,
            latent_heat=0.0,
            transition_temp=20.0,
            smoothing_width=0.05,
        )
        cfg = SimulationConfig(
            grid_x=Grid1D(40, 1.0),
            grid_t=Grid1D(80, 0.2),
            material=mat,
            source=ZERO_Q,
            cosine_amp=0.3,
        )
        trace = run_simulation(cfg)
        assert trace.ledger()["relative_error"] < 1e-12
