"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines inline.
The beam-heated slab run, the boundary-driven control, and the toy spike
run come from session fixtures (see conftest) so each executes once.
"""

import time

import numpy as np

from phasefront import (
    Grid1D,
    MaterialModel,
    SimulationConfig,
    check_transition_bound,
    convergence_study,
    delta_instability_sweep,
    residual_relaxation_time,
    run_simulation,
    solve_lumped,
    stefan_residual,
    thomas_solve,
)
from phasefront.analysis import locate_fronts_values
from phasefront.config import load_spec
from phasefront.sources import CallbackSource
from phasefront.tridiag import TridiagonalSystem


def criterion(number: int, label: str, passed: bool, detail: str) -> None:
    print(f"[criterion {number:2d}] {'PASS' if passed else 'FAIL'} {label}: {detail}")
    assert passed, f"criterion {number} ({label}): {detail}"


def test_criterion_01_transition_time_bound(rng):
    start = time.perf_counter()
    exp = load_spec("lumped_const_q").config
    q = exp.q_of_t()
    trace = solve_lumped(exp.material, q, t_max=exp.t_max, n_steps=exp.n_steps)
    report = check_transition_bound(trace, exp.material, q)
    equality_ok = abs(report.delta_t - report.bound) <= 0.01 * report.bound

    mat = MaterialModel(
        conductivity=1.0, latent_heat=1.0, transition_temp=2.0, smoothing_width=0.02
    )
    random_ok = True
    for _ in range(50):
        a = rng.uniform(0.3, 2.0)
        b = rng.uniform(0.0, 2.0)
        w = rng.uniform(1.0, 20.0)
        amp = rng.uniform(0.0, 1.0)
        q_rand = lambda t, a=a, b=b, w=w, amp=amp: (
            a + b * np.asarray(t, dtype=float) + amp * np.sin(w * np.asarray(t)) ** 2
        )
        rep = check_transition_bound(
            solve_lumped(mat, q_rand, t_max=4.0 / a, n_steps=400), mat, q_rand
        )
        random_ok &= rep.delta_t >= rep.bound - rep.tolerance
    elapsed = time.perf_counter() - start

    criterion(
        1,
        "transition-time bound",
        equality_ok and random_ok and elapsed < 1.0,
        f"constant-q delta_t {report.delta_t:.5f} vs bound {report.bound:.5f}; "
        f"50 randomized sources {'all satisfy' if random_ok else 'VIOLATE'} the bound; "
        f"{elapsed:.2f}s",
    )


def test_criterion_02_second_order_convergence():
    start = time.perf_counter()
    mat = MaterialModel(
        conductivity=1.0, latent_heat=0.0, transition_temp=20.0, smoothing_width=0.05
    )
    cfg = SimulationConfig(
        grid_x=Grid1D(50, 1.0),
        grid_t=Grid1D(25, 0.1),
        material=mat,
        source=CallbackSource(lambda x, t: np.zeros_like(np.asarray(x, dtype=float))),
        gamma=0.5,
        cosine_amp=0.1,
    )
    exact = lambda x: 1.0 + 0.1 * np.cos(np.pi * x) * np.exp(-np.pi**2 * 0.1)
    result = convergence_study(cfg, levels=3, refine=2, reference=exact)
    elapsed = time.perf_counter() - start
    ok = abs(result.fitted_order - 2.0) <= 0.2 and elapsed < 10.0
    criterion(
        2,
        "second-order accuracy",
        ok,
        f"n_x = {result.n_cells}, fitted order {result.fitted_order:.3f} "
        f"(expected 2.0 +- 0.2); {elapsed:.1f}s",
    )


def test_criterion_03_unconditional_stability(fig6_run):
    start = time.perf_counter()
    cfg = fig6_run.trace.config
    coarse = SimulationConfig(
        grid_x=cfg.grid_x,
        grid_t=Grid1D(cfg.grid_t.n_cells // 8, cfg.grid_t.length),
        material=cfg.material,
        source=cfg.source,
        gamma=cfg.gamma,
    )
    coarse_trace = run_simulation(coarse)
    elapsed = time.perf_counter() - start
    baseline = max(np.abs(f.values).max() for f in fig6_run.trace.fields)
    coarse_max = max(np.abs(f.values).max() for f in coarse_trace.fields)
    ok = coarse_max < 10.0 * baseline and elapsed < 30.0
    criterion(
        3,
        "stability at 8x larger step",
        ok,
        f"max|T| {coarse_max:.2f} vs baseline {baseline:.2f} (limit {10*baseline:.1f}); "
        f"{elapsed:.1f}s",
    )


def test_criterion_04_energy_conservation(fig6_run):
    ledger = fig6_run.trace.ledger()
    ok = ledger["relative_error"] < 0.005 and fig6_run.seconds < 60.0
    criterion(
        4,
        "energy ledger closure",
        ok,
        f"deposited {ledger['deposited']:.4f}, enthalpy change "
        f"{ledger['enthalpy_change']:.4f}, relative error "
        f"{ledger['relative_error']:.2e} (< 5e-3); run took {fig6_run.seconds:.1f}s",
    )


def test_criterion_05_residual_decay(fig6_run):
    cfg = fig6_run.trace.config
    res = stefan_residual(fig6_run.trace, cfg.material)
    t1 = residual_relaxation_time(res, fraction=0.1, sustain=3)
    cutoff = cfg.source.t_edge + 5.0 / cfg.source.steepness_t
    ok = t1 is not None and t1 < cutoff
    criterion(
        5,
        "interface residual settles before the source cutoff",
        ok,
        f"measured relaxation time {t1} vs source cutoff {cutoff:.2f}",
    )


def test_criterion_06_tableland_existence(fig6_run, classical_run):
    trace = fig6_run.trace
    active = trace.times <= trace.config.source.t_edge
    driven_ok = bool(np.any(trace.tableland_cells[active] >= 3))
    control_cells = int(classical_run.trace.tableland_cells.max())
    control_ok = control_cells < 3
    criterion(
        6,
        "extended band only under a distributed source",
        driven_ok and control_ok,
        f"driven run reaches {int(trace.tableland_cells[active].max())} cells during "
        f"the pulse; boundary-driven control never exceeds {control_cells} cells",
    )


def test_criterion_07_thickness_chronology(fig6_run):
    trace = fig6_run.trace
    thickness = trace.melt_thickness
    peak_idx = int(np.argmax(thickness))
    t2 = float(trace.times[peak_idx])
    res = stefan_residual(trace, trace.config.material)
    t1 = residual_relaxation_time(res)
    grows = thickness[peak_idx] > 0
    declines = thickness[-1] < 0.9 * thickness[peak_idx]
    ok = grows and declines and t1 is not None and t2 > t1
    criterion(
        7,
        "melt thickness rises then declines",
        ok,
        f"peak {thickness[peak_idx]:.3f} at t2 = {t2:.2f} (> t1 = {t1}); "
        f"final {thickness[-1]:.3f}",
    )


def test_criterion_08_delta_instability(fig6_run):
    trace = fig6_run.trace
    t_star = trace.config.material.transition_temp
    table = delta_instability_sweep(trace, epsilon=0.005 * t_star)
    finite = np.isfinite(table.sensitivity)
    in_tableland = (trace.tableland_cells >= 3) & finite
    slow = (trace.tableland_cells < 3) & finite & (trace.times > 0.3)
    peak = float(np.max(table.sensitivity[in_tableland]))
    slow_level = float(np.median(table.sensitivity[slow]))
    ratio = peak / slow_level
    criterion(
        8,
        "front position hypersensitive in tableland epochs",
        ratio >= 10.0,
        f"tableland-epoch peak sensitivity {peak:.3f} vs slow-phase median "
        f"{slow_level:.4f}: ratio {ratio:.1f}x (>= 10x)",
    )


def test_criterion_09_two_temperature_equilibration():
    from phasefront.spike import SpikeMaterial, _exchange

    start = time.perf_counter()
    ce, ci, g = 0.5, 2.0, 2.0
    lattice = MaterialModel(
        base_capacity=ci, conductivity=1e-300, latent_heat=0.0,
        transition_temp=1e6, smoothing_width=0.05,
    )
    mat = SpikeMaterial.from_constants(
        density=1.0, coupling=g, electron_capacity=ce,
        electron_conductivity=0.0, lattice=lattice,
    )
    temp_e, temp_i = np.full(8, 5.0), np.full(8, 1.0)
    h_t, gaps = 0.01, [4.0]
    for _ in range(100):
        temp_e, temp_i, _ = _exchange(mat, temp_e, temp_i, h_t)
        gaps.append(float(temp_e[0] - temp_i[0]))
    rate = -np.polyfit(np.arange(101) * h_t, np.log(gaps), 1)[0]
    rate_expected = g * (1.0 / ce + 1.0 / ci)
    rate_ok = abs(rate - rate_expected) <= 0.01 * rate_expected

    cold = SpikeMaterial.from_constants(
        density=1.0, coupling=g, electron_capacity=ce,
        electron_conductivity=0.0,
        lattice=MaterialModel(
            base_capacity=1e6, conductivity=1e-300, latent_heat=0.0,
            transition_temp=1e6, smoothing_width=0.05,
        ),
    )
    temp_e, temp_i = np.full(8, 3.0), np.full(8, 1.0)
    gaps = [2.0]
    for _ in range(200):
        temp_e, temp_i, _ = _exchange(cold, temp_e, temp_i, 0.005)
        gaps.append(float(temp_e[0] - temp_i[0]))
    tau_measured = 1.0 / (-np.polyfit(np.arange(201) * 0.005, np.log(gaps), 1)[0])
    tau_expected = cold.relaxation_time()
    tau_ok = abs(tau_measured - tau_expected) <= 0.02 * tau_expected
    elapsed = time.perf_counter() - start

    criterion(
        9,
        "two-temperature equilibration",
        rate_ok and tau_ok and elapsed < 5.0,
        f"gap decay rate {rate:.4f} vs {rate_expected:.4f} (1%); relaxation time "
        f"{tau_measured:.5f} vs rho*Ce/g = {tau_expected:.5f} (2%); {elapsed:.1f}s",
    )


def test_criterion_10_spike_tableland_transience(spike_run):
    trace = spike_run.trace
    src = trace.config.source
    tau = trace.config.material.relaxation_time()
    cells = trace.lattice_tableland_cells
    drive_window = trace.times <= src.center_time + 3 * src.duration + 2 * tau
    driven_ok = bool(np.any(cells[drive_window] >= 3))
    late = trace.times >= max(20 * tau, 0.8 * trace.times[-1])
    late_max = int(cells[late].max())
    criterion(
        10,
        "spike tableland is transient",
        driven_ok and late_max < 1,
        f"extended band during the drive (max {int(cells.max())} cells); "
        f"late-time band {late_max} cells (< 1) for t >= {float(trace.times[late][0]):.3f} "
        f"= {float(trace.times[late][0] / tau):.0f} tau",
    )


def test_criterion_11_oracle_equivalence(rng):
    worst_solve = 0.0
    for _ in range(100):
        n = 100
        lower = rng.uniform(-1.0, 1.0, n)
        upper = rng.uniform(-1.0, 1.0, n)
        lower[0] = upper[-1] = 0.0
        diag = np.abs(lower) + np.abs(upper) + rng.uniform(0.5, 2.0, n)
        rhs = rng.uniform(-5.0, 5.0, n)
        sys = TridiagonalSystem(lower=lower, diag=diag, upper=upper, rhs=rhs)
        x = thomas_solve(sys)
        oracle = np.linalg.solve(sys.dense(), rhs)
        worst_solve = max(worst_solve, float(np.max(np.abs(x - oracle))))

    worst_front = 0.0
    x_nodes = np.linspace(0.0, 1.0, 81)
    for _ in range(200):
        xi = rng.uniform(0.05, 0.95)
        slope = rng.uniform(0.5, 50.0) * rng.choice([-1.0, 1.0])
        values = 2.0 + slope * (x_nodes - xi)
        fronts = locate_fronts_values(values, x_nodes, 2.0)
        worst_front = max(worst_front, abs(fronts[0] - xi))

    ok = worst_solve < 1e-10 and worst_front < 1e-12
    criterion(
        11,
        "oracle equivalence",
        ok,
        f"sweep vs dense solve: worst {worst_solve:.2e} (< 1e-10); front "
        f"localization on linear fields: worst {worst_front:.2e} (< 1e-12)",
    )
