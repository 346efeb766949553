use num_complex::Complex64;
use soc_sta::grid::{density_profile, evolve, init_basis_state, GridSettings, SpatialGrid, Spin};
use soc_sta::morse::MorseSpec;
use soc_sta::numerics::OdeSettings;
use soc_sta::pulse::{
    design_scheme1, design_scheme2, design_scheme2_interacting, effective_g, PulseSchedule, RawCouplings, Scheme,
    TransferSpec, DEFAULT_SAMPLES,
};
use soc_sta::two_level::{expectation_x, propagate, spin_polarization, TwoLevelState};

fn raman(c: f64) -> PulseSchedule {
    let spec = TransferSpec::canonical(Scheme::Raman).with_c(c);
    let me = spec.matrix_elements().unwrap();
    design_scheme1(&spec, &me, DEFAULT_SAMPLES).unwrap()
}

fn run(schedule: &PulseSchedule, grid: &SpatialGrid, settings: &GridSettings) -> soc_sta::grid::GridRunReport {
    let spec = &schedule.spec;
    let psi0 = init_basis_state(grid, &spec.morse, spec.n, Spin::Up, spec.alpha).unwrap();
    evolve(&psi0, grid, schedule, settings).unwrap().1
}

#[test]
fn zero_coupling_is_stationary() {
    let mut s = raman(0.1);
    s.channel_a.iter_mut().for_each(|v| *v = 0.0);
    s.channel_b.iter_mut().for_each(|v| *v = 0.0);
    let grid = SpatialGrid::default_window();
    let morse = s.spec.morse;
    let psi0 = init_basis_state(&grid, &morse, 0, Spin::Up, 1.6).unwrap();
    let (psi, report) = evolve(&psi0, &grid, &s, &GridSettings::default()).unwrap();
    assert!((psi0.inner(&psi, &grid).norm() - 1.0).abs() < 1e-6);
    assert!(report.max_norm_drift() < 1e-8);
}

#[test]
fn raman_transfer_small_and_large_gap() {
    let grid = SpatialGrid::default_window();
    let small = raman(0.1);
    let large = raman(1.5);
    let spec = small.spec;
    let psi0 = init_basis_state(&grid, &spec.morse, 0, Spin::Up, 1.6).unwrap();
    let (psi_small, r_small) = evolve(&psi0, &grid, &small, &GridSettings::default()).unwrap();
    let (psi_large, r_large) = evolve(&psi0, &grid, &large, &GridSettings::default()).unwrap();
    assert!(
        (r_small.final_fidelity - 0.9966).abs() <= 0.003,
        "{}",
        r_small.final_fidelity
    );
    assert!(
        (r_large.final_fidelity - 0.979).abs() <= 0.005,
        "{}",
        r_large.final_fidelity
    );
    assert!(r_large.final_fidelity < r_small.final_fidelity);
    assert!(r_small.max_norm_drift() <= 1e-8 && r_large.max_norm_drift() <= 1e-8);
    assert!((r_small.pz.last().unwrap() + 1.0).abs() <= 0.01);

    let me = spec.matrix_elements().unwrap();
    let two = propagate(&small, &me, &OdeSettings::fixed(1e-3)).unwrap();
    assert!((r_small.final_fidelity - two.final_fidelity()).abs() <= 0.005);

    let dx_grid = r_small.x_expect.last().unwrap() - r_small.x_expect[0];
    assert!((dx_grid - (me.x_diag_l - me.x_diag_n)).abs() <= 0.02);

    let target = density_profile(
        &init_basis_state(&grid, &spec.morse, 1, Spin::Down, 1.6).unwrap(),
        &grid,
    );
    let d_small = density_profile(&psi_small, &grid);
    let d_large = density_profile(&psi_large, &grid);
    assert!((d_small.integral() - r_small.norm.last().unwrap()).abs() < 1e-12);
    let l1_small = d_small.l1_distance(&target);
    assert!(l1_small <= 0.05, "{l1_small}");
    assert!(d_large.l1_distance(&target) > l1_small);
}

#[test]
fn raman_splitting_converged() {
    let s = raman(0.1);
    let grid = SpatialGrid::default_window();
    let base = run(&s, &grid, &GridSettings::default()).final_fidelity;
    let half_dt = run(&s, &grid, &GridSettings::default().with_dt(5e-4)).final_fidelity;
    let fine = SpatialGrid::new(-5.0, 25.0, 4096).unwrap();
    let double_n = run(&s, &fine, &GridSettings::default()).final_fidelity;
    assert!((base - half_dt).abs() <= 1e-5, "{base} {half_dt}");
    assert!((base - double_n).abs() <= 1e-4, "{base} {double_n}");
    let shifted = run(&s, &grid.shifted(grid.dx()), &GridSettings::default()).final_fidelity;
    assert!((base - shifted).abs() <= 1e-6, "{base} {shifted}");
}

/// Grid observables of a superposition built from the two basis states match
/// the reduced-basis formulas.
#[test]
fn reduced_observables_match_grid() {
    let grid = SpatialGrid::default_window();
    let spec = TransferSpec::canonical(Scheme::Raman);
    let me = spec.matrix_elements().unwrap();
    let a = init_basis_state(&grid, &spec.morse, 0, Spin::Up, 1.6).unwrap();
    let b = init_basis_state(&grid, &spec.morse, 1, Spin::Down, 1.6).unwrap();
    let c1 = Complex64::new(0.6, 0.2);
    let c2 = Complex64::new(-0.3, 0.7).unscale(Complex64::new(-0.3, 0.7).norm()) * (1.0 - c1.norm_sqr()).sqrt();
    let mut field = a.clone();
    for i in 0..grid.points() {
        field.up[i] = a.up[i] * c1;
        field.down[i] = b.down[i] * c2;
    }
    let obs = soc_sta::grid::observables(&field, &grid, &b);
    let st = [TwoLevelState::new(c1, c2)];
    let (px, py, pz) = spin_polarization(&st, &me);
    let x = expectation_x(&st, &me);
    assert!((obs.px - px[0]).abs() < 1e-8, "{} {}", obs.px, px[0]);
    assert!((obs.py - py[0]).abs() < 1e-8, "{} {}", obs.py, py[0]);
    assert!((obs.pz - pz[0]).abs() < 1e-10);
    assert!((obs.x_expect - x[0]).abs() < 1e-6);
}

#[test]
fn direction_tuned_transfer_on_grid() {
    let grid = SpatialGrid::default_window();
    let spec = TransferSpec::canonical(Scheme::SoDirection);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme2(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let r = run(&s, &grid, &GridSettings::default());
    assert!(r.max_norm_drift() <= 1e-8);
    assert!((r.max_abs_theta1 - s.max_abs_channel_a()).abs() < 1e-3);
    assert!(r.final_fidelity > 0.97, "{}", r.final_fidelity);
}

/// The mean-field-compensated design must beat the uncompensated one on the
/// full Gross-Pitaevskii grid.
#[test]
fn gpe_compensation_beats_uncompensated() {
    let grid = SpatialGrid::default_window();
    let morse = MorseSpec::new(8.0).unwrap();
    let raw = RawCouplings::uniform_with_g11(&morse, 0, 0.3).unwrap();
    let g = effective_g(&raw, &morse, 0, 1).unwrap();
    let spec = TransferSpec::canonical(Scheme::SoDirectionInteracting).with_interactions(g);
    let me = spec.matrix_elements().unwrap();
    let comp = design_scheme2_interacting(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let plain = design_scheme2(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let settings = GridSettings::default().with_couplings(raw);
    let rc = run(&comp, &grid, &settings);
    let ru = run(&plain, &grid, &settings);
    assert!(rc.max_norm_drift() <= 1e-6);
    eprintln!(
        "GPE grid fidelity: compensated {:.6}, uncompensated {:.6}",
        rc.final_fidelity, ru.final_fidelity
    );
    assert!(rc.final_fidelity > ru.final_fidelity);
}
