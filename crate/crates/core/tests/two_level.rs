use num_complex::Complex64;
use soc_sta::numerics::OdeSettings;
use soc_sta::pulse::{
    design_scheme1, design_scheme2, design_scheme2_interacting, Interactions, Scheme, TransferSpec, DEFAULT_SAMPLES,
};
use soc_sta::two_level::{assemble_h, propagate, propagate_nonlinear, propagate_with, TwoLevelState};

fn settings() -> OdeSettings {
    OdeSettings::fixed(1e-3)
}

fn fig7_g() -> Interactions {
    Interactions::new(0.3, 0.2, 0.115, 0.115)
}

#[test]
fn designed_raman_transfer_is_complete() {
    let spec = TransferSpec::canonical(Scheme::Raman);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme1(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let traj = propagate(&s, &me, &settings()).unwrap();
    assert!(traj.final_fidelity() >= 1.0 - 1e-6, "{}", traj.final_fidelity());
    assert!(traj.max_norm_drift() <= 1e-9);
    assert_eq!(traj.pz[0], 1.0);
    assert!((traj.pz.last().unwrap() + 1.0).abs() < 1e-6);
    assert!((traj.x_expect[0] - me.x_diag_n).abs() < 1e-12);
    assert!((traj.x_expect.last().unwrap() - me.x_diag_l).abs() < 1e-6);
    assert!(traj.x_expect.last().unwrap() > &traj.x_expect[0]);
    let bound = 2.0 * me.spin_overlap().norm();
    for (i, st) in traj.states.iter().enumerate() {
        let b = bound * st.c1.norm() * st.c2.norm() + 1e-14;
        assert!(traj.px[i].abs() <= b && traj.py[i].abs() <= b);
    }
}

#[test]
fn state_tracks_the_invariant_eigenvector() {
    let spec = TransferSpec::canonical(Scheme::Raman);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme1(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let traj = propagate(&s, &me, &settings()).unwrap();
    let angles = s.angles();
    for (t, st) in traj.times.iter().zip(&traj.states).step_by(50) {
        let a = angles.at(*t);
        let n = [a.sin_theta * a.phi_a.cos(), -a.sin_theta * a.phi_a.sin(), a.cos_theta];
        let b = st.bloch();
        let dot: f64 = n.iter().zip(&b).map(|(p, q)| p * q).sum();
        let cross = [
            n[1] * b[2] - n[2] * b[1],
            n[2] * b[0] - n[0] * b[2],
            n[0] * b[1] - n[1] * b[0],
        ];
        let sin = cross.iter().map(|v| v * v).sum::<f64>().sqrt();
        let angle = sin.atan2(dot);
        assert!(angle < 1e-4, "t = {t}: {angle}");
    }
}

#[test]
fn no_coupling_leaves_the_state_alone() {
    let spec = TransferSpec::canonical(Scheme::Raman);
    let me = spec.matrix_elements().unwrap();
    let mut s = design_scheme1(&spec, &me, 256).unwrap();
    s.channel_a.iter_mut().for_each(|v| *v = 0.0);
    s.channel_b.iter_mut().for_each(|v| *v = 1.7);
    let traj = propagate(&s, &me, &settings()).unwrap();
    for st in &traj.states {
        assert!((st.c1.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn time_reversed_schedule_returns_home() {
    let spec = TransferSpec::canonical(Scheme::Raman);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme1(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let forward = propagate(&s, &me, &settings()).unwrap();
    let t_f = s.t_f();
    let back = propagate_with(
        |t, _| {
            let h = assemble_h(&s, t_f - t)?.matrix();
            Ok([[h[0][0].conj(), h[0][1].conj()], [h[1][0].conj(), h[1][1].conj()]])
        },
        TwoLevelState::target(),
        t_f,
        &settings(),
    )
    .unwrap();
    let end = back.last();
    assert!((end[0].norm_sqr() - forward.final_fidelity()).abs() < 1e-9);
}

#[test]
fn diagonal_gauge_changes_nothing() {
    let spec = TransferSpec::canonical(Scheme::Raman);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme1(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let run = |shift: f64| {
        propagate_with(
            |t, _| {
                let mut h = assemble_h(&s, t)?.matrix();
                h[0][0] += shift;
                h[1][1] += shift;
                Ok(h)
            },
            TwoLevelState::initial(),
            s.t_f(),
            &settings(),
        )
        .unwrap()
    };
    let a = run(0.0);
    let b = run(2.5);
    let sov = me.spin_overlap();
    for (p, q) in a.states.iter().zip(&b.states) {
        let (p, q) = (TwoLevelState::from_array(*p), TwoLevelState::from_array(*q));
        assert!((p.c1.norm_sqr() - q.c1.norm_sqr()).abs() < 1e-10);
        let wp = p.c1 * p.c2.conj() * sov;
        let wq = q.c1 * q.c2.conj() * sov;
        assert!((wp - wq).norm() < 1e-10);
    }
}

#[test]
fn halving_the_step_is_converged() {
    let spec = TransferSpec::canonical(Scheme::Raman);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme1(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let f1 = propagate(&s, &me, &OdeSettings::fixed(1e-3)).unwrap().final_fidelity();
    let f2 = propagate(&s, &me, &OdeSettings::fixed(5e-4)).unwrap().final_fidelity();
    assert!((f1 - f2).abs() <= 1e-8);
}

#[test]
fn adaptive_and_fixed_agree() {
    let spec = TransferSpec::canonical(Scheme::SoDirection);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme2(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let fixed = propagate(&s, &me, &settings()).unwrap();
    let mut adaptive = OdeSettings::adaptive(1e-11, 1e-11);
    adaptive.step = 0.05;
    let adapt = propagate(&s, &me, &adaptive).unwrap();
    assert!((fixed.final_fidelity() - adapt.final_fidelity()).abs() < 1e-8);
    assert!(fixed.final_fidelity() >= 1.0 - 1e-6);
}

#[test]
fn compensated_nonlinear_transfer() {
    let spec = TransferSpec::canonical(Scheme::SoDirectionInteracting).with_interactions(fig7_g());
    let me = spec.matrix_elements().unwrap();
    let comp = design_scheme2_interacting(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let plain = design_scheme2(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let with = propagate_nonlinear(&comp, &me, &fig7_g(), &settings()).unwrap();
    let without = propagate_nonlinear(&plain, &me, &fig7_g(), &settings()).unwrap();
    assert!(with.final_fidelity() >= 1.0 - 1e-6, "{}", with.final_fidelity());
    assert!(with.max_norm_drift() <= 1e-9);
    assert!(without.final_fidelity() < with.final_fidelity());
}

#[test]
fn zero_interaction_matches_linear() {
    let spec = TransferSpec::canonical(Scheme::SoDirection);
    let me = spec.matrix_elements().unwrap();
    let s = design_scheme2(&spec, &me, DEFAULT_SAMPLES).unwrap();
    let lin = propagate(&s, &me, &settings()).unwrap();
    let non = propagate_nonlinear(&s, &me, &Interactions::default(), &settings()).unwrap();
    assert_eq!(lin.states, non.states);
}

#[test]
fn zero_alpha_polarization_vanishes() {
    let spec = TransferSpec::canonical(Scheme::Raman).with_alpha(0.0);
    let me = spec.matrix_elements().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let st = [TwoLevelState::new(Complex64::new(h, 0.0), Complex64::new(0.0, h))];
    let (px, py, _) = soc_sta::two_level::spin_polarization(&st, &me);
    assert!(px[0].abs() < 1e-12 && py[0].abs() < 1e-12);
}
