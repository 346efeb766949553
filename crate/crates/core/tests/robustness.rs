use soc_sta::numerics::OdeSettings;
use soc_sta::pulse::{
    design_scheme2, design_scheme2_interacting, Interactions, PulseSchedule, Scheme, TransferSpec, DEFAULT_SAMPLES,
};
use soc_sta::robustness::{
    integrate_bloch, scan_noise, scan_systematic, stochastic_oracle, unitary_fidelity, ScanEngine,
};

fn plain() -> PulseSchedule {
    let spec = TransferSpec::canonical(Scheme::SoDirection);
    let me = spec.matrix_elements().unwrap();
    design_scheme2(&spec, &me, DEFAULT_SAMPLES).unwrap()
}

fn interacting() -> PulseSchedule {
    let g = Interactions::new(0.3, 0.2, 0.115, 0.115);
    let spec = TransferSpec::canonical(Scheme::SoDirectionInteracting).with_interactions(g);
    let me = spec.matrix_elements().unwrap();
    design_scheme2_interacting(&spec, &me, DEFAULT_SAMPLES).unwrap()
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[test]
fn systematic_error_peaks_at_zero() {
    let lambdas = grid(-0.5, 0.5, 0.05);
    let engine = ScanEngine::TwoLevel(OdeSettings::fixed(1e-3));
    for s in [plain(), interacting()] {
        let me = s.spec.matrix_elements().unwrap();
        let scan = scan_systematic(&s, &me, &lambdas, &engine).unwrap();
        assert!(scan.failures.is_empty());
        let f0 = scan.fidelity_at(0.0).unwrap();
        assert!(f0 >= 1.0 - 1e-6, "{f0}");
        for f in &scan.fidelity {
            assert!(f.unwrap() <= f0 + 1e-12);
        }
        let [_, _, curvature] = scan.quadratic_fit().unwrap();
        assert!(curvature < 0.0);
    }
}

#[test]
fn noise_degrades_monotonically_and_purity_falls() {
    let lps = grid(0.0, 1.0, 0.05);
    let settings = OdeSettings::fixed(1e-3);
    for s in [plain(), interacting()] {
        let scan = scan_noise(&s, &lps, &settings).unwrap();
        let f: Vec<f64> = scan.fidelity.iter().map(|f| f.unwrap()).collect();
        assert!((f[0] - unitary_fidelity(&s, &settings).unwrap()).abs() <= 1e-6);
        for w in f.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{w:?}");
        }
        for rise in scan.max_purity_increase.as_ref().unwrap() {
            assert!(*rise <= 1e-12, "{rise}");
        }
    }
}

#[test]
fn dephasing_never_pumps_population_directly() {
    let mut s = plain();
    s.channel_a.iter_mut().for_each(|v| *v = 0.0);
    let settings = OdeSettings::fixed(1e-2);
    let (_, quiet) = integrate_bloch(&s, 0.0, &settings).unwrap();
    let (_, noisy) = integrate_bloch(&s, 0.9, &settings).unwrap();
    for (a, b) in quiet.iter().zip(&noisy) {
        assert_eq!(a.w, b.w);
    }
}

#[test]
fn stochastic_ensemble_agrees_with_master_equation() {
    let s = plain();
    let settings = OdeSettings::fixed(1e-3);
    let quiet = stochastic_oracle(&s, 0.0, 100, 7, 1e-3).unwrap();
    let unitary = unitary_fidelity(&s, &settings).unwrap();
    assert!((quiet.fidelity - unitary).abs() < 1e-9);
    assert!(quiet.stderr < 1e-9);

    let master = scan_noise(&s, &[0.5], &settings).unwrap().fidelity[0].unwrap();
    let est = stochastic_oracle(&s, 0.5, 1000, 42, 1e-3).unwrap();
    let gap = (est.fidelity - master).abs();
    assert!(
        gap <= 0.01 && gap <= 2.0 * est.stderr,
        "{} ± {} vs {master}",
        est.fidelity,
        est.stderr
    );

    let wide = stochastic_oracle(&s, 0.5, 2000, 42, 1e-3).unwrap();
    let ratio = est.stderr / wide.stderr;
    assert!((ratio - 2f64.sqrt()).abs() < 0.25, "{ratio}");

    let again = stochastic_oracle(&s, 0.5, 1000, 42, 1e-3).unwrap();
    assert_eq!(again.fidelity.to_bits(), est.fidelity.to_bits());
}
