//! Executable acceptance criteria.
//!
//! Each criterion produces a [`CriterionReport`] made of individual checks
//! with the measured value and the tolerance it was held to. Expensive grid
//! runs are computed once per process and shared between criteria.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::grid::{evolve, init_basis_state, GridRunReport, GridSettings, SpatialGrid, Spin};
use crate::morse::MorseSpec;
use crate::numerics::OdeSettings;
use crate::pulse::{
    design_scheme1, design_scheme2, design_scheme2_interacting, effective_g, hamiltonian_norm, invariant_residual,
    Interactions, PulseSchedule, RawCouplings, Scheme, TransferSpec, DEFAULT_SAMPLES,
};
use crate::robustness::{scan_noise, scan_systematic, stochastic_oracle, ScanEngine};
use crate::two_level::{propagate, propagate_nonlinear};
use crate::Result;

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "Morse structure"),
    (2, "overlap constants"),
    (3, "design endpoints"),
    (4, "alpha invariance"),
    (5, "two-level transfer"),
    (6, "grid validation"),
    (7, "observables"),
    (8, "interacting compensation"),
    (9, "robustness"),
    (10, "numerical hygiene"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub target: String,
    pub passed: bool,
}

impl Check {
    fn within(label: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            value,
            target: format!("{expected} ± {tol:e}"),
            passed: (value - expected).abs() <= tol,
        }
    }

    fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            target: format!("<= {bound:e}"),
            passed: value <= bound,
        }
    }

    fn at_least(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            target: format!(">= {bound}"),
            passed: value >= bound,
        }
    }

    fn holds(label: impl Into<String>, value: f64, condition: bool, target: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            value,
            target: target.into(),
            passed: condition,
        }
    }

    fn error(label: impl Into<String>, err: impl fmt::Display) -> Self {
        Self {
            label: label.into(),
            value: f64::NAN,
            target: format!("error: {err}"),
            passed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// `PASS criterion 3 (design endpoints)` style headline.
    pub fn headline(&self) -> String {
        format!(
            "{} criterion {} ({})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.headline())?;
        for c in &self.checks {
            let value = if c.value != 0.0 && c.value.abs() < 1e-3 {
                format!("{:.3e}", c.value)
            } else {
                format!("{:.9}", c.value)
            };
            writeln!(
                f,
                "  {} {}: {value} (target {})",
                if c.passed { "ok  " } else { "FAIL" },
                c.label,
                c.target
            )?;
        }
        Ok(())
    }
}

pub fn run_criterion(id: u8) -> CriterionReport {
    let title = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, t)| *t)
        .unwrap_or("unknown");
    let checks = match id {
        1 => morse_structure(),
        2 => overlap_constants(),
        3 => design_endpoints(),
        4 => alpha_invariance(),
        5 => two_level_transfer(),
        6 => grid_validation(),
        7 => observables(),
        8 => interacting_compensation(),
        9 => robustness(),
        10 => hygiene(),
        _ => vec![Check::error("criterion", format!("no criterion {id}"))],
    };
    CriterionReport { id, title, checks }
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id)).collect()
}

fn morse8() -> MorseSpec {
    MorseSpec::new(8.0).expect("depth 8 is valid")
}

fn canonical_raman(c: f64) -> Result<PulseSchedule> {
    let spec = TransferSpec::canonical(Scheme::Raman).with_c(c);
    design_scheme1(&spec, &spec.matrix_elements()?, DEFAULT_SAMPLES)
}

fn canonical_so() -> Result<PulseSchedule> {
    let spec = TransferSpec::canonical(Scheme::SoDirection);
    design_scheme2(&spec, &spec.matrix_elements()?, DEFAULT_SAMPLES)
}

fn fig7_g() -> Interactions {
    Interactions::new(0.3, 0.2, 0.115, 0.115)
}

fn canonical_interacting(g: Interactions) -> Result<PulseSchedule> {
    let spec = TransferSpec::canonical(Scheme::SoDirectionInteracting).with_interactions(g);
    design_scheme2_interacting(&spec, &spec.matrix_elements()?, DEFAULT_SAMPLES)
}

/// Equal raw couplings that give an effective `g11 = 0.3`.
pub fn default_raw_couplings() -> Result<RawCouplings> {
    RawCouplings::uniform_with_g11(&morse8(), 0, 0.3)
}

fn two_level_settings() -> OdeSettings {
    OdeSettings::fixed(1e-3)
}

pub mod oracle {
    //! Second-order finite-difference eigenvalues of `−½ d²/dx² + U`,
    //! located by Sturm-sequence bisection and Richardson-extrapolated.

    use crate::morse::MorseSpec;

    /// Number of Dirichlet eigenvalues below `lambda` on `intervals` cells.
    fn count_below(morse: &MorseSpec, lo: f64, hi: f64, intervals: usize, lambda: f64) -> usize {
        let h = (hi - lo) / intervals as f64;
        let off = -0.5 / (h * h);
        let off2 = off * off;
        let mut count = 0;
        let mut q = 1.0;
        for i in 1..intervals {
            let d = 1.0 / (h * h) + morse.potential(lo + i as f64 * h) - lambda;
            q = if i == 1 { d } else { d - off2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * off.abs();
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn eigenvalue(morse: &MorseSpec, k: usize, lo: f64, hi: f64, intervals: usize) -> f64 {
        let (mut a, mut b) = (-morse.depth(), 0.0);
        for _ in 0..64 {
            let mid = 0.5 * (a + b);
            if count_below(morse, lo, hi, intervals, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    }

    /// `(4 E(h/2) − E(h)) / 3`
    pub fn extrapolated(morse: &MorseSpec, k: usize, lo: f64, hi: f64, intervals: usize) -> f64 {
        let coarse = eigenvalue(morse, k, lo, hi, intervals);
        let fine = eigenvalue(morse, k, lo, hi, 2 * intervals);
        (4.0 * fine - coarse) / 3.0
    }
}

fn morse_structure() -> Vec<Check> {
    let morse = morse8();
    let mut checks = Vec::new();
    let e = |n| morse.energy(n).unwrap_or(f64::NAN);
    checks.push(Check::within("E0 closed form", e(0), -6.125, 1e-12));
    checks.push(Check::within("E1 closed form", e(1), -3.125, 1e-12));
    for n in 0..morse.bound_count() {
        let fd = oracle::extrapolated(&morse, n, -3.5, 80.0, 1 << 16);
        checks.push(Check::within(format!("E{n} finite-difference oracle"), fd, e(n), 1e-5));
    }
    let mut worst: f64 = 0.0;
    for m in 0..morse.bound_count() {
        for n in m..morse.bound_count() {
            match morse.overlap(m, n) {
                Ok(o) => worst = worst.max((o - if m == n { 1.0 } else { 0.0 }).abs()),
                Err(err) => checks.push(Check::error(format!("overlap {m},{n}"), err)),
            }
        }
    }
    checks.push(Check::at_most("orthonormality residual", worst, 1e-7));
    // −½φ'' + Uφ − Eφ with a fourth-order difference of the closed form.
    let mut residual: f64 = 0.0;
    let h = 1e-3;
    for n in 0..morse.bound_count() {
        let Ok(state) = morse.state(n) else { continue };
        for k in 0..400 {
            let x = -1.5 + 0.05 * k as f64;
            let f = |d: f64| state.value(x + d);
            let d2 = (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
            residual = residual.max((-0.5 * d2 + (morse.potential(x) - e(n)) * f(0.0)).abs());
        }
    }
    checks.push(Check::at_most("eigen-equation residual", residual, 1e-5));
    checks
}

fn overlap_constants() -> Vec<Check> {
    let morse = morse8();
    let q = |m, n| morse.overlap_q(m, n);
    match (q(0, 0), q(1, 1), q(0, 1)) {
        (Ok(q00), Ok(q11), Ok(q01)) => vec![
            Check::within("Q(0,0)/Q(1,1)", q00 / q11, 1.5, 0.02),
            Check::within("Q(0,1)/[Q(0,0)+Q(1,1)]", q01 / (q00 + q11), 0.23, 0.01),
        ],
        _ => vec![Check::error("overlap integrals", "quadrature failed")],
    }
}

fn design_endpoints() -> Vec<Check> {
    let mut checks = Vec::new();
    for (name, schedule) in [("Delta", canonical_raman(0.1)), ("beta", canonical_so())] {
        match schedule {
            Ok(s) => {
                let last = *s.channel_b.last().expect("nonempty");
                checks.push(Check::within(format!("{name}(0+)"), s.channel_b[0], 3.0 - 0.15, 1e-6));
                checks.push(Check::within(format!("{name}(t_f-)"), last, 3.0 + 0.15, 1e-6));
            }
            Err(err) => checks.push(Check::error(name, err)),
        }
    }
    for (c, gap) in [(0.1, 0.15), (1.5, 2.25)] {
        match canonical_raman(c) {
            Ok(s) => {
                let z0 = (s.channel_b[0] - s.spec.level_spacing()).abs();
                checks.push(Check::within(format!("gap for c = {c}"), z0, gap, 1e-9));
            }
            Err(err) => checks.push(Check::error(format!("c = {c}"), err)),
        }
    }
    checks
}

fn alpha_invariance() -> Vec<Check> {
    let base = TransferSpec::canonical(Scheme::Raman);
    let designs: Result<Vec<PulseSchedule>> = [0.8, 1.2, 1.6, 2.0]
        .iter()
        .map(|&a| {
            let spec = base.with_alpha(a);
            design_scheme1(&spec, &spec.matrix_elements()?, DEFAULT_SAMPLES)
        })
        .collect();
    let designs = match designs {
        Ok(d) => d,
        Err(err) => return vec![Check::error("designs", err)],
    };
    let mut delta: f64 = 0.0;
    let mut product: f64 = 0.0;
    let reference = &designs[2];
    for d in &designs {
        for i in 0..d.len() {
            delta = delta.max((d.channel_b[i] - reference.channel_b[i]).abs());
            let p = d.channel_a[i] * d.coupling.norm() - reference.channel_a[i] * reference.coupling.norm();
            product = product.max(p.abs());
        }
    }
    vec![
        Check::at_most("max |Delta_alpha - Delta_1.6|", delta, 1e-10),
        Check::at_most("max |Omega|G| difference|", product, 1e-10),
    ]
}

fn residual_checks(name: &str, s: &PulseSchedule) -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let t = s.t_f() * (k as f64 + 0.5) / 100.0;
        match (invariant_residual(s, t), hamiltonian_norm(s, t)) {
            (Ok(r), Ok(h)) => worst = worst.max(r / h.max(1.0)),
            (Err(err), _) | (_, Err(err)) => return Check::error(format!("{name} residual"), err),
        }
    }
    Check::at_most(format!("{name} invariant residual / max(|H|, 1)"), worst, 1e-8)
}

fn two_level_transfer() -> Vec<Check> {
    let mut checks = Vec::new();
    for (name, schedule) in [("Raman", canonical_raman(0.1)), ("SO direction", canonical_so())] {
        let run = schedule.and_then(|s| {
            let me = s.spec.matrix_elements()?;
            Ok((propagate(&s, &me, &two_level_settings())?, s))
        });
        match run {
            Ok((traj, s)) => {
                checks.push(Check::at_least(
                    format!("{name} fidelity"),
                    traj.final_fidelity(),
                    1.0 - 1e-6,
                ));
                checks.push(residual_checks(name, &s));
            }
            Err(err) => checks.push(Check::error(name, err)),
        }
    }
    checks
}

/// Summary of one cached grid run.
#[derive(Debug, Clone)]
struct GridOutcome {
    fidelity: f64,
    pz_start: f64,
    pz_end: f64,
    x_start: f64,
    x_end: f64,
    norm_drift: f64,
}

impl From<&GridRunReport> for GridOutcome {
    fn from(r: &GridRunReport) -> Self {
        Self {
            fidelity: r.final_fidelity,
            pz_start: r.pz[0],
            pz_end: *r.pz.last().expect("nonempty"),
            x_start: r.x_expect[0],
            x_end: *r.x_expect.last().expect("nonempty"),
            norm_drift: r.max_norm_drift(),
        }
    }
}

#[derive(Clone, Copy)]
enum GridCase {
    RamanSmall,
    RamanLarge,
    GpeCompensated,
}

fn grid_run(case: GridCase, dt: f64) -> std::result::Result<GridOutcome, String> {
    let go = || -> Result<GridOutcome> {
        let (schedule, couplings) = match case {
            GridCase::RamanSmall => (canonical_raman(0.1)?, RawCouplings::default()),
            GridCase::RamanLarge => (canonical_raman(1.5)?, RawCouplings::default()),
            GridCase::GpeCompensated => {
                let raw = default_raw_couplings()?;
                let g = effective_g(&raw, &morse8(), 0, 1)?;
                (canonical_interacting(g)?, raw)
            }
        };
        let grid = SpatialGrid::default_window();
        let spec = &schedule.spec;
        let psi0 = init_basis_state(&grid, &spec.morse, spec.n, Spin::Up, spec.alpha)?;
        let settings = GridSettings::default().with_dt(dt).with_couplings(couplings);
        let (_, report) = evolve(&psi0, &grid, &schedule, &settings)?;
        Ok(GridOutcome::from(&report))
    };
    go().map_err(|e| e.to_string())
}

fn cached(case: GridCase, half_step: bool) -> std::result::Result<GridOutcome, String> {
    static CELLS: [OnceLock<std::result::Result<GridOutcome, String>>; 6] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let idx = 2 * case as usize + half_step as usize;
    let dt = if half_step { 5e-4 } else { 1e-3 };
    CELLS[idx].get_or_init(|| grid_run(case, dt)).clone()
}

fn grid_validation() -> Vec<Check> {
    match (cached(GridCase::RamanSmall, false), cached(GridCase::RamanLarge, false)) {
        (Ok(small), Ok(large)) => vec![
            Check::within("grid fidelity c = 0.1", small.fidelity, 0.9966, 0.003),
            Check::within("grid fidelity c = 1.5", large.fidelity, 0.979, 0.005),
            Check::holds(
                "F(c=1.5) - F(c=0.1)",
                large.fidelity - small.fidelity,
                large.fidelity < small.fidelity,
                "< 0",
            ),
        ],
        (Err(e), _) | (_, Err(e)) => vec![Check::error("grid run", e)],
    }
}

fn observables() -> Vec<Check> {
    let morse = morse8();
    let (x0, x1) = match (morse.position_moment(0), morse.position_moment(1)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return vec![Check::error("position moments", "quadrature failed")],
    };
    match cached(GridCase::RamanSmall, false) {
        Ok(r) => vec![
            Check::within("P_z(0)", r.pz_start, 1.0, 1e-10),
            Check::within("P_z(t_f)", r.pz_end, -1.0, 0.01),
            Check::within("<x>(0)", r.x_start, x0, 0.02),
            Check::within("<x>(t_f)", r.x_end, x1, 0.02),
            Check::holds("net displacement", r.x_end - r.x_start, r.x_end > r.x_start, "> 0"),
        ],
        Err(e) => vec![Check::error("grid run", e)],
    }
}

fn interacting_compensation() -> Vec<Check> {
    let mut checks = Vec::new();
    let g = fig7_g();
    let run = || -> Result<(f64, f64, f64)> {
        let comp = canonical_interacting(g)?;
        let plain = canonical_so()?;
        let me = comp.spec.matrix_elements()?;
        let fc = propagate_nonlinear(&comp, &me, &g, &two_level_settings())?.final_fidelity();
        let fu = propagate_nonlinear(&plain, &me, &g, &two_level_settings())?.final_fidelity();
        let dtheta = comp
            .channel_a
            .iter()
            .zip(&plain.channel_a)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Ok((fc, fu, dtheta))
    };
    match run() {
        Ok((fc, fu, dtheta)) => {
            checks.push(Check::at_least("two-level compensated fidelity", fc, 1.0 - 1e-6));
            checks.push(Check::holds("compensated - uncompensated", fc - fu, fc > fu, "> 0"));
            checks.push(Check::at_most("max |theta1_int - theta1|", dtheta, 1e-12));
        }
        Err(err) => checks.push(Check::error("two-level runs", err)),
    }
    match cached(GridCase::GpeCompensated, false) {
        Ok(r) => checks.push(Check::at_least("grid GPE compensated fidelity", r.fidelity, 0.99)),
        Err(e) => checks.push(Check::error("grid GPE run", e)),
    }
    checks
}

fn lambda_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn robustness() -> Vec<Check> {
    let mut checks = Vec::new();
    let schedules = match (canonical_so(), canonical_interacting(fig7_g())) {
        (Ok(a), Ok(b)) => [("noninteracting", a), ("interacting", b)],
        (Err(e), _) | (_, Err(e)) => return vec![Check::error("designs", e)],
    };
    let engine = ScanEngine::TwoLevel(two_level_settings());
    let lambdas = lambda_grid(-0.5, 0.5, 0.05);
    let primes = lambda_grid(0.0, 1.0, 0.05);
    for (name, s) in &schedules {
        let me = match s.spec.matrix_elements() {
            Ok(me) => me,
            Err(e) => return vec![Check::error("matrix elements", e)],
        };
        match scan_systematic(s, &me, &lambdas, &engine) {
            Ok(scan) => {
                let f0 = scan.fidelity_at(0.0).unwrap_or(f64::NAN);
                let excess = scan
                    .fidelity
                    .iter()
                    .map(|f| f.map_or(f64::INFINITY, |f| f - f0))
                    .fold(f64::NEG_INFINITY, f64::max);
                checks.push(Check::at_most(format!("{name}: max F(lambda) - F(0)"), excess, 1e-12));
            }
            Err(e) => checks.push(Check::error(format!("{name} systematic scan"), e)),
        }
        match scan_noise(s, &primes, &two_level_settings()) {
            Ok(scan) => {
                let rise = scan
                    .fidelity
                    .windows(2)
                    .map(|w| match (w[0], w[1]) {
                        (Some(a), Some(b)) => b - a,
                        _ => f64::INFINITY,
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                checks.push(Check::at_most(
                    format!("{name}: max F step increase in lambda'"),
                    rise,
                    1e-12,
                ));
            }
            Err(e) => checks.push(Check::error(format!("{name} noise scan"), e)),
        }
    }
    let (_, plain) = &schedules[0];
    for lp in [0.5, 1.0] {
        let master = scan_noise(plain, &[lp], &two_level_settings()).map(|s| s.fidelity[0]);
        let stochastic = stochastic_oracle(plain, lp, 1000, 2024, 1e-3);
        match (master, stochastic) {
            (Ok(Some(m)), Ok(est)) => checks.push(Check::at_most(
                format!("|stochastic - master| at lambda' = {lp}"),
                (est.fidelity - m).abs(),
                0.01,
            )),
            (Err(e), _) | (_, Err(e)) => checks.push(Check::error(format!("lambda' = {lp}"), e)),
            (Ok(None), _) => checks.push(Check::error(format!("lambda' = {lp}"), "master equation failed")),
        }
    }
    checks
}

fn hygiene() -> Vec<Check> {
    let mut checks = Vec::new();
    for (name, case, bound) in [
        ("linear grid c = 0.1", GridCase::RamanSmall, 1e-8),
        ("linear grid c = 1.5", GridCase::RamanLarge, 1e-8),
        ("GPE grid", GridCase::GpeCompensated, 1e-6),
    ] {
        match (cached(case, false), cached(case, true)) {
            (Ok(a), Ok(b)) => {
                checks.push(Check::at_most(format!("{name} norm drift"), a.norm_drift, bound));
                checks.push(Check::at_most(
                    format!("{name} |F(dt) - F(dt/2)|"),
                    (a.fidelity - b.fidelity).abs(),
                    1e-5,
                ));
            }
            (Err(e), _) | (_, Err(e)) => checks.push(Check::error(name, e)),
        }
    }
    let g = fig7_g();
    let two_level = || -> Result<Vec<(&'static str, f64, f64)>> {
        let s1 = canonical_raman(0.1)?;
        let s2 = canonical_so()?;
        let s3 = canonical_interacting(g)?;
        let me = s1.spec.matrix_elements()?;
        let mut out = Vec::new();
        for (name, s, gg) in [
            ("two-level Raman", &s1, Interactions::default()),
            ("two-level SO direction", &s2, Interactions::default()),
            ("two-level interacting", &s3, g),
        ] {
            let a = propagate_nonlinear(s, &me, &gg, &OdeSettings::fixed(1e-3))?.final_fidelity();
            let b = propagate_nonlinear(s, &me, &gg, &OdeSettings::fixed(5e-4))?.final_fidelity();
            out.push((name, a, b));
        }
        Ok(out)
    };
    match two_level() {
        Ok(rows) => {
            for (name, a, b) in rows {
                checks.push(Check::at_most(format!("{name} |F(dt) - F(dt/2)|"), (a - b).abs(), 1e-5));
            }
        }
        Err(e) => checks.push(Check::error("two-level runs", e)),
    }
    let primes = lambda_grid(0.0, 1.0, 0.05);
    for (name, s) in [
        ("noninteracting", canonical_so()),
        ("interacting", canonical_interacting(g)),
    ] {
        match s.and_then(|s| scan_noise(&s, &primes, &two_level_settings())) {
            Ok(scan) => {
                let rise = scan
                    .max_purity_increase
                    .unwrap_or_default()
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max);
                checks.push(Check::at_most(format!("{name} max purity increase"), rise, 1e-12));
            }
            Err(e) => checks.push(Check::error(format!("{name} noise scan"), e)),
        }
    }
    checks
}
