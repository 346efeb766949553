//! Split-step propagation of the full spinor on a periodic 1D grid.
//!
//! Each step is `e^{−iV dt/2} e^{−iT dt} e^{−iV dt/2}`, where `V` holds the
//! trap, Zeeman/Raman terms and the frozen mean-field diagonal, and `T` holds
//! `k²/2 + αk (σ·n₁)`. Both factors are Pauli-vector exponentials evaluated
//! in closed form, so every substep is unitary up to rounding.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::morse::MorseSpec;
use crate::pulse::{PulseSchedule, RawCouplings, Scheme};
use crate::{Error, Result};

/// Largest mass allowed in the outer 5% of the window on each side.
const EDGE_MASS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if points < 512 || !points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid points must be a power of two >= 512, got {points}"
            )));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Config(format!("invalid grid window [{x_min}, {x_max})")));
        }
        Ok(Self { x_min, x_max, points })
    }

    /// `[−5, 25)` with 2048 points.
    pub fn default_window() -> Self {
        Self::new(-5.0, 25.0, 2048).expect("default grid is valid")
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn ks(&self) -> Vec<f64> {
        let n = self.points as i64;
        let scale = 2.0 * std::f64::consts::PI / (self.x_max - self.x_min);
        (0..n)
            .map(|j| if j < (n + 1) / 2 { j } else { j - n } as f64 * scale)
            .collect()
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self {
            x_min: self.x_min + by,
            x_max: self.x_max + by,
            points: self.points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Spin {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub up: Vec<Complex64>,
    pub down: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(grid: &SpatialGrid) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); grid.points()];
        Self {
            up: zero.clone(),
            down: zero,
        }
    }

    pub fn norm(&self, grid: &SpatialGrid) -> f64 {
        let sum: f64 = self.up.iter().chain(&self.down).map(|v| v.norm_sqr()).sum();
        sum * grid.dx()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &SpinorField, grid: &SpatialGrid) -> Complex64 {
        let up: Complex64 = self.up.iter().zip(&other.up).map(|(a, b)| a.conj() * b).sum();
        let down: Complex64 = self.down.iter().zip(&other.down).map(|(a, b)| a.conj() * b).sum();
        (up + down) * grid.dx()
    }

    pub fn is_finite(&self) -> bool {
        self.up
            .iter()
            .chain(&self.down)
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.up.iter_mut().chain(self.down.iter_mut()) {
            *v *= factor;
        }
    }
}

/// `|n,↑⟩ = e^{−iαx}⟨x|n⟩|↑⟩` or `|n,↓⟩ = e^{iαx}⟨x|n⟩|↓⟩`, normalized on the grid.
pub fn init_basis_state(
    grid: &SpatialGrid,
    morse: &MorseSpec,
    n: usize,
    spin: Spin,
    alpha: f64,
) -> Result<SpinorField> {
    let state = morse.state(n)?;
    let sign = match spin {
        Spin::Up => -1.0,
        Spin::Down => 1.0,
    };
    let orbital: Vec<Complex64> = grid
        .xs()
        .into_iter()
        .map(|x| Complex64::from_polar(state.value(x), sign * alpha * x))
        .collect();
    let edge = grid.points() / 20;
    let mass = |range: std::ops::Range<usize>| orbital[range].iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx();
    let outer = mass(0..edge).max(mass(grid.points() - edge..grid.points()));
    if outer >= EDGE_MASS {
        return Err(Error::Config(format!(
            "state {n} carries mass {outer:e} in the outer 5% of [{}, {}); widen the grid",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let mut field = SpinorField::zeros(grid);
    match spin {
        Spin::Up => field.up = orbital,
        Spin::Down => field.down = orbital,
    }
    let norm = field.norm(grid);
    field.scale(norm.sqrt().recip());
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridObservables {
    pub norm: f64,
    pub x_expect: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub fidelity: f64,
}

/// Spin polarizations, position and overlap with `target`.
pub fn observables(field: &SpinorField, grid: &SpatialGrid, target: &SpinorField) -> GridObservables {
    let dx = grid.dx();
    let mut norm = 0.0;
    let mut x_expect = 0.0;
    let mut pz = 0.0;
    let mut cross = Complex64::new(0.0, 0.0);
    for i in 0..grid.points() {
        let (u, d) = (field.up[i], field.down[i]);
        let rho = u.norm_sqr() + d.norm_sqr();
        norm += rho;
        x_expect += grid.x(i) * rho;
        pz += u.norm_sqr() - d.norm_sqr();
        cross += d.conj() * u;
    }
    let overlap = target.inner(field, grid);
    GridObservables {
        norm: norm * dx,
        x_expect: x_expect * dx,
        px: 2.0 * cross.re * dx,
        py: -2.0 * cross.im * dx,
        pz: pz * dx,
        fidelity: overlap.norm_sqr(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub x: Vec<f64>,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

pub fn density_profile(field: &SpinorField, grid: &SpatialGrid) -> DensityProfile {
    DensityProfile {
        x: grid.xs(),
        up: field.up.iter().map(|v| v.norm_sqr()).collect(),
        down: field.down.iter().map(|v| v.norm_sqr()).collect(),
    }
}

impl DensityProfile {
    pub fn integral(&self) -> f64 {
        let dx = self.x[1] - self.x[0];
        self.up.iter().zip(&self.down).map(|(u, d)| u + d).sum::<f64>() * dx
    }

    /// `∫ (|ρ↑ − ρ'↑| + |ρ↓ − ρ'↓|) dx`
    pub fn l1_distance(&self, other: &DensityProfile) -> f64 {
        let dx = self.x[1] - self.x[0];
        let up: f64 = self.up.iter().zip(&other.up).map(|(a, b)| (a - b).abs()).sum();
        let down: f64 = self.down.iter().zip(&other.down).map(|(a, b)| (a - b).abs()).sum();
        (up + down) * dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSettings {
    pub dt: f64,
    /// Per-spin contact couplings; zero for a noninteracting gas.
    pub couplings: RawCouplings,
    /// Observables are recorded every this many steps, and at the end.
    pub record_every: usize,
    /// Allowed `|N(t) − N(0)|`; defaults to 1e-8 linear and 1e-6 with interactions.
    pub norm_tolerance: Option<f64>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            couplings: RawCouplings::default(),
            record_every: 10,
            norm_tolerance: None,
        }
    }
}

impl GridSettings {
    pub fn with_couplings(mut self, g: RawCouplings) -> Self {
        self.couplings = g;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    fn tolerance(&self) -> f64 {
        self.norm_tolerance
            .unwrap_or(if self.couplings.is_zero() { 1e-8 } else { 1e-6 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRunReport {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub x_expect: Vec<f64>,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    pub pz: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub final_fidelity: f64,
    /// Largest `|θ₁|` fed to the SO term (zero for the Raman scheme).
    pub max_abs_theta1: f64,
    pub steps: usize,
    pub settings: GridSettings,
    pub grid: SpatialGrid,
}

impl GridRunReport {
    pub fn csv_header() -> &'static str {
        "t,norm,x_expect,Px,Py,Pz,fidelity"
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| {
                vec![
                    self.times[i],
                    self.norm[i],
                    self.x_expect[i],
                    self.px[i],
                    self.py[i],
                    self.pz[i],
                    self.fidelity[i],
                ]
            })
            .collect()
    }

    fn push(&mut self, t: f64, o: &GridObservables) {
        self.times.push(t);
        self.norm.push(o.norm);
        self.x_expect.push(o.x_expect);
        self.px.push(o.px);
        self.py.push(o.py);
        self.pz.push(o.pz);
        self.fidelity.push(o.fidelity);
    }

    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.norm[0];
        self.norm.iter().fold(0.0, |m, n| m.max((n - n0).abs()))
    }
}

/// `e^{−iτ(s + h·σ)}` applied to `(u, d)`.
#[inline]
fn pauli_exp(tau: f64, s: f64, h: [f64; 3], u: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let r = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let phase = Complex64::from_polar(1.0, -tau * s);
    let (c, sn) = ((r * tau).cos(), (r * tau).sin());
    let (nx, ny, nz) = if r > 0.0 {
        (h[0] / r, h[1] / r, h[2] / r)
    } else {
        (0.0, 0.0, 0.0)
    };
    let mi_s = Complex64::new(0.0, -sn);
    // (cos − i sin n·σ)
    let a = Complex64::new(c, 0.0) + mi_s * nz;
    let b = mi_s * Complex64::new(nx, -ny);
    let cc = mi_s * Complex64::new(nx, ny);
    let dd = Complex64::new(c, 0.0) - mi_s * nz;
    (phase * (a * u + b * d), phase * (cc * u + dd * d))
}

struct Propagator {
    grid: SpatialGrid,
    potential: Vec<f64>,
    ks: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    alpha: f64,
    g: RawCouplings,
}

impl Propagator {
    fn new(grid: &SpatialGrid, morse: &MorseSpec, alpha: f64, g: RawCouplings) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points());
        let inverse = planner.plan_fft_inverse(grid.points());
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            grid: *grid,
            potential: grid.xs().into_iter().map(|x| morse.potential(x)).collect(),
            ks: grid.ks(),
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            alpha,
            g,
        }
    }

    /// Half-step with local field `h = (hx, 0, hz)` plus the mean-field diagonal.
    fn position(&self, field: &mut SpinorField, tau: f64, hx: f64, hz: f64) {
        let g = &self.g;
        for i in 0..self.grid.points() {
            let (u, d) = (field.up[i], field.down[i]);
            let (ru, rd) = (u.norm_sqr(), d.norm_sqr());
            let d1 = g.up_up * ru + g.up_down * rd;
            let d2 = g.down_up * ru + g.down_down * rd;
            let s = self.potential[i] + 0.5 * (d1 + d2);
            let h = [hx, 0.0, hz + 0.5 * (d1 - d2)];
            let (nu, nd) = pauli_exp(tau, s, h, u, d);
            field.up[i] = nu;
            field.down[i] = nd;
        }
    }

    /// Full step of `k²/2 + αk(sinθ₁ σx + cosθ₁ σz)`.
    fn momentum(&mut self, field: &mut SpinorField, dt: f64, sin1: f64, cos1: f64) {
        self.forward.process_with_scratch(&mut field.up, &mut self.scratch);
        self.forward.process_with_scratch(&mut field.down, &mut self.scratch);
        let inv_n = 1.0 / self.grid.points() as f64;
        for (j, &k) in self.ks.iter().enumerate() {
            let ak = self.alpha * k;
            let (u, d) = (field.up[j], field.down[j]);
            let (nu, nd) = pauli_exp(dt, 0.5 * k * k, [ak * sin1, 0.0, ak * cos1], u, d);
            field.up[j] = nu * inv_n;
            field.down[j] = nd * inv_n;
        }
        self.inverse.process_with_scratch(&mut field.up, &mut self.scratch);
        self.inverse.process_with_scratch(&mut field.down, &mut self.scratch);
    }
}

/// Evolves `field` from 0 to the schedule's `t_f`.
///
/// Raman schedules drive `Ω/2 σx + Δ/2 σz` with the SO field along z;
/// direction-tuned schedules drive `β/2 σz` with the SO field along
/// `(sinθ₁, 0, cosθ₁)` using the exact trigonometric functions. Interactions
/// enter through `settings.couplings` only, so the same schedule can be run
/// with or without a mean field.
pub fn evolve(
    field: &SpinorField,
    grid: &SpatialGrid,
    schedule: &PulseSchedule,
    settings: &GridSettings,
) -> Result<(SpinorField, GridRunReport)> {
    if field.up.len() != grid.points() || field.down.len() != grid.points() {
        return Err(Error::Config("field length does not match grid".into()));
    }
    if !(settings.dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {}", settings.dt)));
    }
    let spec = &schedule.spec;
    let t_f = schedule.t_f();
    let steps = (t_f / settings.dt).round().max(1.0) as usize;
    let dt = t_f / steps as f64;
    let record_every = settings.record_every.max(1);
    let target = init_basis_state(grid, &spec.morse, spec.l, Spin::Down, spec.alpha)?;
    let mut prop = Propagator::new(grid, &spec.morse, spec.alpha, settings.couplings);
    let mut psi = field.clone();
    let mut report = GridRunReport {
        times: Vec::new(),
        norm: Vec::new(),
        x_expect: Vec::new(),
        px: Vec::new(),
        py: Vec::new(),
        pz: Vec::new(),
        fidelity: Vec::new(),
        final_fidelity: 0.0,
        max_abs_theta1: 0.0,
        steps,
        settings: *settings,
        grid: *grid,
    };
    let first = observables(&psi, grid, &target);
    let norm0 = first.norm;
    report.push(0.0, &first);
    let tolerance = settings.tolerance();
    let so_direction = spec.scheme.is_so_direction();
    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let (a, b) = schedule.channels(t_mid)?;
        let (hx, hz, sin1, cos1) = match spec.scheme {
            Scheme::Raman => (0.5 * a, 0.5 * b, 0.0, 1.0),
            _ => (0.0, 0.5 * b, a.sin(), a.cos()),
        };
        if so_direction {
            report.max_abs_theta1 = report.max_abs_theta1.max(a.abs());
        }
        prop.position(&mut psi, 0.5 * dt, hx, hz);
        prop.momentum(&mut psi, dt, sin1, cos1);
        prop.position(&mut psi, 0.5 * dt, hx, hz);
        let done = step + 1;
        if done % record_every == 0 || done == steps {
            let t = if done == steps { t_f } else { done as f64 * dt };
            if !psi.is_finite() {
                return Err(Error::NumericalFailure {
                    time: t,
                    step: Some(done),
                    reason: "non-finite field".into(),
                });
            }
            let obs = observables(&psi, grid, &target);
            if (obs.norm - norm0).abs() > tolerance {
                return Err(Error::NumericalFailure {
                    time: t,
                    step: Some(done),
                    reason: format!("norm drifted from {norm0} to {} (tolerance {tolerance:e})", obs.norm),
                });
            }
            report.push(t, &obs);
        }
    }
    report.final_fidelity = *report.fidelity.last().expect("at least one record");
    Ok((psi, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new(-5.0, 25.0, 1000).is_err());
        assert!(SpatialGrid::new(-5.0, 25.0, 256).is_err());
        assert!(SpatialGrid::new(5.0, -5.0, 1024).is_err());
        let g = SpatialGrid::default_window();
        assert!((g.dx() - 30.0 / 2048.0).abs() < 1e-15);
        let ks = g.ks();
        assert_eq!(ks[0], 0.0);
        assert!(ks[1024] < 0.0 && ks[1023] > 0.0);
    }

    #[test]
    fn pauli_exp_is_unitary_and_matches_series() {
        let (u, d) = (Complex64::new(0.6, 0.1), Complex64::new(-0.2, 0.76));
        let h = [0.3, -0.4, 1.2];
        let (a, b) = pauli_exp(0.7, 0.25, h, u, d);
        assert!(((a.norm_sqr() + b.norm_sqr()) - (u.norm_sqr() + d.norm_sqr())).abs() < 1e-14);
        // Taylor series of exp(−iτH) with H = s + h·σ.
        let i = Complex64::i();
        let hm = [
            [Complex64::new(0.25 + h[2], 0.0), Complex64::new(h[0], -h[1])],
            [Complex64::new(h[0], h[1]), Complex64::new(0.25 - h[2], 0.0)],
        ];
        let mut term = [u, d];
        let mut sum = term;
        for k in 1..40 {
            let next = [
                -i * 0.7 / k as f64 * (hm[0][0] * term[0] + hm[0][1] * term[1]),
                -i * 0.7 / k as f64 * (hm[1][0] * term[0] + hm[1][1] * term[1]),
            ];
            term = next;
            sum[0] += term[0];
            sum[1] += term[1];
        }
        assert!((sum[0] - a).norm() < 1e-13 && (sum[1] - b).norm() < 1e-13);
    }

    #[test]
    fn basis_states_on_grid() {
        let grid = SpatialGrid::default_window();
        let morse = MorseSpec::new(8.0).unwrap();
        let up = init_basis_state(&grid, &morse, 0, Spin::Up, 1.6).unwrap();
        let down = init_basis_state(&grid, &morse, 1, Spin::Down, 1.6).unwrap();
        assert!((up.norm(&grid) - 1.0).abs() < 1e-10);
        assert_eq!(up.inner(&down, &grid), Complex64::new(0.0, 0.0));
        let o = observables(&up, &grid, &down);
        assert_eq!((o.px, o.py, o.fidelity), (0.0, 0.0, 0.0));
        assert!((o.pz - 1.0).abs() < 1e-12);
        let x0 = morse.position_moment(0).unwrap();
        assert!((o.x_expect - x0).abs() < 1e-6);
        let narrow = SpatialGrid::new(-1.0, 4.0, 1024).unwrap();
        assert!(matches!(
            init_basis_state(&narrow, &morse, 1, Spin::Down, 1.6),
            Err(Error::Config(_))
        ));
    }
}
