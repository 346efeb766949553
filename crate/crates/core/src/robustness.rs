//! Sensitivity of the direction-tuned protocol to a miscalibrated Zeeman
//! amplitude and to white noise on it.
//!
//! Noise enters as `λ' ξ(t) H'` with `H' = (β(t)/2) σz` and
//! `⟨ξ(t)ξ(t')⟩ = δ(t − t')`. Averaging gives the dephasing master equation
//! `ρ̇ = −i[H, ρ] − (λ'²/2)[H', [H', ρ]]`, integrated here in Bloch form and
//! cross-checked by an ensemble of phase-kicked pure-state trajectories.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{evolve, init_basis_state, GridSettings, SpatialGrid, Spin};
use crate::morse::MatrixElements;
use crate::numerics::rk4_step;
use crate::numerics::{ode_propagate, OdeSettings};
use crate::pulse::{Interactions, PulseSchedule, TransferSpec};
use crate::two_level::{assemble_h, propagate_nonlinear, propagate_with, Matrix2, TwoLevelState};
use crate::{Error, Result};

/// `u = 2 Re ρ₁₂`, `v = 2 Im ρ₁₂`, `w = ρ₁₁ − ρ₂₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochState {
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn initial() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn from_density(rho: &Matrix2) -> Self {
        let r = rho[0][1];
        Self::new(2.0 * r.re, 2.0 * r.im, (rho[0][0] - rho[1][1]).re)
    }

    pub fn from_pure(psi: &TwoLevelState) -> Self {
        let r = psi.c1 * psi.c2.conj();
        Self::new(2.0 * r.re, 2.0 * r.im, psi.c1.norm_sqr() - psi.c2.norm_sqr())
    }

    /// Unit-trace density matrix.
    pub fn to_density(&self) -> Matrix2 {
        let r = Complex64::new(0.5 * self.u, 0.5 * self.v);
        [
            [Complex64::new(0.5 * (1.0 + self.w), 0.0), r],
            [r.conj(), Complex64::new(0.5 * (1.0 - self.w), 0.0)],
        ]
    }

    pub fn purity(&self) -> f64 {
        self.u * self.u + self.v * self.v + self.w * self.w
    }

    /// Population of `|l,↓⟩`.
    pub fn fidelity(&self) -> f64 {
        0.5 * (1.0 - self.w)
    }

    fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Symmetric and antisymmetric combinations of the interaction constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionSplit {
    pub g_d: f64,
    pub g_s: f64,
    pub g_d_prime: f64,
    pub g_s_prime: f64,
}

impl From<&Interactions> for InteractionSplit {
    fn from(g: &Interactions) -> Self {
        Self {
            g_d: 0.5 * (g.g11 - g.g22),
            g_s: 0.5 * (g.g11 + g.g22),
            g_d_prime: 0.5 * (g.g12 - g.g21),
            g_s_prime: 0.5 * (g.g12 + g.g21),
        }
    }
}

impl InteractionSplit {
    pub fn to_interactions(&self) -> Interactions {
        Interactions {
            g11: self.g_s + self.g_d,
            g22: self.g_s - self.g_d,
            g12: self.g_s_prime + self.g_d_prime,
            g21: self.g_s_prime - self.g_d_prime,
        }
    }
}

/// Time derivative of the Bloch vector under the schedule, the mean-field
/// shift `g_d + g_d' + (g_s − g_s') w` and dephasing of strength `λ'β`.
pub fn bloch_rhs(state: &BlochState, t: f64, schedule: &PulseSchedule, noise_strength: f64) -> Result<BlochState> {
    let h = assemble_h(schedule, t)?;
    let (_, beta) = schedule.channels(t)?;
    let split = InteractionSplit::from(&schedule.spec.interactions);
    Ok(bloch_rhs_with(state, h.x, h.y, h.z, beta, &split, noise_strength))
}

fn bloch_rhs_with(
    s: &BlochState,
    x: f64,
    y: f64,
    z: f64,
    beta: f64,
    g: &InteractionSplit,
    noise_strength: f64,
) -> BlochState {
    let damp = 0.5 * noise_strength * noise_strength * beta * beta;
    let zeff = z + g.g_d + g.g_s * s.w - g.g_s_prime * s.w + g.g_d_prime;
    BlochState {
        u: -damp * s.u + zeff * s.v - y * s.w,
        v: -zeff * s.u - damp * s.v + x * s.w,
        w: y * s.u - x * s.v,
    }
}

/// One sweep over a perturbation parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub parameter: String,
    pub values: Vec<f64>,
    /// `None` where propagation failed; see `failures`.
    pub fidelity: Vec<Option<f64>>,
    pub failures: Vec<String>,
    /// Largest step-to-step increase of `u² + v² + w²` per point (noise scans).
    pub max_purity_increase: Option<Vec<f64>>,
    pub spec: TransferSpec,
    pub seed: Option<u64>,
}

impl ScanResult {
    fn collect(
        parameter: &str,
        values: &[f64],
        spec: TransferSpec,
        outcomes: Vec<Result<(f64, f64)>>,
    ) -> (Self, Vec<f64>) {
        let mut fidelity = Vec::with_capacity(values.len());
        let mut failures = Vec::new();
        let mut extra = Vec::with_capacity(values.len());
        for (v, o) in values.iter().zip(outcomes) {
            match o {
                Ok((f, e)) => {
                    fidelity.push(Some(f));
                    extra.push(e);
                }
                Err(err) => {
                    fidelity.push(None);
                    extra.push(f64::NAN);
                    failures.push(format!("{parameter} = {v}: {err}"));
                }
            }
        }
        let result = Self {
            parameter: parameter.into(),
            values: values.to_vec(),
            fidelity,
            failures,
            max_purity_increase: None,
            spec,
            seed: None,
        };
        (result, extra)
    }

    pub fn success_fraction(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.fidelity.iter().filter(|f| f.is_some()).count() as f64 / self.values.len() as f64
    }

    /// Fidelity at the scanned value closest to `x`.
    pub fn fidelity_at(&self, x: f64) -> Option<f64> {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))?;
        self.fidelity[i]
    }

    /// Least-squares `F ≈ a + b λ + c λ²` over the successful points; returns `[a, b, c]`.
    pub fn quadratic_fit(&self) -> Option<[f64; 3]> {
        let pts: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(&self.fidelity)
            .filter_map(|(x, f)| f.map(|f| (*x, f)))
            .collect();
        quadratic_fit(&pts)
    }
}

pub fn quadratic_fit(points: &[(f64, f64)]) -> Option<[f64; 3]> {
    if points.len() < 3 {
        return None;
    }
    let mut m = [[0.0; 4]; 3];
    for &(x, y) in points {
        let basis = [1.0, x, x * x];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            m[r][3] += basis[r] * y;
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 normal equations.
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        m.swap(col, pivot);
        if m[col][col].abs() < 1e-300 {
            return None;
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                let pivot_row = m[col];
                for (x, p) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Which dynamics evaluates each scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanEngine {
    TwoLevel(OdeSettings),
    /// Full grid; `settings.couplings` supplies the raw mean-field couplings.
    Grid(SpatialGrid, GridSettings),
}

/// Final fidelity with channel b scaled by `1 + λ` for each λ. The mean field
/// comes from `schedule.spec.interactions` (two-level) or the grid settings.
pub fn scan_systematic(
    schedule: &PulseSchedule,
    me: &MatrixElements,
    lambdas: &[f64],
    engine: &ScanEngine,
) -> Result<ScanResult> {
    if lambdas.is_empty() {
        return Err(Error::Config("empty lambda grid".into()));
    }
    let g = schedule.spec.interactions;
    let outcomes: Vec<Result<(f64, f64)>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let perturbed = schedule.with_channel_b_scaled(1.0 + lambda);
            let f = match engine {
                ScanEngine::TwoLevel(settings) => propagate_nonlinear(&perturbed, me, &g, settings)?.final_fidelity(),
                ScanEngine::Grid(grid, settings) => {
                    let spec = &schedule.spec;
                    let psi0 = init_basis_state(grid, &spec.morse, spec.n, Spin::Up, spec.alpha)?;
                    evolve(&psi0, grid, &perturbed, settings)?.1.final_fidelity
                }
            };
            Ok((f, 0.0))
        })
        .collect();
    Ok(ScanResult::collect("lambda", lambdas, schedule.spec, outcomes).0)
}

/// Integrates the Bloch equations from `(0, 0, 1)`; returns the trajectory.
pub fn integrate_bloch(
    schedule: &PulseSchedule,
    noise_strength: f64,
    settings: &OdeSettings,
) -> Result<(Vec<f64>, Vec<BlochState>)> {
    let t_f = schedule.t_f();
    let steps = (t_f / settings.step).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=steps)
        .map(|i| if i == steps { t_f } else { t_f * i as f64 / steps as f64 })
        .collect();
    let split = InteractionSplit::from(&schedule.spec.interactions);
    let spacing = schedule.spec.level_spacing();
    let coupling = schedule.coupling;
    let mut failure = None;
    let traj = ode_propagate(
        |t, y: &[f64; 3]| {
            // Inline assembly: this is the hot loop of every noise scan.
            match schedule.channels(t) {
                Ok((theta1, beta)) => {
                    let off = coupling * (2.0 * theta1);
                    let s = BlochState::from_array(*y);
                    bloch_rhs_with(&s, off.re, off.im, beta - spacing, beta, &split, noise_strength).to_array()
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    [f64::NAN; 3]
                }
            }
        },
        BlochState::initial().to_array(),
        &times,
        settings,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let traj = traj?;
    Ok((
        traj.times,
        traj.states.into_iter().map(BlochState::from_array).collect(),
    ))
}

/// `F = (1 − w(t_f))/2` for each noise strength λ'.
pub fn scan_noise(schedule: &PulseSchedule, lambda_primes: &[f64], settings: &OdeSettings) -> Result<ScanResult> {
    if lambda_primes.is_empty() {
        return Err(Error::Config("empty lambda_prime grid".into()));
    }
    if !schedule.spec.scheme.is_so_direction() {
        return Err(Error::Config("noise scans need a direction-tuned schedule".into()));
    }
    let outcomes: Vec<Result<(f64, f64)>> = lambda_primes
        .par_iter()
        .map(|&lp| {
            let (_, states) = integrate_bloch(schedule, lp, settings)?;
            let rise = states
                .windows(2)
                .map(|w| w[1].purity() - w[0].purity())
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((states.last().expect("nonempty").fidelity(), rise))
        })
        .collect();
    let (mut result, rise) = ScanResult::collect("lambda_prime", lambda_primes, schedule.spec, outcomes);
    result.max_purity_increase = Some(rise);
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StochasticEstimate {
    pub fidelity: f64,
    pub stderr: f64,
    pub trajectories: usize,
    pub seed: u64,
}

/// Ensemble average of pure-state runs under `λ' ξ(t) (β/2) σz`.
///
/// Each step applies a deterministic half step, the exact kick
/// `exp(−iλ'(β/2)σz ΔW)` with `ΔW ~ N(0, dt)`, and another deterministic half
/// step. Trajectory `i` draws from `ChaCha8(seed + i)` and results are summed
/// in index order, so the estimate does not depend on thread scheduling.
pub fn stochastic_oracle(
    schedule: &PulseSchedule,
    lambda_prime: f64,
    trajectories: usize,
    seed: u64,
    dt: f64,
) -> Result<StochasticEstimate> {
    if trajectories < 2 {
        return Err(Error::Config("stochastic oracle needs at least 2 trajectories".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let t_f = schedule.t_f();
    let steps = (t_f / dt).round().max(1.0) as usize;
    let h = t_f / steps as f64;
    let g = schedule.spec.interactions;
    let spacing = schedule.spec.level_spacing();
    let coupling = schedule.coupling;
    // Channels at the three RK4 abscissae of every half step, shared by all runs.
    let mut samples = Vec::with_capacity(4 * steps + 1);
    for k in 0..=4 * steps {
        let t = if k == 4 * steps { t_f } else { k as f64 * h / 4.0 };
        samples.push(schedule.channels(t)?);
    }
    let matrix = |(theta1, beta): (f64, f64)| -> Matrix2 {
        let off = coupling * theta1;
        let z = 0.5 * (beta - spacing);
        [[Complex64::new(z, 0.0), off], [off.conj(), Complex64::new(-z, 0.0)]]
    };
    let nonlinear = !g.is_zero();
    let rhs_at = |psi: &[Complex64; 2], ch: (f64, f64)| {
        let mut m = matrix(ch);
        if nonlinear {
            let (d1, d2) = g.diagonal(psi[0].norm_sqr(), psi[1].norm_sqr());
            m[0][0] += d1;
            m[1][1] += d2;
        }
        let mi = -Complex64::i();
        [
            mi * (m[0][0] * psi[0] + m[0][1] * psi[1]),
            mi * (m[1][0] * psi[0] + m[1][1] * psi[1]),
        ]
    };
    let run = |index: usize| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
        let mut psi = TwoLevelState::initial().to_array();
        let sqrt_h = h.sqrt();
        for step in 0..steps {
            let base = 4 * step;
            for half in 0..2 {
                let k0 = base + 2 * half;
                let t0 = k0 as f64 * h / 4.0;
                let mut f = |t: f64, y: &[Complex64; 2]| {
                    let k = ((t - t0) / (h / 4.0)).round() as usize + k0;
                    rhs_at(y, samples[k])
                };
                psi = rk4_step(&mut f, t0, &psi, 0.5 * h);
                if half == 0 {
                    let dw: f64 = StandardNormal.sample(&mut rng);
                    let beta = samples[base + 2].1;
                    let phase = 0.5 * lambda_prime * beta * dw * sqrt_h;
                    psi[0] *= Complex64::from_polar(1.0, -phase);
                    psi[1] *= Complex64::from_polar(1.0, phase);
                }
            }
        }
        psi[1].norm_sqr() / (psi[0].norm_sqr() + psi[1].norm_sqr())
    };
    let values: Vec<f64> = (0..trajectories).into_par_iter().map(run).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / (n - 1.0);
    if !mean.is_finite() {
        return Err(Error::failure(
            t_f,
            "stochastic ensemble produced a non-finite fidelity",
        ));
    }
    Ok(StochasticEstimate {
        fidelity: mean,
        stderr: (var / n).sqrt(),
        trajectories,
        seed,
    })
}

/// Pure-state fidelity of the unperturbed schedule, for anchoring scans.
pub fn unitary_fidelity(schedule: &PulseSchedule, settings: &OdeSettings) -> Result<f64> {
    let g = schedule.spec.interactions;
    let traj = propagate_with(
        |t, psi| {
            let mut m = assemble_h(schedule, t)?.matrix();
            let (d1, d2) = g.diagonal(psi[0].norm_sqr(), psi[1].norm_sqr());
            m[0][0] += d1;
            m[1][1] += d2;
            Ok(m)
        },
        TwoLevelState::initial(),
        schedule.t_f(),
        settings,
    )?;
    Ok(traj.last()[1].norm_sqr())
}
