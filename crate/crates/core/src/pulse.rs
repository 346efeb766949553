//! Inverse engineering of the control channels.
//!
//! The state is steered along an eigenvector of the invariant
//! `I = ½ (sinθ_a cosφ_a σx − sinθ_a sinφ_a σy + cosθ_a σz)`. The polar angle
//! follows a cubic smooth-step; the azimuth comes from the constraint
//! `θ̇_a cot(φ − φ_a) = c sinθ_a`, which removes the `0/0` in the detuning
//! at both ends and fixes the boundary gap to `3|c|/2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::morse::{MatrixElements, MorseSpec};
use crate::two_level::{assemble_h, TwoLevelHamiltonian};
use crate::{Error, Result};

/// Coupling magnitudes below this make a design infeasible.
const MIN_COUPLING: f64 = 1e-12;
/// Above this the small-angle form of the direction-tuned scheme is suspect.
const THETA1_WARN: f64 = 0.3;
pub const DEFAULT_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Raman coupling Ω(t) and detuning Δ(t).
    Raman,
    /// Spin-orbit field direction θ₁(t) and Zeeman amplitude β(t).
    SoDirection,
    /// As `SoDirection`, with β(t) compensating the mean-field shifts.
    SoDirectionInteracting,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Raman => "raman",
            Scheme::SoDirection => "so_direction",
            Scheme::SoDirectionInteracting => "so_direction_interacting",
        }
    }

    pub fn channel_labels(self) -> (&'static str, &'static str) {
        match self {
            Scheme::Raman => ("omega", "delta"),
            _ => ("theta1", "beta"),
        }
    }

    pub fn is_so_direction(self) -> bool {
        !matches!(self, Scheme::Raman)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raman" => Ok(Scheme::Raman),
            "so_direction" => Ok(Scheme::SoDirection),
            "so_direction_interacting" => Ok(Scheme::SoDirectionInteracting),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Effective two-level interaction constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Interactions {
    pub g11: f64,
    pub g22: f64,
    pub g12: f64,
    pub g21: f64,
}

impl Interactions {
    pub fn new(g11: f64, g22: f64, g12: f64, g21: f64) -> Self {
        Self { g11, g22, g12, g21 }
    }

    pub fn is_zero(&self) -> bool {
        self.g11 == 0.0 && self.g22 == 0.0 && self.g12 == 0.0 && self.g21 == 0.0
    }

    /// Mean-field diagonal `(g11 p1 + g12 p2, g21 p1 + g22 p2)` for
    /// populations `p1`, `p2`.
    pub fn diagonal(&self, p1: f64, p2: f64) -> (f64, f64) {
        (self.g11 * p1 + self.g12 * p2, self.g21 * p1 + self.g22 * p2)
    }
}

/// Per-spin contact couplings of the grid Gross-Pitaevskii equations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RawCouplings {
    pub up_up: f64,
    pub up_down: f64,
    pub down_up: f64,
    pub down_down: f64,
}

impl RawCouplings {
    pub fn uniform(g: f64) -> Self {
        Self {
            up_up: g,
            up_down: g,
            down_up: g,
            down_down: g,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }

    /// Equal couplings scaled so that the effective `g11 = g↑↑ Q(n,n)` takes
    /// the requested value.
    pub fn uniform_with_g11(morse: &MorseSpec, n: usize, g11: f64) -> Result<Self> {
        Ok(Self::uniform(g11 / morse.overlap_q(n, n)?))
    }
}

/// Projects grid couplings onto the two orbitals: `g11 = g↑↑ Q(n,n)`,
/// `g22 = g↓↓ Q(l,l)`, `g12 = g↑↓ Q(n,l)`, `g21 = g↓↑ Q(n,l)`.
pub fn effective_g(raw: &RawCouplings, morse: &MorseSpec, n: usize, l: usize) -> Result<Interactions> {
    if raw.is_zero() {
        return Ok(Interactions::default());
    }
    let q_nn = morse.overlap_q(n, n)?;
    let q_ll = morse.overlap_q(l, l)?;
    let q_nl = morse.overlap_q(n, l)?;
    Ok(Interactions {
        g11: raw.up_up * q_nn,
        g22: raw.down_down * q_ll,
        g12: raw.up_down * q_nl,
        g21: raw.down_up * q_nl,
    })
}

/// The full transfer problem `|n,↑⟩ → |n+1,↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferSpec {
    pub morse: MorseSpec,
    pub n: usize,
    pub l: usize,
    pub alpha: f64,
    pub t_f: f64,
    pub c: f64,
    pub scheme: Scheme,
    pub interactions: Interactions,
}

impl TransferSpec {
    pub fn new(morse: MorseSpec, n: usize, alpha: f64, t_f: f64, c: f64, scheme: Scheme) -> Result<Self> {
        let spec = Self {
            morse,
            n,
            l: n + 1,
            alpha,
            t_f,
            c,
            scheme,
            interactions: Interactions::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `A = 8`, `0 → 1`, `α = 1.6`, `t_f = 10`, `c = 0.1`.
    pub fn canonical(scheme: Scheme) -> Self {
        let morse = MorseSpec::new(8.0).expect("depth 8 is valid");
        Self::new(morse, 0, 1.6, 10.0, 0.1, scheme).expect("canonical spec is valid")
    }

    pub fn with_interactions(mut self, g: Interactions) -> Self {
        self.interactions = g;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l != self.n + 1 {
            return Err(Error::Domain(format!(
                "target level must be n + 1 (n = {}, l = {})",
                self.n, self.l
            )));
        }
        if self.l >= self.morse.bound_count() {
            return Err(Error::Domain(format!(
                "target level {} is not bound in a well with {} bound states",
                self.l,
                self.morse.bound_count()
            )));
        }
        if !(self.t_f > 0.0) || !self.t_f.is_finite() {
            return Err(Error::Domain(format!(
                "operation time must be positive, got {}",
                self.t_f
            )));
        }
        if self.c == 0.0 || !self.c.is_finite() {
            return Err(Error::Domain(format!(
                "gap parameter c must be finite and nonzero, got {}",
                self.c
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Domain("spin-orbit strength must be finite".into()));
        }
        Ok(())
    }

    /// Boundary gap `ΔE = 3|c|/2` between `|n,↑⟩` and `|l,↓⟩`.
    pub fn gap(&self) -> f64 {
        1.5 * self.c.abs()
    }

    /// `E_l − E_n`
    pub fn level_spacing(&self) -> f64 {
        let e = |k| self.morse.energy(k).expect("levels validated on construction");
        e(self.l) - e(self.n)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let product = self.t_f * self.gap();
        if product < 10.0 {
            out.push(format!(
                "t_f * gap = {product:.3} < 10; the two-level reduction is not well separated"
            ));
        }
        out
    }

    pub fn matrix_elements(&self) -> Result<MatrixElements> {
        self.morse.matrix_elements(self.n, self.l, self.alpha)
    }
}

/// Cubic `θ_a(t) = a₂t² + a₃t³` with `θ_a(0) = 0`, `θ_a(t_f) = π` and zero
/// slope at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaAnsatz {
    t_f: f64,
}

pub fn theta_ansatz(spec: &TransferSpec) -> ThetaAnsatz {
    ThetaAnsatz { t_f: spec.t_f }
}

impl ThetaAnsatz {
    pub fn new(t_f: f64) -> Self {
        Self { t_f }
    }

    /// `[a₀, a₁, a₂, a₃]`
    pub fn coefficients(&self) -> [f64; 4] {
        let t = self.t_f;
        [0.0, 0.0, 3.0 * PI / (t * t), -2.0 * PI / (t * t * t)]
    }

    fn s(&self, t: f64) -> f64 {
        (t / self.t_f).clamp(0.0, 1.0)
    }

    pub fn theta(&self, t: f64) -> f64 {
        let s = self.s(t);
        PI * s * s * (3.0 - 2.0 * s)
    }

    pub fn dtheta(&self, t: f64) -> f64 {
        let s = self.s(t);
        6.0 * PI * s * (1.0 - s) / self.t_f
    }

    pub fn ddtheta(&self, t: f64) -> f64 {
        let s = self.s(t);
        6.0 * PI * (1.0 - 2.0 * s) / (self.t_f * self.t_f)
    }

    /// `(sin θ_a, cos θ_a)`, using `π − θ_a = π(1−s)²(1+2s)` on the second
    /// half so both stay accurate near the endpoints.
    pub fn sin_cos(&self, t: f64) -> (f64, f64) {
        let s = self.s(t);
        if s <= 0.5 {
            let th = PI * s * s * (3.0 - 2.0 * s);
            (th.sin(), th.cos())
        } else {
            let u = 1.0 - s;
            let rest = PI * u * u * (1.0 + 2.0 * s);
            (rest.sin(), -rest.cos())
        }
    }
}

/// Angles of the tracked invariant eigenstate at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSample {
    pub theta: f64,
    pub dtheta: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
    pub phi_a: f64,
    pub dphi_a: f64,
    /// `φ − φ_a`
    pub offset: f64,
}

/// `θ_a` together with the constraint-derived `φ_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantAngles {
    pub theta: ThetaAnsatz,
    pub c: f64,
    /// Phase of the coupling (`arg G` or `arg M`).
    pub phi: f64,
}

pub fn phi_from_constraint(spec: &TransferSpec, theta: ThetaAnsatz, phi: f64) -> InvariantAngles {
    InvariantAngles { theta, c: spec.c, phi }
}

impl InvariantAngles {
    pub fn at(&self, t: f64) -> AngleSample {
        let th = &self.theta;
        let c = self.c;
        let s = (t / th.t_f).clamp(0.0, 1.0);
        let theta = th.theta(t);
        let dtheta = th.dtheta(t);
        let (sin_theta, cos_theta) = th.sin_cos(t);
        // tan(φ − φ_a) = θ̇ / (c sinθ) → ±∞ at both ends.
        let offset = if sin_theta == 0.0 || dtheta == 0.0 {
            0.5 * PI * c.signum()
        } else {
            (dtheta / (c * sin_theta)).atan()
        };
        let denom = c * c * sin_theta * sin_theta + dtheta * dtheta;
        let dphi_a = if denom == 0.0 {
            if s < 0.5 {
                0.5 * c
            } else {
                -0.5 * c
            }
        } else {
            -c * (th.ddtheta(t) * sin_theta - dtheta * dtheta * cos_theta) / denom
        };
        AngleSample {
            theta,
            dtheta,
            sin_theta,
            cos_theta,
            phi_a: self.phi - offset,
            dphi_a,
            offset,
        }
    }

    /// `|θ̇_a / sin(φ − φ_a)| = sqrt(θ̇_a² + c² sin²θ_a)`, the required
    /// off-diagonal magnitude, is finite everywhere. Its sign follows `c`.
    fn drive(&self, a: &AngleSample) -> f64 {
        -self.c.signum() * (a.dtheta * a.dtheta + self.c * self.c * a.sin_theta * a.sin_theta).sqrt()
    }

    /// Detuning that keeps the state on the invariant eigenvector;
    /// `θ̇ cosθ cot(φ−φ_a)/sinθ` reduces to `c cosθ` under the constraint.
    fn gap_channel(&self, spacing: f64, a: &AngleSample) -> f64 {
        spacing - a.dphi_a - self.c * a.cos_theta
    }
}

/// Sampled control channels on a uniform time grid over `[0, t_f]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSchedule {
    pub times: Vec<f64>,
    /// Ω (Raman) or θ₁ (direction-tuned schemes).
    pub channel_a: Vec<f64>,
    /// Δ (Raman) or β (direction-tuned schemes).
    pub channel_b: Vec<f64>,
    pub spec: TransferSpec,
    /// `G` (Raman) or `M = α²G + αK` (direction-tuned).
    pub coupling: Complex64,
    pub warnings: Vec<String>,
}

impl PulseSchedule {
    pub fn labels(&self) -> (&'static str, &'static str) {
        self.spec.scheme.channel_labels()
    }

    pub fn t_f(&self) -> f64 {
        self.spec.t_f
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn angles(&self) -> InvariantAngles {
        phi_from_constraint(&self.spec, theta_ansatz(&self.spec), self.coupling.arg())
    }

    pub fn max_abs_channel_a(&self) -> f64 {
        self.channel_a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Both channels at `t`, by four-point cubic interpolation of the samples.
    pub fn channels(&self, t: f64) -> Result<(f64, f64)> {
        let n = self.times.len();
        let (start, end) = (self.times[0], self.times[n - 1]);
        let slack = 1e-12 * (end - start);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let t = t.clamp(start, end);
        let h = (end - start) / (n - 1) as f64;
        let pos = (t - start) / h;
        let i0 = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let mut a = 0.0;
        let mut b = 0.0;
        for j in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != j {
                    w *= (pos - (i0 + m) as f64) / (j as f64 - m as f64);
                }
            }
            a += w * self.channel_a[i0 + j];
            b += w * self.channel_b[i0 + j];
        }
        Ok((a, b))
    }

    /// Copy with channel b multiplied by `factor` (systematic field error).
    pub fn with_channel_b_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.channel_b {
            *v *= factor;
        }
        out
    }

    /// Copy with a constant added to channel b.
    pub fn with_channel_b_shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.channel_b {
            *v += shift;
        }
        out
    }
}

fn sample_times(t_f: f64, sample_count: usize) -> Result<Vec<f64>> {
    if sample_count < 4 {
        return Err(Error::Domain(format!("need at least 4 samples, got {sample_count}")));
    }
    let last = (sample_count - 1) as f64;
    Ok((0..sample_count)
        .map(|i| {
            if i + 1 == sample_count {
                t_f
            } else {
                t_f * i as f64 / last
            }
        })
        .collect())
}

/// Raman coupling `Ω(t)` and detuning `Δ(t)`.
pub fn design_scheme1(spec: &TransferSpec, me: &MatrixElements, sample_count: usize) -> Result<PulseSchedule> {
    spec.validate()?;
    let g = me.g;
    if g.norm() < MIN_COUPLING {
        return Err(Error::Infeasible(format!(
            "|G| = {:e} is too small to drive the transfer (alpha = {})",
            g.norm(),
            me.alpha
        )));
    }
    let spec = spec.with_scheme(Scheme::Raman);
    let angles = phi_from_constraint(&spec, theta_ansatz(&spec), g.arg());
    let spacing = spec.level_spacing();
    let times = sample_times(spec.t_f, sample_count)?;
    let (omega, delta) = times
        .iter()
        .map(|&t| {
            let a = angles.at(t);
            (angles.drive(&a) / g.norm(), angles.gap_channel(spacing, &a))
        })
        .unzip();
    Ok(PulseSchedule {
        times,
        channel_a: omega,
        channel_b: delta,
        spec,
        coupling: g,
        warnings: spec.warnings(),
    })
}

fn design_so(spec: &TransferSpec, me: &MatrixElements, sample_count: usize, scheme: Scheme) -> Result<PulseSchedule> {
    spec.validate()?;
    let m = me.coupling;
    if m.norm() < MIN_COUPLING {
        return Err(Error::Infeasible(format!(
            "|alpha^2 G + alpha K| = {:e} is too small to drive the transfer",
            m.norm()
        )));
    }
    let mut spec = spec.with_scheme(scheme);
    if scheme == Scheme::SoDirection {
        spec.interactions = Interactions::default();
    }
    let g = spec.interactions;
    let angles = phi_from_constraint(&spec, theta_ansatz(&spec), m.arg());
    let spacing = spec.level_spacing();
    let times = sample_times(spec.t_f, sample_count)?;
    let (theta1, beta) = times
        .iter()
        .map(|&t| {
            let a = angles.at(t);
            let mut beta = angles.gap_channel(spacing, &a);
            if scheme == Scheme::SoDirectionInteracting {
                let up = 0.5 * (1.0 + a.cos_theta);
                let down = 0.5 * (1.0 - a.cos_theta);
                beta += -g.g11 * up - g.g12 * down + g.g22 * down + g.g21 * up;
            }
            (angles.drive(&a) / (2.0 * m.norm()), beta)
        })
        .unzip();
    let mut schedule = PulseSchedule {
        times,
        channel_a: theta1,
        channel_b: beta,
        spec,
        coupling: m,
        warnings: spec.warnings(),
    };
    let peak = schedule.max_abs_channel_a();
    if peak > THETA1_WARN {
        schedule.warnings.push(format!(
            "max |theta1| = {peak:.4} rad exceeds {THETA1_WARN}; small-angle design is approximate"
        ));
    }
    Ok(schedule)
}

/// Spin-orbit direction `θ₁(t)` and Zeeman amplitude `β(t)` for a
/// noninteracting gas (`θ₂ = φ₁ = φ₂ = 0`).
pub fn design_scheme2(spec: &TransferSpec, me: &MatrixElements, sample_count: usize) -> Result<PulseSchedule> {
    design_so(spec, me, sample_count, Scheme::SoDirection)
}

/// As [`design_scheme2`] with β(t) offset by the mean-field shifts of the
/// state ansatz, using `spec.interactions`.
pub fn design_scheme2_interacting(
    spec: &TransferSpec,
    me: &MatrixElements,
    sample_count: usize,
) -> Result<PulseSchedule> {
    design_so(spec, me, sample_count, Scheme::SoDirectionInteracting)
}

/// Designs for whatever scheme `spec` names.
pub fn design(spec: &TransferSpec, me: &MatrixElements, sample_count: usize) -> Result<PulseSchedule> {
    match spec.scheme {
        Scheme::Raman => design_scheme1(spec, me, sample_count),
        Scheme::SoDirection => design_scheme2(spec, me, sample_count),
        Scheme::SoDirectionInteracting => design_scheme2_interacting(spec, me, sample_count),
    }
}

/// The invariant `I(t)` for λ₀ = 1 and its time derivative.
pub fn invariant_matrices(a: &AngleSample) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let e = Complex64::from_polar(1.0, a.phi_a);
    let half = 0.5;
    let inv = [
        [Complex64::new(half * a.cos_theta, 0.0), e * (half * a.sin_theta)],
        [
            e.conj() * (half * a.sin_theta),
            Complex64::new(-half * a.cos_theta, 0.0),
        ],
    ];
    let i = Complex64::i();
    let off = (Complex64::new(a.cos_theta * a.dtheta, 0.0) + i * (a.sin_theta * a.dphi_a)) * e * half;
    let off_lower = (Complex64::new(a.cos_theta * a.dtheta, 0.0) - i * (a.sin_theta * a.dphi_a)) * e.conj() * half;
    let dinv = [
        [Complex64::new(-half * a.sin_theta * a.dtheta, 0.0), off],
        [off_lower, Complex64::new(half * a.sin_theta * a.dtheta, 0.0)],
    ];
    (inv, dinv)
}

/// Frobenius norm of `i ∂I/∂t − [H, I]` at time `t`.
///
/// For the interacting design the mean-field diagonal is evaluated on the
/// tracked eigenstate, which is what the compensation targets.
pub fn invariant_residual(schedule: &PulseSchedule, t: f64) -> Result<f64> {
    let a = schedule.angles().at(t);
    let mut h = assemble_h(schedule, t)?.matrix();
    if schedule.spec.scheme == Scheme::SoDirectionInteracting {
        let p1 = 0.5 * (1.0 + a.cos_theta);
        let (d1, d2) = schedule.spec.interactions.diagonal(p1, 1.0 - p1);
        h[0][0] += d1;
        h[1][1] += d2;
    }
    let (inv, dinv) = invariant_matrices(&a);
    let i = Complex64::i();
    let mut total = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let mut comm = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                comm += h[r][k] * inv[k][c] - inv[r][k] * h[k][c];
            }
            total += (i * dinv[r][c] - comm).norm_sqr();
        }
    }
    Ok(total.sqrt())
}

/// Frobenius norm of the schedule's two-level Hamiltonian at `t`.
pub fn hamiltonian_norm(schedule: &PulseSchedule, t: f64) -> Result<f64> {
    Ok(TwoLevelHamiltonian::frobenius(&assemble_h(schedule, t)?))
}
