//! Propagation in the reduced basis `{|n,↑⟩, |l,↓⟩}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::morse::{MatrixElements, MorseSpec};
use crate::numerics::{ode_propagate, OdeSettings, OdeTrajectory};
use crate::pulse::{Interactions, PulseSchedule, Scheme};
use crate::{Error, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelState {
    /// Amplitude on `|n,↑⟩`.
    pub c1: Complex64,
    /// Amplitude on `|l,↓⟩`.
    pub c2: Complex64,
}

impl TwoLevelState {
    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    pub fn initial() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn target() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn from_array(a: [Complex64; 2]) -> Self {
        Self::new(a[0], a[1])
    }

    pub fn to_array(self) -> [Complex64; 2] {
        [self.c1, self.c2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of the normalized state.
    pub fn bloch(&self) -> [f64; 3] {
        let n = self.norm_sqr();
        let r = self.c1.conj() * self.c2;
        [
            2.0 * r.re / n,
            2.0 * r.im / n,
            (self.c1.norm_sqr() - self.c2.norm_sqr()) / n,
        ]
    }
}

/// `H = ½ [[Z, X + iY], [X − iY, −Z]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelHamiltonian {
    pub z: f64,
    pub x: f64,
    pub y: f64,
}

impl TwoLevelHamiltonian {
    pub fn matrix(&self) -> Matrix2 {
        let off = Complex64::new(0.5 * self.x, 0.5 * self.y);
        [
            [Complex64::new(0.5 * self.z, 0.0), off],
            [off.conj(), Complex64::new(-0.5 * self.z, 0.0)],
        ]
    }

    pub fn frobenius(&self) -> f64 {
        (0.5 * (self.z * self.z + self.x * self.x + self.y * self.y)).sqrt()
    }
}

/// Reduced Hamiltonian of the schedule at `t`.
///
/// Raman: `Z = E_n − E_l + Δ`, `X + iY = Ω G`. Direction-tuned:
/// `Z = E_n − E_l + β`, `X + iY = 2θ₁ M` (its linearized form).
pub fn assemble_h(schedule: &PulseSchedule, t: f64) -> Result<TwoLevelHamiltonian> {
    let (a, b) = schedule.channels(t)?;
    let z = b - schedule.spec.level_spacing();
    let amp = match schedule.spec.scheme {
        Scheme::Raman => a,
        _ => 2.0 * a,
    };
    let off = schedule.coupling * amp;
    Ok(TwoLevelHamiltonian {
        z,
        x: off.re,
        y: off.im,
    })
}

fn apply(h: &Matrix2, psi: &[Complex64; 2]) -> [Complex64; 2] {
    let mi = -Complex64::i();
    [
        mi * (h[0][0] * psi[0] + h[0][1] * psi[1]),
        mi * (h[1][0] * psi[0] + h[1][1] * psi[1]),
    ]
}

fn output_times(t_f: f64, settings: &OdeSettings) -> Vec<f64> {
    let steps = (t_f / settings.step).round().max(1.0) as usize;
    (0..=steps)
        .map(|i| if i == steps { t_f } else { t_f * i as f64 / steps as f64 })
        .collect()
}

/// Integrates `i ψ̇ = H(t, ψ) ψ` from `psi0` over `[0, t_f]`, reporting on a
/// uniform grid with spacing close to `settings.step`.
pub fn propagate_with<F>(
    mut hamiltonian: F,
    psi0: TwoLevelState,
    t_f: f64,
    settings: &OdeSettings,
) -> Result<OdeTrajectory<[Complex64; 2]>>
where
    F: FnMut(f64, &[Complex64; 2]) -> Result<Matrix2>,
{
    let times = output_times(t_f, settings);
    let mut failure = None;
    let traj = ode_propagate(
        |t, psi: &[Complex64; 2]| match hamiltonian(t, psi) {
            Ok(h) => apply(&h, psi),
            Err(e) => {
                failure.get_or_insert(e);
                [Complex64::new(f64::NAN, 0.0); 2]
            }
        },
        psi0.to_array(),
        &times,
        settings,
    );
    match failure {
        Some(e) => Err(e),
        None => traj,
    }
}

/// Reduced-basis observables at every output time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<TwoLevelState>,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    pub pz: Vec<f64>,
    pub x_expect: Vec<f64>,
    pub x_expect_over_lc: Vec<f64>,
    pub fidelity: Vec<f64>,
}

impl Trajectory {
    pub fn from_states(times: Vec<f64>, states: Vec<TwoLevelState>, me: &MatrixElements, morse: &MorseSpec) -> Self {
        let (px, py, pz) = spin_polarization(&states, me);
        let x_expect = expectation_x(&states, me);
        let lc = morse.characteristic_length();
        let x_expect_over_lc = x_expect.iter().map(|x| x / lc).collect();
        let fidelity = states.iter().map(|s| fidelity(s, 2)).collect();
        Self {
            times,
            states,
            px,
            py,
            pz,
            x_expect,
            x_expect_over_lc,
            fidelity,
        }
    }

    fn from_ode(traj: OdeTrajectory<[Complex64; 2]>, me: &MatrixElements, morse: &MorseSpec) -> Self {
        let states = traj.states.into_iter().map(TwoLevelState::from_array).collect();
        Self::from_states(traj.times, states, me, morse)
    }

    pub fn final_state(&self) -> TwoLevelState {
        *self.states.last().expect("trajectory is never empty")
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().expect("trajectory is never empty")
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().fold(0.0, |m, s| m.max((s.norm_sqr() - 1.0).abs()))
    }

    pub fn csv_header() -> &'static str {
        "t,re_c1,im_c1,re_c2,im_c2,Px,Py,Pz,x_expect,x_expect_over_lc,fidelity"
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| {
                let s = self.states[i];
                vec![
                    self.times[i],
                    s.c1.re,
                    s.c1.im,
                    s.c2.re,
                    s.c2.im,
                    self.px[i],
                    self.py[i],
                    self.pz[i],
                    self.x_expect[i],
                    self.x_expect_over_lc[i],
                    self.fidelity[i],
                ]
            })
            .collect()
    }
}

fn check_matrix_elements(schedule: &PulseSchedule, me: &MatrixElements) -> Result<()> {
    let spec = &schedule.spec;
    if me.n != spec.n || me.l != spec.l || me.alpha != spec.alpha {
        return Err(Error::Config(format!(
            "matrix elements for (n={}, l={}, alpha={}) do not match schedule (n={}, l={}, alpha={})",
            me.n, me.l, me.alpha, spec.n, spec.l, spec.alpha
        )));
    }
    Ok(())
}

/// Linear Schrödinger propagation from `|n,↑⟩` under the schedule.
pub fn propagate(schedule: &PulseSchedule, me: &MatrixElements, settings: &OdeSettings) -> Result<Trajectory> {
    check_matrix_elements(schedule, me)?;
    let traj = propagate_with(
        |t, _| assemble_h(schedule, t).map(|h| h.matrix()),
        TwoLevelState::initial(),
        schedule.t_f(),
        settings,
    )?;
    Ok(Trajectory::from_ode(traj, me, &schedule.spec.morse))
}

/// Propagation with the mean-field diagonal
/// `diag(g11|ψ₁|² + g12|ψ₂|², g21|ψ₁|² + g22|ψ₂|²)` added to the schedule's
/// Hamiltonian. `g` is passed separately so an uncompensated schedule can be
/// run against an interacting gas.
pub fn propagate_nonlinear(
    schedule: &PulseSchedule,
    me: &MatrixElements,
    g: &Interactions,
    settings: &OdeSettings,
) -> Result<Trajectory> {
    check_matrix_elements(schedule, me)?;
    let traj = propagate_with(
        |t, psi| {
            let mut h = assemble_h(schedule, t)?.matrix();
            let (d1, d2) = g.diagonal(psi[0].norm_sqr(), psi[1].norm_sqr());
            h[0][0] += d1;
            h[1][1] += d2;
            Ok(h)
        },
        TwoLevelState::initial(),
        schedule.t_f(),
        settings,
    )?;
    Ok(Trajectory::from_ode(traj, me, &schedule.spec.morse))
}

/// `(P_x, P_y, P_z)` with `P_x = 2 Re(c₁c₂* S)`, `P_y = −2 Im(c₁c₂* S)` and
/// `S = ⟨l|e^{−2iαx}|n⟩`.
pub fn spin_polarization(states: &[TwoLevelState], me: &MatrixElements) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let s = me.spin_overlap();
    let mut px = Vec::with_capacity(states.len());
    let mut py = Vec::with_capacity(states.len());
    let mut pz = Vec::with_capacity(states.len());
    for st in states {
        let w = st.c1 * st.c2.conj() * s;
        px.push(2.0 * w.re);
        py.push(-2.0 * w.im);
        pz.push(st.c1.norm_sqr() - st.c2.norm_sqr());
    }
    (px, py, pz)
}

/// `⟨x⟩ = |c₁|²⟨n|x|n⟩ + |c₂|²⟨l|x|l⟩`. Position is spin-diagonal, so the
/// two spin components never interfere.
pub fn expectation_x(states: &[TwoLevelState], me: &MatrixElements) -> Vec<f64> {
    states
        .iter()
        .map(|s| s.c1.norm_sqr() * me.x_diag_n + s.c2.norm_sqr() * me.x_diag_l)
        .collect()
}

/// `|⟨target|ψ⟩|²` with target 1 = `|n,↑⟩` and 2 = `|l,↓⟩`.
pub fn fidelity(state: &TwoLevelState, target: usize) -> f64 {
    match target {
        1 => state.c1.norm_sqr(),
        2 => state.c2.norm_sqr(),
        other => panic!("basis index must be 1 or 2, got {other}"),
    }
}
