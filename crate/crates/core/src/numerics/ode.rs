use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeMethod {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4,
    /// Dormand-Prince 5(4) with local error control.
    DormandPrince,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OdeSettings {
    /// Fixed step for RK4, initial step for the adaptive method.
    pub step: f64,
    pub method: OdeMethod,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            step: 1e-3,
            method: OdeMethod::Rk4,
            abs_tol: 1e-12,
            rel_tol: 1e-12,
        }
    }
}

impl OdeSettings {
    pub fn fixed(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    pub fn adaptive(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            step: 1e-3,
            method: OdeMethod::DormandPrince,
            abs_tol,
            rel_tol,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Domain(format!(
                "ODE step and tolerances must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// State vectors the integrators can work with.
pub trait OdeState: Clone {
    /// `self += h * other`
    fn add_scaled(&mut self, h: f64, other: &Self);
    /// max_i |err_i| / (abs_tol + rel_tol |y_i|)
    fn scaled_error(&self, err: &Self, abs_tol: f64, rel_tol: f64) -> f64;
    fn all_finite(&self) -> bool;
}

pub trait Component: Copy {
    fn axpy(self, h: f64, other: Self) -> Self;
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
}

impl Component for f64 {
    fn axpy(self, h: f64, other: Self) -> Self {
        self + h * other
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Component for Complex64 {
    fn axpy(self, h: f64, other: Self) -> Self {
        self + other * h
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

fn scaled_error_of<T: Component>(y: &[T], err: &[T], abs_tol: f64, rel_tol: f64) -> f64 {
    y.iter()
        .zip(err)
        .map(|(y, e)| e.modulus() / (abs_tol + rel_tol * y.modulus()))
        .fold(0.0, f64::max)
}

impl<T: Component, const N: usize> OdeState for [T; N] {
    fn add_scaled(&mut self, h: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a = a.axpy(h, *b);
        }
    }
    fn scaled_error(&self, err: &Self, abs_tol: f64, rel_tol: f64) -> f64 {
        scaled_error_of(self, err, abs_tol, rel_tol)
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|c| c.finite())
    }
}

impl<T: Component> OdeState for Vec<T> {
    fn add_scaled(&mut self, h: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a = a.axpy(h, *b);
        }
    }
    fn scaled_error(&self, err: &Self, abs_tol: f64, rel_tol: f64) -> f64 {
        scaled_error_of(self, err, abs_tol, rel_tol)
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|c| c.finite())
    }
}

#[derive(Debug, Clone)]
pub struct OdeTrajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> OdeTrajectory<S> {
    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Integrates `dy/dt = rhs(t, y)` from `times[0]` and records the state at
/// every entry of `times` (strictly increasing).
///
/// In fixed-step mode each output interval is cut into `ceil(dt / step)`
/// equal steps, so outputs land exactly on the requested times.
pub fn ode_propagate<S, F>(mut rhs: F, y0: S, times: &[f64], settings: &OdeSettings) -> Result<OdeTrajectory<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    settings.validate()?;
    if times.len() < 2 {
        return Err(Error::Domain("need at least a start and an end time".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("output times must be strictly increasing".into()));
    }
    if !y0.all_finite() {
        return Err(Error::failure(times[0], "initial state is not finite"));
    }
    let mut states = Vec::with_capacity(times.len());
    states.push(y0.clone());
    let mut y = y0;
    let mut h_adaptive = settings.step;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        match settings.method {
            OdeMethod::Rk4 => {
                let n = ((t1 - t0) / settings.step - 1e-9).ceil().max(1.0) as usize;
                let h = (t1 - t0) / n as f64;
                for i in 0..n {
                    let t = t0 + h * i as f64;
                    y = rk4_step(&mut rhs, t, &y, h);
                    if !y.all_finite() {
                        return Err(Error::failure(t + h, "state became non-finite"));
                    }
                }
            }
            OdeMethod::DormandPrince => {
                y = dopri_interval(&mut rhs, t0, t1, y, &mut h_adaptive, settings)?;
            }
        }
        states.push(y.clone());
    }
    Ok(OdeTrajectory {
        times: times.to_vec(),
        states,
    })
}

/// One classical RK4 step.
pub(crate) fn rk4_step<S, F>(rhs: &mut F, t: f64, y: &S, h: f64) -> S
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let k1 = rhs(t, y);
    let mut tmp = y.clone();
    tmp.add_scaled(0.5 * h, &k1);
    let k2 = rhs(t + 0.5 * h, &tmp);
    let mut tmp = y.clone();
    tmp.add_scaled(0.5 * h, &k2);
    let k3 = rhs(t + 0.5 * h, &tmp);
    let mut tmp = y.clone();
    tmp.add_scaled(h, &k3);
    let k4 = rhs(t + h, &tmp);
    let mut out = y.clone();
    out.add_scaled(h / 6.0, &k1);
    out.add_scaled(h / 3.0, &k2);
    out.add_scaled(h / 3.0, &k3);
    out.add_scaled(h / 6.0, &k4);
    out
}

// Dormand-Prince tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order solution minus embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri_interval<S, F>(rhs: &mut F, t0: f64, t1: f64, mut y: S, h: &mut f64, settings: &OdeSettings) -> Result<S>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let mut t = t0;
    let mut rejections = 0usize;
    while t < t1 {
        let last = t + *h >= t1;
        let step = if last { t1 - t } else { *h };
        let mut k: Vec<S> = Vec::with_capacity(7);
        k.push(rhs(t, &y));
        for s in 1..7 {
            let mut tmp = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    tmp.add_scaled(step * A[s][j], kj);
                }
            }
            k.push(rhs(t + C[s] * step, &tmp));
        }
        let mut y_new = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            if A[6][j] != 0.0 {
                y_new.add_scaled(step * A[6][j], kj);
            }
        }
        // k[6] is rhs(t + step, y_new) by construction of the tableau.
        let mut err = k[0].clone();
        err.add_scaled(-1.0, &k[0]);
        for (j, kj) in k.iter().enumerate() {
            if E[j] != 0.0 {
                err.add_scaled(step * E[j], kj);
            }
        }
        if !y_new.all_finite() {
            return Err(Error::failure(t + step, "state became non-finite"));
        }
        let ratio = y_new.scaled_error(&err, settings.abs_tol, settings.rel_tol);
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        if ratio <= 1.0 {
            t = if last { t1 } else { t + step };
            y = y_new;
            rejections = 0;
            if !last || factor < 1.0 {
                *h = step * factor;
            }
        } else {
            *h = step * factor;
            rejections += 1;
            if *h < 1e-14 * t1.abs().max(1.0) || rejections > 100 {
                return Err(Error::failure(t, "adaptive step size underflow"));
            }
        }
    }
    Ok(y)
}
