//! Bound states of the Morse well `U(x) = A (e^{-2x} - 2 e^{-x})` and the
//! matrix elements the transfer schemes are built from.
//!
//! Units: length `1/a`, energy `a²ħ²/M`, so the Schrödinger equation has
//! `M = ħ = 1` and the range parameter is one.

use num_complex::Complex64;
use serde::Serialize;

use crate::numerics::{integrate, integrate_real, laguerre, log_gamma, QuadratureSpec};
use crate::{Error, Result};

/// Absolute tolerance for the overlap integrals `G`, `K`, `Q` and moments.
const MATRIX_TOLERANCE: f64 = 1e-11;
/// Wavefunction magnitude treated as zero when sizing the quadrature window.
const TAIL_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorseSpec {
    depth: f64,
    eta: f64,
    bound_count: usize,
}

impl MorseSpec {
    pub fn new(depth: f64) -> Result<Self> {
        if !(depth > 0.0) || !depth.is_finite() {
            return Err(Error::Domain(format!("Morse depth must be positive, got {depth}")));
        }
        let eta = (2.0 * depth).sqrt();
        if eta <= 0.5 {
            return Err(Error::Domain(format!(
                "Morse depth {depth} supports no bound state (needs sqrt(2A) > 1/2)"
            )));
        }
        // n is bound iff n < eta - 1/2.
        let bound_count = (eta - 0.5).ceil() as usize;
        Ok(Self {
            depth,
            eta,
            bound_count,
        })
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn bound_count(&self) -> usize {
        self.bound_count
    }

    pub fn potential(&self, x: f64) -> f64 {
        let e = (-x).exp();
        self.depth * (e * e - 2.0 * e)
    }

    /// Oscillator length of the harmonic approximation at the minimum.
    pub fn characteristic_length(&self) -> f64 {
        self.eta.powf(-0.5)
    }

    pub fn energy(&self, n: usize) -> Result<f64> {
        self.state(n).map(|s| s.energy)
    }

    pub fn state(&self, n: usize) -> Result<BoundState> {
        BoundState::new(self, n)
    }

    /// Interval carrying all of the listed states' probability to well below
    /// double precision.
    pub fn quadrature_window(&self, states: &[usize]) -> Result<(f64, f64)> {
        let states: Vec<BoundState> = states.iter().map(|&n| self.state(n)).collect::<Result<_>>()?;
        let negligible = |x: f64| states.iter().all(|s| s.value(x).abs() < TAIL_CUTOFF);
        let mut lower = -5.0;
        while !negligible(lower) {
            lower -= 1.0;
        }
        let mut upper = 30.0;
        while !negligible(upper) {
            upper += 5.0;
        }
        Ok((lower, upper))
    }

    fn quadrature(&self, states: &[usize]) -> Result<QuadratureSpec> {
        let (lower, upper) = self.quadrature_window(states)?;
        QuadratureSpec::new(lower, upper, MATRIX_TOLERANCE)
    }

    /// `Q(n, l) = ∫ |⟨x|n⟩|² |⟨x|l⟩|² dx`
    pub fn overlap_q(&self, n: usize, l: usize) -> Result<f64> {
        let (a, b) = (self.state(n)?, self.state(l)?);
        integrate_real(
            |x| {
                let (u, v) = (a.value(x), b.value(x));
                u * u * v * v
            },
            &self.quadrature(&[n, l])?,
        )
    }

    /// `⟨n|x|n⟩`
    pub fn position_moment(&self, n: usize) -> Result<f64> {
        let s = self.state(n)?;
        integrate_real(
            |x| {
                let u = s.value(x);
                x * u * u
            },
            &self.quadrature(&[n])?,
        )
    }

    /// `∫ ⟨x|m⟩⟨x|n⟩ dx`
    pub fn overlap(&self, m: usize, n: usize) -> Result<f64> {
        let (a, b) = (self.state(m)?, self.state(n)?);
        integrate_real(|x| a.value(x) * b.value(x), &self.quadrature(&[m, n])?)
    }

    /// `G`, `K` and the derived couplings between `|n⟩` and `|l⟩`.
    pub fn matrix_elements(&self, n: usize, l: usize, alpha: f64) -> Result<MatrixElements> {
        let (a, b) = (self.state(n)?, self.state(l)?);
        let quad = self.quadrature(&[n, l])?;
        let g = integrate(
            |x| Complex64::from_polar(a.value(x) * b.value(x), 2.0 * alpha * x),
            &quad,
        )?
        .value;
        // p = -i d/dx acting on ⟨x|l⟩
        let k = integrate(
            |x| Complex64::from_polar(a.value(x) * b.derivative(x), 2.0 * alpha * x) * Complex64::new(0.0, -1.0),
            &quad,
        )?
        .value;
        Ok(MatrixElements {
            n,
            l,
            alpha,
            g,
            k,
            coupling: alpha * alpha * g + alpha * k,
            x_diag_n: self.position_moment(n)?,
            x_diag_l: self.position_moment(l)?,
        })
    }
}

/// Analytic data of one bound state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundState {
    pub n: usize,
    /// `η - n - 1/2`, the decay rate of the right tail.
    pub xi: f64,
    pub energy: f64,
    ln_two_eta: f64,
    /// ln of the normalisation `sqrt(n! 2ξ / Γ(2η - n))`.
    ln_norm: f64,
}

impl BoundState {
    fn new(spec: &MorseSpec, n: usize) -> Result<Self> {
        if n >= spec.bound_count {
            return Err(Error::Domain(format!(
                "state {n} is not bound (depth {} has {} bound states)",
                spec.depth, spec.bound_count
            )));
        }
        let xi = spec.eta - n as f64 - 0.5;
        let ln_norm = 0.5 * (log_gamma(n as f64 + 1.0)? + (2.0 * xi).ln() - log_gamma(2.0 * spec.eta - n as f64)?);
        Ok(Self {
            n,
            xi,
            energy: -0.5 * xi * xi,
            ln_two_eta: (2.0 * spec.eta).ln(),
            ln_norm,
        })
    }

    /// `z^ξ e^{-z/2}` times the normalisation, and `z` itself.
    fn envelope(&self, x: f64) -> (f64, f64) {
        let ln_z = self.ln_two_eta - x;
        let z = ln_z.exp();
        ((self.ln_norm + self.xi * ln_z - 0.5 * z).exp(), z)
    }

    /// `⟨x|n⟩`; positive on the right tail.
    pub fn value(&self, x: f64) -> f64 {
        let (env, z) = self.envelope(x);
        if env == 0.0 {
            return 0.0;
        }
        env * laguerre(self.n, 2.0 * self.xi, z)
    }

    /// `d⟨x|n⟩/dx` through the chain rule in `z = 2η e^{-x}`, using
    /// `dL_n^a/dz = -L_{n-1}^{a+1}`.
    pub fn derivative(&self, x: f64) -> f64 {
        let (env, z) = self.envelope(x);
        if env == 0.0 {
            return 0.0;
        }
        let a = 2.0 * self.xi;
        let lag = laguerre(self.n, a, z);
        let lag_shift = if self.n == 0 {
            0.0
        } else {
            laguerre(self.n - 1, a + 1.0, z)
        };
        env * (-(self.xi - 0.5 * z) * lag + z * lag_shift)
    }
}

/// Overlaps between `|n⟩` and `|l⟩` entering the reduced Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixElements {
    pub n: usize,
    pub l: usize,
    pub alpha: f64,
    /// `⟨n| e^{2iαx} |l⟩`
    pub g: Complex64,
    /// `⟨n| e^{2iαx} p |l⟩`
    pub k: Complex64,
    /// `α² G + α K`, the spin-orbit coupling of the direction-tuned scheme.
    pub coupling: Complex64,
    pub x_diag_n: f64,
    pub x_diag_l: f64,
}

impl MatrixElements {
    pub fn raman_phase(&self) -> f64 {
        self.g.arg()
    }

    pub fn so_phase(&self) -> f64 {
        self.coupling.arg()
    }

    /// `S = ⟨l| e^{-2iαx} |n⟩`, the spatial overlap of the two spinor
    /// components. Real orbitals make it the conjugate of `G`.
    pub fn spin_overlap(&self) -> Complex64 {
        self.g.conj()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well() -> MorseSpec {
        MorseSpec::new(8.0).unwrap()
    }

    #[test]
    fn spec_for_depth_eight() {
        let m = well();
        assert_eq!(m.eta(), 4.0);
        assert_eq!(m.bound_count(), 4);
        assert_eq!(m.energy(0).unwrap(), -6.125);
        assert_eq!(m.energy(1).unwrap(), -3.125);
        assert!(m.state(4).is_err());
        let energies: Vec<f64> = (0..4).map(|n| m.energy(n).unwrap()).collect();
        assert!(energies.windows(2).all(|w| w[0] < w[1]));
        assert!(energies.iter().all(|&e| e < 0.0));
    }

    #[test]
    fn rejects_shallow_or_invalid_wells() {
        assert!(MorseSpec::new(0.1).is_err());
        assert!(MorseSpec::new(-1.0).is_err());
        assert!(MorseSpec::new(f64::NAN).is_err());
        assert_eq!(MorseSpec::new(0.2).unwrap().bound_count(), 1);
    }

    #[test]
    fn potential_values() {
        let m = well();
        assert_eq!(m.potential(0.0), -8.0);
        assert!((m.potential(2f64.ln()) + 6.0).abs() < 1e-14);
        assert!(m.potential(60.0).abs() < 1e-20);
    }

    #[test]
    fn characteristic_lengths() {
        assert_eq!(well().characteristic_length(), 0.5);
        let l2 = MorseSpec::new(2.0).unwrap().characteristic_length();
        assert!((l2 - 0.5f64.sqrt()).abs() < 1e-15);
        let ls: Vec<f64> = [1.0, 2.0, 8.0, 50.0]
            .iter()
            .map(|&a| MorseSpec::new(a).unwrap().characteristic_length())
            .collect();
        assert!(ls.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn normalised_and_orthogonal() {
        let m = well();
        assert!((m.overlap(0, 0).unwrap() - 1.0).abs() < 1e-8);
        assert!(m.overlap(0, 1).unwrap().abs() < 1e-8);
    }

    #[test]
    fn right_tail_is_positive() {
        let m = well();
        for n in 0..m.bound_count() {
            assert!(m.state(n).unwrap().value(15.0) > 0.0, "n = {n}");
        }
    }

    #[test]
    fn window_for_ground_pair() {
        assert_eq!(well().quadrature_window(&[0, 1]).unwrap(), (-5.0, 30.0));
        // ξ = 1/2 for n = 3 needs a much longer right tail.
        assert!(well().quadrature_window(&[3]).unwrap().1 > 60.0);
    }

    #[test]
    fn matrix_elements_at_zero_alpha() {
        let m = well();
        let off = m.matrix_elements(0, 1, 0.0).unwrap();
        assert!(off.g.norm() < 1e-9);
        let diag = m.matrix_elements(0, 0, 0.0).unwrap();
        assert!((diag.g - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        // ⟨0|p|0⟩ vanishes for a real bound state.
        assert!(diag.k.norm() < 1e-9);
    }

    #[test]
    fn q_is_symmetric() {
        let m = well();
        let (a, b) = (m.overlap_q(0, 1).unwrap(), m.overlap_q(1, 0).unwrap());
        assert!((a - b).abs() < 1e-12);
        assert!(a > 0.0);
    }

    #[test]
    fn analytic_derivative_matches_difference_quotient() {
        let m = well();
        let h = 1e-4;
        for n in 0..4 {
            let s = m.state(n).unwrap();
            for &x in &[-1.0, -0.3, 0.0, 0.7, 2.0, 5.0] {
                let fd = (s.value(x - 2.0 * h) - 8.0 * s.value(x - h) + 8.0 * s.value(x + h) - s.value(x + 2.0 * h))
                    / (12.0 * h);
                assert!((s.derivative(x) - fd).abs() < 1e-8, "n = {n}, x = {x}");
            }
        }
    }
}
