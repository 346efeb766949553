//! Special functions, quadrature and ODE integration shared by the rest of
//! the crate.
//!
//! Everything here is a pure function of its inputs.

mod ode;
mod quadrature;
mod special;

pub(crate) use ode::rk4_step;
pub use ode::{ode_propagate, OdeMethod, OdeSettings, OdeState, OdeTrajectory};
pub use quadrature::{integrate, integrate_real, Integral, QuadratureSpec};
pub use special::{laguerre, log_gamma};
