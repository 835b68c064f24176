//! Mesh-free auxiliary-source (MFS/MAS) solvers for 2D Laplace-Neumann
//! magnetostatics.
//!
//! The library covers three boundary-value problems for the scalar vector
//! potential `A_z` of an infinite line current:
//!
//! - [`circular_exterior`]: a line current outside an infinitely permeable
//!   circular cylinder, solved with either bounded (`ln R/rho`) or
//!   traditional (`ln R/d_ref`) fundamental solutions. The collocation
//!   system is symmetric circulant, so exact DFT solutions, closed-form
//!   current spectra, large-N asymptotics, and condition-number laws are
//!   all available in closed form.
//! - [`circular_interior`]: the cavity analogue, whose MAS potential
//!   acquires an observation-point-independent divergent constant in the
//!   oscillating regime.
//! - [`elliptic_exterior`]: an elliptic cylinder with a confocal auxiliary
//!   ellipse; the system is dense but an exact separation-of-variables
//!   reference solution exists.
//!
//! [`analytic_kernels`] holds the special integrals and Fourier identities
//! these solutions are built from, together with a periodic-trapezoid
//! quadrature oracle that verifies them. [`spectral_linalg`] holds the DFT
//! conventions, circulant and dense solvers, and condition-number
//! machinery. [`experiment`] is the scenario/figure harness behind the
//! `mas-lab` binary.
//!
//! All quantities are normalized: currents as `I_l/I`, potentials as
//! `A_z/(mu0 I)`, lengths in units of the reference distance `d_ref`.

pub mod analytic_kernels;
pub mod circular_exterior;
pub mod circular_interior;
pub mod elliptic_exterior;
pub mod experiment;
pub mod spectral_linalg;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the operation's admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Linear system is singular to working precision.
    #[error("singular system: {0}")]
    Singular(String),
    /// Observation point coincides with a source singularity.
    #[error("singular point: {0}")]
    SingularPoint(String),
    /// Node doubling stopped changing the result too late (or not at all).
    #[error("quadrature did not converge: last change {0:.3e}")]
    QuadratureNonConvergent(f64),
    /// Inverse transform of a spectrum that is not conjugate-symmetric.
    #[error("non-negligible imaginary residue in inverse DFT: {0:.3e}")]
    ImaginaryResidue(f64),
    #[error("not implemented: {0}")]
    NotImplemented(&'static str),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A possibly huge positive-or-negative quantity carried as `sign * 10^log10`.
///
/// Quantities like `t^N` and the condition-number laws overflow f64 for
/// large `N`; they are computed in log space and serialized as a
/// `(log10, sign)` pair next to the plain value (infinite when out of range).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledValue {
    pub log10: f64,
    pub sign: i8,
    /// `sign * 10^log10` when representable, `+/-inf` otherwise, 0 for sign 0.
    pub value: f64,
}

impl ScaledValue {
    pub fn from_log10(log10: f64, sign: i8) -> Self {
        let value = if sign == 0 {
            0.0
        } else {
            let mag = if log10 > 308.0 {
                f64::INFINITY
            } else {
                10f64.powf(log10)
            };
            f64::from(sign).signum() * mag
        };
        Self { log10, sign, value }
    }

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self { log10: f64::NEG_INFINITY, sign: 0, value: 0.0 }
        } else {
            Self { log10: v.abs().log10(), sign: if v > 0.0 { 1 } else { -1 }, value: v }
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}
