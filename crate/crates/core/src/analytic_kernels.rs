//! Closed-form special integrals and Fourier identities, plus the
//! periodic-trapezoid quadrature oracle used to verify them.
//!
//! The central object is the definite integral
//!
//! ```text
//! J(m,x,y) = int_{-pi}^{pi} (1 - x cos t) cos(m t)
//!            / (y^2 + (1-y^2) cos^2 t - 2 x cos t + x^2) dt,
//!            0 < y <= 1 < x,  m = 0,1,2,...
//! ```
//!
//! which evaluates to `pi [(1-y)^m - (1+y)^m] / (y (x + sqrt(x^2+y^2-1))^m)`.
//! Its `y = 1` specialization gives the Poisson-kernel integrals used by the
//! circular problems, and the logarithmic Fourier series underlies every
//! spectral potential representation in this crate.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Arguments of the `J` integral: `0 < y <= 1 < x`, `m >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct KernelArgs {
    pub m: u32,
    pub x: f64,
    pub y: f64,
}

impl KernelArgs {
    pub fn new(m: u32, x: f64, y: f64) -> Result<Self> {
        if !(x > 1.0) || !(y > 0.0 && y <= 1.0) {
            return Err(Error::Domain(format!(
                "J(m,x,y) requires 0 < y <= 1 < x, got x={x}, y={y}"
            )));
        }
        Ok(Self { m, x, y })
    }
}

/// Closed form of the `J` integral.
pub fn eval_j_closed(args: &KernelArgs) -> f64 {
    let KernelArgs { m, x, y } = *args;
    let m = m as i32;
    let tau = (x * x + y * y - 1.0).sqrt();
    PI * ((1.0 - y).powi(m) - (1.0 + y).powi(m)) / (y * (x + tau).powi(m))
}

fn j_integrand(m: u32, x: f64, y: f64, theta: f64) -> f64 {
    let c = theta.cos();
    (1.0 - x * c) * (f64::from(m) * theta).cos()
        / (y * y + (1.0 - y * y) * c * c - 2.0 * x * c + x * x)
}

/// Trapezoid rule for the `J` integral on a uniform periodic grid over
/// `(-pi, pi]`. Spectrally accurate: the integrand is smooth and 2pi-periodic.
pub fn eval_j_quadrature(args: &KernelArgs, nodes: usize) -> Result<f64> {
    if nodes < 64 {
        return Err(Error::Domain(format!("need at least 64 nodes, got {nodes}")));
    }
    let h = 2.0 * PI / nodes as f64;
    let mut sum = 0.0;
    for k in 0..nodes {
        let theta = -PI + h * (k as f64 + 1.0);
        sum += j_integrand(args.m, args.x, args.y, theta);
    }
    Ok(sum * h)
}

/// `J` by node doubling until two successive results agree to `tol`
/// (cap 2^20 nodes).
pub fn eval_j_adaptive(args: &KernelArgs, tol: f64) -> Result<f64> {
    let mut nodes = 64;
    let mut prev = eval_j_quadrature(args, nodes)?;
    while nodes < (1 << 20) {
        nodes *= 2;
        let next = eval_j_quadrature(args, nodes)?;
        if (next - prev).abs() <= tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergent(prev))
}

/// Poisson-kernel integral: `J(m,x,1)` for `x > 1` and its `0 <= x < 1`
/// companion obtained from `J(m,x,1) + J(m,1/x,1) = 2pi` (m=0) or `0` (m>=1).
///
/// `x = 1` is a non-integrable boundary case and is rejected.
pub fn poisson_kernel_integral(m: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || x == 1.0 {
        return Err(Error::Domain(format!(
            "Poisson-kernel integral requires x >= 0, x != 1, got {x}"
        )));
    }
    Ok(if m == 0 {
        if x > 1.0 {
            0.0
        } else {
            2.0 * PI
        }
    } else if x > 1.0 {
        -PI * x.powi(-(m as i32))
    } else {
        PI * x.powi(m as i32)
    })
}

/// Partial sum of the logarithmic Fourier series
///
/// ```text
/// ln(sqrt(r1^2 + r2^2 - 2 r1 r2 cos t)/r3)
///   = ln(r2/r3) - sum_{n>=1} (1/n) (r1/r2)^n cos(n t),   0 <= r1 < r2.
/// ```
///
/// Conjugate terms are combined, so the result is real. Converges
/// geometrically at rate `r1/r2`.
pub fn log_kernel_series(rho1: f64, rho2: f64, rho3: f64, theta: f64, terms: usize) -> Result<f64> {
    if !(rho1 >= 0.0 && rho1 < rho2) || !(rho3 > 0.0) {
        return Err(Error::Domain(format!(
            "log series requires 0 <= rho1 < rho2 and rho3 > 0, got {rho1}, {rho2}, {rho3}"
        )));
    }
    if terms < 1 {
        return Err(Error::Domain("terms must be >= 1".into()));
    }
    let ratio = rho1 / rho2;
    let mut sum = (rho2 / rho3).ln();
    let mut pow = 1.0;
    for n in 1..=terms {
        pow *= ratio;
        sum -= pow / n as f64 * (n as f64 * theta).cos();
    }
    Ok(sum)
}
