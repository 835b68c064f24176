//! Exterior circular problem: a line current `I` at `(rho_fil, 0)` outside an
//! infinitely permeable cylinder of radius `rho_cyl`, with `N` auxiliary
//! currents on an interior circle `rho_aux < rho_cyl < rho_fil`.
//!
//! The collocation system is symmetric circulant and has closed-form DFT
//! solutions. The image singularity sits at the critical radius
//! `rho_cri = rho_cyl^2 / rho_fil`; the ratio `t = rho_cri / rho_aux`
//! decides whether the auxiliary currents converge to a surface density
//! (`t < 1`), collapse onto the image (`t = 1`), or diverge with
//! exponentially large alternating oscillations (`t > 1`) while the
//! potential still converges.
//!
//! All currents are returned as `I_l / I` and all potentials as
//! `A_z / (mu0 I)`; lengths are in units of `d_ref`.

use crate::spectral_linalg::{
    circulant_matrix, condition_number_circulant, dft, idft, solve_dense, solve_least_squares,
    Matrix,
};
use crate::{Error, Result, ScaledValue};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Choice of fundamental solution for the auxiliary sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `ln(R/rho)`: vanishes at infinity for every finite N.
    Bounded,
    /// `ln(R/d_ref)`: the traditional logarithmic fundamental solution.
    Traditional,
}

/// How a [`MasSolution`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    DftExact,
    DenseSolve,
    LeastSquares,
    Asymptotic,
}

/// Solver route request for [`ExteriorCircularProblem::currents`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverRoute {
    DftExact,
    Dense,
    /// Overdetermined collocation at `M >= N` points, least-squares solve.
    LeastSquares(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Physical,
    Critical,
    Unphysical,
}

impl Regime {
    /// `|t - 1| <= 1e-12` classifies as critical.
    pub fn classify(t: f64) -> Self {
        if (t - 1.0).abs() <= 1e-12 {
            Regime::Critical
        } else if t < 1.0 {
            Regime::Physical
        } else {
            Regime::Unphysical
        }
    }
}

/// Normalized auxiliary currents together with their DFT spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct MasSolution {
    /// `I_l / I`, length N.
    pub currents: Vec<f64>,
    /// `I^(m) / I`, real because the currents are even in `l`.
    pub spectrum: Vec<f64>,
    pub provenance: Provenance,
    /// Set when the system condition number exceeded 1e15.
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub regime: Regime,
    pub t: f64,
    pub current_mean: f64,
    pub current_max_abs: f64,
    /// Fraction of interior indices whose deviation from the analytic mean
    /// term alternates in sign with the next index.
    pub alternation_score: f64,
    pub kappa_computed: ScaledValue,
    pub kappa_asymptotic: ScaledValue,
    /// `-sum_l I_l / I`: the derived compensating current at the origin
    /// (bounded scheme only; it is never solved for).
    pub compensating_current: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationProbe {
    pub rho_factor: f64,
    pub max_abs_change: f64,
    /// Max change divided by the potential scale on the same circle.
    pub max_rel_change: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub noise_rel: f64,
    pub seed: u64,
    pub max_rel_current_change: f64,
    /// Probed at `rho = {1.25, 2, 4} rho_cyl`.
    pub potential_changes: Vec<PerturbationProbe>,
}

/// Result of a truncated spectral potential series.
#[derive(Debug, Clone, Copy)]
pub struct PotentialSeries {
    pub value: f64,
    pub terms_used: usize,
    /// Set when `rho / rho_aux < 1.01` (geometric decay is slow there).
    pub slow_convergence: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExteriorCircularProblem {
    pub rho_cyl: f64,
    pub rho_fil: f64,
    pub rho_aux: f64,
    pub n: usize,
    pub scheme: Scheme,
    #[serde(default = "default_d_ref")]
    pub d_ref: f64,
}

fn default_d_ref() -> f64 {
    1.0
}

impl ExteriorCircularProblem {
    pub fn new(rho_cyl: f64, rho_fil: f64, rho_aux: f64, n: usize, scheme: Scheme) -> Result<Self> {
        let p = Self { rho_cyl, rho_fil, rho_aux, n, scheme, d_ref: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_aux > 0.0 && self.rho_aux < self.rho_cyl && self.rho_cyl < self.rho_fil) {
            return Err(Error::Domain(format!(
                "exterior problem requires 0 < rho_aux < rho_cyl < rho_fil, got rho_aux={}, rho_cyl={}, rho_fil={}",
                self.rho_aux, self.rho_cyl, self.rho_fil
            )));
        }
        if self.n < 3 {
            return Err(Error::Domain(format!("N must be >= 3, got {}", self.n)));
        }
        if !(self.d_ref > 0.0) {
            return Err(Error::Domain(format!("d_ref must be positive, got {}", self.d_ref)));
        }
        Ok(())
    }

    /// Image-singularity radius `rho_cyl^2 / rho_fil`.
    pub fn rho_cri(&self) -> f64 {
        self.rho_cyl * self.rho_cyl / self.rho_fil
    }

    /// `t = rho_cri / rho_aux`.
    pub fn t(&self) -> f64 {
        self.rho_cri() / self.rho_aux
    }

    pub fn regime(&self) -> Regime {
        Regime::classify(self.t())
    }

    fn b_entry(&self, theta: f64) -> f64 {
        let (rc, ra) = (self.rho_cyl, self.rho_aux);
        let core = (rc * rc - rc * ra * theta.cos())
            / (rc * rc + ra * ra - 2.0 * rc * ra * theta.cos());
        match self.scheme {
            Scheme::Bounded => core - 1.0,
            Scheme::Traditional => core,
        }
    }

    fn d_entry(&self, theta: f64) -> f64 {
        let (rc, rf) = (self.rho_cyl, self.rho_fil);
        -(rc * rc - rc * rf * theta.cos()) / (rc * rc + rf * rf - 2.0 * rc * rf * theta.cos())
    }

    /// First row `B_p` and normalized right-hand side `D_p / I` of the
    /// square circulant collocation system. Both are independent of `d_ref`.
    pub fn assemble(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let first_row: Vec<f64> = (0..n).map(|p| self.b_entry(TAU * p as f64 / n as f64)).collect();
        let rhs: Vec<f64> = (0..n).map(|p| self.d_entry(TAU * p as f64 / n as f64)).collect();
        (first_row, rhs)
    }

    /// Overdetermined collocation at `m_points >= N` boundary points.
    pub fn assemble_overdetermined(&self, m_points: usize) -> Result<(Matrix, Vec<f64>)> {
        if m_points < self.n {
            return Err(Error::Domain(format!(
                "collocation count {} must be >= N = {}",
                m_points, self.n
            )));
        }
        let n = self.n;
        let mut a = Matrix::zeros(m_points, n);
        let mut rhs = vec![0.0; m_points];
        for p in 0..m_points {
            let phi = TAU * p as f64 / m_points as f64;
            for l in 0..n {
                a[(p, l)] = self.b_entry(phi - TAU * l as f64 / n as f64);
            }
            rhs[p] = self.d_entry(phi);
        }
        Ok((a, rhs))
    }

    /// Closed-form solution spectrum `I^(m) / I`.
    ///
    /// Exponentials are evaluated through logs when they would leave the
    /// f64 range; out-of-range entries come back infinite.
    pub fn spectrum_exact(&self) -> Vec<f64> {
        let n = self.n;
        let s = self.rho_aux / self.rho_cyl;
        let r = self.rho_cyl / self.rho_fil;
        let sn = pow_guarded(s, n as f64);
        let rn = pow_guarded(r, n as f64);
        let nf = n as f64;
        let mut spec = vec![0.0; n];
        spec[0] = match self.scheme {
            // r^N / s^N = t^N may overflow; go through logs.
            Scheme::Bounded => {
                exp_guarded(nf * (r.ln() - s.ln())) * (1.0 - sn) / ((1.0 - rn) * nf)
            }
            Scheme::Traditional => rn * (1.0 - sn) / ((1.0 - rn) * nf),
        };
        for (m, slot) in spec.iter_mut().enumerate().skip(1) {
            let mf = m as f64;
            let num = pow_guarded(r, nf - mf) + pow_guarded(r, mf);
            let den = pow_guarded(s, nf - mf) + pow_guarded(s, mf);
            *slot = num * (1.0 - sn) / (den * (1.0 - rn) * nf);
        }
        spec
    }

    /// Solve for the normalized currents by the requested route.
    pub fn currents(&self, route: SolverRoute) -> Result<MasSolution> {
        match route {
            SolverRoute::DftExact => {
                let spec = self.spectrum_exact();
                let complex: Vec<Complex64> =
                    spec.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                let currents = idft(&complex)?;
                Ok(MasSolution {
                    currents,
                    spectrum: spec,
                    provenance: Provenance::DftExact,
                    ill_conditioned: false,
                })
            }
            SolverRoute::Dense => {
                let (first_row, rhs) = self.assemble();
                let kappa = condition_number_circulant(&first_row)?;
                let sol = solve_dense(&circulant_matrix(&first_row), &rhs)?;
                Ok(self.package(sol.solution, Provenance::DenseSolve, kappa))
            }
            SolverRoute::LeastSquares(m_points) => {
                let (a, rhs) = self.assemble_overdetermined(m_points)?;
                let (first_row, _) = self.assemble();
                let kappa = condition_number_circulant(&first_row)?;
                let sol = solve_least_squares(&a, &rhs)?;
                Ok(self.package(sol.solution, Provenance::LeastSquares, kappa))
            }
        }
    }

    fn package(&self, currents: Vec<f64>, provenance: Provenance, kappa: f64) -> MasSolution {
        let spectrum = dft(&currents).into_iter().map(|z| z.re).collect();
        MasSolution { currents, spectrum, provenance, ill_conditioned: kappa > 1e15 }
    }

    /// Regime-appropriate large-N closed forms for the currents (odd N only;
    /// the even-N analogue is not spelled out and is not implemented).
    pub fn currents_asymptotic(&self) -> Result<Vec<f64>> {
        if self.n % 2 == 0 {
            return Err(Error::NotImplemented(
                "asymptotic current formulas are implemented for odd N only",
            ));
        }
        let n = self.n;
        let nf = n as f64;
        let t = self.t();
        let mean = match self.scheme {
            Scheme::Bounded => exp_guarded(nf * t.ln()) / nf,
            Scheme::Traditional => pow_guarded(self.rho_cyl / self.rho_fil, nf) / nf,
        };
        Ok(match self.regime() {
            Regime::Critical => {
                let mut v = vec![0.0; n];
                match self.scheme {
                    // the l = 0 source coincides with the image
                    Scheme::Bounded => v[0] = 1.0,
                    Scheme::Traditional => {
                        v.iter_mut().for_each(|x| *x = -1.0 / nf);
                        v[0] = 1.0;
                    }
                }
                v
            }
            Regime::Physical => (0..n)
                .map(|l| {
                    let c = (TAU * l as f64 / nf).cos();
                    2.0 / nf * (-t * t + t * c) / (t * t - 2.0 * t * c + 1.0)
                })
                .collect(),
            Regime::Unphysical => {
                let t_half = exp_guarded((nf + 1.0) / 2.0 * t.ln());
                (0..n)
                    .map(|l| {
                        let c = (TAU * l as f64 / nf).cos();
                        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                        mean + 2.0 / nf * sign * t_half * (t - 1.0) * (PI * l as f64 / nf).cos()
                            / (t * t - 2.0 * t * c + 1.0)
                    })
                    .collect()
            }
        })
    }

    /// `A_inc / (mu0 I) = -(1/2pi) ln(R_fil / d_ref)`.
    pub fn potential_incident(&self, rho: f64, phi: f64) -> Result<f64> {
        incident_potential(self.rho_fil, self.d_ref, rho, phi)
    }

    /// Exact scattered potential (method of images), valid for `rho >= rho_cyl`.
    pub fn potential_exact(&self, rho: f64, phi: f64) -> f64 {
        let rcri = self.rho_cri();
        let dist = (rho * rho + rcri * rcri - 2.0 * rho * rcri * phi.cos()).sqrt();
        -(dist / rho).ln() / (2.0 * PI)
    }

    /// Direct MAS sum over the N fundamental solutions.
    pub fn potential_mas_direct(&self, sol: &MasSolution, rho: f64, phi: f64) -> Result<f64> {
        let n = sol.currents.len();
        let ra = self.rho_aux;
        let mut acc = 0.0;
        for (l, &cur) in sol.currents.iter().enumerate() {
            let r2 = rho * rho + ra * ra - 2.0 * rho * ra * (phi - TAU * l as f64 / n as f64).cos();
            if r2 <= 0.0 || r2 < 1e-28 * ra * ra {
                return Err(Error::SingularPoint(format!(
                    "observation point coincides with auxiliary source {l}"
                )));
            }
            let denom = match self.scheme {
                Scheme::Bounded => rho,
                Scheme::Traditional => self.d_ref,
            };
            acc += cur * (r2.sqrt() / denom).ln();
        }
        Ok(-acc / (2.0 * PI))
    }

    /// Spectral form of the MAS potential: the logarithmic Fourier series of
    /// each source, resummed over the N-periodic even extension of `I^(m)`.
    /// Valid for `rho > rho_aux`; truncated when the geometric tail bound
    /// drops below `tol`.
    pub fn potential_mas_spectral(
        &self,
        sol: &MasSolution,
        rho: f64,
        phi: f64,
        tol: f64,
    ) -> Result<PotentialSeries> {
        if rho <= self.rho_aux {
            return Err(Error::Domain(format!(
                "spectral potential requires rho > rho_aux, got rho={rho}"
            )));
        }
        let n = sol.spectrum.len();
        let nf = n as f64;
        let ratio = self.rho_aux / rho;
        let spec_max = sol.spectrum.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        let mut acc = 0.0;
        let mut pow = 1.0;
        let mut m = 0usize;
        loop {
            m += 1;
            pow *= ratio;
            // tail bound: N max|I^(m)| ratio^{m+1} / (1 - ratio)
            if nf * spec_max * pow * ratio / (1.0 - ratio) < tol || m > 4_000_000 {
                break;
            }
            let periodic = sol.spectrum[m % n];
            acc += nf * periodic / m as f64 * pow * (m as f64 * phi).cos();
        }
        let mut value = acc / (2.0 * PI);
        if self.scheme == Scheme::Traditional {
            // ln(R/d_ref) = ln(rho/d_ref) + ln(R/rho); the extra term carries
            // the (exponentially small) total current N I'^(0).
            value -= nf * sol.spectrum[0] * (rho / self.d_ref).ln() / (2.0 * PI);
        }
        Ok(PotentialSeries { value, terms_used: m, slow_convergence: rho / self.rho_aux < 1.01 })
    }

    /// Quadrature residual of the Neumann self-consistency condition
    /// (node count doubles until two results agree to 1e-13).
    pub fn self_consistency_residual(&self) -> f64 {
        let mut nodes = 64;
        let mut prev = self.self_consistency_residual_with_nodes(nodes);
        while nodes < (1 << 16) {
            nodes *= 2;
            let next = self.self_consistency_residual_with_nodes(nodes);
            if (next - prev).abs() <= 1e-13 {
                return next;
            }
            prev = next;
        }
        prev
    }

    /// Trapezoid quadrature of `-dA_inc/drho * rho_cyl` over the boundary
    /// circle, normalized by `mu0 I`.
    pub fn self_consistency_residual_with_nodes(&self, nodes: usize) -> f64 {
        let (rc, rf) = (self.rho_cyl, self.rho_fil);
        let h = TAU / nodes as f64;
        let mut sum = 0.0;
        for k in 0..nodes {
            let phi = h * k as f64;
            // dA_inc/drho / (mu0 I) = -(1/2pi)(rho - rho_fil cos phi)/R_fil^2
            let deriv = -(rc - rf * phi.cos())
                / (rc * rc + rf * rf - 2.0 * rc * rf * phi.cos())
                / (2.0 * PI);
            sum += -deriv * rc;
        }
        sum * h
    }

    /// Large-N condition-number law: `(1/2)(rho_cyl/rho_aux)^{N-1}` for the
    /// bounded scheme, `(rho_cyl/rho_aux)^{N/2}` for the traditional one.
    pub fn condition_number_asymptotic(&self) -> ScaledValue {
        let base = (self.rho_cyl / self.rho_aux).log10();
        let log10 = match self.scheme {
            Scheme::Bounded => (self.n as f64 - 1.0) * base - 2f64.log10(),
            Scheme::Traditional => self.n as f64 / 2.0 * base,
        };
        ScaledValue::from_log10(log10, 1)
    }

    /// The analytic mean term the oscillations ride on.
    pub fn mean_term(&self) -> f64 {
        match self.regime() {
            Regime::Unphysical => match self.scheme {
                Scheme::Bounded => exp_guarded(self.n as f64 * self.t().ln()) / self.n as f64,
                Scheme::Traditional => {
                    pow_guarded(self.rho_cyl / self.rho_fil, self.n as f64) / self.n as f64
                }
            },
            _ => self.spectrum_exact()[0],
        }
    }

    pub fn diagnostics(&self, sol: &MasSolution) -> DiagnosticsReport {
        let (first_row, _) = self.assemble();
        let kappa = condition_number_circulant(&first_row).unwrap_or(f64::INFINITY);
        let mean = sol.currents.iter().sum::<f64>() / sol.currents.len() as f64;
        let max_abs = sol.currents.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        DiagnosticsReport {
            regime: self.regime(),
            t: self.t(),
            current_mean: mean,
            current_max_abs: max_abs,
            // centered on the analytic mean term; note that both solver
            // roundoff and the O(t^N/N) smooth part of the exact solution can
            // mask the alternation once the oscillation amplitude decays
            // below them (around l ~ N/4 in the fig2 setup)
            alternation_score: alternation_score(&sol.currents, self.mean_term()),
            kappa_computed: ScaledValue::from_value(kappa),
            kappa_asymptotic: self.condition_number_asymptotic(),
            compensating_current: match self.scheme {
                Scheme::Bounded => Some(-sol.currents.iter().sum::<f64>()),
                Scheme::Traditional => None,
            },
        }
    }

    /// Perturb the right-hand side by uniform relative noise, re-solve, and
    /// compare currents and potentials. Deterministic for a given seed.
    pub fn perturbation_experiment(&self, noise_rel: f64, seed: u64) -> Result<PerturbationReport> {
        if noise_rel < 0.0 {
            return Err(Error::Domain("noise_rel must be >= 0".into()));
        }
        let (first_row, rhs) = self.assemble();
        let matrix = circulant_matrix(&first_row);
        let base = solve_dense(&matrix, &rhs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy_rhs: Vec<f64> = rhs
            .iter()
            .map(|&d| d * (1.0 + noise_rel * rng.gen_range(-1.0..=1.0)))
            .collect();
        let noisy = solve_dense(&matrix, &noisy_rhs)?;
        let cur_scale = base.solution.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        let max_rel_current_change = base
            .solution
            .iter()
            .zip(&noisy.solution)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            / cur_scale;
        let base_sol = self.package(base.solution, Provenance::DenseSolve, 0.0);
        let noisy_sol = self.package(noisy.solution, Provenance::DenseSolve, 0.0);
        let mut potential_changes = Vec::new();
        for &factor in &[1.25, 2.0, 4.0] {
            let rho = factor * self.rho_cyl;
            let mut max_change = 0.0f64;
            let mut scale = 0.0f64;
            for k in 0..32 {
                let phi = TAU * k as f64 / 32.0;
                let a = self.potential_mas_direct(&base_sol, rho, phi)?;
                let b = self.potential_mas_direct(&noisy_sol, rho, phi)?;
                max_change = max_change.max((a - b).abs());
                scale = scale.max(a.abs());
            }
            potential_changes.push(PerturbationProbe {
                rho_factor: factor,
                max_abs_change: max_change,
                max_rel_change: max_change / scale,
            });
        }
        Ok(PerturbationReport { noise_rel, seed, max_rel_current_change, potential_changes })
    }
}

/// `A_inc / (mu0 I)` of a line current at `(rho_fil, 0)`.
pub fn incident_potential(rho_fil: f64, d_ref: f64, rho: f64, phi: f64) -> Result<f64> {
    let r2 = rho * rho + rho_fil * rho_fil - 2.0 * rho * rho_fil * phi.cos();
    if r2 < 1e-28 * rho_fil * rho_fil {
        return Err(Error::SingularPoint("observation point is on the source filament".into()));
    }
    Ok(-(r2.sqrt() / d_ref).ln() / (2.0 * PI))
}

/// Fraction of indices `l` in `[N/8, 3N/8]` where the deviation from
/// `mean_term` changes sign between `l` and `l+1`.
pub fn alternation_score(currents: &[f64], mean_term: f64) -> f64 {
    let n = currents.len();
    let lo = (n as f64 / 8.0).ceil() as usize;
    let hi = (3.0 * n as f64 / 8.0).floor() as usize;
    if hi <= lo {
        return 0.0;
    }
    let mut flips = 0usize;
    for l in lo..hi {
        if (currents[l] - mean_term) * (currents[l + 1] - mean_term) < 0.0 {
            flips += 1;
        }
    }
    flips as f64 / (hi - lo) as f64
}

/// `exp` that saturates to 0 / inf instead of producing NaN.
pub(crate) fn exp_guarded(x: f64) -> f64 {
    if x > 709.0 {
        f64::INFINITY
    } else if x < -745.0 {
        0.0
    } else {
        x.exp()
    }
}

/// `base^e` for positive base, through logs when out of powi range.
pub(crate) fn pow_guarded(base: f64, e: f64) -> f64 {
    if base <= 0.0 {
        return if e == 0.0 { 1.0 } else { 0.0 };
    }
    exp_guarded(e * base.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_linalg::solve_circulant;
    use approx::assert_abs_diff_eq;

    fn fig2(n: usize, scheme: Scheme) -> ExteriorCircularProblem {
        ExteriorCircularProblem::new(8.0, 10.0, 5.5, n, scheme).unwrap()
    }

    #[test]
    fn ordering_invariant_enforced() {
        assert!(ExteriorCircularProblem::new(8.0, 10.0, 9.0, 81, Scheme::Bounded).is_err());
        assert!(ExteriorCircularProblem::new(8.0, 7.0, 5.5, 81, Scheme::Bounded).is_err());
        assert!(ExteriorCircularProblem::new(8.0, 10.0, 5.5, 2, Scheme::Bounded).is_err());
    }

    #[test]
    fn assemble_p0_entries() {
        let p = fig2(81, Scheme::Bounded);
        let (first_row, rhs) = p.assemble();
        // B_0 = rho_aux / (rho_cyl - rho_aux)
        assert_abs_diff_eq!(first_row[0], 2.2, epsilon = 1e-14);
        // D_0/I = rho_cyl / (rho_fil - rho_cyl)
        assert_abs_diff_eq!(rhs[0], 4.0, epsilon = 1e-14);
    }

    #[test]
    fn traditional_row_is_bounded_plus_one() {
        let b = fig2(81, Scheme::Bounded);
        let t = fig2(81, Scheme::Traditional);
        let (rb, db) = b.assemble();
        let (rt, dt) = t.assemble();
        for (x, y) in rb.iter().zip(&rt) {
            assert_eq!(y - x, 1.0);
        }
        assert_eq!(db, dt);
    }

    #[test]
    fn spectrum_exact_fig2_values() {
        let p = fig2(81, Scheme::Bounded);
        let spec = p.spectrum_exact();
        // frozen direct evaluations
        assert_abs_diff_eq!(spec[1], 0.01436588155288221, epsilon = 1e-15);
        assert_abs_diff_eq!(spec[0], 2646.762854083919, epsilon = 1e-9);
        // symmetry I^(m) = I^(N-m)
        for m in 1..81 {
            assert_abs_diff_eq!(spec[m], spec[81 - m], epsilon = 1e-12 * spec[m].abs());
        }
    }

    #[test]
    fn spectrum_matches_circulant_solve() {
        // m = 0 is limited by cancellation in the DFT of B_p (the closed
        // form says B^(0) = 6.6e-14 while the entries are O(1)); the
        // thresholds are frozen from measuring that route.
        let p = fig2(81, Scheme::Bounded);
        let (first_row, rhs) = p.assemble();
        let sol = solve_circulant(&first_row, &rhs).unwrap();
        let spec = p.spectrum_exact();
        for m in 1..81 {
            assert!(
                (sol.spectrum[m].re - spec[m]).abs() <= 1e-9 * spec[m].abs(),
                "m={m}"
            );
        }
        assert!((sol.spectrum[0].re - spec[0]).abs() <= 5e-3 * spec[0].abs());
    }

    #[test]
    fn b0_spectral_coefficient_frozen() {
        let p = fig2(81, Scheme::Bounded);
        let s: f64 = 5.5 / 8.0;
        let b0 = s.powi(81) / (1.0 - s.powi(81));
        assert_abs_diff_eq!(b0, 6.593088459080635e-14, epsilon = 1e-26);
        // it feeds I^(0) through D^(0) / (N B^(0))
        let spec = p.spectrum_exact();
        let r: f64 = 0.8;
        let d0 = r.powi(81) / (1.0 - r.powi(81));
        assert_abs_diff_eq!(spec[0], d0 / (81.0 * b0), epsilon = 1e-9);
    }

    #[test]
    fn traditional_spectrum_relation() {
        let b = fig2(81, Scheme::Bounded).spectrum_exact();
        let t = fig2(81, Scheme::Traditional).spectrum_exact();
        for m in 1..81 {
            assert_eq!(b[m], t[m]);
        }
        // I'^(0) = I^(0) (rho_aux/rho_cyl)^N
        let s: f64 = 5.5 / 8.0;
        assert_abs_diff_eq!(t[0], b[0] * s.powi(81), epsilon = 1e-12 * t[0].abs());
    }

    #[test]
    fn critical_currents_collapse_to_image() {
        let p = ExteriorCircularProblem::new(8.0, 10.0, 6.4, 201, Scheme::Bounded).unwrap();
        assert_eq!(p.regime(), Regime::Critical);
        let sol = p.currents(SolverRoute::DftExact).unwrap();
        assert!((sol.currents[0] - 1.0).abs() < 1e-2);
        let rest = sol.currents[1..].iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        assert!(rest <= 1e-3, "max off-image current {rest:.3e}");
    }

    #[test]
    fn dft_and_dense_agree_at_fig2_scale() {
        let p = fig2(81, Scheme::Bounded);
        let a = p.currents(SolverRoute::DftExact).unwrap();
        let b = p.currents(SolverRoute::Dense).unwrap();
        let scale = a.currents.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        let dev = a
            .currents
            .iter()
            .zip(&b.currents)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max)
            / scale;
        assert!(dev <= 5e-3, "routes deviate by {dev:.3e}");
    }

    #[test]
    fn roundoff_splits_routes_at_n101() {
        let p = fig2(101, Scheme::Bounded);
        let a = p.currents(SolverRoute::DftExact).unwrap();
        // frozen from Eq-level evaluation
        assert!((a.currents[0] / 44271.546271723 - 1.0).abs() < 1e-9);
        let b = p.currents(SolverRoute::Dense).unwrap();
        let dev = (b.currents[0] - a.currents[0]).abs() / a.currents[0];
        assert!(dev > 1e-3, "expected visible roundoff at kappa ~ 1e16, got {dev:.3e}");
    }

    #[test]
    fn asymptotic_matches_exact_bounded() {
        let p = fig2(81, Scheme::Bounded);
        let exact = p.currents(SolverRoute::DftExact).unwrap().currents;
        let asy = p.currents_asymptotic().unwrap();
        let scale = exact.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        let dev = exact
            .iter()
            .zip(&asy)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            / scale;
        assert!(dev <= 0.02, "asymptotic deviation {dev:.3e}");
        assert_abs_diff_eq!(p.mean_term(), 2646.762816672711, epsilon = 1e-6);
    }

    #[test]
    fn asymptotic_traditional_same_oscillation_zero_mean() {
        let pb = fig2(81, Scheme::Bounded);
        let pt = fig2(81, Scheme::Traditional);
        let ab = pb.currents_asymptotic().unwrap();
        let at = pt.currents_asymptotic().unwrap();
        let shift = pb.mean_term() - pt.mean_term();
        for (x, y) in ab.iter().zip(&at) {
            assert_abs_diff_eq!(x - y, shift, epsilon = 1e-9 * shift.abs());
        }
        // the traditional mean is essentially zero
        assert!(pt.mean_term().abs() < 1e-8);
    }

    #[test]
    fn asymptotic_even_n_not_implemented() {
        let p = fig2(80, Scheme::Bounded);
        assert!(matches!(p.currents_asymptotic(), Err(Error::NotImplemented(_))));
    }

    #[test]
    fn critical_asymptotics() {
        let pb = ExteriorCircularProblem::new(8.0, 10.0, 6.4, 201, Scheme::Bounded).unwrap();
        let v = pb.currents_asymptotic().unwrap();
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
        let pt = ExteriorCircularProblem::new(8.0, 10.0, 6.4, 201, Scheme::Traditional).unwrap();
        let v = pt.currents_asymptotic().unwrap();
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == -1.0 / 201.0));
    }

    #[test]
    fn incident_potential_values() {
        let p = fig2(81, Scheme::Bounded);
        // on the R_fil = d_ref locus the incident potential vanishes
        let rho = p.rho_fil - 1.0; // R_fil = 1 = d_ref at phi = 0
        assert_abs_diff_eq!(p.potential_incident(rho, 0.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            p.potential_incident(0.0, 1.234).unwrap(),
            -(10f64.ln()) / (2.0 * PI),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            p.potential_incident(p.rho_fil, PI).unwrap(),
            -((2.0 * p.rho_fil).ln()) / (2.0 * PI),
            epsilon = 1e-14
        );
        assert!(p.potential_incident(p.rho_fil, 0.0).is_err());
    }

    #[test]
    fn exact_potential_values() {
        let p = fig2(81, Scheme::Bounded);
        assert!(p.potential_exact(1e9 * p.rho_cyl, 0.3).abs() <= 1e-8);
        // frozen: -(1/2pi) ln(14.4/8)
        assert_abs_diff_eq!(p.potential_exact(8.0, PI), -0.09354915320267172, epsilon = 1e-14);
    }

    #[test]
    fn exact_potential_satisfies_neumann_bc() {
        let p = fig2(81, Scheme::Bounded);
        let phi = 1.1;
        let h = 1e-5;
        let total = |rho: f64| p.potential_exact(rho, phi) + p.potential_incident(rho, phi).unwrap();
        let d = (total(p.rho_cyl + h) - total(p.rho_cyl - h)) / (2.0 * h);
        assert!(d.abs() <= 1e-6, "radial derivative {d:.3e}");
    }

    #[test]
    fn mas_direct_degenerate_single_source() {
        let p = ExteriorCircularProblem::new(8.0, 10.0, 5.5, 3, Scheme::Bounded).unwrap();
        let sol = MasSolution {
            currents: vec![1.0, 0.0, 0.0],
            spectrum: vec![1.0 / 3.0; 3],
            provenance: Provenance::DftExact,
            ill_conditioned: false,
        };
        let (rho, phi) = (12.0f64, 0.7f64);
        let r0 = (rho * rho + 5.5 * 5.5 - 2.0 * rho * 5.5 * phi.cos()).sqrt();
        assert_abs_diff_eq!(
            p.potential_mas_direct(&sol, rho, phi).unwrap(),
            -(r0 / rho).ln() / (2.0 * PI),
            epsilon = 1e-14
        );
    }

    #[test]
    fn mas_potential_far_field_vanishes_bounded() {
        let p = fig2(81, Scheme::Bounded);
        let sol = p.currents(SolverRoute::DftExact).unwrap();
        let v = p.potential_mas_direct(&sol, 1e6 * p.rho_cyl, 0.4).unwrap();
        assert!(v.abs() <= 1e-4, "far field {v:.3e}");
    }

    #[test]
    fn spectral_equals_direct() {
        let p = fig2(81, Scheme::Bounded);
        let sol = p.currents(SolverRoute::DftExact).unwrap();
        for &(rf, phi) in &[(1.0, 0.0), (1.5, PI / 4.0), (3.0, PI)] {
            let rho = rf * p.rho_cyl;
            let d = p.potential_mas_direct(&sol, rho, phi).unwrap();
            let s = p.potential_mas_spectral(&sol, rho, phi, 1e-12).unwrap();
            assert_abs_diff_eq!(d, s.value, epsilon = 1e-8);
        }
    }

    #[test]
    fn spectral_ignores_i0() {
        let p = fig2(41, Scheme::Bounded);
        let sol = p.currents(SolverRoute::DftExact).unwrap();
        let mut tweaked = sol.clone();
        tweaked.spectrum[0] += 123.0;
        let a = p.potential_mas_spectral(&sol, 12.0, 0.3, 1e-12).unwrap();
        let b = p.potential_mas_spectral(&tweaked, 12.0, 0.3, 1e-12).unwrap();
        // I^(0) re-enters only through the N-periodic extension (m = N, 2N, ...);
        // the extra 3e-12 allows for the tail-truncation difference
        assert!((a.value - b.value).abs() <= 123.0 * (5.5f64 / 12.0).powi(41) + 3e-12);
    }

    #[test]
    fn self_consistency_residual_small() {
        let p = fig2(81, Scheme::Bounded);
        assert!(p.self_consistency_residual().abs() <= 1e-12);
        let p2 = ExteriorCircularProblem::new(8.0, 16.0, 5.5, 81, Scheme::Bounded).unwrap();
        assert!(p2.self_consistency_residual().abs() <= 1e-12);
        // 64 nodes leave the (rho_cyl/rho_fil)^64 aliasing term; 4096 nodes do not
        let coarse = p.self_consistency_residual_with_nodes(64).abs();
        assert!(coarse <= 1e-5 && coarse >= 1e-9, "coarse residual {coarse:.3e}");
        assert!(p.self_consistency_residual_with_nodes(4096).abs() <= 1e-12);
    }

    #[test]
    fn condition_numbers_fig2() {
        let p = fig2(81, Scheme::Bounded);
        let (first_row, _) = p.assemble();
        let exact = condition_number_circulant(&first_row).unwrap();
        assert!((2.5e12..1e13).contains(&exact), "kappa {exact:.3e}");
        let asy = p.condition_number_asymptotic().value();
        assert!(asy / exact < 2.0 && exact / asy < 2.0);
        // traditional scheme: (rho_cyl/rho_aux)^{N/2} ~ 3.9e6
        let pt = fig2(81, Scheme::Traditional);
        let asy_t = pt.condition_number_asymptotic().value();
        assert!((1e6..1e7).contains(&asy_t), "kappa' {asy_t:.3e}");
        let (row_t, _) = pt.assemble();
        let exact_t = condition_number_circulant(&row_t).unwrap();
        assert!(asy_t / exact_t < 2.0 && exact_t / asy_t < 2.0);
    }

    #[test]
    fn diagnostics_regimes() {
        let p = fig2(81, Scheme::Bounded);
        let sol = p.currents(SolverRoute::DftExact).unwrap();
        let d = p.diagnostics(&sol);
        assert_eq!(d.regime, Regime::Unphysical);
        // the closed-form asymptotic pattern alternates perfectly; the exact
        // currents stop alternating near l ~ N/4 where the oscillation decays
        // below the smooth remainder (frozen: 14/19 window pairs flip)
        let asym = MasSolution {
            spectrum: dft(&p.currents_asymptotic().unwrap()).into_iter().map(|z| z.re).collect(),
            currents: p.currents_asymptotic().unwrap(),
            provenance: Provenance::Asymptotic,
            ill_conditioned: false,
        };
        assert!(p.diagnostics(&asym).alternation_score >= 0.95);
        assert_abs_diff_eq!(d.alternation_score, 14.0 / 19.0, epsilon = 1e-12);
        let phys = ExteriorCircularProblem::new(8.0, 10.0, 7.0, 81, Scheme::Bounded).unwrap();
        let sol = phys.currents(SolverRoute::DftExact).unwrap();
        let d = phys.diagnostics(&sol);
        assert_eq!(d.regime, Regime::Physical);
        // bounded by 4x the physical-case asymptotic maximum
        let asy = phys.currents_asymptotic().unwrap();
        let asy_max = asy.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        assert!(d.current_max_abs <= 4.0 * asy_max);
        let crit = ExteriorCircularProblem::new(8.0, 10.0, 6.4, 81, Scheme::Bounded).unwrap();
        assert_eq!(crit.regime(), Regime::Critical);
    }

    #[test]
    fn least_squares_route_keeps_oscillations() {
        let p = fig2(81, Scheme::Bounded);
        let square = p.currents(SolverRoute::Dense).unwrap();
        let tall = p.currents(SolverRoute::LeastSquares(162)).unwrap();
        // kappa ~ 5e12 dumps the solver roundoff mostly into the constant
        // mode, so center each route on its own sample mean here: doubling
        // the collocation count must not wash out the alternating pattern
        let center = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let s_score = alternation_score(&square.currents, center(&square.currents));
        let t_score = alternation_score(&tall.currents, center(&tall.currents));
        assert!(s_score >= 0.5, "dense alternation {s_score:.3}");
        assert!(t_score >= 0.5, "lsq alternation {t_score:.3}");
    }

    #[test]
    fn perturbation_zero_noise_is_exact() {
        let p = fig2(41, Scheme::Bounded);
        let r = p.perturbation_experiment(0.0, 7).unwrap();
        assert_eq!(r.max_rel_current_change, 0.0);
        assert!(r.potential_changes.iter().all(|c| c.max_abs_change == 0.0));
    }

    #[test]
    fn perturbation_insensitivity() {
        let p = fig2(81, Scheme::Bounded);
        let r = p.perturbation_experiment(1e-12, 42).unwrap();
        let at2 = &r.potential_changes[1];
        assert!(
            r.max_rel_current_change / at2.max_rel_change >= 1e2,
            "current change {:.3e} vs potential change {:.3e}",
            r.max_rel_current_change,
            at2.max_rel_change
        );
        // more insensitivity for larger rho (absolute change decreases)
        assert!(r.potential_changes[2].max_abs_change <= r.potential_changes[0].max_abs_change);
    }

    #[test]
    fn d_ref_independence() {
        let mut p1 = fig2(41, Scheme::Bounded);
        let mut p2 = fig2(41, Scheme::Bounded);
        p1.d_ref = 1.0;
        p2.d_ref = 3.7;
        let s1 = p1.currents(SolverRoute::DftExact).unwrap();
        let s2 = p2.currents(SolverRoute::DftExact).unwrap();
        assert_eq!(s1.currents, s2.currents);
        let a = p1.potential_mas_direct(&s1, 12.0, 0.5).unwrap();
        let b = p2.potential_mas_direct(&s2, 12.0, 0.5).unwrap();
        assert_eq!(a, b);
        // traditional potential shifts by at most |N I'^(0)| ln(d1/d2) / 2pi
        let mut t1 = fig2(41, Scheme::Traditional);
        let mut t2 = fig2(41, Scheme::Traditional);
        t1.d_ref = 1.0;
        t2.d_ref = 3.7;
        let st1 = t1.currents(SolverRoute::DftExact).unwrap();
        let va = t1.potential_mas_direct(&st1, 12.0, 0.5).unwrap();
        let vb = t2.potential_mas_direct(&st1, 12.0, 0.5).unwrap();
        let bound = 41.0 * st1.spectrum[0].abs() * 3.7f64.ln() / (2.0 * PI);
        assert!((va - vb).abs() <= bound * (1.0 + 1e-9) + 1e-15);
    }
}
