//! Interior (cavity) problem: a line current at `(rho_fil, 0)` inside a
//! cavity of radius `rho_cyl` in an infinitely permeable medium, with `N`
//! auxiliary currents on an exterior circle `rho_aux > rho_cyl`.
//!
//! Only the traditional `ln(R/d_ref)` fundamental solution is used here:
//! the bounded `ln(R/rho)` alternative is singular at the interior origin.
//! Because the total enclosed current is `I`, the Neumann boundary data
//! acquire the constant term `-mu0 I / (2 pi rho_cyl)` next to the incident
//! derivative.
//!
//! The image singularity sits at `rho_cri = rho_cyl^2 / rho_fil > rho_cyl`
//! and the regime ratio is `t = rho_aux / rho_cri`. In the oscillating
//! regime (`t > 1`) the MAS potential splits into an exponentially growing
//! constant, `-(1/2pi) N I^(0) ln(rho_aux/d_ref)`, plus a convergent series:
//! the potential "diverges" only by a spatially constant drift, so the
//! H-field still converges.

use crate::circular_exterior::{
    alternation_score, exp_guarded, incident_potential, pow_guarded, DiagnosticsReport,
    MasSolution, PotentialSeries, Provenance, Regime, SolverRoute,
};
use crate::spectral_linalg::{
    circulant_matrix, condition_number_circulant, dft, idft, solve_dense, solve_least_squares,
    Matrix,
};
use crate::{Error, Result, ScaledValue};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteriorCircularProblem {
    pub rho_cyl: f64,
    pub rho_fil: f64,
    pub rho_aux: f64,
    pub n: usize,
    #[serde(default = "default_d_ref")]
    pub d_ref: f64,
}

fn default_d_ref() -> f64 {
    1.0
}

impl InteriorCircularProblem {
    pub fn new(rho_cyl: f64, rho_fil: f64, rho_aux: f64, n: usize) -> Result<Self> {
        let p = Self { rho_cyl, rho_fil, rho_aux, n, d_ref: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_fil > 0.0 && self.rho_fil < self.rho_cyl && self.rho_cyl < self.rho_aux) {
            return Err(Error::Domain(format!(
                "interior problem requires 0 < rho_fil < rho_cyl < rho_aux, got rho_fil={}, rho_cyl={}, rho_aux={}",
                self.rho_fil, self.rho_cyl, self.rho_aux
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

    /// Image-singularity radius `rho_cyl^2 / rho_fil`, outside the cavity.
    pub fn rho_cri(&self) -> f64 {
        self.rho_cyl * self.rho_cyl / self.rho_fil
    }

    /// `t = rho_aux / rho_cri`.
    pub fn t(&self) -> f64 {
        self.rho_aux / self.rho_cri()
    }

    pub fn regime(&self) -> Regime {
        Regime::classify(self.t())
    }

    fn b_entry(&self, theta: f64) -> f64 {
        let (rc, ra) = (self.rho_cyl, self.rho_aux);
        (rc * rc - rc * ra * theta.cos()) / (rc * rc + ra * ra - 2.0 * rc * ra * theta.cos())
    }

    fn d_entry(&self, theta: f64) -> f64 {
        let (rc, rf) = (self.rho_cyl, self.rho_fil);
        // the +1 is the enclosed-current term of the Neumann data
        1.0 - (rc * rc - rc * rf * theta.cos()) / (rc * rc + rf * rf - 2.0 * rc * rf * theta.cos())
    }

    /// First row and normalized right-hand side of the circulant collocation
    /// system for the boundary condition with the enclosed-current term.
    pub fn assemble(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let first_row: Vec<f64> = (0..n).map(|p| self.b_entry(TAU * p as f64 / n as f64)).collect();
        let rhs: Vec<f64> = (0..n).map(|p| self.d_entry(TAU * p as f64 / n as f64)).collect();
        (first_row, rhs)
    }

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

    /// Closed-form `I^(m)/I`; the same algebraic shape as the exterior
    /// bounded-scheme spectrum, with `r = rho_fil/rho_cyl`, `s =
    /// rho_cyl/rho_aux`, so `(r/s)^N = t^N`.
    pub fn spectrum_exact(&self) -> Vec<f64> {
        let n = self.n;
        let r = self.rho_fil / self.rho_cyl;
        let s = self.rho_cyl / self.rho_aux;
        let sn = pow_guarded(s, n as f64);
        let rn = pow_guarded(r, n as f64);
        let nf = n as f64;
        let mut spec = vec![0.0; n];
        spec[0] = exp_guarded(nf * (r.ln() - s.ln())) * (1.0 - sn) / ((1.0 - rn) * nf);
        for (m, slot) in spec.iter_mut().enumerate().skip(1) {
            let mf = m as f64;
            let num = pow_guarded(r, nf - mf) + pow_guarded(r, mf);
            let den = pow_guarded(s, nf - mf) + pow_guarded(s, mf);
            *slot = num * (1.0 - sn) / (den * (1.0 - rn) * nf);
        }
        spec
    }

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

    /// Large-N closed forms with `t = rho_aux/rho_cri` (odd N only).
    pub fn currents_asymptotic(&self) -> Result<Vec<f64>> {
        if self.n % 2 == 0 {
            return Err(Error::NotImplemented(
                "asymptotic current formulas are implemented for odd N only",
            ));
        }
        let n = self.n;
        let nf = n as f64;
        let t = self.t();
        Ok(match self.regime() {
            Regime::Critical => {
                // the l = 0 source collapses onto the image at rho_cri
                let mut v = vec![0.0; n];
                v[0] = 1.0;
                v
            }
            Regime::Physical => (0..n)
                .map(|l| {
                    let c = (TAU * l as f64 / nf).cos();
                    2.0 / nf * (-t * t + t * c) / (t * t - 2.0 * t * c + 1.0)
                })
                .collect(),
            Regime::Unphysical => {
                let mean = exp_guarded(nf * t.ln()) / nf;
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

    /// `(I/N) t^N` in the oscillating regime, `I^(0)` otherwise.
    pub fn mean_term(&self) -> f64 {
        match self.regime() {
            Regime::Unphysical => exp_guarded(self.n as f64 * self.t().ln()) / self.n as f64,
            _ => self.spectrum_exact()[0],
        }
    }

    /// `A_inc / (mu0 I)` of the filament at `(rho_fil, 0)`.
    pub fn potential_incident(&self, rho: f64, phi: f64) -> Result<f64> {
        incident_potential(self.rho_fil, self.d_ref, rho, phi)
    }

    /// Scattered reference potential with the arbitrary additive constant
    /// `A0/(mu0 I)`, valid for `rho <= rho_cyl`.
    pub fn potential_exact(&self, rho: f64, phi: f64, a0: f64) -> Result<f64> {
        if rho > self.rho_cyl * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "interior reference potential requires rho <= rho_cyl, got rho={rho}"
            )));
        }
        let rcri = self.rho_cri();
        let dist = (rho * rho + rcri * rcri - 2.0 * rho * rcri * phi.cos()).sqrt();
        Ok(a0 - (dist / rcri).ln() / (2.0 * PI))
    }

    /// Direct MAS sum over the N exterior sources.
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
            acc += cur * (r2.sqrt() / self.d_ref).ln();
        }
        Ok(-acc / (2.0 * PI))
    }

    /// Spectral MAS potential: the constant (possibly exponentially large)
    /// first term plus the convergent series in `(rho/rho_aux)^m`.
    /// Valid for `rho < rho_aux`.
    pub fn potential_mas_spectral(
        &self,
        sol: &MasSolution,
        rho: f64,
        phi: f64,
        tol: f64,
    ) -> Result<PotentialSeries> {
        if rho >= self.rho_aux {
            return Err(Error::Domain(format!(
                "interior spectral potential requires rho < rho_aux, got rho={rho}"
            )));
        }
        let n = sol.spectrum.len();
        let nf = n as f64;
        let ratio = rho / self.rho_aux;
        let spec_max = sol.spectrum.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        let mut acc = -nf * sol.spectrum[0] * (self.rho_aux / self.d_ref).ln();
        let mut pow = 1.0;
        let mut m = 0usize;
        loop {
            m += 1;
            pow *= ratio;
            if nf * spec_max * pow * ratio / (1.0 - ratio) < tol || m > 4_000_000 {
                break;
            }
            acc += nf * sol.spectrum[m % n] / m as f64 * pow * (m as f64 * phi).cos();
        }
        Ok(PotentialSeries {
            value: acc / (2.0 * PI),
            terms_used: m,
            slow_convergence: rho / self.rho_aux > 0.99,
        })
    }

    /// The observation-point-independent first term of the spectral
    /// potential, `-(1/2pi) N I^(0) ln(rho_aux/d_ref)`. In the oscillating
    /// regime it grows like `t^N` and is reported in log-magnitude form.
    pub fn divergent_part(&self) -> ScaledValue {
        let log_ra = (self.rho_aux / self.d_ref).ln();
        if log_ra == 0.0 {
            // rho_aux = d_ref renders the divergent part exactly zero
            return ScaledValue::from_value(0.0);
        }
        let n = self.n as f64;
        let r = self.rho_fil / self.rho_cyl;
        let s = self.rho_cyl / self.rho_aux;
        let corr = (1.0 - pow_guarded(s, n)) / (1.0 - pow_guarded(r, n));
        // N I^(0) = t^N * corr, through log10 to survive huge N
        let log10 = n * self.t().log10() + (corr * log_ra.abs() / (2.0 * PI)).log10();
        ScaledValue::from_log10(log10, if log_ra > 0.0 { -1 } else { 1 })
    }

    /// Trapezoid quadrature of the full Neumann data (incident derivative
    /// plus the enclosed-current constant) around the boundary; zero by
    /// the circuital law.
    pub fn self_consistency_residual_with_nodes(&self, nodes: usize) -> f64 {
        let (rc, rf) = (self.rho_cyl, self.rho_fil);
        let h = TAU / nodes as f64;
        let mut sum = 0.0;
        for k in 0..nodes {
            let phi = h * k as f64;
            let deriv = -(rc - rf * phi.cos())
                / (rc * rc + rf * rf - 2.0 * rc * rf * phi.cos())
                / (2.0 * PI);
            sum += (deriv + 1.0 / (TAU * rc)) * rc;
        }
        sum * h
    }

    /// Node-doubling version of the residual (doubles until stable to 1e-13).
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

    /// The fixed 36-point probe grid: `rho/rho_cyl in {0.1..0.9}`,
    /// `phi in {0, 60, 120, 180} deg`.
    pub fn probe_grid(&self) -> Vec<(f64, f64)> {
        let mut grid = Vec::with_capacity(36);
        for i in 1..=9 {
            let rho = 0.1 * i as f64 * self.rho_cyl;
            for &deg in &[0.0, 60.0, 120.0, 180.0] {
                grid.push((rho, deg * PI / 180.0));
            }
        }
        grid
    }

    /// Mean and standard deviation of `A_mas(self) - A_mas(other)` over the
    /// probe grid: in the oscillating regime the difference is a constant
    /// (the difference of divergent parts), so the deviation is tiny.
    pub fn potential_offset_stats(&self, other: &InteriorCircularProblem) -> Result<(f64, f64)> {
        let sol_a = self.currents(SolverRoute::DftExact)?;
        let sol_b = other.currents(SolverRoute::DftExact)?;
        let diffs: Vec<f64> = self
            .probe_grid()
            .iter()
            .map(|&(rho, phi)| {
                let a = self.potential_mas_spectral(&sol_a, rho, phi, 1e-13)?.value;
                let b = other.potential_mas_spectral(&sol_b, rho, phi, 1e-13)?.value;
                Ok(a - b)
            })
            .collect::<Result<_>>()?;
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64;
        Ok((mean, var.sqrt()))
    }

    /// Max over the probe grid of `|grad A_mas(n1) - grad A_mas(n2)|`
    /// relative to the local total-field gradient, by central differences.
    /// Probe points that coincide with the filament are skipped (the local
    /// scale is infinite there).
    pub fn h_field_consistency(&self, n1: usize, n2: usize) -> Result<f64> {
        let p1 = InteriorCircularProblem { n: n1, ..self.clone() };
        let p2 = InteriorCircularProblem { n: n2, ..self.clone() };
        p1.validate()?;
        p2.validate()?;
        let s1 = p1.currents(SolverRoute::DftExact)?;
        let s2 = p2.currents(SolverRoute::DftExact)?;
        let h = 1e-5 * self.rho_cyl;
        let grad = |p: &InteriorCircularProblem, s: &MasSolution, x: f64, y: f64| -> Result<(f64, f64)> {
            let at = |x: f64, y: f64| -> Result<f64> {
                Ok(p.potential_mas_direct(s, x.hypot(y), y.atan2(x))?)
            };
            Ok(((at(x + h, y)? - at(x - h, y)?) / (2.0 * h), (at(x, y + h)? - at(x, y - h)?) / (2.0 * h)))
        };
        let mut worst = 0.0f64;
        for (rho, phi) in self.probe_grid() {
            let (x, y) = (rho * phi.cos(), rho * phi.sin());
            let rf2 = (x - self.rho_fil) * (x - self.rho_fil) + y * y;
            if rf2 < (4.0 * h) * (4.0 * h) {
                continue;
            }
            let (g1x, g1y) = grad(&p1, &s1, x, y)?;
            let (g2x, g2y) = grad(&p2, &s2, x, y)?;
            // incident gradient, analytic
            let gix = -(x - self.rho_fil) / rf2 / (2.0 * PI);
            let giy = -y / rf2 / (2.0 * PI);
            let scale = (g1x + gix).hypot(g1y + giy);
            worst = worst.max((g1x - g2x).hypot(g1y - g2y) / scale);
        }
        Ok(worst)
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
            alternation_score: alternation_score(&sol.currents, self.mean_term()),
            kappa_computed: ScaledValue::from_value(kappa),
            // no closed-form law is available for the interior system; the
            // computed value is reported in both slots
            kappa_asymptotic: ScaledValue::from_value(kappa),
            compensating_current: None,
        }
    }
}
