//! Batch-experiment harness: JSON scenario configs, CSV emission with a
//! digest manifest, canned figure datasets, and the kernel/roundoff
//! demonstration reports consumed by the CLI.
//!
//! All CSV output uses 17 significant digits and LF line endings so runs are
//! byte-identical across invocations and suitable for golden-file testing.

use crate::circular_exterior::{
    ExteriorCircularProblem, PerturbationReport, Scheme, SolverRoute,
};
use crate::circular_interior::InteriorCircularProblem;
use crate::elliptic_exterior::EllipticProblem;
use crate::{analytic_kernels, Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// One of the three boundary-value problems, tagged by `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Exterior(ExteriorCircularProblem),
    Interior(InteriorCircularProblem),
    Elliptic(EllipticProblem),
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProblemSpec::Exterior(p) => p.validate(),
            ProblemSpec::Interior(p) => p.validate(),
            ProblemSpec::Elliptic(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolverSpec {
    Dft,
    Dense,
    Lsq { m: usize },
}

impl SolverSpec {
    fn route(self) -> SolverRoute {
        match self {
            SolverSpec::Dft => SolverRoute::DftExact,
            SolverSpec::Dense => SolverRoute::Dense,
            SolverSpec::Lsq { m } => SolverRoute::LeastSquares(m),
        }
    }
}

/// Observation points: an explicit `(rho, phi_deg)` list or a uniform radial
/// sweep at fixed angle. Lengths are in units of `d_ref`, angles in degrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeSpec {
    List(Vec<(f64, f64)>),
    Sweep { rho_start: f64, rho_stop: f64, count: usize, phi_deg: f64 },
}

impl ProbeSpec {
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        match self {
            ProbeSpec::List(pts) => {
                if pts.is_empty() {
                    return Err(Error::Config("probe list must be non-empty".into()));
                }
                Ok(pts.clone())
            }
            ProbeSpec::Sweep { rho_start, rho_stop, count, phi_deg } => {
                if *count < 2 || !(rho_stop > rho_start) || !(*rho_start > 0.0) {
                    return Err(Error::Config(format!(
                        "sweep requires 0 < rho_start < rho_stop and count >= 2, got \
                         [{rho_start}, {rho_stop}] x {count}"
                    )));
                }
                Ok((0..*count)
                    .map(|i| {
                        let s = i as f64 / (*count - 1) as f64;
                        (rho_start + s * (rho_stop - rho_start), *phi_deg)
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub probes: ProbeSpec,
    /// Output directory; the `MAS_LAB_OUT` environment variable overrides it.
    pub outputs: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.problem.validate()?;
        Ok(cfg)
    }

    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os("MAS_LAB_OUT") {
            Some(dir) => PathBuf::from(dir),
            None => self.outputs.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub diagnostics: serde_json::Value,
    /// Every emitted data file with its content digest. The report itself is
    /// the manifest carrier and cannot list its own digest.
    pub manifest: Vec<ManifestEntry>,
    pub wall_ms: WallTimings,
}

#[derive(Debug, Clone, Serialize)]
pub struct WallTimings {
    pub solve: f64,
    pub probes: f64,
    pub total: f64,
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<ManifestEntry> {
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, text.as_bytes())?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(ManifestEntry {
        path: name.to_string(),
        sha256: format!("{digest:x}"),
        bytes: text.len(),
    })
}

/// Execute a scenario: solve, evaluate the probes, and write `currents.csv`,
/// `potential.csv`, and `report.json` into the configured output directory.
pub fn run(config: &ScenarioConfig) -> Result<RunReport> {
    config.problem.validate()?;
    let dir = config.output_dir();
    fs::create_dir_all(&dir)?;
    let probes = config.probes.points()?;
    let started = Instant::now();

    // Solve and collect per-problem diagnostics.
    let (sol, diagnostics) = match &config.problem {
        ProblemSpec::Exterior(p) => {
            let sol = p.currents(config.solver.route())?;
            let d = serde_json::to_value(p.diagnostics(&sol))?;
            (sol, d)
        }
        ProblemSpec::Interior(p) => {
            let sol = p.currents(config.solver.route())?;
            let mut d = serde_json::to_value(p.diagnostics(&sol))?;
            d["divergent_part"] = serde_json::to_value(p.divergent_part())?;
            (sol, d)
        }
        ProblemSpec::Elliptic(p) => {
            let mut p = p.clone();
            match config.solver {
                SolverSpec::Dft => {
                    return Err(Error::Config(
                        "the dft route requires a circulant system; use dense or lsq \
                         for the elliptic problem"
                            .into(),
                    ))
                }
                SolverSpec::Dense => p.m = p.n,
                SolverSpec::Lsq { m } => p.m = m,
            }
            p.validate()?;
            let sol = p.solve()?;
            let mut d = serde_json::to_value(p.diagnostics(&sol))?;
            // no closed-form critical surface: these slots have no value
            d["t"] = serde_json::Value::Null;
            d["kappa_asymptotic"] = serde_json::Value::Null;
            (sol, d)
        }
    };
    let solve_ms = started.elapsed().as_secs_f64() * 1e3;

    // Probe the total potential; the exact column is the reference solution
    // (anchored at the first probe for the interior problem, whose exact
    // potential is defined only up to a constant).
    let probe_start = Instant::now();
    let mut pot_rows = Vec::with_capacity(probes.len());
    match &config.problem {
        ProblemSpec::Exterior(p) => {
            for &(rho, phi_deg) in &probes {
                let phi = phi_deg.to_radians();
                let mas = p.potential_mas_direct(&sol, rho, phi)? + p.potential_incident(rho, phi)?;
                let exact = p.potential_exact(rho, phi) + p.potential_incident(rho, phi)?;
                pot_rows.push(vec![rho, phi_deg, mas, exact]);
            }
        }
        ProblemSpec::Interior(p) => {
            let (r0, f0) = probes[0];
            let phi0 = f0.to_radians();
            let mas0 =
                p.potential_mas_direct(&sol, r0, phi0)? + p.potential_incident(r0, phi0)?;
            let a0 = mas0 - (p.potential_exact(r0, phi0, 0.0)? + p.potential_incident(r0, phi0)?);
            for &(rho, phi_deg) in &probes {
                let phi = phi_deg.to_radians();
                let mas = p.potential_mas_direct(&sol, rho, phi)? + p.potential_incident(rho, phi)?;
                let exact = p.potential_exact(rho, phi, a0)? + p.potential_incident(rho, phi)?;
                pot_rows.push(vec![rho, phi_deg, mas, exact]);
            }
        }
        ProblemSpec::Elliptic(p) => {
            for &(rho, phi_deg) in &probes {
                let phi = phi_deg.to_radians();
                let mas = p.potential_mas(&sol, rho, phi)? + p.potential_incident(rho, phi)?;
                let exact =
                    p.potential_exact_scattered(rho, phi)? + p.potential_incident(rho, phi)?;
                pot_rows.push(vec![rho, phi_deg, mas, exact]);
            }
        }
    }
    let probes_ms = probe_start.elapsed().as_secs_f64() * 1e3;

    let cur_rows: Vec<Vec<f64>> = sol
        .currents
        .iter()
        .enumerate()
        .map(|(l, &c)| vec![l as f64, c])
        .collect();
    let mut manifest = vec![
        write_csv(&dir, "currents.csv", "l,current", &cur_rows)?,
        write_csv(
            &dir,
            "potential.csv",
            "rho,phi_deg,a_mas_total,a_exact_total",
            &pot_rows,
        )?,
    ];
    manifest.sort_by(|a, b| a.path.cmp(&b.path));

    let report = RunReport {
        diagnostics,
        manifest,
        wall_ms: WallTimings {
            solve: solve_ms,
            probes: probes_ms,
            total: started.elapsed().as_secs_f64() * 1e3,
        },
    };
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4,
}

impl std::str::FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig2a" => FigureId::Fig2a,
            "fig2b" => FigureId::Fig2b,
            "fig3a" => FigureId::Fig3a,
            "fig3b" => FigureId::Fig3b,
            "fig4" => FigureId::Fig4,
            other => {
                return Err(Error::Config(format!(
                    "unknown figure id '{other}' (expected fig2a|fig2b|fig3a|fig3b|fig4)"
                )))
            }
        })
    }
}

fn fig2_problem() -> ExteriorCircularProblem {
    ExteriorCircularProblem::new(8.0, 10.0, 5.5, 81, Scheme::Bounded).expect("valid geometry")
}

fn fig3_problem() -> EllipticProblem {
    EllipticProblem::new(6.0, 3.0, 7.5, 5.2222, 80, Scheme::Traditional).expect("valid geometry")
}

fn fig4_problem(n: usize) -> InteriorCircularProblem {
    InteriorCircularProblem::new(5.0, 4.0, 6.5, n).expect("valid geometry")
}

/// Emit the plot-ready CSV for one figure into `out`.
pub fn figure(id: FigureId, out: &Path) -> Result<ManifestEntry> {
    fs::create_dir_all(out)?;
    match id {
        FigureId::Fig2a => {
            let p = fig2_problem();
            let exact = p.currents(SolverRoute::DftExact)?;
            let asym = p.currents_asymptotic()?;
            let rows: Vec<Vec<f64>> = exact
                .currents
                .iter()
                .zip(&asym)
                .enumerate()
                .map(|(l, (&e, &a))| vec![l as f64, e, a])
                .collect();
            write_csv(out, "fig2a.csv", "l,current_exact,current_asymptotic", &rows)
        }
        FigureId::Fig2b => {
            let p = fig2_problem();
            let sol = p.currents(SolverRoute::DftExact)?;
            let phi = PI / 4.0;
            let mut rows = Vec::new();
            for i in 0..=80 {
                let rho = p.rho_cyl * (1.0 + 2.0 * i as f64 / 80.0);
                let mas = p.potential_mas_direct(&sol, rho, phi)? + p.potential_incident(rho, phi)?;
                let exact = p.potential_exact(rho, phi) + p.potential_incident(rho, phi)?;
                rows.push(vec![rho / p.rho_cyl, mas, exact]);
            }
            write_csv(out, "fig2b.csv", "rho_over_rho_cyl,a_mas_total,a_exact_total", &rows)
        }
        FigureId::Fig3a => {
            let p = fig3_problem();
            let sol = p.solve()?;
            let rows: Vec<Vec<f64>> = sol
                .currents
                .iter()
                .enumerate()
                .map(|(l, &c)| vec![l as f64, c])
                .collect();
            write_csv(out, "fig3a.csv", "l,current", &rows)
        }
        FigureId::Fig3b => {
            let p = fig3_problem();
            let sol = p.solve()?;
            let phi = PI / 2.0;
            let mut rows = Vec::new();
            for i in 0..=80 {
                let rho = p.b * (1.0 + 2.0 * i as f64 / 80.0);
                let mas = p.potential_mas(&sol, rho, phi)? + p.potential_incident(rho, phi)?;
                let exact =
                    p.potential_exact_scattered(rho, phi)? + p.potential_incident(rho, phi)?;
                rows.push(vec![rho / p.b, mas, exact]);
            }
            write_csv(out, "fig3b.csv", "rho_over_b,a_mas_total,a_exact_total", &rows)
        }
        FigureId::Fig4 => {
            let phi = PI / 3.0;
            let mut columns = Vec::new();
            let mut rhos = Vec::new();
            for n in [59usize, 60, 61] {
                let p = fig4_problem(n);
                let sol = p.currents(SolverRoute::DftExact)?;
                let mut col = Vec::new();
                for i in 0..=80 {
                    let rho = p.rho_cyl * (0.1 + 0.8 * i as f64 / 80.0);
                    if n == 59 {
                        rhos.push(rho / p.rho_cyl);
                    }
                    col.push(
                        p.potential_mas_direct(&sol, rho, phi)?
                            + p.potential_incident(rho, phi)?,
                    );
                }
                columns.push(col);
            }
            let rows: Vec<Vec<f64>> = rhos
                .iter()
                .enumerate()
                .map(|(i, &r)| vec![r, columns[0][i], columns[1][i], columns[2][i]])
                .collect();
            write_csv(out, "fig4.csv", "rho_over_rho_cyl,a_n59,a_n60,a_n61", &rows)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub tol: f64,
    pub worst_grid_deviation: f64,
    pub worst_poisson_deviation: f64,
    pub worst_case: (u32, f64, f64),
    pub pass: bool,
}

/// Cross-check the closed forms against the quadrature oracle over the
/// standard `(m, x, y)` grid and the Poisson-kernel cases.
pub fn verify_kernels(tol: f64) -> Result<KernelReport> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let mut worst = 0.0f64;
    let mut worst_case = (0u32, 0.0, 0.0);
    for m in 0..=12 {
        for &x in &[1.1, 1.5, 2.0, 3.0, 5.0] {
            for &y in &[0.1, 0.25, 0.5, 0.75, 1.0] {
                let args = analytic_kernels::KernelArgs::new(m, x, y)?;
                let d = (analytic_kernels::eval_j_closed(&args)
                    - analytic_kernels::eval_j_quadrature(&args, 4096)?)
                .abs();
                if d > worst {
                    worst = d;
                    worst_case = (m, x, y);
                }
            }
        }
    }
    // Poisson-kernel routes: J(m, x, 1) against the closed y = 1 case.
    let mut worst_poisson = 0.0f64;
    for m in 0..=8 {
        for &x in &[1.25, 2.0, 4.0] {
            let args = analytic_kernels::KernelArgs::new(m, x, 1.0)?;
            let d = (analytic_kernels::eval_j_closed(&args)
                - analytic_kernels::poisson_kernel_integral(m, x)?)
            .abs();
            worst_poisson = worst_poisson.max(d);
        }
    }
    Ok(KernelReport {
        tol,
        worst_grid_deviation: worst,
        worst_poisson_deviation: worst_poisson,
        worst_case,
        pass: worst <= tol && worst_poisson <= tol,
    })
}

/// Both evaluation routes for a single `J(m, x, y)` case.
pub fn kernel_case(m: u32, x: f64, y: f64) -> Result<(f64, f64)> {
    let args = analytic_kernels::KernelArgs::new(m, x, y)?;
    Ok((
        analytic_kernels::eval_j_closed(&args),
        analytic_kernels::eval_j_quadrature(&args, 4096)?,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundoffDemo {
    /// `I_0/I` from the exact circulant route at N=101.
    pub dft_i0: f64,
    /// `I_0/I` from textbook LU on the same system (hardware-dependent).
    pub dense_i0: f64,
    pub dense_over_dft: f64,
    /// Relative deviation of the two routes at the well-conditioned N=81
    /// control configuration.
    pub control_rel_dev: f64,
}

/// Demonstrate that at N=101 the two algebraically identical routes diverge
/// through roundoff, while at N=81 they still agree.
pub fn roundoff_demo() -> Result<RoundoffDemo> {
    let p101 = ExteriorCircularProblem::new(8.0, 10.0, 5.5, 101, Scheme::Bounded)?;
    let dft = p101.currents(SolverRoute::DftExact)?.currents[0];
    let dense = p101.currents(SolverRoute::Dense)?.currents[0];
    let p81 = fig2_problem();
    let c_dft = p81.currents(SolverRoute::DftExact)?.currents[0];
    let c_dense = p81.currents(SolverRoute::Dense)?.currents[0];
    Ok(RoundoffDemo {
        dft_i0: dft,
        dense_i0: dense,
        dense_over_dft: dense / dft,
        control_rel_dev: ((c_dense - c_dft) / c_dft).abs(),
    })
}

/// Right-hand-side noise experiment; only meaningful for the exterior
/// circular problem, whose insensitivity mechanism it demonstrates.
pub fn perturb(config: &ScenarioConfig, noise_rel: f64, seed: u64) -> Result<PerturbationReport> {
    match &config.problem {
        ProblemSpec::Exterior(p) => p.perturbation_experiment(noise_rel, seed),
        _ => Err(Error::Config(
            "the perturbation experiment is defined for the exterior circular problem".into(),
        )),
    }
}
