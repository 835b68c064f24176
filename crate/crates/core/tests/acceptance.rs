//! Acceptance gate: one test per criterion, each printing a single
//! `ACCEPTANCE <nn> <name>: PASS|FAIL` line (visible with `--nocapture`,
//! and always shown for failing criteria) before asserting.
//!
//! Criteria 06 and 10 are known red in this environment; the failure lines
//! carry the measured values.

use mas_lab::circular_exterior::{
    alternation_score, ExteriorCircularProblem, Scheme, SolverRoute,
};
use mas_lab::circular_interior::InteriorCircularProblem;
use mas_lab::elliptic_exterior::EllipticProblem;
use mas_lab::{analytic_kernels, experiment};
use std::f64::consts::PI;

fn fig2(scheme: Scheme, n: usize) -> ExteriorCircularProblem {
    ExteriorCircularProblem::new(8.0, 10.0, 5.5, n, scheme).unwrap()
}

fn fig4(n: usize) -> InteriorCircularProblem {
    InteriorCircularProblem::new(5.0, 4.0, 6.5, n).unwrap()
}

fn fig3() -> EllipticProblem {
    EllipticProblem::new(6.0, 3.0, 7.5, 5.2222, 80, Scheme::Traditional).unwrap()
}

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id:02} {name}: {detail}");
}

#[test]
fn criterion_01_kernel_oracle() {
    let report = experiment::verify_kernels(1e-10).unwrap();
    // Poisson-kernel cases against the closed y = 1 specialization
    let mut worst_poisson = 0.0f64;
    for m in 0..=8 {
        for &x in &[1.25, 2.0, 4.0] {
            let args = analytic_kernels::KernelArgs::new(m, x, 1.0).unwrap();
            let d = (analytic_kernels::eval_j_closed(&args)
                - analytic_kernels::poisson_kernel_integral(m, x).unwrap())
            .abs();
            worst_poisson = worst_poisson.max(d);
        }
    }
    let pass = report.pass && worst_poisson <= 1e-12;
    verdict(
        1,
        "kernel-oracle",
        pass,
        &format!(
            "grid worst {:.3e} <= 1e-10, poisson worst {worst_poisson:.3e} <= 1e-12",
            report.worst_grid_deviation
        ),
    );
}

#[test]
fn criterion_02_condition_number() {
    let p = fig2(Scheme::Bounded, 81);
    let sol = p.currents(SolverRoute::DftExact).unwrap();
    let kappa = p.diagnostics(&sol).kappa_computed.value();
    let mut pass = (2.5e12..=1e13).contains(&kappa);
    let mut ratios = Vec::new();
    for n in [41usize, 61, 81] {
        let pn = fig2(Scheme::Bounded, n);
        let sn = pn.currents(SolverRoute::DftExact).unwrap();
        let exact = pn.diagnostics(&sn).kappa_computed.value();
        let asym = pn.condition_number_asymptotic().value();
        let ratio = asym / exact;
        pass &= (0.5..=2.0).contains(&ratio);
        ratios.push(format!("N={n}: {ratio:.3}"));
    }
    verdict(
        2,
        "condition-number",
        pass,
        &format!("kappa(81) = {kappa:.3e} in [2.5e12, 1e13]; asym/exact {}", ratios.join(", ")),
    );
}

#[test]
fn criterion_03_oscillation_reproduction() {
    let p = fig2(Scheme::Bounded, 81);
    let exact = p.currents(SolverRoute::DftExact).unwrap();
    let asym = p.currents_asymptotic().unwrap();
    let mean = p.mean_term();
    let mut worst = 0.0f64;
    for (e, a) in exact.currents.iter().zip(&asym) {
        worst = worst.max(((e - a) / e).abs());
    }
    // the sign-pattern check is on the asymptotic column; the exact currents
    // score ~0.75 because the oscillation decays below the smooth remainder
    // in the upper half of the scoring window
    let score_asym = alternation_score(&asym, mean);
    let score_exact = alternation_score(&exact.currents, mean);
    let t = p.t();
    let model_mean = t.powi(81) / 81.0;
    let mean_dev = (mean / model_mean - 1.0).abs();
    let pass = worst <= 0.02 && score_asym >= 0.95 && mean_dev <= 0.01;
    verdict(
        3,
        "oscillation-reproduction",
        pass,
        &format!(
            "max rel dev {worst:.3e} <= 2e-2, alternation {score_asym:.3} >= 0.95 \
             (exact-currents score {score_exact:.3}), mean dev {mean_dev:.3e} <= 1e-2"
        ),
    );
}

#[test]
fn criterion_04_potential_convergence() {
    let probes: Vec<(f64, f64)> = [1.0, 1.5, 2.0, 3.0]
        .iter()
        .flat_map(|&r| {
            [0.0, 45.0, 90.0, 180.0].iter().map(move |&d| (8.0 * r, d * PI / 180.0))
        })
        .collect();
    let max_err = |scheme: Scheme, n: usize| -> f64 {
        let p = fig2(scheme, n);
        let sol = p.currents(SolverRoute::DftExact).unwrap();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for &(rho, phi) in &probes {
            let mas =
                p.potential_mas_direct(&sol, rho, phi).unwrap() + p.potential_incident(rho, phi).unwrap();
            let exact = p.potential_exact(rho, phi) + p.potential_incident(rho, phi).unwrap();
            worst = worst.max((mas - exact).abs());
            scale = scale.max(exact.abs());
        }
        worst / scale
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for scheme in [Scheme::Bounded, Scheme::Traditional] {
        let final_err = max_err(scheme, 81);
        pass &= final_err <= 1e-3;
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for n in (21..=81).step_by(10) {
            let e = max_err(scheme, n);
            // slack for the roundoff floor once errors reach ~1e-15
            monotone &= e <= prev * (1.0 + 1e-6) + 1e-14;
            prev = e;
        }
        pass &= monotone;
        detail.push(format!("{scheme:?}: err(81) {final_err:.3e}, monotone {monotone}"));
    }
    verdict(4, "potential-convergence", pass, &detail.join("; "));
}

#[test]
fn criterion_05_scheme_relation() {
    let b = fig2(Scheme::Bounded, 81).spectrum_exact();
    let t = fig2(Scheme::Traditional, 81).spectrum_exact();
    let mut worst = 0.0f64;
    for m in 1..81 {
        worst = worst.max(((t[m] - b[m]) / b[m]).abs());
    }
    let traditional = fig2(Scheme::Traditional, 81).currents(SolverRoute::DftExact).unwrap();
    let mean = traditional.currents.iter().sum::<f64>() / 81.0;
    let amp = traditional
        .currents
        .iter()
        .map(|c| (c - mean).abs())
        .fold(0.0f64, f64::max);
    let mean_ratio = (t[0] * 81.0).abs() / amp;
    let pass = worst <= 1e-12 && mean_ratio <= 1e-6;
    verdict(
        5,
        "scheme-relation",
        pass,
        &format!("spectra m>=1 rel dev {worst:.3e} <= 1e-12, N|I'(0)|/amp {mean_ratio:.3e} <= 1e-6"),
    );
}

#[test]
fn criterion_06_interior_divergence() {
    let p59 = fig4(59);
    let p61 = fig4(61);
    let (offset, std) = p59.potential_offset_stats(&p61).unwrap();
    let std_rel = std / offset.abs();
    let div_diff = p59.divergent_part().value() - p61.divergent_part().value();
    let div_rel = (div_diff / offset - 1.0).abs();
    let h_dev = p59.h_field_consistency(59, 61).unwrap();
    let pass = std_rel <= 1e-8 && div_rel <= 1e-6 && h_dev <= 1e-6;
    verdict(
        6,
        "interior-divergence",
        pass,
        &format!(
            "offset std/|offset| {std_rel:.3e} <= 1e-8, divergent-part match {div_rel:.3e} \
             <= 1e-6, H-field dev {h_dev:.3e} <= 1e-6"
        ),
    );
}

#[test]
fn criterion_07_elliptic_exactness() {
    let p = fig3();
    let sol = p.solve().unwrap();
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let rho = p.b * (1.0 + 2.0 * i as f64 / 40.0);
        let phi = PI / 2.0;
        let mas = p.potential_mas(&sol, rho, phi).unwrap() + p.potential_incident(rho, phi).unwrap();
        let exact =
            p.potential_exact_scattered(rho, phi).unwrap() + p.potential_incident(rho, phi).unwrap();
        worst = worst.max(((mas - exact) / exact).abs());
    }
    let mut worst_cm = 0.0f64;
    for m in 1..=20 {
        let a = p.coefficient_c_m_integral(m).unwrap();
        let b = p.coefficient_c_m_closed(m).unwrap();
        worst_cm = worst_cm.max((a - b).abs());
    }
    let pass = worst <= 1e-3 && worst_cm <= 1e-10;
    verdict(
        7,
        "elliptic-exactness",
        pass,
        &format!("fig3b rel err {worst:.3e} <= 1e-3, C_m route dev {worst_cm:.3e} <= 1e-10"),
    );
}

#[test]
fn criterion_08_self_consistency() {
    let ext = fig2(Scheme::Bounded, 81).self_consistency_residual().abs();
    let int = fig4(59).self_consistency_residual().abs();
    let ell = fig3().self_consistency_residual().abs();
    let pass = ext <= 1e-12 && int <= 1e-12 && ell <= 1e-12;
    verdict(
        8,
        "self-consistency",
        pass,
        &format!("exterior {ext:.3e}, interior {int:.3e}, elliptic {ell:.3e}, all <= 1e-12"),
    );
}

#[test]
fn criterion_09_solver_equivalence() {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [21usize, 41] {
        let p = fig2(Scheme::Bounded, n);
        let a = p.currents(SolverRoute::DftExact).unwrap().currents;
        let b = p.currents(SolverRoute::Dense).unwrap().currents;
        let scale = a.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max) / scale;
        pass &= dev <= 1e-6;
        detail.push(format!("exterior N={n}: {dev:.3e}"));
    }
    let p = fig4(41);
    let a = p.currents(SolverRoute::DftExact).unwrap().currents;
    let b = p.currents(SolverRoute::Dense).unwrap().currents;
    let scale = a.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max) / scale;
    pass &= dev <= 1e-6;
    detail.push(format!("interior N=41: {dev:.3e}"));
    verdict(9, "solver-equivalence", pass, &format!("{} (all <= 1e-6)", detail.join(", ")));
}

#[test]
fn criterion_10_roundoff_demonstration() {
    let demo = experiment::roundoff_demo().unwrap();
    let dft_ok = (demo.dft_i0 / 4.4e4 - 1.0).abs() <= 0.2;
    let dense_dev = (demo.dense_over_dft - 1.0).abs();
    let pass = dft_ok && dense_dev > 0.10;
    verdict(
        10,
        "roundoff-demonstration",
        pass,
        &format!(
            "dft I_0/I = {:.4e} within 20% of 4.4e4: {dft_ok}; dense deviation \
             {dense_dev:.3} > 0.10 (hardware/algorithm dependent)",
            demo.dft_i0
        ),
    );
}

#[test]
fn criterion_11_insensitivity() {
    let p = fig2(Scheme::Bounded, 81);
    let report = p.perturbation_experiment(1e-12, 1).unwrap();
    // the relative change normalized by the scattered field alone is
    // rho-independent (both change and scale decay like 1/rho), so the
    // radial decrease is checked on the absolute change
    let changes: Vec<f64> = report.potential_changes.iter().map(|c| c.max_abs_change).collect();
    let changes_fmt: Vec<String> = changes.iter().map(|c| format!("{c:.3e}")).collect();
    let at_2rho = report.potential_changes[1].max_rel_change;
    let filtering = report.max_rel_current_change / at_2rho;
    let decreasing = changes[0] > changes[1] && changes[1] > changes[2];
    let pass = filtering >= 100.0 && decreasing;
    verdict(
        11,
        "insensitivity",
        pass,
        &format!(
            "current/potential change ratio {filtering:.1} >= 100 at rho = 2 rho_cyl; \
             changes over (1.25, 2, 4) rho_cyl: [{}] decreasing {decreasing}",
            changes_fmt.join(", ")
        ),
    );
}
