//! Acceptance suite: ten criteria, one line each.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use tw_cli::config::{Command, Overrides};
use tw_core::basis::{Basis, ManifoldSpec, RadialSpec, RadialWeight, SphereSpec, TorusSpec};
use tw_core::experiments::{
    anisotropic_identities, assemble_sweep, gn_gate, gn_scan, negative_energy_construction, perturbation_study,
    sweep_point, GaussianBump, NegativeEnergyOptions, PlaneOptions,
};
use tw_core::minimizer::{minimize, Classification, Constraint, Equation, MinimizeResult, ProblemSpec, Scheme};
use tw_core::operators::{build_harmonic_rep, l_alpha_from_reps, x_eigenstructure, HarmonicSpaceRep, KillingSpec};
use tw_core::radial::{archetype_suite, minimize_radial};

type Verdict = Result<String, String>;

fn torus(n: usize, period: f64, points: usize) -> ManifoldSpec {
    ManifoldSpec::Torus(TorusSpec::new(n, period, points))
}

fn half_line(r_max: f64, intervals: usize) -> RadialSpec {
    RadialSpec::new(1, r_max, intervals, RadialWeight::Constant { value: 1.0 })
}

fn reps() -> Vec<HarmonicSpaceRep> {
    let pairs: Vec<(usize, usize)> = [2, 3, 4].iter().flat_map(|&n| (0..=10).map(move |k| (n, k))).collect();
    pairs.par_iter().map(|&(n, k)| build_harmonic_rep(n, k, [0, 1]).unwrap()).collect()
}

fn spectral_lemma(reps: &[HarmonicSpaceRep]) -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [2usize, 3, 4] {
        let own: Vec<HarmonicSpaceRep> = reps.iter().filter(|r| r.n == n).cloned().collect();
        let top = n as f64 - 1.0;
        for alpha in [0.0, 0.5, top - 1e-6, top, top + 0.5] {
            let l = l_alpha_from_reps(&own, alpha).map_err(|e| e.to_string())?;
            worst = worst.max(l.max_error);
            if l.max_error > 1e-8 {
                return Err(format!("n={n} alpha={alpha}: eigenvalue error {:e}", l.max_error));
            }
            if alpha <= top && !l.semidefinite {
                return Err(format!("n={n} alpha={alpha}: negative eigenvalue at k={:?}", l.first_negative_k));
            }
            if alpha > top && l.first_negative_k.is_none() {
                return Err(format!("n={n} alpha={alpha}: no negative eigenvalue for k <= 10"));
            }
        }
    }
    Ok(format!("15 (n, alpha) pairs, k <= 10, max error {worst:.1e}"))
}

fn eigenstructure(reps: &[HarmonicSpaceRep]) -> Verdict {
    let eig: Vec<_> = reps
        .par_iter()
        .filter(|r| r.k > 0)
        .map(x_eigenstructure)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for x in &eig {
        let k = x.k as f64;
        if x.max_integer_defect > 1e-8 || x.max_modulus > k + 1e-8 {
            return Err(format!("n={} k={}: defect {:e}, modulus {}", x.n, x.k, x.max_integer_defect, x.max_modulus));
        }
        if !x.eigenvalues.iter().any(|m| (m - k).abs() <= 1e-8) || x.highest_weight_distance > 1e-8 {
            return Err(format!("n={} k={}: ik eigenvector off by {:e}", x.n, x.k, x.highest_weight_distance));
        }
        worst = worst.max(x.max_integer_defect).max(x.highest_weight_distance);
    }
    Ok(format!("{} spaces V_k, worst defect {worst:.1e}", eig.len()))
}

enum Run {
    Compact(ManifoldSpec, KillingSpec, ProblemSpec),
    Radial(RadialSpec, ProblemSpec),
}

fn baseline_suite() -> Vec<(&'static str, Run)> {
    use Constraint::{LpPlusOne, Mass};
    use Equation::{Nlkg, Nls};
    use Scheme::{EnergyMin, FMin};
    let pr = |eq, p, c, s| ProblemSpec::new(eq, p, c, s).with_seed(5);
    let x1 = KillingSpec::torus(&[0.3]);
    let x2 = KillingSpec::torus(&[0.3, 0.2]);
    let rot = KillingSpec::rotation(0.5);
    let s2 = ManifoldSpec::Sphere(SphereSpec::new(2, 12));
    let s2_small = ManifoldSpec::Sphere(SphereSpec::new(2, 10));
    let mut half_line_fmin = pr(Nlkg, 3.0, LpPlusOne { a: 1.0 }, FMin);
    half_line_fmin.n_random_starts = 1;
    let mut half_line_energy = pr(Nls, 3.0, Mass { beta: 2.0 }, EnergyMin);
    half_line_energy.n_random_starts = 1;
    vec![
        ("T1 NLS F", Run::Compact(torus(1, 8.0, 64), x1.clone(), pr(Nls, 3.0, LpPlusOne { a: 1.0 }, FMin).with_lambda(1.0))),
        ("T1 NLS E", Run::Compact(torus(1, 8.0, 64), x1.clone(), pr(Nls, 3.0, Mass { beta: 1.0 }, EnergyMin))),
        ("T1 NLKG F", Run::Compact(torus(1, 8.0, 64), x1.clone(), pr(Nlkg, 3.0, LpPlusOne { a: 1.0 }, FMin))),
        ("T1 NLKG E", Run::Compact(torus(1, 8.0, 64), x1, pr(Nlkg, 3.0, Mass { beta: 1.0 }, EnergyMin))),
        ("T2 NLS F", Run::Compact(torus(2, 4.0, 16), x2.clone(), pr(Nls, 2.0, LpPlusOne { a: 1.0 }, FMin).with_lambda(1.0))),
        ("T2 NLS E", Run::Compact(torus(2, 4.0, 16), x2.clone(), pr(Nls, 2.0, Mass { beta: 1.0 }, EnergyMin))),
        ("T2 NLKG F", Run::Compact(torus(2, 4.0, 16), x2.clone(), pr(Nlkg, 2.0, LpPlusOne { a: 1.0 }, FMin))),
        ("T2 NLKG E", Run::Compact(torus(2, 4.0, 16), x2, pr(Nlkg, 2.0, Mass { beta: 1.0 }, EnergyMin))),
        ("S2 NLKG F", Run::Compact(s2, rot.clone(), pr(Nlkg, 3.0, LpPlusOne { a: 1.0 }, FMin))),
        ("S2 NLS E", Run::Compact(s2_small, rot, pr(Nls, 2.0, Mass { beta: 1.0 }, EnergyMin))),
        ("R+ NLKG F", Run::Radial(half_line(16.0, 320), half_line_fmin)),
        ("R+ NLS E", Run::Radial(half_line(24.0, 384), half_line_energy)),
    ]
}

fn euler_lagrange() -> Verdict {
    let suite = baseline_suite();
    let results: Vec<(&str, Result<MinimizeResult, String>)> = suite
        .par_iter()
        .map(|(label, run)| {
            let r = match run {
                Run::Compact(m, x, p) => {
                    Basis::new(m.clone()).and_then(|b| minimize(p, &b, x, &[])).map_err(|e| e.to_string())
                }
                Run::Radial(spec, p) => {
                    minimize_radial(p, spec, &KillingSpec::Zero).map(|r| r.result).map_err(|e| e.to_string())
                }
            };
            (*label, r)
        })
        .collect();
    let (mut worst_res, mut worst_imag): (f64, f64) = (0.0, 0.0);
    for (label, r) in &results {
        let r = r.as_ref().map_err(|e| format!("{label}: {e}"))?;
        if !r.converged || r.residual >= 1e-6 || r.multiplier_imag.abs() >= 1e-8 {
            return Err(format!(
                "{label}: converged {}, residual {:e}, imag {:e}",
                r.converged, r.residual, r.multiplier_imag
            ));
        }
        worst_res = worst_res.max(r.residual);
        worst_imag = worst_imag.max(r.multiplier_imag.abs());
    }
    Ok(format!("{} runs converged, max residual {worst_res:.1e}, max |Im mult| {worst_imag:.1e}", results.len()))
}

fn symmetry_breaking() -> Verdict {
    let (m, p, a, b) = (1.0, 3.0, 1.0, 0.5);
    let base = torus(1, 1.0, 16);
    let x = KillingSpec::torus(&[b]);
    let scales: Vec<f64> = (0..7).map(|j| f64::from(1u32 << j)).collect();
    let points = scales
        .par_iter()
        .map(|&s| sweep_point(&base, &x, m, p, a, s, 7, 2))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let sweep = assemble_sweep(&points, 1, p);
    let broken = points.iter().find(|q| {
        q.minimized < q.constant_branch - 1e-8
            && q.minimized < q.printed_branch - 1e-8
            && matches!(q.classification, Classification::Travelling | Classification::StandingOnly)
    });
    let Some(broken) = broken else {
        return Err("no scale beats the constant branch with a nonconstant minimizer".into());
    };
    let printed_defect = points
        .iter()
        .map(|q| (q.printed_branch - q.constant_assembled).abs() / q.constant_assembled)
        .fold(0.0, f64::max);
    let detail = format!(
        "breaks at k = {} (F = {:.6} < {:.6}, {:?}); F at the constant vs m^2 A^(1/(p+1)) k^(np/(p+1)): \
         defect {:.2}, slope {:.6} vs np/(p+1) = {:.6}; vs m^2 A^(2/(p+1)) k^(n(p-1)/(p+1)): defect {:.1e}, \
         slope {:.6} vs {:.6}",
        broken.scale,
        broken.minimized,
        broken.printed_branch.min(broken.constant_branch),
        broken.classification,
        printed_defect,
        sweep.slope,
        sweep.printed_expected_slope,
        sweep.closed_form_defect,
        sweep.slope,
        sweep.expected_slope
    );
    if printed_defect > 1e-10 || (sweep.slope - sweep.printed_expected_slope).abs() > 1e-3 {
        return Err(detail);
    }
    Ok(detail)
}

fn scaling_identities() -> Verdict {
    let u = GaussianBump { amplitude: 1.0, widths: vec![1.0, 1.5] };
    let mut names: Vec<String> = Vec::new();
    let mut worst: f64 = 0.0;
    let mut floor_hits = 0;
    for r in [2.0, 4.0, 8.0] {
        for (sigma, a, b) in [(1.0, 1.0, 1.0), (1.0, 1.0, 0.5), (0.5, 2.0, 1.0)] {
            let rep = anisotropic_identities(&u, r, sigma, a, b, 3.0, &PlaneOptions::default()).map_err(|e| e.to_string())?;
            for l in &rep.laws {
                if l.fine_error > 1e-6 || !l.converges {
                    return Err(format!(
                        "r={r} ({sigma},{a},{b}) {}: errors {:e} -> {:e}",
                        l.name, l.coarse_error, l.fine_error
                    ));
                }
                floor_hits += usize::from(l.fine_error > l.coarse_error / 4.0);
                if !names.contains(&l.name) {
                    names.push(l.name.clone());
                }
            }
            worst = worst.max(rep.max_fine_error);
        }
    }
    if names.len() != 5 {
        return Err(format!("only laws {names:?} checked"));
    }
    Ok(format!(
        "laws {} at r in {{2,4,8}}, max error {worst:.1e}; {floor_hits} checks already at round-off on the coarse grid",
        names.join(", ")
    ))
}

fn negative_energy() -> Verdict {
    let mut out = Vec::new();
    for (n, p) in [(1usize, 2.0), (2, 2.0)] {
        let beta = 1.0;
        let rep = negative_energy_construction(n, p, beta, &NegativeEnergyOptions::default()).map_err(|e| e.to_string())?;
        let j = rep.first_negative.ok_or(format!("(n, p) = ({n}, {p}): energy stays positive"))?;
        let e = rep.steps[j].energy;
        if e >= 0.0 || e.is_nan() || rep.max_l2_defect > 1e-10 {
            return Err(format!("(n, p) = ({n}, {p}): energy {e}, mass defect {:e}", rep.max_l2_defect));
        }
        out.push(format!("({n},{p}): E = {e:.4} at s = {}, mass defect {:.1e}", rep.steps[j].s, rep.max_l2_defect));
    }
    Ok(out.join("; "))
}

fn classifier() -> Verdict {
    let basis = Basis::new(ManifoldSpec::Radial(half_line(512.0, 2048))).map_err(|e| e.to_string())?;
    let suite = archetype_suite(&basis, 3.0, 1.0, 8, 10, 42).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for s in &suite {
        if !s.passed() {
            return Err(format!("{}: {:?} instead of {:?}", s.label, s.report.verdict, s.expected));
        }
        if let (Some(m), Some(ws)) = (s.inner_mass, &s.report.splitting) {
            for w in ws {
                if (w.alpha - m).abs() >= 2.0 * w.epsilon {
                    return Err(format!("{}: alpha {} against {m} at eps {}", s.label, w.alpha, w.epsilon));
                }
                worst = worst.max((w.alpha - m).abs() / w.epsilon);
            }
        }
    }
    Ok(format!("{}/{} verdicts match, splitting |alpha - inner| <= {worst:.2} eps", suite.len(), suite.len()))
}

fn perturbation() -> Verdict {
    let basis = Basis::new(torus(1, 8.0, 64)).map_err(|e| e.to_string())?;
    let mut pr = ProblemSpec::new(Equation::Nls, 3.0, Constraint::LpPlusOne { a: 1.0 }, Scheme::FMin).with_lambda(1.0);
    pr.seed = 3;
    pr.n_random_starts = 2;
    let rep = perturbation_study(
        &basis,
        &KillingSpec::torus(&[0.3]),
        &KillingSpec::torus(&[1.0]),
        &[1e-1, 1e-2, 1e-3],
        &pr,
        50,
    )
    .map_err(|e| e.to_string())?;
    let samples: usize = rep.bound.iter().map(|b| b.samples).sum();
    if rep.total_violations != 0 || !rep.monotone {
        return Err(format!("{} violations, sup-differences {:?}", rep.total_violations, rep.minimizers));
    }
    let diffs: Vec<String> = rep.minimizers.iter().map(|m| format!("{:.2e}", m.sup_diff)).collect();
    Ok(format!("0 violations in {samples} samples; sup-differences {}", diffs.join(" > ")))
}

fn gagliardo_nirenberg() -> Verdict {
    let mut rows = 0;
    for n in 1..=6u32 {
        for den in [1i64, 2, 3, 5, 7, 12] {
            for num in (den + 1)..=(10 * den) {
                let g = gn_gate(n, num, den).map_err(|e| e.to_string())?;
                if !g.agrees() {
                    return Err(format!("n={n} p={num}/{den}: gate disagrees"));
                }
                rows += 1;
            }
        }
    }
    let fields: Vec<(Arc<Basis>, KillingSpec)> = vec![
        (Basis::new(torus(1, 5.0, 64)).unwrap(), KillingSpec::torus(&[0.9])),
        (Basis::new(torus(2, 3.0, 16)).unwrap(), KillingSpec::torus(&[0.4, -0.2])),
        (Basis::new(ManifoldSpec::Sphere(SphereSpec::new(2, 6))).unwrap(), KillingSpec::rotation(0.7)),
    ];
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for (b, x) in &fields {
        for p in [1.5, 2.0, 3.0] {
            let rep = gn_scan(b, x, 0.3, 1.2, p, 20, 11).map_err(|e| e.to_string())?;
            worst = worst.max(rep.max_chain_defect);
            samples += rep.samples;
        }
    }
    if worst > 1e-10 {
        return Err(format!("form/energy identity off by {worst:e}"));
    }
    Ok(format!("{rows} exact gate rows agree; identity holds to {worst:.1e} on {samples} fields"))
}

const SUITES: &[(&str, Command, &str)] = &[
    ("verify-spectrum", Command::VerifySpectrum, include_str!("../../../configs/verify-spectrum.toml")),
    ("minimize-constant", Command::Minimize, include_str!("../../../configs/minimize-constant.toml")),
    ("minimize-half-line", Command::Minimize, include_str!("../../../configs/minimize-half-line.toml")),
    ("scale-experiment", Command::ScaleExperiment, include_str!("../../../configs/scale-experiment.toml")),
    ("perturb", Command::Perturb, include_str!("../../../configs/perturb.toml")),
    ("two-nonlinearity", Command::TwoNonlinearity, include_str!("../../../configs/two-nonlinearity.toml")),
    ("negative-energy", Command::NegativeEnergy, include_str!("../../../configs/negative-energy.toml")),
    ("cc-diagnose", Command::CcDiagnose, include_str!("../../../configs/cc-diagnose.toml")),
    ("gn-scan", Command::GnScan, include_str!("../../../configs/gn-scan.toml")),
    ("scaling-identities", Command::ScalingIdentities, include_str!("../../../configs/scaling-identities.toml")),
];

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (name, cmd, text) in SUITES {
        let first = tw_cli::execute(
            *cmd,
            text,
            &Overrides { output: Some(dir.path().join("a").join(name)), ..Default::default() },
        );
        let manifest = first.manifest.as_ref().ok_or(format!("{name}: no manifest ({:?})", first.messages))?;
        let echoed = std::fs::read_to_string(manifest).map_err(|e| e.to_string())?;
        let second = tw_cli::execute(
            *cmd,
            &echoed,
            &Overrides { output: Some(dir.path().join("b").join(name)), threads: Some(1), ..Default::default() },
        );
        if first.exit_code != second.exit_code {
            return Err(format!("{name}: exit codes {} and {}", first.exit_code, second.exit_code));
        }
        for (fa, fb) in first.files.iter().zip(&second.files) {
            if fa.extension().is_some_and(|e| e == "toml") {
                continue;
            }
            let (a, b) = (std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap());
            if a != b || fa.file_name() != fb.file_name() {
                return Err(format!("{name}: {} differs on rerun", fa.display()));
            }
            compared += 1;
        }
    }
    Ok(format!("{} suites rerun from their manifests on one thread; {compared} tables and summaries bit-identical", SUITES.len()))
}

fn main() {
    let started = Instant::now();
    let t = Instant::now();
    let reps = reps();
    let build = t.elapsed().as_secs_f64();
    let mut results: Vec<(usize, &str, Verdict, f64)> = Vec::new();
    let mut record = |id: usize, name: &'static str, f: &dyn Fn() -> Verdict, extra: f64| {
        let t = Instant::now();
        let v = f();
        results.push((id, name, v, t.elapsed().as_secs_f64() + extra));
        let (id, name, v, secs) = results.last().unwrap();
        let (tag, msg) = match v {
            Ok(m) => ("PASS", m.as_str()),
            Err(m) => ("FAIL", m.as_str()),
        };
        println!("criterion {id:>2} [{tag}] {name} ({secs:.1} s): {msg}");
    };
    record(1, "spectral lemma", &|| spectral_lemma(&reps), build);
    record(2, "eigenstructure of X", &|| eigenstructure(&reps), 0.0);
    record(3, "Euler-Lagrange residuals", &euler_lagrange, 0.0);
    record(4, "symmetry breaking", &symmetry_breaking, 0.0);
    record(5, "scaling identities", &scaling_identities, 0.0);
    record(6, "negative-energy construction", &negative_energy, 0.0);
    record(7, "concentration-compactness classifier", &classifier, 0.0);
    record(8, "perturbation study", &perturbation, 0.0);
    record(9, "Gagliardo-Nirenberg gate", &gagliardo_nirenberg, 0.0);
    record(10, "determinism", &determinism, 0.0);

    let limits = [(1, 60.0), (2, 30.0), (3, 600.0)];
    let mut failed = 0;
    for (id, name, v, secs) in &results {
        let slow = limits.iter().any(|(i, lim)| i == id && secs > lim);
        if v.is_err() || slow {
            failed += 1;
            if slow {
                println!("criterion {id:>2} [FAIL] {name}: runtime {secs:.1} s over its limit");
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
