//! One function per subcommand; each turns a resolved config into a report.

use std::sync::Arc;

use rayon::prelude::*;
use tw_core::basis::{Basis, ManifoldSpec};
use tw_core::experiments::{
    anisotropic_identities, assemble_sweep, gn_gate, gn_scan, negative_energy_construction, perturbation_study,
    sweep_point, two_nonlinearity_minimize, GaussianBump,
};
use tw_core::minimizer::{minimize, MinimizeResult};
use tw_core::operators::{build_harmonic_rep, l_alpha_from_reps, x_eigenstructure, HarmonicSpaceRep};
use tw_core::radial::{
    archetype_suite, check_vanish_criteria, estimate_i_beta, lemma_l1_check, minimize_radial, technical_assumption,
};
use tw_core::Error;

use crate::config::{
    CcExperiment, Command, Experiment, GnExperiment, IdentitiesExperiment, NegativeEnergyExperiment, PerturbExperiment,
    Resolved, SpectrumExperiment, SweepExperiment, TwoExperiment,
};
use crate::output::{Cell, Report, Table};

/// Agreement required of computed eigenvalues with their closed forms.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Largest relative PDE residual accepted from a converged minimizer.
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const SLOPE_TOL: f64 = 1e-3;
pub const CHAIN_TOL: f64 = 1e-10;

/// Why a command stopped without a report.
#[derive(Debug)]
pub enum Failure {
    /// The configuration asks for something the solver refuses; exit 2.
    Refused(String),
    /// The computation itself failed; exit 1.
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::IncompatibleKilling(_)
            | Error::ParameterRegime(_)
            | Error::SubspaceEmpty { .. }
            | Error::NoPositiveConstant(_)
            | Error::DomainOverflow(_)
            | Error::InvalidPerturbation(_)
            | Error::GridTooCoarse(_)
            | Error::InsufficientData(_)
            | Error::MissingEntry(_)
            | Error::Geometry(_) => Self::Refused(e.to_string()),
            _ => Self::Failed(e.to_string()),
        }
    }
}

type Outcome = Result<Report, Failure>;

pub fn run(r: &Resolved) -> Outcome {
    match (&r.experiment, r.command) {
        (Experiment::Spectrum(e), _) => verify_spectrum(e),
        (Experiment::None, Command::Minimize) => minimize_cmd(r),
        (Experiment::Sweep(e), _) => scale_experiment(r, e),
        (Experiment::Perturb(e), _) => perturb(r, e),
        (Experiment::Two(e), _) => two_nonlinearity(r, e),
        (Experiment::NegativeEnergy(e), _) => negative_energy(e),
        (Experiment::Cc(e), _) => cc_diagnose(r, e),
        (Experiment::Gn(e), _) => gn(r, e),
        (Experiment::Identities(e), _) => scaling_identities(e),
        (Experiment::None, c) => Err(Failure::Refused(format!("{} needs an experiment block", c.name()))),
    }
}

fn basis_of(r: &Resolved) -> Result<Arc<Basis>, Failure> {
    let spec = r.manifold.clone().ok_or_else(|| Failure::Refused("no [manifold] block".into()))?;
    Ok(Basis::new(spec)?)
}

fn verify_spectrum(e: &SpectrumExperiment) -> Outcome {
    let mut rep = Report::default();
    let pairs: Vec<(usize, usize)> = e.dims.iter().flat_map(|&n| (0..=e.k_max).map(move |k| (n, k))).collect();
    let reps: Vec<HarmonicSpaceRep> =
        pairs.par_iter().map(|&(n, k)| build_harmonic_rep(n, k, [0, 1])).collect::<Result<_, _>>()?;
    let mut table = Table::new(
        "l_alpha",
        &["n", "alpha", "k", "dim", "min_eigenvalue", "predicted_min", "error", "kernel_dim"],
    );
    let mut max_error: f64 = 0.0;
    for &n in &e.dims {
        let own: Vec<HarmonicSpaceRep> = reps.iter().filter(|h| h.n == n).cloned().collect();
        let top = n as f64 - 1.0;
        let alphas = e.alphas.iter().copied().chain(e.alpha_offsets.iter().map(|o| top + o));
        for alpha in alphas {
            let l = l_alpha_from_reps(&own, alpha)?;
            for row in &l.rows {
                table.push(vec![
                    n.into(),
                    alpha.into(),
                    row.k.into(),
                    row.dim.into(),
                    row.min_eigenvalue.into(),
                    row.predicted_min.into(),
                    row.error.into(),
                    row.kernel_dim.into(),
                ]);
            }
            max_error = max_error.max(l.max_error);
            let verdict = match (l.semidefinite, l.nonstrict_bound) {
                (true, true) => "semidefinite, as predicted for |alpha| <= n-1".to_string(),
                (false, false) => format!(
                    "not semidefinite, as predicted for alpha > n-1 (first negative at k = {})",
                    l.first_negative_k.unwrap_or(0)
                ),
                (true, false) => format!("semidefinite up to k = {}, against the prediction", e.k_max),
                (false, true) => "not semidefinite, against the prediction".to_string(),
            };
            rep.messages.push(format!("n = {n}, alpha = {alpha}: {verdict}"));
            rep.check(
                &format!("L_alpha n={n} alpha={alpha}"),
                l.agrees_with_lemma && l.max_error <= SPECTRUM_TOL,
                format!("{verdict}; max error {:e}", l.max_error),
            );
        }
    }
    rep.value("max_error", max_error);
    rep.tables.push(table);

    if e.eigenstructure {
        let mut t = Table::new(
            "x_eigen",
            &["n", "k", "dim", "max_integer_defect", "max_modulus", "highest_weight_distance"],
        );
        let eig: Vec<_> =
            reps.par_iter().filter(|h| h.k > 0).map(x_eigenstructure).collect::<Result<Vec<_>, _>>()?;
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for x in &eig {
            let kf = x.k as f64;
            let top = x.eigenvalues.iter().any(|m| (m - kf).abs() <= SPECTRUM_TOL);
            ok &= x.max_integer_defect <= SPECTRUM_TOL
                && x.max_modulus <= kf + SPECTRUM_TOL
                && top
                && x.highest_weight_distance <= SPECTRUM_TOL;
            worst = worst.max(x.max_integer_defect).max(x.highest_weight_distance);
            t.push(vec![
                x.n.into(),
                x.k.into(),
                x.eigenvalues.len().into(),
                x.max_integer_defect.into(),
                x.max_modulus.into(),
                x.highest_weight_distance.into(),
            ]);
        }
        rep.value("x_eigen_worst_defect", worst);
        rep.check("X eigenstructure", ok, format!("integer, |mu| <= k, ik present; worst defect {worst:e}"));
        rep.tables.push(t);
    }
    Ok(rep)
}

fn result_tables(rep: &mut Report, r: &MinimizeResult) {
    let mut d = Table::new("descent", &["iteration", "objective"]);
    for (i, v) in r.descent_log.iter().enumerate() {
        d.push(vec![i.into(), (*v).into()]);
    }
    let mut s = Table::new("starts", &["label", "objective", "iterations", "converged", "x_norm"]);
    for st in &r.starts {
        s.push(vec![
            st.label.clone().into(),
            st.objective.into(),
            st.iterations.into(),
            st.converged.into(),
            st.x_norm.into(),
        ]);
    }
    rep.tables.push(d);
    rep.tables.push(s);
    rep.value("objective", r.objective);
    rep.value("multiplier", r.multiplier);
    rep.value("multiplier_imag", r.multiplier_imag);
    rep.value("residual", r.residual);
    rep.value("x_norm", r.x_norm);
    rep.value("classification", r.classification);
    rep.value("iterations", r.iterations);
    rep.value("converged", r.converged);
    rep.value("constraint_defect", r.constraint_defect);
    rep.messages.push(format!(
        "objective {:.12e}, classification {:?}, residual {:.3e}",
        r.objective, r.classification, r.residual
    ));
}

fn minimize_cmd(r: &Resolved) -> Outcome {
    let problem = r.problem.as_ref().expect("resolved minimize has a problem");
    let mut rep = Report::default();
    if let Some(ManifoldSpec::Radial(spec)) = &r.manifold {
        match minimize_radial(problem, spec, &r.killing) {
            Ok(radial) => {
                result_tables(&mut rep, &radial.result);
                rep.value("doubled_objective", radial.doubled_objective);
                rep.value("relative_change", radial.relative_change);
                rep.value("x_acts_trivially", radial.x_acts_trivially);
                rep.messages.extend(radial.warnings.iter().cloned());
                rep.check(
                    "residual",
                    radial.result.residual < RESIDUAL_TOL,
                    format!("{:e}", radial.result.residual),
                );
                rep.document("result", &radial);
                return Ok(rep);
            }
            Err(Error::NonConverged(best)) => return Ok(non_converged(rep, *best)),
            Err(e) => return Err(e.into()),
        }
    }
    let basis = basis_of(r)?;
    match minimize(problem, &basis, &r.killing, &[]) {
        Ok(res) => {
            result_tables(&mut rep, &res);
            rep.check("residual", res.residual < RESIDUAL_TOL, format!("{:e}", res.residual));
            rep.document("result", &res);
            Ok(rep)
        }
        Err(Error::NonConverged(best)) => Ok(non_converged(rep, *best)),
        Err(e) => Err(e.into()),
    }
}

fn non_converged(mut rep: Report, best: MinimizeResult) -> Report {
    result_tables(&mut rep, &best);
    rep.non_converged = true;
    rep.messages.push(format!("did not converge in {} iterations; best iterate written", best.iterations));
    rep.document("result", &best);
    rep
}

fn scale_experiment(r: &Resolved, e: &SweepExperiment) -> Outcome {
    let base = r.manifold.as_ref().expect("resolved sweep has a manifold");
    let points = e
        .scales
        .par_iter()
        .map(|&s| sweep_point(base, &r.killing, e.m_mass, e.p, e.a, s, r.seed, e.n_random_starts))
        .collect::<Result<Vec<_>, _>>()?;
    let sweep = assemble_sweep(&points, base.dim(), e.p);
    let mut t = Table::new(
        "sweep",
        &[
            "scale",
            "volume",
            "constant_branch",
            "constant_assembled",
            "printed_branch",
            "minimized",
            "x_norm",
            "classification",
            "converged",
            "residual",
            "breaks_symmetry",
        ],
    );
    for q in &points {
        t.push(vec![
            q.scale.into(),
            q.volume.into(),
            q.constant_branch.into(),
            q.constant_assembled.into(),
            q.printed_branch.into(),
            q.minimized.into(),
            q.x_norm.into(),
            format!("{:?}", q.classification).to_lowercase().into(),
            q.converged.into(),
            q.residual.into(),
            q.breaks_symmetry.into(),
        ]);
    }
    let printed_defect = points
        .iter()
        .map(|q| (q.constant_assembled - q.printed_branch).abs() / q.constant_assembled.abs())
        .fold(0.0, f64::max);
    let increasing = sweep.constant_branch.windows(2).all(|w| w[1] > w[0]);
    let mut rep = Report::default();
    rep.value("breaking_scale", sweep.breaking_scale);
    rep.value("closed_form_defect", sweep.closed_form_defect);
    rep.value("slope", sweep.slope);
    rep.value("expected_slope", sweep.expected_slope);
    rep.value("printed_branch_defect", printed_defect);
    rep.value("printed_slope", sweep.printed_slope);
    rep.value("printed_expected_slope", sweep.printed_expected_slope);
    rep.value("all_converged", sweep.all_converged);
    rep.check(
        "constant branch closed form",
        sweep.closed_form_defect <= CLOSED_FORM_TOL,
        format!("{:e}", sweep.closed_form_defect),
    );
    if e.scales.len() >= 2 {
        rep.check(
            "constant branch slope",
            (sweep.slope - sweep.expected_slope).abs() <= SLOPE_TOL,
            format!("{} against {}", sweep.slope, sweep.expected_slope),
        );
        rep.check("constant branch increasing", increasing, "grows with the scale");
    }
    rep.check("all converged", sweep.all_converged, "");
    match sweep.breaking_scale {
        Some(s) => rep.messages.push(format!("symmetry breaks at scale {s}")),
        None => rep.messages.push("no symmetry breaking over the swept scales".into()),
    }
    rep.tables.push(t);
    Ok(rep)
}

fn perturb(r: &Resolved, e: &PerturbExperiment) -> Outcome {
    let basis = basis_of(r)?;
    let problem = r.problem.as_ref().expect("resolved perturb has a problem");
    let study = perturbation_study(&basis, &r.killing, &e.x_pp, &e.eps, problem, e.n_fields)?;
    let mut rep = Report::default();
    let mut b = Table::new("bound", &["eps", "samples", "violations", "max_ratio"]);
    for row in &study.bound {
        b.push(vec![row.eps.into(), row.samples.into(), row.violations.into(), row.max_ratio.into()]);
    }
    let mut m = Table::new("minimizers", &["eps", "objective", "converged", "residual", "sup_diff"]);
    for row in &study.minimizers {
        m.push(vec![
            row.eps.into(),
            row.objective.into(),
            row.converged.into(),
            row.residual.into(),
            row.sup_diff.into(),
        ]);
    }
    rep.value("sup_x_pp", study.sup_x_pp);
    rep.value("total_violations", study.total_violations);
    rep.value("base_objective", study.base_objective);
    rep.value("monotone", study.monotone);
    rep.value("sup_diffs", study.minimizers.iter().map(|m| m.sup_diff).collect::<Vec<_>>());
    rep.check("form bound", study.total_violations == 0, format!("{} violations", study.total_violations));
    rep.check("sup-difference decreases with eps", study.monotone, "");
    rep.check("minimizers converged", study.minimizers.iter().all(|m| m.converged), "");
    rep.tables.push(b);
    rep.tables.push(m);
    Ok(rep)
}

fn two_nonlinearity(r: &Resolved, e: &TwoExperiment) -> Outcome {
    let basis = basis_of(r)?;
    let mut rep = Report::default();
    let out = two_nonlinearity_minimize(&basis, &r.killing, e.lambda, e.p, e.q, e.beta, e.n_random_starts, r.seed);
    let two = match out {
        Ok(t) => t,
        Err(Error::NonConverged(best)) => return Ok(non_converged(rep, *best)),
        Err(err) => return Err(err.into()),
    };
    result_tables(&mut rep, &two.result);
    rep.value("theta", two.theta);
    rep.value("exponent_ratio", two.exponent_ratio);
    rep.value("exponent_below_two", two.exponent_below_two);
    rep.messages.extend(two.warnings.iter().cloned());
    rep.check("residual", two.result.residual < RESIDUAL_TOL, format!("{:e}", two.result.residual));
    rep.document("result", &two);
    Ok(rep)
}

fn negative_energy(e: &NegativeEnergyExperiment) -> Outcome {
    let mut rep = Report::default();
    let mut t = Table::new("steps", &["n", "p", "j", "s", "l2", "lp1", "grad", "energy", "ratio"]);
    let mut cases = Vec::new();
    for c in &e.cases {
        let ne = negative_energy_construction(c.n, c.p, e.beta, &e.options)?;
        for (j, st) in ne.steps.iter().enumerate() {
            t.push(vec![
                c.n.into(),
                c.p.into(),
                j.into(),
                st.s.into(),
                st.l2.into(),
                st.lp1.into(),
                st.grad.into(),
                st.energy.into(),
                st.ratio.into(),
            ]);
        }
        let tag = format!("n={} p={}", c.n, c.p);
        let energy = ne.first_negative.map(|j| ne.steps[j].energy);
        rep.check(&format!("negative energy {tag}"), ne.first_negative.is_some(), format!("{energy:?}"));
        rep.check(
            &format!("mass preserved {tag}"),
            ne.max_l2_defect <= CLOSED_FORM_TOL * e.beta,
            format!("{:e}", ne.max_l2_defect),
        );
        rep.check(&format!("dilation laws {tag}"), ne.max_law_error <= RESIDUAL_TOL, format!("{:e}", ne.max_law_error));
        cases.push(serde_json::json!({
            "n": c.n,
            "p": c.p,
            "first_negative": ne.first_negative,
            "energy": energy,
            "max_l2_defect": ne.max_l2_defect,
            "max_law_error": ne.max_law_error,
        }));
    }
    rep.value("cases", cases);
    rep.tables.push(t);
    Ok(rep)
}

fn cc_diagnose(r: &Resolved, e: &CcExperiment) -> Outcome {
    let Some(ManifoldSpec::Radial(spec)) = &r.manifold else {
        return Err(Failure::Refused("cc-diagnose needs a radial manifold".into()));
    };
    let mut rep = Report::default();
    let vanish = check_vanish_criteria(spec)?;
    rep.value("vanish_integral_test", vanish.integral_test.holds);
    rep.value("vanish_growth_test", vanish.growth_test.holds);
    rep.value("a_min", vanish.a_min);
    rep.value("a_below_lower_bound", vanish.below_lower_bound);
    if vanish.inconclusive() {
        rep.messages.push("neither vanish-at-infinity criterion holds for A(r)".into());
    }
    rep.document("vanish", &vanish);

    let basis = basis_of(r)?;
    let suite = archetype_suite(&basis, e.p, e.beta, e.len, e.per_kind, r.seed)?;
    let mut t = Table::new("verdicts", &["label", "expected", "verdict", "passed", "inner_mass", "alpha", "epsilon"]);
    let mut alpha_ok = true;
    for s in &suite {
        let w = s.report.splitting.as_ref().and_then(|w| w.first());
        if let (Some(m), Some(ws)) = (s.inner_mass, &s.report.splitting) {
            alpha_ok &= ws.iter().all(|w| (w.alpha - m).abs() < 2.0 * w.epsilon);
        }
        t.push(vec![
            s.label.clone().into(),
            verdict_name(s.expected).into(),
            verdict_name(s.report.verdict).into(),
            s.passed().into(),
            s.inner_mass.map_or(Cell::Text(String::new()), Cell::Num),
            w.map_or(Cell::Text(String::new()), |w| Cell::Num(w.alpha)),
            w.map_or(Cell::Text(String::new()), |w| Cell::Num(w.epsilon)),
        ]);
    }
    let matched = suite.iter().filter(|s| s.passed()).count();
    let verdicts: Vec<&str> = suite.iter().map(|s| verdict_name(s.report.verdict)).collect();
    rep.value("verdicts", &verdicts);
    rep.value("matched", matched);
    rep.check("archetype verdicts", matched == suite.len(), format!("{matched}/{}", suite.len()));
    rep.check("splitting alpha within 2 eps", alpha_ok, "");
    rep.messages.push(format!("{matched}/{} archetype verdicts match their construction", suite.len()));
    rep.document("cc_reports", suite.iter().map(|s| (&s.label, &s.report)).collect::<Vec<_>>());
    rep.tables.push(t);

    if let Some(problem) = &r.problem {
        let ta = technical_assumption(problem, spec, &r.killing)?;
        rep.value("technical_assumption_holds", ta.holds);
        rep.value("technical_assumption_margin", ta.margin);
        rep.messages.push(format!(
            "technical assumption I_beta < -(m^2 - lambda^2) beta/2: {} (margin {:e})",
            if ta.holds { "holds" } else { "fails" },
            ta.margin
        ));
        rep.document("technical_assumption", &ta);
        if !e.lemma_betas.is_empty() {
            let mut betas = e.lemma_betas.clone();
            for b in &e.lemma_betas {
                let s = e.sigma * b;
                if !betas.iter().any(|x| (x - s).abs() <= 1e-12 * s.abs().max(1.0)) {
                    betas.push(s);
                }
            }
            let values = estimate_i_beta(problem, spec, &r.killing, &betas)?;
            let lemma = lemma_l1_check(&values, problem.m_mass, problem.lambda, e.sigma)?;
            let mut lt = Table::new("lemma", &["kind", "beta", "parameter", "lhs", "rhs", "holds"]);
            for row in &lemma.rows {
                lt.push(vec![
                    row.kind.clone().into(),
                    row.beta.into(),
                    row.parameter.into(),
                    row.lhs.into(),
                    row.rhs.into(),
                    row.holds.into(),
                ]);
            }
            rep.value("lemma_failures", lemma.failures);
            rep.value("lemma_hypothesis_failures", &lemma.hypothesis_failures);
            rep.messages.push(format!(
                "strict subadditivity on the estimates: {} of {} inequalities fail",
                lemma.failures,
                lemma.rows.len()
            ));
            rep.tables.push(lt);
        }
    }
    Ok(rep)
}

fn verdict_name(v: tw_core::radial::Verdict) -> &'static str {
    use tw_core::radial::Verdict::*;
    match v {
        Vanishing => "vanishing",
        Concentration => "concentration",
        Splitting => "splitting",
        Inconclusive => "inconclusive",
    }
}

fn gn(r: &Resolved, e: &GnExperiment) -> Outcome {
    let basis = basis_of(r)?;
    let scan = gn_scan(&basis, &r.killing, e.lambda, e.m_mass, e.p, e.n_samples, r.seed)?;
    let mut rep = Report::default();
    let mut s = Table::new("samples", &["label", "ratio", "chain_defect"]);
    for x in &scan.table {
        s.push(vec![x.label.clone().into(), x.ratio.into(), x.chain_defect.into()]);
    }
    let mut g = Table::new("gate", &["n", "p_num", "p_den", "gamma_p1_num", "gamma_p1_den", "gamma_below_two", "p_subcritical"]);
    let mut disagreements = 0usize;
    for &n in &e.gate_dims {
        for num in (e.gate_denominator + 1)..=(e.gate_max_p * e.gate_denominator) {
            let gate = gn_gate(n, num, e.gate_denominator)?;
            disagreements += usize::from(!gate.agrees());
            g.push(vec![
                i64::from(n).into(),
                gate.p.0.into(),
                gate.p.1.into(),
                gate.gamma_p1.0.into(),
                gate.gamma_p1.1.into(),
                gate.gamma_below_two.into(),
                gate.p_subcritical.into(),
            ]);
        }
    }
    rep.value("gamma", scan.gamma);
    rep.value("c_estimate", scan.c_estimate);
    rep.value("argmax", &scan.argmax);
    rep.value("gamma_below_two", scan.gamma_below_two);
    rep.value("max_chain_defect", scan.max_chain_defect);
    rep.value("gate_rows", g.rows.len());
    rep.check("form/energy identity", scan.max_chain_defect <= CHAIN_TOL, format!("{:e}", scan.max_chain_defect));
    rep.check("GN gate", disagreements == 0, format!("{disagreements} disagreements"));
    rep.tables.push(s);
    rep.tables.push(g);
    Ok(rep)
}

fn scaling_identities(e: &IdentitiesExperiment) -> Outcome {
    let bump = GaussianBump { amplitude: e.amplitude, widths: e.widths.clone() };
    let runs: Vec<_> = e.rs.iter().flat_map(|&r| e.cases.iter().map(move |c| (r, *c))).collect();
    let reports = runs
        .par_iter()
        .map(|&(r, c)| anisotropic_identities(&bump, r, c.sigma, c.a, c.b, e.p, &e.grid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rep = Report::default();
    let mut t = Table::new(
        "laws",
        &["r", "sigma", "a", "b", "law", "exponent", "predicted", "coarse_ratio", "fine_ratio", "coarse_error", "fine_error", "converges"],
    );
    let mut worst: f64 = 0.0;
    let mut converge = true;
    let mut names: Vec<String> = Vec::new();
    for a in &reports {
        for l in &a.laws {
            t.push(vec![
                a.r.into(),
                a.sigma.into(),
                a.a.into(),
                a.b.into(),
                l.name.clone().into(),
                l.exponent.into(),
                l.predicted.into(),
                l.coarse_ratio.into(),
                l.fine_ratio.into(),
                l.coarse_error.into(),
                l.fine_error.into(),
                l.converges.into(),
            ]);
            if !names.contains(&l.name) {
                names.push(l.name.clone());
            }
        }
        worst = worst.max(a.max_fine_error);
        converge &= a.all_converge;
    }
    rep.value("laws", &names);
    rep.value("max_fine_error", worst);
    rep.check("power laws", worst <= e.tolerance, format!("max error {worst:e}"));
    rep.check("error shrinks 4x under refinement", converge, "");
    rep.tables.push(t);
    Ok(rep)
}
