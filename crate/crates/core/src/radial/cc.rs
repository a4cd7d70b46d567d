use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, ManifoldSpec, RadialSpec, SpectralField};
use crate::rng::{self, Rand};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Vanishing,
    Concentration,
    Splitting,
    Inconclusive,
}

/// Optional overrides of the `ε` schedule (absolute masses) and window radii.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcOptions {
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

/// Window `[center - radius, center + radius]` and the mass it captures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub center: f64,
    pub radius: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationWitness {
    pub epsilon: f64,
    /// Smallest radius capturing `β - ε`, per sequence element.
    pub radii: Vec<f64>,
    pub centers: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingWitness {
    pub epsilon: f64,
    pub alpha: f64,
    /// Inner window `E#` and outer window `E_b` per sequence element.
    pub inner: Vec<Window>,
    pub outer: Vec<Window>,
    pub separations: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CCReport {
    pub verdict: Verdict,
    pub beta: f64,
    pub epsilons: Vec<f64>,
    pub radii: Vec<f64>,
    /// `sup_y ∫_{|r-y|≤R} |u_ν|^{p+1}`, indexed `[ν][R]`.
    pub sup_window_mass: Vec<Vec<f64>>,
    pub vanishing: bool,
    pub concentration: Option<Vec<ConcentrationWitness>>,
    pub splitting: Option<Vec<SplittingWitness>>,
}

/// Prefix sums of the per-node masses `w_i |u_i|^{p+1}`.
struct MassProfile {
    r: Vec<f64>,
    prefix: Vec<f64>,
}

impl MassProfile {
    fn new(u: &SpectralField, p: f64) -> Self {
        let rb = u.basis().radial().expect("radial basis");
        let mut prefix = vec![0.0];
        for (z, w) in u.to_grid().iter().zip(u.basis().grid_weights()) {
            prefix.push(prefix.last().unwrap() + w * z.norm().powf(p + 1.0));
        }
        Self { r: rb.nodes.clone(), prefix }
    }

    fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Window mass centered at each node.
    fn windows(&self, radius: f64) -> Vec<Window> {
        let n = self.r.len();
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut out = Vec::with_capacity(n);
        for &c in &self.r {
            while lo < n && self.r[lo] < c - radius - 1e-12 {
                lo += 1;
            }
            while hi < n && self.r[hi] <= c + radius + 1e-12 {
                hi += 1;
            }
            out.push(Window { center: c, radius, mass: self.prefix[hi] - self.prefix[lo] });
        }
        out
    }

    fn sup_window(&self, radius: f64) -> Window {
        self.windows(radius).into_iter().fold(Window { center: 0.0, radius, mass: -1.0 }, |b, w| {
            if w.mass > b.mass {
                w
            } else {
                b
            }
        })
    }

    /// Disjoint pair of windows with the largest total mass, inner first.
    fn best_pair(&self, radius: f64) -> Option<(Window, Window)> {
        let ws = self.windows(radius);
        let mut best: Option<(Window, Window)> = None;
        let mut lead: Option<Window> = None;
        let mut j = 0;
        for w in &ws {
            while j < ws.len() && ws[j].center < w.center - 2.0 * radius - 1e-12 {
                if lead.is_none_or(|l| ws[j].mass > l.mass) {
                    lead = Some(ws[j]);
                }
                j += 1;
            }
            if let Some(l) = lead {
                if best.is_none_or(|(a, b)| l.mass + w.mass > a.mass + b.mass) {
                    best = Some((l, *w));
                }
            }
        }
        best
    }
}

fn non_increasing(v: &[f64], tol: f64) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Bounded on a finite sample: the second half stays within one dyadic step
/// of the first half's maximum.
fn bounded(v: &[f64]) -> bool {
    let h = v.len() / 2;
    let head = v[..h.max(1)].iter().copied().fold(0.0, f64::max);
    v[h..].iter().all(|x| *x <= 2.0 * head)
}

/// Dyadic radii `r_max/4, r_max/8, ...` down to four grid steps, ascending.
pub fn default_radii(spec: &RadialSpec) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = spec.r_max / 4.0;
    while r >= 4.0 * spec.step() {
        out.push(r);
        r /= 2.0;
    }
    out.reverse();
    out
}

/// Windowed concentration–compactness diagnostics on a finite sequence.
///
/// Each of the three alternatives is tested on its own; a verdict is returned
/// only when exactly one holds.
pub fn cc_classify(sequence: &[SpectralField], p: f64, opts: &CcOptions) -> Result<CCReport> {
    if sequence.len() < 4 {
        return Err(Error::InsufficientData(format!("{} sequence elements, need at least 4", sequence.len())));
    }
    let spec = match sequence[0].basis().spec() {
        ManifoldSpec::Radial(s) => s.clone(),
        _ => return Err(Error::Config("the classifier works on radial fields".into())),
    };
    for u in sequence {
        u.same_basis(&sequence[0])?;
    }
    let profiles: Vec<MassProfile> = sequence.iter().map(|u| MassProfile::new(u, p)).collect();
    let beta = profiles[0].total();
    if let Some(bad) = profiles.iter().find(|m| (m.total() - beta).abs() > 1e-8 * beta) {
        return Err(Error::Config(format!("L^(p+1) masses differ: {} vs {beta}", bad.total())));
    }
    let epsilons = opts.epsilons.clone().unwrap_or_else(|| vec![0.1 * beta, 0.03 * beta, 0.01 * beta]);
    let radii = opts.radii.clone().unwrap_or_else(|| default_radii(&spec));
    if radii.is_empty() || epsilons.is_empty() {
        return Err(Error::Config("empty radius or epsilon schedule".into()));
    }
    let sup_window_mass: Vec<Vec<f64>> =
        profiles.iter().map(|m| radii.iter().map(|&r| m.sup_window(r).mass).collect()).collect();
    let tol = 1e-10 * beta;

    // concentration: R(ε) finite and bounded along the sequence
    let mut conc = Vec::new();
    let mut r_growth = false;
    for &eps in &epsilons {
        let mut rs = Vec::new();
        let mut cs = Vec::new();
        for m in &profiles {
            match radii.iter().find(|&&r| m.sup_window(r).mass >= beta - eps) {
                Some(&r) => {
                    rs.push(r);
                    cs.push(m.sup_window(r).center);
                }
                None => {
                    rs.push(f64::INFINITY);
                    cs.push(f64::NAN);
                }
            }
        }
        if !bounded(&rs) || rs.iter().any(|r| !r.is_finite()) {
            r_growth = true;
        }
        conc.push(ConcentrationWitness { epsilon: eps, radii: rs, centers: cs });
    }
    let concentration = !r_growth;

    // vanishing: every sup window mass decays, below the largest ε at the
    // smallest radius
    let eps_max = epsilons.iter().copied().fold(0.0, f64::max);
    let last = sup_window_mass.last().unwrap();
    let first = &sup_window_mass[0];
    let vanishing = (0..radii.len()).all(|k| {
        let col: Vec<f64> = sup_window_mass.iter().map(|row| row[k]).collect();
        non_increasing(&col, tol)
    }) && last[0] < eps_max
        && last[0] < first[0] - tol
        && r_growth;

    // splitting: two windows of bounded radius drifting apart carry α and β - α
    let mut split = Vec::new();
    let mut splitting = true;
    for &eps in &epsilons {
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        let mut ok = true;
        for m in &profiles {
            match radii.iter().find_map(|&r| m.best_pair(r).filter(|(a, b)| a.mass + b.mass >= beta - eps)) {
                Some((a, b)) => {
                    inner.push(a);
                    outer.push(b);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            splitting = false;
            break;
        }
        let alpha = inner.last().unwrap().mass;
        let separations: Vec<f64> = inner.iter().zip(&outer).map(|(a, b)| b.center - a.center).collect();
        let radii_used: Vec<f64> = inner.iter().map(|w| w.radius).collect();
        ok = alpha > eps
            && alpha < beta - eps
            && inner.iter().all(|w| (w.mass - alpha).abs() < eps)
            && outer.iter().all(|w| (w.mass - (beta - alpha)).abs() < eps)
            && separations.windows(2).all(|w| w[1] > w[0])
            && bounded(&radii_used);
        splitting &= ok;
        split.push(SplittingWitness { epsilon: eps, alpha, inner, outer, separations });
    }
    splitting &= r_growth;

    let verdict = match (vanishing, concentration, splitting) {
        (true, false, false) => Verdict::Vanishing,
        (false, true, false) => Verdict::Concentration,
        (false, false, true) => Verdict::Splitting,
        _ => Verdict::Inconclusive,
    };
    Ok(CCReport {
        verdict,
        beta,
        epsilons,
        radii,
        sup_window_mass,
        vanishing,
        concentration: concentration.then_some(conc),
        splitting: splitting.then_some(split),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    Vanishing,
    Concentration,
    Splitting,
}

impl Archetype {
    pub fn expected(self) -> Verdict {
        match self {
            Self::Vanishing => Verdict::Vanishing,
            Self::Concentration => Verdict::Concentration,
            Self::Splitting => Verdict::Splitting,
        }
    }
}

/// A constructed sequence and, for splitting, the exact mass of the inner
/// bump.
#[derive(Clone, Debug)]
pub struct ArchetypeSequence {
    pub kind: Archetype,
    pub fields: Vec<SpectralField>,
    pub inner_mass: Option<f64>,
}

fn bump(basis: &Arc<Basis>, center: f64, width: f64, amp: C64) -> Vec<C64> {
    let rb = basis.radial().expect("radial basis");
    rb.nodes.iter().map(|r| amp * (-((r - center) / width).powi(2)).exp()).collect()
}

fn normalized(basis: &Arc<Basis>, grid: &[C64], p: f64, beta: f64) -> Result<SpectralField> {
    let u = SpectralField::from_grid(basis.clone(), grid)?;
    let s = (beta / u.power_integral(p + 1.0)).powf(1.0 / (p + 1.0));
    Ok(u.scale(C64::new(s, 0.0)))
}

/// Seeded archetype on `basis` with `len` elements and `∫|u|^{p+1} = β`:
/// a Gaussian spreading geometrically to width `r_max/8`, a fixed bump repeated, or two bumps drifting
/// apart linearly in `ν`. Widths, centers and phases are drawn from `seed`.
pub fn archetype(kind: Archetype, basis: &Arc<Basis>, p: f64, beta: f64, len: usize, seed: u64) -> Result<ArchetypeSequence> {
    let r_max = match basis.spec() {
        ManifoldSpec::Radial(s) => s.r_max,
        _ => return Err(Error::Config("archetypes live on radial grids".into())),
    };
    let mut rng: Rand = rng::seeded(seed, kind as u64);
    let u01 = |rng: &mut Rand| rng::uniform(rng);
    let phase = C64::from_polar(1.0, 2.0 * core::f64::consts::PI * u01(&mut rng));
    let mut fields = Vec::with_capacity(len);
    let mut inner_mass = None;
    match kind {
        Archetype::Vanishing => {
            let w0 = 0.75 + 0.5 * u01(&mut rng);
            let growth = (r_max / 8.0 / w0).powf(1.0 / (len - 1).max(1) as f64);
            if growth <= 1.0 {
                return Err(Error::DomainOverflow(format!("r_max = {r_max} leaves no room to spread a bump of width {w0}")));
            }
            for nu in 0..len {
                let w = w0 * growth.powi(nu as i32);
                fields.push(normalized(basis, &bump(basis, 0.0, w, phase), p, beta)?);
            }
        }
        Archetype::Concentration => {
            let w = 0.75 + 0.5 * u01(&mut rng);
            let c = (0.05 + 0.1 * u01(&mut rng)) * r_max;
            let u = normalized(basis, &bump(basis, c, w, phase), p, beta)?;
            fields.resize(len, u);
        }
        Archetype::Splitting => {
            let w = 0.75 + 0.5 * u01(&mut rng);
            let c0 = 4.0 * w + 4.0 * u01(&mut rng);
            let step = 0.6 * (r_max - c0 - 4.0 * w) / len as f64;
            let phase2 = C64::from_polar(1.0, 2.0 * core::f64::consts::PI * u01(&mut rng));
            for nu in 1..=len {
                let mut g = bump(basis, c0, w, phase);
                let far = bump(basis, c0 + nu as f64 * step + 8.0 * w, w, phase2);
                g.iter_mut().zip(&far).for_each(|(a, b)| *a += b);
                let u = normalized(basis, &g, p, beta)?;
                if nu == len {
                    let split = c0 + (nu as f64 * step + 8.0 * w) / 2.0;
                    let prof = MassProfile::new(&u, p);
                    let k = prof.r.partition_point(|&r| r < split);
                    inner_mass = Some(prof.prefix[k]);
                }
                fields.push(u);
            }
        }
    }
    Ok(ArchetypeSequence { kind, fields, inner_mass })
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub label: String,
    pub expected: Verdict,
    pub report: CCReport,
    /// Mass of the inner bump for splitting sequences.
    pub inner_mass: Option<f64>,
}

impl SuiteEntry {
    pub fn passed(&self) -> bool {
        self.report.verdict == self.expected
    }
}

/// Classifies `per_kind` seeded sequences of each archetype.
pub fn archetype_suite(basis: &Arc<Basis>, p: f64, beta: f64, len: usize, per_kind: usize, seed: u64) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    for kind in [Archetype::Vanishing, Archetype::Concentration, Archetype::Splitting] {
        for i in 0..per_kind {
            let s = archetype(kind, basis, p, beta, len, seed.wrapping_add(i as u64))?;
            let report = cc_classify(&s.fields, p, &CcOptions::default())?;
            out.push(SuiteEntry {
                label: format!("{kind:?}-{i}").to_lowercase(),
                expected: kind.expected(),
                report,
                inner_mass: s.inner_mass,
            });
        }
    }
    Ok(out)
}
