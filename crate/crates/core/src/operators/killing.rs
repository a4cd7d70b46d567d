use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, ManifoldSpec, Mode, SpectralField};
use crate::{Error, Result, C64};

/// Killing field `X`, described symbolically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KillingSpec {
    /// The zero field; compatible with every manifold.
    Zero,
    /// Constant vector `c` on a flat torus, `X = Σ c_i ∂_i`.
    TorusConstant { velocity: Vec<f64> },
    /// `b·X_ij` with `X_ij = x_i ∂_j - x_j ∂_i` (0-based ambient indices).
    SphereRotation { plane: [usize; 2], speed: f64 },
    /// Field induced from an isometry of the cross-section `N`; it annihilates
    /// radial functions. `speed` is the declared `sup |X|`.
    RadialInduced { speed: f64 },
}

impl KillingSpec {
    pub fn torus(velocity: &[f64]) -> Self {
        Self::TorusConstant { velocity: velocity.to_vec() }
    }

    pub fn rotation(speed: f64) -> Self {
        Self::SphereRotation { plane: [0, 1], speed }
    }

    /// Per-mode symbol `σ` with `X e_q = i σ_q e_q`.
    pub fn symbol(&self, basis: &Basis) -> Result<Vec<f64>> {
        let n = basis.n_modes();
        match (self, basis.spec()) {
            (Self::Zero, _) => Ok(alloc::vec![0.0; n]),
            (Self::TorusConstant { velocity }, ManifoldSpec::Torus(t)) => {
                if velocity.len() != t.n {
                    return Err(Error::IncompatibleKilling(format!(
                        "velocity has {} components on a {}-torus",
                        velocity.len(),
                        t.n
                    )));
                }
                let tb = basis.torus().expect("torus basis");
                Ok(tb
                    .wavenumbers
                    .iter()
                    .map(|q| {
                        let dot: f64 = q.iter().zip(velocity).map(|(&qi, c)| qi as f64 * c).sum();
                        2.0 * core::f64::consts::PI * dot / t.period
                    })
                    .collect())
            }
            (Self::SphereRotation { plane, speed }, ManifoldSpec::Sphere(s)) => {
                let slot = match (s.n, plane) {
                    (_, [0, 1]) => 0,
                    (3, [2, 3]) => 1,
                    _ => {
                        return Err(Error::IncompatibleKilling(format!(
                            "rotation plane {plane:?} not supported on S^{}",
                            s.n
                        )))
                    }
                };
                Ok(basis
                    .modes()
                    .iter()
                    .map(|m| match m {
                        Mode::Harmonic { m, .. } => speed * m[slot] as f64,
                        _ => unreachable!(),
                    })
                    .collect())
            }
            (Self::RadialInduced { .. }, ManifoldSpec::Radial(_)) => Ok(alloc::vec![0.0; n]),
            (x, m) => Err(Error::IncompatibleKilling(format!(
                "{} field on a {} manifold",
                x.kind_name(),
                match m {
                    ManifoldSpec::Torus(_) => "torus",
                    ManifoldSpec::Sphere(_) => "sphere",
                    ManifoldSpec::Radial(_) => "radial",
                }
            ))),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::TorusConstant { .. } => "torus-constant",
            Self::SphereRotation { .. } => "sphere-rotation",
            Self::RadialInduced { .. } => "radial-induced",
        }
    }

    /// `sup_M |X|_g`, from the closed form.
    pub fn speed_bound(&self, spec: &ManifoldSpec) -> f64 {
        match (self, spec) {
            (Self::Zero, _) => 0.0,
            (Self::TorusConstant { velocity }, ManifoldSpec::Torus(t)) => {
                t.metric_scale.sqrt() * velocity.iter().map(|c| c * c).sum::<f64>().sqrt()
            }
            (Self::SphereRotation { speed, .. }, ManifoldSpec::Sphere(s)) => s.metric_scale.sqrt() * speed.abs(),
            (Self::RadialInduced { speed }, _) => speed.abs(),
            _ => f64::NAN,
        }
    }

    /// `max |X|_g` over the quadrature grid. Never exceeds [`speed_bound`]
    /// and equals it when the grid contains a point of maximal speed.
    ///
    /// [`speed_bound`]: Self::speed_bound
    pub fn grid_speed(&self, basis: &Basis) -> f64 {
        match (self, basis.spec()) {
            (Self::SphereRotation { plane, speed }, ManifoldSpec::Sphere(s)) => {
                let sb = basis.sphere().expect("sphere basis");
                let amp = s.metric_scale.sqrt() * speed.abs();
                sb.nodes
                    .iter()
                    .map(|&x| {
                        let rho = match (s.n, plane) {
                            (2, _) => (1.0 - x * x).max(0.0).sqrt(),
                            (_, [0, 1]) => ((1.0 + x) / 2.0).sqrt(),
                            _ => ((1.0 - x) / 2.0).sqrt(),
                        };
                        amp * rho
                    })
                    .fold(0.0, f64::max)
            }
            _ => self.speed_bound(basis.spec()),
        }
    }

    /// `X + ε X''`, required to stay a Killing field of the same kind.
    pub fn perturbed(&self, eps: f64, other: &Self) -> Result<Self> {
        match (self, other) {
            (_, Self::Zero) => Ok(self.clone()),
            (Self::Zero, _) => Ok(other.scaled(eps)),
            (Self::TorusConstant { velocity: a }, Self::TorusConstant { velocity: b }) if a.len() == b.len() => {
                Ok(Self::TorusConstant { velocity: a.iter().zip(b).map(|(x, y)| x + eps * y).collect() })
            }
            (Self::SphereRotation { plane: p, speed: a }, Self::SphereRotation { plane: q, speed: b }) if p == q => {
                Ok(Self::SphereRotation { plane: *p, speed: a + eps * b })
            }
            (Self::RadialInduced { speed: a }, Self::RadialInduced { speed: b }) => {
                Ok(Self::RadialInduced { speed: a + eps * b })
            }
            _ => Err(Error::InvalidPerturbation(format!(
                "cannot combine {} with {}",
                self.kind_name(),
                other.kind_name()
            ))),
        }
    }

    pub fn scaled(&self, eps: f64) -> Self {
        match self {
            Self::Zero => Self::Zero,
            Self::TorusConstant { velocity } => Self::TorusConstant { velocity: velocity.iter().map(|c| eps * c).collect() },
            Self::SphereRotation { plane, speed } => Self::SphereRotation { plane: *plane, speed: eps * speed },
            Self::RadialInduced { speed } => Self::RadialInduced { speed: eps * speed },
        }
    }
}

/// `Xu`.
pub fn apply_killing(u: &SpectralField, x: &KillingSpec) -> Result<SpectralField> {
    let sigma = x.symbol(u.basis())?;
    Ok(u.with_coeffs(u.coeffs().iter().zip(&sigma).map(|(c, s)| c * C64::new(0.0, *s)).collect()))
}

/// `-Δu` (positive convention).
pub fn apply_laplacian(u: &SpectralField) -> SpectralField {
    u.neg_laplacian()
}

/// `‖[Δ, X]u‖ / ‖u‖_{H¹}` computed through the operator applications.
pub fn commutator_defect(u: &SpectralField, x: &KillingSpec) -> Result<f64> {
    let a = apply_laplacian(&apply_killing(u, x)?);
    let b = apply_killing(&apply_laplacian(u), x)?;
    let h1 = u.norms(1.0).h1;
    Ok(if h1 == 0.0 { 0.0 } else { a.sub(&b).norm_l2() / h1 })
}
