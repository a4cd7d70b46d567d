use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;

use crate::basis::RadialSpec;
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Dyadic block ratios at or above this count as a divergent tail.
const RATIO_LIMIT: f64 = 0.9;

#[derive(Clone, Debug, Serialize)]
pub struct IntegralTest {
    /// `∫_1^{r_max} dr/A(r)`, Gauss–Legendre on each grid interval.
    pub truncated: f64,
    /// Geometric extrapolation of the tail beyond `r_max` (infinite when the
    /// blocks do not decay).
    pub tail_estimate: f64,
    /// `∫ dr/A` over the last dyadic block divided by the one before.
    pub block_ratio: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthTest {
    /// `A(r_max) / A(r_max/2)`.
    pub trend: f64,
    /// `sup_{r ≥ 1} |A'/A|` from finite differences.
    pub log_derivative_sup: f64,
    /// The supremum over the last dyadic block; bounded growth means it does
    /// not exceed twice the supremum over `[1, r_max/2)`.
    pub log_derivative_tail: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishCriteria {
    pub integral_test: IntegralTest,
    pub growth_test: GrowthTest,
    /// `min A` over the grid, and whether it dips below the configured lower
    /// bound.
    pub a_min: f64,
    pub below_lower_bound: bool,
}

impl VanishCriteria {
    pub fn any_holds(&self) -> bool {
        self.integral_test.holds || self.growth_test.holds
    }

    pub fn inconclusive(&self) -> bool {
        !self.any_holds()
    }
}

/// Evaluates `∫_{r≥1} dr/A < ∞` and `A → ∞` with `sup_{r≥1} |A'/A| < ∞` on the
/// sampled weight.
pub fn check_vanish_criteria(spec: &RadialSpec) -> Result<VanishCriteria> {
    let grid = spec.grid();
    let a = spec.sampled_weight();
    let start = grid.iter().position(|&r| r > 1.0).unwrap_or(grid.len());
    let beyond = grid.len() - start;
    if beyond < 16 {
        return Err(Error::GridTooCoarse(format!("{beyond} nodes beyond r = 1, need at least 16")));
    }
    let mut r: Vec<f64> = alloc::vec![1.0];
    r.extend_from_slice(&grid[start..]);
    let (gx, gw) = gauss_legendre(4);
    // Gauss rule on each grid interval between lo and hi
    let integral = |lo: f64, hi: f64| -> f64 {
        r.windows(2)
            .filter(|w| w[0] >= lo && w[1] <= hi)
            .map(|w| {
                let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                gx.iter().zip(&gw).map(|(x, g)| g * half / spec.weight.eval(mid + half * x)).sum::<f64>()
            })
            .sum()
    };
    let r_max = spec.r_max;
    let truncated = integral(1.0, r_max);
    let half = (r_max / 2.0).max(1.0);
    let quarter = (r_max / 4.0).max(1.0);
    let last = integral(half, r_max);
    let prev = integral(quarter, half);
    let block_ratio = if prev > 0.0 { last / prev } else { f64::INFINITY };
    let decays = block_ratio < RATIO_LIMIT && quarter < half;
    let integral_test = IntegralTest {
        truncated,
        tail_estimate: if decays { last * block_ratio / (1.0 - block_ratio) } else { f64::INFINITY },
        block_ratio,
        holds: decays && truncated.is_finite(),
    };

    // central differences of ln A on r ≥ 1
    let h = spec.step();
    let la: Vec<f64> = a.iter().map(|a| a.ln()).collect();
    let mut head = 0.0f64;
    let mut tail = 0.0f64;
    for i in start.max(1)..grid.len() - 1 {
        let d = ((la[i + 1] - la[i - 1]) / (2.0 * h)).abs();
        if grid[i] >= half {
            tail = tail.max(d);
        } else {
            head = head.max(d);
        }
    }
    let sup = head.max(tail);
    let trend = spec.weight.eval(r_max) / spec.weight.eval(half);
    let a_tail = grid.iter().zip(&a).filter(|(r, _)| **r >= half).map(|(_, a)| *a).collect::<Vec<_>>();
    let monotone = a_tail.windows(2).all(|w| w[1] >= w[0]);
    let growth_test = GrowthTest {
        trend,
        log_derivative_sup: sup,
        log_derivative_tail: tail,
        holds: trend > 1.0 + 1e-3 && monotone && tail <= 2.0 * head + 1e-12 && sup.is_finite(),
    };
    let a_min = a.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VanishCriteria {
        integral_test,
        growth_test,
        a_min,
        below_lower_bound: spec.a_lower_bound.is_some_and(|c| a_min < c),
    })
}
