//! Formula layer: the delta transform, product combination of
//! one-dimensional upper bounds into d-dimensional ones, telescoping
//! coefficients, the cubic root used by the best known one-dimensional
//! bound, and Minkowski dimension bounds for Besicovitch-type sets.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The quantity delta = (beta/d) / (beta/d - 1), which multiplies across
/// Cartesian products of direction sets.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeltaValue {
    pub d: u32,
    pub beta: f64,
    pub delta: f64,
}

/// delta(beta, d), defined for beta > d (pole at beta = d).
pub fn delta_of(beta: f64, d: u32) -> Result<DeltaValue> {
    assert!(d >= 1);
    if !(beta > d as f64) {
        return Err(Error::BetaOutOfRange {
            beta,
            lo: d as f64,
            hi: f64::INFINITY,
        });
    }
    // (beta/d) / (beta/d - 1) simplified to beta / (beta - d); the
    // subtraction is exact near the pole, so the round trip stays tight.
    let delta = beta / (beta - d as f64);
    Ok(DeltaValue { d, beta, delta })
}

/// Inverse transform: the beta with delta(beta, d) = delta.
pub fn beta_from_delta(delta: f64, d: u32) -> Result<f64> {
    assert!(d >= 1);
    if !(delta > 1.0) {
        return Err(Error::BetaOutOfRange {
            beta: delta,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    Ok(d as f64 * delta / (delta - 1.0))
}

fn check_unit_window(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::BetaOutOfRange {
            beta,
            lo: 1.0,
            hi: 2.0,
        });
    }
    Ok(())
}

/// Combines per-factor one-dimensional upper bounds beta_i in (1, 2] into an
/// upper bound for the product set: the output beta_out satisfies
/// delta(beta_out, d) = product of delta(beta_i, 1).
pub fn combine_product(betas: &[f64]) -> Result<f64> {
    assert!(!betas.is_empty(), "need at least one factor");
    let d = betas.len() as u32;
    let mut q = 1.0;
    for &b in betas {
        check_unit_window(b)?;
        q *= delta_of(b, 1)?.delta;
    }
    beta_from_delta(q, d)
}

/// Coefficients of the grouped conditional-entropy prefixes in the
/// telescoped combination of per-coordinate bounds. For factors
/// beta_1..beta_d in (1, 2] the coefficient of the i-th prefix is
///
/// * (beta_{i+1} - beta_i + 1) / (delta_1...delta_{i-1} beta_i beta_{i+1})
///   for i < d, and
/// * 1 / (delta_1...delta_{d-1} beta_d) for the full prefix i = d,
///
/// all strictly positive on the valid window.
pub fn telescoping_coefficients(betas: &[f64]) -> Result<Vec<f64>> {
    assert!(!betas.is_empty(), "need at least one factor");
    for &b in betas {
        check_unit_window(b)?;
    }
    let d = betas.len();
    let mut coeffs = Vec::with_capacity(d);
    let mut delta_prefix = 1.0; // delta_1 * ... * delta_{i-1}
    for i in 0..d {
        let beta_i = betas[i];
        let c = if i + 1 < d {
            let beta_next = betas[i + 1];
            (beta_next - beta_i + 1.0) / (delta_prefix * beta_i * beta_next)
        } else {
            1.0 / (delta_prefix * beta_i)
        };
        coeffs.push(c);
        delta_prefix *= beta_i / (beta_i - 1.0);
    }
    Ok(coeffs)
}

/// Root of x^3 - 4x + 2 in (1, 2) with its residual.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AlphaRoot {
    pub value: f64,
    pub residual: f64,
}

fn cubic(x: f64) -> f64 {
    x * x * x - 4.0 * x + 2.0
}

/// Bisection for the root of x^3 - 4x + 2 in (1, 2); 80 fixed iterations
/// drive the bracket below one ulp, so the result is deterministic.
pub fn alpha_root() -> AlphaRoot {
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    debug_assert!(cubic(lo) < 0.0 && cubic(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cubic(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    AlphaRoot {
        value,
        residual: cubic(value).abs(),
    }
}

/// Minkowski dimension lower bound (d / beta) * n for an (n, d) Besicovitch
/// set certified by a direction set with bound beta.
pub fn minkowski_bound(n: u32, d: u32, beta: f64) -> Result<f64> {
    if !(n >= d && d >= 1) {
        return Err(Error::BadDimensionPair { n, d });
    }
    if !(beta >= d as f64) {
        return Err(Error::BetaOutOfRange {
            beta,
            lo: d as f64,
            hi: f64::INFINITY,
        });
    }
    Ok(d as f64 / beta * n as f64)
}

/// The same bound expressed through the cubic root: with q = alpha/(alpha-1)
/// the factor is (q^d - 1)/q^d, identical to d/beta for the combined bound
/// beta = d q^d/(q^d - 1).
pub fn minkowski_bound_alpha(n: u32, d: u32) -> Result<f64> {
    if !(n >= d && d >= 1) {
        return Err(Error::BadDimensionPair { n, d });
    }
    let alpha = alpha_root().value;
    let q = alpha / (alpha - 1.0);
    let qd = q.powi(d as i32);
    Ok(n as f64 * (qd - 1.0) / qd)
}

/// One row of the combined-bound table for a fixed per-factor beta.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundTableRow {
    pub d: u32,
    pub beta_in: f64,
    pub delta: f64,
    pub beta_out: f64,
    pub mink_factor: f64,
    /// Nonempty when the row lies outside the combined statement's range.
    pub note: &'static str,
}

/// Table of combined bounds for d = 1..=d_max with the same beta per factor.
/// The d = 1 row degenerates to the input bound and is flagged.
pub fn bound_table(beta: f64, d_max: u32) -> Result<Vec<BoundTableRow>> {
    check_unit_window(beta)?;
    let delta = delta_of(beta, 1)?.delta;
    let mut rows = Vec::new();
    for d in 1..=d_max.max(1) {
        let betas = vec![beta; d as usize];
        let beta_out = combine_product(&betas)?;
        rows.push(BoundTableRow {
            d,
            beta_in: beta,
            delta,
            beta_out,
            mink_factor: d as f64 / beta_out,
            note: if d == 1 { "outside theorem range" } else { "" },
        });
    }
    Ok(rows)
}
