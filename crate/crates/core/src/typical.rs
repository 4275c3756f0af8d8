//! Typical-set realization of the entropy-to-sumset dictionary.
//!
//! Given a two-component integer distribution (X, Y) and a block length n,
//! the construction keeps exactly the n-tuples of atoms whose empirical
//! log2-probability under the joint law, the Y-marginal, and the conditional
//! all sit within n*eps of n times the matching entropy. The joint, vertical,
//! and fiber cardinalities then track 2^{nH} by construction; projection
//! cardinalities are measured, not imposed.
//!
//! The vector-form set can be flattened to a planar integer set through a
//! carry-free radix map, which preserves every projection cardinality the
//! directions can see.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dist::{CoordSet, JointDist};
use crate::pointset::PointSet;
use crate::rational::Rat;
use crate::{Error, Result};

/// Guard on the number of enumerated tuples.
const ENUM_GUARD: u128 = 10_000_000;

/// Parameters of a typical-set build.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TypicalSetParams {
    /// Block length.
    pub n: usize,
    /// Typicality slack per symbol.
    pub eps: f64,
    /// Flattening radix; 0 keeps the vector form.
    pub base_m: i64,
}

/// Set of typical (x-vector, y-vector) pairs over Z^n x Z^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypicalSet {
    n: usize,
    tuples: BTreeSet<(Vec<i64>, Vec<i64>)>,
}

impl TypicalSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vec<i64>, Vec<i64>)> {
        self.tuples.iter()
    }

    /// Number of distinct y-vectors.
    pub fn vertical_size(&self) -> usize {
        self.tuples
            .iter()
            .map(|(_, y)| y)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Fiber sizes keyed by y-vector.
    pub fn fiber_sizes(&self) -> BTreeMap<&Vec<i64>, usize> {
        let mut out: BTreeMap<&Vec<i64>, usize> = BTreeMap::new();
        for (_, y) in &self.tuples {
            *out.entry(y).or_insert(0) += 1;
        }
        out
    }

    /// Number of distinct coordinatewise projections x + r*y (as vectors of
    /// exact rationals).
    pub fn projection_size(&self, r: &Rat) -> usize {
        let images: BTreeSet<Vec<Rat>> = self
            .tuples
            .iter()
            .map(|(x, y)| {
                x.iter()
                    .zip(y)
                    .map(|(&xi, &yi)| &Rat::from_int(xi) + &(r * &Rat::from_int(yi)))
                    .collect()
            })
            .collect();
        images.len()
    }

    /// Largest absolute coordinate appearing in the tuples.
    pub fn max_abs_coord(&self) -> i64 {
        self.tuples
            .iter()
            .flat_map(|(x, y)| x.iter().chain(y).map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Carry-free radix bound for direction radius k: flattening with any
    /// radix above this commutes with every projection x + r*y, |r| <= k.
    pub fn radix_bound(&self, k: i64) -> i64 {
        self.n as i64 * (2 * k + 1) * (1 + self.max_abs_coord())
    }

    /// Flattens each coordinate vector to a single integer in radix
    /// `base_m`, checking the carry-free bound for direction radius `k`.
    /// The flattening is a bijection on the set and commutes with every
    /// projection the directions can apply.
    pub fn flatten(&self, base_m: i64, k: i64) -> Result<PointSet> {
        let need = self.radix_bound(k);
        if base_m <= need {
            return Err(Error::RadixTooSmall { base_m, need });
        }
        let mut points = BTreeSet::new();
        for (x, y) in &self.tuples {
            let fx = flatten_vec(x, base_m)?;
            let fy = flatten_vec(y, base_m)?;
            points.insert((fx, fy));
        }
        if points.len() != self.tuples.len() {
            return Err(Error::Internal(
                "radix flattening collided; bound check should prevent this".into(),
            ));
        }
        Ok(PointSet::integers(points))
    }
}

fn flatten_vec(v: &[i64], base_m: i64) -> Result<i64> {
    let mut acc: i64 = 0;
    let mut scale: i64 = 1;
    for (i, &digit) in v.iter().enumerate() {
        let term = digit
            .checked_mul(scale)
            .ok_or(Error::FlattenOverflow { base_m })?;
        acc = acc
            .checked_add(term)
            .ok_or(Error::FlattenOverflow { base_m })?;
        if i + 1 < v.len() {
            scale = scale
                .checked_mul(base_m)
                .ok_or(Error::FlattenOverflow { base_m })?;
        }
    }
    Ok(acc)
}

/// Builds the typical set of a two-component integral distribution.
///
/// Keeps the n-tuples whose empirical log2-probabilities under the joint,
/// the Y-marginal, and the conditional are within n*eps of n*H(X,Y),
/// n*H(Y), n*H(X|Y) respectively. Enumeration is guarded at 10^7 tuples.
pub fn typical_set_build(dist: &JointDist, params: &TypicalSetParams) -> Result<TypicalSet> {
    if dist.dim() != 2 {
        return Err(Error::DistDim {
            expected: 2,
            got: dist.dim(),
        });
    }
    assert!(params.n >= 1, "block length must be positive");
    assert!(params.eps > 0.0, "typicality slack must be positive");

    // integral support with per-atom log-probabilities
    struct Atom {
        x: i64,
        y: i64,
        log_joint: f64,
        log_y: f64,
    }

    let y_marginal = dist.marginal(&CoordSet::new([1]))?;
    let mut y_logs: BTreeMap<Vec<Rat>, f64> = BTreeMap::new();
    for (key, prob) in y_marginal.atoms() {
        y_logs.insert(key.clone(), prob.log2());
    }

    let mut support = Vec::with_capacity(dist.num_atoms());
    for (key, prob) in dist.atoms() {
        let x = key[0]
            .to_i64()
            .ok_or_else(|| Error::NonIntegralSupport(key[0].to_string()))?;
        let y = key[1]
            .to_i64()
            .ok_or_else(|| Error::NonIntegralSupport(key[1].to_string()))?;
        let log_y = y_logs[&vec![key[1].clone()]];
        support.push(Atom {
            x,
            y,
            log_joint: prob.log2(),
            log_y,
        });
    }

    let tuple_count = (support.len() as u128)
        .checked_pow(params.n as u32)
        .unwrap_or(u128::MAX);
    if tuple_count > ENUM_GUARD {
        return Err(Error::GuardExceeded { size: tuple_count });
    }

    let h_joint = dist.entropy();
    let h_y = y_marginal.entropy();
    let h_cond = dist.cond_entropy(&CoordSet::new([0]), &CoordSet::new([1]))?;

    let n = params.n;
    let window = n as f64 * params.eps + 1e-9;
    let mut tuples = BTreeSet::new();
    let mut odometer = vec![0usize; n];
    loop {
        let mut log_joint = 0.0;
        let mut log_y = 0.0;
        for &i in &odometer {
            log_joint += support[i].log_joint;
            log_y += support[i].log_y;
        }
        let log_cond = log_joint - log_y;
        let ok = (-log_joint - n as f64 * h_joint).abs() <= window
            && (-log_y - n as f64 * h_y).abs() <= window
            && (-log_cond - n as f64 * h_cond).abs() <= window;
        if ok {
            let x: Vec<i64> = odometer.iter().map(|&i| support[i].x).collect();
            let y: Vec<i64> = odometer.iter().map(|&i| support[i].y).collect();
            tuples.insert((x, y));
        }

        // advance
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(TypicalSet { n, tuples });
            }
            odometer[pos] += 1;
            if odometer[pos] < support.len() {
                break;
            }
            odometer[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::Direction;

    fn r(v: i64) -> Rat {
        Rat::from_int(v)
    }

    fn copy_pair() -> JointDist {
        // X = Y fair bit
        JointDist::uniform(2, [vec![r(0), r(0)], vec![r(1), r(1)]]).unwrap()
    }

    #[test]
    fn copy_pair_is_exactly_typical() {
        let params = TypicalSetParams {
            n: 4,
            eps: 0.1,
            base_m: 0,
        };
        let ts = typical_set_build(&copy_pair(), &params).unwrap();
        // H(X,Y) = 1, so |G| = 2^4 with singleton fibers
        assert_eq!(ts.len(), 16);
        assert_eq!(ts.vertical_size(), 16);
        assert!(ts.fiber_sizes().values().all(|&s| s == 1));
    }

    #[test]
    fn point_mass_gives_singleton() {
        let d = JointDist::point_mass(vec![r(3), r(5)]);
        for n in 1..=5 {
            let ts = typical_set_build(
                &d,
                &TypicalSetParams {
                    n,
                    eps: 0.05,
                    base_m: 0,
                },
            )
            .unwrap();
            assert_eq!(ts.len(), 1);
        }
    }

    #[test]
    fn iid_bits_window_count() {
        // X, Y iid fair bits, n = 6, eps = 0.25: the empirical joint
        // log-probability is exactly -2n for every tuple, so every tuple is
        // typical; cross-check with the binomial oracle.
        let d = JointDist::uniform(
            2,
            [
                vec![r(0), r(0)],
                vec![r(0), r(1)],
                vec![r(1), r(0)],
                vec![r(1), r(1)],
            ],
        )
        .unwrap();
        let n = 6;
        let ts = typical_set_build(
            &d,
            &TypicalSetParams {
                n,
                eps: 0.25,
                base_m: 0,
            },
        )
        .unwrap();
        let lo = 2f64.powf(n as f64 * 2.0 * 0.75);
        let hi = 2f64.powf(n as f64 * 2.0 * 1.25);
        assert!(ts.len() as f64 >= lo && ts.len() as f64 <= hi);
        assert_eq!(ts.len(), 4096); // all 4^6 tuples; uniform law is flat
    }

    #[test]
    fn nonintegral_support_rejected() {
        let d = JointDist::uniform(
            2,
            [vec![Rat::from_frac(1, 2).unwrap(), r(0)], vec![r(1), r(1)]],
        )
        .unwrap();
        let err = typical_set_build(
            &d,
            &TypicalSetParams {
                n: 2,
                eps: 0.1,
                base_m: 0,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonIntegralSupport(_)));
    }

    #[test]
    fn guard_rejects_huge_enumerations() {
        let d = JointDist::uniform(2, (0..32).map(|i| vec![r(i), r(i)])).unwrap();
        let err = typical_set_build(
            &d,
            &TypicalSetParams {
                n: 6,
                eps: 0.1,
                base_m: 0,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::GuardExceeded { .. }));
    }

    #[test]
    fn flatten_bijective_and_commutes() {
        let ts = typical_set_build(
            &copy_pair(),
            &TypicalSetParams {
                n: 3,
                eps: 0.1,
                base_m: 0,
            },
        )
        .unwrap();
        let k = 1;
        let base_m = ts.radix_bound(k) + 1;
        let flat = ts.flatten(base_m, k).unwrap();
        assert_eq!(flat.len(), ts.len());

        // projection cardinalities agree between vector and flat forms for
        // every direction within the radius
        for r_val in -k..=k {
            let vec_size = ts.projection_size(&Rat::from_int(r_val));
            let flat_size = flat
                .projection_size(&Direction::Finite(Rat::from_int(r_val)))
                .unwrap();
            assert_eq!(vec_size, flat_size, "direction {r_val}");
        }
        let vertical_flat = flat.projection_size(&Direction::Infinity).unwrap();
        assert_eq!(ts.vertical_size(), vertical_flat);

        // too-small radix rejected
        assert!(matches!(
            ts.flatten(2, k).unwrap_err(),
            Error::RadixTooSmall { .. }
        ));
    }
}
