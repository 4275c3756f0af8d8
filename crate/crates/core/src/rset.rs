//! Finite sets of rational projection directions, in one dimension or as
//! d-tuples.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::rational::Rat;
use crate::{Error, Result};

/// Finite set of d-tuples of rationals acting as projection directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RSet {
    dim: usize,
    elements: BTreeSet<Vec<Rat>>,
}

impl RSet {
    pub fn new(dim: usize, elements: impl IntoIterator<Item = Vec<Rat>>) -> Result<RSet> {
        assert!(dim >= 1, "direction sets need positive dimension");
        let mut set = BTreeSet::new();
        for e in elements {
            if e.len() != dim {
                return Err(Error::RSetDim {
                    expected: dim,
                    got: e.len(),
                });
            }
            set.insert(e);
        }
        if set.is_empty() {
            return Err(Error::RSetTooSmall { need: 1, got: 0 });
        }
        Ok(RSet {
            dim,
            elements: set,
        })
    }

    /// One-dimensional set from scalars.
    pub fn scalars(values: impl IntoIterator<Item = Rat>) -> Result<RSet> {
        RSet::new(1, values.into_iter().map(|v| vec![v]))
    }

    /// One-dimensional set from integers.
    pub fn from_ints(values: impl IntoIterator<Item = i64>) -> Result<RSet> {
        RSet::scalars(values.into_iter().map(Rat::from_int))
    }

    /// d-fold Cartesian power of a one-dimensional set.
    pub fn power(&self, d: usize) -> Result<RSet> {
        assert_eq!(self.dim, 1, "power is defined for scalar sets");
        assert!(d >= 1);
        let scalars: Vec<Rat> = self.elements.iter().map(|e| e[0].clone()).collect();
        let mut tuples: Vec<Vec<Rat>> = vec![Vec::new()];
        for _ in 0..d {
            let mut next = Vec::with_capacity(tuples.len() * scalars.len());
            for t in &tuples {
                for s in &scalars {
                    let mut u = t.clone();
                    u.push(s.clone());
                    next.push(u);
                }
            }
            tuples = next;
        }
        RSet::new(d, tuples)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<Rat>> {
        self.elements.iter()
    }

    /// Scalar values of a one-dimensional set, in sorted order.
    pub fn scalar_values(&self) -> Vec<Rat> {
        assert_eq!(self.dim, 1);
        self.elements.iter().map(|e| e[0].clone()).collect()
    }

    /// True when every coordinate of every element is an integer.
    pub fn is_integral(&self) -> bool {
        self.elements
            .iter()
            .all(|e| e.iter().all(|r| r.is_integer()))
    }

    /// Largest absolute value of max(|numerator|, denominator) over the
    /// elements; the box radius the directions act within.
    pub fn coefficient_radius(&self) -> BigInt {
        let mut k = BigInt::one();
        for e in self.elements.iter() {
            for r in e {
                k = k.max(r.numer().abs()).max(r.denom().clone());
            }
        }
        k
    }

    /// Clears denominators of a one-dimensional set: returns the integral
    /// set m*R and the multiplier m (the lcm of all denominators). The ratio
    /// functionals are invariant under the paired substitution (m*X, m*R).
    pub fn clear_denominators(&self) -> Result<(RSet, BigInt)> {
        if self.dim != 1 {
            return Err(Error::RSetDim {
                expected: 1,
                got: self.dim,
            });
        }
        let mut m = BigInt::one();
        for e in &self.elements {
            m = m.lcm(e[0].denom());
        }
        let mult = Rat::from(m.clone());
        let cleared = RSet::new(
            1,
            self.elements.iter().map(|e| vec![&e[0] * &mult]),
        )?;
        Ok((cleared, m))
    }

    /// Dimension of the affine span of the elements over the rationals.
    pub fn affine_span_dim(&self) -> usize {
        let mut iter = self.elements.iter();
        let base = match iter.next() {
            Some(b) => b,
            None => return 0,
        };
        // Gaussian elimination over exact rationals on the difference vectors.
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        for e in iter {
            let mut v: Vec<Rat> = e.iter().zip(base.iter()).map(|(a, b)| a - b).collect();
            for row in &rows {
                let pivot_idx = row.iter().position(|c| !c.is_zero()).expect("stored rows are nonzero");
                if !v[pivot_idx].is_zero() {
                    let factor = &v[pivot_idx] / &row[pivot_idx];
                    for (vi, ri) in v.iter_mut().zip(row.iter()) {
                        *vi = &*vi - &(&factor * ri);
                    }
                }
            }
            if v.iter().any(|c| !c.is_zero()) {
                rows.push(v);
            }
        }
        rows.len()
    }

    /// Checks that the set affinely spans dimension `dim`.
    pub fn check_affine_span(&self) -> Result<()> {
        let got = self.affine_span_dim();
        if got < self.dim {
            return Err(Error::NonSpanning {
                need: self.dim,
                got,
            });
        }
        Ok(())
    }
}

// JSON shape: {"dim": d, "elements": [["a/b", ...], ...]} in sorted order.
#[derive(Serialize, Deserialize)]
struct RSetJson {
    dim: usize,
    elements: Vec<Vec<Rat>>,
}

impl Serialize for RSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RSetJson {
            dim: self.dim,
            elements: self.elements.iter().cloned().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<RSet, D::Error> {
        let raw = RSetJson::deserialize(deserializer)?;
        RSet::new(raw.dim, raw.elements).map_err(serde::de::Error::custom)
    }
}

/// i64 view of an integral one-dimensional set, used by the embedding and
/// progression stages.
pub fn integral_scalars(rset: &RSet) -> Result<Vec<i64>> {
    if rset.dim() != 1 {
        return Err(Error::RSetDim {
            expected: 1,
            got: rset.dim(),
        });
    }
    rset.scalar_values()
        .iter()
        .map(|r| {
            r.to_i64()
                .ok_or_else(|| Error::NonIntegralSupport(r.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(n: i64, d: i64) -> Rat {
        Rat::from_frac(n, d).unwrap()
    }

    #[test]
    fn clear_denominators_examples() {
        let (cleared, m) = RSet::from_ints([0, 1]).unwrap().clear_denominators().unwrap();
        assert_eq!(m, BigInt::from(1));
        assert_eq!(cleared, RSet::from_ints([0, 1]).unwrap());

        let r = RSet::scalars([rf(1, 2), rf(1, 3)]).unwrap();
        let (cleared, m) = r.clear_denominators().unwrap();
        assert_eq!(m, BigInt::from(6));
        assert_eq!(cleared, RSet::from_ints([3, 2]).unwrap());

        let r = RSet::scalars([rf(-1, 2), Rat::from_int(2)]).unwrap();
        let (cleared, m) = r.clear_denominators().unwrap();
        assert_eq!(m, BigInt::from(2));
        assert_eq!(cleared, RSet::from_ints([-1, 4]).unwrap());
    }

    #[test]
    fn affine_span() {
        // {0,1}^2 spans the plane affinely
        let r = RSet::from_ints([0, 1]).unwrap().power(2).unwrap();
        assert_eq!(r.affine_span_dim(), 2);
        assert!(r.check_affine_span().is_ok());

        // collinear points do not
        let r = RSet::new(
            2,
            [
                vec![Rat::from_int(0), Rat::from_int(0)],
                vec![Rat::from_int(1), Rat::from_int(1)],
                vec![Rat::from_int(2), Rat::from_int(2)],
            ],
        )
        .unwrap();
        assert_eq!(r.affine_span_dim(), 1);
        assert!(matches!(
            r.check_affine_span().unwrap_err(),
            Error::NonSpanning { need: 2, got: 1 }
        ));

        // a single point spans dimension 0
        let r = RSet::from_ints([5]).unwrap();
        assert_eq!(r.affine_span_dim(), 0);
    }

    #[test]
    fn coefficient_radius() {
        let r = RSet::scalars([rf(-5, 3), rf(1, 2)]).unwrap();
        assert_eq!(r.coefficient_radius(), BigInt::from(5));
        let r = RSet::from_ints([0, 1]).unwrap();
        assert_eq!(r.coefficient_radius(), BigInt::from(1));
    }

    #[test]
    fn json_round_trip() {
        let r = RSet::scalars([rf(1, 2), Rat::from_int(-3)]).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: RSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
