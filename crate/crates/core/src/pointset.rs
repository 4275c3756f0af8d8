//! Finite planar point sets over the integers or a prime field, with the
//! projection maps that drive the sumset side of the problem.
//!
//! For a direction `r` the projection is `(x, y) -> x + r*y`; the vertical
//! projection sends `(x, y) -> y`. Fibers are indexed by the second
//! coordinate.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::fourier::{is_prime, mod_inverse};
use crate::rational::Rat;
use crate::{Error, Result};

/// Where the coordinates live.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ambient {
    Integers,
    Mod(u64),
}

/// Projection direction: a finite rational slope or the vertical direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Finite(Rat),
    Infinity,
}

/// Image of a point set under a projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProjectionImage {
    Rationals(BTreeSet<Rat>),
    Residues(BTreeSet<u64>),
}

impl ProjectionImage {
    pub fn len(&self) -> usize {
        match self {
            ProjectionImage::Rationals(s) => s.len(),
            ProjectionImage::Residues(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn residues(&self) -> Option<&BTreeSet<u64>> {
        match self {
            ProjectionImage::Residues(s) => Some(s),
            ProjectionImage::Rationals(_) => None,
        }
    }
}

/// Finite set of planar points, either in Z^2 or in (Z/pZ)^2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    ambient: Ambient,
    points: BTreeSet<(i64, i64)>,
}

impl PointSet {
    pub fn integers(points: impl IntoIterator<Item = (i64, i64)>) -> PointSet {
        PointSet {
            ambient: Ambient::Integers,
            points: points.into_iter().collect(),
        }
    }

    /// Point set with both coordinates reduced mod a prime `p`.
    pub fn modular(p: u64, points: impl IntoIterator<Item = (i64, i64)>) -> Result<PointSet> {
        if !is_prime(p)? {
            return Err(Error::NotPrime(p));
        }
        let m = p as i64;
        let points = points
            .into_iter()
            .map(|(x, y)| (x.rem_euclid(m), y.rem_euclid(m)))
            .collect();
        Ok(PointSet {
            ambient: Ambient::Mod(p),
            points,
        })
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, point: (i64, i64)) -> bool {
        self.points.contains(&point)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.points.iter().copied()
    }

    /// Fibers keyed by the second coordinate.
    pub fn fibers(&self) -> BTreeMap<i64, BTreeSet<i64>> {
        let mut fibers: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
        for &(x, y) in &self.points {
            fibers.entry(y).or_default().insert(x);
        }
        fibers
    }

    pub fn max_fiber_size(&self) -> usize {
        self.fibers().values().map(|f| f.len()).max().unwrap_or(0)
    }

    /// Exact projection image in direction `r`.
    ///
    /// In mod-p mode a finite `r = a/b` needs `b` invertible mod p.
    pub fn project(&self, direction: &Direction) -> Result<ProjectionImage> {
        match (self.ambient, direction) {
            (Ambient::Integers, Direction::Infinity) => Ok(ProjectionImage::Rationals(
                self.points.iter().map(|&(_, y)| Rat::from_int(y)).collect(),
            )),
            (Ambient::Integers, Direction::Finite(r)) => {
                let image = self
                    .points
                    .iter()
                    .map(|&(x, y)| &Rat::from_int(x) + &(r * &Rat::from_int(y)))
                    .collect();
                Ok(ProjectionImage::Rationals(image))
            }
            (Ambient::Mod(_), Direction::Infinity) => Ok(ProjectionImage::Residues(
                self.points.iter().map(|&(_, y)| y as u64).collect(),
            )),
            (Ambient::Mod(p), Direction::Finite(r)) => {
                let rp = rat_mod(r, p)?;
                let image = self
                    .points
                    .iter()
                    .map(|&(x, y)| (x as u64 + (rp * y as u64) % p) % p)
                    .collect();
                Ok(ProjectionImage::Residues(image))
            }
        }
    }

    /// Number of distinct values in direction `r`; convenience wrapper.
    pub fn projection_size(&self, direction: &Direction) -> Result<usize> {
        Ok(self.project(direction)?.len())
    }

    /// True when the vertical projection is injective on the set, i.e. all
    /// second coordinates are distinct.
    pub fn injectivity_check(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.points.iter().all(|&(_, y)| seen.insert(y))
    }
}

/// Reduces a rational to a residue mod p, requiring the denominator to be
/// invertible.
pub fn rat_mod(r: &Rat, p: u64) -> Result<u64> {
    let pb = BigInt::from(p);
    let den_mod = r.denom().mod_floor(&pb).to_u64().expect("residue fits u64");
    if den_mod == 0 {
        return Err(Error::NonInvertibleDenominator {
            den: r.denom().to_string(),
            p,
        });
    }
    let num_mod = r.numer().mod_floor(&pb).to_u64().expect("residue fits u64");
    let inv = mod_inverse(den_mod, p)?;
    Ok(((num_mod as u128 * inv as u128) % p as u128) as u64)
}

// --- serialization -------------------------------------------------------
//
// JSON shape: {"mod": p | null, "points": [[x, y], ...]} in sorted order.

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    #[serde(rename = "mod")]
    modulus: Option<u64>,
    points: Vec<(i64, i64)>,
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PointSetJson {
            modulus: match self.ambient {
                Ambient::Integers => None,
                Ambient::Mod(p) => Some(p),
            },
            points: self.points.iter().copied().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<PointSet, D::Error> {
        let raw = PointSetJson::deserialize(deserializer)?;
        match raw.modulus {
            None => Ok(PointSet::integers(raw.points)),
            Some(p) => PointSet::modular(p, raw.points).map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn project_integer_examples() {
        let g = PointSet::integers([(0, 0), (1, 1), (2, 2)]);
        let img = g.project(&Direction::Finite(Rat::from_int(1))).unwrap();
        assert_eq!(
            img,
            ProjectionImage::Rationals(
                [Rat::from_int(0), Rat::from_int(2), Rat::from_int(4)]
                    .into_iter()
                    .collect()
            )
        );

        let img = g.project(&Direction::Infinity).unwrap();
        assert_eq!(img.len(), 3);

        let g = PointSet::integers([(0, 0), (1, 2)]);
        let img = g
            .project(&Direction::Finite(Rat::from_frac(1, 2).unwrap()))
            .unwrap();
        assert_eq!(
            img,
            ProjectionImage::Rationals([Rat::from_int(0), Rat::from_int(2)].into_iter().collect())
        );
    }

    #[test]
    fn project_mod_p() {
        let g = PointSet::modular(11, [(0, 0), (5, 3), (-1, 12)]).unwrap();
        // (-1, 12) reduces to (10, 1)
        assert!(g.contains((10, 1)));
        let img = g.project(&Direction::Finite(Rat::from_int(2))).unwrap();
        // 0+0=0, 5+6=11=0, 10+2=12=1
        assert_eq!(
            img.residues().unwrap().iter().copied().collect::<Vec<_>>(),
            vec![0, 1]
        );

        // denominator 11 is not invertible mod 11
        let err = g
            .project(&Direction::Finite(Rat::from_frac(1, 11).unwrap()))
            .unwrap_err();
        assert!(matches!(err, Error::NonInvertibleDenominator { .. }));
    }

    #[test]
    fn injectivity() {
        assert!(PointSet::integers([(0, 0), (1, 1)]).injectivity_check());
        assert!(!PointSet::integers([(0, 0), (1, 0)]).injectivity_check());
        // graph of a function y -> x(y)
        let g = PointSet::integers((0..5).map(|y| (y * y, y)));
        assert!(g.injectivity_check());
    }

    #[test]
    fn counting_identities() {
        let g = PointSet::integers([(0, 0), (1, 0), (0, 1), (3, 2)]);
        for r in [-2i64, -1, 0, 1, 2] {
            let size = g
                .projection_size(&Direction::Finite(Rat::from_int(r)))
                .unwrap();
            assert!(size <= g.len());
        }
        let vertical = g.projection_size(&Direction::Infinity).unwrap();
        assert!(g.len() <= vertical * g.max_fiber_size());
    }

    #[test]
    fn json_round_trip() {
        let g = PointSet::modular(7, [(1, 2), (3, 4)]).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.contains("\"mod\":7"));
        let back: PointSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);

        let g = PointSet::integers([(-1, 5)]);
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.contains("\"mod\":null"));
        let back: PointSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
