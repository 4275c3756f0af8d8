//! Finitely supported joint distributions over rational vectors and the
//! exact entropy calculus on them.
//!
//! Probabilities are exact rationals that sum to exactly 1; zero-probability
//! atoms are stripped on construction so every stored atom is strictly
//! positive. Entropies are reported in bits as doubles; all grouping and
//! conditioning is done by exact rational equality, never by float
//! comparison.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::pointset::{Ambient, PointSet};
use crate::rational::Rat;
use crate::{Error, Result, ENTROPY_TOL};

/// Sorted set of coordinate positions of a joint distribution.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoordSet {
    indices: BTreeSet<usize>,
}

impl CoordSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> CoordSet {
        CoordSet {
            indices: indices.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn union(&self, other: &CoordSet) -> CoordSet {
        CoordSet {
            indices: self.indices.union(&other.indices).copied().collect(),
        }
    }

    pub fn is_disjoint(&self, other: &CoordSet) -> bool {
        self.indices.is_disjoint(&other.indices)
    }

    fn check_range(&self, dim: usize) -> Result<()> {
        if let Some(&max) = self.indices.iter().next_back() {
            if max >= dim {
                return Err(Error::CoordOutOfRange { index: max, dim });
            }
        }
        Ok(())
    }
}

/// Result of a Shearer cover check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShearerReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Finitely supported probability distribution on k-tuples of rationals.
///
/// Component index 0 plays the role of `X`; components `1..=d` play the role
/// of `Y_1..Y_d` wherever a convention is needed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDist {
    dim: usize,
    atoms: BTreeMap<Vec<Rat>, Rat>,
}

impl JointDist {
    /// Builds a distribution from (key, probability) pairs.
    ///
    /// Keys of equal value are merged by exact summation, zero-probability
    /// atoms are stripped, negative probabilities are rejected, and the total
    /// mass must be exactly 1.
    pub fn from_atoms(
        dim: usize,
        atoms: impl IntoIterator<Item = (Vec<Rat>, Rat)>,
    ) -> Result<JointDist> {
        let mut map: BTreeMap<Vec<Rat>, Rat> = BTreeMap::new();
        for (key, prob) in atoms {
            if key.len() != dim {
                return Err(Error::KeyLength {
                    expected: dim,
                    got: key.len(),
                });
            }
            if prob.is_negative() {
                return Err(Error::NonPositiveProbability(prob.to_string()));
            }
            if prob.is_zero() {
                continue;
            }
            match map.entry(key) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(prob);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let merged = e.get() + &prob;
                    *e.get_mut() = merged;
                }
            }
        }
        if map.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let total = map.values().fold(Rat::zero(), |acc, p| &acc + p);
        if !total.is_one() {
            return Err(Error::ProbabilitySum {
                got: total.to_string(),
            });
        }
        Ok(JointDist { dim, atoms: map })
    }

    /// Point mass at a single key.
    pub fn point_mass(key: Vec<Rat>) -> JointDist {
        let dim = key.len();
        JointDist::from_atoms(dim, [(key, Rat::one())]).expect("point mass is a distribution")
    }

    /// Uniform distribution on a set of distinct keys.
    pub fn uniform(dim: usize, keys: impl IntoIterator<Item = Vec<Rat>>) -> Result<JointDist> {
        let keys: BTreeSet<Vec<Rat>> = keys.into_iter().collect();
        if keys.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let n = keys.len() as i64;
        let p = Rat::from_frac(1, n).expect("n >= 1");
        JointDist::from_atoms(dim, keys.into_iter().map(|k| (k, p.clone())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Vec<Rat>, &Rat)> {
        self.atoms.iter()
    }

    /// Shannon entropy in bits: sum of p * log2(1/p) over atoms.
    pub fn entropy(&self) -> f64 {
        self.atoms
            .values()
            .map(|p| {
                let pf = p.to_f64();
                -pf * pf.log2()
            })
            .sum()
    }

    /// Projection onto the coordinates in `coords`, merging collided keys
    /// by exact summation.
    pub fn marginal(&self, coords: &CoordSet) -> Result<JointDist> {
        if coords.is_empty() {
            return Err(Error::EmptyCoordSet);
        }
        coords.check_range(self.dim)?;
        let mut map: BTreeMap<Vec<Rat>, Rat> = BTreeMap::new();
        for (key, prob) in &self.atoms {
            let projected: Vec<Rat> = coords.iter().map(|i| key[i].clone()).collect();
            map.entry(projected)
                .and_modify(|acc| *acc = &*acc + prob)
                .or_insert_with(|| prob.clone());
        }
        Ok(JointDist {
            dim: coords.len(),
            atoms: map,
        })
    }

    /// Conditional entropy H(A | B) in bits, computed fiber by fiber:
    /// the B-expectation of the entropy of the conditional law of A.
    ///
    /// An empty `B` is the unconditional case and returns H(A).
    pub fn cond_entropy(&self, a: &CoordSet, b: &CoordSet) -> Result<f64> {
        if a.is_empty() {
            return Err(Error::EmptyCoordSet);
        }
        a.check_range(self.dim)?;
        b.check_range(self.dim)?;
        if let Some(shared) = a.iter().find(|i| b.contains(*i)) {
            return Err(Error::OverlappingCoordSets { index: shared });
        }
        if b.is_empty() {
            return Ok(self.marginal(a)?.entropy());
        }

        // Group the (A,B)-marginal by the B-part; each group is one fiber.
        let mut fibers: BTreeMap<Vec<Rat>, BTreeMap<Vec<Rat>, Rat>> = BTreeMap::new();
        for (key, prob) in &self.atoms {
            let bk: Vec<Rat> = b.iter().map(|i| key[i].clone()).collect();
            let ak: Vec<Rat> = a.iter().map(|i| key[i].clone()).collect();
            fibers
                .entry(bk)
                .or_default()
                .entry(ak)
                .and_modify(|acc| *acc = &*acc + prob)
                .or_insert_with(|| prob.clone());
        }

        let mut total = 0.0;
        for fiber in fibers.values() {
            let mass = fiber.values().fold(Rat::zero(), |acc, p| &acc + p);
            let mut h_fiber = 0.0;
            for p in fiber.values() {
                let cond = p / &mass;
                let cf = cond.to_f64();
                h_fiber -= cf * cf.log2();
            }
            total += mass.to_f64() * h_fiber;
        }
        Ok(total)
    }

    /// Distribution of the exact rational linear combination
    /// `sum_i coeffs[i] * key[i]`; equal values are grouped exactly.
    pub fn pushforward_linear(&self, coeffs: &[Rat]) -> Result<JointDist> {
        if coeffs.len() != self.dim {
            return Err(Error::CoeffLength {
                expected: self.dim,
                got: coeffs.len(),
            });
        }
        let mut map: BTreeMap<Vec<Rat>, Rat> = BTreeMap::new();
        for (key, prob) in &self.atoms {
            let mut value = Rat::zero();
            for (c, x) in coeffs.iter().zip(key.iter()) {
                if !c.is_zero() {
                    value = &value + &(c * x);
                }
            }
            map.entry(vec![value])
                .and_modify(|acc| *acc = &*acc + prob)
                .or_insert_with(|| prob.clone());
        }
        Ok(JointDist { dim: 1, atoms: map })
    }

    /// Relabels atom keys through an injective map. Colliding images are
    /// rejected, so the entropy is preserved exactly.
    pub fn map_keys(&self, f: impl Fn(&[Rat]) -> Vec<Rat>) -> Result<JointDist> {
        let mut map: BTreeMap<Vec<Rat>, Rat> = BTreeMap::new();
        let mut dim = None;
        for (key, prob) in &self.atoms {
            let image = f(key);
            match dim {
                None => dim = Some(image.len()),
                Some(d) if d == image.len() => {}
                Some(d) => {
                    return Err(Error::KeyLength {
                        expected: d,
                        got: image.len(),
                    })
                }
            }
            if map.insert(image, prob.clone()).is_some() {
                return Err(Error::Internal(
                    "map_keys requires an injective relabeling".into(),
                ));
            }
        }
        Ok(JointDist {
            dim: dim.unwrap_or(0),
            atoms: map,
        })
    }

    /// Pushforward along an arbitrary key map: colliding images merge by
    /// exact summation.
    pub fn map_keys_merging(&self, f: impl Fn(&[Rat]) -> Vec<Rat>) -> Result<JointDist> {
        let mut map: BTreeMap<Vec<Rat>, Rat> = BTreeMap::new();
        let mut dim = None;
        for (key, prob) in &self.atoms {
            let image = f(key);
            match dim {
                None => dim = Some(image.len()),
                Some(d) if d == image.len() => {}
                Some(d) => {
                    return Err(Error::KeyLength {
                        expected: d,
                        got: image.len(),
                    })
                }
            }
            map.entry(image)
                .and_modify(|acc| *acc = &*acc + prob)
                .or_insert_with(|| prob.clone());
        }
        Ok(JointDist {
            dim: dim.unwrap_or(0),
            atoms: map,
        })
    }

    /// Checks the Shearer cover inequality for a family of coordinate sets
    /// in which every coordinate appears in at least `t` members:
    /// H(full) <= (1/t) * sum over the family of H(marginal).
    pub fn shearer_check(&self, family: &[CoordSet], t: usize) -> Result<ShearerReport> {
        assert!(t >= 1, "cover multiplicity must be positive");
        for coord in 0..self.dim {
            let have = family.iter().filter(|f| f.contains(coord)).count();
            if have < t {
                return Err(Error::ShearerCoverage {
                    coord,
                    have,
                    need: t,
                });
            }
        }
        let lhs = self.entropy();
        let mut rhs = 0.0;
        for f in family {
            rhs += self.marginal(f)?.entropy();
        }
        rhs /= t as f64;
        Ok(ShearerReport {
            lhs,
            rhs,
            holds: lhs <= rhs + ENTROPY_TOL,
        })
    }
}

/// The two-component distribution of a uniformly random vertical fiber:
/// the second component is uniform on the vertical projection of `g`, and
/// the first is uniform on the fiber above it. Component 0 sits over the
/// first coordinate of the points.
pub fn uniform_graph_dist(g: &PointSet) -> Result<JointDist> {
    if g.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let fibers = g.fibers();
    let n_columns = fibers.len() as i64;
    let column_mass = Rat::from_frac(1, n_columns).expect("nonempty");
    let mut atoms = Vec::with_capacity(g.len());
    for (y, xs) in &fibers {
        let in_fiber = Rat::from_frac(1, xs.len() as i64).expect("nonempty fiber");
        let p = &column_mass * &in_fiber;
        for x in xs {
            atoms.push((vec![coord_to_rat(*x, g.ambient()), coord_to_rat(*y, g.ambient())], p.clone()));
        }
    }
    JointDist::from_atoms(2, atoms)
}

fn coord_to_rat(v: i64, ambient: Ambient) -> Rat {
    match ambient {
        Ambient::Integers => Rat::from_int(v),
        Ambient::Mod(_) => Rat::from_int(v),
    }
}

// --- serialization -------------------------------------------------------
//
// JSON shape: {"dim": k, "atoms": [{"key": ["p/q", ...], "prob": "a/b"}, ...]}
// with rationals in canonical string form. Atoms are emitted in sorted key
// order so serialization is deterministic.

#[derive(Serialize, Deserialize)]
struct AtomJson {
    key: Vec<Rat>,
    prob: Rat,
}

#[derive(Serialize, Deserialize)]
struct JointDistJson {
    dim: usize,
    atoms: Vec<AtomJson>,
}

impl Serialize for JointDist {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms = self
            .atoms
            .iter()
            .map(|(k, p)| AtomJson {
                key: k.clone(),
                prob: p.clone(),
            })
            .collect();
        JointDistJson {
            dim: self.dim,
            atoms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JointDist {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<JointDist, D::Error> {
        let raw = JointDistJson::deserialize(deserializer)?;
        JointDist::from_atoms(raw.dim, raw.atoms.into_iter().map(|a| (a.key, a.prob)))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn rf(n: i64, d: i64) -> Rat {
        Rat::from_frac(n, d).unwrap()
    }

    fn fair_bit_pair() -> JointDist {
        // (X, Y) with atoms (0,0):1/2, (0,1):1/4, (1,1):1/4
        JointDist::from_atoms(
            2,
            [
                (vec![r(0), r(0)], rf(1, 2)),
                (vec![r(0), r(1)], rf(1, 4)),
                (vec![r(1), r(1)], rf(1, 4)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn entropy_point_mass_is_zero() {
        let d = JointDist::point_mass(vec![r(7)]);
        assert_eq!(d.entropy(), 0.0);
    }

    #[test]
    fn entropy_fair_bit_is_one() {
        let d = JointDist::uniform(1, [vec![r(0)], vec![r(1)]]).unwrap();
        assert!((d.entropy() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_half_quarter_quarter() {
        let d = JointDist::from_atoms(
            1,
            [
                (vec![r(0)], rf(1, 2)),
                (vec![r(1)], rf(1, 4)),
                (vec![r(2)], rf(1, 4)),
            ],
        )
        .unwrap();
        assert!((d.entropy() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bad_mass_rejected() {
        let err = JointDist::from_atoms(1, [(vec![r(0)], rf(1, 2))]).unwrap_err();
        assert!(matches!(err, Error::ProbabilitySum { .. }));
        let err =
            JointDist::from_atoms(1, [(vec![r(0)], rf(3, 2)), (vec![r(1)], rf(-1, 2))]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveProbability(_)));
    }

    #[test]
    fn duplicate_keys_merge_and_zeros_strip() {
        let d = JointDist::from_atoms(
            1,
            [
                (vec![rf(2, 4)], rf(1, 2)),
                (vec![rf(1, 2)], rf(1, 2)),
                (vec![r(9)], Rat::zero()),
            ],
        )
        .unwrap();
        assert_eq!(d.num_atoms(), 1);
        assert_eq!(d.entropy(), 0.0);
    }

    #[test]
    fn marginal_examples() {
        let d = JointDist::uniform(2, [vec![r(0), r(0)], vec![r(1), r(1)]]).unwrap();
        let m = d.marginal(&CoordSet::new([1])).unwrap();
        assert_eq!(m, JointDist::uniform(1, [vec![r(0)], vec![r(1)]]).unwrap());

        let d = fair_bit_pair();
        let m = d.marginal(&CoordSet::new([0])).unwrap();
        let expected = JointDist::from_atoms(
            1,
            [(vec![r(0)], rf(3, 4)), (vec![r(1)], rf(1, 4))],
        )
        .unwrap();
        assert_eq!(m, expected);

        assert!(matches!(
            d.marginal(&CoordSet::new([])).unwrap_err(),
            Error::EmptyCoordSet
        ));
    }

    #[test]
    fn cond_entropy_examples() {
        // X = Y fair bit: H(X|Y) = 0
        let d = JointDist::uniform(2, [vec![r(0), r(0)], vec![r(1), r(1)]]).unwrap();
        let h = d
            .cond_entropy(&CoordSet::new([0]), &CoordSet::new([1]))
            .unwrap();
        assert!(h.abs() < 1e-12);

        // independent fair bits: H(X|Y) = 1
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
        let h = d
            .cond_entropy(&CoordSet::new([0]), &CoordSet::new([1]))
            .unwrap();
        assert!((h - 1.0).abs() < 1e-12);

        // per-fiber evaluation: 1/2 * 0 + 1/2 * 1 = 1/2
        let d = fair_bit_pair();
        let h = d
            .cond_entropy(&CoordSet::new([0]), &CoordSet::new([1]))
            .unwrap();
        assert!((h - 0.5).abs() < 1e-12);

        assert!(matches!(
            d.cond_entropy(&CoordSet::new([0]), &CoordSet::new([0]))
                .unwrap_err(),
            Error::OverlappingCoordSets { index: 0 }
        ));
    }

    #[test]
    fn pushforward_examples() {
        let d = JointDist::uniform(
            2,
            [vec![r(0), r(0)], vec![r(1), r(1)], vec![r(2), r(2)]],
        )
        .unwrap();
        let s = d.pushforward_linear(&[r(1), r(1)]).unwrap();
        assert_eq!(
            s,
            JointDist::uniform(1, [vec![r(0)], vec![r(2)], vec![r(4)]]).unwrap()
        );

        let z = d.pushforward_linear(&[r(0), r(0)]).unwrap();
        assert_eq!(z, JointDist::point_mass(vec![r(0)]));

        // independent fair bits convolve to {0:1/4, 1:1/2, 2:1/4}
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
        let s = d.pushforward_linear(&[r(1), r(1)]).unwrap();
        let expected = JointDist::from_atoms(
            1,
            [
                (vec![r(0)], rf(1, 4)),
                (vec![r(1)], rf(1, 2)),
                (vec![r(2)], rf(1, 4)),
            ],
        )
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn pushforward_unit_vector_equals_marginal() {
        let d = fair_bit_pair();
        for i in 0..2 {
            let mut coeffs = vec![r(0), r(0)];
            coeffs[i] = r(1);
            let push = d.pushforward_linear(&coeffs).unwrap();
            let marg = d.marginal(&CoordSet::new([i])).unwrap();
            assert_eq!(push, marg);
        }
    }

    #[test]
    fn shearer_examples() {
        // three independent fair bits, all 2-subsets, t = 2: tight
        let bits: Vec<Vec<Rat>> = (0..8)
            .map(|k: i64| vec![r(k & 1), r((k >> 1) & 1), r((k >> 2) & 1)])
            .collect();
        let d = JointDist::uniform(3, bits).unwrap();
        let family = vec![
            CoordSet::new([0, 1]),
            CoordSet::new([0, 2]),
            CoordSet::new([1, 2]),
        ];
        let rep = d.shearer_check(&family, 2).unwrap();
        assert!((rep.lhs - 3.0).abs() < 1e-12);
        assert!((rep.rhs - 3.0).abs() < 1e-12);
        assert!(rep.holds);

        // fully correlated bits: lhs 1, rhs 1.5
        let d = JointDist::uniform(3, [vec![r(0), r(0), r(0)], vec![r(1), r(1), r(1)]]).unwrap();
        let rep = d.shearer_check(&family, 2).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-12);
        assert!((rep.rhs - 1.5).abs() < 1e-12);
        assert!(rep.holds);

        // identity cover: lhs = rhs
        let rep = d
            .shearer_check(&[CoordSet::new([0, 1, 2])], 1)
            .unwrap();
        assert_eq!(rep.lhs, rep.rhs);

        // coverage shortfall names the uncovered coordinate
        let err = d.shearer_check(&[CoordSet::new([0, 1])], 1).unwrap_err();
        assert!(matches!(err, Error::ShearerCoverage { coord: 2, .. }));
    }

    #[test]
    fn uniform_graph_dist_examples() {
        let g = PointSet::integers([(0, 0), (1, 1)]);
        let d = uniform_graph_dist(&g).unwrap();
        assert_eq!(
            d,
            JointDist::uniform(2, [vec![r(0), r(0)], vec![r(1), r(1)]]).unwrap()
        );

        let g = PointSet::integers([(0, 0), (1, 0), (0, 1)]);
        let d = uniform_graph_dist(&g).unwrap();
        let expected = JointDist::from_atoms(
            2,
            [
                (vec![r(0), r(0)], rf(1, 4)),
                (vec![r(1), r(0)], rf(1, 4)),
                (vec![r(0), r(1)], rf(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(d, expected);

        // full grid is a product of uniforms
        let g = PointSet::integers([(0, 0), (0, 1), (1, 0), (1, 1)]);
        let d = uniform_graph_dist(&g).unwrap();
        assert_eq!(
            d,
            JointDist::uniform(
                2,
                [
                    vec![r(0), r(0)],
                    vec![r(0), r(1)],
                    vec![r(1), r(0)],
                    vec![r(1), r(1)],
                ]
            )
            .unwrap()
        );
    }

    #[test]
    fn json_round_trip() {
        let d = fair_bit_pair();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"dim\":2"));
        assert!(json.contains("\"prob\":\"1/2\""));
        let back: JointDist = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn json_bad_sum_rejected() {
        let json = r#"{"dim":1,"atoms":[{"key":["0"],"prob":"1/2"}]}"#;
        assert!(serde_json::from_str::<JointDist>(json).is_err());
    }
}
