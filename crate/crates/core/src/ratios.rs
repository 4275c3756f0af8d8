//! The entropy ratio functionals whose suprema over witness distributions
//! define the constants beta(R), together with certified bound values.
//!
//! Conventions: a two-component distribution holds (X, Y) with X at index 0;
//! a (d+1)-component distribution holds (X, Y_1..Y_d). Every finite ratio
//! value is a valid lower-bound witness for the corresponding constant.

use serde::{Deserialize, Serialize};

use crate::dist::{CoordSet, JointDist};
use crate::rational::Rat;
use crate::rset::RSet;
use crate::{Error, Result, ENTROPY_TOL};

/// Which functional a witness certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Kakeya,
    Homogeneous,
    Gap,
}

impl Functional {
    pub fn name(self) -> &'static str {
        match self {
            Functional::Kakeya => "kakeya",
            Functional::Homogeneous => "homogeneous",
            Functional::Gap => "gap",
        }
    }
}

/// Entropy of the projection X + <r, Y> for one direction tuple.
fn projection_entropy(dist: &JointDist, direction: &[Rat]) -> Result<f64> {
    let mut coeffs = Vec::with_capacity(dist.dim());
    coeffs.push(Rat::one());
    coeffs.extend(direction.iter().cloned());
    Ok(dist.pushforward_linear(&coeffs)?.entropy())
}

/// Entropies H(X + <r, Y>) for every direction, in sorted direction order,
/// with the hard maximum and its argmax (ties break to the lexicographically
/// smallest tuple, which sorted-order iteration gives for free).
pub fn projection_profile(dist: &JointDist, rset: &RSet) -> Result<(Vec<(Vec<Rat>, f64)>, f64, Vec<Rat>)> {
    if dist.dim() != rset.dim() + 1 {
        return Err(Error::DistDim {
            expected: rset.dim() + 1,
            got: dist.dim(),
        });
    }
    let mut per_r = Vec::with_capacity(rset.len());
    let mut best = f64::NEG_INFINITY;
    let mut argmax = None;
    for direction in rset.iter() {
        let h = projection_entropy(dist, direction)?;
        if h > best {
            best = h;
            argmax = Some(direction.clone());
        }
        per_r.push((direction.clone(), h));
    }
    Ok((per_r, best, argmax.expect("nonempty direction set")))
}

/// The plain ratio H(Y) / max_r H(X + rY) for a two-component distribution.
///
/// Any finite value lower-bounds beta(R). When every projection entropy
/// vanishes the witness is unbounded and rejected.
pub fn kakeya_ratio(dist: &JointDist, rset: &RSet) -> Result<f64> {
    if rset.dim() != 1 {
        return Err(Error::RSetDim {
            expected: 1,
            got: rset.dim(),
        });
    }
    let (_, max_h, _) = projection_profile(dist, rset)?;
    if max_h <= 0.0 {
        return Err(Error::UnboundedWitness);
    }
    let h_y = dist.marginal(&CoordSet::new([1]))?.entropy();
    Ok(h_y / max_h)
}

/// The homogeneous ratio (H(Y) - H(X|Y)) / (max_r H(X+rY) - H(X|Y)).
///
/// Needs at least two directions: for distinct r, r' the pair of projections
/// determines (X, Y), which keeps the denominator positive whenever the
/// numerator is. A nonpositive numerator yields 0 (no witness content).
pub fn homogeneous_ratio(dist: &JointDist, rset: &RSet) -> Result<f64> {
    if rset.dim() != 1 {
        return Err(Error::RSetDim {
            expected: 1,
            got: rset.dim(),
        });
    }
    if rset.len() < 2 {
        return Err(Error::RSetTooSmall {
            need: 2,
            got: rset.len(),
        });
    }
    let h_y = dist.marginal(&CoordSet::new([1]))?.entropy();
    let h_x_given_y = dist.cond_entropy(&CoordSet::new([0]), &CoordSet::new([1]))?;
    let numerator = h_y - h_x_given_y;
    if numerator <= 0.0 {
        return Ok(0.0);
    }
    let (_, max_h, _) = projection_profile(dist, rset)?;
    let denominator = max_h - h_x_given_y;
    if denominator <= 0.0 {
        // impossible for |R| >= 2 up to float noise; refuse to divide
        return Err(Error::Internal(format!(
            "homogeneous denominator {denominator} nonpositive with positive numerator"
        )));
    }
    Ok(numerator / denominator)
}

/// The d-dimensional ratio H(Y_1..Y_d) / max_r H(X + <r, Y>), for direction
/// sets that affinely span dimension d.
pub fn gap_ratio(dist: &JointDist, rset: &RSet) -> Result<f64> {
    rset.check_affine_span()?;
    if dist.dim() != rset.dim() + 1 {
        return Err(Error::DistDim {
            expected: rset.dim() + 1,
            got: dist.dim(),
        });
    }
    let (_, max_h, _) = projection_profile(dist, rset)?;
    if max_h <= 0.0 {
        return Err(Error::UnboundedWitness);
    }
    let y_coords = CoordSet::new(1..dist.dim());
    let h_y = dist.marginal(&y_coords)?.entropy();
    Ok(h_y / max_h)
}

/// Evaluates the chosen functional.
pub fn evaluate(functional: Functional, dist: &JointDist, rset: &RSet) -> Result<f64> {
    match functional {
        Functional::Kakeya => kakeya_ratio(dist, rset),
        Functional::Homogeneous => homogeneous_ratio(dist, rset),
        Functional::Gap => gap_ratio(dist, rset),
    }
}

/// Side of a certified bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Where a bound value came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// A replayable witness distribution found by search or by hand.
    Witness {
        dist: JointDist,
        functional: Functional,
        seed: u64,
    },
    /// A named closed-form formula.
    Formula { name: String },
    /// A combination of other bounds, recorded as a readable trace.
    Combination { trace: Vec<String> },
}

/// A certified numeric statement "beta(R) <op> value" with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaBound {
    pub rset: RSet,
    pub kind: BoundKind,
    pub value: f64,
    pub provenance: Provenance,
}

impl BetaBound {
    pub fn witness(&self) -> Option<&JointDist> {
        match &self.provenance {
            Provenance::Witness { dist, .. } => Some(dist),
            _ => None,
        }
    }
}

/// Recomputes the ratio of a lower bound from its stored witness. The replay
/// must match the stored value within the entropy tolerance.
pub fn witness_replay(bound: &BetaBound) -> Result<f64> {
    let (dist, functional) = match &bound.provenance {
        Provenance::Witness {
            dist, functional, ..
        } => (dist, *functional),
        _ => return Err(Error::MissingWitness),
    };
    let replayed = evaluate(functional, dist, &bound.rset)?;
    if (replayed - bound.value).abs() > ENTROPY_TOL {
        return Err(Error::WitnessMismatch {
            stored: bound.value,
            replayed,
        });
    }
    Ok(replayed)
}

// Flat JSON shape:
// {"rset":…, "kind":"lower", "value":…, "witness":…, "seed":…, "functional":"kakeya"}
// with "formula" / "trace" taking the witness fields' place for the other
// provenance forms.
#[derive(Serialize, Deserialize)]
struct BetaBoundJson {
    rset: RSet,
    kind: BoundKind,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<JointDist>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    functional: Option<Functional>,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
}

impl Serialize for BetaBound {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut json = BetaBoundJson {
            rset: self.rset.clone(),
            kind: self.kind,
            value: self.value,
            witness: None,
            seed: None,
            functional: None,
            formula: None,
            trace: None,
        };
        match &self.provenance {
            Provenance::Witness {
                dist,
                functional,
                seed,
            } => {
                json.witness = Some(dist.clone());
                json.seed = Some(*seed);
                json.functional = Some(*functional);
            }
            Provenance::Formula { name } => json.formula = Some(name.clone()),
            Provenance::Combination { trace } => json.trace = Some(trace.clone()),
        }
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BetaBound {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<BetaBound, D::Error> {
        let raw = BetaBoundJson::deserialize(deserializer)?;
        let provenance = match (raw.witness, raw.formula, raw.trace) {
            (Some(dist), None, None) => Provenance::Witness {
                dist,
                functional: raw
                    .functional
                    .ok_or_else(|| serde::de::Error::custom("witness bound missing functional"))?,
                seed: raw.seed.unwrap_or(0),
            },
            (None, Some(name), None) => Provenance::Formula { name },
            (None, None, Some(trace)) => Provenance::Combination { trace },
            _ => return Err(serde::de::Error::custom("ambiguous bound provenance")),
        };
        Ok(BetaBound {
            rset: raw.rset,
            kind: raw.kind,
            value: raw.value,
            provenance,
        })
    }
}

/// The textbook witness attaining ratio 2 for the direction set {0, 1}:
/// Y uniform on {0 .. n^2 - 1} and X = -(Y mod n).
pub fn digit_witness(n: i64) -> JointDist {
    assert!(n >= 2);
    let keys = (0..n * n).map(|y| vec![Rat::from_int(-(y % n)), Rat::from_int(y)]);
    JointDist::uniform(2, keys).expect("distinct keys")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn independent_fair_bits() -> JointDist {
        JointDist::uniform(
            2,
            [
                vec![r(0), r(0)],
                vec![r(0), r(1)],
                vec![r(1), r(0)],
                vec![r(1), r(1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn digit_witness_ratio_is_two() {
        let d = digit_witness(2);
        let rset = RSet::from_ints([0, 1]).unwrap();
        let ratio = kakeya_ratio(&d, &rset).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);

        // components: H(Y) = 2, H(X) = 1, H(X+Y) = 1
        let h_y = d.marginal(&CoordSet::new([1])).unwrap().entropy();
        assert!((h_y - 2.0).abs() < 1e-12);
        let h_x = d.pushforward_linear(&[r(1), r(0)]).unwrap().entropy();
        assert!((h_x - 1.0).abs() < 1e-12);
        let h_sum = d.pushforward_linear(&[r(1), r(1)]).unwrap().entropy();
        assert!((h_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_bits_ratio() {
        let d = independent_fair_bits();
        let rset = RSet::from_ints([0, 1]).unwrap();
        let ratio = kakeya_ratio(&d, &rset).unwrap();
        assert!((ratio - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn point_x_single_direction() {
        // X a point mass, Y a fair bit, R = {1}: H(Y) = H(X+Y) so ratio 1
        let d = JointDist::uniform(2, [vec![r(0), r(0)], vec![r(0), r(1)]]).unwrap();
        let rset = RSet::from_ints([1]).unwrap();
        assert!((kakeya_ratio(&d, &rset).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_witness_rejected() {
        // X and Y both point masses make every projection entropy zero
        let d = JointDist::point_mass(vec![r(3), r(5)]);
        let rset = RSet::from_ints([0, 1]).unwrap();
        assert!(matches!(
            kakeya_ratio(&d, &rset).unwrap_err(),
            Error::UnboundedWitness
        ));
    }

    #[test]
    fn homogeneous_examples() {
        let rset = RSet::from_ints([0, 1]).unwrap();

        // digit witness: H(X|Y) = 0, so the two functionals agree at 2
        let d = digit_witness(2);
        assert!((homogeneous_ratio(&d, &rset).unwrap() - 2.0).abs() < 1e-12);

        // independence kills the witness: numerator H(Y) - H(X|Y) = 0
        let d = independent_fair_bits();
        assert_eq!(homogeneous_ratio(&d, &rset).unwrap(), 0.0);

        // Y and X independent uniforms on {0..3}: H(X|Y) = H(Y), so the
        // numerator vanishes and the ratio is defined to be 0
        let keys = (0..4).flat_map(|y| (0..4).map(move |x| vec![r(x), r(y)]));
        let d = JointDist::uniform(2, keys).unwrap();
        assert_eq!(homogeneous_ratio(&d, &rset).unwrap(), 0.0);

        // single-direction sets rejected for the homogeneous form
        let single = RSet::from_ints([0]).unwrap();
        assert!(matches!(
            homogeneous_ratio(&d, &single).unwrap_err(),
            Error::RSetTooSmall { need: 2, got: 1 }
        ));
    }

    #[test]
    fn homogeneous_matches_kakeya_when_x_determined() {
        // whenever H(X|Y) = 0 exactly the two ratios agree
        for n in 2..=4 {
            let d = digit_witness(n);
            let rset = RSet::from_ints([0, 1]).unwrap();
            let a = kakeya_ratio(&d, &rset).unwrap();
            let b = homogeneous_ratio(&d, &rset).unwrap();
            assert!((a - b).abs() < ENTROPY_TOL);
        }
    }

    #[test]
    fn gap_examples() {
        // d = 2, Y1 = Y2 fair bit, X = 0, R = {0,1}^2: max projection
        // entropy is attained at (1,0) with value 1, so the ratio is 1
        let d = JointDist::uniform(3, [vec![r(0), r(0), r(0)], vec![r(0), r(1), r(1)]]).unwrap();
        let rset = RSet::from_ints([0, 1]).unwrap().power(2).unwrap();
        let (_, max_h, argmax) = projection_profile(&d, &rset).unwrap();
        assert!((max_h - 1.0).abs() < 1e-12);
        assert_eq!(argmax, vec![r(0), r(1)]); // lexicographically first tie
        assert!((gap_ratio(&d, &rset).unwrap() - 1.0).abs() < 1e-12);

        // non-spanning sets are rejected with the deficient dimension
        let line = RSet::new(2, [vec![r(0), r(0)], vec![r(1), r(1)]]).unwrap();
        assert!(matches!(
            gap_ratio(&d, &line).unwrap_err(),
            Error::NonSpanning { need: 2, got: 1 }
        ));
    }

    #[test]
    fn gap_iid_uniform_nibbles() {
        // X = 0, Y1, Y2 iid uniform on {0..15}: H(Y1,Y2) = 8 and the max
        // projection entropy is H(Y1+Y2) < 5, so the ratio exceeds 1.6
        let keys = (0..16).flat_map(|y1| (0..16).map(move |y2| vec![r(0), r(y1), r(y2)]));
        let d = JointDist::uniform(3, keys).unwrap();
        let rset = RSet::from_ints([0, 1]).unwrap().power(2).unwrap();
        let ratio = gap_ratio(&d, &rset).unwrap();
        assert!(ratio > 1.6, "ratio {ratio}");
        // independent oracle: entropy of the triangular convolution law
        let mut h_conv = 0.0;
        for s in 0..=30i64 {
            let ways = (16 - (s - 15).abs()).max(0) as f64;
            let p = ways / 256.0;
            h_conv -= p * p.log2();
        }
        assert!((ratio - 8.0 / h_conv).abs() < 1e-9);
    }

    #[test]
    fn gap_affine_change_of_variables() {
        // an invertible substitution on (Y1, Y2) paired with the induced
        // affine map on the directions leaves the profile unchanged
        let keys = (0..3).flat_map(|y1| (0..3).map(move |y2| vec![r((y1 * y2) % 3), r(y1), r(y2)]));
        let d = JointDist::uniform(3, keys).unwrap();
        let rset = RSet::from_ints([0, 1]).unwrap().power(2).unwrap();

        // substitution (Y1, Y2) -> (Y1 + Y2, Y2); directions map r -> (r1, r2 - r1)
        let d_sub = d
            .map_keys(|k| vec![k[0].clone(), &k[1] + &k[2], k[2].clone()])
            .unwrap();
        let rset_sub = RSet::new(
            2,
            rset.iter().map(|e| vec![e[0].clone(), &e[1] - &e[0]]),
        )
        .unwrap();

        let a = gap_ratio(&d, &rset).unwrap();
        let b = gap_ratio(&d_sub, &rset_sub).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn replay_detects_corruption() {
        let rset = RSet::from_ints([0, 1]).unwrap();
        let dist = digit_witness(2);
        let value = kakeya_ratio(&dist, &rset).unwrap();
        let bound = BetaBound {
            rset: rset.clone(),
            kind: BoundKind::Lower,
            value,
            provenance: Provenance::Witness {
                dist,
                functional: Functional::Kakeya,
                seed: 7,
            },
        };
        assert!((witness_replay(&bound).unwrap() - 2.0).abs() < 1e-12);

        let mut corrupt = bound.clone();
        corrupt.value = 1.9;
        assert!(matches!(
            witness_replay(&corrupt).unwrap_err(),
            Error::WitnessMismatch { .. }
        ));

        let formula_bound = BetaBound {
            rset,
            kind: BoundKind::Upper,
            value: 2.0,
            provenance: Provenance::Formula {
                name: "two-point-direction-set".into(),
            },
        };
        assert!(matches!(
            witness_replay(&formula_bound).unwrap_err(),
            Error::MissingWitness
        ));
    }

    #[test]
    fn scale_invariance() {
        let rset = RSet::from_ints([0, 1]).unwrap();
        let d = digit_witness(3);
        let base = kakeya_ratio(&d, &rset).unwrap();
        for scale in [Rat::from_int(2), Rat::from_frac(1, 3).unwrap(), Rat::from_int(-5)] {
            let scaled = d
                .map_keys(|k| vec![&k[0] * &scale, &k[1] * &scale])
                .unwrap();
            let v = kakeya_ratio(&scaled, &rset).unwrap();
            assert!((v - base).abs() < 1e-9);
        }
    }

    #[test]
    fn bound_json_round_trip() {
        let rset = RSet::from_ints([0, 1]).unwrap();
        let dist = digit_witness(2);
        let bound = BetaBound {
            rset,
            kind: BoundKind::Lower,
            value: 2.0,
            provenance: Provenance::Witness {
                dist,
                functional: Functional::Kakeya,
                seed: 11,
            },
        };
        let json = serde_json::to_string(&bound).unwrap();
        assert!(json.contains("\"functional\":\"kakeya\""));
        assert!(json.contains("\"seed\":11"));
        let back: BetaBound = serde_json::from_str(&json).unwrap();
        assert_eq!(back, bound);
    }
}
