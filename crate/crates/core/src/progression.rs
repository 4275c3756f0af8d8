//! Random arithmetic progressions in a prime field and the exact
//! verification of the fiber-hitting probability identity.
//!
//! A draw picks a common difference d != 0 and offset t uniformly and forms
//!
//! * I0     = {d*j        : j in 0..m}
//! * I      = t + I0
//! * J      = {d*j        : j in ceil(m/2)..=m}
//! * Itilde = t + d * {-k*m .. (m-1) + k*m}
//!
//! Itilde is the difference-stable hull of I under adding r*J for every
//! integer |r| <= k, so projections of the restricted graph stay inside it.
//! The restricted graph keeps the points with x in I and y in J.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fourier::{mod_inverse, FpSet};
use crate::pointset::{Ambient, Direction, PointSet};
use crate::rational::Rat;
use crate::rset::{integral_scalars, RSet};
use crate::{Error, Result};

/// A sampled progression: modulus, common difference, offset, length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressionTriple {
    pub p: u64,
    pub d: u64,
    pub t: u64,
    pub m: u64,
}

/// Everything one draw produces.
#[derive(Clone, Debug)]
pub struct ProgressionSample {
    pub triple: ProgressionTriple,
    pub i0: BTreeSet<u64>,
    pub i: BTreeSet<u64>,
    pub j: BTreeSet<u64>,
    pub itilde: BTreeSet<u64>,
    /// Points of the graph with x in I and y in J.
    pub g_i: PointSet,
    /// Vertical projection of g_i.
    pub b_i: BTreeSet<u64>,
}

fn graph_modulus(graph: &PointSet) -> Result<u64> {
    match graph.ambient() {
        Ambient::Mod(p) => Ok(p),
        Ambient::Integers => Err(Error::Internal(
            "progression sampling needs a mod-p graph".into(),
        )),
    }
}

/// Progression length m = ceil(p^(1-gamma)).
pub fn progression_length(p: u64, gamma: f64) -> u64 {
    (p as f64).powf(1.0 - gamma).ceil() as u64
}

fn build_sets(p: u64, d: u64, t: u64, m: u64, k: i64) -> (BTreeSet<u64>, BTreeSet<u64>, BTreeSet<u64>, BTreeSet<u64>) {
    let mul = |a: u64, b: u64| (a as u128 * b as u128 % p as u128) as u64;
    let i0: BTreeSet<u64> = (0..m).map(|j| mul(d, j % p)).collect();
    let i: BTreeSet<u64> = i0.iter().map(|&v| (v + t) % p).collect();
    let lo = m.div_ceil(2);
    let j: BTreeSet<u64> = (lo..=m).map(|jj| mul(d, jj % p)).collect();
    // exponent hull [-k*m, (m-1) + k*m], capped at the whole field
    let km = k as i128 * m as i128;
    let len = (m as i128 - 1 + km) - (-km) + 1;
    let itilde: BTreeSet<u64> = if len >= p as i128 {
        (0..p).collect()
    } else {
        (-km..=(m as i128 - 1 + km))
            .map(|e| {
                let e_mod = e.rem_euclid(p as i128) as u64;
                (t + mul(d, e_mod)) % p
            })
            .collect()
    };
    (i0, i, j, itilde)
}

/// Draws (d, t) from a seeded stream and restricts the graph to I x J.
///
/// Directions must be integers with absolute value at most `k`. The sample
/// verifies the containment pi_r(G_I) inside Itilde (and inside the union of
/// the full projections) for every direction before returning.
pub fn progression_sample(
    graph: &PointSet,
    rset: &RSet,
    k: i64,
    gamma: f64,
    seed: u64,
) -> Result<ProgressionSample> {
    progression_sample_stream(graph, rset, k, gamma, seed, 0)
}

/// Like [`progression_sample`] but on an explicit substream, so callers can
/// deterministically re-draw.
pub fn progression_sample_stream(
    graph: &PointSet,
    rset: &RSet,
    k: i64,
    gamma: f64,
    seed: u64,
    stream: u64,
) -> Result<ProgressionSample> {
    let p = graph_modulus(graph)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::BadSearchConfig(format!(
            "gamma {gamma} outside (0, 1)"
        )));
    }
    let m = progression_length(p, gamma);
    if m >= p {
        return Err(Error::BadInterval { m, p });
    }
    let directions = integral_scalars(rset)?;
    let radius = directions.iter().map(|r| r.abs()).max().unwrap_or(0);
    if k < radius.max(1) {
        return Err(Error::BadSearchConfig(format!(
            "direction radius k = {k} below the largest direction {radius}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let d = rng.gen_range(1..p);
    let t = rng.gen_range(0..p);

    let (i0, i, j, itilde) = build_sets(p, d, t, m, k);

    let g_i_points: Vec<(i64, i64)> = graph
        .iter()
        .filter(|&(x, y)| i.contains(&(x as u64)) && j.contains(&(y as u64)))
        .collect();
    let g_i = PointSet::modular(p, g_i_points)?;
    let b_i: BTreeSet<u64> = g_i.iter().map(|(_, y)| y as u64).collect();

    // structural containments: pi_r(G_I) inside Itilde and inside pi_r(G)
    for &r in &directions {
        if g_i.is_empty() {
            break;
        }
        let dir = Direction::Finite(Rat::from_int(r));
        let inner = g_i.project(&dir)?;
        let outer = graph.project(&dir)?;
        let inner = inner.residues().expect("mod-p image");
        let outer = outer.residues().expect("mod-p image");
        for v in inner {
            if !itilde.contains(v) {
                return Err(Error::Internal(format!(
                    "projection value {v} escaped the stable hull for direction {r}"
                )));
            }
            if !outer.contains(v) {
                return Err(Error::Internal(format!(
                    "projection value {v} missing from the full projection for direction {r}"
                )));
            }
        }
    }

    Ok(ProgressionSample {
        triple: ProgressionTriple { p, d, t, m },
        i0,
        i,
        j,
        itilde,
        g_i,
        b_i,
    })
}

/// Exact two-sided evaluation of the fiber-hitting probability.
#[derive(Clone, Debug)]
pub struct FiberHitProbability {
    /// Exhaustive count over all (d, t) draws, as an exact rational.
    pub lhs: Rat,
    /// The interval-difference sum, as an exact rational.
    pub rhs: Rat,
    pub equal: bool,
}

/// Verifies, by full enumeration of the p(p-1) draws, that
///
///   Pr[y in B_I] = sum over j in [ceil(m/2), m] of |D_y - (y/j) I0| / (p(p-1))
///
/// where D_y is the fiber above y and I0 is the base progression with
/// difference y/j. Exact rational equality is required; y = 0 is rejected
/// because distinct j must give distinct differences d = y/j.
pub fn pry_verify(graph: &PointSet, y: u64, m: u64) -> Result<FiberHitProbability> {
    let p = graph_modulus(graph)?;
    if m == 0 || m >= p {
        return Err(Error::BadInterval { m, p });
    }
    if y % p == 0 {
        return Err(Error::ZeroFiber);
    }
    let y = y % p;
    let fibers = graph.fibers();
    let fiber: BTreeSet<u64> = match fibers.get(&(y as i64)) {
        Some(xs) => xs.iter().map(|&x| x as u64).collect(),
        None => return Err(Error::FiberMissing { y }),
    };

    let mul = |a: u64, b: u64| (a as u128 * b as u128 % p as u128) as u64;
    let lo = m.div_ceil(2);
    let mut in_fiber = vec![false; p as usize];
    for &x in &fiber {
        in_fiber[x as usize] = true;
    }

    // left side: exhaustive loop over every draw (d, t), testing the event
    // y in B_I straight from its definition
    let mut hit_count: u64 = 0;
    for d in 1..p {
        let j_set: BTreeSet<u64> = (lo..=m).map(|jj| mul(d, jj)).collect();
        if !j_set.contains(&y) {
            continue;
        }
        let i0: Vec<u64> = (0..m).map(|jj| mul(d, jj)).collect();
        for t in 0..p {
            let fiber_meets_i = i0.iter().any(|&s| in_fiber[((s + t) % p) as usize]);
            if fiber_meets_i {
                hit_count += 1;
            }
        }
    }

    // right side: the interval-difference sum over j
    let mut diff_count: u64 = 0;
    for j_index in lo..=m {
        let jinv = mod_inverse(j_index % p, p)?;
        let d = mul(y, jinv);
        let mut diffs: BTreeSet<u64> = BTreeSet::new();
        for &x in &fiber {
            for jj in 0..m {
                let shift = mul(d, jj);
                diffs.insert((x + p - shift) % p);
            }
        }
        diff_count += diffs.len() as u64;
    }

    let denom = Rat::from_int((p * (p - 1)) as i64);
    let lhs = &Rat::from_int(hit_count as i64) / &denom;
    let rhs = &Rat::from_int(diff_count as i64) / &denom;
    let equal = lhs == rhs;
    Ok(FiberHitProbability { lhs, rhs, equal })
}

/// Monte Carlo tail estimate for the hull-intersection size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovReport {
    pub trials: u32,
    pub hits: u32,
    pub empirical_prob: f64,
    /// 95% Wilson interval for the empirical probability.
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// The shape k/T the tail is compared against (constant unspecified;
    /// reported, never asserted).
    pub shape_bound: f64,
    pub threshold: f64,
}

/// Estimates Pr[|Itilde ∩ A| >= T (m/p) |A|] over seeded draws of (d, t).
pub fn markov_check(
    graph: &PointSet,
    a: &FpSet,
    k: i64,
    gamma: f64,
    t_factor: f64,
    trials: u32,
    seed: u64,
) -> Result<MarkovReport> {
    let p = graph_modulus(graph)?;
    if a.p() != p {
        return Err(Error::ModulusMismatch {
            left: a.p(),
            right: p,
        });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::BadSearchConfig(format!(
            "gamma {gamma} outside (0, 1)"
        )));
    }
    let m = progression_length(p, gamma);
    if m >= p {
        return Err(Error::BadInterval { m, p });
    }
    assert!(k >= 1);

    let threshold = t_factor * m as f64 / p as f64 * a.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u32;
    for _ in 0..trials {
        let d = rng.gen_range(1..p);
        let t = rng.gen_range(0..p);
        let (_, _, _, itilde) = build_sets(p, d, t, m, k);
        let inter = itilde.iter().filter(|v| a.contains(**v)).count();
        if inter as f64 >= threshold {
            hits += 1;
        }
    }
    let n = trials as f64;
    let phat = hits as f64 / n;
    // Wilson interval at z = 1.96
    let z = 1.96f64;
    let denom = 1.0 + z * z / n;
    let center = (phat + z * z / (2.0 * n)) / denom;
    let half = z * ((phat * (1.0 - phat) + z * z / (4.0 * n)) / n).sqrt() / denom;
    Ok(MarkovReport {
        trials,
        hits,
        empirical_prob: phat,
        wilson_low: (center - half).max(0.0),
        wilson_high: (center + half).min(1.0),
        shape_bound: k as f64 / t_factor,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_grid(p: u64) -> PointSet {
        PointSet::modular(p, (0..p as i64).flat_map(|x| (0..p as i64).map(move |y| (x, y))))
            .unwrap()
    }

    #[test]
    fn sample_shapes_and_containment() {
        let p = 31;
        let g = full_grid(p);
        let rset = RSet::from_ints([0, 1]).unwrap();
        let s = progression_sample(&g, &rset, 1, 0.4, 11).unwrap();
        assert_eq!(s.triple.p, p);
        assert!(s.triple.d >= 1 && s.triple.d < p);
        // m = ceil(31^0.6) = ceil(7.86) = 8
        assert_eq!(s.triple.m, 8);
        assert_eq!(s.i0.len(), 8);
        assert_eq!(s.i.len(), 8);
        // J indexes j in {4..8}
        assert_eq!(s.j.len(), 5);

        // G_I sits inside I x J
        for (x, y) in s.g_i.iter() {
            assert!(s.i.contains(&(x as u64)));
            assert!(s.j.contains(&(y as u64)));
        }
        // full grid: B_I = J exactly (every fiber is full)
        assert_eq!(s.b_i, s.j);
    }

    #[test]
    fn gamma_and_direction_validation() {
        let g = full_grid(11);
        let rset = RSet::from_ints([0, 1]).unwrap();
        assert!(progression_sample(&g, &rset, 1, 0.0, 1).is_err());
        assert!(progression_sample(&g, &rset, 1, 1.0, 1).is_err());
        // k below the direction radius
        let wide = RSet::from_ints([0, 3]).unwrap();
        assert!(matches!(
            progression_sample(&g, &wide, 1, 0.4, 1).unwrap_err(),
            Error::BadSearchConfig(_)
        ));
        // non-integral directions are rejected
        let frac = RSet::scalars([Rat::from_frac(1, 2).unwrap(), Rat::from_int(0)]).unwrap();
        assert!(matches!(
            progression_sample(&g, &frac, 1, 0.4, 1).unwrap_err(),
            Error::NonIntegralSupport(_)
        ));
    }

    #[test]
    fn pry_full_fiber() {
        // full fiber: each admissible j contributes p differences, so both
        // sides equal (#j in range) / (p - 1)
        let p = 11;
        let g = full_grid(p);
        let m = 4;
        let out = pry_verify(&g, 3, m).unwrap();
        assert!(out.equal);
        let expected = &Rat::from_int(3) / &Rat::from_int((p - 1) as i64); // j in {2,3,4}
        assert_eq!(out.lhs, expected);
    }

    #[test]
    fn pry_single_term() {
        // m = 1: a single j = 1 term
        let p = 11;
        let g = PointSet::modular(p, [(2, 3), (5, 3), (7, 4)]).unwrap();
        let out = pry_verify(&g, 3, 1).unwrap();
        assert!(out.equal);
        // |D_y - y * {0}| = |D_y| = 2
        let expected = &Rat::from_int(2) / &Rat::from_int((p * (p - 1)) as i64);
        assert_eq!(out.rhs, expected);
    }

    #[test]
    fn pry_zero_fiber_rejected() {
        let g = full_grid(11);
        assert!(matches!(pry_verify(&g, 0, 4).unwrap_err(), Error::ZeroFiber));
        assert!(matches!(
            pry_verify(&g, 11, 4).unwrap_err(),
            Error::ZeroFiber
        ));
    }

    #[test]
    fn pry_missing_fiber_rejected() {
        let g = PointSet::modular(11, [(1, 2)]).unwrap();
        assert!(matches!(
            pry_verify(&g, 5, 3).unwrap_err(),
            Error::FiberMissing { y: 5 }
        ));
    }

    #[test]
    fn pry_random_graphs_exact() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(501);
        for p in [11u64, 13, 17] {
            for _ in 0..4 {
                let n_points = rng.gen_range(4..20);
                let points: Vec<(i64, i64)> = (0..n_points)
                    .map(|_| {
                        (
                            rng.gen_range(0..p) as i64,
                            rng.gen_range(0..p) as i64,
                        )
                    })
                    .collect();
                let g = PointSet::modular(p, points).unwrap();
                let m = rng.gen_range(1..p / 2);
                let ys: Vec<u64> = g.fibers().keys().map(|&y| y as u64).filter(|&y| y != 0).collect();
                for &y in ys.iter().take(3) {
                    let out = pry_verify(&g, y, m).unwrap();
                    assert!(out.equal, "identity failed at p={p}, y={y}, m={m}");
                }
            }
        }
    }

    #[test]
    fn markov_tail_behaviour() {
        let p = 101;
        let g = full_grid(p);
        let a = FpSet::new(p, (0..30).map(|v| v * 3 % p)).unwrap();
        // enormous T: the event is impossible
        let rep = markov_check(&g, &a, 1, 0.5, 1e9, 200, 3).unwrap();
        assert_eq!(rep.hits, 0);

        // moderate T on the saturated set: deterministic 0/1 step
        let full = FpSet::full(p).unwrap();
        let rep = markov_check(&g, &full, 1, 0.5, 8.0, 200, 3).unwrap();
        // |Itilde| <= 3m and threshold is 8 m/p |A| = 8m: never reached
        assert_eq!(rep.hits, 0);

        let rep = markov_check(&g, &full, 1, 0.5, 1.0, 100, 3).unwrap();
        // threshold m: |Itilde ∩ F_p| = |Itilde| >= m always
        assert_eq!(rep.hits, 100);
        assert!(rep.wilson_low <= rep.wilson_high);
        assert!(rep.wilson_low >= 0.0 && rep.wilson_high <= 1.0);
    }
}
