//! Fourier analysis on the prime field, expectation-normalized.
//!
//! Conventions, used verbatim everywhere:
//!
//! * transform      `fhat(xi) = E_x e(-x xi) f(x)`, `e(x) = exp(2 pi i x / p)`
//! * convolution    `(f * g)(x) = E_y f(y) g(x - y)`
//! * inner product  `<f, g> = E_x f(x) conj(g(x))`
//!
//! With these normalizations Parseval reads `sum_xi |fhat(xi)|^2 = E_x
//! |f(x)|^2` (so `|A|/p` for an indicator), the convolution theorem is
//! `(f*g)^ = fhat * ghat` pointwise, and the dilation identity is
//! `dilate(f, j)^(xi) = fhat(j^-1 xi)`.
//!
//! The transform is evaluated by the quadratic-time definition for small
//! moduli and by a prime-length FFT plan beyond; the two routes agree on the
//! overlap and tests compare them.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest modulus handled by the naive quadratic transform.
const NAIVE_DFT_CAP: u64 = 2048;

/// Trial-division primality cap.
const PRIME_CAP: u64 = 1_000_000;

/// Deterministic trial-division primality test for p up to the cap.
pub fn is_prime(p: u64) -> Result<bool> {
    if p > PRIME_CAP {
        return Err(Error::ModulusTooLarge(p));
    }
    if p < 2 {
        return Ok(false);
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return Ok(false);
        }
        d += 1;
    }
    Ok(true)
}

/// All primes q with lo <= q <= hi, by trial division.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi)
        .filter(|&q| is_prime(q).unwrap_or(false))
        .collect()
}

/// Inverse of `a` mod prime `p` by Fermat exponentiation.
pub fn mod_inverse(a: u64, p: u64) -> Result<u64> {
    let a = a % p;
    if a == 0 {
        return Err(Error::ZeroResidue { p });
    }
    Ok(mod_pow(a, p - 2, p))
}

pub fn mod_pow(base: u64, mut exp: u64, p: u64) -> u64 {
    let m = p as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Signed representative of a residue, in (-p/2, p/2] for odd p.
pub fn signed_rep(xi: u64, p: u64) -> i64 {
    let xi = xi % p;
    if xi * 2 > p {
        xi as i64 - p as i64
    } else {
        xi as i64
    }
}

/// Sorted set of residues mod a prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpSet {
    p: u64,
    elements: BTreeSet<u64>,
}

impl FpSet {
    pub fn new(p: u64, elements: impl IntoIterator<Item = u64>) -> Result<FpSet> {
        if !is_prime(p)? {
            return Err(Error::NotPrime(p));
        }
        Ok(FpSet {
            p,
            elements: elements.into_iter().map(|x| x % p).collect(),
        })
    }

    pub fn full(p: u64) -> Result<FpSet> {
        FpSet::new(p, 0..p)
    }

    /// The interval {1, ..., m} as residues.
    pub fn interval(p: u64, m: u64) -> Result<FpSet> {
        if m >= p {
            return Err(Error::BadInterval { m, p });
        }
        FpSet::new(p, 1..=m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.contains(&(x % self.p))
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    pub fn indicator(&self) -> FpFunc {
        let mut values = vec![Complex64::new(0.0, 0.0); self.p as usize];
        for &x in &self.elements {
            values[x as usize] = Complex64::new(1.0, 0.0);
        }
        FpFunc {
            p: self.p,
            values,
        }
    }

    /// The reflected set -A.
    pub fn negate(&self) -> FpSet {
        FpSet {
            p: self.p,
            elements: self.elements.iter().map(|&x| (self.p - x) % self.p).collect(),
        }
    }
}

/// Complex-valued function on the prime field, stored densely.
#[derive(Clone, Debug)]
pub struct FpFunc {
    p: u64,
    values: Vec<Complex64>,
}

impl FpFunc {
    pub fn new(p: u64, values: Vec<Complex64>) -> Result<FpFunc> {
        if !is_prime(p)? {
            return Err(Error::NotPrime(p));
        }
        if values.len() != p as usize {
            return Err(Error::Internal(format!(
                "function on F_{p} needs {p} values, got {}",
                values.len()
            )));
        }
        Ok(FpFunc { p, values })
    }

    pub fn zero(p: u64) -> Result<FpFunc> {
        FpFunc::new(p, vec![Complex64::new(0.0, 0.0); p as usize])
    }

    /// Delta function at a residue.
    pub fn delta(p: u64, at: u64) -> Result<FpFunc> {
        let mut f = FpFunc::zero(p)?;
        f.values[(at % p) as usize] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn constant(p: u64, value: f64) -> Result<FpFunc> {
        FpFunc::new(p, vec![Complex64::new(value, 0.0); p as usize])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, x: u64) -> Complex64 {
        self.values[(x % self.p) as usize]
    }

    /// E_x |f(x)|^2, the squared L2 norm under the uniform measure.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.p as f64
    }

    /// E_x f(x).
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.p as f64
    }

    fn check_same_p(&self, other: &FpFunc) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch {
                left: self.p,
                right: other.p,
            });
        }
        Ok(())
    }
}

/// Expectation-normalized Fourier transform.
pub fn dft(f: &FpFunc) -> FpFunc {
    if f.p <= NAIVE_DFT_CAP {
        dft_naive(f)
    } else {
        dft_fast(f)
    }
}

/// Quadratic-time transform straight from the definition.
pub fn dft_naive(f: &FpFunc) -> FpFunc {
    let p = f.p;
    let n = p as usize;
    // e(-k/p) table indexed by k = (x * xi) mod p
    let table: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = -2.0 * PI * k as f64 / p as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (xi, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, v) in f.values.iter().enumerate() {
            let k = (x as u64 * xi as u64 % p) as usize;
            acc += v * table[k];
        }
        *slot = acc / p as f64;
    }
    FpFunc { p, values: out }
}

/// FFT-backed transform for larger moduli (prime lengths use a chirp plan
/// internally).
pub fn dft_fast(f: &FpFunc) -> FpFunc {
    let p = f.p;
    let mut buf = f.values.clone();
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_forward(p as usize);
    plan.process(&mut buf);
    for v in &mut buf {
        *v /= p as f64;
    }
    FpFunc { p, values: buf }
}

/// Expectation-normalized convolution `(f * g)(x) = E_y f(y) g(x - y)`.
pub fn convolve(f: &FpFunc, g: &FpFunc) -> Result<FpFunc> {
    f.check_same_p(g)?;
    if f.p <= NAIVE_DFT_CAP {
        Ok(convolve_direct(f, g))
    } else {
        Ok(convolve_fast(f, g))
    }
}

/// Direct quadratic convolution from the definition.
pub fn convolve_direct(f: &FpFunc, g: &FpFunc) -> FpFunc {
    let p = f.p;
    let n = p as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (x, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (y, fv) in f.values.iter().enumerate() {
            let idx = (x + n - y) % n;
            acc += fv * g.values[idx];
        }
        *slot = acc / p as f64;
    }
    FpFunc { p, values: out }
}

/// FFT route: transform, multiply pointwise, invert, fix normalization.
pub fn convolve_fast(f: &FpFunc, g: &FpFunc) -> FpFunc {
    let p = f.p;
    let n = p as usize;
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut fb = f.values.clone();
    let mut gb = g.values.clone();
    forward.process(&mut fb);
    forward.process(&mut gb);
    for (a, b) in fb.iter_mut().zip(gb.iter()) {
        *a *= b;
    }
    inverse.process(&mut fb);
    // one 1/p for the unnormalized inverse, one for the expectation
    let scale = 1.0 / (p as f64 * p as f64);
    for v in &mut fb {
        *v *= scale;
    }
    FpFunc { p, values: fb }
}

/// Dilation `dilate(f, j)(x) = f(j x)`.
pub fn dilate(f: &FpFunc, j: u64) -> Result<FpFunc> {
    let p = f.p;
    if j % p == 0 {
        return Err(Error::ZeroResidue { p });
    }
    let j = j % p;
    let mut out = vec![Complex64::new(0.0, 0.0); p as usize];
    for (x, slot) in out.iter_mut().enumerate() {
        let idx = (j as u128 * x as u128 % p as u128) as usize;
        *slot = f.values[idx];
    }
    Ok(FpFunc { p, values: out })
}

/// Exact additive energy: the number of quadruples (a, a', b, b') in
/// A x A x B x B with a + b = a' + b'. Computed through the representation
/// counts of the sumset (quadratic in the set sizes, exact integers).
pub fn additive_energy(a: &FpSet, b: &FpSet) -> Result<u64> {
    if a.p != b.p {
        return Err(Error::ModulusMismatch {
            left: a.p,
            right: b.p,
        });
    }
    let p = a.p as usize;
    let mut reps = vec![0u64; p];
    for x in a.iter() {
        for y in b.iter() {
            reps[((x + y) % a.p) as usize] += 1;
        }
    }
    Ok(reps.iter().map(|&r| r * r).sum())
}

/// Exact dilated sumset A + j^{-1} {1..m}.
pub fn sumset_dilated(a: &FpSet, j: u64, m: u64) -> Result<FpSet> {
    let p = a.p;
    if j % p == 0 {
        return Err(Error::ZeroResidue { p });
    }
    if m >= p {
        return Err(Error::BadInterval { m, p });
    }
    let jinv = mod_inverse(j, p)?;
    let mut out = BTreeSet::new();
    for x in a.iter() {
        for i in 1..=m {
            let shift = (jinv as u128 * i as u128 % p as u128) as u64;
            out.insert((x + shift) % p);
        }
    }
    Ok(FpSet { p, elements: out })
}

/// Bump function built as a d-fold self-convolution of a short interval
/// indicator, rescaled to peak 1. Supported inside {1..m}.
#[derive(Clone, Debug)]
pub struct BumpFunction {
    pub p: u64,
    pub m: u64,
    pub d: u64,
    pub values: FpFunc,
    /// Measured mass ratio (sum of the bump) / m.
    pub mass_ratio: f64,
    /// Measured decay envelope sup_xi |psihat(xi)| (1 + |xi| m/p)^d (p/m).
    pub decay_envelope: f64,
}

pub fn bump_build(p: u64, m: u64, d: u64) -> Result<BumpFunction> {
    if m == 0 || m >= p {
        return Err(Error::BadInterval { m, p });
    }
    if d < 2 || m < d {
        return Err(Error::BumpTooNarrow { m, d });
    }
    let w = m / d;
    let base = FpSet::interval(p, w)?.indicator();
    let mut conv = base.clone();
    for _ in 1..d {
        conv = convolve(&conv, &base)?;
    }
    let peak = conv
        .values
        .iter()
        .map(|v| v.re)
        .fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(peak > 0.0);
    let mut values: Vec<Complex64> = conv
        .values
        .iter()
        .map(|v| Complex64::new((v.re / peak).clamp(0.0, 1.0), 0.0))
        .collect();
    // zero out FFT dust outside the combinatorial support {d .. d*w}
    for (x, v) in values.iter_mut().enumerate() {
        let x = x as u64;
        if !(d..=d * w).contains(&x) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let func = FpFunc { p, values };
    let mass: f64 = func.values.iter().map(|v| v.re).sum();
    let mass_ratio = mass / m as f64;

    let hat = dft(&func);
    let mut envelope: f64 = 0.0;
    for (xi, v) in hat.values.iter().enumerate() {
        let rep = signed_rep(xi as u64, p).unsigned_abs() as f64;
        let factor = (1.0 + rep * m as f64 / p as f64).powi(d as i32);
        envelope = envelope.max(v.norm() * factor * p as f64 / m as f64);
    }

    Ok(BumpFunction {
        p,
        m,
        d,
        values: func,
        mass_ratio,
        decay_envelope: envelope,
    })
}

/// Per-index entry of a dilated-sumset scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanEntry {
    pub j: u64,
    pub size: usize,
}

/// Report of a dilated-sumset scan over j in {ceil(m/2) .. m}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanReport {
    pub p: u64,
    pub m: u64,
    pub eps: f64,
    /// p^(1-eps), the largeness threshold.
    pub threshold: f64,
    /// Indices whose dilated sumset meets the threshold.
    pub good_count: usize,
    /// Same count restricted to prime indices.
    pub good_count_primes: usize,
    /// floor(m p^-eps), the asymptotic target count (reported, not asserted).
    pub lemma_target: u64,
    pub per_j: Vec<ScanEntry>,
}

/// Scans all indices j in {ceil(m/2)..m}, recording |A + j^{-1}{1..m}|
/// exactly, and counts how many meet the p^(1-eps) threshold.
///
/// Requires |A| >= p/m. The target count is asymptotic and is reported,
/// never asserted.
pub fn fourier_lemma_scan(a: &FpSet, m: u64, eps: f64) -> Result<ScanReport> {
    let p = a.p;
    if m == 0 || m >= p {
        return Err(Error::BadInterval { m, p });
    }
    let need = p.div_ceil(m);
    if (a.len() as u64) < need {
        return Err(Error::ScanSetTooSmall {
            need,
            got: a.len() as u64,
        });
    }
    let threshold = (p as f64).powf(1.0 - eps);
    let lo = m.div_ceil(2);
    let mut per_j = Vec::new();
    let mut good_count = 0usize;
    let mut good_count_primes = 0usize;
    for j in lo..=m {
        let size = sumset_dilated(a, j, m)?.len();
        if size as f64 >= threshold {
            good_count += 1;
            if is_prime(j)? {
                good_count_primes += 1;
            }
        }
        per_j.push(ScanEntry { j, size });
    }
    let lemma_target = (m as f64 * (p as f64).powf(-eps)).floor() as u64;
    Ok(ScanReport {
        p,
        m,
        eps,
        threshold,
        good_count,
        good_count_primes,
        lemma_target,
        per_j,
    })
}

/// Exact count of primes j in [m/2, m] whose dilated frequency j^{-1} xi,
/// read as the signed representative, lands in [-K p/m, K p/m].
pub fn jxi_count(p: u64, m: u64, xi: u64, k_window: f64) -> Result<u64> {
    if !is_prime(p)? {
        return Err(Error::NotPrime(p));
    }
    if xi % p == 0 {
        return Err(Error::ZeroResidue { p });
    }
    if m == 0 || m >= p {
        return Err(Error::BadInterval { m, p });
    }
    let window = k_window * p as f64 / m as f64;
    let mut count = 0;
    for j in primes_in(m.div_ceil(2), m) {
        let jinv = mod_inverse(j, p)?;
        let v = (jinv as u128 * xi as u128 % p as u128) as u64;
        let rep = signed_rep(v, p);
        if (rep.abs() as f64) <= window {
            count += 1;
        }
    }
    Ok(count)
}
