//! Matched pairs with provably close trace distributions, and the
//! measurements that make the closeness visible at desk scale.
//!
//! A matched pair is two cyclically distinct gap sequences sharing all
//! cyclic statistics up to some order z but not z + 1. Scaling both by a
//! common offset n (gaps `n + x_j` versus `n + y_j`) makes their trace
//! distributions approach each other at rate `n^-(z+1)/2` on typical traces;
//! [`ratio_deviation_sweep`] measures the likelihood-ratio deviation over a
//! window of typical traces and fits the decay exponent, and
//! [`hellinger_sample_bound`] converts a Hellinger distance into the number
//! of traces needed before the sources can be told apart at a given error.
//!
//! Ratios are exact big-rational arithmetic up to `n = EXACT_RATIO_MAX_N`
//! and log-gamma floating point beyond, with the two routes cross-checked on
//! their overlap by the tests.

use std::collections::{BTreeSet, HashMap};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::channel::{binomial_bigint, rational_to_f64};
use crate::cyclicstats::{min_distinguishing_stat, stat_signature, stats_equal_up_to};
use crate::gapseq::GapSequence;

/// Largest scale n at which ratios use exact rational arithmetic.
pub const EXACT_RATIO_MAX_N: u64 = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LowerBoundError {
    #[error("candidates must share sparsity k")]
    SparsityMismatch,
    #[error("candidates are cyclically equal")]
    CyclicallyEqual,
    #[error("statistics do not match through order {claimed} and then differ at {}", claimed + 1)]
    WrongMatchedOrder { claimed: usize },
    #[error("the denominator alignment sum vanishes for this trace")]
    ZeroDenominator,
    #[error("need 0 < hellinger <= 1/2 and 0 < epsilon < 1")]
    DomainError,
}

/// Two cyclically distinct gap sequences with equal cyclic statistics
/// through `matched_order` and a mismatch at `matched_order + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBoundPair {
    x: GapSequence,
    y: GapSequence,
    matched_order: usize,
    is_permutation: bool,
}

impl LowerBoundPair {
    pub fn new(
        x: GapSequence,
        y: GapSequence,
        matched_order: usize,
    ) -> Result<Self, LowerBoundError> {
        if x.k() != y.k() {
            return Err(LowerBoundError::SparsityMismatch);
        }
        if x.cyclically_equal(&y) {
            return Err(LowerBoundError::CyclicallyEqual);
        }
        let (xi, yi) = (x.gaps_i64(), y.gaps_i64());
        let matched = stats_equal_up_to(&xi, &yi, matched_order, 1).expect("k matches");
        let differs = !stats_equal_up_to(&xi, &yi, matched_order + 1, 1).expect("k matches");
        if !matched || !differs {
            return Err(LowerBoundError::WrongMatchedOrder {
                claimed: matched_order,
            });
        }
        let mut sx = x.gaps().to_vec();
        let mut sy = y.gaps().to_vec();
        sx.sort_unstable();
        sy.sort_unstable();
        Ok(Self {
            is_permutation: sx == sy,
            x,
            y,
            matched_order,
        })
    }

    /// Built-in order-4 matched pair at k = 12: gaps `0232111123 20` and its
    /// value-wise complement in {0..3}, which is also a permutation of it.
    pub fn order4_pair() -> Self {
        let x: Vec<u64> = vec![0, 2, 3, 2, 1, 1, 1, 1, 2, 3, 2, 0];
        let y: Vec<u64> = x.iter().map(|&v| 3 - v).collect();
        Self::new(
            GapSequence::new(x).expect("k = 12"),
            GapSequence::new(y).expect("k = 12"),
            4,
        )
        .expect("built-in pair is matched to order 4")
    }

    pub fn x(&self) -> &GapSequence {
        &self.x
    }

    pub fn y(&self) -> &GapSequence {
        &self.y
    }

    pub fn k(&self) -> usize {
        self.x.k()
    }

    pub fn matched_order(&self) -> usize {
        self.matched_order
    }

    pub fn is_permutation(&self) -> bool {
        self.is_permutation
    }
}

/// `sum_i prod_j C(n + z_j, a_{j+i})`, exactly.
fn alignment_sum_exact(z: &[u64], a: &[u64], n: u64) -> BigInt {
    let k = z.len();
    let mut sum = BigInt::zero();
    for shift in 0..k {
        let mut prod = BigInt::from(1u8);
        for j in 0..k {
            prod *= binomial_bigint(n + z[j], a[(j + shift) % k]);
            if prod.is_zero() {
                break;
            }
        }
        sum += prod;
    }
    sum
}

/// Exact likelihood ratio of one trace between the n-scaled sources: the
/// ratio of the two alignment sums. Deletion-probability powers and the
/// length normalization cancel because the scaled sources share a length.
pub fn prob_ratio_exact(
    pair: &LowerBoundPair,
    a: &GapSequence,
    n: u64,
) -> Result<BigRational, LowerBoundError> {
    assert_eq!(a.k(), pair.k(), "trace must keep all k ones");
    let d1 = alignment_sum_exact(pair.x.gaps(), a.gaps(), n);
    let d2 = alignment_sum_exact(pair.y.gaps(), a.gaps(), n);
    if d2.is_zero() {
        return Err(LowerBoundError::ZeroDenominator);
    }
    Ok(BigRational::new(d1, d2))
}

fn ln_factorial_table(max_n: u64) -> Vec<f64> {
    (0..=max_n).map(|i| ln_gamma(i as f64 + 1.0)).collect()
}

fn ln_choose(lnfact: &[f64], n: u64, r: u64) -> Option<f64> {
    if r > n {
        return None;
    }
    Some(lnfact[n as usize] - lnfact[r as usize] - lnfact[(n - r) as usize])
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn logsumexp(logs: &[f64]) -> Option<f64> {
    if logs.is_empty() {
        return None;
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|&l| (l - m).exp()).sum();
    Some(m + sum.ln())
}

/// Log of the alignment sum, or None when every alignment is infeasible.
fn alignment_logsum(z: &[u64], a: &[u64], n: u64, lnfact: &[f64]) -> Option<f64> {
    let k = z.len();
    let mut term_logs = Vec::with_capacity(k);
    'shift: for shift in 0..k {
        let mut logs = Vec::with_capacity(k);
        for j in 0..k {
            match ln_choose(lnfact, n + z[j], a[(j + shift) % k]) {
                Some(l) => logs.push(l),
                None => continue 'shift,
            }
        }
        term_logs.push(kahan_sum(logs.into_iter()));
    }
    logsumexp(&term_logs)
}

/// Floating-point likelihood ratio via log-gamma; usable at any scale.
pub fn prob_ratio_log(
    pair: &LowerBoundPair,
    a: &GapSequence,
    n: u64,
) -> Result<f64, LowerBoundError> {
    assert_eq!(a.k(), pair.k(), "trace must keep all k ones");
    let max_gap = pair
        .x
        .gaps()
        .iter()
        .chain(pair.y.gaps())
        .cloned()
        .max()
        .expect("k >= 1");
    let lnfact = ln_factorial_table(n + max_gap);
    let l2 = alignment_logsum(pair.y.gaps(), a.gaps(), n, &lnfact)
        .ok_or(LowerBoundError::ZeroDenominator)?;
    let l1 = match alignment_logsum(pair.x.gaps(), a.gaps(), n, &lnfact) {
        Some(l1) => l1,
        None => return Ok(0.0),
    };
    Ok((l1 - l2).exp())
}

/// Likelihood ratio of one trace: exact rational arithmetic up to
/// [`EXACT_RATIO_MAX_N`], log-gamma floating point beyond.
pub fn prob_ratio(pair: &LowerBoundPair, a: &GapSequence, n: u64) -> Result<f64, LowerBoundError> {
    if n <= EXACT_RATIO_MAX_N {
        Ok(rational_to_f64(&prob_ratio_exact(pair, a, n)?))
    } else {
        prob_ratio_log(pair, a, n)
    }
}

/// One scale of a deviation sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: u64,
    pub samples_kept: usize,
    pub max_dev: f64,
    pub q99_dev: f64,
}

/// Deviation sweep rows plus the fitted log-log decay slope of max_dev.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub slope: Option<f64>,
}

/// Least-squares slope of `ln(max_dev)` against `ln(n)` over the rows.
pub fn fitted_slope(rows: &[SweepRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| r.max_dev.max(f64::MIN_POSITIVE).ln())
        .collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let var: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if var == 0.0 {
        return None;
    }
    Some(cov / var)
}

enum RatioMode {
    /// Binomial table `C(n + value, a)` for every source gap value and every
    /// in-window trace gap.
    Exact {
        rows: HashMap<u64, Vec<BigInt>>,
        a_min: u64,
    },
    Log { lnfact: Vec<f64> },
}

impl RatioMode {
    fn build(pair: &LowerBoundPair, n: u64, a_min: u64, a_max: u64) -> Self {
        let values: BTreeSet<u64> = pair.x.gaps().iter().chain(pair.y.gaps()).cloned().collect();
        if n <= EXACT_RATIO_MAX_N {
            let rows = values
                .into_iter()
                .map(|v| {
                    let row = (a_min..=a_max).map(|a| binomial_bigint(n + v, a)).collect();
                    (v, row)
                })
                .collect();
            RatioMode::Exact { rows, a_min }
        } else {
            let max_gap = pair.x.gaps().iter().chain(pair.y.gaps()).cloned().max().unwrap();
            RatioMode::Log {
                lnfact: ln_factorial_table(n + max_gap),
            }
        }
    }

    /// `|ratio - 1|` for one in-window trace.
    fn deviation(&self, pair: &LowerBoundPair, a: &[u64], n: u64) -> f64 {
        match self {
            RatioMode::Exact { rows, a_min } => {
                let sum = |z: &[u64]| -> BigInt {
                    let k = z.len();
                    let mut total = BigInt::zero();
                    for shift in 0..k {
                        let mut prod = BigInt::from(1u8);
                        for j in 0..k {
                            let a_j = a[(j + shift) % k];
                            prod *= &rows[&z[j]][(a_j - a_min) as usize];
                        }
                        total += prod;
                    }
                    total
                };
                let d1 = sum(pair.x.gaps());
                let d2 = sum(pair.y.gaps());
                assert!(!d2.is_zero(), "in-window traces are feasible");
                rational_to_f64(&BigRational::new(d1 - &d2, d2).abs())
            }
            RatioMode::Log { lnfact } => {
                let l1 = alignment_logsum(pair.x.gaps(), a, n, lnfact);
                let l2 = alignment_logsum(pair.y.gaps(), a, n, lnfact);
                match (l1, l2) {
                    (Some(l1), Some(l2)) => ((l1 - l2).exp() - 1.0).abs(),
                    _ => panic!("in-window traces are feasible"),
                }
            }
        }
    }
}

/// Measure the likelihood-ratio deviation of typical traces at each scale.
///
/// Per scale n, gap tuples are drawn from the x-source conditioned channel
/// (gap j survives as `Binomial(n + x_j, q)`, then a uniformly random
/// reading frame) and kept while every gap lies within
/// `c_window * sqrt(n ln n)` of `n q`; sampling continues until
/// `samples_per_n` tuples are kept (draws are capped at 1000 per kept
/// sample, so a pathological window cannot loop forever). Each scale uses
/// its own generator stream of the seed, and kept tuples are evaluated in
/// parallel.
pub fn ratio_deviation_sweep(
    pair: &LowerBoundPair,
    p: f64,
    n_values: &[u64],
    samples_per_n: usize,
    c_window: f64,
    seed: u64,
) -> SweepTable {
    assert!(p > 0.0 && p < 1.0, "p must lie strictly between 0 and 1");
    assert!(c_window > 0.0);
    assert!(samples_per_n >= 1);
    let q = 1.0 - p;
    let k = pair.k();

    let mut rows = Vec::with_capacity(n_values.len());
    for (ni, &n) in n_values.iter().enumerate() {
        assert!(n >= 2);
        let center = n as f64 * q;
        let window = c_window * ((n as f64) * (n as f64).ln()).sqrt();
        let a_min = (center - window).floor().max(0.0) as u64;
        let a_max = (center + window).ceil() as u64;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ni as u64);
        let mut kept: Vec<Vec<u64>> = Vec::with_capacity(samples_per_n);
        let mut attempts = 0usize;
        while kept.len() < samples_per_n && attempts < samples_per_n.saturating_mul(1000) {
            attempts += 1;
            let raw: Vec<u64> = pair
                .x
                .gaps()
                .iter()
                .map(|&g| {
                    Binomial::new(n + g, q)
                        .expect("q lies in (0, 1)")
                        .sample(&mut rng)
                })
                .collect();
            let frame = rng.gen_range(0..k);
            let a: Vec<u64> = (0..k).map(|j| raw[(j + frame) % k]).collect();
            if a.iter().all(|&v| (v as f64 - center).abs() <= window) {
                kept.push(a);
            }
        }

        let mode = RatioMode::build(pair, n, a_min, a_max);
        let mut devs: Vec<f64> = kept.par_iter().map(|a| mode.deviation(pair, a, n)).collect();
        devs.sort_by(|a, b| a.partial_cmp(b).expect("deviations are finite"));
        let max_dev = devs.last().copied().unwrap_or(f64::NAN);
        let q99_idx = ((devs.len() as f64 * 0.99).ceil() as usize).saturating_sub(1);
        let q99_dev = devs.get(q99_idx).copied().unwrap_or(f64::NAN);
        rows.push(SweepRow {
            n,
            samples_kept: devs.len(),
            max_dev,
            q99_dev,
        });
    }

    let slope = fitted_slope(&rows);
    SweepTable { rows, slope }
}

/// Number of traces information-theoretically insufficient to distinguish
/// two sources at Hellinger distance `d_h` with error `epsilon`:
/// `floor(ln(1/epsilon) / (9 d_h))`.
pub fn hellinger_sample_bound(d_h: f64, epsilon: f64) -> Result<u64, LowerBoundError> {
    if !(d_h > 0.0 && d_h <= 0.5 && epsilon > 0.0 && epsilon < 1.0) {
        return Err(LowerBoundError::DomainError);
    }
    Ok(((1.0 / epsilon).ln() / (9.0 * d_h)).floor() as u64)
}

/// Unordered, orientation-free key of a candidate pair: the lexicographic
/// minimum over swapping the two sequences and reversing both.
fn pair_key(x: &GapSequence, y: &GapSequence) -> (GapSequence, GapSequence) {
    let fwd = if x <= y {
        (x.clone(), y.clone())
    } else {
        (y.clone(), x.clone())
    };
    let (rx, ry) = (
        x.reversed().canonical_rotation(),
        y.reversed().canonical_rotation(),
    );
    let rev = if rx <= ry { (rx, ry) } else { (ry, rx) };
    fwd.min(rev)
}

/// Exhaustive search of the box `{0..=max_value}^k` for pairs of cyclically
/// distinct permutations of each other with equal statistics through
/// `target_order` and a mismatch at `target_order + 1`. Pairs are deduped by
/// rotation (canonical representatives) and by reversal, and returned in
/// lexicographic order.
///
/// The whole box is enumerated, so this is for small k and value ranges.
pub fn search_matching_pairs(
    k: usize,
    max_value: u64,
    target_order: usize,
) -> Vec<LowerBoundPair> {
    assert!(k >= 1);
    let box_size = (max_value + 1).pow(k as u32);
    assert!(
        box_size <= 20_000_000,
        "box of {box_size} tuples is beyond this exhaustive search"
    );

    let mut reps: BTreeSet<GapSequence> = BTreeSet::new();
    let mut cur = vec![0u64; k];
    loop {
        reps.insert(
            GapSequence::new(cur.clone())
                .expect("k >= 1")
                .canonical_rotation(),
        );
        let mut pos = 0;
        loop {
            if pos == k {
                break;
            }
            if cur[pos] < max_value {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }

    // permutation classes refine into statistic-signature buckets
    let mut buckets: HashMap<(Vec<u64>, Vec<i128>), Vec<GapSequence>> = HashMap::new();
    for rep in reps {
        let mut multiset = rep.gaps().to_vec();
        multiset.sort_unstable();
        let signature =
            stat_signature(&rep.gaps_i64(), target_order, 1).expect("modulus 1 divides k");
        buckets.entry((multiset, signature)).or_default().push(rep);
    }

    let mut keys: BTreeSet<(GapSequence, GapSequence)> = BTreeSet::new();
    for group in buckets.into_values() {
        if group.len() < 2 {
            continue;
        }
        for a in 0..group.len() {
            for b in a + 1..group.len() {
                let (x, y) = (&group[a], &group[b]);
                let still_equal =
                    stats_equal_up_to(&x.gaps_i64(), &y.gaps_i64(), target_order + 1, 1)
                        .expect("equal lengths");
                if !still_equal {
                    keys.insert(pair_key(x, y));
                }
            }
        }
    }

    keys.into_iter()
        .map(|(x, y)| LowerBoundPair::new(x, y, target_order).expect("searched to match"))
        .collect()
}

/// Search restricted to value-wise complement pairs `y_j = c - x_j`, which
/// reach k = 12 in seconds: a complement pair is a permutation pair exactly
/// when the value counts of x are symmetric under `v -> c - v`, so only
/// those candidates are tested. Dedup and ordering as in
/// [`search_matching_pairs`].
pub fn search_complement_pairs(
    k: usize,
    complement: u64,
    target_order: usize,
) -> Vec<LowerBoundPair> {
    assert!(k >= 1);
    let box_size = (complement + 1).pow(k as u32);
    assert!(
        box_size <= 100_000_000,
        "box of {box_size} tuples is beyond this exhaustive search"
    );
    let c = complement;

    let mut keys: BTreeSet<(GapSequence, GapSequence)> = BTreeSet::new();
    let mut cur = vec![0u64; k];
    let mut counts = vec![0usize; c as usize + 1];
    loop {
        for v in counts.iter_mut() {
            *v = 0;
        }
        for &v in &cur {
            counts[v as usize] += 1;
        }
        let symmetric = (0..=c as usize).all(|v| counts[v] == counts[c as usize - v]);
        if symmetric {
            let xi: Vec<i64> = cur.iter().map(|&v| v as i64).collect();
            let yi: Vec<i64> = cur.iter().map(|&v| (c - v) as i64).collect();
            let matched = min_distinguishing_stat(&xi, &yi, 1, target_order)
                .expect("modulus 1 divides k")
                .is_none();
            if matched
                && !stats_equal_up_to(&xi, &yi, target_order + 1, 1).expect("equal lengths")
            {
                let x = GapSequence::new(cur.clone()).expect("k >= 1");
                let y = GapSequence::new(cur.iter().map(|&v| c - v).collect()).expect("k >= 1");
                if !x.cyclically_equal(&y) {
                    keys.insert(pair_key(
                        &x.canonical_rotation(),
                        &y.canonical_rotation(),
                    ));
                }
            }
        }
        let mut pos = 0;
        loop {
            if pos == k {
                break;
            }
            if cur[pos] < c {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }

    keys.into_iter()
        .map(|(x, y)| LowerBoundPair::new(x, y, target_order).expect("searched to match"))
        .collect()
}
