//! The circular deletion channel and exact computations on its output law.
//!
//! A circular binary string passes the channel as follows: every bit is
//! deleted independently with probability p (kept with q = 1 - p), and the
//! surviving subsequence is then rotated by a uniformly random offset. The
//! channel identity of the input is therefore only defined up to rotation,
//! which is exactly what the closed-form trace probability reflects.
//!
//! Two samplers are provided. [`sample_trace`] walks the binary expansion
//! bit by bit. [`sample_gap_trace`] works directly on gap coordinates and
//! never materializes the string: it draws survivor counts per gap from
//! binomials and then picks the reading frame with the exact frame weights
//! `(t_{j-1} + 1) / L`. Its output distribution equals "sample a trace, keep
//! it only if exactly k ones survive, read off the gaps", which the tests
//! pin against the brute-force distribution in exact rational arithmetic.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::gapseq::{BinaryString, GapSequence};

/// Exhaustive enumeration over deletion masks is capped at this input
/// length; 2^18 masks keep the exact-rational pass under a second.
pub const BRUTE_FORCE_MAX_LEN: u64 = 18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("deletion probability must lie strictly between 0 and 1")]
    InvalidProbability,
    #[error("input length {0} exceeds the brute-force cap {BRUTE_FORCE_MAX_LEN}")]
    TooLarge(u64),
}

/// Deletion probability plus the master seed for reproducible experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    p: f64,
    q: f64,
    seed: u64,
}

impl ChannelParams {
    pub fn new(p: f64, seed: u64) -> Result<Self, ChannelError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ChannelError::InvalidProbability);
        }
        Ok(Self { p, q: 1.0 - p, seed })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for stream 0 of the master seed.
    pub fn master_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Independent generator for one trial: same master seed, dedicated
    /// stream, so parallel trial order cannot change any draw.
    pub fn trial_rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Pass one circular binary string through the channel.
pub fn sample_trace(x: &BinaryString, params: &ChannelParams, rng: &mut impl Rng) -> BinaryString {
    let mut kept = Vec::with_capacity(x.len());
    for &bit in x.bits() {
        if rng.gen_bool(params.q) {
            kept.push(bit);
        }
    }
    if kept.is_empty() {
        return BinaryString::new(kept);
    }
    let offset = rng.gen_range(0..kept.len());
    BinaryString::new(kept).rotate(offset)
}

/// Channel sample in gap coordinates, present exactly when all k ones
/// survive (probability q^k); the trace then has exactly k ones and its gap
/// reading is returned.
///
/// Survivor counts per gap are binomial and the reading frame j is chosen
/// with probability `(t_{j-1} + 1) / L`, which is the law of "first one of
/// the uniformly rotated string", so the output distribution matches the
/// bit-level sampler conditioned on k surviving ones.
pub fn sample_gap_trace(
    x: &GapSequence,
    params: &ChannelParams,
    rng: &mut impl Rng,
) -> Option<GapSequence> {
    let k = x.k();
    for _ in 0..k {
        if !rng.gen_bool(params.q) {
            return None;
        }
    }
    let gaps: Vec<u64> = x
        .gaps()
        .iter()
        .map(|&g| {
            Binomial::new(g, params.q)
                .expect("q lies in (0, 1)")
                .sample(rng)
        })
        .collect();
    let len: u64 = k as u64 + gaps.iter().sum::<u64>();
    let mut ticket = rng.gen_range(0..len);
    for frame in 0..k {
        let weight = gaps[(frame + k - 1) % k] + 1;
        if ticket < weight {
            let t = GapSequence::new(gaps).expect("k >= 1 survivors");
            return Some(t.cyclic_shift(frame));
        }
        ticket -= weight;
    }
    unreachable!("frame weights sum to the trace length");
}

fn validate_prob(p: &BigRational) -> Result<BigRational, ChannelError> {
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(ChannelError::InvalidProbability);
    }
    Ok(BigRational::one() - p)
}

/// Exact binomial coefficient.
pub(crate) fn binomial_bigint(n: u64, r: u64) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exact probability that the channel outputs the specific binary string
/// with gap reading `a`, given input gaps `x` and deletion probability p:
///
/// `(1/|a|) * (sum_i prod_j C(x_j, a_{j+i})) * p^{|x|-|a|} * q^{|a|}`
///
/// The rotation sum runs over all k frame offsets, which also counts the
/// rotation multiplicity of periodic traces, so the formula needs no
/// aperiodicity assumption. Traces without exactly k ones have probability
/// mass too, but no gap reading of length k; they are outside this function.
pub fn exact_trace_prob(
    x: &GapSequence,
    a: &GapSequence,
    p: &BigRational,
) -> Result<BigRational, ChannelError> {
    assert_eq!(x.k(), a.k(), "trace must keep all k ones");
    let q = validate_prob(p)?;
    if a.binary_len() > x.binary_len() {
        return Ok(BigRational::zero());
    }
    let sum = rotation_coefficient_sum(x.gaps(), a.gaps());
    let deleted = (x.binary_len() - a.binary_len()) as i32;
    let prob = BigRational::from(sum) * p.pow(deleted) * q.pow(a.binary_len() as i32)
        / BigRational::from(BigInt::from(a.binary_len()));
    Ok(prob)
}

/// `sum_i prod_j C(x_j, a_{j+i})` over the k cyclic alignments.
fn rotation_coefficient_sum(x: &[u64], a: &[u64]) -> BigInt {
    let k = x.len();
    let mut sum = BigInt::zero();
    for shift in 0..k {
        let mut prod = BigInt::one();
        for j in 0..k {
            prod *= binomial_bigint(x[j], a[(j + shift) % k]);
            if prod.is_zero() {
                break;
            }
        }
        sum += prod;
    }
    sum
}

/// Full trace distribution by enumeration of all deletion masks, exact in
/// rational arithmetic. Masses of all rotations of each survivor string are
/// accumulated, so the map sums to exactly 1 (the empty string key carries
/// the all-deleted mass).
pub fn brute_force_trace_distribution(
    x: &GapSequence,
    p: &BigRational,
) -> Result<BTreeMap<BinaryString, BigRational>, ChannelError> {
    let q = validate_prob(p)?;
    let len = x.binary_len();
    if len > BRUTE_FORCE_MAX_LEN {
        return Err(ChannelError::TooLarge(len));
    }
    let len = len as usize;
    let bits = x.to_binary();

    // p^deleted * q^kept for every survivor count
    let mut weight_by_kept = vec![BigRational::one(); len + 1];
    for kept in 0..=len {
        weight_by_kept[kept] = p.pow((len - kept) as i32) * q.pow(kept as i32);
    }

    let mut by_survivor: BTreeMap<BinaryString, BigRational> = BTreeMap::new();
    for mask in 0u32..(1u32 << len) {
        let kept: Vec<bool> = (0..len)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| bits.bits()[i])
            .collect();
        let w = weight_by_kept[kept.len()].clone();
        *by_survivor
            .entry(BinaryString::new(kept))
            .or_insert_with(BigRational::zero) += w;
    }

    let mut out: BTreeMap<BinaryString, BigRational> = BTreeMap::new();
    for (survivor, mass) in by_survivor {
        if survivor.is_empty() {
            *out.entry(survivor).or_insert_with(BigRational::zero) += mass;
            continue;
        }
        let share = mass / BigRational::from(BigInt::from(survivor.len()));
        for offset in 0..survivor.len() {
            *out.entry(survivor.rotate(offset))
                .or_insert_with(BigRational::zero) += share.clone();
        }
    }
    Ok(out)
}

/// Gap-tuple law conditioned on all k ones surviving, under a uniformly
/// random choice among the k reading frames:
///
/// `mu0(a) = (1/k) * sum_i prod_j BinomPmf(x_j, q)(a_{j+i})`
///
/// Related to string masses by
/// `exact_trace_prob(x, a, p) = (k / |a|) * q^k * mu0(gaps(a))`.
/// Computed in log space so it stays usable at large gap values.
pub fn conditioned_gap_prob(x: &GapSequence, a: &GapSequence, p: f64) -> f64 {
    assert_eq!(x.k(), a.k(), "gap tuples must share k");
    assert!(p > 0.0 && p < 1.0, "p must lie strictly between 0 and 1");
    let q = 1.0 - p;
    let k = x.k();
    let xg = x.gaps();
    let ag = a.gaps();

    let mut term_logs = Vec::with_capacity(k);
    for shift in 0..k {
        let mut log_prod = 0.0f64;
        let mut feasible = true;
        for j in 0..k {
            let n = xg[j];
            let r = ag[(j + shift) % k];
            if r > n {
                feasible = false;
                break;
            }
            let ln_choose =
                ln_gamma(n as f64 + 1.0) - ln_gamma(r as f64 + 1.0) - ln_gamma((n - r) as f64 + 1.0);
            log_prod += ln_choose + r as f64 * q.ln() + (n - r) as f64 * p.ln();
        }
        if feasible {
            term_logs.push(log_prod);
        }
    }
    if term_logs.is_empty() {
        return 0.0;
    }
    let m = term_logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = term_logs.iter().map(|&l| (l - m).exp()).sum();
    (m + sum.ln() - (k as f64).ln()).exp()
}

/// Exact-rational form of [`conditioned_gap_prob`] for small inputs.
pub fn conditioned_gap_prob_rational(
    x: &GapSequence,
    a: &GapSequence,
    p: &BigRational,
) -> Result<BigRational, ChannelError> {
    assert_eq!(x.k(), a.k(), "gap tuples must share k");
    let q = validate_prob(p)?;
    let k = x.k();
    let xg = x.gaps();
    let ag = a.gaps();

    let mut sum = BigRational::zero();
    for shift in 0..k {
        let mut prod = BigRational::one();
        for j in 0..k {
            let n = xg[j];
            let r = ag[(j + shift) % k];
            if r > n {
                prod = BigRational::zero();
                break;
            }
            prod *= BigRational::from(binomial_bigint(n, r))
                * q.pow(r as i32)
                * p.pow((n - r) as i32);
        }
        sum += prod;
    }
    Ok(sum / BigRational::from(BigInt::from(k)))
}

/// Decimal rendering of an exact rational, for reporting.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let scale = BigInt::from(10u8).pow(30);
    let scaled = (r.numer() * &scale) / r.denom();
    scaled.to_f64().map(|v| v / 1e30).unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn gaps(v: &[u64]) -> GapSequence {
        GapSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn params_reject_degenerate_probabilities() {
        assert!(ChannelParams::new(0.0, 1).is_err());
        assert!(ChannelParams::new(1.0, 1).is_err());
        assert!(ChannelParams::new(-0.25, 1).is_err());
        assert!(ChannelParams::new(0.5, 1).is_ok());
    }

    #[test]
    fn known_two_one_trace_probability() {
        // input 1010, trace 101: probability (2/3) p q^3, so 1/24 at p = 1/2
        let x = gaps(&[1, 1]);
        let a = gaps(&[1, 0]);
        let half = ratio(1, 2);
        let prob = exact_trace_prob(&x, &a, &half).unwrap();
        assert_eq!(prob, ratio(1, 24));

        let third = ratio(1, 3);
        let prob = exact_trace_prob(&x, &a, &third).unwrap();
        // (2/3) * (1/3) * (2/3)^3 = 16/243
        assert_eq!(prob, ratio(16, 243));
    }

    #[test]
    fn trace_longer_than_input_has_zero_probability() {
        let x = gaps(&[1, 1]);
        let a = gaps(&[3, 3]);
        let half = ratio(1, 2);
        assert_eq!(exact_trace_prob(&x, &a, &half).unwrap(), ratio(0, 1));
    }

    #[test]
    fn trace_probability_is_rotation_invariant() {
        let x = gaps(&[0, 2, 3, 1]);
        let a = gaps(&[0, 1, 2, 1]);
        let p = ratio(2, 7);
        let base = exact_trace_prob(&x, &a, &p).unwrap();
        for c in 1..4 {
            let rotated = a.cyclic_shift(c);
            assert_eq!(exact_trace_prob(&x, &rotated, &p).unwrap(), base);
        }
    }

    #[test]
    fn brute_force_distribution_sums_to_one() {
        let x = gaps(&[1, 2, 0]);
        for p in [ratio(1, 2), ratio(1, 4), ratio(5, 7)] {
            let dist = brute_force_trace_distribution(&x, &p).unwrap();
            let total: BigRational = dist.values().cloned().sum();
            assert_eq!(total, BigRational::one());
        }
    }

    #[test]
    fn brute_force_rejects_long_inputs() {
        let x = gaps(&[17, 0]);
        assert!(matches!(
            brute_force_trace_distribution(&x, &ratio(1, 2)),
            Err(ChannelError::TooLarge(19))
        ));
    }

    #[test]
    fn formula_matches_brute_force_on_full_sparse_support() {
        let inputs = [gaps(&[1, 1]), gaps(&[2, 1, 0]), gaps(&[0, 2, 3]), gaps(&[4, 2])];
        for x in &inputs {
            for p in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
                let dist = brute_force_trace_distribution(x, &p).unwrap();
                let mut k_one_mass = BigRational::zero();
                for (trace, mass) in &dist {
                    if trace.ones() != x.k() {
                        continue;
                    }
                    k_one_mass += mass;
                    let a = trace.parse_gaps().unwrap();
                    let predicted = exact_trace_prob(x, &a, &p).unwrap();
                    assert_eq!(&predicted, mass, "x={x} trace={trace}");
                }
                // mass of keeping every one is exactly q^k
                let q = BigRational::one() - &p;
                assert_eq!(k_one_mass, q.pow(x.k() as i32));
            }
        }
    }

    #[test]
    fn conditioned_gap_law_matches_string_masses() {
        let x = gaps(&[2, 1, 1]);
        let p = ratio(1, 3);
        let q = BigRational::one() - &p;
        let dist = brute_force_trace_distribution(&x, &p).unwrap();
        let mut seen = 0;
        for (trace, mass) in &dist {
            if trace.ones() != x.k() {
                continue;
            }
            let a = trace.parse_gaps().unwrap();
            let mu = conditioned_gap_prob_rational(&x, &a, &p).unwrap();
            let bridge = mu * BigRational::from(BigInt::from(x.k() as u64))
                * q.pow(x.k() as i32)
                / BigRational::from(BigInt::from(a.binary_len()));
            assert_eq!(&bridge, mass);
            seen += 1;
        }
        assert!(seen > 3);
    }

    #[test]
    fn conditioned_gap_law_normalizes_and_matches_log_space() {
        let x = gaps(&[1, 1]);
        let p = ratio(1, 2);
        // pinned case: mu0((1, 0)) = p q at p = 1/2
        let a = gaps(&[1, 0]);
        assert_eq!(
            conditioned_gap_prob_rational(&x, &a, &p).unwrap(),
            ratio(1, 4)
        );

        let mut total = BigRational::zero();
        for g0 in 0..=1u64 {
            for g1 in 0..=1u64 {
                let a = gaps(&[g0, g1]);
                let exact = conditioned_gap_prob_rational(&x, &a, &p).unwrap();
                let approx = conditioned_gap_prob(&x, &a, 0.5);
                let exact_f = rational_to_f64(&exact);
                assert!((approx - exact_f).abs() <= 1e-12 * exact_f.max(1.0));
                total += exact;
            }
        }
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn gap_sampler_matches_masked_string_law_exactly() {
        // Enumerate the gap sampler's discrete outcome tree in rationals and
        // compare with parsing the brute-force string distribution.
        for (x, p) in [
            (gaps(&[1, 1]), ratio(1, 2)),
            (gaps(&[2, 1]), ratio(1, 3)),
            (gaps(&[0, 1, 2]), ratio(2, 5)),
        ] {
            let q = BigRational::one() - &p;
            let k = x.k();

            // law of the sampler: survive q^k, binomial gaps, weighted frame
            let mut sampler_law: BTreeMap<GapSequence, BigRational> = BTreeMap::new();
            let boxes: Vec<u64> = x.gaps().to_vec();
            let mut counts = vec![0u64; k];
            loop {
                let mut weight = q.pow(k as i32);
                for j in 0..k {
                    weight *= BigRational::from(binomial_bigint(boxes[j], counts[j]))
                        * q.pow(counts[j] as i32)
                        * p.pow((boxes[j] - counts[j]) as i32);
                }
                let len: u64 = k as u64 + counts.iter().sum::<u64>();
                let t = GapSequence::new(counts.clone()).unwrap();
                for frame in 0..k {
                    let frame_weight = counts[(frame + k - 1) % k] + 1;
                    let mass = weight.clone()
                        * BigRational::from(BigInt::from(frame_weight))
                        / BigRational::from(BigInt::from(len));
                    *sampler_law
                        .entry(t.cyclic_shift(frame))
                        .or_insert_with(BigRational::zero) += mass;
                }
                // odometer over the box
                let mut pos = k;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    if counts[pos] < boxes[pos] {
                        counts[pos] += 1;
                        for c in counts.iter_mut().skip(pos + 1) {
                            *c = 0;
                        }
                        break;
                    }
                    counts[pos] = 0;
                }
                if counts.iter().all(|&c| c == 0) {
                    break;
                }
            }

            // law of parse(brute-force trace) restricted to k-one traces
            let mut parsed_law: BTreeMap<GapSequence, BigRational> = BTreeMap::new();
            for (trace, mass) in brute_force_trace_distribution(&x, &p).unwrap() {
                if trace.ones() == k {
                    *parsed_law
                        .entry(trace.parse_gaps().unwrap())
                        .or_insert_with(BigRational::zero) += mass;
                }
            }

            assert_eq!(sampler_law, parsed_law, "x={x}");

            // and the per-tuple identity against the closed form
            for (t, mass) in &parsed_law {
                let lead = BigRational::from(BigInt::from(t.gaps()[k - 1] + 1));
                let direct = exact_trace_prob(&x, t, &p).unwrap() * lead;
                assert_eq!(&direct, mass, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn samplers_are_deterministic_per_stream() {
        let params = ChannelParams::new(0.5, 99).unwrap();
        let x = gaps(&[3, 1, 4]);
        let bits = x.to_binary();

        let run = |stream: u64| {
            let mut rng = params.trial_rng(stream);
            let trace = sample_trace(&bits, &params, &mut rng);
            let gap_trace = sample_gap_trace(&x, &params, &mut rng);
            (trace, gap_trace)
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(1), run(2), "streams must differ");
    }

    #[test]
    fn gap_sampler_presence_rate_is_q_to_the_k() {
        let params = ChannelParams::new(0.3, 20260815).unwrap();
        let x = gaps(&[2, 5, 3]);
        let mut rng = params.master_rng();
        let trials = 200_000;
        let mut present = 0u64;
        for _ in 0..trials {
            if sample_gap_trace(&x, &params, &mut rng).is_some() {
                present += 1;
            }
        }
        let q_k = 0.7f64.powi(3);
        let sd = (q_k * (1.0 - q_k) / trials as f64).sqrt();
        let observed = present as f64 / trials as f64;
        assert!(
            (observed - q_k).abs() < 5.0 * sd,
            "observed {observed}, expected {q_k}"
        );
    }

    #[test]
    fn bit_sampler_length_law_is_binomial() {
        let params = ChannelParams::new(0.5, 4242).unwrap();
        let x = gaps(&[1, 1]);
        let bits = x.to_binary();
        let mut rng = params.master_rng();
        let trials = 100_000u64;
        let mut length_counts = [0u64; 5];
        for _ in 0..trials {
            let t = sample_trace(&bits, &params, &mut rng);
            length_counts[t.len()] += 1;
        }
        let mut chi2 = 0.0;
        for (len, &count) in length_counts.iter().enumerate() {
            let pmf = BigRational::from(binomial_bigint(4, len as u64)) * ratio(1, 16);
            let expected = rational_to_f64(&pmf) * trials as f64;
            chi2 += (count as f64 - expected).powi(2) / expected;
        }
        // chi-square critical value at significance 0.001 with 4 dof
        assert!(chi2 < 18.467, "chi2 = {chi2}");
    }

    #[test]
    fn rational_rendering_is_accurate() {
        assert_eq!(rational_to_f64(&ratio(1, 24)), 1.0 / 24.0);
        assert!((rational_to_f64(&ratio(-7, 3)) - (-7.0 / 3.0)).abs() < 1e-15);
    }
}
