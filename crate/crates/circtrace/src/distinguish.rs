//! Hypothesis tests that decide which of two known circular strings a
//! stream of channel traces came from.
//!
//! Construction clusters the expected gap survivals `q*x_j` and `q*y_j` of
//! both candidates with [`crate::partition`] and reads off each candidate's
//! cluster pattern. Two regimes follow:
//!
//! * pattern split: the patterns are cyclically distinct, so a single trace
//!   that keeps all k ones is classified by which pattern its own cluster
//!   reading matches (drawing a bounded number of traces to find one);
//! * shared pattern: the patterns agree up to rotation, so y is pre-rotated
//!   onto x's pattern and the decision reduces to estimating one cyclic
//!   statistic of the input. The statistic is the minimal-order index tuple
//!   (order, then lexicographic) on which x and y disagree mod the pattern's
//!   symmetry period; an unbiased-by-design product estimator over useful
//!   traces is compared against the two candidate shifted statistics.
//!
//! The product estimator multiplies centered gap survivals, which for index
//! tuples with repeated entries picks up the variance of the shared gap; the
//! resulting offset (`estimator_mean_offset`) is pinned by tests rather than
//! hidden, since it matters at desk scales.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{sample_gap_trace, ChannelParams};
use crate::cyclicstats::{
    min_distinguishing_stat, shifted_stat, symmetry_period, StatIndex, ORDER_CAP,
};
use crate::gapseq::GapSequence;
use crate::partition::{build_partition, SeparatedPartition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistinguishError {
    #[error("deletion probability must lie strictly between 0 and 1")]
    InvalidProbability,
    #[error("candidates must have equal binary length ({x} vs {y})")]
    LengthMismatch { x: u64, y: u64 },
    #[error("candidates must have equal sparsity ({x} vs {y})")]
    SparsityMismatch { x: usize, y: usize },
    #[error("candidates are cyclically equal, nothing distinguishes them")]
    CyclicallyEqual,
    #[error("no distinguishing statistic up to order {ORDER_CAP}; this violates the order bound for cyclically distinct inputs")]
    NoDistinguishingStat,
    #[error("no drawn trace kept all ones")]
    NoUsableTrace,
    #[error("no drawn trace was useful")]
    NoUsefulTraces,
    #[error("no rotation of the trace matches the shared cluster pattern")]
    NoAlignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    X,
    Y,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::X => write!(f, "x"),
            Verdict::Y => write!(f, "y"),
        }
    }
}

/// Decision regime fixed at construction time.
#[derive(Debug, Clone)]
pub enum TestPlan {
    /// Cluster patterns of x and y are cyclically distinct.
    PatternSplit,
    /// Patterns agree up to rotation; estimate a cyclic statistic.
    SharedPattern {
        /// Common cluster pattern (y is pre-rotated onto it).
        s: Vec<usize>,
        /// Symmetry period of s; the statistic lives mod this period.
        ell: usize,
        /// Minimal-order index tuple separating x from the rotated y.
        idx: StatIndex,
        /// Cluster mean for each position: `g(s_j)`.
        g_of_pos: Vec<f64>,
        /// Shifted statistic of x at shift `g(s)/q`.
        target_x: f64,
        /// Shifted statistic of the rotated y at shift `g(s)/q`.
        target_y: f64,
    },
}

/// Result of one test run.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub verdict: Verdict,
    /// Mean estimator value (shared-pattern regime only).
    pub f_hat: Option<f64>,
    /// Traces that contributed to the decision: the single classified trace
    /// in the split regime, useful aligned traces in the shared regime.
    pub useful_count: usize,
    /// Traces drawn from the channel, whether or not they contributed.
    pub draws: usize,
    /// Traces with all ones surviving that failed the usefulness bound.
    pub skipped_not_useful: usize,
    /// Useful traces whose cluster reading matched no rotation of s.
    pub skipped_unaligned: usize,
}

/// One experiment trial for result tables.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: u64,
    pub verdict: Option<Verdict>,
    pub f_hat: Option<f64>,
    pub useful_count: usize,
    pub failure: Option<String>,
}

/// Smallest rotation r with `b[(i + r) % k] = a[i]` for all i.
pub fn cyclic_match(a: &[usize], b: &[usize]) -> Option<usize> {
    if a.len() != b.len() {
        return None;
    }
    let k = a.len();
    (0..k).find(|&r| (0..k).all(|i| b[(i + r) % k] == a[i]))
}

/// Product estimator for one aligned trace: the shifted statistic of the
/// trace at shift g, scaled by `q^-order`.
pub fn estimator_f(aligned: &[f64], idx: &StatIndex, g: &[f64], q: f64) -> f64 {
    shifted_stat(aligned, g, idx).expect("index validated against k and ell")
        / q.powi(idx.order() as i32)
}

/// Expected value of [`estimator_f`] under channel traces of z, including
/// the variance offset that repeated index entries contribute. Exact for
/// index tuples whose entries repeat at most twice and whose modulus is 1
/// (the statistic is then rotation invariant, so the trace's random reading
/// frame drops out of the expectation).
pub fn estimator_mean_offset(z: &GapSequence, idx: &StatIndex, g: &[f64], q: f64) -> f64 {
    let k = z.k();
    let ell = idx.modulus();
    let zf: Vec<f64> = z.gaps().iter().map(|&v| v as f64).collect();
    let p = 1.0 - q;

    // group the index tuple by multiplicity per residue
    let mut mult: BTreeMap<usize, u32> = BTreeMap::new();
    for &i in idx.indices() {
        *mult.entry(i).or_insert(0) += 1;
    }
    let mut total = 0.0;
    for j in 1..=(k / ell) {
        let mut term = 1.0;
        for (&i, &m) in &mult {
            let pos = (i - 1 + j * ell) % k;
            let centered = zf[pos] - g[pos] / q;
            term *= match m {
                1 => centered,
                2 => centered * centered + (p / q) * zf[pos],
                _ => panic!("offset formula implemented for multiplicity <= 2"),
            };
        }
        total += term;
    }
    total
}

/// Fixed decision procedure for one ordered candidate pair.
#[derive(Debug, Clone)]
pub struct DistinguishInstance {
    x: GapSequence,
    y: GapSequence,
    y_rotation: usize,
    k: usize,
    n: u64,
    p: f64,
    q: f64,
    c_param: f64,
    trace_budget: usize,
    partition: SeparatedPartition,
    means: BTreeMap<usize, f64>,
    s_x: Vec<usize>,
    s_y: Vec<usize>,
    plan: TestPlan,
}

impl DistinguishInstance {
    /// Validate the pair, build the shared partition over `q*x_j` and
    /// `q*y_j`, and fix the decision plan.
    ///
    /// `trace_budget` bounds the draws of the shared-pattern regime; the
    /// split regime computes its own bounded budget from q and k.
    pub fn new(
        x: GapSequence,
        y: GapSequence,
        p: f64,
        c_param: f64,
        trace_budget: usize,
    ) -> Result<Self, DistinguishError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistinguishError::InvalidProbability);
        }
        if x.k() != y.k() {
            return Err(DistinguishError::SparsityMismatch { x: x.k(), y: y.k() });
        }
        if x.binary_len() != y.binary_len() {
            return Err(DistinguishError::LengthMismatch {
                x: x.binary_len(),
                y: y.binary_len(),
            });
        }
        if x.cyclically_equal(&y) {
            return Err(DistinguishError::CyclicallyEqual);
        }
        assert!(trace_budget >= 1);

        let q = 1.0 - p;
        let k = x.k();
        let n = x.binary_len();
        let points: Vec<f64> = x
            .gaps()
            .iter()
            .chain(y.gaps())
            .map(|&g| q * g as f64)
            .collect();
        let partition = build_partition(&points, c_param, n);
        let means = partition.cluster_means();
        let ids = partition.cluster_of_point();
        let s_x = ids[..k].to_vec();
        let s_y_raw = ids[k..].to_vec();

        let (y, y_rotation, s_y, plan) = match cyclic_match(&s_x, &s_y_raw) {
            None => (y, 0, s_y_raw, TestPlan::PatternSplit),
            Some(r) => {
                let y = y.cyclic_shift(r);
                let s = s_x.clone();
                let ell = symmetry_period(&s);
                let idx = min_distinguishing_stat(&x.gaps_i64(), &y.gaps_i64(), ell, ORDER_CAP)
                    .expect("ell divides k and the cap is positive")
                    .ok_or(DistinguishError::NoDistinguishingStat)?;
                let g_of_pos: Vec<f64> = s.iter().map(|c| means[c]).collect();
                let shift: Vec<f64> = g_of_pos.iter().map(|g| g / q).collect();
                let xf: Vec<f64> = x.gaps().iter().map(|&v| v as f64).collect();
                let yf: Vec<f64> = y.gaps().iter().map(|&v| v as f64).collect();
                let target_x = shifted_stat(&xf, &shift, &idx).expect("validated index");
                let target_y = shifted_stat(&yf, &shift, &idx).expect("validated index");
                let plan = TestPlan::SharedPattern {
                    s: s.clone(),
                    ell,
                    idx,
                    g_of_pos,
                    target_x,
                    target_y,
                };
                (y, r, s, plan)
            }
        };

        Ok(Self {
            x,
            y,
            y_rotation,
            k,
            n,
            p,
            q,
            c_param,
            trace_budget,
            partition,
            means,
            s_x,
            s_y,
            plan,
        })
    }

    pub fn x(&self) -> &GapSequence {
        &self.x
    }

    /// The y candidate as used internally (pre-rotated in the shared-pattern
    /// regime); sampling from it is channel-equivalent to the original.
    pub fn y(&self) -> &GapSequence {
        &self.y
    }

    pub fn y_rotation(&self) -> usize {
        self.y_rotation
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn partition(&self) -> &SeparatedPartition {
        &self.partition
    }

    pub fn cluster_means(&self) -> &BTreeMap<usize, f64> {
        &self.means
    }

    pub fn pattern_x(&self) -> &[usize] {
        &self.s_x
    }

    pub fn pattern_y(&self) -> &[usize] {
        &self.s_y
    }

    pub fn plan(&self) -> &TestPlan {
        &self.plan
    }

    pub fn trace_budget(&self) -> usize {
        self.trace_budget
    }

    /// Draw budget of the split regime: enough that a trace keeping all
    /// ones is missed with probability at most 1/4, plus slack.
    pub fn split_budget(&self) -> usize {
        let miss = 1.0 - self.q.powi(self.k as i32);
        let base = if miss <= 0.0 {
            1.0
        } else {
            (0.25f64.ln() / miss.ln()).ceil().max(1.0)
        };
        base as usize + 10
    }

    /// Usefulness bound `(4k + 1) C sqrt(n) ln(n)` on the distance of each
    /// gap from its assigned cluster mean.
    pub fn useful_bound(&self) -> f64 {
        (4.0 * self.k as f64 + 1.0) * self.c_param * (self.n as f64).sqrt() * (self.n as f64).ln()
    }

    fn channel(&self) -> ChannelParams {
        ChannelParams::new(self.p, 0).expect("validated at construction")
    }

    fn source(&self, pick: Verdict) -> &GapSequence {
        match pick {
            Verdict::X => &self.x,
            Verdict::Y => &self.y,
        }
    }

    /// Cluster reading of a gap tuple.
    pub fn cluster_reading(&self, t: &GapSequence) -> Vec<usize> {
        t.gaps()
            .iter()
            .map(|&g| self.partition.assign(g as f64))
            .collect()
    }

    /// A trace is useful when it kept all k ones and every gap lies within
    /// [`Self::useful_bound`] of its assigned cluster mean.
    pub fn is_useful(&self, t: &GapSequence) -> bool {
        if t.k() != self.k {
            return false;
        }
        let bound = self.useful_bound();
        t.gaps().iter().all(|&g| {
            let v = g as f64;
            (v - self.means[&self.partition.assign(v)]).abs() <= bound
        })
    }

    /// Smallest rotation of the trace whose cluster reading equals s.
    pub fn align_trace(&self, t: &GapSequence, s: &[usize]) -> Result<usize, DistinguishError> {
        let reading = self.cluster_reading(t);
        cyclic_match(s, &reading).ok_or(DistinguishError::NoAlignment)
    }

    /// Full decision: classify one usable trace when the cluster patterns
    /// split, otherwise estimate the distinguishing statistic.
    pub fn test_cyclic_traces(
        &self,
        source: Verdict,
        rng: &mut impl Rng,
    ) -> Result<TestOutcome, DistinguishError> {
        match &self.plan {
            TestPlan::SharedPattern { .. } => self.test_similar_traces(source, rng),
            TestPlan::PatternSplit => {
                let params = self.channel();
                let z = self.source(source);
                let budget = self.split_budget();
                for draw in 0..budget {
                    let Some(t) = sample_gap_trace(z, &params, rng) else {
                        continue;
                    };
                    let reading = self.cluster_reading(&t);
                    let verdict = if cyclic_match(&self.s_x, &reading).is_some() {
                        Verdict::X
                    } else {
                        Verdict::Y
                    };
                    return Ok(TestOutcome {
                        verdict,
                        f_hat: None,
                        useful_count: 1,
                        draws: draw + 1,
                        skipped_not_useful: 0,
                        skipped_unaligned: 0,
                    });
                }
                Err(DistinguishError::NoUsableTrace)
            }
        }
    }

    /// Shared-pattern decision: average the product estimator over useful
    /// aligned traces and pick the nearer candidate statistic (ties go to x).
    ///
    /// Panics if the instance is in the split regime; that regime never
    /// needs an estimator.
    pub fn test_similar_traces(
        &self,
        source: Verdict,
        rng: &mut impl Rng,
    ) -> Result<TestOutcome, DistinguishError> {
        let TestPlan::SharedPattern { target_x, target_y, .. } = &self.plan else {
            panic!("shared-pattern test called on a pattern-split instance");
        };
        let batch = self.collect_estimates(source, self.trace_budget, rng);
        if batch.estimates.is_empty() {
            return Err(DistinguishError::NoUsefulTraces);
        }
        let f_hat = batch.estimates.iter().sum::<f64>() / batch.estimates.len() as f64;
        let verdict = if (f_hat - target_x).abs() <= (f_hat - target_y).abs() {
            Verdict::X
        } else {
            Verdict::Y
        };
        Ok(TestOutcome {
            verdict,
            f_hat: Some(f_hat),
            useful_count: batch.estimates.len(),
            draws: batch.draws,
            skipped_not_useful: batch.skipped_not_useful,
            skipped_unaligned: batch.skipped_unaligned,
        })
    }

    /// Draw traces and return the estimator value of every useful aligned
    /// one (shared-pattern regime only).
    pub fn collect_estimates(
        &self,
        source: Verdict,
        draws: usize,
        rng: &mut impl Rng,
    ) -> EstimateBatch {
        let TestPlan::SharedPattern { s, idx, g_of_pos, .. } = &self.plan else {
            panic!("estimates only exist in the shared-pattern regime");
        };
        let params = self.channel();
        let z = self.source(source);
        let mut batch = EstimateBatch {
            estimates: Vec::new(),
            draws,
            skipped_not_useful: 0,
            skipped_unaligned: 0,
        };
        let bound = self.per_trace_bound(idx.order());
        for _ in 0..draws {
            let Some(t) = sample_gap_trace(z, &params, rng) else {
                continue;
            };
            if !self.is_useful(&t) {
                batch.skipped_not_useful += 1;
                continue;
            }
            let Ok(r) = self.align_trace(&t, s) else {
                batch.skipped_unaligned += 1;
                continue;
            };
            let aligned: Vec<f64> = t.cyclic_shift(r).gaps().iter().map(|&v| v as f64).collect();
            let f = estimator_f(&aligned, idx, g_of_pos, self.q);
            debug_assert!(
                f.abs() <= bound,
                "estimator {f} exceeds its a priori bound {bound}"
            );
            batch.estimates.push(f);
        }
        batch
    }

    /// A priori bound on one estimator value from a useful trace:
    /// `(k / q^m) (4k+1)^6 C^6 n^3 ln(n)^6`.
    fn per_trace_bound(&self, order: usize) -> f64 {
        let n = self.n as f64;
        let k = self.k as f64;
        k / self.q.powi(order as i32)
            * (4.0 * k + 1.0).powi(6)
            * self.c_param.powi(6)
            * n.powi(3)
            * n.ln().powi(6)
    }
}

/// Batch of estimator values with skip accounting.
#[derive(Debug, Clone)]
pub struct EstimateBatch {
    pub estimates: Vec<f64>,
    pub draws: usize,
    pub skipped_not_useful: usize,
    pub skipped_unaligned: usize,
}

/// Run independent seeded trials of the full decision, in parallel.
///
/// Trial t of source z draws from the generator stream `2t + [z = y]` of the
/// master seed, so results are a pure function of (instance, source, trials,
/// seed), independent of thread count and schedule.
pub fn run_trials(
    inst: &DistinguishInstance,
    source: Verdict,
    trials: u64,
    master_seed: u64,
) -> Vec<TrialRecord> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(2 * trial + u64::from(source == Verdict::Y));
            match inst.test_cyclic_traces(source, &mut rng) {
                Ok(out) => TrialRecord {
                    trial,
                    verdict: Some(out.verdict),
                    f_hat: out.f_hat,
                    useful_count: out.useful_count,
                    failure: None,
                },
                Err(e) => TrialRecord {
                    trial,
                    verdict: None,
                    f_hat: None,
                    useful_count: 0,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect()
}
