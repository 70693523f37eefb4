//! Cyclic power-sum statistics of integer sequences.
//!
//! For a length-k sequence x, indices `i_1, ..., i_m` (1-based, taken mod k)
//! and a modulus `ell` dividing k, the statistic is
//!
//! ```text
//! S_{i_1,...,i_m; ell}(x) = sum_{j=1..k/ell} x_{i_1 + j*ell} * ... * x_{i_m + j*ell}
//! ```
//!
//! `m` is the order. Statistics are invariant under permuting the index tuple
//! and under adding a multiple of `ell` to every index, which is what makes
//! the non-decreasing enumeration in [`stats_equal_up_to`] complete.
//!
//! Two cyclically distinct integer sequences always differ in some statistic
//! of order at most 6 (for any modulus dividing k); [`verify_characterization`]
//! checks that exhaustively on small boxes, and [`min_distinguishing_stat`]
//! finds the witness used by the trace testers.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gapseq::GapSequence;

/// Order cap from the separation guarantee: cyclically distinct integer
/// sequences differ at some order <= 6.
pub const ORDER_CAP: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("modulus {modulus} does not divide the sequence length {k}")]
    ModulusMismatch { modulus: usize, k: usize },
    #[error("index tuple is empty")]
    EmptyIndices,
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("index {0} is out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("sequences have different lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("shift vector has length {0}, sequence has length {1}")]
    ShiftLengthMismatch(usize, usize),
    #[error("invalid statistic index {0:?}: expected \"i1,i2,...,im;ell\"")]
    BadIndexText(String),
}

/// An index tuple plus modulus naming one cyclic statistic.
///
/// Text form: `"i1,i2,...,im;ell"`, e.g. `"1,1,2;1"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StatIndex {
    indices: Vec<usize>,
    modulus: usize,
}

impl StatIndex {
    pub fn new(indices: Vec<usize>, modulus: usize) -> Result<Self, StatsError> {
        if indices.is_empty() {
            return Err(StatsError::EmptyIndices);
        }
        if modulus == 0 {
            return Err(StatsError::ZeroModulus);
        }
        Ok(StatIndex { indices, modulus })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// Number of factors in each product term.
    pub fn order(&self) -> usize {
        self.indices.len()
    }
}

impl fmt::Display for StatIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in &self.indices {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        write!(f, ";{}", self.modulus)
    }
}

impl FromStr for StatIndex {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StatsError::BadIndexText(s.to_string());
        let (idx_part, ell_part) = s.split_once(';').ok_or_else(bad)?;
        let indices = idx_part
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        let modulus = ell_part.trim().parse::<usize>().map_err(|_| bad())?;
        StatIndex::new(indices, modulus).map_err(|_| bad())
    }
}

fn check_modulus(k: usize, idx: &StatIndex) -> Result<(), StatsError> {
    if idx.modulus > k || k % idx.modulus != 0 {
        return Err(StatsError::ModulusMismatch {
            modulus: idx.modulus,
            k,
        });
    }
    Ok(())
}

/// Exact value of one cyclic statistic.
///
/// i128 is exact for the whole working range (|x_j| <= 10^6, k <= 24,
/// order <= 6 stays below 2^125); the arithmetic is checked so an excursion
/// beyond that range fails loudly instead of wrapping.
pub fn stat(x: &[i64], idx: &StatIndex) -> Result<i128, StatsError> {
    let k = x.len();
    check_modulus(k, idx)?;
    let ell = idx.modulus;
    let mut total: i128 = 0;
    for j in 1..=k / ell {
        let mut term: i128 = 1;
        for &i in &idx.indices {
            let pos = (i - 1 + j * ell) % k;
            term = term
                .checked_mul(x[pos] as i128)
                .expect("cyclic statistic exceeds i128 range");
        }
        total = total
            .checked_add(term)
            .expect("cyclic statistic exceeds i128 range");
    }
    Ok(total)
}

/// The statistic of `x - s` for a real shift vector `s`, in doubles.
///
/// Callers compare these values with an absolute tolerance of 1e-6; at the
/// magnitudes the workbench handles (entries up to ~10^5, order <= 6) the
/// floating error stays orders of magnitude below that.
pub fn shifted_stat(x: &[f64], s: &[f64], idx: &StatIndex) -> Result<f64, StatsError> {
    let k = x.len();
    if s.len() != k {
        return Err(StatsError::ShiftLengthMismatch(s.len(), k));
    }
    check_modulus(k, idx)?;
    let ell = idx.modulus;
    let mut total = 0.0;
    for j in 1..=k / ell {
        let mut term = 1.0;
        for &i in &idx.indices {
            let pos = (i - 1 + j * ell) % k;
            term *= x[pos] - s[pos];
        }
        total += term;
    }
    Ok(total)
}

/// Visit all non-decreasing index tuples of the given order with first index
/// in `1..=ell`, in lexicographic order. Every statistic equals one named by
/// such a tuple (sort the indices, then subtract multiples of ell), so this
/// family is complete for equality testing, and the lexicographically least
/// differing tuple over the full index space is itself non-decreasing with
/// first index <= ell.
fn for_each_canonical_tuple<F>(k: usize, ell: usize, order: usize, mut f: F) -> Option<StatIndex>
where
    F: FnMut(&[usize]) -> bool,
{
    let mut tuple = vec![0usize; order];

    fn rec<F: FnMut(&[usize]) -> bool>(
        tuple: &mut Vec<usize>,
        depth: usize,
        lo: usize,
        hi_first: usize,
        k: usize,
        f: &mut F,
    ) -> Option<Vec<usize>> {
        if depth == tuple.len() {
            if f(tuple) {
                return Some(tuple.clone());
            }
            return None;
        }
        let hi = if depth == 0 { hi_first } else { k };
        for i in lo..=hi {
            tuple[depth] = i;
            if let Some(hit) = rec(tuple, depth + 1, i, hi_first, k, f) {
                return Some(hit);
            }
        }
        None
    }

    rec(&mut tuple, 0, 1, ell.min(k), k, &mut f)
        .map(|indices| StatIndex { indices, modulus: ell })
}

/// The canonical index tuples of one order at the given modulus, in
/// enumeration order. [`stat_signature`] lists statistic values in exactly
/// this order, one block per order.
pub fn canonical_tuples(k: usize, ell: usize, order: usize) -> Result<Vec<StatIndex>, StatsError> {
    if ell == 0 {
        return Err(StatsError::ZeroModulus);
    }
    if ell > k || k % ell != 0 {
        return Err(StatsError::ModulusMismatch { modulus: ell, k });
    }
    let mut tuples = Vec::new();
    for_each_canonical_tuple(k, ell, order, |indices| {
        tuples.push(StatIndex {
            indices: indices.to_vec(),
            modulus: ell,
        });
        false
    });
    Ok(tuples)
}

/// True when every statistic of order <= cap with the given modulus agrees
/// between x and y.
pub fn stats_equal_up_to(x: &[i64], y: &[i64], cap: usize, ell: usize) -> Result<bool, StatsError> {
    Ok(min_distinguishing_stat(x, y, ell, cap)?.is_none())
}

/// The least statistic separating x from y: smallest order <= cap, and the
/// lexicographically least index tuple at that order. `None` when all agree.
pub fn min_distinguishing_stat(
    x: &[i64],
    y: &[i64],
    ell: usize,
    cap: usize,
) -> Result<Option<StatIndex>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let k = x.len();
    if ell == 0 {
        return Err(StatsError::ZeroModulus);
    }
    if ell > k || k % ell != 0 {
        return Err(StatsError::ModulusMismatch { modulus: ell, k });
    }
    for order in 1..=cap {
        let hit = for_each_canonical_tuple(k, ell, order, |indices| {
            let idx = StatIndex {
                indices: indices.to_vec(),
                modulus: ell,
            };
            let sx = stat(x, &idx).expect("modulus checked above");
            let sy = stat(y, &idx).expect("modulus checked above");
            sx != sy
        });
        if let Some(idx) = hit {
            return Ok(Some(idx));
        }
    }
    Ok(None)
}

/// Every canonical statistic of x through order `cap` at modulus `ell`, in
/// enumeration order (ascending order, then lexicographic). Two sequences
/// have equal vectors exactly when no statistic up to the cap separates
/// them, so the vector serves as a bucketing key for searches.
pub fn stat_signature(x: &[i64], cap: usize, ell: usize) -> Result<Vec<i128>, StatsError> {
    let k = x.len();
    if ell == 0 {
        return Err(StatsError::ZeroModulus);
    }
    if ell > k || k % ell != 0 {
        return Err(StatsError::ModulusMismatch { modulus: ell, k });
    }
    let mut signature = Vec::new();
    for order in 1..=cap {
        for_each_canonical_tuple(k, ell, order, |indices| {
            let idx = StatIndex {
                indices: indices.to_vec(),
                modulus: ell,
            };
            signature.push(stat(x, &idx).expect("modulus checked above"));
            false
        });
    }
    Ok(signature)
}

/// Smallest divisor `ell` of k with `s_j = s_{j + ell}` for all j (indices
/// mod k). Equals k when s has no shorter cyclic symmetry.
pub fn symmetry_period<T: PartialEq>(s: &[T]) -> usize {
    let k = s.len();
    assert!(k >= 1, "period of an empty pattern is undefined");
    for ell in 1..=k {
        if k % ell != 0 {
            continue;
        }
        if (0..k).all(|j| s[j] == s[(j + ell) % k]) {
            return ell;
        }
    }
    k
}

/// Exhaustive check of the order-`cap` separation claim over the box
/// `{0..=max_value}^k`: returns every pair of cyclically distinct classes
/// (one canonical representative each, pairs lexicographically ordered)
/// whose statistics agree at all orders <= cap with modulus 1.
///
/// Empty output means every cyclically distinct pair in the box is separated
/// by order <= cap.
pub fn verify_characterization(
    k: usize,
    max_value: u64,
    cap: usize,
) -> Vec<(GapSequence, GapSequence)> {
    assert!(k >= 1);
    use std::collections::{BTreeSet, HashMap};

    // Canonical representatives of every cyclic class in the box.
    let mut reps: BTreeSet<GapSequence> = BTreeSet::new();
    let mut cur = vec![0u64; k];
    loop {
        let seq = GapSequence::new(cur.clone()).expect("k >= 1");
        reps.insert(seq.canonical_rotation());
        // odometer over {0..=max_value}^k
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

    // Group by the full signature of canonical statistics up to the cap.
    let mut buckets: HashMap<Vec<i128>, Vec<GapSequence>> = HashMap::new();
    for rep in reps {
        let signature =
            stat_signature(&rep.gaps_i64(), cap, 1).expect("modulus 1 always divides");
        buckets.entry(signature).or_default().push(rep);
    }

    let mut out = Vec::new();
    for (_, group) in buckets {
        if group.len() < 2 {
            continue;
        }
        for a in 0..group.len() {
            for b in a + 1..group.len() {
                let (x, y) = (group[a].clone(), group[b].clone());
                if x <= y {
                    out.push((x, y));
                } else {
                    out.push((y, x));
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[i64]) -> Vec<i64> {
        v.to_vec()
    }

    fn idx(indices: &[usize], ell: usize) -> StatIndex {
        StatIndex::new(indices.to_vec(), ell).unwrap()
    }

    /// Direct transcription of the defining sum, as an independent oracle.
    fn stat_oracle(x: &[i64], indices: &[usize], ell: usize) -> i128 {
        let k = x.len();
        (1..=k / ell)
            .map(|j| {
                indices
                    .iter()
                    .map(|&i| x[(i - 1 + j * ell) % k] as i128)
                    .product::<i128>()
            })
            .sum()
    }

    #[test]
    fn matches_known_values() {
        let x = seq(&[0, 2, 3, 2, 1, 1, 1, 1, 2, 3, 2, 0]);
        assert_eq!(stat(&x, &idx(&[1], 1)).unwrap(), 18);
        assert_eq!(stat(&x, &idx(&[1, 1], 1)).unwrap(), 38);
        let y: Vec<i64> = x.iter().map(|v| 3 - v).collect();
        assert_eq!(stat(&y, &idx(&[1], 1)).unwrap(), 18);
        assert_eq!(stat(&y, &idx(&[1, 1], 1)).unwrap(), 38);
    }

    #[test]
    fn modulus_must_divide() {
        let x = seq(&[1, 2, 3, 4]);
        assert!(matches!(
            stat(&x, &idx(&[1], 3)),
            Err(StatsError::ModulusMismatch { modulus: 3, k: 4 })
        ));
        assert!(stat(&x, &idx(&[1], 2)).is_ok());
    }

    #[test]
    fn invariant_under_permutation_and_index_shift() {
        let x = seq(&[3, 1, 4, 1, 5, 9]);
        let a = stat(&x, &idx(&[1, 3, 2], 2)).unwrap();
        assert_eq!(a, stat(&x, &idx(&[2, 1, 3], 2)).unwrap());
        assert_eq!(a, stat(&x, &idx(&[3, 5, 4], 2)).unwrap());
    }

    #[test]
    fn random_tuples_match_oracle() {
        // fixed small pseudo-random walk over tuples
        let x = seq(&[2, 7, 1, 8, 2, 8]);
        let mut state = 12345u64;
        let mut next = |m: u64| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % m
        };
        for _ in 0..200 {
            let ell = [1, 2, 3, 6][next(4) as usize];
            let order = 1 + next(6) as usize;
            let indices: Vec<usize> = (0..order).map(|_| 1 + next(6) as usize).collect();
            let s = StatIndex::new(indices.clone(), ell).unwrap();
            assert_eq!(stat(&x, &s).unwrap(), stat_oracle(&x, &indices, ell));
        }
    }

    #[test]
    fn shifted_stat_matches_integer_stat_on_zero_shift() {
        let x = seq(&[5, 3, 8, 1]);
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let s = vec![0.0; 4];
        for order in 1..=4 {
            let indices: Vec<usize> = (1..=order).collect();
            let si = StatIndex::new(indices, 1).unwrap();
            let exact = stat(&x, &si).unwrap() as f64;
            let shifted = shifted_stat(&xf, &s, &si).unwrap();
            assert!((exact - shifted).abs() < 1e-9);
        }
    }

    #[test]
    fn min_distinguishing_prefers_low_order_then_lex() {
        // permutation pair with equal sums: first difference at order 3
        let x = seq(&[30, 31, 32]);
        let y = seq(&[30, 32, 31]);
        let found = min_distinguishing_stat(&x, &y, 1, 6).unwrap().unwrap();
        assert_eq!(found, idx(&[1, 1, 2], 1));
        // sums differ: order 1
        let z = seq(&[30, 31, 33]);
        let found = min_distinguishing_stat(&x, &z, 1, 6).unwrap().unwrap();
        assert_eq!(found.order(), 1);
    }

    #[test]
    fn equal_sequences_have_no_distinguishing_stat() {
        let x = seq(&[1, 2, 0, 2]);
        assert!(min_distinguishing_stat(&x, &x, 1, 6).unwrap().is_none());
        assert!(min_distinguishing_stat(&x, &x, 2, 6).unwrap().is_none());
        assert!(stats_equal_up_to(&x, &x, 6, 4).unwrap());
    }

    #[test]
    fn symmetry_period_examples() {
        assert_eq!(symmetry_period(&[7, 7, 7]), 1);
        assert_eq!(symmetry_period(&[1, 2, 1, 2]), 2);
        assert_eq!(symmetry_period(&[1, 2, 3, 4]), 4);
        assert_eq!(symmetry_period(&[1, 2, 2, 1]), 4);
        assert_eq!(symmetry_period(&[5]), 1);
    }

    #[test]
    fn stat_index_text_roundtrip() {
        let s: StatIndex = "1,1,2;1".parse().unwrap();
        assert_eq!(s, idx(&[1, 1, 2], 1));
        assert_eq!(s.to_string(), "1,1,2;1");
        assert!("1,2".parse::<StatIndex>().is_err());
        assert!(";2".parse::<StatIndex>().is_err());
        assert!("1,2;0".parse::<StatIndex>().is_err());
    }

    #[test]
    fn canonical_tuple_enumeration() {
        let tuples = canonical_tuples(3, 1, 2).unwrap();
        let want: Vec<StatIndex> = ["1,1;1", "1,2;1", "1,3;1"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(tuples, want);
        // signature lists the same tuples' values in the same order
        let x = [2i64, 0, 1];
        let sig = stat_signature(&x, 2, 1).unwrap();
        let by_tuple: Vec<i128> = canonical_tuples(3, 1, 1)
            .unwrap()
            .iter()
            .chain(tuples.iter())
            .map(|t| stat(&x, t).unwrap())
            .collect();
        assert_eq!(sig, by_tuple);
        assert!(canonical_tuples(3, 2, 1).is_err());
    }

    #[test]
    fn characterization_box_examples() {
        // at cap 1 there are plenty of same-sum distinct classes
        assert!(!verify_characterization(4, 3, 1).is_empty());
        // the k=2 box is separated already at order 2
        assert!(verify_characterization(2, 4, 2).is_empty());
    }

    #[test]
    fn exhaustive_pairs_against_naive_bucketing() {
        // tiny box checked against a direct pairwise scan
        let k = 3;
        let mv = 2;
        let fast = verify_characterization(k, mv, 2);

        let mut all = Vec::new();
        for a in 0..=mv {
            for b in 0..=mv {
                for c in 0..=mv {
                    all.push(GapSequence::new(vec![a, b, c]).unwrap());
                }
            }
        }
        let mut naive = std::collections::BTreeSet::new();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let (x, y) = (&all[i], &all[j]);
                if x.cyclically_equal(y) {
                    continue;
                }
                if stats_equal_up_to(&x.gaps_i64(), &y.gaps_i64(), 2, 1).unwrap() {
                    let (cx, cy) = (x.canonical_rotation(), y.canonical_rotation());
                    let pair = if cx <= cy { (cx, cy) } else { (cy, cx) };
                    naive.insert(pair);
                }
            }
        }
        let naive: Vec<_> = naive.into_iter().collect();
        assert_eq!(fast, naive);
    }
}
