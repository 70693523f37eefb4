//! Discrete Fourier analysis of integer sequences, gcd-class zero patterns,
//! and the constructive number theory that accompanies them.
//!
//! The transform uses the positive-exponent convention
//! `x_hat_j = sum_l x_l e^{2*pi*i*j*l/k}`. Frequencies `j in [k] = {1..k}`
//! (with `j = k` wrapping to `x_hat_0`) are grouped into classes by
//! `gcd(j, k)`; for integer input the coefficients within one class are all
//! zero or all nonzero, which [`zero_pattern`] classifies numerically.
//!
//! The modular side provides a canonical representation of any residue as a
//! sum of two or three residues coprime to the modulus, p-adic valuations,
//! and a brute-force solver for a consistent shift constant across gcd
//! classes.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num::complex::Complex64;
use num::integer::gcd;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FourierError {
    #[error("{alpha} is not a divisor of {k}")]
    NotADivisor { alpha: usize, k: usize },
}

/// Complex spectrum of a length-k integer sequence.
#[derive(Debug, Clone)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// Coefficients `x_hat_0 ..= x_hat_{k-1}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn source_length(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient for a frequency given in 1..=k form (or any integer):
    /// the index is reduced mod k, so `j = k` names `x_hat_0`.
    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs[j % self.coeffs.len()]
    }
}

/// Direct O(k^2) transform with positive exponent.
///
/// k stays a small constant here, so there is no need for an FFT; the phase
/// `j*l` is reduced mod k before the trig call to keep angles small.
pub fn dft(x: &[i64]) -> Spectrum {
    let k = x.len();
    assert!(k >= 1, "transform of an empty sequence is undefined");
    let coeffs = (0..k)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &v) in x.iter().enumerate() {
                let angle = TAU * ((j * l) % k) as f64 / k as f64;
                acc += Complex64::from_polar(v as f64, angle);
            }
            acc
        })
        .collect();
    Spectrum { coeffs }
}

/// Frequencies sharing one gcd with k: `{j in [k] : gcd(j, k) = alpha}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcdClass {
    alpha: usize,
    members: Vec<usize>,
}

impl GcdClass {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Members in increasing order, each in 1..=k.
    pub fn members(&self) -> &[usize] {
        &self.members
    }
}

pub fn gcd_class(k: usize, alpha: usize) -> Result<GcdClass, FourierError> {
    if alpha == 0 || k % alpha != 0 {
        return Err(FourierError::NotADivisor { alpha, k });
    }
    let members = (1..=k).filter(|&j| gcd(j, k) == alpha).collect();
    Ok(GcdClass { alpha, members })
}

/// All divisors of k in increasing order.
pub fn divisors(k: usize) -> Vec<usize> {
    assert!(k >= 1);
    let mut out: Vec<usize> = (1..=k).filter(|d| k % d == 0).collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroPattern {
    AllZero,
    AllNonzero,
    /// Never expected for exact integer input at a suitable tolerance:
    /// signals numerical noise or a violated joint-zero invariant.
    Mixed,
}

/// Tolerance scaled to the L1 mass of the input, since roundoff in the
/// direct transform grows with coefficient magnitude.
pub fn default_zero_tol(x: &[i64]) -> f64 {
    1e-6 * (1.0 + x.iter().map(|v| v.unsigned_abs() as f64).sum::<f64>())
}

/// Classify every gcd class of the spectrum as all-zero, all-nonzero, or
/// mixed under the given tolerance.
pub fn zero_pattern(spectrum: &Spectrum, tol: f64) -> BTreeMap<usize, ZeroPattern> {
    assert!(tol > 0.0);
    let k = spectrum.source_length();
    let mut out = BTreeMap::new();
    for alpha in divisors(k) {
        let class = gcd_class(k, alpha).expect("alpha enumerated as a divisor");
        let mut zeros = 0usize;
        for &j in class.members() {
            if spectrum.coeff(j).norm() < tol {
                zeros += 1;
            }
        }
        let pattern = if zeros == class.members().len() {
            ZeroPattern::AllZero
        } else if zeros == 0 {
            ZeroPattern::AllNonzero
        } else {
            ZeroPattern::Mixed
        };
        out.insert(alpha, pattern);
    }
    out
}

/// Check that every m-way product of spectrum coefficients over index tuples
/// summing to 0 mod k agrees between x and y, within `tol` (relative once
/// magnitudes exceed 1, absolute below that).
///
/// Meaningful when x and y share all order-m cyclic statistics; products are
/// symmetric in the tuple, so non-decreasing tuples cover every case.
pub fn product_identity_check(x: &[i64], y: &[i64], m: usize, tol: f64) -> bool {
    assert_eq!(x.len(), y.len(), "sequences must share a length");
    assert!(m >= 1);
    let k = x.len();
    let sx = dft(x);
    let sy = dft(y);

    let mut tuple = vec![1usize; m];
    loop {
        let sum: usize = tuple.iter().sum();
        if sum % k == 0 {
            let px: Complex64 = tuple.iter().map(|&i| sx.coeff(i)).product();
            let py: Complex64 = tuple.iter().map(|&i| sy.coeff(i)).product();
            let scale = px.norm().max(py.norm()).max(1.0);
            if (px - py).norm() > tol * scale {
                return false;
            }
        }
        // next non-decreasing tuple over [k]^m
        let mut pos = m;
        loop {
            if pos == 0 {
                return true;
            }
            pos -= 1;
            if tuple[pos] < k {
                tuple[pos] += 1;
                let v = tuple[pos];
                for t in tuple.iter_mut().skip(pos + 1) {
                    *t = v;
                }
                break;
            }
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Largest power of the prime p dividing a.
pub fn p_adic_valuation(a: u64, p: u64) -> u32 {
    assert!(a >= 1, "valuation of 0 is undefined");
    assert!(is_prime(p), "{p} is not prime");
    let mut a = a;
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    v
}

/// Prime-power factorization of d as (p, p^a) pairs, ascending in p.
fn prime_power_factors(d: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut rest = d;
    let mut p = 2;
    while p * p <= rest {
        if rest % p == 0 {
            let mut pa = 1;
            while rest % p == 0 {
                rest /= p;
                pa *= p;
            }
            out.push((p, pa));
        }
        p += 1;
    }
    if rest > 1 {
        out.push((rest, rest));
    }
    out
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, s, t) = egcd(b, a % b);
        (g, t, s - (a / b) * t)
    }
}

/// Solve r = r1 mod m1, r = r2 mod m2 for coprime moduli.
fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    let (g, s, _) = egcd(m1 as i128, m2 as i128);
    debug_assert_eq!(g, 1);
    let m = (m1 as i128) * (m2 as i128);
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128);
    let r = (r1 as i128 + (diff * s).rem_euclid(m2 as i128) * m1 as i128).rem_euclid(m);
    r as u64
}

/// Per-prime-power summand choice. The expression checked first is the one
/// listed first in the underlying case split, so output is deterministic.
fn prime_power_summands(p: u64, pa: u64, j: u64, want: usize) -> Vec<u64> {
    let j = j % pa;
    if want == 2 {
        if p == 2 {
            // j even here, so j - 1 is odd
            debug_assert_eq!(j % 2, 0);
            vec![(j + pa - 1) % pa, 1 % pa]
        } else if (j + pa - 1) % p != 0 {
            vec![(j + pa - 1) % pa, 1]
        } else {
            vec![(j + 1) % pa, pa - 1]
        }
    } else if p == 2 {
        // j odd here, so j - 2 is odd
        debug_assert_eq!(j % 2, 1);
        vec![(j + 2 * pa - 2) % pa, 1 % pa, 1 % pa]
    } else if (j + 2 * pa - 2) % p != 0 {
        vec![(j + 2 * pa - 2) % pa, 1, 1]
    } else {
        vec![(j + 2) % pa, pa - 1, pa - 1]
    }
}

/// Write `j` as a sum mod d of residues that are each coprime to d: three
/// residues when d is even and j is odd, two otherwise. Residues are in
/// `[d] = {1..d}` and the construction is canonical (per-prime-power case
/// split, first listed expression, combined by the Chinese remainder
/// theorem), so equal inputs always yield the same tuple.
pub fn coprime_sum_repr(d: u64, j: u64) -> Vec<u64> {
    assert!(d >= 1);
    if d == 1 {
        // everything is coprime to 1; represent 0 as 1 + 1
        return vec![1, 1];
    }
    let j = j % d;
    let want = if d % 2 == 0 && j % 2 == 1 { 3 } else { 2 };
    let factors = prime_power_factors(d);

    let mut residues = Vec::with_capacity(want);
    for slot in 0..want {
        let mut r = 0u64;
        let mut modulus = 1u64;
        for &(p, pa) in &factors {
            let parts = prime_power_summands(p, pa, j % pa, want);
            r = crt_pair(r, modulus, parts[slot] % pa, pa);
            modulus *= pa;
        }
        // coprime to d means nonzero mod d, but pa = 2 can emit 1 % 2 = 1
        // and the d = 1 case is handled above, so r = 0 cannot occur here.
        debug_assert!(r >= 1 && r < d);
        residues.push(r);
    }
    residues
}

/// Smallest c in 0..k with `(c - c_alpha) * alpha = 0 mod k` for every
/// assignment, found by exhaustive search; absent when the assignments are
/// inconsistent.
pub fn consistent_shift_constant(k: usize, assignments: &[(usize, i64)]) -> Option<i64> {
    assert!(k >= 1);
    let kk = k as i64;
    (0..kk).find(|&c| {
        assignments
            .iter()
            .all(|&(alpha, c_alpha)| ((c - c_alpha).rem_euclid(kk) * alpha as i64) % kk == 0)
    })
}
