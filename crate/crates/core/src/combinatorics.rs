//! Counting primitives: surjections, binomials and truncated Poisson mass.
//!
//! Counts grow past 64-bit range almost immediately (`64^11` already
//! overflows), so everything the analytic model consumes is carried in the
//! log domain as a [`LogCount`]. Exact big-integer routines are kept
//! alongside for small arguments and serve as the reference path.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::CombinatoricsError;
use crate::scalar::Real;

/// Default Poisson truncation bound.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Natural logarithm of a non-negative count, with an explicit zero marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCount<T> {
    value: T,
    zero: bool,
}

impl<T: Real> LogCount<T> {
    pub fn zero() -> Self {
        Self {
            value: T::neg_infinity(),
            zero: true,
        }
    }

    pub fn one() -> Self {
        Self::from_ln(T::zero())
    }

    pub fn from_ln(value: T) -> Self {
        Self { value, zero: false }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `ln(count)`, or `None` for an exact zero.
    pub fn ln(&self) -> Option<T> {
        (!self.zero).then_some(self.value)
    }

    /// `ln(count)` with `-inf` standing in for zero.
    pub fn ln_or_neg_inf(&self) -> T {
        self.value
    }

    /// The count itself; overflows to `inf` for very large counts.
    pub fn to_count(&self) -> T {
        if self.zero {
            T::zero()
        } else {
            self.value.exp()
        }
    }
}

/// Exact `C(n, k)` when it fits in 128 bits.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        c = c.checked_mul(n as u128 - k as u128 + i)? / i;
    }
    Some(c)
}

/// `ln C(n, k)`. Exact (then logged) for `n <= 120`.
pub fn log_binomial<T: Real>(n: usize, k: usize) -> Result<LogCount<T>, CombinatoricsError> {
    if k > n {
        return Err(CombinatoricsError::KOutOfRange { n, k });
    }
    if n <= 120 {
        if let Some(c) = binomial(n, k) {
            return Ok(LogCount::from_ln(T::lit(c as f64).ln()));
        }
    }
    let k = k.min(n - k);
    let mut acc = T::zero();
    for i in 1..=k {
        acc = acc + T::from_count(n - k + i).ln() - T::from_count(i).ln();
    }
    Ok(LogCount::from_ln(acc))
}

/// Table of `ln k!` for `k <= max`.
#[derive(Debug, Clone)]
pub struct LnFactorials<T> {
    values: Vec<T>,
}

impl<T: Real> LnFactorials<T> {
    pub fn new(max: usize) -> Self {
        let mut values = Vec::with_capacity(max + 1);
        values.push(T::zero());
        let mut acc = T::zero();
        for k in 1..=max {
            acc = acc + T::from_count(k).ln();
            values.push(acc);
        }
        Self { values }
    }

    pub fn get(&self, k: usize) -> T {
        self.values[k]
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> T {
        self.values[n] - self.values[k] - self.values[n - k]
    }
}

/// Number of surjections of `u` distinguishable items onto `n` bins.
///
/// Evaluated with the all-positive recurrence
/// `S(u, n) = n * (S(u-1, n) + S(u-1, n-1))`, which never cancels.
pub fn surjection_count<T: Real>(n: usize, u: usize) -> LogCount<T> {
    if u < n {
        return LogCount::zero();
    }
    if n == 0 {
        // Only the empty map lands on no bins.
        return if u == 0 { LogCount::one() } else { LogCount::zero() };
    }
    let table = SurjectionTable::<T>::new(n, u);
    table.get(n, u)
}

/// Exact surjection count via the subtractive recursion
/// `b_n = n^u - sum_{k<n} C(n,k) b_k`, `b_1 = 1`.
///
/// Reference path for small arguments; the recursion reuses the same `u`
/// for every `b_k`.
pub fn surjection_count_exact(n: usize, u: usize) -> BigUint {
    if u < n || (n == 0 && u > 0) {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one();
    }
    let mut b: Vec<BigUint> = Vec::with_capacity(n + 1);
    b.push(BigUint::zero()); // b_0 = 0 for u >= 1
    for m in 1..=n {
        let mut value = BigUint::from(m).pow(u as u32);
        for (k, bk) in b.iter().enumerate().take(m).skip(1) {
            value -= exact_binomial(m, k) * bk;
        }
        b.push(value);
    }
    b.pop().expect("n >= 1")
}

/// Exact `C(n, k)` as a big integer.
pub fn exact_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 1..=k {
        c *= BigUint::from(n - k + i);
        c /= BigUint::from(i);
    }
    c
}

/// Precomputed `ln S(u, n)` for all `n <= max_bins`, `u <= max_items`.
#[derive(Debug, Clone)]
pub struct SurjectionTable<T> {
    max_bins: usize,
    // row-major over u, each row has max_bins + 1 entries
    ln_values: Vec<T>,
}

impl<T: Real> SurjectionTable<T> {
    pub fn new(max_bins: usize, max_items: usize) -> Self {
        let width = max_bins + 1;
        let mut ln_values = vec![T::neg_infinity(); width * (max_items + 1)];
        ln_values[0] = T::zero();
        for u in 1..=max_items {
            let (prev, cur) = ln_values.split_at_mut(u * width);
            let prev = &prev[(u - 1) * width..];
            let cur = &mut cur[..width];
            for n in 1..=max_bins.min(u) {
                let inner = T::log_add_exp(prev[n], prev[n - 1]);
                cur[n] = if inner == T::neg_infinity() {
                    inner
                } else {
                    T::from_count(n).ln() + inner
                };
            }
        }
        Self {
            max_bins,
            ln_values,
        }
    }

    pub fn max_bins(&self) -> usize {
        self.max_bins
    }

    pub fn max_items(&self) -> usize {
        self.ln_values.len() / (self.max_bins + 1) - 1
    }

    /// Surjection count of `u` items onto `n` bins.
    pub fn get(&self, n: usize, u: usize) -> LogCount<T> {
        let v = self.ln(n, u);
        if v == T::neg_infinity() {
            LogCount::zero()
        } else {
            LogCount::from_ln(v)
        }
    }

    /// Raw `ln` value, `-inf` for zero.
    pub fn ln(&self, n: usize, u: usize) -> T {
        assert!(n <= self.max_bins && u <= self.max_items(), "surjection table too small");
        self.ln_values[u * (self.max_bins + 1) + n]
    }
}

/// Poisson law truncated to the shortest prefix carrying `1 - epsilon` of the mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPoisson<T> {
    mean: T,
    masses: Vec<T>,
    tail_mass: T,
}

impl<T: Real> TruncatedPoisson<T> {
    pub fn mean(&self) -> T {
        self.mean
    }

    /// Probabilities indexed by count.
    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// Probability beyond the last carried count.
    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    pub fn support_max(&self) -> usize {
        self.masses.len() - 1
    }
}

/// Truncation bound actually honoured for scalar type `T`: `epsilon`,
/// floored at a few ulps of one (relevant for `f32`).
pub fn effective_epsilon<T: Real>(epsilon: T) -> T {
    epsilon.max(T::lit(8.0) * T::epsilon())
}

/// Poisson(`mean`) truncated once the carried mass reaches `1 - epsilon`.
pub fn truncated_poisson<T: Real>(mean: T, epsilon: T) -> Result<TruncatedPoisson<T>, CombinatoricsError> {
    let mean_f = mean.to_f64().unwrap_or(f64::NAN);
    if !mean.is_finite() || mean < T::zero() {
        return Err(CombinatoricsError::InvalidMean(mean_f));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(CombinatoricsError::InvalidEpsilon(epsilon.to_f64().unwrap_or(f64::NAN)));
    }
    if mean == T::zero() {
        return Ok(TruncatedPoisson {
            mean,
            masses: vec![T::one()],
            tail_mass: T::zero(),
        });
    }
    let target = T::one() - effective_epsilon(epsilon);
    let ln_mean = mean.ln();
    // hard stop far beyond any sane quantile
    let cap = (mean_f + 40.0 * mean_f.sqrt() + 64.0) as usize;
    let mut masses = Vec::new();
    let mut ln_fact = T::zero();
    let mut total = T::zero();
    for k in 0..=cap {
        if k > 0 {
            ln_fact = ln_fact + T::from_count(k).ln();
        }
        let p = (T::from_count(k) * ln_mean - mean - ln_fact).exp();
        masses.push(p);
        total = total + p;
        if total >= target {
            break;
        }
    }
    let tail_mass = (T::one() - total).max(T::zero());
    Ok(TruncatedPoisson {
        mean,
        masses,
        tail_mass,
    })
}
