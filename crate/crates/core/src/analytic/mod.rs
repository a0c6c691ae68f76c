//! Closed-form activation model for the activation-duration paging scheme.
//!
//! The expected number of beams activated at least once over a window of
//! `N_a` paging cycles is evaluated with a backward dynamic program over the
//! number of still-unactivated beams. In each step the UEs landing on the
//! `n_u` unactivated beams are Poisson with mean `lambda * n_u / B` (thinning
//! of the per-cell Poisson population), and the number of those beams they
//! cover follows the occupancy law
//! `P{n} = C(n_u, n) * S(n, u) / n_u^u`, `S` the surjection count.

mod monte_carlo;

pub use monte_carlo::{monte_carlo_unique_beams, MonteCarloEstimate};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::combinatorics::{
    effective_epsilon, exact_binomial, surjection_count_exact, truncated_poisson, LnFactorials,
    SurjectionTable, DEFAULT_EPSILON,
};
use crate::error::ModelError;
use crate::scalar::Real;

/// States lighter than this are dropped from the dynamic program.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Largest tolerated probability loss from truncation and pruning.
pub const MAX_LOST_MASS: f64 = 1e-6;

/// Finite distribution over `0..=support_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T> {
    masses: Vec<T>,
}

impl<T: Real> Pmf<T> {
    /// All mass on `k`.
    pub fn degenerate(k: usize) -> Self {
        let mut masses = vec![T::zero(); k + 1];
        masses[k] = T::one();
        Self { masses }
    }

    /// Wraps raw masses; they must be non-negative and sum to one within `1e-9`.
    pub fn from_masses(masses: Vec<T>) -> Result<Self, ModelError> {
        if masses.is_empty() || masses.iter().any(|&m| m.is_nan() || m < T::zero()) {
            return Err(ModelError::InvalidParameter {
                field: "masses",
                reason: "masses must be non-empty and non-negative".into(),
            });
        }
        let pmf = Self { masses };
        let total = pmf.total();
        if (total - T::one()).abs() > T::lit(1e-9).max(T::lit(64.0) * T::epsilon()) {
            return Err(ModelError::InvalidParameter {
                field: "masses",
                reason: format!("masses sum to {total}, not 1"),
            });
        }
        Ok(pmf)
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn support_max(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn prob(&self, k: usize) -> T {
        self.masses.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn total(&self) -> T {
        self.masses.iter().copied().sum()
    }

    pub fn mean(&self) -> T {
        self.masses
            .iter()
            .enumerate()
            .map(|(k, &p)| T::from_count(k) * p)
            .sum()
    }
}

/// Inputs of the activation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationModelParams<T> {
    /// Mean number of UEs per cell per paging cycle.
    pub ue_density: T,
    pub total_beams: usize,
    /// Activation duration `N_a`, in paging cycles.
    pub activation_cycles: usize,
    /// Poisson truncation bound.
    pub epsilon: T,
}

impl<T: Real> ActivationModelParams<T> {
    pub fn new(ue_density: T, total_beams: usize, activation_cycles: usize) -> Self {
        Self {
            ue_density,
            total_beams,
            activation_cycles,
            epsilon: T::lit(DEFAULT_EPSILON),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.total_beams == 0 {
            return Err(invalid("total_beams", "must be at least 1"));
        }
        if self.activation_cycles == 0 {
            return Err(invalid("activation_cycles", "must be at least 1"));
        }
        if !self.ue_density.is_finite() || self.ue_density < T::zero() {
            return Err(invalid("ue_density", "must be finite and non-negative"));
        }
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(invalid("epsilon", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

fn invalid(field: &'static str, reason: &str) -> ModelError {
    ModelError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

/// Inputs of the gain factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainParams<T> {
    /// Resources spent per beam over the `N_a` cycle window.
    pub dl_resources_per_beam: T,
    /// Resources of a single PAR.
    pub ul_resources_per_par: T,
    pub total_beams: usize,
    pub activation_cycles: usize,
}

/// Occupancy law of `ue_count` UEs thrown uniformly on `unactivated_beams` beams.
///
/// Support is `1..=min(u, n_u)`; degenerate at zero when no UE is present.
pub fn conditional_active_pmf<T: Real>(
    unactivated_beams: usize,
    ue_count: usize,
) -> Result<Pmf<T>, ModelError> {
    if ue_count == 0 {
        return Ok(Pmf::degenerate(0));
    }
    if unactivated_beams == 0 {
        return Err(ModelError::NoBeams { ues: ue_count });
    }
    let top = ue_count.min(unactivated_beams);
    let surj = SurjectionTable::<T>::new(top, ue_count);
    let facts = LnFactorials::<T>::new(unactivated_beams);
    let mut masses = vec![T::zero(); top + 1];
    occupancy_masses(unactivated_beams, ue_count, &surj, &facts, &mut masses);
    Ok(Pmf { masses })
}

/// Exact rational occupancy law, for small arguments and testing.
pub fn conditional_active_pmf_exact(
    unactivated_beams: usize,
    ue_count: usize,
) -> Result<Vec<BigRational>, ModelError> {
    if ue_count == 0 {
        return Ok(vec![BigRational::from_integer(1.into())]);
    }
    if unactivated_beams == 0 {
        return Err(ModelError::NoBeams { ues: ue_count });
    }
    let denom: BigUint = BigUint::from(unactivated_beams).pow(ue_count as u32);
    let top = ue_count.min(unactivated_beams);
    let mut out = vec![BigRational::zero(); top + 1];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let num = exact_binomial(unactivated_beams, n) * surjection_count_exact(n, ue_count);
        *slot = BigRational::new(num.into(), denom.clone().into());
    }
    Ok(out)
}

// Writes P{n | n_u, u} for n in 1..=min(u, n_u) into `out[n]`.
fn occupancy_masses<T: Real>(
    n_u: usize,
    u: usize,
    surj: &SurjectionTable<T>,
    facts: &LnFactorials<T>,
    out: &mut [T],
) {
    let ln_total = T::from_count(u) * T::from_count(n_u).ln();
    for (n, slot) in out.iter_mut().enumerate().take(u.min(n_u) + 1).skip(1) {
        let ln_p = facts.ln_binomial(n_u, n) + surj.ln(n, u) - ln_total;
        *slot = ln_p.exp();
    }
}

/// Result of the activation dynamic program.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationEstimate<T> {
    /// `E[n_i]` for `i = 1..=N_a`: beams first occupied in cycle `i` and in
    /// none of the later cycles of the window.
    pub per_cycle: Vec<T>,
    /// Their sum, the expected number of distinct beams activated in the window.
    pub total: T,
    /// Probability mass discarded by Poisson truncation and state pruning.
    pub lost_mass: T,
}

/// Expected number of distinct beams activated over `N_a` paging cycles.
pub fn expected_unique_active_beams<T: Real>(
    params: &ActivationModelParams<T>,
) -> Result<ActivationEstimate<T>, ModelError> {
    params.validate()?;
    let beams = params.total_beams;
    let cycles = params.activation_cycles;
    if params.ue_density == T::zero() {
        return Ok(ActivationEstimate {
            per_cycle: vec![T::zero(); cycles],
            total: T::zero(),
            lost_mass: T::zero(),
        });
    }

    // Poisson laws per unactivated-beam count.
    let b_t = T::from_count(beams);
    let mut poisson = Vec::with_capacity(beams + 1);
    for n_u in 0..=beams {
        let mean = params.ue_density * T::from_count(n_u) / b_t;
        poisson.push(truncated_poisson(mean, params.epsilon)?);
    }
    let max_items = poisson.iter().map(|p| p.support_max()).max().unwrap_or(0);
    let surj = SurjectionTable::<T>::new(beams.min(max_items), max_items);
    let facts = LnFactorials::<T>::new(beams);
    let prune = T::lit(PRUNE_THRESHOLD);

    let mut state = vec![T::zero(); beams + 1];
    state[beams] = T::one();
    let mut per_cycle = vec![T::zero(); cycles];
    let mut lost = T::zero();
    let mut scratch = vec![T::zero(); beams + 1];

    // Cycle N_a first: at that point every beam is still unactivated.
    for i in (0..cycles).rev() {
        let mut next = vec![T::zero(); beams + 1];
        let mut expected = T::zero();
        for n_u in 0..=beams {
            let p_state = state[n_u];
            if p_state == T::zero() {
                continue;
            }
            if n_u == 0 {
                next[0] = next[0] + p_state;
                continue;
            }
            let law = &poisson[n_u];
            lost = lost + p_state * law.tail_mass();
            for (u, &p_u) in law.masses().iter().enumerate() {
                let w = p_state * p_u;
                if u == 0 {
                    next[n_u] = next[n_u] + w;
                    continue;
                }
                let top = u.min(n_u);
                occupancy_masses(n_u, u, &surj, &facts, &mut scratch[..=top]);
                for n in 1..=top {
                    let q = w * scratch[n];
                    next[n_u - n] = next[n_u - n] + q;
                    expected = expected + q * T::from_count(n);
                }
            }
        }
        per_cycle[i] = expected;

        let mut kept = T::zero();
        for p in next.iter_mut() {
            if *p < prune {
                lost = lost + *p;
                *p = T::zero();
            }
            kept = kept + *p;
        }
        for p in next.iter_mut() {
            *p = *p / kept;
        }
        state = next;
    }

    // Precision floor for short floats.
    let limit = T::lit(MAX_LOST_MASS).max(T::lit(100.0) * effective_epsilon(T::epsilon()));
    if lost > limit {
        return Err(ModelError::TruncationDominated {
            lost_mass: lost.to_f64().unwrap_or(f64::NAN),
            limit: limit.to_f64().unwrap_or(f64::NAN),
        });
    }
    let total = per_cycle.iter().copied().sum::<T>().min(b_t);
    Ok(ActivationEstimate {
        per_cycle,
        total,
        lost_mass: lost,
    })
}

/// Union-of-cycles closed form `B (1 - exp(-N_a * lambda / B))`.
pub fn independent_cycles_closed_form<T: Real>(params: &ActivationModelParams<T>) -> T {
    let b = T::from_count(params.total_beams);
    b * (T::one() - (-(T::from_count(params.activation_cycles) * params.ue_density) / b).exp())
}

/// Fractional resource saving over full beam sweeping.
///
/// `1 - (R_D * n_bar + R_U * B * N_a) / (R_D * B)`.
pub fn gain_factor<T: Real>(gp: &GainParams<T>, n_bar: T) -> Result<T, ModelError> {
    if gp.dl_resources_per_beam.is_nan() || gp.dl_resources_per_beam <= T::zero() {
        return Err(invalid("dl_resources_per_beam", "must be positive"));
    }
    if gp.ul_resources_per_par < T::zero() {
        return Err(invalid("ul_resources_per_par", "must be non-negative"));
    }
    if gp.total_beams == 0 {
        return Err(invalid("total_beams", "must be at least 1"));
    }
    let b = T::from_count(gp.total_beams);
    if !(n_bar >= T::zero() && n_bar <= b) {
        return Err(invalid("n_bar", "must lie in [0, total_beams]"));
    }
    let n_a = T::from_count(gp.activation_cycles);
    let dl = gp.dl_resources_per_beam;
    Ok(T::one() - (dl * n_bar + gp.ul_resources_per_par * b * n_a) / (dl * b))
}

/// Expected PARs a single-beam-tracking UE sends over `N_a` cycles.
///
/// One PAR opens the window and each of the remaining `N_a - 1` cycles
/// lands on a different beam with probability `1 - 1/B`.
pub fn expected_par_count<T: Real>(total_beams: usize, activation_cycles: usize) -> T {
    assert!(total_beams >= 1 && activation_cycles >= 1);
    let b = T::from_count(total_beams);
    let switch = T::one() - T::one() / b;
    let stay = T::one() / b;
    let trials = activation_cycles - 1;
    let mut acc = T::one();
    for j in 1..=trials {
        let c = crate::combinatorics::binomial(trials, j)
            .map(|c| T::lit(c as f64))
            .unwrap_or_else(|| {
                crate::combinatorics::log_binomial::<T>(trials, j)
                    .expect("j <= trials")
                    .to_count()
            });
        acc = acc + T::from_count(j) * c * switch.powi(j as i32) * stay.powi((trials - j) as i32);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, ToPrimitive};
    use proptest::prelude::*;

    #[test]
    fn conditional_examples() {
        let p = conditional_active_pmf::<f64>(2, 2).unwrap();
        assert!((p.prob(1) - 0.5).abs() < 1e-15);
        assert!((p.prob(2) - 0.5).abs() < 1e-15);

        let p = conditional_active_pmf::<f64>(1, 7).unwrap();
        assert!((p.prob(1) - 1.0).abs() < 1e-15);

        let p = conditional_active_pmf::<f64>(5, 0).unwrap();
        assert_eq!(p.masses(), &[1.0]);

        assert_eq!(
            conditional_active_pmf::<f64>(0, 3),
            Err(ModelError::NoBeams { ues: 3 })
        );
        assert_eq!(conditional_active_pmf::<f64>(0, 0).unwrap().masses(), &[1.0]);
    }

    // Brute-force enumeration of all n_u^u equiprobable placements.
    fn enumerate_occupancy(n_u: usize, u: usize) -> Vec<f64> {
        let total = n_u.pow(u as u32);
        let mut counts = vec![0usize; n_u.min(u) + 1];
        for code in 0..total {
            let mut seen = vec![false; n_u];
            let mut c = code;
            for _ in 0..u {
                seen[c % n_u] = true;
                c /= n_u;
            }
            counts[seen.iter().filter(|&&s| s).count()] += 1;
        }
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }

    #[test]
    fn conditional_matches_enumeration() {
        for n_u in 1..=5 {
            for u in 1..=6 {
                let want = enumerate_occupancy(n_u, u);
                let got = conditional_active_pmf::<f64>(n_u, u).unwrap();
                for (k, w) in want.iter().enumerate() {
                    assert!((got.prob(k) - w).abs() < 1e-13, "n_u={n_u} u={u} k={k}");
                }
            }
        }
    }

    #[test]
    fn exact_pmf_sums_to_one_and_matches_float() {
        for n_u in 1..=8 {
            for u in 0..=10 {
                let exact = conditional_active_pmf_exact(n_u, u).unwrap();
                let sum = exact.iter().fold(BigRational::zero(), |a, b| a + b);
                assert!(sum.is_one());
                let float = conditional_active_pmf::<f64>(n_u, u).unwrap();
                for (k, q) in exact.iter().enumerate() {
                    let q = q.to_f64().unwrap();
                    assert!((float.prob(k) - q).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn conditional_normalised_on_full_grid() {
        for n_u in 1..=64 {
            for u in (0..=200).step_by(7).chain([200]) {
                let p = conditional_active_pmf::<f64>(n_u, u).unwrap();
                assert!((p.total() - 1.0).abs() < 1e-9, "n_u={n_u} u={u}");
            }
        }
    }

    #[test]
    fn expected_beams_examples() {
        let est = expected_unique_active_beams(&ActivationModelParams::new(0.0f64, 64, 3)).unwrap();
        assert_eq!(est.total, 0.0);

        let est = expected_unique_active_beams(&ActivationModelParams::new(10.0f64, 16, 1)).unwrap();
        assert!((est.total - 7.4358).abs() < 1e-4);
        assert!((est.total - 16.0 * (1.0 - (-10.0f64 / 16.0).exp())).abs() < 1e-6);

        let est = expected_unique_active_beams(&ActivationModelParams::new(32.0f64, 64, 3)).unwrap();
        assert!((est.total - 49.7197).abs() < 1e-4);
        assert_eq!(est.per_cycle.len(), 3);
    }

    #[test]
    fn per_cycle_terms_match_independent_cycles() {
        // Beams first hit in cycle i and never after: B e^{-(N_a-i) l/B}(1 - e^{-l/B}).
        let params = ActivationModelParams::new(8.0f64, 16, 3);
        let est = expected_unique_active_beams(&params).unwrap();
        let q = (-8.0f64 / 16.0).exp();
        for (i, got) in est.per_cycle.iter().enumerate() {
            let later = (3 - (i + 1)) as i32;
            let want = 16.0 * q.powi(later) * (1.0 - q);
            assert!((got - want).abs() < 1e-7, "cycle {} got {got} want {want}", i + 1);
        }
    }

    #[test]
    fn f32_agrees_with_f64() {
        let p64 = expected_unique_active_beams(&ActivationModelParams::new(32.0f64, 64, 3)).unwrap();
        let p32 = expected_unique_active_beams(&ActivationModelParams::new(32.0f32, 64, 3)).unwrap();
        assert!((p64.total - p32.total as f64).abs() < 1e-3);
    }

    #[test]
    fn monotone_and_bounded_on_grid() {
        for b in [4usize, 16, 64] {
            let mut prev_lambda = 0.0;
            for lambda in [0.0f64, 1.0, 4.0, 16.0, 64.0] {
                let mut prev_na = 0.0;
                for n_a in 1..=3 {
                    let v = expected_unique_active_beams(&ActivationModelParams::new(lambda, b, n_a))
                        .unwrap()
                        .total;
                    assert!(v <= b as f64 + 1e-12);
                    assert!(v + 1e-9 >= prev_na);
                    prev_na = v;
                }
                assert!(prev_na + 1e-9 >= prev_lambda);
                prev_lambda = prev_na;
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = ActivationModelParams::new(1.0f64, 0, 1);
        assert!(matches!(
            expected_unique_active_beams(&p),
            Err(ModelError::InvalidParameter { field: "total_beams", .. })
        ));
        p.total_beams = 4;
        p.activation_cycles = 0;
        assert!(expected_unique_active_beams(&p).is_err());
        p.activation_cycles = 1;
        p.ue_density = -1.0;
        assert!(expected_unique_active_beams(&p).is_err());
    }

    #[test]
    fn coarse_epsilon_reports_truncation() {
        let mut p = ActivationModelParams::new(32.0f64, 64, 3);
        p.epsilon = 0.05;
        assert!(matches!(
            expected_unique_active_beams(&p),
            Err(ModelError::TruncationDominated { .. })
        ));
    }

    #[test]
    fn gain_factor_examples() {
        let gp = |r_d, r_u, b, n_a| GainParams {
            dl_resources_per_beam: r_d,
            ul_resources_per_par: r_u,
            total_beams: b,
            activation_cycles: n_a,
        };
        assert_eq!(gain_factor(&gp(10.0f64, 0.0, 64, 5), 64.0).unwrap(), 0.0);
        assert_eq!(gain_factor(&gp(10.0f64, 0.0, 64, 5), 0.0).unwrap(), 1.0);
        let g = gain_factor(&gp(100.0f64, 1.0, 64, 5), 10.0).unwrap();
        assert!((g - 0.79375).abs() < 1e-15);
        assert!(gain_factor(&gp(0.0f64, 1.0, 64, 5), 10.0).is_err());
        assert!(gain_factor(&gp(1.0f64, 1.0, 64, 5), 65.0).is_err());
    }

    #[test]
    fn par_count_examples() {
        assert_eq!(expected_par_count::<f64>(1, 5), 1.0);
        assert_eq!(expected_par_count::<f64>(37, 1), 1.0);
        assert!((expected_par_count::<f64>(64, 3) - 2.96875).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn par_count_is_binomial_mean(b in 1usize..=512, n_a in 1usize..=30) {
            let want = 1.0 + (n_a as f64 - 1.0) * (1.0 - 1.0 / b as f64);
            prop_assert!((expected_par_count::<f64>(b, n_a) - want).abs() < 1e-12);
        }

        #[test]
        fn gain_factor_never_exceeds_one(
            r_d in 0.01f64..1e4, r_u in 0.0f64..10.0, b in 1usize..=256, n_a in 1usize..=10, frac in 0.0f64..=1.0
        ) {
            let gp = GainParams { dl_resources_per_beam: r_d, ul_resources_per_par: r_u, total_beams: b, activation_cycles: n_a };
            prop_assert!(gain_factor(&gp, frac * b as f64).unwrap() <= 1.0);
        }
    }
}
