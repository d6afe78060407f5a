//! Sample-based estimators for overlaps and angles between states.
//!
//! All estimators draw `ceil(4/eps^2)` Bernoulli samples from the exact
//! acceptance probability of the corresponding test circuit, so estimates
//! land within `eps` of the truth at >= 95% confidence for the magnitude
//! regime the callers use. The ledger always records the actual sample
//! count; under [`CostModel::Paper`] the input-preparation charge is
//! rescaled to the 1/eps amplitude-estimation rate for complexity fits.

use crate::error::{CoreError, Result};
use crate::ledger::{CostLedger, CostModel};
use crate::qcore::StateVector;
use crate::random::RandomSource;

/// Imaginary parts above this make a state ineligible for signed tests.
pub const REAL_TOL: f64 = 1e-10;
/// Estimated overlaps this close to +/-1 make the angle degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// An estimated angle in [0, pi] with its reported uncertainty.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AngleEstimate {
    pub value: f64,
    pub half_width: f64,
    pub samples_used: u64,
}

/// An estimated overlap together with the sample count that produced it.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct OverlapEstimate {
    pub value: f64,
    pub samples: u64,
}

/// Bernoulli samples required for accuracy `epsilon` at 95% confidence.
pub fn sample_count(epsilon: f64) -> u64 {
    (4.0 / (epsilon * epsilon)).ceil() as u64
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

fn check_real(s: &StateVector) -> Result<()> {
    let max_imag = s.max_imag();
    if max_imag > REAL_TOL {
        return Err(CoreError::NonRealState { max_imag });
    }
    Ok(())
}

fn charge(ledger: &mut CostLedger, model: CostModel, samples: u64, epsilon: f64) {
    ledger.estimator_samples += samples;
    ledger.input_preps += match model {
        CostModel::Sampling => 2 * samples,
        CostModel::Paper => 2 * (1.0 / epsilon).ceil() as u64,
    };
}

fn bernoulli_mean(p: f64, samples: u64, rng: &mut RandomSource) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let mut hits = 0u64;
    for _ in 0..samples {
        if rng.gen_f64() < p {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

/// Exact swap-test acceptance probability (1 + |<a|b>|^2)/2.
pub fn swap_test_prob(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((1.0 + a.inner(b)?.norm_sqr()) / 2.0)
}

/// Estimate |<a|b>| by sampling the swap test and inverting p = (1+c^2)/2.
///
/// Never returns a negative estimate. Two input preparations are charged
/// per sample (or per 1/eps unit under the paper cost model).
pub fn overlap_magnitude(
    a: &StateVector,
    b: &StateVector,
    epsilon: f64,
    rng: &mut RandomSource,
    ledger: &mut CostLedger,
    model: CostModel,
) -> Result<OverlapEstimate> {
    check_epsilon(epsilon)?;
    let p = swap_test_prob(a, b)?;
    let samples = sample_count(epsilon);
    let p_hat = bernoulli_mean(p, samples, rng);
    charge(ledger, model, samples, epsilon);
    Ok(OverlapEstimate { value: (2.0 * p_hat - 1.0).max(0.0).sqrt(), samples })
}

/// Estimate Re<a|b> for real-amplitude states via an idealized signed test
/// with acceptance probability (1 + Re<a|b>)/2.
pub fn overlap_signed(
    a: &StateVector,
    b: &StateVector,
    epsilon: f64,
    rng: &mut RandomSource,
    ledger: &mut CostLedger,
    model: CostModel,
) -> Result<OverlapEstimate> {
    check_epsilon(epsilon)?;
    check_real(a)?;
    check_real(b)?;
    let p = (1.0 + a.inner(b)?.re) / 2.0;
    let samples = sample_count(epsilon);
    let p_hat = bernoulli_mean(p, samples, rng);
    charge(ledger, model, samples, epsilon);
    Ok(OverlapEstimate { value: 2.0 * p_hat - 1.0, samples })
}

/// Estimate the angle between two real states as acos of the clamped
/// signed overlap, with the uncertainty propagated through the acos
/// derivative bound.
pub fn estimate_angle(
    a: &StateVector,
    b: &StateVector,
    epsilon: f64,
    rng: &mut RandomSource,
    ledger: &mut CostLedger,
    model: CostModel,
) -> Result<AngleEstimate> {
    let est = overlap_signed(a, b, epsilon, rng, ledger, model)?;
    let c = est.value.clamp(-1.0, 1.0);
    if c.abs() > 1.0 - DEGENERATE_TOL {
        return Err(CoreError::DegenerateAngle { overlap: c });
    }
    Ok(AngleEstimate {
        value: c.acos(),
        half_width: epsilon / (1.0 - c * c + epsilon).sqrt(),
        samples_used: est.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_real_state;
    use crate::testutil::{pair_with_overlap, section4_pair};

    #[test]
    fn swap_test_matches_known_overlaps() {
        let a = StateVector::basis(4, 0).unwrap();
        let b = StateVector::basis(4, 1).unwrap();
        assert!((swap_test_prob(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert!((swap_test_prob(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let (a4, b4) = section4_pair(4, 0);
        assert!((swap_test_prob(&a4, &b4).unwrap() - 0.625).abs() < 1e-12);
    }

    #[test]
    fn swap_test_stays_in_upper_half_interval() {
        let mut rng = RandomSource::new(3);
        for _ in 0..20 {
            let a = crate::random::random_state(6, &mut rng).unwrap();
            let b = crate::random::random_state(6, &mut rng).unwrap();
            let p = swap_test_prob(&a, &b).unwrap();
            assert!((0.5..=1.0 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn magnitude_estimates_identical_and_orthogonal_pairs() {
        let mut rng = RandomSource::new(7);
        let s = random_real_state(8, &mut rng).unwrap();
        let mut ledger = CostLedger::ZERO;
        let est =
            overlap_magnitude(&s, &s, 0.1, &mut rng, &mut ledger, CostModel::Sampling).unwrap();
        assert!((est.value - 1.0).abs() <= 0.1);
        let a = StateVector::basis(8, 0).unwrap();
        let b = StateVector::basis(8, 1).unwrap();
        let mut rng = RandomSource::new(3);
        let est =
            overlap_magnitude(&a, &b, 0.1, &mut rng, &mut ledger, CostModel::Sampling).unwrap();
        assert!(est.value >= 0.0 && est.value <= 0.1);
    }

    #[test]
    fn magnitude_hits_rate_over_seed_family() {
        let mut within = 0;
        for seed in 0..100 {
            let mut rng = RandomSource::new(seed);
            let (a, b) = pair_with_overlap(16, 0.6, &mut rng);
            let mut ledger = CostLedger::ZERO;
            let est =
                overlap_magnitude(&a, &b, 0.05, &mut rng, &mut ledger, CostModel::Sampling)
                    .unwrap();
            if (est.value - 0.6).abs() <= 0.05 {
                within += 1;
            }
        }
        assert!(within >= 95, "only {within}/100 within epsilon");
    }

    #[test]
    fn signed_recovers_antipodal_sign() {
        let mut rng = RandomSource::new(11);
        let s = random_real_state(8, &mut rng).unwrap();
        let mut ledger = CostLedger::ZERO;
        let plus =
            overlap_signed(&s, &s, 0.1, &mut rng, &mut ledger, CostModel::Sampling).unwrap();
        assert!((plus.value - 1.0).abs() <= 0.1);
        let minus = overlap_signed(&s, &s.negated(), 0.1, &mut rng, &mut ledger, CostModel::Sampling)
            .unwrap();
        assert!((minus.value + 1.0).abs() <= 0.1);
    }

    #[test]
    fn signed_matches_section4_formula_at_n16() {
        let (a, b) = section4_pair(16, 3);
        let expected = (2.0 - 16.0) / 16.0;
        assert!((a.inner(&b).unwrap().re - expected).abs() < 1e-12);
        let mut rng = RandomSource::new(13);
        let mut ledger = CostLedger::ZERO;
        let est =
            overlap_signed(&a, &b, 0.05, &mut rng, &mut ledger, CostModel::Sampling).unwrap();
        assert!((est.value - expected).abs() <= 0.05);
    }

    #[test]
    fn signed_rejects_complex_amplitudes() {
        let mut rng = RandomSource::new(17);
        let a = crate::random::random_state(4, &mut rng).unwrap();
        let b = random_real_state(4, &mut rng).unwrap();
        let mut ledger = CostLedger::ZERO;
        let r = overlap_signed(&a, &b, 0.1, &mut rng, &mut ledger, CostModel::Sampling);
        assert!(matches!(r, Err(CoreError::NonRealState { .. })));
    }

    #[test]
    fn signed_agrees_with_magnitude_within_two_epsilon() {
        let eps = 0.05;
        let mut agree = 0;
        for seed in 0..100 {
            let mut rng = RandomSource::new(1000 + seed);
            let (a, b) = pair_with_overlap(16, 0.6, &mut rng);
            let mut ledger = CostLedger::ZERO;
            let s = overlap_signed(&a, &b, eps, &mut rng, &mut ledger, CostModel::Sampling)
                .unwrap();
            let m = overlap_magnitude(&a, &b, eps, &mut rng, &mut ledger, CostModel::Sampling)
                .unwrap();
            if (s.value.abs() - m.value).abs() <= 2.0 * eps {
                agree += 1;
            }
        }
        assert!(agree >= 95, "only {agree}/100 agree");
    }

    #[test]
    fn angle_of_orthogonal_pair_is_right() {
        let a = StateVector::basis(4, 0).unwrap();
        let b = StateVector::basis(4, 1).unwrap();
        let mut rng = RandomSource::new(19);
        let mut ledger = CostLedger::ZERO;
        let est = estimate_angle(&a, &b, 0.05, &mut rng, &mut ledger, CostModel::Sampling).unwrap();
        assert!((est.value - std::f64::consts::FRAC_PI_2).abs() <= est.half_width + 0.05);
        assert!(est.half_width > 0.0);
    }

    #[test]
    fn angle_of_identical_pair_degenerates() {
        let s = StateVector::basis(4, 0).unwrap();
        let mut rng = RandomSource::new(23);
        let mut ledger = CostLedger::ZERO;
        let r = estimate_angle(&s, &s, 0.05, &mut rng, &mut ledger, CostModel::Sampling);
        assert!(matches!(r, Err(CoreError::DegenerateAngle { .. })));
    }

    #[test]
    fn angle_matches_section4_value_at_n16() {
        let (a, b) = section4_pair(16, 0);
        let mut rng = RandomSource::new(29);
        let mut ledger = CostLedger::ZERO;
        let est = estimate_angle(&a, &b, 0.05, &mut rng, &mut ledger, CostModel::Sampling).unwrap();
        let expected = (-7.0f64 / 8.0).acos();
        assert!((expected - 2.6362).abs() < 1e-3);
        assert!((est.value - expected).abs() <= est.half_width + 0.05);
    }

    #[test]
    fn angle_error_median_halves_with_epsilon() {
        let truth = 0.6f64.acos();
        let median_err = |eps: f64| {
            let mut errs: Vec<f64> = (0..100)
                .map(|seed| {
                    let mut rng = RandomSource::new(500 + seed);
                    let (a, b) = pair_with_overlap(16, 0.6, &mut rng);
                    let mut ledger = CostLedger::ZERO;
                    let est =
                        estimate_angle(&a, &b, eps, &mut rng, &mut ledger, CostModel::Sampling)
                            .unwrap();
                    (est.value - truth).abs()
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            (errs[49] + errs[50]) / 2.0
        };
        let coarse = median_err(0.2);
        let fine = median_err(0.1);
        let ratio = fine / coarse;
        assert!((0.25..=0.8).contains(&ratio), "median ratio {ratio}");
    }

    #[test]
    fn ledger_records_exact_sample_counts() {
        for &(eps, expected) in &[(0.1, 400u64), (0.05, 1600), (0.3, 45), (0.5, 16)] {
            assert_eq!(sample_count(eps), expected);
            let mut rng = RandomSource::new(31);
            let s = random_real_state(4, &mut rng).unwrap();
            let mut ledger = CostLedger::ZERO;
            let est = overlap_magnitude(&s, &s, eps, &mut rng, &mut ledger, CostModel::Sampling)
                .unwrap();
            assert_eq!(est.samples, expected);
            assert_eq!(ledger.estimator_samples, expected);
            assert_eq!(ledger.input_preps, 2 * expected);
        }
    }

    #[test]
    fn paper_cost_model_rescales_preparations_only() {
        let mut rng = RandomSource::new(37);
        let s = random_real_state(4, &mut rng).unwrap();
        let mut ledger = CostLedger::ZERO;
        overlap_magnitude(&s, &s, 0.1, &mut rng, &mut ledger, CostModel::Paper).unwrap();
        assert_eq!(ledger.estimator_samples, 400);
        assert_eq!(ledger.input_preps, 20);
    }

    #[test]
    fn epsilon_outside_unit_interval_is_rejected() {
        let s = StateVector::basis(2, 0).unwrap();
        let mut rng = RandomSource::new(41);
        let mut ledger = CostLedger::ZERO;
        for eps in [0.0, 1.0, -0.5, 2.0] {
            let r = overlap_magnitude(&s, &s, eps, &mut rng, &mut ledger, CostModel::Sampling);
            assert!(matches!(r, Err(CoreError::InvalidArgument(_))));
        }
    }
}
