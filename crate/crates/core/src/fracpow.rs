//! Fractional powers U^t of unitaries, three ways: analytic
//! eigendecomposition with a principal logarithm, idealized
//! phase-estimation quantization of the eigenphases, and integer-iterate
//! approximation for planar rotations.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::linalg::{self, principal_phase, C64};
use crate::qcore::{HermitianOp, StateVector, UnitaryOp};

/// Eigenphases closer than this to the branch cut at pi are ambiguous.
pub const BRANCH_TOL: f64 = 1e-10;
/// Below this sine the two states no longer span a rotation plane.
pub const COLLINEAR_TOL: f64 = 1e-10;

/// A unitary resolved into eigenphases on (-pi, pi] and eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    pub phases: Vec<f64>,
    pub vectors: Array2<C64>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// V diag(e^{i phase_j t}) V^dagger.
    pub fn power(&self, t: f64) -> Array2<C64> {
        let values: Vec<C64> =
            self.phases.iter().map(|&p| Complex64::from_polar(1.0, p * t)).collect();
        linalg::reconstruct_normal(&values, &self.vectors)
    }

    pub fn reconstruction_error(&self, u: &UnitaryOp) -> f64 {
        linalg::max_abs_diff(&self.power(1.0), u.matrix())
    }
}

/// A rotation acting on a two-dimensional real plane, leaving the
/// complement fixed.
#[derive(Debug, Clone)]
pub struct RotationSpec {
    /// Orthonormal real pair spanning the plane; the first axis is the
    /// state the rotation is measured from.
    pub plane: (StateVector, StateVector),
    /// Full rotation angle in (0, 2pi).
    pub angle: f64,
    /// Hermitian generator: evolving it for unit time applies the
    /// rotation by `angle`.
    pub generator: HermitianOp,
}

impl RotationSpec {
    /// Rotate a state by `t * angle` inside the plane, O(dim).
    pub fn apply_power(&self, v: &StateVector, t: f64) -> StateVector {
        let (e1, e2) = (&self.plane.0, &self.plane.1);
        let x1 = e1.inner(v).expect("plane and state dims agree");
        let x2 = e2.inner(v).expect("plane and state dims agree");
        let (sin, cos) = (self.angle * t).sin_cos();
        let d1 = x1 * (cos - 1.0) - x2 * sin;
        let d2 = x1 * sin + x2 * (cos - 1.0);
        let mut amps: Array1<C64> = v.amplitudes().clone();
        amps.iter_mut()
            .zip(e1.amplitudes().iter())
            .zip(e2.amplitudes().iter())
            .for_each(|((a, b1), b2)| *a += d1 * b1 + d2 * b2);
        StateVector::new(amps).expect("rotation preserves norm")
    }
}

fn branch_check(phases: &[f64]) -> Result<()> {
    for &phase in phases {
        if PI - phase.abs() <= BRANCH_TOL {
            return Err(CoreError::BranchAmbiguity { phase, tol: BRANCH_TOL });
        }
    }
    Ok(())
}

/// Eigendecompose a unitary with phases on the principal branch.
pub fn eig_unitary(u: &UnitaryOp) -> Result<EigenDecomp> {
    let (evals, vectors) = linalg::eig_normal(u.matrix())?;
    let phases = evals.iter().map(|&z| principal_phase(z)).collect();
    Ok(EigenDecomp { phases, vectors })
}

/// The Hermitian generator A with e^{-iA} = U and spectrum in (-pi, pi).
pub fn principal_log(u: &UnitaryOp) -> Result<HermitianOp> {
    let d = eig_unitary(u)?;
    branch_check(&d.phases)?;
    let values: Vec<C64> = d.phases.iter().map(|&p| Complex64::new(-p, 0.0)).collect();
    let m = linalg::reconstruct_normal(&values, &d.vectors);
    let sym = (&m + &linalg::adjoint(&m)).mapv(|z| z * 0.5);
    HermitianOp::new(sym)
}

/// Build the planar rotation taking `a` toward `b`: the generator of
/// reflect_about(b) * reflect_about(a), which rotates by 4 theta where
/// <a|b> = cos 2 theta.
pub fn rotation_generator(a: &StateVector, b: &StateVector) -> Result<RotationSpec> {
    for s in [a, b] {
        let max_imag = s.max_imag();
        if max_imag > 1e-10 {
            return Err(CoreError::NonRealState { max_imag });
        }
    }
    let cos2t = a.inner(b)?.re.clamp(-1.0, 1.0);
    let sin2t = (1.0 - cos2t * cos2t).max(0.0).sqrt();
    if sin2t <= COLLINEAR_TOL {
        return Err(CoreError::CollinearStates { sin_angle: sin2t });
    }
    let angle = 2.0 * cos2t.acos();
    let e2_raw = b.amplitudes() - &a.amplitudes().mapv(|z| z * cos2t);
    let e2 = StateVector::new(e2_raw)?;
    let n = a.dim();
    let mut gen: Array2<C64> = Array2::zeros((n, n));
    let scale = Complex64::new(0.0, -angle / sin2t);
    let (av, bv) = (a.amplitudes(), b.amplitudes());
    for i in 0..n {
        for j in 0..n {
            gen[(i, j)] = scale * (av[i] * bv[j].conj() - bv[i] * av[j].conj());
        }
    }
    Ok(RotationSpec { plane: (a.clone(), e2), angle, generator: HermitianOp::new(gen)? })
}

/// U^t through the eigendecomposition. The cost tag scales U's cost by
/// ceil(1/cost_eps), the paper-model charge for this route.
pub fn frac_power_eig(u: &UnitaryOp, t: f64, cost_eps: f64) -> Result<UnitaryOp> {
    if !(0.0..=1.0).contains(&t) {
        return Err(CoreError::InvalidArgument(format!("t must lie in [0, 1], got {t}")));
    }
    if cost_eps <= 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "cost epsilon must be positive, got {cost_eps}"
        )));
    }
    let d = eig_unitary(u)?;
    branch_check(&d.phases)?;
    let scale = (1.0 / cost_eps).ceil() as u64;
    Ok(UnitaryOp::new(d.power(t))?.with_cost(u.cost().scaled(scale)))
}

/// Quantize an angle to `bits` binary digits of a turn.
pub fn quantize_phase(phase: f64, bits: u32) -> f64 {
    let grid = f64::from(2u32.pow(bits));
    2.0 * PI * (phase * grid / (2.0 * PI)).round() / grid
}

/// U^t with each eigenphase first rounded to `bits` bits, the ideal
/// phase-estimation model. The cost tag scales U's cost by 2^bits
/// (controlled powers up to 2^bits).
pub fn frac_power_pe(u: &UnitaryOp, t: f64, bits: u32) -> Result<UnitaryOp> {
    if !(t > 0.0 && t < 1.0) {
        return Err(CoreError::InvalidArgument(format!("t must lie in (0, 1), got {t}")));
    }
    if !(1..=20).contains(&bits) {
        return Err(CoreError::InvalidArgument(format!("bits must lie in 1..=20, got {bits}")));
    }
    let d = eig_unitary(u)?;
    let quantized = EigenDecomp {
        phases: d.phases.iter().map(|&p| quantize_phase(p, bits)).collect(),
        vectors: d.vectors,
    };
    Ok(UnitaryOp::new(quantized.power(t))?.with_cost(u.cost().scaled(1 << bits)))
}

/// Distance between two angles on the circle, in [0, pi].
pub fn circular_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Approximate the fractional rotation R^t by an integer power R^k:
/// scan k = 1..=max_k for the first k whose total angle lands within
/// `tol` of the target t*angle on the circle; if none qualifies, report
/// the best k found. Applying R k times then matches R^t to state
/// fidelity >= cos^2(achieved_error), so infidelity at most tol^2.
pub fn frac_power_iterate(
    spec: &RotationSpec,
    t: f64,
    tol: f64,
    max_k: u64,
) -> Result<(u64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return Err(CoreError::InvalidArgument(format!("t must lie in (0, 1), got {t}")));
    }
    if tol <= 0.0 || max_k == 0 {
        return Err(CoreError::InvalidArgument(
            "tolerance must be positive and max_k at least 1".into(),
        ));
    }
    let target = t * spec.angle;
    let mut best = (1u64, f64::INFINITY);
    for k in 1..=max_k {
        let d = circular_distance(k as f64 * spec.angle, target);
        if d <= tol {
            return Ok((k, d));
        }
        if d < best.1 {
            best = (k, d);
        }
    }
    Err(CoreError::NoApproximation { best_k: best.0, best_error: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::CostLedger;
    use crate::linalg::{expm_reference, max_abs_diff, spectral_norm};
    use crate::qcore::reflect_about;
    use crate::random::{random_real_state, random_unitary, RandomSource};
    use crate::testutil::section4_pair;

    fn rotation2(angle: f64) -> UnitaryOp {
        let (s, c) = angle.sin_cos();
        let m = ndarray::array![
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]
        ];
        UnitaryOp::new(m).unwrap()
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn eig_of_identity_has_zero_phases() {
        let d = eig_unitary(&UnitaryOp::identity(4)).unwrap();
        assert!(d.phases.iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn eig_picks_principal_branch_for_minus_one() {
        let m = Array2::from_diag(&ndarray::arr1(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let d = eig_unitary(&UnitaryOp::new(m).unwrap()).unwrap();
        let phases = sorted(d.phases);
        assert!(phases[0].abs() < 1e-12);
        assert!((phases[1] - PI).abs() < 1e-12);
    }

    #[test]
    fn eig_of_search_reflection_product_gives_conjugate_phases() {
        let (a, b) = section4_pair(4, 0);
        let r = reflect_about(&b).compose(&reflect_about(&a)).unwrap();
        let d = eig_unitary(&r).unwrap();
        // <a|b> = -1/2, so 4 theta = 2 acos(-1/2) = 4pi/3, whose principal
        // representative is -2pi/3.
        let expected = 2.0 * PI / 3.0;
        let phases = sorted(d.phases.clone());
        assert!((phases[0] + expected).abs() < 1e-9);
        assert!(phases[1].abs() < 1e-9 && phases[2].abs() < 1e-9);
        assert!((phases[3] - expected).abs() < 1e-9);
        assert!(d.reconstruction_error(&r) < 1e-9);
    }

    #[test]
    fn principal_log_of_identity_is_zero() {
        let a = principal_log(&UnitaryOp::identity(3)).unwrap();
        assert!(a.matrix().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn principal_log_round_trips_through_exponential() {
        let mut rng = RandomSource::new(5);
        for &n in &[2usize, 5, 8] {
            // Hermitian generator with spectrum safely inside (-pi, pi).
            let mut m: Array2<C64> = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = Complex64::new(rng.gen_normal(), rng.gen_normal());
                }
            }
            let h = (m.clone() + linalg::adjoint(&m)).mapv(|z| z * 0.25);
            let (evals, _) = linalg::eigh(&h).unwrap();
            let spread = evals.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
            let a0 = h.mapv(|z| z * (2.5 / spread.max(1.0)));
            let u_mat = expm_reference(&a0.mapv(|z| z * Complex64::new(0.0, -1.0)));
            let u = UnitaryOp::new(u_mat).unwrap();
            let a = principal_log(&u).unwrap();
            assert!(max_abs_diff(a.matrix(), &a0) < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn principal_log_raises_on_branch_cut() {
        let m = Array2::from_diag(&ndarray::arr1(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let r = principal_log(&UnitaryOp::new(m).unwrap());
        assert!(matches!(r, Err(CoreError::BranchAmbiguity { .. })));
    }

    #[test]
    fn principal_log_of_search_rotation_has_two_conjugate_eigenvalues() {
        let (a, b) = section4_pair(4, 1);
        let r = reflect_about(&b).compose(&reflect_about(&a)).unwrap();
        let gen = principal_log(&r).unwrap();
        let evals = gen.eigenvalues().unwrap();
        let expected = 2.0 * PI / 3.0;
        let nonzero: Vec<f64> = evals.iter().copied().filter(|e| e.abs() > 1e-9).collect();
        assert_eq!(nonzero.len(), 2);
        assert!((nonzero[0] + expected).abs() < 1e-9);
        assert!((nonzero[1] - expected).abs() < 1e-9);
    }

    #[test]
    fn generator_unit_evolution_matches_reflection_product() {
        let mut rng = RandomSource::new(7);
        for _ in 0..10 {
            let a = random_real_state(6, &mut rng).unwrap();
            let b = random_real_state(6, &mut rng).unwrap();
            let spec = rotation_generator(&a, &b).unwrap();
            let evolved = spec.generator.evolve(1.0).unwrap();
            let refl = reflect_about(&b).compose(&reflect_about(&a)).unwrap();
            assert!(max_abs_diff(evolved.matrix(), refl.matrix()) < 1e-8);
        }
    }

    #[test]
    fn generator_evolution_reproduces_printed_rotation_formula() {
        let mut rng = RandomSource::new(11);
        let a = random_real_state(5, &mut rng).unwrap();
        let b = random_real_state(5, &mut rng).unwrap();
        let c = a.inner(&b).unwrap().re;
        let spec = rotation_generator(&a, &b).unwrap();
        let mut ledger = CostLedger::ZERO;
        let out = spec.generator.evolve(1.0).unwrap().apply(&a, &mut ledger).unwrap();
        // R_{4 theta} |a> = -|a> + 2 cos(2 theta) |b>
        let expected = StateVector::new(
            b.amplitudes().mapv(|z| z * 2.0 * c) - a.amplitudes(),
        )
        .unwrap();
        assert!(out.fidelity(&expected).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn quarter_evolution_lands_on_frame_bisector_side() {
        let mut rng = RandomSource::new(13);
        let a = random_real_state(8, &mut rng).unwrap();
        let b = random_real_state(8, &mut rng).unwrap();
        let spec = rotation_generator(&a, &b).unwrap();
        let mut ledger = CostLedger::ZERO;
        let out = spec.generator.evolve(0.25).unwrap().apply(&a, &mut ledger).unwrap();
        let theta = spec.angle / 4.0;
        let expected = StateVector::new(
            spec.plane.0.amplitudes().mapv(|z| z * theta.cos())
                + spec.plane.1.amplitudes().mapv(|z| z * theta.sin()),
        )
        .unwrap();
        assert!(out.fidelity(&expected).unwrap() > 1.0 - 1e-10);
        assert!(out.fidelity(&spec.apply_power(&a, 0.25)).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn orthogonal_pair_generates_half_turn() {
        // <a|b> = 0 means 2 theta = pi/2: the product of reflections is a
        // rotation by pi, sending a to -a, with generator eigenvalues
        // {0, ..., -pi-ish, +pi-ish} just inside the branch.
        let a = StateVector::basis(4, 0).unwrap();
        let b = StateVector::basis(4, 1).unwrap();
        let spec = rotation_generator(&a, &b).unwrap();
        assert!((spec.angle - PI).abs() < 1e-12);
        let mut ledger = CostLedger::ZERO;
        let out = spec.generator.evolve(1.0).unwrap().apply(&a, &mut ledger).unwrap();
        let ip = a.inner(&out).unwrap();
        assert!((ip.re + 1.0).abs() < 1e-10);
        let evals = spec.generator.eigenvalues().unwrap();
        let extremes = sorted(evals);
        assert!((extremes[0] + PI).abs() < 1e-9);
        assert!((extremes[extremes.len() - 1] - PI).abs() < 1e-9);
    }

    #[test]
    fn generator_fixes_plane_complement() {
        let mut rng = RandomSource::new(17);
        let a = random_real_state(6, &mut rng).unwrap();
        let b = random_real_state(6, &mut rng).unwrap();
        let spec = rotation_generator(&a, &b).unwrap();
        // Project a random vector off the plane.
        let mut raw = random_real_state(6, &mut rng).unwrap().amplitudes().clone();
        for basis in [&spec.plane.0, &spec.plane.1] {
            let ov: C64 =
                basis.amplitudes().iter().zip(raw.iter()).map(|(x, y)| x.conj() * y).sum();
            raw.iter_mut()
                .zip(basis.amplitudes().iter())
                .for_each(|(y, x)| *y -= ov * x);
        }
        let v = StateVector::new(raw).unwrap();
        let mut ledger = CostLedger::ZERO;
        for t in [0.3, 1.0] {
            let out = spec.generator.evolve(t).unwrap().apply(&v, &mut ledger).unwrap();
            assert!(out.fidelity(&v).unwrap() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn collinear_states_are_rejected() {
        let a = StateVector::basis(4, 0).unwrap();
        assert!(matches!(
            rotation_generator(&a, &a),
            Err(CoreError::CollinearStates { .. })
        ));
        assert!(matches!(
            rotation_generator(&a, &a.negated()),
            Err(CoreError::CollinearStates { .. })
        ));
    }

    #[test]
    fn eig_power_endpoints_reproduce_input_and_identity() {
        let mut rng = RandomSource::new(19);
        let u = random_unitary(6, &mut rng).unwrap();
        let back = frac_power_eig(&u, 1.0, 0.1).unwrap();
        assert!(max_abs_diff(back.matrix(), u.matrix()) < 1e-9);
        let id = frac_power_eig(&u, 0.0, 0.1).unwrap();
        let eye: Array2<C64> = Array2::eye(6);
        assert!(max_abs_diff(id.matrix(), &eye) < 1e-9);
    }

    #[test]
    fn eig_power_of_quarter_turn_is_eighth_turn() {
        let u = rotation2(PI / 2.0);
        let out = frac_power_eig(&u, 0.25, 0.1).unwrap();
        assert!(max_abs_diff(out.matrix(), rotation2(PI / 8.0).matrix()) < 1e-10);
    }

    #[test]
    fn eig_power_composes_additively() {
        let mut rng = RandomSource::new(23);
        let u = random_unitary(5, &mut rng).unwrap();
        let p1 = frac_power_eig(&u, 0.3, 0.1).unwrap();
        let p2 = frac_power_eig(&u, 0.45, 0.1).unwrap();
        let sum = frac_power_eig(&u, 0.75, 0.1).unwrap();
        assert!(max_abs_diff(p1.compose(&p2).unwrap().matrix(), sum.matrix()) < 1e-7);
    }

    #[test]
    fn eig_root_powers_back_to_original() {
        let mut rng = RandomSource::new(29);
        let u = random_unitary(6, &mut rng).unwrap();
        for m in [2usize, 3, 4, 8] {
            let root = frac_power_eig(&u, 1.0 / m as f64, 0.1).unwrap();
            let mut acc = UnitaryOp::identity(6);
            for _ in 0..m {
                acc = root.compose(&acc).unwrap();
            }
            assert!(
                max_abs_diff(acc.matrix(), u.matrix()) < m as f64 * 1e-8,
                "m = {m}"
            );
        }
    }

    #[test]
    fn eig_power_scales_cost_by_inverse_epsilon() {
        let mut rng = RandomSource::new(31);
        let u = random_unitary(3, &mut rng)
            .unwrap()
            .with_cost(CostLedger::oracle(1));
        let out = frac_power_eig(&u, 0.5, 0.01).unwrap();
        assert_eq!(out.cost().oracle_queries, 100);
    }

    #[test]
    fn pe_is_exact_on_dyadic_phases() {
        let u = rotation2(2.0 * PI * 3.0 / 16.0);
        let exact = frac_power_eig(&u, 0.25, 0.1).unwrap();
        let quant = frac_power_pe(&u, 0.25, 4).unwrap();
        assert!(max_abs_diff(exact.matrix(), quant.matrix()) < 1e-10);
    }

    #[test]
    fn pe_error_respects_quantization_bound() {
        let u = rotation2(1.0);
        let t = 0.25;
        let bits = 8;
        let exact = frac_power_eig(&u, t, 0.1).unwrap();
        let quant = frac_power_pe(&u, t, bits).unwrap();
        let dist = spectral_norm(&(exact.matrix() - quant.matrix()));
        assert!(dist <= 2.0 * PI * t / f64::from(1 << bits) + 1e-9);
        assert!(dist > 0.0);
    }

    #[test]
    fn pe_error_is_monotone_in_bits() {
        let mut rng = RandomSource::new(37);
        for _ in 0..5 {
            let u = random_unitary(8, &mut rng).unwrap();
            let exact = frac_power_eig(&u, 0.3, 0.1).unwrap();
            let mut last = f64::INFINITY;
            for bits in [4u32, 6, 8, 10] {
                let quant = frac_power_pe(&u, 0.3, bits).unwrap();
                let dist = spectral_norm(&(exact.matrix() - quant.matrix()));
                assert!(dist <= last + 1e-12, "bits {bits}: {dist} > {last}");
                last = dist;
            }
        }
    }

    #[test]
    fn pe_cost_scales_with_two_to_bits() {
        let mut rng = RandomSource::new(41);
        let u = random_unitary(3, &mut rng)
            .unwrap()
            .with_cost(CostLedger::preps(1));
        assert_eq!(frac_power_pe(&u, 0.5, 6).unwrap().cost().input_preps, 64);
    }

    #[test]
    fn iterate_scan_is_optimal_for_commensurate_angle() {
        let mut rng = RandomSource::new(43);
        let a = random_real_state(4, &mut rng).unwrap();
        let b = random_real_state(4, &mut rng).unwrap();
        let mut spec = rotation_generator(&a, &b).unwrap();
        spec.angle = 2.0 * PI / 5.0;
        let t = 0.25;
        // Brute-force argmin over the same range is the oracle.
        let brute = (1..=20u64)
            .map(|k| (k, circular_distance(k as f64 * spec.angle, t * spec.angle)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        let (k, err) = frac_power_iterate(&spec, t, 1e-9, 20)
            .or_else(|e| match e {
                CoreError::NoApproximation { best_k, best_error } => Ok((best_k, best_error)),
                other => Err(other),
            })
            .unwrap();
        assert_eq!(k, brute.0);
        assert!((err - brute.1).abs() < 1e-12);
    }

    #[test]
    fn iterate_scan_is_optimal_for_quarter_turn() {
        let a = StateVector::basis(4, 0).unwrap();
        let b = StateVector::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let mut spec = rotation_generator(&a, &b).unwrap();
        spec.angle = PI / 2.0;
        let t = 0.25;
        let brute = (1..=100u64)
            .map(|k| (k, circular_distance(k as f64 * spec.angle, t * spec.angle)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        match frac_power_iterate(&spec, t, 1e-9, 100) {
            Ok((k, err)) => {
                assert_eq!(k, brute.0);
                assert!((err - brute.1).abs() < 1e-12);
            }
            Err(CoreError::NoApproximation { best_k, best_error }) => {
                assert_eq!(best_k, brute.0);
                assert!((best_error - brute.1).abs() < 1e-12);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn iterate_early_stops_at_first_hit() {
        let a = StateVector::basis(3, 0).unwrap();
        let b = StateVector::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let mut spec = rotation_generator(&a, &b).unwrap();
        spec.angle = 2.0 * PI / 8.0;
        // Target pi/16; the first eight multiples of pi/4 stay further than
        // 0.3 from it until k = 8 wraps to zero, pi/16 away.
        let tol = 0.3;
        let (k, err) = frac_power_iterate(&spec, 0.25, tol, 64).unwrap();
        assert_eq!(k, 8);
        for earlier in 1..k {
            assert!(circular_distance(earlier as f64 * spec.angle, 0.25 * spec.angle) > tol);
        }
        assert!(err <= tol);
    }

    #[test]
    fn iterate_reports_best_k_when_tolerance_unreachable() {
        let a = StateVector::basis(3, 0).unwrap();
        let b = StateVector::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let mut spec = rotation_generator(&a, &b).unwrap();
        spec.angle = 2.0; // irrational fraction of a turn
        match frac_power_iterate(&spec, 0.25, 1e-12, 50) {
            Err(CoreError::NoApproximation { best_k, best_error }) => {
                assert!(best_k >= 1 && best_k <= 50);
                assert!(best_error > 1e-12);
            }
            other => panic!("expected NoApproximation, got {other:?}"),
        }
    }

    #[test]
    fn iterate_fidelity_bound_holds_on_search_geometry() {
        let n = 256;
        let (a, b) = section4_pair(n, 0);
        let spec = rotation_generator(&a, &b.negated()).unwrap();
        let tol = 2.0 / (n as f64).sqrt();
        let max_k = (4.0 * (n as f64).sqrt()).ceil() as u64;
        let (k, err) = frac_power_iterate(&spec, 0.25, tol, max_k).unwrap();
        let target = spec.apply_power(&a, 0.25);
        let iterated = spec.apply_power(&a, k as f64);
        let fid = iterated.fidelity(&target).unwrap();
        // both states lie in the rotation plane, so the overlap is exactly cos(err)
        assert!((fid - err.cos().powi(2)).abs() <= 1e-9);
        assert!(fid >= 1.0 - tol * tol);
        assert!(k as f64 <= 4.0 * (n as f64).sqrt());
    }
}
