//! Seeded randomness. Every stochastic routine in the crate takes a
//! `RandomSource` so that a run is a pure function of its seed.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::qcore::{StateVector, UnitaryOp};

/// A ChaCha8 stream pinned to a 64-bit seed.
///
/// Identical seeds reproduce identical sample streams on every platform,
/// which the CLI leans on for byte-identical output.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent stream for a labelled sub-task (bench cells,
    /// per-trial sources). The label is mixed into the seed so the derived
    /// stream does not depend on how much of the parent was consumed.
    pub fn derive(&self, label: u64) -> RandomSource {
        // SplitMix64 finalizer over (seed, label); cheap and collision-shy.
        let mut z = self.seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RandomSource::new(z ^ (z >> 31))
    }

    pub fn gen_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Standard normal via Box-Muller (keeps us off rand_distr for one use).
    pub fn gen_normal(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.gen();
            if u > 0.0 {
                let v: f64 = self.rng.gen();
                return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
            }
        }
    }

    pub fn gen_range(&mut self, upper: usize) -> usize {
        self.rng.gen_range(0..upper)
    }

    pub fn gen_bool(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Random real unit vector (Gaussian direction).
pub fn random_real_state(dim: usize, rng: &mut RandomSource) -> Result<StateVector> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen_normal()).collect();
    StateVector::from_real(&raw)
}

/// Random complex unit vector.
pub fn random_state(dim: usize, rng: &mut RandomSource) -> Result<StateVector> {
    let raw: Vec<Complex64> =
        (0..dim).map(|_| Complex64::new(rng.gen_normal(), rng.gen_normal())).collect();
    StateVector::new(Array1::from(raw))
}

/// Haar-like random unitary: QR of a complex Gaussian matrix via twice-run
/// modified Gram-Schmidt. Adequate orthogonality for the dimensions used
/// here (defect well under 1e-12 at dim 64).
pub fn random_unitary(dim: usize, rng: &mut RandomSource) -> Result<UnitaryOp> {
    let mut cols: Vec<Array1<Complex64>> = (0..dim)
        .map(|_| {
            Array1::from(
                (0..dim)
                    .map(|_| Complex64::new(rng.gen_normal(), rng.gen_normal()))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    for j in 0..dim {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: Complex64 =
                    cols[i].iter().zip(cols[j].iter()).map(|(a, b)| a.conj() * b).sum();
                let qi = cols[i].clone();
                cols[j].iter_mut().zip(qi.iter()).for_each(|(x, q)| *x -= proj * q);
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            // Astronomically unlikely for Gaussian input; restore a basis column.
            let mut e = Array1::zeros(dim);
            e[j] = Complex64::new(1.0, 0.0);
            cols[j] = e;
        } else {
            cols[j].mapv_inplace(|z| z / norm);
        }
    }
    let mut m = Array2::zeros((dim, dim));
    for (j, col) in cols.iter().enumerate() {
        m.column_mut(j).assign(col);
    }
    UnitaryOp::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_reproduce_identical_streams() {
        let mut a = RandomSource::new(42);
        let mut b = RandomSource::new(42);
        let xs: Vec<f64> = (0..32).map(|_| a.gen_f64()).collect();
        let ys: Vec<f64> = (0..32).map(|_| b.gen_f64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn derived_streams_do_not_depend_on_parent_consumption() {
        let mut a = RandomSource::new(7);
        let b = RandomSource::new(7);
        let _ = a.gen_f64();
        let mut da = a.derive(3);
        let mut db = b.derive(3);
        assert_eq!(da.gen_f64(), db.gen_f64());
    }

    #[test]
    fn distinct_labels_give_distinct_streams() {
        let src = RandomSource::new(7);
        let mut d0 = src.derive(0);
        let mut d1 = src.derive(1);
        assert_ne!(d0.next_u64(), d1.next_u64());
    }

    #[test]
    fn random_unitary_is_unitary_to_tolerance() {
        let mut rng = RandomSource::new(5);
        for &dim in &[1usize, 2, 3, 8, 33] {
            let u = random_unitary(dim, &mut rng).unwrap();
            assert!(u.unitarity_defect() < 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn random_states_are_normalized() {
        let mut rng = RandomSource::new(11);
        let s = random_state(17, &mut rng).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let r = random_real_state(9, &mut rng).unwrap();
        assert!(r.is_real(1e-14));
    }
}
