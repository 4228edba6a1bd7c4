//! Pure-state simulator restricted to the gates the feature maps use.
//!
//! Qubit `q` is bit `q` of the amplitude index, so qubit 0 is the least
//! significant bit. Gates act in place on strided amplitude pairs and never
//! materialise a 2ⁿ×2ⁿ matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two within the
    /// qubit cap; normalisation is the caller's business.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Σ|a_k|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]] to `qubit`.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        if !theta.is_finite() {
            return Err(Error::invalid(format!(
                "rotation angle {theta} is not finite"
            )));
        }
        let (s, c) = (0.5 * theta).sin_cos();
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = x0 * c - x1 * s;
                *a1 = x0 * s + x1 * c;
            }
        }
        Ok(())
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid(format!(
                "cnot control and target are both qubit {control}"
            )));
        }
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            // visit each swapped pair once, from its target-bit-clear member
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
        Ok(())
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::invalid(format!(
                "overlap of {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::invalid(format!(
                "qubit {qubit} out of range for a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const TOL: f64 = 1e-10;

    fn ry_matrix(theta: f64) -> DMatrix<f64> {
        let (s, c) = (0.5 * theta).sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    }

    // Full-register operator for a single-qubit gate; qubit 0 is the rightmost
    // Kronecker factor so it maps to the least significant index bit.
    fn lift(n: usize, qubit: usize, gate: &DMatrix<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::identity(1, 1);
        for q in (0..n).rev() {
            let factor = if q == qubit {
                gate.clone()
            } else {
                DMatrix::identity(2, 2)
            };
            m = m.kronecker(&factor);
        }
        m
    }

    // CNOT from projectors: |0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t.
    fn cnot_matrix(n: usize, control: usize, target: usize) -> DMatrix<f64> {
        let p0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let mut a = DMatrix::<f64>::identity(1, 1);
        let mut b = DMatrix::<f64>::identity(1, 1);
        for q in (0..n).rev() {
            let (fa, fb) = if q == control {
                (p0.clone(), p1.clone())
            } else if q == target {
                (DMatrix::identity(2, 2), x.clone())
            } else {
                (DMatrix::identity(2, 2), DMatrix::identity(2, 2))
            };
            a = a.kronecker(&fa);
            b = b.kronecker(&fb);
        }
        a + b
    }

    fn re(state: &StateVector) -> Vec<f64> {
        state.amplitudes().iter().map(|a| a.re).collect()
    }

    #[test]
    fn zero_state_layout() {
        assert_eq!(re(&StateVector::zero(2).unwrap()), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(re(&StateVector::zero(1).unwrap()), vec![1.0, 0.0]);
        let ten = StateVector::zero(10).unwrap();
        assert_eq!(ten.dim(), 1024);
        assert_eq!(ten.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(ten.amplitudes()[1..].iter().all(|a| a.norm_sqr() == 0.0));
    }

    #[test]
    fn qubit_count_bounds() {
        assert!(matches!(
            StateVector::zero(0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            StateVector::zero(13),
            Err(Error::InvalidArgument(_))
        ));
        assert!(StateVector::zero(12).is_ok());
    }

    #[test]
    fn ry_examples() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(0, PI).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.0, epsilon = TOL);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = TOL);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(0, 0.0).unwrap();
        assert_eq!(s, StateVector::zero(1).unwrap());

        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(0, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_PI_4.cos(), epsilon = TOL);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_PI_4.sin(), epsilon = TOL);

        assert!(s.apply_ry(1, 0.3).is_err());
    }

    #[test]
    fn ry_on_qubit_zero_only_touches_low_bit() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_ry(0, 1.1).unwrap();
        let a = s.amplitudes();
        assert!(a[0].norm() > 0.0 && a[1].norm() > 0.0);
        assert_eq!(a[2].norm(), 0.0);
        assert_eq!(a[3].norm(), 0.0);
    }

    #[test]
    fn cnot_examples() {
        // |q1 q0⟩ = |01⟩ is index 1; control 0 set flips qubit 1 → |11⟩ = index 3
        let mut s = StateVector::zero(2).unwrap();
        s.apply_ry(0, PI).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[3].re, 1.0, epsilon = TOL);

        let mut s = StateVector::zero(3).unwrap();
        s.apply_cnot(2, 0).unwrap();
        assert_eq!(s, StateVector::zero(3).unwrap());

        assert!(s.apply_cnot(1, 1).is_err());
        assert!(s.apply_cnot(0, 3).is_err());
    }

    #[test]
    fn cnot_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = StateVector::zero(4).unwrap();
        for q in 0..4 {
            s.apply_ry(q, rng.gen_range(-PI..PI)).unwrap();
        }
        let before = s.clone();
        s.apply_cnot(3, 1).unwrap();
        s.apply_cnot(3, 1).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn overlap_examples() {
        let zero = StateVector::zero(1).unwrap();
        let mut one = zero.clone();
        one.apply_ry(0, PI).unwrap();
        assert_abs_diff_eq!(zero.overlap(&one).unwrap().norm(), 0.0, epsilon = TOL);
        assert_abs_diff_eq!(one.overlap(&one).unwrap().re, 1.0, epsilon = TOL);

        let mut half = zero.clone();
        half.apply_ry(0, FRAC_PI_2).unwrap();
        let o = half.overlap(&zero).unwrap();
        assert_abs_diff_eq!(o.re, FRAC_PI_4.cos(), epsilon = TOL);
        assert_abs_diff_eq!(o.im, 0.0, epsilon = TOL);

        assert!(zero.overlap(&StateVector::zero(2).unwrap()).is_err());
    }

    #[test]
    fn from_amplitudes_rejects_bad_lengths() {
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 1]).is_err());
        let s = StateVector::from_amplitudes(vec![Complex64::new(0.5, 0.0); 4]).unwrap();
        assert_eq!(s.n_qubits(), 2);
    }

    #[test]
    fn norm_preserved_under_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=6);
            let mut s = StateVector::zero(n).unwrap();
            for _ in 0..30 {
                if n > 1 && rng.gen_bool(0.4) {
                    let c = rng.gen_range(0..n);
                    let t = (c + rng.gen_range(1..n)) % n;
                    s.apply_cnot(c, t).unwrap();
                } else {
                    s.apply_ry(rng.gen_range(0..n), rng.gen_range(-10.0..10.0))
                        .unwrap();
                }
            }
            assert!((s.norm_sqr() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn ry_inverse_restores_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = StateVector::zero(3).unwrap();
        for q in 0..3 {
            s.apply_ry(q, rng.gen_range(-PI..PI)).unwrap();
        }
        s.apply_cnot(0, 2).unwrap();
        let before = s.clone();
        s.apply_ry(1, 0.77).unwrap();
        s.apply_ry(1, -0.77).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < TOL);
        }
    }

    #[test]
    fn gates_match_dense_kronecker_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let mut s = StateVector::zero(n).unwrap();
            let mut v = DMatrix::<f64>::zeros(1 << n, 1);
            v[0] = 1.0;
            for _ in 0..12 {
                if n > 1 && rng.gen_bool(0.5) {
                    let c = rng.gen_range(0..n);
                    let t = (c + rng.gen_range(1..n)) % n;
                    s.apply_cnot(c, t).unwrap();
                    v = cnot_matrix(n, c, t) * v;
                } else {
                    let q = rng.gen_range(0..n);
                    let theta = rng.gen_range(-PI..PI);
                    s.apply_ry(q, theta).unwrap();
                    v = lift(n, q, &ry_matrix(theta)) * v;
                }
            }
            for (k, a) in s.amplitudes().iter().enumerate() {
                assert!((a.re - v[k]).abs() < TOL && a.im.abs() < TOL);
            }
        }
    }
}
