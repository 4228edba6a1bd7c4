//! QK1/QK2 angle-encoding feature maps and the fidelity kernel
//! κ(x, y) = |⟨φ(x)|φ(y)⟩|².
//!
//! Circuit layout for `layers = L`:
//!
//! ```text
//! |0…0⟩ ─ R(x) ─ R(x) ─ E ─ R(x) ─ E ─ … ─ R(x) ─ E
//!                └──── layer 1 ────┘  └─ layer 2 ─┘
//! ```
//!
//! `R(x)` is Ry(α_j·x_j) on every qubit j and `E` is the data-independent
//! CNOT entangler (nearest-neighbour chain for QK1, all pairs i < j for QK2,
//! control on the lower index, applied in ascending order). The extra leading
//! rotation layer makes a single-layer map the plain `E·R(x)` product with
//! doubled angles, whose entangler drops out of the fidelity; from two layers
//! on the entangler sits between data-dependent rotations and the two
//! families differ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{StateVector, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entanglement {
    /// QK1: CNOT(j, j+1) chain.
    #[serde(rename = "qk1")]
    Linear,
    /// QK2: CNOT(i, j) for every i < j.
    #[serde(rename = "qk2")]
    AllToAll,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub kind: Entanglement,
    pub n_qubits: usize,
    pub layers: usize,
    /// Radians per unit feature, one per qubit.
    pub angle_scales: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub rotations: usize,
    pub cnots: usize,
}

pub const DEFAULT_LAYERS: usize = 2;
/// Half-angle scale: the doubled leading rotation then keeps the encoding
/// injective over the scaled feature range [0, π].
pub const DEFAULT_ANGLE_SCALE: f64 = 0.5;

impl FeatureMapSpec {
    /// Unit angle scales; features are expected to arrive pre-scaled.
    pub fn new(kind: Entanglement, n_qubits: usize, layers: usize) -> Result<Self> {
        Self::with_angle_scales(kind, layers, vec![1.0; n_qubits])
    }

    pub fn with_angle_scales(
        kind: Entanglement,
        layers: usize,
        angle_scales: Vec<f64>,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            n_qubits: angle_scales.len(),
            layers,
            angle_scales,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "feature map width {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.angle_scales.len() != self.n_qubits {
            return Err(Error::invalid(format!(
                "{} angle scales for {} qubits",
                self.angle_scales.len(),
                self.n_qubits
            )));
        }
        if self.layers == 0 {
            return Err(Error::invalid("feature map needs at least one layer"));
        }
        if self.angle_scales.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("angle scales must be finite"));
        }
        Ok(())
    }

    /// (control, target) pairs of one entangler block, in application order.
    pub fn entangler_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        match self.kind {
            Entanglement::Linear => (0..n.saturating_sub(1)).map(|j| (j, j + 1)).collect(),
            Entanglement::AllToAll => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
        }
    }

    pub fn gate_counts(&self) -> GateCounts {
        GateCounts {
            rotations: (self.layers + 1) * self.n_qubits,
            cnots: self.layers * self.entangler_pairs().len(),
        }
    }

    fn angles(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_qubits {
            return Err(Error::invalid(format!(
                "feature vector of length {} for a {}-qubit map",
                x.len(),
                self.n_qubits
            )));
        }
        let angles: Vec<f64> = x
            .iter()
            .zip(&self.angle_scales)
            .map(|(xj, aj)| aj * xj)
            .collect();
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("non-finite rotation angle"));
        }
        Ok(angles)
    }

    /// |φ(x)⟩ = U(x)|0…0⟩.
    pub fn encode(&self, x: &[f64]) -> Result<StateVector> {
        self.validate()?;
        let angles = self.angles(x)?;
        let pairs = self.entangler_pairs();
        let mut state = StateVector::zero(self.n_qubits)?;
        let rotate = |state: &mut StateVector| -> Result<()> {
            for (q, &theta) in angles.iter().enumerate() {
                state.apply_ry(q, theta)?;
            }
            Ok(())
        };
        rotate(&mut state)?;
        for _ in 0..self.layers {
            rotate(&mut state)?;
            for &(c, t) in &pairs {
                state.apply_cnot(c, t)?;
            }
        }
        Ok(state)
    }

    /// Fidelity kernel between two raw feature vectors.
    pub fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let a = self.encode(x)?;
        let b = self.encode(y)?;
        fidelity(&a, &b)
    }
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.overlap(b)?.norm_sqr())
}
