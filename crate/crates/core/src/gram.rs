//! Kernel selection and Gram matrix assembly.
//!
//! Quantum Gram matrices encode every sample once and then take pairwise
//! overlaps, so the cost is N state preparations plus N² inner products.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::RbfSpec;
use crate::error::{Error, Result};
use crate::featuremap::{
    fidelity, Entanglement, FeatureMapSpec, DEFAULT_ANGLE_SCALE, DEFAULT_LAYERS,
};
use crate::statevector::StateVector;

/// The three kernels compared by the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Qk1,
    Qk2,
    Rbf,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Qk1, KernelKind::Qk2, KernelKind::Rbf];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Qk1 => "qk1",
            KernelKind::Qk2 => "qk2",
            KernelKind::Rbf => "rbf",
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qk1" => Ok(KernelKind::Qk1),
            "qk2" => Ok(KernelKind::Qk2),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(Error::invalid(format!("unknown kernel {other:?}"))),
        }
    }
}

/// How the RBF bandwidth is chosen for a given feature count.
///
/// Serialised as the string `"auto"` or a bare number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GammaRepr", into = "GammaRepr")]
pub enum GammaRule {
    /// γ = 1/d.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GammaRepr {
    Name(String),
    Value(f64),
}

impl TryFrom<GammaRepr> for GammaRule {
    type Error = String;

    fn try_from(r: GammaRepr) -> std::result::Result<Self, String> {
        match r {
            GammaRepr::Name(s) if s == "auto" => Ok(GammaRule::Auto),
            GammaRepr::Name(s) => Err(format!("gamma must be \"auto\" or a number, got {s:?}")),
            GammaRepr::Value(v) => Ok(GammaRule::Fixed(v)),
        }
    }
}

impl From<GammaRule> for GammaRepr {
    fn from(g: GammaRule) -> Self {
        match g {
            GammaRule::Auto => GammaRepr::Name("auto".into()),
            GammaRule::Fixed(v) => GammaRepr::Value(v),
        }
    }
}

impl std::str::FromStr for GammaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(GammaRule::Auto);
        }
        s.parse()
            .map(GammaRule::Fixed)
            .map_err(|_| Error::invalid(format!("gamma must be \"auto\" or a number, got {s:?}")))
    }
}

impl GammaRule {
    pub fn resolve(self, d: usize) -> Result<RbfSpec> {
        match self {
            GammaRule::Auto => RbfSpec::for_dimension(d),
            GammaRule::Fixed(g) => RbfSpec::new(g),
        }
    }
}

/// A fully specified kernel function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Quantum(FeatureMapSpec),
    Rbf(RbfSpec),
}

/// Hyperparameters shared by every kernel family; each kernel reads the
/// fields that apply to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub layers: usize,
    /// Uniform α_j for the quantum feature maps.
    pub angle_scale: f64,
    pub gamma: GammaRule,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            layers: DEFAULT_LAYERS,
            angle_scale: DEFAULT_ANGLE_SCALE,
            gamma: GammaRule::Auto,
        }
    }
}

impl Kernel {
    pub fn build(kind: KernelKind, d: usize, params: &KernelParams) -> Result<Self> {
        let quantum = |e| {
            FeatureMapSpec::with_angle_scales(e, params.layers, vec![params.angle_scale; d])
                .map(Kernel::Quantum)
        };
        match kind {
            KernelKind::Qk1 => quantum(Entanglement::Linear),
            KernelKind::Qk2 => quantum(Entanglement::AllToAll),
            KernelKind::Rbf => Ok(Kernel::Rbf(params.gamma.resolve(d)?)),
        }
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            Kernel::Quantum(spec) => match spec.kind {
                Entanglement::Linear => KernelKind::Qk1,
                Entanglement::AllToAll => KernelKind::Qk2,
            },
            Kernel::Rbf(_) => KernelKind::Rbf,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            Kernel::Quantum(spec) => spec.kernel(x, y),
            Kernel::Rbf(spec) => spec.kernel(x, y),
        }
    }

    /// Square Gram matrix K_ij = k(x_i, x_j).
    pub fn gram(&self, xs: &[Vec<f64>]) -> Result<GramMatrix> {
        let rows = self.cross(xs, xs)?;
        let n = xs.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                // mirror the upper triangle so the matrix is exactly symmetric
                entries.push(if j < i { rows[j][i] } else { v });
            }
        }
        GramMatrix::new(n, entries)
    }

    /// One row per query point: `rows[q][i] = k(train_i, query_q)`.
    pub fn cross(&self, train: &[Vec<f64>], queries: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        match self {
            Kernel::Quantum(spec) => {
                let train_states = encode_all(spec, train)?;
                let query_states = encode_all(spec, queries)?;
                query_states
                    .par_iter()
                    .map(|q| train_states.iter().map(|t| fidelity(t, q)).collect())
                    .collect()
            }
            Kernel::Rbf(spec) => queries
                .par_iter()
                .map(|q| train.iter().map(|t| spec.kernel(t, q)).collect())
                .collect(),
        }
    }
}

fn encode_all(spec: &FeatureMapSpec, xs: &[Vec<f64>]) -> Result<Vec<StateVector>> {
    xs.par_iter().map(|x| spec.encode(x)).collect()
}

/// Symmetric kernel matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

impl GramMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("empty gram matrix"));
        }
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "{} entries for a {n}x{n} gram matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("gram matrix has non-finite entries"));
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(format!(
                        "gram matrix asymmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("gram rows are not square"));
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_dmatrix().symmetric_eigen().eigenvalues.min()
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }
}
