//! The benchmark tensors used throughout the experiments, plus file and
//! matrix inputs. Formulas use 1-based indices.

use std::fmt;
use std::path::PathBuf;

use super::{dense_len, load_tensor_capped, SymmetricTensor, DEFAULT_MAX_ENTRIES};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Canonical (non-decreasing, 1-based) entries of P2.
const P2_ENTRIES: [([usize; 4], f64); 15] = [
    ([1, 1, 1, 1], 0.2883),
    ([1, 1, 1, 2], 0.0031),
    ([1, 1, 1, 3], 0.1973),
    ([1, 1, 2, 2], 0.2485),
    ([1, 1, 2, 3], 0.2939),
    ([1, 1, 3, 3], 0.3847),
    ([1, 2, 2, 2], 0.2972),
    ([1, 2, 2, 3], 0.1862),
    ([1, 2, 3, 3], 0.0919),
    ([1, 3, 3, 3], 0.3619),
    ([2, 2, 2, 2], 0.1241),
    ([2, 2, 2, 3], 0.3420),
    ([2, 2, 3, 3], 0.2127),
    ([2, 3, 3, 3], 0.2727),
    ([3, 3, 3, 3], 0.3054),
];

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemId {
    /// Order 4, dimension 2, irreducible nonnegative.
    P1,
    /// Order 4, dimension 3, nonnegative with fifteen listed orbit values.
    P2,
    /// Order 3: `sum_k (-1)^{i_k} / i_k`.
    P3,
    /// Order 4: `sum_k tan(i_k)`.
    P4,
    /// Order 5: `sum_k (-1)^{i_k} ln(i_k)`.
    P5,
    File(PathBuf),
    Matrix(DenseMatrix),
}

/// Which tensor to build. `dim` is required for P3–P5 and optional for the
/// rest, where it must agree with the fixed size when given.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub dim: Option<usize>,
}

impl ProblemSpec {
    pub fn new(id: ProblemId, dim: Option<usize>) -> Self {
        Self { id, dim }
    }

    pub fn p1() -> Self {
        Self::new(ProblemId::P1, Some(2))
    }

    pub fn p2() -> Self {
        Self::new(ProblemId::P2, Some(3))
    }

    pub fn p3(dim: usize) -> Self {
        Self::new(ProblemId::P3, Some(dim))
    }

    pub fn p4(dim: usize) -> Self {
        Self::new(ProblemId::P4, Some(dim))
    }

    pub fn p5(dim: usize) -> Self {
        Self::new(ProblemId::P5, Some(dim))
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        Self::new(ProblemId::File(path.into()), None)
    }

    pub fn matrix(a: DenseMatrix) -> Self {
        let n = a.rows();
        Self::new(ProblemId::Matrix(a), Some(n))
    }

    /// Tensor order implied by the problem, when it is fixed.
    pub fn order(&self) -> Option<usize> {
        match self.id {
            ProblemId::P1 | ProblemId::P2 | ProblemId::P4 => Some(4),
            ProblemId::P3 => Some(3),
            ProblemId::P5 => Some(5),
            ProblemId::Matrix(_) => Some(2),
            ProblemId::File(_) => None,
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            ProblemId::P1 => write!(f, "P1"),
            ProblemId::P2 => write!(f, "P2"),
            ProblemId::P3 => write!(f, "P3"),
            ProblemId::P4 => write!(f, "P4"),
            ProblemId::P5 => write!(f, "P5"),
            ProblemId::File(p) => write!(f, "{}", p.display()),
            ProblemId::Matrix(_) => write!(f, "matrix"),
        }
    }
}

pub fn make_problem(spec: &ProblemSpec) -> Result<SymmetricTensor> {
    make_problem_capped(spec, DEFAULT_MAX_ENTRIES)
}

pub fn make_problem_capped(spec: &ProblemSpec, cap: usize) -> Result<SymmetricTensor> {
    let fixed = |name: &str, n: usize| match spec.dim {
        Some(d) if d != n => Err(Error::InvalidProblem(format!(
            "{name} has fixed dimension {n}, requested {d}"
        ))),
        _ => Ok(n),
    };
    let required = |name: &str| {
        spec.dim
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::InvalidProblem(format!("{name} needs a dimension >= 1")))
    };

    match &spec.id {
        ProblemId::P1 => {
            let n = fixed("P1", 2)?;
            let diag = 4.0 / 3f64.sqrt();
            SymmetricTensor::from_fn_capped(4, n, cap, |t| match t {
                [0, 0, 0, 0] | [1, 1, 1, 1] => diag,
                [0, 0, 0, 1] | [0, 1, 1, 1] => 1.0,
                _ => 0.0,
            })
        }
        ProblemId::P2 => {
            let n = fixed("P2", 3)?;
            SymmetricTensor::from_fn_capped(4, n, cap, |t| {
                P2_ENTRIES
                    .iter()
                    .find(|(idx, _)| idx.iter().zip(t).all(|(a, b)| *a == b + 1))
                    .map_or(0.0, |&(_, v)| v)
            })
        }
        ProblemId::P3 => {
            let n = required("P3")?;
            let term = |i: usize| {
                let k = i + 1;
                let v = 1.0 / k as f64;
                if k.is_multiple_of(2) {
                    v
                } else {
                    -v
                }
            };
            SymmetricTensor::from_fn_capped(3, n, cap, |t| t.iter().map(|&i| term(i)).sum())
        }
        ProblemId::P4 => {
            let n = required("P4")?;
            SymmetricTensor::from_fn_capped(4, n, cap, |t| {
                t.iter().map(|&i| ((i + 1) as f64).tan()).sum()
            })
        }
        ProblemId::P5 => {
            let n = required("P5")?;
            let term = |i: usize| {
                let k = i + 1;
                let v = (k as f64).ln();
                if k.is_multiple_of(2) {
                    v
                } else {
                    -v
                }
            };
            SymmetricTensor::from_fn_capped(5, n, cap, |t| t.iter().map(|&i| term(i)).sum())
        }
        ProblemId::File(path) => {
            let t = load_tensor_capped(path, cap)?;
            match spec.dim {
                Some(d) if d != t.dim() => Err(Error::InvalidProblem(format!(
                    "{} has dimension {}, requested {d}",
                    path.display(),
                    t.dim()
                ))),
                _ => Ok(t),
            }
        }
        ProblemId::Matrix(a) => {
            dense_len(2, a.rows(), cap)?;
            SymmetricTensor::from_matrix(a)
        }
    }
}
