//! Dense fourth-order tensors over a `T`-dimensional index space.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A dense `T×T×T×T` tensor, row-major over `(a, b, c, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

/// The 24 permutations of four indices.
const PERMUTATIONS: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    pub fn from_vec(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim.pow(4) {
            return Err(Error::DimensionMismatch {
                what: "tensor data",
                expected: dim.pow(4),
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim.pow(4));
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        data.push(f(a, b, c, d));
                    }
                }
            }
        }
        Self { dim, data }
    }

    /// `(A ⊗ B)_abcd = A_ab B_cd`.
    pub fn outer_product(a: &Matrix, b: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n || b.rows() != n || b.cols() != n {
            return Err(Error::DimensionMismatch {
                what: "outer product operands",
                expected: n,
                got: b.rows(),
            });
        }
        Ok(Self::from_fn(n, |i, j, k, l| a[(i, j)] * b[(k, l)]))
    }

    /// `u ⊗ u ⊗ u ⊗ u`.
    pub fn rank_one(u: &[f64]) -> Self {
        Self::from_fn(u.len(), |a, b, c, d| u[a] * u[b] * u[c] * u[d])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.offset(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, value: f64) {
        let o = self.offset(a, b, c, d);
        self.data[o] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &Tensor4) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                what: "tensor subtraction",
                expected: self.dim,
                got: other.dim,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            dim: self.dim,
            data,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// `u^a u^b u^c u^d T_abcd`, contracted one index at a time.
    pub fn quartic_form(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        let n = self.dim;
        let mut total = 0.0;
        for a in 0..n {
            if u[a] == 0.0 {
                continue;
            }
            let mut sa = 0.0;
            for b in 0..n {
                if u[b] == 0.0 {
                    continue;
                }
                let mut sb = 0.0;
                for c in 0..n {
                    let base = self.offset(a, b, c, 0);
                    let row = &self.data[base..base + n];
                    sb += u[c] * row.iter().zip(u).map(|(t, x)| t * x).sum::<f64>();
                }
                sa += u[b] * sb;
            }
            total += u[a] * sa;
        }
        total
    }

    /// `(T u³)_a = T_abcd u^b u^c u^d`.
    pub fn contract3(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|a| {
                let mut s = 0.0;
                for b in 0..n {
                    for c in 0..n {
                        let base = self.offset(a, b, c, 0);
                        let row = &self.data[base..base + n];
                        s += u[b] * u[c] * row.iter().zip(u).map(|(t, x)| t * x).sum::<f64>();
                    }
                }
                s
            })
            .collect()
    }

    /// `(T u²)_ab = T_abcd u^c u^d`.
    pub fn contract2(&self, u: &[f64]) -> Matrix {
        let n = self.dim;
        Matrix::from_fn(n, n, |a, b| {
            let mut s = 0.0;
            for c in 0..n {
                let base = self.offset(a, b, c, 0);
                let row = &self.data[base..base + n];
                s += u[c] * row.iter().zip(u).map(|(t, x)| t * x).sum::<f64>();
            }
            s
        })
    }

    /// Average over all 24 index permutations. The quartic form is unchanged.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.dim, |a, b, c, d| {
            let idx = [a, b, c, d];
            PERMUTATIONS
                .iter()
                .map(|p| self.get(idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]))
                .sum::<f64>()
                / 24.0
        })
    }

    /// Largest deviation of any entry from its permuted counterparts.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = self.get(a, b, c, d);
                        let idx = [a, b, c, d];
                        for p in &PERMUTATIONS[1..] {
                            let w = self.get(idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]);
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn is_supersymmetric(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    /// Reshape to a `T²×T²` matrix with row index `a·T + b` and column
    /// index `c·T + d`.
    pub fn to_pair_matrix(&self) -> Matrix {
        let n2 = self.dim * self.dim;
        Matrix::from_vec(n2, n2, self.data.clone()).expect("T^4 entries")
    }

    /// Inverse of [`Tensor4::to_pair_matrix`].
    pub fn from_pair_matrix(m: &Matrix) -> Result<Self> {
        let n2 = m.rows();
        let dim = (n2 as f64).sqrt().round() as usize;
        if dim * dim != n2 || m.cols() != n2 {
            return Err(Error::DimensionMismatch {
                what: "pair matrix",
                expected: dim * dim,
                got: n2,
            });
        }
        Self::from_vec(dim, m.as_slice().to_vec())
    }

    /// `Σ_{t,u} T_ttuu`.
    pub fn pair_trace(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .flat_map(|t| (0..n).map(move |u| (t, u)))
            .map(|(t, u)| self.get(t, t, u, u))
            .sum()
    }
}
