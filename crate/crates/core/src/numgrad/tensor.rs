//! Dense row-major 2-D f64 tensors.
//!
//! Plain values with no gradient participation; [`crate::numgrad::Tape`]
//! records operations over these same kernels, so an evaluation done with or
//! without a tape is bit-identical.

use serde::{Deserialize, Serialize};

/// Elementwise activation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed in terms of the input `x` and output `y`.
    pub fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// A dense `rows × cols` matrix of f64, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor from row-major data. Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "tensor data length {} does not match shape {}x{}",
            data.len(),
            rows,
            cols
        );
        Tensor { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows in tensor literal");
            data.extend_from_slice(row);
        }
        Tensor { rows: r, cols: c, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Tensor { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Tensor::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// A 1×n row vector.
    pub fn row(values: &[f64]) -> Self {
        Tensor { rows: 1, cols: values.len(), data: values.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn scalar(&self) -> f64 {
        assert!(self.is_scalar(), "expected 1x1 tensor, got {}x{}", self.rows, self.cols);
        self.data[0]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Standard matrix product. Panics on an inner-dimension mismatch,
    /// naming both shapes.
    pub fn matmul(&self, other: &Tensor) -> Tensor {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Tensor::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let lhs = k * other.cols;
                let dst = i * other.cols;
                for j in 0..other.cols {
                    out.data[dst + j] += a * other.data[lhs + j];
                }
            }
        }
        out
    }

    /// Elementwise sum; `other` may also be a 1×cols bias row, broadcast over
    /// rows. Any other shape combination panics naming both shapes.
    pub fn add(&self, other: &Tensor) -> Tensor {
        if self.shape() == other.shape() {
            let data = self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect();
            return Tensor { rows: self.rows, cols: self.cols, data };
        }
        if other.rows == 1 && other.cols == self.cols {
            let mut out = self.clone();
            for r in 0..self.rows {
                for c in 0..self.cols {
                    out.data[r * self.cols + c] += other.data[c];
                }
            }
            return out;
        }
        panic!(
            "add shape mismatch: {}x{} + {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        let data = self.data.iter().map(|v| v * factor).collect();
        Tensor { rows: self.rows, cols: self.cols, data }
    }

    pub fn activation(&self, kind: Activation) -> Tensor {
        let data = self.data.iter().map(|&v| kind.apply(v)).collect();
        Tensor { rows: self.rows, cols: self.cols, data }
    }

    /// Row-wise softmax with max-subtraction for stability. Each output row
    /// is nonnegative and sums to 1. Panics on zero columns.
    pub fn softmax_rows(&self) -> Tensor {
        assert!(self.cols > 0, "softmax_rows requires at least one column");
        let mut out = Tensor::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for (c, &v) in row.iter().enumerate() {
                let e = (v - max).exp();
                out.data[r * self.cols + c] = e;
                sum += e;
            }
            for c in 0..self.cols {
                out.data[r * self.cols + c] /= sum;
            }
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        assert!(!self.data.is_empty(), "mean of empty tensor");
        self.sum() / self.data.len() as f64
    }

    /// Mean squared error against `other` (same shape), averaged over all
    /// elements.
    pub fn mse(&self, other: &Tensor) -> f64 {
        assert_eq!(
            self.shape(),
            other.shape(),
            "mse shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        let n = self.data.len() as f64;
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n
    }

    pub fn transpose(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Reshape to a single 1×(rows·cols) row, preserving row-major order.
    pub fn flatten_row(&self) -> Tensor {
        Tensor { rows: 1, cols: self.data.len(), data: self.data.clone() }
    }

    /// Horizontal concatenation; both operands must have the same row count.
    pub fn concat_cols(&self, other: &Tensor) -> Tensor {
        assert_eq!(
            self.rows, other.rows,
            "concat_cols row mismatch: {}x{} | {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
            data.extend_from_slice(&other.data[r * other.cols..(r + 1) * other.cols]);
        }
        Tensor { rows: self.rows, cols, data }
    }

    /// Vertical stack of equal-width tensors.
    pub fn stack_rows(parts: &[&Tensor]) -> Tensor {
        assert!(!parts.is_empty(), "stack_rows of nothing");
        let cols = parts[0].cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            assert_eq!(p.cols, cols, "stack_rows width mismatch: {} vs {}", p.cols, cols);
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Tensor { rows, cols, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(Tensor::identity(2).matmul(&a), a);
    }

    #[test]
    fn matmul_zero() {
        let z = Tensor::zeros(2, 2);
        let b = Tensor::from_rows(&[vec![5.0, -1.0, 2.0], vec![0.5, 3.0, 9.0]]);
        assert_eq!(z.matmul(&b), Tensor::zeros(2, 3));
    }

    #[test]
    fn matmul_hand_case() {
        // [[1,2]] * [[3],[4]] = [[11]]
        let a = Tensor::row(&[1.0, 2.0]);
        let b = Tensor::from_vec(2, 1, vec![3.0, 4.0]);
        assert_eq!(a.matmul(&b).scalar(), 11.0);
    }

    #[test]
    #[should_panic(expected = "matmul shape mismatch: 1x2 * 3x1")]
    fn matmul_mismatch_names_shapes() {
        let a = Tensor::row(&[1.0, 2.0]);
        let b = Tensor::from_vec(3, 1, vec![1.0, 2.0, 3.0]);
        let _ = a.matmul(&b);
    }

    #[test]
    fn relu_and_tanh() {
        let x = Tensor::row(&[-1.0, 2.0]);
        assert_eq!(x.activation(Activation::Relu), Tensor::row(&[0.0, 2.0]));
        assert_eq!(Tensor::row(&[0.0]).activation(Activation::Tanh).scalar(), 0.0);
        assert_eq!(x.activation(Activation::Identity), x);
    }

    #[test]
    fn softmax_uniform_on_equal_logits() {
        let s = Tensor::row(&[0.0, 0.0, 0.0]).softmax_rows();
        for &v in s.data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_hand_case() {
        // softmax([ln 2, 0]) = [2/3, 1/3]
        let s = Tensor::row(&[2.0_f64.ln(), 0.0]).softmax_rows();
        assert!((s.get(0, 0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.get(0, 1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_single_column() {
        assert_eq!(Tensor::row(&[5.0]).softmax_rows().scalar(), 1.0);
    }

    #[test]
    fn softmax_extreme_magnitudes_stay_normalized() {
        let s = Tensor::row(&[1e3, -1e3, 0.0]).softmax_rows();
        let sum: f64 = s.data().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(s.data().iter().all(|&v| v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn bias_row_broadcast() {
        let x = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Tensor::row(&[10.0, 20.0]);
        assert_eq!(
            x.add(&b),
            Tensor::from_rows(&[vec![11.0, 22.0], vec![13.0, 24.0]])
        );
    }

    #[test]
    fn concat_and_flatten() {
        let a = Tensor::from_rows(&[vec![1.0, 2.0]]);
        let b = Tensor::from_rows(&[vec![3.0]]);
        assert_eq!(a.concat_cols(&b), Tensor::row(&[1.0, 2.0, 3.0]));
        let m = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(m.flatten_row(), Tensor::row(&[1.0, 2.0, 3.0, 4.0]));
    }
}
