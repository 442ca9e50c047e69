//! Reverse-mode automatic differentiation over [`Tensor`] values.
//!
//! A [`Tape`] owns an append-only arena of recorded primitive ops. Leaves
//! enter via [`Tape::constant`] or [`Tape::param`]; every other node is
//! produced by an op method and therefore references only earlier nodes, so
//! the arena is topologically ordered by construction. [`Tape::backward`]
//! walks it once in reverse and returns gradients for the trainable leaves.
//!
//! The tape is explicit and single-owner: one training step builds one tape,
//! consumes it, and drops it. There is no global recording state.

use std::collections::BTreeMap;

use super::tensor::{Activation, Tensor};

/// Handle to a value recorded on a [`Tape`]. Only meaningful for the tape
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapeTensor {
    id: usize,
    rows: usize,
    cols: usize,
}

impl TapeTensor {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf { trainable: bool },
    MatMul(usize, usize),
    Add(usize, usize),
    AddRow(usize, usize),
    Activation(usize, Activation),
    SoftmaxRows(usize),
    Mse(usize, usize),
    Scale(usize, f64),
    Sum(usize),
    Mean(usize),
    FlattenRow(usize),
    ConcatCols(usize, usize),
    StackRows(Vec<usize>),
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    value: Tensor,
}

/// Gradients of a scalar loss with respect to the tape's trainable leaves,
/// keyed by leaf handle. Non-parameters have no entry.
#[derive(Debug, Clone)]
pub struct Gradients {
    by_id: BTreeMap<usize, Tensor>,
}

impl Gradients {
    pub fn get(&self, param: TapeTensor) -> Option<&Tensor> {
        self.by_id.get(&param.id)
    }

    /// Gradient for a parameter that is known to be on the loss path; a
    /// parameter the loss never touched has an all-zero gradient.
    pub fn for_param(&self, param: TapeTensor) -> Tensor {
        self.by_id
            .get(&param.id)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(param.rows, param.cols))
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

/// Recording tape. See the module docs.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Tensor) -> TapeTensor {
        let id = self.nodes.len();
        let (rows, cols) = value.shape();
        self.nodes.push(Node { op, value });
        TapeTensor { id, rows, cols }
    }

    /// Records a non-trainable leaf.
    pub fn constant(&mut self, value: &Tensor) -> TapeTensor {
        self.push(Op::Leaf { trainable: false }, value.clone())
    }

    /// Records a trainable leaf; [`Tape::backward`] will report its gradient.
    pub fn param(&mut self, value: &Tensor) -> TapeTensor {
        self.push(Op::Leaf { trainable: true }, value.clone())
    }

    /// Value computed for a recorded node.
    pub fn value(&self, t: TapeTensor) -> &Tensor {
        &self.nodes[t.id].value
    }

    pub fn matmul(&mut self, a: TapeTensor, b: TapeTensor) -> TapeTensor {
        let v = self.nodes[a.id].value.matmul(&self.nodes[b.id].value);
        self.push(Op::MatMul(a.id, b.id), v)
    }

    /// Elementwise add, or bias-row broadcast when `b` is 1×cols.
    pub fn add(&mut self, a: TapeTensor, b: TapeTensor) -> TapeTensor {
        let v = self.nodes[a.id].value.add(&self.nodes[b.id].value);
        let op = if a.shape() == b.shape() {
            Op::Add(a.id, b.id)
        } else {
            Op::AddRow(a.id, b.id)
        };
        self.push(op, v)
    }

    pub fn activation(&mut self, x: TapeTensor, kind: Activation) -> TapeTensor {
        let v = self.nodes[x.id].value.activation(kind);
        self.push(Op::Activation(x.id, kind), v)
    }

    pub fn softmax_rows(&mut self, x: TapeTensor) -> TapeTensor {
        let v = self.nodes[x.id].value.softmax_rows();
        self.push(Op::SoftmaxRows(x.id), v)
    }

    /// Mean squared error over all elements; yields a 1×1 node.
    pub fn mse(&mut self, pred: TapeTensor, target: TapeTensor) -> TapeTensor {
        let v = self.nodes[pred.id].value.mse(&self.nodes[target.id].value);
        self.push(Op::Mse(pred.id, target.id), Tensor::from_vec(1, 1, vec![v]))
    }

    pub fn scale(&mut self, x: TapeTensor, factor: f64) -> TapeTensor {
        let v = self.nodes[x.id].value.scale(factor);
        self.push(Op::Scale(x.id, factor), v)
    }

    pub fn sum(&mut self, x: TapeTensor) -> TapeTensor {
        let v = self.nodes[x.id].value.sum();
        self.push(Op::Sum(x.id), Tensor::from_vec(1, 1, vec![v]))
    }

    pub fn mean(&mut self, x: TapeTensor) -> TapeTensor {
        let v = self.nodes[x.id].value.mean();
        self.push(Op::Mean(x.id), Tensor::from_vec(1, 1, vec![v]))
    }

    pub fn flatten_row(&mut self, x: TapeTensor) -> TapeTensor {
        let v = self.nodes[x.id].value.flatten_row();
        self.push(Op::FlattenRow(x.id), v)
    }

    pub fn concat_cols(&mut self, a: TapeTensor, b: TapeTensor) -> TapeTensor {
        let v = self.nodes[a.id].value.concat_cols(&self.nodes[b.id].value);
        self.push(Op::ConcatCols(a.id, b.id), v)
    }

    pub fn stack_rows(&mut self, parts: &[TapeTensor]) -> TapeTensor {
        let values: Vec<&Tensor> = parts.iter().map(|p| &self.nodes[p.id].value).collect();
        let v = Tensor::stack_rows(&values);
        self.push(Op::StackRows(parts.iter().map(|p| p.id).collect()), v)
    }

    /// Reverse pass from a scalar loss. Visits each node exactly once and
    /// returns gradients for trainable leaves only. Panics if `loss` is not
    /// 1×1.
    pub fn backward(&self, loss: TapeTensor) -> Gradients {
        assert!(
            self.nodes[loss.id].value.is_scalar(),
            "backward requires a scalar loss, got {}x{}",
            loss.rows,
            loss.cols
        );
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.id] = Some(Tensor::from_vec(1, 1, vec![1.0]));

        for id in (0..=loss.id).rev() {
            let Some(g) = grads[id].take() else { continue };
            match &self.nodes[id].op {
                Op::Leaf { trainable } => {
                    if *trainable {
                        grads[id] = Some(g);
                    }
                    continue;
                }
                Op::MatMul(a, b) => {
                    let da = g.matmul(&self.nodes[*b].value.transpose());
                    let db = self.nodes[*a].value.transpose().matmul(&g);
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::AddRow(a, row) => {
                    let mut row_grad = Tensor::zeros(1, g.cols());
                    for r in 0..g.rows() {
                        for c in 0..g.cols() {
                            row_grad.data_mut()[c] += g.get(r, c);
                        }
                    }
                    accumulate(&mut grads, *a, g);
                    accumulate(&mut grads, *row, row_grad);
                }
                Op::Activation(x, kind) => {
                    let input = &self.nodes[*x].value;
                    let output = &self.nodes[id].value;
                    let mut dx = g;
                    for (i, v) in dx.data_mut().iter_mut().enumerate() {
                        *v *= kind.derivative(input.data()[i], output.data()[i]);
                    }
                    accumulate(&mut grads, *x, dx);
                }
                Op::SoftmaxRows(x) => {
                    // dx_ij = y_ij * (g_ij - sum_k g_ik y_ik)
                    let y = &self.nodes[id].value;
                    let mut dx = Tensor::zeros(y.rows(), y.cols());
                    for r in 0..y.rows() {
                        let mut dot = 0.0;
                        for c in 0..y.cols() {
                            dot += g.get(r, c) * y.get(r, c);
                        }
                        for c in 0..y.cols() {
                            dx.set(r, c, y.get(r, c) * (g.get(r, c) - dot));
                        }
                    }
                    accumulate(&mut grads, *x, dx);
                }
                Op::Mse(pred, target) => {
                    let scale = 2.0 * g.scalar() / self.nodes[*pred].value.len() as f64;
                    let p = &self.nodes[*pred].value;
                    let t = &self.nodes[*target].value;
                    let mut dp = Tensor::zeros(p.rows(), p.cols());
                    for (i, v) in dp.data_mut().iter_mut().enumerate() {
                        *v = scale * (p.data()[i] - t.data()[i]);
                    }
                    let dt = dp.scale(-1.0);
                    accumulate(&mut grads, *pred, dp);
                    accumulate(&mut grads, *target, dt);
                }
                Op::Scale(x, factor) => {
                    accumulate(&mut grads, *x, g.scale(*factor));
                }
                Op::Sum(x) => {
                    let src = &self.nodes[*x].value;
                    accumulate(&mut grads, *x, Tensor::filled(src.rows(), src.cols(), g.scalar()));
                }
                Op::Mean(x) => {
                    let src = &self.nodes[*x].value;
                    let v = g.scalar() / src.len() as f64;
                    accumulate(&mut grads, *x, Tensor::filled(src.rows(), src.cols(), v));
                }
                Op::FlattenRow(x) => {
                    let src = &self.nodes[*x].value;
                    let dx = Tensor::from_vec(src.rows(), src.cols(), g.data().to_vec());
                    accumulate(&mut grads, *x, dx);
                }
                Op::ConcatCols(a, b) => {
                    let (ar, ac) = self.nodes[*a].value.shape();
                    let bc = self.nodes[*b].value.cols();
                    let mut da = Tensor::zeros(ar, ac);
                    let mut db = Tensor::zeros(ar, bc);
                    for r in 0..ar {
                        for c in 0..ac {
                            da.set(r, c, g.get(r, c));
                        }
                        for c in 0..bc {
                            db.set(r, c, g.get(r, ac + c));
                        }
                    }
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::StackRows(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let (pr, pc) = self.nodes[p].value.shape();
                        let mut dp = Tensor::zeros(pr, pc);
                        for r in 0..pr {
                            for c in 0..pc {
                                dp.set(r, c, g.get(offset + r, c));
                            }
                        }
                        accumulate(&mut grads, p, dp);
                        offset += pr;
                    }
                }
            }
        }

        let mut by_id = BTreeMap::new();
        for (id, slot) in grads.into_iter().enumerate() {
            if let (Some(grad), Op::Leaf { trainable: true }) = (slot, &self.nodes[id].op) {
                by_id.insert(id, grad);
            }
        }
        Gradients { by_id }
    }
}

fn accumulate(grads: &mut [Option<Tensor>], id: usize, delta: Tensor) {
    match &mut grads[id] {
        Some(existing) => *existing = existing.add(&delta),
        slot @ None => *slot = Some(delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_params_has_unit_gradient() {
        let mut tape = Tape::new();
        let w = tape.param(&Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]));
        let loss = tape.sum(w);
        let grads = tape.backward(loss);
        assert_eq!(grads.for_param(w), Tensor::filled(2, 2, 1.0));
    }

    #[test]
    fn zero_residual_mse_has_zero_gradient() {
        let mut tape = Tape::new();
        let w = tape.param(&Tensor::from_rows(&[vec![0.5, -1.5]]));
        let x = tape.constant(&Tensor::from_vec(2, 1, vec![2.0, 3.0]));
        let a = tape.matmul(w, x);
        let b = tape.matmul(w, x);
        let loss = tape.mse(a, b);
        let grads = tape.backward(loss);
        assert_eq!(grads.for_param(w), Tensor::zeros(1, 2));
    }

    #[test]
    fn matmul_gradient_chain() {
        // loss = sum(w * x), w 1x2 param, x 2x1 constant -> dloss/dw = x^T
        let mut tape = Tape::new();
        let w = tape.param(&Tensor::row(&[1.0, -2.0]));
        let x = tape.constant(&Tensor::from_vec(2, 1, vec![3.0, 4.0]));
        let y = tape.matmul(w, x);
        let loss = tape.sum(y);
        let grads = tape.backward(loss);
        assert_eq!(grads.for_param(w), Tensor::row(&[3.0, 4.0]));
    }

    #[test]
    fn constants_receive_no_entry() {
        let mut tape = Tape::new();
        let w = tape.param(&Tensor::row(&[2.0]));
        let c = tape.constant(&Tensor::row(&[5.0]));
        let y = tape.add(w, c);
        let loss = tape.sum(y);
        let grads = tape.backward(loss);
        assert!(grads.get(c).is_none());
        assert!(grads.get(w).is_some());
        assert_eq!(grads.len(), 1);
    }

    #[test]
    #[should_panic(expected = "backward requires a scalar loss")]
    fn non_scalar_loss_rejected() {
        let mut tape = Tape::new();
        let w = tape.param(&Tensor::row(&[1.0, 2.0]));
        tape.backward(w);
    }

    #[test]
    fn reused_node_accumulates() {
        // loss = sum(w + w) -> gradient 2 everywhere
        let mut tape = Tape::new();
        let w = tape.param(&Tensor::row(&[1.0, 4.0]));
        let y = tape.add(w, w);
        let loss = tape.sum(y);
        let grads = tape.backward(loss);
        assert_eq!(grads.for_param(w), Tensor::row(&[2.0, 2.0]));
    }

    #[test]
    fn softmax_gradient_rows_sum_to_zero() {
        // Softmax output is shift-invariant, so its input gradient must sum
        // to zero per row for any upstream gradient.
        let mut tape = Tape::new();
        let x = tape.param(&Tensor::from_rows(&[vec![0.3, -1.2, 2.0]]));
        let s = tape.softmax_rows(x);
        let t = tape.constant(&Tensor::row(&[1.0, 0.0, 0.0]));
        let loss = tape.mse(s, t);
        let grads = tape.backward(loss);
        let sum: f64 = grads.for_param(x).data().iter().sum();
        assert!(sum.abs() < 1e-14);
    }
}
