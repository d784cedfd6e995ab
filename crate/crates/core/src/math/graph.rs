//! Tape-based reverse-mode automatic differentiation.
//!
//! A [`Graph`] records every operation as a node in creation order, so the
//! node list is already topologically sorted. [`Graph::backward`] walks it in
//! reverse and returns a fresh [`Gradients`] each call; calling it twice on
//! the same graph yields identical results.

use super::tensor::{self, gemm, Tensor};
use crate::error::{Error, Result};

/// Handle to a node in a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Constant,
    Trainable,
    MatMul(Var, Var),
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    /// Adds a shape-`[1]` tensor to every entry of the first operand.
    AddScalar(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    Softmax(Var),
    Mean(Vec<Var>),
    Sum(Var),
    Concat(Vec<Var>),
    Stack(Vec<Var>),
    Slice(Var, usize),
    Pick(Var, usize),
    LnFloor(Var, f64),
    SumSquares(Var),
}

#[derive(Debug, Clone)]
struct Node {
    value: Tensor,
    op: Op,
}

/// The computation record.
#[derive(Debug, Default, Clone)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn is_trainable(&self, v: Var) -> bool {
        matches!(self.nodes[v.0].op, Op::Trainable)
    }

    /// A leaf that receives no gradient.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Constant)
    }

    /// A leaf whose gradient is reported by [`Graph::backward`].
    pub fn trainable(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Trainable)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).matmul(self.value(b))?;
        Ok(self.push(v, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).add(self.value(b))?;
        Ok(self.push(v, Op::Add(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).mul(self.value(b))?;
        Ok(self.push(v, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a).scale(c);
        self.push(v, Op::Scale(a, c))
    }

    pub fn add_scalar(&mut self, a: Var, s: Var) -> Result<Var> {
        if self.shape(s) != [1] {
            return Err(Error::shape("add_scalar", self.shape(a), self.shape(s)));
        }
        let b = self.value(s).item();
        let v = self.value(a).map(|x| x + b);
        Ok(self.push(v, Op::AddScalar(a, s)))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.value(a).tanh();
        self.push(v, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).sigmoid();
        self.push(v, Op::Sigmoid(a))
    }

    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        if self.value(a).rank() != 1 {
            return Err(Error::shape("softmax", self.shape(a), &[0]));
        }
        let v = Tensor::vector(tensor::softmax(self.value(a).data())?);
        Ok(self.push(v, Op::Softmax(a)))
    }

    pub fn mean(&mut self, operands: &[Var]) -> Result<Var> {
        let refs: Vec<&Tensor> = operands.iter().map(|&v| self.value(v)).collect();
        let v = tensor::mean(&refs)?;
        Ok(self.push(v, Op::Mean(operands.to_vec())))
    }

    /// Sum of all entries, as a shape-`[1]` tensor.
    pub fn sum(&mut self, a: Var) -> Var {
        let v = Tensor::scalar(self.value(a).data().iter().sum());
        self.push(v, Op::Sum(a))
    }

    pub fn concat(&mut self, operands: &[Var]) -> Result<Var> {
        let refs: Vec<&Tensor> = operands.iter().map(|&v| self.value(v)).collect();
        let v = tensor::concat(&refs)?;
        Ok(self.push(v, Op::Concat(operands.to_vec())))
    }

    pub fn stack(&mut self, rows: &[Var]) -> Result<Var> {
        let refs: Vec<&Tensor> = rows.iter().map(|&v| self.value(v)).collect();
        let v = tensor::stack(&refs)?;
        Ok(self.push(v, Op::Stack(rows.to_vec())))
    }

    /// Entries `start..start + len` of a rank-1 tensor.
    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let t = self.value(a);
        if t.rank() != 1 || len == 0 || start + len > t.len() {
            return Err(Error::shape("slice", t.shape(), &[start, len]));
        }
        let v = Tensor::vector(t.data()[start..start + len].to_vec());
        Ok(self.push(v, Op::Slice(a, start)))
    }

    /// Entry `index` of a rank-1 tensor, as a shape-`[1]` tensor.
    pub fn pick(&mut self, a: Var, index: usize) -> Result<Var> {
        let t = self.value(a);
        if t.rank() != 1 || index >= t.len() {
            return Err(Error::shape("pick", t.shape(), &[index]));
        }
        let v = Tensor::scalar(t.data()[index]);
        Ok(self.push(v, Op::Pick(a, index)))
    }

    /// `ln(max(x, floor))` elementwise. Entries at or below the floor get no
    /// gradient.
    pub fn ln_floor(&mut self, a: Var, floor: f64) -> Var {
        let v = self.value(a).map(|x| x.max(floor).ln());
        self.push(v, Op::LnFloor(a, floor))
    }

    /// Squared Frobenius norm, as a shape-`[1]` tensor.
    pub fn sum_squares(&mut self, a: Var) -> Var {
        let v = Tensor::scalar(self.value(a).sum_squares());
        self.push(v, Op::SumSquares(a))
    }

    /// Reverse pass from a scalar node.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.shape(loss) != [1] {
            return Err(Error::Domain(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Trainable => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    let (ga, gb) = self.matmul_grads(*a, *b, &g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Mul(a, b) => {
                    let ga = g.mul(self.value(*b)).expect("mul grad shape");
                    let gb = g.mul(self.value(*a)).expect("mul grad shape");
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Scale(a, c) => accumulate(&mut grads, *a, g.scale(*c)),
                Op::AddScalar(a, s) => {
                    let total: f64 = g.data().iter().sum();
                    accumulate(&mut grads, *s, Tensor::scalar(total));
                    accumulate(&mut grads, *a, g);
                }
                Op::Tanh(a) => {
                    let d = node.value.map(|y| 1.0 - y * y);
                    accumulate(&mut grads, *a, g.mul(&d).expect("tanh grad shape"));
                }
                Op::Sigmoid(a) => {
                    let d = node.value.map(|y| y * (1.0 - y));
                    accumulate(&mut grads, *a, g.mul(&d).expect("sigmoid grad shape"));
                }
                Op::Softmax(a) => {
                    let y = node.value.data();
                    let dot: f64 = g.data().iter().zip(y).map(|(gi, yi)| gi * yi).sum();
                    let gx = y.iter().zip(g.data()).map(|(yi, gi)| yi * (gi - dot)).collect();
                    accumulate(&mut grads, *a, Tensor::vector(gx));
                }
                Op::Mean(ops) => {
                    let share = g.map(|v| v / ops.len() as f64);
                    for &o in ops {
                        accumulate(&mut grads, o, share.clone());
                    }
                }
                Op::Sum(a) => {
                    let gv = g.item();
                    accumulate(&mut grads, *a, self.value(*a).map(|_| gv));
                }
                Op::Concat(ops) => {
                    let mut offset = 0;
                    for &o in ops {
                        let n = self.value(o).len();
                        let part = g.data()[offset..offset + n].to_vec();
                        offset += n;
                        accumulate(&mut grads, o, Tensor::vector(part));
                    }
                }
                Op::Stack(rows) => {
                    for (i, &r) in rows.iter().enumerate() {
                        accumulate(&mut grads, r, Tensor::vector(g.row(i).to_vec()));
                    }
                }
                Op::Slice(a, start) => {
                    let mut full = Tensor::zeros(self.shape(*a));
                    full.data_mut()[*start..*start + g.len()].copy_from_slice(g.data());
                    accumulate(&mut grads, *a, full);
                }
                Op::Pick(a, index) => {
                    let mut full = Tensor::zeros(self.shape(*a));
                    full.data_mut()[*index] = g.item();
                    accumulate(&mut grads, *a, full);
                }
                Op::LnFloor(a, floor) => {
                    let x = self.value(*a);
                    let gx = x
                        .data()
                        .iter()
                        .zip(g.data())
                        .map(|(&xi, &gi)| if xi > *floor { gi / xi } else { 0.0 })
                        .collect();
                    accumulate(&mut grads, *a, Tensor::new(x.shape().to_vec(), gx).expect("ln grad shape"));
                }
                Op::SumSquares(a) => {
                    let gv = g.item();
                    accumulate(&mut grads, *a, self.value(*a).map(|x| 2.0 * x * gv));
                }
            }
        }
        Ok(Gradients { grads })
    }

    fn matmul_grads(&self, a: Var, b: Var, g: &Tensor) -> (Tensor, Tensor) {
        let at = self.value(a);
        let bt = self.value(b);
        let (m, k) = if at.rank() == 1 { (1, at.len()) } else { (at.shape()[0], at.shape()[1]) };
        let n = if bt.rank() == 1 { 1 } else { bt.shape()[1] };
        // dA = G·Bᵀ and dB = Aᵀ·G in the 2-D views.
        let bt_t = transpose(bt.data(), k, n);
        let ga = gemm(g.data(), &bt_t, m, n, k);
        let at_t = transpose(at.data(), m, k);
        let gb = gemm(&at_t, g.data(), k, m, n);
        (
            Tensor::new(at.shape().to_vec(), ga).expect("matmul grad shape"),
            Tensor::new(bt.shape().to_vec(), gb).expect("matmul grad shape"),
        )
    }
}

fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = data[i * cols + j];
        }
    }
    out
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g).expect("gradient shape"),
        slot @ None => *slot = Some(g),
    }
}

/// Gradients of one backward pass. Only trainable leaves report a value.
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of a trainable leaf. `None` for constants, interior nodes,
    /// and trainable leaves that do not reach the loss.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }
}
