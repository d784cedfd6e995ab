//! Dense row-major `f64` tensors and the pure forward kernels used by the
//! computation graph.

use rand::Rng;

use crate::error::{Error, Result};

/// A dense array of 64-bit reals in row-major order.
///
/// Every dimension is positive and `shape.iter().product() == data.len()`.
/// Scalars are represented with shape `[1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Domain(format!(
                "tensor shape must be non-empty with positive dimensions, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::shape("tensor", &shape, &[data.len()]));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Tensor::new(shape.to_vec(), vec![0.0; n]).expect("zeros: positive shape")
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: vec![1],
            data: vec![value],
        }
    }

    /// A 1-D tensor. Panics on an empty vector.
    pub fn vector(data: Vec<f64>) -> Self {
        Tensor::new(vec![data.len()], data).expect("vector: non-empty data")
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Tensor::new(vec![rows, cols], data)
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Tensor::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// Entries drawn i.i.d. from `U(-bound, bound)`.
    pub fn uniform<R: Rng + ?Sized>(shape: &[usize], bound: f64, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        Tensor::new(shape.to_vec(), data).expect("uniform: positive shape")
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Value of a shape-`[1]` tensor.
    pub fn item(&self) -> f64 {
        debug_assert_eq!(self.data.len(), 1);
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &Tensor, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::shape(op, &self.shape, &other.shape));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, "mul", |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        self.map(|v| c * v)
    }

    pub fn tanh(&self) -> Tensor {
        self.map(f64::tanh)
    }

    pub fn sigmoid(&self) -> Tensor {
        self.map(sigmoid)
    }

    /// In-place `self += other`.
    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape("add_assign", &self.shape, &other.shape));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Row `i` of a rank-2 tensor.
    pub fn row(&self, i: usize) -> &[f64] {
        let cols = self.shape[1];
        &self.data[i * cols..(i + 1) * cols]
    }

    /// Matrix product. Rank-1 operands act as a row vector on the left and
    /// a column vector on the right; the added unit dimension is dropped from
    /// the result (`[k]·[k]` yields shape `[1]`).
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (m, k) = as_left(self).ok_or_else(|| Error::shape("matmul", &self.shape, &other.shape))?;
        let (k2, n) = as_right(other).ok_or_else(|| Error::shape("matmul", &self.shape, &other.shape))?;
        if k != k2 {
            return Err(Error::shape("matmul", &self.shape, &other.shape));
        }
        let data = gemm(&self.data, &other.data, m, k, n);
        let shape = match (self.rank(), other.rank()) {
            (2, 2) => vec![m, n],
            (2, 1) => vec![m],
            (1, 2) => vec![n],
            _ => vec![1],
        };
        Tensor::new(shape, data)
    }
}

fn as_left(t: &Tensor) -> Option<(usize, usize)> {
    match *t.shape.as_slice() {
        [k] => Some((1, k)),
        [m, k] => Some((m, k)),
        _ => None,
    }
}

fn as_right(t: &Tensor) -> Option<(usize, usize)> {
    match *t.shape.as_slice() {
        [k] => Some((k, 1)),
        [k, n] => Some((k, n)),
        _ => None,
    }
}

/// `C[m×n] = A[m×k] · B[k×n]`, all row-major.
pub(crate) fn gemm(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        let out = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in out.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
    c
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax over a slice.
pub fn softmax(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Domain("softmax of an empty vector".into()));
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Elementwise mean of equally shaped tensors: sum in operand order, then
/// divide by the count.
pub fn mean(operands: &[&Tensor]) -> Result<Tensor> {
    let mut acc = sum(operands)?;
    let n = operands.len() as f64;
    for v in acc.data_mut() {
        *v /= n;
    }
    Ok(acc)
}

/// Elementwise sum of equally shaped tensors.
pub fn sum(operands: &[&Tensor]) -> Result<Tensor> {
    let first = operands
        .first()
        .ok_or_else(|| Error::Domain("reduction over zero operands".into()))?;
    let mut acc = Tensor::zeros(first.shape());
    for t in operands {
        acc.add_assign(t)?;
    }
    Ok(acc)
}

/// Concatenates rank-1 tensors in order.
pub fn concat(operands: &[&Tensor]) -> Result<Tensor> {
    if operands.is_empty() {
        return Err(Error::Domain("concat over zero operands".into()));
    }
    let mut data = Vec::new();
    for t in operands {
        if t.rank() != 1 {
            return Err(Error::shape("concat", t.shape(), &[0]));
        }
        data.extend_from_slice(t.data());
    }
    Ok(Tensor::vector(data))
}

/// Stacks equal-length rank-1 tensors as the rows of a matrix.
pub fn stack(rows: &[&Tensor]) -> Result<Tensor> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Domain("stack over zero operands".into()))?;
    if first.rank() != 1 {
        return Err(Error::shape("stack", first.shape(), &[0]));
    }
    let cols = first.len();
    let mut data = Vec::with_capacity(rows.len() * cols);
    for r in rows {
        if r.shape() != first.shape() {
            return Err(Error::shape("stack", first.shape(), r.shape()));
        }
        data.extend_from_slice(r.data());
    }
    Tensor::matrix(rows.len(), cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shape_invariant_enforced() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![0], vec![]).is_err());
        assert!(Tensor::new(vec![], vec![1.0]).is_err());
    }

    #[test]
    fn matmul_identity_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Tensor::uniform(&[3, 4], 1.0, &mut rng);
        assert_eq!(a.matmul(&Tensor::identity(4)).unwrap(), a);
        let z = a.matmul(&Tensor::zeros(&[4, 2])).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = Tensor::uniform(&[3, 4], 1.0, &mut rng);
        let b = Tensor::uniform(&[4, 2], 1.0, &mut rng);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.shape(), &[3, 2]);
        for i in 0..3 {
            for j in 0..2 {
                let mut s = 0.0;
                for p in 0..4 {
                    s += a.data()[i * 4 + p] * b.data()[p * 2 + j];
                }
                assert!((c.data()[i * 2 + j] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_vector_forms() {
        let w = Tensor::matrix(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let x = Tensor::vector(vec![1.0, 0.0, -1.0]);
        assert_eq!(w.matmul(&x).unwrap().data(), &[-2.0, -2.0]);
        let y = Tensor::vector(vec![1.0, 1.0]);
        assert_eq!(y.matmul(&w).unwrap().data(), &[5.0, 7.0, 9.0]);
        assert_eq!(x.matmul(&x).unwrap().shape(), &[1]);
    }

    #[test]
    fn matmul_mismatch_names_both_shapes() {
        let a = Tensor::zeros(&[3, 4]);
        let b = Tensor::zeros(&[3, 2]);
        let msg = a.matmul(&b).unwrap_err().to_string();
        assert!(msg.contains("[3, 4]") && msg.contains("[3, 2]"), "{msg}");
    }

    #[test]
    fn eltwise_basics() {
        assert_eq!(Tensor::scalar(0.0).tanh().item(), 0.0);
        assert_eq!(Tensor::scalar(0.0).sigmoid().item(), 0.5);
        let x = Tensor::vector(vec![1.5, -2.0]);
        assert_eq!(x.add(&Tensor::zeros(&[2])).unwrap(), x);
        assert!(x.add(&Tensor::zeros(&[3])).is_err());
        assert!(x.mul(&Tensor::zeros(&[2, 1])).is_err());
    }

    #[test]
    fn tanh_matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Tensor::uniform(&[17], 3.0, &mut rng);
        let y = x.tanh();
        for (a, b) in x.data().iter().zip(y.data()) {
            let (ep, em) = (a.exp(), (-a).exp());
            assert!(((ep - em) / (ep + em) - b).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_cases() {
        let s = softmax(&[0.0, 0.0, 0.0]).unwrap();
        for v in s {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(softmax(&[]).is_err());
        // exp(i) / (e + e^2 + e^3), evaluated independently
        let e = std::f64::consts::E;
        let z = e + e * e + e * e * e;
        let s = softmax(&[1.0, 2.0, 3.0]).unwrap();
        let expected = [e / z, e * e / z, e * e * e / z];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        // no overflow for large inputs
        let s = softmax(&[1000.0, 1000.0]).unwrap();
        assert_eq!(s, vec![0.5, 0.5]);
    }

    #[test]
    fn reductions() {
        let a = Tensor::vector(vec![1.0, 2.0]);
        assert_eq!(mean(&[&a]).unwrap(), a);
        assert!(mean(&[]).is_err());
        let c = concat(&[&a, &a, &Tensor::scalar(3.0), &a]).unwrap();
        assert_eq!(c.len(), 7);
        assert!(concat(&[]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vs: Vec<Tensor> = (0..6).map(|_| Tensor::uniform(&[5], 1.0, &mut rng)).collect();
        let refs: Vec<&Tensor> = vs.iter().collect();
        let m = mean(&refs).unwrap();
        for j in 0..5 {
            let mut acc = 0.0;
            for v in &vs {
                acc += v.data()[j];
            }
            assert!((m.data()[j] - acc / 6.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn softmax_normalized_and_shift_invariant(
            xs in prop::collection::vec(-30.0f64..30.0, 1..20),
            c in -50.0f64..50.0,
        ) {
            let p = softmax(&xs).unwrap();
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| v > 0.0));
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let q = softmax(&shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |best, (i, &x)| if x > v[best] { i } else { best });
            prop_assert_eq!(argmax(&p), argmax(&q));
        }
    }
}
