//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every primitive application in execution order
//! (which is therefore a topological order) together with the values it
//! needs for its adjoint. [`Tape::backward`] walks the records in reverse
//! and accumulates gradients into every leaf created with [`Tape::param`].
//!
//! All primitives check their output for NaN/Inf and fail with
//! [`DiffError::NonFinite`] rather than letting non-finite values spread.

mod gradcheck;

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{Matrix, Real};
use crate::sparse::SparseOp;

pub use gradcheck::{grad_check, GradCheckReport, ParamCheck};

/// Norm clamp used by row normalisation.
pub const NORM_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch { op: &'static str, lhs: (usize, usize), rhs: (usize, usize) },
    #[error("{op}: {detail}")]
    Contract { op: &'static str, detail: String },
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("loss must be 1x1, got {0:?}")]
    NonScalarLoss((usize, usize)),
    #[error("backward already ran on this tape")]
    AlreadyBackpropagated,
}

/// Handle to a value recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Per-row column subsets, row-compressed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSelection {
    offsets: Vec<usize>,
    cols: Vec<usize>,
}

impl RowSelection {
    pub fn new<R: AsRef<[usize]>>(rows: &[R]) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        offsets.push(0);
        for r in rows {
            cols.extend_from_slice(r.as_ref());
            offsets.push(cols.len());
        }
        Self { offsets, cols }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.cols[self.offsets[r]..self.offsets[r + 1]]
    }
}

enum Op<T> {
    Leaf,
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    GatherRows(Var, Arc<[usize]>),
    Aggregate(Var, Arc<SparseOp<T>>),
    Prelu(Var, Var),
    Elu(Var),
    Sigmoid(Var),
    Exp(Var),
    Log(Var),
    RowNormalize(Var, Vec<T>),
    RowDot(Var, Var),
    RowLogSumExp(Var, Option<Arc<RowSelection>>),
    ConcatCols(Var, Var),
    GatherElements(Var, Arc<[(usize, usize)]>),
    Sum(Var),
    Mean(Var),
}

struct Node<T> {
    value: Matrix<T>,
    op: Op<T>,
    requires_grad: bool,
}

/// Computation record.
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
    grads: Vec<Option<Matrix<T>>>,
    backward_done: bool,
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn check_same(op: &'static str, a: (usize, usize), b: (usize, usize)) -> Result<(), DiffError> {
    if a == b {
        Ok(())
    } else {
        Err(DiffError::ShapeMismatch { op, lhs: a, rhs: b })
    }
}

fn zip_map<T: Real>(a: &Matrix<T>, b: &Matrix<T>, f: impl Fn(T, T) -> T) -> Matrix<T> {
    let data = a.as_slice().iter().zip(b.as_slice()).map(|(&x, &y)| f(x, y)).collect();
    Matrix::from_vec(a.rows(), a.cols(), data).expect("same shape")
}

fn column_sums<T: Real>(g: &Matrix<T>) -> Matrix<T> {
    let mut out = Matrix::zeros(1, g.cols());
    for r in 0..g.rows() {
        for (o, &v) in out.row_mut(0).iter_mut().zip(g.row(r)) {
            *o += v;
        }
    }
    out
}

fn stable_sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), grads: Vec::new(), backward_done: false }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: &'static str, value: Matrix<T>, record: Op<T>) -> Result<Var, DiffError> {
        if !value.all_finite() {
            return Err(DiffError::NonFinite { op });
        }
        let requires_grad = match &record {
            Op::Leaf => false,
            Op::MatMul(a, b)
            | Op::Add(a, b)
            | Op::Sub(a, b)
            | Op::Mul(a, b)
            | Op::Prelu(a, b)
            | Op::RowDot(a, b)
            | Op::ConcatCols(a, b) => self.requires(*a) || self.requires(*b),
            Op::Transpose(a)
            | Op::Scale(a, _)
            | Op::GatherRows(a, _)
            | Op::Aggregate(a, _)
            | Op::Elu(a)
            | Op::Sigmoid(a)
            | Op::Exp(a)
            | Op::Log(a)
            | Op::RowNormalize(a, _)
            | Op::RowLogSumExp(a, _)
            | Op::GatherElements(a, _)
            | Op::Sum(a)
            | Op::Mean(a) => self.requires(*a),
        };
        self.nodes.push(Node { value, op: record, requires_grad });
        Ok(Var(self.nodes.len() - 1))
    }

    fn requires(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Matrix<T>) -> Var {
        self.nodes.push(Node { value, op: Op::Leaf, requires_grad: true });
        Var(self.nodes.len() - 1)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Matrix<T>) -> Var {
        self.nodes.push(Node { value, op: Op::Leaf, requires_grad: false });
        Var(self.nodes.len() - 1)
    }

    /// Copies `v` into a new constant, cutting the gradient path.
    pub fn detach(&mut self, v: Var) -> Var {
        let value = self.value(v).clone();
        self.constant(value)
    }

    pub fn value(&self, v: Var) -> &Matrix<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// The single entry of a `1 x 1` value.
    pub fn scalar(&self, v: Var) -> T {
        self.value(v).get(0, 0)
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.requires(v)
    }

    /// Gradient of the last backward pass with respect to a leaf, if any
    /// flowed to it.
    pub fn grad(&self, v: Var) -> Option<&Matrix<T>> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Like [`Tape::grad`], substituting zeros when nothing flowed.
    pub fn grad_or_zeros(&self, v: Var) -> Matrix<T> {
        self.grad(v).cloned().unwrap_or_else(|| {
            let (r, c) = self.shape(v);
            Matrix::zeros(r, c)
        })
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.1 != sb.0 {
            return Err(DiffError::ShapeMismatch { op: "matmul", lhs: sa, rhs: sb });
        }
        let value = self.value(a).matmul(self.value(b));
        self.push("matmul", value, Op::MatMul(a, b))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var, DiffError> {
        let value = self.value(a).transpose();
        self.push("transpose", value, Op::Transpose(a))
    }

    /// Elementwise sum. `b` may be a single row, broadcast over the rows of `a`.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let value = self.broadcast_binary("add", a, b, |x, y| x + y)?;
        self.push("add", value, Op::Add(a, b))
    }

    /// Elementwise difference, with the same broadcasting rule as [`Tape::add`].
    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let value = self.broadcast_binary("sub", a, b, |x, y| x - y)?;
        self.push("sub", value, Op::Sub(a, b))
    }

    fn broadcast_binary(&self, op: &'static str, a: Var, b: Var, f: impl Fn(T, T) -> T) -> Result<Matrix<T>, DiffError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        let (va, vb) = (self.value(a), self.value(b));
        if sa == sb {
            return Ok(zip_map(va, vb, f));
        }
        if sb.0 == 1 && sb.1 == sa.1 {
            let mut out = va.clone();
            for r in 0..out.rows() {
                for (o, &y) in out.row_mut(r).iter_mut().zip(vb.row(0)) {
                    *o = f(*o, y);
                }
            }
            return Ok(out);
        }
        Err(DiffError::ShapeMismatch { op, lhs: sa, rhs: sb })
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        check_same("mul", self.shape(a), self.shape(b))?;
        let value = zip_map(self.value(a), self.value(b), |x, y| x * y);
        self.push("mul", value, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, c: T) -> Result<Var, DiffError> {
        let value = self.value(a).map(|x| x * c);
        self.push("scale", value, Op::Scale(a, c))
    }

    /// Rows of `a` at `indices`, in order (repeats allowed).
    pub fn gather_rows(&mut self, a: Var, indices: Arc<[usize]>) -> Result<Var, DiffError> {
        let rows = self.shape(a).0;
        if let Some(&bad) = indices.iter().find(|&&i| i >= rows) {
            return Err(DiffError::Contract { op: "gather_rows", detail: format!("row {bad} >= {rows}") });
        }
        let value = self.value(a).select_rows(&indices);
        self.push("gather_rows", value, Op::GatherRows(a, indices))
    }

    /// Applies a fixed sparse operator (incidence aggregation) to the rows of `a`.
    pub fn aggregate(&mut self, a: Var, op: Arc<SparseOp<T>>) -> Result<Var, DiffError> {
        if op.in_rows() != self.shape(a).0 {
            return Err(DiffError::ShapeMismatch {
                op: "aggregate",
                lhs: (op.out_rows(), op.in_rows()),
                rhs: self.shape(a),
            });
        }
        let value = op.apply(self.value(a));
        self.push("aggregate", value, Op::Aggregate(a, op))
    }

    /// PReLU with a single learnable slope stored as a `1 x 1` value.
    pub fn prelu(&mut self, x: Var, slope: Var) -> Result<Var, DiffError> {
        check_same("prelu slope", self.shape(slope), (1, 1))?;
        let s = self.scalar(slope);
        let value = self.value(x).map(|v| if v > T::zero() { v } else { s * v });
        self.push("prelu", value, Op::Prelu(x, slope))
    }

    /// ELU with `alpha = 1`.
    pub fn elu(&mut self, x: Var) -> Result<Var, DiffError> {
        let value = self.value(x).map(|v| if v > T::zero() { v } else { v.exp_m1() });
        self.push("elu", value, Op::Elu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var, DiffError> {
        let value = self.value(x).map(stable_sigmoid);
        self.push("sigmoid", value, Op::Sigmoid(x))
    }

    pub fn exp(&mut self, x: Var) -> Result<Var, DiffError> {
        let value = self.value(x).map(T::exp);
        self.push("exp", value, Op::Exp(x))
    }

    pub fn log(&mut self, x: Var) -> Result<Var, DiffError> {
        let value = self.value(x).map(T::ln);
        self.push("log", value, Op::Log(x))
    }

    /// Scales each row to unit L2 norm, with the norm clamped below at [`NORM_EPS`].
    pub fn row_normalize(&mut self, x: Var) -> Result<Var, DiffError> {
        let eps = T::lit(NORM_EPS);
        let v = self.value(x);
        let mut out = v.clone();
        let mut norms = Vec::with_capacity(v.rows());
        for r in 0..v.rows() {
            let n = v.row(r).iter().map(|&a| a * a).sum::<T>().sqrt().max(eps);
            out.row_mut(r).iter_mut().for_each(|a| *a /= n);
            norms.push(n);
        }
        self.push("row_normalize", out, Op::RowNormalize(x, norms))
    }

    /// Per-row inner product, giving a column vector.
    pub fn row_dot(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        check_same("row_dot", self.shape(a), self.shape(b))?;
        let (va, vb) = (self.value(a), self.value(b));
        let data = (0..va.rows()).map(|r| va.row(r).iter().zip(vb.row(r)).map(|(&x, &y)| x * y).sum()).collect();
        let value = Matrix::from_vec(va.rows(), 1, data).expect("column");
        self.push("row_dot", value, Op::RowDot(a, b))
    }

    /// `zᵢᵀ S yᵢ` for every row pair.
    pub fn bilinear_rows(&mut self, z: Var, s: Var, y: Var) -> Result<Var, DiffError> {
        let zs = self.matmul(z, s)?;
        self.row_dot(zs, y)
    }

    /// Log-sum-exp over each row (max-shifted), optionally restricted to a
    /// per-row column subset. Returns a column vector.
    pub fn row_logsumexp(&mut self, a: Var, selection: Option<Arc<RowSelection>>) -> Result<Var, DiffError> {
        let v = self.value(a);
        let (rows, cols) = v.shape();
        if let Some(sel) = &selection {
            if sel.rows() != rows {
                return Err(DiffError::Contract {
                    op: "row_logsumexp",
                    detail: format!("selection has {} rows, input has {rows}", sel.rows()),
                });
            }
            for r in 0..rows {
                if sel.row(r).is_empty() || sel.row(r).iter().any(|&c| c >= cols) {
                    return Err(DiffError::Contract {
                        op: "row_logsumexp",
                        detail: format!("row {r}: empty or out-of-range column selection"),
                    });
                }
            }
        } else if cols == 0 {
            return Err(DiffError::Contract { op: "row_logsumexp", detail: "zero columns".into() });
        }
        let mut data = Vec::with_capacity(rows);
        for r in 0..rows {
            let row = v.row(r);
            let lse = match &selection {
                Some(sel) => logsumexp(sel.row(r).iter().map(|&c| row[c])),
                None => logsumexp(row.iter().copied()),
            };
            data.push(lse);
        }
        let value = Matrix::from_vec(rows, 1, data).expect("column");
        self.push("row_logsumexp", value, Op::RowLogSumExp(a, selection))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var, DiffError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.0 != sb.0 {
            return Err(DiffError::ShapeMismatch { op: "concat_cols", lhs: sa, rhs: sb });
        }
        let (va, vb) = (self.value(a), self.value(b));
        let mut data = Vec::with_capacity(sa.0 * (sa.1 + sb.1));
        for r in 0..sa.0 {
            data.extend_from_slice(va.row(r));
            data.extend_from_slice(vb.row(r));
        }
        let value = Matrix::from_vec(sa.0, sa.1 + sb.1, data).expect("concat");
        self.push("concat_cols", value, Op::ConcatCols(a, b))
    }

    /// Entries `a[r, c]` for each position, as a column vector.
    pub fn gather_elements(&mut self, a: Var, positions: Arc<[(usize, usize)]>) -> Result<Var, DiffError> {
        let (rows, cols) = self.shape(a);
        if let Some(&(r, c)) = positions.iter().find(|&&(r, c)| r >= rows || c >= cols) {
            return Err(DiffError::Contract { op: "gather_elements", detail: format!("({r}, {c}) out of range") });
        }
        let v = self.value(a);
        let data = positions.iter().map(|&(r, c)| v.get(r, c)).collect();
        let value = Matrix::from_vec(positions.len(), 1, data).expect("column");
        self.push("gather_elements", value, Op::GatherElements(a, positions))
    }

    pub fn sum(&mut self, a: Var) -> Result<Var, DiffError> {
        let value = Matrix::filled(1, 1, self.value(a).sum());
        self.push("sum", value, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Result<Var, DiffError> {
        let v = self.value(a);
        if v.is_empty() {
            return Err(DiffError::Contract { op: "mean", detail: "empty input".into() });
        }
        let value = Matrix::filled(1, 1, v.sum() / T::lit(v.len() as f64));
        self.push("mean", value, Op::Mean(a))
    }

    /// `x W + b` with `b` a bias row.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var, DiffError> {
        let xw = self.matmul(x, w)?;
        self.add(xw, b)
    }

    /// Propagates `d loss / d v` to every leaf created with [`Tape::param`].
    pub fn backward(&mut self, loss: Var) -> Result<(), DiffError> {
        if self.backward_done {
            return Err(DiffError::AlreadyBackpropagated);
        }
        if self.shape(loss) != (1, 1) {
            return Err(DiffError::NonScalarLoss(self.shape(loss)));
        }
        self.backward_done = true;
        let mut grads: Vec<Option<Matrix<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::filled(1, 1, T::one()));
        for idx in (0..=loss.0).rev() {
            if !self.nodes[idx].requires_grad {
                grads[idx] = None;
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(idx, &g, &mut grads);
            if matches!(self.nodes[idx].op, Op::Leaf) {
                grads[idx] = Some(g);
            }
        }
        self.grads = grads;
        Ok(())
    }

    fn accumulate(&self, grads: &mut [Option<Matrix<T>>], v: Var, g: Matrix<T>) {
        if !self.requires(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(existing) => existing.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    fn propagate(&self, idx: usize, g: &Matrix<T>, grads: &mut [Option<Matrix<T>>]) {
        let node = &self.nodes[idx];
        let out = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                if self.requires(*a) {
                    self.accumulate(grads, *a, g.matmul_nt(self.value(*b)));
                }
                if self.requires(*b) {
                    self.accumulate(grads, *b, self.value(*a).matmul_tn(g));
                }
            }
            Op::Transpose(a) => self.accumulate(grads, *a, g.transpose()),
            Op::Add(a, b) | Op::Sub(a, b) => {
                let sign = if matches!(node.op, Op::Sub(..)) { -T::one() } else { T::one() };
                self.accumulate(grads, *a, g.clone());
                if self.requires(*b) {
                    let mut gb = if self.shape(*b) == g.shape() { g.clone() } else { column_sums(g) };
                    gb.scale_in_place(sign);
                    self.accumulate(grads, *b, gb);
                }
            }
            Op::Mul(a, b) => {
                if self.requires(*a) {
                    self.accumulate(grads, *a, zip_map(g, self.value(*b), |x, y| x * y));
                }
                if self.requires(*b) {
                    self.accumulate(grads, *b, zip_map(g, self.value(*a), |x, y| x * y));
                }
            }
            Op::Scale(a, c) => {
                let c = *c;
                self.accumulate(grads, *a, g.map(|x| x * c));
            }
            Op::GatherRows(a, indices) => {
                let (rows, cols) = self.shape(*a);
                let mut ga = Matrix::zeros(rows, cols);
                for (k, &i) in indices.iter().enumerate() {
                    for (d, &s) in ga.row_mut(i).iter_mut().zip(g.row(k)) {
                        *d += s;
                    }
                }
                self.accumulate(grads, *a, ga);
            }
            Op::Aggregate(a, op) => self.accumulate(grads, *a, op.transpose().apply(g)),
            Op::Prelu(x, slope) => {
                let xv = self.value(*x);
                let s = self.scalar(*slope);
                if self.requires(*x) {
                    self.accumulate(grads, *x, zip_map(g, xv, |gi, xi| if xi > T::zero() { gi } else { s * gi }));
                }
                if self.requires(*slope) {
                    let gs = g
                        .as_slice()
                        .iter()
                        .zip(xv.as_slice())
                        .filter(|(_, &xi)| xi <= T::zero())
                        .map(|(&gi, &xi)| gi * xi)
                        .sum();
                    self.accumulate(grads, *slope, Matrix::filled(1, 1, gs));
                }
            }
            Op::Elu(x) => {
                let gx = zip_map(g, self.value(*x), |gi, xi| if xi > T::zero() { gi } else { gi * xi.exp() });
                self.accumulate(grads, *x, gx);
            }
            Op::Sigmoid(x) => self.accumulate(grads, *x, zip_map(g, out, |gi, y| gi * y * (T::one() - y))),
            Op::Exp(x) => self.accumulate(grads, *x, zip_map(g, out, |gi, y| gi * y)),
            Op::Log(x) => self.accumulate(grads, *x, zip_map(g, self.value(*x), |gi, xi| gi / xi)),
            Op::RowNormalize(x, norms) => {
                let eps = T::lit(NORM_EPS);
                let mut gx = g.clone();
                for (r, &n) in norms.iter().enumerate() {
                    let clamped = n <= eps;
                    let y = out.row(r);
                    let proj: T = if clamped { T::zero() } else { y.iter().zip(g.row(r)).map(|(&a, &b)| a * b).sum() };
                    for (d, (&gi, &yi)) in gx.row_mut(r).iter_mut().zip(g.row(r).iter().zip(y)) {
                        *d = (gi - yi * proj) / n;
                    }
                }
                self.accumulate(grads, *x, gx);
            }
            Op::RowDot(a, b) => {
                let scale_rows = |m: &Matrix<T>| {
                    let mut o = m.clone();
                    for r in 0..o.rows() {
                        let gr = g.get(r, 0);
                        o.row_mut(r).iter_mut().for_each(|v| *v *= gr);
                    }
                    o
                };
                if self.requires(*a) {
                    self.accumulate(grads, *a, scale_rows(self.value(*b)));
                }
                if self.requires(*b) {
                    self.accumulate(grads, *b, scale_rows(self.value(*a)));
                }
            }
            Op::RowLogSumExp(a, selection) => {
                let av = self.value(*a);
                let mut ga = Matrix::zeros(av.rows(), av.cols());
                for r in 0..av.rows() {
                    let (gr, lse) = (g.get(r, 0), out.get(r, 0));
                    let row = av.row(r);
                    let dst = ga.row_mut(r);
                    match selection {
                        Some(sel) => {
                            for &c in sel.row(r) {
                                dst[c] += gr * (row[c] - lse).exp();
                            }
                        }
                        None => {
                            for (d, &v) in dst.iter_mut().zip(row) {
                                *d = gr * (v - lse).exp();
                            }
                        }
                    }
                }
                self.accumulate(grads, *a, ga);
            }
            Op::ConcatCols(a, b) => {
                let ca = self.shape(*a).1;
                let split = |from: usize, width: usize| {
                    let mut m = Matrix::zeros(g.rows(), width);
                    for r in 0..g.rows() {
                        m.row_mut(r).copy_from_slice(&g.row(r)[from..from + width]);
                    }
                    m
                };
                if self.requires(*a) {
                    self.accumulate(grads, *a, split(0, ca));
                }
                if self.requires(*b) {
                    self.accumulate(grads, *b, split(ca, self.shape(*b).1));
                }
            }
            Op::GatherElements(a, positions) => {
                let (rows, cols) = self.shape(*a);
                let mut ga = Matrix::zeros(rows, cols);
                for (k, &(r, c)) in positions.iter().enumerate() {
                    ga.set(r, c, ga.get(r, c) + g.get(k, 0));
                }
                self.accumulate(grads, *a, ga);
            }
            Op::Sum(a) => {
                let (rows, cols) = self.shape(*a);
                self.accumulate(grads, *a, Matrix::filled(rows, cols, g.get(0, 0)));
            }
            Op::Mean(a) => {
                let (rows, cols) = self.shape(*a);
                let v = g.get(0, 0) / T::lit((rows * cols) as f64);
                self.accumulate(grads, *a, Matrix::filled(rows, cols, v));
            }
        }
    }
}

/// Max-shifted log-sum-exp of a non-empty sequence, summed in iteration order.
pub fn logsumexp<T: Real>(values: impl Iterator<Item = T> + Clone) -> T {
    let m = values.clone().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<T>().ln()
}
