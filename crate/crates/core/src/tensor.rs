//! Tensorisation of representations, mode flattenings and the pooled HOSVD
//! spectrum.
//!
//! Tensors are stored densely with mode 0 varying fastest. Multi-indices are
//! 0-based throughout the API; mode `k` here is mode `k + 1` in the usual
//! 1-based notation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{left_singular, Matrix};
use crate::sequence::{Scalar, Sequence};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor { shape: shape.to_vec(), data: vec![0.0; shape.iter().product()] }
    }

    /// Build from a function of the (0-based) multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Tensor::zeros(shape);
        let mut idx = vec![0; shape.len()];
        for lin in 0..t.data.len() {
            t.data[lin] = f(&idx);
            increment(&mut idx, shape);
        }
        t
    }

    pub fn from_data(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let size: usize = shape.iter().product();
        if shape.is_empty() || data.len() != size {
            return Err(Error::ShapeMismatch(format!("{} values for shape {shape:?}", data.len())));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    /// `T_{l^K}(rho)`: the order-`order` tensor with all modes of length `l`
    /// whose last-mode flattening is the row-major `l x l^{K-1}` arrangement
    /// of `rho` on `[0, l^K - 1]`.
    pub fn tensorize(rho: &Sequence, l: usize, order: usize) -> Result<Tensor> {
        if rho.dim() != 1 {
            return Err(Error::NotScalar(rho.dim()));
        }
        check_l_order(l, order)?;
        let n = checked_pow(l, order)?;
        if !rho.is_finite() {
            return Err(Error::NotFinitelySupported);
        }
        if let Some(r) = rho.radius() {
            if r >= n {
                return Err(Error::SupportExceedsReceptiveField { radius: r, limit: n - 1 });
            }
        }
        let a = rho.values_until(n);
        let cols = n / l;
        let shape = vec![l; order];
        let last = order - 1;
        Ok(Tensor::from_fn(&shape, |idx| {
            let j = flatten_column(idx, &shape, last);
            a[idx[last] * cols + j]
        }))
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Values in canonical (mode-0 fastest) order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    fn linear_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len(), "multi-index order");
        let mut lin = 0;
        let mut stride = 1;
        for (i, n) in idx.iter().zip(&self.shape) {
            assert!(i < n, "index out of bounds");
            lin += i * stride;
            stride *= n;
        }
        lin
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc + x * x).sqrt()
    }

    /// Mode-`mode` flattening: element `idx` goes to row `idx[mode]`, column
    /// `sum_{s != mode} idx[s] * prod_{s' < s, s' != mode} I_{s'}`.
    pub fn mode_flatten(&self, mode: usize) -> Result<Matrix> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange { mode, order: self.order() });
        }
        let rows = self.shape[mode];
        let cols = self.data.len() / rows;
        let mut m = Matrix::zeros(rows, cols);
        let mut idx = vec![0; self.order()];
        for &v in &self.data {
            m.set(idx[mode], flatten_column(&idx, &self.shape, mode), v);
            increment(&mut idx, &self.shape);
        }
        Ok(m)
    }

    /// Pooled singular values of every mode flattening. Each mode contributes
    /// `I_k` values (zero-padded when the flattening has fewer columns).
    pub fn singular_values(&self) -> Spectrum {
        let entries = (0..self.order())
            .flat_map(|k| {
                let (vals, _) = left_singular(&self.mode_flatten(k).expect("mode in range"));
                vals.into_iter().map(move |value| SpectrumEntry { value, mode: k })
            })
            .collect();
        Spectrum::from_entries(entries)
    }

    /// Per-mode left singular bases (columns) and singular values.
    pub fn mode_bases(&self) -> Vec<(Vec<f64>, Matrix)> {
        (0..self.order())
            .map(|k| left_singular(&self.mode_flatten(k).expect("mode in range")))
            .collect()
    }

    /// `self x_mode B^T`: contracts mode `mode` (length `I`) with the columns
    /// of `basis` (`I x r`), giving a tensor whose mode `mode` has length `r`.
    pub fn contract_mode(&self, mode: usize, basis: &Matrix) -> Result<Tensor> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange { mode, order: self.order() });
        }
        if basis.rows() != self.shape[mode] {
            return Err(Error::ShapeMismatch(format!(
                "basis has {} rows, mode {mode} has length {}",
                basis.rows(),
                self.shape[mode]
            )));
        }
        let mut shape = self.shape.clone();
        shape[mode] = basis.cols();
        Ok(Tensor::from_fn(&shape, |idx| {
            let mut src = idx.to_vec();
            (0..self.shape[mode])
                .map(|i| {
                    src[mode] = i;
                    basis.get(i, idx[mode]) * self.get(&src)
                })
                .sum()
        }))
    }

    pub fn rank(&self, rtol: f64) -> usize {
        self.singular_values().rank(rtol)
    }

    /// One line per entry: 1-based multi-index followed by the value.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.order()).map(|k| format!("i{k}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",value\n");
        let mut idx = vec![0; self.order()];
        for v in &self.data {
            for i in &idx {
                out.push_str(&(i + 1).to_string());
                out.push(',');
            }
            out.push_str(&v.to_string());
            out.push('\n');
            increment(&mut idx, &self.shape);
        }
        out
    }
}

fn flatten_column(idx: &[usize], shape: &[usize], mode: usize) -> usize {
    let mut j = 0;
    let mut stride = 1;
    for s in 0..shape.len() {
        if s == mode {
            continue;
        }
        j += idx[s] * stride;
        stride *= shape[s];
    }
    j
}

/// Odometer increment with mode 0 fastest.
fn increment(idx: &mut [usize], shape: &[usize]) {
    for (i, n) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < *n {
            return;
        }
        *i = 0;
    }
}

fn check_l_order(l: usize, order: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("mode length l must be >= 2, got {l}")));
    }
    if order < 1 {
        return Err(Error::InvalidParameter("tensor order must be >= 1".into()));
    }
    Ok(())
}

pub(crate) fn checked_pow(l: usize, k: usize) -> Result<usize> {
    u32::try_from(k)
        .ok()
        .and_then(|k| l.checked_pow(k))
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| Error::InvalidParameter(format!("l^K = {l}^{k} is too large")))
}

/// `w_0 (x) w_1 (x) ... (x) w_{K-1}`: entry `idx` is `prod_k vs[k][idx[k]]`.
pub fn outer_product(vs: &[Vec<f64>]) -> Result<Tensor> {
    let first = vs.first().ok_or_else(|| Error::InvalidParameter("no factors".into()))?;
    if let Some(bad) = vs.iter().find(|v| v.len() != first.len()) {
        return Err(Error::DimensionMismatch { left: bad.len(), right: first.len() });
    }
    let shape: Vec<usize> = vs.iter().map(Vec::len).collect();
    Ok(Tensor::from_fn(&shape, |idx| idx.iter().zip(vs).map(|(&i, v)| v[i]).product()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub value: f64,
    /// 0-based mode this value came from.
    pub mode: usize,
}

/// Pooled singular values, sorted descending (ties by mode).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    pub fn from_entries(mut entries: Vec<SpectrumEntry>) -> Self {
        entries.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.mode.cmp(&b.mode)));
        Spectrum { entries }
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.entries.first().map_or(0.0, |e| e.value)
    }

    /// Values of one mode, descending.
    pub fn mode_values(&self, mode: usize) -> Vec<f64> {
        self.entries.iter().filter(|e| e.mode == mode).map(|e| e.value).collect()
    }

    /// Number of entries above `rtol * max`; 0 for an all-zero spectrum.
    pub fn rank(&self, rtol: f64) -> usize {
        let max = self.max();
        if max == 0.0 {
            return 0;
        }
        self.entries.iter().filter(|e| e.value > rtol * max).count()
    }

    /// `sum_{i >= from} sigma_i^2` over the sorted list (0-based `from`).
    pub fn tail_energy(&self, from: usize) -> f64 {
        self.entries.iter().skip(from).fold(0.0, |acc, e| acc + e.value * e.value)
    }
}

/// Default relative tolerance for counting nonzero singular values.
pub const RANK_RTOL: f64 = 1e-8;

pub fn tensor_rank(t: &Tensor, rtol: f64) -> usize {
    t.rank(rtol)
}

/// `sqrt(sum_{i > kept} sigma_i^2)` over the pooled sorted spectrum. A
/// budget at or beyond the rank gives 0.
pub fn truncation_error_bound(spectrum: &Spectrum, kept_rank: usize) -> Scalar {
    Scalar::exact(spectrum.tail_energy(kept_rank).sqrt())
}

/// Tail of a single mode's singular values past `kept`. At order 2 this is
/// the exact best rank-`kept` matrix approximation error.
pub fn mode_truncation_error(spectrum: &Spectrum, mode: usize, kept: usize) -> f64 {
    spectrum.mode_values(mode).iter().skip(kept).fold(0.0, |acc, v| acc + v * v).sqrt()
}
