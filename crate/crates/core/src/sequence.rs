//! Discrete-time causal sequences and the arithmetic the analysis is built on.
//!
//! A [`Sequence`] is a map `t -> R^d` for `t >= 0`. It is either finitely
//! supported (stored densely up to its last entry) or generated by a
//! registered family with a closed-form or bracketed tail.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative scale of the zero test used for support and sparsity.
pub const ZERO_RTOL: f64 = 1e-10;

/// A real value, optionally known only up to an interval of half-width
/// `half_width` around `value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub value: f64,
    pub half_width: f64,
}

impl Scalar {
    pub const ZERO: Scalar = Scalar { value: 0.0, half_width: 0.0 };

    pub fn exact(value: f64) -> Self {
        Scalar { value, half_width: 0.0 }
    }

    /// Interval `[lo, hi]`, stored as midpoint and half-width.
    pub fn bracket(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Scalar { value: 0.5 * (lo + hi), half_width: 0.5 * (hi - lo) }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.value + self.half_width
    }

    pub fn is_exact(&self) -> bool {
        self.half_width == 0.0
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo() - tol && x <= self.hi() + tol
    }

    pub fn scale(self, a: f64) -> Self {
        Scalar { value: a * self.value, half_width: a.abs() * self.half_width }
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar { value: self.value + rhs.value, half_width: self.half_width + rhs.half_width }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{} ± {}", self.value, self.half_width)
        }
    }
}

/// Scalar families with infinite support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Generator {
    /// `scale * ratio^t` for `t >= 0` (with `0^0 = 1`).
    Geometric { scale: f64, ratio: f64, horizon: usize },
    /// `scale / t^exponent` for `t >= 1`, and 0 at `t = 0`.
    Power { scale: f64, exponent: f64, horizon: usize },
}

impl Generator {
    fn validate(&self) -> Result<()> {
        match *self {
            Generator::Geometric { scale, ratio, .. } => {
                if !scale.is_finite() || !(0.0..1.0).contains(&ratio) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric ratio must lie in [0, 1), got {ratio}"
                    )));
                }
            }
            Generator::Power { scale, exponent, .. } => {
                if !scale.is_finite() || exponent.is_nan() || exponent <= 0.5 {
                    return Err(Error::InvalidParameter(format!(
                        "power-law exponent must exceed 1/2 for a square-summable tail, got {exponent}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        match *self {
            Generator::Geometric { horizon, .. } | Generator::Power { horizon, .. } => horizon,
        }
    }

    pub fn value(&self, t: usize) -> f64 {
        match *self {
            Generator::Geometric { scale, ratio, .. } => scale * powi_usize(ratio, t),
            Generator::Power { scale, exponent, .. } => {
                if t == 0 {
                    0.0
                } else if exponent == 1.0 {
                    scale / t as f64
                } else {
                    scale / (t as f64).powf(exponent)
                }
            }
        }
    }

    /// `sum_{t >= start} value(t)^2` as an interval.
    fn tail_energy(&self, start: usize) -> Scalar {
        match *self {
            Generator::Geometric { scale, ratio, .. } => {
                let r2 = ratio * ratio;
                Scalar::exact(scale * scale * powi_usize(r2, start) / (1.0 - r2))
            }
            Generator::Power { scale, exponent, horizon } => {
                let cut = horizon.max(start).max(1);
                let exact: f64 = (start.max(1)..cut).fold(0.0, |acc, t| acc + self.value(t).powi(2));
                // f(x) = scale^2 x^{-2p} is decreasing, so
                // int_cut^inf f <= sum_{t >= cut} f(t) <= f(cut) + int_cut^inf f.
                let two_p = 2.0 * exponent;
                let integral = scale * scale * (cut as f64).powf(1.0 - two_p) / (two_p - 1.0);
                let lo = exact + integral;
                Scalar::bracket(lo, lo + self.value(cut).powi(2))
            }
        }
    }
}

fn powi_usize(x: f64, n: usize) -> f64 {
    if n <= i32::MAX as usize {
        x.powi(n as i32)
    } else {
        x.powf(n as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Body {
    /// Row-major `len * dim` values; row `t` is the vector at time `t`.
    Finite(Vec<f64>),
    Generated(Generator),
}

/// A causal sequence `t -> R^d`, `t >= 0`. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    dim: usize,
    body: Body,
}

impl Sequence {
    /// Dense finite sequence from row-major values (`values.len()` must be a
    /// multiple of `dim`).
    pub fn finite(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not divide into rows of dim {dim}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sequence entry".into()));
        }
        let mut values = values;
        // drop exact trailing zero rows so storage length tracks the support
        while values.len() >= dim && values[values.len() - dim..].iter().all(|&v| v == 0.0) {
            values.truncate(values.len() - dim);
        }
        Ok(Sequence { dim, body: Body::Finite(values) })
    }

    /// Scalar sequence `(v_0, v_1, ...)`.
    pub fn scalar(values: Vec<f64>) -> Self {
        Self::finite(1, values).expect("finite scalar values")
    }

    /// Sparse construction from `(t, vector)` pairs; repeated times accumulate.
    pub fn from_entries(dim: usize, entries: &[(usize, Vec<f64>)]) -> Result<Self> {
        let len = entries.iter().map(|(t, _)| t + 1).max().unwrap_or(0);
        let mut values = vec![0.0; len * dim];
        for (t, v) in entries {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { left: v.len(), right: dim });
            }
            for (c, x) in v.iter().enumerate() {
                values[t * dim + c] += x;
            }
        }
        Self::finite(dim, values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::finite(dim, Vec::new()).expect("positive dim")
    }

    /// Scalar unit impulse at `t`.
    pub fn impulse(t: usize) -> Self {
        let mut v = vec![0.0; t + 1];
        v[t] = 1.0;
        Self::scalar(v)
    }

    pub fn generated(generator: Generator) -> Result<Self> {
        generator.validate()?;
        Ok(Sequence { dim: 1, body: Body::Generated(generator) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.body, Body::Finite(_))
    }

    pub fn generator(&self) -> Option<&Generator> {
        match &self.body {
            Body::Generated(g) => Some(g),
            Body::Finite(_) => None,
        }
    }

    /// Number of time steps held explicitly: the stored length for finite
    /// sequences, the evaluation horizon for generated ones.
    pub fn span(&self) -> usize {
        match &self.body {
            Body::Finite(v) => v.len() / self.dim,
            Body::Generated(g) => g.horizon(),
        }
    }

    /// Channel `c` at time `t`.
    pub fn get(&self, t: usize, c: usize) -> f64 {
        assert!(c < self.dim, "channel {c} out of range");
        match &self.body {
            Body::Finite(v) => v.get(t * self.dim + c).copied().unwrap_or(0.0),
            Body::Generated(g) => g.value(t),
        }
    }

    /// Value of a scalar sequence at `t`.
    pub fn at(&self, t: usize) -> f64 {
        self.get(t, 0)
    }

    pub fn vector_at(&self, t: usize) -> Vec<f64> {
        (0..self.dim).map(|c| self.get(t, c)).collect()
    }

    /// Euclidean magnitude `|s(t)|`.
    pub fn magnitude_at(&self, t: usize) -> f64 {
        (0..self.dim).fold(0.0, |acc, c| acc + self.get(t, c).powi(2)).sqrt()
    }

    /// Scalar values on `[0, n)`.
    pub fn values_until(&self, n: usize) -> Vec<f64> {
        (0..n).map(|t| self.at(t)).collect()
    }

    /// Restriction to `[0, n)` as a finite sequence.
    pub fn head(&self, n: usize) -> Sequence {
        let values = (0..n).flat_map(|t| self.vector_at(t)).collect();
        Sequence::finite(self.dim, values).expect("head of a valid sequence")
    }

    /// Scalar sequence holding channel `c`.
    pub fn channel(&self, c: usize) -> Result<Sequence> {
        if c >= self.dim {
            return Err(Error::DimensionMismatch { left: c, right: self.dim });
        }
        match &self.body {
            Body::Finite(_) => Sequence::finite(1, (0..self.span()).map(|t| self.get(t, c)).collect()),
            Body::Generated(_) => Ok(self.clone()),
        }
    }

    pub fn scaled(&self, a: f64) -> Sequence {
        match &self.body {
            Body::Finite(v) => Sequence::finite(self.dim, v.iter().map(|x| a * x).collect())
                .expect("scaled finite sequence"),
            Body::Generated(g) => {
                let g = match *g {
                    Generator::Geometric { scale, ratio, horizon } => {
                        Generator::Geometric { scale: a * scale, ratio, horizon }
                    }
                    Generator::Power { scale, exponent, horizon } => {
                        Generator::Power { scale: a * scale, exponent, horizon }
                    }
                };
                Sequence { dim: 1, body: Body::Generated(g) }
            }
        }
    }

    /// `sup_t |s(t)|_inf` over the explicit span.
    pub fn sup_abs(&self) -> f64 {
        (0..self.span())
            .flat_map(|t| (0..self.dim).map(move |c| (t, c)))
            .map(|(t, c)| self.get(t, c).abs())
            .fold(0.0, f64::max)
    }

    /// Magnitudes at or below this are treated as zero.
    pub fn zero_threshold(&self) -> f64 {
        ZERO_RTOL * self.sup_abs().max(1.0)
    }

    fn is_nonzero_at(&self, t: usize, thr: f64) -> bool {
        (0..self.dim).any(|c| self.get(t, c).abs() > thr)
    }

    /// Largest `t` with a nonzero entry, `None` for empty support. Generated
    /// sequences are inspected up to their horizon.
    pub fn radius(&self) -> Option<usize> {
        let thr = self.zero_threshold();
        (0..self.span()).rev().find(|&t| self.is_nonzero_at(t, thr))
    }

    /// Number of time steps whose entry exceeds `tol` in magnitude.
    pub fn sparsity(&self, tol: f64) -> usize {
        (0..self.span())
            .filter(|&t| (0..self.dim).any(|c| self.get(t, c).abs() > tol))
            .count()
    }

    /// Sparsity at the default scale-aware zero threshold.
    pub fn support_size(&self) -> usize {
        self.sparsity(self.zero_threshold())
    }

    /// `sqrt(sum_{t >= start} |s(t)|^2)`; exact for finite and geometric
    /// sequences, an interval for power laws.
    pub fn tail_norm(&self, start: usize) -> Scalar {
        match &self.body {
            Body::Finite(v) => {
                let sum: f64 = v.iter().skip(start * self.dim).fold(0.0, |acc, x| acc + x * x);
                Scalar::exact(sum.sqrt())
            }
            Body::Generated(g) => {
                let e = g.tail_energy(start);
                Scalar::bracket(e.lo().max(0.0).sqrt(), e.hi().max(0.0).sqrt())
            }
        }
    }

    pub fn norm(&self) -> Scalar {
        self.tail_norm(0)
    }

    /// `sup_{t >= start} |s(t)|`.
    pub fn tail_sup(&self, start: usize) -> f64 {
        match &self.body {
            Body::Finite(_) => (start..self.span()).map(|t| self.magnitude_at(t)).fold(0.0, f64::max),
            // both families are non-increasing in magnitude from t = 1 on
            Body::Generated(g) => match g {
                Generator::Power { .. } if start == 0 => g.value(1).abs(),
                _ => g.value(start).abs(),
            },
        }
    }

    fn finite_rows(&self) -> Result<&[f64]> {
        match &self.body {
            Body::Finite(v) => Ok(v),
            Body::Generated(_) => Err(Error::NotFinitelySupported),
        }
    }
}

/// Dilated convolution reduced over channels:
/// `(f *_d g)(t) = sum_s f(s)^T g(t - d s)`. The result is scalar.
pub fn dilated_conv(f: &Sequence, g: &Sequence, dilation: usize) -> Result<Sequence> {
    let out = conv_core(f, g, dilation)?;
    let dim = f.dim;
    let reduced = out.chunks(dim).map(|row| row.iter().sum()).collect();
    Sequence::finite(1, reduced)
}

/// Channel-wise dilated convolution, `out_c(t) = sum_s f_c(s) g_c(t - d s)`.
pub fn dilated_conv_channelwise(f: &Sequence, g: &Sequence, dilation: usize) -> Result<Sequence> {
    let out = conv_core(f, g, dilation)?;
    Sequence::finite(f.dim, out)
}

fn conv_core(f: &Sequence, g: &Sequence, dilation: usize) -> Result<Vec<f64>> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch { left: f.dim, right: g.dim });
    }
    if dilation == 0 {
        return Err(Error::InvalidDilation);
    }
    let fv = f.finite_rows()?;
    let gv = g.finite_rows()?;
    let dim = f.dim;
    let (nf, ng) = (fv.len() / dim, gv.len() / dim);
    if nf == 0 || ng == 0 {
        return Ok(Vec::new());
    }
    let len = dilation * (nf - 1) + ng;
    let mut out = vec![0.0; len * dim];
    for s in 0..nf {
        for u in 0..ng {
            let t = dilation * s + u;
            for c in 0..dim {
                out[t * dim + c] += fv[s * dim + c] * gv[u * dim + c];
            }
        }
    }
    Ok(out)
}

/// A finite window of a two-sided input signal `x: Z -> R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct InputWindow {
    start: i64,
    dim: usize,
    values: Vec<f64>,
}

impl InputWindow {
    pub fn new(start: i64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not form rows of dim {dim}",
                values.len()
            )));
        }
        Ok(InputWindow { start, dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// One past the last covered time.
    pub fn end(&self) -> i64 {
        self.start + (self.values.len() / self.dim) as i64
    }

    pub fn at(&self, t: i64) -> Option<&[f64]> {
        if t < self.start || t >= self.end() {
            return None;
        }
        let i = (t - self.start) as usize * self.dim;
        Some(&self.values[i..i + self.dim])
    }

    /// `x^(tau)(s) = x(s - tau)`.
    pub fn shifted(&self, tau: i64) -> InputWindow {
        InputWindow { start: self.start + tau, ..self.clone() }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, x| acc + x * x).sqrt()
    }
}

/// `H_t(x) = sum_{s >= 0} rho(s)^T x(t - s)` for a finitely supported
/// representation `rho`. The window must cover `[t - radius(rho), t]`.
pub fn apply_functional(rho: &Sequence, x: &InputWindow, t: i64) -> Result<Scalar> {
    if rho.dim != x.dim {
        return Err(Error::DimensionMismatch { left: rho.dim, right: x.dim });
    }
    let rows = rho.finite_rows()?;
    let dim = rho.dim;
    let mut acc = 0.0;
    for (s, r) in rows.chunks(dim).enumerate() {
        if r.iter().all(|&v| v == 0.0) {
            continue;
        }
        let ts = t - s as i64;
        let xv = x.at(ts).ok_or(Error::InsufficientWindow(ts))?;
        acc += r.iter().zip(xv).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(Scalar::exact(acc))
}

/// On-disk sequence literal.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceFile {
    Entries { dim: usize, entries: Vec<(usize, Vec<f64>)> },
    Family { family: String, params: BTreeMap<String, f64>, horizon: Option<usize> },
}

/// Horizon used for generated families when a literal omits it.
pub const DEFAULT_HORIZON: usize = 10_000;

impl SequenceFile {
    pub fn into_sequence(self) -> Result<Sequence> {
        match self {
            SequenceFile::Entries { dim, entries } => Sequence::from_entries(dim, &entries),
            SequenceFile::Family { family, params, horizon } => {
                let horizon = horizon.unwrap_or(DEFAULT_HORIZON);
                let param = |names: &[&str], default: Option<f64>| -> Result<f64> {
                    names
                        .iter()
                        .find_map(|n| params.get(*n).copied())
                        .or(default)
                        .ok_or_else(|| Error::Parse(format!("{family}: missing parameter {}", names[0])))
                };
                match family.as_str() {
                    "geometric" => Sequence::generated(Generator::Geometric {
                        scale: param(&["scale"], Some(1.0))?,
                        ratio: param(&["gamma", "ratio"], None)?,
                        horizon,
                    }),
                    "power" => Sequence::generated(Generator::Power {
                        scale: param(&["scale"], Some(1.0))?,
                        exponent: param(&["exponent", "p"], Some(1.0))?,
                        horizon,
                    }),
                    "impulse" => {
                        let at = param(&["at", "t"], None)?;
                        if at < 0.0 || at.fract() != 0.0 {
                            return Err(Error::InvalidParameter(format!("impulse position {at}")));
                        }
                        let v = param(&["value"], Some(1.0))?;
                        Ok(Sequence::impulse(at as usize).scaled(v))
                    }
                    other => Err(Error::Parse(format!("unknown sequence family {other:?}"))),
                }
            }
        }
    }

    pub fn from_sequence(seq: &Sequence) -> SequenceFile {
        match &seq.body {
            Body::Finite(_) => SequenceFile::Entries {
                dim: seq.dim,
                entries: (0..seq.span())
                    .filter(|&t| (0..seq.dim).any(|c| seq.get(t, c) != 0.0))
                    .map(|t| (t, seq.vector_at(t)))
                    .collect(),
            },
            Body::Generated(g) => {
                let (family, params, horizon) = match *g {
                    Generator::Geometric { scale, ratio, horizon } => {
                        ("geometric", [("scale", scale), ("gamma", ratio)], horizon)
                    }
                    Generator::Power { scale, exponent, horizon } => {
                        ("power", [("scale", scale), ("exponent", exponent)], horizon)
                    }
                };
                SequenceFile::Family {
                    family: family.into(),
                    params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                    horizon: Some(horizon),
                }
            }
        }
    }
}

pub fn parse_sequence_json(text: &str) -> Result<Sequence> {
    let file: SequenceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_sequence()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_conv(f: &[f64], g: &[f64], d: usize) -> Vec<f64> {
        let len = d * (f.len() - 1) + g.len();
        (0..len)
            .map(|t| {
                (0..f.len())
                    .filter(|&s| t >= d * s && t - d * s < g.len())
                    .map(|s| f[s] * g[t - d * s])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn conv_small_example() {
        let out = dilated_conv(&Sequence::scalar(vec![3.0, 4.0]), &Sequence::scalar(vec![1.0, 2.0]), 2).unwrap();
        assert_eq!(out.values_until(4), vec![3.0, 6.0, 4.0, 8.0]);
        assert_eq!(brute_conv(&[3.0, 4.0], &[1.0, 2.0], 2), vec![3.0, 6.0, 4.0, 8.0]);
    }

    #[test]
    fn conv_with_unit_impulse_is_identity() {
        let g = Sequence::scalar(vec![0.5, -1.0, 0.0, 2.0]);
        for d in 1..5 {
            assert_eq!(dilated_conv(&Sequence::impulse(0), &g, d).unwrap(), g);
        }
    }

    #[test]
    fn one_hot_chain_hits_nineteen() {
        let w1 = Sequence::scalar(vec![0.0, 0.0, 0.0, 1.0]);
        let w2 = Sequence::scalar(vec![1.0, 0.0, 0.0, 0.0]);
        let w3 = Sequence::scalar(vec![0.0, 1.0, 0.0, 0.0]);
        let inner = dilated_conv(&w2, &w1, 4).unwrap();
        let out = dilated_conv(&w3, &inner, 16).unwrap();
        assert_eq!(out, Sequence::impulse(19));
    }

    #[test]
    fn conv_errors() {
        let a = Sequence::scalar(vec![1.0]);
        let b = Sequence::finite(2, vec![1.0, 1.0]).unwrap();
        assert!(matches!(dilated_conv(&a, &b, 1), Err(Error::DimensionMismatch { .. })));
        assert_eq!(dilated_conv(&a, &a, 0), Err(Error::InvalidDilation));
        let g = Sequence::generated(Generator::Geometric { scale: 1.0, ratio: 0.5, horizon: 10 }).unwrap();
        assert_eq!(dilated_conv(&a, &g, 1), Err(Error::NotFinitelySupported));
    }

    #[test]
    fn channelwise_conv_keeps_dim() {
        let f = Sequence::finite(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = Sequence::finite(2, vec![1.0, -1.0]).unwrap();
        let cw = dilated_conv_channelwise(&f, &g, 3).unwrap();
        assert_eq!(cw.dim(), 2);
        assert_eq!(cw.vector_at(0), vec![1.0, -2.0]);
        assert_eq!(cw.vector_at(3), vec![3.0, -4.0]);
        let red = dilated_conv(&f, &g, 3).unwrap();
        assert_eq!(red.values_until(4), vec![-1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn radius_and_sparsity() {
        assert_eq!(Sequence::scalar(vec![1.0, 0.0, 0.0, 1.0]).radius(), Some(3));
        assert_eq!(Sequence::zeros(1).radius(), None);
        assert_eq!(Sequence::scalar(vec![0.0, 0.0]).radius(), None);
        assert_eq!(Sequence::scalar(vec![1.0, 0.0, 1.0, 0.0]).sparsity(0.0), 2);
        assert_eq!(Sequence::zeros(1).sparsity(0.0), 0);
        // scale-aware: tiny entries next to large ones are zero
        let s = Sequence::scalar(vec![1e6, 1e-6]);
        assert_eq!(s.radius(), Some(0));
    }

    #[test]
    fn tail_norms() {
        let s = Sequence::scalar(vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(s.tail_norm(2), Scalar::exact(1.0));
        assert_eq!(s.tail_norm(4), Scalar::exact(0.0));
        assert_eq!(s.tail_norm(100), Scalar::exact(0.0));

        let g = Sequence::generated(Generator::Geometric { scale: 1.0, ratio: 0.5, horizon: 200 }).unwrap();
        let closed = g.tail_norm(4);
        assert!(closed.is_exact());
        assert!((closed.value - 0.072_168_783_648_703_22).abs() < 1e-15);
        let summed: f64 = (4..200).map(|t| 0.5f64.powi(2 * t)).sum::<f64>().sqrt();
        assert!((closed.value - summed).abs() < 1e-15);
    }

    #[test]
    fn power_law_tail_brackets_truth() {
        let p = Sequence::generated(Generator::Power { scale: 1.0, exponent: 1.0, horizon: 1000 }).unwrap();
        // sum_{t>=1} 1/t^2 = pi^2/6
        let full = p.norm();
        let truth = (std::f64::consts::PI.powi(2) / 6.0).sqrt();
        assert!(full.contains(truth, 0.0), "{full} vs {truth}");
        assert!(full.half_width < 1e-6);
        // start beyond the horizon still brackets
        let tail = p.tail_norm(5000);
        let tail_truth: f64 = (5000..2_000_000).map(|t| 1.0 / (t as f64).powi(2)).sum::<f64>() + 1.0 / 2_000_000.0;
        assert!(tail.contains(tail_truth.sqrt(), 1e-9));
    }

    #[test]
    fn generator_validation() {
        assert!(Sequence::generated(Generator::Geometric { scale: 1.0, ratio: 1.0, horizon: 1 }).is_err());
        assert!(Sequence::generated(Generator::Power { scale: 1.0, exponent: 0.5, horizon: 1 }).is_err());
        let z = Sequence::generated(Generator::Geometric { scale: 1.0, ratio: 0.0, horizon: 5 }).unwrap();
        assert_eq!(z.values_until(3), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn functional_shift_and_constant_input() {
        let rho = Sequence::impulse(5);
        let x = InputWindow::new(-10, 1, (0..30).map(|i| i as f64).collect()).unwrap();
        assert_eq!(apply_functional(&rho, &x, 7).unwrap().value, x.at(2).unwrap()[0]);

        let alpha = 0.25;
        let rho = Sequence::scalar(vec![alpha; 8]);
        let ones = InputWindow::new(0, 1, vec![1.0; 8]).unwrap();
        assert_eq!(apply_functional(&rho, &ones, 7).unwrap().value, alpha * 8.0);
        assert_eq!(apply_functional(&rho, &ones, 6), Err(Error::InsufficientWindow(-1)));
    }

    #[test]
    fn sequence_file_formats() {
        let s = parse_sequence_json(r#"{"dim": 2, "entries": [[0, [1, 2]], [3, [0, -1]]]}"#).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.radius(), Some(3));
        let g = parse_sequence_json(r#"{"family": "geometric", "params": {"gamma": 0.5}, "horizon": 50}"#).unwrap();
        assert_eq!(g.at(3), 0.125);
        let i = parse_sequence_json(r#"{"family": "impulse", "params": {"at": 7}}"#).unwrap();
        assert_eq!(i, Sequence::impulse(7));
        assert!(parse_sequence_json(r#"{"family": "bogus", "params": {}}"#).is_err());
        let back = SequenceFile::from_sequence(&s).into_sequence().unwrap();
        assert_eq!(back, s);
    }
}
