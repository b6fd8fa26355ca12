//! The two linear hypothesis classes: dilated CNNs and RNNs.
//!
//! A [`CnnSpec`] has `K` layers; layer `k` convolves with dilation `l^k`, so
//! its induced representation lives on `[0, l^K - 1]`. An [`RnnSpec`]
//! induces the power-sum representation `rho(s) = c^T W^{s-1} U`, `s >= 1`.

use std::collections::BTreeMap;
use std::fmt;

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sequence::{InputWindow, Scalar, Sequence};
use crate::tensor::{checked_pow, Tensor};

/// Identifies the filter from in-channel `from` at layer `layer` to
/// out-channel `to` at layer `layer + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FilterKey {
    pub layer: usize,
    pub from: usize,
    pub to: usize,
}

impl fmt::Display for FilterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.layer, self.from, self.to)
    }
}

impl std::str::FromStr for FilterKey {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("filter key {s:?}: {e}")))?;
        match parts[..] {
            [layer, from, to] => Ok(FilterKey { layer, from, to }),
            _ => Err(Error::Parse(format!("filter key {s:?} must be \"k,j,i\""))),
        }
    }
}

/// Linear dilated CNN. `channels[k]` is the channel count feeding layer `k`
/// (`channels[0] = d`); the last layer writes a single output channel.
/// Filters not present in the map are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CnnSpec {
    filter_len: usize,
    depth: usize,
    channels: Vec<usize>,
    filters: BTreeMap<FilterKey, Vec<f64>>,
}

impl CnnSpec {
    pub fn new(
        filter_len: usize,
        depth: usize,
        channels: Vec<usize>,
        filters: BTreeMap<FilterKey, Vec<f64>>,
    ) -> Result<Self> {
        if filter_len < 2 {
            return Err(Error::InvalidParameter(format!("filter size must be >= 2, got {filter_len}")));
        }
        if depth < 1 {
            return Err(Error::InvalidParameter("depth must be >= 1".into()));
        }
        checked_pow(filter_len, depth)?;
        if channels.len() != depth || channels.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "expected {depth} positive channel counts (input + hidden), got {channels:?}"
            )));
        }
        let spec = CnnSpec { filter_len, depth, channels, filters };
        for (key, w) in &spec.filters {
            if key.layer >= depth || key.from >= spec.channels[key.layer] || key.to >= spec.out_channels(key.layer) {
                return Err(Error::InvalidParameter(format!("filter {key} outside the channel layout")));
            }
            if w.len() != filter_len {
                return Err(Error::DimensionMismatch { left: w.len(), right: filter_len });
            }
        }
        Ok(spec)
    }

    /// A single-channel chain; `filters[k]` sits at layer `k`.
    pub fn chain(filters: &[Vec<f64>]) -> Result<Self> {
        let l = filters.first().map_or(0, Vec::len);
        let map = filters
            .iter()
            .enumerate()
            .map(|(k, w)| (FilterKey { layer: k, from: 0, to: 0 }, w.clone()))
            .collect();
        CnnSpec::new(l, filters.len(), vec![1; filters.len()], map)
    }

    /// All-zero network.
    pub fn zero(filter_len: usize, depth: usize, input_dim: usize) -> Result<Self> {
        let mut channels = vec![1; depth];
        channels[0] = input_dim;
        CnnSpec::new(filter_len, depth, channels, BTreeMap::new())
    }

    pub fn filter_len(&self) -> usize {
        self.filter_len
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn input_dim(&self) -> usize {
        self.channels[0]
    }

    /// Input and hidden channel counts `M_0..M_{K-1}`.
    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    /// Channel counts `M_1..M_K` (hidden layers and the single output).
    pub fn channel_counts(&self) -> Vec<usize> {
        self.channels[1..].iter().copied().chain(std::iter::once(1)).collect()
    }

    pub fn filters(&self) -> &BTreeMap<FilterKey, Vec<f64>> {
        &self.filters
    }

    pub fn filter(&self, layer: usize, from: usize, to: usize) -> Option<&[f64]> {
        self.filters.get(&FilterKey { layer, from, to }).map(Vec::as_slice)
    }

    /// Number of stored filters that are not identically zero.
    pub fn filter_count(&self) -> usize {
        self.filters.values().filter(|w| w.iter().any(|&x| x != 0.0)).count()
    }

    pub fn receptive_field(&self) -> usize {
        checked_pow(self.filter_len, self.depth).expect("validated at construction")
    }

    fn out_channels(&self, layer: usize) -> usize {
        if layer + 1 == self.depth {
            1
        } else {
            self.channels[layer + 1]
        }
    }

    pub fn effective_filters(&self) -> EffectiveFilters {
        effective_filters(&self.channel_counts(), self.filter_len, self.input_dim())
    }

    /// Propagate one buffer per channel through every layer.
    fn propagate(&self, mut h: Vec<Vec<f64>>, offset_len: impl Fn(usize) -> usize) -> Vec<f64> {
        let l = self.filter_len;
        let mut dilation = 1;
        for k in 0..self.depth {
            let len = offset_len(k);
            let mut next = vec![vec![0.0; len]; self.out_channels(k)];
            for (key, w) in self.filters.range(
                FilterKey { layer: k, from: 0, to: 0 }..=FilterKey { layer: k, from: usize::MAX, to: usize::MAX },
            ) {
                let src = &h[key.from];
                let dst = &mut next[key.to];
                for (s, &ws) in w.iter().enumerate() {
                    if ws == 0.0 {
                        continue;
                    }
                    let shift = dilation * s;
                    for (u, &x) in src.iter().enumerate() {
                        if let Some(d) = dst.get_mut(u + shift) {
                            *d += ws * x;
                        }
                    }
                }
            }
            h = next;
            dilation *= l;
        }
        h.pop().expect("single output channel")
    }

    /// The induced representation: the response to a unit impulse on each
    /// input channel, evaluated layer by layer.
    pub fn representation(&self) -> Sequence {
        let d = self.input_dim();
        let l = self.filter_len;
        let n = self.receptive_field();
        let mut rows = vec![0.0; n * d];
        for c in 0..d {
            let mut h = vec![Vec::new(); d];
            h[c] = vec![1.0];
            // after layer k the support is [0, l^{k+1} - 1]
            let out = self.propagate(h, |k| l.pow(k as u32 + 1));
            for (t, v) in out.into_iter().enumerate() {
                rows[t * d + c] = v;
            }
        }
        Sequence::finite(d, rows).expect("representation rows")
    }

    /// Run the network on an input window, returning `y(t)` for every `t`
    /// the window fully determines (i.e. `t >= start + l^K - 1`).
    pub fn forward(&self, x: &InputWindow) -> Result<Vec<(i64, f64)>> {
        let d = self.input_dim();
        if x.dim() != d {
            return Err(Error::DimensionMismatch { left: x.dim(), right: d });
        }
        let len = (x.end() - x.start()) as usize;
        let h: Vec<Vec<f64>> =
            (0..d).map(|c| (x.start()..x.end()).map(|t| x.at(t).expect("in window")[c]).collect()).collect();
        let out = self.propagate(h, |_| len);
        let warmup = self.receptive_field() - 1;
        Ok(out
            .into_iter()
            .enumerate()
            .skip(warmup)
            .map(|(i, y)| (x.start() + i as i64, y))
            .collect())
    }
}

/// `M = (sum_{k=2}^K M_k M_{k-1} - l K) / d`, kept as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveFilters {
    pub numerator: i64,
    pub denominator: u64,
}

impl EffectiveFilters {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Integer rank budget `floor(K * M^{1/K})`, computed exactly.
    pub fn rank_budget(&self, depth: usize) -> usize {
        rank_budget(self.numerator, self.denominator, depth)
    }
}

impl fmt::Display for EffectiveFilters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

/// Effective number of filters for channel counts `M_1..M_K`, filter size
/// `l` and input dimension `d`. Depth 1 has no channel pairs and yields 0.
pub fn effective_filters(channel_counts: &[usize], l: usize, d: usize) -> EffectiveFilters {
    let depth = channel_counts.len();
    if depth < 2 {
        debug!("effective filter count for depth {depth} taken as 0");
        return EffectiveFilters { numerator: 0, denominator: d.max(1) as u64 };
    }
    let pairs: i64 = channel_counts.windows(2).map(|w| (w[0] * w[1]) as i64).sum();
    EffectiveFilters { numerator: pairs - (l * depth) as i64, denominator: d.max(1) as u64 }
}

/// Largest integer `r` with `r <= K (num/den)^{1/K}`, i.e. `r^K den <= num K^K`.
pub fn rank_budget(num: i64, den: u64, depth: usize) -> usize {
    if num <= 0 || depth == 0 {
        return 0;
    }
    let k = depth as u32;
    let fits = |r: u128| -> bool {
        let lhs = r.checked_pow(k).and_then(|p| p.checked_mul(den as u128));
        let rhs = (depth as u128).checked_pow(k).and_then(|p| p.checked_mul(num as u128));
        match (lhs, rhs) {
            (Some(a), Some(b)) => a <= b,
            _ => (r as f64).powi(k as i32) * den as f64 <= num as f64 * (depth as f64).powi(k as i32),
        }
    };
    let guess = depth as f64 * (num as f64 / den as f64).powf(1.0 / depth as f64);
    let mut r = guess.floor().max(0.0) as u128;
    while r > 0 && !fits(r) {
        r -= 1;
    }
    while fits(r + 1) {
        r += 1;
    }
    r as usize
}

fn base_digits(mut t: usize, l: usize, depth: usize) -> Vec<usize> {
    (0..depth)
        .map(|_| {
            let d = t % l;
            t /= l;
            d
        })
        .collect()
}

/// Smallest `K >= 1` with `l^K > radius`.
pub fn coverage_depth(radius: usize, l: usize) -> usize {
    let mut k = 1;
    let mut n = l;
    while n <= radius {
        k += 1;
        n *= l;
    }
    k
}

/// Assemble parallel single-channel paths into one network. `paths[p][k]`
/// is the layer-`k` filter of path `p`.
fn paths_to_spec(l: usize, depth: usize, paths: &[Vec<Vec<f64>>]) -> Result<CnnSpec> {
    if paths.is_empty() {
        return CnnSpec::zero(l, depth, 1);
    }
    let mut filters: BTreeMap<FilterKey, Vec<f64>> = BTreeMap::new();
    if depth == 1 {
        let mut w = vec![0.0; l];
        for p in paths {
            for (a, b) in w.iter_mut().zip(&p[0]) {
                *a += b;
            }
        }
        filters.insert(FilterKey { layer: 0, from: 0, to: 0 }, w);
        return CnnSpec::new(l, 1, vec![1], filters);
    }
    let width = paths.len();
    for (p, path) in paths.iter().enumerate() {
        for (k, w) in path.iter().enumerate() {
            let from = if k == 0 { 0 } else { p };
            let to = if k + 1 == depth { 0 } else { p };
            filters.insert(FilterKey { layer: k, from, to }, w.clone());
        }
    }
    let mut channels = vec![width; depth];
    channels[0] = 1;
    CnnSpec::new(l, depth, channels, filters)
}

/// Exact realisation of a finitely supported scalar target by one-hot
/// filters reading the base-`l` digits of each nonzero position. Uses at most
/// `K * sparsity(target)` filters.
pub fn synthesize_radix(target: &Sequence, l: usize) -> Result<CnnSpec> {
    if target.dim() != 1 {
        return Err(Error::NotScalar(target.dim()));
    }
    if !target.is_finite() {
        return Err(Error::NotFinitelySupported);
    }
    if l < 2 {
        return Err(Error::InvalidParameter(format!("filter size must be >= 2, got {l}")));
    }
    let Some(radius) = target.radius() else {
        return CnnSpec::zero(l, 1, 1);
    };
    let depth = coverage_depth(radius, l);
    let thr = target.zero_threshold();
    let paths: Vec<Vec<Vec<f64>>> = (0..=radius)
        .filter(|&t| target.at(t).abs() > thr)
        .map(|t| {
            base_digits(t, l, depth)
                .into_iter()
                .enumerate()
                .map(|(k, digit)| {
                    let mut w = vec![0.0; l];
                    w[digit] = if k == 0 { target.at(t) } else { 1.0 };
                    w
                })
                .collect()
        })
        .collect();
    paths_to_spec(l, depth, &paths)
}

/// Exact realisation of a target on `[0, l^K - 1]` from the HOSVD of its
/// tensorisation: one single-channel path per retained core entry, each
/// path carrying the factor vectors with the core value folded into its
/// first-layer filter.
pub fn synthesize_lowrank(target: &Sequence, l: usize, depth: usize) -> Result<CnnSpec> {
    let t = Tensor::tensorize(target, l, depth)?;
    let norm = t.norm();
    if norm == 0.0 {
        return CnnSpec::zero(l, depth, 1);
    }
    let cut = 1e-12 * norm;
    let bases: Vec<Matrix> = t
        .mode_bases()
        .into_iter()
        .map(|(vals, u)| {
            let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > cut).collect();
            let mut b = Matrix::zeros(u.rows(), keep.len());
            for (dst, &src) in keep.iter().enumerate() {
                for r in 0..u.rows() {
                    b.set(r, dst, u.get(r, src));
                }
            }
            b
        })
        .collect();
    let mut core = t;
    for (k, b) in bases.iter().enumerate() {
        core = core.contract_mode(k, b)?;
    }
    let mut paths = Vec::new();
    let shape = core.shape().to_vec();
    let mut idx = vec![0usize; depth];
    for &s in core.data() {
        if s.abs() > cut {
            let path = (0..depth)
                .map(|k| {
                    let scale = if k == 0 { s } else { 1.0 };
                    (0..l).map(|r| scale * bases[k].get(r, idx[k])).collect()
                })
                .collect();
            paths.push(path);
        }
        for (i, n) in idx.iter_mut().zip(&shape) {
            *i += 1;
            if *i < *n {
                break;
            }
            *i = 0;
        }
    }
    paths_to_spec(l, depth, &paths)
}

/// Linear RNN `h(t+1) = W h(t) + U x(t)`, `y(t) = c^T h(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnSpec {
    c: DVector<f64>,
    w: DMatrix<f64>,
    u: DMatrix<f64>,
}

impl RnnSpec {
    pub fn new(c: Vec<f64>, w: Vec<Vec<f64>>, u: Vec<Vec<f64>>) -> Result<Self> {
        let m = c.len();
        if m == 0 {
            return Err(Error::InvalidParameter("RNN width must be >= 1".into()));
        }
        if w.len() != m || w.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch(format!("W must be {m}x{m}")));
        }
        let d = u.first().map_or(0, Vec::len);
        if u.len() != m || d == 0 || u.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(format!("U must be {m}xd with d >= 1")));
        }
        Ok(RnnSpec {
            c: DVector::from_vec(c),
            w: DMatrix::from_row_iterator(m, m, w.into_iter().flatten()),
            u: DMatrix::from_row_iterator(m, d, u.into_iter().flatten()),
        })
    }

    pub fn width(&self) -> usize {
        self.c.len()
    }

    pub fn input_dim(&self) -> usize {
        self.u.ncols()
    }

    pub fn readout(&self) -> Vec<f64> {
        self.c.iter().copied().collect()
    }

    pub fn transition(&self) -> Vec<Vec<f64>> {
        self.w.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn input_map(&self) -> Vec<Vec<f64>> {
        self.u.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.w.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `rho(s) = c^T W^{s-1} U` for `1 <= s <= horizon`, `rho(0) = 0`.
    pub fn representation(&self, horizon: usize) -> Sequence {
        let d = self.input_dim();
        let mut rows = vec![0.0; (horizon + 1) * d];
        let mut r = self.c.transpose();
        for s in 1..=horizon {
            let y = &r * &self.u;
            rows[s * d..(s + 1) * d].copy_from_slice(y.as_slice());
            r = &r * &self.w;
        }
        Sequence::finite(d, rows).expect("rnn representation rows")
    }

    /// `sqrt(sum_{s >= start} |c^T W^{s-1} U|^2)` in closed form via the
    /// Stein equation `X = W^T X W + q q^T`. Needs spectral radius < 1.
    pub fn tail_norm(&self, start: usize) -> Result<Scalar> {
        let rho = self.spectral_radius();
        if rho >= 1.0 {
            return Err(Error::Unstable(rho));
        }
        let m = self.width();
        let start = start.max(1);
        let mut q = self.c.clone();
        for _ in 1..start {
            q = self.w.transpose() * q;
        }
        // vec(X) = (I - W^T (x) W^T)^{-1} vec(q q^T)
        let wt = self.w.transpose();
        let lhs = DMatrix::<f64>::identity(m * m, m * m) - wt.kronecker(&wt);
        let qq = &q * q.transpose();
        let rhs = DVector::from_column_slice(qq.as_slice());
        let x = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidParameter("singular Stein system".into()))?;
        let x = DMatrix::from_column_slice(m, m, x.as_slice());
        let energy = (self.u.transpose() * x * &self.u).trace();
        Ok(Scalar::exact(energy.max(0.0).sqrt()))
    }
}

/// `2 m sup / t`, the step bound for an `m`-term power sum.
pub fn power_sum_delta_bound(m_terms: usize, t: usize, sup_val: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("power-sum step bound needs t >= 1".into()));
    }
    if m_terms == 0 || sup_val < 0.0 {
        return Err(Error::InvalidParameter("need m >= 1 and sup >= 0".into()));
    }
    Ok(2.0 * m_terms as f64 * sup_val / t as f64)
}

/// Smallest width `m` with `m^2 > 2^{K-1} (1 - 2 eps) / (1 + eps)`.
pub fn rnn_min_width_impulse(depth: usize, eps: f64) -> Result<usize> {
    if depth == 0 {
        return Err(Error::InvalidParameter("K must be >= 1".into()));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if eps >= 0.5 {
        return Err(Error::VacuousBound(format!("eps = {eps} >= 1/2 gives no width constraint")));
    }
    let threshold = 2f64.powi(depth as i32 - 1) * (1.0 - 2.0 * eps) / (1.0 + eps);
    let mut m = threshold.sqrt().floor().max(1.0) as usize;
    while m > 1 && ((m - 1) as f64).powi(2) > threshold {
        m -= 1;
    }
    while (m as f64).powi(2) <= threshold {
        m += 1;
    }
    Ok(m)
}

/// Smallest depth `K >= 1` with `l^K >= ln(eps) / ln(gamma)`.
pub fn cnn_min_depth_expdecay(gamma: f64, eps: f64, l: usize) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    if l < 2 {
        return Err(Error::InvalidParameter(format!("filter size must be >= 2, got {l}")));
    }
    let ratio = eps.ln() / gamma.ln();
    let mut k = 1;
    let mut n = l as f64;
    while n < ratio * (1.0 - 1e-12) {
        k += 1;
        n *= l as f64;
    }
    Ok(k)
}

/// JSON shape of a [`CnnSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CnnSpecFile {
    pub l: usize,
    #[serde(rename = "K")]
    pub depth: usize,
    pub channels: Vec<usize>,
    pub filters: BTreeMap<String, Vec<f64>>,
}

impl From<&CnnSpec> for CnnSpecFile {
    fn from(s: &CnnSpec) -> Self {
        CnnSpecFile {
            l: s.filter_len,
            depth: s.depth,
            channels: s.channels.clone(),
            filters: s.filters.iter().map(|(k, w)| (k.to_string(), w.clone())).collect(),
        }
    }
}

impl TryFrom<CnnSpecFile> for CnnSpec {
    type Error = Error;
    fn try_from(f: CnnSpecFile) -> Result<Self> {
        let filters = f
            .filters
            .into_iter()
            .map(|(k, w)| Ok((k.parse::<FilterKey>()?, w)))
            .collect::<Result<_>>()?;
        CnnSpec::new(f.l, f.depth, f.channels, filters)
    }
}

/// JSON shape of an [`RnnSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RnnSpecFile {
    pub m: usize,
    pub c: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
}

impl From<&RnnSpec> for RnnSpecFile {
    fn from(s: &RnnSpec) -> Self {
        RnnSpecFile { m: s.width(), c: s.readout(), w: s.transition(), u: s.input_map() }
    }
}

impl TryFrom<RnnSpecFile> for RnnSpec {
    type Error = Error;
    fn try_from(f: RnnSpecFile) -> Result<Self> {
        if f.m != f.c.len() {
            return Err(Error::ShapeMismatch(format!("m = {} but c has {} entries", f.m, f.c.len())));
        }
        RnnSpec::new(f.c, f.w, f.u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::dilated_conv;

    #[test]
    fn two_layer_chain() {
        let spec = CnnSpec::chain(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(spec.representation().values_until(4), vec![3.0, 6.0, 4.0, 8.0]);
    }

    #[test]
    fn zero_layer_kills_everything() {
        let spec = CnnSpec::chain(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![5.0, 1.0]]).unwrap();
        assert_eq!(spec.representation().radius(), None);
    }

    #[test]
    fn radix_appendix_example() {
        let spec = synthesize_radix(&Sequence::impulse(19), 4).unwrap();
        assert_eq!(spec.depth(), 3);
        let hot: Vec<usize> = (0..3)
            .map(|k| {
                let w = spec.filters().iter().find(|(key, _)| key.layer == k).unwrap().1;
                w.iter().position(|&x| x == 1.0).unwrap()
            })
            .collect();
        assert_eq!(hot, vec![3, 0, 1]);
        assert_eq!(spec.representation(), Sequence::impulse(19));
    }

    #[test]
    fn radix_zero_and_single_layer() {
        let z = synthesize_radix(&Sequence::scalar(vec![0.0; 5]), 2).unwrap();
        assert_eq!(z.filter_count(), 0);
        assert_eq!(z.representation().radius(), None);
        let one = synthesize_radix(&Sequence::scalar(vec![2.0, -1.0, 0.5]), 3).unwrap();
        assert_eq!(one.depth(), 1);
        assert_eq!(one.representation(), Sequence::scalar(vec![2.0, -1.0, 0.5]));
    }

    #[test]
    fn lowrank_rank_one_uses_one_path() {
        // T = u (x) v for u = (1, 2), v = (3, -1): rho = (3, 6, -1, -2)
        let target = Sequence::scalar(vec![3.0, 6.0, -1.0, -2.0]);
        let spec = synthesize_lowrank(&target, 2, 2).unwrap();
        assert_eq!(spec.channels(), &[1, 1]);
        let rep = spec.representation();
        for t in 0..4 {
            assert!((rep.at(t) - target.at(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn lowrank_rank_two_uses_two_paths() {
        let target = Sequence::scalar(vec![1.0, 0.0, 0.0, 1.0]);
        let spec = synthesize_lowrank(&target, 2, 2).unwrap();
        assert_eq!(spec.channels()[1], 2);
        let rep = spec.representation();
        for t in 0..4 {
            assert!((rep.at(t) - target.at(t)).abs() < 1e-12);
        }
        assert!(synthesize_lowrank(&Sequence::impulse(4), 2, 2).is_err());
    }

    #[test]
    fn chain_matches_nested_convolution() {
        let w = [vec![0.5, -1.0, 2.0], vec![1.0, 3.0, 0.0], vec![-2.0, 0.25, 1.0]];
        let spec = CnnSpec::chain(&w).unwrap();
        let mut rho = Sequence::scalar(w[0].clone());
        let mut d = 3;
        for wk in &w[1..] {
            rho = dilated_conv(&Sequence::scalar(wk.clone()), &rho, d).unwrap();
            d *= 3;
        }
        assert_eq!(spec.representation(), rho);
    }

    #[test]
    fn effective_filter_examples() {
        assert_eq!(effective_filters(&[4, 4], 2, 1).value(), 12.0);
        assert_eq!(effective_filters(&[2, 1], 2, 1).value(), -2.0);
        for k in 2..8 {
            assert_eq!(effective_filters(&vec![1; k], 2, 1).value(), -(k as f64) - 1.0);
        }
        assert_eq!(effective_filters(&[7], 2, 1).value(), 0.0);
    }

    #[test]
    fn rank_budget_is_exact_at_perfect_powers() {
        // 5 * 32^{1/5} = 10 exactly
        assert_eq!(rank_budget(32, 1, 5), 10);
        assert_eq!(rank_budget(31, 1, 5), 9);
        assert_eq!(rank_budget(1, 1, 5), 5);
        assert_eq!(rank_budget(0, 1, 5), 0);
        assert_eq!(rank_budget(-3, 1, 2), 0);
        // M = 9/2 at K = 2: 2 * sqrt(4.5) = 4.24
        assert_eq!(rank_budget(9, 2, 2), 4);
    }

    #[test]
    fn rnn_geometric_representation() {
        let g = 0.7;
        let rnn = RnnSpec::new(vec![g], vec![vec![g]], vec![vec![1.0]]).unwrap();
        let rho = rnn.representation(50);
        assert_eq!(rho.at(0), 0.0);
        for s in 1..=50 {
            assert!((rho.at(s) - g.powi(s as i32)).abs() < 1e-15);
        }
        let closed = rnn.tail_norm(3).unwrap().value;
        let summed: f64 = (3..2000).map(|s| g.powi(2 * s)).sum::<f64>().sqrt();
        assert!((closed - summed).abs() < 1e-12);
    }

    #[test]
    fn rnn_zero_transition_and_diagonal() {
        let rnn = RnnSpec::new(vec![2.0, 1.0], vec![vec![0.0; 2]; 2], vec![vec![1.0], vec![3.0]]).unwrap();
        let rho = rnn.representation(5);
        assert_eq!(rho.values_until(6), vec![0.0, 5.0, 0.0, 0.0, 0.0, 0.0]);

        let (a, b) = (0.9, -0.4);
        let rnn = RnnSpec::new(vec![1.5, -2.0], vec![vec![a, 0.0], vec![0.0, b]], vec![vec![0.5], vec![1.0]]).unwrap();
        let rho = rnn.representation(30);
        for s in 1..=30usize {
            let want = 1.5 * 0.5 * a.powi(s as i32 - 1) - 2.0 * b.powi(s as i32 - 1);
            assert!((rho.at(s) - want).abs() < 1e-13);
        }
        assert!((rnn.spectral_radius() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn unstable_tail_is_rejected() {
        let rnn = RnnSpec::new(vec![1.0], vec![vec![1.2]], vec![vec![1.0]]).unwrap();
        assert!(matches!(rnn.tail_norm(1), Err(Error::Unstable(_))));
    }

    #[test]
    fn width_and_depth_bounds() {
        assert_eq!(power_sum_delta_bound(3, 6, 1.0).unwrap(), 1.0);
        assert_eq!(power_sum_delta_bound(17, 3, 0.0).unwrap(), 0.0);
        assert_eq!(power_sum_delta_bound(1, 2, 2.0).unwrap(), 2.0);
        assert!(power_sum_delta_bound(1, 0, 1.0).is_err());

        assert_eq!(rnn_min_width_impulse(10, 0.1).unwrap(), 20);
        assert_eq!(rnn_min_width_impulse(1, 0.4).unwrap(), 1);
        assert!(matches!(rnn_min_width_impulse(4, 0.5), Err(Error::VacuousBound(_))));

        assert_eq!(cnn_min_depth_expdecay(0.99, 0.01, 2).unwrap(), 9);
        assert_eq!(cnn_min_depth_expdecay(0.5, 0.5, 2).unwrap(), 1);
        assert!(cnn_min_depth_expdecay(1.0, 0.5, 2).is_err());
        let mut prev = 0;
        for i in 1..100 {
            let g = 1.0 - 1.0 / (i as f64 + 1.0);
            let k = cnn_min_depth_expdecay(g, 0.05, 2).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = synthesize_radix(&Sequence::scalar(vec![0.0, 1.0, 0.0, -2.0, 0.0, 0.0, 3.0]), 2).unwrap();
        let text = serde_json::to_string(&CnnSpecFile::from(&spec)).unwrap();
        assert!(text.contains("\"K\":3"));
        let back = CnnSpec::try_from(serde_json::from_str::<CnnSpecFile>(&text).unwrap()).unwrap();
        assert_eq!(back, spec);

        let rnn = RnnSpec::new(vec![1.0, 2.0], vec![vec![0.1, 0.2], vec![0.3, 0.4]], vec![vec![1.0], vec![0.0]]).unwrap();
        let text = serde_json::to_string(&RnnSpecFile::from(&rnn)).unwrap();
        assert!(text.contains("\"W\":[[0.1,0.2],[0.3,0.4]]"));
        let back = RnnSpec::try_from(serde_json::from_str::<RnnSpecFile>(&text).unwrap()).unwrap();
        assert_eq!(back, rnn);
        assert!("1,2".parse::<FilterKey>().is_err());
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(CnnSpec::chain(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(CnnSpec::new(1, 1, vec![1], BTreeMap::new()).is_err());
        let mut f = BTreeMap::new();
        f.insert(FilterKey { layer: 0, from: 1, to: 0 }, vec![1.0, 1.0]);
        assert!(CnnSpec::new(2, 1, vec![1], f).is_err());
        assert!(RnnSpec::new(vec![1.0], vec![vec![1.0, 2.0]], vec![vec![1.0]]).is_err());
    }
}
