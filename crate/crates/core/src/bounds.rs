//! Complexity measure, two-sided approximation bounds and error curves.

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{coverage_depth, effective_filters, rank_budget, EffectiveFilters};
use crate::sequence::{Scalar, Sequence};
use crate::tensor::{checked_pow, truncation_error_bound, Spectrum, Tensor};

/// A non-increasing weight `g: N -> R_+` with limit 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DecayProfile {
    /// `scale * base^s`, `0 < base < 1`.
    Exponential { scale: f64, base: f64 },
    /// `scale / (s + 1)^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `values[s]`, then the last value until `cutoff`, then 0.
    Table { values: Vec<f64>, cutoff: usize },
}

impl DecayProfile {
    pub fn exponential(scale: f64, base: f64) -> Result<Self> {
        let g = DecayProfile::Exponential { scale, base };
        g.validate()?;
        Ok(g)
    }

    pub fn power(scale: f64, exponent: f64) -> Result<Self> {
        let g = DecayProfile::Power { scale, exponent };
        g.validate()?;
        Ok(g)
    }

    pub fn table(values: Vec<f64>, cutoff: usize) -> Result<Self> {
        let g = DecayProfile::Table { values, cutoff };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            DecayProfile::Exponential { scale, base } => {
                if !(*scale > 0.0 && scale.is_finite()) || !(*base > 0.0 && *base < 1.0) {
                    return bad(format!("exponential g needs scale > 0 and 0 < base < 1, got {scale}, {base}"));
                }
            }
            DecayProfile::Power { scale, exponent } => {
                if !(*scale > 0.0 && scale.is_finite()) || !(*exponent > 0.0 && exponent.is_finite()) {
                    return bad(format!("power g needs scale > 0 and exponent > 0, got {scale}, {exponent}"));
                }
            }
            DecayProfile::Table { values, cutoff } => {
                if values.is_empty() || values.len() > *cutoff {
                    return bad(format!("table g needs 1..=cutoff values, got {} with cutoff {cutoff}", values.len()));
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("table g values must be positive".into());
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return bad("table g must be non-increasing".into());
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, s: usize) -> f64 {
        match self {
            DecayProfile::Exponential { scale, base } => scale * base.powf(s as f64),
            DecayProfile::Power { scale, exponent } => scale / ((s + 1) as f64).powf(*exponent),
            DecayProfile::Table { values, cutoff } => {
                if s >= *cutoff {
                    0.0
                } else {
                    values.get(s).or(values.last()).copied().unwrap_or(0.0)
                }
            }
        }
    }

    /// Build from a family name and `key=value` parameters.
    pub fn from_params(family: &str, params: &[(String, f64)]) -> Result<Self> {
        let get = |keys: &[&str], default: Option<f64>| -> Result<f64> {
            keys.iter()
                .find_map(|k| params.iter().find(|(n, _)| n == k).map(|(_, v)| *v))
                .or(default)
                .ok_or_else(|| Error::Parse(format!("g family {family} needs parameter {}", keys[0])))
        };
        match family {
            "exp" | "exponential" => DecayProfile::exponential(get(&["scale", "a"], Some(1.0))?, get(&["base", "b"], None)?),
            "power" => DecayProfile::power(get(&["scale", "a"], Some(1.0))?, get(&["exponent", "p"], None)?),
            "table" => {
                let mut values: Vec<(usize, f64)> = params
                    .iter()
                    .filter_map(|(n, v)| n.strip_prefix('v').and_then(|i| i.parse().ok()).map(|i| (i, *v)))
                    .collect();
                values.sort_by_key(|(i, _)| *i);
                if values.iter().enumerate().any(|(pos, (i, _))| pos != *i) {
                    return Err(Error::Parse("table g needs parameters v0, v1, ... without gaps".into()));
                }
                let values: Vec<f64> = values.into_iter().map(|(_, v)| v).collect();
                let cutoff = get(&["cutoff"], Some(values.len() as f64))?;
                if cutoff < 0.0 || cutoff.fract() != 0.0 {
                    return Err(Error::Parse(format!("table cutoff {cutoff} is not a count")));
                }
                DecayProfile::table(values, cutoff as usize)
            }
            other => Err(Error::Parse(format!("unknown g family {other:?}"))),
        }
    }
}

/// `sqrt(sum_{i=s+K}^{lK} sigma_i^2)` for every `s` with `s + K <= lK`.
/// Only `rho` on `[0, l^K - 1]` enters.
pub fn tail_sum_profile(rho: &Sequence, l: usize, depth: usize) -> Result<Vec<Scalar>> {
    let spectrum = truncated_spectrum(rho, l, depth)?;
    Ok(profile_from_spectrum(&spectrum, depth))
}

fn profile_from_spectrum(spectrum: &Spectrum, depth: usize) -> Vec<Scalar> {
    let n = spectrum.len();
    (0..=n.saturating_sub(depth))
        .map(|s| Scalar::exact(spectrum.tail_energy(s + depth - 1).sqrt()))
        .collect()
}

/// Spectrum of `T_{l^K}(rho_[0, l^K - 1])`.
pub fn truncated_spectrum(rho: &Sequence, l: usize, depth: usize) -> Result<Spectrum> {
    let n = checked_pow(l, depth)?;
    Ok(Tensor::tensorize(&rho.head(n), l, depth)?.singular_values())
}

/// The complexity measure with the depth range capped at the coverage depth
/// of `rho` (beyond it every tail sum is unchanged).
pub fn complexity_measure(rho: &Sequence, l: usize, g: &DecayProfile) -> Result<Scalar> {
    complexity_measure_capped(rho, l, g, None)
}

/// As [`complexity_measure`], scanning depths `1..=k_cap` (default: the
/// coverage depth). Vector-valued targets take the largest channel value.
pub fn complexity_measure_capped(rho: &Sequence, l: usize, g: &DecayProfile, k_cap: Option<usize>) -> Result<Scalar> {
    g.validate()?;
    if !rho.is_finite() {
        return Err(Error::NotFinitelySupported);
    }
    if l < 2 {
        return Err(Error::InvalidParameter(format!("filter size must be >= 2, got {l}")));
    }
    let mut best: f64 = 0.0;
    for c in 0..rho.dim() {
        let ch = rho.channel(c)?;
        let Some(radius) = ch.radius() else { continue };
        let cap = k_cap.unwrap_or_else(|| coverage_depth(radius, l));
        for depth in 1..=cap {
            for (s, tail) in tail_sum_profile(&ch, l, depth)?.into_iter().enumerate() {
                let gs = g.eval(s);
                let ratio = if tail.value == 0.0 {
                    0.0
                } else if gs == 0.0 {
                    f64::INFINITY
                } else {
                    tail.value / gs
                };
                best = best.max(ratio);
            }
        }
    }
    Ok(Scalar::exact(best))
}

/// Both sides of the depth/width approximation bound at one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: Scalar,
    pub upper: Scalar,
    pub effective_filters: EffectiveFilters,
    pub rank_budget: usize,
    /// Argument at which `g` was evaluated (after flooring and clamping).
    pub g_argument: usize,
    pub complexity: Scalar,
    pub tail: Scalar,
}

/// `lower = sup_{t >= l^K} |rho(t)| / sqrt(d)`,
/// `upper = d g(floor(K M^{1/K}) - K) C(rho_[0,l^K-1]) + |rho_[l^K, inf)|`.
///
/// `channel_counts` are `M_1..M_K`.
pub fn theorem2_interval(
    rho: &Sequence,
    l: usize,
    depth: usize,
    channel_counts: &[usize],
    g: &DecayProfile,
) -> Result<BoundInterval> {
    g.validate()?;
    if channel_counts.len() != depth {
        return Err(Error::InvalidParameter(format!(
            "expected {depth} channel counts M_1..M_K, got {}",
            channel_counts.len()
        )));
    }
    let n = checked_pow(l, depth)?;
    let d = rho.dim();
    let m = effective_filters(channel_counts, l, d);
    if m.value() < 1.0 {
        return Err(Error::TooFewFilters(m.value()));
    }
    let budget = rank_budget(m.numerator, m.denominator, depth);
    let g_argument = match budget.checked_sub(depth) {
        Some(a) => a,
        None => {
            info!("rank budget {budget} below depth {depth}; g evaluated at 0");
            0
        }
    };
    let complexity = complexity_measure(&rho.head(n), l, g)?;
    let tail = rho.tail_norm(n);
    let gv = g.eval(g_argument);
    let main = if complexity.value == 0.0 { 0.0 } else { d as f64 * gv * complexity.value };
    let upper = Scalar::exact(main) + tail;
    let lower = Scalar::exact(rho.tail_sup(n) / (d as f64).sqrt());
    if lower.value > upper.hi() * (1.0 + 1e-12) {
        warn!("lower bound {} exceeds upper bound {}", lower, upper);
    }
    Ok(BoundInterval { lower, upper, effective_filters: m, rank_budget: budget, g_argument, complexity, tail })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurveRow {
    #[serde(rename = "K")]
    pub depth: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub rank_budget: usize,
    pub rank_term: f64,
    pub tail_term: Scalar,
    pub upper_bound: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurveTable {
    pub target: String,
    pub l: usize,
    pub rows: Vec<ErrorCurveRow>,
}

pub const CURVE_CSV_HEADER: &str = "target,l,K,M,rank_term,tail_term,upper_bound";

impl ErrorCurveTable {
    /// Rows for one depth, in increasing `M`.
    pub fn curve(&self, depth: usize) -> Vec<&ErrorCurveRow> {
        self.rows.iter().filter(|r| r.depth == depth).collect()
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = self.rows.iter().map(|r| r.depth).collect();
        ks.dedup();
        ks
    }

    /// CSV with the interval midpoints; bracket widths are in the JSON form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.target, self.l, r.depth, r.m, r.rank_term, r.tail_term.value, r.upper_bound.value
            ));
        }
        out
    }
}

/// Upper-bound curve over `M = 1..=m_max` for each depth: the rank term is
/// the spectrum tail past `floor(K M^{1/K})` on `[0, l^K - 1]`, the tail term
/// is the norm of `rho` from `l^K` on.
pub fn error_curve(rho: &Sequence, target: &str, l: usize, depths: &[usize], m_max: usize) -> Result<ErrorCurveTable> {
    if rho.dim() != 1 {
        return Err(Error::NotScalar(rho.dim()));
    }
    let mut ks = depths.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let per_k: Vec<Vec<ErrorCurveRow>> = ks
        .par_iter()
        .map(|&depth| {
            let spectrum = truncated_spectrum(rho, l, depth)?;
            let tail = rho.tail_norm(checked_pow(l, depth)?);
            Ok((1..=m_max)
                .map(|m| {
                    let budget = rank_budget(m as i64, 1, depth);
                    let rank_term = truncation_error_bound(&spectrum, budget).value;
                    ErrorCurveRow {
                        depth,
                        m,
                        rank_budget: budget,
                        rank_term,
                        tail_term: tail,
                        upper_bound: Scalar::exact(rank_term) + tail,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ErrorCurveTable { target: target.to_string(), l, rows: per_k.into_iter().flatten().collect() })
}
