//! One line per acceptance criterion. Criteria whose literal target cannot be
//! met print FAIL with the observed value; the run only aborts when a
//! criterion fails in a way not listed in `KNOWN_FAILURES`.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use memlens::bounds::{complexity_measure, complexity_measure_capped, tail_sum_profile, truncated_spectrum, DecayProfile};
use memlens::experiments::{comparison_report, figure1_report, make_target, oracle_best_rank_matrix, Scenario, Status, Target};
use memlens::models::{coverage_depth, power_sum_delta_bound, synthesize_radix, CnnSpec, RnnSpec};
use memlens::tensor::{mode_truncation_error, outer_product, tensor_rank, truncation_error_bound, RANK_RTOL};
use memlens::{Sequence, Tensor};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria expected to fail, with the exact observation that makes them fail.
const KNOWN_FAILURES: &[(usize, &str)] = &[
    (3, "rank(rho1, K=5) = 7"),
    (7, "pooled bound = sqrt(2) x oracle"),
    (9, "impulse copy uses 11 filters"),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn rng() -> (u64, ChaCha8Rng) {
    let seed = std::env::var("MEMLENS_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x5eed_2024);
    (seed, ChaCha8Rng::seed_from_u64(seed))
}

fn random_finite(rng: &mut ChaCha8Rng, len: usize) -> Sequence {
    Sequence::scalar(
        (0..len).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(-5.0..5.0) }).collect(),
    )
}

fn example2() -> Outcome {
    let start = Instant::now();
    let rho = Sequence::scalar(vec![1.0, 0.0, 0.0, 1.0]);
    let want: [(usize, Vec<f64>); 3] = [
        (2, vec![1.0, 1.0, 1.0, 1.0]),
        (3, vec![SQRT_2, 1.0, 1.0, 1.0, 1.0, 0.0]),
        (4, vec![SQRT_2, SQRT_2, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]),
    ];
    let mut ok = true;
    for (k, row) in &want {
        let got = Tensor::tensorize(&rho, 2, *k).unwrap().singular_values().values();
        ok &= close(&got, row, 1e-9);
    }
    let k1 = Tensor::tensorize(&rho.head(2), 2, 1).unwrap().singular_values().values();
    let elapsed = start.elapsed();
    outcome(ok && elapsed.as_secs_f64() < 1.0, format!("K=2,3,4 rows match; K=1 row is {k1:?} (logged); {elapsed:.2?}"))
}

fn tail_sums() -> Outcome {
    let rho = Sequence::scalar(vec![1.0, 0.0, 0.0, 1.0]);
    let mut ok = true;
    let mut s0 = Vec::new();
    for k in 2..=4 {
        let p = tail_sum_profile(&rho, 2, k).unwrap();
        let sq = |s: usize| p[s].value * p[s].value;
        ok &= (sq(1) - 2.0).abs() <= 1e-9 && (sq(2) - 1.0).abs() <= 1e-9;
        s0.push(sq(0));
    }
    outcome(ok, format!("s=1 -> 2, s=2 -> 1 for K=2,3,4; s=0 values {s0:?} (logged)"))
}

fn ranks() -> Outcome {
    let rank = |v: Vec<f64>, k| tensor_rank(&Tensor::tensorize(&Sequence::scalar(v), 2, k).unwrap(), RANK_RTOL);
    let rank_of = |t| tensor_rank(&Tensor::tensorize(&make_target(t).unwrap(), 2, 5).unwrap(), RANK_RTOL);
    let got = [rank(vec![1.0, 0.0, 1.0, 0.0], 2), rank(vec![1.0, 0.0, 0.0, 1.0], 2), rank_of(Target::Rho1), rank_of(Target::Rho2)];
    outcome(got == [2, 4, 5, 10], format!("ranks {got:?}, want [2, 4, 5, 10]; rank(rho1, K=5) = {}", got[2]))
}

fn radix(rng: &mut ChaCha8Rng) -> Outcome {
    let spec = synthesize_radix(&Sequence::impulse(19), 4).unwrap();
    let mut ok = spec.depth() == 3 && spec.representation() == Sequence::impulse(19);
    for _ in 0..100 {
        let l = rng.random_range(2..=5usize);
        let k = rng.random_range(1..=5usize);
        let t = rng.random_range(0..l.pow(k as u32));
        let spec = synthesize_radix(&Sequence::impulse(t), l).unwrap();
        ok &= spec.representation() == Sequence::impulse(t) && spec.depth() <= k.max(1);
    }
    outcome(ok, "l=4 example hits t=19; 100 random (l, K, t) replay exactly")
}

fn outer_products(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let l = rng.random_range(2..=3usize);
        let k = rng.random_range(2..=4usize);
        let ws: Vec<Vec<f64>> = (0..k).map(|_| (0..l).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let t = Tensor::tensorize(&CnnSpec::chain(&ws).unwrap().representation(), l, k).unwrap();
        let o = outer_product(&ws).unwrap();
        for (a, b) in t.data().iter().zip(o.data()) {
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
        }
    }
    outcome(worst <= 1e-12, format!("200 chains, worst relative error {worst:.2e}"))
}

fn zero_padding(rng: &mut ChaCha8Rng) -> Outcome {
    let g = DecayProfile::exponential(1.0, 0.5).unwrap();
    let (mut worst, mut cap_ok) = (0.0f64, true);
    for _ in 0..100 {
        let len = rng.random_range(1..=16usize);
        let rho = random_finite(rng, len);
        let k = 4;
        let a = truncated_spectrum(&rho, 2, k).unwrap().values();
        let b = truncated_spectrum(&rho, 2, k + 1).unwrap().values();
        let mut want = a;
        want.extend([rho.norm().value, 0.0]);
        want.sort_by(|x, y| y.total_cmp(x));
        worst = worst.max(b.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        if let Some(r) = rho.radius() {
            let c = complexity_measure(&rho, 2, &g).unwrap().value;
            let kstar = coverage_depth(r, 2);
            let wide = complexity_measure_capped(&rho, 2, &g, Some(kstar + 3)).unwrap().value;
            cap_ok &= (c - wide).abs() <= 1e-10 * c.max(1.0);
        }
    }
    outcome(worst <= 1e-10 && cap_ok, format!("100 targets, worst deviation {worst:.2e}; measure cap-invariant: {cap_ok}"))
}

fn eckart_young(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut per_mode, mut pooled, mut ratio) = (0.0f64, 0.0f64, Vec::new());
    for _ in 0..200 {
        let l = rng.random_range(2..=3usize);
        let t = Tensor::tensorize(&random_finite(rng, l * l), l, 2).unwrap();
        let m = t.mode_flatten(0).unwrap();
        let spectrum = t.singular_values();
        for r in 0..=l {
            let oracle = oracle_best_rank_matrix(&m, r).unwrap().value;
            per_mode = per_mode.max((mode_truncation_error(&spectrum, 0, r) - oracle).abs());
            let bound = truncation_error_bound(&spectrum, 2 * r).value;
            pooled = pooled.max((bound - oracle).abs());
            if oracle > 1e-6 {
                ratio.push(bound / oracle);
            }
        }
    }
    let (lo, hi) = ratio.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    outcome(
        per_mode <= 1e-10 && pooled <= 1e-10,
        format!(
            "per-mode tail vs oracle {per_mode:.2e}; pooled bound vs oracle {pooled:.2e}, ratio in [{lo:.6}, {hi:.6}] (sqrt 2 = {SQRT_2:.6})"
        ),
    )
}

fn figure1() -> Outcome {
    let start = Instant::now();
    let report = figure1_report(2, &[5], 64).unwrap();
    let elapsed = start.elapsed();
    let bad: Vec<&str> = report.notes.iter().filter(|n| n.status != Status::Pass).map(|n| n.check.as_str()).collect();
    outcome(
        bad.is_empty() && elapsed.as_secs_f64() < 10.0,
        format!("{} checks at K=5, failing {bad:?}; {elapsed:.2?}", report.notes.len()),
    )
}

fn comparisons() -> Outcome {
    let exp = comparison_report(Scenario::ExpDecay { gamma: 0.99, eps: 0.01, l: 2 }).unwrap();
    let imp = comparison_report(Scenario::ImpulseCopy { depth: 10, eps: 0.1, l: 2 }).unwrap();
    let residual = exp.rnn.residual.unwrap();
    let ok = exp.rnn.width == 1
        && residual <= 1e-12
        && exp.cnn.depth == 9
        && imp.cnn.filters == 10
        && imp.rnn.width == 20;
    outcome(
        ok,
        format!(
            "exp: RNN width {} residual {residual:.1e}, CNN depth {}; impulse: CNN filters {} (want 10), RNN width {}",
            exp.rnn.width, exp.cnn.depth, imp.cnn.filters, imp.rnn.width
        ),
    )
}

fn universal_approximation() -> Outcome {
    let rho = make_target(Target::Rho3).unwrap().head(10_000);
    let mut first = None;
    let mut last = f64::NAN;
    for k in 1..=14usize {
        let n = 2usize.pow(k as u32);
        let spectrum = truncated_spectrum(&rho, 2, k).unwrap();
        // a budget covering the whole spectrum leaves only the tail
        let upper = truncation_error_bound(&spectrum, spectrum.len()).value + rho.tail_norm(n).value;
        last = upper;
        if upper < 1e-3 {
            first = Some(k);
            break;
        }
    }
    outcome(first.is_some(), format!("upper bound {last:.3e} at K={}", first.map_or("none".into(), |k| k.to_string())))
}

fn random_rnn(rng: &mut ChaCha8Rng) -> RnnSpec {
    let m = rng.random_range(1..=4usize);
    let p = loop {
        let p: DMatrix<f64> = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.5..0.5));
        if p.determinant().abs() > 0.1 {
            break p;
        }
    };
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| rng.random_range(0.05..0.99)));
    let w = &p * lambda * p.clone().try_inverse().unwrap();
    let rows = |a: &DMatrix<f64>| (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    let c = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let u = DMatrix::from_fn(m, 1, |_, _| rng.random_range(-1.0..1.0));
    RnnSpec::new(c, rows(&w), rows(&u)).unwrap()
}

fn power_sums(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rnn = random_rnn(rng);
        let m = rnn.width();
        let rho = rnn.representation(2000);
        let sup = (1..=2000).map(|t| rho.at(t).abs()).fold(0.0, f64::max);
        for t in 1..=200 {
            let step = (rho.at(t + 1) - rho.at(t)).abs();
            let bound = power_sum_delta_bound(m * m, t, sup).unwrap();
            worst = worst.max(step / bound.max(f64::MIN_POSITIVE));
        }
    }
    outcome(worst <= 1.0, format!("100 RNNs, t in [1, 200], max step/bound ratio {worst:.4}"))
}

fn main() {
    let (seed, mut rng) = rng();
    println!("acceptance (seed {seed})");
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "spectrum conformance", example2()),
        (2, "tail-sum conformance", tail_sums()),
        (3, "rank claims", ranks()),
        (4, "radix synthesis", radix(&mut rng)),
        (5, "outer-product identity", outer_products(&mut rng)),
        (6, "zero-padding law", zero_padding(&mut rng)),
        (7, "Eckart-Young oracle", eckart_young(&mut rng)),
        (8, "error-curve qualitative checks", figure1()),
        (9, "CNN/RNN comparisons", comparisons()),
        (10, "universal approximation", universal_approximation()),
        (11, "power-sum step bound", power_sums(&mut rng)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, o) in &results {
        let known = KNOWN_FAILURES.iter().find(|(k, _)| k == id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS".to_string(),
            (false, Some((_, why))) => format!("FAIL, known: {why}"),
            (false, None) => "FAIL".to_string(),
        };
        println!("criterion {id:>2} [{tag}] {name}: {}", o.detail);
        if o.pass && known.is_some() {
            println!("             known failure no longer reproduces; update KNOWN_FAILURES");
        }
        if !o.pass && known.is_none() || o.pass && known.is_some() {
            unexpected.push(*id);
        }
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("{passed}/{} criteria pass", results.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
