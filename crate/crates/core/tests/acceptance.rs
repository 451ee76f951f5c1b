//! Acceptance suite. Prints one line per criterion and exits non-zero if a
//! hard criterion fails. Criterion 8 only warns.
//!
//! Set `ABALONE_CSV` (or place `data/abalone.csv` in the workspace root) to
//! run criterion 9 on the real file.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use david::data::{self, TabularDataset};
use david::eval::{self, BenchmarkConfig, BenchmarkReport, RegressorKind};
use david::generators::{self, AugmentationPlan, GeneratorKind};
use david::kde::{self, BandwidthRule};
use david::linalg;
use david::nn;
use david::seed;
use david::vae::{self, VaeConfig};
use david::weights;
use ndarray::{array, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

enum Verdict {
    Pass(String),
    Fail(String),
    Warn(String),
    NotRun(String),
}

struct Outcome {
    id: u32,
    name: &'static str,
    verdict: Verdict,
    elapsed: Duration,
    budget: Duration,
}

fn check(cond: bool, detail: String) -> Verdict {
    if cond {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn mins(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

// 1
fn gradient_fidelity() -> Verdict {
    let cfg = VaeConfig {
        beta_kl: 0.5,
        ..VaeConfig::default()
    };
    let mut model = vae::build_architecture(8, &cfg).unwrap();
    let mut rng = seed::rng(101);
    let (n, latent) = (16, model.latent_dim());
    let x = Array2::from_shape_simple_fn((n, 8), || rng.random_range(0.0..1.0));
    let y = Array1::from_shape_simple_fn(n, || rng.random_range(0.0..1.0));
    let rw = weights::relevance_weights(y.view(), 1.0, BandwidthRule::Silverman).unwrap();
    let w = weights::loss_weights(&rw);
    let noise = Array2::from_shape_simple_fn((n, latent), || StandardNormal.sample(&mut rng));
    let (_, grads) = vae::balanced_loss_with_noise(&model, x.view(), y.view(), w.view(), noise.view()).unwrap();
    let loss = |m: &vae::VaeModel| {
        vae::balanced_loss_with_noise(m, x.view(), y.view(), w.view(), noise.view())
            .unwrap()
            .0
            .total
    };
    let err = nn::finite_difference_check(loss, &mut model, &grads.flatten(), 50, 1e-5, &mut rng);
    check(err < 1e-4, format!("max relative error {err:.3e} over 50 probes (limit 1e-4)"))
}

// 2
fn kde_correctness() -> Verdict {
    let pts = array![[-1.0], [0.0], [0.5], [2.0], [3.5]];
    let w = array![1.0, 2.0, 1.0, 3.0, 1.0];
    let model = kde::fit_kde(pts.clone(), w.view(), BandwidthRule::Silverman, 1.0).unwrap();
    let sd = model.bandwidth_cov[[0, 0]].sqrt();
    let (lo, hi) = (-1.0 - 10.0 * sd, 3.5 + 10.0 * sd);
    let steps = 20_000;
    let h = (hi - lo) / steps as f64;
    let f = |t: f64| model.density_at(array![t].view()).unwrap();
    let integral = h * ((f(lo) + f(hi)) / 2.0 + (1..steps).map(|i| f(lo + i as f64 * h)).sum::<f64>());
    let int_ok = (integral - 1.0).abs() < 1e-3;

    // 2-d weighted mixture, analytic moments
    let pts = array![[0.0, 0.0], [1.0, 2.0], [3.0, -1.0], [-2.0, 1.0], [0.5, 0.5], [2.0, 2.5]];
    let w = array![1.0, 3.0, 0.5, 2.0, 1.0, 1.5];
    let model = kde::fit_kde(pts.clone(), w.view(), BandwidthRule::Scott, 0.7).unwrap();
    let wn = &w / w.sum();
    let mean = pts.t().dot(&wn);
    let centred = &pts - &mean;
    let mut cov = model.bandwidth_cov.clone();
    for (r, &wi) in centred.outer_iter().zip(wn.iter()) {
        for a in 0..2 {
            for b in 0..2 {
                cov[[a, b]] += wi * r[a] * r[b];
            }
        }
    }
    let n = 100_000;
    let s = model.sample(n, &mut seed::rng(202));
    let s_mean = s.mean_axis(Axis(0)).unwrap();
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        let se = (cov[[a, a]] / n as f64).sqrt();
        worst = worst.max((s_mean[a] - mean[a]).abs() / se);
    }
    for a in 0..2 {
        for b in a..2 {
            let prod: Array1<f64> = s.outer_iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).collect();
            let est = prod.mean().unwrap();
            let se = (prod.mapv(|v| (v - est).powi(2)).sum() / (n as f64 - 1.0) / n as f64).sqrt();
            worst = worst.max((est - cov[[a, b]]).abs() / se);
        }
    }
    check(
        int_ok && worst < 3.0,
        format!("integral {integral:.6}; worst moment deviation {worst:.2} standard errors"),
    )
}

// 3
fn weighting_laws() -> Verdict {
    let mut rng = seed::rng(303);
    let y = Array1::from_shape_simple_fn(200, || {
        let v: f64 = StandardNormal.sample(&mut rng);
        v.exp()
    });
    let r0 = weights::relevance_weights(y.view(), 0.0, BandwidthRule::Silverman).unwrap();
    let uniform = r0.raw.iter().all(|&v| v == 1.0) && r0.normalized.iter().all(|&v| v == 1.0 / 200.0);
    let r1 = weights::relevance_weights(y.view(), 1.0, BandwidthRule::Silverman).unwrap();
    let r2 = weights::relevance_weights(y.view(), 2.0, BandwidthRule::Silverman).unwrap();
    let sq = r1
        .raw
        .iter()
        .zip(r2.raw.iter())
        .map(|(a, b)| ((a * a - b) / b).abs())
        .fold(0.0, f64::max);
    let small = array![0.0, 0.1, 0.3, 2.0];
    let dens = weights::target_density(small.view(), BandwidthRule::Silverman).unwrap();
    let d: Vec<f64> = small.iter().map(|&v| dens.density_at(array![v].view()).unwrap()).collect();
    let rs = weights::relevance_weights(small.view(), 1.0, BandwidthRule::Silverman).unwrap();
    let mut monotone = true;
    for i in 0..4 {
        for j in 0..4 {
            if d[i] < d[j] && !(rs.raw[i] > rs.raw[j]) {
                monotone = false;
            }
        }
    }
    check(
        uniform && sq < 1e-10 && monotone,
        format!("alpha=0 uniform: {uniform}; squared-law max rel err {sq:.2e}; strict monotone: {monotone}"),
    )
}

fn gauss_solve(mut a: Array2<f64>, mut b: Array1<f64>) -> Array1<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[[i, c]].abs().total_cmp(&a[[j, c]].abs())).unwrap();
        for k in 0..n {
            a.swap([c, k], [piv, k]);
        }
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[[r, c]] / a[[c, c]];
            for k in c..n {
                a[[r, k]] -= f * a[[c, k]];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = Array1::zeros(n);
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[[r, k]] * x[k]).sum();
        x[r] = (b[r] - s) / a[[r, r]];
    }
    x
}

fn cubic_eigenvalues(m: ArrayView2<'_, f64>) -> [f64; 3] {
    // closed-form roots of the characteristic polynomial of a symmetric 3x3
    let p1 = m[[0, 1]].powi(2) + m[[0, 2]].powi(2) + m[[1, 2]].powi(2);
    let q = (m[[0, 0]] + m[[1, 1]] + m[[2, 2]]) / 3.0;
    let p2 = (m[[0, 0]] - q).powi(2) + (m[[1, 1]] - q).powi(2) + (m[[2, 2]] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (&m - &(Array2::<f64>::eye(3) * q)) / p;
    let det = b[[0, 0]] * (b[[1, 1]] * b[[2, 2]] - b[[1, 2]] * b[[2, 1]]) - b[[0, 1]] * (b[[1, 0]] * b[[2, 2]] - b[[1, 2]] * b[[2, 0]])
        + b[[0, 2]] * (b[[1, 0]] * b[[2, 1]] - b[[1, 1]] * b[[2, 0]]);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

fn table(n: usize, p: usize, seed_: u64) -> TabularDataset {
    let mut rng = seed::rng(seed_);
    let x = Array2::from_shape_simple_fn((n, p), || rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_simple_fn(n, || rng.random_range(-1.0..1.0));
    TabularDataset::new(x, y, (0..p).map(|j| format!("x{j}")).collect(), "y").unwrap()
}

// 4
fn oracle_equivalences() -> Verdict {
    let mut knn_ok = true;
    for inst in 0..5 {
        let train = table(100, 3, 400 + inst);
        let queries = table(30, 3, 500 + inst);
        for k in [1, 3, 7] {
            let pred = eval::knn_fit_predict(&train, queries.features.view(), k).unwrap();
            for (q, got) in queries.features.outer_iter().zip(pred.iter()) {
                let mut d: Vec<(f64, usize)> = train
                    .features
                    .outer_iter()
                    .enumerate()
                    .map(|(i, r)| (r.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum(), i))
                    .collect();
                d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let want = d[..k].iter().map(|&(_, i)| train.target[i]).sum::<f64>() / k as f64;
                knn_ok &= *got == want;
            }
        }
    }

    let train = table(50, 3, 41);
    let queries = table(10, 3, 42);
    let lambda = 0.1;
    let got = eval::ridge_fit_predict(&train, queries.features.view(), lambda).unwrap();
    let mut design = Array2::ones((50, 4));
    design.slice_mut(ndarray::s![.., 1..]).assign(&train.features);
    let mut g = design.t().dot(&design);
    for j in 1..4 {
        g[[j, j]] += lambda;
    }
    let beta = gauss_solve(g, design.t().dot(&train.target));
    let ridge_err = queries
        .features
        .outer_iter()
        .zip(got.iter())
        .map(|(q, p)| (beta[0] + q.dot(&beta.slice(ndarray::s![1..])) - p).abs())
        .fold(0.0, f64::max);

    let pts = table(40, 3, 43).features;
    let pca = generators::pca_fit(pts.view()).unwrap();
    let c = &pts - &pts.mean_axis(Axis(0)).unwrap();
    let cov = c.t().dot(&c) / 39.0;
    let want = cubic_eigenvalues(cov.view());
    let pca_err = (0..3).map(|i| (pca.eigenvalues[i] - want[i]).abs()).fold(0.0, f64::max);

    let a = {
        let m = table(10, 4, 44).features;
        m.t().dot(&m) + Array2::<f64>::eye(4)
    };
    let l = linalg::cholesky(a.view()).unwrap();
    let chol_err = (&l.dot(&l.t()) - &a).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ds = data::simulate_illustration(300, 45).unwrap();
    let (scaled, scaler) = data::minmax_fit_transform(&ds).unwrap();
    let back = data::minmax_inverse(&scaled, &scaler).unwrap();
    let scaler_err = (&back.features - &ds.features)
        .iter()
        .chain((&back.target - &ds.target).iter())
        .fold(0.0f64, |m, v| m.max(v.abs() / (1.0 + v.abs())));

    check(
        knn_ok && ridge_err < 1e-8 && pca_err < 1e-8 && chol_err < 1e-10 && scaler_err < 1e-10,
        format!(
            "kNN exact: {knn_ok}; ridge {ridge_err:.1e}; PCA {pca_err:.1e}; Cholesky {chol_err:.1e}; scaler {scaler_err:.1e}"
        ),
    )
}

fn scaled_sim(n: usize, s: u64) -> TabularDataset {
    data::minmax_fit_transform(&data::simulate_illustration(n, s).unwrap()).unwrap().0
}

// 5
fn degenerate_limit() -> Verdict {
    let train = scaled_sim(400, 51);
    let cfg = VaeConfig {
        epochs: 20,
        ..VaeConfig::default()
    };
    let (model, _) = vae::train(&train, &cfg).unwrap();
    let plan = AugmentationPlan {
        bandwidth_rule: BandwidthRule::Fixed(0.0),
        rng_seed: 52,
        ..AugmentationPlan::default()
    };
    let out = generators::david_generate(&model, &train, &plan).unwrap();
    let seeds = train.select_rows(&out.seeds);
    let (xr, yr) = vae::reconstruct(&model, seeds.features.view(), seeds.target.view()).unwrap();
    let exact = out.synthetic.features == xr && out.synthetic.target == yr;
    check(exact, format!("{} synthetic rows bit-identical to seed reconstructions: {exact}", out.seeds.len()))
}

// 6
fn training_progress() -> Verdict {
    let train = scaled_sim(3000, 61);
    let (mut first, mut last) = (0.0, 0.0);
    for s in 0..3 {
        let cfg = VaeConfig {
            epochs: 200,
            rng_seed: s,
            ..VaeConfig::default()
        };
        let (_, rep) = vae::train(&train, &cfg).unwrap();
        first += rep.epochs[0].total / 3.0;
        last += rep.epochs.last().unwrap().total / 3.0;
    }
    check(last < 0.5 * first, format!("mean first-epoch loss {first:.4}, final {last:.4}, ratio {:.3}", last / first))
}

fn benchmark_config(master_seed: u64) -> BenchmarkConfig {
    BenchmarkConfig {
        generators: vec![GeneratorKind::Baseline, GeneratorKind::Bvae, GeneratorKind::Bvaew, GeneratorKind::Kbvaew],
        regressors: vec![RegressorKind::Knn(5)],
        folds: 10,
        vae: VaeConfig {
            epochs: 500,
            ..VaeConfig::default()
        },
        master_seed,
        ..BenchmarkConfig::default()
    }
}

fn benchmark_data(master_seed: u64) -> TabularDataset {
    data::simulate_illustration(3000, seed::derive(master_seed, "simulate")).unwrap()
}

fn mean_wmse(r: &BenchmarkReport, g: GeneratorKind) -> f64 {
    r.aggregate(g, RegressorKind::Knn(5)).unwrap().mean.wmse
}

// 7
fn david_beats_baseline(r: &BenchmarkReport) -> Verdict {
    let knn = RegressorKind::Knn(5);
    let base = r.rows_for(GeneratorKind::Baseline, knn);
    let david = r.rows_for(GeneratorKind::Kbvaew, knn);
    let wins = base
        .iter()
        .zip(&david)
        .filter(|(b, d)| d.metrics.wmse < b.metrics.wmse)
        .count();
    let (mb, md) = (mean_wmse(r, GeneratorKind::Baseline), mean_wmse(r, GeneratorKind::Kbvaew));
    check(
        md < mb && wins >= 7,
        format!("mean wMSE Baseline {mb:.4}, kBVAEw {md:.4}; kBVAEw better in {wins}/10 folds"),
    )
}

// 8
fn ablation_order(r: &BenchmarkReport) -> Verdict {
    let k = mean_wmse(r, GeneratorKind::Kbvaew);
    let bw = mean_wmse(r, GeneratorKind::Bvaew);
    let b = mean_wmse(r, GeneratorKind::Bvae);
    let detail = format!("mean wMSE kBVAEw {k:.4}, BVAEw {bw:.4}, BVAE {b:.4}");
    if k <= bw && k <= b {
        Verdict::Pass(detail)
    } else {
        Verdict::Warn(detail)
    }
}

fn abalone_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("ABALONE_CSV") {
        return Some(PathBuf::from(p));
    }
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/abalone.csv");
    p.exists().then_some(p)
}

/// Reads the abalone table, coding the categorical `Sex` column as 0/1/2.
fn load_abalone(path: &PathBuf) -> TabularDataset {
    let text = std::fs::read_to_string(path).expect("readable abalone CSV");
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines.next().unwrap().split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| match v.trim() {
                "M" => 0.0,
                "F" => 1.0,
                "I" => 2.0,
                other => other.parse().expect("numeric abalone field"),
            })
            .collect();
        rows.push(vals);
    }
    let target_col = header.iter().position(|h| h.eq_ignore_ascii_case("rings")).unwrap_or(header.len() - 1);
    let p = header.len() - 1;
    let n = rows.len();
    let mut x = Array2::zeros((n, p));
    let mut y = Array1::zeros(n);
    for (i, r) in rows.iter().enumerate() {
        let mut j = 0;
        for (c, v) in r.iter().enumerate() {
            if c == target_col {
                y[i] = *v;
            } else {
                x[[i, j]] = *v;
                j += 1;
            }
        }
    }
    let names = header.iter().enumerate().filter(|(c, _)| *c != target_col).map(|(_, h)| h.clone()).collect();
    TabularDataset::new(x, y, names, header[target_col].clone()).unwrap()
}

/// Same shape as abalone: 4177 rows, 8 features, right-skewed integer target.
fn abalone_shaped_stand_in() -> TabularDataset {
    let mut rng = seed::rng(909);
    let n = 4177;
    let mut x = Array2::zeros((n, 8));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let size: f64 = rng.random_range(0.1..1.0);
        x[[i, 0]] = rng.random_range(0..3) as f64;
        for j in 1..8 {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[[i, j]] = size * (1.0 + j as f64 * 0.3) + 0.05 * e;
        }
        let e: f64 = StandardNormal.sample(&mut rng);
        y[i] = (3.0 + 8.0 * size + 0.35 * e).exp().round().max(1.0) / 3.0;
    }
    TabularDataset::new(x, y, (1..=8).map(|j| format!("x{j}")).collect(), "rings").unwrap()
}

fn full_grid(ds: &TabularDataset) -> std::result::Result<String, String> {
    let cfg = BenchmarkConfig {
        folds: 3,
        vae: VaeConfig {
            epochs: 200,
            ..VaeConfig::default()
        },
        master_seed: 9,
        ..BenchmarkConfig::default()
    };
    let report = eval::run_benchmark(ds, &cfg).map_err(|e| e.to_string())?;
    let expected = cfg.generators.len() * cfg.regressors.len();
    let complete = report.aggregates.len() == expected
        && report.aggregates.iter().all(|a| a.n_folds == 3 && a.mean.values().iter().all(|v| v.is_finite()));
    if complete {
        Ok(format!("{} aggregate rows, all finite", report.aggregates.len()))
    } else {
        Err(format!("incomplete table: {} of {expected} aggregates", report.aggregates.len()))
    }
}

// 9
fn real_data_smoke() -> Verdict {
    match abalone_path() {
        Some(p) => {
            let ds = load_abalone(&p);
            let shape = (ds.n_rows(), ds.n_features());
            match full_grid(&ds) {
                Ok(d) => check(shape == (4177, 8), format!("abalone {shape:?}: {d}")),
                Err(e) => Verdict::Fail(format!("abalone {shape:?}: {e}")),
            }
        }
        None => {
            let ds = abalone_shaped_stand_in();
            let stand_in = match full_grid(&ds) {
                Ok(d) => format!("abalone-shaped stand-in ran the full grid: {d}"),
                Err(e) => format!("abalone-shaped stand-in FAILED: {e}"),
            };
            Verdict::NotRun(format!("abalone CSV not found (set ABALONE_CSV); {stand_in}"))
        }
    }
}

// 10
fn determinism(a: &BenchmarkReport, b: &BenchmarkReport) -> Verdict {
    let bytes = |r: &BenchmarkReport| {
        let mut rows = Vec::new();
        r.write_rows_csv(&mut rows).unwrap();
        let mut agg = Vec::new();
        r.write_aggregates_csv(&mut agg).unwrap();
        (rows, agg)
    };
    let (ra, aa) = bytes(a);
    let (rb, ab) = bytes(b);
    check(
        ra == rb && aa == ab,
        format!("rows CSV {} bytes identical: {}; aggregates identical: {}", ra.len(), ra == rb, aa == ab),
    )
}

fn timed(id: u32, name: &'static str, budget: Duration, f: impl FnOnce() -> Verdict) -> Outcome {
    let t = Instant::now();
    let verdict = f();
    let outcome = Outcome {
        id,
        name,
        verdict,
        elapsed: t.elapsed(),
        budget,
    };
    report(&outcome);
    outcome
}

fn report(o: &Outcome) {
    let over = o.elapsed > o.budget;
    let (tag, detail) = match &o.verdict {
        Verdict::Pass(d) if over => ("FAIL", format!("{d}; over time budget")),
        Verdict::Pass(d) => ("PASS", d.clone()),
        Verdict::Fail(d) => ("FAIL", d.clone()),
        Verdict::Warn(d) => ("WARN", d.clone()),
        Verdict::NotRun(d) => ("NOT RUN", d.clone()),
    };
    println!(
        "criterion {:>2} [{tag}] {} ({:.1}s of {}s): {detail}",
        o.id,
        o.name,
        o.elapsed.as_secs_f64(),
        o.budget.as_secs()
    );
}

fn failed(o: &Outcome) -> bool {
    matches!(o.verdict, Verdict::Fail(_)) || (matches!(o.verdict, Verdict::Pass(_)) && o.elapsed > o.budget)
}

fn main() {
    // `cargo test -- --list` and filters from the default harness are not supported
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results = vec![
        timed(1, "gradient fidelity", mins(1), gradient_fidelity),
        timed(2, "KDE correctness", mins(1), kde_correctness),
        timed(3, "weighting laws", mins(1), weighting_laws),
        timed(4, "oracle equivalences", mins(1), oracle_equivalences),
        timed(5, "DAVID degenerate limit", mins(1), degenerate_limit),
        timed(6, "training progress", mins(10), training_progress),
    ];

    let t = Instant::now();
    let first = eval::run_benchmark(&benchmark_data(7), &benchmark_config(7));
    let bench_time = t.elapsed();
    match &first {
        Ok(r) => {
            print!("{}", r.format_table());
            results.push(timed(7, "DAVID beats baseline", mins(60), || {
                match david_beats_baseline(r) {
                    _ if bench_time > mins(60) => Verdict::Fail(format!("benchmark took {:.0}s", bench_time.as_secs_f64())),
                    Verdict::Pass(d) => Verdict::Pass(format!("{d}; benchmark {:.0}s", bench_time.as_secs_f64())),
                    Verdict::Fail(d) => Verdict::Fail(format!("{d}; benchmark {:.0}s", bench_time.as_secs_f64())),
                    v => v,
                }
            }));
            results.push(timed(8, "ablation ordering (soft)", mins(60), || ablation_order(r)));
        }
        Err(e) => {
            for (id, name) in [(7, "DAVID beats baseline"), (8, "ablation ordering (soft)")] {
                results.push(timed(id, name, mins(60), || Verdict::Fail(format!("benchmark failed: {e}"))));
            }
        }
    }
    results.push(timed(9, "real-data smoke", mins(30), real_data_smoke));
    results.push(timed(10, "determinism", mins(60), || match (&first, eval::run_benchmark(&benchmark_data(7), &benchmark_config(7))) {
        (Ok(a), Ok(b)) => determinism(a, &b),
        (Err(e), _) => Verdict::Fail(format!("benchmark failed: {e}")),
        (_, Err(e)) => Verdict::Fail(format!("benchmark failed: {e}")),
    }));

    let n_failed = results.iter().filter(|o| failed(o)).count();
    println!("acceptance: {} of {} criteria failed", n_failed, results.len());
    if n_failed > 0 {
        std::process::exit(1);
    }
}
