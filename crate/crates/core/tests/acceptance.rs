//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test -p bnet --test acceptance -- 1 3 7`.

use bnet::chebyshev::{lebesgue_bound, lebesgue_constant, lowrank_residual, GridKind, Interval, LowRankForm};
use bnet::complex_embed::{embed_chain, embedded_apply};
use bnet::complexity::{count_params_formula, count_params_layers, fit_exponent};
use bnet::dataset::{generate, generate_range, DatasetSpec, Sample};
use bnet::factors::{butterfly_init, inflate, materialize, random_init, InitKind, Stage, Variant};
use bnet::functional::{energy_e1, square_sum_apply, SquareSumLayer};
use bnet::metrics::{error_report, theorem3_bound, ErrorReport, NormKind};
use bnet::oracle::{dense_kernel, KernelSign};
use bnet::training::{evaluate, gradient, loss, train, TrainConfig};
use bnet::{apply, ButterflyGeometry, Complex64};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<String, String>;

fn geo(n: usize, k: usize, l: usize, lx: usize, r: usize) -> ButterflyGeometry {
    ButterflyGeometry::new(n, k, 0, l, lx, r).unwrap()
}

fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Published errors `(K, L, Lξ, ε₁, ε₂, ε∞)` at N = 1024, r = 8.
const PUBLISHED_ERRORS: [(usize, usize, usize, f64, f64, f64); 18] = [
    (64, 4, 1, 2.06e-1, 2.46e-1, 2.56e-1),
    (64, 4, 2, 2.02e-1, 2.60e-1, 2.66e-1),
    (64, 4, 3, 1.90e-1, 2.89e-1, 2.72e-1),
    (64, 5, 1, 1.79e-3, 2.56e-3, 2.31e-3),
    (64, 5, 2, 1.69e-3, 2.32e-3, 1.84e-3),
    (64, 5, 3, 1.61e-3, 2.16e-3, 1.94e-3),
    (64, 6, 1, 9.21e-6, 1.30e-5, 1.94e-5),
    (64, 6, 2, 8.90e-6, 1.33e-5, 1.76e-5),
    (64, 6, 3, 8.65e-6, 1.49e-5, 1.70e-5),
    (256, 6, 1, 2.52e-1, 3.40e-1, 2.82e-1),
    (256, 6, 2, 2.51e-1, 3.45e-1, 2.89e-1),
    (256, 6, 3, 2.46e-1, 3.60e-1, 2.95e-1),
    (256, 7, 1, 2.03e-3, 3.40e-3, 2.44e-3),
    (256, 7, 2, 1.97e-3, 3.33e-3, 2.01e-3),
    (256, 7, 3, 1.91e-3, 3.15e-3, 2.11e-3),
    (256, 8, 1, 1.15e-5, 2.01e-5, 2.00e-5),
    (256, 8, 2, 1.13e-5, 2.04e-5, 1.82e-5),
    (256, 8, 3, 1.10e-5, 2.07e-5, 1.77e-5),
];

fn table3_measured() -> Vec<ErrorReport> {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<ErrorReport>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            PUBLISHED_ERRORS
                .iter()
                .map(|&(k, l, lx, ..)| error_report(&butterfly_init(&geo(1024, k, l, lx, 8)).unwrap()).unwrap())
                .collect()
        })
        .clone()
}

/// Published norms are of the transposed (N×K) matrix, so its ε₁ is our
/// ε∞ and vice versa.
fn published_orientation(e: &ErrorReport) -> [f64; 3] {
    [e.eps_inf, e.eps2, e.eps1]
}

fn criterion_1() -> Outcome {
    let measured = table3_measured();
    let mut worst: f64 = 1.0;
    let mut direct_misses = 0;
    for (row, e) in PUBLISHED_ERRORS.iter().zip(&measured) {
        let published = [row.3, row.4, row.5];
        let ours = published_orientation(e);
        println!(
            "    K={:<3} L={} Lxi={}  eps1 {:.2e} ({:.2e})  eps2 {:.2e} ({:.2e})  epsInf {:.2e} ({:.2e})",
            row.0, row.1, row.2, ours[0], published[0], ours[1], published[1], ours[2], published[2]
        );
        for (a, b) in ours.iter().zip(published) {
            worst = worst.max(a / b).max(b / a);
        }
        let direct = [e.eps1, e.eps2, e.eps_inf];
        direct_misses += direct.iter().zip(published).filter(|(a, b)| **a / b > 2.0 || b / **a > 2.0).count();
    }
    check(
        worst <= 2.0,
        format!("54 entries, worst ratio {worst:.3} (untransposed mapping would miss {direct_misses})"),
    )
}

fn criterion_2() -> Outcome {
    let measured = table3_measured();
    let mut worst: f64 = 0.0;
    for (i, row) in PUBLISHED_ERRORS.iter().enumerate() {
        if let Some(j) = PUBLISHED_ERRORS.iter().position(|r| r.0 == row.0 && r.2 == row.2 && r.1 == row.1 + 1) {
            let (a, b) = (published_orientation(&measured[i]), published_orientation(&measured[j]));
            for p in 0..3 {
                worst = worst.max(b[p] / a[p]);
            }
        }
    }
    check(worst <= 1.0 / 50.0, format!("largest eps(L+1)/eps(L) = 1/{:.0}", 1.0 / worst))
}

fn admissible_geometry() -> impl Strategy<Value = ButterflyGeometry> {
    (5usize..=8, 2usize..=5, prop::sample::select(vec![9usize, 10, 12, 16]), 0usize..=5, 0usize..=3).prop_filter_map(
        "admissible",
        |(log_n, log_k, r, lx, extra)| {
            let log_k = log_k.min(log_n);
            let l = (log_k + extra).min(log_n);
            let g = ButterflyGeometry::new(1 << log_n, 1 << log_k, 0, l, lx.min(log_k).min(l), r).ok()?;
            g.theorem3_admissible().then_some(g)
        },
    )
}

fn criterion_3() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 40, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let count = std::cell::Cell::new(0usize);
    let tightest = std::cell::Cell::new(0.0f64);
    let result = runner.run(&admissible_geometry(), |g| {
        let e = error_report(&butterfly_init(&g).unwrap()).unwrap();
        for p in NormKind::ALL {
            let b = theorem3_bound(&g, p);
            prop_assert!(b.admissible);
            prop_assert!(e.absolute(p) <= b.value, "{:?} p={:?}: {} > {}", g, p, e.absolute(p), b.value);
            prop_assert!(e.relative(p) <= b.value);
            if let Some(d) = b.depth_form {
                prop_assert!(e.absolute(p) <= d);
            }
            tightest.set(tightest.get().max(e.absolute(p) / b.value));
        }
        count.set(count.get() + 1);
        Ok(())
    });
    match result {
        Ok(()) => check(
            count.get() >= 30,
            format!("{} admissible geometries, largest error/bound {:.1e}", count.get(), tightest.get()),
        ),
        Err(e) => Err(format!("{e}")),
    }
}

fn criterion_4() -> Outcome {
    let geometries = [
        geo(64, 16, 4, 1, 4),
        geo(256, 64, 6, 2, 8),
        geo(256, 32, 8, 3, 5),
        geo(1024, 64, 6, 1, 8),
        geo(1024, 256, 8, 3, 9),
        geo(512, 512, 9, 0, 12),
        geo(128, 16, 4, 4, 16),
        geo(256, 64, 6, 6, 3),
    ];
    let mut checked = 0;
    for g in &geometries {
        let f = butterfly_init(g).unwrap();
        let (lam, r) = (lebesgue_bound(g.rank()), g.rank() as f64);
        let m = g.freq_leaf_len() as f64;
        let tol = 1e-9;
        for n in f.factor_norms() {
            let (one_max, inf_max) = match n.stage {
                Stage::Output => (m * lam, lam),
                Stage::Switch => (r, r),
                Stage::Time(_) => (2.0 * lam, 2.0 * r * lam),
                Stage::Frequency(_) => (2.0 * r * lam, 2.0 * lam),
                Stage::Interpolation => continue,
            };
            if n.norm_one > one_max + tol || n.norm_inf > inf_max + tol {
                return Err(format!("{:?} {}: ‖·‖₁={} ‖·‖∞={}", g, n.stage.label(), n.norm_one, n.norm_inf));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} factor norms on {} geometries within bounds", geometries.len()))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let r = [4usize, 8, 12][trial % 3];
        let limit = r as f64 / (PI * std::f64::consts::E);
        let wa = rng.gen_range(1.0..200.0);
        let wb = rng.gen_range(0.05..1.0) * limit / wa;
        let a0 = rng.gen_range(-300.0..300.0);
        let b0 = rng.gen_range(-0.5..0.5);
        let (a, b) = (Interval::new(a0, a0 + wa).unwrap(), Interval::new(b0, b0 + wb).unwrap());
        for form in [LowRankForm::Time, LowRankForm::Frequency] {
            let c = lowrank_residual(&a, &b, r, 48, form, GridKind::Roots).unwrap();
            if !c.admissible || c.measured_sup_error > c.theorem_bound {
                return Err(format!("trial {trial} {form:?}: {} > {}", c.measured_sup_error, c.theorem_bound));
            }
            worst = worst.max(c.measured_sup_error / c.theorem_bound);
        }
    }
    Ok(format!("100 checks, largest measured/bound {worst:.2e}"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn criterion_6() -> Outcome {
    let geometries = [geo(64, 16, 4, 1, 3), geo(256, 64, 6, 2, 8), geo(512, 32, 9, 3, 4), geo(1024, 256, 8, 3, 8)];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for g in &geometries {
        let f = butterfly_init(g).unwrap();
        let m = materialize(&f).unwrap();
        for _ in 0..100 {
            let x = rand_vec(g.n(), &mut rng);
            let (a, b) = (apply(&f, &x).unwrap(), m.mul_vec(&x).unwrap());
            let d: Vec<Complex64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
            worst = worst.max(norm(&d) / norm(&b));
        }
    }
    let (mut ns, mut ts) = (Vec::new(), Vec::new());
    for log_n in 8..=14 {
        let n = 1usize << log_n;
        let g = geo(n, 16, log_n, 2, 4);
        let f = butterfly_init(&g).unwrap();
        let x = rand_vec(n, &mut rng);
        let mut ws = bnet::Workspace::new(&f);
        let mut y = vec![Complex64::new(0.0, 0.0); 16];
        let reps = (1usize << 20) / n;
        let samples: Vec<f64> = (0..7)
            .map(|_| {
                let t = Instant::now();
                for _ in 0..reps {
                    ws.apply_into(&f, std::hint::black_box(&x), &mut y).unwrap();
                }
                t.elapsed().as_secs_f64() / reps as f64
            })
            .collect();
        ns.push(n as f64);
        ts.push(median(samples));
    }
    let slope = fit_exponent(&ns, &ts);
    check(
        worst <= 1e-12 && slope <= 1.25,
        format!("max relative apply/materialize gap {worst:.1e}; time exponent {slope:.3}"),
    )
}

/// Hand-written evaluation of the displayed count sums.
fn hand_count(n: u64, k: u64, l: u32, lx: u32, r: u64, inflated: bool) -> u64 {
    let lt = l - lx;
    let q = 4 * r;
    let mut total = n / 2u64.pow(l) * 16 * r + q;
    for ell in 1..=lt {
        let c = 2u64.pow(ell).min(k / 2u64.pow(lx));
        total += if inflated { c * c } else { c } * q * q * 2 + c * q;
    }
    let s = 2u64.pow(l).min(k);
    total += s * q * q + s * q;
    for ell in lt + 1..=l {
        let c = 2u64.pow(l - ell);
        total += if inflated { c * c } else { c } * q * q * 2 + c * q;
    }
    let m = if k >= 2u64.pow(l) { k / 2u64.pow(l) } else { 1 };
    total + m * 16 * r + m * q
}

fn criterion_7() -> Outcome {
    for (n, k, l, lx, r) in [(1024, 128, 8, 1, 4), (1024, 128, 8, 3, 4), (256, 32, 6, 2, 3), (8, 4, 2, 1, 1), (4096, 4096, 12, 6, 8)]
    {
        let g = geo(n, k, l, lx, r);
        for inflated in [false, true] {
            let got = count_params_formula(&g, inflated).total;
            let want = hand_count(n as u64, k as u64, l as u32, lx as u32, r as u64, inflated);
            if got != want {
                return Err(format!("formula {got} != hand sum {want} at {:?}", (n, k, l, lx, r, inflated)));
            }
        }
    }
    let table5 = [(1, 136304u64, 3533936u64), (2, 87728, 915120), (3, 66608, 275504)];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (lx, b, i) in table5 {
        let g = geo(1024, 128, 8, lx, 4);
        let (cb, ci) = (count_params_layers(&g, false).total, count_params_layers(&g, true).total);
        worst = worst.max((cb as f64 / b as f64 - 1.0).abs()).max((ci as f64 / i as f64 - 1.0).abs());
        parts.push(format!("{cb}/{ci}"));
    }
    let literal = count_params_formula(&geo(1024, 128, 8, 1, 4), false).total;
    check(
        worst <= 0.01,
        format!("formula = hand sums; published counts {} (max deviation {:.2}%); literal Lxi=1 total {literal}", parts.join(", "), 100.0 * worst),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let shapes = [(32, 8, 3, 1, 2), (64, 16, 4, 2, 3), (64, 64, 6, 3, 2), (128, 16, 5, 0, 4)];
    for trial in 0..100 {
        let (n, k, l, lx, r) = shapes[trial % shapes.len()];
        let g = geo(n, k, l, lx, r);
        let f = if trial % 2 == 0 { butterfly_init(&g).unwrap() } else { random_init(&g, trial as u64, Variant::Butterfly) };
        let chain = embed_chain(&f);
        let x = rand_vec(n, &mut rng);
        let (a, b) = (embedded_apply(&chain, &x).unwrap(), apply(&f, &x).unwrap());
        let d: Vec<Complex64> = a.iter().zip(&b).map(|(u, v)| u - v).collect();
        worst = worst.max(norm(&d) / norm(&b));
    }
    check(worst <= 1e-10, format!("100 trials, max relative gap {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let shapes = [(8, 4, 3, 1, 2), (16, 8, 3, 2, 2), (32, 8, 4, 1, 3), (16, 16, 4, 4, 2)];
    let mut worst: f64 = 0.0;
    for inst in 0..20 {
        let (n, k, l, lx, r) = shapes[inst % shapes.len()];
        let g = geo(n, k, l, lx, r);
        let variant = if inst % 3 == 2 { Variant::Inflated } else { Variant::Butterfly };
        let f = random_init(&g, 100 + inst as u64, variant);
        let batch: Vec<Sample> = (0..3)
            .map(|_| Sample {
                x: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                y: rand_vec(k, &mut rng),
            })
            .collect();
        let analytic: Vec<Complex64> = gradient(&f, &batch).unwrap().into_iter().flatten().flatten().collect();
        let params = f.parameters();
        let h = 1e-6;
        let mut fd = Vec::with_capacity(params.len());
        let mut probe = f.clone();
        let mut eval = |p: &[Complex64]| {
            probe.set_parameters(p).unwrap();
            loss(&probe, &batch).unwrap()
        };
        for i in 0..params.len() {
            let mut p = params.clone();
            let mut part = |d: Complex64| {
                p[i] = params[i] + d;
                let up = eval(&p);
                p[i] = params[i] - d;
                let down = eval(&p);
                (up - down) / (2.0 * h)
            };
            let re = part(Complex64::new(h, 0.0));
            let im = part(Complex64::new(0.0, h));
            fd.push(Complex64::new(re, im));
        }
        let d: Vec<Complex64> = fd.iter().zip(&analytic).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&d) / norm(&analytic));
    }
    check(worst <= 1e-5, format!("20 instances, max relative gradient gap {worst:.1e}"))
}

/// Fixed seeds of the training-trend experiment.
const DATA_SEED: u64 = 2024;
const INIT_SEED: u64 = 7;

fn desk_config(init: InitKind) -> TrainConfig {
    TrainConfig {
        batch_size: 32,
        max_iters: 2000,
        lr_init: TrainConfig::default_lr(init),
        seed: DATA_SEED,
        eval_samples: 1000,
        ..TrainConfig::default()
    }
}

fn criterion_10() -> Outcome {
    let spec = DatasetSpec::new(256, 0.0, 10.0, 0, 32).unwrap().with_seed(DATA_SEED);
    let mut lines = Vec::new();
    let mut ok = true;
    for lx in [1usize, 2, 3] {
        let g = geo(256, 32, 8, lx, 4);
        let bf = butterfly_init(&g).unwrap();
        let (bf_trained, rb) = train(&bf, &spec, &desk_config(InitKind::Butterfly)).unwrap();
        let rnd = random_init(&g, INIT_SEED, Variant::Butterfly);
        let (rnd_trained, rr) = train(&rnd, &spec, &desk_config(InitKind::Random)).unwrap();
        let wide = inflate(&bf).unwrap();
        let (_, ri) = train(&wide, &spec, &desk_config(InitKind::Butterfly)).unwrap();
        let count_ratio = count_params_layers(&g, true).total as f64 / count_params_layers(&g, false).total as f64;

        let a = rb.post_train_rel_error < rb.pre_train_rel_error;
        let b = rb.post_train_rel_error <= 0.1 * rr.post_train_rel_error;
        let ratio = ri.post_train_rel_error / rb.post_train_rel_error;
        let c_applies = count_ratio >= 3.0;
        let c = !c_applies || (1.0 / 3.0..=3.0).contains(&ratio);

        let shifted = DatasetSpec { g_center: 20.0, seed: DATA_SEED + 1, ..spec.clone() };
        let at = |f, s: &DatasetSpec| evaluate(f, &generate(&s.clone().with_count(1000)).unwrap()).unwrap().0;
        let home = DatasetSpec { seed: DATA_SEED + 2, ..spec.clone() };
        let growth_b = at(&bf_trained, &shifted) / at(&bf_trained, &home);
        let growth_r = at(&rnd_trained, &shifted) / at(&rnd_trained, &home);
        let d = growth_r > growth_b;

        ok &= a && b && c && d;
        lines.push(format!(
            "    Lxi={lx}: butterfly {:.2e} -> {:.2e} | random {:.2e} -> {:.2e} | inflated {:.2e} (x{count_ratio:.1} params{}) | shift-20 growth butterfly {growth_b:.2} random {growth_r:.2}  [a {} b {} c {} d {}]",
            rb.pre_train_rel_error,
            rb.post_train_rel_error,
            rr.pre_train_rel_error,
            rr.post_train_rel_error,
            ri.post_train_rel_error,
            if c_applies { "" } else { ", (c) not applicable" },
            a, b, c, d
        ));
    }
    for l in &lines {
        println!("{l}");
    }
    check(ok, "trends (a)-(d) over Lxi = 1, 2, 3".into())
}

fn criterion_11() -> Outcome {
    let n = 256;
    let k = 32;
    let g = geo(n, k, 8, 2, 6);
    let f = butterfly_init(&g).unwrap();
    let eps2 = error_report(&f).unwrap().eps2;
    let kernel = dense_kernel(&g).unwrap();
    let exact = SquareSumLayer::exact(k);
    let raw = exact.for_raw_features(n);
    let spec = DatasetSpec::new(n, 0.0, 8.0, 0, k).unwrap().with_seed(11);
    let mut worst_exact: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for s in generate_range(&spec, 0, 50).unwrap() {
        let scale = 1.0 / s.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = s.x.iter().map(|v| v * scale).collect();
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let e1 = energy_e1(&x, k).unwrap();
        let unitary: Vec<Complex64> = kernel.mul_vec(&xc).unwrap().iter().map(|z| z / (n as f64).sqrt()).collect();
        worst_exact = worst_exact.max((square_sum_apply(&exact, &unitary).unwrap() - e1).abs());
        worst_gap = worst_gap.max((square_sum_apply(&raw, &apply(&f, &xc).unwrap()).unwrap() - e1).abs());
    }
    check(
        worst_exact <= 1e-12 && worst_gap <= 10.0 * eps2,
        format!("oracle gap {worst_exact:.1e}; butterfly gap {worst_gap:.2e} vs 10·eps2 = {:.2e}", 10.0 * eps2),
    )
}

fn criterion_12() -> Outcome {
    for r in 2..=32 {
        let lam = lebesgue_constant(r, 4001, GridKind::Roots).unwrap();
        if lam > lebesgue_bound(r) + 1e-12 {
            return Err(format!("roots grid r={r}: Λ={lam} > {}", lebesgue_bound(r)));
        }
    }
    for r in 2..=8 {
        let lam = lebesgue_constant(r, 4001, GridKind::Literal).unwrap();
        if (lam - (2 * r - 1) as f64).abs() > 1e-9 {
            return Err(format!("literal grid r={r}: Λ={lam}"));
        }
    }
    // Unitarity of the scaled full DFT, for both kernel signs.
    for sign in [KernelSign::Negative, KernelSign::Positive] {
        let g = geo(64, 64, 4, 0, 2).with_sign(sign);
        let k = dense_kernel(&g).unwrap().scale(1.0 / 8.0);
        for a in 0..64 {
            for b in 0..64 {
                let dot: Complex64 = k.row(a).iter().zip(k.row(b)).map(|(x, y)| x * y.conj()).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                if (dot - Complex64::new(want, 0.0)).norm() > 1e-12 {
                    return Err(format!("rows {a},{b} inner product {dot}"));
                }
            }
        }
    }
    Ok("roots-grid Λ ≤ (2/π)ln r + 1 for r ≤ 32; literal grid Λ = 2r−1; scaled DFT unitary".into())
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Outcome); 12] = [
        (1, "accuracy table reproduction", criterion_1),
        (2, "exponential decay in depth", criterion_2),
        (3, "accuracy bound soundness", criterion_3),
        (4, "factor norm bounds", criterion_4),
        (5, "low-rank expansion bound", criterion_5),
        (6, "fast apply correctness and scaling", criterion_6),
        (7, "parameter counting", criterion_7),
        (8, "real embedding equivalence", criterion_8),
        (9, "gradient correctness", criterion_9),
        (10, "training trends", criterion_10),
        (11, "energy functional", criterion_11),
        (12, "Lebesgue and unitarity checks", criterion_12),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} ({secs:.1}s)"),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {d} ({secs:.1}s)")
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
