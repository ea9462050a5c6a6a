//! Invariant suite behind `bnet verify`.

use bnet::chebyshev::{lebesgue_bound, lebesgue_constant, GridKind};
use bnet::complex_embed::{embed_chain, embedded_apply};
use bnet::dataset::{generate, DatasetSpec};
use bnet::factors::{butterfly_init, inflate, materialize, random_init, read_factors, write_factors, Stage, Variant};
use bnet::metrics::{error_report, theorem3_bound, NormKind};
use bnet::training::gradient;
use bnet::{apply, ButterflyGeometry, Complex64};
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct VerifyArgs {
    /// Small geometries only.
    #[arg(long)]
    quick: bool,
    /// Also load and check this factor file.
    #[arg(long)]
    factors: Option<PathBuf>,
}

type Check = Result<String, String>;

fn geometries(quick: bool) -> Vec<ButterflyGeometry> {
    let mut shapes = vec![(64, 16, 4, 1, 4), (128, 32, 5, 2, 6), (256, 64, 6, 3, 9)];
    if !quick {
        shapes.extend([(1024, 64, 6, 1, 8), (1024, 256, 8, 3, 9)]);
    }
    shapes.into_iter().map(|(n, k, l, lx, r)| ButterflyGeometry::new(n, k, 0, l, lx, r).unwrap()).collect()
}

fn noise(n: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            Complex64::new(a, b)
        })
        .collect()
}

fn rel_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    d / b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt()
}

fn fail<T>(msg: String) -> Result<T, String> {
    Err(msg)
}

fn lebesgue() -> Check {
    for r in 2..=16 {
        let lam = lebesgue_constant(r, 2001, GridKind::Roots).map_err(|e| e.to_string())?;
        if lam > lebesgue_bound(r) {
            return fail(format!("r={r}: {lam} > {}", lebesgue_bound(r)));
        }
    }
    Ok("roots grid within (2/π)ln r + 1 for r ≤ 16".into())
}

fn apply_matches(gs: &[ButterflyGeometry], seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    for (i, g) in gs.iter().enumerate() {
        let f = butterfly_init(g).map_err(|e| e.to_string())?;
        let m = materialize(&f).map_err(|e| e.to_string())?;
        let x = noise(g.n(), seed + i as u64);
        worst = worst.max(rel_gap(&apply(&f, &x).unwrap(), &m.mul_vec(&x).unwrap()));
    }
    if worst <= 1e-12 {
        Ok(format!("max relative gap {worst:.1e}"))
    } else {
        fail(format!("relative gap {worst:.1e} > 1e-12"))
    }
}

fn bounds(gs: &[ButterflyGeometry]) -> Check {
    for g in gs {
        let f = butterfly_init(g).map_err(|e| e.to_string())?;
        let e = error_report(&f).map_err(|e| e.to_string())?;
        if g.theorem3_admissible() {
            for p in NormKind::ALL {
                if e.absolute(p) > theorem3_bound(g, p).value {
                    return fail(format!("{g:?}: error above bound for {p:?}"));
                }
            }
        }
        let (lam, r) = (lebesgue_bound(g.rank()), g.rank() as f64);
        for n in f.factor_norms() {
            let ok = match n.stage {
                Stage::Output => n.norm_inf <= lam + 1e-9,
                Stage::Switch => n.norm_one <= r + 1e-9 && n.norm_inf <= r + 1e-9,
                Stage::Time(_) => n.norm_one <= 2.0 * lam + 1e-9,
                Stage::Frequency(_) => n.norm_inf <= 2.0 * lam + 1e-9,
                Stage::Interpolation => true,
            };
            if !ok {
                return fail(format!("{} norm bound violated", n.stage.label()));
            }
        }
    }
    Ok("accuracy bound and factor norm bounds hold".into())
}

fn inflation(gs: &[ButterflyGeometry]) -> Check {
    for g in gs.iter().take(2) {
        let f = butterfly_init(g).map_err(|e| e.to_string())?;
        let wide = inflate(&f).map_err(|e| e.to_string())?;
        let (a, b) = (materialize(&f).unwrap(), materialize(&wide).unwrap());
        let gap = a.sub(&b).unwrap().data().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if gap > 1e-15 {
            return fail(format!("inflation changed the operator by {gap:.1e}"));
        }
    }
    Ok("inflation preserves the operator".into())
}

fn embedding(seed: u64) -> Check {
    let g = ButterflyGeometry::new(64, 16, 0, 4, 2, 3).unwrap();
    let f = random_init(&g, seed, Variant::Butterfly);
    let x = noise(64, seed);
    let gap = rel_gap(&embedded_apply(&embed_chain(&f), &x).unwrap(), &apply(&f, &x).unwrap());
    if gap <= 1e-10 {
        Ok(format!("embedded ReLU chain gap {gap:.1e}"))
    } else {
        fail(format!("embedded chain gap {gap:.1e}"))
    }
}

fn roundtrip(seed: u64) -> Check {
    let g = ButterflyGeometry::new(128, 32, 0, 5, 2, 4).unwrap();
    for f in [butterfly_init(&g).unwrap(), random_init(&g, seed, Variant::Inflated)] {
        let mut buf = Vec::new();
        write_factors(&f, &mut buf).map_err(|e| e.to_string())?;
        if read_factors(buf.as_slice()).map_err(|e| e.to_string())? != f {
            return fail("serialization round trip changed the factors".into());
        }
    }
    Ok("bit-exact serialization".into())
}

fn gradients(seed: u64) -> Check {
    let g = ButterflyGeometry::new(16, 8, 0, 3, 1, 2).unwrap();
    let f = random_init(&g, seed, Variant::Butterfly);
    let spec = DatasetSpec::new(16, 0.0, 3.0, 0, 8).unwrap().with_seed(seed).with_count(3);
    let batch = generate(&spec).map_err(|e| e.to_string())?;
    let grads: Vec<Complex64> = gradient(&f, &batch).unwrap().into_iter().flatten().flatten().collect();
    let params = f.parameters();
    let h = 1e-6;
    let mut probe = f.clone();
    let mut worst: f64 = 0.0;
    for i in (0..params.len()).step_by(7) {
        let mut at = |d: Complex64| {
            let mut p = params.clone();
            p[i] += d;
            probe.set_parameters(&p).unwrap();
            bnet::training::loss(&probe, &batch).unwrap()
        };
        let re = (at(Complex64::new(h, 0.0)) - at(Complex64::new(-h, 0.0))) / (2.0 * h);
        let im = (at(Complex64::new(0.0, h)) - at(Complex64::new(0.0, -h))) / (2.0 * h);
        worst = worst.max((Complex64::new(re, im) - grads[i]).norm() / grads[i].norm().max(1e-12));
    }
    if worst <= 1e-5 {
        Ok(format!("finite-difference gap {worst:.1e}"))
    } else {
        fail(format!("finite-difference gap {worst:.1e}"))
    }
}

fn factor_file(path: &PathBuf) -> Check {
    let file = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match read_factors(std::io::BufReader::new(file)) {
        Ok(f) => Ok(format!("{}: {} factors, {} parameters, masks contained", path.display(), f.factors().len(), f.mask_count())),
        Err(e) => fail(format!("{}: {e}", path.display())),
    }
}

pub fn run(a: &VerifyArgs, seed: u64) -> bnet::Result<bool> {
    let gs = geometries(a.quick);
    let mut checks: Vec<(&str, Check)> = vec![
        ("lebesgue", lebesgue()),
        ("apply-vs-materialize", apply_matches(&gs, seed)),
        ("bounds", bounds(&gs)),
        ("inflation", inflation(&gs)),
        ("embedding", embedding(seed)),
        ("serialization", roundtrip(seed)),
        ("gradient", gradients(seed)),
    ];
    if let Some(p) = &a.factors {
        checks.push(("factor-file", factor_file(p)));
    }
    let mut ok = true;
    println!("check,status,detail");
    for (name, result) in checks {
        let (status, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                ok = false;
                ("FAIL", d)
            }
        };
        println!("{name},{status},\"{}\"", detail.replace('"', "'"));
    }
    Ok(ok)
}
