//! `bnet`: experiment driver. Results go to standard output as CSV with a
//! header row; progress and summaries go to standard error.
//!
//! Exit codes: 0 success, 1 invariant or runtime failure, 2 invalid arguments.

mod verify;

use bnet::chebyshev::GridKind;
use bnet::complexity::{count_params_formula, count_params_layers, fit_exponent, ComplexityRow, COMPLEXITY_HEADER};
use bnet::dataset::{transfer_specs, DatasetSpec};
use bnet::factors::{butterfly_init, inflate, random_init, write_factors, InitKind, Variant};
use bnet::metrics::{error_report, theorem3_bound, NormKind};
use bnet::training::{evaluate, train, Optimizer, TrainConfig};
use bnet::{ButterflyGeometry, Error, KernelSign};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bnet", version, about = "Butterfly factorization of windowed Fourier transforms")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "BNET_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relative p-norm errors of butterfly-initialized chains against the dense kernel.
    ///
    /// CSV columns: N,K,r,L,Lxi,eps1,eps2,epsInf,theorem3_bound_p2,admissible.
    /// With --orientation transposed, eps1 and epsInf are the norms of the
    /// N×K transpose, the orientation of the published accuracy tables.
    ApproxError(ApproxArgs),
    /// Parameter counts per geometry and variant.
    ///
    /// CSV columns: N,K,L,L_xi,r,variant,multiplicative,bias,total.
    /// Log-log exponents of total against N are printed to standard error.
    Complexity(ComplexityArgs),
    /// Train a chain on generated data.
    ///
    /// CSV columns: iteration,loss,lr. With --transfer: center,mean,std.
    Train(TrainArgs),
    /// Run the invariant suite and print one PASS/FAIL line per check.
    Verify(verify::VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Sign {
    Negative,
    Positive,
}

impl From<Sign> for KernelSign {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Negative => KernelSign::Negative,
            Sign::Positive => KernelSign::Positive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Grid {
    Roots,
    Literal,
}

impl From<Grid> for GridKind {
    fn from(g: Grid) -> Self {
        match g {
            Grid::Roots => GridKind::Roots,
            Grid::Literal => GridKind::Literal,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Orientation {
    Operator,
    Transposed,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    k0: usize,
    #[arg(long, default_value_t = 8)]
    r: usize,
    /// Depths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [4, 5, 6])]
    l: Vec<usize>,
    /// Frequency-side depths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    lxi: Vec<usize>,
    #[arg(long, value_enum, default_value = "roots")]
    grid: Grid,
    #[arg(long, value_enum, default_value = "negative")]
    sign: Sign,
    #[arg(long, value_enum, default_value = "operator")]
    orientation: Orientation,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Butterfly,
    Inflated,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountKind {
    /// Closed-form sums.
    Formula,
    /// Layer-by-layer accounting of the reference network.
    Layers,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Signal lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [256, 512, 1024, 2048, 4096, 8192, 16384])]
    n: Vec<usize>,
    /// Output size; 0 means K = N.
    #[arg(long, default_value_t = 16)]
    k: usize,
    /// Depth; default log2 N.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    lxi: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    r: usize,
    #[arg(long, value_enum, default_value = "both")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "formula")]
    count: CountKind,
}

#[derive(Args)]
struct TrainArgs {
    /// Signal family: dft-lfreq, dft-hfreq, dftsmooth-lfreq, dftsmooth-hfreq.
    #[arg(long, default_value = "dftsmooth-lfreq")]
    preset: String,
    /// Override the preset's signal length.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k0: Option<usize>,
    #[arg(long)]
    g_center: Option<f64>,
    #[arg(long)]
    g_width: Option<f64>,
    #[arg(long, default_value = "butterfly")]
    init: String,
    #[arg(long, default_value = "butterfly")]
    variant: String,
    /// Depth; default log2 N.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, default_value_t = 2)]
    lxi: usize,
    #[arg(long, default_value_t = 4)]
    r: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Initial learning rate; default 1e-4 for butterfly init, 1e-3 for random.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, default_value_t = 0.985)]
    decay_rate: f64,
    #[arg(long, default_value_t = 100)]
    decay_steps: usize,
    #[arg(long, default_value = "adam")]
    optimizer: String,
    #[arg(long, default_value_t = 1000)]
    eval_samples: usize,
    /// Write the trained factors here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// After training, evaluate on shifted centers `start:step:end`.
    #[arg(long)]
    transfer: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let result = match &cli.command {
        Command::ApproxError(a) => approx_error(a),
        Command::Complexity(a) => complexity(a),
        Command::Train(a) => train_cmd(a, cli.seed),
        Command::Verify(a) => verify::run(a, cli.seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument(_) => 2,
                _ => 1,
            })
        }
    }
}

fn out(s: &str) -> bnet::Result<()> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(s.as_bytes())?;
    Ok(())
}

fn approx_error(a: &ApproxArgs) -> bnet::Result<bool> {
    let mut s = String::from("N,K,r,L,Lxi,eps1,eps2,epsInf,theorem3_bound_p2,admissible\n");
    for &l in &a.l {
        for &lx in &a.lxi {
            let g = ButterflyGeometry::new(a.n, a.k, a.k0, l, lx, a.r)?.with_grid(a.grid.into()).with_sign(a.sign.into());
            let e = error_report(&butterfly_init(&g)?)?;
            let (e1, einf) = match a.orientation {
                Orientation::Operator => (e.eps1, e.eps_inf),
                Orientation::Transposed => (e.eps_inf, e.eps1),
            };
            let bound = theorem3_bound(&g, NormKind::Two);
            s.push_str(&format!(
                "{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{}\n",
                a.n, a.k, a.r, l, lx, e1, e.eps2, einf, bound.value, bound.admissible
            ));
        }
    }
    out(&s)?;
    Ok(true)
}

fn complexity(a: &ComplexityArgs) -> bnet::Result<bool> {
    let variants: &[Variant] = match a.variant {
        VariantArg::Butterfly => &[Variant::Butterfly],
        VariantArg::Inflated => &[Variant::Inflated],
        VariantArg::Both => &[Variant::Butterfly, Variant::Inflated],
    };
    let mut s = format!("{COMPLEXITY_HEADER}\n");
    for &lx in &a.lxi {
        for &variant in variants {
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for &n in &a.n {
                let k = if a.k == 0 { n } else { a.k };
                let l = a.l.unwrap_or(n.max(1).ilog2() as usize);
                let g = ButterflyGeometry::new(n, k, 0, l, lx, a.r)?;
                let inflated = variant == Variant::Inflated;
                let c = match a.count {
                    CountKind::Formula => count_params_formula(&g, inflated),
                    CountKind::Layers => count_params_layers(&g, inflated),
                };
                let row = ComplexityRow {
                    n,
                    k,
                    depth: l,
                    freq_depth: lx,
                    rank: a.r,
                    variant,
                    multiplicative: c.multiplicative,
                    bias: c.bias,
                    total: c.total,
                };
                s.push_str(&row.csv());
                s.push('\n');
                xs.push(n as f64);
                ys.push(c.total as f64);
            }
            if xs.len() >= 2 {
                eprintln!("Lxi={lx} {}: total ~ N^{:.3}", variant.name(), fit_exponent(&xs, &ys));
            }
        }
    }
    out(&s)?;
    Ok(true)
}

fn parse_transfer(s: &str) -> bnet::Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("bad --transfer `{s}`, expected start:step:end")))?;
    match parts[..] {
        [start, step, end] if step > 0.0 && end >= start => {
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + step * i as f64).collect())
        }
        _ => Err(Error::InvalidArgument(format!("bad --transfer `{s}`, expected start:step:end"))),
    }
}

fn train_cmd(a: &TrainArgs, seed: u64) -> bnet::Result<bool> {
    let base = DatasetSpec::preset(&a.preset)?;
    let spec = DatasetSpec::new(
        a.n.unwrap_or(base.n),
        a.g_center.unwrap_or(base.g_center),
        a.g_width.unwrap_or(base.g_width),
        a.k0.unwrap_or(base.k0),
        a.k.unwrap_or(base.k),
    )?
    .with_seed(seed);
    let init: InitKind = a.init.parse()?;
    let variant: Variant = a.variant.parse()?;
    let l = a.l.unwrap_or(spec.n.ilog2() as usize);
    let g = ButterflyGeometry::new(spec.n, spec.k, spec.k0, l, a.lxi, a.r)?;
    let factors = match init {
        InitKind::Butterfly => {
            let f = butterfly_init(&g)?;
            if variant == Variant::Inflated {
                inflate(&f)?
            } else {
                f
            }
        }
        InitKind::Random => random_init(&g, seed, variant),
    };
    let cfg = TrainConfig {
        batch_size: a.batch_size,
        max_iters: a.iters,
        lr_init: a.lr.unwrap_or(TrainConfig::default_lr(init)),
        lr_decay_rate: a.decay_rate,
        lr_decay_steps: a.decay_steps,
        optimizer: a.optimizer.parse::<Optimizer>()?,
        seed,
        eval_samples: a.eval_samples,
        ..TrainConfig::default()
    };
    let centers = a.transfer.as_deref().map(parse_transfer).transpose()?;
    let (trained, report) = train(&factors, &spec, &cfg)?;
    eprintln!(
        "{} init, {} variant, {} parameters: pre {:.3e} post {:.3e} (std {:.1e}) in {:.1}s",
        init.name(),
        variant.name(),
        trained.mask_count(),
        report.pre_train_rel_error,
        report.post_train_rel_error,
        report.post_train_rel_std,
        report.wall_seconds
    );
    if let Some(path) = &a.out {
        write_factors(&trained, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    match centers {
        Some(centers) => {
            let mut s = String::from("center,mean,std\n");
            let test = DatasetSpec { seed: seed.wrapping_add(1), count: a.eval_samples.max(1), ..spec.clone() };
            for t in transfer_specs(&test, &centers) {
                let (mean, std) = evaluate(&trained, &bnet::dataset::generate(&t)?)?;
                s.push_str(&format!("{},{:.6e},{:.6e}\n", t.g_center, mean, std));
            }
            out(&s)?;
        }
        None => out(&report.to_csv())?,
    }
    if let Some(it) = report.diverged_at {
        eprintln!("training diverged at iteration {it}");
        return Ok(false);
    }
    Ok(true)
}
