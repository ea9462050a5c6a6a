//! Parameter counts under the complex-to-real embedding, where each complex
//! weight becomes a 4×4 real block and each complex bias 4 reals.

use crate::factors::{ButterflyFactors, Stage, Variant};
use crate::geometry::ButterflyGeometry;
use std::fmt::Write as _;
use std::f64::consts::{E, PI};

/// One summand of a count, in real parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTerm {
    pub name: String,
    pub multiplicative: u64,
    pub bias: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCount {
    pub multiplicative: u64,
    pub bias: u64,
    pub total: u64,
    pub terms: Vec<CountTerm>,
}

impl ParamCount {
    fn from_terms(terms: Vec<CountTerm>) -> Self {
        let multiplicative = terms.iter().map(|t| t.multiplicative).sum();
        let bias = terms.iter().map(|t| t.bias).sum();
        ParamCount { multiplicative, bias, total: multiplicative + bias, terms }
    }

    pub fn term(&self, name: &str) -> Option<&CountTerm> {
        self.terms.iter().find(|t| t.name == name)
    }
}

fn term(name: impl Into<String>, multiplicative: u64, bias: u64) -> CountTerm {
    CountTerm { name: name.into(), multiplicative, bias }
}

/// Closed-form count, summed term by term exactly as displayed:
/// `N/2^L·16r + Σ min(2^ℓ, K/2^Lξ)(4r)²·2 + min(2^L, K)(4r)² + Σ 2^{L−ℓ}(4r)²·2
/// + max(1, K/2^L)16r`, plus the matching bias row. The inflated variant
/// squares the channel counts of the two recursive sums.
pub fn count_params_formula(g: &ButterflyGeometry, inflated: bool) -> ParamCount {
    let (n, k, r) = (g.n() as u64, g.k() as u64, g.rank() as u64);
    let (l, lt, lx) = (g.depth() as u32, g.time_depth() as u32, g.freq_depth() as u32);
    let c4 = 4 * r;
    let mut terms = vec![term("V", n / (1 << l) * 16 * r, c4)];
    for level in 1..=lt {
        let c = (1u64 << level).min(k >> lx);
        let ch = if inflated { c * c } else { c };
        terms.push(term(format!("H{level}"), ch * c4 * c4 * 2, c * c4));
    }
    let s = (1u64 << l).min(k);
    terms.push(term("M", s * c4 * c4, s * c4));
    for level in lt + 1..=l {
        let c = 1u64 << (l - level);
        let ch = if inflated { c * c } else { c };
        terms.push(term(format!("G{level}"), ch * c4 * c4 * 2, c * c4));
    }
    let m = (k >> l).max(1);
    terms.push(term("U", m * 16 * r, m * c4));
    ParamCount::from_terms(terms)
}

/// Count of the convolutional layers as implemented in the reference
/// network: real single-channel input, two convolutions per frequency
/// split (one per child parity) and a bias-free output layer of `2·m_out`
/// real channels.
pub fn count_params_layers(g: &ButterflyGeometry, inflated: bool) -> ParamCount {
    let (n, r) = (g.n() as u64, g.rank() as u64);
    let (l, lt, lmin) = (g.depth() as u32, g.time_depth() as u32, g.shared_depth() as u32);
    let c4 = 4 * r;
    let mut terms = vec![term("V", (n >> l) * c4, c4)];
    for level in 1..=lt {
        let ci = (1u64 << (level - 1)).min(1 << lmin);
        let co = (1u64 << level).min(1 << lmin);
        let ch = if inflated { ci * co } else { co };
        terms.push(term(format!("H{level}"), ch * c4 * c4 * 2, co * c4));
    }
    let s = 1u64 << (lmin + g.freq_depth() as u32);
    terms.push(term("M", s * c4 * c4, s * c4));
    for level in lt + 1..=l {
        let c = 1u64 << (l - level);
        let ch = if inflated { c * c } else { c };
        terms.push(term(format!("G{level}"), 2 * ch * c4 * c4 * 2, 2 * c * c4));
    }
    terms.push(term("U", c4 * 2 * g.freq_leaf_len() as u64, 0));
    ParamCount::from_terms(terms)
}

/// Complex bias slots one factor would carry: one per output channel of the
/// corresponding convolution.
fn bias_slots(g: &ButterflyGeometry, stage: Stage) -> usize {
    let r = g.rank();
    match stage {
        Stage::Interpolation => r,
        Stage::Time(level) => g.freq_count(level) * r,
        Stage::Switch => g.freq_count(g.time_depth()) * g.time_count(g.time_depth()) * r,
        Stage::Frequency(level) => g.time_count(level) * r,
        Stage::Output => g.freq_leaf_len() * r,
    }
}

/// Count taken from the actual blocks: mask entries × 16 + bias slots × 4.
pub fn count_params_empirical(f: &ButterflyFactors) -> ParamCount {
    let g = f.geometry();
    let terms = f
        .factors()
        .iter()
        .map(|x| term(x.stage.label(), 16 * x.mask_count() as u64, 4 * bias_slots(g, x.stage) as u64))
        .collect();
    ParamCount::from_terms(terms)
}

/// Right-hand sides of the refined count bound: `(40r + L_t(K/2^Lξ)(32r²+4r)
/// + K(16r²+4r) + 2^Lξ(32r²+4r), 90·L·K·r²)`.
pub fn precise_bound(g: &ButterflyGeometry) -> (f64, f64) {
    let (k, r) = (g.k() as f64, g.rank() as f64);
    let (l, lt, lx) = (g.depth() as f64, g.time_depth() as f64, g.freq_depth() as i32);
    let a = 32.0 * r * r + 4.0 * r;
    let refined = 40.0 * r + lt * (k / 2f64.powi(lx)) * a + k * (16.0 * r * r + 4.0 * r) + 2f64.powi(lx) * a;
    (refined, 90.0 * l * k * r * r)
}

/// Rank that drives the operator error below `eps`: `⌈2πe(log N + log 1/ε)⌉`.
pub fn corollary_rank(n: usize, eps: f64) -> usize {
    (2.0 * PI * E * ((n as f64).log2() + (1.0 / eps).log2())).ceil() as usize
}

/// `(2πe)²·90·K·log N·(log 1/ε + log N)²`.
pub fn corollary_bound(n: usize, k: usize, eps: f64) -> f64 {
    let ln = (n as f64).log2();
    (2.0 * PI * E).powi(2) * 90.0 * k as f64 * ln * ((1.0 / eps).log2() + ln).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub n: usize,
    pub k: usize,
    pub depth: usize,
    pub freq_depth: usize,
    pub rank: usize,
    pub variant: Variant,
    pub multiplicative: u64,
    pub bias: u64,
    pub total: u64,
}

pub const COMPLEXITY_HEADER: &str = "N,K,L,L_xi,r,variant,multiplicative,bias,total";

impl ComplexityRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k,
            self.depth,
            self.freq_depth,
            self.rank,
            self.variant.name(),
            self.multiplicative,
            self.bias,
            self.total
        )
    }
}

/// Literal-formula counts for both variants of every geometry.
pub fn complexity_table(family: &[ButterflyGeometry]) -> Vec<ComplexityRow> {
    family
        .iter()
        .flat_map(|g| {
            [Variant::Butterfly, Variant::Inflated].map(|variant| {
                let c = count_params_formula(g, variant == Variant::Inflated);
                ComplexityRow {
                    n: g.n(),
                    k: g.k(),
                    depth: g.depth(),
                    freq_depth: g.freq_depth(),
                    rank: g.rank(),
                    variant,
                    multiplicative: c.multiplicative,
                    bias: c.bias,
                    total: c.total,
                }
            })
        })
        .collect()
}

pub fn table_csv(rows: &[ComplexityRow]) -> String {
    let mut s = String::from(COMPLEXITY_HEADER);
    s.push('\n');
    for row in rows {
        let _ = writeln!(s, "{}", row.csv());
    }
    s
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
