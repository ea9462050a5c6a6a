//! The butterfly factor chain `U·G^(L)···G^(L_t+1)·M·H^(L_t)···H^(1)·V`.
//!
//! Every factor is stored as a list of dense weight blocks plus the
//! placements ("links") where each block acts. A block is shared by all of
//! its placements, mirroring the weight sharing of the convolutional layers
//! the factors come from, so the parameter count is the total block size.
//!
//! Intermediate vectors are laid out as `[i][j][k]`: frequency domain `i`,
//! time domain `j`, mixing channel `k`.
//!
//! | stage | block key `(out, input, phase)` | block shape | shared across |
//! |-------|---------------------------------|-------------|---------------|
//! | `V`   | `(0, 0, 0)`                     | `r × m`     | time leaves   |
//! | `H^ℓ` | `(i, i', 0)`                    | `r × 2r`    | time domains  |
//! | `M`   | `(i, j, 0)`                     | `r × r`     | none          |
//! | `G^ℓ` | `(j, j', a)`                    | `r × 2r`    | freq domains with `i mod 2 = a` |
//! | `U`   | `(0, 0, 0)`                     | `m_out × r` | freq leaves   |
//!
//! The butterfly sparsity pattern only permits `i' = parent(i)` in `H` and
//! `j' = j` in `G`; the inflated pattern permits every pair.

use crate::chebyshev::{lagrange, ChebyshevGrid, Interval};
use crate::error::{invalid, Error, Result};
use crate::geometry::{ButterflyGeometry, Side};
use crate::oracle::{check_dense, fourier_kernel, ComplexMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

mod io;
pub use io::{read_factors, write_factors, FORMAT_VERSION};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Channel sparsity pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Non-mixing channels stay separate.
    Butterfly,
    /// All channel connections dense.
    Inflated,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Butterfly => "butterfly",
            Variant::Inflated => "inflated",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "butterfly" => Ok(Variant::Butterfly),
            "inflated" => Ok(Variant::Inflated),
            other => invalid(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitKind {
    Butterfly,
    Random,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::Butterfly => "butterfly",
            InitKind::Random => "random",
        }
    }
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "butterfly" => Ok(InitKind::Butterfly),
            "random" => Ok(InitKind::Random),
            other => invalid(format!("unknown init `{other}`")),
        }
    }
}

/// Position of a factor in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// `V`: uniform samples to Chebyshev coefficients in each time leaf.
    Interpolation,
    /// `H^(ℓ)`, `ℓ = 1..L_t`: merge time domains.
    Time(usize),
    /// `M`: switch from time to frequency interpolation.
    Switch,
    /// `G^(ℓ)`, `ℓ = L_t+1..L`: split frequency domains.
    Frequency(usize),
    /// `U`: Chebyshev coefficients to integer frequencies in each leaf.
    Output,
}

impl Stage {
    pub fn label(&self) -> String {
        match self {
            Stage::Interpolation => "V".into(),
            Stage::Time(l) => format!("H{l}"),
            Stage::Switch => "M".into(),
            Stage::Frequency(l) => format!("G{l}"),
            Stage::Output => "U".into(),
        }
    }
}

/// Identifies a block within its factor; see the module table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockKey {
    pub out: usize,
    pub input: usize,
    pub phase: usize,
}

impl BlockKey {
    const fn new(out: usize, input: usize, phase: usize) -> Self {
        BlockKey { out, input, phase }
    }
}

/// Dense row-major weight block.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub key: BlockKey,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Block {
    fn zeros(key: BlockKey, rows: usize, cols: usize) -> Self {
        Block { key, rows, cols, data: vec![ZERO; rows * cols] }
    }
}

/// One placement of a block: `y[out..out+rows] += W · x[input..input+cols]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub out: usize,
    pub input: usize,
    pub block: usize,
}

/// Sparse triplet form of a factor, rows then columns sorted, duplicates summed.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// CSR row pointers.
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl SparseMatrix {
    fn from_triplets(rows: usize, cols: usize, mut t: Vec<(usize, usize, Complex64)>) -> Self {
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; rows + 1];
        let mut indices: Vec<usize> = Vec::with_capacity(t.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        SparseMatrix { rows, cols, indptr, indices, values }
    }

    /// `self · dense`, where `dense` is `cols × w` row-major.
    pub fn mul_dense(&self, dense: &[Complex64], w: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.rows * w];
        for r in 0..self.rows {
            let dst = &mut out[r * w..(r + 1) * w];
            for idx in self.indptr[r]..self.indptr[r + 1] {
                let a = self.values[idx];
                let src = &dense[self.indices[idx] * w..(self.indices[idx] + 1) * w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for (c, v) in self.indices.iter().zip(&self.values) {
            sums[*c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.values[self.indptr[r]..self.indptr[r + 1]].iter().map(|v| v.norm()).sum())
            .fold(0.0, f64::max)
    }
}

/// One factor of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub stage: Stage,
    pub in_len: usize,
    pub out_len: usize,
    pub blocks: Vec<Block>,
    pub links: Vec<Link>,
}

impl Factor {
    /// `y = F·x`; `y` is overwritten.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.in_len);
        debug_assert_eq!(y.len(), self.out_len);
        y.fill(ZERO);
        for link in &self.links {
            let b = &self.blocks[link.block];
            let src = &x[link.input..link.input + b.cols];
            let dst = &mut y[link.out..link.out + b.rows];
            for (row, d) in b.data.chunks_exact(b.cols).zip(dst.iter_mut()) {
                let mut acc = ZERO;
                for (w, v) in row.iter().zip(src) {
                    acc += w * v;
                }
                *d += acc;
            }
        }
    }

    /// `x = F^H·y`; `x` is overwritten.
    pub fn adjoint_into(&self, y: &[Complex64], x: &mut [Complex64]) {
        x.fill(ZERO);
        for link in &self.links {
            let b = &self.blocks[link.block];
            let src = &y[link.out..link.out + b.rows];
            let dst = &mut x[link.input..link.input + b.cols];
            for (row, v) in b.data.chunks_exact(b.cols).zip(src) {
                for (d, w) in dst.iter_mut().zip(row) {
                    *d += w.conj() * v;
                }
            }
        }
    }

    /// Adds `delta · x^H` restricted to every placement into `grads`
    /// (one buffer per block, same layout as the block data).
    pub fn accumulate_outer(&self, delta: &[Complex64], x: &[Complex64], grads: &mut [Vec<Complex64>]) {
        for link in &self.links {
            let b = &self.blocks[link.block];
            let g = &mut grads[link.block];
            let src = &x[link.input..link.input + b.cols];
            let d = &delta[link.out..link.out + b.rows];
            for (grow, dv) in g.chunks_exact_mut(b.cols).zip(d) {
                for (gv, xv) in grow.iter_mut().zip(src) {
                    *gv += dv * xv.conj();
                }
            }
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let mut t = Vec::new();
        for link in &self.links {
            let b = &self.blocks[link.block];
            for r in 0..b.rows {
                for c in 0..b.cols {
                    t.push((link.out + r, link.input + c, b.data[r * b.cols + c]));
                }
            }
        }
        SparseMatrix::from_triplets(self.out_len, self.in_len, t)
    }

    /// Parameters (mask-allowed complex entries) in this factor.
    pub fn mask_count(&self) -> usize {
        self.blocks.iter().map(|b| b.rows * b.cols).sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.blocks.iter().flat_map(|b| &b.data).filter(|z| **z != ZERO).count()
    }
}

/// Block shapes allowed for one factor under a variant.
#[derive(Debug, Clone)]
pub(crate) struct FactorTemplate {
    pub stage: Stage,
    pub in_len: usize,
    pub out_len: usize,
    pub blocks: Vec<(BlockKey, usize, usize)>,
}

/// Allowed structure of every factor, in chain order.
pub(crate) fn templates(g: &ButterflyGeometry, variant: Variant) -> Vec<FactorTemplate> {
    let r = g.rank();
    let (l, lt, lmin) = (g.depth(), g.time_depth(), g.shared_depth());
    let seg = |level: usize| g.freq_count(level) * g.time_count(level) * r;
    let mut out = Vec::with_capacity(l + 3);

    out.push(FactorTemplate {
        stage: Stage::Interpolation,
        in_len: g.n(),
        out_len: seg(0),
        blocks: vec![(BlockKey::new(0, 0, 0), r, g.time_leaf_len())],
    });

    for level in 1..=lt {
        let na = g.freq_count(level);
        let na_prev = g.freq_count(level - 1);
        let mut blocks = Vec::new();
        for i in 0..na {
            let parent = if level <= lmin { i / 2 } else { i };
            match variant {
                Variant::Butterfly => blocks.push((BlockKey::new(i, parent, 0), r, 2 * r)),
                Variant::Inflated => {
                    blocks.extend((0..na_prev).map(|ip| (BlockKey::new(i, ip, 0), r, 2 * r)))
                }
            }
        }
        out.push(FactorTemplate { stage: Stage::Time(level), in_len: seg(level - 1), out_len: seg(level), blocks });
    }

    let (na, nb) = (g.freq_count(lt), g.time_count(lt));
    out.push(FactorTemplate {
        stage: Stage::Switch,
        in_len: seg(lt),
        out_len: seg(lt),
        blocks: (0..na)
            .flat_map(|i| (0..nb).map(move |j| (BlockKey::new(i, j, 0), r, r)))
            .collect(),
    });

    for level in lt + 1..=l {
        let nb = g.time_count(level);
        let mut blocks = Vec::new();
        for j in 0..nb {
            for a in 0..2 {
                match variant {
                    Variant::Butterfly => blocks.push((BlockKey::new(j, j, a), r, 2 * r)),
                    Variant::Inflated => {
                        blocks.extend((0..nb).map(|jp| (BlockKey::new(j, jp, a), r, 2 * r)))
                    }
                }
            }
        }
        out.push(FactorTemplate {
            stage: Stage::Frequency(level),
            in_len: seg(level - 1),
            out_len: seg(level),
            blocks,
        });
    }

    out.push(FactorTemplate {
        stage: Stage::Output,
        in_len: seg(l),
        out_len: g.k(),
        blocks: vec![(BlockKey::new(0, 0, 0), g.freq_leaf_len(), r)],
    });
    out
}

/// Placements of a block, derived from the geometry alone.
pub(crate) fn links_for(g: &ButterflyGeometry, stage: Stage, key: BlockKey, block: usize) -> Vec<Link> {
    let r = g.rank();
    match stage {
        Stage::Interpolation => {
            let m = g.time_leaf_len();
            (0..g.time_count(0)).map(|j| Link { out: j * r, input: j * m, block }).collect()
        }
        Stage::Time(level) => {
            let nb = g.time_count(level);
            let nb_prev = g.time_count(level - 1);
            (0..nb)
                .map(|j| Link {
                    out: (key.out * nb + j) * r,
                    input: (key.input * nb_prev + 2 * j) * r,
                    block,
                })
                .collect()
        }
        Stage::Switch => {
            let nb = g.time_count(g.time_depth());
            let off = (key.out * nb + key.input) * r;
            vec![Link { out: off, input: off, block }]
        }
        Stage::Frequency(level) => {
            let nb = g.time_count(level);
            let nb_prev = g.time_count(level - 1);
            (0..g.freq_count(level))
                .filter(|i| i % 2 == key.phase)
                .map(|i| Link {
                    out: (i * nb + key.out) * r,
                    input: ((i / 2) * nb_prev + 2 * key.input) * r,
                    block,
                })
                .collect()
        }
        Stage::Output => {
            let mo = g.freq_leaf_len();
            (0..g.freq_count(g.depth())).map(|i| Link { out: i * mo, input: i * r, block }).collect()
        }
    }
}

fn assemble(g: &ButterflyGeometry, t: &FactorTemplate, blocks: Vec<Block>) -> Factor {
    let links = blocks
        .iter()
        .enumerate()
        .flat_map(|(idx, b)| links_for(g, t.stage, b.key, idx))
        .collect();
    Factor { stage: t.stage, in_len: t.in_len, out_len: t.out_len, blocks, links }
}

/// Ordered factor chain with its geometry and sparsity variant.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyFactors {
    geometry: ButterflyGeometry,
    variant: Variant,
    init: InitKind,
    factors: Vec<Factor>,
}

/// 1-norm and ∞-norm of one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorNorm {
    pub stage: Stage,
    pub norm_one: f64,
    pub norm_inf: f64,
}

impl ButterflyFactors {
    /// Assemble from explicit blocks, checking each block against the
    /// variant's allowed structure.
    pub fn from_blocks(
        geometry: ButterflyGeometry,
        variant: Variant,
        init: InitKind,
        blocks: Vec<Vec<Block>>,
    ) -> Result<Self> {
        let violations = mask_violations(&geometry, variant, &blocks);
        if !violations.is_empty() {
            return Err(Error::Format(format!("mask containment: {}", violations.join("; "))));
        }
        let temps = templates(&geometry, variant);
        let factors = temps
            .iter()
            .zip(blocks)
            .map(|(t, b)| assemble(&geometry, t, b))
            .collect();
        Ok(ButterflyFactors { geometry, variant, init, factors })
    }

    pub fn geometry(&self) -> &ButterflyGeometry {
        &self.geometry
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn init_kind(&self) -> InitKind {
        self.init
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub(crate) fn factors_mut(&mut self) -> &mut [Factor] {
        &mut self.factors
    }

    /// Longest intermediate vector in the chain.
    pub fn max_stage_len(&self) -> usize {
        self.factors.iter().map(|f| f.in_len.max(f.out_len)).max().unwrap_or(0)
    }

    pub fn mask_count(&self) -> usize {
        self.factors.iter().map(Factor::mask_count).sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.factors.iter().map(Factor::nonzero_count).sum()
    }

    /// Flattened copy of every block entry, in chain order.
    pub fn parameters(&self) -> Vec<Complex64> {
        self.factors.iter().flat_map(|f| f.blocks.iter().flat_map(|b| b.data.iter().copied())).collect()
    }

    /// Overwrite every block entry from a flat slice in chain order.
    pub fn set_parameters(&mut self, params: &[Complex64]) -> Result<()> {
        if params.len() != self.mask_count() {
            return invalid(format!("{} parameters for {} slots", params.len(), self.mask_count()));
        }
        let mut it = params.iter();
        for f in &mut self.factors {
            for b in &mut f.blocks {
                for v in &mut b.data {
                    *v = *it.next().unwrap();
                }
            }
        }
        Ok(())
    }

    pub fn factor_norms(&self) -> Vec<FactorNorm> {
        self.factors
            .iter()
            .map(|f| {
                let s = f.to_sparse();
                FactorNorm { stage: f.stage, norm_one: s.norm_one(), norm_inf: s.norm_inf() }
            })
            .collect()
    }
}

/// Blocks that are not permitted by `variant`, described for error reports.
pub fn mask_violations(g: &ButterflyGeometry, variant: Variant, blocks: &[Vec<Block>]) -> Vec<String> {
    let temps = templates(g, variant);
    let mut out = Vec::new();
    if temps.len() != blocks.len() {
        out.push(format!("expected {} factors, found {}", temps.len(), blocks.len()));
        return out;
    }
    for (t, bs) in temps.iter().zip(blocks) {
        let allowed: std::collections::HashMap<BlockKey, (usize, usize)> =
            t.blocks.iter().map(|&(k, r, c)| (k, (r, c))).collect();
        let mut seen = std::collections::HashSet::new();
        for b in bs {
            match allowed.get(&b.key) {
                None => out.push(format!(
                    "{} block {:?} is outside the {} mask",
                    t.stage.label(),
                    b.key,
                    variant.name()
                )),
                Some(&(r, c)) if (r, c) != (b.rows, b.cols) || b.data.len() != r * c => out.push(format!(
                    "{} block {:?} has shape {}x{}, expected {r}x{c}",
                    t.stage.label(),
                    b.key,
                    b.rows,
                    b.cols
                )),
                _ => {}
            }
            if !seen.insert(b.key) {
                out.push(format!("{} block {:?} appears twice", t.stage.label(), b.key));
            }
        }
    }
    out
}

/// Empty (all-zero) chain with the variant's full structure.
pub fn zero_factors(g: &ButterflyGeometry, variant: Variant, init: InitKind) -> ButterflyFactors {
    let temps = templates(g, variant);
    let factors = temps
        .iter()
        .map(|t| {
            let blocks = t.blocks.iter().map(|&(k, r, c)| Block::zeros(k, r, c)).collect();
            assemble(g, t, blocks)
        })
        .collect();
    ButterflyFactors { geometry: g.clone(), variant, init, factors }
}

struct InitContext<'a> {
    g: &'a ButterflyGeometry,
    grid: ChebyshevGrid,
}

impl InitContext<'_> {
    fn freq(&self, level: usize, i: usize) -> Interval {
        self.g.domain(level, Side::Frequency, i).expect("index within level domain count")
    }

    fn time(&self, depth: usize, j: usize) -> Interval {
        self.g.domain(depth, Side::Time, j).expect("index within partition")
    }

    fn kernel(&self, z: f64) -> Complex64 {
        fourier_kernel(z, self.g.sign())
    }

    fn interpolation(&self) -> Vec<Complex64> {
        let (g, r) = (self.g, self.g.rank());
        let leaf = self.time(g.depth(), 0);
        let nodes = self.grid.mapped(&leaf);
        let xi0 = self.freq(0, 0).center();
        let m = g.time_leaf_len();
        let mut w = Vec::with_capacity(r * m);
        for k in 0..r {
            for q in 0..m {
                let t = g.sample_time(q);
                w.push(self.kernel(xi0 * (t - nodes[k])) * lagrange(&nodes, k, t));
            }
        }
        w
    }

    fn time_merge(&self, level: usize, i: usize) -> Vec<Complex64> {
        let (g, r) = (self.g, self.g.rank());
        let depth = g.depth() - level;
        let nodes = self.grid.mapped(&self.time(depth, 0));
        let xi0 = self.freq(level, i).center();
        let children = [self.grid.mapped(&self.time(depth + 1, 0)), self.grid.mapped(&self.time(depth + 1, 1))];
        let mut w = Vec::with_capacity(2 * r * r);
        for k in 0..r {
            for child in &children {
                for &ts in child {
                    w.push(self.kernel(xi0 * (ts - nodes[k])) * lagrange(&nodes, k, ts));
                }
            }
        }
        w
    }

    fn switch(&self, i: usize, j: usize) -> Vec<Complex64> {
        let g = self.g;
        let xs = self.grid.mapped(&self.freq(g.time_depth(), i));
        let ts = self.grid.mapped(&self.time(g.freq_depth(), j));
        xs.iter().flat_map(|x| ts.iter().map(move |t| (x, t))).map(|(x, t)| self.kernel(x * t)).collect()
    }

    fn freq_split(&self, level: usize, j: usize, a: usize) -> Vec<Complex64> {
        let (g, r) = (self.g, self.g.rank());
        let parent = self.grid.mapped(&self.freq(level - 1, 0));
        let child = self.grid.mapped(&self.freq(level, a));
        let depth = g.depth() - level + 1;
        let centers = [self.time(depth, 2 * j).center(), self.time(depth, 2 * j + 1).center()];
        let mut w = Vec::with_capacity(2 * r * r);
        for &xk in &child {
            for &t0 in &centers {
                for s in 0..r {
                    w.push(self.kernel((xk - parent[s]) * t0) * lagrange(&parent, s, xk));
                }
            }
        }
        w
    }

    fn output(&self) -> Vec<Complex64> {
        let (g, r) = (self.g, self.g.rank());
        let leaf = self.freq(g.depth(), 0);
        let nodes = self.grid.mapped(&leaf);
        let t0 = self.time(0, 0).center();
        let mut w = Vec::with_capacity(g.freq_leaf_len() * r);
        for p in 0..g.freq_leaf_len() {
            let xp = leaf.lo() + p as f64;
            for k in 0..r {
                w.push(self.kernel((xp - nodes[k]) * t0) * lagrange(&nodes, k, xp));
            }
        }
        w
    }
}

/// Closed-form butterfly weights for the sparse variant.
pub fn butterfly_init(g: &ButterflyGeometry) -> Result<ButterflyFactors> {
    let ctx = InitContext { g, grid: ChebyshevGrid::new(g.rank(), g.grid())? };
    let mut f = zero_factors(g, Variant::Butterfly, InitKind::Butterfly);
    let lmin = g.shared_depth();
    for factor in f.factors_mut() {
        for b in &mut factor.blocks {
            b.data = match factor.stage {
                Stage::Interpolation => ctx.interpolation(),
                Stage::Time(level) => {
                    debug_assert!(level > lmin || b.key.input == b.key.out / 2);
                    ctx.time_merge(level, b.key.out)
                }
                Stage::Switch => ctx.switch(b.key.out, b.key.input),
                Stage::Frequency(level) => ctx.freq_split(level, b.key.out, b.key.phase),
                Stage::Output => ctx.output(),
            };
        }
    }
    Ok(f)
}

/// Independent complex Gaussian entries on the variant's mask, scaled by
/// `1/√fan_in` of the receiving row. Deterministic in `seed` (ChaCha8).
pub fn random_init(g: &ButterflyGeometry, seed: u64, variant: Variant) -> ButterflyFactors {
    let mut f = zero_factors(g, variant, InitKind::Random);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for factor in f.factors_mut() {
        // Every output segment of a factor receives the same number of inputs.
        let mut fan_in = vec![0usize; factor.out_len];
        for link in &factor.links {
            let b = &factor.blocks[link.block];
            for v in &mut fan_in[link.out..link.out + b.rows] {
                *v += b.cols;
            }
        }
        let fan = fan_in.into_iter().max().unwrap_or(1).max(1) as f64;
        let scale = (0.5 / fan).sqrt();
        for b in &mut factor.blocks {
            for v in &mut b.data {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v = Complex64::new(re * scale, im * scale);
            }
        }
    }
    f
}

/// Widen a butterfly-pattern chain to the inflated pattern; new entries are zero.
pub fn inflate(f: &ButterflyFactors) -> Result<ButterflyFactors> {
    if f.variant != Variant::Butterfly {
        return invalid("inflate expects a butterfly-pattern chain");
    }
    let mut wide = zero_factors(&f.geometry, Variant::Inflated, f.init);
    for (dst, src) in wide.factors_mut().iter_mut().zip(&f.factors) {
        for b in &src.blocks {
            let slot = dst
                .blocks
                .iter_mut()
                .find(|d| d.key == b.key)
                .expect("butterfly mask is contained in the inflated mask");
            slot.data.clone_from(&b.data);
        }
    }
    Ok(wide)
}

/// Dense `K×N` product of the chain, assembled factor by factor from the
/// sparse form of each factor (independent of the matrix-free apply path).
pub fn materialize(f: &ButterflyFactors) -> Result<ComplexMatrix> {
    let g = &f.geometry;
    check_dense(g.k(), g.n())?;
    check_dense(f.max_stage_len(), g.n())?;
    let n = g.n();
    let mut acc = ComplexMatrix::identity(n).data().to_vec();
    for factor in &f.factors {
        acc = factor.to_sparse().mul_dense(&acc, n);
    }
    ComplexMatrix::from_rows(g.k(), n, acc)
}
