//! Synthetic data: three-variable consistency experiments and a linear
//! structural equation model for a gene regulatory network (GRN).
//!
//! All randomness comes from ChaCha8 streams seeded through [`derive_seed`],
//! so a master seed reproduces every table regardless of thread count.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::correlation::triplet_from_columns;
use crate::data::{Dataset, Role};
use crate::error::{BfcsError, Result};
use crate::evidence::{log_bayes_factors, AnalysisConfig, CorrelationTriplet};
use crate::format;
use crate::posterior::{causal_chain_probability, posterior};
use crate::prior::StructurePrior;

/// Mix a master seed with stream identifiers (SplitMix64 finalizer).
pub fn derive_seed(master: u64, stream: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    stream.iter().fold(mix(master), |acc, &s| mix(acc ^ mix(s)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratingModel {
    /// `X1 → X2 → X3`
    Chain,
    /// `X2 ← X1 → X3`
    Independent,
    /// `X1 → X2 → X3` plus `X1 → X3`
    Full,
}

impl GeneratingModel {
    pub const ALL: [GeneratingModel; 3] = [
        GeneratingModel::Chain,
        GeneratingModel::Independent,
        GeneratingModel::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratingModel::Chain => "chain",
            GeneratingModel::Independent => "independent",
            GeneratingModel::Full => "full",
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }

    /// Which of the edges `1→2`, `2→3`, `1→3` are present.
    pub fn edges(self) -> [bool; 3] {
        match self {
            GeneratingModel::Chain => [true, true, false],
            GeneratingModel::Independent => [true, false, true],
            GeneratingModel::Full => [true, true, true],
        }
    }
}

impl fmt::Display for GeneratingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratingModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        GeneratingModel::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown generating model '{s}' (chain, independent, full)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum X1Kind {
    Gaussian,
    Bernoulli,
}

impl X1Kind {
    pub fn name(self) -> &'static str {
        match self {
            X1Kind::Gaussian => "gaussian",
            X1Kind::Bernoulli => "bernoulli",
        }
    }
}

impl fmt::Display for X1Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for X1Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(X1Kind::Gaussian),
            "bernoulli" => Ok(X1Kind::Bernoulli),
            _ => Err(format!("unknown X1 kind '{s}' (gaussian, bernoulli)")),
        }
    }
}

/// Interaction strengths; absent edges are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeCoefficients {
    pub b12: f64,
    pub b23: f64,
    pub b13: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletGenerator {
    pub model: GeneratingModel,
    pub x1_kind: X1Kind,
    pub coefficients: EdgeCoefficients,
    /// Success probability of `X1`; only used for [`X1Kind::Bernoulli`].
    pub bernoulli_p: f64,
}

impl TripletGenerator {
    /// Standard-normal coefficients on the model's edges and, for a
    /// Bernoulli `X1`, a success probability from `U(0.1, 0.9)`.
    pub fn draw<R: Rng + ?Sized>(model: GeneratingModel, x1_kind: X1Kind, rng: &mut R) -> Self {
        let [e12, e23, e13] = model.edges();
        let mut coef = |present: bool| {
            let b: f64 = rng.sample(StandardNormal);
            if present {
                b
            } else {
                0.0
            }
        };
        let coefficients = EdgeCoefficients {
            b12: coef(e12),
            b23: coef(e23),
            b13: coef(e13),
        };
        let bernoulli_p = match x1_kind {
            X1Kind::Gaussian => 0.5,
            X1Kind::Bernoulli => rng.random_range(0.1..0.9),
        };
        TripletGenerator {
            model,
            x1_kind,
            coefficients,
            bernoulli_p,
        }
    }
}

/// `n × 3` samples stored as three columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletData {
    pub columns: [Vec<f64>; 3],
}

impl TripletData {
    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn correlations(&self, center: bool) -> CorrelationTriplet {
        let [x1, x2, x3] = &self.columns;
        triplet_from_columns(x1, x2, x3, center)
    }
}

/// Sample `n` rows from a triplet generator:
/// `X1 = e1` (or Bernoulli), `X2 = b12·X1 + e2`, `X3 = b23·X2 + b13·X1 + e3`.
pub fn sample_triplet_data(gen: &TripletGenerator, n: usize, seed: u64) -> TripletData {
    let mut rng = rng_from_seed(seed);
    let c = gen.coefficients;
    let bernoulli = Bernoulli::new(gen.bernoulli_p.clamp(0.0, 1.0)).expect("probability in [0, 1]");
    let mut cols = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for _ in 0..n {
        let x1 = match gen.x1_kind {
            X1Kind::Gaussian => rng.sample(StandardNormal),
            X1Kind::Bernoulli => f64::from(u8::from(bernoulli.sample(&mut rng))),
        };
        let e2: f64 = rng.sample(StandardNormal);
        let e3: f64 = rng.sample(StandardNormal);
        let x2 = c.b12 * x1 + e2;
        let x3 = c.b23 * x2 + c.b13 * x1 + e3;
        cols[0].push(x1);
        cols[1].push(x2);
        cols[2].push(x3);
    }
    TripletData { columns: cols }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneratorKind {
    pub model: GeneratingModel,
    pub x1_kind: X1Kind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencySettings {
    pub kinds: Vec<GeneratorKind>,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub model: GeneratingModel,
    pub x1_kind: X1Kind,
    pub n: usize,
    pub rep: usize,
    /// `None` when the sampled data gave a singular correlation matrix.
    pub chain_posterior: Option<f64>,
    pub note: Option<String>,
}

/// Chain posterior `p(X1 → X2 → X3 | D)` across generators, sizes and
/// repetitions.
///
/// Each repetition draws one parameter configuration and reuses it for every
/// sample size. Coefficients depend on `(seed, model, rep)` only, so the
/// Gaussian and Bernoulli variants share their interaction strengths.
pub fn run_consistency_experiment(
    settings: &ConsistencySettings,
    prior: &StructurePrior,
    cfg: &AnalysisConfig,
) -> Result<Vec<ConsistencyRow>> {
    cfg.validate()?;
    if settings.reps == 0 {
        return Err(BfcsError::InvalidConfig("reps must be at least 1".into()));
    }
    if let Some(&n) = settings.sizes.iter().find(|&&n| n == 0) {
        return Err(BfcsError::InvalidConfig(format!(
            "sample size must be positive, got {n}"
        )));
    }
    let jobs: Vec<(GeneratorKind, usize)> = settings
        .kinds
        .iter()
        .flat_map(|&k| (0..settings.reps).map(move |rep| (k, rep)))
        .collect();

    let blocks: Vec<Vec<ConsistencyRow>> = jobs
        .par_iter()
        .map(|&(kind, rep)| {
            let gen = draw_repetition(kind, settings.seed, rep);
            settings
                .sizes
                .iter()
                .map(|&n| {
                    let data_seed = derive_seed(
                        settings.seed,
                        &[kind.model.tag(), kind.x1_kind as u64, rep as u64, n as u64],
                    );
                    let data = sample_triplet_data(&gen, n, data_seed);
                    let (chain_posterior, note) = match chain_posterior_of(&data, prior, cfg) {
                        Ok(p) => (Some(p), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    ConsistencyRow {
                        model: kind.model,
                        x1_kind: kind.x1_kind,
                        n,
                        rep,
                        chain_posterior,
                        note,
                    }
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

fn draw_repetition(kind: GeneratorKind, seed: u64, rep: usize) -> TripletGenerator {
    let mut coef_rng = rng_from_seed(derive_seed(seed, &[kind.model.tag(), rep as u64, 0]));
    let mut gen = TripletGenerator::draw(kind.model, X1Kind::Gaussian, &mut coef_rng);
    gen.x1_kind = kind.x1_kind;
    if kind.x1_kind == X1Kind::Bernoulli {
        let mut p_rng = rng_from_seed(derive_seed(seed, &[kind.model.tag(), rep as u64, 1]));
        gen.bernoulli_p = p_rng.random_range(0.1..0.9);
    }
    gen
}

fn chain_posterior_of(
    data: &TripletData,
    prior: &StructurePrior,
    cfg: &AnalysisConfig,
) -> Result<f64> {
    if data.columns.iter().any(|c| c.iter().all(|&v| v == c[0])) {
        return Err(BfcsError::InvalidDataset(
            "constant column in sample".into(),
        ));
    }
    let bf = log_bayes_factors(&data.correlations(cfg.center_data), cfg)?;
    Ok(causal_chain_probability(&posterior(&bf, prior)?))
}

pub const CONSISTENCY_HEADER: &str = "model\tx1\tn\trep\tchain_posterior\tnote";

pub fn write_consistency_table(rows: &[ConsistencyRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| BfcsError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{CONSISTENCY_HEADER}").map_err(io)?;
    for r in rows {
        let p = r
            .chain_posterior
            .map_or_else(|| "NA".to_string(), |p| format::sig(p, 6));
        let note = r.note.as_deref().unwrap_or("").replace(['\t', '\n'], " ");
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.model, r.x1_kind, r.n, r.rep, p, note
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Box-plot statistics of the chain posterior for one `(model, x1, n)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencySummary {
    pub model: GeneratingModel,
    pub x1_kind: X1Kind,
    pub n: usize,
    pub count: usize,
    pub missing: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl ConsistencySummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Group rows by `(model, x1, n)` in first-seen order.
pub fn summarize_consistency(rows: &[ConsistencyRow]) -> Vec<ConsistencySummary> {
    let mut keys: Vec<(GeneratingModel, X1Kind, usize)> = Vec::new();
    for r in rows {
        let key = (r.model, r.x1_kind, r.n);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(model, x1_kind, n)| {
            let cell: Vec<&ConsistencyRow> = rows
                .iter()
                .filter(|r| r.model == model && r.x1_kind == x1_kind && r.n == n)
                .collect();
            let mut values: Vec<f64> = cell.iter().filter_map(|r| r.chain_posterior).collect();
            values.sort_by(f64::total_cmp);
            ConsistencySummary {
                model,
                x1_kind,
                n,
                count: values.len(),
                missing: cell.len() - values.len(),
                q1: quantile(&values, 0.25),
                median: quantile(&values, 0.5),
                q3: quantile(&values, 0.75),
            }
        })
        .collect()
}

/// A directed regulatory edge `source → target` between trait indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrnEdge {
    pub source: usize,
    pub target: usize,
    pub coefficient: f64,
}

/// Ground truth of a simulated network `t = B t + l + ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrnSpec {
    n_genes: usize,
    /// Row-major `n × n`, strictly lower triangular: `b[i*n + j]` is the
    /// effect of trait `j` on trait `i` (`j < i`).
    b: Vec<f64>,
    edges: Vec<GrnEdge>,
    marker_p: Vec<f64>,
}

impl GrnSpec {
    pub fn n_genes(&self) -> usize {
        self.n_genes
    }

    pub fn coefficient(&self, target: usize, source: usize) -> f64 {
        self.b[target * self.n_genes + source]
    }

    /// Nonzero entries of `B`, sorted by `(target, source)`.
    pub fn edges(&self) -> &[GrnEdge] {
        &self.edges
    }

    pub fn marker_p(&self) -> &[f64] {
        &self.marker_p
    }

    pub fn trait_name(i: usize) -> String {
        format!("T{}", i + 1)
    }

    pub fn marker_name(i: usize) -> String {
        format!("L{}", i + 1)
    }

    /// Edges as `(source name, target name)` pairs.
    pub fn truth_edges(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|e| (Self::trait_name(e.source), Self::trait_name(e.target)))
            .collect()
    }
}

/// Random network with `n_edges` distinct edges placed uniformly in the strict
/// lower triangle, standard-normal strengths and marker probabilities from
/// `U(0.1, 0.5)`.
pub fn generate_grn(n_genes: usize, n_edges: usize, seed: u64) -> Result<GrnSpec> {
    let max = n_genes * n_genes.saturating_sub(1) / 2;
    if n_edges > max {
        return Err(BfcsError::TooManyEdges {
            requested: n_edges,
            max,
            genes: n_genes,
        });
    }
    let mut rng = rng_from_seed(derive_seed(seed, &[0x0067_726e]));
    // enumerate lower-triangle positions row by row: (1,0), (2,0), (2,1), ...
    let positions: Vec<(usize, usize)> = (1..n_genes)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .collect();
    let mut chosen: Vec<usize> = index::sample(&mut rng, max, n_edges).into_vec();
    chosen.sort_unstable();

    let mut b = vec![0.0; n_genes * n_genes];
    let mut edges = Vec::with_capacity(n_edges);
    for idx in chosen {
        let (target, source) = positions[idx];
        let coefficient: f64 = rng.sample(StandardNormal);
        b[target * n_genes + source] = coefficient;
        edges.push(GrnEdge {
            source,
            target,
            coefficient,
        });
    }
    let marker_p = (0..n_genes).map(|_| rng.random_range(0.1..0.5)).collect();
    Ok(GrnSpec {
        n_genes,
        b,
        edges,
        marker_p,
    })
}

/// Raw draws of one GRN sample, per gene column.
#[derive(Debug, Clone, PartialEq)]
pub struct GrnSample {
    pub markers: Vec<Vec<f64>>,
    pub noise: Vec<Vec<f64>>,
    pub traits: Vec<Vec<f64>>,
}

/// Draw markers and noise, then solve `t = (I − B)⁻¹(l + ε)` by forward
/// substitution in index order.
pub fn sample_grn(spec: &GrnSpec, n: usize, seed: u64) -> GrnSample {
    let g = spec.n_genes;
    let mut rng = rng_from_seed(derive_seed(seed, &[0x73616d, n as u64]));
    let bern: Vec<Bernoulli> = spec
        .marker_p
        .iter()
        .map(|&p| Bernoulli::new(p).expect("marker probability in [0, 1]"))
        .collect();
    let mut markers = vec![Vec::with_capacity(n); g];
    let mut noise = vec![Vec::with_capacity(n); g];
    let mut traits = vec![Vec::with_capacity(n); g];
    let mut t = vec![0.0; g];
    for _ in 0..n {
        for i in 0..g {
            let l = f64::from(u8::from(bern[i].sample(&mut rng)));
            let e: f64 = rng.sample(StandardNormal);
            let row = &spec.b[i * g..i * g + i];
            let parents: f64 = row.iter().zip(&t[..i]).map(|(b, tj)| b * tj).sum();
            t[i] = parents + l + e;
            markers[i].push(l);
            noise[i].push(e);
            traits[i].push(t[i]);
        }
    }
    GrnSample {
        markers,
        noise,
        traits,
    }
}

/// Sample a dataset with markers `L1..Ln` followed by traits `T1..Tn`.
pub fn sample_grn_data(spec: &GrnSpec, n: usize, seed: u64) -> Result<Dataset> {
    let s = sample_grn(spec, n, seed);
    let g = spec.n_genes;
    let names = (0..g)
        .map(GrnSpec::marker_name)
        .chain((0..g).map(GrnSpec::trait_name))
        .collect();
    let roles = std::iter::repeat_n(Role::Marker, g)
        .chain(std::iter::repeat_n(Role::Trait, g))
        .collect();
    let columns = s.markers.into_iter().chain(s.traits).collect();
    Dataset::new(names, roles, columns)
}

pub const EDGE_LIST_HEADER: &str = "source\ttarget\tcoefficient";

pub fn write_edge_list(spec: &GrnSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| BfcsError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{EDGE_LIST_HEADER}").map_err(io)?;
    for e in &spec.edges {
        writeln!(
            out,
            "{}\t{}\t{}",
            GrnSpec::trait_name(e.source),
            GrnSpec::trait_name(e.target),
            e.coefficient
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_marker_probabilities(spec: &GrnSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| BfcsError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "marker\tprobability").map_err(io)?;
    for (i, p) in spec.marker_p.iter().enumerate() {
        writeln!(out, "{}\t{}", GrnSpec::marker_name(i), p).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Read `source<TAB>target<TAB>coefficient` rows (header required).
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BfcsError::io(path, e))?;
    let mut edges = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BfcsError::io(path, e))?;
        if idx == 0 {
            if !line.starts_with("source\ttarget") {
                return Err(BfcsError::parse(
                    path,
                    1,
                    format!("expected header `{EDGE_LIST_HEADER}`"),
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        match (f.next(), f.next()) {
            (Some(s), Some(t)) if !s.trim().is_empty() && !t.trim().is_empty() => {
                edges.push((s.trim().to_string(), t.trim().to_string()))
            }
            _ => {
                return Err(BfcsError::parse(
                    path,
                    idx + 1,
                    "expected `source<TAB>target[<TAB>coefficient]`",
                ))
            }
        }
    }
    Ok(edges)
}
