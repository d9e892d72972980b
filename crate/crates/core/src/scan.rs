//! Triplet scan over `(marker, trait, trait)` combinations.
//!
//! For every ordered trait pair `(i, j)` and every candidate marker `k`, the
//! triplet `(X1, X2, X3) = (L_k, T_i, T_j)` is scored and the posterior of
//! the chain `L_k → T_i → T_j` is read off. The largest value over `k` is kept
//! as the probability that trait `i` regulates trait `j`; it is a lower bound
//! on the probability that some marker supports the chain.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::correlation::CorrelationStore;
use crate::error::{BfcsError, Result};
use crate::evidence::{AnalysisConfig, BayesFactorKernel};
use crate::format;
use crate::posterior::{causal_chain_probability, posterior};
use crate::prior::StructurePrior;

/// Which markers are tried for each trait pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ScanFilter {
    /// Every marker for every pair.
    #[default]
    All,
    /// For pair `(i, j)`, the `K` markers with the largest `|r(L_k, T_i)|`.
    TopK(usize),
    /// Explicit marker indices per regulator trait (outer index = trait).
    Explicit(Vec<Vec<usize>>),
}

impl ScanFilter {
    /// Candidate markers for regulator trait `i`, in ascending index order.
    fn candidates(&self, store: &CorrelationStore, i: usize) -> Vec<usize> {
        let mut ks = match self {
            ScanFilter::All => (0..store.n_markers()).collect(),
            ScanFilter::TopK(k) => {
                let r = store.markers_of_trait(i);
                let mut order: Vec<usize> = (0..r.len()).collect();
                // stable sort keeps smaller marker indices first among ties
                order.sort_by(|&a, &b| r[b].abs().total_cmp(&r[a].abs()));
                order.truncate(*k);
                order
            }
            ScanFilter::Explicit(map) => map.get(i).cloned().unwrap_or_default(),
        };
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Build an explicit filter from `(marker name, trait name)` pairs.
    pub fn from_named_pairs(store: &CorrelationStore, pairs: &[(String, String)]) -> Result<Self> {
        let markers: HashMap<&str, usize> = store
            .marker_names()
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), k))
            .collect();
        let traits: HashMap<&str, usize> = store
            .trait_names()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut map = vec![Vec::new(); store.n_traits()];
        for (marker, tr) in pairs {
            let k = *markers.get(marker.as_str()).ok_or_else(|| {
                BfcsError::InvalidDataset(format!("unknown marker '{marker}' in marker map"))
            })?;
            let i = *traits.get(tr.as_str()).ok_or_else(|| {
                BfcsError::InvalidDataset(format!("unknown trait '{tr}' in marker map"))
            })?;
            map[i].push(k);
        }
        Ok(ScanFilter::Explicit(map))
    }
}

/// Read a marker map: `marker<TAB>trait` per line, optional header
/// `marker<TAB>trait`.
pub fn read_marker_map(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BfcsError::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BfcsError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (idx == 0 && line == "marker\ttrait") {
            continue;
        }
        let (m, t) = line
            .split_once('\t')
            .ok_or_else(|| BfcsError::parse(path, idx + 1, "expected `marker<TAB>trait`"))?;
        pairs.push((m.trim().to_string(), t.trim().to_string()));
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegulationEntry {
    /// Best chain posterior over scanned markers; 0 when none was scorable.
    pub prob: f64,
    pub best_marker: Option<usize>,
}

impl RegulationEntry {
    const EMPTY: RegulationEntry = RegulationEntry {
        prob: 0.0,
        best_marker: None,
    };

    /// Keep `(k, p)` if it beats the current best. Markers are offered in
    /// ascending order, so ties stay with the smaller index.
    fn offer(&mut self, k: usize, p: f64) {
        if self.best_marker.is_none() || p > self.prob {
            *self = RegulationEntry {
                prob: p,
                best_marker: Some(k),
            };
        }
    }
}

/// Regulation probabilities for all ordered trait pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulationMatrix {
    trait_names: Vec<String>,
    marker_names: Vec<String>,
    entries: Vec<RegulationEntry>,
}

impl RegulationMatrix {
    pub fn n_traits(&self) -> usize {
        self.trait_names.len()
    }

    pub fn trait_names(&self) -> &[String] {
        &self.trait_names
    }

    pub fn marker_names(&self) -> &[String] {
        &self.marker_names
    }

    /// Entry for regulator `i`, target `j`; `None` on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Option<RegulationEntry> {
        (i != j).then(|| self.entries[i * self.n_traits() + j])
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).map_or(0.0, |e| e.prob)
    }

    /// Long-format rows sorted by probability (descending), then pair index.
    pub fn records(&self) -> Vec<RegulationRecord> {
        let nt = self.n_traits();
        let mut pairs: Vec<(usize, usize)> = (0..nt)
            .flat_map(|i| (0..nt).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        pairs.sort_by(|a, b| {
            self.prob(b.0, b.1)
                .total_cmp(&self.prob(a.0, a.1))
                .then(a.cmp(b))
        });
        pairs
            .into_iter()
            .map(|(i, j)| {
                let e = self.entries[i * nt + j];
                RegulationRecord {
                    regulator: self.trait_names[i].clone(),
                    target: self.trait_names[j].clone(),
                    probability: e.prob,
                    best_marker: e.best_marker.map(|k| self.marker_names[k].clone()),
                }
            })
            .collect()
    }
}

/// One row of the regulation table.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulationRecord {
    pub regulator: String,
    pub target: String,
    pub probability: f64,
    pub best_marker: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanSummary {
    pub triplets_scanned: u64,
    pub skipped_singular: u64,
    pub elapsed: Duration,
}

impl std::fmt::Display for ScanSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "triplets scanned: {}, skipped singular: {}, wall time: {:.3}s",
            self.triplets_scanned,
            self.skipped_singular,
            self.elapsed.as_secs_f64()
        )
    }
}

#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub matrix: RegulationMatrix,
    pub summary: ScanSummary,
}

struct PairOutcome {
    entry: RegulationEntry,
    scanned: u64,
    singular: u64,
}

/// Score every `(L_k, T_i, T_j)` triplet and keep the best chain posterior
/// per ordered pair.
///
/// Work is split by trait pair on the current rayon pool; each pair reduces
/// over its markers sequentially, so results do not depend on thread count.
pub fn scan(
    store: &CorrelationStore,
    prior: &StructurePrior,
    cfg: &AnalysisConfig,
    filter: &ScanFilter,
) -> Result<ScanOutput> {
    let started = Instant::now();
    let kernel = BayesFactorKernel::new(store.n(), cfg)?;
    let nt = store.n_traits();
    if let ScanFilter::Explicit(map) = filter {
        if let Some(bad) = map.iter().flatten().find(|&&k| k >= store.n_markers()) {
            return Err(BfcsError::InvalidDataset(format!(
                "marker index {bad} out of range ({} markers)",
                store.n_markers()
            )));
        }
    }
    let candidates: Vec<Vec<usize>> = (0..nt).map(|i| filter.candidates(store, i)).collect();

    let outcomes: Vec<PairOutcome> = (0..nt * nt)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nt, idx % nt);
            if i == j {
                return Ok(PairOutcome {
                    entry: RegulationEntry::EMPTY,
                    scanned: 0,
                    singular: 0,
                });
            }
            let r23 = store.trait_trait(i, j);
            let (reg, tgt) = (store.markers_of_trait(i), store.markers_of_trait(j));
            let mut out = PairOutcome {
                entry: RegulationEntry::EMPTY,
                scanned: 0,
                singular: 0,
            };
            for &k in &candidates[i] {
                out.scanned += 1;
                let bf = match kernel.evaluate(reg[k], tgt[k], r23) {
                    Ok(bf) => bf,
                    Err(BfcsError::SingularCorrelation { .. }) => {
                        out.singular += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let p = causal_chain_probability(&posterior(&bf, prior)?);
                out.entry.offer(k, p);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut summary = ScanSummary::default();
    let mut entries = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        summary.triplets_scanned += o.scanned;
        summary.skipped_singular += o.singular;
        entries.push(o.entry);
    }
    if summary.triplets_scanned == summary.skipped_singular {
        return Err(BfcsError::EmptyScan(if summary.triplets_scanned == 0 {
            "no triplets to scan".to_string()
        } else {
            format!("all {} triplets were singular", summary.triplets_scanned)
        }));
    }
    summary.elapsed = started.elapsed();
    Ok(ScanOutput {
        matrix: RegulationMatrix {
            trait_names: store.trait_names().to_vec(),
            marker_names: store.marker_names().to_vec(),
            entries,
        },
        summary,
    })
}

pub const REGULATION_HEADER: &str = "regulator\ttarget\tprobability\tbest_marker";

/// Write the long-format regulation table, highest probability first.
pub fn write_regulation_matrix(m: &RegulationMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| BfcsError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{REGULATION_HEADER}").map_err(io)?;
    for r in m.records() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.regulator,
            r.target,
            format::sig(r.probability, 6),
            r.best_marker.as_deref().unwrap_or("NA")
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_regulation_records(path: impl AsRef<Path>) -> Result<Vec<RegulationRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BfcsError::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BfcsError::io(path, e))?;
        let line_no = idx + 1;
        if idx == 0 {
            if line.trim_end() != REGULATION_HEADER {
                return Err(BfcsError::parse(
                    path,
                    1,
                    format!("expected header `{REGULATION_HEADER}`"),
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [regulator, target, prob, marker] = fields[..] else {
            return Err(BfcsError::parse(
                path,
                line_no,
                "expected 4 tab-separated fields",
            ));
        };
        let probability: f64 = prob
            .trim()
            .parse()
            .map_err(|_| BfcsError::parse(path, line_no, format!("bad probability '{prob}'")))?;
        if !(0.0..=1.0).contains(&probability) {
            return Err(BfcsError::parse(
                path,
                line_no,
                format!("probability {probability} outside [0, 1]"),
            ));
        }
        records.push(RegulationRecord {
            regulator: regulator.to_string(),
            target: target.to_string(),
            probability,
            best_marker: (marker.trim() != "NA").then(|| marker.trim().to_string()),
        });
    }
    Ok(records)
}
