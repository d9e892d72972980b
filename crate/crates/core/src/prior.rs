//! Prior distributions over the eleven CI models.
//!
//! The tabulated priors put uniform mass on causal graphs and count how many
//! graphs fall into each Markov equivalence class. Counts are fixed
//! constants; no graph enumeration happens at runtime.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{BfcsError, Result};
use crate::model::{CiModel, NUM_MODELS};

/// Graph-counting families with a tabulated count column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorFamily {
    Dag,
    DagBk,
    Dmag,
    DmagBk,
}

impl PriorFamily {
    pub const ALL: [PriorFamily; 4] = [
        PriorFamily::Dag,
        PriorFamily::DagBk,
        PriorFamily::Dmag,
        PriorFamily::DmagBk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PriorFamily::Dag => "dag",
            PriorFamily::DagBk => "dag-bk",
            PriorFamily::Dmag => "dmag",
            PriorFamily::DmagBk => "dmag-bk",
        }
    }
}

impl FromStr for PriorFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PriorFamily::ALL
            .into_iter()
            .find(|f| f.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown prior family '{s}'"))
    }
}

/// Number of causal graph structures over three variables in each Markov
/// equivalence class. "BK" columns forbid arrowheads into `X1`.
pub struct GraphCountTable;

impl GraphCountTable {
    pub const DAG: [u32; NUM_MODELS] = [6, 1, 1, 1, 3, 3, 3, 2, 2, 2, 1];
    pub const DAG_BK: [u32; NUM_MODELS] = [2, 1, 0, 1, 1, 1, 1, 2, 1, 1, 1];
    pub const DMAG: [u32; NUM_MODELS] = [19, 3, 3, 3, 5, 5, 5, 3, 3, 3, 1];
    pub const DMAG_BK: [u32; NUM_MODELS] = [3, 2, 0, 2, 1, 1, 1, 3, 1, 1, 1];

    pub fn counts(family: PriorFamily) -> &'static [u32; NUM_MODELS] {
        match family {
            PriorFamily::Dag => &Self::DAG,
            PriorFamily::DagBk => &Self::DAG_BK,
            PriorFamily::Dmag => &Self::DMAG,
            PriorFamily::DmagBk => &Self::DMAG_BK,
        }
    }

    pub fn total(family: PriorFamily) -> u32 {
        Self::counts(family).iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriorLabel {
    Dag,
    DagBk,
    Dmag,
    DmagBk,
    UniformModels,
    Custom,
}

impl From<PriorFamily> for PriorLabel {
    fn from(f: PriorFamily) -> Self {
        match f {
            PriorFamily::Dag => PriorLabel::Dag,
            PriorFamily::DagBk => PriorLabel::DagBk,
            PriorFamily::Dmag => PriorLabel::Dmag,
            PriorFamily::DmagBk => PriorLabel::DmagBk,
        }
    }
}

impl fmt::Display for PriorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorLabel::Dag => "dag",
            PriorLabel::DagBk => "dag-bk",
            PriorLabel::Dmag => "dmag",
            PriorLabel::DmagBk => "dmag-bk",
            PriorLabel::UniformModels => "uniform-models",
            PriorLabel::Custom => "custom",
        })
    }
}

/// Prior mass over the eleven models. Entries may be exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructurePrior {
    pub prob: [f64; NUM_MODELS],
    pub label: PriorLabel,
}

impl StructurePrior {
    /// Normalize non-negative weights into a prior.
    pub fn from_weights(weights: [f64; NUM_MODELS], label: PriorLabel) -> Result<Self> {
        if let Some((j, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(BfcsError::InvalidPrior(format!(
                "weight for {} must be a finite non-negative number, got {w}",
                CiModel::ALL[j]
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(BfcsError::InvalidPrior("all weights are zero".into()));
        }
        Ok(StructurePrior {
            prob: weights.map(|w| w / total),
            label,
        })
    }

    pub fn get(&self, model: CiModel) -> f64 {
        self.prob[model.index()]
    }
}

/// Uniform prior over the causal graphs of one count column.
pub fn prior_from_counts(family: PriorFamily) -> StructurePrior {
    let counts = GraphCountTable::counts(family);
    StructurePrior::from_weights(counts.map(f64::from), family.into())
        .expect("tabulated counts form a valid prior")
}

/// Equal mass `1/11` on every CI model.
pub fn uniform_model_prior() -> StructurePrior {
    StructurePrior {
        prob: [1.0 / NUM_MODELS as f64; NUM_MODELS],
        label: PriorLabel::UniformModels,
    }
}

/// Parse a custom prior: one `model_id<TAB>weight` line per model, `M0..M10`
/// each exactly once. Blank lines and `#` comments are ignored.
pub fn parse_prior(text: &str, source: &Path) -> Result<StructurePrior> {
    let mut weights = [None; NUM_MODELS];
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(id), Some(weight), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(BfcsError::parse(
                source,
                line_no,
                "expected `model_id<TAB>weight`",
            ));
        };
        let model: CiModel = id
            .parse()
            .map_err(|e: String| BfcsError::parse(source, line_no, e))?;
        let weight: f64 = weight.trim().parse().map_err(|_| {
            BfcsError::parse(
                source,
                line_no,
                format!("weight '{weight}' is not a number"),
            )
        })?;
        if weight < 0.0 || !weight.is_finite() {
            return Err(BfcsError::InvalidPrior(format!(
                "negative or non-finite weight {weight} for {model} at {}:{line_no}",
                source.display()
            )));
        }
        if weights[model.index()].replace(weight).is_some() {
            return Err(BfcsError::parse(
                source,
                line_no,
                format!("duplicate entry for {model}"),
            ));
        }
    }
    let mut resolved = [0.0; NUM_MODELS];
    for (j, w) in weights.iter().enumerate() {
        resolved[j] = w.ok_or_else(|| {
            BfcsError::parse(source, 0, format!("missing weight for {}", CiModel::ALL[j]))
        })?;
    }
    StructurePrior::from_weights(resolved, PriorLabel::Custom)
}

pub fn prior_from_file(path: impl AsRef<Path>) -> Result<StructurePrior> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| BfcsError::io(path, e))?;
    parse_prior(&text, path)
}
