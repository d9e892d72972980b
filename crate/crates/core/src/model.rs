//! The eleven conditional-independence models over three variables.
//!
//! Variables are indexed `0, 1, 2` internally and printed as `X1, X2, X3`.
//! The enumeration order is fixed and is used for every serialized vector.

use std::fmt;
use std::str::FromStr;

/// One of the eleven conditional-independence (CI) models for a trivariate
/// Gaussian, in canonical table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CiModel {
    /// Full: no independences.
    M0,
    /// `X1 ⊥ X2`
    M1,
    /// `X2 ⊥ X3`
    M2,
    /// `X3 ⊥ X1`
    M3,
    /// `X1 ⊥ X2 | X3`
    M4,
    /// `X2 ⊥ X3 | X1`
    M5,
    /// `X3 ⊥ X1 | X2`
    M6,
    /// `X1 ⊥ (X2, X3)`
    M7,
    /// `X2 ⊥ (X3, X1)`
    M8,
    /// `X3 ⊥ (X1, X2)`
    M9,
    /// Empty: all three mutually independent.
    M10,
}

/// The five canonical independence patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    Full,
    Acausal,
    Causal,
    Independent,
    Empty,
}

/// Structural description of a model in terms of 0-based variable indices.
///
/// Pairs are stored unordered; [`Structure::normalized`] sorts them so two
/// descriptions of the same model compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    Full,
    /// `a ⊥ b` marginally.
    Marginal {
        a: usize,
        b: usize,
    },
    /// `a ⊥ b | given`.
    Conditional {
        a: usize,
        b: usize,
        given: usize,
    },
    /// `isolated ⊥ (other two)`.
    Isolated {
        isolated: usize,
    },
    Empty,
}

impl Structure {
    pub fn normalized(self) -> Self {
        match self {
            Structure::Marginal { a, b } => Structure::Marginal {
                a: a.min(b),
                b: a.max(b),
            },
            Structure::Conditional { a, b, given } => Structure::Conditional {
                a: a.min(b),
                b: a.max(b),
                given,
            },
            other => other,
        }
    }
}

pub const NUM_MODELS: usize = 11;

impl CiModel {
    pub const ALL: [CiModel; NUM_MODELS] = [
        CiModel::M0,
        CiModel::M1,
        CiModel::M2,
        CiModel::M3,
        CiModel::M4,
        CiModel::M5,
        CiModel::M6,
        CiModel::M7,
        CiModel::M8,
        CiModel::M9,
        CiModel::M10,
    ];

    /// The model whose posterior is read as `X1 -> X2 -> X3` under
    /// marker-first background knowledge.
    pub const CAUSAL_CHAIN: CiModel = CiModel::M6;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<CiModel> {
        CiModel::ALL.get(index).copied()
    }

    pub fn id(self) -> &'static str {
        const IDS: [&str; NUM_MODELS] = [
            "M0", "M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "M9", "M10",
        ];
        IDS[self.index()]
    }

    pub fn description(self) -> &'static str {
        match self {
            CiModel::M0 => "full",
            CiModel::M1 => "X1⊥X2",
            CiModel::M2 => "X2⊥X3",
            CiModel::M3 => "X3⊥X1",
            CiModel::M4 => "X1⊥X2|X3",
            CiModel::M5 => "X2⊥X3|X1",
            CiModel::M6 => "X3⊥X1|X2",
            CiModel::M7 => "X1⊥(X2,X3)",
            CiModel::M8 => "X2⊥(X3,X1)",
            CiModel::M9 => "X3⊥(X1,X2)",
            CiModel::M10 => "empty",
        }
    }

    pub fn pattern(self) -> Pattern {
        match self {
            CiModel::M0 => Pattern::Full,
            CiModel::M1 | CiModel::M2 | CiModel::M3 => Pattern::Acausal,
            CiModel::M4 | CiModel::M5 | CiModel::M6 => Pattern::Causal,
            CiModel::M7 | CiModel::M8 | CiModel::M9 => Pattern::Independent,
            CiModel::M10 => Pattern::Empty,
        }
    }

    pub fn structure(self) -> Structure {
        match self {
            CiModel::M0 => Structure::Full,
            CiModel::M1 => Structure::Marginal { a: 0, b: 1 },
            CiModel::M2 => Structure::Marginal { a: 1, b: 2 },
            CiModel::M3 => Structure::Marginal { a: 0, b: 2 },
            CiModel::M4 => Structure::Conditional {
                a: 0,
                b: 1,
                given: 2,
            },
            CiModel::M5 => Structure::Conditional {
                a: 1,
                b: 2,
                given: 0,
            },
            CiModel::M6 => Structure::Conditional {
                a: 0,
                b: 2,
                given: 1,
            },
            CiModel::M7 => Structure::Isolated { isolated: 0 },
            CiModel::M8 => Structure::Isolated { isolated: 1 },
            CiModel::M9 => Structure::Isolated { isolated: 2 },
            CiModel::M10 => Structure::Empty,
        }
    }

    pub fn from_structure(structure: Structure) -> Option<CiModel> {
        let target = structure.normalized();
        CiModel::ALL
            .into_iter()
            .find(|m| m.structure().normalized() == target)
    }

    /// Image of this model when variable `v` is renamed to `perm[v]`.
    ///
    /// `perm` must be a permutation of `{0, 1, 2}`.
    pub fn relabel(self, perm: [usize; 3]) -> CiModel {
        let image = match self.structure() {
            Structure::Marginal { a, b } => Structure::Marginal {
                a: perm[a],
                b: perm[b],
            },
            Structure::Conditional { a, b, given } => Structure::Conditional {
                a: perm[a],
                b: perm[b],
                given: perm[given],
            },
            Structure::Isolated { isolated } => Structure::Isolated {
                isolated: perm[isolated],
            },
            s => s,
        };
        CiModel::from_structure(image)
            .expect("every relabeled structure is one of the eleven models")
    }
}

impl fmt::Display for CiModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CiModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        CiModel::ALL
            .into_iter()
            .find(|m| m.id().eq_ignore_ascii_case(trimmed))
            .ok_or_else(|| format!("unknown model id '{trimmed}' (expected M0..M10)"))
    }
}

/// All six permutations of three variables.
pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];
