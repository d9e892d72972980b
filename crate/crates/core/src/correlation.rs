//! Pairwise Pearson correlations, computed once per dataset.
//!
//! Each triplet `(L_k, T_i, T_j)` needs exactly `r(L_k, T_i)`, `r(L_k, T_j)`
//! and `r(T_i, T_j)`, so the scanner works off this store instead of the raw
//! data.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::evidence::{AnalysisConfig, CorrelationTriplet};

/// Unit-norm copy of `x`, after optional mean removal.
///
/// Correlations are plain dot products of standardized columns, which keeps
/// every entry a fixed-order sum and therefore independent of thread count.
pub fn standardize(x: &[f64], center: bool) -> Vec<f64> {
    let mean = if center {
        x.iter().sum::<f64>() / x.len() as f64
    } else {
        0.0
    };
    let mut z: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut z {
        *v /= norm;
    }
    z
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .sum::<f64>()
        .clamp(-1.0, 1.0)
}

/// Pearson correlation (or the uncentered cosine when `center` is false).
pub fn pearson(x: &[f64], y: &[f64], center: bool) -> f64 {
    dot(&standardize(x, center), &standardize(y, center))
}

/// Correlation triplet of three equally long columns.
pub fn triplet_from_columns(
    x1: &[f64],
    x2: &[f64],
    x3: &[f64],
    center: bool,
) -> CorrelationTriplet {
    let (z1, z2, z3) = (
        standardize(x1, center),
        standardize(x2, center),
        standardize(x3, center),
    );
    CorrelationTriplet::new(dot(&z1, &z2), dot(&z1, &z3), dot(&z2, &z3), x1.len() as u64)
}

/// Trait–trait and marker–trait correlations of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationStore {
    n: u64,
    trait_names: Vec<String>,
    marker_names: Vec<String>,
    /// `n_traits × n_traits`, row-major, unit diagonal.
    trait_trait: Vec<f64>,
    /// Trait-major: entry `[i * n_markers + k]` is `r(L_k, T_i)`.
    marker_trait: Vec<f64>,
}

impl CorrelationStore {
    /// Assemble a store from precomputed matrices.
    ///
    /// `trait_trait` is `n_traits²` row-major; `marker_trait[i][k]` is
    /// `r(L_k, T_i)`.
    pub fn from_parts(
        n: u64,
        trait_names: Vec<String>,
        marker_names: Vec<String>,
        trait_trait: Vec<f64>,
        marker_trait: Vec<Vec<f64>>,
    ) -> Self {
        let nt = trait_names.len();
        assert_eq!(trait_trait.len(), nt * nt, "trait_trait must be square");
        assert_eq!(marker_trait.len(), nt, "one marker row per trait");
        assert!(marker_trait
            .iter()
            .all(|row| row.len() == marker_names.len()));
        CorrelationStore {
            n,
            trait_names,
            marker_names,
            trait_trait,
            marker_trait: marker_trait.concat(),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n_traits(&self) -> usize {
        self.trait_names.len()
    }

    pub fn n_markers(&self) -> usize {
        self.marker_names.len()
    }

    pub fn trait_names(&self) -> &[String] {
        &self.trait_names
    }

    pub fn marker_names(&self) -> &[String] {
        &self.marker_names
    }

    #[inline]
    pub fn trait_trait(&self, i: usize, j: usize) -> f64 {
        self.trait_trait[i * self.n_traits() + j]
    }

    #[inline]
    pub fn marker_trait(&self, k: usize, i: usize) -> f64 {
        self.marker_trait[i * self.n_markers() + k]
    }

    /// All marker correlations of trait `i`, indexed by marker.
    #[inline]
    pub fn markers_of_trait(&self, i: usize) -> &[f64] {
        let m = self.n_markers();
        &self.marker_trait[i * m..(i + 1) * m]
    }

    /// Triplet `(X1, X2, X3) = (L_k, T_i, T_j)`.
    pub fn triplet(&self, k: usize, i: usize, j: usize) -> CorrelationTriplet {
        CorrelationTriplet::new(
            self.marker_trait(k, i),
            self.marker_trait(k, j),
            self.trait_trait(i, j),
            self.n,
        )
    }
}

/// Compute every trait–trait and marker–trait correlation of `d`.
pub fn compute_correlations(d: &Dataset, cfg: &AnalysisConfig) -> CorrelationStore {
    let center = cfg.center_data;
    let traits = d.trait_indices();
    let markers = d.marker_indices();
    let standardized = |idx: &[usize]| -> Vec<Vec<f64>> {
        idx.par_iter()
            .map(|&c| standardize(d.column(c), center))
            .collect()
    };
    let zt = standardized(&traits);
    let zm = standardized(&markers);
    let nt = traits.len();

    let upper: Vec<Vec<f64>> = (0..nt)
        .into_par_iter()
        .map(|i| (i + 1..nt).map(|j| dot(&zt[i], &zt[j])).collect())
        .collect();
    let mut trait_trait = vec![0.0; nt * nt];
    for i in 0..nt {
        trait_trait[i * nt + i] = 1.0;
        for (off, &r) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            trait_trait[i * nt + j] = r;
            trait_trait[j * nt + i] = r;
        }
    }

    let marker_trait: Vec<Vec<f64>> = zt
        .par_iter()
        .map(|t| zm.iter().map(|m| dot(m, t)).collect())
        .collect();

    let names = |idx: &[usize]| idx.iter().map(|&c| d.names()[c].clone()).collect();
    CorrelationStore::from_parts(
        d.n_samples() as u64,
        names(&traits),
        names(&markers),
        trait_trait,
        marker_trait,
    )
}
