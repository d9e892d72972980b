//! Posterior mass over the eleven CI models.

use crate::error::{BfcsError, Result};
use crate::evidence::BayesFactorVector;
use crate::model::{CiModel, NUM_MODELS};
use crate::prior::StructurePrior;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorVector {
    pub prob: [f64; NUM_MODELS],
}

impl PosteriorVector {
    pub fn get(&self, model: CiModel) -> f64 {
        self.prob[model.index()]
    }
}

/// `p(M_j | D) ∝ B_j · p(M_j)`, normalized with a max-shifted exponential sum.
pub fn posterior(bf: &BayesFactorVector, prior: &StructurePrior) -> Result<PosteriorVector> {
    let mut log_weight = [f64::NEG_INFINITY; NUM_MODELS];
    for (j, w) in log_weight.iter_mut().enumerate() {
        let p = prior.prob[j];
        if p > 0.0 {
            *w = bf.log_bf[j] + p.ln();
        }
    }
    let max = log_weight.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return Err(BfcsError::DegeneratePrior);
    }

    let mut prob = [0.0; NUM_MODELS];
    let mut total = 0.0;
    for (p, w) in prob.iter_mut().zip(log_weight) {
        *p = (w - max).exp();
        total += *p;
    }
    for p in &mut prob {
        *p /= total;
    }
    Ok(PosteriorVector { prob })
}

/// Posterior of the `X3 ⊥ X1 | X2` class.
///
/// With a marker-first background-knowledge prior this class holds the single
/// structure `X1 → X2 → X3`, so its mass is the chain posterior.
pub fn causal_chain_probability(post: &PosteriorVector) -> f64 {
    post.get(CiModel::CAUSAL_CHAIN)
}
