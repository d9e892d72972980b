//! Closed-form log Bayes factors for the eleven CI models.
//!
//! Every factor is taken relative to the unconstrained model `M0` under an
//! inverse Wishart prior with scale `εI`, `ε → 0`. In that limit the evidence
//! ratios depend on the data only through the sample correlation matrix and
//! the sample count, so the inputs here are three correlations and `n`.
//!
//! All arithmetic is carried out on the log scale: `|R|^((n+ν)/2)` underflows
//! long before `n` reaches realistic sample sizes.

use crate::error::{BfcsError, Result};
use crate::model::{CiModel, Structure, NUM_MODELS};

/// Triplets whose correlation determinant is at or below this value are
/// rejected as singular.
pub const DET_FLOOR: f64 = 1e-12;

/// Correlations up to this far outside `[-1, 1]` are treated as rounding
/// noise and clamped.
pub const RANGE_SLACK: f64 = 1e-12;

pub const DEFAULT_NU: u32 = 4;

/// Settings shared by every Bayes-factor evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisConfig {
    /// Degrees of freedom of the inverse Wishart prior. `ν = 4` gives uniform
    /// marginals on each off-diagonal correlation for three variables.
    pub nu: u32,
    /// Subtract column means before forming correlations.
    pub center_data: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            nu: DEFAULT_NU,
            center_data: true,
        }
    }
}

impl AnalysisConfig {
    pub fn with_nu(nu: u32) -> Result<Self> {
        let cfg = AnalysisConfig {
            nu,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 3 {
            return Err(BfcsError::InvalidConfig(format!(
                "nu must be at least 3, got {}",
                self.nu
            )));
        }
        Ok(())
    }
}

/// The three pairwise sample correlations of a variable triplet plus the
/// number of samples they were computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTriplet {
    pub r12: f64,
    pub r13: f64,
    pub r23: f64,
    pub n: u64,
}

impl CorrelationTriplet {
    pub fn new(r12: f64, r13: f64, r23: f64, n: u64) -> Self {
        CorrelationTriplet { r12, r13, r23, n }
    }

    /// Correlation between 0-based variables `a` and `b` (`r(a, a) = 1`).
    pub fn r(&self, a: usize, b: usize) -> f64 {
        match (a.min(b), a.max(b)) {
            (0, 1) => self.r12,
            (0, 2) => self.r13,
            (1, 2) => self.r23,
            (x, y) if x == y && x < 3 => 1.0,
            _ => panic!("variable index out of range: ({a}, {b})"),
        }
    }

    /// Triplet seen after renaming variable `v` to `perm[v]`.
    pub fn relabel(&self, perm: [usize; 3]) -> Self {
        let mut r = [[1.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    r[perm[a]][perm[b]] = self.r(a, b);
                }
            }
        }
        CorrelationTriplet::new(r[0][1], r[0][2], r[1][2], self.n)
    }

    /// `det(R) = 1 − r12² − r13² − r23² + 2·r12·r13·r23`.
    pub fn det(&self) -> f64 {
        correlation_det(self.r12, self.r13, self.r23)
    }

    /// Regular iff `det(R) > DET_FLOOR` and every `|r| < 1`.
    pub fn is_regular(&self) -> bool {
        [self.r12, self.r13, self.r23].iter().all(|r| r.abs() < 1.0) && self.det() > DET_FLOOR
    }
}

/// Determinant of a 3×3 correlation matrix.
///
/// Terms are combined in sorted order so the result is bit-identical under
/// any relabeling of the three variables.
pub fn correlation_det(r12: f64, r13: f64, r23: f64) -> f64 {
    let mut sq = [r12 * r12, r13 * r13, r23 * r23];
    sq.sort_by(f64::total_cmp);
    let mut abs = [r12.abs(), r13.abs(), r23.abs()];
    abs.sort_by(f64::total_cmp);
    let negatives = [r12, r13, r23]
        .iter()
        .filter(|r| r.is_sign_negative())
        .count();
    let sign = if negatives % 2 == 0 { 1.0 } else { -1.0 };
    1.0 - sq[2] - sq[1] - sq[0] + 2.0 * sign * (abs[0] * abs[1] * abs[2])
}

/// `ln f(n, ν) = ln((n + ν − 2) / (ν − 2))`.
pub fn log_f(n: u64, nu: u32) -> Result<f64> {
    if nu < 3 {
        return Err(BfcsError::InvalidConfig(format!(
            "f(n, nu) requires nu > 2, got {nu}"
        )));
    }
    let nu = f64::from(nu);
    Ok(((n as f64 + nu - 2.0) / (nu - 2.0)).ln())
}

/// `ln g(n, ν) = lnΓ((n+ν)/2) + lnΓ((ν−1)/2) − lnΓ((n+ν−1)/2) − lnΓ(ν/2)`.
///
/// Exact log-gamma evaluation; the familiar `sqrt((2n+2ν−3)/(2ν−3))` is only
/// an approximation of `g`.
pub fn log_g(n: u64, nu: u32) -> Result<f64> {
    if nu < 2 {
        return Err(BfcsError::InvalidConfig(format!(
            "g(n, nu) requires nu > 1, got {nu}"
        )));
    }
    let n = n as f64;
    let nu = f64::from(nu);
    Ok(ln_gamma((n + nu) / 2.0) + ln_gamma((nu - 1.0) / 2.0)
        - ln_gamma((n + nu - 1.0) / 2.0)
        - ln_gamma(nu / 2.0))
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Log Bayes factors `ln B_j = ln p(D|M_j) − ln p(D|M_0)` in model order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesFactorVector {
    pub log_bf: [f64; NUM_MODELS],
}

impl BayesFactorVector {
    pub fn log(&self, model: CiModel) -> f64 {
        self.log_bf[model.index()]
    }

    pub fn log10(&self, model: CiModel) -> f64 {
        self.log(model) / std::f64::consts::LN_10
    }

    /// Bayes factor on the linear scale; overflows to `inf` / underflows to 0
    /// for large samples.
    pub fn linear(&self, model: CiModel) -> f64 {
        self.log(model).exp()
    }
}

/// Per-`(n, ν)` constants of the Bayes factors, computed once and reused for
/// every triplet that shares a sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesFactorKernel {
    n: u64,
    log_f: f64,
    log_g: f64,
    /// `(n + ν) / 2`
    half_n_nu: f64,
    /// `(n + ν − 1) / 2`
    half_n_nu_minus_one: f64,
}

impl BayesFactorKernel {
    pub fn new(n: u64, cfg: &AnalysisConfig) -> Result<Self> {
        cfg.validate()?;
        let nu = f64::from(cfg.nu);
        Ok(BayesFactorKernel {
            n,
            log_f: log_f(n, cfg.nu)?,
            log_g: log_g(n, cfg.nu)?,
            half_n_nu: (n as f64 + nu) / 2.0,
            half_n_nu_minus_one: (n as f64 + nu - 1.0) / 2.0,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Evaluate all eleven log Bayes factors for one set of correlations.
    pub fn evaluate(&self, r12: f64, r13: f64, r23: f64) -> Result<BayesFactorVector> {
        let r12 = clamp_correlation("r12", r12)?;
        let r13 = clamp_correlation("r13", r13)?;
        let r23 = clamp_correlation("r23", r23)?;

        let det = correlation_det(r12, r13, r23);
        if det.is_nan()
            || det <= DET_FLOOR
            || r12.abs() >= 1.0
            || r13.abs() >= 1.0
            || r23.abs() >= 1.0
        {
            return Err(BfcsError::SingularCorrelation {
                det,
                floor: DET_FLOOR,
            });
        }
        let log_det = det.ln();

        // ln(1 − r²) for each pair, indexed by the excluded variable.
        let log_one_minus = |r: f64| (-r * r).ln_1p();
        let pair_term = [log_one_minus(r23), log_one_minus(r13), log_one_minus(r12)];
        let pair = |a: usize, b: usize| pair_term[3 - a - b];

        let mut log_bf = [0.0; NUM_MODELS];
        for model in CiModel::ALL {
            log_bf[model.index()] = match model.structure() {
                Structure::Full => 0.0,
                Structure::Empty => self.log_f + self.log_g + self.half_n_nu * log_det,
                Structure::Isolated { isolated } => {
                    let (a, b) = others(isolated);
                    self.log_f + self.half_n_nu * (log_det - pair(a, b))
                }
                Structure::Conditional { a, b, given } => {
                    self.log_g + self.half_n_nu * (log_det - (pair(a, given) + pair(b, given)))
                }
                Structure::Marginal { a, b } => {
                    self.log_f - self.log_g + self.half_n_nu_minus_one * pair(a, b)
                }
            };
        }
        Ok(BayesFactorVector { log_bf })
    }
}

fn others(v: usize) -> (usize, usize) {
    match v {
        0 => (1, 2),
        1 => (0, 2),
        2 => (0, 1),
        _ => unreachable!("variable index out of range"),
    }
}

fn clamp_correlation(name: &'static str, r: f64) -> Result<f64> {
    if r.is_nan() || r.abs() > 1.0 + RANGE_SLACK {
        return Err(BfcsError::OutOfRange { name, value: r });
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// All eleven log Bayes factors of a correlation triplet.
pub fn log_bayes_factors(
    t: &CorrelationTriplet,
    cfg: &AnalysisConfig,
) -> Result<BayesFactorVector> {
    BayesFactorKernel::new(t.n, cfg)?.evaluate(t.r12, t.r13, t.r23)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const NU: AnalysisConfig = AnalysisConfig {
        nu: 4,
        center_data: true,
    };

    #[test]
    fn log_f_values() {
        assert_relative_eq!(log_f(2, 4).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(log_f(0, 4).unwrap(), 0.0);
        assert_relative_eq!(log_f(100, 4).unwrap(), 51f64.ln(), epsilon = 1e-14);
        assert!(matches!(log_f(5, 2), Err(BfcsError::InvalidConfig(_))));
    }

    #[test]
    fn log_g_values() {
        // Γ(3)Γ(3/2) / (Γ(5/2)Γ(2)) = 2 · (√π/2) / (3√π/4) = 4/3
        assert_relative_eq!(log_g(2, 4).unwrap(), (4.0f64 / 3.0).ln(), epsilon = 1e-14);
        assert!(log_g(0, 4).unwrap().abs() < 1e-15);
        assert!(log_g(3, 1).is_err());
    }

    #[test]
    fn log_g_close_to_square_root_approximation() {
        let exact = log_g(2, 4).unwrap().exp();
        let approx = (9.0f64 / 5.0).sqrt();
        assert!(((exact - approx) / approx).abs() < 0.01);
    }

    #[test]
    fn log_g_finite_for_a_million_samples() {
        let v = log_g(1_000_000, 4).unwrap();
        assert!(v.is_finite());
        // Γ(x+½)/Γ(x) = √x (1 − 1/(8x) + O(x⁻²)), x = (n+ν−1)/2; Γ(3/2) = √π/2
        let x = (1.0e6 + 3.0) / 2.0;
        let asymptotic = 0.5 * f64::ln(x)
            + f64::ln(1.0 - 1.0 / (8.0 * x))
            + f64::ln(std::f64::consts::PI.sqrt() / 2.0);
        assert!((v - asymptotic).abs() < 1e-8, "{v} vs {asymptotic}");
    }

    #[test]
    fn identity_correlation_golden_values() {
        let bf = log_bayes_factors(&CorrelationTriplet::new(0.0, 0.0, 0.0, 2), &NU).unwrap();
        let expected = [
            1.0,
            1.5,
            1.5,
            1.5,
            4.0 / 3.0,
            4.0 / 3.0,
            4.0 / 3.0,
            2.0,
            2.0,
            2.0,
            8.0 / 3.0,
        ];
        for m in CiModel::ALL {
            assert_relative_eq!(bf.linear(m), expected[m.index()], epsilon = 1e-12);
        }
        assert_eq!(bf.log(CiModel::M0), 0.0);
    }

    #[test]
    fn single_correlation_example() {
        let bf = log_bayes_factors(&CorrelationTriplet::new(0.5, 0.0, 0.0, 100), &NU).unwrap();
        assert!(
            (bf.log10(CiModel::M1) - (-5.53)).abs() < 0.01,
            "{}",
            bf.log10(CiModel::M1)
        );
    }

    #[test]
    fn out_of_range_and_singular() {
        let err = log_bayes_factors(&CorrelationTriplet::new(1.5, 0.0, 0.0, 10), &NU).unwrap_err();
        assert!(matches!(err, BfcsError::OutOfRange { name: "r12", .. }));
        // within slack: clamped to 1, then singular
        let err = log_bayes_factors(&CorrelationTriplet::new(1.0 + 5e-13, 0.0, 0.0, 10), &NU)
            .unwrap_err();
        assert!(matches!(err, BfcsError::SingularCorrelation { .. }));
        let r = 0.99999999;
        let err = log_bayes_factors(&CorrelationTriplet::new(r, r, r, 10), &NU).unwrap_err();
        assert!(matches!(err, BfcsError::SingularCorrelation { .. }));
        let err =
            log_bayes_factors(&CorrelationTriplet::new(f64::NAN, 0.0, 0.0, 10), &NU).unwrap_err();
        assert!(matches!(err, BfcsError::OutOfRange { .. }));
    }

    #[test]
    fn relabeled_triplet_swaps_correlations() {
        let t = CorrelationTriplet::new(0.1, 0.2, 0.3, 7);
        let s = t.relabel([2, 1, 0]);
        assert_eq!((s.r12, s.r13, s.r23), (0.3, 0.2, 0.1));
        assert_eq!(t.det().to_bits(), s.det().to_bits());
    }

    #[test]
    fn regularity() {
        assert!(CorrelationTriplet::new(0.0, 0.0, 0.0, 3).is_regular());
        assert!(!CorrelationTriplet::new(0.9, 0.9, -0.9, 3).is_regular());
        assert!(!CorrelationTriplet::new(1.0, 0.0, 0.0, 3).is_regular());
    }

    #[test]
    fn nu_below_three_rejected() {
        assert!(AnalysisConfig::with_nu(2).is_err());
        let cfg = AnalysisConfig {
            nu: 2,
            center_data: true,
        };
        assert!(log_bayes_factors(&CorrelationTriplet::new(0.1, 0.1, 0.1, 10), &cfg).is_err());
    }
}
