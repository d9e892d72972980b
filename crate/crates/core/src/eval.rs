//! Scoring a regulation matrix against a known network: ROC and
//! precision-recall curves with their areas, and the Brier score.
//!
//! The PR area uses the step rule `Σ (R_k − R_{k−1}) · P_k` over distinct
//! thresholds (average precision). Linear interpolation between PR points is
//! not used; it overstates the area.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{BfcsError, Result};
use crate::format;
use crate::scan::RegulationRecord;

/// Predicted probability and true label for every ordered trait pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredEdges {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredEdges {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(BfcsError::DimensionMismatch(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(BfcsError::InvalidDataset(format!(
                "score {s} outside [0, 1]"
            )));
        }
        Ok(ScoredEdges { scores, labels })
    }

    /// Match predictions against true `(source, target)` edges.
    ///
    /// The trait set is every name appearing in either input; the predictions
    /// must cover each ordered pair of distinct traits exactly once.
    pub fn from_predictions(
        predictions: &[RegulationRecord],
        truth: &[(String, String)],
    ) -> Result<Self> {
        let mut traits: Vec<&str> = Vec::new();
        let mut seen_trait = HashSet::new();
        let names = predictions
            .iter()
            .flat_map(|r| [r.regulator.as_str(), r.target.as_str()])
            .chain(truth.iter().flat_map(|(s, t)| [s.as_str(), t.as_str()]));
        for n in names {
            if seen_trait.insert(n) {
                traits.push(n);
            }
        }

        let mut predicted: HashMap<(&str, &str), f64> = HashMap::new();
        for r in predictions {
            if r.regulator == r.target {
                continue;
            }
            if predicted
                .insert((&r.regulator, &r.target), r.probability)
                .is_some()
            {
                return Err(BfcsError::LabelMismatch(format!(
                    "pair {} -> {} predicted more than once",
                    r.regulator, r.target
                )));
            }
        }
        let mut positives: HashSet<(&str, &str)> = HashSet::new();
        for (s, t) in truth {
            if s == t {
                return Err(BfcsError::LabelMismatch(format!(
                    "self-edge {s} -> {t} in ground truth"
                )));
            }
            positives.insert((s, t));
        }

        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for &a in &traits {
            for &b in &traits {
                if a == b {
                    continue;
                }
                let p = predicted.get(&(a, b)).ok_or_else(|| {
                    BfcsError::LabelMismatch(format!("no prediction for pair {a} -> {b}"))
                })?;
                scores.push(*p);
                labels.push(positives.contains(&(a, b)));
            }
        }
        ScoredEdges::new(scores, labels)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn prevalence(&self) -> f64 {
        self.positives() as f64 / self.len() as f64
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    /// Cumulative `(threshold, tp, fp)` at each distinct score, highest first.
    fn sweep(&self) -> Vec<(f64, usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        let mut out = Vec::new();
        let (mut tp, mut fp) = (0, 0);
        for (pos, &idx) in order.iter().enumerate() {
            if self.labels[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
            let last_of_group = order
                .get(pos + 1)
                .is_none_or(|&next| self.scores[next] != self.scores[idx]);
            if last_of_group {
                out.push((self.scores[idx], tp, fp));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
    pub area: f64,
}

/// ROC curve: `(FPR, TPR)` at each distinct threshold, starting from `(0, 0)`
/// at threshold `+inf`; trapezoidal area.
pub fn roc_curve(s: &ScoredEdges) -> Result<Curve> {
    let pos = s.positives();
    let neg = s.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(BfcsError::DegenerateLabels(format!(
            "ROC needs both classes ({pos} positive, {neg} negative)"
        )));
    }
    let mut points = vec![CurvePoint {
        threshold: f64::INFINITY,
        x: 0.0,
        y: 0.0,
    }];
    let mut area = 0.0;
    for (threshold, tp, fp) in s.sweep() {
        let prev = points[points.len() - 1];
        let p = CurvePoint {
            threshold,
            x: fp as f64 / neg as f64,
            y: tp as f64 / pos as f64,
        };
        area += (p.x - prev.x) * (p.y + prev.y) / 2.0;
        points.push(p);
    }
    Ok(Curve { points, area })
}

/// Precision-recall curve: `(recall, precision)` at each distinct threshold;
/// step-rule area.
pub fn pr_curve(s: &ScoredEdges) -> Result<Curve> {
    let pos = s.positives();
    if pos == 0 {
        return Err(BfcsError::DegenerateLabels(
            "PR curve needs at least one positive label".into(),
        ));
    }
    let mut points = Vec::new();
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (threshold, tp, fp) in s.sweep() {
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(CurvePoint {
            threshold,
            x: recall,
            y: precision,
        });
    }
    Ok(Curve { points, area })
}

/// Mean of `(p − y)²` over all pairs.
pub fn brier_score(s: &ScoredEdges) -> f64 {
    if s.is_empty() {
        return f64::NAN;
    }
    let total: f64 = s
        .scores
        .iter()
        .zip(&s.labels)
        .map(|(&p, &l)| {
            let y = if l { 1.0 } else { 0.0 };
            (p - y) * (p - y)
        })
        .sum();
    total / s.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub auc_roc: f64,
    pub auprc: f64,
    pub brier: f64,
    pub pairs: usize,
    pub positives: usize,
}

impl EvalSummary {
    pub const HEADER: &'static str = "auc_roc\tauprc\tbrier\tpairs\tpositives";

    pub fn line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            format::sig(self.auc_roc, 6),
            format::sig(self.auprc, 6),
            format::sig(self.brier, 6),
            self.pairs,
            self.positives
        )
    }
}

/// ROC, PR and Brier in one pass.
pub fn evaluate(s: &ScoredEdges) -> Result<(Curve, Curve, EvalSummary)> {
    let roc = roc_curve(s)?;
    let pr = pr_curve(s)?;
    let summary = EvalSummary {
        auc_roc: roc.area,
        auprc: pr.area,
        brier: brier_score(s),
        pairs: s.len(),
        positives: s.positives(),
    };
    Ok((roc, pr, summary))
}

/// Write `threshold  x  y` rows with the given column names for x and y.
pub fn write_curve(
    curve: &Curve,
    x_name: &str,
    y_name: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let io = |e| BfcsError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "threshold\t{x_name}\t{y_name}").map_err(io)?;
    for p in &curve.points {
        writeln!(
            out,
            "{}\t{}\t{}",
            format::sig(p.threshold, 6),
            format::sig(p.x, 6),
            format::sig(p.y, 6)
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn edges(pairs: &[(f64, bool)]) -> ScoredEdges {
        ScoredEdges::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    /// Fraction of (positive, negative) pairs ranked correctly, ties half.
    fn pairwise_auc(s: &ScoredEdges) -> f64 {
        let (mut good, mut total) = (0.0, 0.0);
        for (i, &li) in s.labels.iter().enumerate() {
            for (j, &lj) in s.labels.iter().enumerate() {
                if li && !lj {
                    total += 1.0;
                    good += match s.scores[i].partial_cmp(&s.scores[j]).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
        }
        good / total
    }

    #[test]
    fn perfect_separation() {
        let s = edges(&[(0.9, true), (0.8, true), (0.2, false), (0.1, false)]);
        assert_eq!(roc_curve(&s).unwrap().area, 1.0);
        assert_eq!(pr_curve(&s).unwrap().area, 1.0);
        let confident = edges(&[(1.0, true), (0.0, false)]);
        assert_eq!(brier_score(&confident), 0.0);
        let wrong = edges(&[(0.0, true), (1.0, false)]);
        assert_eq!(brier_score(&wrong), 1.0);
    }

    #[test]
    fn four_edge_toy_case() {
        // thresholds 0.9 | 0.8 | 0.7 | 0.1 with labels + - + -
        //   ROC: (0, .5) (.5, .5) (.5, 1) (1, 1) -> area .25 + .5 = .75
        //   PR:  (.5, 1) (.5, .5) (1, 2/3) (1, .5) -> AP = .5·1 + .5·2/3
        let s = edges(&[(0.9, true), (0.8, false), (0.7, true), (0.1, false)]);
        let roc = roc_curve(&s).unwrap();
        let xy: Vec<(f64, f64)> = roc.points.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(
            xy,
            [(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        assert!((roc.area - 0.75).abs() < 1e-15);
        assert!((roc.area - pairwise_auc(&s)).abs() < 1e-15);

        let pr = pr_curve(&s).unwrap();
        let xy: Vec<(f64, f64)> = pr.points.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(xy, [(0.5, 1.0), (0.5, 0.5), (1.0, 2.0 / 3.0), (1.0, 0.5)]);
        assert!((pr.area - (0.5 + 1.0 / 3.0)).abs() < 1e-15);
        let thresholds: Vec<f64> = pr.points.iter().map(|p| p.threshold).collect();
        assert_eq!(thresholds, [0.9, 0.8, 0.7, 0.1]);

        // (.9-1)² + .8² + (.7-1)² + .1² = .01 + .64 + .09 + .01
        assert!((brier_score(&s) - 0.75 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn ties_share_a_threshold() {
        let s = edges(&[(0.5, true), (0.5, false), (0.2, false)]);
        let roc = roc_curve(&s).unwrap();
        assert_eq!(roc.points.len(), 3);
        assert!((roc.area - pairwise_auc(&s)).abs() < 1e-15);
    }

    #[test]
    fn constant_scores_give_prevalence() {
        let s = edges(&[(0.3, true), (0.3, false), (0.3, false), (0.3, false)]);
        let pr = pr_curve(&s).unwrap();
        assert_eq!(pr.points.len(), 1);
        assert_eq!(pr.points[0].y, 0.25);
        assert_eq!(roc_curve(&s).unwrap().area, 0.5);
    }

    #[test]
    fn random_scores_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pairs: Vec<(f64, bool)> = (0..20_000)
            .map(|_| (rng.random::<f64>(), rng.random_bool(0.3)))
            .collect();
        let s = edges(&pairs);
        assert!((roc_curve(&s).unwrap().area - 0.5).abs() < 0.02);
    }

    #[test]
    fn degenerate_labels() {
        let all_neg = edges(&[(0.1, false), (0.2, false)]);
        assert!(matches!(
            roc_curve(&all_neg),
            Err(BfcsError::DegenerateLabels(_))
        ));
        assert!(matches!(
            pr_curve(&all_neg),
            Err(BfcsError::DegenerateLabels(_))
        ));
        let all_pos = edges(&[(0.1, true), (0.2, true)]);
        assert!(roc_curve(&all_pos).is_err());
        assert_eq!(pr_curve(&all_pos).unwrap().area, 1.0);
    }

    #[test]
    fn brier_minimized_by_prevalence_among_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let labels: Vec<bool> = (0..1000).map(|_| rng.random_bool(0.2)).collect();
        let prevalence = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64;
        let at =
            |c: f64| brier_score(&ScoredEdges::new(vec![c; labels.len()], labels.clone()).unwrap());
        let best = at(prevalence);
        for k in 0..=100 {
            assert!(at(k as f64 / 100.0) >= best - 1e-15);
        }
    }

    fn record(a: &str, b: &str, p: f64) -> RegulationRecord {
        RegulationRecord {
            regulator: a.into(),
            target: b.into(),
            probability: p,
            best_marker: None,
        }
    }

    #[test]
    fn labels_from_truth() {
        let preds = vec![
            record("A", "B", 0.9),
            record("B", "A", 0.2),
            record("A", "C", 0.1),
            record("C", "A", 0.0),
            record("B", "C", 0.6),
            record("C", "B", 0.3),
        ];
        let truth = vec![
            ("A".to_string(), "B".to_string()),
            ("B".to_string(), "C".to_string()),
        ];
        let s = ScoredEdges::from_predictions(&preds, &truth).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.positives(), 2);
        let (_, _, summary) = evaluate(&s).unwrap();
        assert_eq!(summary.auc_roc, 1.0);
        assert_eq!(summary.auprc, 1.0);
    }

    #[test]
    fn missing_pair_is_named() {
        let preds = vec![record("A", "B", 0.9), record("B", "A", 0.2)];
        let truth = vec![("A".to_string(), "C".to_string())];
        let err = ScoredEdges::from_predictions(&preds, &truth).unwrap_err();
        match err {
            BfcsError::LabelMismatch(msg) => assert!(msg.contains("A -> C"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let dup = vec![
            record("A", "B", 0.9),
            record("A", "B", 0.2),
            record("B", "A", 0.1),
        ];
        assert!(matches!(
            ScoredEdges::from_predictions(&dup, &[]),
            Err(BfcsError::LabelMismatch(_))
        ));
    }
}
